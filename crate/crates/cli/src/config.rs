//! Run configuration: flat `key = value` lines grouped under `[section]`
//! headers. `#` starts a comment. Every key is optional; missing keys keep
//! their defaults.
//!
//! ```text
//! [domain]
//! shape = square          # square | rectangle[:w,h] | triangle | l_shape | disk | ellipse[:a,b]
//! resolution = 64
//!
//! [solver]
//! r = 1
//! tol = 1e-6
//! max_iter = 5000
//!
//! [sampling]
//! count = 200
//! dim = 1
//! lo = 0
//! hi = 1
//! seed = 7
//! scheme = uniform        # uniform | halton
//! workers = 1
//!
//! [pod]
//! modes = 20
//!
//! [network]
//! widths = 60,50,40       # hidden layers only
//! epochs = 5000
//! batch = 32
//! learning_rate = 1e-3
//! final_learning_rate = 1e-5
//! test_fraction = 0.33
//! seed = 0
//!
//! [sweep]
//! yield_stress = 1
//! viscosity = 1
//! length = 1
//! dp_min = 1.25
//! dp_max = 50
//! points = 100
//!
//! [paths]
//! out_dir = out
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use viscorom::ann::TrainConfig;
use viscorom::rom::PhysicalParams;
use viscorom::snapshots::{ParameterBounds, SamplingScheme};
use viscorom::{fingerprint, Alg2Config, DomainSpec, Shape};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSpec {
    pub count: usize,
    pub dim: usize,
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
    pub scheme: SamplingScheme,
    pub workers: usize,
}

impl SamplingSpec {
    pub fn bounds(&self) -> Result<ParameterBounds, CliError> {
        Ok(ParameterBounds::cube(self.dim, self.lo, self.hi)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub physical: PhysicalParams,
    pub dp_min: f64,
    pub dp_max: f64,
    pub points: usize,
}

impl SweepSpec {
    /// Geometrically spaced pressure gradients from `dp_min` to `dp_max`.
    pub fn pressure_gradients(&self) -> Result<Vec<f64>, CliError> {
        if !(self.dp_min > 0.0 && self.dp_max >= self.dp_min) || self.points == 0 {
            return Err(CliError::invalid(format!(
                "sweep needs 0 < dp_min <= dp_max and at least one point, got {}..{} x {}",
                self.dp_min, self.dp_max, self.points
            )));
        }
        if self.points == 1 {
            return Ok(vec![self.dp_min]);
        }
        let ratio = self.dp_max / self.dp_min;
        Ok((0..self.points).map(|i| self.dp_min * ratio.powf(i as f64 / (self.points - 1) as f64)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub solver: Alg2Config,
    pub sampling: SamplingSpec,
    pub modes: usize,
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
    pub test_fraction: f64,
    pub sweep: SweepSpec,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: DomainSpec::new(Shape::UnitSquare, 64),
            solver: Alg2Config::default(),
            sampling: SamplingSpec {
                count: 200,
                dim: 1,
                lo: 0.0,
                hi: 1.0,
                seed: 7,
                scheme: SamplingScheme::Uniform,
                workers: 1,
            },
            modes: 20,
            hidden: vec![60, 50, 40],
            train: TrainConfig::default(),
            test_fraction: 0.33,
            sweep: SweepSpec {
                physical: PhysicalParams { yield_stress: 1.0, viscosity: 1.0, length: 1.0 },
                dp_min: 1.25,
                dp_max: 50.0,
                points: 100,
            },
            out_dir: PathBuf::from("out"),
        }
    }
}

pub fn parse_widths(s: &str) -> Result<Vec<usize>, CliError> {
    let widths: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::invalid(format!("cannot parse widths '{s}'")))?;
    if widths.is_empty() || widths.contains(&0) {
        return Err(CliError::invalid(format!("widths must be positive, got '{s}'")));
    }
    Ok(widths)
}

fn value<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::parse(line, format!("bad value '{v}' for '{key}'")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_owned();
                continue;
            }
            let (key, v) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| CliError::parse(ln, format!("expected 'key = value', found '{line}'")))?;
            match (section.as_str(), key) {
                ("domain", "shape") => {
                    cfg.domain.shape = v.parse().map_err(|e: viscorom::Error| CliError::parse(ln, e.to_string()))?
                }
                ("domain", "resolution") => cfg.domain.resolution = value(ln, key, v)?,
                ("solver", "r") => cfg.solver.r = value(ln, key, v)?,
                ("solver", "tol") => cfg.solver.tol = value(ln, key, v)?,
                ("solver", "max_iter") => cfg.solver.max_iter = value(ln, key, v)?,
                ("sampling", "count") => cfg.sampling.count = value(ln, key, v)?,
                ("sampling", "dim") => cfg.sampling.dim = value(ln, key, v)?,
                ("sampling", "lo") => cfg.sampling.lo = value(ln, key, v)?,
                ("sampling", "hi") => cfg.sampling.hi = value(ln, key, v)?,
                ("sampling", "seed") => cfg.sampling.seed = value(ln, key, v)?,
                ("sampling", "scheme") => {
                    cfg.sampling.scheme = v.parse().map_err(|e: viscorom::Error| CliError::parse(ln, e.to_string()))?
                }
                ("sampling", "workers") => cfg.sampling.workers = value(ln, key, v)?,
                ("pod", "modes") => cfg.modes = value(ln, key, v)?,
                ("network", "widths") => cfg.hidden = parse_widths(v).map_err(|e| CliError::parse(ln, e.message))?,
                ("network", "epochs") => cfg.train.epochs = value(ln, key, v)?,
                ("network", "batch") => cfg.train.batch_size = value(ln, key, v)?,
                ("network", "learning_rate") => cfg.train.learning_rate = value(ln, key, v)?,
                ("network", "final_learning_rate") => cfg.train.final_learning_rate = value(ln, key, v)?,
                ("network", "test_fraction") => cfg.test_fraction = value(ln, key, v)?,
                ("network", "seed") => cfg.train.seed = value(ln, key, v)?,
                ("sweep", "yield_stress") => cfg.sweep.physical.yield_stress = value(ln, key, v)?,
                ("sweep", "viscosity") => cfg.sweep.physical.viscosity = value(ln, key, v)?,
                ("sweep", "length") => cfg.sweep.physical.length = value(ln, key, v)?,
                ("sweep", "dp_min") => cfg.sweep.dp_min = value(ln, key, v)?,
                ("sweep", "dp_max") => cfg.sweep.dp_max = value(ln, key, v)?,
                ("sweep", "points") => cfg.sweep.points = value(ln, key, v)?,
                ("paths", "out_dir") => cfg.out_dir = PathBuf::from(v),
                _ => return Err(CliError::parse(ln, format!("unknown key '{key}' in section [{section}]"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::missing(format!("config file '{}': {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.domain.validate()?;
        self.solver.validate()?;
        self.train.validate()?;
        self.sampling.bounds()?;
        self.sweep.physical.validate()?;
        if self.sampling.count == 0 {
            return Err(CliError::invalid("sampling count must be at least 1"));
        }
        if self.modes == 0 {
            return Err(CliError::invalid("modes must be at least 1"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(CliError::invalid(format!("test fraction {} must lie in (0,1)", self.test_fraction)));
        }
        Ok(())
    }

    /// Canonical text form; parsing it gives back the same config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let widths: Vec<String> = self.hidden.iter().map(ToString::to_string).collect();
        let scheme = match self.sampling.scheme {
            SamplingScheme::Uniform => "uniform",
            SamplingScheme::Halton => "halton",
        };
        let (d, so, sa, t, sw) = (&self.domain, &self.solver, &self.sampling, &self.train, &self.sweep);
        let _ = writeln!(s, "[domain]\nshape = {}\nresolution = {}", d.shape, d.resolution);
        let _ = writeln!(s, "[solver]\nr = {:e}\ntol = {:e}\nmax_iter = {}", so.r, so.tol, so.max_iter);
        let _ = writeln!(
            s,
            "[sampling]\ncount = {}\ndim = {}\nlo = {:e}\nhi = {:e}\nseed = {}\nscheme = {scheme}\nworkers = {}",
            sa.count, sa.dim, sa.lo, sa.hi, sa.seed, sa.workers
        );
        let _ = writeln!(s, "[pod]\nmodes = {}", self.modes);
        let _ = writeln!(
            s,
            "[network]\nwidths = {}\nepochs = {}\nbatch = {}\nlearning_rate = {:e}\nfinal_learning_rate = {:e}\ntest_fraction = {:e}\nseed = {}",
            widths.join(","),
            t.epochs,
            t.batch_size,
            t.learning_rate,
            t.final_learning_rate,
            self.test_fraction,
            t.seed
        );
        let _ = writeln!(
            s,
            "[sweep]\nyield_stress = {:e}\nviscosity = {:e}\nlength = {:e}\ndp_min = {:e}\ndp_max = {:e}\npoints = {}",
            sw.physical.yield_stress, sw.physical.viscosity, sw.physical.length, sw.dp_min, sw.dp_max, sw.points
        );
        let _ = writeln!(s, "[paths]\nout_dir = {}", self.out_dir.display());
        s
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(self.to_text().as_bytes())
    }
}
