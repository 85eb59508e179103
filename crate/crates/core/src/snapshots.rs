//! Parameter sampling and the offline snapshot matrix.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alg2::{Alg2Config, Alg2Solver, YieldField};
use crate::io::{fmt_real, LineReader};
use crate::mesh::Mesh;
use crate::{fingerprint, Error, Result};

/// Axis-aligned box in parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterBounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ParameterBounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::invalid("bounds need matching, non-empty lo/hi"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && l <= h)) {
            return Err(Error::invalid(format!("invalid bounds lo={lo:?} hi={hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    /// The same interval in every one of `dim` dimensions.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    /// Smallest box holding every sample.
    pub fn enclosing(samples: &[Vec<f64>]) -> Result<Self> {
        let first = samples.first().ok_or_else(|| Error::invalid("no samples"))?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for p in samples {
            if p.len() != lo.len() {
                return Err(Error::dims("sample", lo.len(), p.len()));
            }
            for (j, v) in p.iter().enumerate() {
                lo[j] = lo[j].min(*v);
                hi[j] = hi[j].max(*v);
            }
        }
        Self::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(&self.lo).zip(&self.hi).all(|((v, l), h)| l <= v && v <= h)
    }

    /// Maps a point of the unit cube into the box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.lo).zip(&self.hi).map(|((t, l), h)| l + t * (h - l)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingScheme {
    Uniform,
    Halton,
}

impl std::str::FromStr for SamplingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "halton" => Ok(Self::Halton),
            other => Err(Error::invalid(format!("unknown sampling scheme '{other}'"))),
        }
    }
}

/// Independent uniform draws in `bounds`, reproducible from `seed`.
pub fn sample_uniform(count: usize, bounds: &ParameterBounds, seed: u64) -> Result<Vec<Vec<f64>>> {
    if count < 1 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let unit: Vec<f64> = (0..bounds.dim()).map(|_| rng.random::<f64>()).collect();
            bounds.from_unit(&unit)
        })
        .collect())
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut scale = inv_base;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * scale;
        index /= base;
        scale *= inv_base;
    }
    value
}

/// First `count` Halton points in `(0,1)^dim`, indices starting at 1.
pub fn halton(count: usize, dim: usize) -> Result<Vec<Vec<f64>>> {
    const BASES: [u64; 2] = [2, 3];
    if count < 1 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    if !(1..=BASES.len()).contains(&dim) {
        return Err(Error::invalid(format!("Halton sampling supports dimension 1 or 2, got {dim}")));
    }
    Ok((1..=count as u64).map(|i| BASES[..dim].iter().map(|&b| radical_inverse(i, b)).collect()).collect())
}

pub fn sample(scheme: SamplingScheme, count: usize, bounds: &ParameterBounds, seed: u64) -> Result<Vec<Vec<f64>>> {
    match scheme {
        SamplingScheme::Uniform => sample_uniform(count, bounds, seed),
        SamplingScheme::Halton => Ok(halton(count, bounds.dim())?.iter().map(|p| bounds.from_unit(p)).collect()),
    }
}

/// Full-order solutions at sampled parameters, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub samples: Vec<Vec<f64>>,
    pub converged: Vec<bool>,
    columns: Vec<Vec<f64>>,
    n: usize,
    pub seed: u64,
    pub mesh_fingerprint: String,
    pub solver_fingerprint: String,
}

impl SnapshotSet {
    pub fn new(
        samples: Vec<Vec<f64>>,
        columns: Vec<Vec<f64>>,
        converged: Vec<bool>,
        seed: u64,
        mesh_fingerprint: String,
        solver_fingerprint: String,
    ) -> Result<Self> {
        let m = samples.len();
        if columns.len() != m || converged.len() != m {
            return Err(Error::dims("snapshot columns", m, columns.len()));
        }
        let n = columns.first().map_or(0, Vec::len);
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::dims("snapshot column length", n, c.len()));
        }
        let d = samples.first().map_or(0, Vec::len);
        if samples.iter().any(|s| s.len() != d) {
            return Err(Error::invalid("samples have inconsistent dimension"));
        }
        Ok(Self { samples, converged, columns, n, seed, mesh_fingerprint, solver_fingerprint })
    }

    /// Vector length `N`.
    pub fn n_dofs(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn param_dim(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.columns[k]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn converged_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.converged[k]).collect()
    }

    /// Columns `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&k| k >= self.len()) {
            return Err(Error::IndexOutOfRange { index: bad, len: self.len() });
        }
        Ok(Self {
            samples: indices.iter().map(|&k| self.samples[k].clone()).collect(),
            converged: indices.iter().map(|&k| self.converged[k]).collect(),
            columns: indices.iter().map(|&k| self.columns[k].clone()).collect(),
            ..self.clone_header()
        })
    }

    /// Only the converged columns.
    pub fn converged_only(&self) -> Result<Self> {
        self.subset(&self.converged_indices())
    }

    fn clone_header(&self) -> Self {
        Self {
            samples: Vec::new(),
            converged: Vec::new(),
            columns: Vec::new(),
            n: self.n,
            seed: self.seed,
            mesh_fingerprint: self.mesh_fingerprint.clone(),
            solver_fingerprint: self.solver_fingerprint.clone(),
        }
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        let found = mesh.fingerprint();
        if found != self.mesh_fingerprint {
            return Err(Error::FingerprintMismatch {
                artifact: "snapshot archive".into(),
                expected: self.mesh_fingerprint.clone(),
                found,
            });
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "snapshots {} {} {} {}", self.n, self.len(), self.param_dim(), self.seed)?;
        writeln!(w, "{}", self.mesh_fingerprint)?;
        writeln!(w, "{}", self.solver_fingerprint)?;
        for ((p, col), ok) in self.samples.iter().zip(&self.columns).zip(&self.converged) {
            write!(w, "param")?;
            for v in p {
                write!(w, " {}", fmt_real(*v))?;
            }
            writeln!(w, " {}", u8::from(*ok))?;
            for v in col {
                writeln!(w, "{}", fmt_real(*v))?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = LineReader::new(r);
        let (ln, head) = lines.next_tokens()?;
        if head.len() != 5 || head[0] != "snapshots" {
            return Err(Error::parse(ln, "expected 'snapshots N M d seed'"));
        }
        let n: usize = lines.parse_at(ln, &head[1])?;
        let m: usize = lines.parse_at(ln, &head[2])?;
        let d: usize = lines.parse_at(ln, &head[3])?;
        let seed: u64 = lines.parse_at(ln, &head[4])?;
        let mesh_fingerprint = lines.next_line()?.1.trim().to_owned();
        let solver_fingerprint = lines.next_line()?.1.trim().to_owned();
        let mut samples = Vec::with_capacity(m);
        let mut converged = Vec::with_capacity(m);
        let mut columns = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, tok) = lines.next_tokens()?;
            if tok.len() != d + 2 || tok[0] != "param" {
                return Err(Error::parse(ln, format!("expected 'param' with {d} values and a flag")));
            }
            samples.push(tok[1..=d].iter().map(|t| lines.parse_at(ln, t)).collect::<Result<Vec<f64>>>()?);
            converged.push(match tok[d + 1].as_str() {
                "1" => true,
                "0" => false,
                _ => return Err(Error::parse(ln, "converged flag must be 0 or 1")),
            });
            columns.push((0..n).map(|_| lines.next_value()).collect::<Result<Vec<f64>>>()?);
        }
        let mut set = Self::new(samples, columns, converged, seed, mesh_fingerprint, solver_fingerprint)?;
        set.n = n;
        Ok(set)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(f)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Fingerprint recorded for snapshots produced with `config`.
pub fn solver_fingerprint(config: &Alg2Config) -> String {
    fingerprint(config.describe().as_bytes())
}

/// Runs the full model once per sample. Columns are keyed by sample index,
/// so the result does not depend on `workers`.
pub fn generate_snapshots<F>(
    mesh: &Mesh,
    samples: &[Vec<f64>],
    config: &Alg2Config,
    yield_field: F,
    seed: u64,
    workers: usize,
) -> Result<SnapshotSet>
where
    F: Fn(&Mesh, &[f64]) -> Result<YieldField> + Sync,
{
    if samples.is_empty() {
        return Err(Error::invalid("no samples given"));
    }
    let solver = Alg2Solver::new(mesh, *config)?;
    let run = |p: &Vec<f64>| -> Result<(Vec<f64>, bool)> {
        let res = solver.solve(&yield_field(mesh, p)?)?;
        Ok((res.u.0, res.converged))
    };
    let results: Vec<Result<(Vec<f64>, bool)>> = if workers <= 1 {
        samples.iter().map(run).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?
            .install(|| samples.par_iter().map(run).collect())
    };
    let mut columns = Vec::with_capacity(samples.len());
    let mut converged = Vec::with_capacity(samples.len());
    for r in results {
        let (u, ok) = r?;
        columns.push(u);
        converged.push(ok);
    }
    if !converged.iter().any(|&c| c) {
        return Err(Error::NoConvergedSnapshots);
    }
    SnapshotSet::new(samples.to_vec(), columns, converged, seed, mesh.fingerprint(), solver_fingerprint(config))
}
