use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use viscorom::alg2::Alg2Solver;
use viscorom::io::{fmt_real, write_field};
use viscorom::rom::{add_full_model, compare, fit_reduced_model, sweep_flow_rate, write_sweep_csv};
use viscorom::snapshots::{generate_snapshots, sample, SamplingScheme};
use viscorom::{
    generate_mesh, DomainSpec, FitSettings, Mesh, PodBasis, ReducedModel, Shape, SnapshotSet, TrainedNetwork,
    YieldField,
};

use crate::config::{parse_widths, RunConfig};
use crate::{Cli, CliError, Command, DomainArgs, ModelArgs, NetworkArgs, SamplingArgs, SolverArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Square duct, B uniform on [0,1], 200 snapshots.
    #[value(name = "square-1param")]
    SquareOneParam,
    /// Square duct, two-zone (B1, B2) on [0,0.8]², 500 Halton snapshots.
    #[value(name = "two-param")]
    TwoParam,
    /// Disk duct, flow rate against pressure gradient.
    #[value(name = "flow-sweep")]
    FlowSweep,
}

pub const MESH_FILE: &str = "mesh.txt";
pub const FIELD_FILE: &str = "u.field";
pub const SNAPSHOT_FILE: &str = "snapshots.txt";
pub const BASIS_FILE: &str = "pod.txt";
pub const MODEL_FILE: &str = "model.mlp";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const REPORT_FILE: &str = "report.txt";
pub const CONFIG_FILE: &str = "config.ini";

fn apply_domain(cfg: &mut RunConfig, a: &DomainArgs) -> Result<(), CliError> {
    if let Some(d) = &a.domain {
        cfg.domain.shape = d.parse::<Shape>()?;
    }
    if let Some(n) = a.resolution {
        cfg.domain.resolution = n;
    }
    Ok(())
}

fn apply_solver(cfg: &mut RunConfig, a: &SolverArgs) {
    if let Some(r) = a.r {
        cfg.solver.r = r;
    }
    if let Some(t) = a.tol {
        cfg.solver.tol = t;
    }
    if let Some(m) = a.max_iter {
        cfg.solver.max_iter = m;
    }
}

fn apply_sampling(cfg: &mut RunConfig, a: &SamplingArgs) -> Result<(), CliError> {
    let s = &mut cfg.sampling;
    if let Some(v) = a.count {
        s.count = v;
    }
    if let Some(v) = a.seed {
        s.seed = v;
    }
    if let Some(v) = &a.scheme {
        s.scheme = v.parse::<SamplingScheme>()?;
    }
    if let Some(v) = a.dim {
        s.dim = v;
    }
    if let Some(v) = a.lo {
        s.lo = v;
    }
    if let Some(v) = a.hi {
        s.hi = v;
    }
    if let Some(v) = a.workers {
        s.workers = v;
    }
    Ok(())
}

fn apply_network(cfg: &mut RunConfig, a: &NetworkArgs) -> Result<(), CliError> {
    if let Some(v) = a.modes {
        cfg.modes = v;
    }
    if let Some(v) = &a.widths {
        cfg.hidden = parse_widths(v)?;
    }
    if let Some(v) = a.epochs {
        cfg.train.epochs = v;
    }
    if let Some(v) = a.batch {
        cfg.train.batch_size = v;
    }
    if let Some(v) = a.test_fraction {
        cfg.test_fraction = v;
    }
    if let Some(v) = a.net_seed {
        cfg.train.seed = v;
    }
    Ok(())
}

fn require(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::missing(format!("{what} '{}' not found", path.display())))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    create_dir_for(path)?;
    let f = File::create(path).map_err(|e| CliError::new("io", format!("cannot write '{}': {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn load_snapshots(path: &Path) -> Result<SnapshotSet, CliError> {
    require(path, "snapshot archive")?;
    Ok(SnapshotSet::load(path)?)
}

fn load_basis(path: &Path) -> Result<PodBasis, CliError> {
    require(path, "POD basis")?;
    Ok(PodBasis::load(path)?)
}

fn load_model(mesh: &Mesh, a: &ModelArgs, out_dir: &Path) -> Result<ReducedModel, CliError> {
    let model_path = a.model.clone().unwrap_or_else(|| out_dir.join(MODEL_FILE));
    require(&model_path, "trained model")?;
    let basis = load_basis(&a.basis.clone().unwrap_or_else(|| out_dir.join(BASIS_FILE)))?;
    let net = TrainedNetwork::load(&model_path)?;
    Ok(ReducedModel::new(basis, net, mesh)?)
}

fn mesh_for(cfg: &RunConfig) -> Result<Mesh, CliError> {
    Ok(generate_mesh(&cfg.domain)?)
}

fn fit_settings(cfg: &RunConfig) -> Result<FitSettings, CliError> {
    Ok(FitSettings {
        hidden: cfg.hidden.clone(),
        train: cfg.train,
        test_fraction: cfg.test_fraction,
        bounds: cfg.sampling.bounds()?,
    })
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    match cli.command {
        Command::Mesh { domain, out: path } => {
            apply_domain(&mut cfg, &domain)?;
            cfg.validate()?;
            let mesh = mesh_for(&cfg)?;
            let path = path.unwrap_or_else(|| cfg.out_dir.join(MESH_FILE));
            mesh.write_to(create(&path)?)?;
            writeln!(
                out,
                "mesh {} vertices {} triangles {} fingerprint {} -> {}",
                cfg.domain.shape,
                mesh.n_vertices(),
                mesh.n_triangles(),
                mesh.fingerprint(),
                path.display()
            )?;
        }
        Command::Solve { domain, solver, params, out: path, diagnostics } => {
            apply_domain(&mut cfg, &domain)?;
            apply_solver(&mut cfg, &solver);
            cfg.validate()?;
            let p = params.values()?;
            let mesh = mesh_for(&cfg)?;
            let start = Instant::now();
            let res = Alg2Solver::new(&mesh, cfg.solver)?.solve(&YieldField::from_params(&mesh, &p)?)?;
            let elapsed = start.elapsed().as_secs_f64();
            let path = path.unwrap_or_else(|| cfg.out_dir.join(FIELD_FILE));
            write_field(create(&path)?, &res.u.0)?;
            if let Some(d) = diagnostics {
                res.write_diagnostics_csv(create(&d)?)?;
            }
            writeln!(
                out,
                "params {:?} converged {} iterations {} max_u {} flow_rate {} time_s {:.3} -> {}",
                p,
                res.converged,
                res.iterations,
                fmt_real(res.u.max()),
                fmt_real(viscorom::alg2::flow_rate(&mesh, &res.u)?),
                elapsed,
                path.display()
            )?;
        }
        Command::Snapshots { domain, solver, sampling, out: path } => {
            apply_domain(&mut cfg, &domain)?;
            apply_solver(&mut cfg, &solver);
            apply_sampling(&mut cfg, &sampling)?;
            cfg.validate()?;
            let mesh = mesh_for(&cfg)?;
            let path = path.unwrap_or_else(|| cfg.out_dir.join(SNAPSHOT_FILE));
            let (set, secs) = run_snapshots(&cfg, &mesh)?;
            set.save(create_dir_for(&path)?)?;
            writeln!(
                out,
                "snapshots {} converged {} time_s {:.1} -> {}",
                set.len(),
                set.converged_indices().len(),
                secs,
                path.display()
            )?;
        }
        Command::Pod { snapshots, modes, out: path, singular_values } => {
            if let Some(m) = modes {
                cfg.modes = m;
            }
            cfg.validate()?;
            let set = load_snapshots(&snapshots.unwrap_or_else(|| cfg.out_dir.join(SNAPSHOT_FILE)))?;
            let basis = PodBasis::from_snapshots(&set, cfg.modes)?;
            let path = path.unwrap_or_else(|| cfg.out_dir.join(BASIS_FILE));
            basis.save(create_dir_for(&path)?)?;
            if let Some(p) = singular_values {
                write_singular_values(&basis, create(&p)?)?;
            }
            writeln!(
                out,
                "pod rank {} sigma_ratio {} -> {}",
                basis.rank(),
                fmt_real(tail_ratio(&basis)),
                path.display()
            )?;
        }
        Command::Train { domain, network, snapshots, basis, lo, hi, out: path, history } => {
            apply_domain(&mut cfg, &domain)?;
            apply_network(&mut cfg, &network)?;
            let set = load_snapshots(&snapshots.unwrap_or_else(|| cfg.out_dir.join(SNAPSHOT_FILE)))?;
            let basis = load_basis(&basis.unwrap_or_else(|| cfg.out_dir.join(BASIS_FILE)))?;
            cfg.sampling.dim = set.param_dim();
            if let Some(v) = lo {
                cfg.sampling.lo = v;
            }
            if let Some(v) = hi {
                cfg.sampling.hi = v;
            }
            cfg.validate()?;
            let mesh = mesh_for(&cfg)?;
            let start = Instant::now();
            let fit = fit_reduced_model(&mesh, &set, &basis, &fit_settings(&cfg)?)?;
            let path = path.unwrap_or_else(|| cfg.out_dir.join(MODEL_FILE));
            fit.model.network().save(create_dir_for(&path)?)?;
            if let Some(h) = history {
                write_history(&fit.history, create(&h)?)?;
            }
            writeln!(
                out,
                "train {} test {} test_rel_error {} time_s {:.1} -> {}",
                fit.train.len(),
                fit.test.len(),
                fmt_real(fit.test_error.aggregate),
                start.elapsed().as_secs_f64(),
                path.display()
            )?;
        }
        Command::Eval { domain, model, params, out: path } => {
            apply_domain(&mut cfg, &domain)?;
            cfg.validate()?;
            let mesh = mesh_for(&cfg)?;
            let model = load_model(&mesh, &model, &cfg.out_dir)?;
            let p = params.values()?;
            let start = Instant::now();
            let eval = model.evaluate(&p)?;
            let elapsed = start.elapsed().as_secs_f64();
            let path = path.unwrap_or_else(|| cfg.out_dir.join(FIELD_FILE));
            write_field(create(&path)?, &eval.field.0)?;
            writeln!(
                out,
                "params {:?} flow_rate {} max_u {} out_of_bounds {} time_s {:.2e} -> {}",
                p,
                fmt_real(model.flow_rate_of(&eval.field.0)),
                fmt_real(eval.field.max()),
                eval.out_of_bounds,
                elapsed,
                path.display()
            )?;
        }
        Command::Sweep { domain, model, solver, tau_s, mu, length, dp_min, dp_max, points, full, out: path } => {
            apply_domain(&mut cfg, &domain)?;
            apply_solver(&mut cfg, &solver);
            let sw = &mut cfg.sweep;
            sw.physical.yield_stress = tau_s.unwrap_or(sw.physical.yield_stress);
            sw.physical.viscosity = mu.unwrap_or(sw.physical.viscosity);
            sw.physical.length = length.unwrap_or(sw.physical.length);
            sw.dp_min = dp_min.unwrap_or(sw.dp_min);
            sw.dp_max = dp_max.unwrap_or(sw.dp_max);
            sw.points = points.unwrap_or(sw.points);
            cfg.validate()?;
            let mesh = mesh_for(&cfg)?;
            let model = load_model(&mesh, &model, &cfg.out_dir)?;
            let path = path.unwrap_or_else(|| cfg.out_dir.join(SWEEP_FILE));
            let summary = run_sweep(&cfg, &mesh, &model, full, &path)?;
            writeln!(out, "{summary} -> {}", path.display())?;
        }
        Command::Compare { domain, model, solver, params, out: path } => {
            apply_domain(&mut cfg, &domain)?;
            apply_solver(&mut cfg, &solver);
            cfg.validate()?;
            let mesh = mesh_for(&cfg)?;
            let model = load_model(&mesh, &model, &cfg.out_dir)?;
            let rep = compare(&model, &mesh, &params.values()?, &cfg.solver)?;
            let text = compare_text(&rep);
            if let Some(p) = path {
                create(&p)?.write_all(text.as_bytes())?;
            }
            out.write_all(text.as_bytes())?;
        }
        Command::Reproduce { experiment, domain, solver, sampling, network, out: dir } => {
            if cli.config.is_none() {
                preset(&mut cfg, experiment);
            }
            apply_domain(&mut cfg, &domain)?;
            apply_solver(&mut cfg, &solver);
            apply_sampling(&mut cfg, &sampling)?;
            apply_network(&mut cfg, &network)?;
            if let Some(d) = dir {
                cfg.out_dir = d;
            }
            cfg.validate()?;
            reproduce(&cfg, experiment, out)?;
        }
    }
    Ok(())
}

fn create_dir_for(path: &Path) -> Result<&Path, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::new("io", format!("cannot create '{}': {e}", dir.display())))?;
    }
    Ok(path)
}

fn run_snapshots(cfg: &RunConfig, mesh: &Mesh) -> Result<(SnapshotSet, f64), CliError> {
    let s = &cfg.sampling;
    let samples = sample(s.scheme, s.count, &s.bounds()?, s.seed)?;
    let start = Instant::now();
    let set = generate_snapshots(mesh, &samples, &cfg.solver, YieldField::from_params, s.seed, s.workers)?;
    Ok((set, start.elapsed().as_secs_f64()))
}

fn tail_ratio(basis: &PodBasis) -> f64 {
    let sv = basis.singular_values();
    let k = basis.rank().min(sv.len() - 1);
    if sv[0] > 0.0 {
        sv[k] / sv[0]
    } else {
        0.0
    }
}

fn write_singular_values<W: Write>(basis: &PodBasis, mut w: W) -> Result<(), CliError> {
    writeln!(w, "k,sigma,sigma_over_sigma1")?;
    let sv = basis.singular_values();
    for (k, s) in sv.iter().enumerate() {
        writeln!(w, "{},{},{}", k + 1, fmt_real(*s), fmt_real(s / sv[0]))?;
    }
    Ok(())
}

fn write_history<W: Write>(h: &viscorom::ann::LossHistory, mut w: W) -> Result<(), CliError> {
    writeln!(w, "epoch,train_mse,test_mse")?;
    for (i, tr) in h.train.iter().enumerate() {
        let te = h.test.get(i).map(|v| fmt_real(*v)).unwrap_or_default();
        writeln!(w, "{},{},{}", i + 1, fmt_real(*tr), te)?;
    }
    Ok(())
}

/// Worst relative flow-rate difference where the full flow rate exceeds
/// this threshold.
pub const FLOW_THRESHOLD: f64 = 1e-3;

fn run_sweep(cfg: &RunConfig, mesh: &Mesh, model: &ReducedModel, full: bool, path: &Path) -> Result<String, CliError> {
    let dps = cfg.sweep.pressure_gradients()?;
    let start = Instant::now();
    let mut rows = sweep_flow_rate(model, &cfg.sweep.physical, &dps)?;
    let t_rom = start.elapsed().as_secs_f64();
    let mut summary = format!("sweep points {} t_rom_s {:.3e}", rows.len(), t_rom);
    if full {
        let start = Instant::now();
        add_full_model(mesh, &cfg.sweep.physical, &cfg.solver, &mut rows)?;
        let t_full = start.elapsed().as_secs_f64();
        let worst = rows
            .iter()
            .filter(|r| r.q_full.is_some_and(|q| q > FLOW_THRESHOLD))
            .filter_map(|r| r.rel_err())
            .fold(0.0, f64::max);
        summary += &format!(" t_full_s {:.3} speedup {:.0} max_rel_err {}", t_full, t_full / t_rom, fmt_real(worst));
    }
    write_sweep_csv(&rows, create(path)?)?;
    Ok(summary)
}

fn compare_text(rep: &viscorom::rom::CompareReport) -> String {
    format!(
        "params {:?}\nrel_l2 {}\nrel_linf {}\nq_rom {}\nq_full {}\nq_rel_err {}\nt_rom_s {:.3e}\nt_full_s {:.3}\nfull_converged {}\nout_of_bounds {}\n",
        rep.params,
        fmt_real(rep.rel_l2),
        fmt_real(rep.rel_linf),
        fmt_real(rep.q_rom),
        fmt_real(rep.q_full),
        fmt_real(rep.flow_rate_error()),
        rep.t_rom,
        rep.t_full,
        rep.full_converged,
        rep.out_of_bounds
    )
}

/// Baseline settings of each experiment. r = 8 keeps ALG2 converging close
/// to the critical Bingham number.
pub fn preset(cfg: &mut RunConfig, experiment: Experiment) {
    cfg.solver.r = 8.0;
    match experiment {
        Experiment::SquareOneParam => {
            cfg.domain = DomainSpec::new(Shape::UnitSquare, 64);
            cfg.sampling.count = 200;
            cfg.sampling.dim = 1;
            (cfg.sampling.lo, cfg.sampling.hi) = (0.0, 1.0);
            cfg.sampling.scheme = SamplingScheme::Uniform;
        }
        Experiment::TwoParam => {
            cfg.domain = DomainSpec::new(Shape::UnitSquare, 64);
            cfg.sampling.count = 500;
            cfg.sampling.dim = 2;
            (cfg.sampling.lo, cfg.sampling.hi) = (0.0, 0.8);
            cfg.sampling.scheme = SamplingScheme::Halton;
        }
        Experiment::FlowSweep => {
            cfg.domain = DomainSpec::new(Shape::Ellipse { a: 1.0, b: 1.0 }, 32);
            cfg.sampling.count = 200;
            cfg.sampling.dim = 1;
            (cfg.sampling.lo, cfg.sampling.hi) = (0.0, 1.0);
            cfg.sampling.scheme = SamplingScheme::Uniform;
        }
    }
}

fn reproduce(cfg: &RunConfig, experiment: Experiment, out: &mut dyn Write) -> Result<(), CliError> {
    let dir = &cfg.out_dir;
    let mut report = String::new();
    let mut note = |out: &mut dyn Write, line: String| -> Result<(), CliError> {
        writeln!(out, "{line}")?;
        report.push_str(&line);
        report.push('\n');
        Ok(())
    };
    create(&dir.join(CONFIG_FILE))?.write_all(cfg.to_text().as_bytes())?;
    note(
        out,
        format!("experiment {}", experiment.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default()),
    )?;
    note(out, format!("config_fingerprint {}", cfg.fingerprint()))?;

    let mesh = mesh_for(cfg)?;
    mesh.write_to(create(&dir.join(MESH_FILE))?)?;
    note(
        out,
        format!("mesh {} n_vertices {} fingerprint {}", cfg.domain.shape, mesh.n_vertices(), mesh.fingerprint()),
    )?;

    let (set, t_snap) = run_snapshots(cfg, &mesh)?;
    set.save(dir.join(SNAPSHOT_FILE))?;
    let conv = set.converged_indices().len();
    note(out, format!("snapshots {} converged {} time_s {:.1}", set.len(), conv, t_snap))?;

    let full_rank = PodBasis::from_snapshots(&set, conv.min(set.n_dofs()))?;
    write_singular_values(&full_rank, create(&dir.join("singular_values.csv"))?)?;
    let basis = full_rank.truncated(cfg.modes.min(full_rank.rank()))?;
    basis.save(dir.join(BASIS_FILE))?;
    note(out, format!("pod modes {} sigma_ratio {}", basis.rank(), fmt_real(tail_ratio(&basis))))?;

    let start = Instant::now();
    let fit = fit_reduced_model(&mesh, &set, &basis, &fit_settings(cfg)?)?;
    let t_train = start.elapsed().as_secs_f64();
    fit.model.network().save(dir.join(MODEL_FILE))?;
    write_history(&fit.history, create(&dir.join("history.csv"))?)?;
    note(
        out,
        format!(
            "train {} test {} time_s {:.1} test_rel_error {} mean_per_sample {}",
            fit.train.len(),
            fit.test.len(),
            t_train,
            fmt_real(fit.test_error.aggregate),
            fmt_real(fit.test_error.mean_per_sample())
        ),
    )?;

    match experiment {
        Experiment::SquareOneParam => {
            // the same network trained on the full-rank basis, for comparison
            if full_rank.rank() > basis.rank() {
                let wide = fit_reduced_model(&mesh, &set, &full_rank, &fit_settings(cfg)?)?;
                note(
                    out,
                    format!("modes {} test_rel_error {}", full_rank.rank(), fmt_real(wide.test_error.aggregate)),
                )?;
            }
        }
        Experiment::TwoParam => {
            let t_full = t_snap / set.len() as f64;
            let start = Instant::now();
            for &k in &fit.test {
                fit.model.evaluate(&set.samples[k])?;
            }
            let t_rom = start.elapsed().as_secs_f64() / fit.test.len().max(1) as f64;
            note(
                out,
                format!("mean_full_solve_s {:.3} mean_rom_eval_s {:.3e} speedup {:.0}", t_full, t_rom, t_full / t_rom),
            )?;
            let rep = compare(&fit.model, &mesh, &[0.25, 0.05], &cfg.solver)?;
            write_field(create(&dir.join("u_rom.field"))?, &rep.rom_field.0)?;
            write_field(create(&dir.join("u_full.field"))?, &rep.full_field.0)?;
            note(
                out,
                format!(
                    "compare (0.25, 0.05) rel_l2 {} q_rel_err {}",
                    fmt_real(rep.rel_l2),
                    fmt_real(rep.flow_rate_error())
                ),
            )?;
        }
        Experiment::FlowSweep => {
            let summary = run_sweep(cfg, &mesh, &fit.model, true, &dir.join(SWEEP_FILE))?;
            note(out, summary)?;
        }
    }
    create(&dir.join(REPORT_FILE))?.write_all(report.as_bytes())?;
    Ok(())
}
