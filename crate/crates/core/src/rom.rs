//! Online stage: POD basis plus network as a surrogate for the full model.
//!
//! Physical scaling: with yield stress `τ_s`, plastic viscosity `μ`, length
//! `L` and pressure gradient `∇p`, the Bingham number is `B = τ_s/(L ∇p)` and
//! the physical velocity is `(L² ∇p/μ) û`. The physical flow rate over the
//! cross-section of area `L²|Ω̂|` is therefore `(L⁴ ∇p/μ) Q̂`.

use std::io::Write;
use std::time::Instant;

use crate::alg2::{Alg2Config, Alg2Solver, YieldField};
use crate::ann::{split_indices, train, Dataset, LossHistory, Normalization, TrainConfig, TrainedNetwork};
use crate::fem::{assemble_load, P1Field};
use crate::io::fmt_real;
use crate::mesh::Mesh;
use crate::pod::PodBasis;
use crate::snapshots::{ParameterBounds, SnapshotSet};
use crate::{Error, Result};

/// Surrogate `û(p) = U ĉ(p)` bound to a mesh.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    basis: PodBasis,
    net: TrainedNetwork,
    boundary: Vec<usize>,
    /// `∫ φ_i`, so that the flow rate of a nodal vector is a dot product.
    weights: Vec<f64>,
    bounds: ParameterBounds,
}

/// Output of [`ReducedModel::evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub field: P1Field,
    pub out_of_bounds: bool,
}

impl ReducedModel {
    pub fn new(basis: PodBasis, net: TrainedNetwork, mesh: &Mesh) -> Result<Self> {
        basis.check_mesh(mesh)?;
        let found = basis.fingerprint();
        if found != net.basis_fingerprint {
            return Err(Error::FingerprintMismatch {
                artifact: "network model".into(),
                expected: net.basis_fingerprint.clone(),
                found,
            });
        }
        if net.model.output_dim() != basis.rank() {
            return Err(Error::dims("network output", basis.rank(), net.model.output_dim()));
        }
        let (lo, hi) = net.normalization.bounds();
        let weights = assemble_load(mesh, &vec![1.0; mesh.n_triangles()])?;
        Ok(Self { basis, net, boundary: mesh.boundary().to_vec(), weights, bounds: ParameterBounds::new(lo, hi)? })
    }

    pub fn basis(&self) -> &PodBasis {
        &self.basis
    }

    pub fn network(&self) -> &TrainedNetwork {
        &self.net
    }

    pub fn param_dim(&self) -> usize {
        self.net.model.input_dim()
    }

    pub fn bounds(&self) -> &ParameterBounds {
        &self.bounds
    }

    /// Predicted POD coefficients.
    pub fn coefficients(&self, params: &[f64]) -> Result<Vec<f64>> {
        self.net.predict(params)
    }

    /// Field for given POD coefficients, with boundary values set to zero.
    pub fn field_from_coefficients(&self, c: &[f64]) -> Result<P1Field> {
        let mut u = self.basis.reconstruct(c)?;
        for &i in &self.boundary {
            u[i] = 0.0;
        }
        Ok(P1Field(u))
    }

    pub fn evaluate(&self, params: &[f64]) -> Result<Evaluation> {
        if params.len() != self.param_dim() {
            return Err(Error::dims("parameters", self.param_dim(), params.len()));
        }
        let field = self.field_from_coefficients(&self.coefficients(params)?)?;
        Ok(Evaluation { field, out_of_bounds: !self.bounds.contains(params) })
    }

    /// Dimensionless flow rate of a nodal vector on the bound mesh.
    pub fn flow_rate_of(&self, u: &[f64]) -> f64 {
        self.weights.iter().zip(u).map(|(w, v)| w * v).sum()
    }
}

/// Aggregate and per-sample relative errors in the Euclidean norm of nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// `sqrt(Σ‖û_k − u_k‖² / Σ‖u_k‖²)`.
    pub aggregate: f64,
    /// `‖û_k − u_k‖ / ‖u_k‖`; NaN for columns in the no-flow regime, where
    /// `‖u_k‖ ≤ 1e-8 max_j ‖u_j‖`.
    pub per_sample: Vec<f64>,
}

impl ErrorReport {
    /// Mean over the finite per-sample errors.
    pub fn mean_per_sample(&self) -> f64 {
        let finite: Vec<f64> = self.per_sample.iter().copied().filter(|v| v.is_finite()).collect();
        finite.iter().sum::<f64>() / finite.len().max(1) as f64
    }
}

/// Relative error of `predict` over columns `indices` of `set`.
pub fn relative_error_with<F>(set: &SnapshotSet, indices: &[usize], mut predict: F) -> Result<ErrorReport>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if indices.is_empty() {
        return Err(Error::invalid("empty test subset"));
    }
    let mut pairs = Vec::with_capacity(indices.len());
    for &k in indices {
        if k >= set.len() {
            return Err(Error::IndexOutOfRange { index: k, len: set.len() });
        }
        let u = set.column(k);
        let uh = predict(&set.samples[k])?;
        if uh.len() != u.len() {
            return Err(Error::dims("predicted field", u.len(), uh.len()));
        }
        let e2: f64 = uh.iter().zip(u).map(|(a, b)| (a - b).powi(2)).sum();
        let n2: f64 = u.iter().map(|b| b * b).sum();
        pairs.push((e2, n2));
    }
    let num: f64 = pairs.iter().map(|p| p.0).sum();
    let den: f64 = pairs.iter().map(|p| p.1).sum();
    let cutoff = 1e-16 * pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    let per_sample = pairs.iter().map(|&(e2, n2)| if n2 > cutoff { (e2 / n2).sqrt() } else { f64::NAN }).collect();
    let aggregate = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    Ok(ErrorReport { aggregate, per_sample })
}

pub fn relative_error(model: &ReducedModel, set: &SnapshotSet, indices: &[usize]) -> Result<ErrorReport> {
    relative_error_with(set, indices, |p| Ok(model.evaluate(p)?.field.0))
}

/// Everything produced by fitting a surrogate to a snapshot set.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: ReducedModel,
    /// Snapshot indices used for training and testing.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub history: LossHistory,
    pub test_error: ErrorReport,
}

/// Settings for [`fit_reduced_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
    pub test_fraction: f64,
    /// Parameter box mapped to the unit cube for the network input.
    pub bounds: ParameterBounds,
}

/// Splits the converged snapshots, trains the network on POD coefficients of
/// the training part and reports the held-out error.
pub fn fit_reduced_model(
    mesh: &Mesh,
    set: &SnapshotSet,
    basis: &PodBasis,
    settings: &FitSettings,
) -> Result<FitOutcome> {
    set.check_mesh(mesh)?;
    let usable = set.converged_indices();
    if usable.is_empty() {
        return Err(Error::NoConvergedSnapshots);
    }
    if settings.bounds.dim() != set.param_dim() {
        return Err(Error::dims("parameter bounds", set.param_dim(), settings.bounds.dim()));
    }
    let (tr, te) = split_indices(usable.len(), settings.test_fraction, settings.train.seed)?;
    let train_idx: Vec<usize> = tr.iter().map(|&i| usable[i]).collect();
    let test_idx: Vec<usize> = te.iter().map(|&i| usable[i]).collect();
    let dataset = |idx: &[usize]| -> Result<Dataset> {
        Dataset::new(
            idx.iter().map(|&k| set.samples[k].clone()).collect(),
            idx.iter().map(|&k| basis.project(set.column(k))).collect::<Result<_>>()?,
        )
    };
    let (train_raw, test_raw) = (dataset(&train_idx)?, dataset(&test_idx)?);
    let normalization = Normalization::fit(&train_raw, settings.bounds.lo(), settings.bounds.hi())?;
    let mut widths = vec![set.param_dim()];
    widths.extend(&settings.hidden);
    widths.push(basis.rank());
    let (net, history) =
        train(&normalization.apply(&train_raw), Some(&normalization.apply(&test_raw)), &widths, &settings.train)?;
    let net =
        TrainedNetwork { model: net, normalization, config: settings.train, basis_fingerprint: basis.fingerprint() };
    let model = ReducedModel::new(basis.clone(), net, mesh)?;
    let test_error = relative_error(&model, set, &test_idx)?;
    Ok(FitOutcome { model, train: train_idx, test: test_idx, history, test_error })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Pa.
    pub yield_stress: f64,
    /// Pa·s.
    pub viscosity: f64,
    /// m.
    pub length: f64,
}

impl PhysicalParams {
    pub fn new(yield_stress: f64, viscosity: f64, length: f64) -> Result<Self> {
        let p = Self { yield_stress, viscosity, length };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.yield_stress >= 0.0 && self.viscosity > 0.0 && self.length > 0.0)
            || ![self.yield_stress, self.viscosity, self.length].iter().all(|v| v.is_finite())
        {
            return Err(Error::invalid(format!("invalid physical parameters {self:?}")));
        }
        Ok(())
    }

    pub fn bingham_number(&self, pressure_gradient: f64) -> f64 {
        self.yield_stress / (self.length * pressure_gradient)
    }

    /// Factor turning a dimensionless flow rate into m³/s.
    pub fn flow_scale(&self, pressure_gradient: f64) -> f64 {
        self.length.powi(4) * pressure_gradient / self.viscosity
    }
}

/// One row of a flow-rate sweep. Flow rates are physical.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub pressure_gradient: f64,
    pub bingham: f64,
    pub q_rom: f64,
    pub t_rom: f64,
    pub out_of_bounds: bool,
    pub q_full: Option<f64>,
    pub t_full: Option<f64>,
}

impl SweepRow {
    pub fn rel_err(&self) -> Option<f64> {
        self.q_full.map(|q| if q != 0.0 { (self.q_rom - q).abs() / q.abs() } else { self.q_rom.abs() })
    }
}

fn check_gradients(pressure_gradients: &[f64]) -> Result<()> {
    if pressure_gradients.is_empty() || pressure_gradients.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
        return Err(Error::invalid("pressure gradients must be positive and finite"));
    }
    Ok(())
}

/// Flow rate against pressure gradient through a one-parameter surrogate.
pub fn sweep_flow_rate(
    model: &ReducedModel,
    physical: &PhysicalParams,
    pressure_gradients: &[f64],
) -> Result<Vec<SweepRow>> {
    physical.validate()?;
    check_gradients(pressure_gradients)?;
    if model.param_dim() != 1 {
        return Err(Error::invalid("flow-rate sweeps need a one-parameter model"));
    }
    pressure_gradients
        .iter()
        .map(|&dp| {
            let start = Instant::now();
            let b = physical.bingham_number(dp);
            let eval = model.evaluate(&[b])?;
            let q = physical.flow_scale(dp) * model.flow_rate_of(&eval.field.0);
            Ok(SweepRow {
                pressure_gradient: dp,
                bingham: b,
                q_rom: q,
                t_rom: start.elapsed().as_secs_f64(),
                out_of_bounds: eval.out_of_bounds,
                q_full: None,
                t_full: None,
            })
        })
        .collect()
}

/// Fills the full-model columns of a sweep.
pub fn add_full_model(
    mesh: &Mesh,
    physical: &PhysicalParams,
    config: &Alg2Config,
    rows: &mut [SweepRow],
) -> Result<()> {
    let solver = Alg2Solver::new(mesh, *config)?;
    let weights = assemble_load(mesh, &vec![1.0; mesh.n_triangles()])?;
    for row in rows {
        let start = Instant::now();
        let res = solver.solve(&YieldField::constant(mesh, row.bingham)?)?;
        let q: f64 = weights.iter().zip(&res.u.0).map(|(w, v)| w * v).sum();
        row.q_full = Some(physical.flow_scale(row.pressure_gradient) * q);
        row.t_full = Some(start.elapsed().as_secs_f64());
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(w, "dp,B,Q_rom,Q_full,rel_err,t_rom_s,t_full_s")?;
    let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_real(r.pressure_gradient),
            fmt_real(r.bingham),
            fmt_real(r.q_rom),
            opt(r.q_full),
            opt(r.rel_err()),
            fmt_real(r.t_rom),
            opt(r.t_full)
        )?;
    }
    Ok(())
}

/// Surrogate against full model at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub params: Vec<f64>,
    /// Relative error of the nodal vector in the Euclidean norm.
    pub rel_l2: f64,
    /// Relative error of the nodal vector in the max norm.
    pub rel_linf: f64,
    pub q_rom: f64,
    pub q_full: f64,
    pub t_rom: f64,
    pub t_full: f64,
    pub full_converged: bool,
    pub out_of_bounds: bool,
    pub rom_field: P1Field,
    pub full_field: P1Field,
}

impl CompareReport {
    pub fn flow_rate_error(&self) -> f64 {
        if self.q_full != 0.0 {
            (self.q_rom - self.q_full).abs() / self.q_full.abs()
        } else {
            self.q_rom.abs()
        }
    }
}

pub fn compare(model: &ReducedModel, mesh: &Mesh, params: &[f64], config: &Alg2Config) -> Result<CompareReport> {
    let start = Instant::now();
    let eval = model.evaluate(params)?;
    let t_rom = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let full = Alg2Solver::new(mesh, *config)?.solve(&YieldField::from_params(mesh, params)?)?;
    let t_full = start.elapsed().as_secs_f64();
    let (rom, exact) = (&eval.field.0, &full.u.0);
    let rel = |err: f64, norm: f64| if norm > 0.0 { err / norm } else { err };
    let diff_l2 = rom.iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let diff_inf = rom.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let norm_l2 = exact.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm_inf = exact.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(CompareReport {
        params: params.to_vec(),
        rel_l2: rel(diff_l2, norm_l2),
        rel_linf: rel(diff_inf, norm_inf),
        q_rom: model.flow_rate_of(rom),
        q_full: model.flow_rate_of(exact),
        t_rom,
        t_full,
        full_converged: full.converged,
        out_of_bounds: eval.out_of_bounds,
        rom_field: eval.field,
        full_field: full.u,
    })
}
