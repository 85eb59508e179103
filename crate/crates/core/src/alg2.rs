//! ALG2 augmented-Lagrangian iteration for the dimensionless Mosolov problem.
//!
//! With `q ≈ ∇u` and multiplier `λ`, one sweep is
//!
//! ```text
//! u ← solve  -r Δu = 1 + ∇·(λ - r q),  u = 0 on ∂Ω
//! s = λ + r ∇u
//! q ← 0                             if |s| ≤ B
//!     s / (1 + r) · (1 - B / |s|)   otherwise
//! λ ← λ + r (∇u - q)
//! ```
//!
//! starting from `q = λ = 0`. `u` is P1, `q`, `λ` and the Bingham number `B`
//! are constant per triangle. With these signs `λ` converges to the shear
//! stress `∇u + B ∇u/|∇u|`, so `|λ| ≤ B` in rigid zones; the multiplier step
//! must move against `q - ∇u` for the velocity and shrinkage steps above to
//! be a saddle-point iteration.

use std::io::Write;

use crate::fem::{
    assemble_load, assemble_stiffness, divergence_load_into, gradient_into, integrate_values, l2_norm, l2_norm_p0,
    solve_spd, CholeskyFactor, P0VectorField, P1Field, SparseSpdMatrix,
};
use crate::mesh::Mesh;
use crate::{Error, Result};

/// Denominator floor of the relative velocity change. Above the critical
/// Bingham number the iterates decay to roundoff (`~1e-18`), where a
/// relative change carries no information.
const ZERO_FLOW_FLOOR: f64 = 1e-10;

/// Per-triangle Bingham numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct YieldField(Vec<f64>);

impl YieldField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!("Bingham numbers must be finite and >= 0, got {v}")));
        }
        Ok(Self(values))
    }

    pub fn constant(mesh: &Mesh, b: f64) -> Result<Self> {
        Self::new(vec![b; mesh.n_triangles()])
    }

    /// `b_left` on triangles whose centroid has `x <= 0`, `b_right` elsewhere.
    pub fn two_zone(mesh: &Mesh, b_left: f64, b_right: f64) -> Result<Self> {
        Self::new((0..mesh.n_triangles()).map(|t| if mesh.centroid(t)[0] <= 0.0 { b_left } else { b_right }).collect())
    }

    /// Builds the field for a parameter point: one value is homogeneous,
    /// two values are the left/right split.
    pub fn from_params(mesh: &Mesh, params: &[f64]) -> Result<Self> {
        match params {
            [b] => Self::constant(mesh, *b),
            [b1, b2] => Self::two_zone(mesh, *b1, *b2),
            _ => Err(Error::invalid(format!("expected 1 or 2 parameters, got {}", params.len()))),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearSolver {
    /// Envelope Cholesky, factored once per solver.
    Cholesky,
    /// Jacobi-preconditioned CG at relative tolerance `1e-10`.
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alg2Config {
    /// Augmentation parameter.
    pub r: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub linear_solver: LinearSolver,
}

impl Default for Alg2Config {
    fn default() -> Self {
        Self { r: 1.0, tol: 1e-6, max_iter: 5000, linear_solver: LinearSolver::Cholesky }
    }
}

impl Alg2Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::invalid(format!("penalty r must be positive, got {}", self.r)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        Ok(())
    }

    /// Stable text identity used to tag artifacts produced with this config.
    pub fn describe(&self) -> String {
        let solver = match self.linear_solver {
            LinearSolver::Cholesky => "cholesky",
            LinearSolver::ConjugateGradient => "cg",
        };
        format!("alg2 r={:e} tol={:e} max_iter={} solver={solver}", self.r, self.tol, self.max_iter)
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    /// `||q - ∇u||_L2`.
    pub residual_constraint: f64,
    /// `||u_new - u_old||_L2 / ||u_new||_L2`.
    pub residual_u: f64,
    /// `∫ |∇u|²/2 + B |∇u| - u`.
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct Alg2Result {
    pub u: P1Field,
    pub q: P0VectorField,
    pub lambda: P0VectorField,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
}

impl Alg2Result {
    pub fn write_diagnostics_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "iter,residual_constraint,residual_u,objective")?;
        for h in &self.history {
            writeln!(w, "{},{:e},{:e},{:.16e}", h.iter, h.residual_constraint, h.residual_u, h.objective)?;
        }
        Ok(())
    }
}

enum Backend {
    Direct(CholeskyFactor),
    Iterative(SparseSpdMatrix),
}

/// Mesh-bound ALG2 solver; assembles and factors once, then solves for any
/// number of yield fields.
pub struct Alg2Solver<'m> {
    mesh: &'m Mesh,
    config: Alg2Config,
    backend: Backend,
    load: Vec<f64>,
}

impl<'m> Alg2Solver<'m> {
    pub fn new(mesh: &'m Mesh, config: Alg2Config) -> Result<Self> {
        config.validate()?;
        let stiffness = assemble_stiffness(mesh).with_dirichlet(mesh.boundary_mask());
        let backend = match config.linear_solver {
            LinearSolver::Cholesky => Backend::Direct(CholeskyFactor::new(&stiffness)?),
            LinearSolver::ConjugateGradient => Backend::Iterative(stiffness),
        };
        let load = assemble_load(mesh, &vec![1.0; mesh.n_triangles()])?;
        Ok(Self { mesh, config, backend, load })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn config(&self) -> &Alg2Config {
        &self.config
    }

    /// Velocity step: `r A u = F + div(λ - r q)` with zero boundary values.
    pub fn update_velocity(&self, q: &P0VectorField, lambda: &P0VectorField) -> Result<P1Field> {
        check_p0(self.mesh, q)?;
        check_p0(self.mesh, lambda)?;
        let mut u = vec![0.0; self.mesh.n_vertices()];
        let mut scratch = Scratch::new(self.mesh);
        self.velocity_into(&q.0, &lambda.0, &mut u, &mut scratch)?;
        Ok(P1Field(u))
    }

    fn velocity_into(&self, q: &[[f64; 2]], lambda: &[[f64; 2]], u: &mut [f64], s: &mut Scratch) -> Result<()> {
        let r = self.config.r;
        for ((w, l), q) in s.flux.iter_mut().zip(lambda).zip(q) {
            *w = [l[0] - r * q[0], l[1] - r * q[1]];
        }
        s.rhs.copy_from_slice(&self.load);
        divergence_load_into(self.mesh, &s.flux, &mut s.rhs);
        let inv_r = 1.0 / r;
        for (b, &fixed) in s.rhs.iter_mut().zip(self.mesh.boundary_mask()) {
            *b = if fixed { 0.0 } else { *b * inv_r };
        }
        match &self.backend {
            Backend::Direct(factor) => factor.solve_into(&s.rhs, u, &mut s.work),
            Backend::Iterative(a) => u.copy_from_slice(&solve_spd(a, &s.rhs, 1e-10)?),
        }
        Ok(())
    }

    pub fn solve(&self, yield_field: &YieldField) -> Result<Alg2Result> {
        let mesh = self.mesh;
        if yield_field.0.len() != mesh.n_triangles() {
            return Err(Error::dims("yield field", mesh.n_triangles(), yield_field.0.len()));
        }
        let (r, tol) = (self.config.r, self.config.tol);
        let nt = mesh.n_triangles();
        let mut q = vec![[0.0; 2]; nt];
        let mut lambda = vec![[0.0; 2]; nt];
        let mut grad = vec![[0.0; 2]; nt];
        let mut u = vec![0.0; mesh.n_vertices()];
        let mut u_prev = u.clone();
        let mut diff = u.clone();
        let mut gap = vec![[0.0; 2]; nt];
        let mut scratch = Scratch::new(mesh);
        let mut history = Vec::new();
        let mut converged = false;

        for iter in 1..=self.config.max_iter {
            std::mem::swap(&mut u, &mut u_prev);
            self.velocity_into(&q, &lambda, &mut u, &mut scratch)?;
            gradient_into(mesh, &u, &mut grad);
            shrink_into(r, &yield_field.0, &grad, &lambda, &mut q);
            for (((l, qt), g), d) in lambda.iter_mut().zip(&q).zip(&grad).zip(gap.iter_mut()) {
                *d = [qt[0] - g[0], qt[1] - g[1]];
                l[0] -= r * d[0];
                l[1] -= r * d[1];
            }
            for ((d, a), b) in diff.iter_mut().zip(&u).zip(&u_prev) {
                *d = a - b;
            }
            let residual_constraint = l2_norm_p0(mesh, &gap);
            let residual_u = l2_norm(mesh, &diff) / l2_norm(mesh, &u).max(ZERO_FLOW_FLOOR);
            history.push(IterationRecord {
                iter,
                residual_constraint,
                residual_u,
                objective: objective_values(mesh, &yield_field.0, &u, &grad),
            });
            if residual_constraint.max(residual_u) <= tol {
                converged = true;
                break;
            }
        }
        Ok(Alg2Result {
            u: P1Field(u),
            q: P0VectorField(q),
            lambda: P0VectorField(lambda),
            iterations: history.len(),
            converged,
            history,
        })
    }
}

struct Scratch {
    flux: Vec<[f64; 2]>,
    rhs: Vec<f64>,
    work: Vec<f64>,
}

impl Scratch {
    fn new(mesh: &Mesh) -> Self {
        Self {
            flux: vec![[0.0; 2]; mesh.n_triangles()],
            rhs: vec![0.0; mesh.n_vertices()],
            work: vec![0.0; mesh.n_vertices()],
        }
    }
}

fn check_p0(mesh: &Mesh, w: &P0VectorField) -> Result<()> {
    if w.0.len() != mesh.n_triangles() {
        return Err(Error::dims("P0 vector field", mesh.n_triangles(), w.0.len()));
    }
    Ok(())
}

/// Closed-form `q` minimiser on one triangle.
#[inline]
pub fn shrink(r: f64, b: f64, s: [f64; 2]) -> [f64; 2] {
    let norm = s[0].hypot(s[1]);
    if norm <= b {
        [0.0, 0.0]
    } else {
        let scale = (1.0 - b / norm) / (1.0 + r);
        [s[0] * scale, s[1] * scale]
    }
}

fn shrink_into(r: f64, b: &[f64], grad: &[[f64; 2]], lambda: &[[f64; 2]], q: &mut [[f64; 2]]) {
    for (((qt, &bt), g), l) in q.iter_mut().zip(b).zip(grad).zip(lambda) {
        *qt = shrink(r, bt, [l[0] + r * g[0], l[1] + r * g[1]]);
    }
}

/// Velocity step for given `q` and `λ`.
pub fn update_velocity(mesh: &Mesh, config: &Alg2Config, q: &P0VectorField, lambda: &P0VectorField) -> Result<P1Field> {
    Alg2Solver::new(mesh, *config)?.update_velocity(q, lambda)
}

/// Shrinkage step for `q` given the new velocity.
pub fn update_q(
    mesh: &Mesh,
    config: &Alg2Config,
    yield_field: &YieldField,
    u: &P1Field,
    lambda: &P0VectorField,
) -> Result<P0VectorField> {
    check_p0(mesh, lambda)?;
    if yield_field.0.len() != mesh.n_triangles() {
        return Err(Error::dims("yield field", mesh.n_triangles(), yield_field.0.len()));
    }
    let grad = crate::fem::gradient(mesh, u)?;
    let mut q = vec![[0.0; 2]; mesh.n_triangles()];
    shrink_into(config.r, &yield_field.0, &grad.0, &lambda.0, &mut q);
    Ok(P0VectorField(q))
}

/// Multiplier step `λ + r (∇u - q)`.
pub fn update_lambda(
    mesh: &Mesh,
    config: &Alg2Config,
    lambda: &P0VectorField,
    q: &P0VectorField,
    u: &P1Field,
) -> Result<P0VectorField> {
    check_p0(mesh, lambda)?;
    check_p0(mesh, q)?;
    let grad = crate::fem::gradient(mesh, u)?;
    let r = config.r;
    Ok(P0VectorField(
        lambda
            .0
            .iter()
            .zip(&q.0)
            .zip(&grad.0)
            .map(|((l, q), g)| [l[0] + r * (g[0] - q[0]), l[1] + r * (g[1] - q[1])])
            .collect(),
    ))
}

/// Runs ALG2 from `q = λ = 0` until convergence or `max_iter`.
pub fn solve_mosolov(mesh: &Mesh, yield_field: &YieldField, config: &Alg2Config) -> Result<Alg2Result> {
    Alg2Solver::new(mesh, *config)?.solve(yield_field)
}

/// Volumetric flow rate `∫ u`.
pub fn flow_rate(mesh: &Mesh, u: &P1Field) -> Result<f64> {
    crate::fem::integrate(mesh, u)
}

/// Mosolov energy `∫ |∇u|²/2 + B |∇u| - u`.
pub fn objective(mesh: &Mesh, yield_field: &YieldField, u: &P1Field) -> Result<f64> {
    let grad = crate::fem::gradient(mesh, u)?;
    Ok(objective_values(mesh, &yield_field.0, &u.0, &grad.0))
}

fn objective_values(mesh: &Mesh, b: &[f64], u: &[f64], grad: &[[f64; 2]]) -> f64 {
    let energy: f64 = grad
        .iter()
        .zip(b)
        .zip(mesh.geometry())
        .map(|((g, bt), geo)| {
            let n = g[0].hypot(g[1]);
            geo.area * (0.5 * n * n + bt * n)
        })
        .sum();
    energy - integrate_values(mesh, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::gradient;
    use crate::mesh::{generate_mesh, DomainSpec, Shape};

    fn square(n: usize) -> Mesh {
        generate_mesh(&DomainSpec::new(Shape::UnitSquare, n)).unwrap()
    }

    fn poisson(mesh: &Mesh) -> P1Field {
        let cfg = Alg2Config::default();
        update_velocity(mesh, &cfg, &P0VectorField::zeros(mesh), &P0VectorField::zeros(mesh)).unwrap()
    }

    #[test]
    fn shrink_branches() {
        assert_eq!(shrink(1.0, 1.0, [0.5, 0.0]), [0.0, 0.0]);
        let q = shrink(1.0, 1.0, [3.0, 0.0]);
        assert!((q[0] - 1.0).abs() < 1e-15 && q[1] == 0.0);
        assert_eq!(shrink(1.0, 0.0, [0.4, -1.2]), [0.2, -0.6]);
        assert_eq!(shrink(1.0, 0.0, [0.0, 0.0]), [0.0, 0.0]);
    }

    #[test]
    fn shrink_continuous_at_threshold() {
        let b = 0.7;
        for r in [0.5, 1.0, 2.0] {
            let q = shrink(r, b, [b * (1.0 + 1e-12), 0.0]);
            assert!(q[0].abs() < 1e-12);
        }
    }

    #[test]
    fn velocity_step_scales_with_inverse_r() {
        let m = square(8);
        let zero = P0VectorField::zeros(&m);
        let u1 = poisson(&m);
        let cfg2 = Alg2Config { r: 2.0, ..Default::default() };
        let u2 = update_velocity(&m, &cfg2, &zero, &zero).unwrap();
        for (a, b) in u1.0.iter().zip(&u2.0) {
            assert!((a - 2.0 * b).abs() < 1e-14);
        }
        // λ - r q = 0 leaves only the unit load.
        let q = gradient(&m, &u1).unwrap();
        let lambda = P0VectorField(q.0.iter().map(|g| [g[0] * 2.0, g[1] * 2.0]).collect());
        let u3 = update_velocity(&m, &cfg2, &q, &lambda).unwrap();
        assert_eq!(u3, u2);
    }

    #[test]
    fn lambda_update_formula() {
        let m = Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let u = P1Field(vec![0.0; 3]);
        let zero = P0VectorField::zeros(&m);
        let q = P0VectorField(vec![[0.2, -0.1]]);
        let cfg = Alg2Config::default();
        let l = update_lambda(&m, &cfg, &zero, &q, &u).unwrap();
        assert_eq!(l.0, vec![[-0.2, 0.1]]);
        let half = Alg2Config { r: 0.5, ..cfg };
        let l = update_lambda(&m, &half, &zero, &q, &u).unwrap();
        assert_eq!(l.0, vec![[-0.1, 0.05]]);

        let u = P1Field(vec![0.3, 0.9, -0.4]);
        let g = gradient(&m, &u).unwrap();
        let l0 = P0VectorField(vec![[1.5, 2.5]]);
        assert_eq!(update_lambda(&m, &cfg, &l0, &g, &u).unwrap(), l0);
    }

    #[test]
    fn update_q_uses_lambda_plus_r_grad() {
        let m = Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let u = P1Field(vec![0.0, 1.0, 0.0]); // ∇u = (1, 0)
        let lambda = P0VectorField(vec![[2.0, 0.0]]);
        let b = YieldField::new(vec![1.0]).unwrap();
        let q = update_q(&m, &Alg2Config::default(), &b, &u, &lambda).unwrap();
        assert!((q.0[0][0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn newtonian_limit_is_poisson() {
        let m = square(12);
        let res = solve_mosolov(&m, &YieldField::constant(&m, 0.0).unwrap(), &Alg2Config::default()).unwrap();
        assert!(res.converged);
        let p = poisson(&m);
        let err: f64 = res.u.0.iter().zip(&p.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6 * p.max_abs(), "{err}");
    }

    #[test]
    fn yield_field_validation() {
        let m = square(4);
        assert!(YieldField::constant(&m, -0.1).is_err());
        assert!(YieldField::new(vec![f64::NAN]).is_err());
        let y = YieldField::two_zone(&m, 0.25, 0.05).unwrap();
        for t in 0..m.n_triangles() {
            let expect = if m.centroid(t)[0] <= 0.0 { 0.25 } else { 0.05 };
            assert_eq!(y.values()[t], expect);
        }
        assert!(YieldField::from_params(&m, &[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn config_validation() {
        let m = square(2);
        for cfg in [
            Alg2Config { r: 0.0, ..Default::default() },
            Alg2Config { tol: 0.0, ..Default::default() },
            Alg2Config { max_iter: 0, ..Default::default() },
        ] {
            assert!(solve_mosolov(&m, &YieldField::constant(&m, 0.1).unwrap(), &cfg).is_err());
        }
    }

    #[test]
    fn cg_backend_agrees_with_cholesky() {
        let m = square(10);
        let b = YieldField::constant(&m, 0.1).unwrap();
        let direct = solve_mosolov(&m, &b, &Alg2Config::default()).unwrap();
        let cg =
            solve_mosolov(&m, &b, &Alg2Config { linear_solver: LinearSolver::ConjugateGradient, ..Default::default() })
                .unwrap();
        assert!(direct.converged && cg.converged);
        let diff = direct.u.0.iter().zip(&cg.u.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn diagnostics_csv_layout() {
        let m = square(4);
        let res = solve_mosolov(&m, &YieldField::constant(&m, 0.05).unwrap(), &Alg2Config::default()).unwrap();
        let mut buf = Vec::new();
        res.write_diagnostics_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "iter,residual_constraint,residual_u,objective");
        assert_eq!(lines.count(), res.iterations);
    }
}
