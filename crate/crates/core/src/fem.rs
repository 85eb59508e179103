//! P1/P0 finite-element kernels on triangle meshes.
//!
//! Velocities live in the continuous piecewise-linear space (one value per
//! vertex), gradients and their multipliers in the piecewise-constant vector
//! space (one 2-vector per triangle). All integrals are exact for these
//! spaces, so no quadrature error enters the discrete problem.

use std::collections::VecDeque;

use crate::mesh::Mesh;
use crate::{Error, Result};

/// Nodal values of a continuous piecewise-linear field.
#[derive(Debug, Clone, PartialEq)]
pub struct P1Field(pub Vec<f64>);

/// One constant 2-vector per triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct P0VectorField(pub Vec<[f64; 2]>);

impl P1Field {
    pub fn zeros(mesh: &Mesh) -> Self {
        P1Field(vec![0.0; mesh.n_vertices()])
    }

    /// Interpolates `f` at the mesh vertices.
    pub fn interpolate(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Self {
        P1Field(mesh.vertices().iter().map(|&[x, y]| f(x, y)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn check(&self, mesh: &Mesh) -> Result<()> {
        if self.0.len() != mesh.n_vertices() {
            return Err(Error::dims("P1 field", mesh.n_vertices(), self.0.len()));
        }
        Ok(())
    }
}

impl P0VectorField {
    pub fn zeros(mesh: &Mesh) -> Self {
        P0VectorField(vec![[0.0; 2]; mesh.n_triangles()])
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.0
    }

    fn check(&self, mesh: &Mesh) -> Result<()> {
        if self.0.len() != mesh.n_triangles() {
            return Err(Error::dims("P0 vector field", mesh.n_triangles(), self.0.len()));
        }
        Ok(())
    }
}

/// Symmetric matrix in compressed sparse row layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpdMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSpdMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed in
    /// input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), len: n });
            }
            match rows[i].iter_mut().find(|(c, _)| *c == j) {
                Some(e) => e.1 += v,
                None => rows[i].push((j, v)),
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { n, row_ptr, cols, vals })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, row_ptr: (0..=n).collect(), cols: (0..n).collect(), vals: vec![1.0; n] }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self { vals: d.to_vec(), ..Self::identity(d.len()) }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { vals: self.vals.iter().map(|v| v * factor).collect(), ..self.clone() }
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Replaces constrained rows and columns by the identity, keeping symmetry.
    pub fn with_dirichlet(&self, constrained: &[bool]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for k in out.row_ptr[i]..out.row_ptr[i + 1] {
                let j = out.cols[k];
                if constrained[i] || constrained[j] {
                    out.vals[k] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
        out
    }
}

/// Stiffness matrix `A_ij = sum_t area_t grad_i . grad_j` without boundary
/// conditions.
pub fn assemble_stiffness(mesh: &Mesh) -> SparseSpdMatrix {
    let n = mesh.n_vertices();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for tri in mesh.triangles() {
        for &a in tri {
            adjacency[a].extend_from_slice(tri);
        }
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    row_ptr.push(0);
    for adj in &mut adjacency {
        adj.sort_unstable();
        adj.dedup();
        cols.extend_from_slice(adj);
        row_ptr.push(cols.len());
    }
    let mut vals = vec![0.0; cols.len()];
    for (tri, g) in mesh.triangles().iter().zip(mesh.geometry()) {
        for (a, &i) in tri.iter().enumerate() {
            let row = &cols[row_ptr[i]..row_ptr[i + 1]];
            for (b, &j) in tri.iter().enumerate() {
                let k = row_ptr[i] + row.binary_search(&j).expect("pattern covers triangle");
                vals[k] += g.area * (g.grads[a][0] * g.grads[b][0] + g.grads[a][1] * g.grads[b][1]);
            }
        }
    }
    SparseSpdMatrix { n, row_ptr, cols, vals }
}

/// Load vector of a per-triangle constant source: `b_i = sum_t f_t area_t / 3`.
pub fn assemble_load(mesh: &Mesh, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != mesh.n_triangles() {
        return Err(Error::dims("per-triangle source", mesh.n_triangles(), f.len()));
    }
    let mut b = vec![0.0; mesh.n_vertices()];
    for ((tri, g), ft) in mesh.triangles().iter().zip(mesh.geometry()).zip(f) {
        let share = ft * g.area / 3.0;
        for &i in tri {
            b[i] += share;
        }
    }
    Ok(b)
}

pub fn gradient(mesh: &Mesh, u: &P1Field) -> Result<P0VectorField> {
    u.check(mesh)?;
    let mut out = P0VectorField(vec![[0.0; 2]; mesh.n_triangles()]);
    gradient_into(mesh, &u.0, &mut out.0);
    Ok(out)
}

pub(crate) fn gradient_into(mesh: &Mesh, u: &[f64], out: &mut [[f64; 2]]) {
    for ((tri, g), o) in mesh.triangles().iter().zip(mesh.geometry()).zip(out.iter_mut()) {
        let mut d = [0.0; 2];
        for (a, &i) in tri.iter().enumerate() {
            d[0] += u[i] * g.grads[a][0];
            d[1] += u[i] * g.grads[a][1];
        }
        *o = d;
    }
}

/// Weak divergence of a P0 field: `b_i = -sum_t area_t w_t . grad_i`, so that
/// `v . b = -∫ w . ∇v` for every P1 function `v`.
pub fn divergence_load(mesh: &Mesh, w: &P0VectorField) -> Result<Vec<f64>> {
    w.check(mesh)?;
    let mut b = vec![0.0; mesh.n_vertices()];
    divergence_load_into(mesh, &w.0, &mut b);
    Ok(b)
}

pub(crate) fn divergence_load_into(mesh: &Mesh, w: &[[f64; 2]], b: &mut [f64]) {
    for ((tri, g), wt) in mesh.triangles().iter().zip(mesh.geometry()).zip(w) {
        for (a, &i) in tri.iter().enumerate() {
            b[i] -= g.area * (wt[0] * g.grads[a][0] + wt[1] * g.grads[a][1]);
        }
    }
}

/// Exact integral of the P1 interpolant.
pub fn integrate(mesh: &Mesh, u: &P1Field) -> Result<f64> {
    u.check(mesh)?;
    Ok(integrate_values(mesh, &u.0))
}

pub(crate) fn integrate_values(mesh: &Mesh, u: &[f64]) -> f64 {
    mesh.triangles().iter().zip(mesh.geometry()).map(|(t, g)| g.area * (u[t[0]] + u[t[1]] + u[t[2]]) / 3.0).sum()
}

/// `L2` norm of a P1 function using the exact mass matrix.
pub fn l2_norm(mesh: &Mesh, u: &[f64]) -> f64 {
    mesh.triangles()
        .iter()
        .zip(mesh.geometry())
        .map(|(t, g)| {
            let (a, b, c) = (u[t[0]], u[t[1]], u[t[2]]);
            g.area / 12.0 * ((a + b + c).powi(2) + a * a + b * b + c * c)
        })
        .sum::<f64>()
        .sqrt()
}

/// `L2` norm of a P0 vector field.
pub fn l2_norm_p0(mesh: &Mesh, w: &[[f64; 2]]) -> f64 {
    w.iter().zip(mesh.geometry()).map(|(v, g)| g.area * (v[0] * v[0] + v[1] * v[1])).sum::<f64>().sqrt()
}

/// Jacobi-preconditioned conjugate gradients; stops at relative residual
/// `tol` or after `10 n` iterations.
pub fn solve_spd(a: &SparseSpdMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    if b.len() != a.dim() {
        return Err(Error::dims("right-hand side", a.dim(), b.len()));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("solver tolerance must be positive"));
    }
    let n = a.dim();
    let mut x = vec![0.0; n];
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let cap = 10 * n.max(1);
    for it in 0..cap {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverFailure { iterations: it, residual: norm(&r) / b_norm });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= tol * b_norm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure { iterations: cap, residual: norm(&r) / b_norm })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Envelope (skyline) Cholesky factorization under a reverse Cuthill-McKee
/// ordering. Factor once, then solve repeatedly.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    /// `perm[new] = old`.
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    entries: Vec<f64>,
}

impl CholeskyFactor {
    pub fn new(a: &SparseSpdMatrix) -> Result<Self> {
        let n = a.dim();
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in a.row(old) {
                if v != 0.0 {
                    first[new] = first[new].min(inv[j]);
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut entries = vec![0.0; start[n]];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in a.row(old) {
                let jn = inv[j];
                if jn <= new && v != 0.0 {
                    entries[start[new] + jn - first[new]] = v;
                }
            }
        }
        for i in 0..n {
            let (fi, si) = (first[i], start[i]);
            for j in fi..i {
                let (fj, sj) = (first[j], start[j]);
                let k0 = fi.max(fj);
                let row_i = &entries[si + k0 - fi..si + j - fi];
                let row_j = &entries[sj + k0 - fj..sj + j - fj];
                let s = entries[si + j - fi] - dot(row_i, row_j);
                entries[si + j - fi] = s / entries[sj + j - fj];
            }
            let row_i = &entries[si..si + i - fi];
            let d = entries[si + i - fi] - dot(row_i, row_i);
            if !(d > 0.0) {
                return Err(Error::invalid(format!("matrix is not positive definite (pivot {d:e} at row {i})")));
            }
            entries[si + i - fi] = d.sqrt();
        }
        Ok(Self { perm, first, start, entries })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.entries.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        let mut work = vec![0.0; b.len()];
        self.solve_into(b, &mut x, &mut work);
        x
    }

    pub(crate) fn solve_into(&self, b: &[f64], x: &mut [f64], y: &mut [f64]) {
        let n = self.dim();
        for (i, &old) in self.perm.iter().enumerate() {
            y[i] = b[old];
        }
        for i in 0..n {
            let (fi, si) = (self.first[i], self.start[i]);
            let s = y[i] - dot(&self.entries[si..si + i - fi], &y[fi..i]);
            y[i] = s / self.entries[si + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, si) = (self.first[i], self.start[i]);
            let xi = y[i] / self.entries[si + i - fi];
            y[i] = xi;
            for (yk, l) in y[fi..i].iter_mut().zip(&self.entries[si..si + i - fi]) {
                *yk -= l * xi;
            }
        }
        for (i, &old) in self.perm.iter().enumerate() {
            x[old] = y[i];
        }
    }
}

/// Bandwidth-reducing ordering; returns `perm[new] = old`.
fn reverse_cuthill_mckee(a: &SparseSpdMatrix) -> Vec<usize> {
    let n = a.dim();
    let neighbours: Vec<Vec<usize>> =
        (0..n).map(|i| a.row(i).filter(|&(j, v)| j != i && v != 0.0).map(|(j, _)| j).collect()).collect();
    let degree: Vec<usize> = neighbours.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs = |root: usize, visited: &mut Vec<bool>, order: &mut Vec<usize>| {
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = neighbours[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    };

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // Pseudo-peripheral root: last vertex of a BFS from the seed.
        let mut probe_visited = visited.clone();
        let mut probe = Vec::new();
        bfs(seed, &mut probe_visited, &mut probe);
        let root = *probe.last().unwrap_or(&seed);
        bfs(root, &mut visited, &mut order);
    }
    order.reverse();
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, DomainSpec, Shape};

    fn mesh(shape: Shape, n: usize) -> Mesh {
        generate_mesh(&DomainSpec::new(shape, n)).unwrap()
    }

    fn reference_triangle() -> Mesh {
        Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn reference_triangle_stiffness() {
        let a = assemble_stiffness(&reference_triangle());
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((a.get(i, j) - expected[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn stiffness_symmetric_and_annihilates_constants() {
        for shape in [Shape::LShape, Shape::Ellipse { a: 0.5, b: 0.35 }, Shape::RightTriangle] {
            let m = mesh(shape, 7);
            let a = assemble_stiffness(&m);
            assert_eq!(a.asymmetry(), 0.0);
            let ones = vec![3.0; m.n_vertices()];
            assert!(a.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn load_sums_to_integral() {
        let m = mesh(Shape::UnitSquare, 5);
        let b = assemble_load(&m, &vec![1.0; m.n_triangles()]).unwrap();
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let b = assemble_load(&m, &vec![0.0; m.n_triangles()]).unwrap();
        assert!(b.iter().all(|&v| v == 0.0));
        let l = mesh(Shape::LShape, 6);
        let b = assemble_load(&l, &vec![2.0; l.n_triangles()]).unwrap();
        assert!((b.iter().sum::<f64>() - 1.5).abs() < 1e-12);
        assert!(matches!(assemble_load(&l, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn gradient_of_linear_fields() {
        let m = mesh(Shape::Ellipse { a: 1.0, b: 0.7 }, 5);
        let g = gradient(&m, &P1Field::interpolate(&m, |x, _| x)).unwrap();
        assert!(g.0.iter().all(|v| (v[0] - 1.0).abs() < 1e-12 && v[1].abs() < 1e-12));
        let g = gradient(&m, &P1Field::interpolate(&m, |x, y| 2.0 * x + 3.0 * y)).unwrap();
        assert!(g.0.iter().all(|v| (v[0] - 2.0).abs() < 1e-12 && (v[1] - 3.0).abs() < 1e-12));
        let g = gradient(&m, &P1Field::interpolate(&m, |_, _| 4.0)).unwrap();
        assert!(g.0.iter().all(|v| v[0].abs() < 1e-12 && v[1].abs() < 1e-12));
        assert!(gradient(&m, &P1Field(vec![0.0; 3])).is_err());
    }

    #[test]
    fn divergence_of_gradient_is_negative_stiffness() {
        let m = mesh(Shape::LShape, 6);
        let u = P1Field::interpolate(&m, |x, y| (3.0 * x).sin() + x * y * y);
        let div = divergence_load(&m, &gradient(&m, &u).unwrap()).unwrap();
        let au = assemble_stiffness(&m).mul_vec(&u.0);
        for (d, a) in div.iter().zip(&au) {
            assert!((d + a).abs() < 1e-12);
        }
        assert!(divergence_load(&m, &P0VectorField::zeros(&m)).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn integrate_linears_exactly() {
        let m = mesh(Shape::UnitSquare, 4);
        assert!((integrate(&m, &P1Field::interpolate(&m, |_, _| 1.0)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(integrate(&m, &P1Field::zeros(&m)).unwrap(), 0.0);
        let shifted =
            Mesh::from_parts(m.vertices().iter().map(|&[x, y]| [x + 0.5, y + 0.5]).collect(), m.triangles().to_vec())
                .unwrap();
        let q = integrate(&shifted, &P1Field::interpolate(&shifted, |x, _| x)).unwrap();
        assert!((q - 0.5).abs() < 1e-12);
    }

    #[test]
    fn l2_norm_of_constant_is_sqrt_area() {
        let m = mesh(Shape::LShape, 4);
        assert!((l2_norm(&m, &vec![1.0; m.n_vertices()]) - 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cg_trivial_systems() {
        let b = vec![0.3, -2.0, 7.5];
        assert_eq!(solve_spd(&SparseSpdMatrix::identity(3), &b, 1e-12).unwrap(), b);
        let x = solve_spd(&SparseSpdMatrix::from_diagonal(&[2.0, 4.0]), &[2.0, 4.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        assert!(solve_spd(&SparseSpdMatrix::identity(2), &[1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn cg_reports_failure_on_indefinite_matrix() {
        let a = SparseSpdMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(solve_spd(&a, &[1.0, 1.0], 1e-10), Err(Error::SolverFailure { .. })));
    }

    #[test]
    fn cholesky_matches_cg() {
        let m = mesh(Shape::Ellipse { a: 0.5, b: 0.35 }, 12);
        let a = assemble_stiffness(&m).with_dirichlet(m.boundary_mask());
        let mut b = assemble_load(&m, &vec![1.0; m.n_triangles()]).unwrap();
        for &v in m.boundary() {
            b[v] = 0.0;
        }
        let x_cg = solve_spd(&a, &b, 1e-13).unwrap();
        let chol = CholeskyFactor::new(&a).unwrap();
        let x_ch = chol.solve(&b);
        for (p, q) in x_cg.iter().zip(&x_ch) {
            assert!((p - q).abs() < 1e-12);
        }
        for &v in m.boundary() {
            assert_eq!(x_ch[v], 0.0);
            assert_eq!(x_cg[v], 0.0);
        }
        let r = a.mul_vec(&x_ch);
        let res: f64 = r.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        assert!(res <= 1e-12 * norm(&b));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        assert!(CholeskyFactor::new(&SparseSpdMatrix::from_diagonal(&[1.0, 0.0])).is_err());
    }
}
