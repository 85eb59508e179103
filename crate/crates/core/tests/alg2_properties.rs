use std::collections::HashMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use viscorom::alg2::{flow_rate, objective, solve_mosolov, Alg2Config, Alg2Result, YieldField};
use viscorom::fem::{l2_norm, P1Field};
use viscorom::mesh::{generate_mesh, DomainSpec, Mesh, Shape};

fn mesh(shape: Shape, n: usize) -> Mesh {
    generate_mesh(&DomainSpec::new(shape, n)).unwrap()
}

fn solve(m: &Mesh, b: f64, cfg: &Alg2Config) -> Alg2Result {
    let res = solve_mosolov(m, &YieldField::constant(m, b).unwrap(), cfg).unwrap();
    assert!(res.converged, "B = {b} did not converge in {} iterations", res.iterations);
    res
}

/// Centre value of -Δu = 1 on the unit square with u = 0 on the boundary,
/// from the double sine series.
fn poisson_square_centre() -> f64 {
    let pi4 = std::f64::consts::PI.powi(4);
    let mut sum = 0.0;
    for m in (1..400).step_by(2) {
        for n in (1..400).step_by(2) {
            let sign = if ((m + n) / 2 - 1) % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * 16.0 / (pi4 * (m * n) as f64 * (m * m + n * n) as f64);
        }
    }
    sum
}

/// Pipe-flow solution for the unit disk with plug radius 2B.
fn disk_exact(b: f64, x: f64, y: f64) -> f64 {
    let r = x.hypot(y).min(1.0).max(2.0 * b);
    ((1.0 - r * r) / 4.0 - b * (1.0 - r)).max(0.0)
}

fn rel_l2(m: &Mesh, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    l2_norm(m, &d) / l2_norm(m, b)
}

#[test]
fn series_oracle_value() {
    assert!((poisson_square_centre() - 0.0736713532).abs() < 1e-8);
}

#[test]
fn newtonian_square_converges_to_series_maximum() {
    let exact = poisson_square_centre();
    let err = |n: usize| (solve(&mesh(Shape::UnitSquare, n), 0.0, &Alg2Config::default()).u.max() - exact).abs();
    let (coarse, fine) = (err(16), err(32));
    assert!(fine < 5e-3 * exact, "{fine}");
    // second order in h
    assert!(coarse / fine > 3.0, "{coarse} / {fine}");
}

#[test]
fn disk_matches_pipe_solution() {
    let m = mesh(Shape::Ellipse { a: 1.0, b: 1.0 }, 24);
    for b in [0.0, 0.1, 0.2] {
        let u = solve(&m, b, &Alg2Config::default()).u;
        let exact = P1Field::interpolate(&m, |x, y| disk_exact(b, x, y));
        let err = rel_l2(&m, &u.0, &exact.0);
        assert!(err < 0.04, "B = {b}: {err}");
    }
}

#[test]
fn disk_stops_above_critical_number() {
    let m = mesh(Shape::Ellipse { a: 1.0, b: 1.0 }, 16);
    let u = solve(&m, 0.6, &Alg2Config::default()).u;
    assert!(u.max_abs() < 1e-3, "{}", u.max_abs());
}

#[test]
fn converged_velocity_minimises_the_discrete_energy() {
    let m = mesh(Shape::UnitSquare, 12);
    let b = 0.1;
    let yield_field = YieldField::constant(&m, b).unwrap();
    let cfg = Alg2Config { tol: 1e-9, max_iter: 20_000, ..Default::default() };
    let res = solve(&m, b, &cfg);
    let j_final = objective(&m, &yield_field, &res.u).unwrap();
    let scale = j_final.abs();
    for rec in &res.history {
        assert!(j_final <= rec.objective + 1e-8 * scale, "iteration {}: {} < {j_final}", rec.iter, rec.objective);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for eps in [1e-2, 1e-3, 1e-4] {
        for _ in 0..10 {
            let v: Vec<f64> = (0..m.n_vertices())
                .map(|i| if m.is_boundary(i) { 0.0 } else { eps * rng.random_range(-1.0..1.0) })
                .collect();
            let moved = P1Field(res.u.0.iter().zip(&v).map(|(a, d)| a + d).collect());
            let j = objective(&m, &yield_field, &moved).unwrap();
            assert!(j_final <= j + 1e-9 * scale, "eps {eps}: {j} < {j_final}");
        }
    }
}

#[test]
fn bounded_by_newtonian_flow_and_monotone_in_b() {
    let m = mesh(Shape::LShape, 12);
    let cfg = Alg2Config { r: 4.0, ..Default::default() };
    let slack = 1e-4;
    let mut prev = solve(&m, 0.0, &cfg).u;
    assert!(prev.0.iter().all(|&v| v >= -slack));
    for b in [0.05, 0.1, 0.15, 0.25] {
        let u = solve(&m, b, &cfg).u;
        let top = prev.max();
        for (a, p) in u.0.iter().zip(&prev.0) {
            assert!(*a >= -slack * top && *a <= p + slack * top, "B = {b}: {a} vs {p}");
        }
        prev = u;
    }
}

#[test]
fn velocity_nonnegative_and_flow_rate_decreasing_in_b() {
    let m = mesh(Shape::UnitSquare, 16);
    let cfg = Alg2Config { r: 4.0, ..Default::default() };
    let mut prev = f64::INFINITY;
    for b in [0.0, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3] {
        let u = solve(&m, b, &cfg).u;
        let min = u.0.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-8, "B = {b}: min {min}");
        let q = flow_rate(&m, &u).unwrap();
        assert!(q <= prev + 1e-8, "B = {b}: {q} > {prev}");
        prev = q;
    }
}

#[test]
fn square_solution_has_the_domain_symmetries() {
    let m = mesh(Shape::UnitSquare, 16);
    let key = |x: f64, y: f64| ((x * 1e6).round() as i64, (y * 1e6).round() as i64);
    let index: HashMap<_, _> = m.vertices().iter().enumerate().map(|(i, v)| (key(v[0], v[1]), i)).collect();
    let u = solve(&m, 0.1, &Alg2Config { tol: 1e-8, max_iter: 20_000, ..Default::default() }).u;
    let top = u.max();
    for (i, v) in m.vertices().iter().enumerate() {
        for (x, y) in [(-v[0], v[1]), (v[0], -v[1]), (v[1], v[0]), (-v[1], -v[0])] {
            let j = index[&key(x, y)];
            assert!((u.0[i] - u.0[j]).abs() < 1e-6 * top, "vertex {i} vs {j}");
        }
    }
}

#[test]
fn converged_velocity_does_not_depend_on_r() {
    let m = mesh(Shape::UnitSquare, 16);
    let tol = 1e-6;
    let solutions: Vec<P1Field> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&r| solve(&m, 0.1, &Alg2Config { r, tol, max_iter: 20_000, ..Default::default() }).u)
        .collect();
    for u in &solutions[1..] {
        let err = rel_l2(&m, &u.0, &solutions[0].0);
        assert!(err <= 5.0 * tol, "{err}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn plug_velocity_never_negative_and_below_newtonian(b in 0.0f64..0.4, n in 4usize..9) {
        let m = mesh(Shape::RightTriangle, n);
        let cfg = Alg2Config { r: 4.0, ..Default::default() };
        let u0 = solve(&m, 0.0, &cfg).u;
        let res = solve_mosolov(&m, &YieldField::constant(&m, b).unwrap(), &cfg).unwrap();
        prop_assume!(res.converged);
        let top = u0.max();
        for (a, p) in res.u.0.iter().zip(&u0.0) {
            prop_assert!(*a >= -1e-4 * top && *a <= p + 1e-4 * top);
        }
    }
}
