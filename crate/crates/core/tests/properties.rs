//! Randomized invariants, one block per module.

use crossdiff::diagonal::{bmat_condition, p_transform, probe_points, DiagonalizableModel, MatrixNorm};
use crossdiff::gn::{compute_strong_integrals, compute_weak_integrals, GnInputs};
use crossdiff::grid::{cube_average, cutoff, divergence, gradient, integrate, CutoffProfile};
use crossdiff::harmonic::{a_gamma_constant, bmo_seminorm, maximal};
use crossdiff::regularity::lp_gradient_norm;
use crossdiff::solver::{flux_lower_bound, simulate, DiffusionModel, SolverConfig};
use crossdiff::uniqueness::{gronwall_bound, monotonicity_check, Nonlinearity, ProbeSet};
use crossdiff::{BoundaryKind, Cube, Field, Grid};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn grid2(n: usize) -> Grid {
    Grid::new(&[1.0, 1.5], &[n, n + 3], BoundaryKind::Neumann).unwrap()
}

fn field_from(grid: Grid, m: usize, seed: &[f64]) -> Field {
    let vals: Vec<f64> = (0..grid.len() * m).map(|i| seed[i % seed.len()] * (1.0 + (i as f64 * 0.37).sin())).collect();
    Field::new(grid, m, vals).unwrap()
}

fn seeds(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, len)
}

// ---------------------------------------------------------------- grid

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn summation_by_parts_for_interior_test_functions(n in 8usize..20, s in seeds(37), t in seeds(23)) {
        let g = grid2(n);
        let v = field_from(g, 2, &s);
        let phi0 = field_from(g, 1, &t);
        // φ vanishes on the three cells next to each wall, so the one-sided
        // boundary gradient never sees it
        let (hx, hy) = (g.spacing()[0], g.spacing()[1]);
        let phi = Field::from_fn(g, 1, |x, out| {
            let inside = x[0] > 3.0 * hx && x[0] < 1.0 - 3.0 * hx && x[1] > 3.0 * hy && x[1] < 1.5 - 3.0 * hy;
            out[0] = if inside { 1.0 } else { 0.0 };
        }).zip_with(&phi0, |a, b| a * b).unwrap();
        let div = divergence(&v).unwrap();
        let dphi = gradient(&phi).unwrap();
        let lhs = integrate(&div.zip_with(&phi, |a, b| a * b).unwrap(), None).unwrap();
        let mut dot = vec![0.0; g.len()];
        for (c, d) in dot.iter_mut().enumerate() {
            *d = v.at(c).iter().zip(dphi.at(c)).map(|(a, b)| a * b).sum();
        }
        let rhs = integrate(&Field::new(g, 1, dot).unwrap(), None).unwrap();
        let scale = v.max_abs() * phi.max_abs() * (n as f64);
        prop_assert!((lhs + rhs).abs() <= 1e-12 * scale.max(1.0), "{lhs} {rhs}");
    }

    #[test]
    fn gradient_and_divergence_are_linear(n in 6usize..16, s in seeds(11), t in seeds(13), a in -3.0f64..3.0) {
        let g = grid2(n);
        let (f, h) = (field_from(g, 2, &s), field_from(g, 2, &t));
        let combo = f.scale(a).add(&h).unwrap();
        let lhs = gradient(&combo).unwrap();
        let rhs = gradient(&f).unwrap().scale(a).add(&gradient(&h).unwrap()).unwrap();
        let tol = 1e-12 * (lhs.max_abs() + 1.0);
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= tol);
        let lhs = divergence(&combo).unwrap();
        let rhs = divergence(&f).unwrap().scale(a).add(&divergence(&h).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12 * (lhs.max_abs() + 1.0));
    }

    #[test]
    fn cube_average_is_bounded_by_cube_extremes(n in 4usize..20, s in seeds(17), side in 1usize..4, i in 0usize..16, j in 0usize..16) {
        let g = grid2(n);
        let f = field_from(g, 1, &s);
        let side = side.min(n);
        let anchor = [i % (n + 1 - side), j % (n + 1 - side), 0];
        let cube = Cube { anchor, side };
        let avg = cube_average(&f, &cube).unwrap()[0];
        let vals: Vec<f64> = cube.region(&g).indices(&g).map(|c| f.values()[c]).collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(avg >= lo && avg <= hi);
    }

    #[test]
    fn integrate_is_monotone(n in 4usize..20, s in seeds(19), bump in prop::collection::vec(0.0f64..1.0, 7)) {
        let g = grid2(n);
        let f = field_from(g, 1, &s);
        let h = f.add(&field_from(g, 1, &bump).map(f64::abs)).unwrap();
        prop_assert!(integrate(&f, None).unwrap() <= integrate(&h, None).unwrap());
    }
}

// ---------------------------------------------------------------- harmonic

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bmo_shift_and_scale(n in 3usize..12, s in seeds(9), c in -5.0f64..5.0, k in -3i32..4) {
        let g = grid2(n);
        let f = field_from(g, 1, &s);
        let base = bmo_seminorm(&f, None).unwrap().seminorm;
        let shifted = bmo_seminorm(&f.map(|v| v + c), None).unwrap().seminorm;
        prop_assert!((shifted - base).abs() <= 1e-12 * (base + c.abs()));
        // power-of-two scaling commutes with every rounding step
        let two = 2f64.powi(k);
        prop_assert_eq!(bmo_seminorm(&f.scale(-two), None).unwrap().seminorm, two * base);
        let c3 = 3.0;
        let scaled = bmo_seminorm(&f.scale(c3), None).unwrap().seminorm;
        prop_assert!((scaled - c3 * base).abs() <= 1e-13 * c3 * base);
        // bounded by twice the deviation from the global mean, hence by 2 osc
        let mean = f.values().iter().sum::<f64>() / g.len() as f64;
        let dev = f.values().iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        prop_assert!(base <= 2.0 * dev * (1.0 + 1e-12));
        prop_assert!(base <= 2.0 * (f.max() - f.min()) * (1.0 + 1e-12));
    }

    #[test]
    fn maximal_is_sublinear_and_homogeneous(n in 3usize..12, s in seeds(9), t in seeds(7), c in 0.0f64..4.0) {
        let g = grid2(n);
        let f = field_from(g, 1, &s).map(f64::abs);
        let h = field_from(g, 1, &t).map(f64::abs);
        let (mf, mh) = (maximal(&f).unwrap(), maximal(&h).unwrap());
        let msum = maximal(&f.add(&h).unwrap()).unwrap();
        let mc = maximal(&f.scale(c)).unwrap();
        for i in 0..g.len() {
            prop_assert!(mf.values()[i] >= f.values()[i]);
            prop_assert!(msum.values()[i] <= (mf.values()[i] + mh.values()[i]) * (1.0 + 1e-12));
            prop_assert!((mc.values()[i] - c * mf.values()[i]).abs() <= 1e-12 * c * mf.values()[i] + 1e-300);
        }
    }

    #[test]
    fn weight_constant_is_at_least_one(n in 2usize..10, s in seeds(9), gamma in 1.1f64..5.0) {
        let w = field_from(grid2(n), 1, &s).map(|v| v.abs() + 0.05);
        prop_assert!(a_gamma_constant(&w, gamma).unwrap().constant >= 1.0 - 1e-12);
    }
}

// ---------------------------------------------------------------- gn

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn integrals_are_nonnegative_and_monotone_in_weights(
        s in seeds(5), extra in prop::collection::vec(0.0f64..1.0, 5), p in 1.0f64..3.0,
    ) {
        let g = Grid::unit(2, 24, BoundaryKind::Neumann).unwrap();
        let u = Field::scalar_from_fn(g, |x| 1.0 + 0.3 * (s[0] * x[0] + s[1] * x[1]).sin() + 0.2 * (s[2] * x[0] * x[1]).cos());
        let gamma = field_from(g, 1, &s).map(|v| v.abs());
        let lambda = field_from(g, 1, &[s[3], s[4], 0.5]).map(|v| v.abs() + 0.1);
        let more = field_from(g, 1, &extra).map(f64::abs);
        let cut = cutoff(&g, &[0.5, 0.5], 0.25, CutoffProfile::Cubic).unwrap();
        let h = Field::from_fn(g, 2, |x, out| { out[0] = (2.0 * x[1]).sin(); out[1] = x[0] * x[0]; });
        let base = GnInputs::new(u.clone(), gamma.clone(), lambda.clone(), &cut, p).unwrap().with_h(h.clone()).unwrap();
        let up_g = GnInputs::new(u.clone(), gamma.add(&more).unwrap(), lambda.clone(), &cut, p).unwrap().with_h(h.clone()).unwrap();
        let up_l = GnInputs::new(u, gamma, lambda.add(&more).unwrap(), &cut, p).unwrap().with_h(h).unwrap();
        for f in [compute_strong_integrals, compute_weak_integrals] {
            let b = f(&base).unwrap();
            let a = f(&up_g).unwrap();
            let l = f(&up_l).unwrap();
            prop_assert!(b.i1 >= 0.0 && b.i2 >= 0.0 && b.ibreve >= 0.0);
            prop_assert!(a.i1 >= b.i1 && a.i2 == b.i2 && a.ibreve == b.ibreve);
            prop_assert!(l.i1 == b.i1 && l.i2 >= b.i2 && l.ibreve >= b.ibreve);
        }
    }
}

// ---------------------------------------------------------------- solver

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn neumann_mass_is_conserved(s in seeds(6), k in 0.0f64..3.0, eps in 1e-3f64..1e-1) {
        let g = Grid::unit(2, 12, BoundaryKind::Neumann).unwrap();
        let w0 = field_from(g, 1, &s).map(|v| v.abs());
        let cfg = SolverConfig { dt: 2e-3, horizon: 0.02, epsilon: eps, ..Default::default() };
        let traj = simulate(&DiffusionModel::porous_media(1, k), &cfg, &w0).unwrap();
        for d in traj.diagnostics.windows(2) {
            prop_assert!((d[1].mass[0] - d[0].mass[0]).abs() < 1e-12);
        }
        let reg = DiffusionModel::porous_media(1, k).regularize(eps).unwrap();
        for snap in &traj.snapshots {
            prop_assert_eq!(flux_lower_bound(&reg, &snap.field, 1e-12).unwrap().violations, 0);
        }
    }

    #[test]
    fn constant_states_are_fixed_points(c in 0.0f64..3.0, k in 0.0f64..3.0) {
        let g = Grid::unit(1, 16, BoundaryKind::Neumann).unwrap();
        let w0 = Field::constant(g, &[c]);
        let cfg = SolverConfig { dt: 1e-2, horizon: 0.05, epsilon: 1e-3, ..Default::default() };
        let traj = simulate(&DiffusionModel::porous_media(1, k), &cfg, &w0).unwrap();
        prop_assert_eq!(traj.last().field.values(), w0.values());
    }
}

// ---------------------------------------------------------------- regularity

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradient_lp_is_a_seminorm(s in seeds(8), t in seeds(5), c in -4.0f64..4.0, q in 1.0f64..6.0) {
        let g = grid2(10);
        let (f, h) = (field_from(g, 1, &s), field_from(g, 1, &t));
        let nf = lp_gradient_norm(&f, q, None).unwrap();
        let nh = lp_gradient_norm(&h, q, None).unwrap();
        let ns = lp_gradient_norm(&f.add(&h).unwrap(), q, None).unwrap();
        let nc = lp_gradient_norm(&f.scale(c), q, None).unwrap();
        prop_assert!(ns <= (nf + nh) * (1.0 + 1e-12));
        prop_assert!((nc - c.abs() * nf).abs() <= 1e-12 * (nc + 1e-300));
    }
}

// ---------------------------------------------------------------- uniqueness

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monotonicity_is_scale_consistent(k in 1.0f64..3.0, c in 0.01f64..100.0) {
        let probes = ProbeSet::lattice(1, 3.0, 6, 2, 0);
        let phi = Nonlinearity::scalar_power(k);
        prop_assert!(monotonicity_check(&phi, &probes).unwrap().pass);
        prop_assert!(monotonicity_check(&phi.scaled(c), &probes).unwrap().pass);
        let sq = Nonlinearity::square();
        prop_assert!(!monotonicity_check(&sq.scaled(c), &probes).unwrap().pass);
    }

    #[test]
    fn gronwall_dominates_explicit_euler(y0 in 0.0f64..3.0, c in 0.0f64..2.0, q in prop::collection::vec(0.0f64..4.0, 2..40)) {
        // on [0, 1] so the closed form covers a positive forcing c
        let n = q.len();
        let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let steps = 400;
        let mut y = y0;
        for s in 0..steps {
            let t = s as f64 / steps as f64;
            let pos = t * (n - 1) as f64;
            let i = (pos.floor() as usize).min(n - 2);
            let qt = q[i] + (q[i + 1] - q[i]) * (pos - i as f64);
            y += (qt * y + c) / steps as f64;
        }
        let bound = gronwall_bound(y0, &times, &q, c, 1.0).unwrap();
        prop_assert!(y <= bound * (1.0 + 1e-12), "{y} > {bound}");
    }
}

// ---------------------------------------------------------------- diagonal

fn b0() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.3, -0.2, 0.9])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn radial_derivative_of_p_is_bw(w0 in 0.2f64..2.0, w1 in -2.0f64..2.0, l in 0.5f64..2.5) {
        let model = DiagonalizableModel::power(b0(), l, vec![1.0, 0.5]).unwrap();
        let g = Grid::unit(1, 4, BoundaryKind::Neumann).unwrap();
        let at = |s: f64| p_transform(&Field::constant(g, &[s * w0, s * w1]), &model).unwrap().at(0).to_vec();
        let bw = model.b(&[w0, w1]) * nalgebra::DVector::from_vec(vec![w0, w1]);
        let err = |tau: f64| {
            let (hi, lo) = (at(1.0 + tau), at(1.0 - tau));
            ((hi[0] - lo[0]) / (2.0 * tau) - bw[0]).hypot((hi[1] - lo[1]) / (2.0 * tau) - bw[1])
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        // central differences: second order until rounding takes over
        prop_assert!(e2 <= 1e-9 || (e1 / e2).log2() >= 1.0, "{e1} {e2}");
    }

    #[test]
    fn a_is_similar_to_alpha(w0 in -2.0f64..2.0, w1 in -2.0f64..2.0, a1 in 0.1f64..3.0, a2 in 0.1f64..3.0) {
        prop_assume!(w0.hypot(w1) > 0.05);
        let model = DiagonalizableModel::power(b0(), 1.0, vec![a1, a2]).unwrap();
        let a = model.a(&[w0, w1]).unwrap();
        let mut ev: Vec<f64> = a.complex_eigenvalues().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        let mut want = vec![a1, a2];
        want.sort_by(f64::total_cmp);
        for (x, y) in ev.iter().zip(&want) {
            prop_assert!((x - y).abs() <= 1e-10 * y.max(1.0));
        }
    }

    #[test]
    fn condition_constant_ignores_scaling_of_b(kappa in 0.1f64..10.0, l in 0.5f64..2.0) {
        let model = DiagonalizableModel::power(b0(), l, vec![1.0, 0.5]).unwrap();
        let probes = probe_points(2, 0.1, 2.0, 4, 6, 3).unwrap();
        let a = bmat_condition(&model, &probes, MatrixNorm::Operator2).unwrap();
        let b = bmat_condition(&model.scale_b(kappa), &probes, MatrixNorm::Operator2).unwrap();
        prop_assert!((a.c_measured - b.c_measured).abs() <= 1e-12 * a.c_measured.max(1.0));
    }
}
