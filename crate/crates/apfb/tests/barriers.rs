use apfb::barriers::*;
use apfb::minimize::{solve, Problem, SolverConfig};
use apfb::{make_params, Grid, Params, ScalarField};
use proptest::prelude::*;

fn p1() -> Params {
    make_params(1.0).unwrap()
}

fn strict(p: &Params, mu: f64) -> RadialBarrier {
    RadialBarrier::new(p, BarrierKind::UStrict, &[0.0, 0.0], 1.0, Orientation::InsidePositive, mu)
}

/// Residual of the interior equation for a radial function given by value
/// only, differentiated by fourth-order central differences.
fn fd_residual(p: &Params, f: impl Fn(f64) -> f64, n: f64, r: f64, d: f64) -> f64 {
    let e = 1e-3 * d;
    let d1 = (f(d - 2.0 * e) - 8.0 * f(d - e) + 8.0 * f(d + e) - f(d + 2.0 * e)) / (12.0 * e);
    let d2 = (-f(d - 2.0 * e) + 16.0 * f(d - e) - 30.0 * f(d) + 16.0 * f(d + e) - f(d + 2.0 * e)) / (12.0 * e * e);
    d2 - (n - 1.0) / (r - d) * d1 + f(d).powf(-(p.gamma + 1.0))
}

#[test]
fn strict_subsolution_has_a_positive_range() {
    let p = p1();
    let b = strict(&p, 1.0);
    let d = log_samples(1e-6, 0.9, 10_000);
    let t = residual_u(&b, &p, 2, &d).unwrap();
    let d0 = t.d0.expect("positive near zero");
    assert!(d0 > 1e-4, "{d0}");
    for (&x, &r) in t.d.iter().zip(&t.residual) {
        if x < d0 {
            assert!(r > 0.0, "{x} {r}");
        }
    }
    // independent evaluation of the same formula
    let (a, sg) = (p.alpha, b.sigma);
    let phi = |x: f64| p.c0 * x.powf(a) + 0.5 * x.powf(2.0 - a) + x.powf(sg);
    for k in [100, 2000, 5000, 9000] {
        let fd = fd_residual(&p, phi, 2.0, 1.0, t.d[k]);
        // relative to the size of the cancelling terms
        let scale = p.c0 * t.d[k].powf(a - 2.0);
        assert!((fd - t.residual[k]).abs() <= 1e-6 * scale, "{k}: {fd} vs {}", t.residual[k]);
    }
}

#[test]
fn mirrored_barrier_is_a_strict_supersolution_near_zero() {
    let p = p1();
    let b = RadialBarrier { kind: BarrierKind::UMinus, ..strict(&p, -1.0) };
    let t = residual_u(&b, &p, 2, &log_samples(1e-6, 1e-3, 200)).unwrap();
    assert!(t.d0.is_none());
    assert!(t.residual.iter().all(|&r| r < 0.0));
}

#[test]
fn homogeneous_orders_cancel() {
    let p = p1();
    let b = RadialBarrier::new(&p, BarrierKind::UPlus, &[0.0, 0.0], 1.0, Orientation::InsidePositive, 0.0);
    let d = log_samples(1e-8, 1e-2, 50);
    // one dimension: no curvature, exact solution
    let t1 = residual_u(&b, &p, 1, &d).unwrap();
    for (&x, &r) in d.iter().zip(&t1.residual) {
        assert!(r.abs() <= 1e-11 * x.powf(p.alpha - 2.0), "{x} {r}");
    }
    // two dimensions: only the curvature term -(c0 alpha d^(alpha-1))/(1-d) survives
    let t2 = residual_u(&b, &p, 2, &d).unwrap();
    for (&x, &r) in d.iter().zip(&t2.residual) {
        let curv = p.c0 * p.alpha * x.powf(p.alpha - 1.0) / (1.0 - x);
        assert!((r + curv).abs() <= 1e-12 * x.powf(p.alpha - 2.0), "{x} {r} {curv}");
    }
}

#[test]
fn reported_minima_do_not_depend_on_sample_density() {
    let p = p1();
    let b = RadialBarrier { r: 10.0, ..strict(&p, 1.0) };
    let coarse = residual_u(&b, &p, 2, &log_samples(1e-6, 1.0, 1000)).unwrap();
    let fine = residual_u(&b, &p, 2, &log_samples(1e-6, 1.0, 10_000)).unwrap();
    assert!((coarse.min - fine.min).abs() <= 1e-10 * fine.min.abs(), "{} {}", coarse.min, fine.min);

    let w = RadialBarrier::w_sub(&p, 2, 1.0, 1e-2, 50.0);
    let coarse = residual_w_on(&w, &p, &log_samples(1e-6, 2.0, 1000)).unwrap();
    let fine = residual_w_on(&w, &p, &log_samples(1e-6, 2.0, 10_000)).unwrap();
    assert!((coarse.min - fine.min).abs() <= 1e-10 * fine.min.abs());
}

#[test]
fn positivity_range_grows_with_mu() {
    let p = p1();
    let d = log_samples(1e-6, 0.9, 10_000);
    let d0: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|&mu| residual_u(&strict(&p, mu), &p, 2, &d).unwrap().d0.unwrap()).collect();
    assert!(d0[0] < d0[1] && d0[1] < d0[2], "{d0:?}");
}

#[test]
fn w_subsolution_with_large_a() {
    let p = p1();
    let b = RadialBarrier::w_sub(&p, 2, 1.0, 1e-2, 50.0);
    let t = residual_w(&b, &p).unwrap();
    assert!(t.min > 0.0, "{}", t.min);
    // independent evaluation at the reported minimum
    let (s, bt, me) = (p.s, b.beta, 1e-2);
    let x = t.argmin;
    let psi = x + me * (x.powf(1.0 - s) + 50.0 * x.powf(bt));
    let d1 = 1.0 + me * ((1.0 - s) * x.powf(-s) + 50.0 * bt * x.powf(bt - 1.0));
    let d2 = me * ((1.0 - s) * (-s) * x.powf(-s - 1.0) + 50.0 * bt * (bt - 1.0) * x.powf(bt - 2.0));
    let r = d2 - d1 / (100.0 - x) - (1.0 - p.alpha) * (d1 * d1 - 1.0) / psi;
    assert!((r - t.min).abs() < 1e-12 * r.abs().max(1.0));
}

#[test]
fn w_subsolution_certification() {
    let p = p1();
    let zero = residual_w(&RadialBarrier::w_sub(&p, 2, 1.0, 1e-2, 0.0), &p).unwrap();
    assert!(!zero.all_positive());
    let cert = certify_w_sub(&RadialBarrier::w_sub(&p, 2, 1.0, 1e-2, 1.0), &p).unwrap();
    let a = cert.a.expect("certified");
    assert!(a <= A_MAX);
    assert!(cert.table.all_positive());
    assert_eq!(cert.tried.last(), Some(&a));
    // the previous power of two does not certify
    if a > 1.0 {
        assert!(!residual_w(&RadialBarrier::w_sub(&p, 2, 1.0, 1e-2, a / 2.0), &p).unwrap().all_positive());
    }
}

#[test]
fn flat_limit_of_the_w_barrier() {
    let p = p1();
    let d = log_samples(1e-3, 2.0, 500);
    let big = residual_w_on(&RadialBarrier::w_sub(&p, 2, 1.0, 1e-3, 50.0), &p, &d).unwrap();
    let small = residual_w_on(&RadialBarrier::w_sub(&p, 2, 1.0, 1e-6, 50.0), &p, &d).unwrap();
    let sup = |t: &ResidualTable| t.residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    assert!(sup(&small) < 2e-3 * sup(&big), "{} {}", sup(&small), sup(&big));
}

#[test]
fn calibration_inequality() {
    let p = p1();
    let d = log_samples(1e-6, 0.5, 2000);
    let rep = calibration_slope_check(&strict(&p, 1.0), &p, &d).unwrap();
    let dstar = rep.holds_up_to.expect("holds near zero");
    assert!(dstar > 1e-3);
    for (&x, &m) in d.iter().zip(&rep.margin) {
        if x < dstar {
            assert!(m >= 0.0);
        }
    }

    let flat = RadialBarrier::new(&p, BarrierKind::UPlus, &[0.0, 0.0], 1.0, Orientation::InsidePositive, 0.0);
    let rep = calibration_slope_check(&flat, &p, &d).unwrap();
    assert!(rep.max_rel_defect <= 1e-12, "{}", rep.max_rel_defect);

    let mirror = RadialBarrier { kind: BarrierKind::UMinus, ..strict(&p, -1.0) };
    let rep = calibration_slope_check(&mirror, &p, &d).unwrap();
    assert!(rep.holds_up_to.is_none());
    assert!(rep.margin[0] < 0.0);
}

fn square(h: f64) -> Grid {
    Grid::covering(&[-1.0, -1.0], &[1.0, 1.0], h).unwrap()
}

fn half_plane(p: &Params, h: f64, extra: f64) -> ScalarField {
    ScalarField::from_fn(square(h), |x| {
        let y = x[1].max(0.0);
        p.c0 * y.powf(p.alpha) + extra * y.powf(2.0 - p.alpha)
    })
}

fn below(p: &Params, mu: f64) -> RadialBarrier {
    RadialBarrier::new(p, BarrierKind::UPlus, &[0.0, 0.8], 0.5, Orientation::InsidePositive, mu)
}

fn above(p: &Params, mu: f64) -> RadialBarrier {
    RadialBarrier::new(p, BarrierKind::UPlus, &[0.0, -0.8], 0.5, Orientation::OutsidePositive, mu)
}

/// Height `t` of the ball bottom at which `c0 d^alpha + mu d^(2-alpha)`
/// first touches `c0 (d+t)^alpha`. Below the center `y = t + d` on the axis,
/// and every other point at distance `d` has `y >= t + d`.
fn axis_contact(p: &Params, mu: f64, r: f64) -> f64 {
    let ok = |t: f64| {
        (1..=4000).all(|k| {
            let d = r * k as f64 / 4000.0;
            p.c0 * (d + t).powf(p.alpha) - p.c0 * d.powf(p.alpha) - mu * d.powf(2.0 - p.alpha) >= 0.0
        })
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if ok(m) {
            hi = m;
        } else {
            lo = m;
        }
    }
    hi
}

#[test]
fn no_forbidden_touching_on_the_half_plane_solution() {
    let p = p1();
    let h = 1.0 / 128.0;
    let u = half_plane(&p, h, 0.0);
    let rep = touch_test(&u, &p, &below(&p, 0.5), Side::Below).unwrap();
    assert!(rep.contact && rep.pass && !rep.at_free_boundary);
    assert!(rep.fb_gap > rep.tolerance);
    // the slide stops where the ball bottom is t above the line
    let t = axis_contact(&p, 0.5, 0.5);
    let bottom = 0.8 - 0.5 - rep.offset;
    assert!((bottom - t).abs() < 2.0 * h, "{bottom} vs {t}");

    let rep = touch_test(&u, &p, &above(&p, -0.05), Side::Above).unwrap();
    assert!(rep.contact && rep.pass && !rep.at_free_boundary, "{rep:?}");
}

#[test]
fn tangential_contact_of_the_homogeneous_barrier() {
    let p = p1();
    let h = 1.0 / 128.0;
    let u = half_plane(&p, h, 0.0);
    let rep = touch_test(&u, &p, &below(&p, 0.0), Side::Below).unwrap();
    assert!(rep.contact && rep.at_free_boundary && !rep.forbidden_sign && rep.pass, "{rep:?}");
}

#[test]
fn corrupted_field_is_caught() {
    let p = p1();
    let h = 1.0 / 128.0;
    let rep = touch_test(&half_plane(&p, h, 0.1), &p, &below(&p, 0.05), Side::Below).unwrap();
    assert!(rep.contact && rep.at_free_boundary && rep.forbidden_sign && !rep.pass, "{rep:?}");
    // the same detector stays silent on the exact field
    let rep = touch_test(&half_plane(&p, h, 0.0), &p, &below(&p, 0.05), Side::Below).unwrap();
    assert!(rep.pass && !rep.at_free_boundary, "{rep:?}");

    let rep = touch_test(&half_plane(&p, h, -0.1), &p, &above(&p, -0.05), Side::Above).unwrap();
    assert!(!rep.pass, "{rep:?}");
}

#[test]
fn computed_minimizer_passes() {
    let p = p1();
    let prob = Problem::with_boundary_data(p, square(1.0 / 64.0), |x| p.c0 * x[1].max(0.0).powf(p.alpha)).unwrap();
    let u = solve(&prob, &SolverConfig::default()).unwrap().0;
    for (b, side) in [(below(&p, 0.5), Side::Below), (above(&p, -0.05), Side::Above)] {
        let rep = touch_test(&u, &p, &b, side).unwrap();
        assert!(rep.contact && rep.pass, "{rep:?}");
    }
}

#[test]
fn touching_input_errors() {
    let p = p1();
    let u = half_plane(&p, 1.0 / 32.0, 0.0);
    // wrong orientation for the side
    assert!(touch_test(&u, &p, &below(&p, 0.5), Side::Above).is_err());
    // a start already overlapping the zero set
    let b = RadialBarrier { center: vec![0.0, 0.2], ..below(&p, 0.5) };
    assert!(touch_test(&u, &p, &b, Side::Below).is_err());
    let empty = ScalarField::from_fn(square(1.0 / 32.0), |_| 1.0);
    assert!(touch_test(&empty, &p, &below(&p, 0.5), Side::Below).is_err());
}

const S: f64 = -2.0 / 3.0;

#[test]
fn linearized_reproduces_affine_data() {
    for (k, f) in [(0usize, Box::new(|_: &[f64]| 0.7) as Box<dyn Fn(&[f64]) -> f64>), (1, Box::new(|x: &[f64]| 0.3 * x[0] - 1.2))] {
        let lp = LinearizedProblem::new(S, 1.0, 1.0, 1.0 / 64.0, &f).unwrap();
        let sol = solve_linearized(&lp).unwrap();
        let err = (0..sol.values.len()).fold(0.0f64, |m, i| m.max((sol.values[i] - f(&sol.grid.point(i))).abs()));
        assert!(err <= 1e-10, "case {k}: {err}");
    }
}

#[test]
fn power_profile_identity() {
    for s in [-0.9, -2.0 / 3.0, -0.5, -0.1] {
        for x in log_samples(1e-3, 1.0, 1000) {
            assert!(power_profile_residual(s, x).abs() <= 1e-12, "{s} {x}");
        }
    }
}

#[test]
fn linearized_is_linear() {
    let f = |x: &[f64]| (2.0 * x[0]).sin() + x[1] * x[1];
    let g = |x: &[f64]| (x[0] - 0.2).abs() + 0.5;
    let solve_with = |d: &dyn Fn(&[f64]) -> f64| solve_linearized(&LinearizedProblem::new(S, 1.0, 1.0, 1.0 / 32.0, d).unwrap()).unwrap();
    let (a, b, ab) = (solve_with(&f), solve_with(&g), solve_with(&|x: &[f64]| f(x) + g(x)));
    let err = (0..a.values.len()).fold(0.0f64, |m, i| m.max((a.values[i] + b.values[i] - ab.values[i]).abs()));
    assert!(err < 1e-9, "{err}");
}

#[test]
fn regular_decay_at_the_flat_boundary() {
    let lp = LinearizedProblem::new(S, 1.0, 1.0, 1.0 / 128.0, |x| (1.3 * x[0] + 0.4).sin() * (1.0 + x[1]) + x[0] * x[0] * x[1]).unwrap();
    let sol = solve_linearized(&lp).unwrap();
    let radii: Vec<f64> = (0..6).map(|k| 0.05 * 1.5f64.powi(k)).collect();
    let fit = linearized_decay(&sol, &radii).unwrap();
    assert!(fit.slope > 1.0, "{fit:?}");
}

#[test]
fn linearized_thread_count_does_not_matter() {
    let lp = LinearizedProblem::new(S, 1.0, 0.5, 1.0 / 32.0, |x| x[0].cos() + x[1]).unwrap();
    let a = solve_linearized(&lp).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| solve_linearized(&lp).unwrap());
    assert_eq!(a.values, b.values);
}

#[test]
fn linearized_reports_stalls() {
    let mut lp = LinearizedProblem::new(S, 1.0, 1.0, 1.0 / 32.0, |x| x[0].sin()).unwrap();
    lp.max_sweeps = 10;
    assert!(matches!(solve_linearized(&lp), Err(apfb::Error::NoConvergence { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneous_profile_meets_the_calibration_identity(gamma in 0.05f64..1.95) {
        let p = make_params(gamma).unwrap();
        let b = RadialBarrier::new(&p, BarrierKind::UPlus, &[0.0], 1.0, Orientation::InsidePositive, 0.0);
        let rep = calibration_slope_check(&b, &p, &log_samples(1e-6, 0.5, 50)).unwrap();
        prop_assert!(rep.max_rel_defect <= 1e-12);
    }

    #[test]
    fn barriers_vanish_off_the_positive_side(
        x in -2.0f64..2.0, y in -2.0f64..2.0, mu in -2.0f64..2.0, k in 0usize..5, inside in any::<bool>(),
    ) {
        let p = p1();
        let kinds = [BarrierKind::UPlus, BarrierKind::UMinus, BarrierKind::UStrict, BarrierKind::WTouch, BarrierKind::WSub];
        let o = if inside { Orientation::InsidePositive } else { Orientation::OutsidePositive };
        let b = RadialBarrier { eps: 0.01, ..RadialBarrier::new(&p, kinds[k], &[0.1, -0.2], 0.7, o, mu) };
        let rho = (x - 0.1).hypot(y + 0.2);
        let off = if inside { rho >= 0.7 } else { rho <= 0.7 };
        if off {
            prop_assert_eq!(barrier_value(&b, &p, &[x, y]), 0.0);
        }
    }
}
