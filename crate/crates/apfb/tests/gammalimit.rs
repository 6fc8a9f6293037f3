use apfb::apcore::energy;
use apfb::gammalimit::*;
use apfb::{make_params, Grid, Params, ScalarField};
use proptest::prelude::*;
use std::f64::consts::TAU;

fn unit(h: f64) -> Grid {
    Grid::covering(&[0.0, 0.0], &[1.0, 1.0], h).unwrap()
}

fn disk() -> SetGeometry {
    SetGeometry::disk([0.5, 0.5], 0.25)
}

fn recovery(p: &Params, delta: f64, h: f64) -> ScalarField {
    recovery_field(p, &disk(), &RecoveryProfile::new(delta), &unit(h), None).unwrap()
}

/// Layer energy of the disk by Simpson's rule in `t = s^(alpha kappa)`,
/// where the integrand `c0^kappa 2 pi (R - t^(1/(alpha kappa)))` is smooth.
fn layer_oracle(p: &Params, r: f64, delta: f64) -> f64 {
    let kappa = 1.0 - p.gamma / 2.0;
    let e = p.alpha * kappa;
    let top = delta.powf(e);
    let f = |t: f64| p.c0.powf(kappa) * TAU * (r - t.powf(1.0 / e));
    let n = 20_000;
    let dt = top / n as f64;
    let mut s = f(0.0) + f(top);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * dt);
    }
    s * dt / 3.0
}

#[test]
fn rescaling_constant_at_1_9() {
    let p = make_params(1.9).unwrap();
    let c = (1.0 - 0.95) * 0.95f64.sqrt();
    assert!((c - 0.048_734_0).abs() < 1e-7);
    let u = recovery(&p, 0.05, 1.0 / 64.0);
    let j = energy(&p, &u, None).unwrap().total;
    assert!((rescaled_energy(&p, &u).unwrap() - c * j).abs() < 1e-14 * j);
}

#[test]
fn closed_form_prediction_matches_its_quadrature() {
    for gamma in [1.5, 1.9, 1.98] {
        let p = make_params(gamma).unwrap();
        let pr = disk_prediction(&p, 0.25, 0.05);
        let o = layer_oracle(&p, 0.25, 0.05);
        assert!((pr.layer_energy - o).abs() < 1e-9 * o, "{gamma}: {} vs {o}", pr.layer_energy);
    }
}

#[test]
fn recovery_energy_near_the_perimeter() {
    let p = make_params(1.98).unwrap();
    let u = recovery(&p, 0.05, 1.0 / 512.0);
    let j = rescaled_energy(&p, &u).unwrap();
    let per = TAU * 0.25;
    assert!(j >= 0.90 * per && j <= 1.00 * per, "{j}");
    let layer = layer_oracle(&p, 0.25, 0.05);
    assert!((j / layer - 1.0).abs() < 0.02, "{j} vs {layer}");
}

#[test]
fn bound_equals_the_layer_energy() {
    for (gamma, h) in [(1.98, 1.0 / 256.0), (1.7, 1.0 / 256.0), (1.0, 1.0 / 256.0)] {
        let p = make_params(gamma).unwrap();
        let b = bv_lower_bound(&p, &recovery(&p, 0.05, h)).unwrap();
        let layer = layer_oracle(&p, 0.25, 0.05);
        assert!((b / layer - 1.0).abs() < 0.01, "{gamma}: {b} vs {layer}");
    }
}

#[test]
fn energy_within_layer_and_resolution_factors() {
    let r = 0.25;
    for gamma in [1.9, 1.98] {
        let p = make_params(gamma).unwrap();
        for (delta, h) in [(0.05, 1.0 / 128.0), (0.1, 1.0 / 256.0), (0.02, 1.0 / 512.0)] {
            let j = rescaled_energy(&p, &recovery(&p, delta, h)).unwrap();
            let pr = disk_prediction(&p, r, delta);
            let slack = 2.0 * delta / r + 5.0 * h / delta;
            let base = pr.layer_factor * pr.perimeter;
            assert!(j >= base * (1.0 - slack) && j <= (base + pr.core_potential) * (1.0 + slack), "{gamma} {delta} {h}: {j}");
        }
    }
}

#[test]
fn positivity_set_is_the_disk() {
    let p = make_params(1.98).unwrap();
    let u = recovery(&p, 0.05, 1.0 / 128.0);
    for i in 0..u.values.len() {
        let x = u.grid.point(i);
        assert_eq!(u.values[i] > 0.0, disk().signed_distance(&x) > 0.0, "{x:?}");
    }
    assert!(u.max_value() <= p.c0 * 0.05f64.powf(p.alpha) * (1.0 + 1e-15));
}

#[test]
fn recovery_approaches_the_target_in_dx() {
    let p = make_params(1.9).unwrap();
    let mut last = f64::INFINITY;
    for delta in [0.2, 0.1, 0.05, 0.02, 0.01] {
        let u = recovery(&p, delta, 1.0 / 256.0);
        let d = dx_to_target(&u, &disk(), None).unwrap();
        assert!(d <= p.c0 * delta.powf(p.alpha), "{delta}: {d}");
        assert!(d < last);
        last = d;
    }
}

#[test]
fn blended_approximand() {
    let p = make_params(1.9).unwrap();
    let g = unit(1.0 / 64.0);
    let target = ScalarField::from_fn(g.clone(), |x| 1.0 + x[0]);
    for cutoff in [Cutoff::PowerLaw, Cutoff::Smooth] {
        let prof = RecoveryProfile { delta: 0.05, cutoff };
        let v = recovery_field(&p, &disk(), &prof, &g, Some(&target)).unwrap();
        let w = recovery_field(&p, &disk(), &prof, &g, None).unwrap();
        for i in 0..v.values.len() {
            let d = disk().signed_distance(&g.point(i));
            if d <= 0.05 {
                assert_eq!(v.values[i], w.values[i]);
            } else if d >= 0.1 {
                assert!((v.values[i] - w.values[i] - target.values[i]).abs() < 1e-14);
            }
        }
        assert!(dx_to_target(&v, &disk(), Some(&target)).unwrap() < dx_to_target(&w, &disk(), Some(&target)).unwrap());
    }
}

#[test]
fn perimeters() {
    assert!((disk().perimeter() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    let b = SetGeometry::Box { lo: [0.25, 0.25], hi: [0.75, 0.5] };
    assert!((b.perimeter() - 1.5).abs() < 1e-15);
    assert_eq!(SetGeometry::Empty.perimeter(), 0.0);

    // discrete perimeters of the corresponding indicators
    let p = make_params(1.5).unwrap();
    let h = 1.0 / 256.0;
    let bu = ScalarField::from_fn(unit(h), |x| if b.signed_distance(x) > 0.0 { 1.0 } else { 0.0 });
    let pb = indicator_perimeter(&bu).unwrap();
    // nodes on the edges count as outside, which trims about 2h per corner
    assert!((pb - 1.5).abs() < 8.0 * h, "{pb}");
    let du = recovery(&p, 0.05, h);
    let rel = indicator_perimeter(&du).unwrap() / disk().perimeter() - 1.0;
    assert!(rel.abs() < 0.06, "{rel}");
}

#[test]
fn sweep_over_gamma() {
    let gammas = [1.5, 1.7, 1.9, 1.95, 1.98];
    let rows = gamma_sweep(&disk(), &gammas, &[0.05], 1.0 / 256.0).unwrap();
    assert_eq!(rows.len(), 5);
    for (row, &g) in rows.iter().zip(&gammas) {
        assert_eq!(row.gamma, g);
        assert!(row.bv_bound <= row.j_rescaled);
        assert!(row.j_rescaled < row.perimeter);
    }
    assert!(rows.windows(2).all(|w| w[1].j_rescaled > w[0].j_rescaled), "{rows:?}");
    assert!(rows.windows(2).all(|w| w[1].layer_factor_predicted > w[0].layer_factor_predicted));
}

#[test]
fn sweep_rows_follow_the_input_order() {
    let rows = gamma_sweep(&disk(), &[1.9, 1.5], &[0.1, 0.05], 1.0 / 64.0).unwrap();
    let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r.gamma, r.delta)).collect();
    assert_eq!(keys, vec![(1.9, 0.1), (1.9, 0.05), (1.5, 0.1), (1.5, 0.05)]);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let again = pool.install(|| gamma_sweep(&disk(), &[1.9, 1.5], &[0.1, 0.05], 1.0 / 64.0).unwrap());
    assert_eq!(rows, again);
}

#[test]
fn empty_shape_sweeps_to_zero() {
    let rows = gamma_sweep(&SetGeometry::Empty, &[1.5, 1.9], &[0.05], 1.0 / 64.0).unwrap();
    for r in rows {
        assert_eq!([r.j_rescaled, r.bv_bound, r.perimeter, r.layer_factor_predicted], [0.0; 4]);
    }
}

#[test]
fn union_of_disks_recovery() {
    let set = SetGeometry::Disks(vec![([0.35, 0.5], 0.2), ([0.65, 0.5], 0.2)]);
    assert!(set.has_corners());
    let p = make_params(1.98).unwrap();
    let u = recovery_field(&p, &set, &RecoveryProfile::new(0.02), &unit(1.0 / 256.0), None).unwrap();
    let j = rescaled_energy(&p, &u).unwrap();
    assert!(bv_lower_bound(&p, &u).unwrap() <= j);
    // below the perimeter, above the layer factor times it less a curvature margin
    let per = set.perimeter();
    let a = (p.c0 * 0.02f64.powf(p.alpha)).powf(1.0 - p.gamma / 2.0);
    assert!(j < per && j > 0.95 * a * per, "{j} {per}");
}

#[test]
fn recovery_input_errors() {
    let p = make_params(1.9).unwrap();
    let g = unit(1.0 / 32.0);
    assert!(recovery_field(&p, &SetGeometry::disk([0.9, 0.5], 0.25), &RecoveryProfile::new(0.05), &g, None).is_err());
    assert!(recovery_field(&p, &disk(), &RecoveryProfile::new(0.0), &g, None).is_err());
    let other = ScalarField::zeros(unit(1.0 / 16.0));
    assert!(recovery_field(&p, &disk(), &RecoveryProfile::new(0.05), &g, Some(&other)).is_err());
}

fn smooth_field(g: Grid, c: [f64; 5]) -> ScalarField {
    ScalarField::from_fn(g, |x| {
        c[0] + c[1] * (3.0 * x[0] + c[2]).sin() * (2.0 * x[1]).cos() + c[3] * (x[0] * x[1] + c[4]).cos()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lower_bound_on_smooth_positive_fields(
        gamma in 0.2f64..1.98,
        base in 0.5f64..2.0,
        a in -0.4f64..0.4,
        ph in 0.0f64..3.0,
        b in -0.4f64..0.4,
        q in 0.0f64..3.0,
    ) {
        let p = make_params(gamma).unwrap();
        let u = smooth_field(unit(1.0 / 16.0), [base, a, ph, b, q]);
        prop_assume!(u.values.iter().all(|&v| v > 0.0));
        let j = rescaled_energy(&p, &u).unwrap();
        prop_assert!(j >= bv_lower_bound(&p, &u).unwrap() - 1e-6 * (1.0 + j));
    }

    #[test]
    fn lower_bound_on_fields_with_a_free_boundary(gamma in 0.2f64..1.98, shift in -0.3f64..0.3, tilt in 0.0f64..1.0) {
        let p = make_params(gamma).unwrap();
        let u = ScalarField::from_fn(unit(1.0 / 32.0), |x| (x[0] + tilt * x[1] - 0.5 - shift).max(0.0).sqrt() * (1.0 + x[1]));
        let j = rescaled_energy(&p, &u).unwrap();
        prop_assert!(j >= bv_lower_bound(&p, &u).unwrap() - 1e-6 * (1.0 + j));
    }
}
