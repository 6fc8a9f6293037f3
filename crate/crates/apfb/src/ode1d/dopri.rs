//! Adaptive Dormand-Prince 5(4) for small autonomous-or-not systems.

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tol {
    pub rtol: f64,
    pub atol: f64,
}

pub(crate) enum Outcome<const N: usize> {
    /// Reached the requested end point.
    Done([f64; N]),
    /// Could not advance without leaving the valid set; last accepted state.
    Blocked(f64, [f64; N]),
}

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] = [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

fn comb<const N: usize>(y: &[f64; N], h: f64, ks: &[[f64; N]], a: &[f64]) -> [f64; N] {
    let mut out = *y;
    for (k, &ak) in ks.iter().zip(a) {
        for i in 0..N {
            out[i] += h * ak * k[i];
        }
    }
    out
}

/// One trial step: returns the 5th-order state and the scaled error norm.
fn trial<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64, tol: Tol) -> Option<([f64; N], f64)>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(t, y);
    let k2 = f(t + C[0] * h, &comb(y, h, &[k1], &A2));
    let k3 = f(t + C[1] * h, &comb(y, h, &[k1, k2], &A3));
    let k4 = f(t + C[2] * h, &comb(y, h, &[k1, k2, k3], &A4));
    let k5 = f(t + C[3] * h, &comb(y, h, &[k1, k2, k3, k4], &A5));
    let k6 = f(t + C[4] * h, &comb(y, h, &[k1, k2, k3, k4, k5], &A6));
    let y5 = comb(y, h, &[k1, k2, k3, k4, k5, k6], &B);
    let k7 = f(t + h, &y5);
    let ks = [k1, k2, k3, k4, k5, k6, k7];
    let mut err = 0.0f64;
    for i in 0..N {
        let mut e = 0.0;
        for (k, &ek) in ks.iter().zip(&E) {
            e += ek * k[i];
        }
        let sc = tol.atol + tol.rtol * y[i].abs().max(y5[i].abs());
        err = err.max((h * e).abs() / sc);
    }
    if !err.is_finite() || y5.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some((y5, err))
}

/// Integrates from `t0` to `t1` (either direction), landing exactly on `t1`.
/// Trial states failing `valid` are rejected like error-test failures.
/// `h` carries the step-size suggestion between calls.
pub(crate) fn integrate<const N: usize, F, V>(
    f: &F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    h: &mut f64,
    tol: Tol,
    valid: V,
) -> Outcome<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    V: Fn(&[f64; N]) -> bool,
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    if span == 0.0 {
        return Outcome::Done(y);
    }
    let h_min = 1e-14 * t0.abs().max(t1.abs()).max(span);
    let mut step = h.abs().min(span);
    if step <= 0.0 || !step.is_finite() {
        step = 1e-3 * span;
    }
    let mut steps = 0usize;
    loop {
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            return Outcome::Done(y);
        }
        let last = step >= remaining;
        let hh = if last { remaining } else { step };
        steps += 1;
        if steps > 5_000_000 {
            return Outcome::Blocked(t, y);
        }
        match trial(f, t, &y, dir * hh, tol) {
            Some((yn, err)) if err <= 1.0 && valid(&yn) => {
                t = if last { t1 } else { t + dir * hh };
                y = yn;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                step = hh * fac;
                if !last {
                    *h = step;
                }
            }
            Some((_, err)) if err > 1.0 => {
                step = hh * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if step < h_min {
                    return Outcome::Blocked(t, y);
                }
            }
            _ => {
                step = hh * 0.25;
                if step < h_min {
                    return Outcome::Blocked(t, y);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut h = 0.1;
        let tol = Tol { rtol: 1e-12, atol: 1e-14 };
        let Outcome::Done(y) = integrate(&f, 0.0, [0.0, 1.0], 10.0, &mut h, tol, |_| true) else { panic!() };
        assert!((y[0] - 10f64.sin()).abs() < 1e-10);
        assert!((y[1] - 10f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn blocked_at_the_boundary_of_the_valid_set() {
        let f = |_t: f64, _y: &[f64; 1]| [-1.0];
        let mut h = 0.1;
        let tol = Tol { rtol: 1e-12, atol: 1e-14 };
        match integrate(&f, 0.0, [1.0], 2.0, &mut h, tol, |y| y[0] > 1e-6) {
            Outcome::Blocked(t, y) => {
                assert!(t > 1.0 - 2e-6 && t < 1.0);
                assert!(y[0] > 0.0 && y[0] < 2e-6);
            }
            Outcome::Done(_) => panic!("should block"),
        }
    }
}
