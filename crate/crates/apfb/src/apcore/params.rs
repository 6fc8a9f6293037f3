use crate::error::{Error, Result};

/// Constants derived from the potential exponent `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub gamma: f64,
    /// Growth exponent `2/(gamma+2)`.
    pub alpha: f64,
    /// Coefficient of the homogeneous solution `c0 (x_n^+)^alpha`.
    pub c0: f64,
    /// Degeneracy exponent `2(alpha-1)` of the linearized problem.
    pub s: f64,
    /// Normalization `(1-gamma/2) sqrt(gamma/2)` of the rescaled functional.
    pub c_gamma: f64,
}

pub fn make_params(gamma: f64) -> Result<Params> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let alpha = 2.0 / (gamma + 2.0);
    let c0 = (alpha * (1.0 - alpha)).powf(-1.0 / (gamma + 2.0));
    Ok(Params {
        gamma,
        alpha,
        c0,
        s: 2.0 * (alpha - 1.0),
        c_gamma: (1.0 - gamma / 2.0) * (gamma / 2.0).sqrt(),
    })
}

impl Params {
    pub fn new(gamma: f64) -> Result<Self> {
        make_params(gamma)
    }

    /// `W(t)`; overflows to `+inf` as `t -> 0+`.
    #[inline]
    pub fn potential(&self, t: f64) -> f64 {
        potential_value(self, t)
    }

    /// Exponent `2 alpha - 2` of `w` in the energy density written in the w-variable.
    #[inline]
    pub(crate) fn w_power(&self) -> f64 {
        2.0 * self.alpha - 2.0
    }

    /// `u -> w = (u/c0)^(1/alpha)`.
    #[inline]
    pub fn to_w(&self, u: f64) -> f64 {
        if u > 0.0 {
            (u / self.c0).powf(1.0 / self.alpha)
        } else {
            0.0
        }
    }

    #[inline]
    pub fn to_u(&self, w: f64) -> f64 {
        if w > 0.0 {
            self.c0 * w.powf(self.alpha)
        } else {
            0.0
        }
    }

    /// Energy of `c0 x^alpha` on `[0,1]` in one dimension.
    pub fn half_line_energy(&self) -> f64 {
        let a = self.alpha;
        self.c0 * self.c0 * a * a / (2.0 * a - 1.0)
    }

    /// Weiss energy of the one-dimensional half-line solution.
    pub fn half_line_weiss(&self) -> f64 {
        let a = self.alpha;
        a * self.c0 * self.c0 * (1.0 - a) / (2.0 * a - 1.0)
    }

    /// Coefficient of `mu t^(2-alpha)` in the small-t expansion of the 1D profile.
    pub fn c1(&self) -> f64 {
        let a = self.alpha;
        1.0 / (2.0 * self.c0 * a * (3.0 - 2.0 * a))
    }

    /// Exponent of the third term in the small-t expansion, `4 - 3 alpha`.
    pub fn sigma_next(&self) -> f64 {
        4.0 - 3.0 * self.alpha
    }
}

/// `(1/gamma) t^-gamma` for `t > 0`, exactly `0` otherwise.
#[inline]
pub fn potential_value(p: &Params, t: f64) -> f64 {
    if t > 0.0 {
        t.powf(-p.gamma) / p.gamma
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gamma_one_values() {
        let p = make_params(1.0).unwrap();
        assert!((p.alpha - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.s + 2.0 / 3.0).abs() < 1e-15);
        // (9/2)^(1/3) from an independent cube-root evaluation
        assert!((p.c0 - 4.5f64.cbrt()).abs() < 1e-14);
        assert!((p.c0 - 1.650_963_6).abs() < 1e-7);
    }

    #[test]
    fn c_gamma_at_1_9() {
        let p = make_params(1.9).unwrap();
        assert!((p.c_gamma - 0.05 * 0.95f64.sqrt()).abs() < 1e-15);
        assert!((p.c_gamma - 0.048_734_0).abs() < 1e-7);
    }

    #[test]
    fn rejects_out_of_range() {
        for g in [0.0, 2.0, -1.0, 2.5, f64::NAN] {
            let e = make_params(g).unwrap_err();
            assert!(e.to_string().contains("(0, 2)"));
        }
    }

    #[test]
    fn potential_basics() {
        let p = make_params(1.0).unwrap();
        assert_eq!(potential_value(&p, 0.0), 0.0);
        assert_eq!(potential_value(&p, -3.0), 0.0);
        assert_eq!(potential_value(&p, 2.0), 0.5);
        assert!((potential_value(&p, 1e-9) - 1e9).abs() < 1e-3);
        assert_eq!(potential_value(&p, 1e-320), f64::INFINITY);
    }

    proptest! {
        #[test]
        fn identities(gamma in 1e-3f64..1.999) {
            let p = make_params(gamma).unwrap();
            prop_assert!(p.alpha > 0.5 && p.alpha < 1.0);
            prop_assert!(p.s > -1.0 && p.s < 0.0);
            prop_assert!((p.c0.powf(gamma + 2.0) * p.alpha * (1.0 - p.alpha) - 1.0).abs() <= 1e-13);
            prop_assert!((p.alpha - 2.0 + p.alpha * (gamma + 1.0)).abs() <= 1e-14);
        }

        #[test]
        fn potential_decreasing(a in 1e-6f64..10.0, b in 1e-6f64..10.0, gamma in 0.01f64..1.99) {
            let p = make_params(gamma).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi > lo * (1.0 + 1e-9));
            prop_assert!(potential_value(&p, lo) > potential_value(&p, hi));
        }

        #[test]
        fn u_w_round_trip(u in 0.0f64..100.0, gamma in 0.01f64..1.99) {
            let p = make_params(gamma).unwrap();
            let back = p.to_u(p.to_w(u));
            prop_assert!((back - u).abs() <= 1e-13 * u.max(1.0));
        }
    }
}
