use super::FreeBoundary;
use crate::apcore::{energy, Params, Region, ScalarField};
use crate::error::{domain, Error, Result};
use crate::fit::linear_fit;
use crate::par;

/// Angular samples per circle in 2D.
pub const SPHERE_SAMPLES: usize = 4096;

/// Power-law fit `max ~ intercept * r^slope`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub radii: Vec<f64>,
    pub maxima: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Radii with a zero maximum, left out of the fit.
    pub excluded: Vec<f64>,
}

impl GrowthFit {
    /// Whether the fitted exponent is within `tol` of `alpha`.
    pub fn exponent_matches(&self, alpha: f64, tol: f64) -> bool {
        (self.slope - alpha).abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeissCurve {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl WeissCurve {
    /// Smallest `W(r_{k+1}) - W(r_k)`; `+inf` for fewer than two radii.
    pub fn min_increment(&self) -> f64 {
        self.values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return domain("radii must be positive and finite");
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return domain("radii must be strictly increasing");
    }
    Ok(())
}

fn check_ball(u: &ScalarField, center: &[f64], r: f64) -> Result<()> {
    let nd = u.ndim();
    if center.len() != nd {
        return domain("center dimension does not match the field");
    }
    for a in 0..nd {
        for s in [-1.0, 1.0] {
            let mut y = center.to_vec();
            y[a] += s * r;
            if !u.grid.contains(&y) {
                return domain(format!("ball of radius {r} about {center:?} leaves the field box"));
            }
        }
    }
    Ok(())
}

/// Sample points on the sphere of radius `r`: two points in 1D, equispaced
/// angles in 2D.
pub(crate) fn sphere(center: &[f64], r: f64) -> Vec<Vec<f64>> {
    if center.len() == 1 {
        return vec![vec![center[0] - r], vec![center[0] + r]];
    }
    (0..SPHERE_SAMPLES)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / SPHERE_SAMPLES as f64;
            vec![center[0] + r * t.cos(), center[1] + r * t.sin()]
        })
        .collect()
}

fn fit_power(radii: Vec<f64>, maxima: Vec<f64>) -> Result<GrowthFit> {
    let (mut lx, mut ly, mut excluded) = (Vec::new(), Vec::new(), Vec::new());
    for (&r, &m) in radii.iter().zip(&maxima) {
        if m > 0.0 {
            lx.push(r.ln());
            ly.push(m.ln());
        } else {
            excluded.push(r);
        }
    }
    if lx.len() < 2 {
        return Err(Error::IllConditioned(format!("only {} radii with a positive maximum", lx.len())));
    }
    let (slope, b) = linear_fit(&lx, &ly).ok_or_else(|| Error::IllConditioned("degenerate radii".into()))?;
    Ok(GrowthFit { radii, maxima, slope, intercept: b.exp(), excluded })
}

/// `max_{|x-center|=r} u` per radius and its log-log slope.
pub fn growth_fit(u: &ScalarField, center: &[f64], radii: &[f64]) -> Result<GrowthFit> {
    check_radii(radii)?;
    for &r in radii {
        check_ball(u, center, r)?;
    }
    let maxima = par::map(radii.len(), |k| {
        sphere(center, radii[k]).iter().map(|x| u.interpolate(x).unwrap_or(0.0)).fold(0.0, f64::max)
    });
    fit_power(radii.to_vec(), maxima)
}

/// Growth away from the free boundary. Positive nodes of the ball are
/// binned by their distance to the interface points, with bin edges `edges`;
/// each bin contributes its largest value at the distance where it occurs.
/// For a minimizer these upper envelopes grow like `d^alpha`.
pub fn distance_growth(u: &ScalarField, fb: &FreeBoundary, center: &[f64], radius: f64, edges: &[f64]) -> Result<GrowthFit> {
    check_radii(edges)?;
    if edges.len() < 2 {
        return domain("need at least two bin edges");
    }
    check_ball(u, center, radius)?;
    if fb.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, found: 0 });
    }
    let g = &u.grid;
    let pairs: Vec<(f64, f64)> = par::map(g.len(), |i| {
        let x = g.point(i);
        if u.values[i] > 0.0 && super::dist2(&x, center) <= radius * radius {
            (fb.distance(&x), u.values[i])
        } else {
            (f64::INFINITY, 0.0)
        }
    });
    let (mut dists, mut maxima) = (Vec::new(), Vec::new());
    for e in edges.windows(2) {
        let top = pairs.iter().filter(|q| q.0 >= e[0] && q.0 < e[1]).max_by(|a, b| a.1.total_cmp(&b.1));
        if let Some(&(d, v)) = top {
            dists.push(d);
            maxima.push(v);
        }
    }
    fit_power(dists, maxima)
}

/// Weight of the boundary term in the Weiss energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryWeight {
    /// `alpha`, as in the usual statement of the formula.
    #[default]
    Alpha,
    /// `alpha / 2`. With the `1/2 |grad u|^2` energy this is the weight for
    /// which `dW/dr` reduces to `1/2 int (u_nu - alpha u / r)^2` plus a
    /// nonnegative minimality term, so only this one is monotone for every
    /// minimizer. Both are constant on alpha-homogeneous fields.
    HalfAlpha,
}

/// `W(r) = r^(-n-2(alpha-1)) J(u, B_r) - alpha r^(-(n-1)-2 alpha) int_{dB_r} u^2`,
/// the boundary term by the trapezoid rule on the sampled circle.
pub fn weiss_curve(p: &Params, u: &ScalarField, center: &[f64], radii: &[f64]) -> Result<WeissCurve> {
    weiss_curve_with(p, u, center, radii, BoundaryWeight::Alpha)
}

pub fn weiss_curve_with(p: &Params, u: &ScalarField, center: &[f64], radii: &[f64], weight: BoundaryWeight) -> Result<WeissCurve> {
    check_radii(radii)?;
    for &r in radii {
        check_ball(u, center, r)?;
    }
    let n = u.ndim() as f64;
    let a = p.alpha;
    let k = match weight {
        BoundaryWeight::Alpha => a,
        BoundaryWeight::HalfAlpha => 0.5 * a,
    };
    let ws = super::WSampler::new(p, u);
    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        let j = energy(p, u, Some(&Region::ball(center, r)))?.total;
        let pts = sphere(center, r);
        let sq: f64 = pts.iter().map(|x| ws.eval(x).unwrap_or(0.0).powi(2)).sum();
        let surface = if u.ndim() == 1 { sq } else { sq * std::f64::consts::TAU * r / pts.len() as f64 };
        values.push(r.powf(-n - 2.0 * (a - 1.0)) * j - k * r.powf(-(n - 1.0) - 2.0 * a) * surface);
    }
    Ok(WeissCurve { radii: radii.to_vec(), values })
}
