use super::{barrier_value, Orientation, RadialBarrier};
use crate::apcore::{Params, ScalarField};
use crate::error::{domain, Error, Result};
use crate::fbanalysis::{extract_fb, WSampler};
use crate::par;

/// Which side of `u` the barrier stays on before contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `psi <= u`, positive inside its ball. Touching at the free boundary is
    /// forbidden for `mu > 0`.
    Below,
    /// `psi >= u`, positive outside its ball. Touching at the free boundary is
    /// forbidden for `mu < 0`.
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactReport {
    /// `false` when the slide ends without contact; the test then passes vacuously.
    pub contact: bool,
    /// Unit slide direction, from the template center towards the nearest
    /// free boundary point of `u`.
    pub axis: Vec<f64>,
    /// Distance slid at first contact.
    pub offset: f64,
    /// Node realising the smallest gap at contact.
    pub point: Vec<f64>,
    /// Smallest gap at contact.
    pub gap: f64,
    /// Value of the outer function on the free boundary of the inner one.
    pub fb_gap: f64,
    /// `2 h^alpha`.
    pub tolerance: f64,
    pub at_free_boundary: bool,
    pub forbidden_sign: bool,
    pub pass: bool,
}

const SLIDE_STEP: f64 = 0.5;

/// Slides `family` along the line from its center to the nearest interface
/// point of `u` until the smallest nodal gap drops to `h^2`.
///
/// The gap is `u - psi` over nodes inside the ball for [`Side::Below`] and
/// `psi - u` over positive nodes of `u` for [`Side::Above`]. Contact counts
/// as touching at the free boundary when the outer function is within
/// `2 h^alpha` of zero somewhere on the inner function's free boundary.
pub fn touch_test(u: &ScalarField, p: &Params, family: &RadialBarrier, side: Side) -> Result<ContactReport> {
    if family.kind.is_w() {
        return domain("touching tests use barriers in the u variable");
    }
    family.validate(p)?;
    let g = &u.grid;
    let nd = g.ndim();
    if family.center.len() != nd {
        return domain("barrier center dimension does not match the field");
    }
    let want = match side {
        Side::Below => Orientation::InsidePositive,
        Side::Above => Orientation::OutsidePositive,
    };
    if family.orientation != want {
        return domain("barrier orientation does not match the touching side");
    }
    let fb = extract_fb(p, u);
    let target = fb.nearest(&family.center).ok_or(Error::TooFewPoints { needed: 1, found: 0 })?.to_vec();
    let dist = crate::fbanalysis::dist2(&target, &family.center).sqrt();
    if dist == 0.0 {
        return domain("barrier center lies on the free boundary");
    }
    let axis: Vec<f64> = target.iter().zip(&family.center).map(|(t, c)| (t - c) / dist).collect();
    let h = g.h;
    let tol2 = h * h;
    let travel = (dist - family.r).max(0.0) + 4.0 * h;

    let at = |t: f64| RadialBarrier { center: family.center.iter().zip(&axis).map(|(c, a)| c + t * a).collect(), ..family.clone() };
    let gap = |t: f64| -> (f64, usize) {
        let b = at(t);
        let vals = par::map(g.len(), |i| {
            let x = g.point(i);
            match side {
                Side::Below if b.distance(&x) > 0.0 => u.values[i] - barrier_value(&b, p, &x),
                Side::Above if u.values[i] > 0.0 => barrier_value(&b, p, &x) - u.values[i],
                _ => f64::INFINITY,
            }
        });
        let k = (0..vals.len()).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        (vals[k], k)
    };

    let report = |contact: bool, offset: f64, gap: f64, node: usize, fb_gap: f64| {
        let tolerance = 2.0 * h.powf(p.alpha);
        let at_fb = contact && fb_gap <= tolerance;
        let forbidden_sign = match side {
            Side::Below => family.mu > 0.0,
            Side::Above => family.mu < 0.0,
        };
        ContactReport {
            contact,
            axis: axis.clone(),
            offset,
            point: g.point(node),
            gap,
            fb_gap,
            tolerance,
            at_free_boundary: at_fb,
            forbidden_sign,
            pass: !(at_fb && forbidden_sign),
        }
    };

    let (g0, _) = gap(0.0);
    if g0 <= tol2 {
        return domain("barrier family starts in contact with u");
    }
    let steps = (travel / (SLIDE_STEP * h)).ceil().max(1.0) as usize;
    let mut lo = 0.0;
    let mut hit = None;
    for k in 1..=steps {
        let t = travel * k as f64 / steps as f64;
        if gap(t).0 <= tol2 {
            hit = Some(t);
            break;
        }
        lo = t;
    }
    let Some(mut hi) = hit else {
        return Ok(report(false, travel, g0, 0, f64::INFINITY));
    };
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if gap(m).0 <= tol2 {
            hi = m;
        } else {
            lo = m;
        }
    }
    let (gmin, node) = gap(hi);
    let b = at(hi);
    let fb_gap = match side {
        Side::Below => {
            let ws = WSampler::new(p, u);
            crate::fbanalysis::sphere(&b.center, b.r).iter().filter_map(|x| ws.eval(x)).fold(f64::INFINITY, f64::min)
        }
        Side::Above => fb.points.iter().map(|x| barrier_value(&b, p, x)).fold(f64::INFINITY, f64::min),
    };
    Ok(report(true, hi, gmin, node, fb_gap))
}
