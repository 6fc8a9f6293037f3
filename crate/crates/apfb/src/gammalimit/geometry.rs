use crate::error::{domain, Result};
use std::f64::consts::TAU;

/// A planar set `E`, described by its signed distance (positive inside).
#[derive(Debug, Clone, PartialEq)]
pub enum SetGeometry {
    Empty,
    Disk { center: [f64; 2], r: f64 },
    Box { lo: [f64; 2], hi: [f64; 2] },
    Disks(Vec<([f64; 2], f64)>),
}

impl SetGeometry {
    pub fn disk(center: [f64; 2], r: f64) -> Self {
        SetGeometry::Disk { center, r }
    }

    /// Signed distance to the boundary, positive inside. For a union of
    /// disks the inside value is the largest single-disk distance, which is
    /// exact except near the corners where two circles cross.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        let disk = |c: &[f64; 2], r: f64| r - (x[0] - c[0]).hypot(x[1] - c[1]);
        match self {
            SetGeometry::Empty => f64::NEG_INFINITY,
            SetGeometry::Disk { center, r } => disk(center, *r),
            SetGeometry::Box { lo, hi } => {
                let inside = (x[0] - lo[0]).min(hi[0] - x[0]).min(x[1] - lo[1]).min(hi[1] - x[1]);
                if inside >= 0.0 {
                    inside
                } else {
                    let dx = (lo[0] - x[0]).max(x[0] - hi[0]).max(0.0);
                    let dy = (lo[1] - x[1]).max(x[1] - hi[1]).max(0.0);
                    -dx.hypot(dy)
                }
            }
            SetGeometry::Disks(ds) => ds.iter().map(|(c, r)| disk(c, *r)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Length scale the boundary layer must stay below.
    pub fn feature_size(&self) -> f64 {
        match self {
            SetGeometry::Empty => f64::INFINITY,
            SetGeometry::Disk { r, .. } => *r,
            SetGeometry::Box { lo, hi } => 0.5 * (hi[0] - lo[0]).min(hi[1] - lo[1]),
            SetGeometry::Disks(ds) => ds.iter().map(|d| d.1).fold(f64::INFINITY, f64::min),
        }
    }

    /// Whether the boundary has corners, where the recovery construction
    /// does not apply as stated.
    pub fn has_corners(&self) -> bool {
        match self {
            SetGeometry::Box { .. } => true,
            SetGeometry::Disks(ds) => {
                ds.iter().enumerate().any(|(i, a)| ds[i + 1..].iter().any(|b| crossing(a, b).is_some()))
            }
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |r: f64| !(r > 0.0 && r.is_finite());
        match self {
            SetGeometry::Disk { r, .. } if bad(*r) => domain("disk radius must be positive"),
            SetGeometry::Disks(ds) if ds.iter().any(|d| bad(d.1)) => domain("disk radii must be positive"),
            SetGeometry::Box { lo, hi } if !(lo[0] < hi[0] && lo[1] < hi[1]) => domain("box needs lo < hi"),
            _ => Ok(()),
        }
    }

    /// Whether the closed set lies in the box `[lo, hi]`.
    pub fn inside(&self, lo: &[f64], hi: &[f64]) -> bool {
        let disk_in = |c: &[f64; 2], r: f64| (0..2).all(|k| c[k] - r >= lo[k] && c[k] + r <= hi[k]);
        match self {
            SetGeometry::Empty => true,
            SetGeometry::Disk { center, r } => disk_in(center, *r),
            SetGeometry::Box { lo: a, hi: b } => (0..2).all(|k| a[k] >= lo[k] && b[k] <= hi[k]),
            SetGeometry::Disks(ds) => ds.iter().all(|(c, r)| disk_in(c, *r)),
        }
    }

    /// Perimeter in closed form: exposed arcs for a union of disks.
    pub fn perimeter(&self) -> f64 {
        match self {
            SetGeometry::Empty => 0.0,
            SetGeometry::Disk { r, .. } => TAU * r,
            SetGeometry::Box { lo, hi } => 2.0 * ((hi[0] - lo[0]) + (hi[1] - lo[1])),
            SetGeometry::Disks(ds) => (0..ds.len()).map(|i| exposed_arc(ds, i)).sum(),
        }
    }
}

/// Angular half-width and direction of the arc of circle `a` inside disk
/// `b`, when the two circles cross.
fn crossing(a: &([f64; 2], f64), b: &([f64; 2], f64)) -> Option<(f64, f64)> {
    let (ca, ra) = a;
    let (cb, rb) = b;
    let dist = (cb[0] - ca[0]).hypot(cb[1] - ca[1]);
    if dist >= ra + rb || dist <= (ra - rb).abs() {
        return None;
    }
    let cos = ((ra * ra + dist * dist - rb * rb) / (2.0 * ra * dist)).clamp(-1.0, 1.0);
    Some(((cb[1] - ca[1]).atan2(cb[0] - ca[0]), cos.acos()))
}

fn exposed_arc(ds: &[([f64; 2], f64)], i: usize) -> f64 {
    let (ci, ri) = ds[i];
    let mut arcs: Vec<(f64, f64)> = Vec::new();
    for (j, dj) in ds.iter().enumerate() {
        if j == i {
            continue;
        }
        let dist = (dj.0[0] - ci[0]).hypot(dj.0[1] - ci[1]);
        // duplicates: the first copy keeps the boundary
        let same = dist == 0.0 && dj.1 == ri;
        if (same && j < i) || (!same && dist + ri <= dj.1) {
            return 0.0;
        }
        if let Some((theta, half)) = crossing(&ds[i], dj) {
            let a = (theta - half).rem_euclid(TAU);
            let b = a + 2.0 * half;
            if b > TAU {
                arcs.push((a, TAU));
                arcs.push((0.0, b - TAU));
            } else {
                arcs.push((a, b));
            }
        }
    }
    arcs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut covered = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in arcs {
        cur = match cur {
            Some((s, e)) if a <= e => Some((s, e.max(b))),
            Some((s, e)) => {
                covered += e - s;
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    if let Some((s, e)) = cur {
        covered += e - s;
    }
    ri * (TAU - covered.min(TAU))
}

/// Perimeter of two equal overlapping disks with centers `dist` apart.
#[cfg(test)]
fn lens_union(r: f64, dist: f64) -> f64 {
    2.0 * r * (TAU - 2.0 * (dist / (2.0 * r)).acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disk_and_box() {
        assert!((SetGeometry::disk([0.5, 0.5], 0.25).perimeter() - PI / 2.0).abs() < 1e-15);
        let b = SetGeometry::Box { lo: [0.1, 0.2], hi: [0.4, 0.9] };
        assert!((b.perimeter() - 2.0).abs() < 1e-15);
        assert!(b.has_corners());
        assert_eq!(SetGeometry::Empty.perimeter(), 0.0);
        assert_eq!(SetGeometry::Disks(vec![]).perimeter(), 0.0);
    }

    #[test]
    fn box_distance() {
        let b = SetGeometry::Box { lo: [0.0, 0.0], hi: [1.0, 2.0] };
        assert!((b.signed_distance(&[0.3, 1.0]) - 0.3).abs() < 1e-15);
        assert!((b.signed_distance(&[-3.0, 6.0]) + 5.0).abs() < 1e-15);
    }

    #[test]
    fn union_of_two_disks() {
        let d = SetGeometry::Disks(vec![([0.0, 0.0], 1.0), ([1.2, 0.0], 1.0)]);
        assert!((d.perimeter() - lens_union(1.0, 1.2)).abs() < 1e-12);
        assert!(d.has_corners());
        // disjoint, nested and duplicate disks
        let far = SetGeometry::Disks(vec![([0.0, 0.0], 1.0), ([3.0, 0.0], 0.5)]);
        assert!((far.perimeter() - TAU * 1.5).abs() < 1e-12);
        let nested = SetGeometry::Disks(vec![([0.0, 0.0], 1.0), ([0.2, 0.0], 0.3)]);
        assert!((nested.perimeter() - TAU).abs() < 1e-12);
        let dup = SetGeometry::Disks(vec![([0.0, 0.0], 1.0), ([0.0, 0.0], 1.0)]);
        assert!((dup.perimeter() - TAU).abs() < 1e-12);
    }

    #[test]
    fn arc_wrapping_past_zero_angle() {
        // the second disk covers an arc around angle 0 of the first circle
        let d = SetGeometry::Disks(vec![([0.0, 0.0], 1.0), ([1.0, 0.0], 1.0)]);
        assert!((d.perimeter() - lens_union(1.0, 1.0)).abs() < 1e-12);
        assert!((lens_union(1.0, 1.0) - 2.0 * (TAU - 2.0 * PI / 3.0)).abs() < 1e-12);
    }
}
