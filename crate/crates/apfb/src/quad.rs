//! Quadrature kernels: exact power-law integrals over intervals and
//! triangles with affine arguments, polygon clipping, and adaptive
//! Gauss-Kronrod.

const GL8_X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL8_W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_W: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_W: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// 8-point Gauss-Legendre on `[a, b]`.
pub fn gauss8(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut s = 0.0;
    for k in 0..4 {
        s += GL8_W[k] * (f(c - r * GL8_X[k]) + f(c + r * GL8_X[k]));
    }
    s * r
}

fn gk15(a: f64, b: f64, f: &impl Fn(f64) -> f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_W[7] * fc;
    let mut g = G7_W[3] * fc;
    for i in 0..7 {
        let s = f(c - r * GK_X[i]) + f(c + r * GK_X[i]);
        k += GK_W[i] * s;
        if i % 2 == 1 {
            g += G7_W[i / 2] * s;
        }
    }
    (k * r, ((k - g) * r).abs())
}

/// 8-point Gauss-Legendre of `f(a + s, s)` over `s in [0, d]`; the offset is
/// passed separately so integrands like `t - a` keep full relative accuracy.
fn gauss8_offset(a: f64, d: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    let r = 0.5 * d;
    let mut acc = 0.0;
    for k in 0..4 {
        let (s0, s1) = (r * (1.0 - GL8_X[k]), r * (1.0 + GL8_X[k]));
        acc += GL8_W[k] * (f(a + s0, s0) + f(a + s1, s1));
    }
    acc * r
}

/// Globally adaptive Gauss-Kronrod 7/15: the interval with the largest error
/// estimate is bisected until the summed estimate is below `tol` or the
/// interval budget runs out. Returns the estimate and the summed error.
pub fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    use std::cmp::Ordering;
    use std::collections::BinaryHeap;

    struct Piece(f64, f64, f64, f64);
    impl PartialEq for Piece {
        fn eq(&self, o: &Self) -> bool {
            self.3 == o.3
        }
    }
    impl Eq for Piece {}
    impl PartialOrd for Piece {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Piece {
        fn cmp(&self, o: &Self) -> Ordering {
            self.3.total_cmp(&o.3)
        }
    }

    const BUDGET: usize = 4000;
    let (v, e) = gk15(a, b, &f);
    let mut heap = BinaryHeap::from([Piece(a, b, v, e)]);
    let mut err = e;
    while err > tol && heap.len() < BUDGET {
        let Piece(l, r, pv, pe) = heap.pop().unwrap();
        let m = 0.5 * (l + r);
        if m <= l || m >= r {
            // the worst piece is at rounding resolution
            heap.push(Piece(l, r, pv, pe));
            break;
        }
        let (lv, le) = gk15(l, m, &f);
        let (rv, re) = gk15(m, r, &f);
        err += le + re - pe;
        heap.push(Piece(l, m, lv, le));
        heap.push(Piece(m, r, rv, re));
    }
    let (mut total, mut err) = (0.0, 0.0);
    let mut pieces = heap.into_vec();
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    for Piece(_, _, pv, pe) in pieces {
        total += pv;
        err += pe;
    }
    (total, err)
}

/// `int_a^b t^p dt` for `0 <= a <= b`, `p > -1`, without cancellation.
pub fn pow_int(a: f64, b: f64, p: f64) -> f64 {
    let q = p + 1.0;
    if b <= a {
        return 0.0;
    }
    if a <= 0.0 {
        return b.powf(q) / q;
    }
    a.powf(q) * (q * ((b - a) / a).ln_1p()).exp_m1() / q
}

/// `int_a^b t^p (t - a) dt`, `0 <= a < b`.
fn ramp_up(a: f64, b: f64, p: f64) -> f64 {
    if a > 0.0 && b - a <= 0.5 * a {
        return gauss8_offset(a, b - a, |t, s| t.powf(p) * s);
    }
    pow_int(a, b, p + 1.0) - a * pow_int(a, b, p)
}

/// `int_a^b t^p (t - c) dt` for `c <= a`, `0 <= a < b`.
fn ramp_from(c: f64, a: f64, b: f64, p: f64) -> f64 {
    if c == a {
        return ramp_up(a, b, p);
    }
    // c < 0 here in practice: both parts are positive
    ramp_up(a, b, p) + (a - c) * pow_int(a, b, p)
}

/// `int_a^b t^p (b - t) dt`, `0 <= a < b`.
fn ramp_down(a: f64, b: f64, p: f64) -> f64 {
    if a > 0.0 && b - a <= 0.5 * a {
        let d = b - a;
        return gauss8_offset(a, d, |t, s| t.powf(p) * (d - s));
    }
    if a <= 0.0 {
        let q = p + 1.0;
        return b.powf(q + 1.0) / (q * (q + 1.0));
    }
    b * pow_int(a, b, p) - pow_int(a, b, p + 1.0)
}

/// `int (w^+)^p dx` over an interval of length `len` on which `w` is affine
/// with end values `wl`, `wr`.
pub fn interval_power(len: f64, wl: f64, wr: f64, p: f64) -> f64 {
    let (lo, hi) = if wl <= wr { (wl, wr) } else { (wr, wl) };
    if hi <= 0.0 || len <= 0.0 {
        return 0.0;
    }
    if hi == lo {
        return len * hi.powf(p);
    }
    len / (hi - lo) * pow_int(lo.max(0.0), hi, p)
}

/// `int_T (w^+)^p dA` for `w` affine on a triangle of area `area`
/// with vertex values `w`. Exact via the pushforward density of `w`.
pub fn triangle_power(area: f64, w: [f64; 3], p: f64) -> f64 {
    let mut v = w;
    if v[0] > v[1] {
        v.swap(0, 1);
    }
    if v[1] > v[2] {
        v.swap(1, 2);
    }
    if v[0] > v[1] {
        v.swap(0, 1);
    }
    let [w1, w2, w3] = v;
    if w3 <= 0.0 || area <= 0.0 {
        return 0.0;
    }
    let span = w3 - w1;
    if span <= 1e-15 * w3.abs() {
        return area * w3.powf(p);
    }
    let mut total = 0.0;
    if w2 > w1 && w2 > 0.0 {
        let k = 2.0 * area / (span * (w2 - w1));
        total += k * ramp_from(w1, w1.max(0.0), w2, p);
    }
    if w3 > w2 {
        let k = 2.0 * area / (span * (w3 - w2));
        total += k * ramp_down(w2.max(0.0), w3, p);
    }
    total
}

/// Vertex of a clipped polygon: position and the affine field value there.
pub type Vtx = [f64; 3];

/// Keeps the part of a convex polygon where `phi >= 0`; `phi` is evaluated
/// per vertex and interpolated linearly along edges.
pub fn clip(poly: &[Vtx], phi: impl Fn(&Vtx) -> f64) -> Vec<Vtx> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let fa = phi(&a);
        let fb = phi(&b);
        if fa >= 0.0 {
            out.push(a);
        }
        if (fa >= 0.0) != (fb >= 0.0) {
            let t = fa / (fa - fb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])]);
        }
    }
    out
}

pub fn tri_area(a: &Vtx, b: &Vtx, c: &Vtx) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
}

/// Fan-triangulated power integral over a convex polygon.
pub fn polygon_power(poly: &[Vtx], p: f64) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for k in 1..poly.len() - 1 {
        let (a, b, c) = (&poly[0], &poly[k], &poly[k + 1]);
        s += triangle_power(tri_area(a, b, c), [a[2], b[2], c[2]], p);
    }
    s
}

pub fn polygon_area(poly: &[Vtx]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    (1..poly.len() - 1).map(|k| tri_area(&poly[0], &poly[k], &poly[k + 1])).sum()
}
