//! Deterministic data-parallel helpers.
//!
//! With the `parallel` feature the work is spread over the rayon pool;
//! without it everything runs on the calling thread. Reductions always use
//! the same fixed pairwise tree, so results are bit-identical either way and
//! independent of the thread count.

const LEAF: usize = 256;

#[cfg(feature = "parallel")]
const SPLIT: usize = 1 << 13;

/// `(0..n).map(f).collect()`, possibly in parallel. Output order is index order.
#[cfg(feature = "parallel")]
pub fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Applies `f(index, &mut item)` to every element.
#[cfg(feature = "parallel")]
pub fn for_each_mut<T, F>(xs: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    use rayon::prelude::*;
    xs.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_mut<T, F>(xs: &mut [T], f: F)
where
    F: Fn(usize, &mut T),
{
    xs.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// Sum with a fixed pairwise tree.
pub fn sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().fold(0.0, |a, &b| a + b);
    }
    let mid = xs.len() / 2;
    let (l, r) = xs.split_at(mid);
    let (a, b) = join_if_large(xs.len(), || sum(l), || sum(r));
    a + b
}

/// `sum(map(n, f))`.
pub fn sum_by<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    sum(&map(n, f))
}

/// Maximum, NaN-ignoring; `-inf` for an empty slice.
pub fn max(xs: &[f64]) -> f64 {
    xs.iter().fold(f64::NEG_INFINITY, |a, &b| if b > a { b } else { a })
}

/// Dot product on the same fixed tree as [`sum`].
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= LEAF {
        return a.iter().zip(b).fold(0.0, |s, (x, y)| s + x * y);
    }
    let mid = a.len() / 2;
    let (a0, a1) = a.split_at(mid);
    let (b0, b1) = b.split_at(mid);
    let (x, y) = join_if_large(a.len(), || dot(a0, b0), || dot(a1, b1));
    x + y
}

#[cfg(feature = "parallel")]
fn join_if_large<A, B, RA, RB>(len: usize, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    if len >= SPLIT {
        rayon::join(a, b)
    } else {
        (a(), b())
    }
}

#[cfg(not(feature = "parallel"))]
fn join_if_large<A, B, RA, RB>(_len: usize, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA,
    B: FnOnce() -> RB,
{
    (a(), b())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_sum(xs: &[f64]) -> f64 {
        if xs.len() <= LEAF {
            return xs.iter().fold(0.0, |a, &b| a + b);
        }
        let (l, r) = xs.split_at(xs.len() / 2);
        reference_sum(l) + reference_sum(r)
    }

    #[test]
    fn tree_sum_matches_sequential_tree_bitwise() {
        let xs: Vec<f64> = (0..100_003).map(|i| ((i as f64) * 0.37).sin() * 1e-3 + 1.0 / (1.0 + i as f64)).collect();
        assert_eq!(sum(&xs).to_bits(), reference_sum(&xs).to_bits());
        let ys: Vec<f64> = xs.iter().map(|x| x * 0.5).collect();
        let d = dot(&xs, &ys);
        let r = reference_sum(&xs.iter().zip(&ys).map(|(a, b)| a * b).collect::<Vec<_>>());
        assert_eq!(d.to_bits(), r.to_bits());
    }

    #[test]
    fn map_keeps_index_order() {
        let v = map(10_000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
