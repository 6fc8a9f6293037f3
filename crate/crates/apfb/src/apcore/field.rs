use crate::error::{domain, Result};

/// Uniform 1D or 2D node grid. Storage is row-major with the last axis
/// fastest, and the last axis plays the role of `x_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub dims: Vec<usize>,
    pub h: f64,
    pub origin: Vec<f64>,
}

impl Grid {
    pub fn new(dims: Vec<usize>, h: f64, origin: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 2 {
            return domain(format!("grids must be 1D or 2D, got {} axes", dims.len()));
        }
        if dims.len() != origin.len() {
            return domain("origin and dims disagree in dimension");
        }
        if dims.iter().any(|&n| n < 2) {
            return domain(format!("every axis needs at least 2 nodes, got {dims:?}"));
        }
        if !(h > 0.0 && h.is_finite()) {
            return domain(format!("grid spacing must be positive, got {h}"));
        }
        Ok(Grid { dims, h, origin })
    }

    /// Grid with nodes on both ends of `[lo, hi]` per axis; `(hi-lo)/h` must be
    /// an integer up to rounding.
    pub fn covering(lo: &[f64], hi: &[f64], h: f64) -> Result<Self> {
        let mut dims = Vec::with_capacity(lo.len());
        for (&a, &b) in lo.iter().zip(hi) {
            let cells = (b - a) / h;
            let n = cells.round();
            if (cells - n).abs() > 1e-6 || n < 1.0 {
                return domain(format!("[{a}, {b}] is not a whole number of cells of size {h}"));
            }
            dims.push(n as usize + 1);
        }
        Grid::new(dims, h, lo.to_vec())
    }

    #[inline]
    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn multi(&self, idx: usize) -> [usize; 2] {
        if self.ndim() == 1 {
            [idx, 0]
        } else {
            [idx / self.dims[1], idx % self.dims[1]]
        }
    }

    #[inline]
    pub fn flat(&self, i: usize, j: usize) -> usize {
        if self.ndim() == 1 {
            i
        } else {
            i * self.dims[1] + j
        }
    }

    /// Physical coordinates of a node, padded with a zero in 1D.
    #[inline]
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.multi(idx);
        if self.ndim() == 1 {
            [self.origin[0] + i as f64 * self.h, 0.0]
        } else {
            [self.origin[0] + i as f64 * self.h, self.origin[1] + j as f64 * self.h]
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let c = self.coords(idx);
        c[..self.ndim()].to_vec()
    }

    pub fn lo(&self) -> Vec<f64> {
        self.origin.clone()
    }

    pub fn hi(&self) -> Vec<f64> {
        self.origin.iter().zip(&self.dims).map(|(o, &n)| o + (n - 1) as f64 * self.h).collect()
    }

    pub fn is_box_boundary(&self, idx: usize) -> bool {
        let m = self.multi(idx);
        (0..self.ndim()).any(|a| m[a] == 0 || m[a] + 1 == self.dims[a])
    }

    /// Whether `x` lies in the closed box, with a relative slack of `1e-12`.
    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = 1e-12 * (1.0 + self.h * self.dims.iter().max().copied().unwrap_or(1) as f64);
        let hi = self.hi();
        x.iter().zip(&self.origin).zip(&hi).all(|((&v, &a), &b)| v >= a - tol && v <= b + tol)
    }

    /// Flat indices of the `2n` axis neighbours, or `None` on the box boundary.
    #[inline]
    pub(crate) fn axis_neighbours(&self, idx: usize) -> Option<([usize; 4], usize)> {
        if self.ndim() == 1 {
            if idx == 0 || idx + 1 >= self.dims[0] {
                return None;
            }
            Some(([idx - 1, idx + 1, 0, 0], 2))
        } else {
            let n1 = self.dims[1];
            let (i, j) = (idx / n1, idx % n1);
            if i == 0 || j == 0 || i + 1 >= self.dims[0] || j + 1 >= n1 {
                return None;
            }
            Some(([idx - n1, idx + n1, idx - 1, idx + 1], 4))
        }
    }
}

/// A region for restricted energies and solves.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Whole,
    Ball { center: Vec<f64>, r: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Region {
    pub fn ball(center: &[f64], r: f64) -> Self {
        Region::Ball { center: center.to_vec(), r }
    }

    pub(crate) fn check_inside(&self, g: &Grid) -> Result<()> {
        let (lo, hi) = match self {
            Region::Whole => return Ok(()),
            Region::Ball { center, r } => {
                if center.len() != g.ndim() || !(*r > 0.0) {
                    return domain("ball region needs a center of the grid's dimension and r > 0");
                }
                (center.iter().map(|c| c - r).collect::<Vec<_>>(), center.iter().map(|c| c + r).collect::<Vec<_>>())
            }
            Region::Box { lo, hi } => {
                if lo.len() != g.ndim() || hi.len() != g.ndim() || lo.iter().zip(hi).any(|(a, b)| a >= b) {
                    return domain("box region needs lo < hi in every axis");
                }
                (lo.clone(), hi.clone())
            }
        };
        if !g.contains(&lo) || !g.contains(&hi) {
            return domain(format!("region {self:?} is not inside the field box {:?}..{:?}", g.lo(), g.hi()));
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Whole => true,
            Region::Ball { center, r } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 <= r * r
            }
            Region::Box { lo, hi } => x.iter().zip(lo).zip(hi).all(|((&v, &a), &b)| v >= a && v <= b),
        }
    }
}

/// Nonnegative grid function with Dirichlet data on masked nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub boundary_mask: Vec<bool>,
    pub dirichlet: Vec<f64>,
}

impl ScalarField {
    /// Zero field; the box boundary is masked with zero data.
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        let mask = (0..n).map(|i| grid.is_box_boundary(i)).collect();
        ScalarField { grid, values: vec![0.0; n], boundary_mask: mask, dirichlet: vec![0.0; n] }
    }

    /// Samples `f`, masks the box boundary and freezes its values as data.
    /// Negative samples are clamped to zero.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        let nd = out.grid.ndim();
        for i in 0..out.values.len() {
            let x = out.grid.coords(i);
            out.values[i] = f(&x[..nd]).max(0.0);
        }
        out.freeze_boundary();
        out
    }

    /// Copies current values into the Dirichlet data on masked nodes.
    pub fn freeze_boundary(&mut self) {
        for i in 0..self.values.len() {
            self.dirichlet[i] = if self.boundary_mask[i] { self.values[i] } else { 0.0 };
        }
    }

    pub fn enforce_dirichlet(&mut self) {
        for i in 0..self.values.len() {
            if self.boundary_mask[i] {
                self.values[i] = self.dirichlet[i];
            }
        }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        ScalarField { values, ..self.clone() }
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn ndim(&self) -> usize {
        self.grid.ndim()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &b| a.max(b))
    }

    pub fn positive_count(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    /// Multilinear interpolation; `None` outside the box.
    pub fn interpolate(&self, x: &[f64]) -> Option<f64> {
        let g = &self.grid;
        if x.len() != g.ndim() || !g.contains(x) {
            return None;
        }
        let locate = |axis: usize| -> (usize, f64) {
            let t = (x[axis] - g.origin[axis]) / g.h;
            let n = g.dims[axis];
            let i = (t.floor().max(0.0) as usize).min(n - 2);
            (i, (t - i as f64).clamp(0.0, 1.0))
        };
        if g.ndim() == 1 {
            let (i, t) = locate(0);
            Some((1.0 - t) * self.values[i] + t * self.values[i + 1])
        } else {
            let (i, s) = locate(0);
            let (j, t) = locate(1);
            let n1 = g.dims[1];
            let v = |a: usize, b: usize| self.values[a * n1 + b];
            Some(
                (1.0 - s) * ((1.0 - t) * v(i, j) + t * v(i, j + 1))
                    + s * ((1.0 - t) * v(i + 1, j) + t * v(i + 1, j + 1)),
            )
        }
    }

    /// Sup-norm distance on the common grid.
    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }
}
