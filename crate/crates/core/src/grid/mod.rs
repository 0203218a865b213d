//! Uniform cell-centred grids on boxes in one to three dimensions.
//!
//! Cells are addressed row-major: axis 0 varies slowest. Unused axes of a
//! lower-dimensional grid carry a single cell so index arithmetic is uniform.

mod field;
pub mod io;
mod ops;

pub use field::Field;
pub use ops::{
    ball_cells, cube_average, cutoff, difference_quotient, divergence, gradient, hessian, integrate,
    integrate_region, Cutoff, CutoffProfile, DifferenceQuotient,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MAX_DIM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    Dirichlet,
    #[default]
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    extents: [f64; MAX_DIM],
    cells: [usize; MAX_DIM],
    spacing: [f64; MAX_DIM],
    boundary: BoundaryKind,
}

impl Grid {
    pub fn new(extents: &[f64], cells: &[usize], boundary: BoundaryKind) -> Result<Self> {
        let dim = extents.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Parameter(format!("grid dimension must be 1..=3, got {dim}")));
        }
        if cells.len() != dim {
            return Err(Error::Shape(format!("{} extents but {} cell counts", dim, cells.len())));
        }
        let mut e = [1.0; MAX_DIM];
        let mut c = [1; MAX_DIM];
        let mut h = [1.0; MAX_DIM];
        let mut total: usize = 1;
        for a in 0..dim {
            if !(extents[a] > 0.0 && extents[a].is_finite()) {
                return Err(Error::Parameter(format!("extent along axis {a} must be positive")));
            }
            if cells[a] == 0 {
                return Err(Error::Parameter(format!("axis {a} has zero cells")));
            }
            total = total
                .checked_mul(cells[a])
                .ok_or_else(|| Error::Parameter("cell count overflows".into()))?;
            e[a] = extents[a];
            c[a] = cells[a];
            h[a] = extents[a] / cells[a] as f64;
        }
        if total.checked_mul(8).is_none() {
            return Err(Error::Parameter("cell count exceeds addressable memory".into()));
        }
        Ok(Self { dim, extents: e, cells: c, spacing: h, boundary })
    }

    /// `[0,1]^dim` with `n` cells per axis.
    pub fn unit(dim: usize, n: usize, boundary: BoundaryKind) -> Result<Self> {
        Self::new(&vec![1.0; dim], &vec![n; dim], boundary)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents[..self.dim]
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn boundary(&self) -> BoundaryKind {
        self.boundary
    }

    pub fn with_boundary(mut self, boundary: BoundaryKind) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn len(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.extents().iter().product()
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing().iter().cloned().fold(0.0, f64::max)
    }

    /// Linear stride of `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.cells[axis + 1..].iter().product()
    }

    pub fn index(&self, multi: [usize; MAX_DIM]) -> usize {
        (multi[0] * self.cells[1] + multi[1]) * self.cells[2] + multi[2]
    }

    pub fn multi_index(&self, idx: usize) -> [usize; MAX_DIM] {
        let i2 = idx % self.cells[2];
        let rest = idx / self.cells[2];
        [rest / self.cells[1], rest % self.cells[1], i2]
    }

    pub fn center(&self, idx: usize) -> [f64; MAX_DIM] {
        let mi = self.multi_index(idx);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = (mi[a] as f64 + 0.5) * self.spacing[a];
        }
        x
    }

    /// Same box with `factor` times as many cells per axis.
    pub fn refine(&self, factor: usize) -> Self {
        let cells: Vec<usize> = self.cells().iter().map(|c| c * factor).collect();
        Grid::new(self.extents(), &cells, self.boundary).expect("refinement of a valid grid")
    }

    pub fn full_region(&self) -> Region {
        Region { start: [0; MAX_DIM], len: self.cells }
    }

    /// Distance from `x` to the box, zero when inside.
    pub fn distance_to_box(&self, x: &[f64]) -> f64 {
        let mut d2 = 0.0;
        for a in 0..self.dim {
            let c = x.get(a).copied().unwrap_or(0.0);
            let d = if c < 0.0 {
                -c
            } else if c > self.extents[a] {
                c - self.extents[a]
            } else {
                0.0
            };
            d2 += d * d;
        }
        d2.sqrt()
    }
}

/// Axis-aligned block of cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub start: [usize; MAX_DIM],
    pub len: [usize; MAX_DIM],
}

impl Region {
    /// Cells whose centres lie in the box `center ± half_side` (sup-norm ball),
    /// clipped to the grid. This is the discrete `Ω ∩ B_r`.
    pub fn around(grid: &Grid, center: &[f64], half_side: f64) -> Result<Self> {
        let mut start = [0; MAX_DIM];
        let mut len = [1; MAX_DIM];
        for a in 0..grid.dim() {
            let h = grid.spacing[a];
            let c = center.get(a).copied().unwrap_or(0.0);
            let lo = ((c - half_side) / h - 0.5 - 1e-9).ceil().max(0.0);
            let hi = ((c + half_side) / h - 0.5 + 1e-9).floor().min(grid.cells[a] as f64 - 1.0);
            if hi < lo {
                return Err(Error::EmptyRegion);
            }
            start[a] = lo as usize;
            len[a] = (hi - lo) as usize + 1;
        }
        Ok(Region { start, len })
    }

    pub fn count(&self) -> usize {
        self.len.iter().product()
    }

    pub fn contains(&self, multi: [usize; MAX_DIM]) -> bool {
        (0..MAX_DIM).all(|a| multi[a] >= self.start[a] && multi[a] < self.start[a] + self.len[a])
    }

    pub fn within(&self, grid: &Grid) -> bool {
        (0..MAX_DIM).all(|a| self.len[a] >= 1 && self.start[a] + self.len[a] <= grid.cells[a])
    }

    /// Linear cell indices in row-major order.
    pub fn indices<'a>(&'a self, grid: &'a Grid) -> impl Iterator<Item = usize> + 'a {
        let (s, l) = (self.start, self.len);
        (0..l[0]).flat_map(move |i| {
            (0..l[1]).flat_map(move |j| (0..l[2]).map(move |k| grid.index([s[0] + i, s[1] + j, s[2] + k])))
        })
    }

    pub fn measure(&self, grid: &Grid) -> f64 {
        self.count() as f64 * grid.cell_volume()
    }
}

/// Axis-aligned cube with an equal number of cells along every active axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cube {
    pub anchor: [usize; MAX_DIM],
    pub side: usize,
}

impl Cube {
    pub fn new(anchor: &[usize], side: usize) -> Self {
        let mut a = [0; MAX_DIM];
        a[..anchor.len()].copy_from_slice(anchor);
        Self { anchor: a, side }
    }

    pub fn region(&self, grid: &Grid) -> Region {
        let mut len = [1; MAX_DIM];
        for l in len.iter_mut().take(grid.dim()) {
            *l = self.side;
        }
        Region { start: self.anchor, len }
    }

    pub fn measure(&self, grid: &Grid) -> f64 {
        grid.spacing().iter().map(|h| h * self.side as f64).product()
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        if self.side == 0 {
            return Err(Error::Range("cube side must be at least one cell".into()));
        }
        for a in 0..grid.dim() {
            if self.anchor[a] + self.side > grid.cells[a] {
                return Err(Error::Range(format!(
                    "cube [{}..{}) exceeds {} cells on axis {a}",
                    self.anchor[a],
                    self.anchor[a] + self.side,
                    grid.cells[a]
                )));
            }
        }
        for a in grid.dim()..MAX_DIM {
            if self.anchor[a] != 0 {
                return Err(Error::Range(format!("nonzero anchor on inactive axis {a}")));
            }
        }
        Ok(())
    }
}
