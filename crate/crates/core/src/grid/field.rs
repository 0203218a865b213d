use super::{Grid, Region, MAX_DIM};
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum_by;

/// Cell samples of an `m`-component quantity, stored cell-major:
/// `values[cell * m + component]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    m: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Shape("field needs at least one component".into()));
        }
        if values.len() != m * grid.len() {
            return Err(Error::Shape(format!(
                "expected {} values ({} cells x {m}), got {}",
                m * grid.len(),
                grid.len(),
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("field value at cell {}", pos / m)));
        }
        Ok(Self { grid, m, values })
    }

    pub(crate) fn from_raw(grid: Grid, m: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), m * grid.len());
        Self { grid, m, values }
    }

    pub fn zeros(grid: Grid, m: usize) -> Self {
        Self::from_raw(grid, m, vec![0.0; m * grid.len()])
    }

    pub fn constant(grid: Grid, value: &[f64]) -> Self {
        let mut values = Vec::with_capacity(value.len() * grid.len());
        for _ in 0..grid.len() {
            values.extend_from_slice(value);
        }
        Self::from_raw(grid, value.len(), values)
    }

    /// Samples `f(x, out)` at every cell centre.
    pub fn from_fn<F: Fn(&[f64], &mut [f64])>(grid: Grid, m: usize, f: F) -> Self {
        let mut values = vec![0.0; m * grid.len()];
        for (idx, chunk) in values.chunks_mut(m).enumerate() {
            let x = grid.center(idx);
            f(&x[..grid.dim()], chunk);
        }
        Self::from_raw(grid, m, values)
    }

    pub fn scalar_from_fn<F: Fn(&[f64]) -> f64>(grid: Grid, f: F) -> Self {
        Self::from_fn(grid, 1, |x, out| out[0] = f(x))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, cell: usize) -> &[f64] {
        &self.values[cell * self.m..(cell + 1) * self.m]
    }

    pub fn at_mut(&mut self, cell: usize) -> &mut [f64] {
        &mut self.values[cell * self.m..(cell + 1) * self.m]
    }

    pub fn get(&self, cell: usize, component: usize) -> f64 {
        self.values[cell * self.m + component]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn with_grid(mut self, grid: Grid) -> Result<Self> {
        if grid.len() != self.grid.len() {
            return Err(Error::Shape("grid change must keep the cell count".into()));
        }
        self.grid = grid;
        Ok(self)
    }

    pub fn component(&self, c: usize) -> Field {
        let values = (0..self.grid.len()).map(|i| self.get(i, c)).collect();
        Field::from_raw(self.grid, 1, values)
    }

    /// Pointwise Euclidean norm over all components.
    pub fn norm(&self) -> Field {
        let values = self.values.chunks(self.m).map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
        Field::from_raw(self.grid, 1, values)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Field {
        Field::from_raw(self.grid, self.m, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Applies `f` to the per-cell slice, producing a scalar field.
    pub fn map_cells<F: Fn(&[f64]) -> f64>(&self, f: F) -> Field {
        Field::from_raw(self.grid, 1, self.values.chunks(self.m).map(f).collect())
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Field, f: F) -> Result<Field> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field::from_raw(self.grid, self.m, values))
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn check_compatible(&self, other: &Field) -> Result<()> {
        if self.grid.cells() != other.grid.cells() || self.m != other.m {
            return Err(Error::Shape(format!(
                "fields differ: {:?}x{} vs {:?}x{}",
                self.grid.cells(),
                self.m,
                other.grid.cells(),
                other.m
            )));
        }
        Ok(())
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid.cells() != other.grid.cells() || self.grid.extents() != other.grid.extents() {
            return Err(Error::Shape("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `∫_Ω W_c` for every component.
    pub fn mass(&self) -> Vec<f64> {
        let vol = self.grid.cell_volume();
        (0..self.m)
            .map(|c| pairwise_sum_by(self.grid.len(), |i| self.get(i, c)) * vol)
            .collect()
    }

    /// `(∫_Ω |W|^2)^{1/2}` with the Euclidean norm over components.
    pub fn l2_norm(&self) -> f64 {
        let vol = self.grid.cell_volume();
        (pairwise_sum_by(self.values.len(), |i| self.values[i] * self.values[i]) * vol).sqrt()
    }

    /// `(∫_Ω |W|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let n = self.norm();
        let vol = self.grid.cell_volume();
        if p.is_infinite() {
            return n.max();
        }
        (pairwise_sum_by(n.values.len(), |i| n.values[i].powf(p)) * vol).powf(1.0 / p)
    }

    /// Restriction to a block of cells as a field on the matching sub-grid.
    pub fn restrict(&self, region: &Region) -> Result<Field> {
        if !region.within(&self.grid) {
            return Err(Error::Range("region outside grid".into()));
        }
        let dim = self.grid.dim();
        let h = self.grid.spacing();
        let extents: Vec<f64> = (0..dim).map(|a| h[a] * region.len[a] as f64).collect();
        let cells: Vec<usize> = region.len[..dim].to_vec();
        let sub = Grid::new(&extents, &cells, self.grid.boundary())?;
        let mut values = Vec::with_capacity(region.count() * self.m);
        for idx in region.indices(&self.grid) {
            values.extend_from_slice(self.at(idx));
        }
        Ok(Field::from_raw(sub, self.m, values))
    }

    pub fn centers(&self) -> impl Iterator<Item = [f64; MAX_DIM]> + '_ {
        (0..self.grid.len()).map(move |i| self.grid.center(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryKind;

    #[test]
    fn new_validates_length_and_finiteness() {
        let g = Grid::unit(1, 4, BoundaryKind::Neumann).unwrap();
        assert!(Field::new(g, 1, vec![0.0; 3]).is_err());
        assert!(Field::new(g, 1, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(Field::new(g, 2, vec![1.0; 8]).is_ok());
    }

    #[test]
    fn mass_and_norms_of_constant() {
        let g = Grid::new(&[2.0, 1.0], &[8, 4], BoundaryKind::Neumann).unwrap();
        let f = Field::constant(g, &[3.0, 4.0]);
        let mass = f.mass();
        assert!((mass[0] - 6.0).abs() < 1e-12 && (mass[1] - 8.0).abs() < 1e-12);
        assert!((f.l2_norm() - (25.0f64 * 2.0).sqrt()).abs() < 1e-12);
        assert!((f.lp_norm(3.0) - 5.0 * 2.0f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn restrict_keeps_values() {
        let g = Grid::unit(2, 6, BoundaryKind::Neumann).unwrap();
        let f = Field::scalar_from_fn(g, |x| x[0] + 10.0 * x[1]);
        let r = Region { start: [1, 2, 0], len: [2, 3, 1] };
        let sub = f.restrict(&r).unwrap();
        assert_eq!(sub.grid().cells(), &[2, 3]);
        assert_eq!(sub.get(0, 0), f.get(g.index([1, 2, 0]), 0));
        assert_eq!(sub.get(5, 0), f.get(g.index([2, 4, 0]), 0));
    }
}
