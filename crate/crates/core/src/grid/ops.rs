//! Difference stencils and quadrature on a [`Grid`].
//!
//! `gradient` is central in the interior and one-sided second order at the
//! first and last cell of each line, so it is exact on quadratics everywhere.
//! `divergence` is the central difference with boundary ghosts chosen by the
//! boundary kind (zero-flux faces for Neumann). The two are adjoint for test
//! functions vanishing within three cells of the boundary.

use super::{BoundaryKind, Cube, Field, Grid, Region, MAX_DIM};
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum_by;
use serde::{Deserialize, Serialize};

fn check_stencil_size(grid: &Grid) -> Result<()> {
    for (a, &n) in grid.cells().iter().enumerate() {
        if n < 3 {
            return Err(Error::Resolution(format!("axis {a} has {n} cells, stencils need at least 3")));
        }
    }
    Ok(())
}

/// Position of `idx` along `axis`.
#[inline]
fn axis_pos(grid: &Grid, idx: usize, axis: usize) -> usize {
    (idx / grid.stride(axis)) % grid.cells()[axis]
}

/// Gradient of every component; output component `c * N + d` is `∂_d f_c`.
pub fn gradient(f: &Field) -> Result<Field> {
    let grid = *f.grid();
    check_stencil_size(&grid)?;
    let (m, dim) = (f.components(), grid.dim());
    let mut out = vec![0.0; grid.len() * m * dim];
    for d in 0..dim {
        let s = grid.stride(d);
        let n = grid.cells()[d];
        let inv2h = 0.5 / grid.spacing()[d];
        for idx in 0..grid.len() {
            let i = axis_pos(&grid, idx, d);
            for c in 0..m {
                let v = |j: usize| f.get(j, c);
                let g = if i == 0 {
                    (4.0 * (v(idx + s) - v(idx)) - (v(idx + 2 * s) - v(idx))) * inv2h
                } else if i == n - 1 {
                    (4.0 * (v(idx) - v(idx - s)) - (v(idx) - v(idx - 2 * s))) * inv2h
                } else {
                    (v(idx + s) - v(idx - s)) * inv2h
                };
                out[(idx * m + c) * dim + d] = g;
            }
        }
    }
    Ok(Field::from_raw(grid, m * dim, out))
}

/// Divergence of a flux field with `k * N` components; returns `k` components.
pub fn divergence(v: &Field) -> Result<Field> {
    let grid = *v.grid();
    check_stencil_size(&grid)?;
    let dim = grid.dim();
    if v.components() % dim != 0 {
        return Err(Error::Shape(format!(
            "divergence needs a multiple of {dim} flux components, got {}",
            v.components()
        )));
    }
    let k = v.components() / dim;
    // ghost flux beyond the wall: odd reflection gives a zero face flux
    let ghost_sign = match grid.boundary() {
        BoundaryKind::Neumann => -1.0,
        BoundaryKind::Dirichlet => 1.0,
    };
    let mut out = vec![0.0; grid.len() * k];
    for d in 0..dim {
        let s = grid.stride(d);
        let n = grid.cells()[d];
        let inv2h = 0.5 / grid.spacing()[d];
        for idx in 0..grid.len() {
            let i = axis_pos(&grid, idx, d);
            for c in 0..k {
                let comp = c * dim + d;
                let here = v.get(idx, comp);
                let left = if i == 0 { ghost_sign * here } else { v.get(idx - s, comp) };
                let right = if i == n - 1 { ghost_sign * here } else { v.get(idx + s, comp) };
                out[idx * k + c] += (right - left) * inv2h;
            }
        }
    }
    Ok(Field::from_raw(grid, k, out))
}

/// Second derivatives by applying [`gradient`] twice; component
/// `(c * N + d1) * N + d2` is `∂_{d2} ∂_{d1} f_c`.
pub fn hessian(f: &Field) -> Result<Field> {
    gradient(&gradient(f)?)
}

/// `∫_Ω f · weight` for a scalar `f`; `weight` defaults to one.
pub fn integrate(f: &Field, weight: Option<&Field>) -> Result<f64> {
    integrate_region(f, weight, None)
}

pub fn integrate_region(f: &Field, weight: Option<&Field>, region: Option<&Region>) -> Result<f64> {
    if f.components() != 1 {
        return Err(Error::Shape(format!("integrate expects a scalar field, got {} components", f.components())));
    }
    if let Some(w) = weight {
        if w.components() != 1 {
            return Err(Error::Shape("weight must be scalar".into()));
        }
        f.check_same_grid(w)?;
    }
    let grid = f.grid();
    let vol = grid.cell_volume();
    let term = |i: usize| f.values()[i] * weight.map_or(1.0, |w| w.values()[i]);
    let sum = match region {
        None => pairwise_sum_by(grid.len(), term),
        Some(r) => {
            if !r.within(grid) {
                return Err(Error::Range("integration region outside grid".into()));
            }
            let idx: Vec<usize> = r.indices(grid).collect();
            pairwise_sum_by(idx.len(), |k| term(idx[k]))
        }
    };
    Ok(sum * vol)
}

/// Per-component mean of `f` over the cube.
pub fn cube_average(f: &Field, cube: &Cube) -> Result<Vec<f64>> {
    let grid = f.grid();
    cube.check(grid)?;
    let region = cube.region(grid);
    let idx: Vec<usize> = region.indices(grid).collect();
    let count = idx.len() as f64;
    Ok((0..f.components())
        .map(|c| pairwise_sum_by(idx.len(), |k| f.get(idx[k], c)) / count)
        .collect())
}

/// Cells whose centres lie within `radius` of `center` (inclusive).
pub fn ball_cells(grid: &Grid, center: &[f64], radius: f64) -> Vec<usize> {
    let r2 = radius * radius * (1.0 + 1e-12);
    let mut lo = [0usize; MAX_DIM];
    let mut hi = [1usize; MAX_DIM];
    for a in 0..grid.dim() {
        let h = grid.spacing()[a];
        let c = center.get(a).copied().unwrap_or(0.0);
        lo[a] = ((c - radius) / h - 0.5).floor().max(0.0) as usize;
        hi[a] = (((c + radius) / h + 0.5).ceil().max(0.0) as usize).min(grid.cells()[a]);
    }
    let mut out = Vec::new();
    for i in lo[0]..hi[0] {
        for j in lo[1]..hi[1] {
            for k in lo[2]..hi[2] {
                let idx = grid.index([i, j, k]);
                let x = grid.center(idx);
                let d2: f64 = (0..grid.dim())
                    .map(|a| {
                        let d = x[a] - center.get(a).copied().unwrap_or(0.0);
                        d * d
                    })
                    .sum();
                if d2 <= r2 {
                    out.push(idx);
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffProfile {
    /// `3t² − 2t³`, C¹ with peak slope `3/R`.
    #[default]
    Cubic,
    /// `10t³ − 15t⁴ + 6t⁵`, C² with peak slope `3.75/R`.
    Quintic,
}

impl CutoffProfile {
    fn ramp(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            CutoffProfile::Cubic => t * t * (3.0 - 2.0 * t),
            CutoffProfile::Quintic => t * t * t * (10.0 + t * (-15.0 + 6.0 * t)),
        }
    }

    /// `ω` as a function of the distance to the centre.
    pub fn value(&self, r: f64, radius: f64) -> f64 {
        if r <= 0.5 * radius {
            1.0
        } else if r >= radius {
            0.0
        } else {
            self.ramp((radius - r) / (0.5 * radius))
        }
    }

    /// Exact `sup |Dω| · R` of the continuous profile.
    pub fn analytic_constant(&self) -> f64 {
        match self {
            CutoffProfile::Cubic => 3.0,
            CutoffProfile::Quintic => 3.75,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Cutoff {
    pub field: Field,
    pub center: Vec<f64>,
    pub radius: f64,
    pub profile: CutoffProfile,
    /// Measured `sup |Dω| · R` on the grid.
    pub constant: f64,
}

/// Cutoff with `ω = 1` on `B_{R/2}`, `ω = 0` outside `B_R`, polynomial ramp between.
pub fn cutoff(grid: &Grid, center: &[f64], radius: f64, profile: CutoffProfile) -> Result<Cutoff> {
    if !(radius > 0.0) {
        return Err(Error::Parameter("cutoff radius must be positive".into()));
    }
    if radius < 4.0 * grid.max_spacing() {
        return Err(Error::Resolution(format!(
            "cutoff radius {radius} is below four cells ({})",
            4.0 * grid.max_spacing()
        )));
    }
    if grid.distance_to_box(center) > 2.0 * radius {
        return Err(Error::Range("B_2R(center) does not meet the grid".into()));
    }
    let field = Field::scalar_from_fn(*grid, |x| {
        let r: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        profile.value(r, radius)
    });
    let grad = gradient(&field)?;
    let constant = grad.norm().max() * radius;
    Ok(Cutoff { field, center: center.to_vec(), radius, profile, constant })
}

#[derive(Clone, Debug)]
pub struct DifferenceQuotient {
    pub field: Field,
    /// False where `x + h̃e` leaves the grid; those values are zero.
    pub valid: Vec<bool>,
    pub step: f64,
}

/// Forward quotient `(f(x + h̃ e_axis) − f(x)) / h̃` with `h̃ = steps · h_axis`.
pub fn difference_quotient(f: &Field, axis: usize, steps: usize) -> Result<DifferenceQuotient> {
    let grid = *f.grid();
    if axis >= grid.dim() {
        return Err(Error::Range(format!("axis {axis} on a {}-dimensional grid", grid.dim())));
    }
    if steps == 0 {
        return Err(Error::Parameter("difference step must be at least one cell".into()));
    }
    let m = f.components();
    let s = grid.stride(axis);
    let n = grid.cells()[axis];
    let step = steps as f64 * grid.spacing()[axis];
    let mut values = vec![0.0; grid.len() * m];
    let mut valid = vec![false; grid.len()];
    for idx in 0..grid.len() {
        if axis_pos(&grid, idx, axis) + steps < n {
            valid[idx] = true;
            for c in 0..m {
                values[idx * m + c] = (f.get(idx + steps * s, c) - f.get(idx, c)) / step;
            }
        }
    }
    Ok(DifferenceQuotient { field: Field::from_raw(grid, m, values), valid, step })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryKind;

    fn grid1(n: usize, bc: BoundaryKind) -> Grid {
        Grid::unit(1, n, bc).unwrap()
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = Grid::unit(2, 7, BoundaryKind::Neumann).unwrap();
        let d = gradient(&Field::constant(g, &[2.5])).unwrap();
        assert!(d.max_abs() < 1e-12);
    }

    #[test]
    fn gradient_exact_on_affine_and_quadratic() {
        let g = grid1(16, BoundaryKind::Dirichlet);
        let lin = gradient(&Field::scalar_from_fn(g, |x| 2.0 * x[0])).unwrap();
        assert!(lin.values().iter().all(|v| (v - 2.0).abs() < 1e-12));
        let f = Field::scalar_from_fn(g, |x| x[0] * x[0]);
        let q = gradient(&f).unwrap();
        for i in 0..16 {
            let x0 = g.center(i)[0];
            assert!((q.get(i, 0) - 2.0 * x0).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_of_affine_flux_and_laplacian_of_quadratic() {
        for bc in [BoundaryKind::Neumann, BoundaryKind::Dirichlet] {
            let g = grid1(20, bc);
            let c = divergence(&Field::constant(g, &[1.5])).unwrap();
            assert!(c.values()[1..19].iter().all(|v| v.abs() < 1e-12));
            let lin = divergence(&Field::scalar_from_fn(g, |x| x[0])).unwrap();
            assert!(lin.values()[1..19].iter().all(|v| (v - 1.0).abs() < 1e-12));
            let lap = divergence(&gradient(&Field::scalar_from_fn(g, |x| x[0] * x[0])).unwrap()).unwrap();
            assert!(lap.values()[1..19].iter().all(|v| (v - 2.0).abs() < 1e-10));
        }
    }

    #[test]
    fn divergence_rejects_wrong_component_count() {
        let g = Grid::unit(2, 5, BoundaryKind::Neumann).unwrap();
        assert!(matches!(divergence(&Field::zeros(g, 3)), Err(Error::Shape(_))));
    }

    #[test]
    fn neumann_divergence_telescopes_to_zero() {
        let g = grid1(32, BoundaryKind::Neumann);
        let v = Field::scalar_from_fn(g, |x| (3.0 * x[0]).exp());
        let d = divergence(&v).unwrap();
        let total: f64 = d.values().iter().sum::<f64>() * g.cell_volume();
        assert!(total.abs() < 1e-12, "{total}");
    }

    #[test]
    fn integrate_basic_cases() {
        let g = Grid::unit(2, 10, BoundaryKind::Neumann).unwrap();
        let one = Field::constant(g, &[1.0]);
        assert!((integrate(&one, None).unwrap() - 1.0).abs() < 1e-14);
        let zero = Field::zeros(g, 1);
        assert_eq!(integrate(&one, Some(&zero)).unwrap(), 0.0);
    }

    #[test]
    fn integrate_linear_converges_to_half() {
        // midpoint sums are exact for affine integrands
        for n in [8, 64, 512] {
            let g = grid1(n, BoundaryKind::Neumann);
            let f = Field::scalar_from_fn(g, |x| x[0]);
            assert!((integrate(&f, None).unwrap() - 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn cube_average_cases() {
        let g = grid1(64, BoundaryKind::Neumann);
        let f = Field::constant(g, &[3.0, -1.0]);
        assert_eq!(cube_average(&f, &Cube::new(&[5], 9)).unwrap(), vec![3.0, -1.0]);
        let x = Field::scalar_from_fn(g, |x| x[0]);
        let avg = cube_average(&x, &Cube::new(&[0], 32)).unwrap()[0];
        // oracle: midpoint sum at 4x resolution
        let fine = grid1(256, BoundaryKind::Neumann);
        let xf = Field::scalar_from_fn(fine, |x| x[0]);
        let oracle = cube_average(&xf, &Cube::new(&[0], 128)).unwrap()[0];
        assert!((avg - 0.25).abs() < 1e-12 && (avg - oracle).abs() < 1e-12);
        assert!(matches!(cube_average(&x, &Cube::new(&[40], 32)), Err(Error::Range(_))));
    }

    #[test]
    fn cutoff_shape_and_constant() {
        let g = Grid::unit(2, 128, BoundaryKind::Neumann).unwrap();
        let c = cutoff(&g, &[0.5, 0.5], 0.3, CutoffProfile::Cubic).unwrap();
        let center_idx = g.index([64, 64, 0]);
        assert_eq!(c.field.get(center_idx, 0), 1.0);
        let far = g.index([2, 2, 0]);
        assert_eq!(c.field.get(far, 0), 0.0);
        assert!(c.constant <= 4.0 && c.constant > 2.5, "constant {}", c.constant);
        assert!(matches!(
            cutoff(&g, &[0.5, 0.5], 0.02, CutoffProfile::Cubic),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn difference_quotient_cases() {
        let g = grid1(20, BoundaryKind::Neumann);
        let c = difference_quotient(&Field::constant(g, &[4.0]), 0, 2).unwrap();
        assert!(c.field.values().iter().all(|v| v.abs() < 1e-14));
        assert_eq!(c.valid.iter().filter(|v| !**v).count(), 2);
        let a = difference_quotient(&Field::scalar_from_fn(g, |x| 3.0 * x[0] + 1.0), 0, 3).unwrap();
        for (v, ok) in a.field.values().iter().zip(&a.valid) {
            if *ok {
                assert!((v - 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn difference_quotient_tends_to_gradient() {
        // first-order agreement: error halves with the step
        let mut errs = vec![];
        for n in [32, 64, 128] {
            let g = grid1(n, BoundaryKind::Neumann);
            let f = Field::scalar_from_fn(g, |x| (2.0 * x[0]).sin());
            let dq = difference_quotient(&f, 0, 1).unwrap();
            let gr = gradient(&f).unwrap();
            let mut e: f64 = 0.0;
            for i in 1..n - 1 {
                e = e.max((dq.field.get(i, 0) - gr.get(i, 0)).abs());
            }
            errs.push(e);
        }
        assert!(errs[0] / errs[1] > 1.8 && errs[1] / errs[2] > 1.8, "{errs:?}");
    }

    #[test]
    fn ball_cells_inclusive() {
        let g = Grid::unit(2, 10, BoundaryKind::Neumann).unwrap();
        let c = g.center(g.index([5, 5, 0]));
        let b = ball_cells(&g, &c[..2], 0.1);
        assert_eq!(b.len(), 5);
    }
}
