//! Discrete harmonic analysis: BMO seminorm, A_γ weight constant, the
//! centred Hardy–Littlewood maximal operator and the composite maximal
//! quantities Ψ₂, Ψ₃.
//!
//! Cube suprema run over every axis-aligned cube with an integer number of
//! cells per side. Maximal-operator balls are Euclidean cell sets: a cell
//! belongs to `B_ε(y)` when its centre is within `ε` of `y` (inclusive).

use crate::error::{Error, Result};
use crate::grid::{Cube, Field, Grid, Region, MAX_DIM};
use crate::numerics::pairwise_sum_by;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct BmoResult {
    /// `[f]_* = sup_Q ⨍_Q |f − f_Q|`
    pub seminorm: f64,
    pub l1_norm: f64,
    pub bmo_norm: f64,
    pub argmax_cube: Cube,
    pub cube_count: usize,
    /// Cubes whose mean oscillation was evaluated exactly (the rest were
    /// excluded by the variance bound).
    pub evaluated: usize,
}

/// Summed-volume table over a region, indexed with a one-cell zero border.
struct Prefix {
    dims: [usize; MAX_DIM],
    data: Vec<f64>,
}

impl Prefix {
    fn build(len: [usize; MAX_DIM], value: impl Fn([usize; MAX_DIM]) -> f64) -> Self {
        let dims = [len[0] + 1, len[1] + 1, len[2] + 1];
        let mut data = vec![0.0; dims[0] * dims[1] * dims[2]];
        let at = |i: usize, j: usize, k: usize| (i * dims[1] + j) * dims[2] + k;
        for i in 1..dims[0] {
            for j in 1..dims[1] {
                for k in 1..dims[2] {
                    let v = value([i - 1, j - 1, k - 1]);
                    data[at(i, j, k)] = v + data[at(i - 1, j, k)] + data[at(i, j - 1, k)] + data[at(i, j, k - 1)]
                        - data[at(i - 1, j - 1, k)]
                        - data[at(i - 1, j, k - 1)]
                        - data[at(i, j - 1, k - 1)]
                        + data[at(i - 1, j - 1, k - 1)];
                }
            }
        }
        Self { dims, data }
    }

    /// Sum over `[lo, lo + len)` in region coordinates.
    fn sum(&self, lo: [usize; MAX_DIM], len: [usize; MAX_DIM]) -> f64 {
        let at = |i: usize, j: usize, k: usize| self.data[(i * self.dims[1] + j) * self.dims[2] + k];
        let (a0, a1, a2) = (lo[0], lo[1], lo[2]);
        let (b0, b1, b2) = (lo[0] + len[0], lo[1] + len[1], lo[2] + len[2]);
        at(b0, b1, b2) - at(a0, b1, b2) - at(b0, a1, b2) - at(b0, b1, a2) + at(a0, a1, b2) + at(a0, b1, a2)
            + at(b0, a1, a2)
            - at(a0, a1, a2)
    }
}

fn cube_cells(grid: &Grid, anchor: [usize; MAX_DIM], len: [usize; MAX_DIM]) -> impl Iterator<Item = usize> + '_ {
    (0..len[0]).flat_map(move |i| {
        (0..len[1]).flat_map(move |j| (0..len[2]).map(move |k| grid.index([anchor[0] + i, anchor[1] + j, anchor[2] + k])))
    })
}

/// `⨍_Q |f − f_Q|` with sequential row-major sums; `|·|` is Euclidean over
/// components.
pub fn mean_oscillation(f: &Field, cube: &Cube) -> Result<f64> {
    cube.check(f.grid())?;
    Ok(mean_oscillation_unchecked(f, cube.anchor, cube.region(f.grid()).len))
}

fn mean_oscillation_unchecked(f: &Field, anchor: [usize; MAX_DIM], len: [usize; MAX_DIM]) -> f64 {
    let grid = f.grid();
    let m = f.components();
    let count = (len[0] * len[1] * len[2]) as f64;
    if m == 1 {
        let mut s = 0.0;
        for idx in cube_cells(grid, anchor, len) {
            s += f.get(idx, 0);
        }
        let mean = s / count;
        let mut osc = 0.0;
        for idx in cube_cells(grid, anchor, len) {
            osc += (f.get(idx, 0) - mean).abs();
        }
        return osc / count;
    }
    let mut mean = vec![0.0; m];
    for idx in cube_cells(grid, anchor, len) {
        for (c, acc) in mean.iter_mut().enumerate() {
            *acc += f.get(idx, c);
        }
    }
    for v in mean.iter_mut() {
        *v /= count;
    }
    let mut osc = 0.0;
    for idx in cube_cells(grid, anchor, len) {
        let mut d2 = 0.0;
        for (c, mu) in mean.iter().enumerate() {
            let d = f.get(idx, c) - mu;
            d2 += d * d;
        }
        osc += d2.sqrt();
    }
    osc / count
}

/// Exact supremum of the mean oscillation over all cubes inside `region`
/// (the whole grid by default), plus the L¹ norm over the region.
///
/// Cubes are visited from the largest side down. A cube is evaluated exactly
/// unless the prefix-sum bound `⨍|f − f_Q| ≤ (⨍|f − f_Q|²)^{1/2}` already
/// falls below the running maximum, so the result equals a brute-force sweep.
pub fn bmo_seminorm(f: &Field, region: Option<&Region>) -> Result<BmoResult> {
    let grid = *f.grid();
    let region = region.copied().unwrap_or_else(|| grid.full_region());
    if region.count() == 0 {
        return Err(Error::EmptyRegion);
    }
    if !region.within(&grid) {
        return Err(Error::Range("BMO region outside grid".into()));
    }
    let dim = grid.dim();
    let m = f.components();
    let max_side = region.len[..dim].iter().copied().min().unwrap_or(0);
    if max_side == 0 {
        return Err(Error::EmptyRegion);
    }

    // shifted by the region mean to limit cancellation in the bound
    let cells: Vec<usize> = region.indices(&grid).collect();
    let shift: Vec<f64> = (0..m)
        .map(|c| pairwise_sum_by(cells.len(), |k| f.get(cells[k], c)) / cells.len() as f64)
        .collect();
    let to_grid = |r: [usize; MAX_DIM]| {
        grid.index([region.start[0] + r[0], region.start[1] + r[1], region.start[2] + r[2]])
    };
    let firsts: Vec<Prefix> = (0..m)
        .map(|c| Prefix::build(region.len, |r| f.get(to_grid(r), c) - shift[c]))
        .collect();
    let second = Prefix::build(region.len, |r| {
        let idx = to_grid(r);
        (0..m).map(|c| (f.get(idx, c) - shift[c]).powi(2)).sum()
    });
    let total_sq = second.sum([0; MAX_DIM], region.len).abs();
    let err_scale = 64.0 * f64::EPSILON * total_sq;

    let side_len = |side: usize| {
        let mut len = [1; MAX_DIM];
        for l in len.iter_mut().take(dim) {
            *l = side;
        }
        len
    };
    let reps_for = |len: [usize; MAX_DIM]| [region.len[0] + 1 - len[0], region.len[1] + 1 - len[1], region.len[2] + 1 - len[2]];
    let bound_at = |lo: [usize; MAX_DIM], len: [usize; MAX_DIM], vol: f64| {
        let mut mean_sq = 0.0;
        for p in &firsts {
            let mu = p.sum(lo, len) / vol;
            mean_sq += mu * mu;
        }
        let var = second.sum(lo, len) / vol - mean_sq;
        (var.max(0.0) + err_scale / vol).sqrt()
    };

    let mut best = -1.0f64;
    let mut best_cube = Cube { anchor: region.start, side: 1 };
    let mut evaluated = 0usize;
    let mut consider = |anchor: [usize; MAX_DIM], side: usize, best: &mut f64, best_cube: &mut Cube| {
        evaluated += 1;
        let osc = mean_oscillation_unchecked(f, anchor, side_len(side));
        // ties go to the larger side, then the first anchor in row-major order
        let tie = osc == *best && (side > best_cube.side || (side == best_cube.side && anchor < best_cube.anchor));
        if osc > *best || tie {
            *best = osc;
            *best_cube = Cube { anchor, side };
        }
    };
    let to_anchor = |lo: [usize; MAX_DIM]| [region.start[0] + lo[0], region.start[1] + lo[1], region.start[2] + lo[2]];

    // seed: the cube with the largest bound on each side, so the sweep below
    // starts from a good lower estimate and prunes more
    for side in 1..=max_side {
        let len = side_len(side);
        let vol = (side as f64).powi(dim as i32);
        let reps = reps_for(len);
        let mut top = (-1.0f64, [0; MAX_DIM]);
        for i in 0..reps[0] {
            for j in 0..reps[1] {
                for k in 0..reps[2] {
                    let b = bound_at([i, j, k], len, vol);
                    if b > top.0 {
                        top = (b, [i, j, k]);
                    }
                }
            }
        }
        if top.0 >= best {
            consider(to_anchor(top.1), side, &mut best, &mut best_cube);
        }
    }

    let mut count = 0usize;
    for side in (1..=max_side).rev() {
        let len = side_len(side);
        let vol = (side as f64).powi(dim as i32);
        let reps = reps_for(len);
        for i in 0..reps[0] {
            for j in 0..reps[1] {
                for k in 0..reps[2] {
                    count += 1;
                    if bound_at([i, j, k], len, vol) * (1.0 + 1e-12) < best {
                        continue;
                    }
                    consider(to_anchor([i, j, k]), side, &mut best, &mut best_cube);
                }
            }
        }
    }
    let l1_norm = pairwise_sum_by(cells.len(), |k| {
        let v = f.at(cells[k]);
        if m == 1 {
            v[0].abs()
        } else {
            v.iter().map(|x| x * x).sum::<f64>().sqrt()
        }
    }) * grid.cell_volume();
    Ok(BmoResult {
        seminorm: best,
        l1_norm,
        bmo_norm: best + l1_norm,
        argmax_cube: best_cube,
        cube_count: count,
        evaluated,
    })
}

/// `‖f‖_{BMO(Ω_{2R})}` where `Ω_{2R}` is the block of cells with centres in
/// `center ± 2R`.
pub fn bmo_norm_local(f: &Field, center: &[f64], radius: f64) -> Result<f64> {
    Ok(bmo_local(f, center, radius)?.bmo_norm)
}

pub fn bmo_local(f: &Field, center: &[f64], radius: f64) -> Result<BmoResult> {
    let region = Region::around(f.grid(), center, 2.0 * radius)?;
    bmo_seminorm(f, Some(&region))
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightClassResult {
    pub gamma: f64,
    /// `[w]_γ`; `+∞` when `infinite` is set.
    pub constant: f64,
    /// Some cell has `w = 0`, so `w^{1−γ'}` is not integrable.
    pub infinite: bool,
    pub argmax_cube: Cube,
}

/// `[w]_γ = sup_B (⨍_B w)(⨍_B w^{1−γ'})^{γ−1}` over all cubes of the grid.
pub fn a_gamma_constant(w: &Field, gamma: f64) -> Result<WeightClassResult> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(Error::Parameter(format!("A_γ needs γ > 1, got {gamma}")));
    }
    if w.components() != 1 {
        return Err(Error::Shape("weight must be scalar".into()));
    }
    if let Some(i) = w.values().iter().position(|v| *v < 0.0) {
        return Err(Error::Domain(format!("negative weight at cell {i}")));
    }
    let grid = *w.grid();
    if let Some(i) = w.values().iter().position(|v| *v == 0.0) {
        let mi = grid.multi_index(i);
        return Ok(WeightClassResult {
            gamma,
            constant: f64::INFINITY,
            infinite: true,
            argmax_cube: Cube { anchor: mi, side: 1 },
        });
    }
    let dual = -1.0 / (gamma - 1.0); // 1 − γ'
    let region = grid.full_region();
    let pw = Prefix::build(region.len, |r| w.get(grid.index(r), 0));
    let pv = Prefix::build(region.len, |r| w.get(grid.index(r), 0).powf(dual));
    let dim = grid.dim();
    let max_side = grid.cells().iter().copied().min().unwrap_or(1);
    let mut best = f64::NEG_INFINITY;
    let mut best_cube = Cube { anchor: [0; MAX_DIM], side: 1 };
    for side in 1..=max_side {
        let mut len = [1; MAX_DIM];
        for l in len.iter_mut().take(dim) {
            *l = side;
        }
        let vol = (side as f64).powi(dim as i32);
        for i in 0..=region.len[0] - len[0] {
            for j in 0..=region.len[1] - len[1] {
                for k in 0..=region.len[2] - len[2] {
                    let lo = [i, j, k];
                    let value = (pw.sum(lo, len) / vol) * (pv.sum(lo, len) / vol).powf(gamma - 1.0);
                    if value > best {
                        best = value;
                        best_cube = Cube { anchor: lo, side };
                    }
                }
            }
        }
    }
    Ok(WeightClassResult { gamma, constant: best, infinite: false, argmax_cube: best_cube })
}

/// Integer offsets grouped by distance; each group closes a discrete ball.
struct BallOffsets {
    offsets: Vec<[isize; MAX_DIM]>,
    /// `(end index into offsets, radius)` for each distinct radius.
    groups: Vec<(usize, f64)>,
}

impl BallOffsets {
    fn new(grid: &Grid, max_radius: f64) -> Self {
        let dim = grid.dim();
        let h = grid.spacing();
        let mut reach = [0isize; MAX_DIM];
        for a in 0..dim {
            reach[a] = (max_radius / h[a]).floor() as isize + 1;
        }
        let mut list: Vec<([isize; MAX_DIM], f64)> = Vec::new();
        for i in -reach[0]..=reach[0] {
            for j in -reach[1]..=reach[1] {
                for k in -reach[2]..=reach[2] {
                    let off = [i, j, k];
                    let d2: f64 = (0..dim).map(|a| (off[a] as f64 * h[a]).powi(2)).sum();
                    if d2 <= max_radius * max_radius * (1.0 + 1e-12) {
                        list.push((off, d2));
                    }
                }
            }
        }
        list.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        let mut groups = Vec::new();
        for idx in 0..list.len() {
            let d2 = list[idx].1;
            let last = idx + 1 == list.len() || list[idx + 1].1 > d2 * (1.0 + 1e-12) + 1e-300;
            if last {
                groups.push((idx + 1, d2.sqrt()));
            }
        }
        Self { offsets: list.into_iter().map(|(o, _)| o).collect(), groups }
    }
}

fn admissible_radius(grid: &Grid, idx: usize) -> f64 {
    let x = grid.center(idx);
    (0..grid.dim())
        .map(|a| x[a].min(grid.extents()[a] - x[a]))
        .fold(f64::INFINITY, f64::min)
}

/// Centred maximal function `M(F)(y) = max_ε ⨍_{B_ε(y)} F` over the radii
/// where `B_ε(y) ⊆ Ω`, starting from the cell of `y` itself.
pub fn maximal(f: &Field) -> Result<Field> {
    if f.components() != 1 {
        return Err(Error::Shape("maximal operator expects a scalar field".into()));
    }
    if let Some(i) = f.values().iter().position(|v| *v < 0.0) {
        return Err(Error::Domain(format!("maximal operator needs F ≥ 0; negative at cell {i}")));
    }
    let grid = *f.grid();
    let max_radius = (0..grid.len()).map(|i| admissible_radius(&grid, i)).fold(0.0, f64::max);
    let balls = BallOffsets::new(&grid, max_radius);
    let dim = grid.dim();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let rho = admissible_radius(&grid, idx) * (1.0 + 1e-12);
            let mi = grid.multi_index(idx);
            let mut sum = 0.0;
            let mut best = f.get(idx, 0);
            let mut start = 0;
            for &(end, radius) in &balls.groups {
                if radius > rho && radius > 0.0 {
                    break;
                }
                for off in &balls.offsets[start..end] {
                    let mut t = [0usize; MAX_DIM];
                    let mut inside = true;
                    for a in 0..dim {
                        let p = mi[a] as isize + off[a];
                        if p < 0 || p >= grid.cells()[a] as isize {
                            inside = false;
                            break;
                        }
                        t[a] = p as usize;
                    }
                    if inside {
                        sum += f.get(grid.index(t), 0);
                    }
                }
                let avg = sum / end as f64;
                if avg > best {
                    best = avg;
                }
                start = end;
            }
            best
        })
        .collect();
    Ok(Field::from_raw(grid, 1, values))
}

#[derive(Clone, Debug, Serialize)]
pub struct MaximalBoundReport {
    pub q: f64,
    /// `∫ M(F)^q w`
    pub lhs: f64,
    /// `∫ F^q w`
    pub rhs: f64,
    pub ratio: f64,
    pub weight: WeightClassResult,
}

/// Ratio `∫ M(F)^q w / ∫ F^q w` together with `[w]_q`. No constant is
/// asserted; the ratio is a regression statistic.
pub fn check_weighted_maximal_bound(f: &Field, w: &Field, q: f64) -> Result<MaximalBoundReport> {
    if !(q > 1.0) {
        return Err(Error::Parameter(format!("weighted maximal bound needs q > 1, got {q}")));
    }
    f.check_same_grid(w)?;
    let mf = maximal(f)?;
    let weight = a_gamma_constant(w, q)?;
    let lhs = crate::grid::integrate(&mf.map(|v| v.powf(q)), Some(w))?;
    let rhs = crate::grid::integrate(&f.map(|v| v.powf(q)), Some(w))?;
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(MaximalBoundReport { q, lhs, rhs, ratio, weight })
}

#[derive(Clone, Debug)]
pub struct PsiFields {
    pub s_star: f64,
    /// `(M(|H|^{(p−1)s_*} |DH|^{s_*}))^{1/s_*}`
    pub psi2: Field,
    /// `(M(|h Du|^{s_*}))^{1/s_*}` with `h = |H|^{p−1} H`
    pub psi3: Field,
}

/// Dual exponent `s_* = 2N/(N+1)` of `s = 2N/(N−1)`.
pub fn s_star(dim: usize) -> f64 {
    2.0 * dim as f64 / (dim as f64 + 1.0)
}

/// Ψ₂ and Ψ₃. `du` defaults to `h_field`, which is the strong case `H = Du`.
pub fn psi_quantities(h_field: &Field, dh: &Field, du: Option<&Field>, p: f64) -> Result<PsiFields> {
    let grid = *h_field.grid();
    if grid.dim() < 2 {
        return Err(Error::Parameter("Ψ quantities need N ≥ 2 so that s_* ∈ (1, 2)".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("p must be ≥ 1, got {p}")));
    }
    h_field.check_same_grid(dh)?;
    let du = du.unwrap_or(h_field);
    h_field.check_same_grid(du)?;
    let s = s_star(grid.dim());
    let hn = h_field.norm();
    let dhn = dh.norm();
    let dun = du.norm();
    let integrand2: Vec<f64> = (0..grid.len())
        .map(|i| hn.get(i, 0).powf((p - 1.0) * s) * dhn.get(i, 0).powf(s))
        .collect();
    let integrand3: Vec<f64> = (0..grid.len())
        .map(|i| (hn.get(i, 0).powf(p) * dun.get(i, 0)).powf(s))
        .collect();
    let psi2 = maximal(&Field::from_raw(grid, 1, integrand2))?.map(|v| v.powf(1.0 / s));
    let psi3 = maximal(&Field::from_raw(grid, 1, integrand3))?.map(|v| v.powf(1.0 / s));
    Ok(PsiFields { s_star: s, psi2, psi3 })
}
