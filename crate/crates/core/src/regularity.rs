//! Regularity diagnostics: gradient norms, Hölder-exponent estimation and the
//! smallness, k-power, growth and thin-domain hypothesis checks.

use crate::error::{Error, Result};
use crate::grid::{gradient, Field, Grid, Region, MAX_DIM};
use crate::harmonic::bmo_local;
use crate::numerics::pairwise_sum_by;
use crate::solver::{DiffusionModel, Reaction};
use serde::Serialize;
use std::collections::VecDeque;

/// `(∫_region |DW|^q)^{1/q}` for `q = 2p`.
pub fn lp_gradient_norm(w: &Field, q: f64, region: Option<&Region>) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Parameter(format!("exponent must be ≥ 1, got {q}")));
    }
    let grid = w.grid();
    let g = gradient(w)?.norm();
    let region = region.copied().unwrap_or_else(|| grid.full_region());
    if !region.within(grid) {
        return Err(Error::Range("region outside grid".into()));
    }
    let cells: Vec<usize> = region.indices(grid).collect();
    if q.is_infinite() {
        return Ok(cells.iter().map(|&i| g.get(i, 0)).fold(0.0, f64::max));
    }
    let sum = pairwise_sum_by(cells.len(), |k| g.get(cells[k], 0).powf(q));
    Ok((sum * grid.cell_volume()).powf(1.0 / q))
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderEstimate {
    /// Fitted slope clamped to `(0, 1]`.
    pub alpha: f64,
    pub slope: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub constant_field: bool,
    pub clamped: bool,
    /// `(r, max_center osc_{B_r})` per ladder entry.
    pub oscillations: Vec<(f64, f64)>,
}

const ALPHA_FLOOR: f64 = 1e-3;

/// Sliding max and min of `line` over windows `[i − w, i + w]` clipped to the line.
fn sliding_extremes(line: &[f64], w: usize, max_out: &mut [f64], min_out: &mut [f64]) {
    let n = line.len();
    let mut qmax: VecDeque<usize> = VecDeque::new();
    let mut qmin: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        let hi = (i + w).min(n - 1);
        while next <= hi {
            while qmax.back().is_some_and(|&j| line[j] <= line[next]) {
                qmax.pop_back();
            }
            qmax.push_back(next);
            while qmin.back().is_some_and(|&j| line[j] >= line[next]) {
                qmin.pop_back();
            }
            qmin.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(w);
        while qmax.front().is_some_and(|&j| j < lo) {
            qmax.pop_front();
        }
        while qmin.front().is_some_and(|&j| j < lo) {
            qmin.pop_front();
        }
        max_out[i] = line[qmax[0]];
        min_out[i] = line[qmin[0]];
    }
}

/// Maximum over all ball centres of `max − min` of the scalar `f` on the
/// Euclidean cell ball of radius `r`, clipped to the grid. Balls are unions
/// of chords along the last axis, each handled by a sliding window.
pub fn max_ball_oscillation(f: &Field, r: f64) -> Result<f64> {
    if f.components() != 1 {
        return Err(Error::Shape("oscillation expects a scalar field".into()));
    }
    let grid = f.grid();
    let dim = grid.dim();
    let last = dim - 1;
    let h = grid.spacing();
    let cells = grid.cells();
    let r2 = r * r * (1.0 + 1e-12);
    // chord offsets over the leading axes with their half-width along the last axis
    let mut reach = [0isize; MAX_DIM];
    for a in 0..last {
        reach[a] = (r / h[a]).floor() as isize;
    }
    let mut chords: Vec<([isize; MAX_DIM], usize)> = Vec::new();
    for i in -reach[0]..=reach[0] {
        for j in -reach[1]..=reach[1] {
            let off = [i, j, 0];
            let d2: f64 = (0..last).map(|a| (off[a] as f64 * h[a]).powi(2)).sum();
            if d2 <= r2 {
                let rem = ((r2 - d2).max(0.0)).sqrt();
                chords.push((off, (rem / h[last] * (1.0 + 1e-12)).floor() as usize));
            }
        }
    }
    let mut widths: Vec<usize> = chords.iter().map(|c| c.1).collect();
    widths.sort_unstable();
    widths.dedup();
    let n_last = cells[last];
    let lines = grid.len() / n_last;
    // line index `l` covers cells l * n_last .. (l + 1) * n_last (last axis is contiguous)
    let mut smax = vec![vec![0.0; grid.len()]; widths.len()];
    let mut smin = vec![vec![0.0; grid.len()]; widths.len()];
    for (wi, &w) in widths.iter().enumerate() {
        for l in 0..lines {
            let range = l * n_last..(l + 1) * n_last;
            let (mx, mn) = (&mut smax[wi][range.clone()], &mut smin[wi][range.clone()]);
            sliding_extremes(&f.values()[range], w, mx, mn);
        }
    }
    let chord_w: Vec<usize> = chords.iter().map(|c| widths.binary_search(&c.1).unwrap()).collect();
    let mut best: f64 = 0.0;
    for cell in 0..grid.len() {
        let mi = grid.multi_index(cell);
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        'chord: for (c, (off, _)) in chords.iter().enumerate() {
            let mut t = mi;
            for a in 0..last {
                let p = mi[a] as isize + off[a];
                if p < 0 || p >= cells[a] as isize {
                    continue 'chord;
                }
                t[a] = p as usize;
            }
            let idx = grid.index(t);
            hi = hi.max(smax[chord_w[c]][idx]);
            lo = lo.min(smin[chord_w[c]][idx]);
        }
        best = best.max(hi - lo);
    }
    Ok(best)
}

/// Geometric ladder `2h, 4h, …` up to an eighth of the shortest side; on
/// coarse grids `h, 2h`.
pub fn default_radii(grid: &Grid) -> Vec<f64> {
    let h = grid.max_spacing();
    let top = grid.extents().iter().cloned().fold(f64::INFINITY, f64::min) / 8.0;
    let mut out = Vec::new();
    let mut r = 2.0 * h;
    while r <= top * (1.0 + 1e-12) {
        out.push(r);
        r *= 2.0;
    }
    if out.len() < 2 {
        out = vec![h, 2.0 * h];
    }
    out
}

/// Least-squares slope of `log osc` against `log r`.
pub fn holder_estimate(w: &Field, radii: &[f64]) -> Result<HolderEstimate> {
    if radii.len() < 2 {
        return Err(Error::Parameter("Hölder fit needs at least two radii".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Parameter("radii must be positive".into()));
    }
    let scalar = if w.components() == 1 { w.clone() } else { w.norm() };
    let mut osc = Vec::with_capacity(radii.len());
    for &r in radii {
        osc.push((r, max_ball_oscillation(&scalar, r)?));
    }
    let pts: Vec<(f64, f64)> = osc.iter().filter(|(_, o)| *o > 0.0).map(|(r, o)| (r.ln(), o.ln())).collect();
    if pts.is_empty() {
        return Ok(HolderEstimate {
            alpha: 1.0,
            slope: 0.0,
            residual: 0.0,
            constant_field: true,
            clamped: false,
            oscillations: osc,
        });
    }
    if pts.len() < 2 {
        return Err(Error::Resolution("fewer than two radii with nonzero oscillation".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - icept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    let alpha = slope.clamp(ALPHA_FLOOR, 1.0);
    Ok(HolderEstimate {
        alpha,
        slope,
        residual,
        constant_field: false,
        clamped: alpha != slope,
        oscillations: osc,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SmallnessEntry {
    pub radius: f64,
    pub omega_tilde: f64,
    /// `C(N) C_*² ω̃²`
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BmoSmallness {
    pub entries: Vec<SmallnessEntry>,
    pub largest_passing_radius: Option<f64>,
}

/// `C(N) C_*² ‖W‖²_{BMO(Ω_{2R})} < 1` over a ladder of radii.
pub fn bmo_smallness_check(w: &Field, c_n: f64, c_star: f64, center: &[f64], radii: &[f64]) -> Result<BmoSmallness> {
    if !(c_n >= 0.0) || !(c_star >= 0.0) {
        return Err(Error::Parameter("C(N) and C_* must be nonnegative".into()));
    }
    let mut entries = Vec::with_capacity(radii.len());
    for &r in radii {
        let omega = bmo_local(w, center, r)?.bmo_norm;
        let margin = if c_star.is_infinite() { f64::INFINITY } else { c_n * c_star * c_star * omega * omega };
        entries.push(SmallnessEntry { radius: r, omega_tilde: omega, margin, pass: margin < 1.0 });
    }
    let largest = entries.iter().filter(|e| e.pass).map(|e| e.radius).fold(None, |a: Option<f64>, r| Some(a.map_or(r, |v| v.max(r))));
    Ok(BmoSmallness { entries, largest_passing_radius: largest })
}

#[derive(Clone, Debug, Serialize)]
pub struct KPowerReport {
    pub bmo_norm: f64,
    /// Smallest `c(k)` for which the condition holds on every cell of `Ω_{2R}`.
    pub best_c: f64,
    pub violating_cells: usize,
    pub violating_measure: f64,
    pub pass: bool,
}

/// `‖W‖_{BMO(Ω_{2R})} ≤ c(k)[|W| + ε|W|^{1−k}]` at every cell of `Ω_{2R}`.
pub fn kpower_condition_check(w: &Field, k: f64, eps: f64, c_k: f64, center: &[f64], radius: f64) -> Result<KPowerReport> {
    if !(eps >= 0.0) || !(c_k >= 0.0) {
        return Err(Error::Parameter("ε and c(k) must be nonnegative".into()));
    }
    let grid = w.grid();
    let region = Region::around(grid, center, 2.0 * radius)?;
    let bmo = bmo_local(w, center, radius)?.bmo_norm;
    let norms = w.norm();
    let mut best: f64 = 0.0;
    let mut bad = 0;
    for idx in region.indices(grid) {
        let a = norms.get(idx, 0);
        let rhs = if a == 0.0 {
            if eps > 0.0 && k > 1.0 {
                f64::INFINITY
            } else if eps > 0.0 && k == 1.0 {
                eps
            } else {
                0.0
            }
        } else {
            a + eps * a.powf(1.0 - k)
        };
        let need = if bmo == 0.0 {
            0.0
        } else if rhs == 0.0 {
            f64::INFINITY
        } else {
            bmo / rhs
        };
        best = best.max(need);
        if bmo > c_k * rhs {
            bad += 1;
        }
    }
    Ok(KPowerReport {
        bmo_norm: bmo,
        best_c: best,
        violating_cells: bad,
        violating_measure: bad as f64 * grid.cell_volume(),
        pass: bad == 0,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub best_c: f64,
    pub unbounded: bool,
    /// `(|W|, |F(W)| / min(|W|^{k/2+2} + 1, |W|^{k+1} + 1))` sorted by `|W|`.
    pub ratios: Vec<(f64, f64)>,
}

/// Probes `r e_i` for `r = 2^{lo}, …, 2^{hi}` along every coordinate axis.
pub fn growth_probe_ladder(m: usize, lo: i32, hi: i32) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for e in lo..=hi {
        for i in 0..m {
            let mut w = vec![0.0; m];
            w[i] = 2f64.powi(e);
            out.push(w);
        }
    }
    out
}

/// Smallest `C` with `|F(W)| ≤ C min{|W|^{k/2+2} + 1, |W|^{k+1} + 1}` on the
/// samples. Growth is flagged unbounded when the largest ratio sits at the
/// top of the `|W|` ladder and at least doubles over the last four levels.
pub fn growth_condition_check(model: &DiffusionModel, samples: &[Vec<f64>], k: f64) -> Result<GrowthReport> {
    let m = model.components();
    if matches!(model.reaction(), Reaction::Potential(_)) {
        return Err(Error::Parameter("growth condition needs a reaction F(W), not g(x,t)W".into()));
    }
    let mut out = vec![0.0; m];
    let mut ratios = Vec::with_capacity(samples.len());
    for w in samples {
        if w.len() != m {
            return Err(Error::Shape("sample has the wrong component count".into()));
        }
        model.reaction_at(w, &[0.0; MAX_DIM], 0.0, &mut out);
        let f = out.iter().map(|v| v * v).sum::<f64>().sqrt();
        let a = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        let bound = (a.powf(k / 2.0 + 2.0) + 1.0).min(a.powf(k + 1.0) + 1.0);
        ratios.push((a, f / bound));
    }
    ratios.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    // per-level maxima over equal |W|
    let mut levels: Vec<(f64, f64)> = Vec::new();
    for &(a, r) in &ratios {
        match levels.last_mut() {
            Some(last) if (last.0 - a).abs() <= 1e-12 * a.max(1.0) => last.1 = last.1.max(r),
            _ => levels.push((a, r)),
        }
    }
    let best_c = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let unbounded = levels.len() > 4 && {
        let top = levels[levels.len() - 1].1;
        let earlier = levels[levels.len() - 5].1;
        top >= best_c && top > 0.0 && top >= 2.0 * earlier
    };
    Ok(GrowthReport { best_c, unbounded, ratios })
}

#[derive(Clone, Debug, Serialize)]
pub struct ThinDomainEntry {
    pub radius: f64,
    /// Max over admissible slabs and balls of `LHS / R^{N−2}`.
    pub max_ratio: f64,
    pub positions: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThinDomainReport {
    pub eps_target: f64,
    pub entries: Vec<ThinDomainEntry>,
    pub pass: bool,
}

/// `∫_{slab of height R} ∫_{B_R} |∂_{x_N} W|² ≤ ε_target R^{N−2}` over every
/// grid-aligned slab and every ball `B_R` (in the first `N−1` axes) centred
/// at a cell centre and contained in the cross-section.
pub fn thin_domain_check(w: &Field, eps_target: f64, radii: &[f64]) -> Result<ThinDomainReport> {
    let grid = *w.grid();
    let dim = grid.dim();
    if dim < 2 {
        return Err(Error::Parameter("thin-domain check needs N ≥ 2".into()));
    }
    if !(eps_target >= 0.0) {
        return Err(Error::Parameter("ε_target must be ≥ 0".into()));
    }
    let m = w.components();
    let last = dim - 1;
    let g = gradient(w)?;
    let q: Vec<f64> = (0..grid.len())
        .map(|i| (0..m).map(|c| g.get(i, c * dim + last).powi(2)).sum())
        .collect();
    let h = grid.spacing();
    let cells = grid.cells();
    let n_last = cells[last];
    let lines = grid.len() / n_last;
    // prefix sums along the last axis
    let mut prefix = vec![0.0; lines * (n_last + 1)];
    for l in 0..lines {
        for j in 0..n_last {
            prefix[l * (n_last + 1) + j + 1] = prefix[l * (n_last + 1) + j] + q[l * n_last + j] * h[last];
        }
    }
    let cross_area: f64 = h[..last].iter().product();
    let mut entries = Vec::with_capacity(radii.len());
    for &r in radii {
        let slab = (r / h[last]).round() as usize;
        if slab == 0 || slab > n_last {
            return Err(Error::Resolution(format!("slab height {r} does not fit the x_N axis")));
        }
        let mut reach = [0isize; MAX_DIM];
        for a in 0..last {
            reach[a] = (r / h[a]).floor() as isize;
        }
        let mut offsets = Vec::new();
        for i in -reach[0]..=reach[0] {
            for j in -reach[1]..=reach[1] {
                let off = [i, j, 0];
                let d2: f64 = (0..last).map(|a| (off[a] as f64 * h[a]).powi(2)).sum();
                if d2 <= r * r * (1.0 + 1e-12) {
                    offsets.push(off);
                }
            }
        }
        let mut best: f64 = 0.0;
        let mut positions = 0;
        for l in 0..lines {
            let mi = grid.multi_index(l * n_last);
            let x = grid.center(l * n_last);
            let inside = (0..last).all(|a| x[a] - r >= -1e-12 && x[a] + r <= grid.extents()[a] + 1e-12);
            if !inside {
                continue;
            }
            for j0 in 0..=n_last - slab {
                positions += 1;
                let mut s = 0.0;
                for off in &offsets {
                    let mut t = mi;
                    for a in 0..last {
                        t[a] = (mi[a] as isize + off[a]) as usize;
                    }
                    let line = grid.index(t) / n_last;
                    let base = line * (n_last + 1);
                    s += prefix[base + j0 + slab] - prefix[base + j0];
                }
                best = best.max(s * cross_area / r.powi(dim as i32 - 2));
            }
        }
        if positions == 0 {
            return Err(Error::Resolution(format!("no ball of radius {r} fits the cross-section")));
        }
        entries.push(ThinDomainEntry { radius: r, max_ratio: best, positions, pass: best <= eps_target });
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(ThinDomainReport { eps_target, entries, pass })
}

#[derive(Clone, Debug)]
pub struct DiagnoseOptions {
    /// Exponents `2p` for the gradient norms.
    pub exponents: Vec<f64>,
    pub center: Vec<f64>,
    pub radius: f64,
    pub c_n: f64,
    pub c_star: f64,
    pub holder_radii: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    /// `(2p, ‖DW‖_{L^{2p}(Ω_R)})`
    pub gradient_norms: Vec<(f64, f64)>,
    pub holder: HolderEstimate,
    pub smallness: SmallnessEntry,
    pub flags: Vec<String>,
}

/// Norms over `Ω_R`, Hölder fit and the BMO smallness margin for one state.
pub fn regularity_report(w: &Field, opts: &DiagnoseOptions) -> Result<RegularityReport> {
    let region = Region::around(w.grid(), &opts.center, opts.radius)?;
    let gradient_norms = opts
        .exponents
        .iter()
        .map(|&q| lp_gradient_norm(w, q, Some(&region)).map(|v| (q, v)))
        .collect::<Result<Vec<_>>>()?;
    let radii = opts.holder_radii.clone().unwrap_or_else(|| default_radii(w.grid()));
    let holder = holder_estimate(w, &radii)?;
    let small = bmo_smallness_check(w, opts.c_n, opts.c_star, &opts.center, &[opts.radius])?;
    let smallness = small.entries.into_iter().next().expect("one radius");
    let mut flags = Vec::new();
    if holder.constant_field {
        flags.push("constant field".to_string());
    }
    if holder.clamped {
        flags.push("Hölder slope clamped".to_string());
    }
    if !smallness.pass {
        flags.push("BMO smallness fails".to_string());
    }
    Ok(RegularityReport { gradient_norms, holder, smallness, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryKind;
    use std::sync::Arc;

    fn unit(dim: usize, n: usize) -> Grid {
        Grid::unit(dim, n, BoundaryKind::Neumann).unwrap()
    }

    #[test]
    fn gradient_norm_cases() {
        let g = unit(2, 16);
        assert_eq!(lp_gradient_norm(&Field::constant(g, &[2.0]), 4.0, None).unwrap(), 0.0);
        let aff = Field::scalar_from_fn(g, |x| 0.6 * x[0] - 0.8 * x[1]);
        let r = Region { start: [2, 3, 0], len: [5, 4, 1] };
        let want = r.measure(&g).powf(0.25);
        assert!((lp_gradient_norm(&aff, 4.0, Some(&r)).unwrap() - want).abs() < 1e-12);
        let big = Region { start: [1, 2, 0], len: [8, 8, 1] };
        let f = Field::scalar_from_fn(g, |x| (3.0 * x[0]).sin() + x[1] * x[1]);
        assert!(lp_gradient_norm(&f, 2.0, Some(&r)).unwrap() <= lp_gradient_norm(&f, 2.0, Some(&big)).unwrap());
    }

    #[test]
    fn sliding_window_matches_brute_force() {
        let line: Vec<f64> = (0..23).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        for w in 0..6 {
            let mut mx = vec![0.0; 23];
            let mut mn = vec![0.0; 23];
            sliding_extremes(&line, w, &mut mx, &mut mn);
            for i in 0..23usize {
                let win = &line[i.saturating_sub(w)..(i + w + 1).min(23)];
                assert_eq!(mx[i], win.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
                assert_eq!(mn[i], win.iter().cloned().fold(f64::INFINITY, f64::min));
            }
        }
    }

    #[test]
    fn ball_oscillation_matches_brute_force_2d() {
        let g = unit(2, 12);
        let f = Field::scalar_from_fn(g, |x| (5.0 * x[0] * x[1]).sin() + x[0]);
        for r in [0.1, 0.17, 0.3] {
            let mut want: f64 = 0.0;
            for c in 0..g.len() {
                let x = g.center(c);
                let cells = crate::grid::ball_cells(&g, &x[..2], r);
                let hi = cells.iter().map(|&i| f.get(i, 0)).fold(f64::NEG_INFINITY, f64::max);
                let lo = cells.iter().map(|&i| f.get(i, 0)).fold(f64::INFINITY, f64::min);
                want = want.max(hi - lo);
            }
            assert_eq!(max_ball_oscillation(&f, r).unwrap(), want);
        }
    }

    #[test]
    fn holder_cases() {
        let g = unit(1, 512);
        let x0 = g.center(256)[0];
        let f = Field::scalar_from_fn(g, |x| (x[0] - x0).abs().sqrt());
        let radii: Vec<f64> = [2.0, 4.0, 8.0, 16.0, 32.0].iter().map(|k| k / 512.0).collect();
        let e = holder_estimate(&f, &radii).unwrap();
        assert!((e.alpha - 0.5).abs() < 0.05, "{}", e.alpha);
        let aff = Field::scalar_from_fn(g, |x| 3.0 * x[0]);
        let e = holder_estimate(&aff, &radii).unwrap();
        assert!((e.alpha - 1.0).abs() < 1e-9);
        let c = holder_estimate(&Field::constant(g, &[1.0]), &radii).unwrap();
        assert!(c.constant_field && c.alpha == 1.0);
    }

    #[test]
    fn smallness_cases() {
        let g = unit(2, 24);
        let center = [0.5, 0.5];
        let radii = [0.2, 0.15, 0.1, 0.05];
        let c = bmo_smallness_check(&Field::constant(g, &[0.1]), 1.0, 1.0, &center, &radii).unwrap();
        assert!(c.entries.iter().all(|e| e.pass));
        let f = Field::scalar_from_fn(g, |x| (2.0 * x[0]).sin() * x[1]);
        let s = bmo_smallness_check(&f, 1.0, 2.0, &center, &radii).unwrap();
        for w in s.entries.windows(2) {
            assert!(w[1].margin <= w[0].margin);
        }
        let inf = bmo_smallness_check(&f, 1.0, f64::INFINITY, &center, &radii).unwrap();
        assert!(inf.entries.iter().all(|e| !e.pass));
        assert_eq!(inf.largest_passing_radius, None);
    }

    #[test]
    fn kpower_cases() {
        let g = unit(2, 20);
        let f = Field::scalar_from_fn(g, |x| x[0] * x[0]);
        let r = kpower_condition_check(&f, 2.0, 0.1, 1.0, &[0.0, 0.5], 0.1).unwrap();
        // near x = 0 the ε|W|^{1−k} term dominates
        assert!(r.bmo_norm > 0.0);
        let c0 = 0.7;
        let cst = kpower_condition_check(&Field::constant(g, &[c0]), 2.0, 0.0, 1.0, &[0.5, 0.5], 0.1).unwrap();
        let region = Region::around(&g, &[0.5, 0.5], 0.2).unwrap();
        assert!((cst.bmo_norm - c0 * region.measure(&g)).abs() < 1e-12);
        assert!((cst.best_c - cst.bmo_norm / c0).abs() < 1e-12);
        let zero = kpower_condition_check(&f, 2.0, 0.1, 0.0, &[0.5, 0.5], 0.1).unwrap();
        assert!(!zero.pass && zero.violating_measure > 0.0);
    }

    #[test]
    fn growth_cases() {
        let ladder = growth_probe_ladder(1, -6, 12);
        let none = growth_condition_check(&DiffusionModel::heat(1), &ladder, 0.0).unwrap();
        assert_eq!(none.best_c, 0.0);
        assert!(!none.unbounded);
        let lin = DiffusionModel::heat(1).with_reaction(Reaction::Source(Arc::new(|w, o| o[0] = w[0])));
        let r = growth_condition_check(&lin, &ladder, 0.0).unwrap();
        assert!(r.best_c <= 1.0 && r.best_c > 0.99, "{}", r.best_c);
        assert!(!r.unbounded);
        let k = 1.0;
        let fast = DiffusionModel::heat(1).with_reaction(Reaction::Source(Arc::new(move |w, o| {
            o[0] = w[0].abs().powf(k + 2.0) * w[0]
        })));
        assert!(growth_condition_check(&fast, &ladder, k).unwrap().unbounded);
    }

    #[test]
    fn thin_domain_cases() {
        let g = Grid::new(&[1.0, 1.0, 1.0], &[16, 16, 16], BoundaryKind::Neumann).unwrap();
        let flat = Field::scalar_from_fn(g, |x| (3.0 * x[0]).sin() + x[1]);
        let r = thin_domain_check(&flat, 0.0, &[0.25]).unwrap();
        assert!(r.pass, "{:?}", r);
        let lin = Field::scalar_from_fn(g, |x| x[2]);
        let radii = [0.125, 0.25];
        let rep = thin_domain_check(&lin, 1.0, &radii).unwrap();
        for (e, &rad) in rep.entries.iter().zip(&radii) {
            // D_{x_N} W = 1: LHS = R |B_R| with the discrete disc measure
            let disc = crate::grid::ball_cells(&Grid::unit(2, 16, BoundaryKind::Neumann).unwrap(), &[0.5 - 1.0 / 32.0, 0.5 - 1.0 / 32.0], rad).len();
            let want = rad * disc as f64 / 256.0 / rad;
            assert!((e.max_ratio - want).abs() < 1e-12, "{} vs {want}", e.max_ratio);
        }
        assert!(rep.entries[0].max_ratio < rep.entries[1].max_ratio);
        assert!(!thin_domain_check(&lin, 0.0, &radii).unwrap().pass);
    }
}
