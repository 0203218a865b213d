//! Systems `W_t = Div(a(W) DW)` with `B(W) a(W) B⁻¹(W) = α(W)` diagonal, the
//! transform `P(W) = ∫₀¹ B(sW) W ds`, the condition constant `c` and the
//! `L^∞`–`L^p` estimate for `P`.

use crate::error::{Error, Result};
use crate::grid::{gradient, Field};
use crate::numerics::{frobenius, op_norm, GradedRule};
use crate::solver::{assemble, simulate, DiffusionModel, Preset, SolverConfig, Trajectory};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

type MatFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
/// `W ↦ [∂B/∂W_1, …, ∂B/∂W_m]`
type TensorFn = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;
type DiagFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixNorm {
    #[default]
    Operator2,
    Frobenius,
}

impl MatrixNorm {
    pub fn apply(&self, m: &DMatrix<f64>) -> f64 {
        match self {
            MatrixNorm::Operator2 => op_norm(m),
            MatrixNorm::Frobenius => frobenius(m),
        }
    }

    /// `(Σ_k |T_k|²)^{1/2}` for a derivative tensor split into slices.
    pub fn tensor(&self, slices: &[DMatrix<f64>]) -> f64 {
        slices.iter().map(|s| self.apply(s).powi(2)).sum::<f64>().sqrt()
    }
}

#[derive(Clone)]
pub struct DiagonalizableModel {
    m: usize,
    name: String,
    b: MatFn,
    b_w: Option<TensorFn>,
    alpha: DiagFn,
    lambda0: f64,
    l: Option<f64>,
    constant: bool,
}

impl std::fmt::Debug for DiagonalizableModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DiagonalizableModel({}, m = {})", self.name, self.m)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_square(b0: &DMatrix<f64>, alpha: &[f64]) -> Result<usize> {
    let m = b0.nrows();
    if b0.ncols() != m || alpha.len() != m || m == 0 {
        return Err(Error::Shape("B₀ must be square and match the number of α entries".into()));
    }
    if alpha.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::Parameter("α entries must be positive".into()));
    }
    if b0.clone().try_inverse().is_none() {
        return Err(Error::Singular(vec![]));
    }
    Ok(m)
}

impl DiagonalizableModel {
    /// General model. Without `b_w` the derivative of `B` is taken by central
    /// differences.
    pub fn new(m: usize, name: impl Into<String>, b: MatFn, b_w: Option<TensorFn>, alpha: DiagFn, lambda0: f64) -> Self {
        Self { m, name: name.into(), b, b_w, alpha, lambda0, l: None, constant: false }
    }

    /// Constant `B = B₀` and `α = diag(alpha)`.
    pub fn constant(b0: DMatrix<f64>, alpha: Vec<f64>) -> Result<Self> {
        let m = check_square(&b0, &alpha)?;
        let lambda0 = alpha.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Self {
            m,
            name: "constant B".into(),
            b: Arc::new(move |_| b0.clone()),
            b_w: Some(Arc::new(move |_| vec![DMatrix::zeros(m, m); m])),
            alpha: Arc::new(move |_| alpha.clone()),
            lambda0,
            l: Some(0.0),
            constant: true,
        })
    }

    /// `B(W) = |W|^l B₀` and `α = diag(alpha)`.
    pub fn power(b0: DMatrix<f64>, l: f64, alpha: Vec<f64>) -> Result<Self> {
        let m = check_square(&b0, &alpha)?;
        if !(l >= 0.0) {
            return Err(Error::Parameter(format!("exponent l = {l} must be nonnegative")));
        }
        let lambda0 = alpha.iter().cloned().fold(f64::INFINITY, f64::min);
        let b1 = b0.clone();
        Ok(Self {
            m,
            name: format!("|W|^{l} B0"),
            b: Arc::new(move |w| &b0 * norm(w).powf(l)),
            b_w: Some(Arc::new(move |w| {
                let r = norm(w);
                let c = if r > 0.0 { l * r.powf(l - 2.0) } else { 0.0 };
                w.iter().map(|wk| &b1 * (c * wk)).collect()
            })),
            alpha: Arc::new(move |_| alpha.clone()),
            lambda0,
            l: Some(l),
            constant: l == 0.0,
        })
    }

    /// `κB` with the same `α`; `a = B⁻¹αB` is unchanged.
    pub fn scale_b(&self, kappa: f64) -> Self {
        let (b, bw) = (self.b.clone(), self.b_w.clone());
        Self {
            b: Arc::new(move |w| b(w) * kappa),
            b_w: bw.map(|f| -> TensorFn { Arc::new(move |w| f(w).into_iter().map(|s| s * kappa).collect()) }),
            name: format!("{kappa} * ({})", self.name),
            ..self.clone()
        }
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn exponent(&self) -> Option<f64> {
        self.l
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn b(&self, w: &[f64]) -> DMatrix<f64> {
        (self.b)(w)
    }

    pub fn b_inv(&self, w: &[f64]) -> Result<DMatrix<f64>> {
        let b = self.b(w);
        let inv = b.clone().try_inverse().ok_or_else(|| Error::Singular(w.to_vec()))?;
        if !inv.iter().all(|v| v.is_finite()) {
            return Err(Error::Singular(w.to_vec()));
        }
        Ok(inv)
    }

    /// `[∂B/∂W_k]_k`.
    pub fn b_w(&self, w: &[f64]) -> Vec<DMatrix<f64>> {
        if let Some(f) = &self.b_w {
            return f(w);
        }
        (0..self.m)
            .map(|k| {
                let tau = 1e-6 * norm(w).max(1.0);
                let mut up = w.to_vec();
                let mut dn = w.to_vec();
                up[k] += tau;
                dn[k] -= tau;
                (self.b(&up) - self.b(&dn)) / (2.0 * tau)
            })
            .collect()
    }

    pub fn alpha(&self, w: &[f64]) -> Vec<f64> {
        (self.alpha)(w)
    }

    /// `a(W) = B⁻¹ α B`.
    pub fn a(&self, w: &[f64]) -> Result<DMatrix<f64>> {
        let b = self.b(w);
        let alpha = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.alpha(w)));
        Ok(self.b_inv(w)? * alpha * b)
    }

    /// Solver model for `W_t = Div(a(W) DW)`. Where `B(W)` is singular the
    /// coefficient is the limit along `W`'s direction, which for the presets
    /// is `B₀⁻¹ α B₀`.
    pub fn diffusion_model(&self) -> DiffusionModel {
        let me = self.clone();
        let lo = self.clone();
        let hi = self.clone();
        let m = self.m;
        DiffusionModel::new(
            m,
            Arc::new(move |w| match me.a(w) {
                Ok(a) => a,
                Err(_) => {
                    let mut probe = w.to_vec();
                    let r = norm(w);
                    if r == 0.0 {
                        probe[0] = 1.0;
                    } else {
                        probe.iter_mut().for_each(|x| *x /= r);
                    }
                    me.a(&probe).unwrap_or_else(|_| DMatrix::from_element(m, m, f64::NAN))
                }
            }),
            Arc::new(move |w| lo.alpha(w).into_iter().fold(f64::INFINITY, f64::min)),
            Arc::new(move |w| hi.alpha(w).into_iter().fold(f64::NEG_INFINITY, f64::max)),
        )
        .with_preset(Preset::Custom(format!("B⁻¹αB, B = {}", self.name)))
    }

    /// `P(W)` at one point.
    pub fn p_at(&self, w: &[f64], rule: &GradedRule) -> Vec<f64> {
        if self.constant {
            return (self.b(w) * nalgebra::DVector::from_column_slice(w)).as_slice().to_vec();
        }
        let mut out = vec![0.0; self.m];
        let mut sw = vec![0.0; self.m];
        let mut terms: Vec<Vec<f64>> = vec![Vec::new(); self.m];
        for (s, wt) in rule.points() {
            sw.iter_mut().zip(w).for_each(|(a, b)| *a = s * b);
            let v = self.b(&sw) * nalgebra::DVector::from_column_slice(w);
            for (t, x) in terms.iter_mut().zip(v.iter()) {
                t.push(wt * x);
            }
        }
        for (o, t) in out.iter_mut().zip(&terms) {
            *o = crate::numerics::pairwise_sum(t);
        }
        out
    }
}

/// Per-cell `P(W)`; a constant `B` gives `BW` without quadrature.
pub fn p_transform(w: &Field, model: &DiagonalizableModel) -> Result<Field> {
    if w.components() != model.components() {
        return Err(Error::Shape(format!("field has {} components, B is {}×{}", w.components(), model.m, model.m)));
    }
    let rule = GradedRule::default();
    let m = model.m;
    let values: Vec<f64> = (0..w.grid().len())
        .into_par_iter()
        .flat_map_iter(|cell| model.p_at(w.at(cell), &rule))
        .collect();
    debug_assert_eq!(values.len(), w.grid().len() * m);
    Field::new(*w.grid(), m, values)
}

/// Probe points with log-spaced radii in `[r_min, r_max]` and the direction
/// set of [`crate::uniqueness::ProbeSet::lattice`].
pub fn probe_points(m: usize, r_min: f64, r_max: f64, radial: usize, angular: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if !(r_min > 0.0 && r_max >= r_min) || radial == 0 {
        return Err(Error::Parameter("probe radii need 0 < r_min ≤ r_max and at least one level".into()));
    }
    let dirs = crate::uniqueness::ProbeSet::lattice(m, 1.0, 1, angular.max(1), seed).vs;
    let mut out = Vec::new();
    for i in 0..radial {
        let f = if radial == 1 { 0.0 } else { i as f64 / (radial - 1) as f64 };
        let r = r_min * (r_max / r_min).powf(f);
        out.extend(dirs.iter().map(|d| d.iter().map(|x| r * x).collect::<Vec<f64>>()));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct BmatReport {
    pub norm: MatrixNorm,
    /// `sup max_i λ_i |B| |(B⁻¹)_W| |B⁻¹| |P| / min_i λ_i`
    pub c_measured: f64,
    /// Same with `|B_W B⁻¹| |B⁻¹|` in place of `|B| |(B⁻¹)_W| |B⁻¹|`.
    pub variant_c_measured: f64,
    pub worst_w: Vec<f64>,
    pub probes: usize,
    /// `max |B a B⁻¹ − α| / |α|` over probes.
    pub similarity_defect: f64,
    /// Smallest `λ_i(W)` seen.
    pub lambda_min: f64,
    pub lambda0_ok: bool,
    /// `max |P_W − B| / |B|`, measured by central differences.
    pub pw_defect: f64,
    /// `(c, variant c)` at each probe.
    pub per_probe: Vec<(f64, f64)>,
}

/// Measured condition constants over the probe points.
pub fn bmat_condition(model: &DiagonalizableModel, probes: &[Vec<f64>], norm_kind: MatrixNorm) -> Result<BmatReport> {
    if probes.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let rule = GradedRule::default();
    struct Row {
        c: f64,
        variant: f64,
        defect: f64,
        lam_min: f64,
        pw: f64,
    }
    let rows: Vec<Row> = probes
        .par_iter()
        .map(|w| -> Result<Row> {
            if w.len() != model.m {
                return Err(Error::Shape("probe has the wrong component count".into()));
            }
            let b = model.b(w);
            let binv = model.b_inv(w)?;
            let bw = model.b_w(w);
            let alpha = model.alpha(w);
            let lam_max = alpha.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lam_min = alpha.iter().cloned().fold(f64::INFINITY, f64::min);
            let p = norm(&model.p_at(w, &rule));
            let dinv: Vec<DMatrix<f64>> = bw.iter().map(|s| -(&binv * s * &binv)).collect();
            let bwbinv: Vec<DMatrix<f64>> = bw.iter().map(|s| s * &binv).collect();
            let ninv = norm_kind.apply(&binv);
            let c = lam_max * norm_kind.apply(&b) * norm_kind.tensor(&dinv) * ninv * p / lam_min;
            let variant = lam_max * norm_kind.tensor(&bwbinv) * ninv * p / lam_min;
            let adiag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(alpha.clone()));
            let a = model.a(w)?;
            let defect = norm_kind.apply(&(&b * a * &binv - &adiag)) / norm_kind.apply(&adiag);
            let tau = 1e-5 * norm(w).max(1e-3);
            let mut pw = DMatrix::zeros(model.m, model.m);
            for k in 0..model.m {
                let mut up = w.clone();
                let mut dn = w.clone();
                up[k] += tau;
                dn[k] -= tau;
                let (pu, pd) = (model.p_at(&up, &rule), model.p_at(&dn, &rule));
                for r in 0..model.m {
                    pw[(r, k)] = (pu[r] - pd[r]) / (2.0 * tau);
                }
            }
            let pw = norm_kind.apply(&(pw - &b)) / norm_kind.apply(&b);
            Ok(Row { c, variant, defect, lam_min, pw })
        })
        .collect::<Result<_>>()?;
    let (mut c, mut variant, mut worst) = (0.0f64, 0.0f64, 0usize);
    for (i, r) in rows.iter().enumerate() {
        if r.c > c {
            c = r.c;
            worst = i;
        }
        variant = variant.max(r.variant);
    }
    let lambda_min = rows.iter().map(|r| r.lam_min).fold(f64::INFINITY, f64::min);
    Ok(BmatReport {
        norm: norm_kind,
        c_measured: c,
        variant_c_measured: variant,
        worst_w: probes[worst].clone(),
        probes: probes.len(),
        similarity_defect: rows.iter().map(|r| r.defect).fold(0.0, f64::max),
        lambda_min,
        lambda0_ok: lambda_min >= model.lambda0 && model.lambda0 > 0.0,
        pw_defect: rows.iter().map(|r| r.pw).fold(0.0, f64::max),
        per_probe: rows.iter().map(|r| (r.c, r.variant)).collect(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    /// `(t_n, ‖residual‖_{L²})` per consecutive snapshot pair.
    pub steps: Vec<(f64, f64)>,
    pub max: f64,
    pub final_residual: f64,
}

fn interior(grid: &crate::grid::Grid, cell: usize) -> bool {
    let mi = grid.multi_index(cell);
    (0..grid.dim()).all(|d| mi[d] >= 2 && mi[d] + 2 < grid.cells()[d])
}

/// Residual of `P_t = Div(α DP) − Σ_d (∂_d B) B⁻¹ α ∂_d P` on consecutive
/// snapshots: `P_t` is a forward difference, the right side is taken at the
/// earlier snapshot with the solver's flux stencil, and the `L²` norm runs
/// over cells at least two cells from the boundary. The identity behind it
/// uses `P_W = B`, which holds for constant `B` and for `m = 1`.
pub fn transformed_residual(trajectory: &Trajectory, model: &DiagonalizableModel) -> Result<ResidualReport> {
    let snaps = &trajectory.snapshots;
    if snaps.len() < 2 {
        return Err(Error::Parameter("need at least two snapshots".into()));
    }
    let m = model.m;
    let alpha_model = {
        let (a1, a2, a3) = (model.clone(), model.clone(), model.clone());
        DiffusionModel::new(
            m,
            Arc::new(move |w| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(a1.alpha(w)))),
            Arc::new(move |w| a2.alpha(w).into_iter().fold(f64::INFINITY, f64::min)),
            Arc::new(move |w| a3.alpha(w).into_iter().fold(f64::NEG_INFINITY, f64::max)),
        )
    };
    let mut steps = Vec::with_capacity(snaps.len() - 1);
    let mut p_next = p_transform(&snaps[0].field, model)?;
    for pair in snaps.windows(2) {
        let (s0, s1) = (&pair[0], &pair[1]);
        let grid = *s0.field.grid();
        let dt = s1.time - s0.time;
        let p0 = p_next;
        p_next = p_transform(&s1.field, model)?;
        // Div(α DP) = P − (I + L) P with the flux stencil at dt = 1
        let mat = assemble(&alpha_model, &s0.field, 1.0, grid.boundary())?;
        let mut ap = vec![0.0; p0.values().len()];
        mat.apply(p0.values(), &mut ap);
        let dw = if model.constant { None } else { Some((gradient(&s0.field)?, gradient(&p0)?)) };
        let dim = grid.dim();
        let mut sq = Vec::new();
        for cell in (0..grid.len()).filter(|&c| interior(&grid, c)) {
            let w = s0.field.at(cell);
            let mut quad = vec![0.0; m];
            if let Some((dw, dp)) = &dw {
                let bw = model.b_w(w);
                let binv = model.b_inv(w)?;
                let alpha = model.alpha(w);
                for d in 0..dim {
                    let mut dbd = DMatrix::zeros(m, m);
                    for (k, slice) in bw.iter().enumerate() {
                        dbd += slice * dw.at(cell)[k * dim + d];
                    }
                    let adp = nalgebra::DVector::from_fn(m, |i, _| alpha[i] * dp.at(cell)[i * dim + d]);
                    let v = dbd * &binv * adp;
                    quad.iter_mut().zip(v.iter()).for_each(|(q, x)| *q += x);
                }
            }
            let mut r2 = 0.0;
            for c in 0..m {
                let i = cell * m + c;
                let pt = (p_next.values()[i] - p0.values()[i]) / dt;
                let div = p0.values()[i] - ap[i];
                r2 += (pt - div + quad[c]).powi(2);
            }
            sq.push(r2 * grid.cell_volume());
        }
        steps.push((s0.time, crate::numerics::pairwise_sum(&sq).sqrt()));
    }
    let max = steps.iter().map(|s| s.1).fold(0.0, f64::max);
    let final_residual = steps.last().map(|s| s.1).unwrap_or(0.0);
    Ok(ResidualReport { steps, max, final_residual })
}

#[derive(Clone, Debug, Serialize)]
pub struct MoserReport {
    pub p: f64,
    /// Condition constant measured on the nonzero values of `W₀`.
    pub c: f64,
    pub sup_p_inf: f64,
    pub p_lp_at_t: f64,
    /// `sup_{(T, T+1]} ‖P‖_∞ / ‖P(T)‖_{L^p}`
    pub ratio: f64,
    pub t: f64,
    pub domain_factor: f64,
    pub flags: Vec<String>,
    pub termination: crate::solver::Termination,
}

/// Runs `W_t = Div(B⁻¹αB DW)` to `T + 1` with snapshots every step and
/// compares the sup of `‖P‖_∞` over `(T, T+1]` with `‖P(T)‖_{L^p}`.
pub fn moser_experiment(
    model: &DiagonalizableModel,
    w0: &Field,
    config: &SolverConfig,
    p: f64,
    t: f64,
    norm_kind: MatrixNorm,
) -> Result<MoserReport> {
    if !(p >= 1.0) || !(t >= 0.0) {
        return Err(Error::Parameter(format!("need p ≥ 1 and T ≥ 0, got p = {p}, T = {t}")));
    }
    let mut cfg = config.clone();
    cfg.horizon = t + 1.0;
    cfg.stride = 1;
    // probe the condition on the data's own values
    let step = (w0.grid().len() / 512).max(1);
    let probes: Vec<Vec<f64>> = (0..w0.grid().len())
        .step_by(step)
        .map(|c| w0.at(c).to_vec())
        .filter(|w| norm(w) > 1e-12)
        .collect();
    let c = if probes.is_empty() { 0.0 } else { bmat_condition(model, &probes, norm_kind)?.c_measured };
    let mut flags = Vec::new();
    if p <= c + 1.0 {
        flags.push(format!("p = {p} does not exceed c + 1 = {}", c + 1.0));
    }
    let traj = simulate(&model.diffusion_model(), &cfg, w0)?;
    let tol = 1e-9 * cfg.dt;
    let at_t = traj
        .snapshots
        .iter()
        .find(|s| (s.time - t).abs() <= tol)
        .ok_or_else(|| Error::Parameter(format!("T = {t} is not on the time grid of dt = {}", cfg.dt)))?;
    let p_lp_at_t = p_transform(&at_t.field, model)?.lp_norm(p);
    let mut sup_p_inf: f64 = 0.0;
    for s in traj.snapshots.iter().filter(|s| s.time > t + tol) {
        sup_p_inf = sup_p_inf.max(p_transform(&s.field, model)?.norm().max_abs());
    }
    if !traj.is_complete() {
        flags.push("trajectory stopped before T + 1".into());
    }
    Ok(MoserReport {
        p,
        c,
        sup_p_inf,
        p_lp_at_t,
        ratio: if p_lp_at_t > 0.0 { sup_p_inf / p_lp_at_t } else { f64::NAN },
        t,
        domain_factor: w0.grid().volume().powf(-1.0 / p),
        flags,
        termination: traj.termination.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryKind, Grid};

    fn b0() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0])
    }

    #[test]
    fn constant_b_transform_is_bw() {
        let model = DiagonalizableModel::constant(b0(), vec![1.0, 0.5]).unwrap();
        let g = Grid::unit(1, 8, BoundaryKind::Neumann).unwrap();
        let w = Field::from_fn(g, 2, |x, out| {
            out[0] = x[0];
            out[1] = 1.0 - x[0] * x[0];
        });
        let p = p_transform(&w, &model).unwrap();
        for c in 0..8 {
            let v = w.at(c);
            assert_eq!(p.at(c)[0], 1.0 * v[0] + 0.5 * v[1]);
            assert_eq!(p.at(c)[1], 0.2 * v[0] + 1.0 * v[1]);
        }
        let rep = bmat_condition(&model, &probe_points(2, 0.1, 3.0, 4, 6, 1).unwrap(), MatrixNorm::Operator2).unwrap();
        assert_eq!(rep.c_measured, 0.0);
        assert_eq!(rep.variant_c_measured, 0.0);
        assert!(rep.similarity_defect < 1e-14 && rep.lambda0_ok);
    }

    #[test]
    fn scalar_power_closed_form() {
        let rule = GradedRule::default();
        for l in [0.5, 1.0, 2.5] {
            let model = DiagonalizableModel::power(DMatrix::identity(1, 1), l, vec![1.0]).unwrap();
            for w in [0.3, -1.7, 4.0] {
                let p = model.p_at(&[w], &rule)[0];
                let exact = w.abs().powf(l + 1.0) / (l + 1.0);
                assert!((p.abs() - exact).abs() <= 1e-10 * exact, "{l} {w}");
            }
            let rep = bmat_condition(&model, &probe_points(1, 0.1, 5.0, 5, 1, 0).unwrap(), MatrixNorm::Operator2).unwrap();
            assert!((rep.c_measured - l / (l + 1.0)).abs() < 1e-9, "{}", rep.c_measured);
            assert!((rep.variant_c_measured - l / (l + 1.0)).abs() < 1e-9);
            assert!(rep.pw_defect < 1e-6);
        }
    }

    #[test]
    fn singular_b_names_the_point() {
        let model = DiagonalizableModel::power(DMatrix::identity(2, 2), 1.0, vec![1.0, 1.0]).unwrap();
        match bmat_condition(&model, &[vec![0.0, 0.0]], MatrixNorm::Operator2) {
            Err(Error::Singular(w)) => assert_eq!(w, vec![0.0, 0.0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn radial_derivative_is_bw() {
        let model = DiagonalizableModel::power(b0(), 1.5, vec![1.0, 2.0]).unwrap();
        let rule = GradedRule::default();
        let w = [0.7, -0.4];
        let bw = model.b(&w) * nalgebra::DVector::from_column_slice(&w);
        let p0 = model.p_at(&w, &rule);
        let errs: Vec<f64> = [1e-3, 5e-4]
            .iter()
            .map(|tau| {
                let up: Vec<f64> = w.iter().map(|x| x * (1.0 + tau)).collect();
                let p1 = model.p_at(&up, &rule);
                (0..2).map(|i| ((p1[i] - p0[i]) / tau - bw[i]).abs()).fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[1] < 0.6 * errs[0], "{errs:?}");
    }

    #[test]
    fn moser_constant_data() {
        let model = DiagonalizableModel::constant(b0(), vec![1.0, 0.5]).unwrap();
        let g = Grid::new(&[2.0], &[16], BoundaryKind::Neumann).unwrap();
        let w0 = Field::constant(g, &[1.0, 2.0]);
        let cfg = SolverConfig { dt: 0.125, ..Default::default() };
        let r = moser_experiment(&model, &w0, &cfg, 2.0, 0.5, MatrixNorm::Operator2).unwrap();
        assert!((r.ratio - r.domain_factor).abs() < 1e-12 * r.ratio);
        assert!(r.flags.is_empty());
        let low = moser_experiment(&model, &w0, &cfg, 1.0, 0.5, MatrixNorm::Operator2).unwrap();
        assert!(!low.flags.is_empty());
    }
}
