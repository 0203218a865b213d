use super::model::DiffusionModel;
use crate::error::{Error, Result};
use crate::grid::{gradient, BoundaryKind, Field, Grid};
use crate::numerics::{solve, SparseMatrix};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Values beyond this magnitude count as blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e150;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    SemiImplicit,
    Explicit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Added to the model's own regularization.
    pub epsilon: f64,
    pub dt: f64,
    pub horizon: f64,
    pub scheme: Scheme,
    pub boundary: BoundaryKind,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Snapshot every `stride` steps (the final state is always kept).
    pub stride: usize,
    /// Exponents `q` for the per-step `‖DW‖_{L^q}` diagnostics.
    pub gradient_exponents: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            dt: 1e-3,
            horizon: 0.1,
            scheme: Scheme::SemiImplicit,
            boundary: BoundaryKind::Neumann,
            tolerance: 1e-13,
            max_iterations: 20_000,
            stride: 1,
            gradient_exponents: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::Parameter(format!("T must be ≥ 0, got {}", self.horizon)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::Parameter("ε must be ≥ 0".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Parameter("linear-solver tolerance must be positive".into()));
        }
        if self.stride == 0 {
            return Err(Error::Parameter("stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct State {
    pub time: f64,
    pub field: Field,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct StepStats {
    pub iterations: usize,
    pub residual: f64,
    /// Explicit step larger than `h²/(2N max Λ)`.
    pub unstable_dt: bool,
}

/// `I + dt L` where `L W = −Div((a(W) + εId) DW)` in flux form with
/// face coefficients `(a(W_L) + a(W_R))/2`. Homogeneous Dirichlet faces use
/// the odd ghost `−W` and the cell's own coefficient.
pub fn assemble(model: &DiffusionModel, field: &Field, dt: f64, boundary: BoundaryKind) -> Result<SparseMatrix> {
    let grid = *field.grid();
    let m = model.components();
    if field.components() != m {
        return Err(Error::Shape(format!("state has {} components, model {m}", field.components())));
    }
    let coef: Vec<DMatrix<f64>> = (0..grid.len()).map(|i| model.a(field.at(i))).collect();
    let dim = grid.dim();
    let n = grid.len() * m;
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    let mut blocks: Vec<(usize, DMatrix<f64>)> = Vec::with_capacity(2 * dim + 1);
    for cell in 0..grid.len() {
        blocks.clear();
        let mut diag = DMatrix::<f64>::identity(m, m);
        let mi = grid.multi_index(cell);
        for d in 0..dim {
            let s = grid.stride(d);
            let w = dt / (grid.spacing()[d] * grid.spacing()[d]);
            for (neighbor, exists) in [(cell.wrapping_sub(s), mi[d] > 0), (cell + s, mi[d] + 1 < grid.cells()[d])] {
                if exists {
                    let face = (&coef[cell] + &coef[neighbor]) * (0.5 * w);
                    diag += &face;
                    blocks.push((neighbor, -face));
                } else if boundary == BoundaryKind::Dirichlet {
                    diag += &coef[cell] * (2.0 * w);
                }
            }
        }
        blocks.push((cell, diag));
        blocks.sort_by_key(|b| b.0);
        for r in 0..m {
            for (nb, block) in &blocks {
                for c in 0..m {
                    cols.push(nb * m + c);
                    vals.push(block[(r, c)]);
                }
            }
            row_ptr.push(cols.len());
        }
    }
    Ok(SparseMatrix { n, row_ptr, cols, vals, block: m })
}

fn reaction_vector(model: &DiffusionModel, field: &Field, t: f64) -> Vec<f64> {
    let grid = field.grid();
    let m = model.components();
    let mut out = vec![0.0; grid.len() * m];
    if model.has_reaction() {
        for cell in 0..grid.len() {
            let x = grid.center(cell);
            model.reaction_at(field.at(cell), &x[..grid.dim()], t, &mut out[cell * m..(cell + 1) * m]);
        }
    }
    out
}

/// Largest stable explicit step `h_min² / (2N max Λ)` for the current state.
pub fn explicit_stability_bound(model: &DiffusionModel, field: &Field) -> f64 {
    let grid = field.grid();
    let hmin = grid.spacing().iter().cloned().fold(f64::INFINITY, f64::min);
    let lmax = (0..grid.len()).map(|i| model.big_lambda(field.at(i))).fold(0.0, f64::max);
    if lmax <= 0.0 {
        f64::INFINITY
    } else {
        hmin * hmin / (2.0 * grid.dim() as f64 * lmax)
    }
}

fn blown_up(values: &[f64]) -> bool {
    values.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP_THRESHOLD)
}

/// One step of length `dt`. `model` must already carry the total `ε`.
pub fn step_with(model: &DiffusionModel, state: &State, dt: f64, config: &SolverConfig) -> Result<(State, StepStats)> {
    let field = &state.field;
    if !field.is_finite() {
        return Err(Error::BlowUp { time: state.time });
    }
    let mat = assemble(model, field, dt, config.boundary)?;
    let react = reaction_vector(model, field, state.time);
    let w = field.values();
    let mut stats = StepStats::default();
    let next: Vec<f64> = match config.scheme {
        Scheme::SemiImplicit => {
            let rhs: Vec<f64> = w.iter().zip(&react).map(|(a, r)| a + dt * r).collect();
            let mut x = w.to_vec();
            let s = solve(&mat, &rhs, &mut x, config.tolerance, config.max_iterations)?;
            stats.iterations = s.iterations;
            stats.residual = s.relative_residual;
            x
        }
        Scheme::Explicit => {
            stats.unstable_dt = dt > explicit_stability_bound(model, field);
            let mut mw = vec![0.0; w.len()];
            mat.apply(w, &mut mw);
            (0..w.len()).map(|i| 2.0 * w[i] - mw[i] + dt * react[i]).collect()
        }
    };
    let time = state.time + dt;
    if blown_up(&next) {
        return Err(Error::BlowUp { time });
    }
    let grid = field.grid().with_boundary(config.boundary);
    Ok((State { time, field: Field::new(grid, field.components(), next)? }, stats))
}

/// One step of `config.dt` with the model regularized by `config.epsilon`.
pub fn step(state: &State, model: &DiffusionModel, config: &SolverConfig) -> Result<(State, StepStats)> {
    config.validate()?;
    let model = model.regularize(config.epsilon)?;
    step_with(&model, state, config.dt, config)
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub field: Field,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub mass: Vec<f64>,
    pub l2: f64,
    pub min: f64,
    pub max: f64,
    /// `‖DW‖_{L^q}` for each configured `q`.
    pub grad_norms: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    BlowUp { time: f64 },
    SolverFailure { time: f64, message: String },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub termination: Termination,
    pub flags: Vec<String>,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory holds the initial state")
    }

    pub fn is_complete(&self) -> bool {
        self.termination == Termination::Completed
    }

    /// Turns an early termination into the matching error.
    pub fn into_result(self) -> Result<Self> {
        match &self.termination {
            Termination::Completed => Ok(self),
            Termination::BlowUp { time } => Err(Error::BlowUp { time: *time }),
            Termination::SolverFailure { message, .. } => Err(Error::Domain(message.clone())),
        }
    }
}

fn diagnostics(field: &Field, step: usize, time: f64, exps: &[f64], stats: StepStats) -> Result<StepDiagnostics> {
    let grad_norms = if exps.is_empty() {
        Vec::new()
    } else {
        let g = gradient(field)?;
        exps.iter().map(|&q| g.lp_norm(q)).collect()
    };
    Ok(StepDiagnostics {
        step,
        time,
        mass: field.mass(),
        l2: field.l2_norm(),
        min: field.min(),
        max: field.max(),
        grad_norms,
        iterations: stats.iterations,
        residual: stats.residual,
    })
}

/// Number of steps and the time after step `k` for horizon `T`.
fn schedule(dt: f64, horizon: f64) -> (usize, impl Fn(usize) -> f64) {
    let n = if horizon == 0.0 { 0 } else { ((horizon / dt) - 1e-9).ceil().max(1.0) as usize };
    (n, move |k: usize| if k == n { horizon } else { k as f64 * dt })
}

/// Integrates from `w0` to `config.horizon`. Early termination (blow-up or
/// linear-solver failure) is reported in the trajectory, which keeps every
/// state computed before it.
pub fn simulate(model: &DiffusionModel, config: &SolverConfig, w0: &Field) -> Result<Trajectory> {
    config.validate()?;
    let model = model.regularize(config.epsilon)?;
    if w0.components() != model.components() {
        return Err(Error::Shape(format!(
            "initial state has {} components, model {}",
            w0.components(),
            model.components()
        )));
    }
    if !w0.is_finite() {
        return Err(Error::NonFinite("initial state".into()));
    }
    let mut flags = Vec::new();
    if model.is_unregularized_degenerate() {
        flags.push("degenerate model run with ε = 0".to_string());
    }
    let grid: Grid = w0.grid().with_boundary(config.boundary);
    let mut state = State { time: 0.0, field: w0.clone().with_grid(grid)? };
    let exps = &config.gradient_exponents;
    let mut snapshots = vec![Snapshot { step: 0, time: 0.0, field: state.field.clone() }];
    let mut diags = vec![diagnostics(&state.field, 0, 0.0, exps, StepStats::default())?];
    let (n, time_of) = schedule(config.dt, config.horizon);
    let mut termination = Termination::Completed;
    let mut unstable_flagged = false;
    for k in 1..=n {
        let t_next = time_of(k);
        let dt = t_next - state.time;
        match step_with(&model, &state, dt, config) {
            Ok((mut next, stats)) => {
                next.time = t_next;
                if stats.unstable_dt && !unstable_flagged {
                    flags.push(format!("explicit dt = {dt} exceeds the stability bound"));
                    unstable_flagged = true;
                }
                diags.push(diagnostics(&next.field, k, t_next, exps, stats)?);
                if k % config.stride == 0 || k == n {
                    snapshots.push(Snapshot { step: k, time: t_next, field: next.field.clone() });
                }
                state = next;
            }
            Err(Error::BlowUp { .. }) => {
                termination = Termination::BlowUp { time: t_next };
                break;
            }
            Err(e @ Error::LinearSolve { .. }) => {
                termination = Termination::SolverFailure { time: t_next, message: e.to_string() };
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if !matches!(termination, Termination::Completed) {
        let last = snapshots.last().map(|s| s.step).unwrap_or(0);
        let cur = diags.last().map(|d| d.step).unwrap_or(0);
        if cur != last {
            snapshots.push(Snapshot { step: cur, time: state.time, field: state.field.clone() });
        }
    }
    Ok(Trajectory { snapshots, diagnostics: diags, termination, flags })
}

#[derive(Clone, Debug, Serialize)]
pub struct FluxBound {
    /// Minimum over cells of `(|aDW| − λ|DW|) / (|aDW| + λ|DW|)`.
    pub worst_relative_gap: f64,
    pub violations: usize,
}

/// Pointwise check of `|a(W)DW| ≥ λ(W)|DW|` (Frobenius norms of the
/// `m × N` gradient block). A cell violates when the relative gap is below
/// `−tol`.
pub fn flux_lower_bound(model: &DiffusionModel, field: &Field, tol: f64) -> Result<FluxBound> {
    let grid = field.grid();
    let (m, dim) = (field.components(), grid.dim());
    let g = gradient(field)?;
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for cell in 0..grid.len() {
        let w = field.at(cell);
        let a = model.a(w);
        let dw = DMatrix::from_row_slice(m, dim, g.at(cell));
        let lhs = (&a * &dw).norm();
        let rhs = model.lambda(w) * dw.norm();
        let den = lhs + rhs;
        let gap = if den > 0.0 { (lhs - rhs) / den } else { 0.0 };
        worst = worst.min(gap);
        if gap < -tol {
            violations += 1;
        }
    }
    Ok(FluxBound { worst_relative_gap: worst, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::model::Reaction;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn line(n: usize, bc: BoundaryKind) -> Grid {
        Grid::unit(1, n, bc).unwrap()
    }

    #[test]
    fn constant_state_is_fixed_point() {
        let g = Grid::unit(2, 8, BoundaryKind::Neumann).unwrap();
        let w0 = Field::constant(g, &[0.7, -0.2]);
        let cfg = SolverConfig { dt: 0.01, horizon: 0.05, ..Default::default() };
        for model in [DiffusionModel::porous_media(2, 2.0), DiffusionModel::skew_porous(2, 1.0, 0.5)] {
            let traj = simulate(&model, &cfg, &w0).unwrap();
            for (a, b) in traj.last().field.values().iter().zip(w0.values()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn horizon_zero_keeps_initial_state() {
        let g = line(8, BoundaryKind::Neumann);
        let w0 = Field::scalar_from_fn(g, |x| x[0]);
        let traj = simulate(&DiffusionModel::heat(1), &SolverConfig { horizon: 0.0, ..Default::default() }, &w0).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.last().field, w0);
    }

    #[test]
    fn dirichlet_heat_matches_fourier_mode() {
        let n = 64;
        let g = line(n, BoundaryKind::Dirichlet);
        let w0 = Field::scalar_from_fn(g, |x| (PI * x[0]).sin());
        let cfg = SolverConfig { dt: 1e-4, horizon: 0.05, boundary: BoundaryKind::Dirichlet, ..Default::default() };
        let traj = simulate(&DiffusionModel::heat(1), &cfg, &w0).unwrap();
        let t = traj.last().time;
        let exact = Field::scalar_from_fn(g, |x| (-PI * PI * t).exp() * (PI * x[0]).sin());
        let err = traj.last().field.sub(&exact).unwrap().max_abs();
        assert!(err < 2e-3, "{err}");
    }

    #[test]
    fn neumann_mass_is_conserved() {
        let g = Grid::unit(2, 24, BoundaryKind::Neumann).unwrap();
        let w0 = Field::from_fn(g, 2, |x, o| {
            o[0] = 0.5 + 0.4 * (2.0 * PI * x[0]).cos() * x[1];
            o[1] = 0.3 + x[0] * x[1];
        });
        let cfg = SolverConfig { dt: 2e-3, horizon: 0.02, ..Default::default() };
        for model in [DiffusionModel::porous_media(2, 2.0).regularize(1e-3).unwrap(), DiffusionModel::skew_porous(2, 1.0, 0.4)] {
            let traj = simulate(&model, &cfg, &w0).unwrap();
            for pair in traj.diagnostics.windows(2) {
                for c in 0..2 {
                    let drift = (pair[1].mass[c] - pair[0].mass[c]).abs() / pair[0].mass[c].abs();
                    assert!(drift < 1e-12, "drift {drift}");
                }
            }
        }
    }

    #[test]
    fn explicit_and_semi_implicit_agree_for_small_dt() {
        let g = line(32, BoundaryKind::Neumann);
        let w0 = Field::scalar_from_fn(g, |x| 1.0 + 0.5 * (PI * x[0]).cos());
        let model = DiffusionModel::porous_media(1, 1.0).regularize(1e-3).unwrap();
        let mut errs = Vec::new();
        for dt in [2e-4, 1e-4] {
            let semi = simulate(&model, &SolverConfig { dt, horizon: 0.02, ..Default::default() }, &w0).unwrap();
            let expl = simulate(&model, &SolverConfig { dt, horizon: 0.02, scheme: Scheme::Explicit, ..Default::default() }, &w0)
                .unwrap();
            assert!(expl.flags.is_empty());
            errs.push(semi.last().field.sub(&expl.last().field).unwrap().max_abs());
        }
        assert!(errs[1] < errs[0] * 0.6, "{errs:?}");
    }

    #[test]
    fn explicit_blow_up_is_reported() {
        let g = line(32, BoundaryKind::Neumann);
        let w0 = Field::scalar_from_fn(g, |x| (7.0 * x[0]).sin());
        let cfg = SolverConfig { dt: 0.01, horizon: 50.0, scheme: Scheme::Explicit, ..Default::default() };
        let traj = simulate(&DiffusionModel::heat(1), &cfg, &w0).unwrap();
        assert!(matches!(traj.termination, Termination::BlowUp { .. }));
        assert!(!traj.flags.is_empty());
        assert!(traj.snapshots.len() > 1);
        assert!(traj.into_result().is_err());
    }

    #[test]
    fn reaction_is_explicit() {
        let g = line(8, BoundaryKind::Neumann);
        let w0 = Field::constant(g, &[1.0]);
        let model = DiffusionModel::heat(1).with_reaction(Reaction::Potential(Arc::new(|_, _| 1.0)));
        let cfg = SolverConfig { dt: 0.1, horizon: 0.3, ..Default::default() };
        let traj = simulate(&model, &cfg, &w0).unwrap();
        assert!((traj.last().field.get(0, 0) - 1.1f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn flux_bound_holds_for_porous_media() {
        let g = Grid::unit(2, 16, BoundaryKind::Neumann).unwrap();
        let w = Field::scalar_from_fn(g, |x| 0.2 + x[0] * x[1]);
        let model = DiffusionModel::porous_media(1, 2.0);
        let r = flux_lower_bound(&model, &w, 1e-12).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.worst_relative_gap.abs() < 1e-14);
    }

    #[test]
    fn degenerate_unregularized_run_is_flagged() {
        let g = line(16, BoundaryKind::Neumann);
        let w0 = Field::scalar_from_fn(g, |x| 0.5 + 0.5 * x[0]);
        let cfg = SolverConfig { dt: 1e-3, horizon: 2e-3, ..Default::default() };
        let traj = simulate(&DiffusionModel::porous_media(1, 2.0), &cfg, &w0).unwrap();
        assert!(!traj.flags.is_empty());
        let cfg = SolverConfig { epsilon: 1e-2, ..cfg };
        assert!(simulate(&DiffusionModel::porous_media(1, 2.0), &cfg, &w0).unwrap().flags.is_empty());
    }
}
