//! Monotonicity conditions on `Φ`, the Grönwall bound, the gradient pairing
//! and two-solution experiments for `u_t = Div(DΦ(u)) + g(x,t) u`.

use crate::error::{Error, Result};
use crate::grid::{gradient, Field};
use crate::numerics::{frobenius, sym_eig_extremes};
use crate::solver::{simulate, DiffusionModel, PotentialMap, Reaction, SolverConfig, Termination};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type MatFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
/// `(w, v) ↦ Φ_uu(w) v`
type SecondFn = Arc<dyn Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync>;

/// `Φ: ℝ^m → ℝ^m` with its Jacobian `Φ_u`. A nonlinearity given only in
/// matrix form `Φ̂(u)` (so that `Div(Φ̂(u)Du)`) has no `Φ` and uses `Φ̂` as
/// the Jacobian.
#[derive(Clone)]
pub struct Nonlinearity {
    m: usize,
    name: String,
    phi: Option<VecFn>,
    jacobian: MatFn,
    second: Option<SecondFn>,
}

impl std::fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Nonlinearity({}, m = {})", self.name, self.m)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Nonlinearity {
    pub fn new(m: usize, name: impl Into<String>, phi: VecFn, jacobian: MatFn) -> Self {
        Self { m, name: name.into(), phi: Some(phi), jacobian, second: None }
    }

    /// Matrix form `Φ̂(u)`; conditions are checked on `Φ̂` directly.
    pub fn from_matrix_form(m: usize, name: impl Into<String>, hat: MatFn) -> Self {
        Self { m, name: name.into(), phi: None, jacobian: hat, second: None }
    }

    /// Scalar `Φ(u) = |u|^k u`.
    pub fn scalar_power(k: f64) -> Self {
        Self {
            m: 1,
            name: format!("|u|^{k} u"),
            phi: Some(Arc::new(move |u| vec![u[0].abs().powf(k) * u[0]])),
            jacobian: Arc::new(move |u| DMatrix::from_element(1, 1, (k + 1.0) * u[0].abs().powf(k))),
            second: Some(Arc::new(move |w, v| {
                let x = w[0];
                let d = if x == 0.0 { 0.0 } else { (k + 1.0) * k * x.abs().powf(k - 2.0) * x };
                DMatrix::from_element(1, 1, d * v[0])
            })),
        }
    }

    /// Vector `Φ(u) = |u|^k u`.
    pub fn vector_power(m: usize, k: f64) -> Self {
        Self::new(
            m,
            format!("|u|^{k} u (m = {m})"),
            Arc::new(move |u| {
                let r = norm(u).powf(k);
                u.iter().map(|x| r * x).collect()
            }),
            Arc::new(move |u| {
                let n = norm(u);
                let mut j = DMatrix::identity(m, m) * n.powf(k);
                if n > 0.0 {
                    let c = k * n.powf(k - 2.0);
                    for a in 0..m {
                        for b in 0..m {
                            j[(a, b)] += c * u[a] * u[b];
                        }
                    }
                }
                j
            }),
        )
    }

    /// Componentwise `Φ_i(u) = |u_i|^k u_i`.
    pub fn component_power(m: usize, k: f64) -> Self {
        Self::new(
            m,
            format!("|u_i|^{k} u_i (m = {m})"),
            Arc::new(move |u| u.iter().map(|x| x.abs().powf(k) * x).collect()),
            Arc::new(move |u| DMatrix::from_fn(m, m, |a, b| if a == b { (k + 1.0) * u[a].abs().powf(k) } else { 0.0 })),
        )
    }

    /// Scalar `Φ(u) = u²`.
    pub fn square() -> Self {
        Self::new(
            1,
            "u^2",
            Arc::new(|u| vec![u[0] * u[0]]),
            Arc::new(|u| DMatrix::from_element(1, 1, 2.0 * u[0])),
        )
    }

    /// `Φ(u) = u`.
    pub fn identity(m: usize) -> Self {
        Self::new(m, format!("u (m = {m})"), Arc::new(|u| u.to_vec()), Arc::new(move |_| DMatrix::identity(m, m)))
    }

    /// `cΦ`.
    pub fn scaled(&self, c: f64) -> Self {
        let (phi, jac, second) = (self.phi.clone(), self.jacobian.clone(), self.second.clone());
        Self {
            m: self.m,
            name: format!("{c} * ({})", self.name),
            phi: phi.map(|p| -> VecFn { Arc::new(move |u| p(u).into_iter().map(|x| c * x).collect()) }),
            jacobian: Arc::new(move |u| jac(u) * c),
            second: second.map(|s| -> SecondFn { Arc::new(move |w, v| s(w, v) * c) }),
        }
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn phi(&self, u: &[f64]) -> Result<Vec<f64>> {
        match &self.phi {
            Some(p) => Ok(p(u)),
            None => Err(Error::Parameter(format!("{} is given only in matrix form", self.name))),
        }
    }

    pub fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        (self.jacobian)(u)
    }

    /// `Φ_uu(w) v`: analytic when available, otherwise the central difference
    /// of the Jacobian along `v` with step `τ`.
    pub fn second_directional(&self, w: &[f64], v: &[f64], tau: f64) -> DMatrix<f64> {
        if let Some(s) = &self.second {
            return s(w, v);
        }
        let plus: Vec<f64> = w.iter().zip(v).map(|(a, b)| a + tau * b).collect();
        let minus: Vec<f64> = w.iter().zip(v).map(|(a, b)| a - tau * b).collect();
        (self.jacobian(&plus) - self.jacobian(&minus)) / (2.0 * tau)
    }

    /// Largest entry gap between the Jacobian and central differences of `Φ`
    /// with step `step`, over the points.
    pub fn jacobian_consistency(&self, points: &[Vec<f64>], step: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for u in points {
            let j = self.jacobian(u);
            for b in 0..self.m {
                let mut up = u.clone();
                let mut dn = u.clone();
                up[b] += step;
                dn[b] -= step;
                let (fp, fm) = (self.phi(&up)?, self.phi(&dn)?);
                for a in 0..self.m {
                    worst = worst.max(((fp[a] - fm[a]) / (2.0 * step) - j[(a, b)]).abs());
                }
            }
        }
        Ok(worst)
    }
}

/// `(t, v)` probes: `t = (j + ½)/n_t` and `v` on a radial × angular lattice.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeSet {
    pub ts: Vec<f64>,
    pub vs: Vec<Vec<f64>>,
    pub v_max: f64,
}

impl ProbeSet {
    /// Directions are `±1` for `m = 1`, equispaced angles for `m = 2` and
    /// seeded random unit vectors for `m ≥ 3`.
    pub fn lattice(m: usize, v_max: f64, radial: usize, angular: usize, seed: u64) -> Self {
        let ts = (0..32).map(|j| (j as f64 + 0.5) / 32.0).collect();
        let dirs: Vec<Vec<f64>> = match m {
            1 => vec![vec![1.0], vec![-1.0]],
            2 => (0..angular)
                .map(|a| {
                    let th = 2.0 * std::f64::consts::PI * a as f64 / angular as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect(),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..angular)
                    .map(|_| loop {
                        let v: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
                        let n = norm(&v);
                        if n > 1e-3 && n <= 1.0 {
                            break v.iter().map(|x| x / n).collect();
                        }
                    })
                    .collect()
            }
        };
        let mut vs = Vec::new();
        for i in 1..=radial {
            let r = v_max * i as f64 / radial as f64;
            for d in &dirs {
                vs.push(d.iter().map(|x| r * x).collect());
            }
        }
        Self { ts, vs, v_max }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub t: f64,
    pub v: Vec<f64>,
    /// Smallest eigenvalue of the symmetric part of `Φ_uu(tv)v`.
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub phi_u_zero: f64,
    pub phi_u_zero_ok: bool,
    pub semidefinite_ok: bool,
    pub worst: Option<Witness>,
    pub probes: usize,
    pub v_max: f64,
    pub pass: bool,
}

/// `Φ_u(0) = 0` and `Φ_uu(tv)v ⪰ 0` on the probe set. A probe fails when the
/// smallest eigenvalue of the symmetric part is below `−10⁻⁸ × scale`.
pub fn monotonicity_check(phi: &Nonlinearity, probes: &ProbeSet) -> Result<MonotonicityReport> {
    let m = phi.components();
    if probes.vs.iter().any(|v| v.len() != m) {
        return Err(Error::Shape("probe v has the wrong component count".into()));
    }
    let zero = vec![0.0; m];
    let phi_u_zero = frobenius(&phi.jacobian(&zero));
    let phi_u_zero_ok = phi_u_zero <= 1e-8;
    let mut worst: Option<Witness> = None;
    let mut worst_scaled = f64::INFINITY;
    let mut semidefinite_ok = true;
    for &t in &probes.ts {
        for v in &probes.vs {
            let w: Vec<f64> = v.iter().map(|x| t * x).collect();
            let mat = phi.second_directional(&w, v, 1e-5 * t);
            let (lo, _) = sym_eig_extremes(&mat);
            let scale = 1f64.max(frobenius(&mat)).max(frobenius(&phi.jacobian(&w)) * norm(v) / norm(&w).max(1e-300) * 1e-5);
            let scaled = lo / scale;
            if lo < -1e-8 * scale {
                semidefinite_ok = false;
            }
            if scaled < worst_scaled {
                worst_scaled = scaled;
                worst = Some(Witness { t, v: v.clone(), min_eigenvalue: lo });
            }
        }
    }
    Ok(MonotonicityReport {
        phi_u_zero,
        phi_u_zero_ok,
        semidefinite_ok,
        worst,
        probes: probes.ts.len() * probes.vs.len(),
        v_max: probes.v_max,
        pass: phi_u_zero_ok && semidefinite_ok,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingReport {
    /// `min_x ⟨D(Φ(a) − Φ(b)), D(a − b)⟩`
    pub min: f64,
    pub argmin_cell: usize,
    /// `∫⟨D(Φ(a) − Φ(b)), D(a − b)⟩`
    pub integral: f64,
}

/// Pointwise pairing `⟨D(Φ(a) − Φ(b)), D(a − b)⟩` summed over components and
/// axes, with its minimum over cells.
pub fn pairing_inequality(phi: &Nonlinearity, a: &Field, b: &Field) -> Result<PairingReport> {
    a.check_compatible(b)?;
    a.check_same_grid(b)?;
    let m = phi.components();
    if a.components() != m {
        return Err(Error::Shape(format!("fields have {} components, Φ has {m}", a.components())));
    }
    let grid = *a.grid();
    let mut diff = Vec::with_capacity(grid.len() * m);
    for cell in 0..grid.len() {
        let (pa, pb) = (phi.phi(a.at(cell))?, phi.phi(b.at(cell))?);
        diff.extend(pa.iter().zip(&pb).map(|(x, y)| x - y));
    }
    let dphi = gradient(&Field::new(grid, m, diff)?)?;
    let dw = gradient(&a.sub(b)?)?;
    let pairing = dphi.zip_with(&dw, |x, y| x * y)?.map_cells(|c| c.iter().sum());
    let (mut min, mut arg) = (f64::INFINITY, 0);
    for (i, &p) in pairing.values().iter().enumerate() {
        if p < min {
            min = p;
            arg = i;
        }
    }
    let integral = crate::grid::integrate(&pairing, None)?;
    Ok(PairingReport { min, argmin_cell: arg, integral })
}

/// `e^{∫₀ᵗ q}[y₀ + c]` with the trapezoid rule on the samples `(times, q)`,
/// linearly interpolated at `t`.
pub fn gronwall_bound(y0: f64, times: &[f64], q: &[f64], c: f64, t: f64) -> Result<f64> {
    if times.len() != q.len() || times.is_empty() {
        return Err(Error::Shape("q samples and times must have equal nonzero length".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("sample times must increase strictly".into()));
    }
    if t < times[0] || t > times[times.len() - 1] * (1.0 + 1e-12) {
        return Err(Error::Range(format!("t = {t} outside the sampled interval")));
    }
    let mut integral = 0.0;
    for k in 1..times.len() {
        let (t0, t1) = (times[k - 1], times[k]);
        if t0 >= t {
            break;
        }
        if t1 <= t {
            integral += 0.5 * (t1 - t0) * (q[k - 1] + q[k]);
        } else {
            let qt = q[k - 1] + (q[k] - q[k - 1]) * (t - t0) / (t1 - t0);
            integral += 0.5 * (t - t0) * (q[k - 1] + qt);
        }
    }
    Ok(integral.exp() * (y0 + c))
}

#[derive(Clone, Debug, Serialize)]
pub struct DeviationRow {
    pub time: f64,
    /// `‖u − v‖²_{L²}`
    pub w_sq: f64,
    /// `exp(2∫₀ᵗ sup_x g) ‖w(0)‖²`
    pub envelope: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeviationReport {
    pub rows: Vec<DeviationRow>,
    /// `max (‖w‖² − envelope)/envelope` clipped at 0.
    pub max_relative_violation: f64,
    pub violations: usize,
    pub monotone: bool,
    pub termination: Termination,
    pub flags: Vec<String>,
}

/// Diffusion model `a(W) = Φ_u(W)` with reaction `g(x,t) W`.
pub fn model_for(phi: &Nonlinearity, g: PotentialMap) -> DiffusionModel {
    let jac = phi.jacobian.clone();
    let (j1, j2) = (jac.clone(), jac.clone());
    DiffusionModel::new(
        phi.components(),
        Arc::new(move |w| jac(w)),
        Arc::new(move |w| sym_eig_extremes(&j1(w)).0),
        Arc::new(move |w| sym_eig_extremes(&j2(w)).1),
    )
    .with_reaction(Reaction::Potential(g))
    .with_preset(crate::solver::Preset::Custom(format!("Div(DΦ(u)) + g u, Φ = {}", phi.name())))
}

/// Runs `u` from `u0` and `v` from `v0` and compares `‖u − v‖²` with the
/// envelope. The factor 2 in the exponent comes from `d/dt ∫|w|² = 2∫w·w_t`.
pub fn two_solution_experiment(
    phi: &Nonlinearity,
    g: PotentialMap,
    u0: &Field,
    v0: &Field,
    config: &SolverConfig,
    probes: &ProbeSet,
) -> Result<DeviationReport> {
    u0.check_compatible(v0)?;
    let mono = monotonicity_check(phi, probes)?;
    let model = model_for(phi, g.clone());
    let (tu, tv) = rayon::join(|| simulate(&model, config, u0), || simulate(&model, config, v0));
    let (tu, tv) = (tu?, tv?);
    let mut flags = Vec::new();
    if !mono.pass {
        flags.push("Φ fails the monotonicity check".to_string());
    }
    let termination = if !tu.is_complete() {
        tu.termination.clone()
    } else {
        tv.termination.clone()
    };
    // sup_x g on the step grid
    let grid = *u0.grid();
    let steps: Vec<f64> = tu.diagnostics.iter().map(|d| d.time).collect();
    let sup_g: Vec<f64> = steps
        .iter()
        .map(|&t| {
            (0..grid.len())
                .map(|i| g(&grid.center(i)[..grid.dim()], t))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let q: Vec<f64> = sup_g.iter().map(|s| 2.0 * s).collect();
    let w0 = u0.sub(v0)?.l2_norm().powi(2);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for (su, sv) in tu.snapshots.iter().zip(&tv.snapshots) {
        let w_sq = su.field.sub(&sv.field)?.l2_norm().powi(2);
        let envelope = if steps.len() > 1 { gronwall_bound(w0, &steps, &q, 0.0, su.time)? } else { w0 };
        if w_sq > envelope {
            violations += 1;
            worst = worst.max((w_sq - envelope) / envelope.max(f64::MIN_POSITIVE));
        }
        rows.push(DeviationRow { time: su.time, w_sq, envelope });
    }
    if violations > 0 {
        flags.push(format!("{violations} envelope violations, worst relative excess {worst:e}"));
    }
    Ok(DeviationReport {
        rows,
        max_relative_violation: worst,
        violations,
        monotone: mono.pass,
        termination,
        flags,
    })
}
