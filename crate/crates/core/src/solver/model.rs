use crate::error::{Error, Result};
use crate::numerics::{sym_eig_extremes, GradedRule};
use crate::grid::Field;
use nalgebra::DMatrix;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

pub type MatrixMap = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub type ScalarMap = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorMap = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
/// `g(x, t)` for the reaction `g(x,t) W`.
pub type PotentialMap = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

#[derive(Clone, Default)]
pub enum Reaction {
    #[default]
    None,
    /// `F(W)`
    Source(VectorMap),
    /// `G(W) W`
    Linear(MatrixMap),
    /// `g(x, t) W`
    Potential(PotentialMap),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Preset {
    Heat,
    PorousMedia { k: f64 },
    SkewPorous { k: f64, skew: f64 },
    Constant,
    Custom(String),
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Heat => write!(f, "heat"),
            Preset::PorousMedia { k } => write!(f, "porous-media(k={k})"),
            Preset::SkewPorous { k, skew } => write!(f, "skew-porous(k={k}, skew={skew})"),
            Preset::Constant => write!(f, "constant"),
            Preset::Custom(name) => write!(f, "{name}"),
        }
    }
}

/// The data `(a, F or G, λ, Λ)` of `W_t = Div(a(W) DW) + reaction`, plus the
/// regularization `ε` that shifts `a`, `λ` and `Λ` by `ε Id`.
#[derive(Clone)]
pub struct DiffusionModel {
    m: usize,
    a: MatrixMap,
    lambda: ScalarMap,
    big_lambda: ScalarMap,
    reaction: Reaction,
    preset: Preset,
    epsilon: f64,
    degenerate: bool,
}

impl fmt::Debug for DiffusionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionModel")
            .field("m", &self.m)
            .field("preset", &self.preset)
            .field("epsilon", &self.epsilon)
            .finish()
    }
}

impl DiffusionModel {
    pub fn new(m: usize, a: MatrixMap, lambda: ScalarMap, big_lambda: ScalarMap) -> Self {
        Self {
            m,
            a,
            lambda,
            big_lambda,
            reaction: Reaction::None,
            preset: Preset::Custom("custom".into()),
            epsilon: 0.0,
            degenerate: false,
        }
    }

    pub fn heat(m: usize) -> Self {
        let mut model = Self::new(
            m,
            Arc::new(move |_| DMatrix::identity(m, m)),
            Arc::new(|_| 1.0),
            Arc::new(|_| 1.0),
        );
        model.preset = Preset::Heat;
        model
    }

    /// `a(W) = |W|^k Id`, `λ = Λ = |W|^k`.
    pub fn porous_media(m: usize, k: f64) -> Self {
        let norm = |w: &[f64]| w.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut model = Self::new(
            m,
            Arc::new(move |w| DMatrix::identity(m, m) * norm(w).powf(k)),
            Arc::new(move |w| norm(w).powf(k)),
            Arc::new(move |w| norm(w).powf(k)),
        );
        model.preset = Preset::PorousMedia { k };
        model.degenerate = k > 0.0;
        model
    }

    /// `a(W) = |W|^k (Id + skew J)` with `J` the unit skew matrix coupling
    /// consecutive components. The symmetric part is `|W|^k Id`.
    pub fn skew_porous(m: usize, k: f64, skew: f64) -> Self {
        let norm = |w: &[f64]| w.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut j = DMatrix::zeros(m, m);
        for i in 0..m.saturating_sub(1) {
            j[(i, i + 1)] = skew;
            j[(i + 1, i)] = -skew;
        }
        let mut model = Self::new(
            m,
            Arc::new(move |w| (DMatrix::identity(m, m) + &j) * norm(w).powf(k)),
            Arc::new(move |w| norm(w).powf(k)),
            Arc::new(move |w| norm(w).powf(k)),
        );
        model.preset = Preset::SkewPorous { k, skew };
        model.degenerate = k > 0.0;
        model
    }

    /// Constant matrix; the envelopes are the extreme eigenvalues of its
    /// symmetric part.
    pub fn constant(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::Shape("diffusion matrix must be square".into()));
        }
        let m = a.nrows();
        let (lo, hi) = sym_eig_extremes(&a);
        let mut model = Self::new(m, Arc::new(move |_| a.clone()), Arc::new(move |_| lo), Arc::new(move |_| hi));
        model.preset = Preset::Constant;
        Ok(model)
    }

    pub fn with_reaction(mut self, reaction: Reaction) -> Self {
        self.reaction = reaction;
        self
    }

    pub fn with_preset(mut self, preset: Preset) -> Self {
        self.preset = preset;
        self
    }

    /// Marks the unregularized model as degenerate so `ε = 0` runs are flagged.
    pub fn with_degenerate(mut self, degenerate: bool) -> Self {
        self.degenerate = degenerate;
        self
    }

    /// `a ← a + ε Id`, `λ ← λ + ε`, `Λ ← Λ + ε`.
    pub fn regularize(&self, eps: f64) -> Result<Self> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::Parameter(format!("ε must be a finite value ≥ 0, got {eps}")));
        }
        let mut out = self.clone();
        out.epsilon += eps;
        Ok(out)
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn preset(&self) -> &Preset {
        &self.preset
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn reaction(&self) -> &Reaction {
        &self.reaction
    }

    /// True for a degenerate model run without regularization.
    pub fn is_unregularized_degenerate(&self) -> bool {
        self.degenerate && self.epsilon == 0.0
    }

    /// `a(W) + ε Id`.
    pub fn a(&self, w: &[f64]) -> DMatrix<f64> {
        let mut a = (self.a)(w);
        if self.epsilon != 0.0 {
            for i in 0..self.m {
                a[(i, i)] += self.epsilon;
            }
        }
        a
    }

    pub fn lambda(&self, w: &[f64]) -> f64 {
        (self.lambda)(w) + self.epsilon
    }

    pub fn big_lambda(&self, w: &[f64]) -> f64 {
        (self.big_lambda)(w) + self.epsilon
    }

    /// Reaction term at one cell.
    pub fn reaction_at(&self, w: &[f64], x: &[f64], t: f64, out: &mut [f64]) {
        match &self.reaction {
            Reaction::None => out.iter_mut().for_each(|v| *v = 0.0),
            Reaction::Source(f) => f(w, out),
            Reaction::Linear(g) => {
                let gm = g(w);
                for i in 0..self.m {
                    out[i] = (0..self.m).map(|j| gm[(i, j)] * w[j]).sum();
                }
            }
            Reaction::Potential(g) => {
                let gv = g(x, t);
                for i in 0..self.m {
                    out[i] = gv * w[i];
                }
            }
        }
    }

    pub fn has_reaction(&self) -> bool {
        !matches!(self.reaction, Reaction::None)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeQuotient {
    pub w: Vec<f64>,
    /// Extreme eigenvalues of the symmetric part of `a(W)`.
    pub rayleigh_min: f64,
    pub rayleigh_max: f64,
    pub quotient: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticityReport {
    pub probes: Vec<ProbeQuotient>,
    pub lambda_est: f64,
    pub big_lambda_est: f64,
    /// Infimum of the per-probe quotients.
    pub nu_est: f64,
    /// Supremum of the per-probe quotients.
    pub nu_sup: f64,
    /// `(W, ζ)` pairs where `λ|ζ|² ≤ ⟨aζ,ζ⟩ ≤ Λ|ζ|²` fails beyond rounding.
    pub envelope_violations: usize,
}

/// Rayleigh-quotient extremes of `sym a(W)` over the W-probes, and a check of
/// the model's `λ`, `Λ` envelopes against the ζ-probes. Probes where the
/// largest eigenvalue vanishes carry no quotient.
pub fn ellipticity_probe(model: &DiffusionModel, ws: &[Vec<f64>], zetas: &[Vec<f64>]) -> Result<EllipticityReport> {
    let m = model.components();
    let mut probes = Vec::with_capacity(ws.len());
    let mut violations = 0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut nu_inf, mut nu_sup) = (f64::INFINITY, f64::NEG_INFINITY);
    for w in ws {
        if w.len() != m {
            return Err(Error::Shape(format!("probe W has {} components, model has {m}", w.len())));
        }
        let a = model.a(w);
        let (emin, emax) = sym_eig_extremes(&a);
        lo = lo.min(emin);
        hi = hi.max(emax);
        let quotient = if emax > 0.0 { Some(emin / emax) } else { None };
        if let Some(q) = quotient {
            nu_inf = nu_inf.min(q);
            nu_sup = nu_sup.max(q);
        }
        let (l, big) = (model.lambda(w), model.big_lambda(w));
        for z in zetas {
            if z.len() != m {
                return Err(Error::Shape("probe ζ has the wrong length".into()));
            }
            let zz: f64 = z.iter().map(|v| v * v).sum();
            let mut q = 0.0;
            for i in 0..m {
                for j in 0..m {
                    q += z[i] * a[(i, j)] * z[j];
                }
            }
            let tol = 1e-12 * (a.amax() * zz + big.abs() * zz + 1e-300);
            if q < l * zz - tol || q > big * zz + tol {
                violations += 1;
            }
        }
        probes.push(ProbeQuotient { w: w.clone(), rayleigh_min: emin, rayleigh_max: emax, quotient });
    }
    if nu_inf.is_infinite() {
        return Err(Error::Domain("no probe with a nonzero diffusion matrix".into()));
    }
    Ok(EllipticityReport {
        probes,
        lambda_est: lo,
        big_lambda_est: hi,
        nu_est: nu_inf,
        nu_sup,
        envelope_violations: violations,
    })
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SpectralGap {
    pub nu: f64,
    pub dim_threshold: f64,
    pub dim_pass: bool,
    pub dim_margin: f64,
    pub p_threshold: Option<f64>,
    pub p_pass: Option<bool>,
    pub p_margin: Option<f64>,
}

/// `ν > 1 − 2/N` and, when `p` is given, `ν > 1 − 1/p`.
pub fn spectral_gap_check(nu: f64, dim: usize, p: Option<f64>) -> Result<SpectralGap> {
    if dim == 0 {
        return Err(Error::Parameter("dimension must be positive".into()));
    }
    let t = 1.0 - 2.0 / dim as f64;
    let pt = match p {
        Some(p) if p > 0.0 => Some(1.0 - 1.0 / p),
        Some(p) => return Err(Error::Parameter(format!("p must be positive, got {p}"))),
        None => None,
    };
    Ok(SpectralGap {
        nu,
        dim_threshold: t,
        dim_pass: nu > t,
        dim_margin: nu - t,
        p_threshold: pt,
        p_pass: pt.map(|t| nu > t),
        p_margin: pt.map(|t| nu - t),
    })
}

/// Componentwise `U_i = ∫₀^{W_i} λ(s) ds`, evaluated as `W_i ∫₀¹ λ(tW_i) dt`
/// with a graded Gauss rule.
pub fn kirchhoff_transform(w: &Field, lambda: &dyn Fn(f64) -> f64) -> Result<Field> {
    let rule = GradedRule::default();
    let values: Vec<f64> = w
        .values()
        .iter()
        .map(|&wi| if wi == 0.0 { 0.0 } else { wi * rule.integrate(|t| lambda(t * wi)) })
        .collect();
    Field::new(*w.grid(), w.components(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryKind, Grid};

    fn probes() -> Vec<Vec<f64>> {
        vec![vec![1.0, 0.0], vec![0.3, -2.0], vec![-0.5, 0.5], vec![0.0, 0.0]]
    }

    fn zetas() -> Vec<Vec<f64>> {
        vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, -0.8], vec![2.0, 1.0]]
    }

    #[test]
    fn ellipticity_examples() {
        let r = ellipticity_probe(&DiffusionModel::heat(2), &probes(), &zetas()).unwrap();
        assert!((r.lambda_est - 1.0).abs() < 1e-14 && (r.big_lambda_est - 1.0).abs() < 1e-14);
        assert!((r.nu_est - 1.0).abs() < 1e-14);
        let pm = ellipticity_probe(&DiffusionModel::porous_media(2, 2.0), &probes(), &zetas()).unwrap();
        assert!((pm.nu_est - 1.0).abs() < 1e-14 && (pm.nu_sup - 1.0).abs() < 1e-14);
        assert_eq!(pm.envelope_violations, 0);
        let diag = DiffusionModel::constant(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0])).unwrap();
        let d = ellipticity_probe(&diag, &probes(), &zetas()).unwrap();
        assert!((d.nu_est - 0.5).abs() < 1e-14);
        assert_eq!(d.envelope_violations, 0);
    }

    #[test]
    fn skew_part_does_not_change_envelopes() {
        let model = DiffusionModel::skew_porous(2, 1.0, 0.7);
        let r = ellipticity_probe(&model, &probes(), &zetas()).unwrap();
        assert!((r.nu_est - 1.0).abs() < 1e-12);
        assert_eq!(r.envelope_violations, 0);
    }

    #[test]
    fn spectral_gap_examples() {
        assert!(spectral_gap_check(1.0, 3, None).unwrap().dim_pass);
        assert!(!spectral_gap_check(0.2, 3, None).unwrap().dim_pass);
        assert_eq!(spectral_gap_check(0.6, 3, Some(2.0)).unwrap().p_pass, Some(true));
    }

    #[test]
    fn regularize_cases() {
        let pm = DiffusionModel::porous_media(2, 2.0);
        let same = pm.regularize(0.0).unwrap();
        let w = [0.3, 0.4];
        assert_eq!(same.a(&w), pm.a(&w));
        assert!(pm.is_unregularized_degenerate());
        let zero = DiffusionModel::constant(DMatrix::zeros(2, 2)).unwrap().regularize(1.0).unwrap();
        assert_eq!(zero.a(&w), DMatrix::identity(2, 2));
        let reg = pm.regularize(0.1).unwrap();
        assert!(!reg.is_unregularized_degenerate());
        let r = ellipticity_probe(&reg, &[vec![0.0, 0.0]], &zetas()).unwrap();
        assert!((r.nu_est - 1.0).abs() < 1e-15);
        assert!((reg.lambda(&[0.0, 0.0]) - 0.1).abs() < 1e-15);
        assert!(pm.regularize(-1.0).is_err());
    }

    #[test]
    fn kirchhoff_cases() {
        let g = Grid::unit(1, 16, BoundaryKind::Neumann).unwrap();
        let w = Field::scalar_from_fn(g, |x| 2.0 * x[0]);
        let u = kirchhoff_transform(&w, &|_| 1.0).unwrap();
        for i in 0..16 {
            assert!((u.get(i, 0) - w.get(i, 0)).abs() < 1e-14);
        }
        for k in [0.5, 1.0, 2.5] {
            let u = kirchhoff_transform(&w, &|s: f64| s.abs().powf(k)).unwrap();
            for i in 0..16 {
                let want = w.get(i, 0).powf(k + 1.0) / (k + 1.0);
                assert!((u.get(i, 0) - want).abs() < 1e-12 * want.max(1e-300));
            }
        }
        let zero = kirchhoff_transform(&Field::zeros(g, 1), &|s: f64| s.abs()).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn reaction_forms() {
        let w = [1.0, 2.0];
        let mut out = [0.0; 2];
        let src = DiffusionModel::heat(2).with_reaction(Reaction::Source(Arc::new(|w, o| {
            o[0] = -w[0];
            o[1] = w[0] * w[1];
        })));
        src.reaction_at(&w, &[0.0], 0.0, &mut out);
        assert_eq!(out, [-1.0, 2.0]);
        let lin = DiffusionModel::heat(2)
            .with_reaction(Reaction::Linear(Arc::new(|_| DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))));
        lin.reaction_at(&w, &[0.0], 0.0, &mut out);
        assert_eq!(out, [2.0, 1.0]);
        let pot = DiffusionModel::heat(2).with_reaction(Reaction::Potential(Arc::new(|x, t| x[0] + t)));
        pot.reaction_at(&w, &[0.5], 1.5, &mut out);
        assert_eq!(out, [2.0, 4.0]);
    }
}
