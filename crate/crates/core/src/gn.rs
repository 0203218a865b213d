//! Weighted Gagliardo–Nirenberg–BMO integrals and their empirical check.
//!
//! Norms: `|Du|` is Euclidean over all `m × N` entries and `|D²u|` is the
//! Frobenius norm of the discrete Hessian.

use crate::error::{Error, Result};
use crate::grid::{ball_cells, gradient, hessian, integrate, Cutoff, Field};
use crate::harmonic::bmo_norm_local;
use crate::numerics::pairwise_sum_by;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct GnInputs {
    pub u: Field,
    /// Independent field for the weak version; `Du` when absent.
    pub h: Option<Field>,
    pub gamma: Field,
    pub lambda: Field,
    pub omega: Field,
    pub center: Vec<f64>,
    pub radius: f64,
    pub p: f64,
    pub eps_star: Option<f64>,
    /// Precomputed `‖u‖_{BMO(Ω_{2R})}`; recomputed from `u` when absent.
    pub omega_tilde: Option<f64>,
}

impl GnInputs {
    pub fn new(u: Field, gamma: Field, lambda: Field, cutoff: &Cutoff, p: f64) -> Result<Self> {
        let inputs = Self {
            u,
            h: None,
            gamma,
            lambda,
            omega: cutoff.field.clone(),
            center: cutoff.center.clone(),
            radius: cutoff.radius,
            p,
            eps_star: None,
            omega_tilde: None,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn with_h(mut self, h: Field) -> Result<Self> {
        self.h = Some(h);
        self.validate()?;
        Ok(self)
    }

    pub fn with_eps_star(mut self, eps_star: f64) -> Result<Self> {
        self.eps_star = Some(eps_star);
        self.validate()?;
        Ok(self)
    }

    /// Reuses a BMO norm computed elsewhere for the same `u`, center and radius.
    pub fn with_omega_tilde(mut self, omega_tilde: f64) -> Result<Self> {
        if !(omega_tilde >= 0.0) || !omega_tilde.is_finite() {
            return Err(Error::Parameter(format!("ω̃ must be finite and nonnegative, got {omega_tilde}")));
        }
        self.omega_tilde = Some(omega_tilde);
        Ok(self)
    }

    fn omega_tilde(&self) -> Result<f64> {
        match self.omega_tilde {
            Some(v) => Ok(v),
            None => bmo_norm_local(&self.u, &self.center, self.radius),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let u = &self.u;
        for (name, f) in [("Γ", &self.gamma), ("λ", &self.lambda), ("ω", &self.omega)] {
            u.check_same_grid(f)?;
            if f.components() != 1 {
                return Err(Error::Shape(format!("{name} must be scalar")));
            }
            if f.min() < 0.0 {
                return Err(Error::Domain(format!("{name} must be nonnegative")));
            }
        }
        if let Some(h) = &self.h {
            u.check_same_grid(h)?;
        }
        if !(self.p >= 1.0) {
            return Err(Error::Parameter(format!("p must be ≥ 1, got {}", self.p)));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Parameter("R must be positive".into()));
        }
        if let Some(e) = self.eps_star {
            if !(e > 0.0 && e <= self.radius) {
                return Err(Error::Parameter(format!("ε_* must lie in (0, R], got {e} with R = {}", self.radius)));
            }
        }
        let grid = u.grid();
        for idx in 0..grid.len() {
            if self.omega.get(idx, 0) != 0.0 && distance(&grid.center(idx)[..grid.dim()], &self.center) > self.radius * (1.0 + 1e-9) {
                return Err(Error::Domain("cutoff is not supported in B_R".into()));
            }
        }
        Ok(())
    }
}

fn distance(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct Integrals {
    pub i1: f64,
    pub i2: f64,
    pub ibreve: f64,
}

fn weighted(grid_field: &Field, weight: &Field, omega: &Field) -> Result<f64> {
    let w = weight.zip_with(&omega.map(|v| v * v), |a, b| a * b)?;
    integrate(grid_field, Some(&w))
}

/// `I₁ = ∫Γ|Du|^{2p+2}ω²`, `I₂ = ∫λ|Du|^{2p−2}|D²u|²ω²`, `Ĭ = ∫λ|Du|^{2p}ω²`.
pub fn compute_strong_integrals(inp: &GnInputs) -> Result<Integrals> {
    let p = inp.p;
    let du = gradient(&inp.u)?.norm();
    let d2u = hessian(&inp.u)?.norm();
    let i1 = weighted(&du.map(|g| g.powf(2.0 * p + 2.0)), &inp.gamma, &inp.omega)?;
    let i2_integrand = du.zip_with(&d2u, |g, s| g.powf(2.0 * p - 2.0) * s * s)?;
    let i2 = weighted(&i2_integrand, &inp.lambda, &inp.omega)?;
    let ibreve = weighted(&du.map(|g| g.powf(2.0 * p)), &inp.lambda, &inp.omega)?;
    Ok(Integrals { i1, i2, ibreve })
}

/// `𝐈₁ = ∫Γ|H|^{2p}|Du|²ω²`, `𝐈₂ = ∫λ|H|^{2p−2}|DH|²ω²`, `𝐈̆ = ∫λ|H|^{2p}ω²`.
pub fn compute_weak_integrals(inp: &GnInputs) -> Result<Integrals> {
    let p = inp.p;
    let du_full = gradient(&inp.u)?;
    let h = inp.h.as_ref().unwrap_or(&du_full);
    let hn = h.norm();
    let dhn = gradient(h)?.norm();
    let dun = du_full.norm();
    let i1 = weighted(&hn.zip_with(&dun, |a, g| a.powf(2.0 * p) * g * g)?, &inp.gamma, &inp.omega)?;
    let i2 = weighted(&hn.zip_with(&dhn, |a, d| a.powf(2.0 * p - 2.0) * d * d)?, &inp.lambda, &inp.omega)?;
    let ibreve = weighted(&hn.map(|a| a.powf(2.0 * p)), &inp.lambda, &inp.omega)?;
    Ok(Integrals { i1, i2, ibreve })
}

/// `ε̃ = (ε_*^{2−N} ∫_{B_{ε_*}} |Du|²)^{1/2}`.
pub fn compute_eps_tilde(du: &Field, eps_star: f64, center: &[f64]) -> Result<f64> {
    if !(eps_star > 0.0) {
        return Err(Error::Parameter("ε_* must be positive".into()));
    }
    let grid = du.grid();
    let cells = ball_cells(grid, center, eps_star);
    let sum = pairwise_sum_by(cells.len(), |k| du.at(cells[k]).iter().map(|v| v * v).sum::<f64>());
    let integral = sum * grid.cell_volume();
    Ok((eps_star.powi(2 - grid.dim() as i32) * integral).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaConditions {
    /// `max_{supp ω} Γ/λ`, `+∞` when `λ = 0 < Γ` somewhere.
    pub c_star: f64,
    /// Best `C` in `|DΓ|²|u|² ≤ CΓλ` over `supp ω`.
    pub gradient_constant: f64,
    /// Best `C` in `⟨Γ_u, u⟩ ≤ CΓ`, when the pairing field is supplied.
    pub pairing_constant: Option<f64>,
    pub flags: Vec<String>,
}

fn ratio_or_flag(num: f64, den: f64) -> f64 {
    if num <= 0.0 {
        0.0
    } else if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Measures the constants in `Γ ≤ C_*λ`, `|DΓ|²|u|² ≤ CΓλ` and, optionally,
/// `⟨Γ_u, u⟩ ≤ CΓ`, all over the support of ω.
pub fn check_gamma_conditions(inp: &GnInputs, pairing: Option<&Field>) -> Result<GammaConditions> {
    let grid = inp.u.grid();
    let dgamma = gradient(&inp.gamma)?.norm();
    let un = inp.u.norm();
    if let Some(pf) = pairing {
        inp.u.check_same_grid(pf)?;
    }
    let mut c_star: f64 = 0.0;
    let mut grad_c: f64 = 0.0;
    let mut pair_c: f64 = 0.0;
    for idx in 0..grid.len() {
        if inp.omega.get(idx, 0) <= 0.0 {
            continue;
        }
        let (g, l) = (inp.gamma.get(idx, 0), inp.lambda.get(idx, 0));
        c_star = c_star.max(ratio_or_flag(g, l));
        let lhs = (dgamma.get(idx, 0) * un.get(idx, 0)).powi(2);
        grad_c = grad_c.max(ratio_or_flag(lhs, g * l));
        if let Some(pf) = pairing {
            pair_c = pair_c.max(ratio_or_flag(pf.get(idx, 0), g));
        }
    }
    let mut flags = Vec::new();
    if c_star.is_infinite() {
        flags.push("C_* infinite: λ vanishes where Γ > 0".to_string());
    }
    if grad_c.is_infinite() {
        flags.push("|DΓ|²|u|² ≤ CΓλ fails for every finite C".to_string());
    }
    if pairing.is_some() && pair_c.is_infinite() {
        flags.push("⟨Γ_u, u⟩ ≤ CΓ fails for every finite C".to_string());
    }
    Ok(GammaConditions {
        c_star,
        gradient_constant: grad_c,
        pairing_constant: pairing.map(|_| pair_c),
        flags,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GnReport {
    pub weak: bool,
    pub integrals: Integrals,
    pub omega_tilde: f64,
    pub c_star: f64,
    pub eps_tilde: Option<f64>,
    pub lhs: f64,
    /// `C_*²ω̃² I₂`
    pub rhs_term_i2: f64,
    /// `(1 + C_*²ω̃²/R² [+ ε̃²/ε_*²]) Ĭ`
    pub rhs_term_ibreve: f64,
    /// `ε̃²/ε_*²` (weak only)
    pub eps_term: Option<f64>,
    pub ratio: f64,
    pub conditions: GammaConditions,
    pub hypothesis_flags: Vec<String>,
    /// Verdict against supplied constants `(C(N), C(N,p))`.
    pub pass: Option<bool>,
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(name.to_string()))
    }
}

struct Assembled {
    lhs: f64,
    term_i2: f64,
    term_ib: f64,
    ratio: f64,
    pass: Option<bool>,
}

fn assemble(ints: &Integrals, c_star: f64, omega_tilde: f64, r: f64, extra: f64, constants: Option<(f64, f64)>) -> Assembled {
    let lhs = ints.i1;
    if c_star.is_infinite() {
        // vacuous bound
        return Assembled {
            lhs,
            term_i2: f64::INFINITY,
            term_ib: f64::INFINITY,
            ratio: 0.0,
            pass: constants.map(|_| true),
        };
    }
    let k = c_star * c_star * omega_tilde * omega_tilde;
    let term_i2 = k * ints.i2;
    let term_ib = (1.0 + k / (r * r) + extra) * ints.ibreve;
    let den = term_i2 + term_ib;
    let ratio = if lhs == 0.0 {
        0.0
    } else if den > 0.0 {
        lhs / den
    } else {
        f64::INFINITY
    };
    let pass = constants.map(|(cn, cnp)| lhs <= cn * term_i2 + (cnp + k / (r * r) + extra) * ints.ibreve);
    Assembled { lhs, term_i2, term_ib, ratio, pass }
}

/// Strong inequality `I₁ ≤ C(N)C_*²ω̃²I₂ + [C(N,p) + C_*²ω̃²/R²]Ĭ`; the ratio
/// uses unit constants.
pub fn verify_strong_gnbmo(inp: &GnInputs, constants: Option<(f64, f64)>) -> Result<GnReport> {
    let ints = compute_strong_integrals(inp)?;
    check_finite("I₁", ints.i1)?;
    check_finite("I₂", ints.i2)?;
    check_finite("Ĭ", ints.ibreve)?;
    let omega_tilde = inp.omega_tilde()?;
    let conditions = check_gamma_conditions(inp, None)?;
    let a = assemble(&ints, conditions.c_star, omega_tilde, inp.radius, 0.0, constants);
    Ok(GnReport {
        weak: false,
        integrals: ints,
        omega_tilde,
        c_star: conditions.c_star,
        eps_tilde: None,
        lhs: a.lhs,
        rhs_term_i2: a.term_i2,
        rhs_term_ibreve: a.term_ib,
        eps_term: None,
        ratio: a.ratio,
        hypothesis_flags: conditions.flags.clone(),
        conditions,
        pass: a.pass,
    })
}

/// Weak inequality with the extra `ε̃²/ε_*²` term; `ε_*` defaults to `R`.
pub fn verify_weak_gnbmo(inp: &GnInputs, constants: Option<(f64, f64)>) -> Result<GnReport> {
    let ints = compute_weak_integrals(inp)?;
    check_finite("𝐈₁", ints.i1)?;
    check_finite("𝐈₂", ints.i2)?;
    check_finite("𝐈̆", ints.ibreve)?;
    let eps_star = inp.eps_star.unwrap_or(inp.radius);
    let du = gradient(&inp.u)?;
    let eps_tilde = compute_eps_tilde(&du, eps_star, &inp.center)?;
    let eps_term = (eps_tilde / eps_star).powi(2);
    let omega_tilde = inp.omega_tilde()?;
    let conditions = check_gamma_conditions(inp, None)?;
    let a = assemble(&ints, conditions.c_star, omega_tilde, inp.radius, eps_term, constants);
    Ok(GnReport {
        weak: true,
        integrals: ints,
        omega_tilde,
        c_star: conditions.c_star,
        eps_tilde: Some(eps_tilde),
        lhs: a.lhs,
        rhs_term_i2: a.term_i2,
        rhs_term_ibreve: a.term_ib,
        eps_term: Some(eps_term),
        ratio: a.ratio,
        hypothesis_flags: conditions.flags.clone(),
        conditions,
        pass: a.pass,
    })
}

/// Porous-media weights for `a(W) = |W|^k Id_m`: `λ = |W|^k + ε` and
/// `Γ = |a_W|²/λ = m k² |W|^{2k−2}/λ` (with `0/0 := 0`).
pub fn porous_weights(u: &Field, k: f64, eps: f64) -> Result<(Field, Field)> {
    if !(k >= 0.0) || !(eps >= 0.0) {
        return Err(Error::Parameter("porous weights need k ≥ 0 and ε ≥ 0".into()));
    }
    let m = u.components() as f64;
    let un = u.norm();
    let lambda = un.map(|r| r.powf(k) + eps);
    let gamma_vals: Vec<f64> = un
        .values()
        .iter()
        .zip(lambda.values())
        .map(|(&r, &l)| {
            let a2 = if k == 0.0 { 0.0 } else { m * k * k * r.powf(2.0 * k - 2.0) };
            ratio_or_flag(a2, l)
        })
        .collect();
    let gamma = Field::new(*u.grid(), 1, gamma_vals)
        .map_err(|_| Error::NonFinite("Γ = |a_W|²/λ (λ vanishes where a_W does not)".into()))?;
    Ok((lambda, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{cutoff, BoundaryKind, CutoffProfile, Grid};

    fn setup(n: usize) -> (Grid, Cutoff) {
        let g = Grid::unit(2, n, BoundaryKind::Neumann).unwrap();
        let c = cutoff(&g, &[0.5, 0.5], 0.3, CutoffProfile::Cubic).unwrap();
        (g, c)
    }

    fn bump(g: Grid, amp: f64) -> Field {
        Field::scalar_from_fn(g, move |x| 0.2 + amp * (-((x[0] - 0.45).powi(2) + (x[1] - 0.55).powi(2)) / 0.05).exp())
    }

    #[test]
    fn constant_u_gives_zero_integrals() {
        let (g, c) = setup(32);
        let one = Field::constant(g, &[1.0]);
        let inp = GnInputs::new(Field::constant(g, &[3.0]), one.clone(), one, &c, 1.0).unwrap();
        let ints = compute_strong_integrals(&inp).unwrap();
        assert_eq!(ints, Integrals { i1: 0.0, i2: 0.0, ibreve: 0.0 });
        let r = verify_strong_gnbmo(&inp, Some((1.0, 1.0))).unwrap();
        assert_eq!(r.ratio, 0.0);
        assert_eq!(r.pass, Some(true));
    }

    #[test]
    fn affine_u_with_unit_weights() {
        let g = Grid::unit(2, 16, BoundaryKind::Neumann).unwrap();
        let one = Field::constant(g, &[1.0]);
        let u = Field::scalar_from_fn(g, |x| 0.6 * x[0] + 0.8 * x[1]);
        let inp = GnInputs {
            u,
            h: None,
            gamma: one.clone(),
            lambda: one.clone(),
            omega: one,
            center: vec![0.5, 0.5],
            radius: 1.0,
            p: 1.0,
            eps_star: None,
            omega_tilde: None,
        };
        let ints = compute_strong_integrals(&inp).unwrap();
        assert!((ints.i1 - 1.0).abs() < 1e-12);
        assert!(ints.i2.abs() < 1e-20);
        assert!((ints.ibreve - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_gamma_and_zero_h() {
        let (g, c) = setup(32);
        let u = bump(g, 1.0);
        let zero = Field::zeros(g, 1);
        let inp = GnInputs::new(u, zero, Field::constant(g, &[1.0]), &c, 1.0).unwrap();
        assert_eq!(compute_strong_integrals(&inp).unwrap().i1, 0.0);
        let weak = inp.clone().with_h(Field::zeros(g, 2)).unwrap();
        let w = compute_weak_integrals(&weak).unwrap();
        assert_eq!((w.i1, w.i2, w.ibreve), (0.0, 0.0, 0.0));
        let mut no_omega = inp.clone();
        no_omega.omega = Field::zeros(g, 1);
        let w = compute_weak_integrals(&no_omega).unwrap();
        assert_eq!((w.i1, w.i2, w.ibreve), (0.0, 0.0, 0.0));
    }

    #[test]
    fn weak_with_h_equal_du_matches_strong() {
        let (g, c) = setup(48);
        let u = bump(g, 1.0);
        let (lambda, gamma) = porous_weights(&u, 2.0, 0.0).unwrap();
        for p in [1.0, 2.0] {
            let inp = GnInputs::new(u.clone(), gamma.clone(), lambda.clone(), &c, p).unwrap();
            let s = compute_strong_integrals(&inp).unwrap();
            let w = compute_weak_integrals(&inp.clone().with_h(gradient(&u).unwrap()).unwrap()).unwrap();
            for (a, b) in [(s.i1, w.i1), (s.i2, w.i2), (s.ibreve, w.ibreve)] {
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn eps_tilde_cases() {
        let g = Grid::unit(2, 40, BoundaryKind::Neumann).unwrap();
        let zero = Field::zeros(g, 2);
        assert_eq!(compute_eps_tilde(&zero, 0.2, &[0.5, 0.5]).unwrap(), 0.0);
        let unit = Field::constant(g, &[0.6, 0.8]);
        let cells = ball_cells(&g, &[0.5, 0.5], 0.2).len();
        let want = (cells as f64 * g.cell_volume()).sqrt();
        assert!((compute_eps_tilde(&unit, 0.2, &[0.5, 0.5]).unwrap() - want).abs() < 1e-12);
        let scaled = compute_eps_tilde(&unit.scale(3.0), 0.2, &[0.5, 0.5]).unwrap();
        assert!((scaled - 3.0 * want).abs() < 1e-12);
    }

    #[test]
    fn gamma_condition_constants() {
        let (g, c) = setup(32);
        let u = bump(g, 1.0);
        let lambda = Field::scalar_from_fn(g, |x| 1.0 + x[0]);
        let inp = GnInputs::new(u.clone(), lambda.scale(2.0), lambda.clone(), &c, 1.0).unwrap();
        let cond = check_gamma_conditions(&inp, None).unwrap();
        assert!((cond.c_star - 2.0).abs() < 1e-14);
        let inp0 = GnInputs::new(u.clone(), Field::zeros(g, 1), lambda, &c, 1.0).unwrap();
        let cond = check_gamma_conditions(&inp0, Some(&Field::zeros(g, 1))).unwrap();
        assert_eq!(cond.c_star, 0.0);
        assert_eq!(cond.gradient_constant, 0.0);
        assert_eq!(cond.pairing_constant, Some(0.0));
        assert!(cond.flags.is_empty());
        let bad = GnInputs::new(u, Field::constant(g, &[1.0]), Field::zeros(g, 1), &c, 1.0).unwrap();
        let cond = check_gamma_conditions(&bad, None).unwrap();
        assert!(cond.c_star.is_infinite() && !cond.flags.is_empty());
    }

    #[test]
    fn porous_c_star_matches_pointwise_formula() {
        let (g, c) = setup(32);
        let u = bump(g, 1.0);
        let k = 2.0;
        let (lambda, gamma) = porous_weights(&u, k, 0.0).unwrap();
        let inp = GnInputs::new(u.clone(), gamma, lambda, &c, 1.0).unwrap();
        let cond = check_gamma_conditions(&inp, None).unwrap();
        // Γ/λ = k²|u|^{2k−2}/|u|^{2k} = k²/|u|²
        let want = (0..g.len())
            .filter(|&i| c.field.get(i, 0) > 0.0)
            .map(|i| k * k / u.get(i, 0).powi(2))
            .fold(0.0, f64::max);
        assert!((cond.c_star - want).abs() < 1e-12 * want);
    }

    #[test]
    fn strong_scaling_audit() {
        let (g, c) = setup(64);
        let u = bump(g, 1.0);
        let (lambda, gamma) = porous_weights(&u, 2.0, 0.0).unwrap();
        for p in [1.0, 2.0] {
            let base = verify_strong_gnbmo(&GnInputs::new(u.clone(), gamma.clone(), lambda.clone(), &c, p).unwrap(), None).unwrap();
            let cc = 1.7;
            let scaled = verify_strong_gnbmo(&GnInputs::new(u.scale(cc), gamma.clone(), lambda.clone(), &c, p).unwrap(), None).unwrap();
            let e = 2.0 * p + 2.0;
            let r1 = scaled.integrals.i1 / base.integrals.i1 / cc.powf(e);
            let r2 = scaled.omega_tilde.powi(2) * scaled.integrals.i2
                / (base.omega_tilde.powi(2) * base.integrals.i2)
                / cc.powf(e);
            assert!((r1 - 1.0).abs() < 1e-6 && (r2 - 1.0).abs() < 1e-6, "{r1} {r2}");
        }
    }

    #[test]
    fn eps_star_only_changes_eps_term() {
        let (g, c) = setup(48);
        let u = bump(g, 1.0);
        let (lambda, gamma) = porous_weights(&u, 1.0, 0.0).unwrap();
        let h = Field::from_fn(g, 2, |x, o| {
            o[0] = (2.0 * x[0]).sin();
            o[1] = x[1] * x[0];
        });
        let base = GnInputs::new(u, gamma, lambda, &c, 1.0).unwrap().with_h(h).unwrap();
        let a = verify_weak_gnbmo(&base.clone().with_eps_star(0.3).unwrap(), None).unwrap();
        let b = verify_weak_gnbmo(&base.with_eps_star(0.15).unwrap(), None).unwrap();
        assert_eq!(a.integrals, b.integrals);
        assert_eq!(a.omega_tilde, b.omega_tilde);
        assert_eq!(a.rhs_term_i2, b.rhs_term_i2);
        assert_ne!(a.eps_term, b.eps_term);
        let k = a.c_star.powi(2) * a.omega_tilde.powi(2) / 0.09;
        let expect_b = (1.0 + k + b.eps_term.unwrap()) * b.integrals.ibreve;
        assert!((b.rhs_term_ibreve - expect_b).abs() < 1e-12 * expect_b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (g, c) = setup(32);
        let one = Field::constant(g, &[1.0]);
        assert!(GnInputs::new(one.clone(), one.clone(), one.clone(), &c, 0.5).is_err());
        let inp = GnInputs::new(one.clone(), one.clone(), one.clone(), &c, 1.0).unwrap();
        assert!(inp.clone().with_eps_star(0.5).is_err());
        let mut wide = inp;
        wide.omega = one;
        assert!(wide.validate().is_err());
    }
}
