use super::config::{BPreset, ExperimentConfig, PhiPreset, PotentialKind};
use super::corpus::{initial_field, smooth_corpus};
use super::Outcome;
use crate::diagonal::{bmat_condition, moser_experiment, probe_points, DiagonalizableModel};
use crate::error::{Error, Result};
use crate::gn::{porous_weights, verify_strong_gnbmo, verify_weak_gnbmo, GnInputs};
use crate::grid::{cutoff, io, CutoffProfile, Field, Region};
use crate::harmonic::{bmo_norm_local, bmo_seminorm};
use crate::regularity::{regularity_report, DiagnoseOptions};
use crate::solver::{simulate as run_solver, PotentialMap, Termination};
use crate::uniqueness::{monotonicity_check, two_solution_experiment, Nonlinearity, ProbeSet};
use nalgebra::DMatrix;
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub(super) struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub hash: String,
    pub out: &'a Path,
    /// Directory that relative input paths are resolved against.
    pub base: &'a Path,
    pub files: Vec<PathBuf>,
}

fn fmt(v: f64) -> String {
    crate::grid::io::format_real(v)
}

impl Ctx<'_> {
    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let path = self.out.join(name);
        let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
        writeln!(f, "# config_hash={}", self.hash)?;
        writeln!(f, "{}", header.join(","))?;
        for r in rows {
            writeln!(f, "{}", r.join(","))?;
        }
        f.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, mut value: Value) -> Result<()> {
        if let Value::Object(map) = &mut value {
            map.insert("config_hash".into(), Value::String(self.hash.clone()));
        }
        let path = self.out.join(name);
        let text = serde_json::to_string_pretty(&value).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(&path, text + "\n")?;
        self.files.push(path);
        Ok(())
    }

    fn snapshot(&mut self, rel: &Path, field: &Field) -> Result<()> {
        let path = self.out.join(rel);
        let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
        writeln!(f, "# config_hash={}", self.hash)?;
        io::write_snapshot(field, &mut f)?;
        f.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn done(self, exit_code: i32, message: String) -> Outcome {
        Outcome { exit_code, files: self.files, message }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn termination_code(t: &Termination) -> i32 {
    if *t == Termination::Completed {
        0
    } else {
        2
    }
}

pub(super) fn simulate(mut ctx: Ctx<'_>) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let grid = cfg.grid("simulate")?;
    let model = cfg.diffusion_model("simulate")?;
    let solver = cfg.solver("simulate")?;
    let init = ExperimentConfig::require(&cfg.initial, "initial", "simulate")?;
    let w0 = initial_field(init, grid, model.components(), cfg.seed, ctx.base)?;
    let traj = run_solver(&model, &solver, &w0)?;

    let snap_dir = PathBuf::from(&cfg.outputs.snapshots);
    fs::create_dir_all(ctx.out.join(&snap_dir))?;
    let mut index = Vec::new();
    for s in &traj.snapshots {
        let rel = snap_dir.join(format!("snap_{:06}.txt", s.step));
        ctx.snapshot(&rel, &s.field)?;
        index.push(vec![s.step.to_string(), fmt(s.time), rel.display().to_string()]);
    }
    ctx.csv("index.csv", &["step".into(), "time".into(), "file".into()], &index)?;

    let m = model.components();
    let mut header: Vec<String> = vec!["step".into(), "time".into()];
    header.extend((0..m).map(|c| format!("mass{c}")));
    header.extend(["l2", "min", "max", "grad_l2", "grad_l4", "iterations", "residual"].map(String::from));
    let rows: Vec<Vec<String>> = traj
        .diagnostics
        .iter()
        .map(|d| {
            let mut r = vec![d.step.to_string(), fmt(d.time)];
            r.extend(d.mass.iter().map(|&v| fmt(v)));
            r.extend([d.l2, d.min, d.max].map(fmt));
            r.extend(d.grad_norms.iter().map(|&v| fmt(v)));
            r.push(d.iterations.to_string());
            r.push(fmt(d.residual));
            r
        })
        .collect();
    let diag_name = cfg.outputs.diagnostics.clone();
    ctx.csv(&diag_name, &header, &rows)?;

    let last = traj.last();
    ctx.json(
        "report.json",
        json!({
            "command": "simulate",
            "model": model.preset().to_string(),
            "epsilon": solver.epsilon,
            "termination": to_value(&traj.termination),
            "steps": traj.diagnostics.last().map(|d| d.step).unwrap_or(0),
            "final_time": last.time,
            "snapshots": traj.snapshots.len(),
            "flags": traj.flags,
        }),
    )?;
    let code = termination_code(&traj.termination);
    let msg = match &traj.termination {
        Termination::Completed => format!("simulated to t = {} in {} snapshots", last.time, traj.snapshots.len()),
        Termination::BlowUp { time } => format!("blow-up at t = {time}; partial trajectory written"),
        Termination::SolverFailure { time, message } => format!("solver failure at t = {time}: {message}"),
    };
    Ok(ctx.done(code, msg))
}

pub(super) fn bmo(mut ctx: Ctx<'_>) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let sec = ExperimentConfig::require(&cfg.bmo, "bmo", "bmo")?;
    let f = io::load_snapshot(&ctx.base.join(&sec.input), cfg.bc)?;
    let region = match (&sec.center, sec.half_side) {
        (Some(c), Some(h)) => Some(Region::around(f.grid(), c, h)?),
        (None, None) => None,
        _ => return Err(Error::Config("[bmo] center and half_side go together".into())),
    };
    let r = bmo_seminorm(&f, region.as_ref())?;
    ctx.json(
        "bmo.json",
        json!({
            "command": "bmo",
            "input": sec.input,
            "seminorm": r.seminorm,
            "l1": r.l1_norm,
            "bmo_norm": r.bmo_norm,
            "argmax_cube": to_value(&r.argmax_cube),
            "cube_count": r.cube_count,
            "evaluated": r.evaluated,
            "region": region.map(|g| to_value(&g)),
        }),
    )?;
    Ok(ctx.done(0, format!("BMO seminorm {}", r.seminorm)))
}

pub(super) fn verify_gnbmo(mut ctx: Ctx<'_>) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let sec = ExperimentConfig::require(&cfg.gnbmo, "gnbmo", "verify-gnbmo")?;
    let grid = cfg.grid("verify-gnbmo")?;
    let center = sec.center.clone().unwrap_or_else(|| grid.extents().iter().map(|e| 0.5 * e).collect());
    let cut = cutoff(&grid, &center, sec.radius, CutoffProfile::Cubic)?;
    let corpus = smooth_corpus(grid, sec.corpus_size, cfg.seed);
    let header: Vec<String> = [
        "member", "k", "p", "I1", "I2", "Ibreve", "weak_I1", "weak_I2", "weak_Ibreve", "omega_tilde", "c_star", "eps_tilde",
        "ratio_strong", "ratio_weak",
    ]
    .map(String::from)
    .to_vec();
    let mut rows = Vec::new();
    let (mut max_strong, mut max_weak) = (0.0f64, 0.0f64);
    for (i, u) in corpus.iter().enumerate() {
        let omega_tilde = bmo_norm_local(u, &center, sec.radius)?;
        for &k in &sec.k {
            let (lambda, gamma) = porous_weights(u, k, sec.epsilon)?;
            for &p in &sec.p {
                let mut inp =
                    GnInputs::new(u.clone(), gamma.clone(), lambda.clone(), &cut, p)?.with_omega_tilde(omega_tilde)?;
                if let Some(e) = sec.eps_star {
                    inp = inp.with_eps_star(e)?;
                }
                let s = verify_strong_gnbmo(&inp, None)?;
                let w = verify_weak_gnbmo(&inp, None)?;
                max_strong = max_strong.max(s.ratio);
                max_weak = max_weak.max(w.ratio);
                rows.push(vec![
                    i.to_string(),
                    fmt(k),
                    fmt(p),
                    fmt(s.integrals.i1),
                    fmt(s.integrals.i2),
                    fmt(s.integrals.ibreve),
                    fmt(w.integrals.i1),
                    fmt(w.integrals.i2),
                    fmt(w.integrals.ibreve),
                    fmt(s.omega_tilde),
                    fmt(s.c_star),
                    fmt(w.eps_tilde.unwrap_or(f64::NAN)),
                    fmt(s.ratio),
                    fmt(w.ratio),
                ]);
            }
        }
    }
    ctx.csv("gnbmo.csv", &header, &rows)?;
    ctx.json(
        "gnbmo_summary.json",
        json!({
            "command": "verify-gnbmo",
            "cases": rows.len(),
            "max_ratio_strong": max_strong,
            "max_ratio_weak": max_weak,
            "cutoff_constant": cut.constant,
        }),
    )?;
    Ok(ctx.done(0, format!("{} cases, max strong ratio {max_strong}, max weak ratio {max_weak}", rows.len())))
}

/// Rows `(step, time, file)` of a trajectory's `index.csv`.
pub fn read_index(dir: &Path) -> Result<Vec<(usize, f64, PathBuf)>> {
    let text = fs::read_to_string(dir.join("index.csv"))?;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.starts_with("step") || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let bad = || Error::Parse(format!("index.csv line {}: '{line}'", n + 1));
        if parts.len() != 3 {
            return Err(bad());
        }
        rows.push((
            parts[0].parse().map_err(|_| bad())?,
            parts[1].parse().map_err(|_| bad())?,
            dir.join(parts[2]),
        ));
    }
    Ok(rows)
}

pub(super) fn diagnose(mut ctx: Ctx<'_>) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let sec = ExperimentConfig::require(&cfg.diagnose, "diagnose", "diagnose")?;
    let dir = ctx.base.join(&sec.trajectory);
    let index = read_index(&dir)?;
    let mut header: Vec<String> = vec!["step".into(), "time".into()];
    header.extend(sec.exponents.iter().map(|q| format!("grad_L{q}")));
    header.extend(["alpha", "holder_residual", "omega_tilde", "margin", "smallness_pass", "flags"].map(String::from));
    let mut rows = Vec::new();
    for (step, time, path) in index {
        let w = io::load_snapshot(&path, cfg.bc)?;
        let center = sec.center.clone().unwrap_or_else(|| w.grid().extents().iter().map(|e| 0.5 * e).collect());
        let opts = DiagnoseOptions {
            exponents: sec.exponents.clone(),
            center,
            radius: sec.radius,
            c_n: sec.c_n,
            c_star: sec.c_star,
            holder_radii: None,
        };
        let r = regularity_report(&w, &opts)?;
        let mut row = vec![step.to_string(), fmt(time)];
        row.extend(r.gradient_norms.iter().map(|g| fmt(g.1)));
        row.extend([
            fmt(r.holder.alpha),
            fmt(r.holder.residual),
            fmt(r.smallness.omega_tilde),
            fmt(r.smallness.margin),
            r.smallness.pass.to_string(),
            r.flags.join(";"),
        ]);
        rows.push(row);
    }
    let n = rows.len();
    ctx.csv("diagnose.csv", &header, &rows)?;
    Ok(ctx.done(0, format!("diagnosed {n} snapshots")))
}

fn nonlinearity(preset: PhiPreset, k: f64, m: usize) -> Result<Nonlinearity> {
    Ok(match preset {
        PhiPreset::ScalarPower if m == 1 => Nonlinearity::scalar_power(k),
        PhiPreset::ScalarPower => return Err(Error::Config("[uniqueness] scalar-power needs m = 1".into())),
        PhiPreset::VectorPower => Nonlinearity::vector_power(m, k),
        PhiPreset::ComponentPower => Nonlinearity::component_power(m, k),
        PhiPreset::Square if m == 1 => Nonlinearity::square(),
        PhiPreset::Square => return Err(Error::Config("[uniqueness] square needs m = 1".into())),
        PhiPreset::Identity => Nonlinearity::identity(m),
    })
}

pub(super) fn uniqueness(mut ctx: Ctx<'_>) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let sec = ExperimentConfig::require(&cfg.uniqueness, "uniqueness", "uniqueness")?;
    let grid = cfg.grid("uniqueness")?;
    let solver = cfg.solver("uniqueness")?;
    let init = ExperimentConfig::require(&cfg.initial, "initial", "uniqueness")?;
    let phi = nonlinearity(sec.phi, sec.k, sec.m)?;
    let u0 = initial_field(init, grid, sec.m, cfg.seed, ctx.base)?;
    let (delta, l1) = (sec.delta, grid.extents()[0]);
    let v0 = Field::from_fn(grid, sec.m, |x, out| {
        let bump = 0.5 * (1.0 + (std::f64::consts::PI * x[0] / l1).cos());
        out.iter_mut().for_each(|v| *v = delta * bump);
    })
    .add(&u0)?;
    let gamma = sec.g.gamma;
    let g: PotentialMap = match sec.g.kind {
        PotentialKind::Constant => Arc::new(move |_, _| gamma),
        PotentialKind::Oscillating => Arc::new(move |x, t| {
            gamma * (std::f64::consts::TAU * t).sin() * (std::f64::consts::PI * x[0] / l1).cos()
        }),
        PotentialKind::Decaying => Arc::new(move |_, t| gamma * (-t).exp()),
    };
    let probes = ProbeSet::lattice(sec.m, sec.v_max, 8, 16, cfg.seed);
    let mono = monotonicity_check(&phi, &probes)?;
    let rep = two_solution_experiment(&phi, g, &u0, &v0, &solver, &probes)?;
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| vec![fmt(r.time), fmt(r.w_sq), fmt(r.envelope), fmt(r.w_sq / r.envelope)])
        .collect();
    ctx.csv("deviation.csv", &["time", "w_sq", "envelope", "ratio"].map(String::from), &rows)?;
    ctx.json(
        "uniqueness.json",
        json!({
            "command": "uniqueness",
            "phi": phi.name(),
            "monotonicity": to_value(&mono),
            "max_relative_violation": rep.max_relative_violation,
            "violations": rep.violations,
            "termination": to_value(&rep.termination),
            "flags": rep.flags,
        }),
    )?;
    let code = termination_code(&rep.termination);
    Ok(ctx.done(
        code,
        format!("monotone: {}, envelope violations: {} (worst {:e})", mono.pass, rep.violations, rep.max_relative_violation),
    ))
}

pub(super) fn diagonalize(mut ctx: Ctx<'_>) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let sec = ExperimentConfig::require(&cfg.diagonalize, "diagonalize", "diagonalize")?;
    let m = sec.alpha.len();
    if sec.b0.len() != m || sec.b0.iter().any(|r| r.len() != m) {
        return Err(Error::Config(format!("[diagonalize] b0 must be {m}×{m} to match alpha")));
    }
    let b0 = DMatrix::from_fn(m, m, |i, j| sec.b0[i][j]);
    let model = match sec.preset {
        BPreset::Constant => DiagonalizableModel::constant(b0, sec.alpha.clone()),
        BPreset::Power => DiagonalizableModel::power(b0, sec.l, sec.alpha.clone()),
    }
    .map_err(|e| match e {
        Error::Singular(_) => Error::Config("[diagonalize] b0 is singular".into()),
        other => other,
    })?;
    let pr = &sec.probes;
    let probes = probe_points(m, pr.r_min, pr.r_max, pr.radial, pr.angular, cfg.seed)?;
    let bmat = bmat_condition(&model, &probes, sec.norm)?;
    let mut header: Vec<String> = (0..m).map(|c| format!("w{c}")).collect();
    header.extend(["norm_w", "c", "variant_c"].map(String::from));
    let rows: Vec<Vec<String>> = probes
        .iter()
        .zip(&bmat.per_probe)
        .map(|(w, (c, v))| {
            let mut r: Vec<String> = w.iter().map(|&x| fmt(x)).collect();
            r.push(fmt(w.iter().map(|x| x * x).sum::<f64>().sqrt()));
            r.push(fmt(*c));
            r.push(fmt(*v));
            r
        })
        .collect();
    ctx.csv("probes.csv", &header, &rows)?;

    let grid = cfg.grid("diagonalize")?;
    let solver = cfg.solver("diagonalize")?;
    let init = ExperimentConfig::require(&cfg.initial, "initial", "diagonalize")?;
    let w0 = initial_field(init, grid, m, cfg.seed, ctx.base)?;
    let moser = moser_experiment(&model, &w0, &solver, sec.p, sec.t, sec.norm)?;
    let mut summary = to_value(&bmat);
    if let Value::Object(map) = &mut summary {
        map.remove("per_probe");
    }
    ctx.json(
        "moser.json",
        json!({
            "command": "diagonalize",
            "model": model.name(),
            "condition": summary,
            "moser": to_value(&moser),
        }),
    )?;
    let code = termination_code(&moser.termination);
    Ok(ctx.done(code, format!("c = {}, C = {}", bmat.c_measured, moser.ratio)))
}
