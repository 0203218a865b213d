//! Monotonicity of Φ and the L² deviation of two solutions against the
//! Grönwall envelope.

use crossdiff::solver::{PotentialMap, SolverConfig};
use crossdiff::uniqueness::{monotonicity_check, two_solution_experiment, Nonlinearity, ProbeSet};
use crossdiff::{BoundaryKind, Field, Grid};
use std::f64::consts::PI;
use std::sync::Arc;

fn main() -> crossdiff::Result<()> {
    let probes = ProbeSet::lattice(1, 3.0, 12, 2, 0);
    for phi in [Nonlinearity::scalar_power(1.0), Nonlinearity::scalar_power(2.0), Nonlinearity::square()] {
        let r = monotonicity_check(&phi, &probes)?;
        match &r.worst {
            Some(w) if !r.pass => println!("{}: fails, witness t = {:.3}, v = {:?}, eigenvalue {:.3}", phi.name(), w.t, w.v, w.min_eigenvalue),
            _ => println!("{}: monotone over {} probes", phi.name(), r.probes),
        }
    }

    let grid = Grid::unit(1, 64, BoundaryKind::Neumann)?;
    let u0 = Field::scalar_from_fn(grid, |x| 0.5 + 0.4 * (PI * x[0]).cos());
    let v0 = Field::scalar_from_fn(grid, |x| 0.5 + 0.4 * (PI * x[0]).cos() + 0.1 * (-20.0 * (x[0] - 0.3).powi(2)).exp());
    let g: PotentialMap = Arc::new(|x: &[f64], t: f64| 2.0 * (2.0 * PI * t).sin() * (PI * x[0]).cos());
    let cfg = SolverConfig { dt: 1e-3, horizon: 0.5, epsilon: 1e-3, stride: 1, ..Default::default() };
    let r = two_solution_experiment(&Nonlinearity::scalar_power(1.0), g, &u0, &v0, &cfg, &probes)?;
    for row in r.rows.iter().step_by(100) {
        println!("t = {:.3}  ‖w‖² = {:.4e}  envelope {:.4e}", row.time, row.w_sq, row.envelope);
    }
    println!("violations {} (worst relative {:.2e})", r.violations, r.max_relative_violation);
    Ok(())
}
