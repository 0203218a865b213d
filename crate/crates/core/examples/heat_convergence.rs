//! Convergence of the semi-implicit scheme to the Fourier solution
//! `1 + e^{-π²t} cos(πx)` of the heat equation with Neumann walls.

use crossdiff::solver::{simulate, DiffusionModel, SolverConfig};
use crossdiff::{BoundaryKind, Field, Grid};
use std::f64::consts::PI;

fn error(n: usize, dt: f64, horizon: f64) -> crossdiff::Result<f64> {
    let grid = Grid::unit(1, n, BoundaryKind::Neumann)?;
    let w0 = Field::scalar_from_fn(grid, |x| 1.0 + (PI * x[0]).cos());
    let cfg = SolverConfig { dt, horizon, stride: usize::MAX, ..Default::default() };
    let traj = simulate(&DiffusionModel::heat(1), &cfg, &w0)?;
    let decay = (-PI * PI * horizon).exp();
    let exact = Field::scalar_from_fn(grid, |x| 1.0 + decay * (PI * x[0]).cos());
    Ok(traj.last().field.sub(&exact)?.l2_norm())
}

fn main() -> crossdiff::Result<()> {
    let horizon = 0.5;
    println!("time refinement, 256 cells");
    let mut prev = None;
    for dt in [0.02, 0.01, 0.005, 0.0025] {
        let e = error(256, dt, horizon)?;
        let order = prev.map(|p: f64| format!("{:.3}", (p / e).log2())).unwrap_or_default();
        println!("  dt = {dt:<7} L2 error {e:.3e}  order {order}");
        prev = Some(e);
    }
    println!("space refinement, dt = 1e-5");
    let mut prev = None;
    for n in [8, 16, 32] {
        let e = error(n, 1e-5, horizon)?;
        let order = prev.map(|p: f64| format!("{:.3}", (p / e).log2())).unwrap_or_default();
        println!("  cells = {n:<4} L2 error {e:.3e}  order {order}");
        prev = Some(e);
    }
    Ok(())
}
