//! Diagonalizing transform P(W), the condition constant c and the
//! L^∞–L^p ratio of the transformed solution.

use crossdiff::diagonal::{bmat_condition, moser_experiment, probe_points, DiagonalizableModel, MatrixNorm};
use crossdiff::solver::SolverConfig;
use crossdiff::{BoundaryKind, Field, Grid};
use nalgebra::DMatrix;
use std::f64::consts::PI;

fn main() -> crossdiff::Result<()> {
    let b0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 1.0]);
    let alpha = vec![1.0, 0.5];
    let probes = probe_points(2, 0.1, 2.0, 8, 8, 1)?;
    let grid = Grid::unit(1, 64, BoundaryKind::Neumann)?;
    let w0 = Field::from_fn(grid, 2, |x, out| {
        out[0] = 1.0 + 0.5 * (PI * x[0]).cos();
        out[1] = 0.5 - 0.25 * (PI * x[0]).cos();
    });
    let cfg = SolverConfig { dt: 0.01, ..Default::default() };
    for (name, model) in [
        ("constant B", DiagonalizableModel::constant(b0.clone(), alpha.clone())?),
        ("B = |W| B0", DiagonalizableModel::power(b0.clone(), 1.0, alpha.clone())?),
        ("B = |W|² B0", DiagonalizableModel::power(b0.clone(), 2.0, alpha.clone())?),
    ] {
        let c = bmat_condition(&model, &probes, MatrixNorm::Operator2)?;
        let m = moser_experiment(&model, &w0, &cfg, 3.0, 0.5, MatrixNorm::Operator2)?;
        println!(
            "{name}: c = {:.4}, similarity defect {:.1e}, sup‖P‖_∞ / ‖P(T)‖_L3 = {:.4}{}",
            c.c_measured,
            c.similarity_defect,
            m.ratio,
            if m.flags.is_empty() { String::new() } else { format!("  [{}]", m.flags.join("; ")) }
        );
    }
    Ok(())
}
