//! BMO seminorm of a few fields, with the maximizing cube.

use crossdiff::harmonic::bmo_seminorm;
use crossdiff::{BoundaryKind, Field, Grid};

fn main() -> crossdiff::Result<()> {
    let g1 = Grid::unit(1, 512, BoundaryKind::Neumann)?;
    let g2 = Grid::unit(2, 64, BoundaryKind::Neumann)?;
    let cases = [
        ("x on [0,1]", Field::scalar_from_fn(g1, |x| x[0])),
        ("1{x < 1/2}", Field::scalar_from_fn(g1, |x| if x[0] < 0.5 { 1.0 } else { 0.0 })),
        ("log|x - 1/2|", Field::scalar_from_fn(g1, |x| (x[0] - 0.5).abs().ln())),
        ("sin(6x)cos(4y)", Field::scalar_from_fn(g2, |x| (6.0 * x[0]).sin() * (4.0 * x[1]).cos())),
    ];
    for (name, f) in cases {
        let r = bmo_seminorm(&f, None)?;
        println!(
            "{name:>16}: [f]_* = {:.6}  ‖f‖_BMO = {:.6}  cube anchor {:?} side {}  ({} of {} cubes evaluated)",
            r.seminorm,
            r.bmo_norm,
            &r.argmax_cube.anchor[..f.grid().dim()],
            r.argmax_cube.side,
            r.evaluated,
            r.cube_count
        );
    }
    Ok(())
}
