//! Maximal function, weight-class constants and the weighted maximal bound.

use crossdiff::harmonic::{a_gamma_constant, check_weighted_maximal_bound, maximal};
use crossdiff::{BoundaryKind, Field, Grid};

fn main() -> crossdiff::Result<()> {
    let g = Grid::unit(1, 256, BoundaryKind::Neumann)?;
    let f = Field::scalar_from_fn(g, |x| if (x[0] - 0.3).abs() < 0.02 { 1.0 } else { 0.0 });
    let mf = maximal(&f)?;
    println!("M(1_I) at x = 0.3, 0.5, 0.9: {:.4} {:.4} {:.4}", mf.values()[76], mf.values()[128], mf.values()[230]);

    for beta in [0.0, 0.3, 0.6, 0.9] {
        let w = Field::scalar_from_fn(g, |x| (x[0] - 0.5).abs().powf(-beta));
        for gamma in [1.5, 2.0, 3.0] {
            let a = a_gamma_constant(&w, gamma)?;
            let rep = check_weighted_maximal_bound(&f, &w, gamma)?;
            println!(
                "w = |x-1/2|^-{beta}: [w]_{gamma} = {:>8.4}   ∫M(F)^q w / ∫F^q w = {:.4}",
                a.constant, rep.ratio
            );
        }
    }
    Ok(())
}
