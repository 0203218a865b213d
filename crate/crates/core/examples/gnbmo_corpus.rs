//! Weighted Gagliardo–Nirenberg integrals and the ratio against the BMO
//! right-hand side on a seeded smooth corpus.

use crossdiff::cli::corpus::smooth_corpus;
use crossdiff::gn::{porous_weights, verify_strong_gnbmo, verify_weak_gnbmo, GnInputs};
use crossdiff::grid::{cutoff, CutoffProfile};
use crossdiff::harmonic::bmo_norm_local;
use crossdiff::{BoundaryKind, Grid};

fn main() -> crossdiff::Result<()> {
    let grid = Grid::unit(2, 64, BoundaryKind::Neumann)?;
    let (center, radius) = ([0.5, 0.5], 0.125);
    let cut = cutoff(&grid, &center, radius, CutoffProfile::Cubic)?;
    println!("cutoff constant |Dω| ≤ C/R: C = {:.4}", cut.constant);
    println!("{:>6} {:>3} {:>3} {:>12} {:>12} {:>10} {:>10}", "member", "k", "p", "I1", "I2", "ρ strong", "ρ weak");
    for (i, u) in smooth_corpus(grid, 5, 11).iter().enumerate() {
        let om = bmo_norm_local(u, &center, radius)?;
        for k in [1.0, 2.0] {
            let (lambda, gamma) = porous_weights(u, k, 0.0)?;
            for p in [1.0, 2.0] {
                let inp = GnInputs::new(u.clone(), gamma.clone(), lambda.clone(), &cut, p)?.with_omega_tilde(om)?;
                let s = verify_strong_gnbmo(&inp, None)?;
                let w = verify_weak_gnbmo(&inp, None)?;
                println!(
                    "{i:>6} {k:>3} {p:>3} {:>12.4e} {:>12.4e} {:>10.5} {:>10.5}",
                    s.integrals.i1, s.integrals.i2, s.ratio, w.ratio
                );
            }
        }
    }
    Ok(())
}
