//! Hölder exponents, BMO smallness and the thin-domain criterion on model
//! fields.

use crossdiff::regularity::{bmo_smallness_check, default_radii, holder_estimate, thin_domain_check};
use crossdiff::{BoundaryKind, Field, Grid};

fn main() -> crossdiff::Result<()> {
    let g = Grid::unit(2, 256, BoundaryKind::Neumann)?;
    let x0 = g.center(128 * 256 + 128);
    let radii = default_radii(&g);
    for alpha in [0.25, 0.5, 0.75, 1.0] {
        let f = Field::scalar_from_fn(g, |x| ((x[0] - x0[0]).powi(2) + (x[1] - x0[1]).powi(2)).sqrt().powf(alpha));
        let h = holder_estimate(&f, &radii)?;
        println!("|x - x0|^{alpha}: α ≈ {:.4} (fit residual {:.1e})", h.alpha, h.residual);
    }

    let small = Grid::unit(2, 32, BoundaryKind::Neumann)?;
    let f = Field::scalar_from_fn(small, |x| 0.2 * (3.0 * x[0]).sin() * x[1]);
    let s = bmo_smallness_check(&f, 1.0, 1.0, &[0.5, 0.5], &[0.25, 0.125, 0.0625])?;
    for e in &s.entries {
        println!("R = {:<7} ω̃ = {:.4}  margin {:.4}  {}", e.radius, e.omega_tilde, e.margin, if e.pass { "pass" } else { "fail" });
    }
    let t = thin_domain_check(&f, 0.05, &[0.25, 0.125, 0.0625])?;
    println!("thin-domain: {t:?}");
    Ok(())
}
