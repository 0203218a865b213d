//! Seeded smooth fields for corpora and initial data.

use super::config::{InitialKind, InitialSection};
use crate::error::{Error, Result};
use crate::grid::{io, Field, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

struct Mode {
    amp: f64,
    freq: [f64; 3],
    phase: f64,
}

fn modes(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Mode> {
    (0..count)
        .map(|_| {
            let mut freq = [0.0; 3];
            for f in freq.iter_mut().take(dim) {
                *f = rng.random_range(0..=3) as f64;
            }
            if freq.iter().all(|&f| f == 0.0) {
                freq[0] = 1.0;
            }
            Mode { amp: rng.random_range(-1.0..1.0), freq, phase: rng.random_range(0.0..std::f64::consts::TAU) }
        })
        .collect()
}

fn eval(grid: &Grid, modes: &[Mode], x: &[f64]) -> f64 {
    modes
        .iter()
        .map(|md| {
            let arg: f64 = (0..grid.dim()).map(|d| std::f64::consts::PI * md.freq[d] * x[d] / grid.extents()[d]).sum();
            md.amp * (arg + md.phase).cos()
        })
        .sum::<f64>()
        / modes.len().max(1) as f64
}

/// `size` positive smooth scalar fields `1 + ¾ S(x)`, where `S` is an average
/// of three seeded cosine modes, so every member lies in `[¼, 7/4]`.
pub fn smooth_corpus(grid: Grid, size: usize, seed: u64) -> Vec<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| {
            let ms = modes(&mut rng, 3, grid.dim());
            Field::scalar_from_fn(grid, |x| 1.0 + 0.75 * eval(&grid, &ms, x))
        })
        .collect()
}

/// Initial data with `m` components; component `c` of the bump and cosine
/// kinds is scaled by `1/(c+1)` so systems start off the diagonal.
pub fn initial_field(init: &InitialSection, grid: Grid, m: usize, seed: u64, base: &Path) -> Result<Field> {
    let dim = grid.dim();
    let center: Vec<f64> = match &init.center {
        Some(c) if c.len() == dim => c.clone(),
        Some(c) => return Err(Error::Config(format!("[initial] center has {} entries, N = {dim}", c.len()))),
        None => grid.extents().iter().map(|e| 0.5 * e).collect(),
    };
    let field = match init.kind {
        InitialKind::Constant => Field::from_fn(grid, m, |_, out| out.iter_mut().for_each(|v| *v = init.offset + init.amplitude)),
        InitialKind::Bump => {
            if !(init.width > 0.0) {
                return Err(Error::Config("[initial] width must be positive".into()));
            }
            Field::from_fn(grid, m, |x, out| {
                let r2: f64 = (0..dim).map(|d| (x[d] - center[d]).powi(2)).sum::<f64>() / (init.width * init.width);
                let b = (1.0 - r2).max(0.0).powi(2);
                for (c, v) in out.iter_mut().enumerate() {
                    *v = init.offset + init.amplitude * b / (c + 1) as f64;
                }
            })
        }
        InitialKind::Cosine => Field::from_fn(grid, m, |x, out| {
            let prod: f64 = (0..dim).map(|d| (std::f64::consts::PI * x[d] / grid.extents()[d]).cos()).product();
            for (c, v) in out.iter_mut().enumerate() {
                *v = init.offset + init.amplitude * prod / (c + 1) as f64;
            }
        }),
        InitialKind::RandomSmooth => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let per: Vec<Vec<Mode>> = (0..m).map(|_| modes(&mut rng, init.modes.max(1), dim)).collect();
            Field::from_fn(grid, m, |x, out| {
                for (c, v) in out.iter_mut().enumerate() {
                    *v = init.offset + init.amplitude * eval(&grid, &per[c], x);
                }
            })
        }
        InitialKind::Snapshot => {
            let rel = init
                .path
                .as_ref()
                .ok_or_else(|| Error::Config("[initial] kind = \"snapshot\" needs path".into()))?;
            let f = io::load_snapshot(&base.join(rel), grid.boundary())?;
            if f.grid().cells() != grid.cells() || f.components() != m {
                return Err(Error::Config(format!("snapshot {rel} does not match [domain] and m = {m}")));
            }
            f.with_grid(grid)?
        }
    };
    Ok(field)
}
