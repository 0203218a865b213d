//! Plain-text field snapshots.
//!
//! Header line `N m cells... extents...`, then one line per cell (row-major)
//! holding its `m` component values. Values use the shortest round-trip
//! decimal form, so write → read is exact.

use super::{BoundaryKind, Field, Grid};
use crate::error::{Error, Result};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

/// Shortest round-trip form, switching to exponent notation outside
/// `[1e-4, 1e15)`.
pub fn format_real(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_snapshot<W: Write>(field: &Field, mut out: W) -> Result<()> {
    let g = field.grid();
    let mut header = format!("{} {}", g.dim(), field.components());
    for c in g.cells() {
        header.push_str(&format!(" {c}"));
    }
    for e in g.extents() {
        header.push_str(&format!(" {e}"));
    }
    writeln!(out, "{header}")?;
    let mut line = String::new();
    for cell in 0..g.len() {
        line.clear();
        for (k, v) in field.at(cell).iter().enumerate() {
            if k > 0 {
                line.push(' ');
            }
            line.push_str(&format_real(*v));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(input: R, boundary: BoundaryKind) -> Result<Field> {
    let mut reader = BufReader::new(input);
    let mut header = String::new();
    // leading `#` lines carry metadata
    loop {
        header.clear();
        if reader.read_line(&mut header)? == 0 || !header.trim_start().starts_with('#') {
            break;
        }
    }
    let parts: Vec<&str> = header.split_whitespace().collect();
    let parse_usize = |s: &str, what: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::Parse(format!("snapshot header: bad {what} '{s}'")))
    };
    if parts.len() < 2 {
        return Err(Error::Parse("snapshot header too short".into()));
    }
    let dim = parse_usize(parts[0], "dimension")?;
    let m = parse_usize(parts[1], "component count")?;
    if parts.len() != 2 + 2 * dim {
        return Err(Error::Parse(format!(
            "snapshot header: expected {} fields for N = {dim}, got {}",
            2 + 2 * dim,
            parts.len()
        )));
    }
    let cells = parts[2..2 + dim]
        .iter()
        .map(|s| parse_usize(s, "cell count"))
        .collect::<Result<Vec<_>>>()?;
    let extents = parts[2 + dim..]
        .iter()
        .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("snapshot header: bad extent '{s}'"))))
        .collect::<Result<Vec<_>>>()?;
    let grid = Grid::new(&extents, &cells, boundary)?;
    let mut rest = String::new();
    reader.read_to_string(&mut rest)?;
    let values = rest
        .split_whitespace()
        .enumerate()
        .map(|(i, s)| s.parse::<f64>().map_err(|_| Error::Parse(format!("snapshot value {i}: '{s}'"))))
        .collect::<Result<Vec<_>>>()?;
    Field::new(grid, m, values)
}

pub fn save_snapshot(field: &Field, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_snapshot(field, std::io::BufWriter::new(file))
}

pub fn load_snapshot(path: &Path, boundary: BoundaryKind) -> Result<Field> {
    read_snapshot(std::fs::File::open(path)?, boundary)
}

/// One row per cell: centre coordinates, then component values.
pub fn write_csv<W: Write>(field: &Field, mut out: W) -> Result<()> {
    let g = field.grid();
    let mut cols: Vec<String> = (0..g.dim()).map(|a| format!("x{a}")).collect();
    cols.extend((0..field.components()).map(|c| format!("c{c}")));
    writeln!(out, "{}", cols.join(","))?;
    for cell in 0..g.len() {
        let x = g.center(cell);
        let row: Vec<String> =
            x[..g.dim()].iter().chain(field.at(cell)).map(|v| format!("{v}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = Grid::new(&[2.0, 1.0], &[3, 2], BoundaryKind::Neumann).unwrap();
        let f = Field::constant(g, &[1.5, -2.0]);
        let mut buf = Vec::new();
        write_snapshot(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "2 2 3 2 2 1");
        assert_eq!(text.lines().nth(1).unwrap(), "1.5 -2");
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_snapshot("2 1 3".as_bytes(), BoundaryKind::Neumann).is_err());
        assert!(read_snapshot("1 1 2 1.0\n1 x\n".as_bytes(), BoundaryKind::Neumann).is_err());
        assert!(read_snapshot("1 1 3 1.0\n1 2\n".as_bytes(), BoundaryKind::Neumann).is_err());
    }

    #[test]
    fn csv_rows() {
        let g = Grid::unit(1, 2, BoundaryKind::Neumann).unwrap();
        let f = Field::constant(g, &[7.0]);
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x0,c0\n0.25,7\n0.75,7\n");
    }

    proptest! {
        #[test]
        fn snapshot_round_trip_is_exact(
            dims in prop::collection::vec(3usize..6, 1..=3),
            m in 1usize..3,
            seed in any::<u64>(),
        ) {
            let extents: Vec<f64> = dims.iter().map(|&d| 0.5 + d as f64 / 3.0).collect();
            let g = Grid::new(&extents, &dims, BoundaryKind::Dirichlet).unwrap();
            let mut state = seed;
            let values = (0..g.len() * m).map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            }).collect();
            let f = Field::new(g, m, values).unwrap();
            let mut buf = Vec::new();
            write_snapshot(&f, &mut buf).unwrap();
            let back = read_snapshot(buf.as_slice(), BoundaryKind::Dirichlet).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
