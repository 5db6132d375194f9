//! Point-set generation and export for the XOR fractals: the Sierpiński
//! tetrahedron carrying the transport plans, and the carry-free triangle
//! `x + y = x ⊕ y`.

use crate::{Error, Result};
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FractalSet {
    /// `(i, j, i⊕j)/2^n` — support of the minimizing plan.
    TetrahedronMin,
    /// `(i, j, (2^n-1)-(i⊕j))/2^n` — support of the maximizing plan.
    TetrahedronMax,
    /// Pairs `(i, j)/2^n` with `i + j = i⊕j` (no binary carries).
    Triangle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FractalFormat {
    Csv,
    Ply,
    Pgm,
}

/// PGM images are `2^n × 2^n`; keep that within a sane memory budget.
const MAX_PGM_LEVEL: u32 = 12;

/// Triangle pairs at the given level: `(i, j)` with `i + j == i ^ j`,
/// i.e. disjoint binary supports. There are exactly `3^n` of them.
pub fn triangle_pairs(level: u32) -> Vec<(u64, u64)> {
    let top = 1u64 << level;
    let mut out = Vec::new();
    for i in 0..top {
        for j in 0..top {
            if i + j == i ^ j {
                out.push((i, j));
            }
        }
    }
    out
}

/// Tetrahedron points at the given level, `4^n` of them.
pub fn tetrahedron_points(level: u32, max_variant: bool) -> Vec<(u64, u64, u64)> {
    let top = 1u64 << level;
    let mut out = Vec::with_capacity((top * top) as usize);
    for i in 0..top {
        for j in 0..top {
            let k = if max_variant { (top - 1) - (i ^ j) } else { i ^ j };
            out.push((i, j, k));
        }
    }
    out
}

fn dyadic_label(m: u64, level: u32) -> String {
    if level == 0 {
        m.to_string()
    } else {
        format!("{m}/2^{level}")
    }
}

/// Write the chosen point set in the chosen format.
///
/// CSV carries pinned-level dyadic coordinates; PLY carries integer-scaled
/// vertices with the scale in a comment; PGM is a binary occupancy image of
/// the `(x, y)` projection (the full square for the tetrahedra, the gasket
/// for the triangle).
pub fn export_fractal(
    level: u32,
    what: FractalSet,
    format: FractalFormat,
    out: &mut dyn Write,
) -> Result<()> {
    match format {
        FractalFormat::Csv => write_csv(level, what, out),
        FractalFormat::Ply => write_ply(level, what, out),
        FractalFormat::Pgm => write_pgm(level, what, out),
    }
}

fn write_csv(level: u32, what: FractalSet, out: &mut dyn Write) -> Result<()> {
    match what {
        FractalSet::Triangle => {
            writeln!(out, "x,y")?;
            for (i, j) in triangle_pairs(level) {
                writeln!(out, "{},{}", dyadic_label(i, level), dyadic_label(j, level))?;
            }
        }
        FractalSet::TetrahedronMin | FractalSet::TetrahedronMax => {
            writeln!(out, "x,y,z")?;
            let max = matches!(what, FractalSet::TetrahedronMax);
            for (i, j, k) in tetrahedron_points(level, max) {
                writeln!(
                    out,
                    "{},{},{}",
                    dyadic_label(i, level),
                    dyadic_label(j, level),
                    dyadic_label(k, level)
                )?;
            }
        }
    }
    Ok(())
}

fn write_ply(level: u32, what: FractalSet, out: &mut dyn Write) -> Result<()> {
    let points: Vec<(u64, u64, u64)> = match what {
        FractalSet::Triangle => triangle_pairs(level)
            .into_iter()
            .map(|(i, j)| (i, j, 0))
            .collect(),
        FractalSet::TetrahedronMin => tetrahedron_points(level, false),
        FractalSet::TetrahedronMax => tetrahedron_points(level, true),
    };
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    writeln!(out, "comment integer vertices scaled by 2^{level}")?;
    writeln!(out, "element vertex {}", points.len())?;
    writeln!(out, "property int x")?;
    writeln!(out, "property int y")?;
    writeln!(out, "property int z")?;
    writeln!(out, "end_header")?;
    for (i, j, k) in points {
        writeln!(out, "{i} {j} {k}")?;
    }
    Ok(())
}

fn write_pgm(level: u32, what: FractalSet, out: &mut dyn Write) -> Result<()> {
    if level > MAX_PGM_LEVEL {
        return Err(Error::InvalidInput(format!(
            "pgm export capped at level {MAX_PGM_LEVEL}"
        )));
    }
    let side = 1usize << level;
    let mut pixels = vec![0u8; side * side];
    let mut set = |i: u64, j: u64| {
        // row 0 is the top of the image: y grows upward
        let row = side - 1 - j as usize;
        pixels[row * side + i as usize] = 255;
    };
    match what {
        FractalSet::Triangle => {
            for (i, j) in triangle_pairs(level) {
                set(i, j);
            }
        }
        FractalSet::TetrahedronMin | FractalSet::TetrahedronMax => {
            // every (i, j) pair carries exactly one plan atom, so the
            // (x, y) projection fills the square
            for i in 0..side as u64 {
                for j in 0..side as u64 {
                    set(i, j);
                }
            }
        }
    }
    write!(out, "P5\n{side} {side}\n255\n")?;
    out.write_all(&pixels)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_level_one() {
        assert_eq!(triangle_pairs(1), vec![(0, 0), (0, 1), (1, 0)]);
    }

    #[test]
    fn counts() {
        for n in 0..=10u32 {
            assert_eq!(triangle_pairs(n).len() as u64, 3u64.pow(n), "3^n at n={n}");
        }
        for n in 0..=6u32 {
            assert_eq!(tetrahedron_points(n, false).len() as u64, 4u64.pow(n));
            assert_eq!(tetrahedron_points(n, true).len() as u64, 4u64.pow(n));
        }
    }

    #[test]
    fn triangle_inequality_is_tight_exactly_on_the_set() {
        for n in 0..=8u32 {
            let set: std::collections::HashSet<(u64, u64)> =
                triangle_pairs(n).into_iter().collect();
            let top = 1u64 << n;
            for i in 0..top {
                for j in 0..top {
                    assert!(i + j >= (i ^ j));
                    assert_eq!(i + j == (i ^ j), set.contains(&(i, j)));
                }
            }
        }
    }

    #[test]
    fn csv_output() {
        let mut buf = Vec::new();
        write_csv(1, FractalSet::Triangle, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "x,y\n0/2^1,0/2^1\n0/2^1,1/2^1\n1/2^1,0/2^1\n");
        let mut buf = Vec::new();
        write_csv(0, FractalSet::TetrahedronMin, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,y,z\n0,0,0\n");
    }

    #[test]
    fn ply_header_and_body() {
        let mut buf = Vec::new();
        write_ply(1, FractalSet::TetrahedronMax, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("ply\nformat ascii 1.0\n"));
        assert!(text.contains("element vertex 4"));
        assert!(text.contains("0 0 1")); // (0,0) -> 1 - 0
        assert!(text.ends_with("1 1 1\n"));
    }

    #[test]
    fn pgm_payload() {
        let mut buf = Vec::new();
        write_pgm(1, FractalSet::Triangle, &mut buf).unwrap();
        assert_eq!(&buf[..9], b"P5\n2 2\n25");
        let pixels = &buf[buf.len() - 4..];
        // rows top-down: (0,1) white, (1,1) black / (0,0) white, (1,0) white
        assert_eq!(pixels, &[255, 0, 255, 255]);
        assert!(write_pgm(MAX_PGM_LEVEL + 1, FractalSet::Triangle, &mut Vec::new()).is_err());
    }
}
