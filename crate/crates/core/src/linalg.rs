//! Exact Gaussian elimination over a generic [`Scalar`].
//!
//! Two jobs: picking a maximal independent subset of equality rows (with a
//! rank-infeasibility certificate when a dependent row has an inconsistent
//! right-hand side), and solving square systems for the basis-enumeration
//! oracle.

use crate::{Error, Result, Scalar};

/// Sparse equality row: `Σ coeff · x[col] = rhs`.
pub type SparseRow<S> = Vec<(usize, S)>;

/// Outcome of independent-row selection on `[A | b]`.
pub struct RowSelection<S> {
    /// Indices of kept rows, in input order (greedy lexicographic-first
    /// independent set; every dropped row is a combination of earlier rows).
    pub kept: Vec<usize>,
    /// Indices of dropped (dependent, consistent) rows.
    pub dropped: Vec<usize>,
    /// When a dependent row has an inconsistent right-hand side: a vector
    /// `y` over all input rows with `yᵀA = 0` and `yᵀb > 0`.
    pub infeasibility: Option<Vec<S>>,
}

fn densify<S: Scalar>(row: &SparseRow<S>, ncols: usize) -> Vec<S> {
    let mut dense = vec![S::zero(); ncols];
    for (c, v) in row {
        dense[*c] = dense[*c].clone() + v.clone();
    }
    dense
}

/// Greedy independent-row selection over the augmented system.
///
/// Rows are processed in order; a row reducing to zero against earlier
/// pivots is dependent. If its reduced right-hand side is nonzero the whole
/// system is inconsistent and the elimination is replayed with multiplier
/// tracking to extract the Farkas vector.
pub fn select_independent_rows<S: Scalar>(
    rows: &[SparseRow<S>],
    rhs: &[S],
    ncols: usize,
) -> Result<RowSelection<S>> {
    if rows.len() != rhs.len() {
        return Err(Error::DimensionMismatch(
            "row/rhs count mismatch in elimination".into(),
        ));
    }
    // (pivot column, reduced row, reduced rhs)
    let mut pivots: Vec<(usize, Vec<S>, S)> = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut dense = densify(row, ncols);
        let mut r = rhs[i].clone();
        for (pc, prow, prhs) in &pivots {
            if !dense[*pc].is_zero() {
                let factor = dense[*pc].clone() / prow[*pc].clone();
                for c in 0..ncols {
                    if !prow[c].is_zero() {
                        dense[c] = dense[c].clone() - factor.clone() * prow[c].clone();
                    }
                }
                r = r - factor * prhs.clone();
            }
        }
        match dense.iter().position(|v| !v.is_zero()) {
            Some(pc) => {
                pivots.push((pc, dense, r));
                kept.push(i);
            }
            None if r.is_zero() => dropped.push(i),
            None => {
                let y = dependency_certificate(rows, rhs, ncols, i)?;
                return Ok(RowSelection {
                    kept,
                    dropped,
                    infeasibility: Some(y),
                });
            }
        }
    }
    Ok(RowSelection {
        kept,
        dropped,
        infeasibility: None,
    })
}

/// Replay the elimination up to `bad_row`, tracking multipliers, and return
/// the normalized certificate `y` with `yᵀA = 0`, `yᵀb > 0`.
fn dependency_certificate<S: Scalar>(
    rows: &[SparseRow<S>],
    rhs: &[S],
    ncols: usize,
    bad_row: usize,
) -> Result<Vec<S>> {
    let m = rows.len();
    let mut pivots: Vec<(usize, Vec<S>, S, Vec<S>)> = Vec::new();
    for (i, row) in rows.iter().take(bad_row + 1).enumerate() {
        let mut dense = densify(row, ncols);
        let mut r = rhs[i].clone();
        let mut mult = vec![S::zero(); m];
        mult[i] = S::one();
        for (pc, prow, prhs, pmult) in &pivots {
            if !dense[*pc].is_zero() {
                let factor = dense[*pc].clone() / prow[*pc].clone();
                for c in 0..ncols {
                    if !prow[c].is_zero() {
                        dense[c] = dense[c].clone() - factor.clone() * prow[c].clone();
                    }
                }
                for k in 0..m {
                    if !pmult[k].is_zero() {
                        mult[k] = mult[k].clone() - factor.clone() * pmult[k].clone();
                    }
                }
                r = r - factor * prhs.clone();
            }
        }
        if i == bad_row {
            if dense.iter().any(|v| !v.is_zero()) || r.is_zero() {
                return Err(Error::Internal(
                    "certificate replay disagrees with elimination".into(),
                ));
            }
            let y = if r.is_negative() {
                mult.into_iter().map(|v| -v).collect()
            } else {
                mult
            };
            return Ok(y);
        }
        if let Some(pc) = dense.iter().position(|v| !v.is_zero()) {
            pivots.push((pc, dense, r, mult));
        }
    }
    Err(Error::Internal("bad row index in certificate replay".into()))
}

/// Solve the square system `A x = b` by Gaussian elimination; `None` when
/// `A` is singular.
#[allow(clippy::needless_range_loop)]
pub fn solve_square<S: Scalar>(a: &[Vec<S>], b: &[S]) -> Option<Vec<S>> {
    let n = b.len();
    let mut m: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(row, r)| {
            let mut v = row.clone();
            v.push(r.clone());
            v
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone() / p.clone();
                for c in col..=n {
                    if !m[col][c].is_zero() {
                        m[r][c] = m[r][c].clone() - factor.clone() * m[col][c].clone();
                    }
                }
            }
        }
    }
    Some(
        (0..n)
            .map(|r| m[r][n].clone() / m[r][r].clone())
            .collect(),
    )
}

/// `yᵀA` as a dense vector over columns.
pub fn combine_rows<S: Scalar>(rows: &[SparseRow<S>], y: &[S], ncols: usize) -> Vec<S> {
    let mut out = vec![S::zero(); ncols];
    for (row, w) in rows.iter().zip(y) {
        if w.is_zero() {
            continue;
        }
        for (c, v) in row {
            out[*c] = out[*c].clone() + w.clone() * v.clone();
        }
    }
    out
}

/// Sparse dot `row · x`.
pub fn row_dot<S: Scalar>(row: &SparseRow<S>, x: &[S]) -> S {
    row.iter()
        .fold(S::zero(), |acc, (c, v)| acc + v.clone() * x[*c].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::Rational;

    fn sparse(vals: &[i64]) -> SparseRow<Rational> {
        vals.iter()
            .enumerate()
            .filter(|(_, v)| **v != 0)
            .map(|(c, v)| (c, rat(*v, 1)))
            .collect()
    }

    #[test]
    fn keeps_lex_first_independent_rows() {
        let rows = vec![
            sparse(&[1, 1, 0]),
            sparse(&[0, 1, 1]),
            sparse(&[1, 2, 1]), // row0 + row1
            sparse(&[1, 0, -1]),
        ];
        let rhs = vec![rat(1, 1), rat(2, 1), rat(3, 1), rat(-1, 1)];
        let sel = select_independent_rows(&rows, &rhs, 3).unwrap();
        assert_eq!(sel.kept, vec![0, 1]);
        assert_eq!(sel.dropped, vec![2, 3]);
        assert!(sel.infeasibility.is_none());
    }

    #[test]
    fn detects_inconsistent_dependency() {
        let rows = vec![sparse(&[1, 1]), sparse(&[2, 2])];
        let rhs = vec![rat(1, 1), rat(3, 1)];
        let sel = select_independent_rows(&rows, &rhs, 2).unwrap();
        let y = sel.infeasibility.expect("inconsistent system");
        let combo = combine_rows(&rows, &y, 2);
        assert!(combo.iter().all(|v| v == &rat(0, 1)));
        let yb: Rational = y.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        assert!(yb > rat(0, 1));
    }

    #[test]
    fn square_solve() {
        let a = vec![
            vec![rat(2, 1), rat(1, 1)],
            vec![rat(1, 1), rat(-1, 1)],
        ];
        let b = vec![rat(4, 1), rat(-1, 1)];
        let x = solve_square(&a, &b).unwrap();
        assert_eq!(x, vec![rat(1, 1), rat(2, 1)]);
        let singular = vec![
            vec![rat(1, 1), rat(2, 1)],
            vec![rat(2, 1), rat(4, 1)],
        ];
        assert!(solve_square(&singular, &b).is_none());
    }
}
