//! Exact rational linear solves and desk-scale vertex/ray enumeration for
//! polyhedra of the form `{x | Bx <= b, x >= 0}`.
//!
//! Enumeration walks every choice of n tight constraints, solves the
//! resulting square system exactly, and keeps the feasible solutions. The
//! combinatorial cost is capped by the caller (n + m <= 12 at the public
//! entry points), which keeps everything comfortably below a thousand
//! candidate systems.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rat::Rat;
use crate::tensor::DenseMatrix;

/// Solves `M x = rhs` for square `M` by Gaussian elimination with exact
/// pivoting. Returns `None` when `M` is singular.
#[allow(clippy::needless_range_loop)]
pub fn solve_square(m: &DenseMatrix, rhs: &[Rat]) -> Result<Option<Vec<Rat>>> {
    let n = m.rows();
    if m.cols() != n || rhs.len() != n {
        return Err(Error::invalid("solve_square needs a square system"));
    }
    let mut a: Vec<Vec<Rat>> = (0..n)
        .map(|r| {
            let mut row: Vec<Rat> = m.row(r).to_vec();
            row.push(rhs[r].clone());
            row
        })
        .collect();

    for col in 0..n {
        let pivot_row = match (col..n).find(|&r| !a[r][col].is_zero()) {
            Some(r) => r,
            None => return Ok(None),
        };
        a.swap(col, pivot_row);
        let pivot = a[col][col].clone();
        for entry in a[col].iter_mut() {
            *entry /= &pivot;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in col..=n {
                let delta = &factor * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    Ok(Some(a.into_iter().map(|row| row[n].clone()).collect()))
}

fn subsets(pool: usize, pick: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(pick);
    subsets_rec(0, pool, pick, &mut current, &mut out);
    out
}

fn subsets_rec(
    start: usize,
    pool: usize,
    pick: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if current.len() == pick {
        out.push(current.clone());
        return;
    }
    let remaining = pick - current.len();
    for i in start..pool {
        if pool - i < remaining {
            break;
        }
        current.push(i);
        subsets_rec(i + 1, pool, pick, current, out);
        current.pop();
    }
}

/// Rows of the inequality system `Bx <= b, x >= 0` written uniformly as
/// `row · x <= rhs`: first the m rows of B, then `-x_j <= 0` for each j.
fn inequality_rows(b_matrix: &DenseMatrix, b_rhs: &[Rat]) -> (Vec<Vec<Rat>>, Vec<Rat>) {
    let n = b_matrix.cols();
    let mut rows: Vec<Vec<Rat>> = b_matrix.row_iter().map(<[Rat]>::to_vec).collect();
    let mut rhs: Vec<Rat> = b_rhs.to_vec();
    for j in 0..n {
        let mut row = vec![Rat::zero(); n];
        row[j] = -Rat::one();
        rows.push(row);
        rhs.push(Rat::zero());
    }
    (rows, rhs)
}

fn satisfies_all(rows: &[Vec<Rat>], rhs: &[Rat], x: &[Rat]) -> bool {
    rows.iter().zip(rhs).all(|(row, bound)| {
        let value: Rat = row.iter().zip(x).map(|(a, b)| a * b).sum();
        value <= *bound
    })
}

/// All vertices (basic feasible solutions) of `{x | Bx <= b, x >= 0}`,
/// sorted lexicographically. An empty result means the set is empty.
pub fn polyhedron_vertices(b_matrix: &DenseMatrix, b_rhs: &[Rat]) -> Result<Vec<Vec<Rat>>> {
    let n = b_matrix.cols();
    if n == 0 {
        return Err(Error::invalid("polyhedron needs at least one variable"));
    }
    let (rows, rhs) = inequality_rows(b_matrix, b_rhs);
    let mut found: BTreeSet<Vec<Rat>> = BTreeSet::new();
    for subset in subsets(rows.len(), n) {
        let system = DenseMatrix::from_rows(subset.iter().map(|&i| rows[i].clone()).collect())?;
        let system_rhs: Vec<Rat> = subset.iter().map(|&i| rhs[i].clone()).collect();
        if let Some(x) = solve_square(&system, &system_rhs)? {
            if satisfies_all(&rows, &rhs, &x) {
                found.insert(x);
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// Extreme rays of the cone `{y | By <= 0, y >= 0}`, normalized to the unit
/// simplex slice `Σ y_i = 1` and sorted lexicographically. The cone is
/// pointed (it sits inside the nonnegative orthant), so it is generated by
/// these rays; an empty result means the cone is `{0}`.
pub fn cone_extreme_rays(b_matrix: &DenseMatrix) -> Result<Vec<Vec<Rat>>> {
    let n = b_matrix.cols();
    if n == 0 {
        return Err(Error::invalid("cone needs at least one variable"));
    }
    let zeros = vec![Rat::zero(); b_matrix.rows()];
    let (rows, rhs) = inequality_rows(b_matrix, &zeros);
    let normalizer = vec![Rat::one(); n];
    let mut found: BTreeSet<Vec<Rat>> = BTreeSet::new();
    for subset in subsets(rows.len(), n - 1) {
        let mut system_rows: Vec<Vec<Rat>> = subset.iter().map(|&i| rows[i].clone()).collect();
        system_rows.push(normalizer.clone());
        let system = DenseMatrix::from_rows(system_rows)?;
        let mut system_rhs = vec![Rat::zero(); n - 1];
        system_rhs.push(Rat::one());
        if let Some(y) = solve_square(&system, &system_rhs)? {
            if satisfies_all(&rows, &rhs, &y) {
                found.insert(y);
            }
        }
    }
    Ok(found.into_iter().collect())
}
