//! Exact rational linear algebra: reduced row echelon form, rank,
//! nullspaces, inverses. Everything here is over [`Rat`], no pivoting
//! heuristics, so results are deterministic.

use num::bigint::BigInt;

use crate::rational::Rat;

/// Reduced row echelon form of a rational matrix.
#[derive(Debug, Clone)]
pub struct Rref {
    pub rows: Vec<Vec<Rat>>,
    /// Pivot column of each stored row, strictly increasing.
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl Rref {
    pub fn new(input: &[Vec<Rat>], ncols: usize) -> Self {
        let mut rref = Rref {
            rows: Vec::new(),
            pivots: Vec::new(),
            ncols,
        };
        for row in input {
            rref.insert(row.clone());
        }
        rref
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Eliminates the pivot columns of `self` from `row`, returning the
    /// residual. The residual is zero iff `row` lies in the row space.
    pub fn residual(&self, mut row: Vec<Rat>) -> Vec<Rat> {
        debug_assert_eq!(row.len(), self.ncols);
        for (r, &p) in self.rows.iter().zip(&self.pivots) {
            if !row[p].is_zero() {
                let factor = row[p].clone();
                for (x, y) in row.iter_mut().zip(r) {
                    *x -= &factor * y;
                }
            }
        }
        row
    }

    /// Adds a row; returns true if it increased the rank.
    pub fn insert(&mut self, row: Vec<Rat>) -> bool {
        let mut row = self.residual(row);
        let Some(pivot) = row.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let lead = row[pivot].clone();
        for x in row.iter_mut() {
            *x /= &lead;
        }
        // back-substitute into existing rows to keep the form reduced
        for r in self.rows.iter_mut() {
            if !r[pivot].is_zero() {
                let factor = r[pivot].clone();
                for (x, y) in r.iter_mut().zip(&row) {
                    *x -= &factor * y;
                }
            }
        }
        let at = self.pivots.partition_point(|&p| p < pivot);
        self.rows.insert(at, row);
        self.pivots.insert(at, pivot);
        true
    }

    /// Columns that carry no pivot.
    pub fn free_columns(&self) -> Vec<usize> {
        let mut free = Vec::new();
        let mut next = 0;
        for c in 0..self.ncols {
            if next < self.pivots.len() && self.pivots[next] == c {
                next += 1;
            } else {
                free.push(c);
            }
        }
        free
    }

    /// Basis of `{x : A x = 0}`: one vector per free column, carrying 1
    /// there and the negated pivot-row entries at pivot positions.
    pub fn nullspace_basis(&self) -> Vec<Vec<Rat>> {
        self.free_columns()
            .into_iter()
            .map(|f| {
                let mut v = vec![Rat::zero(); self.ncols];
                v[f] = Rat::one();
                for (r, &p) in self.rows.iter().zip(&self.pivots) {
                    v[p] = -r[f].clone();
                }
                v
            })
            .collect()
    }
}

/// Rank of a rational matrix given as rows.
pub fn rank(rows: &[Vec<Rat>], ncols: usize) -> usize {
    Rref::new(rows, ncols).rank()
}

/// Indices of a maximal linearly independent subset of rows, greedy in
/// input order.
pub fn independent_rows(rows: &[Vec<Rat>], ncols: usize) -> Vec<usize> {
    let mut rref = Rref {
        rows: Vec::new(),
        pivots: Vec::new(),
        ncols,
    };
    let mut kept = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        if rref.insert(row.clone()) {
            kept.push(idx);
        }
    }
    kept
}

/// Inverse of a square rational matrix, or None if singular.
pub fn invert(mat: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = mat.len();
    let mut work: Vec<Vec<Rat>> = mat
        .iter()
        .enumerate()
        .map(|(i, row)| {
            debug_assert_eq!(row.len(), n);
            let mut ext = row.clone();
            ext.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            ext
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !work[r][col].is_zero())?;
        work.swap(col, pivot_row);
        let lead = work[col][col].clone();
        for x in work[col].iter_mut() {
            *x /= &lead;
        }
        for r in 0..n {
            if r != col && !work[r][col].is_zero() {
                let factor = work[r][col].clone();
                let (pivot, row) = if r < col {
                    let (head, tail) = work.split_at_mut(col);
                    (&tail[0], &mut head[r])
                } else {
                    let (head, tail) = work.split_at_mut(r);
                    (&head[col], &mut tail[0])
                };
                for (x, y) in row.iter_mut().zip(pivot) {
                    *x -= &factor * y;
                }
            }
        }
    }
    Some(work.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Scales a rational vector to a primitive integer vector (gcd 1), by a
/// positive factor, and returns the integer entries.
pub fn primitive_integer(coords: &[Rat]) -> Vec<BigInt> {
    let mut scaled = coords.to_vec();
    crate::model::canonical_scale_vector(&mut scaled);
    scaled.iter().map(|r| r.numer().clone()).collect()
}
