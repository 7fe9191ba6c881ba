//! Exact convex-combination certificates via phase-one simplex with
//! rational pivoting and Bland's rule.

use serde::Serialize;

use crate::rational::{dot, Rat};

use super::PolytopeError;

/// Convex weights certifying membership in the hull of a point list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MembershipCertificate {
    /// One weight per point, aligned with the queried list; nonnegative,
    /// summing to one, mixing exactly to the queried point.
    pub weights: Vec<Rat>,
}

/// Outcome of the exact feasibility search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertificateOutcome {
    Member(MembershipCertificate),
    /// Verified infeasibility: a hyperplane with `normal . p <= bound`
    /// for every listed point but `normal . x > bound` at the query.
    Separated { normal: Vec<Rat>, bound: Rat },
}

/// Searches for convex weights writing `point` as a mixture of `points`.
///
/// Runs phase-one simplex on `sum w = 1`, `sum w p = x`, `w >= 0`. Returns
/// either exact weights or a separating hyperplane extracted from the
/// final dual values; both are re-verified before returning.
pub fn convex_certificate(
    point: &[Rat],
    points: &[Vec<Rat>],
) -> Result<CertificateOutcome, PolytopeError> {
    if points.is_empty() {
        return Err(PolytopeError::EmptyInput);
    }
    let dim = point.len();
    for p in points {
        if p.len() != dim {
            return Err(PolytopeError::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
    }

    let n = points.len();
    let rows = dim + 1;

    // Equality system [A | b]: first row sum w = 1, then the coordinates.
    // Rows with negative right-hand side are negated so b >= 0.
    let mut flipped = vec![false; rows];
    let mut a = vec![vec![Rat::zero(); n]; rows];
    let mut b = vec![Rat::zero(); rows];
    b[0] = Rat::one();
    a[0].fill(Rat::one());
    for i in 0..dim {
        b[i + 1] = point[i].clone();
        for (cell, p) in a[i + 1].iter_mut().zip(points) {
            *cell = p[i].clone();
        }
    }
    for i in 0..rows {
        if b[i].is_negative() {
            flipped[i] = true;
            b[i] = -b[i].clone();
            for cell in a[i].iter_mut() {
                *cell = -cell.clone();
            }
        }
    }

    // Tableau columns: n structural + rows artificial, plus rhs.
    // Artificial variable i starts basic in row i.
    let total = n + rows;
    let mut tab: Vec<Vec<Rat>> = (0..rows)
        .map(|i| {
            let mut row = Vec::with_capacity(total + 1);
            row.extend(a[i].iter().cloned());
            row.extend((0..rows).map(|k| if k == i { Rat::one() } else { Rat::zero() }));
            row.push(b[i].clone());
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..total).collect();

    // Reduced-cost row for minimizing the artificial sum: c_j - y A_j with
    // initial y = 1 on every row.
    let mut cost = vec![Rat::zero(); total + 1];
    for (j, c) in cost.iter_mut().enumerate().take(n) {
        for row in tab.iter() {
            *c -= &row[j];
        }
    }
    let mut objective = Rat::zero();
    for row in tab.iter() {
        objective -= &row[total];
    }

    // Bland: pivot in the smallest-index column with negative reduced cost.
    while let Some(enter) = (0..total).find(|&j| cost[j].is_negative()) {
        // Ratio test, Bland tie-break on smallest basis variable.
        let mut leave: Option<(usize, Rat)> = None;
        for (i, row) in tab.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[total] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((best_i, best)) => {
                        ratio < *best || (ratio == *best && basis[i] < basis[*best_i])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((pivot_row, _)) = leave else {
            // Unbounded phase-one objective cannot happen: it is bounded
            // below by zero on the feasible region of the auxiliary LP.
            unreachable!("phase-one simplex cannot be unbounded");
        };

        let pivot = tab[pivot_row][enter].clone();
        for x in tab[pivot_row].iter_mut() {
            *x /= &pivot;
        }
        for i in 0..rows {
            if i != pivot_row && !tab[i][enter].is_zero() {
                let factor = tab[i][enter].clone();
                let (pr, row) = if i < pivot_row {
                    let (head, tail) = tab.split_at_mut(pivot_row);
                    (&tail[0], &mut head[i])
                } else {
                    let (head, tail) = tab.split_at_mut(i);
                    (&head[pivot_row], &mut tail[0])
                };
                for (x, y) in row.iter_mut().zip(pr) {
                    *x -= &factor * y;
                }
            }
        }
        if !cost[enter].is_zero() {
            let factor = cost[enter].clone();
            for (x, y) in cost.iter_mut().zip(&tab[pivot_row]) {
                *x -= &factor * y;
            }
            objective -= &factor * &tab[pivot_row][total];
        }
        basis[pivot_row] = enter;
    }

    if objective.is_zero() {
        let mut weights = vec![Rat::zero(); n];
        for (i, &var) in basis.iter().enumerate() {
            if var < n {
                weights[var] = tab[i][total].clone();
            }
        }
        if !verify_weights(&weights, point, points) {
            unreachable!("simplex produced an invalid certificate");
        }
        return Ok(CertificateOutcome::Member(MembershipCertificate { weights }));
    }

    // Infeasible: dual values off the final artificial reduced costs give
    // a Farkas certificate y with y.b > 0 and y^T A <= 0.
    let mut normal = vec![Rat::zero(); dim];
    let mut bound = Rat::zero();
    for i in 0..rows {
        // reduced cost of artificial i is 1 - y_i
        let y = Rat::one() - &cost[n + i];
        let signed = if flipped[i] { -y } else { y };
        if i == 0 {
            bound = -signed;
        } else {
            normal[i - 1] = signed;
        }
    }
    // y . (1, p) <= 0 for all points and > 0 at the query, i.e.
    // normal . p <= bound everywhere but normal . x > bound.
    let ok = points.iter().all(|p| dot(&normal, p) <= bound) && dot(&normal, point) > bound;
    if !ok {
        unreachable!("simplex produced an invalid separation certificate");
    }
    Ok(CertificateOutcome::Separated { normal, bound })
}

fn verify_weights(weights: &[Rat], point: &[Rat], points: &[Vec<Rat>]) -> bool {
    if weights.iter().any(Rat::is_negative) {
        return false;
    }
    if weights.iter().sum::<Rat>() != Rat::one() {
        return false;
    }
    for k in 0..point.len() {
        let mixed: Rat = weights
            .iter()
            .zip(points)
            .map(|(w, p)| w * &p[k])
            .sum();
        if mixed != point[k] {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[&[i64]]) -> Vec<Vec<Rat>> {
        raw.iter()
            .map(|p| p.iter().map(|&x| Rat::int(x)).collect())
            .collect()
    }

    #[test]
    fn interior_point_of_a_segment() {
        let points = pts(&[&[0], &[1]]);
        let query = vec![Rat::new(1, 3)];
        match convex_certificate(&query, &points).unwrap() {
            CertificateOutcome::Member(cert) => {
                assert_eq!(cert.weights, vec![Rat::new(2, 3), Rat::new(1, 3)]);
            }
            other => panic!("expected membership, got {other:?}"),
        }
    }

    #[test]
    fn outside_point_is_separated() {
        let points = pts(&[&[0, 0], &[1, 0], &[0, 1]]);
        let query = vec![Rat::int(1), Rat::int(1)];
        match convex_certificate(&query, &points).unwrap() {
            CertificateOutcome::Separated { normal, bound } => {
                for p in &points {
                    assert!(dot(&normal, p) <= bound);
                }
                assert!(dot(&normal, &query) > bound);
            }
            other => panic!("expected separation, got {other:?}"),
        }
    }

    #[test]
    fn vertex_itself_is_a_member() {
        let points = pts(&[&[0, 0], &[1, 0], &[0, 1]]);
        let query = vec![Rat::int(1), Rat::int(0)];
        assert!(matches!(
            convex_certificate(&query, &points).unwrap(),
            CertificateOutcome::Member(_)
        ));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let points = pts(&[&[0, 0]]);
        let query = vec![Rat::int(0)];
        assert!(matches!(
            convex_certificate(&query, &points),
            Err(PolytopeError::DimensionMismatch { .. })
        ));
    }
}
