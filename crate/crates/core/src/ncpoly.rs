//! Polynomials over two commuting families of order-2 generators.
//!
//! Monomials are pairs of reduced words, one over the `A` family and one
//! over the `B` family; adjacent equal letters cancel because every
//! generator squares to the identity. Each monomial represents a product
//! of operators with sup norm at most 1, so the sum of absolute
//! coefficients of a polynomial upper-bounds the norm of the operator it
//! stands for; taking `k`-th powers sharpens the bound to a `k`-th root.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OperatorError {
    #[error("power must be at least 1")]
    ZeroPower,
    #[error("matrix is not square")]
    NotSquare,
}

/// Product of generators in normal form: a reduced word over the `A`
/// family times a reduced word over the `B` family. Letters are 0-based
/// generator indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NCMonomial {
    a_word: Vec<u8>,
    b_word: Vec<u8>,
}

/// Concatenates two reduced words, cancelling across the seam.
fn concat_reduce(left: &[u8], right: &[u8]) -> Vec<u8> {
    let mut out = left.to_vec();
    for &letter in right {
        if out.last() == Some(&letter) {
            out.pop();
        } else {
            out.push(letter);
        }
    }
    out
}

impl NCMonomial {
    pub fn identity() -> Self {
        NCMonomial::default()
    }

    pub fn is_identity(&self) -> bool {
        self.a_word.is_empty() && self.b_word.is_empty()
    }

    /// The single generator `A_i` (0-based index).
    pub fn generator_a(i: u8) -> Self {
        NCMonomial {
            a_word: vec![i],
            b_word: Vec::new(),
        }
    }

    /// The single generator `B_j` (0-based index).
    pub fn generator_b(j: u8) -> Self {
        NCMonomial {
            a_word: Vec::new(),
            b_word: vec![j],
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        NCMonomial {
            a_word: concat_reduce(&self.a_word, &other.a_word),
            b_word: concat_reduce(&self.b_word, &other.b_word),
        }
    }

    pub fn a_word(&self) -> &[u8] {
        &self.a_word
    }

    pub fn b_word(&self) -> &[u8] {
        &self.b_word
    }
}

impl fmt::Display for NCMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        for &i in &self.a_word {
            write!(f, "A{}", i + 1)?;
        }
        for &j in &self.b_word {
            write!(f, "B{}", j + 1)?;
        }
        Ok(())
    }
}

/// Rational linear combination of normal-form monomials; zero
/// coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NCPolynomial {
    terms: BTreeMap<NCMonomial, Rat>,
}

impl NCPolynomial {
    pub fn zero() -> Self {
        NCPolynomial::default()
    }

    pub fn from_term(mono: NCMonomial, coeff: Rat) -> Self {
        let mut p = NCPolynomial::zero();
        p.add_term(mono, coeff);
        p
    }

    pub fn add_term(&mut self, mono: NCMonomial, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&NCMonomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mono: &NCMonomial) -> Rat {
        self.terms.get(mono).cloned().unwrap_or_else(Rat::zero)
    }

    /// Sum of absolute coefficient values; an upper bound on the sup norm
    /// of the represented operator.
    pub fn coeff_abs_sum(&self) -> Rat {
        self.terms.values().map(Rat::abs).sum()
    }
}

/// Distributes, concatenates words family-by-family, reduces, merges.
pub fn nc_mul(p: &NCPolynomial, q: &NCPolynomial) -> NCPolynomial {
    let mut out = NCPolynomial::zero();
    for (mp, cp) in &p.terms {
        for (mq, cq) in &q.terms {
            out.add_term(mp.mul(mq), cp * cq);
        }
    }
    out
}

/// `p^k` by repeated squaring; `k = 0` is rejected.
pub fn nc_pow(p: &NCPolynomial, k: u32) -> Result<NCPolynomial, OperatorError> {
    if k == 0 {
        return Err(OperatorError::ZeroPower);
    }
    let mut result: Option<NCPolynomial> = None;
    let mut base = p.clone();
    let mut exp = k;
    loop {
        if exp & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => nc_mul(&r, &base),
            });
        }
        exp >>= 1;
        if exp == 0 {
            break;
        }
        base = nc_mul(&base, &base);
    }
    Ok(result.expect("k >= 1"))
}

/// The operator `T = sum_ij M(i,j) A_(i+1) B_(j+1)` of a square
/// coefficient matrix; zero entries contribute no term.
pub fn from_matrix(matrix: &[Vec<Rat>]) -> Result<NCPolynomial, OperatorError> {
    let n = matrix.len();
    if matrix.iter().any(|row| row.len() != n) {
        return Err(OperatorError::NotSquare);
    }
    let mut p = NCPolynomial::zero();
    for (i, row) in matrix.iter().enumerate() {
        for (j, coeff) in row.iter().enumerate() {
            if !coeff.is_zero() {
                let mono = NCMonomial::generator_a(i as u8).mul(&NCMonomial::generator_b(j as u8));
                p.add_term(mono, coeff.clone());
            }
        }
    }
    Ok(p)
}

/// Outcome of the coefficient-sum norm bound at power `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SafetyReport {
    /// Exact sum of absolute coefficients of `T^k`.
    pub sum: Rat,
    pub k: u32,
    /// `sum <= 1` exactly, equivalently the k-th root of the sum is at
    /// most 1: quantum expectations of the inequality operator cannot
    /// exceed the bound.
    pub certified: bool,
}

/// Certifies `|T| <= 1` via `coeff_abs_sum(T^k) <= 1`; an `inconclusive`
/// result (`certified == false`) may still certify at a larger `k`.
pub fn quantum_safety_check(matrix: &[Vec<Rat>], k: u32) -> Result<SafetyReport, OperatorError> {
    let t = from_matrix(matrix)?;
    let sum = nc_pow(&t, k)?.coeff_abs_sum();
    let certified = sum <= Rat::one();
    Ok(SafetyReport { sum, k, certified })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{matrix_m1, matrix_m2, SignedPerm};

    fn a(i: u8) -> NCMonomial {
        NCMonomial::generator_a(i)
    }

    fn b(j: u8) -> NCMonomial {
        NCMonomial::generator_b(j)
    }

    #[test]
    fn generators_square_to_identity() {
        assert!(a(0).mul(&a(0)).is_identity());
        let m = a(0).mul(&b(0));
        assert!(m.mul(&m).is_identity());
    }

    #[test]
    fn families_commute_but_members_do_not() {
        // A1 B1 * A1 B2 = B1 B2 because the A letters meet and cancel
        let p = NCPolynomial::from_term(a(0).mul(&b(0)), Rat::one());
        let q = NCPolynomial::from_term(a(0).mul(&b(1)), Rat::one());
        let prod = nc_mul(&p, &q);
        assert_eq!(prod.term_count(), 1);
        assert_eq!(prod.coefficient(&b(0).mul(&b(1))), Rat::one());
        // A1 A2 does not reduce
        let m = a(0).mul(&a(1));
        assert_eq!(m.a_word(), &[0, 1]);
    }

    #[test]
    fn cancellation_cascades_through_the_seam() {
        let left = a(0).mul(&a(1));
        let right = a(1).mul(&a(0));
        assert!(left.mul(&right).is_identity());
    }

    #[test]
    fn from_matrix_m1_has_eight_terms() {
        let t1 = from_matrix(&matrix_m1()).unwrap();
        assert_eq!(t1.term_count(), 8);
    }

    #[test]
    fn from_matrix_m2_has_nine_terms() {
        let t2 = from_matrix(&matrix_m2()).unwrap();
        assert_eq!(t2.term_count(), 9);
        for (_, c) in t2.terms() {
            let abs = c.abs();
            assert!(abs == Rat::new(1, 11) || abs == Rat::new(2, 11));
        }
    }

    #[test]
    fn from_matrix_of_zero_is_empty() {
        let zero = vec![vec![Rat::zero(); 3]; 3];
        let p = from_matrix(&zero).unwrap();
        assert_eq!(p.term_count(), 0);
        assert_eq!(p.coeff_abs_sum(), Rat::zero());
    }

    #[test]
    fn square_of_t1_has_identity_coefficient_two_ninths() {
        // the diagonal of the expansion contributes sum of squared entries
        let t1 = from_matrix(&matrix_m1()).unwrap();
        let sq = nc_pow(&t1, 2).unwrap();
        assert_eq!(sq.coefficient(&NCMonomial::identity()), Rat::new(2, 9));
    }

    #[test]
    fn abs_sum_of_t1_is_four_thirds() {
        let t1 = from_matrix(&matrix_m1()).unwrap();
        assert_eq!(t1.coeff_abs_sum(), Rat::new(4, 3));
    }

    #[test]
    fn pow_zero_is_rejected() {
        let t1 = from_matrix(&matrix_m1()).unwrap();
        assert!(matches!(nc_pow(&t1, 0), Err(OperatorError::ZeroPower)));
    }

    #[test]
    fn pow_is_additive_in_the_exponent() {
        let t2 = from_matrix(&matrix_m2()).unwrap();
        let p3 = nc_pow(&t2, 3).unwrap();
        let p2 = nc_pow(&t2, 2).unwrap();
        let p5 = nc_pow(&t2, 5).unwrap();
        assert_eq!(nc_mul(&p3, &p2), p5);
    }

    #[test]
    fn mul_is_associative_on_mixed_polynomials() {
        let t1 = from_matrix(&matrix_m1()).unwrap();
        let t2 = from_matrix(&matrix_m2()).unwrap();
        let mut r = NCPolynomial::from_term(a(2).mul(&b(1)), Rat::new(-3, 5));
        r.add_term(NCMonomial::identity(), Rat::new(1, 2));
        let left = nc_mul(&nc_mul(&t1, &t2), &r);
        let right = nc_mul(&t1, &nc_mul(&t2, &r));
        assert_eq!(left, right);
    }

    #[test]
    fn abs_sum_is_submultiplicative() {
        let t1 = from_matrix(&matrix_m1()).unwrap();
        let t2 = from_matrix(&matrix_m2()).unwrap();
        let prod = nc_mul(&t1, &t2);
        assert!(prod.coeff_abs_sum() <= t1.coeff_abs_sum() * t2.coeff_abs_sum());
    }

    #[test]
    fn safety_check_on_m1() {
        let k1 = quantum_safety_check(&matrix_m1(), 1).unwrap();
        assert!(!k1.certified);
        assert_eq!(k1.sum, Rat::new(4, 3));
        let k4 = quantum_safety_check(&matrix_m1(), 4).unwrap();
        assert!(k4.certified);
        assert_eq!(k4.sum, Rat::new(155, 162));
    }

    #[test]
    fn symmetry_images_have_identical_sums() {
        let g = SignedPerm {
            row_perm: [2, 0, 1],
            col_perm: [1, 0, 2],
            row_signs: [-1, 1, 1],
            col_signs: [1, -1, -1],
        };
        let moved = g.apply(&matrix_m1());
        let base = quantum_safety_check(&matrix_m1(), 4).unwrap();
        let image = quantum_safety_check(&moved, 4).unwrap();
        assert_eq!(base.sum, image.sum);
    }
}
