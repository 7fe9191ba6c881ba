//! Floating-point quantum sampler: random mixed states and random
//! +-1-valued observables, their joint correlation matrices, and a
//! stress test of correlation inequality catalogs.
//!
//! This is the one deliberately inexact module. It is a falsification
//! probe with explicit tolerances; the proof burden for the inequalities
//! stays with the exact operator bounds. Randomness is ChaCha8, seeded
//! explicitly, so every report is reproducible.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::model::FacetList;

pub type CMat = DMatrix<Complex64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuantumError {
    #[error("local dimension must be at least 2, got {0}")]
    DimTooSmall(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("catalog is not in the correlation picture or not square")]
    BadCatalog,
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
}

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-10;
const SQUARE_TOL: f64 = 1e-9;
const REALITY_TOL: f64 = 1e-10;

fn hermitian_defect(m: &CMat) -> f64 {
    let adj = m.adjoint();
    (m - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A density matrix: Hermitian, unit trace, positive semidefinite
/// (within the module tolerances).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self, QuantumError> {
        let state = DensityMatrix { mat };
        state.check()?;
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn check(&self) -> Result<(), QuantumError> {
        if !self.mat.is_square() {
            return Err(QuantumError::DimensionMismatch("state is not square".into()));
        }
        let h = hermitian_defect(&self.mat);
        if h > HERMITIAN_TOL {
            return Err(QuantumError::InvariantViolated(format!(
                "hermiticity defect {h:e}"
            )));
        }
        let trace = self.mat.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(QuantumError::InvariantViolated(format!("trace {trace}")));
        }
        let eigen = self.mat.clone().symmetric_eigen();
        let min = eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < PSD_TOL {
            return Err(QuantumError::InvariantViolated(format!(
                "eigenvalue {min:e} below {PSD_TOL:e}"
            )));
        }
        Ok(())
    }

    /// Convex mixture of two states of equal dimension.
    pub fn mix(&self, other: &DensityMatrix, lambda: f64) -> Result<DensityMatrix, QuantumError> {
        if self.dim() != other.dim() {
            return Err(QuantumError::DimensionMismatch(
                "mixing states of different dimension".into(),
            ));
        }
        DensityMatrix::new(
            self.mat.map(|z| z * lambda) + other.mat.map(|z| z * (1.0 - lambda)),
        )
    }
}

/// A +-1-valued observable: Hermitian and squaring to the identity
/// (within tolerances), so its spectrum is contained in {-1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct PMObservable {
    mat: CMat,
}

impl PMObservable {
    pub fn new(mat: CMat) -> Result<Self, QuantumError> {
        let obs = PMObservable { mat };
        obs.check()?;
        Ok(obs)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn check(&self) -> Result<(), QuantumError> {
        if !self.mat.is_square() {
            return Err(QuantumError::DimensionMismatch("observable is not square".into()));
        }
        let h = hermitian_defect(&self.mat);
        if h > HERMITIAN_TOL {
            return Err(QuantumError::InvariantViolated(format!(
                "hermiticity defect {h:e}"
            )));
        }
        let square = &self.mat * &self.mat;
        let eye = CMat::identity(self.dim(), self.dim());
        let defect = (square - eye).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect > SQUARE_TOL {
            return Err(QuantumError::InvariantViolated(format!(
                "square-to-identity defect {defect:e}"
            )));
        }
        Ok(())
    }
}

fn gaussian_complex(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) / 2f64.sqrt()
    })
}

fn random_state(rng: &mut impl Rng, dim: usize) -> CMat {
    let g = gaussian_complex(rng, dim, dim);
    let gram = &g * g.adjoint();
    let trace = gram.trace().re;
    gram.map(|z| z / trace)
}

fn random_unitary(rng: &mut impl Rng, dim: usize) -> CMat {
    let g = gaussian_complex(rng, dim, dim);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    // fix the column phases so the distribution does not depend on the
    // phase convention of the factorization
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn random_observable(rng: &mut impl Rng, dim: usize) -> CMat {
    let u = random_unitary(rng, dim);
    // at least one +1 and one -1 eigenvalue
    let mut signs: Vec<f64> = vec![0.0; dim];
    signs[0] = 1.0;
    signs[dim - 1] = -1.0;
    for s in signs.iter_mut().take(dim - 1).skip(1) {
        *s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    }
    let d = CMat::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(signs[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    &u * d * u.adjoint()
}

/// Samples a full-support mixed state on the tensor product of two local
/// spaces, `rho = G G^dagger / tr`, from the given seed.
pub fn sample_state(dim_a: usize, dim_b: usize, seed: u64) -> Result<DensityMatrix, QuantumError> {
    if dim_a < 2 {
        return Err(QuantumError::DimTooSmall(dim_a));
    }
    if dim_b < 2 {
        return Err(QuantumError::DimTooSmall(dim_b));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DensityMatrix::new(random_state(&mut rng, dim_a * dim_b))
}

/// Samples a random +-1 observable: a Haar-ish unitary conjugation of a
/// mixed-sign diagonal, from the given seed.
pub fn sample_observable(dim: usize, seed: u64) -> Result<PMObservable, QuantumError> {
    if dim < 2 {
        return Err(QuantumError::DimTooSmall(dim));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PMObservable::new(random_observable(&mut rng, dim))
}

/// `c(i,j) = Tr[rho (A_i (x) B_j)]`: the joint correlation matrix of the
/// state under the two observable lists. Entries are checked real.
pub fn quantum_correlation(
    rho: &DensityMatrix,
    a_obs: &[PMObservable],
    b_obs: &[PMObservable],
) -> Result<Vec<Vec<f64>>, QuantumError> {
    let dim_a = a_obs.first().map(|o| o.dim()).unwrap_or(0);
    let dim_b = b_obs.first().map(|o| o.dim()).unwrap_or(0);
    if a_obs.iter().any(|o| o.dim() != dim_a) || b_obs.iter().any(|o| o.dim() != dim_b) {
        return Err(QuantumError::DimensionMismatch(
            "observables of one party must share a dimension".into(),
        ));
    }
    if rho.dim() != dim_a * dim_b {
        return Err(QuantumError::DimensionMismatch(format!(
            "state dim {} != {} * {}",
            rho.dim(),
            dim_a,
            dim_b
        )));
    }
    let mut out = Vec::with_capacity(a_obs.len());
    for a in a_obs {
        let mut row = Vec::with_capacity(b_obs.len());
        for b in b_obs {
            let joint = a.matrix().kronecker(b.matrix());
            let value = (rho.matrix() * joint).trace();
            if value.im.abs() > REALITY_TOL {
                return Err(QuantumError::InvariantViolated(format!(
                    "correlation has imaginary part {:e}",
                    value.im
                )));
            }
            row.push(value.re);
        }
        out.push(row);
    }
    Ok(out)
}

/// Report of a randomized search for catalog violations.
#[derive(Debug, Clone, Serialize)]
pub struct StressReport {
    pub trials: u64,
    pub dims: Vec<usize>,
    pub seed_base: u64,
    pub tol: f64,
    /// Largest `coeffs . c - bound` seen over all trials and catalog
    /// members; `None` when no trials ran.
    pub max_margin: Option<f64>,
    pub argmax_trial: Option<u64>,
    pub argmax_facet: Option<usize>,
    pub pass: bool,
}

/// Evaluates every catalog inequality on freshly sampled quantum
/// correlations, one seed per trial (`seed_base + trial`).
pub fn stress_test(
    catalog: &FacetList,
    trials: u64,
    dims: &[usize],
    seed_base: u64,
    tol: f64,
) -> Result<StressReport, QuantumError> {
    use crate::model::Picture;
    if catalog.picture != Picture::Correlation {
        return Err(QuantumError::BadCatalog);
    }
    let m = match catalog.facets.first() {
        None => 0,
        Some(f) => {
            let d = f.dim();
            let m = (d as f64).sqrt().round() as usize;
            if m * m != d {
                return Err(QuantumError::BadCatalog);
            }
            m
        }
    };
    if dims.is_empty() || dims.iter().any(|&d| d < 2) {
        return Err(QuantumError::DimTooSmall(*dims.iter().min().unwrap_or(&0)));
    }
    let floats: Vec<(Vec<f64>, f64)> = catalog
        .facets
        .iter()
        .map(|f| {
            (
                f.coeffs.iter().map(|c| c.to_f64()).collect(),
                f.bound.to_f64(),
            )
        })
        .collect();

    let mut max_margin: Option<f64> = None;
    let mut argmax_trial = None;
    let mut argmax_facet = None;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed_base.wrapping_add(trial));
        let pick = trial as usize;
        let dim_a = dims[pick % dims.len()];
        let dim_b = dims[(pick / dims.len()) % dims.len()];
        let rho = DensityMatrix::new(random_state(&mut rng, dim_a * dim_b))?;
        let a_obs: Vec<PMObservable> = (0..m)
            .map(|_| PMObservable::new(random_observable(&mut rng, dim_a)))
            .collect::<Result<_, _>>()?;
        let b_obs: Vec<PMObservable> = (0..m)
            .map(|_| PMObservable::new(random_observable(&mut rng, dim_b)))
            .collect::<Result<_, _>>()?;
        let corr = quantum_correlation(&rho, &a_obs, &b_obs)?;
        let flat: Vec<f64> = corr.into_iter().flatten().collect();
        for (fi, (coeffs, bound)) in floats.iter().enumerate() {
            let value: f64 = coeffs.iter().zip(&flat).map(|(c, x)| c * x).sum();
            let margin = value - bound;
            if max_margin.is_none_or(|best| margin > best) {
                max_margin = Some(margin);
                argmax_trial = Some(trial);
                argmax_facet = Some(fi);
            }
        }
    }
    let pass = max_margin.is_none_or(|m| m <= tol);
    Ok(StressReport {
        trials,
        dims: dims.to_vec(),
        seed_base,
        tol,
        max_margin,
        argmax_trial,
        argmax_facet,
        pass,
    })
}

fn pauli_z() -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ],
    )
}

fn pauli_x() -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    )
}

/// The fixed sampler sanity construction: the singlet state measured
/// with the settings that maximize the two-setting correlation
/// combination `c00 + c01 + c10 - c11` at `2 sqrt 2`.
pub fn singlet_chsh_correlation() -> Result<Vec<Vec<f64>>, QuantumError> {
    // |psi-> = (|01> - |10>)/sqrt2
    let mut psi = CMat::zeros(4, 1);
    psi[(1, 0)] = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
    psi[(2, 0)] = Complex64::new(-1.0 / 2f64.sqrt(), 0.0);
    let rho = DensityMatrix::new(&psi * psi.adjoint())?;
    let inv = 1.0 / 2f64.sqrt();
    let a_obs = vec![PMObservable::new(pauli_z())?, PMObservable::new(pauli_x())?];
    let b0 = PMObservable::new((pauli_z() + pauli_x()).map(|z| z * -inv))?;
    let b1 = PMObservable::new((pauli_z() - pauli_x()).map(|z| z * -inv))?;
    quantum_correlation(&rho, &a_obs, &[b0, b1])
}

/// The combination `c00 + c01 + c10 - c11` of a 2x2 correlation matrix.
pub fn chsh_combination(corr: &[Vec<f64>]) -> f64 {
    corr[0][0] + corr[0][1] + corr[1][0] - corr[1][1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_state_passes_invariants() {
        let rho = sample_state(2, 2, 7).unwrap();
        assert_eq!(rho.dim(), 4);
        rho.check().unwrap();
    }

    #[test]
    fn sampled_observable_squares_to_identity() {
        for dim in 2..=4 {
            let obs = sample_observable(dim, 11).unwrap();
            obs.check().unwrap();
        }
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let a = sample_state(2, 3, 42).unwrap();
        let b = sample_state(2, 3, 42).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = sample_state(2, 3, 43).unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn dims_below_two_are_rejected() {
        assert!(matches!(sample_state(1, 2, 0), Err(QuantumError::DimTooSmall(1))));
        assert!(matches!(sample_observable(1, 0), Err(QuantumError::DimTooSmall(1))));
    }

    #[test]
    fn maximally_mixed_state_has_zero_correlations() {
        let dim = 2;
        let eye = CMat::identity(dim * dim, dim * dim).map(|z| z / (dim * dim) as f64);
        let rho = DensityMatrix::new(eye).unwrap();
        // traceless observables: plain Paulis
        let a = PMObservable::new(pauli_z()).unwrap();
        let b = PMObservable::new(pauli_x()).unwrap();
        let corr = quantum_correlation(&rho, &[a], &[b]).unwrap();
        assert!(corr[0][0].abs() < 1e-12);
    }

    #[test]
    fn product_state_correlations_factor() {
        let mut v = CMat::zeros(2, 1);
        v[(0, 0)] = Complex64::new(0.6, 0.0);
        v[(1, 0)] = Complex64::new(0.0, 0.8);
        let mut w = CMat::zeros(2, 1);
        w[(0, 0)] = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        w[(1, 0)] = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        let rho = DensityMatrix::new((&v * v.adjoint()).kronecker(&(&w * w.adjoint()))).unwrap();
        let a = sample_observable(2, 21).unwrap();
        let b = sample_observable(2, 22).unwrap();
        let corr = quantum_correlation(&rho, std::slice::from_ref(&a), std::slice::from_ref(&b)).unwrap();
        let mean_a = ((&v * v.adjoint()) * a.matrix()).trace().re;
        let mean_b = ((&w * w.adjoint()) * b.matrix()).trace().re;
        assert!((corr[0][0] - mean_a * mean_b).abs() < 1e-10);
    }

    #[test]
    fn correlation_is_linear_in_the_state() {
        let r1 = sample_state(2, 2, 1).unwrap();
        let r2 = sample_state(2, 2, 2).unwrap();
        let mixed = r1.mix(&r2, 0.3).unwrap();
        let a = vec![sample_observable(2, 3).unwrap()];
        let b = vec![sample_observable(2, 4).unwrap()];
        let c1 = quantum_correlation(&r1, &a, &b).unwrap();
        let c2 = quantum_correlation(&r2, &a, &b).unwrap();
        let cm = quantum_correlation(&mixed, &a, &b).unwrap();
        let expected = 0.3 * c1[0][0] + 0.7 * c2[0][0];
        assert!((cm[0][0] - expected).abs() < 1e-10);
    }

    #[test]
    fn singlet_construction_reaches_two_root_two() {
        let corr = singlet_chsh_correlation().unwrap();
        let value = chsh_combination(&corr);
        assert!((value - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn zero_trials_pass_vacuously() {
        let catalog = crate::catalog::corr_catalog_m3();
        let report = stress_test(&catalog, 0, &[2], 0, 1e-9).unwrap();
        assert!(report.pass);
        assert!(report.max_margin.is_none());
    }

    #[test]
    fn short_stress_run_finds_no_violation() {
        let catalog = crate::catalog::corr_catalog_m3();
        let report = stress_test(&catalog, 50, &[2, 3], 12345, 1e-9).unwrap();
        assert!(report.pass, "margin {:?}", report.max_margin);
    }
}
