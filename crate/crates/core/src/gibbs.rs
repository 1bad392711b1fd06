//! Gibbs states, partition functions, expectations, von Neumann and Umegaki
//! relative entropies, and Klein's inequality.
//!
//! Conventions, fixed here once:
//!
//! - energies enter only as the dimensionless product `β·E`;
//! - `0·log 0 := 0` throughout;
//! - density-matrix eigenvalues in `[-1e-12, 0)` are clamped to `0`, and
//!   logarithms are taken only on eigenvalues at or above the support
//!   tolerance;
//! - a diverging relative entropy is an explicit [`ExtReal::Infinite`]
//!   marker, never a floating-point infinity inside arithmetic, so callers
//!   can branch on it deterministically.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{matrix_func, trace_product, HermitianOperator, SpectralDecomposition};

/// Default support tolerance: eigenvalues below this count as "outside the
/// support" for relative-entropy purposes.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-12;

/// Negative eigenvalues above this magnitude fail the PSD check; anything in
/// `[-PSD_TOL, 0)` is treated as rounding and clamped to zero.
pub const PSD_TOL: f64 = 1e-12;

/// Allowed deviation of the trace from 1 before renormalization.
pub const TRACE_TOL: f64 = 1e-10;

/// Extended real value: either finite or the `+∞` marker used when a
/// relative entropy diverges on a support mismatch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinite => None,
        }
    }

    /// Finite value, or an error naming the context in which divergence is
    /// unexpected.
    pub fn expect_finite(self, context: &str) -> Result<f64> {
        self.finite().ok_or_else(|| Error::InfiniteRelativeEntropy {
            context: context.to_string(),
        })
    }
}

impl std::fmt::Display for ExtReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinite => write!(f, "+inf"),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace operator together with its
/// cached spectral decomposition.
///
/// The cached weights are the clamped, exactly renormalized eigenvalues in
/// ascending order; the stored operator is rebuilt from them so the two
/// views never drift apart.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: HermitianOperator,
    spectrum: SpectralDecomposition,
    support_tol: f64,
}

impl DensityMatrix {
    /// Validates PSD (eigenvalues ≥ −1e-12) and unit trace (within 1e-10),
    /// clamps eigenvalues into `[0, 1]`, renormalizes exactly.
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let spectrum = op.eig()?;
        let weights = spectrum.eigenvalues().to_vec();
        Self::from_weights_and_basis(weights, spectrum.eigenvectors().clone())
    }

    /// Builds from eigen-weights and an orthonormal basis (one state per
    /// column). Weights are validated, clamped, and renormalized exactly.
    pub fn from_weights_and_basis(
        weights: Vec<f64>,
        basis: DMatrix<Complex64>,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyDimension);
        }
        if basis.nrows() != weights.len() || basis.ncols() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                actual: basis.nrows(),
            });
        }
        let min = weights.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
            });
        }
        let mut weights: Vec<f64> = weights.iter().map(|&w| w.clamp(0.0, 1.0)).collect();
        let trace: f64 = weights.iter().sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotUnitTrace {
                trace,
                tolerance: TRACE_TOL,
            });
        }
        for w in &mut weights {
            *w /= trace;
        }

        // Ascending order, permuting basis columns alongside.
        let dim = weights.len();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| weights[i].partial_cmp(&weights[j]).expect("finite"));
        let sorted: Vec<f64> = order.iter().map(|&i| weights[i]).collect();
        let mut vecs = DMatrix::zeros(dim, dim);
        for (dst, &src) in order.iter().enumerate() {
            vecs.set_column(dst, &basis.column(src));
        }

        let spectrum = SpectralDecomposition::from_parts(sorted, vecs);
        let op = spectrum.reconstruct();
        Ok(Self {
            op,
            spectrum,
            support_tol: DEFAULT_SUPPORT_TOL,
        })
    }

    /// `I/dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        let w = vec![1.0 / dim as f64; dim];
        Self::from_weights_and_basis(w, DMatrix::identity(dim, dim))
    }

    /// Pure state `|k><k|` in the computational basis.
    pub fn pure_basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: k,
            });
        }
        let mut w = vec![0.0; dim];
        w[k] = 1.0;
        Self::from_weights_and_basis(w, DMatrix::identity(dim, dim))
    }

    /// Diagonal state from a probability vector.
    pub fn from_probabilities(probs: &[f64]) -> Result<Self> {
        Self::from_weights_and_basis(probs.to_vec(), DMatrix::identity(probs.len(), probs.len()))
    }

    /// Replaces the support tolerance used by entropy computations.
    pub fn with_support_tol(mut self, support_tol: f64) -> Self {
        self.support_tol = support_tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    /// Cached spectral decomposition; eigenvalues are the state's weights.
    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    /// Eigen-weights in ascending order.
    pub fn weights(&self) -> &[f64] {
        self.spectrum.eigenvalues()
    }

    pub fn support_tol(&self) -> f64 {
        self.support_tol
    }

    /// True when every weight clears the support tolerance.
    pub fn has_full_support(&self) -> bool {
        self.weights().iter().all(|&w| w >= self.support_tol)
    }

    /// `<v, ρ v>` for a column of another basis; real by Hermiticity.
    fn weight_along(&self, v: nalgebra::DVectorView<'_, Complex64>) -> f64 {
        let rv = self.op.matrix() * v;
        v.iter()
            .zip(rv.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

/// Gibbs state of a Hamiltonian together with its log-partition function.
#[derive(Debug, Clone)]
pub struct GibbsResult {
    pub state: DensityMatrix,
    pub log_z: f64,
    pub beta: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidBeta { beta });
    }
    Ok(())
}

/// `log Z = log Tr e^{-βH}` from the spectrum of `H`, evaluated stably as
/// `-β λ_min + log Σ_n e^{-β(λ_n - λ_min)}`.
pub fn log_partition(s: &SpectralDecomposition, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let min = s.min_eigenvalue();
    let sum: f64 = s
        .eigenvalues()
        .iter()
        .map(|&l| (-beta * (l - min)).exp())
        .sum();
    Ok(-beta * min + sum.ln())
}

/// Canonical state `e^{-βH}/Z` sharing the eigenvectors of `H`.
pub fn gibbs_state(h: &HermitianOperator, beta: f64) -> Result<GibbsResult> {
    check_beta(beta)?;
    let s = h.eig()?;
    gibbs_state_from_spectrum(&s, beta)
}

/// Same as [`gibbs_state`] but reusing an existing decomposition of `H`.
pub fn gibbs_state_from_spectrum(s: &SpectralDecomposition, beta: f64) -> Result<GibbsResult> {
    check_beta(beta)?;
    let min = s.min_eigenvalue();
    let unnormalized: Vec<f64> = s
        .eigenvalues()
        .iter()
        .map(|&l| (-beta * (l - min)).exp())
        .collect();
    let total: f64 = unnormalized.iter().sum();
    let weights: Vec<f64> = unnormalized.iter().map(|w| w / total).collect();
    let state = DensityMatrix::from_weights_and_basis(weights, s.eigenvectors().clone())?;
    Ok(GibbsResult {
        state,
        log_z: -beta * min + total.ln(),
        beta,
    })
}

/// `E_ρ[T] = Tr(ρT)`.
pub fn expectation(rho: &DensityMatrix, t: &HermitianOperator) -> Result<f64> {
    trace_product(rho.operator(), t)
}

/// Von Neumann entropy `-Tr(ρ log ρ) = -Σ p_n log p_n`, in `[0, log dim]`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let s: f64 = rho
        .weights()
        .iter()
        .filter(|&&w| w >= rho.support_tol)
        .map(|&w| -w * w.ln())
        .sum();
    s.max(0.0)
}

/// `Tr(ρ log ρ)` under the `0·log 0 = 0` convention.
pub(crate) fn trace_rho_log_rho(rho: &DensityMatrix, support_tol: f64) -> f64 {
    rho.weights()
        .iter()
        .filter(|&&w| w >= support_tol)
        .map(|&w| w * w.ln())
        .sum()
}

/// `log` of a PSD operator with eigenvalues below `support_tol` mapped to 0
/// in the spectrum of the result. Those directions carry no admissible
/// weight whenever the support condition has been checked first.
fn matrix_log_clamped(s: &SpectralDecomposition, support_tol: f64) -> Result<HermitianOperator> {
    matrix_func(s, |l| if l >= support_tol { l.ln() } else { 0.0 })
}

/// Umegaki relative entropy `R(ρ, σ) = Tr(ρ log ρ) - Tr(ρ log σ)`, with the
/// support tolerance of `σ` deciding divergence.
///
/// `ρ` and `σ` need not commute: the two traces come from independent
/// spectral decompositions, `Tr(ρ log σ)` via [`trace_product`] against the
/// clamped spectral logarithm of `σ`. Returns [`ExtReal::Infinite`] when
/// some eigendirection of `σ` below the tolerance carries more than the
/// tolerance of `ρ`-weight.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ExtReal> {
    relative_entropy_with_tol(rho, sigma, sigma.support_tol())
}

/// [`relative_entropy`] with an explicit support tolerance.
///
/// States produced by `exp` of a Hermitian operator (Gibbs states, tilted
/// trial states) have strictly positive spectra no matter how small the
/// weights, so callers that know this may pass a tolerance near the
/// underflow threshold to keep deep-tail weights inside the support.
pub fn relative_entropy_with_tol(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    support_tol: f64,
) -> Result<ExtReal> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    // Support condition: a null direction of σ must carry no ρ-weight.
    for (k, &q) in sigma.weights().iter().enumerate() {
        if q < support_tol {
            let carried = rho.weight_along(sigma.spectrum().eigenvectors().column(k));
            if carried > support_tol {
                return Ok(ExtReal::Infinite);
            }
        } else {
            // Weights are ascending; once one clears the tolerance, all do.
            break;
        }
    }
    let log_sigma = matrix_log_clamped(sigma.spectrum(), support_tol)?;
    let cross = trace_product(rho.operator(), &log_sigma)?;
    Ok(ExtReal::Finite(
        trace_rho_log_rho(rho, support_tol) - cross,
    ))
}

/// Klein gap `Tr(B log B) - Tr(B log A) - Tr(B - A)` for PSD trace-class
/// `A`, `B`; Klein's inequality asserts it is non-negative, and for
/// unit-trace inputs it equals the relative entropy `R(B, A)`.
///
/// Returns [`ExtReal::Infinite`] when `B` carries weight outside the
/// support of `A`.
pub fn klein_gap(a: &HermitianOperator, b: &HermitianOperator) -> Result<ExtReal> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let sa = a.eig()?;
    let sb = b.eig()?;
    for (label, s) in [("A", &sa), ("B", &sb)] {
        let min = s.min_eigenvalue();
        if min < -PSD_TOL {
            let _ = label;
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
            });
        }
    }
    let tol = DEFAULT_SUPPORT_TOL;
    // Support condition on the null directions of A.
    for (k, &alpha) in sa.eigenvalues().iter().enumerate() {
        if alpha < tol {
            let v = sa.eigenvectors().column(k);
            let bv = b.matrix() * v;
            let carried: f64 = v
                .iter()
                .zip(bv.iter())
                .map(|(x, y)| (x.conj() * y).re)
                .sum();
            if carried > tol {
                return Ok(ExtReal::Infinite);
            }
        } else {
            break;
        }
    }
    let tr_b_log_b: f64 = sb
        .eigenvalues()
        .iter()
        .filter(|&&l| l >= tol)
        .map(|&l| l * l.ln())
        .sum();
    let log_a = matrix_log_clamped(&sa, tol)?;
    let tr_b_log_a = trace_product(b, &log_a)?;
    let tr_a: f64 = sa.eigenvalues().iter().sum();
    let tr_b: f64 = sb.eigenvalues().iter().sum();
    Ok(ExtReal::Finite(tr_b_log_b - tr_b_log_a - tr_b + tr_a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::standard_ops::{pauli_x, pauli_z};
    use crate::testutil::random_density;

    #[test]
    fn log_partition_matches_direct_summation() {
        // H = 0 at dim n: Z = n.
        for n in [1usize, 2, 5, 16] {
            let s = HermitianOperator::zeros(n).eig().unwrap();
            let lz = log_partition(&s, 2.5).unwrap();
            assert!((lz - (n as f64).ln()).abs() < 1e-12);
        }
        // H = diag(0, 1), β = 1: log(1 + e^{-1}).
        let s = HermitianOperator::from_diagonal(&[0.0, 1.0])
            .unwrap()
            .eig()
            .unwrap();
        let lz = log_partition(&s, 1.0).unwrap();
        assert!((lz - 0.313_261_687_518_222_83).abs() < 1e-12);
        // Two-fold degeneracy.
        let s = HermitianOperator::zeros(2).eig().unwrap();
        assert!((log_partition(&s, 1.0).unwrap() - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn log_partition_survives_large_spread() {
        let s = HermitianOperator::from_diagonal(&[0.0, 700.0])
            .unwrap()
            .eig()
            .unwrap();
        let lz = log_partition(&s, 1.0).unwrap();
        assert!(lz.is_finite());
        assert!((lz - (1.0 + (-700.0f64).exp()).ln()).abs() < 1e-12);
    }

    #[test]
    fn log_partition_rejects_bad_beta() {
        let s = pauli_z().eig().unwrap();
        assert!(matches!(
            log_partition(&s, 0.0),
            Err(Error::InvalidBeta { .. })
        ));
        assert!(matches!(
            log_partition(&s, -1.0),
            Err(Error::InvalidBeta { .. })
        ));
        assert!(matches!(
            log_partition(&s, f64::NAN),
            Err(Error::InvalidBeta { .. })
        ));
    }

    #[test]
    fn gibbs_state_two_level_weights() {
        let h = HermitianOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let g = gibbs_state(&h, 1.0).unwrap();
        let w = g.state.weights();
        // Ascending: the excited-state weight comes first.
        assert!((w[0] - 0.268_941_421_369_995_12).abs() < 1e-12);
        assert!((w[1] - 0.731_058_578_630_004_88).abs() < 1e-12);
        assert!((g.log_z - 0.313_261_687_518_222_83).abs() < 1e-12);
    }

    #[test]
    fn gibbs_state_flat_hamiltonian_is_maximally_mixed() {
        let g = gibbs_state(&HermitianOperator::zeros(5), 3.0).unwrap();
        for &w in g.state.weights() {
            assert!((w - 0.2).abs() < 1e-14);
        }
    }

    #[test]
    fn gibbs_ground_state_weight_grows_with_beta() {
        let h = HermitianOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let mut last = 0.0;
        for beta in [0.5, 1.0, 2.0, 5.0, 20.0] {
            let g = gibbs_state(&h, beta).unwrap();
            let ground = g.state.weights()[1];
            assert!(ground > last);
            last = ground;
        }
        assert!(last > 0.999_999);
    }

    #[test]
    fn expectation_examples() {
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(expectation(&mixed, &pauli_z()).unwrap().abs() < 1e-14);

        let rho = DensityMatrix::from_probabilities(&[
            0.731_058_578_630_004_9,
            0.268_941_421_369_995_1,
        ])
        .unwrap();
        let t = HermitianOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        assert!((expectation(&rho, &t).unwrap() - 0.268_941_421_369_995_1).abs() < 1e-12);

        let any = random_density(7, 40);
        let id = HermitianOperator::identity(7);
        assert!((expectation(&any, &id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let pure = DensityMatrix::pure_basis_state(2, 0).unwrap();
        assert!(von_neumann_entropy(&pure).abs() < 1e-14);

        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        assert!((von_neumann_entropy(&mixed) - 4.0f64.ln()).abs() < 1e-12);

        // Direct summation: -Σ p log p for the β = 1 two-level Gibbs weights.
        let rho = DensityMatrix::from_probabilities(&[
            0.731_058_578_630_004_9,
            0.268_941_421_369_995_1,
        ])
        .unwrap();
        assert!((von_neumann_entropy(&rho) - 0.582_203_108_888_218).abs() < 1e-12);
    }

    #[test]
    fn entropy_bounded_by_log_dim() {
        for seed in 0..10 {
            let rho = random_density(6, 700 + seed);
            let s = von_neumann_entropy(&rho);
            assert!(s >= 0.0);
            assert!(s <= 6.0f64.ln() + 1e-12);
        }
    }

    #[test]
    fn relative_entropy_identical_states_vanishes() {
        for seed in 0..5 {
            let rho = random_density(5, 900 + seed);
            let r = relative_entropy(&rho, &rho).unwrap().finite().unwrap();
            assert!(r.abs() < 1e-10, "R(rho,rho) = {r}");
        }
    }

    #[test]
    fn relative_entropy_diagonal_matches_kl() {
        let rho = DensityMatrix::from_probabilities(&[0.5, 0.5]).unwrap();
        let sigma = DensityMatrix::from_probabilities(&[0.25, 0.75]).unwrap();
        let r = relative_entropy(&rho, &sigma).unwrap().finite().unwrap();
        assert!((r - 0.143_841_036_225_890_46).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_disjoint_supports_is_infinite() {
        let rho = DensityMatrix::pure_basis_state(2, 0).unwrap();
        let sigma = DensityMatrix::pure_basis_state(2, 1).unwrap();
        assert_eq!(relative_entropy(&rho, &sigma).unwrap(), ExtReal::Infinite);
    }

    #[test]
    fn relative_entropy_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let sigma = DensityMatrix::maximally_mixed(3).unwrap();
        assert!(matches!(
            relative_entropy(&rho, &sigma),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn klein_gap_equality_case() {
        let a = random_density(4, 11).operator().clone();
        let g = klein_gap(&a, &a).unwrap().finite().unwrap();
        assert!(g.abs() < 1e-10);
    }

    #[test]
    fn klein_gap_matches_relative_entropy_for_states() {
        let a = HermitianOperator::from_diagonal(&[0.25, 0.75]).unwrap();
        let b = HermitianOperator::from_diagonal(&[0.5, 0.5]).unwrap();
        let g = klein_gap(&a, &b).unwrap().finite().unwrap();
        assert!((g - 0.143_841_036_225_890_46).abs() < 1e-12);
    }

    #[test]
    fn klein_gap_non_normalized_inputs() {
        // A = 2I, B = I: Tr(B log B) - Tr(B log A) - Tr(B) + Tr(A)
        //              = 0 - 2 log 2 - 2 + 4 = 2 - 2 log 2.
        let a = HermitianOperator::identity(2).scaled(2.0);
        let b = HermitianOperator::identity(2);
        let g = klein_gap(&a, &b).unwrap().finite().unwrap();
        assert!((g - 0.613_705_638_880_109_4).abs() < 1e-12);
        assert!(g >= 0.0);
    }

    #[test]
    fn klein_gap_support_failure() {
        let a = HermitianOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let b = HermitianOperator::from_diagonal(&[0.5, 0.5]).unwrap();
        assert_eq!(klein_gap(&a, &b).unwrap(), ExtReal::Infinite);
    }

    #[test]
    fn klein_gap_rejects_non_psd() {
        let a = pauli_x();
        let b = HermitianOperator::identity(2);
        assert!(matches!(
            klein_gap(&a, &b),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn density_matrix_validation() {
        // Trace far from one.
        let bad = HermitianOperator::from_diagonal(&[0.9, 0.9]).unwrap();
        assert!(matches!(
            DensityMatrix::new(bad),
            Err(Error::NotUnitTrace { .. })
        ));
        // Negative eigenvalue beyond tolerance.
        let bad = HermitianOperator::from_diagonal(&[1.1, -0.1]).unwrap();
        assert!(matches!(
            DensityMatrix::new(bad),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
        // Slight negativity inside tolerance gets clamped.
        let ok = HermitianOperator::from_diagonal(&[1.0 + 5e-13, -5e-13]).unwrap();
        let dm = DensityMatrix::new(ok).unwrap();
        assert!(dm.weights().iter().all(|&w| w >= 0.0));
        assert!((dm.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unitary_invariance_of_relative_entropy() {
        for seed in 0..5 {
            let rho = random_density(5, 2_000 + seed);
            let sigma = random_density(5, 3_000 + seed);
            let u = crate::testutil::random_unitary(5, 4_000 + seed);
            let rho_u =
                DensityMatrix::new(rho.operator().conjugated_by(&u).unwrap()).unwrap();
            let sigma_u =
                DensityMatrix::new(sigma.operator().conjugated_by(&u).unwrap()).unwrap();
            let r0 = relative_entropy(&rho, &sigma).unwrap().finite().unwrap();
            let r1 = relative_entropy(&rho_u, &sigma_u)
                .unwrap()
                .finite()
                .unwrap();
            assert!((r0 - r1).abs() < 1e-10, "seed {seed}: {r0} vs {r1}");
        }
    }
}
