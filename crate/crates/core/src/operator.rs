//! Finite-dimensional Hermitian linear algebra: construction, tensor-product
//! embedding, spectral decomposition, and spectral calculus.
//!
//! Everything downstream (Gibbs states, entropies, free-energy bounds) is a
//! function of the spectra produced here, so this module fixes the numerical
//! conventions once:
//!
//! - operators are dense complex matrices, symmetrized exactly as
//!   `(A + A^†)/2` at construction;
//! - eigenvalues are sorted ascending with a stable permutation of the
//!   eigenvector columns;
//! - site 0 is the slowest-varying Kronecker factor, which pins the matrix
//!   layout of embedded lattice operators bit for bit.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Max absolute entry deviation accepted before an input is rejected as
/// non-Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Imaginary residue allowed in traces of products of Hermitian operators.
pub const TRACE_IMAG_TOL: f64 = 1e-10;

/// A dense complex Hermitian matrix with its Hilbert-space dimension.
///
/// The stored matrix is exactly equal to its own adjoint: constructors
/// symmetrize after validating, so accumulated rounding from Kronecker
/// assembly or spectral calculus can never leak asymmetry downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    mat: DMatrix<Complex64>,
}

impl HermitianOperator {
    /// Validates Hermiticity within [`HERMITICITY_TOL`] (max absolute entry
    /// deviation), then stores `(A + A^†)/2`.
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if mat.nrows() == 0 {
            return Err(Error::EmptyDimension);
        }
        let mut deviation: f64 = 0.0;
        for i in 0..mat.nrows() {
            for j in i..mat.ncols() {
                deviation = deviation.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
            }
        }
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                deviation,
                tolerance: HERMITICITY_TOL,
            });
        }
        Ok(Self::symmetrize(mat))
    }

    /// Symmetrizes without the deviation check.
    ///
    /// For internal products like `V f(Λ) V^†` the asymmetry is pure rounding
    /// but scales with the norm of the result, so the absolute tolerance of
    /// [`Self::new`] would misfire on large spectra.
    pub(crate) fn symmetrize(mat: DMatrix<Complex64>) -> Self {
        let dim = mat.nrows();
        let mut out = mat;
        for i in 0..dim {
            out[(i, i)] = Complex64::new(out[(i, i)].re, 0.0);
            for j in (i + 1)..dim {
                let avg = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        Self { dim, mat: out }
    }

    /// Builds from a row-major slice of entries.
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Real matrix entered row-major.
    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let complex: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(dim, &complex)
    }

    /// Diagonal operator from real diagonal entries.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::EmptyDimension);
        }
        let dim = diag.len();
        let mut mat = DMatrix::zeros(dim, dim);
        for (i, &x) in diag.iter().enumerate() {
            mat[(i, i)] = Complex64::new(x, 0.0);
        }
        Ok(Self { dim, mat })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    /// Real trace.
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            mat: &self.mat * Complex64::new(factor, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            mat: &self.mat - &other.mat,
        })
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Frobenius distance to `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat).norm()
    }

    /// Max absolute entry of the commutator `[A, B]`.
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        let c = &self.mat * &other.mat - &other.mat * &self.mat;
        Ok(c.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Conjugation `U A U^†` by a unitary given as a raw matrix.
    pub fn conjugated_by(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        if u.nrows() != self.dim || u.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: u.nrows(),
            });
        }
        Ok(Self::symmetrize(u * &self.mat * u.adjoint()))
    }

    /// Spectral decomposition with ascending eigenvalues.
    pub fn eig(&self) -> Result<SpectralDecomposition> {
        hermitian_eig(self)
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        Ok(())
    }
}

/// Eigenvalues and orthonormal eigenvectors of a [`HermitianOperator`].
///
/// Eigenvalues are ascending; column `k` of `eigenvectors` belongs to
/// `eigenvalues[k]`. Degenerate eigenspaces may come in any orthonormal
/// completion; everything downstream is a basis-free function of the
/// spectrum and its projectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

/// Full spectral decomposition of a Hermitian operator.
pub fn hermitian_eig(a: &HermitianOperator) -> Result<SpectralDecomposition> {
    // The QL iteration needs a handful of sweeps per eigenvalue; the cap
    // only exists to turn a pathological non-convergence into a diagnosis.
    let max_iter = 100 * a.dim.max(100);
    let eig = a
        .mat
        .clone()
        .try_symmetric_eigen(f64::EPSILON, max_iter)
        .ok_or(Error::EigenFailure {
            dim: a.dim,
            iterations: max_iter,
        })?;

    // Ascending sort with a stable permutation of the eigenvector columns.
    let mut order: Vec<usize> = (0..a.dim).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .expect("eigenvalues of a Hermitian matrix are finite")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(a.dim, a.dim);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

impl SpectralDecomposition {
    /// Assembles a decomposition from raw parts; used where the spectrum is
    /// known by construction (Gibbs weights, trial states).
    pub(crate) fn from_parts(eigenvalues: Vec<f64>, eigenvectors: DMatrix<Complex64>) -> Self {
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors, one per column, matching `eigenvalues`.
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Rebuilds `V diag(λ) V^†`.
    pub fn reconstruct(&self) -> HermitianOperator {
        // matrix_func with the identity map cannot fail.
        matrix_func(self, |x| x).expect("identity map is finite")
    }

    /// Max-entry deviation of `V^† V` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let vtv = self.eigenvectors.adjoint() * &self.eigenvectors;
        let mut defect: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let target = if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                defect = defect.max((vtv[(i, j)] - target).norm());
            }
        }
        defect
    }
}

/// Spectral calculus: `f` applied to the spectrum, `V diag(f(λ)) V^†`.
///
/// Fails if `f` returns a non-finite value at any eigenvalue; clamping of
/// near-zero weights is the caller's concern.
pub fn matrix_func(
    s: &SpectralDecomposition,
    f: impl Fn(f64) -> f64,
) -> Result<HermitianOperator> {
    let dim = s.dim();
    let mut scaled = s.eigenvectors.clone();
    for (k, &lambda) in s.eigenvalues.iter().enumerate() {
        let value = f(lambda);
        if !value.is_finite() {
            return Err(Error::NonFiniteFunctionValue { eigenvalue: lambda });
        }
        let factor = Complex64::new(value, 0.0);
        for i in 0..dim {
            scaled[(i, k)] *= factor;
        }
    }
    let mat = scaled * s.eigenvectors.adjoint();
    Ok(HermitianOperator::symmetrize(mat))
}

/// `Tr(AB)` for Hermitian `A`, `B`, computed entrywise without forming the
/// product. The imaginary residue must stay below [`TRACE_IMAG_TOL`].
pub fn trace_product(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            actual: b.dim,
        });
    }
    // Tr(AB) = sum_ij A[i][j] B[j][i]; with B Hermitian this is the
    // Frobenius inner product sum_ij A[i][j] conj(B[i][j]).
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.mat.iter().zip(b.mat.iter()) {
        acc += x * y.conj();
    }
    if acc.im.abs() >= TRACE_IMAG_TOL {
        return Err(Error::ImaginaryResidue { residue: acc.im });
    }
    Ok(acc.re)
}

/// Assignment of lattice sites to local dimensions and contiguous blocks.
///
/// The total Hilbert-space dimension is the product of the site dimensions;
/// site 0 is the slowest-varying Kronecker factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteLayout {
    site_dims: Vec<usize>,
    block_of_site: Vec<usize>,
    n_blocks: usize,
}

impl SiteLayout {
    pub fn new(site_dims: Vec<usize>, block_of_site: Vec<usize>) -> Result<Self> {
        if site_dims.is_empty() {
            return Err(Error::InvalidLayout {
                reason: "layout needs at least one site".into(),
            });
        }
        if site_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidLayout {
                reason: "site dimensions must be positive".into(),
            });
        }
        if block_of_site.len() != site_dims.len() {
            return Err(Error::InvalidLayout {
                reason: format!(
                    "block assignment covers {} sites but there are {}",
                    block_of_site.len(),
                    site_dims.len()
                ),
            });
        }
        let n_blocks = block_of_site.iter().copied().max().unwrap_or(0) + 1;
        for b in 0..n_blocks {
            if !block_of_site.contains(&b) {
                return Err(Error::InvalidLayout {
                    reason: format!("block {b} has no sites"),
                });
            }
        }
        Ok(Self {
            site_dims,
            block_of_site,
            n_blocks,
        })
    }

    /// `n_sites` equal-dimension sites split into `n_blocks` contiguous
    /// blocks of near-equal length (sizes differ by at most one).
    pub fn contiguous(n_sites: usize, local_dim: usize, n_blocks: usize) -> Result<Self> {
        if n_blocks == 0 || n_blocks > n_sites {
            return Err(Error::InvalidLayout {
                reason: format!("cannot split {n_sites} sites into {n_blocks} blocks"),
            });
        }
        let base = n_sites / n_blocks;
        let extra = n_sites % n_blocks;
        let mut block_of_site = Vec::with_capacity(n_sites);
        for b in 0..n_blocks {
            let len = base + usize::from(b < extra);
            block_of_site.extend(std::iter::repeat(b).take(len));
        }
        Self::new(vec![local_dim; n_sites], block_of_site)
    }

    pub fn n_sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_of_site(&self, site: usize) -> usize {
        self.block_of_site[site]
    }

    /// Product of all site dimensions.
    pub fn total_dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    /// True when all `sites` live in one block.
    pub fn within_one_block(&self, sites: &[usize]) -> bool {
        let mut blocks = sites.iter().map(|&s| self.block_of_site[s]);
        match blocks.next() {
            None => true,
            Some(first) => blocks.all(|b| b == first),
        }
    }

    /// Row-major stride of each site (site 0 varies slowest).
    pub(crate) fn strides(&self) -> Vec<usize> {
        let n = self.site_dims.len();
        let mut strides = vec![1usize; n];
        for s in (0..n.saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * self.site_dims[s + 1];
        }
        strides
    }

    fn check_sites(&self, sites: &[usize]) -> Result<()> {
        for (k, &s) in sites.iter().enumerate() {
            if s >= self.n_sites() {
                return Err(Error::SiteOutOfRange {
                    site: s,
                    n_sites: self.n_sites(),
                });
            }
            if sites[..k].contains(&s) {
                return Err(Error::RepeatedSite { site: s });
            }
        }
        Ok(())
    }
}

/// A Hermitian operator acting on an ordered subset of sites, kept in its
/// local joint space. Term lists drive both dense assembly and the
/// matrix-free oracles.
#[derive(Debug, Clone)]
pub struct LocalTerm {
    sites: Vec<usize>,
    op: HermitianOperator,
}

impl LocalTerm {
    pub fn new(sites: Vec<usize>, op: HermitianOperator) -> Self {
        Self { sites, op }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            sites: self.sites.clone(),
            op: self.op.scaled(factor),
        }
    }

    /// Dense embedding of this term into the full space of `layout`.
    pub fn embed(&self, layout: &SiteLayout) -> Result<HermitianOperator> {
        kron_embed(&self.op, layout, &self.sites)
    }
}

/// Places `local` on the given sites of the lattice, identity elsewhere:
/// `I ⊗ … ⊗ local ⊗ … ⊗ I` up to the site ordering of `sites`.
///
/// `local` must act on the joint space of `sites` in the order given, so a
/// two-site term on `(1, 0)` is the site-swapped version of the same term
/// on `(0, 1)`.
pub fn kron_embed(
    local: &HermitianOperator,
    layout: &SiteLayout,
    sites: &[usize],
) -> Result<HermitianOperator> {
    layout.check_sites(sites)?;
    let local_dim: usize = sites.iter().map(|&s| layout.site_dims()[s]).product();
    if local.dim() != local_dim {
        return Err(Error::DimensionMismatch {
            expected: local_dim,
            actual: local.dim(),
        });
    }
    let full_dim = layout.total_dim();
    let strides = layout.strides();

    // Offsets of the local row/col indices within a full-space index, and
    // the enumeration of all complement-site configurations.
    let local_offsets = local_index_offsets(layout, sites, &strides);
    let rest_offsets = complement_offsets(layout, sites, &strides);

    let mut mat = DMatrix::<Complex64>::zeros(full_dim, full_dim);
    for &base in &rest_offsets {
        for (a, &row_off) in local_offsets.iter().enumerate() {
            for (b, &col_off) in local_offsets.iter().enumerate() {
                let value = local.entry(a, b);
                if value.norm_sqr() != 0.0 {
                    mat[(base + row_off, base + col_off)] += value;
                }
            }
        }
    }
    Ok(HermitianOperator::symmetrize(mat))
}

/// Full-space offset of each local joint index (row-major over `sites` in
/// the order given).
pub(crate) fn local_index_offsets(
    layout: &SiteLayout,
    sites: &[usize],
    strides: &[usize],
) -> Vec<usize> {
    let dims: Vec<usize> = sites.iter().map(|&s| layout.site_dims()[s]).collect();
    let local_dim: usize = dims.iter().product();
    let mut offsets = vec![0usize; local_dim];
    for (idx, offset) in offsets.iter_mut().enumerate() {
        let mut rem = idx;
        for (k, &site) in sites.iter().enumerate().rev() {
            let digit = rem % dims[k];
            rem /= dims[k];
            *offset += digit * strides[site];
        }
    }
    offsets
}

/// Full-space offsets of every configuration of the sites *not* in `sites`.
pub(crate) fn complement_offsets(
    layout: &SiteLayout,
    sites: &[usize],
    strides: &[usize],
) -> Vec<usize> {
    let rest: Vec<usize> = (0..layout.n_sites())
        .filter(|s| !sites.contains(s))
        .collect();
    let rest_dim: usize = rest.iter().map(|&s| layout.site_dims()[s]).product();
    let mut offsets = vec![0usize; rest_dim];
    for (idx, offset) in offsets.iter_mut().enumerate() {
        let mut rem = idx;
        for &site in rest.iter().rev() {
            let d = layout.site_dims()[site];
            let digit = rem % d;
            rem /= d;
            *offset += digit * strides[site];
        }
    }
    offsets
}

/// Pauli matrices and bosonic ladder operators in the conventions used by
/// all model builders: `Z = diag(1, -1)` and `a|n> = sqrt(n)|n-1>`.
pub mod standard_ops {
    use super::*;

    pub fn pauli_x() -> HermitianOperator {
        HermitianOperator::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).expect("static entries")
    }

    pub fn pauli_y() -> HermitianOperator {
        HermitianOperator::from_rows(
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .expect("static entries")
    }

    pub fn pauli_z() -> HermitianOperator {
        HermitianOperator::from_diagonal(&[1.0, -1.0]).expect("static entries")
    }

    /// Two-site product `a ⊗ b` in the joint space.
    pub fn two_site(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
        HermitianOperator::symmetrize(a.matrix().kronecker(b.matrix()))
    }

    /// Number operator `diag(0, 1, …, m-1)` on an `m`-level mode.
    pub fn number_op(levels: usize) -> HermitianOperator {
        let diag: Vec<f64> = (0..levels).map(|n| n as f64).collect();
        HermitianOperator::from_diagonal(&diag).expect("levels >= 1")
    }

    /// Position quadrature `q = (a + a^†)/sqrt(2)` truncated to `m` levels.
    pub fn position_op(levels: usize) -> HermitianOperator {
        let mut mat = DMatrix::<Complex64>::zeros(levels, levels);
        for n in 1..levels {
            let v = (n as f64).sqrt() / std::f64::consts::SQRT_2;
            mat[(n - 1, n)] = Complex64::new(v, 0.0);
            mat[(n, n - 1)] = Complex64::new(v, 0.0);
        }
        HermitianOperator::symmetrize(mat)
    }
}

#[cfg(test)]
mod tests {
    use super::standard_ops::*;
    use super::*;
    use crate::testutil::random_hermitian;

    #[test]
    fn rejects_non_hermitian_input() {
        let mat = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        match HermitianOperator::new(mat) {
            Err(Error::NotHermitian { deviation, .. }) => assert!(deviation > 0.4),
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn rejects_empty_matrix() {
        assert!(matches!(
            HermitianOperator::new(DMatrix::zeros(0, 0)),
            Err(Error::EmptyDimension)
        ));
    }

    #[test]
    fn eig_pauli_z_is_diagonal_spectrum() {
        let s = pauli_z().eig().unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_pauli_x_matches_analytic() {
        // Analytic 2x2: eigenvalues -1, +1 with eigenvectors (1, -1)/sqrt(2)
        // and (1, 1)/sqrt(2) up to phase.
        let s = pauli_x().eig().unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-14);
        let inv = 1.0 / std::f64::consts::SQRT_2;
        for (col, pattern) in [(0, [inv, -inv]), (1, [inv, inv])] {
            let v = s.eigenvectors().column(col);
            // Compare up to a global phase by aligning on the first entry.
            let phase = v[0] / Complex64::new(v[0].norm(), 0.0);
            for (i, &expect) in pattern.iter().enumerate() {
                let aligned = v[i] / phase;
                assert!(
                    (aligned - Complex64::new(expect, 0.0)).norm() < 1e-12,
                    "column {col} entry {i}: {aligned} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn eig_identity_is_flat() {
        let s = HermitianOperator::identity(4).eig().unwrap();
        for &l in s.eigenvalues() {
            assert!((l - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_reconstructs_random_inputs() {
        for (k, dim) in [2usize, 3, 5, 17, 33, 64].into_iter().enumerate() {
            let a = random_hermitian(dim, 1000 + k as u64);
            let s = a.eig().unwrap();
            let rel = s.reconstruct().distance(&a) / a.norm();
            assert!(rel < 1e-10, "dim {dim}: relative error {rel:.3e}");
            assert!(s.orthonormality_defect() < 1e-10);
            for w in s.eigenvalues().windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn matrix_func_exp_on_diagonal() {
        let h = HermitianOperator::from_diagonal(&[0.0, 2.0f64.ln()]).unwrap();
        let e = matrix_func(&h.eig().unwrap(), f64::exp).unwrap();
        assert!((e.entry(0, 0).re - 1.0).abs() < 1e-12);
        assert!((e.entry(1, 1).re - 2.0).abs() < 1e-12);
        assert!(e.entry(0, 1).norm() < 1e-14);
    }

    #[test]
    fn matrix_func_identity_reconstructs() {
        let a = random_hermitian(12, 5);
        let r = matrix_func(&a.eig().unwrap(), |x| x).unwrap();
        assert!(r.distance(&a) / a.norm() < 1e-10);
    }

    #[test]
    fn matrix_func_exp_pauli_x_is_cosh_sinh() {
        let e = matrix_func(&pauli_x().eig().unwrap(), f64::exp).unwrap();
        let c = 1.0f64.cosh();
        let s = 1.0f64.sinh();
        assert!((e.entry(0, 0).re - c).abs() < 1e-12);
        assert!((e.entry(1, 1).re - c).abs() < 1e-12);
        assert!((e.entry(0, 1).re - s).abs() < 1e-12);
        assert!((e.entry(1, 0).re - s).abs() < 1e-12);
    }

    #[test]
    fn matrix_func_rejects_non_finite() {
        let h = HermitianOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let r = matrix_func(&h.eig().unwrap(), |x| 1.0 / x);
        assert!(matches!(r, Err(Error::NonFiniteFunctionValue { .. })));
    }

    #[test]
    fn kron_embed_z_on_first_qubit() {
        let layout = SiteLayout::contiguous(2, 2, 2).unwrap();
        let full = kron_embed(&pauli_z(), &layout, &[0]).unwrap();
        let expect = [1.0, 1.0, -1.0, -1.0];
        for (i, &e) in expect.iter().enumerate() {
            assert!((full.entry(i, i).re - e).abs() < 1e-14);
        }
    }

    #[test]
    fn kron_embed_identity_is_identity() {
        let layout = SiteLayout::contiguous(3, 2, 1).unwrap();
        for site in 0..3 {
            let full = kron_embed(&HermitianOperator::identity(2), &layout, &[site]).unwrap();
            assert!(full.distance(&HermitianOperator::identity(8)) < 1e-14);
        }
    }

    #[test]
    fn kron_embed_zz_on_two_qubits() {
        let layout = SiteLayout::contiguous(2, 2, 2).unwrap();
        let zz = two_site(&pauli_z(), &pauli_z());
        let full = kron_embed(&zz, &layout, &[0, 1]).unwrap();
        let expect = [1.0, -1.0, -1.0, 1.0];
        for (i, &e) in expect.iter().enumerate() {
            assert!((full.entry(i, i).re - e).abs() < 1e-14);
        }
    }

    #[test]
    fn kron_embed_respects_site_order() {
        // X on site 1, Z on site 0, entered in swapped order: the result must
        // equal Z(0) X(1) assembled the usual way.
        let layout = SiteLayout::contiguous(2, 2, 1).unwrap();
        let zx = two_site(&pauli_z(), &pauli_x());
        let xz_swapped = two_site(&pauli_x(), &pauli_z());
        let a = kron_embed(&zx, &layout, &[0, 1]).unwrap();
        let b = kron_embed(&xz_swapped, &layout, &[1, 0]).unwrap();
        assert!(a.distance(&b) < 1e-14);
    }

    #[test]
    fn kron_embed_checks_dims_and_sites() {
        let layout = SiteLayout::contiguous(2, 2, 1).unwrap();
        assert!(matches!(
            kron_embed(&HermitianOperator::identity(3), &layout, &[0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 3
            })
        ));
        assert!(matches!(
            kron_embed(&HermitianOperator::identity(4), &layout, &[0, 0]),
            Err(Error::RepeatedSite { site: 0 })
        ));
        assert!(matches!(
            kron_embed(&pauli_z(), &layout, &[5]),
            Err(Error::SiteOutOfRange { site: 5, .. })
        ));
    }

    #[test]
    fn disjoint_embeddings_commute() {
        let layout = SiteLayout::contiguous(3, 2, 1).unwrap();
        let a = kron_embed(&pauli_x(), &layout, &[0]).unwrap();
        let b = kron_embed(&pauli_z(), &layout, &[2]).unwrap();
        assert!(a.commutator_norm(&b).unwrap() < 1e-12);
    }

    #[test]
    fn trace_product_pauli_table() {
        let (x, z, i2) = (pauli_x(), pauli_z(), HermitianOperator::identity(2));
        assert!((trace_product(&i2, &z).unwrap()).abs() < 1e-14);
        assert!((trace_product(&z, &z).unwrap() - 2.0).abs() < 1e-14);
        assert!((trace_product(&x, &z).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn trace_product_checks_dims() {
        let z = pauli_z();
        let i4 = HermitianOperator::identity(4);
        assert!(matches!(
            trace_product(&z, &i4),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trace_product_is_symmetric() {
        for seed in 0..20 {
            let a = random_hermitian(6, 2 * seed);
            let b = random_hermitian(6, 2 * seed + 1);
            let ab = trace_product(&a, &b).unwrap();
            let ba = trace_product(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-12);
        }
    }

    #[test]
    fn layout_rejects_unused_blocks() {
        assert!(SiteLayout::new(vec![2, 2], vec![0, 2]).is_err());
        assert!(SiteLayout::new(vec![2, 2], vec![0, 1]).is_ok());
    }

    #[test]
    fn contiguous_blocks_are_near_equal() {
        let layout = SiteLayout::contiguous(7, 2, 3).unwrap();
        let mut sizes = vec![0usize; 3];
        for s in 0..7 {
            sizes[layout.block_of_site(s)] += 1;
        }
        assert_eq!(sizes.iter().sum::<usize>(), 7);
        let max = sizes.iter().max().unwrap();
        let min = sizes.iter().min().unwrap();
        assert!(max - min <= 1);
    }
}
