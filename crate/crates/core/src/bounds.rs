//! Interface free energy of a partitioned system, the two-sided bounds that
//! bracket it, the relative-entropy identities behind them, Golden-Thompson
//! verification, and the variational bound families.
//!
//! For `H = H0 + U` at inverse temperature `β`, with `ρ` and `ρ0` the Gibbs
//! states of `H` and `H0`:
//!
//! - `ΔF = -β^{-1} log(Z/Z0)` is the interface free energy;
//! - `E_ρ[U] ≤ ΔF ≤ E_ρ0[U]` (the two-sided bound);
//! - `R(ρ0, ρ) = β (E_ρ0[U] - ΔF)` and `R(ρ, ρ0) = β (ΔF - E_ρ[U])`, so the
//!   bound gaps are exactly relative entropies;
//! - for any observable `W` the value `E_ρ[U - W] - β^{-1} log E_ρ0[e^{-βW}]`
//!   lies at or below `ΔF`, and for any state `γ` the value
//!   `E_γ[U] + β^{-1} R(γ, ρ0)` lies at or above it, which turns both sides
//!   into tunable variational families.

use crate::error::{Error, Result};
use crate::gibbs::{
    expectation, gibbs_state_from_spectrum, log_partition, relative_entropy_with_tol,
    trace_rho_log_rho, DensityMatrix, ExtReal,
};
use crate::operator::{
    matrix_func, trace_product, HermitianOperator, LocalTerm, SiteLayout, SpectralDecomposition,
};
use crate::simplex::{self, DirectSearch};

/// Largest Hilbert-space dimension the dense backend will assemble.
pub const MAX_DENSE_DIM: usize = 1 << 13;

/// Support tolerance for spectra produced by exponentiation. Gibbs and
/// tilted trial states are strictly positive analytically, so only genuine
/// floating-point underflow should count as a support loss.
pub const EXP_SUPPORT_TOL: f64 = 1e-300;

/// Absolute tolerance for bound comparisons at this dimension: eigensolver
/// accuracy degrades with size, so the budget widens past dimension 64.
pub fn bound_tolerance(dim: usize) -> f64 {
    if dim <= 64 {
        1e-9
    } else {
        1e-7
    }
}

/// Hamiltonian split into block-local `H0` and coupling `U`, with the full
/// `H = H0 + U` cached. The term lists, when present, drive the matrix-free
/// oracles; dense instances built directly from matrices carry none.
#[derive(Debug, Clone)]
pub struct PartitionedHamiltonian {
    layout: SiteLayout,
    h0: HermitianOperator,
    u: HermitianOperator,
    h: HermitianOperator,
    h0_terms: Vec<LocalTerm>,
    u_terms: Vec<LocalTerm>,
}

impl PartitionedHamiltonian {
    /// Builds from dense block and coupling operators (no term lists).
    pub fn new(layout: SiteLayout, h0: HermitianOperator, u: HermitianOperator) -> Result<Self> {
        let dim = layout.total_dim();
        for op in [&h0, &u] {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: op.dim(),
                });
            }
        }
        let h = h0.add(&u)?;
        Ok(Self {
            layout,
            h0,
            u,
            h,
            h0_terms: Vec::new(),
            u_terms: Vec::new(),
        })
    }

    /// Assembles dense operators from term lists, keeping the lists for the
    /// matrix-free backend. Every `H0` term must stay inside one block.
    pub fn from_terms(
        layout: SiteLayout,
        h0_terms: Vec<LocalTerm>,
        u_terms: Vec<LocalTerm>,
    ) -> Result<Self> {
        let dim = layout.total_dim();
        if dim > MAX_DENSE_DIM {
            return Err(Error::DimensionOverflow {
                dim,
                max: MAX_DENSE_DIM,
            });
        }
        for term in &h0_terms {
            if !layout.within_one_block(term.sites()) {
                return Err(Error::BlockCrossingTerm {
                    sites: term.sites().to_vec(),
                });
            }
        }
        let mut h0 = HermitianOperator::zeros(dim);
        for term in &h0_terms {
            h0 = h0.add(&term.embed(&layout)?)?;
        }
        let mut u = HermitianOperator::zeros(dim);
        for term in &u_terms {
            u = u.add(&term.embed(&layout)?)?;
        }
        let h = h0.add(&u)?;
        Ok(Self {
            layout,
            h0,
            u,
            h,
            h0_terms,
            u_terms,
        })
    }

    pub fn layout(&self) -> &SiteLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    pub fn u(&self) -> &HermitianOperator {
        &self.u
    }

    /// The full Hamiltonian `H0 + U`.
    pub fn h(&self) -> &HermitianOperator {
        &self.h
    }

    pub fn h0_terms(&self) -> &[LocalTerm] {
        &self.h0_terms
    }

    pub fn u_terms(&self) -> &[LocalTerm] {
        &self.u_terms
    }

    /// Same block structure with the coupling scaled by `factor`.
    pub fn with_scaled_coupling(&self, factor: f64) -> Self {
        let u = self.u.scaled(factor);
        let h = self.h0.add(&u).expect("dims agree by construction");
        Self {
            layout: self.layout.clone(),
            h0: self.h0.clone(),
            u,
            h,
            h0_terms: self.h0_terms.clone(),
            u_terms: self.u_terms.iter().map(|t| t.scaled(factor)).collect(),
        }
    }
}

/// Exact interface free energy, both Theorem-style bounds, and the
/// relative-entropy residuals that certify them.
#[derive(Debug, Clone, Copy)]
pub struct BoundsReport {
    pub beta: f64,
    pub delta_f: f64,
    /// `E_ρ[U]`.
    pub lower: f64,
    /// `E_ρ0[U]`.
    pub upper: f64,
    /// `R(ρ0, ρ) - β (E_ρ0[U] - ΔF)`; zero up to numerics.
    pub residual_upper: f64,
    /// `R(ρ, ρ0) - β (ΔF - E_ρ[U])`; zero up to numerics.
    pub residual_lower: f64,
    /// `upper - lower`.
    pub gap: f64,
}

/// `ΔF = -β^{-1} (log Z - log Z0)`.
pub fn interface_free_energy(p: &PartitionedHamiltonian, beta: f64) -> Result<f64> {
    let log_z = log_partition(&p.h().eig()?, beta)?;
    let log_z0 = log_partition(&p.h0().eig()?, beta)?;
    Ok(-(log_z - log_z0) / beta)
}

/// Full report: exact `ΔF`, both bounds, and the entropy residuals.
pub fn bogoliubov_bounds(p: &PartitionedHamiltonian, beta: f64) -> Result<BoundsReport> {
    let s_h = p.h().eig()?;
    let s_h0 = p.h0().eig()?;
    let log_z = log_partition(&s_h, beta)?;
    let log_z0 = log_partition(&s_h0, beta)?;
    let delta_f = -(log_z - log_z0) / beta;

    let rho = gibbs_state_from_spectrum(&s_h, beta)?.state;
    let rho0 = gibbs_state_from_spectrum(&s_h0, beta)?.state;
    let lower = expectation(&rho, p.u())?;
    let upper = expectation(&rho0, p.u())?;

    let r_upper = relative_entropy_with_tol(&rho0, &rho, EXP_SUPPORT_TOL)?
        .expect_finite("R(rho0, rho) of Gibbs states; beta times the spectral spread exceeds the representable range")?;
    let r_lower = relative_entropy_with_tol(&rho, &rho0, EXP_SUPPORT_TOL)?
        .expect_finite("R(rho, rho0) of Gibbs states; beta times the spectral spread exceeds the representable range")?;

    Ok(BoundsReport {
        beta,
        delta_f,
        lower,
        upper,
        residual_upper: r_upper - beta * (upper - delta_f),
        residual_lower: r_lower - beta * (delta_f - lower),
        gap: upper - lower,
    })
}

/// `Tr(e^A e^B) - Tr(e^{A+B})`, non-negative by Golden-Thompson and zero
/// when `[A, B] = 0`. Exponentials are taken around the top of each
/// spectrum so the difference stays representable for moderate shifts.
pub fn golden_thompson_gap(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let sa = a.eig()?;
    let sb = b.eig()?;
    let shift_a = sa.max_eigenvalue();
    let shift_b = sb.max_eigenvalue();
    let exp_a = matrix_func(&sa, |x| (x - shift_a).exp())?;
    let exp_b = matrix_func(&sb, |x| (x - shift_b).exp())?;
    let product = trace_product(&exp_a, &exp_b)?;

    let sum = a.add(b)?;
    let s_sum = sum.eig()?;
    // λ_max(A + B) ≤ λ_max(A) + λ_max(B), so the shifted exponent stays ≤ 0.
    let direct: f64 = s_sum
        .eigenvalues()
        .iter()
        .map(|&l| (l - shift_a - shift_b).exp())
        .sum();
    Ok((shift_a + shift_b).exp() * (product - direct))
}

/// `log E_ρ0[e^{-βW}] = log Tr(ρ0 e^{-βW})`, shifted by the minimum of the
/// `W` spectrum for stability; the shift cancels exactly.
fn log_expectation_exp(
    rho0: &DensityMatrix,
    w_spec: &SpectralDecomposition,
    beta: f64,
) -> Result<f64> {
    let w_min = w_spec.min_eigenvalue();
    let shifted = matrix_func(w_spec, |x| (-beta * (x - w_min)).exp())?;
    let t = trace_product(rho0.operator(), &shifted)?;
    Ok(-beta * w_min + t.ln())
}

/// Variational lower bound `E_ρ[U - W] - β^{-1} log E_ρ0[e^{-βW}]`; at or
/// below `ΔF` for every bounded observable `W`, with equality at `W = U`
/// when everything commutes.
pub fn variational_lower(
    p: &PartitionedHamiltonian,
    beta: f64,
    w: &HermitianOperator,
) -> Result<f64> {
    let rho = gibbs_state_from_spectrum(&p.h().eig()?, beta)?.state;
    let rho0 = gibbs_state_from_spectrum(&p.h0().eig()?, beta)?.state;
    variational_lower_given(&rho, &rho0, p.u(), beta, w)
}

fn variational_lower_given(
    rho: &DensityMatrix,
    rho0: &DensityMatrix,
    u: &HermitianOperator,
    beta: f64,
    w: &HermitianOperator,
) -> Result<f64> {
    let diff = u.sub(w)?;
    let head = expectation(rho, &diff)?;
    let log_e = log_expectation_exp(rho0, &w.eig()?, beta)?;
    Ok(head - log_e / beta)
}

/// Variational upper bound `E_γ[U] + β^{-1} R(γ, ρ0)`; at or above `ΔF` for
/// every density matrix `γ`. Returns the `+∞` marker if `γ` carries weight
/// outside the support of `ρ0` (possible only through underflow, since
/// `ρ0` is a Gibbs state).
pub fn variational_upper(
    p: &PartitionedHamiltonian,
    beta: f64,
    gamma: &DensityMatrix,
) -> Result<ExtReal> {
    let rho0 = gibbs_state_from_spectrum(&p.h0().eig()?, beta)?.state;
    variational_upper_given(&rho0, p.u(), beta, gamma)
}

fn variational_upper_given(
    rho0: &DensityMatrix,
    u: &HermitianOperator,
    beta: f64,
    gamma: &DensityMatrix,
) -> Result<ExtReal> {
    let energy = expectation(gamma, u)?;
    match relative_entropy_with_tol(gamma, rho0, EXP_SUPPORT_TOL)? {
        ExtReal::Finite(r) => Ok(ExtReal::Finite(energy + r / beta)),
        ExtReal::Infinite => Ok(ExtReal::Infinite),
    }
}

/// Gibbs functional `Tr(γV) + β^{-1} Tr(γ log γ)`: at or above
/// `-β^{-1} log Z_V`, with equality at the Gibbs state of `V`.
pub fn gibbs_functional(
    v: &HermitianOperator,
    gamma: &DensityMatrix,
    beta: f64,
) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidBeta { beta });
    }
    let energy = expectation(gamma, v)?;
    Ok(energy + trace_rho_log_rho(gamma, gamma.support_tol()) / beta)
}

/// Hermitian minimizer of the Gibbs functional for a tilted reference:
/// `γ* = exp(log σ - βW) / Tr exp(log σ - βW)`.
///
/// Requires `σ` to have full support; coincides with the literal tilt
/// `e^{-βW - log Tr(σ e^{-βW})} σ` whenever `[W, σ] = 0`, and stays a valid
/// density matrix when they do not commute.
pub fn gibbs_minimizer(
    w: &HermitianOperator,
    sigma: &DensityMatrix,
    beta: f64,
) -> Result<DensityMatrix> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidBeta { beta });
    }
    if w.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            actual: w.dim(),
        });
    }
    if !sigma.has_full_support() {
        return Err(Error::RankDeficient {
            min_weight: sigma.weights()[0],
            support_tol: sigma.support_tol(),
        });
    }
    let log_sigma = matrix_func(sigma.spectrum(), f64::ln)?;
    let tilted = log_sigma.sub(&w.scaled(beta))?;
    let s = tilted.eig()?;
    let top = s.max_eigenvalue();
    let unnormalized: Vec<f64> = s.eigenvalues().iter().map(|&m| (m - top).exp()).collect();
    let total: f64 = unnormalized.iter().sum();
    let weights: Vec<f64> = unnormalized.iter().map(|x| x / total).collect();
    DensityMatrix::from_weights_and_basis(weights, s.eigenvectors().clone())
}

/// The two readings of the tilted log-partition value, reported side by
/// side: `-β^{-1} log Tr(σ e^{-βW})` versus the infimum
/// `-β^{-1} log Tr e^{log σ - βW}` the Hermitian minimizer attains. The
/// difference is non-negative by Golden-Thompson and vanishes when
/// `[W, σ] = 0`.
#[derive(Debug, Clone, Copy)]
pub struct TiltedFreeEnergyGap {
    /// `-β^{-1} log Tr(σ e^{-βW})`.
    pub expectation_form: f64,
    /// `-β^{-1} log Tr e^{log σ - βW}`, the value of the Gibbs functional
    /// at the Hermitian minimizer.
    pub attained_infimum: f64,
    /// `attained_infimum - expectation_form ≥ 0`.
    pub gap: f64,
}

/// Computes both candidate values for the tilted free energy of Lemma-style
/// variational identities; see [`TiltedFreeEnergyGap`].
pub fn tilted_free_energy_gap(
    w: &HermitianOperator,
    sigma: &DensityMatrix,
    beta: f64,
) -> Result<TiltedFreeEnergyGap> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidBeta { beta });
    }
    if !sigma.has_full_support() {
        return Err(Error::RankDeficient {
            min_weight: sigma.weights()[0],
            support_tol: sigma.support_tol(),
        });
    }
    let expectation_form = -log_expectation_exp(sigma, &w.eig()?, beta)? / beta;
    let log_sigma = matrix_func(sigma.spectrum(), f64::ln)?;
    let tilted = log_sigma.sub(&w.scaled(beta))?;
    let attained_infimum = -log_partition(&tilted.eig()?, 1.0)? / beta;
    Ok(TiltedFreeEnergyGap {
        expectation_form,
        attained_infimum,
        gap: attained_infimum - expectation_form,
    })
}

/// Donsker-Varadhan value `Tr(γψ) - log Tr(σ e^ψ)`: a lower bound on
/// `R(γ, σ)` for every observable `ψ`, exact in the simultaneously
/// diagonal case at `ψ = log γ - log σ`.
pub fn donsker_varadhan_value(
    gamma: &DensityMatrix,
    sigma: &DensityMatrix,
    psi: &HermitianOperator,
) -> Result<f64> {
    if gamma.dim() != sigma.dim() || psi.dim() != gamma.dim() {
        return Err(Error::DimensionMismatch {
            expected: gamma.dim(),
            actual: psi.dim(),
        });
    }
    let head = expectation(gamma, psi)?;
    let s_psi = psi.eig()?;
    let top = s_psi.max_eigenvalue();
    let exp_psi = matrix_func(&s_psi, |x| (x - top).exp())?;
    let t = trace_product(sigma.operator(), &exp_psi)?;
    Ok(head - (top + t.ln()))
}

/// Linear span of a fixed observable basis: `W(θ) = Σ θ_i B_i`.
#[derive(Debug, Clone)]
pub struct ObservableFamily {
    basis: Vec<HermitianOperator>,
}

impl ObservableFamily {
    pub fn new(basis: Vec<HermitianOperator>) -> Result<Self> {
        let first_dim = match basis.first() {
            None => return Err(Error::EmptyFamily),
            Some(op) => op.dim(),
        };
        for op in &basis {
            if op.dim() != first_dim {
                return Err(Error::DimensionMismatch {
                    expected: first_dim,
                    actual: op.dim(),
                });
            }
        }
        Ok(Self { basis })
    }

    /// The one-parameter family `{U}`: the commuting-case optimum lies on
    /// this ray.
    pub fn coupling(p: &PartitionedHamiltonian) -> Self {
        Self {
            basis: vec![p.u().clone()],
        }
    }

    /// `{U}` plus, for each block, the sum of coupling terms touching that
    /// block. Falls back to `{U}` when the instance carries no term list.
    pub fn coupling_by_block(p: &PartitionedHamiltonian) -> Result<Self> {
        let mut basis = vec![p.u().clone()];
        if !p.u_terms().is_empty() {
            let layout = p.layout();
            for block in 0..layout.n_blocks() {
                let mut touching = HermitianOperator::zeros(p.dim());
                let mut any = false;
                for term in p.u_terms() {
                    if term
                        .sites()
                        .iter()
                        .any(|&s| layout.block_of_site(s) == block)
                    {
                        touching = touching.add(&term.embed(layout)?)?;
                        any = true;
                    }
                }
                if any {
                    basis.push(touching);
                }
            }
        }
        Ok(Self { basis })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.basis[0].dim()
    }

    pub fn basis(&self) -> &[HermitianOperator] {
        &self.basis
    }

    /// `W(θ) = Σ θ_i B_i`.
    pub fn combine(&self, theta: &[f64]) -> Result<HermitianOperator> {
        if theta.len() != self.basis.len() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.len(),
                actual: theta.len(),
            });
        }
        let mut w = HermitianOperator::zeros(self.dim());
        for (op, &coeff) in self.basis.iter().zip(theta) {
            if coeff != 0.0 {
                w = w.add(&op.scaled(coeff))?;
            }
        }
        Ok(w)
    }
}

/// Trial-state family `γ(θ) = exp(log σ - β W(θ)) / Tr exp(log σ - β W(θ))`
/// around a full-support reference `σ`.
#[derive(Debug, Clone)]
pub struct TrialStateFamily {
    reference: DensityMatrix,
    observables: ObservableFamily,
}

impl TrialStateFamily {
    pub fn new(reference: DensityMatrix, observables: ObservableFamily) -> Result<Self> {
        if reference.dim() != observables.dim() {
            return Err(Error::DimensionMismatch {
                expected: reference.dim(),
                actual: observables.dim(),
            });
        }
        if !reference.has_full_support() {
            return Err(Error::RankDeficient {
                min_weight: reference.weights()[0],
                support_tol: reference.support_tol(),
            });
        }
        Ok(Self {
            reference,
            observables,
        })
    }

    /// The canonical choice: reference `ρ0` with the `{U}` ray, so `θ = 0`
    /// reproduces the Peierls-Bogoliubov endpoint and `θ = 1` reaches the
    /// exact minimizer.
    pub fn around_decoupled_state(p: &PartitionedHamiltonian, beta: f64) -> Result<Self> {
        let rho0 = gibbs_state_from_spectrum(&p.h0().eig()?, beta)?.state;
        Self::new(rho0, ObservableFamily::coupling(p))
    }

    pub fn reference(&self) -> &DensityMatrix {
        &self.reference
    }

    pub fn observables(&self) -> &ObservableFamily {
        &self.observables
    }

    pub fn n_parameters(&self) -> usize {
        self.observables.len()
    }

    /// `γ(θ)`.
    pub fn state(&self, theta: &[f64], beta: f64) -> Result<DensityMatrix> {
        let w = self.observables.combine(theta)?;
        gibbs_minimizer(&w, &self.reference, beta)
    }
}

/// Result of a budgeted variational search.
#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub theta: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Set when the budget ran out before the simplex search converged;
    /// the value is then best-so-far.
    pub budget_exhausted: bool,
}

/// Maximizes the variational lower bound over `W(θ)`; `θ = 0` is always in
/// the start set, so the outcome never falls below the Theorem-2 endpoint
/// `E_ρ[U]`.
pub fn optimize_lower(
    p: &PartitionedHamiltonian,
    beta: f64,
    family: &ObservableFamily,
    budget: usize,
    seed: u64,
) -> Result<OptimizeOutcome> {
    if budget == 0 {
        return Err(Error::ZeroBudget);
    }
    if family.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            actual: family.dim(),
        });
    }
    let rho = gibbs_state_from_spectrum(&p.h().eig()?, beta)?.state;
    let rho0 = gibbs_state_from_spectrum(&p.h0().eig()?, beta)?.state;
    let u = p.u();

    let objective = |theta: &[f64]| -> f64 {
        let value = family
            .combine(theta)
            .and_then(|w| variational_lower_given(&rho, &rho0, u, beta, &w));
        match value {
            Ok(v) if v.is_finite() => v,
            // Overflow or eigen failure on a wild candidate: score it out.
            _ => f64::NEG_INFINITY,
        }
    };
    let result = simplex::maximize(objective, family.len(), &DirectSearch::new(budget, seed));
    Ok(OptimizeOutcome {
        theta: result.best_point,
        value: result.best_value,
        evaluations: result.evaluations,
        budget_exhausted: result.budget_exhausted,
    })
}

/// Minimizes the variational upper bound over the trial family; `θ = 0`
/// (the reference state itself) is always in the start set.
pub fn optimize_upper(
    p: &PartitionedHamiltonian,
    beta: f64,
    family: &TrialStateFamily,
    budget: usize,
    seed: u64,
) -> Result<OptimizeOutcome> {
    if budget == 0 {
        return Err(Error::ZeroBudget);
    }
    if family.reference().dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            actual: family.reference().dim(),
        });
    }
    let rho0 = gibbs_state_from_spectrum(&p.h0().eig()?, beta)?.state;
    let u = p.u();

    // Maximize the negated upper bound; +∞ markers and numerical failures
    // rank strictly below every finite candidate.
    let objective = |theta: &[f64]| -> f64 {
        let value = family
            .state(theta, beta)
            .and_then(|gamma| variational_upper_given(&rho0, u, beta, &gamma));
        match value {
            Ok(ExtReal::Finite(v)) if v.is_finite() => -v,
            _ => f64::NEG_INFINITY,
        }
    };
    let result = simplex::maximize(
        objective,
        family.n_parameters(),
        &DirectSearch::new(budget, seed),
    );
    Ok(OptimizeOutcome {
        theta: result.best_point,
        value: -result.best_value,
        evaluations: result.evaluations,
        budget_exhausted: result.budget_exhausted,
    })
}
