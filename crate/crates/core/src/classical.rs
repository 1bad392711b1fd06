//! Classical discrete reduction: interface free energy and its two-sided
//! bounds for commuting (diagonal) instances, by direct summation over
//! states.
//!
//! This module is the independent oracle for the operator-based pipeline.
//! It never touches eigensolvers or density matrices: given the diagonal
//! entries of `H0` and `U` it works with scalar Boltzmann weights only, so
//! agreement with the quantum route on diagonal instances is a meaningful
//! cross-check rather than a tautology.

use crate::error::{Error, Result};

/// Interface free energy and bounds of a discrete commuting instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalBounds {
    /// `E_p[U]`, the lower bound.
    pub lower: f64,
    /// `ΔF = -β^{-1} log(Z/Z0)`.
    pub delta_f: f64,
    /// `E_{p0}[U]`, the upper bound.
    pub upper: f64,
    /// `KL(p0, p) - β (E_{p0}[U] - ΔF)`; zero up to rounding.
    pub residual_upper: f64,
    /// `KL(p, p0) - β (ΔF - E_p[U])`; zero up to rounding.
    pub residual_lower: f64,
}

/// Direct-summation bounds for diagonal `H0`, `U` with `H = H0 + U`.
///
/// Weights are formed stably around the minimum of each energy vector, and
/// the Kullback-Leibler residuals are accumulated from the same scalar
/// weights.
pub fn diagonal_bounds(h0_diag: &[f64], u_diag: &[f64], beta: f64) -> Result<ClassicalBounds> {
    if h0_diag.len() != u_diag.len() {
        return Err(Error::DimensionMismatch {
            expected: h0_diag.len(),
            actual: u_diag.len(),
        });
    }
    if h0_diag.is_empty() {
        return Err(Error::EmptyDimension);
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidBeta { beta });
    }

    let h_diag: Vec<f64> = h0_diag.iter().zip(u_diag).map(|(a, b)| a + b).collect();
    let (p0, log_z0) = boltzmann_weights(h0_diag, beta);
    let (p, log_z) = boltzmann_weights(&h_diag, beta);

    let delta_f = -(log_z - log_z0) / beta;
    let lower: f64 = p.iter().zip(u_diag).map(|(w, u)| w * u).sum();
    let upper: f64 = p0.iter().zip(u_diag).map(|(w, u)| w * u).sum();

    let kl_p0_p = discrete_kl(&p0, &p);
    let kl_p_p0 = discrete_kl(&p, &p0);
    Ok(ClassicalBounds {
        lower,
        delta_f,
        upper,
        residual_upper: kl_p0_p - beta * (upper - delta_f),
        residual_lower: kl_p_p0 - beta * (delta_f - lower),
    })
}

/// Normalized Boltzmann weights and `log Z` for a diagonal energy vector.
fn boltzmann_weights(energies: &[f64], beta: f64) -> (Vec<f64>, f64) {
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut weights: Vec<f64> = energies.iter().map(|&e| (-beta * (e - min)).exp()).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    (weights, -beta * min + total.ln())
}

/// `Σ p_i log(p_i / q_i)` with the `0·log 0 = 0` convention; the Boltzmann
/// weights here are strictly positive so no support guard is needed.
fn discrete_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi.ln() - qi.ln()))
        .sum()
}
