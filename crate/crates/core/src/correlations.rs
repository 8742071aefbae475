//! Mode occupations and second-order correlation functions of a stationary
//! state.
//!
//! Two-time correlations use the quantum regression theorem: the operator
//! `b ρ_ss b†` is propagated with the same generator as the state, giving
//!
//! ```text
//! g²(τ) = Tr(b†b e^{Lτ}[b ρ_ss b†]) / n_b²
//! ```
//!
//! with `n_b` the stationary occupation. Dividing `b ρ_ss b†` by `n_b`
//! turns it into a unit-trace state, so the regular
//! [`evolve`](crate::solver::evolve) path and its validity checks apply
//! unchanged.

use alloc::vec::Vec;

use crate::hilbert::{DensityMatrix, OperatorMatrix};
use crate::solver::{evolve_with, EvolveOptions, Liouvillian};
use crate::{Error, Result, C64};

/// Smallest occupation for which `g²` is defined.
pub const MIN_OCCUPATION: f64 = 1e-12;
/// Largest admissible imaginary part of a Hermitian expectation value,
/// relative to `max(1, |value|)`.
pub const IMAG_TOL: f64 = 1e-10;

fn real_part(z: C64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL * z.re.abs().max(1.0) {
        return Err(Error::InvalidState(alloc::format!(
            "expectation value {z} of a hermitian operator is not real"
        )));
    }
    Ok(z.re)
}

/// `Tr(b†b ρ)`.
pub fn mean_occupation(rho: &DensityMatrix, mode_lowering: &OperatorMatrix) -> Result<f64> {
    let n = &mode_lowering.adjoint() * mode_lowering;
    Ok(real_part(rho.expectation(&n)?)?.max(0.0))
}

/// `Tr(b†b†bb ρ) / Tr(b†b ρ)²`.
pub fn g2_zero(rho: &DensityMatrix, mode_lowering: &OperatorMatrix) -> Result<f64> {
    let n_b = mean_occupation(rho, mode_lowering)?;
    if !(n_b > MIN_OCCUPATION) {
        return Err(Error::UnpopulatedMode(n_b));
    }
    let bd = mode_lowering.adjoint();
    let pairs = &(&bd * &bd) * &(mode_lowering * mode_lowering);
    // The reality check belongs on the raw expectation value: dividing by a
    // small n_b² would amplify round-off in the imaginary part.
    let numerator = real_part(rho.expectation(&pairs)?)?;
    Ok((numerator / (n_b * n_b)).max(0.0))
}

/// `g²(τ)` on an ascending grid of non-negative delays.
pub fn g2_tau(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    mode_lowering: &OperatorMatrix,
    tau_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    g2_tau_with(l, rho_ss, mode_lowering, tau_grid, &EvolveOptions::default())
}

pub fn g2_tau_with(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    mode_lowering: &OperatorMatrix,
    tau_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<(f64, f64)>> {
    if !l.space().same_as(rho_ss.space()) || !l.space().same_as(mode_lowering.space()) {
        return Err(Error::SpaceMismatch);
    }
    let n_b = mean_occupation(rho_ss, mode_lowering)?;
    if !(n_b > MIN_OCCUPATION) {
        return Err(Error::UnpopulatedMode(n_b));
    }
    let mut x = rho_ss.sandwich(mode_lowering)?;
    x.iter_mut().for_each(|v| *v /= n_b);
    let x0 = DensityMatrix::from_column_major(rho_ss.space(), x)?;
    let number = &mode_lowering.adjoint() * mode_lowering;
    evolve_with(&x0, l, tau_grid, opts)?
        .iter()
        .zip(tau_grid)
        .map(|(x, &tau)| Ok((tau, real_part(x.expectation(&number)?)? / n_b)))
        .collect()
}
