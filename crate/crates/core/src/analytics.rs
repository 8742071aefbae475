//! Closed-form results for the driven resonator–qubit system.
//!
//! The weak-drive treatment expands the steady state in the lowest Fock
//! manifolds, `|ψ⟩ = |0,g⟩ + C₀ₑ|0,e⟩ + C₁g|1,g⟩ + C₁ₑ|1,e⟩ + C₂g|2,g⟩ + …`,
//! with each excited amplitude damped by half the decay rate of its state.
//! Perfect antibunching means `C₂g = 0`; eliminating the lower amplitudes
//! turns that into a quadratic in the complex drive ratio
//! `z = (Ω/ε) e^{-iφ}`:
//!
//! ```text
//! A₂ z² + A₁ z + A₀ = 0
//! A₂ = √2 J²
//! A₁ = -2√2 J (2Δ - i(κ+γ)/2)
//! A₀ = √2 J² + √2 (Δ - iκ/2)(2Δ - i(κ+γ)/2)
//! ```
//!
//! Everything here is evaluated at zero temperature.

use core::f64::consts::{PI, SQRT_2};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::model::{wrap_phase, MqParams};
use crate::{Error, Result, C64};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;

/// Coefficients of the optimal-antibunching quadratic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCoefficients {
    pub a0: C64,
    pub a1: C64,
    pub a2: C64,
}

impl QuadraticCoefficients {
    pub fn eval(&self, z: C64) -> C64 {
        (self.a2 * z + self.a1) * z + self.a0
    }

    /// `|A₀| + |A₁| + |A₂|`, the scale for relative residuals.
    pub fn scale(&self) -> f64 {
        self.a0.norm() + self.a1.norm() + self.a2.norm()
    }
}

pub fn optimal_coefficients(delta_opt: f64, j_opt: f64, kappa: f64, gamma: f64) -> QuadraticCoefficients {
    let two_excitation = C64::new(2.0 * delta_opt, -(kappa + gamma) / 2.0);
    let qubit_excited = C64::new(delta_opt, -kappa / 2.0);
    let j2 = j_opt * j_opt;
    QuadraticCoefficients {
        a2: C64::new(SQRT_2 * j2, 0.0),
        a1: -2.0 * SQRT_2 * j_opt * two_excitation,
        a0: SQRT_2 * j2 + SQRT_2 * qubit_excited * two_excitation,
    }
}

/// Which root of the quadratic to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

/// Both solutions `z± = η± e^{-iφ±}` of the optimal-drive quadratic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalRoots {
    pub eta_plus: f64,
    pub phi_plus: f64,
    pub eta_minus: f64,
    pub phi_minus: f64,
}

impl OptimalRoots {
    pub fn eta(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.eta_plus,
            Branch::Minus => self.eta_minus,
        }
    }

    pub fn phi(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.phi_plus,
            Branch::Minus => self.phi_minus,
        }
    }

    /// `η e^{-iφ}` for the chosen branch.
    pub fn root(&self, branch: Branch) -> C64 {
        C64::from_polar(self.eta(branch), -self.phi(branch))
    }

    /// Applies the branch to `p`: `Ω = η ε`, `φ` from the root.
    pub fn drive(&self, branch: Branch, p: MqParams) -> MqParams {
        MqParams {
            omega: self.eta(branch) * p.eps,
            phi: self.phi(branch),
            ..p
        }
    }
}

/// Closed-form roots, principal square-root branch, `+` taking `+√`.
pub fn optimal_drive_roots(delta_opt: f64, j_opt: f64, kappa: f64, gamma: f64) -> Result<OptimalRoots> {
    if !(j_opt.is_finite() && j_opt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "j_opt",
            reason: alloc::format!("{j_opt} must be positive"),
        });
    }
    let centre = C64::new(2.0 * delta_opt / j_opt, -(kappa + gamma) / (2.0 * j_opt));
    let mech = C64::new(delta_opt / j_opt, -gamma / (2.0 * j_opt));
    let root = (mech * centre - 1.0).sqrt();
    let polar = |z: C64| (z.norm(), wrap_phase(-z.arg()));
    let (eta_plus, phi_plus) = polar(centre + root);
    let (eta_minus, phi_minus) = polar(centre - root);
    Ok(OptimalRoots {
        eta_plus,
        phi_plus,
        eta_minus,
        phi_minus,
    })
}

/// Optimum without a qubit drive: `(Δ_opt, J_opt) = (0, ½√(κ(κ+γ)))`.
pub fn no_qubit_drive_optimum(kappa: f64, gamma: f64) -> (f64, f64) {
    (0.0, 0.5 * (kappa * (kappa + gamma)).sqrt())
}

/// Lowest-order steady-state amplitudes relative to `C₀g = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbativeAmplitudes {
    pub c0e: C64,
    pub c1g: C64,
    pub c1e: C64,
    pub c2g: C64,
}

impl PerturbativeAmplitudes {
    /// Weak-drive estimate `2|C₂g|² / |C₁g|⁴` of `g²(0)`.
    pub fn g2_zero(&self) -> f64 {
        2.0 * self.c2g.norm_sqr() / self.c1g.norm_sqr().powi(2)
    }
}

const DEGENERATE: f64 = 1e-300;

/// Solves the one- and two-excitation amplitude equations in turn.
pub fn perturbative_amplitudes(p: &MqParams) -> Result<PerturbativeAmplitudes> {
    let p = p.validated()?;
    if p.n_th != 0.0 {
        return Err(Error::InvalidParameter {
            name: "n_th",
            reason: "weak-drive amplitudes hold at zero temperature only".into(),
        });
    }
    let drive = p.qubit_drive();
    let eps = C64::new(p.eps, 0.0);
    let j = C64::new(p.j, 0.0);
    let qubit = C64::new(p.delta, -p.kappa / 2.0);
    let mech = C64::new(p.delta, -p.gamma / 2.0);

    // (Δ - iκ/2) C₀ₑ + J C₁g = -Ω e^{-iφ}
    // J C₀ₑ + (Δ - iγ/2) C₁g = -ε
    let det1 = qubit * mech - j * j;
    if det1.norm() < DEGENERATE {
        return Err(Error::Degenerate("one-excitation amplitudes"));
    }
    let c0e = (eps * j - drive * mech) / det1;
    let c1g = (j * drive - eps * qubit) / det1;

    // (2Δ - i(κ+γ)/2) C₁ₑ + √2 J C₂g = -(ε C₀ₑ + Ω e^{-iφ} C₁g)
    // √2 J C₁ₑ + (2Δ - iγ) C₂g = -√2 ε C₁g
    let pair = C64::new(2.0 * p.delta, -(p.kappa + p.gamma) / 2.0);
    let two_phonon = C64::new(2.0 * p.delta, -p.gamma);
    let sj = SQRT_2 * j;
    let det2 = pair * two_phonon - sj * sj;
    if det2.norm() < DEGENERATE {
        return Err(Error::Degenerate("two-excitation amplitudes"));
    }
    let r1 = -(eps * c0e + drive * c1g);
    let r2 = -(SQRT_2 * eps * c1g);
    let c1e = (r1 * two_phonon - sj * r2) / det2;
    let c2g = (pair * r2 - sj * r1) / det2;
    Ok(PerturbativeAmplitudes { c0e, c1g, c1e, c2g })
}

/// Bose–Einstein occupation `1/(e^{ħω/k_BT} - 1)` with `ω = 2π·freq_hz`.
/// Zero at zero temperature.
pub fn thermal_occupation(freq_hz: f64, temp_k: f64) -> f64 {
    if temp_k <= 0.0 {
        return 0.0;
    }
    let x = HBAR * 2.0 * PI * freq_hz / (K_B * temp_k);
    1.0 / x.exp_m1()
}

/// Mechanical parameters after adiabatically eliminating the readout cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveMechanics {
    /// γ̃ = γ + γ_om
    pub gamma_eff: f64,
    /// ñ = (γ n_th + γ_om n_om) / (γ + γ_om)
    pub n_eff: f64,
    pub gamma_om: f64,
    pub n_om: f64,
    /// Optomechanical frequency shift δω.
    pub delta_omega: f64,
}

/// Cavity-induced damping, occupation and frequency shift of the mechanics
/// in the resolved-sideband regime.
pub fn effective_mech_params(g: C64, cavity_damping: f64, omega_m: f64, gamma: f64, n_m_th: f64) -> EffectiveMechanics {
    let g2 = g.norm_sqr();
    let gamma_c2 = cavity_damping * cavity_damping;
    let w2 = 16.0 * omega_m * omega_m;
    let gamma_om = 4.0 * g2 / cavity_damping * w2 / (gamma_c2 + w2);
    let n_om = gamma_c2 / w2;
    EffectiveMechanics {
        gamma_eff: gamma + gamma_om,
        n_eff: (gamma * n_m_th + gamma_om * n_om) / (gamma + gamma_om),
        gamma_om,
        n_om,
        delta_omega: 8.0 * g2 * omega_m / (gamma_c2 + w2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a0_vanishes_at_no_drive_optimum() {
        for gamma in [0.2, 1.0, 5.0] {
            let (d, j) = no_qubit_drive_optimum(1.0, gamma);
            let c = optimal_coefficients(d, j, 1.0, gamma);
            assert!(c.a0.norm() < 1e-15, "{:?}", c.a0);
        }
    }

    #[test]
    fn coefficients_without_coupling() {
        let c = optimal_coefficients(0.7, 0.0, 1.0, 2.0);
        assert_eq!(c.a2, C64::new(0.0, 0.0));
        assert_eq!(c.a1.norm(), 0.0);
        let expected = SQRT_2 * C64::new(0.7, -0.5) * C64::new(1.4, -1.5);
        assert!((c.a0 - expected).norm() < 1e-15);
    }

    #[test]
    fn roots_solve_quadratic() {
        for delta in [-3.0, 0.0, 3.0] {
            let c = optimal_coefficients(delta, 3.0, 1.0, 1.0);
            let r = optimal_drive_roots(delta, 3.0, 1.0, 1.0).unwrap();
            for br in [Branch::Plus, Branch::Minus] {
                assert!(c.eval(r.root(br)).norm() < 1e-10 * c.scale());
            }
        }
    }

    #[test]
    fn roots_reject_zero_coupling() {
        assert!(optimal_drive_roots(1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn root_ordering_follows_detuning_sign() {
        let pos = optimal_drive_roots(3.0, 3.0, 1.0, 1.0).unwrap();
        assert!(pos.eta_plus > pos.eta_minus);
        let neg = optimal_drive_roots(-3.0, 3.0, 1.0, 1.0).unwrap();
        assert!(neg.eta_plus < neg.eta_minus);
    }

    #[test]
    fn phases_are_wrapped() {
        for k in -40..=40 {
            let r = optimal_drive_roots(k as f64 * 0.25, 3.0, 1.0, 1.0).unwrap();
            for phi in [r.phi_plus, r.phi_minus] {
                assert!(phi > -PI && phi <= PI);
            }
        }
    }

    #[test]
    fn no_drive_optimum_values() {
        let (d, j) = no_qubit_drive_optimum(1.0, 1.0);
        assert_eq!(d, 0.0);
        assert!((j - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((no_qubit_drive_optimum(1.0, 0.0).1 - 0.5).abs() < 1e-15);
        assert!((no_qubit_drive_optimum(1.0, 5.0).1 - 0.5 * 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn c2g_vanishes_at_optimum() {
        let (d, j) = no_qubit_drive_optimum(1.0, 1.0);
        let p = MqParams {
            delta: d,
            j,
            eps: 0.01,
            ..MqParams::default()
        };
        let amps = perturbative_amplitudes(&p).unwrap();
        assert!(amps.c2g.norm() < 1e-12);

        let roots = optimal_drive_roots(3.0, 3.0, 1.0, 1.0).unwrap();
        for br in [Branch::Plus, Branch::Minus] {
            let p = roots.drive(
                br,
                MqParams {
                    delta: 3.0,
                    j: 3.0,
                    eps: 0.01,
                    ..MqParams::default()
                },
            );
            let amps = perturbative_amplitudes(&p).unwrap();
            assert!(amps.c2g.norm() < 1e-12, "{br:?}: {}", amps.c2g.norm());
        }
    }

    #[test]
    fn amplitude_hierarchy() {
        let p = MqParams {
            delta: 0.3,
            j: 1.0,
            eps: 0.01,
            omega: 0.005,
            phi: 0.4,
            ..MqParams::default()
        };
        let a = perturbative_amplitudes(&p).unwrap();
        let first = a.c0e.norm().max(a.c1g.norm());
        let second = a.c1e.norm().max(a.c2g.norm());
        assert!(first < 0.1);
        assert!(second * 10.0 < a.c0e.norm().min(a.c1g.norm()));
    }

    #[test]
    fn amplitudes_need_zero_temperature() {
        let p = MqParams {
            j: 1.0,
            eps: 0.01,
            n_th: 0.1,
            ..MqParams::default()
        };
        assert!(perturbative_amplitudes(&p).is_err());
    }

    #[test]
    fn thermal_values() {
        let n = thermal_occupation(6e9, 0.025);
        assert!(n > 0.9e-5 && n < 1.1e-5, "{n}");
        assert_eq!(thermal_occupation(6e9, 0.0), 0.0);
        // ħω = k_B T ln 2
        let t = 1.0;
        let f = K_B * t * 2f64.ln() / (HBAR * 2.0 * PI);
        assert!((thermal_occupation(f, t) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn effective_mechanics_limits() {
        let off = effective_mech_params(C64::new(0.0, 0.0), 10.0, 1000.0, 1.0, 1e-3);
        assert_eq!(off.gamma_eff, 1.0);
        assert_eq!(off.gamma_om, 0.0);
        assert_eq!(off.delta_omega, 0.0);
        assert!((off.n_eff - 1e-3).abs() < 1e-18);
        assert!((off.n_om - 100.0 / 16e6).abs() < 1e-18);

        let g = C64::new(0.3, 0.4);
        let resolved = effective_mech_params(g, 1.0, 100.0, 1.0, 0.0);
        let limit = 4.0 * g.norm_sqr() / 1.0;
        assert!((resolved.gamma_om - limit).abs() < 0.01 * limit);
    }
}
