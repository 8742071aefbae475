//! Rotating-frame Hamiltonians and dissipators.
//!
//! Two systems are modelled, both in the frame of the common drive frequency
//! with the qubit resonant with the mechanical mode:
//!
//! * the resonator–qubit system on factors `m` (mechanical boson) and `q`
//!   (qubit), with a mechanical drive `ε` and a qubit drive `Ω e^{-iφ}`;
//! * the readout system, which adds a cavity boson `a` coupled to the
//!   mechanics by the linearised beam-splitter term `G a†b + G* a b†`. The
//!   cavity shares the detuning `Δ` (it is driven on the red sideband, so
//!   the lab-frame cavity detuning equals the mechanical frequency) and
//!   decays into a zero-temperature bath at rate `Γ`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::analytics;
use crate::hilbert::{lowering, number, FactorKind, HilbertSpace, OperatorMatrix};
use crate::{Error, Result, C64};

pub const MECHANICAL: &str = "m";
pub const QUBIT: &str = "q";
pub const CAVITY: &str = "a";

/// Mechanical Fock cutoff for two-mode runs.
pub const DEFAULT_MECH_CUTOFF: usize = 8;
/// Mechanical Fock cutoff for three-mode runs.
pub const DEFAULT_THREE_MODE_MECH_CUTOFF: usize = 6;
/// Cavity Fock cutoff for three-mode runs.
pub const DEFAULT_CAVITY_CUTOFF: usize = 3;

/// `m ⊗ q`
pub fn two_mode_space(mech_cutoff: usize) -> Result<HilbertSpace> {
    HilbertSpace::new([
        (MECHANICAL, FactorKind::Boson { cutoff: mech_cutoff }),
        (QUBIT, FactorKind::Qubit),
    ])
}

/// `a ⊗ m ⊗ q`
pub fn three_mode_space(cavity_cutoff: usize, mech_cutoff: usize) -> Result<HilbertSpace> {
    HilbertSpace::new([
        (CAVITY, FactorKind::Boson { cutoff: cavity_cutoff }),
        (MECHANICAL, FactorKind::Boson { cutoff: mech_cutoff }),
        (QUBIT, FactorKind::Qubit),
    ])
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut x = phi % two_pi;
    if x <= -PI {
        x += two_pi;
    } else if x > PI {
        x -= two_pi;
    }
    x
}

/// Parameters of the driven resonator–qubit system, in units of κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MqParams {
    /// Detuning Δ of both the qubit and the resonator from the drives.
    pub delta: f64,
    /// Resonator–qubit coupling J.
    pub j: f64,
    /// Mechanical drive strength ε.
    pub eps: f64,
    /// Qubit drive strength Ω.
    pub omega: f64,
    /// Phase difference φ between the two drives.
    pub phi: f64,
    /// Qubit damping rate κ.
    pub kappa: f64,
    /// Mechanical damping rate γ.
    pub gamma: f64,
    /// Thermal occupation shared by the qubit and mechanical baths.
    pub n_th: f64,
}

impl Default for MqParams {
    fn default() -> Self {
        Self {
            delta: 0.0,
            j: 0.0,
            eps: 0.0,
            omega: 0.0,
            phi: 0.0,
            kappa: 1.0,
            gamma: 1.0,
            n_th: 0.0,
        }
    }
}

fn finite(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("{x} is not finite"),
        })
    }
}

fn non_negative(name: &'static str, x: f64) -> Result<()> {
    finite(name, x)?;
    if x < 0.0 {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("{x} is negative"),
        });
    }
    Ok(())
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    finite(name, x)?;
    if x <= 0.0 {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("{x} must be positive"),
        });
    }
    Ok(())
}

impl MqParams {
    /// Checks the parameter ranges and wraps `phi` into `(-π, π]`.
    pub fn validated(mut self) -> Result<Self> {
        finite("delta", self.delta)?;
        non_negative("J", self.j)?;
        non_negative("eps", self.eps)?;
        non_negative("omega", self.omega)?;
        finite("phi", self.phi)?;
        positive("kappa", self.kappa)?;
        positive("gamma", self.gamma)?;
        non_negative("n_th", self.n_th)?;
        self.phi = wrap_phase(self.phi);
        Ok(self)
    }

    /// Complex qubit drive amplitude `Ω e^{-iφ}`.
    pub fn qubit_drive(&self) -> C64 {
        C64::from_polar(self.omega, -self.phi)
    }
}

/// Three-mode readout parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    pub base: MqParams,
    /// Effective (linearised) optomechanical coupling G.
    pub g: C64,
    /// Cavity damping rate Γ.
    pub cavity_damping: f64,
}

impl DetectionParams {
    pub fn validated(mut self) -> Result<Self> {
        self.base = self.base.validated()?;
        finite("G", self.g.re)?;
        finite("G", self.g.im)?;
        positive("Gamma", self.cavity_damping)?;
        Ok(self)
    }
}

/// Lab-frame device description, used only to derive thermal occupations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabFrameParams {
    /// Mechanical angular frequency ω_m (rad/s).
    pub omega_m: f64,
    /// Qubit angular frequency ω_0 (rad/s).
    pub omega_0: f64,
    /// Bath temperature (K).
    pub temperature: f64,
}

impl LabFrameParams {
    /// Bose–Einstein occupation of the mechanical mode.
    pub fn thermal_occupation(&self) -> f64 {
        analytics::thermal_occupation(self.omega_m / (2.0 * PI), self.temperature)
    }

    /// Returns `base` with its `n_th` replaced by this device's occupation.
    ///
    /// Fails unless the qubit is resonant with the resonator, since the two
    /// baths then share a single occupation.
    pub fn apply_to(&self, base: MqParams) -> Result<MqParams> {
        positive("omega_m", self.omega_m)?;
        positive("omega_0", self.omega_0)?;
        non_negative("temperature", self.temperature)?;
        if (self.omega_0 - self.omega_m).abs() > 1e-9 * self.omega_m {
            return Err(Error::InvalidParameter {
                name: "omega_0",
                reason: format!("qubit ({}) not resonant with resonator ({})", self.omega_0, self.omega_m),
            });
        }
        MqParams {
            n_th: self.thermal_occupation(),
            ..base
        }
        .validated()
    }
}

/// Device numbers of a 6 GHz dilatational resonator coupled to a phase qubit
/// at 25 mK: J/2π ≈ 124 MHz, γ/2π ≈ 26 MHz, κ/2π ≈ 9 MHz.
///
/// Returns the lab-frame description and the matching undriven parameters in
/// units of κ.
pub fn phase_qubit_device() -> (LabFrameParams, MqParams) {
    let two_pi = 2.0 * PI;
    let lab = LabFrameParams {
        omega_m: two_pi * 6.0e9,
        omega_0: two_pi * 6.0e9,
        temperature: 0.025,
    };
    let kappa_mhz = 9.0;
    let params = MqParams {
        j: 124.0 / kappa_mhz,
        gamma: 26.0 / kappa_mhz,
        kappa: 1.0,
        n_th: lab.thermal_occupation(),
        ..MqParams::default()
    };
    (lab, params)
}

fn require(space: &HilbertSpace, label: &str, qubit: bool) -> Result<()> {
    let kind = space.factor(label)?.kind();
    let ok = match kind {
        FactorKind::Qubit => qubit,
        FactorKind::Boson { .. } => !qubit,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::WrongFactorKind {
            label: label.into(),
            expected: if qubit { "qubit" } else { "boson" },
        })
    }
}

/// Resonator–qubit Hamiltonian with an arbitrary complex qubit drive.
pub(crate) fn resonator_qubit_hamiltonian(
    space: &HilbertSpace,
    delta: f64,
    j: f64,
    eps: f64,
    qubit_drive: C64,
) -> Result<OperatorMatrix> {
    require(space, MECHANICAL, false)?;
    require(space, QUBIT, true)?;
    let b = lowering(space, MECHANICAL)?;
    let sm = lowering(space, QUBIT)?;
    let bd = b.adjoint();
    let sp = sm.adjoint();
    let free = &number(space, MECHANICAL)? + &number(space, QUBIT)?;
    let exchange = &(&sp * &b) + &(&bd * &sm);
    let drive = [
        qubit_drive * &sp,
        qubit_drive.conj() * &sm,
        eps * &bd,
        eps * &b,
    ]
    .iter()
    .fold(OperatorMatrix::zeros(space), |acc, x| &acc + x);
    Ok(&(&(delta * &free) + &(j * &exchange)) + &drive)
}

/// `H = Δσ₊σ₋ + Δb†b + J(σ₊b + b†σ₋) + (Ωe^{-iφ}σ₊ + εb† + h.c.)`
pub fn build_h_mq(p: &MqParams, space: &HilbertSpace) -> Result<OperatorMatrix> {
    let p = p.validated()?;
    resonator_qubit_hamiltonian(space, p.delta, p.j, p.eps, p.qubit_drive())
}

/// Resonator–qubit Hamiltonian plus `Δa†a + G a†b + G* a b†`.
pub fn build_h_total(p: &DetectionParams, space: &HilbertSpace) -> Result<OperatorMatrix> {
    let p = p.validated()?;
    require(space, CAVITY, false)?;
    let base = &p.base;
    let h_mq = resonator_qubit_hamiltonian(space, base.delta, base.j, base.eps, base.qubit_drive())?;
    let a = lowering(space, CAVITY)?;
    let b = lowering(space, MECHANICAL)?;
    let beam_splitter = &(p.g * &(&a.adjoint() * &b)) + &(p.g.conj() * &(&a * &b.adjoint()));
    Ok(&(&h_mq + &(base.delta * &number(space, CAVITY)?)) + &beam_splitter)
}

/// A Lindblad channel `rate · L[op]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Collapse {
    pub rate: f64,
    pub op: OperatorMatrix,
}

/// Thermal mechanical and qubit channels, zero rates omitted.
fn thermal_channels(p: &MqParams, space: &HilbertSpace) -> Result<Vec<Collapse>> {
    require(space, MECHANICAL, false)?;
    require(space, QUBIT, true)?;
    let b = lowering(space, MECHANICAL)?;
    let sm = lowering(space, QUBIT)?;
    let channels = [
        (p.gamma * (p.n_th + 1.0), b.clone()),
        (p.gamma * p.n_th, b.adjoint()),
        (p.kappa * (p.n_th + 1.0), sm.clone()),
        (p.kappa * p.n_th, sm.adjoint()),
    ];
    Ok(channels
        .into_iter()
        .filter(|(rate, _)| *rate > 0.0)
        .map(|(rate, op)| Collapse { rate, op })
        .collect())
}

/// A model that can produce its Hamiltonian and dissipators.
pub trait OpenSystem {
    fn hamiltonian(&self, space: &HilbertSpace) -> Result<OperatorMatrix>;
    fn collapse_ops(&self, space: &HilbertSpace) -> Result<Vec<Collapse>>;
}

impl OpenSystem for MqParams {
    fn hamiltonian(&self, space: &HilbertSpace) -> Result<OperatorMatrix> {
        build_h_mq(self, space)
    }

    fn collapse_ops(&self, space: &HilbertSpace) -> Result<Vec<Collapse>> {
        thermal_channels(&self.validated()?, space)
    }
}

impl OpenSystem for DetectionParams {
    fn hamiltonian(&self, space: &HilbertSpace) -> Result<OperatorMatrix> {
        build_h_total(self, space)
    }

    fn collapse_ops(&self, space: &HilbertSpace) -> Result<Vec<Collapse>> {
        let p = self.validated()?;
        require(space, CAVITY, false)?;
        let mut ops = thermal_channels(&p.base, space)?;
        ops.push(Collapse {
            rate: p.cavity_damping,
            op: lowering(space, CAVITY)?,
        });
        Ok(ops)
    }
}

/// `[(γ(n+1), b), (γn, b†), (κ(n+1), σ₋), (κn, σ₊)]`, plus `(Γ, a)` for the
/// readout model. Zero-rate channels are dropped.
pub fn collapse_ops(p: &impl OpenSystem, space: &HilbertSpace) -> Result<Vec<Collapse>> {
    p.collapse_ops(space)
}

/// One rung of the resonant Jaynes–Cummings ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedLevel {
    pub n: usize,
    pub upper: f64,
    pub lower: f64,
}

/// Energies `nΔ ± √n J` of the dressed doublets for `n = 1..=n_max`. The
/// ground state `|0, g⟩` sits at zero.
pub fn dressed_spectrum(j: f64, delta: f64, n_max: usize) -> Vec<DressedLevel> {
    (1..=n_max)
        .map(|n| {
            let centre = n as f64 * delta;
            let split = (n as f64).sqrt() * j;
            DressedLevel {
                n,
                upper: centre + split,
                lower: centre - split,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(0.5) - 0.5).abs() < 1e-15);
        assert!((wrap_phase(-2.0 * PI - 0.25) + 0.25).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        let bad = MqParams {
            kappa: 0.0,
            ..MqParams::default()
        };
        assert!(matches!(bad.validated(), Err(Error::InvalidParameter { name: "kappa", .. })));
        let neg = MqParams {
            eps: -0.1,
            ..MqParams::default()
        };
        assert!(neg.validated().is_err());
        let nan = MqParams {
            delta: f64::NAN,
            ..MqParams::default()
        };
        assert!(nan.validated().is_err());
    }

    #[test]
    fn hamiltonian_needs_factors() {
        let s = HilbertSpace::new([(MECHANICAL, FactorKind::Boson { cutoff: 3 })]).unwrap();
        assert!(matches!(build_h_mq(&MqParams::default(), &s), Err(Error::UnknownLabel(_))));
        let swapped = HilbertSpace::new([
            (MECHANICAL, FactorKind::Qubit),
            (QUBIT, FactorKind::Qubit),
        ])
        .unwrap();
        assert!(matches!(
            build_h_mq(&MqParams::default(), &swapped),
            Err(Error::WrongFactorKind { .. })
        ));
        let det = DetectionParams {
            base: MqParams::default(),
            g: C64::new(0.1, 0.0),
            cavity_damping: 10.0,
        };
        assert!(matches!(
            build_h_total(&det, &two_mode_space(3).unwrap()),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn drive_sign_flip_is_a_phase_shift() {
        let s = two_mode_space(4).unwrap();
        let (omega, phi) = (0.37, 0.8);
        let a = resonator_qubit_hamiltonian(&s, 0.4, 1.3, 0.2, C64::from_polar(omega, -phi)).unwrap();
        let b = resonator_qubit_hamiltonian(&s, 0.4, 1.3, 0.2, C64::from_polar(-omega, -(phi + PI))).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-15);
    }

    #[test]
    fn collapse_rates() {
        let s = two_mode_space(3).unwrap();
        let cold = collapse_ops(&MqParams::default(), &s).unwrap();
        assert_eq!(cold.len(), 2);
        assert_eq!(cold.iter().map(|c| c.rate).collect::<Vec<_>>(), vec![1.0, 1.0]);
        let warm = MqParams {
            n_th: 0.5,
            ..MqParams::default()
        };
        let ops = collapse_ops(&warm, &s).unwrap();
        assert_eq!(ops.iter().map(|c| c.rate).collect::<Vec<_>>(), vec![1.5, 0.5, 1.5, 0.5]);
        assert_eq!(ops[1].op, ops[0].op.adjoint());

        let s3 = three_mode_space(2, 3).unwrap();
        let det = DetectionParams {
            base: MqParams::default(),
            g: C64::new(0.1, 0.0),
            cavity_damping: 10.0,
        };
        let ops = collapse_ops(&det, &s3).unwrap();
        assert_eq!(ops.len(), 3);
        assert_eq!(ops[2].rate, 10.0);
        assert_eq!(ops[2].op, lowering(&s3, CAVITY).unwrap());
    }

    #[test]
    fn dressed_doublets() {
        let levels = dressed_spectrum(10.0, 10.0, 2);
        assert_eq!(levels[0].n, 1);
        assert!((levels[0].upper - 20.0).abs() < 1e-12);
        assert!(levels[0].lower.abs() < 1e-12);
        assert!((levels[1].upper - (20.0 + 10.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!((levels[1].lower - (20.0 - 10.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn device_preset_units() {
        let (lab, p) = phase_qubit_device();
        assert!((p.j - 124.0 / 9.0).abs() < 1e-12);
        assert!(p.n_th > 0.9e-5 && p.n_th < 1.1e-5);
        let applied = lab.apply_to(MqParams::default()).unwrap();
        assert_eq!(applied.n_th, p.n_th);
        let detuned = LabFrameParams {
            omega_0: lab.omega_0 * 1.01,
            ..lab
        };
        assert!(detuned.apply_to(MqParams::default()).is_err());
    }
}
