//! Named sweeps that regenerate the data behind each figure.
//!
//! A figure is a list of panels, one [`SweepSpec`] per panel or per group of
//! traces that share their fixed parameters. Trace values given in the
//! figure legends are encoded exactly. Plot-window extents are not printed
//! anywhere and were chosen to cover the visible window:
//!
//! | preset | panels | extents |
//! |--------|--------|---------|
//! | fig2   | Δ × J maps | Δ ∈ [−15, 15], J ∈ [0, 15]; magnified Δ ∈ [−2, 2], J ∈ [0, 2] |
//! | fig3   | Δ and J cuts, g²(τ) | Δ ∈ [−15, 15] or [−2, 2]; J ∈ [0, 15] or [0, 2]; τ ∈ [0, 3·2π] |
//! | fig4   | γ × J maps at Δ = 10 and 0, J cuts | γ ∈ [0.1, 10] (log); J ∈ [0, 15] at Δ = 10, [0, 3] at Δ = 0 |
//! | fig5   | Δ cuts with n_th traces, n_th scans | n_th ∈ [1e−7, 1e−3] (log); traces n_th ∈ {0, 1e−5, 5e−5, 1e−4} |
//! | fig6   | ε scans | ε ∈ [1e−3, 1] (log); traces n_th ∈ {0, 1e−5, 1e−4} |
//! | fig7   | optimal-drive roots | Δ_opt ∈ [−9, 9] |
//! | fig8   | Δ × Δ_opt maps, both branches | Δ, Δ_opt ∈ [−9, 9] |
//! | fig9   | Δ cuts at Δ_opt = ±3, both branches, g²(τ) at Δ = Δ_opt | Δ ∈ [−9, 9]; τ ∈ [0, 3·2π] |
//! | fig10  | ε scans with n_th traces, n_th scans with ε traces | ε ∈ [0.01, 1] (log), traces n_th ∈ {0, 0.02, 0.06, 0.1}; n_th ∈ [1e−4, 0.1] (log), traces ε ∈ {0.2, 0.4, 0.6} |
//! | fig11  | three-mode Δ cut with two-mode companion, |G| and Γ scans | Δ ∈ [−9, 9]; |G| ∈ [0.01, 3] (log); Γ ∈ [1, 100] (log) |
//!
//! All rates are in units of κ. Curve axes default to [`DEFAULT_POINTS`]
//! points; trace axes keep the legend values. The resonant strong-drive
//! panels (fig6b, fig6d, fig10) run at mechanical cutoff 14, everything else
//! at the model default.

use blockade_core::analytics::Branch;
use blockade_core::model::{DetectionParams, MqParams};
use blockade_core::C64;

use crate::sweep::{linspace, Axis, Link, Output, Param, QubitDrive, SweepError, SweepSpec};

/// Points per continuous axis.
pub const DEFAULT_POINTS: usize = 61;

/// Mechanical cutoff for panels whose drive reaches ε ~ κ on resonance.
const STRONG_DRIVE_CUTOFF: usize = 14;

/// Known preset names.
pub const PRESETS: [&str; 10] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11"];

/// Panels of the named figure at [`DEFAULT_POINTS`] per continuous axis.
pub fn figure_preset(name: &str) -> Result<Vec<SweepSpec>, SweepError> {
    figure_preset_with(name, DEFAULT_POINTS)
}

/// Panels of the named figure with `points` per continuous axis.
pub fn figure_preset_with(name: &str, points: usize) -> Result<Vec<SweepSpec>, SweepError> {
    if points == 0 {
        return Err(SweepError::Invalid("preset grids need at least one point".into()));
    }
    let n = points;
    let panels = match name {
        "fig2" => fig2(n),
        "fig3" => fig3(n),
        "fig4" => fig4(n),
        "fig5" => fig5(n),
        "fig6" => fig6(n),
        "fig7" => fig7(n),
        "fig8" => fig8(n),
        "fig9" => fig9(n),
        "fig10" => fig10(n),
        "fig11" => fig11(n),
        _ => return Err(SweepError::UnknownPreset(name.into())),
    };
    Ok(panels)
}

/// γ = κ, ε = 0.01, Ω = 0, n_th = 0.
fn weak_drive(delta: f64, j: f64) -> MqParams {
    MqParams {
        delta,
        j,
        eps: 0.01,
        ..MqParams::default()
    }
}

/// γ = κ, J = 3, ε = 0.2, n_th = 0; the qubit drive comes from the roots.
fn two_drive() -> MqParams {
    MqParams {
        j: 3.0,
        eps: 0.2,
        ..MqParams::default()
    }
}

fn tau(n: usize) -> Vec<f64> {
    linspace(0.0, 3.0 * core::f64::consts::TAU, n)
}

fn lin(p: Param, a: f64, b: f64, n: usize) -> Axis {
    Axis::linear(p, a, b, n)
}

fn fig2(n: usize) -> Vec<SweepSpec> {
    let base = weak_drive(0.0, 0.0);
    vec![
        SweepSpec::two_mode("fig2a", base)
            .with_axis(lin(Param::J, 0.0, 15.0, n))
            .with_axis(lin(Param::Delta, -15.0, 15.0, n)),
        SweepSpec::two_mode("fig2b", base)
            .with_axis(lin(Param::J, 0.0, 2.0, n))
            .with_axis(lin(Param::Delta, -2.0, 2.0, n)),
    ]
}

fn fig3(n: usize) -> Vec<SweepSpec> {
    let base = weak_drive(0.0, 0.0);
    let g2tau = [Output::G2Zero, Output::G2Tau];
    vec![
        SweepSpec::two_mode("fig3a", base)
            .with_axis(Axis::new(Param::J, vec![5.0, 10.0, 15.0]))
            .with_axis(lin(Param::Delta, -15.0, 15.0, n)),
        SweepSpec::two_mode("fig3a_j_eq_abs_delta", base)
            .with_axis(lin(Param::Delta, -15.0, 15.0, n))
            .with_link(Link::abs(Param::J, Param::Delta)),
        SweepSpec::two_mode("fig3b", base)
            .with_axis(Axis::new(Param::J, vec![0.5, 0.71, 0.8]))
            .with_axis(lin(Param::Delta, -2.0, 2.0, n)),
        SweepSpec::two_mode("fig3c", base)
            .with_axis(Axis::new(Param::Delta, vec![5.0, 10.0, 15.0]))
            .with_axis(lin(Param::J, 0.0, 15.0, n)),
        SweepSpec::two_mode("fig3c_delta_eq_j", base)
            .with_axis(lin(Param::J, 0.0, 15.0, n))
            .with_link(Link::equal(Param::Delta, Param::J)),
        SweepSpec::two_mode("fig3d", base)
            .with_axis(Axis::new(Param::Delta, vec![0.0, 0.1, 0.2]))
            .with_axis(lin(Param::J, 0.0, 2.0, n)),
        SweepSpec::two_mode("fig3e", weak_drive(0.0, 10.0))
            .with_axis(Axis::new(Param::Delta, vec![10.0, 9.2, 11.0]))
            .with_outputs(&g2tau)
            .with_tau_grid(tau(n)),
        SweepSpec::two_mode("fig3f", weak_drive(0.0, 0.71))
            .with_axis(Axis::new(Param::Delta, vec![0.0, 0.1, 0.2]))
            .with_outputs(&g2tau)
            .with_tau_grid(tau(n)),
    ]
}

fn fig4(n: usize) -> Vec<SweepSpec> {
    let gammas = vec![0.2, 1.0, 5.0];
    vec![
        SweepSpec::two_mode("fig4a", weak_drive(10.0, 0.0))
            .with_axis(Axis::log(Param::Gamma, 0.1, 10.0, n))
            .with_axis(lin(Param::J, 0.0, 15.0, n)),
        SweepSpec::two_mode("fig4b", weak_drive(0.0, 0.0))
            .with_axis(Axis::log(Param::Gamma, 0.1, 10.0, n))
            .with_axis(lin(Param::J, 0.0, 3.0, n)),
        SweepSpec::two_mode("fig4c", weak_drive(10.0, 0.0))
            .with_axis(Axis::new(Param::Gamma, gammas.clone()))
            .with_axis(lin(Param::J, 0.0, 15.0, n)),
        SweepSpec::two_mode("fig4d", weak_drive(0.0, 0.0))
            .with_axis(Axis::new(Param::Gamma, gammas))
            .with_axis(lin(Param::J, 0.0, 3.0, n)),
    ]
}

fn fig5(n: usize) -> Vec<SweepSpec> {
    let traces = vec![0.0, 1e-5, 5e-5, 1e-4];
    vec![
        SweepSpec::two_mode("fig5a", weak_drive(0.0, 10.0))
            .with_axis(Axis::new(Param::NTh, traces.clone()))
            .with_axis(lin(Param::Delta, -15.0, 15.0, n)),
        SweepSpec::two_mode("fig5b", weak_drive(0.0, 0.71))
            .with_axis(Axis::new(Param::NTh, traces))
            .with_axis(lin(Param::Delta, -2.0, 2.0, n)),
        SweepSpec::two_mode("fig5c", weak_drive(10.0, 10.0)).with_axis(Axis::log(Param::NTh, 1e-7, 1e-3, n)),
        SweepSpec::two_mode("fig5d", weak_drive(0.0, 0.71)).with_axis(Axis::log(Param::NTh, 1e-7, 1e-3, n)),
    ]
}

fn fig6(n: usize) -> Vec<SweepSpec> {
    let outputs = [Output::G2Zero, Output::NB];
    let traces = vec![0.0, 1e-5, 1e-4];
    let eps = || Axis::log(Param::Eps, 1e-3, 1.0, n);
    vec![
        SweepSpec::two_mode("fig6a", weak_drive(10.0, 10.0)).with_axis(eps()).with_outputs(&outputs),
        SweepSpec::two_mode("fig6b", weak_drive(0.0, 0.71))
            .with_axis(eps())
            .with_outputs(&outputs)
            .with_mech_cutoff(STRONG_DRIVE_CUTOFF),
        SweepSpec::two_mode("fig6c", weak_drive(10.0, 10.0))
            .with_axis(Axis::new(Param::NTh, traces.clone()))
            .with_axis(eps()),
        SweepSpec::two_mode("fig6d", weak_drive(0.0, 0.71))
            .with_axis(Axis::new(Param::NTh, traces))
            .with_axis(eps())
            .with_mech_cutoff(STRONG_DRIVE_CUTOFF),
    ]
}

fn fig7(n: usize) -> Vec<SweepSpec> {
    vec![SweepSpec::two_mode("fig7", two_drive())
        .with_axis(lin(Param::DeltaOpt, -9.0, 9.0, n))
        .with_outputs(&[Output::EtaPhiRoots])]
}

fn fig8(n: usize) -> Vec<SweepSpec> {
    [("fig8a", Branch::Plus), ("fig8b", Branch::Minus)]
        .into_iter()
        .map(|(name, b)| {
            SweepSpec::two_mode(name, two_drive())
                .with_drive(QubitDrive::Optimal(b), None)
                .with_axis(lin(Param::DeltaOpt, -9.0, 9.0, n))
                .with_axis(lin(Param::Delta, -9.0, 9.0, n))
        })
        .collect()
}

fn fig9(n: usize) -> Vec<SweepSpec> {
    let mut panels = Vec::new();
    for (tag, d_opt) in [("pos", 3.0), ("neg", -3.0)] {
        for (branch_tag, b) in [("plus", Branch::Plus), ("minus", Branch::Minus)] {
            panels.push(
                SweepSpec::two_mode(format!("fig9_opt_{tag}_{branch_tag}"), two_drive())
                    .with_drive(QubitDrive::Optimal(b), Some(d_opt))
                    .with_axis(lin(Param::Delta, -9.0, 9.0, n))
                    .with_outputs(&[Output::G2Zero, Output::NB]),
            );
            panels.push(
                SweepSpec::two_mode(format!("fig9_tau_opt_{tag}_{branch_tag}"), two_drive())
                    .with_drive(QubitDrive::Optimal(b), Some(d_opt))
                    .with_axis(Axis::new(Param::Delta, vec![d_opt]))
                    .with_outputs(&[Output::G2Zero, Output::G2Tau])
                    .with_tau_grid(tau(n)),
            );
        }
    }
    panels
}

fn fig10(n: usize) -> Vec<SweepSpec> {
    let mut panels = Vec::new();
    for (tag, d, b) in [("plus", 3.0, Branch::Plus), ("minus", -3.0, Branch::Minus)] {
        let base = MqParams { delta: d, ..two_drive() };
        panels.push(
            SweepSpec::two_mode(format!("fig10a_{tag}"), base)
                .with_drive(QubitDrive::Optimal(b), Some(d))
                .with_axis(Axis::new(Param::NTh, vec![0.0, 0.02, 0.06, 0.1]))
                .with_axis(Axis::log(Param::Eps, 0.01, 1.0, n))
                .with_mech_cutoff(STRONG_DRIVE_CUTOFF),
        );
        panels.push(
            SweepSpec::two_mode(format!("fig10b_{tag}"), base)
                .with_drive(QubitDrive::Optimal(b), Some(d))
                .with_axis(Axis::new(Param::Eps, vec![0.2, 0.4, 0.6]))
                .with_axis(Axis::log(Param::NTh, 1e-4, 0.1, n))
                .with_mech_cutoff(STRONG_DRIVE_CUTOFF),
        );
    }
    panels
}

/// Fig. 11 baseline: |G| = 0.1, Γ = 10, n_th = 1e−3, ε = 0.2, J = 3,
/// (η₊, φ₊) with Δ_opt = J.
pub fn fig11_detection() -> DetectionParams {
    DetectionParams {
        base: MqParams {
            n_th: 1e-3,
            ..two_drive()
        },
        g: C64::new(0.1, 0.0),
        cavity_damping: 10.0,
    }
}

fn fig11(n: usize) -> Vec<SweepSpec> {
    let det = fig11_detection();
    let drive = QubitDrive::Optimal(Branch::Plus);
    let both = [Output::G2Zero, Output::G2aZero];
    let at_opt = DetectionParams {
        base: MqParams { delta: 3.0, ..det.base },
        ..det
    };
    vec![
        SweepSpec::two_mode("fig11a_two_mode", det.base)
            .with_drive(drive, Some(3.0))
            .with_axis(lin(Param::Delta, -9.0, 9.0, n)),
        SweepSpec::three_mode("fig11ab", det)
            .with_drive(drive, Some(3.0))
            .with_axis(lin(Param::Delta, -9.0, 9.0, n))
            .with_outputs(&both),
        SweepSpec::three_mode("fig11c", at_opt)
            .with_drive(drive, Some(3.0))
            .with_axis(Axis::log(Param::G, 0.01, 3.0, n))
            .with_outputs(&both),
        SweepSpec::three_mode("fig11d", at_opt)
            .with_drive(drive, Some(3.0))
            .with_axis(Axis::log(Param::CavityDamping, 1.0, 100.0, n))
            .with_outputs(&both),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in PRESETS {
            let panels = figure_preset(name).unwrap();
            assert!(!panels.is_empty());
            for p in &panels {
                p.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            }
        }
        assert!(matches!(figure_preset("fig12"), Err(SweepError::UnknownPreset(_))));
    }

    #[test]
    fn fig2_caption_parameters() {
        let p = &figure_preset("fig2").unwrap()[0];
        let mq = p.baseline.mq;
        assert_eq!((mq.gamma, mq.eps, mq.omega, mq.n_th), (1.0, 0.01, 0.0, 0.0));
        assert_eq!(p.axes[1].param, Param::Delta);
        assert_eq!(p.axes[1].values.first(), Some(&-15.0));
        assert_eq!(p.axes[1].values.last(), Some(&15.0));
        assert_eq!(p.axes[0].values.last(), Some(&15.0));
        assert_eq!(p.len(), 61 * 61);
    }

    #[test]
    fn fig7_and_fig11_parameters() {
        let p = &figure_preset("fig7").unwrap()[0];
        assert_eq!(p.outputs, vec![Output::EtaPhiRoots]);
        assert_eq!((p.baseline.mq.gamma, p.baseline.mq.j), (1.0, 3.0));
        let three: Vec<_> = figure_preset("fig11")
            .unwrap()
            .into_iter()
            .filter(|s| s.model == crate::sweep::ModelKind::ThreeMode)
            .collect();
        assert_eq!(three.len(), 3);
        for s in three {
            assert_eq!(s.drive, QubitDrive::Optimal(Branch::Plus));
            assert_eq!(s.baseline.delta_opt, Some(3.0));
            assert_eq!((s.baseline.g, s.baseline.cavity_damping), (0.1, 10.0));
            assert_eq!((s.baseline.mq.n_th, s.baseline.mq.eps, s.baseline.mq.j), (1e-3, 0.2, 3.0));
        }
    }
}
