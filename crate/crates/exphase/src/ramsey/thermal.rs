//! Partial indistinguishability from imperfect ground-state cooling.
//!
//! If the two atoms start in different vibrational states, the final
//! vibrational level reveals which paths they took and the parity fringe
//! washes out. For thermal occupation the visibility collapses to the
//! probability that both atoms share a vibrational state, which is the
//! purity-like overlap `tr(rho_L rho_R)` of the two single-atom mixtures.

use nalgebra::DMatrix;

use crate::fock::{ModeLabel, Spin, Statistics, TwoParticleState};
use crate::util::linspace;

use super::{fit, FringePoint, PhaseSettings, PulseBank, RamseyError, SequencePlan};

/// Vibrational levels kept per axis when enumerating thermal mixtures.
/// Ground-state probabilities of 0.7 and above leave under 3% weight higher
/// up; the residual is reported as `truncation_error`.
pub const VIB_LEVELS: usize = 3;

/// Initial vibrational occupation of the two atoms.
#[derive(Clone, Debug)]
pub struct ThermalOccupation {
    /// Ground-state probability along each trap axis.
    pub p0x: f64,
    pub p0y: f64,
    pub p0z: f64,
    /// Optional explicit density matrices over vibrational levels; when
    /// present they override the thermal closed form.
    pub rho_left: Option<DMatrix<f64>>,
    pub rho_right: Option<DMatrix<f64>>,
}

impl ThermalOccupation {
    pub fn new(p0x: f64, p0y: f64, p0z: f64) -> Self {
        ThermalOccupation { p0x, p0y, p0z, rho_left: None, rho_right: None }
    }

    /// Isotropic cooling with total ground-state probability `p0`.
    pub fn isotropic(p0: f64) -> Self {
        let per_axis = p0.cbrt();
        Self::new(per_axis, per_axis, per_axis)
    }

    pub fn from_matrices(rho_left: DMatrix<f64>, rho_right: DMatrix<f64>) -> Self {
        ThermalOccupation { p0x: 1.0, p0y: 1.0, p0z: 1.0, rho_left: Some(rho_left), rho_right: Some(rho_right) }
    }

    pub fn p0(&self) -> f64 {
        self.p0x * self.p0y * self.p0z
    }
}

/// Indistinguishability probability and the resulting parity visibility.
#[derive(Clone, Copy, Debug)]
pub struct ThermalVisibility {
    /// Probability that the two atoms occupy the same vibrational state.
    pub p_indist: f64,
    /// Parity-fringe visibility; equals `p_indist`.
    pub visibility: f64,
    /// Visibility evaluated on the truncated per-axis level space used by
    /// the sampling engine.
    pub truncated_visibility: f64,
    /// |full - truncated| closed-form difference.
    pub truncation_error: f64,
}

/// Closed-form visibility for a thermal (or explicitly given) vibrational
/// mixture.
pub fn thermal_visibility(occ: &ThermalOccupation) -> Result<ThermalVisibility, RamseyError> {
    if let (Some(rl), Some(rr)) = (&occ.rho_left, &occ.rho_right) {
        validate_density(rl)?;
        validate_density(rr)?;
        if rl.nrows() != rr.nrows() {
            return Err(RamseyError::NotDensityMatrix);
        }
        let p = (rl * rr).trace();
        return Ok(ThermalVisibility {
            p_indist: p,
            visibility: p,
            truncated_visibility: p,
            truncation_error: 0.0,
        });
    }
    for p in [occ.p0x, occ.p0y, occ.p0z] {
        if !(p > 0.0 && p <= 1.0) {
            return Err(RamseyError::NotDensityMatrix);
        }
    }
    let full = occ.p0() / ((2.0 - occ.p0x) * (2.0 - occ.p0y) * (2.0 - occ.p0z));
    let trunc = axis_purity_truncated(occ.p0x)
        * axis_purity_truncated(occ.p0y)
        * axis_purity_truncated(occ.p0z);
    Ok(ThermalVisibility {
        p_indist: full,
        visibility: full,
        truncated_visibility: trunc,
        truncation_error: (full - trunc).abs(),
    })
}

fn validate_density(rho: &DMatrix<f64>) -> Result<(), RamseyError> {
    if rho.nrows() != rho.ncols() || (rho.trace() - 1.0).abs() > 1e-9 {
        return Err(RamseyError::NotDensityMatrix);
    }
    let sym_defect = (rho - rho.transpose()).amax();
    if sym_defect > 1e-9 {
        return Err(RamseyError::NotDensityMatrix);
    }
    let eig = rho.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l < -1e-9) {
        return Err(RamseyError::NotDensityMatrix);
    }
    Ok(())
}

/// Thermal level weights along one axis, truncated and renormalized.
fn axis_weights(p0_axis: f64) -> [f64; VIB_LEVELS] {
    let lambda = 1.0 - p0_axis;
    let mut w = [0.0; VIB_LEVELS];
    for (l, slot) in w.iter_mut().enumerate() {
        *slot = p0_axis * lambda.powi(l as i32);
    }
    let z: f64 = w.iter().sum();
    for slot in &mut w {
        *slot /= z;
    }
    w
}

fn axis_purity_truncated(p0_axis: f64) -> f64 {
    axis_weights(p0_axis).iter().map(|w| w * w).sum()
}

/// Run the full sequence over every pair of truncated vibrational
/// configurations and fit the resulting averaged fringe. Exercises the
/// engine path that the closed form predicts.
pub fn thermal_fringe_visibility(
    plan: &SequencePlan,
    stats: Statistics,
    occ: &ThermalOccupation,
) -> Result<ThermalVisibility, RamseyError> {
    let wx = axis_weights(occ.p0x);
    let wy = axis_weights(occ.p0y);
    let wz = axis_weights(occ.p0z);
    let mut configs = Vec::new();
    for (ix, &px) in wx.iter().enumerate() {
        for (iy, &py) in wy.iter().enumerate() {
            for (iz, &pz) in wz.iter().enumerate() {
                let flat = (ix + VIB_LEVELS * (iy + VIB_LEVELS * iz)) as u32;
                configs.push((flat, px * py * pz));
            }
        }
    }
    let grid = linspace(0.0, 2.0 * std::f64::consts::PI * 31.0 / 32.0, 32);
    let mut points = Vec::with_capacity(grid.len());
    for &phi in &grid {
        let phases = PhaseSettings { dphi3: phi, ..PhaseSettings::default() };
        let bank = PulseBank::ideal(plan, &phases);
        let mut parity_acc = 0.0;
        let mut post_acc = 0.0;
        for &(vl, wl) in &configs {
            for &(vr, wr) in &configs {
                let weight = wl * wr;
                let initial = TwoParticleState::product(
                    ModeLabel::new(plan.l1, Spin::Up, vl),
                    ModeLabel::new(plan.r1, Spin::Up, vr),
                    stats,
                );
                let out = super::run_sequence_with_initial(plan, initial, &bank, None)?;
                parity_acc += weight * out.postselect_prob * out.parity.unwrap_or(0.0);
                post_acc += weight * out.postselect_prob;
            }
        }
        points.push(FringePoint {
            phi,
            parity: Some(parity_acc / post_acc),
            postselect_prob: post_acc,
        });
    }
    let fitted = fit::fit_fringe(&points)?;
    let closed = thermal_visibility(occ)?;
    Ok(ThermalVisibility {
        p_indist: closed.p_indist,
        visibility: fitted.visibility,
        truncated_visibility: closed.truncated_visibility,
        truncation_error: closed.truncation_error,
    })
}
