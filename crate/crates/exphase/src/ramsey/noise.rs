//! Dephasing channels and the fringe-invariance audit.
//!
//! Noise enters as per-transport-step phase factors on mode labels,
//! position- and spin-resolved, mirroring the path-phase bookkeeping of the
//! interferometer: each step contributes `rate * midpoint-dependent-term *
//! duration`, where the duration is the step displacement in single-site
//! sub-moves. Pulses are treated as instantaneous here; finite-duration
//! pulse effects are the business of [`crate::zeeman`].

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand::SeedableRng;

use crate::fock::{ModeLabel, Site, Spin, Statistics};
use crate::util::{angle_distance, linspace};

use super::{fringe_scan, PhaseSettings, RamseyError, SequencePlan};

/// Spin-dependent lattice tilt, static over one shot.
#[derive(Clone, Copy, Debug, Default)]
pub struct GradientNoise {
    /// Bloch frequency for the spin-up component, rad per site per unit time.
    pub rate_up: f64,
    /// Bloch frequency for the spin-down component.
    pub rate_down: f64,
    /// Zero-crossing positions of the two tilts, in sites along the
    /// gradient axis.
    pub zero_up: f64,
    pub zero_down: f64,
}

/// One realization of every supported noise channel. Per-step vectors are
/// indexed by transport slot.
#[derive(Clone, Debug, Default)]
pub struct NoiseRealization {
    /// Spin-independent force (linear potential), as a rate vector per step.
    pub force: Vec<[f64; 2]>,
    /// Homogeneous differential Zeeman shift per step, rad per unit time.
    pub field: Vec<f64>,
    /// Magnetic-field gradient, static within the shot.
    pub gradient: Option<GradientNoise>,
    /// Gradient redrawn at every step (fast fluctuation), for the audit of
    /// the regime the one-dimensional layout does not protect against.
    pub gradient_per_step: Option<Vec<GradientNoise>>,
    /// Dynamical phase per single-site shift of the up / down lattice.
    pub transport_phase_up: f64,
    pub transport_phase_down: f64,
}

impl NoiseRealization {
    pub fn none() -> Self {
        Self::default()
    }

    /// Total phase imprinted on `mode` by transport step `slot` with
    /// spin-resolved displacement `delta` and duration `tau`.
    pub(super) fn transport_phase(
        &self,
        plan: &SequencePlan,
        mode: ModeLabel,
        delta: Site,
        tau: f64,
        slot: usize,
    ) -> f64 {
        let mid = [
            mode.site.x as f64 + 0.5 * delta.x as f64,
            mode.site.y as f64 + 0.5 * delta.y as f64,
        ];
        let mut theta = 0.0;
        if let Some(f) = self.force.get(slot) {
            theta -= (f[0] * mid[0] + f[1] * mid[1]) * tau;
        }
        if let Some(&dz) = self.field.get(slot) {
            theta -= mode.spin.sign() * 0.5 * dz * tau;
        }
        let grad = self
            .gradient_per_step
            .as_ref()
            .and_then(|g| g.get(slot).copied())
            .or(self.gradient);
        if let Some(g) = grad {
            let axis = plan.gradient_axis;
            let proj = mid[0] * axis[0] + mid[1] * axis[1];
            let (rate, zero) = match mode.spin {
                Spin::Up => (g.rate_up, g.zero_up),
                Spin::Down => (g.rate_down, g.zero_down),
            };
            theta -= mode.spin.sign() * rate * (proj - zero) * tau;
        }
        let chi = match mode.spin {
            Spin::Up => self.transport_phase_up,
            Spin::Down => self.transport_phase_down,
        };
        theta -= chi * tau;
        theta
    }
}

/// Noise channels audited for fringe-phase invariance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseChannel {
    /// Spin-independent force, redrawn every step (covers slow drift too).
    UniformForce,
    /// Homogeneous differential Zeeman shift, redrawn every step.
    UniformField,
    /// Spin-dependent gradient, static within each shot.
    StaticGradient,
    /// Spin-dependent gradient redrawn every step. The 1D layout is
    /// sensitive to this; the 2D layout with a diagonal quantization axis
    /// is not.
    PerStepGradient,
    /// Spin-resolved dynamical phases per shift operation, static per shot.
    TransportPhases,
}

impl NoiseChannel {
    pub const ALL: [NoiseChannel; 5] = [
        NoiseChannel::UniformForce,
        NoiseChannel::UniformField,
        NoiseChannel::StaticGradient,
        NoiseChannel::PerStepGradient,
        NoiseChannel::TransportPhases,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            NoiseChannel::UniformForce => "uniform_force",
            NoiseChannel::UniformField => "uniform_field",
            NoiseChannel::StaticGradient => "static_gradient",
            NoiseChannel::PerStepGradient => "per_step_gradient",
            NoiseChannel::TransportPhases => "transport_phases",
        }
    }

    /// Draw one realization at a working amplitude of order one radian.
    pub fn sample(&self, plan: &SequencePlan, rng: &mut impl Rng) -> NoiseRealization {
        let slots = plan.transport_slots();
        let mut nz = NoiseRealization::none();
        let amp = 0.7;
        match self {
            NoiseChannel::UniformForce => {
                nz.force = (0..slots)
                    .map(|_| [amp * rng.random_range(-1.0..1.0), amp * rng.random_range(-1.0..1.0)])
                    .collect();
            }
            NoiseChannel::UniformField => {
                nz.field = (0..slots).map(|_| amp * rng.random_range(-1.0..1.0)).collect();
            }
            NoiseChannel::StaticGradient => {
                nz.gradient = Some(Self::sample_gradient(rng, amp));
            }
            NoiseChannel::PerStepGradient => {
                nz.gradient_per_step =
                    Some((0..slots).map(|_| Self::sample_gradient(rng, amp)).collect());
            }
            NoiseChannel::TransportPhases => {
                nz.transport_phase_up = amp * rng.random_range(-1.0..1.0);
                nz.transport_phase_down = amp * rng.random_range(-1.0..1.0);
            }
        }
        nz
    }

    fn sample_gradient(rng: &mut impl Rng, amp: f64) -> GradientNoise {
        GradientNoise {
            rate_up: amp * rng.random_range(-1.0..1.0),
            rate_down: amp * rng.random_range(-1.0..1.0),
            zero_up: 3.0 * rng.random_range(-1.0..1.0),
            zero_down: 3.0 * rng.random_range(-1.0..1.0),
        }
    }
}

/// Result of a dephasing audit over random noise realizations.
#[derive(Clone, Copy, Debug)]
pub struct AuditReport {
    pub channel: NoiseChannel,
    /// Largest fringe-phase deviation from the noise-free fit, radians.
    pub max_phase_deviation: f64,
    /// Largest visibility loss from the noise-free fit.
    pub max_visibility_loss: f64,
    pub trials: usize,
}

/// Scan the fringe under `trials` random realizations of one noise channel
/// and report the worst fringe-phase deviation.
pub fn dephasing_audit(
    plan: &SequencePlan,
    stats: Statistics,
    channel: NoiseChannel,
    trials: usize,
    seed: u64,
) -> Result<AuditReport, RamseyError> {
    let grid = linspace(0.0, 2.0 * std::f64::consts::PI * 31.0 / 32.0, 32);
    let base = PhaseSettings::default();
    let reference = fringe_scan(plan, stats, base, &grid, None)?.fit;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst_phase = 0.0f64;
    let mut worst_vis = 0.0f64;
    for _ in 0..trials {
        let nz = channel.sample(plan, &mut rng);
        let fit = fringe_scan(plan, stats, base, &grid, Some(&nz))?.fit;
        worst_phase = worst_phase.max(angle_distance(fit.phase, reference.phase));
        worst_vis = worst_vis.max((reference.visibility - fit.visibility).abs());
    }
    Ok(AuditReport {
        channel,
        max_phase_deviation: worst_phase,
        max_visibility_loss: worst_vis,
        trials,
    })
}
