//! Two-particle Ramsey interferometer on a spin-dependent lattice.
//!
//! The sequence splits each atom into its two spin components, transports
//! them along mirrored paths, flips the spin of the outermost components
//! with a position-dependent pulse, and recombines everything at two distant
//! detection sites. Post-selected spin-parity readout then shows a fringe
//! `-V cos(phi_ex - phi)` in the Ramsey control phase `phi`, whose position
//! is the exchange phase.
//!
//! Both the one-dimensional layout (paths cross once at the lattice center)
//! and the two-dimensional layout (paths never cross) are provided. Site
//! coordinates are chosen so that during the intermediate pulse the inner
//! components sit one site off center and the outer components sit at
//! `+-(n+1)` along the transport axis, matching the gradient-addressing
//! analysis in [`crate::zeeman`].

mod fit;
mod impaired;
mod noise;
mod thermal;

pub use fit::{FringeFit, FringePoint, FringeScan};
pub use impaired::{impaired_pulse_prediction, ImpairedCase, ImpairedPrediction};
pub use noise::{dephasing_audit, AuditReport, GradientNoise, NoiseChannel, NoiseRealization};
pub use thermal::{thermal_fringe_visibility, thermal_visibility, ThermalOccupation, ThermalVisibility};

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

use crate::fock::{FockError, ModeLabel, ModeMap, Site, Spin, Statistics, TwoParticleState};

#[derive(Debug, thiserror::Error)]
pub enum RamseyError {
    #[error("initial separation must be even and at least 2, got {0}")]
    BadSeparation(u32),
    #[error("phase grid must span one period with at least 8 points")]
    BadGrid,
    #[error("fringe amplitude below 1e-12, fit is degenerate")]
    DegenerateFit,
    #[error("density matrix is not positive with unit trace")]
    NotDensityMatrix,
    #[error("no post-selected events at any grid point")]
    EmptyFringe,
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Relative pulse phases of the three stages. The Ramsey control phase is
/// their sum; each stage phase is split antisymmetrically over the left and
/// right site of that stage.
#[derive(Clone, Copy, Debug, Default, serde::Serialize, serde::Deserialize)]
pub struct PhaseSettings {
    pub dphi1: f64,
    pub dphi2: f64,
    pub dphi3: f64,
}

impl PhaseSettings {
    pub fn control_phase(&self) -> f64 {
        self.dphi1 + self.dphi2 + self.dphi3
    }

    fn split(delta: f64) -> (f64, f64) {
        (0.5 * delta, -0.5 * delta)
    }
}

/// Transport layout variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    OneDim,
    TwoDim,
}

/// Which pulse of the sequence a bank entry belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PulseStage {
    /// Splitting pi/2 pulse at the preparation sites.
    Initial,
    /// Position-dependent flip pulse at the outermost sites.
    Intermediate,
    /// Recombining pi/2 pulse at the detection sites.
    Final,
}

/// One step of a sequence plan.
#[derive(Clone, Debug)]
pub enum Step {
    /// Spin rotation applied at the listed sites.
    Pulse { stage: PulseStage, sites: Vec<Site> },
    /// Spin-dependent shift: the up lattice moves by `delta_up`, the down
    /// lattice by the mirror image.
    Shift { delta_up: Site },
    /// Final relative realignment of the two spin sublattices that
    /// co-locates the recombined components at the detection sites. Moves
    /// like a shift but is not counted among the stage shift operations.
    Merge { delta_up: Site },
}

/// Ordered pulse/shift/readout plan with its site geometry.
#[derive(Clone, Debug)]
pub struct SequencePlan {
    pub n: u32,
    pub variant: Variant,
    pub steps: Vec<Step>,
    /// Preparation sites.
    pub l1: Site,
    pub r1: Site,
    /// Detection sites.
    pub l2: Site,
    pub r2: Site,
    /// Outermost sites addressed by the intermediate pulse.
    pub l3: Site,
    pub r3: Site,
    /// Sites occupied by the inner components while the intermediate pulse
    /// runs (spurious-rotation targets for gradient-addressed pulses).
    pub inner_left: Site,
    pub inner_right: Site,
    /// Unit vector of the differential-Zeeman gradient axis (the
    /// quantization axis): x for 1D, the diagonal for 2D.
    pub gradient_axis: [f64; 2],
}

impl SequencePlan {
    /// Number of transport steps (shifts plus the merge), which is the
    /// length noise-per-step arrays must have.
    pub fn transport_slots(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, Step::Shift { .. } | Step::Merge { .. }))
            .count()
    }

    /// Shift counts before and after the intermediate pulse.
    pub fn shift_counts(&self) -> (usize, usize) {
        let mut before = 0;
        let mut after = 0;
        let mut seen_pulse = false;
        for step in &self.steps {
            match step {
                Step::Pulse { stage: PulseStage::Intermediate, .. } => seen_pulse = true,
                Step::Shift { .. } => {
                    if seen_pulse {
                        after += 1;
                    } else {
                        before += 1;
                    }
                }
                _ => {}
            }
        }
        (before, after)
    }
}

/// Build the transport sequence for initial separation `n` (even, >= 2).
///
/// The plan comprises `n/2 + 1` shifts, the intermediate flip pulse at the
/// outermost sites, `n/2 - 1` further shifts, and the closing sublattice
/// merge, framed by the two Ramsey pi/2 pulses.
pub fn build_sequence(n: u32, variant: Variant) -> Result<SequencePlan, RamseyError> {
    if n < 2 || n % 2 != 0 {
        return Err(RamseyError::BadSeparation(n));
    }
    let m = (n / 2) as i32;
    let plan = match variant {
        Variant::OneDim => {
            let l1 = Site::at(-m);
            let r1 = Site::at(m);
            let l3 = Site::at(-(n as i32 + 1));
            let r3 = Site::at(n as i32 + 1);
            let l2 = Site::at(-(m + 1));
            let r2 = Site::at(m + 1);
            let mut steps = vec![Step::Pulse { stage: PulseStage::Initial, sites: vec![l1, r1] }];
            for _ in 0..(m + 1) {
                steps.push(Step::Shift { delta_up: Site::new(1, 0) });
            }
            steps.push(Step::Pulse { stage: PulseStage::Intermediate, sites: vec![l3, r3] });
            for _ in 0..(m - 1) {
                steps.push(Step::Shift { delta_up: Site::new(1, 0) });
            }
            steps.push(Step::Merge { delta_up: Site::new(1, 0) });
            steps.push(Step::Pulse { stage: PulseStage::Final, sites: vec![l2, r2] });
            SequencePlan {
                n,
                variant,
                steps,
                l1,
                r1,
                l2,
                r2,
                l3,
                r3,
                inner_left: Site::at(-1),
                inner_right: Site::at(1),
                gradient_axis: [1.0, 0.0],
            }
        }
        Variant::TwoDim => {
            // Atoms are separated along the (1,-1) diagonal and the
            // quantization axis points along (1,1), so the initial
            // separation and the whole flip-time displacement are both
            // perpendicular to the gradient axis. That is what makes the 2D
            // layout immune even to per-step gradient noise.
            let l1 = Site::new(-m, m);
            let r1 = Site::new(m, -m);
            let l3 = Site::new(-(2 * m + 1), 2 * m + 1);
            let r3 = Site::new(2 * m + 1, -(2 * m + 1));
            let l2 = Site::new(-(m + 1), m + 1);
            let r2 = Site::new(m + 1, -(m + 1));
            let mut steps = vec![Step::Pulse { stage: PulseStage::Initial, sites: vec![l1, r1] }];
            // Stage 1: m+1 operations totalling (m+1)*(1,-1). The oversized
            // L-shaped step skips the cumulative displacement m*(1,-1) at
            // which the inner components would otherwise meet, so the
            // supports stay disjoint at every step.
            for _ in 0..(m - 1) {
                steps.push(Step::Shift { delta_up: Site::new(1, -1) });
            }
            steps.push(Step::Shift { delta_up: Site::new(2, -1) });
            steps.push(Step::Shift { delta_up: Site::new(0, -1) });
            steps.push(Step::Pulse { stage: PulseStage::Intermediate, sites: vec![l3, r3] });
            for _ in 0..(m - 1) {
                steps.push(Step::Shift { delta_up: Site::new(1, -1) });
            }
            steps.push(Step::Merge { delta_up: Site::new(1, -1) });
            steps.push(Step::Pulse { stage: PulseStage::Final, sites: vec![l2, r2] });
            let inv = 1.0 / 2f64.sqrt();
            SequencePlan {
                n,
                variant,
                steps,
                l1,
                r1,
                l2,
                r2,
                l3,
                r3,
                inner_left: Site::new(-1, 1),
                inner_right: Site::new(1, -1),
                gradient_axis: [inv, inv],
            }
        }
    };
    debug_assert_eq!(plan.shift_counts(), ((n / 2 + 1) as usize, (n / 2 - 1) as usize));
    Ok(plan)
}

/// Per-site 2x2 unitaries for the three pulse stages. Sites without an
/// entry are untouched by that pulse.
#[derive(Clone, Debug, Default)]
pub struct PulseBank {
    pub initial: BTreeMap<Site, Matrix2<C64>>,
    pub intermediate: BTreeMap<Site, Matrix2<C64>>,
    pub final_: BTreeMap<Site, Matrix2<C64>>,
}

impl PulseBank {
    /// Ideal bank: exact pi/2 pulses at the preparation and detection sites
    /// and an exact flip pulse at the outermost sites, with the stage phases
    /// split antisymmetrically over left and right.
    pub fn ideal(plan: &SequencePlan, phases: &PhaseSettings) -> Self {
        let (phi_l1, phi_r1) = PhaseSettings::split(phases.dphi1);
        let (phi_l2, phi_r2) = PhaseSettings::split(phases.dphi2);
        let (phi_l3, phi_r3) = PhaseSettings::split(phases.dphi3);
        let mut bank = PulseBank::default();
        bank.initial.insert(plan.l1, half_pi_pulse(phi_l1));
        bank.initial.insert(plan.r1, half_pi_pulse(phi_r1));
        bank.intermediate.insert(plan.l3, pi_pulse(phi_l3));
        bank.intermediate.insert(plan.r3, pi_pulse(phi_r3));
        bank.final_.insert(plan.l2, half_pi_pulse(phi_l2));
        bank.final_.insert(plan.r2, half_pi_pulse(phi_r2));
        bank
    }

    fn stage(&self, stage: PulseStage) -> &BTreeMap<Site, Matrix2<C64>> {
        match stage {
            PulseStage::Initial => &self.initial,
            PulseStage::Intermediate => &self.intermediate,
            PulseStage::Final => &self.final_,
        }
    }
}

/// General spin rotation by `theta` about an equatorial axis set by `phi`.
pub fn rotation_pulse(theta: f64, phi: f64) -> Matrix2<C64> {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = (theta / 2.0).sin();
    Matrix2::new(c, C64::from_polar(s, -phi), -C64::from_polar(s, phi), c)
}

/// Ramsey pi/2 pulse with site phase `phi`.
pub fn half_pi_pulse(phi: f64) -> Matrix2<C64> {
    rotation_pulse(PI / 2.0, phi)
}

/// Flip pulse with site phase `phi` in the intermediate-stage convention:
/// it maps the down operator to `e^{i phi}` times the up operator.
pub fn pi_pulse(phi: f64) -> Matrix2<C64> {
    rotation_pulse(PI, -phi)
}

/// Probabilities of the measurement outcome classes after the sequence.
#[derive(Clone, Copy, Debug, Default)]
pub struct OutcomeDistribution {
    /// One atom at each detection site, by (spin at left, spin at right).
    pub up_up: f64,
    pub up_down: f64,
    pub down_up: f64,
    pub down_down: f64,
    /// Both atoms at one site.
    pub same_site: f64,
    /// Spin parity of the same-site branch (aligned minus anti-aligned),
    /// normalized; `None` when that branch is empty.
    pub same_site_parity: Option<f64>,
    /// Weight on any remaining (stray) configuration.
    pub stray: f64,
}

impl OutcomeDistribution {
    pub fn postselect_prob(&self) -> f64 {
        self.up_up + self.up_down + self.down_up + self.down_down
    }
}

/// Result of one sequence execution.
#[derive(Clone, Copy, Debug)]
pub struct SequenceOutcome {
    /// Spin parity over the post-selected distant-site events; `None` when
    /// no such events remain.
    pub parity: Option<f64>,
    pub postselect_prob: f64,
    pub distribution: OutcomeDistribution,
}

/// Run the sequence from the standard initial state: one spin-up atom in
/// the ground band at each preparation site.
pub fn run_sequence(
    plan: &SequencePlan,
    stats: Statistics,
    bank: &PulseBank,
    noise: Option<&NoiseRealization>,
) -> Result<SequenceOutcome, RamseyError> {
    let initial = TwoParticleState::product(
        ModeLabel::new(plan.l1, Spin::Up, 0),
        ModeLabel::new(plan.r1, Spin::Up, 0),
        stats,
    );
    run_sequence_with_initial(plan, initial, bank, noise)
}

/// Run the sequence from an arbitrary prepared state (used for thermal
/// vibrational sampling and custom preparations).
pub fn run_sequence_with_initial(
    plan: &SequencePlan,
    initial: TwoParticleState,
    bank: &PulseBank,
    noise: Option<&NoiseRealization>,
) -> Result<SequenceOutcome, RamseyError> {
    let mut state = initial;
    let mut slot = 0usize;
    for step in &plan.steps {
        match step {
            Step::Pulse { stage, .. } => {
                for (&site, u) in bank.stage(*stage) {
                    state = state.apply_local_unitary(site, u)?;
                }
            }
            Step::Shift { delta_up } | Step::Merge { delta_up } => {
                state = apply_transport(plan, &state, *delta_up, noise, slot)?;
                slot += 1;
            }
        }
    }
    Ok(classify(plan, &state))
}

fn apply_transport(
    plan: &SequencePlan,
    state: &TwoParticleState,
    delta_up: Site,
    noise: Option<&NoiseRealization>,
    slot: usize,
) -> Result<TwoParticleState, RamseyError> {
    let mut map = ModeMap::new();
    // Transport duration in units of single-site sub-moves.
    let tau = (delta_up.x.abs() + delta_up.y.abs()) as f64;
    for mode in state.occupied_modes() {
        let d = match mode.spin {
            Spin::Up => delta_up,
            Spin::Down => Site::new(-delta_up.x, -delta_up.y),
        };
        let target = ModeLabel::new(mode.site.offset(d.x, d.y), mode.spin, mode.vib);
        let theta = match noise {
            Some(nz) => nz.transport_phase(plan, mode, d, tau, slot),
            None => 0.0,
        };
        map.relabel(mode, target, C64::from_polar(1.0, theta));
    }
    Ok(state.apply_mode_map(&map)?)
}

fn classify(plan: &SequencePlan, state: &TwoParticleState) -> SequenceOutcome {
    let mut dist = OutcomeDistribution::default();
    let mut same_signed = 0.0;
    for (m1, m2, amp) in state.terms() {
        let w = amp.norm_sqr() * if m1 == m2 { 2.0 } else { 1.0 };
        if m1.site == m2.site {
            dist.same_site += w;
            same_signed += if m1.spin == m2.spin { w } else { -w };
        } else if m1.site == plan.l2 && m2.site == plan.r2 {
            match (m1.spin, m2.spin) {
                (Spin::Up, Spin::Up) => dist.up_up += w,
                (Spin::Up, Spin::Down) => dist.up_down += w,
                (Spin::Down, Spin::Up) => dist.down_up += w,
                (Spin::Down, Spin::Down) => dist.down_down += w,
            }
        } else {
            dist.stray += w;
        }
    }
    if dist.same_site > 1e-15 {
        dist.same_site_parity = Some(same_signed / dist.same_site);
    }
    let postselect = dist.postselect_prob();
    let parity = if postselect > 1e-15 {
        Some(
            (dist.up_up + dist.down_down - dist.up_down - dist.down_up) / postselect,
        )
    } else {
        None
    };
    SequenceOutcome { parity, postselect_prob: postselect, distribution: dist }
}

/// Record a fringe by scanning the stage-3 relative phase over `grid` with
/// otherwise ideal pulses, then fit `offset - visibility*cos(phi - phase)`.
pub fn fringe_scan(
    plan: &SequencePlan,
    stats: Statistics,
    base: PhaseSettings,
    grid: &[f64],
    noise: Option<&NoiseRealization>,
) -> Result<FringeScan, RamseyError> {
    fringe_scan_with(plan, grid, noise, |phi| {
        let phases = PhaseSettings { dphi3: base.dphi3 + phi, ..base };
        (stats, PulseBank::ideal(plan, &phases))
    })
}

/// Fringe scan with caller-supplied pulse banks (used to study simulated,
/// imperfect pulses). `bank_fn` receives the control-phase offset.
pub fn fringe_scan_with(
    plan: &SequencePlan,
    grid: &[f64],
    noise: Option<&NoiseRealization>,
    bank_fn: impl Fn(f64) -> (Statistics, PulseBank),
) -> Result<FringeScan, RamseyError> {
    if grid.len() < 8 {
        return Err(RamseyError::BadGrid);
    }
    let span = grid.iter().cloned().fold(f64::MIN, f64::max)
        - grid.iter().cloned().fold(f64::MAX, f64::min);
    if span < 2.0 * PI * (1.0 - 1.5 / grid.len() as f64) {
        return Err(RamseyError::BadGrid);
    }
    let mut points = Vec::with_capacity(grid.len());
    for &phi in grid {
        let (stats, bank) = bank_fn(phi);
        let out = run_sequence(plan, stats, &bank, noise)?;
        points.push(FringePoint {
            phi,
            parity: out.parity,
            postselect_prob: out.postselect_prob,
        });
    }
    let fit = fit::fit_fringe(&points)?;
    Ok(FringeScan { points, fit })
}

#[cfg(test)]
mod tests;
