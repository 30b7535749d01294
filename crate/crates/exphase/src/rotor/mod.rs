//! Two trapped ions as a rigid quantum rotor: micromotion-averaged
//! potential, truncated angular Hamiltonian, spectra, adiabatic ramps,
//! time-dependent propagation and the geometric/dynamical phases of the
//! exchange protocol.
//!
//! The relative motion of two ions in the radial plane of a linear rf trap,
//! at fixed separation `2 r0`, reduces to a particle on a ring with
//! Hamiltonian (divided by hbar, all energies in rad/s)
//!
//! ```text
//!     H = -E_rot d^2/dtheta^2 + kappa_A sin^2(theta) + kappa_B cos^2(2 theta)
//! ```
//!
//! where `E_rot = hbar / (4 m r0^2)`, `kappa_A` tracks the dc anisotropy of
//! the trap (`A = omega_y^2 - omega_x^2`) and `kappa_B` the
//! micromotion-induced angular modulation of the Coulomb repulsion
//! (`B = 3/8 q^2 omega_perp^2`). Sweeping the trap's `a`-parameter from
//! negative to positive splits the initial single well into a double well
//! and re-merges it a quarter turn later, exchanging the ions.
//!
//! Exchange statistics enter through the allowed angular harmonics:
//! spin-polarized fermions live on odd harmonics, bosons on even ones, and
//! states prepared in the rocking-mode ground state are even under
//! reflection, selecting the cosine blocks.

mod banded;
mod dynamics;
mod eig;

pub use banded::{BandedLu, BandedSym};
pub use dynamics::{
    adiabaticity, adiabaticity_fd, build_ramp, gamma_profile, ground_state, parity_transfer,
    propagate, propagate_cross_checked, Method, ParityTransfer, PropagateOpts, RampSchedule,
    Trajectory, TrajectoryPoint, WaveVector,
};
pub use eig::{lowest_eigenpairs, EigTracker, Eigenpairs};

use std::f64::consts::PI;

use crate::fock::Statistics;

/// CODATA values bundled into the trap configuration by default.
pub mod constants {
    /// Elementary charge, C.
    pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
    /// Vacuum permittivity, F/m.
    pub const EPSILON_0: f64 = 8.8541878128e-12;
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054571817e-34;
    /// Atomic mass unit, kg.
    pub const ATOMIC_MASS: f64 = 1.66053906660e-27;
    /// Mass of calcium-40, kg.
    pub const CA40_MASS: f64 = 39.962590850 * ATOMIC_MASS;
}

#[derive(Debug, thiserror::Error)]
pub enum RotorError {
    #[error("trap parameters leave the radial motion unstable")]
    UnstableConfig,
    #[error("eigensolver failed to converge")]
    ConvergenceFailure,
    #[error("ground state is degenerate, adiabaticity undefined")]
    DegenerateGroundState,
    #[error("propagation failed: {0}")]
    IntegratorFailure(String),
    #[error("propagation backends disagree on the final ground population by {delta:.3e}")]
    MethodDisagreement { delta: f64 },
    #[error("lost track of the potential minimum")]
    MinimumTrackingFailure,
    #[error("invalid ramp: {0}")]
    BadRamp(String),
}

/// Linear rf trap parameters with the bundled physical constants.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct TrapConfig {
    /// rf drive angular frequency, rad/s.
    pub drive_freq: f64,
    /// Dimensionless rf strength parameter.
    pub q: f64,
    /// Dimensionless axial dc parameter (deconfinement of the radial plane
    /// by the axial quadrupole).
    pub a_z: f64,
    /// Ion mass, kg.
    pub mass: f64,
    /// Signed dc asymmetry parameter splitting the radial frequencies.
    #[serde(default)]
    pub dc_asymmetry: f64,
    #[serde(default = "default_charge")]
    pub charge: f64,
    #[serde(default = "default_epsilon0")]
    pub epsilon0: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

fn default_charge() -> f64 {
    constants::ELEMENTARY_CHARGE
}
fn default_epsilon0() -> f64 {
    constants::EPSILON_0
}
fn default_hbar() -> f64 {
    constants::HBAR
}

impl TrapConfig {
    /// Build from drive frequency, q, axial secular frequency and mass.
    pub fn new(drive_freq: f64, q: f64, axial_freq: f64, mass: f64) -> Self {
        TrapConfig {
            drive_freq,
            q,
            a_z: (2.0 * axial_freq / drive_freq).powi(2),
            mass,
            dc_asymmetry: 0.0,
            charge: constants::ELEMENTARY_CHARGE,
            epsilon0: constants::EPSILON_0,
            hbar: constants::HBAR,
        }
    }

    /// The workhorse configuration: a calcium-40 ion in a 2 pi x 20 MHz
    /// drive with q = 0.2 and 2 pi x 1.4 MHz axial confinement.
    pub fn calcium40() -> Self {
        Self::new(2.0 * PI * 20e6, 0.2, 2.0 * PI * 1.4e6, constants::CA40_MASS)
    }

    pub fn axial_freq(&self) -> f64 {
        0.5 * self.drive_freq * self.a_z.sqrt()
    }

    pub fn with_asymmetry(mut self, a: f64) -> Self {
        self.dc_asymmetry = a;
        self
    }
}

/// Secular frequencies of the trap at its configured dc asymmetry.
#[derive(Clone, Copy, Debug)]
pub struct TrapFrequencies {
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_perp: f64,
    pub omega_z: f64,
}

/// Radial and axial secular frequencies; fails when the configured
/// asymmetry destabilizes one radial direction.
pub fn trap_frequencies(cfg: &TrapConfig) -> Result<TrapFrequencies, RotorError> {
    let base = 0.5 * cfg.q * cfg.q - 0.5 * cfg.a_z;
    if base - cfg.dc_asymmetry.abs() <= 0.0 {
        return Err(RotorError::UnstableConfig);
    }
    let half_drive = 0.5 * cfg.drive_freq;
    let omega_x = half_drive * (base + cfg.dc_asymmetry).sqrt();
    let omega_y = half_drive * (base - cfg.dc_asymmetry).sqrt();
    Ok(TrapFrequencies {
        omega_x,
        omega_y,
        omega_perp: (0.5 * (omega_x * omega_x + omega_y * omega_y)).sqrt(),
        omega_z: cfg.axial_freq(),
    })
}

/// Equilibrium ion separation `2 r0` from the trap/Coulomb force balance.
pub fn equilibrium_distance(mass: f64, omega_perp: f64, charge: f64, epsilon0: f64) -> f64 {
    (charge * charge / (2.0 * PI * epsilon0 * mass * omega_perp * omega_perp)).cbrt()
}

/// Micromotion-corrected rocking-mode frequency
/// `sqrt(omega_y^2 - omega_x^2 (1 + 3 q^2 / 2))`, or `None` once the
/// radicand turns negative and the aligned crystal is destabilized.
pub fn rocking_frequency(omega_x: f64, omega_y: f64, q: f64) -> Option<f64> {
    let radicand = omega_y * omega_y - omega_x * omega_x * (1.0 + 1.5 * q * q);
    (radicand >= 0.0).then(|| radicand.sqrt())
}

/// Normal-mode splitting at which the rocking potential turns quartic:
/// `3/4 q^2 omega_perp`.
pub fn critical_splitting(q: f64, omega_perp: f64) -> f64 {
    0.75 * q * q * omega_perp
}

/// Coulomb energy of two ions at separation `r` and crystal angle `theta`,
/// time-averaged over the rf micromotion (J).
pub fn averaged_coulomb(r: f64, theta: f64, q: f64, charge: f64, epsilon0: f64) -> f64 {
    let bare = charge * charge / (4.0 * PI * epsilon0 * r);
    let c2 = (2.0 * theta).cos();
    bare * (1.0 + q * q / 16.0 * (3.0 * c2 * c2 - 1.0))
}

/// Which statistics sector of the angular problem a basis spans.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    /// Odd harmonics (antisymmetric under ion exchange): spin-polarized
    /// fermions.
    FermionOdd,
    /// Even harmonics including the constant: bosons.
    BosonEven,
}

impl Sector {
    pub fn from_statistics(stats: Statistics) -> Self {
        match stats {
            Statistics::Fermion => Sector::FermionOdd,
            Statistics::Boson => Sector::BosonEven,
        }
    }

    /// Physical basis of this sector: cosine harmonics, even under
    /// reflection, matching states prepared in the rocking ground state.
    pub fn basis(self, len: usize) -> AngularBasis {
        match self {
            Sector::FermionOdd => AngularBasis::new(BasisKind::CosOdd, len),
            Sector::BosonEven => AngularBasis::new(BasisKind::CosEven, len),
        }
    }
}

/// Symmetry block of angular harmonics. The cosine blocks are the physical
/// ones for this protocol; the sine blocks carry the opposite reflection
/// parity and exist for degeneracy and superselection cross-checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// cos(n theta), n odd.
    CosOdd,
    /// cos(n theta), n even, including the constant n = 0.
    CosEven,
    /// sin(n theta), n odd.
    SinOdd,
    /// sin(n theta), n even, n >= 2.
    SinEven,
}

/// Truncated orthonormal basis of angular harmonics from one symmetry
/// block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AngularBasis {
    pub kind: BasisKind,
    pub len: usize,
}

/// Default truncation: harmonics up to n = 8191 in the fermion sector,
/// comfortably covering wells thousands of harmonics deep.
pub const DEFAULT_BASIS_LEN: usize = 4096;

impl AngularBasis {
    pub fn new(kind: BasisKind, len: usize) -> Self {
        assert!(len >= 8, "angular basis too small");
        AngularBasis { kind, len }
    }

    /// Harmonic index n of basis function `i`.
    pub fn harmonic(&self, i: usize) -> u32 {
        debug_assert!(i < self.len);
        match self.kind {
            BasisKind::CosOdd | BasisKind::SinOdd => 2 * i as u32 + 1,
            BasisKind::CosEven => 2 * i as u32,
            BasisKind::SinEven => 2 * i as u32 + 2,
        }
    }

    /// Evaluate the normalized basis function `i` at angle `theta`.
    pub fn eval(&self, i: usize, theta: f64) -> f64 {
        let n = self.harmonic(i) as f64;
        let norm_pi = 1.0 / PI.sqrt();
        match self.kind {
            BasisKind::CosOdd => norm_pi * (n * theta).cos(),
            BasisKind::CosEven => {
                if i == 0 {
                    1.0 / (2.0 * PI).sqrt()
                } else {
                    norm_pi * (n * theta).cos()
                }
            }
            BasisKind::SinOdd | BasisKind::SinEven => norm_pi * (n * theta).sin(),
        }
    }
}

/// Coefficients of the one-dimensional rotor Hamiltonian at a given dc
/// asymmetry.
#[derive(Clone, Copy, Debug)]
pub struct RotorCoefficients {
    /// `A = omega_y^2 - omega_x^2`, s^-2; positive for an x-aligned crystal.
    pub anisotropy: f64,
    /// `B = 3/8 q^2 omega_perp^2`, s^-2.
    pub micromotion: f64,
    /// Half ion distance r0, m.
    pub half_distance: f64,
    /// Kinetic prefactor `hbar / (4 m r0^2)`, rad/s.
    pub e_rot: f64,
}

/// Precomputed scales of the rotor problem for one trap configuration.
/// The ion separation is held fixed along the ramp; only the anisotropy
/// term tracks the swept a-parameter.
#[derive(Clone, Copy, Debug)]
pub struct RotorProblem {
    pub trap: TrapConfig,
    pub omega_perp: f64,
    pub r0: f64,
    /// Kinetic prefactor, rad/s.
    pub e_rot: f64,
    /// Micromotion potential strength `(m r0^2 / hbar) B`, rad/s.
    pub kappa_b: f64,
    /// d kappa_A / d a, rad/s per unit of the a-parameter.
    pub kappa_a_per_a: f64,
}

impl RotorProblem {
    pub fn new(trap: TrapConfig) -> Result<Self, RotorError> {
        let reference = TrapConfig { dc_asymmetry: 0.0, ..trap };
        let freqs = trap_frequencies(&reference)?;
        let distance =
            equilibrium_distance(trap.mass, freqs.omega_perp, trap.charge, trap.epsilon0);
        let r0 = 0.5 * distance;
        let inertia_over_hbar = trap.mass * r0 * r0 / trap.hbar;
        let half_drive_sq = (0.5 * trap.drive_freq).powi(2);
        Ok(RotorProblem {
            trap,
            omega_perp: freqs.omega_perp,
            r0,
            e_rot: trap.hbar / (4.0 * trap.mass * r0 * r0),
            kappa_b: inertia_over_hbar * 0.375 * trap.q * trap.q * freqs.omega_perp.powi(2),
            kappa_a_per_a: inertia_over_hbar * (-2.0) * half_drive_sq,
        })
    }

    /// `A(a) = omega_y^2 - omega_x^2 = -2 a (drive/2)^2`, s^-2.
    pub fn anisotropy(&self, a: f64) -> f64 {
        -2.0 * a * (0.5 * self.trap.drive_freq).powi(2)
    }

    /// Anisotropy potential strength `(m r0^2/hbar) A(a)`, rad/s.
    pub fn kappa_a(&self, a: f64) -> f64 {
        self.kappa_a_per_a * a
    }

    pub fn coefficients(&self, a: f64) -> RotorCoefficients {
        RotorCoefficients {
            anisotropy: self.anisotropy(a),
            micromotion: 0.375 * self.trap.q * self.trap.q * self.omega_perp.powi(2),
            half_distance: self.r0,
            e_rot: self.e_rot,
        }
    }

    /// Angular potential in rad/s.
    pub fn potential(&self, a: f64, theta: f64) -> f64 {
        let s = theta.sin();
        let c2 = (2.0 * theta).cos();
        self.kappa_a(a) * s * s + self.kappa_b * c2 * c2
    }

    /// Angle of the potential minimum in [0, pi/2], continuous along the
    /// single-well / double-well / rotated-single-well sweep; ties at the
    /// quartic points resolve toward positive angles.
    pub fn theta_min(&self, a: f64) -> f64 {
        let ka = self.kappa_a(a);
        let ratio = ka / (4.0 * self.kappa_b);
        if ratio >= 1.0 {
            0.0
        } else if ratio <= -1.0 {
            PI / 2.0
        } else {
            0.5 * ratio.acos()
        }
    }

    /// Potential value at the tracked minimum, rad/s (used to remove the
    /// bulk phase from implicit propagation).
    pub fn potential_floor(&self, a: f64) -> f64 {
        self.potential(a, self.theta_min(a))
    }

    /// Banded Hamiltonian `H/hbar` in rad/s over the given basis.
    pub fn hamiltonian(&self, a: f64, basis: &AngularBasis) -> BandedSym {
        let mut m = BandedSym::zeros(basis.len);
        self.hamiltonian_into(a, basis, &mut m);
        m
    }

    /// Assemble the Hamiltonian into an existing matrix of matching size.
    pub fn hamiltonian_into(&self, a: f64, basis: &AngularBasis, m: &mut BandedSym) {
        assemble_into(basis, self.e_rot, self.kappa_a(a), self.kappa_b, m);
    }

    /// `dH/da`: the sin^2 operator scaled by `d kappa_A / d a`.
    pub fn hamiltonian_derivative(&self, basis: &AngularBasis) -> BandedSym {
        assemble(basis, 0.0, self.kappa_a_per_a, 0.0)
    }
}

/// Assemble the banded Hamiltonian for kinetic scale `e_rot` and potential
/// `kappa_a sin^2(theta) + kappa_b cos^2(2 theta)`.
///
/// Using `sin^2 = (1 - cos 2theta)/2` and `cos^2 2theta = (1 + cos
/// 4theta)/2`, the potential contributes a constant `v0`, a `cos 2theta`
/// term coupling harmonics two apart and a `cos 4theta` term coupling
/// harmonics four apart, plus the self terms that encode how each block
/// reflects at n = 0.
fn assemble(basis: &AngularBasis, e_rot: f64, kappa_a: f64, kappa_b: f64) -> BandedSym {
    let mut m = BandedSym::zeros(basis.len);
    assemble_into(basis, e_rot, kappa_a, kappa_b, &mut m);
    m
}

fn assemble_into(basis: &AngularBasis, e_rot: f64, kappa_a: f64, kappa_b: f64, m: &mut BandedSym) {
    let v0 = 0.5 * (kappa_a + kappa_b);
    let vc2 = -0.5 * kappa_a;
    let vc4 = 0.5 * kappa_b;
    let len = basis.len;
    assert_eq!(m.dim(), len);
    m.off1.fill(0.0);
    m.off2.fill(0.0);
    for i in 0..len {
        let n = basis.harmonic(i) as f64;
        m.diag[i] = e_rot * n * n + v0;
    }
    match basis.kind {
        BasisKind::CosOdd | BasisKind::SinOdd => {
            let sign = if basis.kind == BasisKind::CosOdd { 1.0 } else { -1.0 };
            for i in 0..len - 1 {
                m.off1[i] += 0.5 * vc2;
            }
            for i in 0..len - 2 {
                m.off2[i] += 0.5 * vc4;
            }
            // Reflection at n = 0: cos 2theta folds n=1 onto itself and
            // cos 4theta folds n=1 onto n=3.
            m.diag[0] += sign * 0.5 * vc2;
            m.off1[0] += sign * 0.5 * vc4;
        }
        BasisKind::CosEven => {
            for i in 1..len - 1 {
                m.off1[i] += 0.5 * vc2;
            }
            for i in 1..len - 2 {
                m.off2[i] += 0.5 * vc4;
            }
            let isq = 1.0 / 2f64.sqrt();
            // The constant function carries the odd normalization.
            m.off1[0] += vc2 * isq;
            m.off2[0] += vc4 * isq;
            // cos 4theta folds n=2 onto itself.
            m.diag[1] += 0.5 * vc4;
        }
        BasisKind::SinEven => {
            for i in 0..len - 1 {
                m.off1[i] += 0.5 * vc2;
            }
            for i in 0..len - 2 {
                m.off2[i] += 0.5 * vc4;
            }
            m.diag[0] -= 0.5 * vc4;
        }
    }
}

/// Geometric phase from a magnetic field threading the rotor circle:
/// `charge * B * pi * r0^2 / hbar`.
pub fn aharonov_bohm_phase(b_field: f64, r0: f64, charge: f64, hbar: f64) -> f64 {
    charge * b_field * PI * r0 * r0 / hbar
}

/// Triplet weight of the Bell state `(|ud> + e^{i phi} |du>)/sqrt(2)`
/// controls the spatial symmetry; for fermionic ions the final rocking
/// excitation probability is `cos^2(phi/2)`.
pub fn bell_excitation_probability(phi: f64) -> f64 {
    (0.5 * phi).cos().powi(2)
}

/// Dynamical phase from a stray quadrupole rotated 45 degrees against the
/// trap axes, `V_s = m r0^2 A' sin^2(theta + pi/4)`: the two branch
/// orientations see opposite slopes, so
/// `phi_s = integral (m r0^2 A'/hbar) sin(2 theta_min(t)) dt`
/// along the tracked potential minimum.
pub fn stray_phase(
    problem: &RotorProblem,
    a_prime: f64,
    schedule: &RampSchedule,
) -> Result<f64, RotorError> {
    let strength = problem.trap.mass * problem.r0 * problem.r0 * a_prime / problem.trap.hbar;
    // The minimum angle has square-root kinks at the quartic points, so the
    // trapezoid needs a dense grid to keep the retrace consistency at the
    // milliradian level.
    let samples = (schedule.len() * 8).max(262_144);
    let duration = schedule.duration();
    let mut theta_prev = problem.theta_min(schedule.value_at(0.0));
    let mut acc = 0.0;
    let mut prev_integrand = strength * (2.0 * theta_prev).sin();
    for k in 1..=samples {
        let t = duration * k as f64 / samples as f64;
        let a = schedule.value_at(t);
        let theta = refine_theta_min(problem, a, theta_prev)?;
        if (theta - theta_prev).abs() > 0.2 {
            return Err(RotorError::MinimumTrackingFailure);
        }
        theta_prev = theta;
        let integrand = strength * (2.0 * theta).sin();
        acc += 0.5 * (integrand + prev_integrand) * (duration / samples as f64);
        prev_integrand = integrand;
    }
    Ok(acc)
}

/// Local quadratic refinement of the potential minimum from the previous
/// step's angle, falling back to the closed form at the quartic points
/// where the curvature vanishes.
fn refine_theta_min(problem: &RotorProblem, a: f64, start: f64) -> Result<f64, RotorError> {
    let ka = problem.kappa_a(a);
    let kb = problem.kappa_b;
    let closed = problem.theta_min(a);
    let mut theta = start;
    for _ in 0..30 {
        let grad = ka * (2.0 * theta).sin() - 2.0 * kb * (4.0 * theta).sin();
        let curv = 2.0 * ka * (2.0 * theta).cos() - 8.0 * kb * (4.0 * theta).cos();
        if curv <= 1e-9 * (ka.abs() + kb.abs()) {
            return Ok(closed);
        }
        let step = grad / curv;
        theta = (theta - step).clamp(0.0, PI / 2.0);
        if step.abs() < 1e-14 {
            break;
        }
    }
    if (theta - closed).abs() > 1e-6 {
        return Err(RotorError::MinimumTrackingFailure);
    }
    Ok(theta)
}
