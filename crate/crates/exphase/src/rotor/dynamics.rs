//! Ramp scheduling, adiabaticity, and time-dependent propagation of the
//! angular rotor state.
//!
//! Two propagation backends are kept deliberately independent and
//! cross-validated: a fast instantaneous-eigenframe stepper tracking the
//! lowest `k` states, and a norm-preserving Crank-Nicolson integrator on
//! the full banded Hamiltonian.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::util::cumtrapz;

use super::banded::BandedLu;
use super::eig::{dot, lowest_eigenpairs, EigTracker};
use super::{AngularBasis, RotorError, RotorProblem, Sector};

/// Piecewise-linear control schedule `a(t)`.
#[derive(Clone, Debug)]
pub struct RampSchedule {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl RampSchedule {
    pub fn from_points(times: Vec<f64>, values: Vec<f64>) -> Result<Self, RotorError> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(RotorError::BadRamp("need at least two samples".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RotorError::BadRamp("times must strictly increase".into()));
        }
        Ok(RampSchedule { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap() - self.times[0]
    }

    pub fn start_value(&self) -> f64 {
        self.values[0]
    }

    pub fn end_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// Linear interpolation, clamped at the ends.
    pub fn value_at(&self, t: f64) -> f64 {
        let t = t + self.times[0];
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= *self.times.last().unwrap() {
            return *self.values.last().unwrap();
        }
        let idx = match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.values[i],
            Err(i) => i,
        };
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Forward pass followed by its exact time reverse.
    pub fn then_reversed(&self) -> RampSchedule {
        let t_end = *self.times.last().unwrap();
        let mut times = self.times.clone();
        let mut values = self.values.clone();
        for i in (0..self.times.len() - 1).rev() {
            times.push(2.0 * t_end - self.times[i]);
            values.push(self.values[i]);
        }
        RampSchedule { times, values }
    }
}

/// Adiabaticity of the instantaneous ground state at control value `a`:
/// the gap-weighted sensitivity `sum_j |<phi_j| dH/da |phi_0>| / (E_j -
/// E_0)^2` over the lowest `excited` states, evaluated by first-order
/// perturbation theory.
pub fn adiabaticity(
    problem: &RotorProblem,
    a: f64,
    basis: &AngularBasis,
    excited: usize,
) -> Result<f64, RotorError> {
    let h = problem.hamiltonian(a, basis);
    let pairs = lowest_eigenpairs(&h, excited + 1)?;
    let scale = h.gershgorin_max().abs().max(1.0);
    if pairs.values[1] - pairs.values[0] < 1e-10 * scale {
        return Err(RotorError::DegenerateGroundState);
    }
    let deriv = problem.hamiltonian_derivative(basis);
    let n = h.dim();
    let mut m_phi0 = vec![0.0; n];
    deriv.matvec(&pairs.vectors[0], &mut m_phi0);
    let mut gamma = 0.0;
    for j in 1..=excited {
        let gap = pairs.values[j] - pairs.values[0];
        gamma += dot(&pairs.vectors[j], &m_phi0).abs() / (gap * gap);
    }
    Ok(gamma)
}

/// Adiabaticity via central finite differences of the eigenvectors with an
/// adaptive step, the independent check on [`adiabaticity`].
pub fn adiabaticity_fd(
    problem: &RotorProblem,
    a: f64,
    basis: &AngularBasis,
    excited: usize,
    delta_a: f64,
) -> Result<f64, RotorError> {
    let eval = |delta: f64| -> Result<f64, RotorError> {
        let here = lowest_eigenpairs(&problem.hamiltonian(a, basis), excited + 1)?;
        let mut plus = lowest_eigenpairs(&problem.hamiltonian(a + delta, basis), excited + 1)?;
        let mut minus = lowest_eigenpairs(&problem.hamiltonian(a - delta, basis), excited + 1)?;
        for j in 0..=excited {
            if dot(&plus.vectors[j], &here.vectors[j]) < 0.0 {
                plus.vectors[j].iter_mut().for_each(|x| *x = -*x);
            }
            if dot(&minus.vectors[j], &here.vectors[j]) < 0.0 {
                minus.vectors[j].iter_mut().for_each(|x| *x = -*x);
            }
        }
        let mut gamma = 0.0;
        for j in 1..=excited {
            let gap = here.values[j] - here.values[0];
            let d = (dot(&plus.vectors[j], &here.vectors[0])
                - dot(&minus.vectors[j], &here.vectors[0]))
                / (2.0 * delta);
            gamma += d.abs() / gap;
        }
        Ok(gamma)
    };
    let mut delta = delta_a;
    let mut coarse = eval(delta)?;
    for _ in 0..6 {
        let fine = eval(0.5 * delta)?;
        if (fine - coarse).abs() <= 5e-3 * fine.abs().max(1e-300) {
            return Ok(fine);
        }
        coarse = fine;
        delta *= 0.5;
    }
    Ok(coarse)
}

/// Adiabaticity profile over an a-grid, in parallel.
pub fn gamma_profile(
    problem: &RotorProblem,
    basis: &AngularBasis,
    a_grid: &[f64],
    excited: usize,
) -> Result<Vec<(f64, f64)>, RotorError> {
    a_grid
        .par_iter()
        .map(|&a| adiabaticity(problem, a, basis, excited).map(|g| (a, g)))
        .collect()
}

/// Reshape a control sweep so that time advances inversely to the
/// adiabaticity profile (`dt proportional to gamma(a) da`), normalized to
/// the total `duration`. The profile must cover the swept interval densely.
pub fn build_ramp(
    a_start: f64,
    a_end: f64,
    duration: f64,
    gamma_samples: &[(f64, f64)],
) -> Result<RampSchedule, RotorError> {
    if gamma_samples.len() < 200 {
        return Err(RotorError::BadRamp("need at least 200 adiabaticity samples".into()));
    }
    if !(duration > 0.0) || a_start == a_end {
        return Err(RotorError::BadRamp("degenerate sweep".into()));
    }
    let lo = a_start.min(a_end);
    let hi = a_start.max(a_end);
    let mut samples: Vec<(f64, f64)> = gamma_samples.to_vec();
    samples.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let slack = 1e-9 * (hi - lo);
    if samples[0].0 > lo + slack || samples.last().unwrap().0 < hi - slack {
        return Err(RotorError::BadRamp("adiabaticity profile does not cover the sweep".into()));
    }
    if samples.iter().any(|&(_, g)| !(g > 0.0)) {
        return Err(RotorError::BadRamp("adiabaticity must be positive".into()));
    }
    // Resample onto a uniform a-grid over the sweep, oriented with it.
    let npts = samples.len().max(512);
    let mut grid = Vec::with_capacity(npts);
    let mut gammas = Vec::with_capacity(npts);
    for i in 0..npts {
        let a = a_start + (a_end - a_start) * i as f64 / (npts - 1) as f64;
        grid.push(a);
        gammas.push(interp_sorted(&samples, a));
    }
    let pseudo: Vec<f64> = (0..npts).map(|i| i as f64).collect();
    let weight = cumtrapz(&pseudo, &gammas);
    let total = *weight.last().unwrap();
    let times: Vec<f64> = weight.iter().map(|w| duration * w / total).collect();
    // Guard strictly increasing times (gamma > 0 ensures it).
    RampSchedule::from_points(times, grid)
}

fn interp_sorted(samples: &[(f64, f64)], a: f64) -> f64 {
    let idx = samples.partition_point(|&(x, _)| x < a);
    if idx == 0 {
        return samples[0].1;
    }
    if idx >= samples.len() {
        return samples.last().unwrap().1;
    }
    let (x0, y0) = samples[idx - 1];
    let (x1, y1) = samples[idx];
    if x1 == x0 {
        y0
    } else {
        y0 + (y1 - y0) * (a - x0) / (x1 - x0)
    }
}

/// Complex coefficient vector over an angular basis.
#[derive(Clone, Debug)]
pub struct WaveVector {
    pub coeffs: Vec<C64>,
    pub time: f64,
}

impl WaveVector {
    pub fn from_real(v: &[f64]) -> Self {
        WaveVector { coeffs: v.iter().map(|&x| C64::new(x, 0.0)).collect(), time: 0.0 }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Overlap with a real basis vector.
    pub fn project(&self, v: &[f64]) -> C64 {
        self.coeffs.iter().zip(v).map(|(c, &x)| c * x).sum()
    }
}

/// Ground state of the sector basis at control value `a`.
pub fn ground_state(
    problem: &RotorProblem,
    a: f64,
    basis: &AngularBasis,
) -> Result<WaveVector, RotorError> {
    let pairs = lowest_eigenpairs(&problem.hamiltonian(a, basis), 1)?;
    Ok(WaveVector::from_real(&pairs.vectors[0]))
}

/// Propagation backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Instantaneous-eigenframe stepping over the lowest `track_states`
    /// states.
    EigenframeK,
    /// Crank-Nicolson on the full banded matrix; unconditionally
    /// norm-preserving and the slower, trustworthy backend.
    FullBanded,
}

#[derive(Clone, Copy, Debug)]
pub struct PropagateOpts {
    pub method: Method,
    /// Number of time steps; 0 selects the per-method default.
    pub steps: usize,
    /// Instantaneous states tracked for the eigenframe method and for
    /// population output.
    pub track_states: usize,
    /// Number of trajectory points recorded.
    pub output_samples: usize,
}

impl Default for PropagateOpts {
    fn default() -> Self {
        PropagateOpts {
            method: Method::EigenframeK,
            steps: 0,
            track_states: 16,
            output_samples: 256,
        }
    }
}

impl PropagateOpts {
    pub fn with_method(method: Method) -> Self {
        PropagateOpts { method, ..Default::default() }
    }
}

/// One recorded point of a propagation.
#[derive(Clone, Debug)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub a: f64,
    /// Squared overlap with the instantaneous ground state.
    pub overlap_sq: f64,
    /// Populations of the lowest tracked states.
    pub populations: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub final_state: WaveVector,
    /// Populations of the lowest tracked states of the final Hamiltonian.
    pub final_populations: Vec<f64>,
    pub min_overlap_sq: f64,
    pub norm_drift: f64,
}

/// Propagate `initial` through the schedule in the given basis.
pub fn propagate(
    problem: &RotorProblem,
    schedule: &RampSchedule,
    basis: &AngularBasis,
    initial: &WaveVector,
    opts: &PropagateOpts,
) -> Result<Trajectory, RotorError> {
    if initial.coeffs.len() != basis.len {
        return Err(RotorError::IntegratorFailure("state/basis size mismatch".into()));
    }
    match opts.method {
        Method::EigenframeK => propagate_eigenframe(problem, schedule, basis, initial, opts),
        Method::FullBanded => propagate_full(problem, schedule, basis, initial, opts),
    }
}

/// Run both backends and check that they agree on the final ground-state
/// population; disagreement beyond 1e-2 flags an under-resolved run.
pub fn propagate_cross_checked(
    problem: &RotorProblem,
    schedule: &RampSchedule,
    basis: &AngularBasis,
    initial: &WaveVector,
    opts: &PropagateOpts,
) -> Result<(Trajectory, Trajectory), RotorError> {
    let eigen = propagate(
        problem,
        schedule,
        basis,
        initial,
        &PropagateOpts { method: Method::EigenframeK, ..*opts },
    )?;
    let full = propagate(
        problem,
        schedule,
        basis,
        initial,
        &PropagateOpts { method: Method::FullBanded, ..*opts },
    )?;
    let delta = (eigen.final_populations[0] - full.final_populations[0]).abs();
    if delta > 1e-2 {
        return Err(RotorError::MethodDisagreement { delta });
    }
    Ok((eigen, full))
}

fn propagate_eigenframe(
    problem: &RotorProblem,
    schedule: &RampSchedule,
    basis: &AngularBasis,
    initial: &WaveVector,
    opts: &PropagateOpts,
) -> Result<Trajectory, RotorError> {
    let steps = if opts.steps == 0 { 8192 } else { opts.steps };
    let k = opts.track_states.max(4);
    let duration = schedule.duration();
    let dt = duration / steps as f64;

    let mut tracker = EigTracker::new(&problem.hamiltonian(schedule.value_at(0.0), basis), k)?;
    let mut c: Vec<C64> = (0..k).map(|j| initial.project(&tracker.vectors[j])).collect();

    let sample_every = (steps / opts.output_samples.max(1)).max(1);
    let mut points = Vec::new();
    let mut min_overlap = f64::INFINITY;
    let mut worst_norm = 0.0f64;
    record_eigenframe_point(&mut points, 0.0, schedule, &c, &mut min_overlap);

    let mut old_vectors = tracker.vectors.clone();
    for step in 0..steps {
        let t_mid = (step as f64 + 0.5) * dt;
        let a_mid = schedule.value_at(t_mid);
        tracker.update(&problem.hamiltonian(a_mid, basis))?;
        // Rotate into the new instantaneous basis, then advance the phases
        // by the full step (midpoint-frozen evolution).
        let mut rotated = vec![C64::new(0.0, 0.0); k];
        for (j, row) in tracker.vectors.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (l, old) in old_vectors.iter().enumerate() {
                acc += C64::new(dot(row, old), 0.0) * c[l];
            }
            rotated[j] = acc;
        }
        let e0 = tracker.values[0];
        for (j, val) in rotated.iter_mut().enumerate() {
            *val *= C64::from_polar(1.0, -(tracker.values[j] - e0) * dt);
        }
        c = rotated;
        old_vectors.clone_from(&tracker.vectors);

        let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        worst_norm = worst_norm.max((norm - 1.0).abs());
        if (step + 1) % sample_every == 0 || step + 1 == steps {
            record_eigenframe_point(
                &mut points,
                (step + 1) as f64 * dt,
                schedule,
                &c,
                &mut min_overlap,
            );
        }
    }
    // Final analysis against the exact end-point Hamiltonian.
    tracker.update(&problem.hamiltonian(schedule.end_value(), basis))?;
    let mut final_state = WaveVector {
        coeffs: vec![C64::new(0.0, 0.0); basis.len],
        time: duration,
    };
    for (j, row) in old_vectors.iter().enumerate() {
        for (x, &b) in final_state.coeffs.iter_mut().zip(row) {
            *x += c[j] * b;
        }
    }
    let final_populations: Vec<f64> =
        tracker.vectors.iter().map(|v| final_state.project(v).norm_sqr()).collect();
    Ok(Trajectory {
        points,
        final_state,
        final_populations,
        min_overlap_sq: min_overlap,
        norm_drift: worst_norm,
    })
}

fn record_eigenframe_point(
    points: &mut Vec<TrajectoryPoint>,
    t: f64,
    schedule: &RampSchedule,
    c: &[C64],
    min_overlap: &mut f64,
) {
    let overlap = c[0].norm_sqr();
    *min_overlap = min_overlap.min(overlap);
    points.push(TrajectoryPoint {
        t,
        a: schedule.value_at(t),
        overlap_sq: overlap,
        populations: c.iter().map(|z| z.norm_sqr()).collect(),
    });
}

fn propagate_full(
    problem: &RotorProblem,
    schedule: &RampSchedule,
    basis: &AngularBasis,
    initial: &WaveVector,
    opts: &PropagateOpts,
) -> Result<Trajectory, RotorError> {
    let steps = if opts.steps == 0 { 1 << 19 } else { opts.steps };
    let n = basis.len;
    let duration = schedule.duration();
    let dt = duration / steps as f64;
    let mut psi = initial.coeffs.clone();
    let mut h = problem.hamiltonian(schedule.value_at(0.0), basis);
    let mut tracker =
        EigTracker::new(&h, opts.track_states.clamp(4, 12))?;

    let mut lu = BandedLu::<C64>::workspace(n, 2, 2);
    let mut hpsi = vec![C64::new(0.0, 0.0); n];
    let sample_every = (steps / opts.output_samples.max(1)).max(1);
    let mut points = Vec::new();
    let mut min_overlap = f64::INFINITY;
    let mut worst_norm = 0.0f64;

    record_full_point(&mut points, 0.0, schedule, &psi, &tracker, &mut min_overlap);
    for step in 0..steps {
        let t_mid = (step as f64 + 0.5) * dt;
        problem.hamiltonian_into(schedule.value_at(t_mid), basis, &mut h);
        h.matvec_complex(&psi, &mut hpsi);
        // Shift out the mean phase so the Cayley rotation stays accurate.
        let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let mu: f64 = psi
            .iter()
            .zip(&hpsi)
            .map(|(p, hp)| (p.conj() * hp).re)
            .sum::<f64>()
            / norm_sq;
        let half = 0.5 * dt;
        // rhs = (1 - i dt/2 (H - mu)) psi
        for i in 0..n {
            let shifted = hpsi[i] - psi[i] * mu;
            psi[i] -= C64::new(0.0, half) * shifted;
        }
        let ok = lu.refactor(|i, j| {
            let mut v = C64::new(0.0, half * h.entry(i, j));
            if i == j {
                v += C64::new(1.0, -half * mu);
            }
            v
        });
        if !ok {
            return Err(RotorError::IntegratorFailure("singular Cayley factor".into()));
        }
        lu.solve_in_place(&mut psi);

        if (step + 1) % sample_every == 0 || step + 1 == steps {
            let t = (step + 1) as f64 * dt;
            tracker.update(&problem.hamiltonian(schedule.value_at(t), basis))?;
            let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            worst_norm = worst_norm.max((norm - 1.0).abs());
            record_full_point(&mut points, t, schedule, &psi, &tracker, &mut min_overlap);
        }
    }
    tracker.update(&problem.hamiltonian(schedule.end_value(), basis))?;
    let final_state = WaveVector { coeffs: psi, time: duration };
    let final_populations: Vec<f64> =
        tracker.vectors.iter().map(|v| final_state.project(v).norm_sqr()).collect();
    Ok(Trajectory {
        points,
        final_state,
        final_populations,
        min_overlap_sq: min_overlap,
        norm_drift: worst_norm,
    })
}

fn record_full_point(
    points: &mut Vec<TrajectoryPoint>,
    t: f64,
    schedule: &RampSchedule,
    psi: &[C64],
    tracker: &EigTracker,
    min_overlap: &mut f64,
) {
    let project = |v: &[f64]| -> f64 {
        let acc: C64 = psi.iter().zip(v).map(|(c, &x)| c * x).sum();
        acc.norm_sqr()
    };
    let populations: Vec<f64> = tracker.vectors.iter().map(|v| project(v)).collect();
    let overlap = populations[0];
    *min_overlap = min_overlap.min(overlap);
    points.push(TrajectoryPoint { t, a: schedule.value_at(t), overlap_sq: overlap, populations });
}

/// Verdict of the adiabatic exchange on the motional state.
#[derive(Clone, Debug)]
pub struct ParityTransfer {
    pub sector: Sector,
    /// Population of the symmetry-dictated target state of the final well
    /// (first excited well state for fermions, well ground state for
    /// bosons).
    pub target_population: f64,
    /// Weight left in the other tracked states.
    pub leakage: f64,
    pub min_overlap_sq: f64,
    pub norm_drift: f64,
}

/// Run the exchange ramp from the sector ground state and report where the
/// population lands. Within a cosine sector the instantaneous ground state
/// connects the initial well ground state to the symmetry-dictated final
/// state, so the target population is the final ground-state population of
/// the sector Hamiltonian.
pub fn parity_transfer(
    problem: &RotorProblem,
    sector: Sector,
    schedule: &RampSchedule,
    basis_len: usize,
    opts: &PropagateOpts,
) -> Result<ParityTransfer, RotorError> {
    let basis = sector.basis(basis_len);
    let initial = ground_state(problem, schedule.start_value(), &basis)?;
    let traj = propagate(problem, schedule, &basis, &initial, opts)?;
    let target = traj.final_populations[0];
    let tracked: f64 = traj.final_populations.iter().sum();
    Ok(ParityTransfer {
        sector,
        target_population: target,
        leakage: (tracked - target).max(0.0) + (1.0 - tracked).max(0.0),
        min_overlap_sq: traj.min_overlap_sq,
        norm_drift: traj.norm_drift,
    })
}
