//! Shared oracle machinery for the integration suites: the dense
//! first-quantized two-particle representation, random-instance generators,
//! and the piecewise-frozen propagation reference.

#![allow(dead_code)]

use nalgebra::{DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::Rng;

use exphase::fock::{ModeLabel, ModeMap, Site, Spin, Statistics, TwoParticleState};
use exphase::rotor::{AngularBasis, RampSchedule, RotorProblem};

/// Dense (anti)symmetrized two-particle wavefunction over an explicit mode
/// list: `psi[i * d + j]` with `psi_ij = sum amp (d_i,m1 d_j,m2 +
/// s d_i,m2 d_j,m1) / sqrt(2)`.
pub struct FirstQ {
    pub modes: Vec<ModeLabel>,
    pub psi: Vec<C64>,
    pub stats: Statistics,
}

impl FirstQ {
    pub fn index(&self, m: ModeLabel) -> usize {
        self.modes.iter().position(|&x| x == m).expect("mode in universe")
    }

    pub fn from_state(state: &TwoParticleState, modes: &[ModeLabel]) -> Self {
        let d = modes.len();
        let mut out = FirstQ {
            modes: modes.to_vec(),
            psi: vec![C64::new(0.0, 0.0); d * d],
            stats: state.statistics(),
        };
        let s = state.statistics().exchange_sign();
        let inv = 1.0 / 2f64.sqrt();
        for (m1, m2, amp) in state.terms() {
            let i = out.index(m1);
            let j = out.index(m2);
            out.psi[i * d + j] += amp * inv;
            out.psi[j * d + i] += amp * s * inv;
        }
        out
    }

    pub fn to_state(&self) -> TwoParticleState {
        let d = self.modes.len();
        let mut raw = Vec::new();
        for i in 0..d {
            for j in 0..d {
                let amp = self.psi[i * d + j];
                if amp.norm() < 1e-15 {
                    continue;
                }
                if i < j {
                    raw.push((self.modes[i], self.modes[j], amp * 2f64.sqrt()));
                } else if i == j {
                    raw.push((self.modes[i], self.modes[j], amp / 2f64.sqrt()));
                }
            }
        }
        TwoParticleState::from_raw_terms(raw, self.stats)
    }

    /// Apply a single-particle operator given by its columns.
    pub fn apply_single(&mut self, columns: &dyn Fn(usize) -> Vec<(usize, C64)>) {
        let d = self.modes.len();
        let mut next = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                let amp = self.psi[i * d + j];
                if amp.norm() < 1e-18 {
                    continue;
                }
                for &(u, cu) in &columns(i) {
                    for &(v, cv) in &columns(j) {
                        next[u * d + v] += amp * cu * cv;
                    }
                }
            }
        }
        self.psi = next;
    }

    pub fn overlap(&self, other: &FirstQ) -> C64 {
        self.psi.iter().zip(&other.psi).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn spin_parity(&self, a: Site, b: Site) -> Option<(f64, f64)> {
        let d = self.modes.len();
        let mut weight = 0.0;
        let mut signed = 0.0;
        for i in 0..d {
            for j in 0..d {
                let (mi, mj) = (self.modes[i], self.modes[j]);
                let hit = (mi.site == a && mj.site == b) || (mi.site == b && mj.site == a);
                if !hit {
                    continue;
                }
                let w = self.psi[i * d + j].norm_sqr();
                weight += w;
                signed += if mi.spin == mj.spin { w } else { -w };
            }
        }
        (weight > 1e-15).then_some((signed / weight, weight))
    }
}

pub fn mode_universe() -> Vec<ModeLabel> {
    let mut modes = Vec::new();
    for x in -2..4 {
        for spin in [Spin::Up, Spin::Down] {
            for vib in 0..2 {
                modes.push(ModeLabel { site: Site::at(x), spin, vib });
            }
        }
    }
    modes
}

pub fn random_c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_state(
    rng: &mut impl Rng,
    modes: &[ModeLabel],
    stats: Statistics,
) -> TwoParticleState {
    let terms = rng.random_range(1..=4);
    let raw: Vec<_> = (0..terms)
        .map(|_| {
            let m1 = modes[rng.random_range(0..modes.len())];
            let m2 = modes[rng.random_range(0..modes.len())];
            (m1, m2, random_c64(rng))
        })
        .collect();
    let state = TwoParticleState::from_raw_terms(raw, stats);
    if state.is_zero() {
        // Pauli cancellation can empty tiny fermionic draws; use a product.
        return TwoParticleState::product(modes[0], modes[3], stats);
    }
    state.normalized()
}

/// Random isometry defined on the occupied modes, mapping into a slightly
/// larger random target set.
pub fn random_isometry(
    rng: &mut impl Rng,
    occupied: &[ModeLabel],
    universe: &[ModeLabel],
) -> ModeMap {
    let mut targets: Vec<ModeLabel> = occupied.to_vec();
    while targets.len() < occupied.len() + 2 {
        let m = universe[rng.random_range(0..universe.len())];
        if !targets.contains(&m) {
            targets.push(m);
        }
    }
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for _ in 0..occupied.len() {
        let mut col: Vec<C64> = (0..targets.len()).map(|_| random_c64(rng)).collect();
        for prev in &cols {
            let dot: C64 = prev.iter().zip(&col).map(|(p, c)| p.conj() * c).sum();
            for (c, p) in col.iter_mut().zip(prev) {
                *c -= dot * p;
            }
        }
        let norm: f64 = col.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in &mut col {
            *c /= norm;
        }
        cols.push(col);
    }
    let mut map = ModeMap::new();
    for (k, &from) in occupied.iter().enumerate() {
        let image: Vec<(ModeLabel, C64)> = targets
            .iter()
            .zip(&cols[k])
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(&t, &c)| (t, c))
            .collect();
        map.insert(from, image);
    }
    map
}

pub fn random_unitary2(rng: &mut impl Rng) -> Matrix2<C64> {
    let mut a = [random_c64(rng), random_c64(rng)];
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    a[0] /= na;
    a[1] /= na;
    let mut b = [random_c64(rng), random_c64(rng)];
    let dot = a[0].conj() * b[0] + a[1].conj() * b[1];
    b[0] -= dot * a[0];
    b[1] -= dot * a[1];
    let nb = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
    b[0] /= nb;
    b[1] /= nb;
    Matrix2::new(a[0], b[0], a[1], b[1])
}

pub fn assert_states_match(fock: &TwoParticleState, oracle: &TwoParticleState, context: &str) {
    let mut keys: Vec<(ModeLabel, ModeLabel)> = fock
        .terms()
        .map(|(a, b, _)| (a, b))
        .chain(oracle.terms().map(|(a, b, _)| (a, b)))
        .collect();
    keys.sort();
    keys.dedup();
    for (m1, m2) in keys {
        let a = fock.amplitude(m1, m2);
        let b = oracle.amplitude(m1, m2);
        assert!(
            (a - b).norm() < 1e-12,
            "{context}: amplitude mismatch at ({m1:?}, {m2:?}): {a} vs {b}"
        );
    }
}

/// Column image of a mode map probed through the public state interface.
pub fn map_image(map: &ModeMap, mode: ModeLabel) -> Vec<(ModeLabel, C64)> {
    let spectator = ModeLabel { site: Site::new(90, 0), spin: Spin::Up, vib: 0 };
    let probe = TwoParticleState::product(mode, spectator, Statistics::Boson);
    let mapped = probe.apply_mode_map(map).unwrap();
    mapped
        .terms()
        .map(|(m1, m2, amp)| if m2 == spectator { (m1, amp) } else { (m2, amp) })
        .collect()
}

/// Freeze a smooth monotone schedule into `segments` constant pieces that
/// are uniform in the swept value, each dwelling for the time the smooth
/// ramp spends in its interval. Freezing along the sweep keeps every jump
/// small, so the staircase dynamics stays close to the smooth one and both
/// integrators can be checked against exact frozen evolution on the
/// identical Hamiltonian path. Returns the staircase schedule and the
/// (level, dwell) list.
pub fn staircase(smooth: &RampSchedule, segments: usize) -> (RampSchedule, Vec<(f64, f64)>) {
    let duration = smooth.duration();
    let (t0, a0) = smooth.samples().next().unwrap();
    let a1 = smooth.end_value();
    assert!(a1 > a0, "staircase helper expects an increasing sweep");
    // Invert a -> t on the sample polyline.
    let samples: Vec<(f64, f64)> = smooth.samples().collect();
    let time_at = |a: f64| -> f64 {
        if a <= a0 {
            return 0.0;
        }
        if a >= a1 {
            return duration;
        }
        let idx = samples.partition_point(|&(_, v)| v < a);
        let (tl, vl) = samples[idx - 1];
        let (tr, vr) = samples[idx];
        let frac = if vr > vl { (a - vl) / (vr - vl) } else { 0.0 };
        tl + frac * (tr - tl) - t0
    };
    let step = (a1 - a0) / segments as f64;
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut levels = Vec::new();
    for seg in 0..segments {
        let lo = a0 + seg as f64 * step;
        let hi = lo + step;
        let level = 0.5 * (lo + hi);
        let t_lo = time_at(lo);
        let t_hi = if seg == segments - 1 { duration } else { time_at(hi) };
        levels.push((level, t_hi - t_lo));
        let sliver = 1e-9 * (t_hi - t_lo).max(1e-12);
        times.push(t_lo);
        values.push(level);
        times.push(t_hi - sliver);
        values.push(level);
    }
    times.push(duration);
    values.push(levels.last().unwrap().0);
    (RampSchedule::from_points(times, values).unwrap(), levels)
}

/// Evolve `psi` through the staircase, each (level, dwell) segment advanced
/// by the exact eigendecomposition of the dense Hamiltonian.
pub fn piecewise_frozen_evolution(
    problem: &RotorProblem,
    levels: &[(f64, f64)],
    basis: &AngularBasis,
    initial: &[C64],
) -> Vec<C64> {
    let n = basis.len;
    let mut psi = initial.to_vec();
    for &(a, dwell) in levels {
        let h = problem.hamiltonian(a, basis).to_dense();
        let eig = SymmetricEigen::new(h);
        let re = DVector::from_iterator(n, psi.iter().map(|c| c.re));
        let im = DVector::from_iterator(n, psi.iter().map(|c| c.im));
        let cre = eig.eigenvectors.transpose() * re;
        let cim = eig.eigenvectors.transpose() * im;
        let e0 = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let coeff: Vec<C64> = (0..n)
            .map(|j| {
                C64::new(cre[j], cim[j])
                    * C64::from_polar(1.0, -(eig.eigenvalues[j] - e0) * dwell)
            })
            .collect();
        for x in psi.iter_mut() {
            *x = C64::new(0.0, 0.0);
        }
        for j in 0..n {
            if coeff[j].norm_sqr() < 1e-30 {
                continue;
            }
            let col = eig.eigenvectors.column(j);
            for (x, &b) in psi.iter_mut().zip(col.iter()) {
                *x += coeff[j] * b;
            }
        }
    }
    psi
}

pub fn overlap_sq(a: &[C64], b: &[C64]) -> f64 {
    let dot: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    dot.norm_sqr()
}
