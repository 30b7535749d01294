use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::*;
use crate::fock::{ModeLabel, Spin, Statistics, TwoParticleState};
use crate::util::{angle_distance, linspace};

fn grid32() -> Vec<f64> {
    linspace(0.0, 2.0 * PI * 31.0 / 32.0, 32)
}

#[test]
fn shift_counts_follow_the_formula() {
    for (n, before, after) in [(10u32, 6usize, 4usize), (2, 2, 0), (4, 3, 1), (20, 11, 9)] {
        for variant in [Variant::OneDim, Variant::TwoDim] {
            let plan = build_sequence(n, variant).unwrap();
            assert_eq!(plan.shift_counts(), (before, after), "n={n} {variant:?}");
            assert_eq!(plan.transport_slots(), n as usize + 1);
        }
    }
}

#[test]
fn odd_or_tiny_separation_is_rejected() {
    assert!(matches!(build_sequence(3, Variant::OneDim), Err(RamseyError::BadSeparation(3))));
    assert!(matches!(build_sequence(0, Variant::OneDim), Err(RamseyError::BadSeparation(0))));
}

/// Step-end positions of the four ideal branches, tracking spin flips at the
/// intermediate pulse. Returns (positions per step, spin labels per step).
fn branch_positions(plan: &SequencePlan) -> Vec<Vec<(Site, Spin)>> {
    let mut branches = vec![
        (plan.l1, Spin::Up),
        (plan.l1, Spin::Down),
        (plan.r1, Spin::Up),
        (plan.r1, Spin::Down),
    ];
    let mut history = vec![branches.clone()];
    for step in &plan.steps {
        match step {
            Step::Pulse { stage: PulseStage::Intermediate, sites } => {
                for b in &mut branches {
                    if sites.contains(&b.0) {
                        b.1 = b.1.flipped();
                    }
                }
            }
            Step::Pulse { .. } => {}
            Step::Shift { delta_up } | Step::Merge { delta_up } => {
                for b in &mut branches {
                    let d = match b.1 {
                        Spin::Up => *delta_up,
                        Spin::Down => Site::new(-delta_up.x, -delta_up.y),
                    };
                    b.0 = b.0.offset(d.x, d.y);
                }
            }
        }
        history.push(branches.clone());
    }
    history
}

/// Step indices at which branches of the two *different* atoms share a
/// site, excluding the deliberate recombination at the sequence tail (the
/// merge and final pulse snapshots). Same-atom spin components coincide
/// before splitting and after recombining by construction.
fn cross_atom_coincidences(history: &[Vec<(Site, Spin)>]) -> Vec<usize> {
    let mut out = Vec::new();
    for (step_idx, snap) in history.iter().enumerate() {
        if step_idx + 2 >= history.len() {
            continue;
        }
        for i in 0..2 {
            for j in 2..4 {
                if snap[i].0 == snap[j].0 {
                    out.push(step_idx);
                }
            }
        }
    }
    out
}

#[test]
fn supports_stay_disjoint_except_the_1d_crossing() {
    for n in [2u32, 4, 10, 14] {
        let plan = build_sequence(n, Variant::OneDim).unwrap();
        let history = branch_positions(&plan);
        // Exactly one crossing, at the end of shift n/2 (after the initial
        // pulse step), where the inner components pass through the center.
        assert_eq!(cross_atom_coincidences(&history), vec![1 + n as usize / 2], "n={n}");
        // The final snapshot pairs the branches at the detection sites.
        let last = history.last().unwrap();
        let mut sites: Vec<Site> = last.iter().map(|b| b.0).collect();
        sites.sort();
        assert_eq!(sites, vec![plan.l2, plan.l2, plan.r2, plan.r2]);
    }
}

#[test]
fn two_dim_supports_never_coincide() {
    for n in [2u32, 4, 10, 14] {
        let plan = build_sequence(n, Variant::TwoDim).unwrap();
        let history = branch_positions(&plan);
        assert!(cross_atom_coincidences(&history).is_empty(), "n={n}");
        let last = history.last().unwrap();
        let mut sites: Vec<Site> = last.iter().map(|b| b.0).collect();
        sites.sort();
        assert_eq!(sites, vec![plan.l2, plan.l2, plan.r2, plan.r2]);
    }
}

#[test]
fn pulse_time_geometry_matches_gradient_addressing() {
    let plan = build_sequence(10, Variant::OneDim).unwrap();
    let history = branch_positions(&plan);
    // Snapshot just before the intermediate pulse: after 1 pulse + 6 shifts.
    let snap = &history[7];
    let mut xs: Vec<i32> = snap.iter().map(|b| b.0.x).collect();
    xs.sort();
    assert_eq!(xs, vec![-11, -1, 1, 11]);
}

/// The transport stages (shifts, intermediate flip, merge) acting on each
/// initial mode must reproduce the conditional-swap map: inner components
/// trade sides unchanged, outer components flip with the documented phases.
#[test]
fn transport_reproduces_the_conditional_swap_map() {
    for variant in [Variant::OneDim, Variant::TwoDim] {
        let plan = build_sequence(10, variant).unwrap();
        let (phi_l3, phi_r3) = (0.4, -0.9);
        let mut bank = PulseBank::default();
        bank.intermediate.insert(plan.l3, pi_pulse(phi_l3));
        bank.intermediate.insert(plan.r3, pi_pulse(phi_r3));

        // Expected images of the four initial single-particle modes.
        let cases = [
            (
                ModeLabel::new(plan.l1, Spin::Up, 0),
                ModeLabel::new(plan.r2, Spin::Up, 0),
                C64::new(1.0, 0.0),
            ),
            (
                ModeLabel::new(plan.l1, Spin::Down, 0),
                ModeLabel::new(plan.l2, Spin::Up, 0),
                C64::from_polar(1.0, phi_l3),
            ),
            (
                ModeLabel::new(plan.r1, Spin::Up, 0),
                ModeLabel::new(plan.r2, Spin::Down, 0),
                -C64::from_polar(1.0, -phi_r3),
            ),
            (
                ModeLabel::new(plan.r1, Spin::Down, 0),
                ModeLabel::new(plan.l2, Spin::Down, 0),
                C64::new(1.0, 0.0),
            ),
        ];
        // Probe the map columns pairwise: every two-mode product state must
        // land on the expected pair with the product of the column phases.
        for (i, &(from_a, to_a, amp_a)) in cases.iter().enumerate() {
            for &(from_b, to_b, amp_b) in cases.iter().skip(i + 1) {
                let initial = TwoParticleState::product(from_a, from_b, Statistics::Boson);
                let out = run_transport_only(&plan, initial, &bank);
                let expect = amp_a * amp_b;
                let got = out.amplitude(to_a, to_b);
                assert!(
                    (got - expect).norm() < 1e-12,
                    "{variant:?}: {from_a:?}+{from_b:?} -> got {got}, want {expect}"
                );
                assert!((out.norm_sq() - 1.0).abs() < 1e-12);
            }
        }
    }
}

fn run_transport_only(
    plan: &SequencePlan,
    initial: TwoParticleState,
    bank: &PulseBank,
) -> TwoParticleState {
    // Apply every step except the initial and final Ramsey pulses.
    let mut state = initial;
    for step in &plan.steps {
        match step {
            Step::Pulse { stage: PulseStage::Intermediate, .. } => {
                for (&site, u) in &bank.intermediate {
                    state = state.apply_local_unitary(site, u).unwrap();
                }
            }
            Step::Pulse { .. } => {}
            Step::Shift { delta_up } | Step::Merge { delta_up } => {
                state = super::apply_transport(plan, &state, *delta_up, None, 0).unwrap();
            }
        }
    }
    state
}

#[test]
fn ideal_parity_reproduces_the_cosine_in_both_variants() {
    for variant in [Variant::OneDim, Variant::TwoDim] {
        let plan = build_sequence(10, variant).unwrap();
        for (stats, phi_ex) in [(Statistics::Boson, 0.0), (Statistics::Fermion, PI)] {
            for &phi in &[0.0, PI / 2.0, 1.1, -2.4, PI] {
                // Distribute the control phase over all three stages to
                // exercise every site-phase path.
                let phases =
                    PhaseSettings { dphi1: 0.3 * phi, dphi2: 0.25 * phi, dphi3: 0.45 * phi };
                let bank = PulseBank::ideal(&plan, &phases);
                let out = run_sequence(&plan, stats, &bank, None).unwrap();
                let expect = -(phi_ex - phi).cos();
                assert!(
                    (out.parity.unwrap() - expect).abs() < 1e-10,
                    "{variant:?} {stats:?} phi={phi}"
                );
                assert!((out.postselect_prob - 0.5).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn same_site_branch_is_insensitive_to_the_control_phase() {
    let plan = build_sequence(6, Variant::OneDim).unwrap();
    for stats in [Statistics::Boson, Statistics::Fermion] {
        let mut parities = Vec::new();
        for &phi in &[0.0, 0.7, 2.9] {
            let phases = PhaseSettings { dphi3: phi, ..PhaseSettings::default() };
            let bank = PulseBank::ideal(&plan, &phases);
            let out = run_sequence(&plan, stats, &bank, None).unwrap();
            assert!(
                (out.postselect_prob + out.distribution.same_site - 1.0).abs() < 1e-10,
                "post-selection bookkeeping"
            );
            parities.push(out.distribution.same_site_parity.unwrap());
        }
        for p in &parities {
            assert!((p - parities[0]).abs() < 1e-10, "{stats:?}: {parities:?}");
        }
        // Bunching: bosons end spin-aligned at one site, fermions cannot.
        match stats {
            Statistics::Boson => assert!((parities[0] - 1.0).abs() < 1e-10),
            Statistics::Fermion => assert!((parities[0] + 1.0).abs() < 1e-10),
        }
    }
}

#[test]
fn fringe_fit_finds_the_exchange_phase() {
    let plan = build_sequence(10, Variant::OneDim).unwrap();
    for (stats, phi_ex) in [(Statistics::Boson, 0.0), (Statistics::Fermion, PI)] {
        let scan =
            fringe_scan(&plan, stats, PhaseSettings::default(), &grid32(), None).unwrap();
        assert!(angle_distance(scan.fit.phase, phi_ex) < 1e-8);
        assert!((scan.fit.visibility - 1.0).abs() < 1e-8);
        assert!(scan.fit.offset.abs() < 1e-8);
    }
}

#[test]
fn shifting_dphi1_by_pi_flips_the_fitted_phase() {
    let plan = build_sequence(6, Variant::OneDim).unwrap();
    let base = fringe_scan(&plan, Statistics::Boson, PhaseSettings::default(), &grid32(), None)
        .unwrap()
        .fit;
    let flipped = fringe_scan(
        &plan,
        Statistics::Boson,
        PhaseSettings { dphi1: PI, ..PhaseSettings::default() },
        &grid32(),
        None,
    )
    .unwrap()
    .fit;
    assert!(angle_distance(flipped.phase, base.phase + PI) < 1e-8);
}

#[test]
fn sparse_grid_is_rejected() {
    let plan = build_sequence(4, Variant::OneDim).unwrap();
    let short = linspace(0.0, 2.0 * PI, 5);
    assert!(matches!(
        fringe_scan(&plan, Statistics::Boson, PhaseSettings::default(), &short, None),
        Err(RamseyError::BadGrid)
    ));
    let narrow = linspace(0.0, PI, 16);
    assert!(matches!(
        fringe_scan(&plan, Statistics::Boson, PhaseSettings::default(), &narrow, None),
        Err(RamseyError::BadGrid)
    ));
}

fn bank_with_impairment(plan: &SequencePlan, phases: &PhaseSettings, case: ImpairedCase) -> PulseBank {
    let mut bank = PulseBank::ideal(plan, phases);
    match case {
        ImpairedCase::FirstHalfPi { theta } => {
            bank.initial.insert(plan.l1, rotation_pulse(theta, 0.5 * phases.dphi1));
            bank.initial.insert(plan.r1, rotation_pulse(theta, -0.5 * phases.dphi1));
        }
        ImpairedCase::MiddlePi { theta_out, theta_in } => {
            bank.intermediate.insert(plan.l3, rotation_pulse(theta_out, -0.5 * phases.dphi3));
            bank.intermediate.insert(plan.r3, rotation_pulse(theta_out, 0.5 * phases.dphi3));
            bank.intermediate.insert(plan.inner_left, rotation_pulse(theta_in, 0.0));
            bank.intermediate.insert(plan.inner_right, rotation_pulse(theta_in, 0.0));
        }
        ImpairedCase::LastHalfPi { theta } => {
            bank.final_.insert(plan.l2, rotation_pulse(theta, 0.5 * phases.dphi2));
            bank.final_.insert(plan.r2, rotation_pulse(theta, -0.5 * phases.dphi2));
        }
    }
    bank
}

#[test]
fn impaired_first_pulse_matches_engine_exactly() {
    let plan = build_sequence(6, Variant::OneDim).unwrap();
    for &theta in &[0.4, PI / 2.0, 2.0] {
        let case = ImpairedCase::FirstHalfPi { theta };
        let ImpairedPrediction::DiscardedFraction(pred) = impaired_pulse_prediction(case) else {
            panic!()
        };
        let phases = PhaseSettings { dphi3: 0.6, ..PhaseSettings::default() };
        let bank = bank_with_impairment(&plan, &phases, case);
        let out = run_sequence(&plan, Statistics::Fermion, &bank, None).unwrap();
        assert!((1.0 - out.postselect_prob - pred).abs() < 1e-10, "theta={theta}");
    }
}

#[test]
fn impaired_middle_pulse_matches_engine_at_the_ideal_point() {
    let plan = build_sequence(6, Variant::OneDim).unwrap();
    let case = ImpairedCase::MiddlePi { theta_out: PI, theta_in: 0.0 };
    let ImpairedPrediction::DiscardedFraction(pred) = impaired_pulse_prediction(case) else {
        panic!()
    };
    let bank = bank_with_impairment(&plan, &PhaseSettings::default(), case);
    let out = run_sequence(&plan, Statistics::Boson, &bank, None).unwrap();
    assert!((1.0 - out.postselect_prob - pred).abs() < 1e-10);
    assert!((pred - 0.5).abs() < 1e-15);
}

#[test]
fn impaired_middle_pulse_agrees_to_second_order_around_the_ideal_point() {
    // The closed form for the intermediate pulse is a leading-order
    // expression; the engine matches it through second order in both angle
    // deviations.
    let plan = build_sequence(6, Variant::OneDim).unwrap();
    for &eps in &[0.02, 0.05] {
        for case in [
            ImpairedCase::MiddlePi { theta_out: PI, theta_in: eps },
            ImpairedCase::MiddlePi { theta_out: PI - eps, theta_in: 0.0 },
            ImpairedCase::MiddlePi { theta_out: PI - eps, theta_in: eps },
        ] {
            let ImpairedPrediction::DiscardedFraction(pred) = impaired_pulse_prediction(case)
            else {
                panic!()
            };
            let bank = bank_with_impairment(&plan, &PhaseSettings::default(), case);
            let out = run_sequence(&plan, Statistics::Boson, &bank, None).unwrap();
            let engine = 1.0 - out.postselect_prob;
            assert!((engine - pred).abs() < 2.0 * eps.powi(4), "eps={eps} {case:?}");
        }
    }
}

#[test]
fn impaired_last_pulse_fringe_matches_engine_exactly() {
    let plan = build_sequence(6, Variant::OneDim).unwrap();
    for &theta in &[PI / 3.0, PI / 2.0, 1.0] {
        let case = ImpairedCase::LastHalfPi { theta };
        let ImpairedPrediction::Fringe { visibility, offset } = impaired_pulse_prediction(case)
        else {
            panic!()
        };
        let scan = fringe_scan_with(&plan, &grid32(), None, |phi| {
            let phases = PhaseSettings { dphi3: phi, ..PhaseSettings::default() };
            (Statistics::Boson, bank_with_impairment(&plan, &phases, case))
        })
        .unwrap();
        assert!((scan.fit.visibility - visibility).abs() < 1e-10, "theta={theta}");
        assert!((scan.fit.offset - offset).abs() < 1e-10, "theta={theta}");
        assert!(angle_distance(scan.fit.phase, 0.0) < 1e-8);
    }
}

#[test]
fn protected_channels_leave_the_fringe_in_place() {
    for variant in [Variant::OneDim, Variant::TwoDim] {
        let plan = build_sequence(6, variant).unwrap();
        let channels: &[NoiseChannel] = match variant {
            Variant::OneDim => &[
                NoiseChannel::UniformForce,
                NoiseChannel::UniformField,
                NoiseChannel::StaticGradient,
                NoiseChannel::TransportPhases,
            ],
            Variant::TwoDim => &NoiseChannel::ALL,
        };
        for &channel in channels {
            let report =
                dephasing_audit(&plan, Statistics::Fermion, channel, 25, 0xBEEF).unwrap();
            assert!(
                report.max_phase_deviation <= 1e-9,
                "{variant:?} {channel:?}: {:.3e}",
                report.max_phase_deviation
            );
        }
    }
}

#[test]
fn fast_gradient_noise_does_shift_the_1d_fringe() {
    // The one-dimensional layout is only protected against gradient drift
    // that is static within a shot; per-step gradient noise leaks in.
    let plan = build_sequence(6, Variant::OneDim).unwrap();
    let report =
        dephasing_audit(&plan, Statistics::Fermion, NoiseChannel::PerStepGradient, 25, 7).unwrap();
    assert!(report.max_phase_deviation > 1e-3, "{:.3e}", report.max_phase_deviation);
}

#[test]
fn zero_noise_audit_is_exactly_quiet() {
    let plan = build_sequence(6, Variant::OneDim).unwrap();
    let grid = grid32();
    let base = fringe_scan(&plan, Statistics::Boson, PhaseSettings::default(), &grid, None)
        .unwrap()
        .fit;
    let noisy = fringe_scan(
        &plan,
        Statistics::Boson,
        PhaseSettings::default(),
        &grid,
        Some(&NoiseRealization::none()),
    )
    .unwrap()
    .fit;
    assert!(angle_distance(base.phase, noisy.phase) < 1e-14);
}

#[test]
fn thermal_closed_form_hits_the_quoted_points() {
    let v90 = thermal_visibility(&ThermalOccupation::isotropic(0.9)).unwrap();
    assert!(v90.visibility > 0.79 && v90.visibility < 0.82, "{}", v90.visibility);
    let v70 = thermal_visibility(&ThermalOccupation::isotropic(0.7)).unwrap();
    assert!(v70.visibility > 0.49 && v70.visibility < 0.52, "{}", v70.visibility);
    let pure = thermal_visibility(&ThermalOccupation::isotropic(1.0)).unwrap();
    assert!((pure.visibility - 1.0).abs() < 1e-12);
}

#[test]
fn explicit_density_matrices_use_the_mixture_overlap() {
    use nalgebra::DMatrix;
    let rho = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.8, 0.15, 0.05]));
    let occ = ThermalOccupation::from_matrices(rho.clone(), rho.clone());
    let out = thermal_visibility(&occ).unwrap();
    let expect = 0.8f64.powi(2) + 0.15f64.powi(2) + 0.05f64.powi(2);
    assert!((out.p_indist - expect).abs() < 1e-12);

    let bad = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.9, 0.4]));
    assert!(matches!(
        thermal_visibility(&ThermalOccupation::from_matrices(bad.clone(), bad)),
        Err(RamseyError::NotDensityMatrix)
    ));
}

#[test]
fn engine_fringe_matches_truncated_closed_form() {
    let plan = build_sequence(4, Variant::OneDim).unwrap();
    let occ = ThermalOccupation::isotropic(0.8);
    let out = thermal_fringe_visibility(&plan, Statistics::Boson, &occ).unwrap();
    assert!(
        (out.visibility - out.truncated_visibility).abs() < 1e-6,
        "engine {} vs truncated closed form {}",
        out.visibility,
        out.truncated_visibility
    );
}
