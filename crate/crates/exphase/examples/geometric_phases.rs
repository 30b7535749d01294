//! Geometric and stray dynamical phases of the ion-exchange interferometer.
//!
//! A magnetic flux through the rotor circle adds an Aharonov-Bohm phase; a
//! stray quadrupole rotated 45 degrees against the trap axes makes the two
//! branch orientations see a potential hill versus a valley and piles up a
//! large dynamical phase, which doubles (mod 2pi) when the transport is
//! retraced.
//!
//! Run:
//!   cargo run --release --example geometric_phases

use std::f64::consts::PI;

use exphase::rotor::{
    aharonov_bohm_phase, build_ramp, gamma_profile, stray_phase, RotorProblem, Sector,
    TrapConfig,
};
use exphase::util::linspace;

fn main() {
    let trap = TrapConfig::calcium40();
    let problem = RotorProblem::new(trap).unwrap();

    let phi_ab = aharonov_bohm_phase(4e-4, 2.5e-6, trap.charge, trap.hbar);
    println!(
        "aharonov_bohm: B = 4 G, r0 = 2.5 um -> phi = {:.3} x 2pi",
        phi_ab / (2.0 * PI)
    );

    let basis = Sector::FermionOdd.basis(768);
    let grid = linspace(-4e-4, 4e-4, 2001);
    let gamma = gamma_profile(&problem, &basis, &grid, 16).unwrap();
    let schedule = build_ramp(-4e-4, 4e-4, 2e-3, &gamma).unwrap();

    for &a_prime in &[0.0, 8e7, 8e8] {
        let phi = stray_phase(&problem, a_prime, &schedule).unwrap();
        println!("stray quadrupole A' = {a_prime:.1e} s^-2 -> phi_s = {:.2} pi", phi / PI);
    }
    let single = stray_phase(&problem, 8e8, &schedule).unwrap();
    let retraced = stray_phase(&problem, 8e8, &schedule.then_reversed()).unwrap();
    println!(
        "retrace check: forward+backward = {:.4} pi vs 2 x forward = {:.4} pi (diff {:.1e} rad)",
        retraced / PI,
        2.0 * single / PI,
        (retraced - 2.0 * single).abs()
    );
}
