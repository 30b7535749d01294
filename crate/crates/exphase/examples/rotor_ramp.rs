//! Adiabatic exchange of two trapped ions through the angular double well.
//!
//! Builds the adiabaticity-rescaled 2 ms sweep of the dc asymmetry,
//! propagates the rotor ground state through it in both statistics
//! sectors, and reports the parity-transfer verdicts: fermions land in the
//! first excited state of the rotated well, bosons return to its ground
//! state.
//!
//! Run:
//!   cargo run --release --example rotor_ramp

use exphase::rotor::{
    build_ramp, gamma_profile, ground_state, parity_transfer, propagate, Method, PropagateOpts,
    RotorProblem, Sector, TrapConfig,
};
use exphase::util::linspace;

fn main() {
    let problem = RotorProblem::new(TrapConfig::calcium40()).unwrap();
    let len = 1024;
    let gamma_basis = Sector::FermionOdd.basis(768);
    eprintln!("computing adiabaticity profile...");
    let grid = linspace(-4e-4, 4e-4, 2001);
    let gamma = gamma_profile(&problem, &gamma_basis, &grid, 16).unwrap();
    let schedule = build_ramp(-4e-4, 4e-4, 2e-3, &gamma).unwrap();

    eprintln!("propagating the fermion sector...");
    let basis = Sector::FermionOdd.basis(len);
    let initial = ground_state(&problem, -4e-4, &basis).unwrap();
    let opts = PropagateOpts { method: Method::EigenframeK, ..Default::default() };
    let traj = propagate(&problem, &schedule, &basis, &initial, &opts).unwrap();
    println!("t,a,overlap_sq");
    for p in &traj.points {
        println!("{:.6e},{:+.6e},{:.6}", p.t, p.a, p.overlap_sq);
    }
    eprintln!(
        "fermion: min overlap^2 with the instantaneous ground state = {:.4}",
        traj.min_overlap_sq
    );

    for sector in [Sector::FermionOdd, Sector::BosonEven] {
        let verdict = parity_transfer(&problem, sector, &schedule, len, &opts).unwrap();
        let target = match sector {
            Sector::FermionOdd => "first excited state of the final well (parity flipped)",
            Sector::BosonEven => "ground state of the final well (parity kept)",
        };
        eprintln!(
            "{sector:?}: P({target}) = {:.4}, tracked leakage = {:.2e}",
            verdict.target_population, verdict.leakage
        );
    }
}
