//! Low spectrum of the two-ion rotor along the dc-asymmetry sweep.
//!
//! As the anisotropy crosses the micromotion-induced barrier scale, the
//! single angular well splits into a double well: levels from the two
//! reflection blocks collapse into near-degenerate pairs while the
//! same-symmetry gap stays open. The adiabaticity profile peaks at the two
//! quartic points.
//!
//! Run:
//!   cargo run --release --example rotor_spectrum

use exphase::rotor::{
    adiabaticity, lowest_eigenpairs, AngularBasis, BasisKind, RotorProblem, TrapConfig,
};
use exphase::util::linspace;

fn main() {
    let problem = RotorProblem::new(TrapConfig::calcium40()).unwrap();
    eprintln!(
        "ion separation 2 r0 = {:.2} um, well scale = {:.3e} rad/s, kinetic scale = {:.1} rad/s",
        2e6 * problem.r0,
        problem.kappa_b,
        problem.e_rot
    );

    let len = 2048;
    let levels = 6;
    println!("a,block,level,excitation_rad_s,gamma");
    for &a in &linspace(-4e-4, 4e-4, 81) {
        for (tag, kind) in [("cos_odd", BasisKind::CosOdd), ("sin_odd", BasisKind::SinOdd)] {
            let basis = AngularBasis::new(kind, len);
            let pairs = lowest_eigenpairs(&problem.hamiltonian(a, &basis), levels).unwrap();
            let gamma = if kind == BasisKind::CosOdd {
                format!("{:.4e}", adiabaticity(&problem, a, &basis, 12).unwrap())
            } else {
                String::new()
            };
            for (level, &e) in pairs.values.iter().enumerate() {
                println!("{a:+.4e},{tag},{level},{:.6e},{gamma}", e - pairs.values[0]);
            }
        }
    }
}
