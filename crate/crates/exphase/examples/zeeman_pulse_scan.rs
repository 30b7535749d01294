//! Gradient-addressed flip pulse: error probability and fringe correction
//! against the addressing ratio `rho = delta' (n+1) / Omega_R`.
//!
//! Near integer ratios the spurious rotation of the parked inner
//! components winds back to zero, the flip error dips sharply and the
//! residual fringe shift collapses onto the second-order ac closed form.
//!
//! Run:
//!   cargo run --release --example zeeman_pulse_scan

use std::f64::consts::PI;

use exphase::zeeman::{p_err, ratio_scan, GradientPulseConfig};

fn main() {
    let rabi = 2.0 * PI * 60e3;
    let n = 10;

    let quoted = GradientPulseConfig::from_ratio(rabi, 2.0, n);
    eprintln!("flip error at rho = 2, n = 10: {:.4} (expected < 0.02)", p_err(&quoted).unwrap());

    let rhos: Vec<f64> = (0..=150).map(|i| 1.0 + 0.02 * i as f64).collect();
    let rows = ratio_scan(rabi, n, &rhos).unwrap();
    println!("rho,p_err,residual_phase,closed_form");
    for r in &rows {
        println!(
            "{:.3},{:.6e},{:+.6e},{:+.6e}",
            r.rho, r.p_err, r.residual_phase, r.closed_form
        );
    }
}
