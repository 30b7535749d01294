//! Closed-form predictions for miscalibrated pulses.

/// Which pulse deviates from its nominal rotation angle.
#[derive(Clone, Copy, Debug)]
pub enum ImpairedCase {
    /// First Ramsey pulse rotates by `theta` instead of pi/2 at both
    /// preparation sites.
    FirstHalfPi { theta: f64 },
    /// Intermediate pulse rotates by `theta_out` at the outermost sites and
    /// spuriously by `theta_in` at the inner sites.
    MiddlePi { theta_out: f64, theta_in: f64 },
    /// Last Ramsey pulse rotates by `theta` at both detection sites.
    LastHalfPi { theta: f64 },
}

/// Effect of the impairment on the post-selected parity signal.
#[derive(Clone, Copy, Debug)]
pub enum ImpairedPrediction {
    /// Fraction of atom pairs lost to post-selection. The fringe position is
    /// unaffected because the lost components never reach the detection
    /// sites.
    DiscardedFraction(f64),
    /// The detected fringe itself changes shape: `offset - visibility *
    /// cos(phi - phi_ex)`.
    Fringe { visibility: f64, offset: f64 },
}

/// Closed-form impairment predictions.
///
/// The first-pulse and last-pulse expressions are exact for all angles. The
/// intermediate-pulse expression is a leading-order form: exact at the
/// ideal point `(theta_out, theta_in) = (pi, 0)` and accurate through
/// second order in both angle deviations around it. The exact discarded
/// fraction is `1 - [cos^4(theta_in/2) + sin^4(theta_out/2)]/4`, which
/// departs from the quoted product form only at fourth order.
pub fn impaired_pulse_prediction(case: ImpairedCase) -> ImpairedPrediction {
    match case {
        ImpairedCase::FirstHalfPi { theta } => {
            ImpairedPrediction::DiscardedFraction(1.0 - theta.sin().powi(2) / 2.0)
        }
        ImpairedCase::MiddlePi { theta_out, theta_in } => {
            let kept = (theta_out / 2.0).sin().powi(2) * (theta_in / 2.0).cos().powi(2) / 2.0;
            ImpairedPrediction::DiscardedFraction(1.0 - kept)
        }
        ImpairedCase::LastHalfPi { theta } => ImpairedPrediction::Fringe {
            visibility: theta.sin().powi(2),
            offset: -theta.cos().powi(2),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn discarded(case: ImpairedCase) -> f64 {
        match impaired_pulse_prediction(case) {
            ImpairedPrediction::DiscardedFraction(f) => f,
            _ => panic!("expected a discarded fraction"),
        }
    }

    #[test]
    fn first_pulse_minimum_discard_is_half() {
        assert!((discarded(ImpairedCase::FirstHalfPi { theta: PI / 2.0 }) - 0.5).abs() < 1e-15);
        assert!(discarded(ImpairedCase::FirstHalfPi { theta: 0.3 }) > 0.5);
        assert!((discarded(ImpairedCase::FirstHalfPi { theta: 0.0 }) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn middle_pulse_minimum_discard_is_half() {
        assert!(
            (discarded(ImpairedCase::MiddlePi { theta_out: PI, theta_in: 0.0 }) - 0.5).abs()
                < 1e-15
        );
        assert!(discarded(ImpairedCase::MiddlePi { theta_out: 2.5, theta_in: 0.2 }) > 0.5);
    }

    #[test]
    fn last_pulse_visibility_and_offset() {
        match impaired_pulse_prediction(ImpairedCase::LastHalfPi { theta: PI / 2.0 }) {
            ImpairedPrediction::Fringe { visibility, offset } => {
                assert!((visibility - 1.0).abs() < 1e-15);
                assert!(offset.abs() < 1e-15);
            }
            _ => panic!("expected a fringe"),
        }
        match impaired_pulse_prediction(ImpairedCase::LastHalfPi { theta: PI / 3.0 }) {
            ImpairedPrediction::Fringe { visibility, offset } => {
                assert!((visibility - 0.75).abs() < 1e-12);
                assert!((offset + 0.25).abs() < 1e-12);
            }
            _ => panic!("expected a fringe"),
        }
    }
}
