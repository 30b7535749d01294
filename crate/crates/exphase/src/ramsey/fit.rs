//! Three-parameter least-squares fringe fit.

use nalgebra::{Matrix3, Vector3};

use super::RamseyError;

/// One recorded point of a fringe scan.
#[derive(Clone, Copy, Debug)]
pub struct FringePoint {
    pub phi: f64,
    pub parity: Option<f64>,
    pub postselect_prob: f64,
}

/// Fit of `parity(phi) = offset - visibility * cos(phi - phase)`.
#[derive(Clone, Copy, Debug)]
pub struct FringeFit {
    pub phase: f64,
    pub visibility: f64,
    pub offset: f64,
}

/// A recorded fringe together with its fit.
#[derive(Clone, Debug)]
pub struct FringeScan {
    pub points: Vec<FringePoint>,
    pub fit: FringeFit,
}

pub(super) fn fit_fringe(points: &[FringePoint]) -> Result<FringeFit, RamseyError> {
    // Linear model c0 + c1 cos(phi) + c2 sin(phi); normal equations are a
    // well-conditioned 3x3 solve for any grid covering a full period.
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    let mut used = 0;
    for p in points {
        let Some(parity) = p.parity else { continue };
        used += 1;
        let row = [1.0, p.phi.cos(), p.phi.sin()];
        for i in 0..3 {
            for j in 0..3 {
                ata[(i, j)] += row[i] * row[j];
            }
            atb[i] += row[i] * parity;
        }
    }
    if used < 8 {
        return Err(RamseyError::EmptyFringe);
    }
    let sol = ata
        .lu()
        .solve(&atb)
        .ok_or(RamseyError::DegenerateFit)?;
    let (c0, c1, c2) = (sol[0], sol[1], sol[2]);
    let visibility = c1.hypot(c2);
    if visibility < 1e-12 {
        return Err(RamseyError::DegenerateFit);
    }
    // parity = c0 + c1 cos + c2 sin = c0 - V cos(phi - phase)
    // with c1 = -V cos(phase), c2 = -V sin(phase).
    let phase = (-c2).atan2(-c1);
    Ok(FringeFit { phase, visibility, offset: c0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::linspace;

    #[test]
    fn recovers_synthetic_fringe() {
        let grid = linspace(0.0, 2.0 * std::f64::consts::PI * 31.0 / 32.0, 32);
        let points: Vec<FringePoint> = grid
            .iter()
            .map(|&phi| FringePoint {
                phi,
                parity: Some(0.125 - 0.8 * (phi - 2.3).cos()),
                postselect_prob: 0.5,
            })
            .collect();
        let fit = fit_fringe(&points).unwrap();
        assert!((fit.phase - 2.3).abs() < 1e-10);
        assert!((fit.visibility - 0.8).abs() < 1e-10);
        assert!((fit.offset - 0.125).abs() < 1e-10);
    }

    #[test]
    fn flat_signal_is_degenerate() {
        let grid = linspace(0.0, 2.0 * std::f64::consts::PI, 16);
        let points: Vec<FringePoint> = grid
            .iter()
            .map(|&phi| FringePoint { phi, parity: Some(0.25), postselect_prob: 0.5 })
            .collect();
        assert!(matches!(fit_fringe(&points), Err(RamseyError::DegenerateFit)));
    }
}
