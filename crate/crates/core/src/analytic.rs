//! Closed forms for the single-qubit Bloch sphere and the two-qubit Schmidt
//! family `|ψ(θ,φ)⟩ = cosθ|00⟩ + e^{iφ} sinθ|11⟩`.
//!
//! On the Schmidt family, with `L(θ) = ln cot θ`:
//!
//! | quantity            | closed form                      |
//! |---------------------|----------------------------------|
//! | `E(θ)`              | `−c² ln c² − s² ln s²`           |
//! | `dE/dθ`             | `4 s c L`                        |
//! | `Tr W = div ξ`      | `1 / (4 s² c² L²)`               |
//! | `ω(e)`              | `2π / |L|`                       |
//! | `S_geo`             | `ln 2π − ln |L|`                 |
//!
//! The canonical Schmidt domain is `θ ∈ (0, π/4]`; the curvature quantities are
//! singular at both ends and return [`Error::Singular`] there.

use std::f64::consts::{FRAC_PI_4, LN_2, PI, TAU};

use num_complex::Complex64;

use crate::chart::Chart;
use crate::state_space::PureState;
use crate::{Error, Result};

/// `(θ, φ) ↦ cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩` on `θ ∈ (0, π)`.
#[derive(Debug, Clone)]
pub struct BlochChart {
    domain: [(f64, f64); 2],
}

pub fn bloch_chart() -> BlochChart {
    BlochChart {
        domain: [(0.0, PI), (f64::NEG_INFINITY, f64::INFINITY)],
    }
}

impl Chart for BlochChart {
    fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    fn eval(&self, x: &[f64]) -> PureState {
        let (theta, phi) = (x[0], x[1]);
        PureState::normalize(vec![
            Complex64::new((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ])
        .expect("Bloch state has unit norm")
    }
}

/// The height function `f(θ, φ) = cos θ` on the Bloch chart.
pub fn bloch_height(x: &[f64]) -> f64 {
    x[0].cos()
}

/// `div ξ` for `f = cos θ`; identically zero away from the poles.
pub fn bloch_divergence_f_costheta(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::OutOfDomain {
            coord: 0,
            value: theta,
            step: 0.0,
        });
    }
    Ok(0.0)
}

/// `(θ, φ) ↦ cosθ|00⟩ + e^{iφ} sinθ|11⟩`.
///
/// The chart domain is `θ ∈ (0, π/2)`, wide enough for finite-difference
/// stencils around `π/4`; the canonical Schmidt labeling uses `(0, π/4]`.
#[derive(Debug, Clone)]
pub struct SchmidtChart {
    domain: [(f64, f64); 2],
}

pub fn schmidt_chart() -> SchmidtChart {
    SchmidtChart {
        domain: [(0.0, PI / 2.0), (f64::NEG_INFINITY, f64::INFINITY)],
    }
}

impl Chart for SchmidtChart {
    fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    fn eval(&self, x: &[f64]) -> PureState {
        TwoQubitSchmidtPoint {
            theta: x[0],
            phi: x[1],
        }
        .state()
    }
}

/// Point of the Schmidt family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitSchmidtPoint {
    pub theta: f64,
    pub phi: f64,
}

impl TwoQubitSchmidtPoint {
    /// Point in canonical labeling: `θ ∈ (0, π/4]`, `φ` wrapped to `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= FRAC_PI_4) {
            return Err(Error::OutOfRange {
                value: theta,
                lo: 0.0,
                hi: FRAC_PI_4,
            });
        }
        Ok(Self {
            theta,
            phi: phi.rem_euclid(TAU),
        })
    }

    pub fn state(&self) -> PureState {
        let zero = Complex64::new(0.0, 0.0);
        PureState::normalize(vec![
            Complex64::new(self.theta.cos(), 0.0),
            zero,
            zero,
            Complex64::from_polar(self.theta.sin(), self.phi),
        ])
        .expect("Schmidt state has unit norm")
    }
}

fn xlogx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// `E(θ) = −cos²θ ln cos²θ − sin²θ ln sin²θ`, the binary entropy of `cos²θ`.
///
/// Increasing on `[0, π/4]` from 0 to `ln 2`. The formula is symmetric under
/// `θ ↔ π/2 − θ` and is evaluated as written for any `θ`.
pub fn e_of_theta(theta: f64) -> f64 {
    let c2 = theta.cos().powi(2);
    let s2 = theta.sin().powi(2);
    -(xlogx(c2) + xlogx(s2))
}

/// `dE/dθ = 4 sinθ cosθ ln cot θ`.
pub fn de_dtheta(theta: f64) -> f64 {
    4.0 * theta.sin() * theta.cos() * log_cot(theta)
}

fn log_cot(theta: f64) -> f64 {
    (theta.cos() / theta.sin()).ln()
}

/// `ln cot θ` on the open Schmidt interval, where it is strictly positive.
fn interior_log_cot(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < FRAC_PI_4) {
        return Err(Error::Singular(theta));
    }
    let l = log_cot(theta);
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Singular(theta));
    }
    Ok(l)
}

/// Weingarten trace `Tr W = 1/(4 sin²θ cos²θ ln² cot θ)` of the level set
/// `E = E(θ)`.
pub fn trace_w(theta: f64) -> Result<f64> {
    let l = interior_log_cot(theta)?;
    let sc = theta.sin() * theta.cos();
    Ok(1.0 / (4.0 * sc * sc * l * l))
}

/// Density of states of the reduced family, `ω = 2π/|ln cot θ|`.
pub fn omega_reduced(theta: f64) -> Result<f64> {
    Ok(TAU / interior_log_cot(theta)?)
}

/// `S_geo = ln 2π − ln |ln cot θ|`.
pub fn s_geo_reduced(theta: f64) -> Result<f64> {
    Ok(TAU.ln() - interior_log_cot(theta)?.ln())
}

/// `∂S_geo/∂e` by the chain rule, `(dS_geo/dθ)/(dE/dθ)`, with
/// `dS_geo/dθ = 1/(sinθ cosθ ln cot θ)`.
pub fn ds_geo_de(theta: f64) -> Result<f64> {
    let l = interior_log_cot(theta)?;
    let sc = theta.sin() * theta.cos();
    let ds_dtheta = 1.0 / (sc * l);
    Ok(ds_dtheta / (4.0 * sc * l))
}

/// Inverse of [`e_of_theta`] on `[0, π/4]` by bisection.
///
/// `dE/dθ` vanishes at `π/4`, so Newton iteration is not used.
pub fn theta_of_e(e: f64) -> Result<f64> {
    if !(e >= 0.0 && e <= LN_2) {
        return Err(Error::OutOfRange {
            value: e,
            lo: 0.0,
            hi: LN_2,
        });
    }
    if e == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, FRAC_PI_4);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if e_of_theta(mid) < e {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
