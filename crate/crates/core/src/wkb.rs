//! Short actions, tunnel factors, and the uniform WKB transmission reference.
//!
//! The short action W(x', x) = int sqrt(2m [E - V(q)]) dq is real on
//! classically allowed segments and purely imaginary under the barrier, where
//! the integrand is continued as i sqrt(2m [V - E]). Its magnitude between
//! the two turning points sets the tunnel factor T = exp(-|W| / hbar), and
//! the Kemble form 1 / (1 + exp(2|W| / hbar)) gives the uniform WKB
//! transmission, continued above the top with the parabolic-barrier formula.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::potentials::{turning_point, turning_point_left, Potential, PotentialSpec};
use crate::quadrature::integrate_sqrt_endpoints;
use crate::MASS;

/// A short-action value: the (complex) action, the energy and segment it was
/// computed for, and a conservative quadrature error estimate on |w|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionValue {
    pub w: Complex64,
    pub e: f64,
    pub q_from: f64,
    pub q_to: f64,
    pub err: f64,
}

/// Number of interior probes used to decide whether a segment is classically
/// allowed, forbidden, or illegally mixed.
const SEGMENT_PROBES: usize = 129;

#[derive(PartialEq)]
enum SegmentKind {
    Allowed,
    Forbidden,
}

/// Decides the character of (x_from, x_to) at energy `e`, tolerating the
/// integrable vanishing of E - V at the endpoints (turning points) but
/// rejecting segments whose interior crosses one.
fn segment_kind(
    spec: &PotentialSpec,
    e: f64,
    a: f64,
    b: f64,
    t: f64,
) -> Result<SegmentKind, CoreError> {
    let band = 1e-12 * spec.v0.max(e.abs());
    let mut above = false;
    let mut below = false;
    for i in 0..SEGMENT_PROBES {
        let q = a + (b - a) * (i as f64 + 0.5) / SEGMENT_PROBES as f64;
        let s = e - spec.eval(q, t).v;
        above |= s > band;
        below |= s < -band;
    }
    if above && below {
        return Err(CoreError::MixedSegment {
            from: a,
            to: b,
            energy: e,
        });
    }
    // A segment with E = V throughout (only the degenerate top) integrates
    // to zero either way; call it forbidden for definiteness.
    Ok(if above {
        SegmentKind::Allowed
    } else {
        SegmentKind::Forbidden
    })
}

/// Short action over a single-character segment of the potential frozen at
/// time `t`, to relative quadrature tolerance `rel`.
///
/// Returns a real action on allowed segments and i |W| on forbidden ones
/// (for x_from < x_to; swapping the limits flips the sign). Errors with
/// MixedSegment when the interior crosses a turning point; split there first.
pub fn short_action_at(
    spec: &PotentialSpec,
    e: f64,
    x_from: f64,
    x_to: f64,
    t: f64,
    rel: f64,
) -> Result<ActionValue, CoreError> {
    spec.validate()?;
    if x_from == x_to {
        return Ok(ActionValue {
            w: Complex64::new(0.0, 0.0),
            e,
            q_from: x_from,
            q_to: x_to,
            err: 0.0,
        });
    }
    let (a, b, sign) = if x_from < x_to {
        (x_from, x_to, 1.0)
    } else {
        (x_to, x_from, -1.0)
    };
    let kind = segment_kind(spec, e, a, b, t)?;
    let magnitude = |q: f64| {
        let gap = match kind {
            SegmentKind::Allowed => e - spec.eval(q, t).v,
            SegmentKind::Forbidden => spec.eval(q, t).v - e,
        };
        (2.0 * MASS * gap.max(0.0)).sqrt()
    };
    let fine = integrate_sqrt_endpoints(magnitude, a, b, rel);
    let coarse = integrate_sqrt_endpoints(magnitude, a, b, 8.0 * rel);
    let err = (fine - coarse).abs() + 2.0 * rel * fine.abs();
    let w = match kind {
        SegmentKind::Allowed => Complex64::new(sign * fine, 0.0),
        SegmentKind::Forbidden => Complex64::new(0.0, sign * fine),
    };
    Ok(ActionValue {
        w,
        e,
        q_from: x_from,
        q_to: x_to,
        err,
    })
}

/// [`short_action_at`] on the static potential (t = 0) at the default
/// relative tolerance 1e-9.
pub fn short_action(
    spec: &PotentialSpec,
    e: f64,
    x_from: f64,
    x_to: f64,
) -> Result<ActionValue, CoreError> {
    short_action_at(spec, e, x_from, x_to, 0.0, 1e-9)
}

/// Tunnel factor T = exp(-|W(q_l, q_r)| / hbar) between the turning points
/// of the potential frozen at time `t`. Propagates NoTurningPoint for
/// energies at or above the frozen barrier top.
pub fn tunnel_factor_frozen(
    spec: &PotentialSpec,
    e: f64,
    hbar: f64,
    t: f64,
) -> Result<f64, CoreError> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(CoreError::InvalidParameter {
            name: "hbar",
            message: format!("hbar must be positive and finite, got {hbar}"),
        });
    }
    let q_r = turning_point(spec, e, t)?;
    let q_l = turning_point_left(spec, e, t)?;
    let action = short_action_at(spec, e, q_l, q_r, t, 1e-9)?;
    Ok((-action.w.norm() / hbar).exp())
}

/// Tunnel factor on the static barrier (the drive vanishes at t = 0).
pub fn tunnel_factor(spec: &PotentialSpec, e: f64, hbar: f64) -> Result<f64, CoreError> {
    tunnel_factor_frozen(spec, e, hbar, 0.0)
}

/// Uniform WKB transmission through the static barrier.
///
/// Below the top this is the Kemble formula P = 1 / (1 + exp(2|W| / hbar));
/// above it the parabolic-top continuation P = 1 / (1 + exp(-2 pi (E - V0) /
/// (hbar w_b))) takes over, with w_b the barrier frequency from the curvature
/// at the top. The two branches agree (P = 1/2) at E = V0. Energies at or
/// below zero transmit nothing and return 0.
pub fn uniform_wkb_transmission(spec: &PotentialSpec, e: f64, hbar: f64) -> f64 {
    if e <= 0.0 {
        return 0.0;
    }
    let v_top = spec.v0;
    if e < v_top {
        let q_r = match turning_point(spec, e, 0.0) {
            Ok(q) => q,
            Err(_) => return 0.5,
        };
        let q_l = match turning_point_left(spec, e, 0.0) {
            Ok(q) => q,
            Err(_) => return 0.5,
        };
        let action = match short_action_at(spec, e, q_l, q_r, 0.0, 1e-9) {
            Ok(a) => a,
            Err(_) => return 0.5,
        };
        // 1 / (1 + e^x) through e^(-x) so large barriers underflow gracefully
        let x = 2.0 * action.w.norm() / hbar;
        let t = (-x).exp();
        t / (1.0 + t)
    } else {
        let curvature = spec.eval(0.0, 0.0).d2v;
        let omega_b = (curvature.abs() / MASS).sqrt();
        let z = 2.0 * std::f64::consts::PI * (e - v_top) / (hbar * omega_b);
        1.0 / (1.0 + (-z).exp())
    }
}
