//! Analytic barrier families, their continuation into the complex coordinate
//! plane, and classical turning points.
//!
//! All families are even in q, positive at the top, and decay (or, for the
//! parabolic barrier, fall off quadratically) away from it. An optional
//! monochromatic drive adds the dipole term `q * A * sin(omega * t)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::numerics::{brent_root, golden_max};

/// Distance (in units of l) below which complex evaluation refuses to
/// approach a pole of the analytic continuation.
pub const DEFAULT_POLE_EXCLUSION: f64 = 1e-6;

/// Barrier shape. The algebraic family's exponent k controls how fast the
/// barrier decays and therefore where its zero-energy complex orbits focus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BarrierFamily {
    /// V0 / cosh^2(q / l)
    Eckart,
    /// V0 / (1 + (q/l)^2)^k with integer k >= 2
    Algebraic { k: u32 },
    /// V0 * exp(-q^2 / l^2)
    Gaussian,
    /// V0 * (1 - q^2 / l^2), unbounded below
    Parabolic,
}

/// Monochromatic dipole drive `q * a * sin(omega * t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    /// Force amplitude (may carry either sign).
    pub a: f64,
    /// Angular frequency, >= 0.
    pub omega: f64,
}

/// A concrete barrier: family, height V0 > 0, length scale l > 0, and an
/// optional drive. The particle mass is fixed at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub family: BarrierFamily,
    pub v0: f64,
    pub l: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<Drive>,
}

/// Value and first two derivatives of the complex-continued potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexValueAndDerivs {
    pub v: Complex64,
    pub dv: Complex64,
    pub d2v: Complex64,
}

/// Value and first two derivatives on the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealValueAndDerivs {
    pub v: f64,
    pub dv: f64,
    pub d2v: f64,
}

/// Real-axis potential interface used by the trajectory propagators. The
/// barrier families implement it; test potentials (free, harmonic) can too.
pub trait Potential: Sync {
    fn eval(&self, q: f64, t: f64) -> RealValueAndDerivs;

    fn v(&self, q: f64, t: f64) -> f64 {
        self.eval(q, t).v
    }
}

impl PotentialSpec {
    /// Checks the documented parameter ranges.
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return Err(CoreError::InvalidParameter {
                name: "v0",
                message: format!("barrier height must be positive and finite, got {}", self.v0),
            });
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(CoreError::InvalidParameter {
                name: "l",
                message: format!("length scale must be positive and finite, got {}", self.l),
            });
        }
        if let BarrierFamily::Algebraic { k } = self.family {
            if k < 2 {
                return Err(CoreError::InvalidParameter {
                    name: "k",
                    message: format!("algebraic exponent must be an integer >= 2, got {k}"),
                });
            }
        }
        if let Some(d) = self.drive {
            if !(d.omega >= 0.0 && d.omega.is_finite() && d.a.is_finite()) {
                return Err(CoreError::InvalidParameter {
                    name: "drive",
                    message: format!("need finite a and omega >= 0, got a = {}, omega = {}", d.a, d.omega),
                });
            }
        }
        Ok(())
    }

    fn drive_at(&self, t: f64) -> f64 {
        match self.drive {
            Some(d) if d.a != 0.0 => d.a * (d.omega * t).sin(),
            _ => 0.0,
        }
    }

    /// Distance from `q` to the nearest pole of the analytic continuation, in
    /// units of l. Entire families return infinity.
    pub fn pole_distance(&self, q: Complex64) -> f64 {
        let x = q.re / self.l;
        let y = q.im / self.l;
        match self.family {
            BarrierFamily::Eckart => {
                // poles of sech^2 at q = i * pi * l * (n + 1/2)
                let half_pi = std::f64::consts::FRAC_PI_2;
                let n = ((y - half_pi) / std::f64::consts::PI).round();
                let mut best = f64::INFINITY;
                for m in [n - 1.0, n, n + 1.0] {
                    let py = std::f64::consts::PI * m + half_pi;
                    best = best.min((x * x + (y - py) * (y - py)).sqrt());
                }
                best
            }
            BarrierFamily::Algebraic { .. } => {
                let d_plus = (x * x + (y - 1.0) * (y - 1.0)).sqrt();
                let d_minus = (x * x + (y + 1.0) * (y + 1.0)).sqrt();
                d_plus.min(d_minus)
            }
            BarrierFamily::Gaussian | BarrierFamily::Parabolic => f64::INFINITY,
        }
    }

    /// Complex-continued value and derivatives at `q`, refusing to evaluate
    /// within the pole exclusion radius.
    pub fn eval_complex(&self, q: Complex64, t: f64) -> Result<ComplexValueAndDerivs, CoreError> {
        self.eval_complex_with_exclusion(q, t, DEFAULT_POLE_EXCLUSION)
    }

    /// Same as [`eval_complex`](Self::eval_complex) with an explicit exclusion
    /// radius in units of l.
    pub fn eval_complex_with_exclusion(
        &self,
        q: Complex64,
        t: f64,
        exclusion: f64,
    ) -> Result<ComplexValueAndDerivs, CoreError> {
        if self.pole_distance(q) < exclusion {
            return Err(CoreError::PoleProximity {
                re: q.re,
                im: q.im,
                radius: exclusion * self.l,
            });
        }
        let u = q / self.l;
        let mut out = match self.family {
            BarrierFamily::Eckart => {
                let sech = u.cosh().finv();
                let tanh = u.tanh();
                let s2 = sech * sech;
                ComplexValueAndDerivs {
                    v: self.v0 * s2,
                    dv: -2.0 * self.v0 * s2 * tanh / self.l,
                    d2v: self.v0 * s2 * (4.0 * tanh * tanh - 2.0 * s2) / (self.l * self.l),
                }
            }
            BarrierFamily::Algebraic { k } => {
                let w = Complex64::new(1.0, 0.0) + u * u;
                let kf = f64::from(k);
                let wk1 = w.powu(k + 1).finv();
                let wk = wk1 * w;
                ComplexValueAndDerivs {
                    v: self.v0 * wk,
                    dv: -2.0 * kf * self.v0 * u * wk1 / self.l,
                    d2v: self.v0 * (4.0 * kf * (kf + 1.0) * (u * u) * (wk1 / w) - 2.0 * kf * wk1)
                        / (self.l * self.l),
                }
            }
            BarrierFamily::Gaussian => {
                let g = (-u * u).exp();
                ComplexValueAndDerivs {
                    v: self.v0 * g,
                    dv: -2.0 * self.v0 * u * g / self.l,
                    d2v: self.v0 * g * (4.0 * u * u - 2.0) / (self.l * self.l),
                }
            }
            BarrierFamily::Parabolic => ComplexValueAndDerivs {
                v: self.v0 * (Complex64::new(1.0, 0.0) - u * u),
                dv: -2.0 * self.v0 * u / self.l,
                d2v: Complex64::new(-2.0 * self.v0 / (self.l * self.l), 0.0),
            },
        };
        let s = self.drive_at(t);
        if s != 0.0 {
            out.v += q * s;
            out.dv += s;
        }
        Ok(out)
    }

    /// Position and height of the (local) barrier maximum of the potential
    /// frozen at time `t`. Static barriers peak at q = 0 with height V0; a
    /// drive tilts the top slightly.
    pub fn barrier_top(&self, t: f64) -> Result<(f64, f64), CoreError> {
        let s = self.drive_at(t);
        if s == 0.0 {
            return Ok((0.0, self.v0));
        }
        let span = 5.0 * self.l;
        let tilted = |q: f64| self.eval(q, t).v;
        let (q_top, v_top) = golden_max(tilted, -span, span, 1e-13);
        if q_top.abs() > 0.98 * span {
            return Err(CoreError::NonBracketable {
                what: "barrier top of the tilted potential",
                lo: -span,
                hi: span,
            });
        }
        Ok((q_top, v_top))
    }
}

impl Potential for PotentialSpec {
    fn eval(&self, q: f64, t: f64) -> RealValueAndDerivs {
        let u = q / self.l;
        let mut out = match self.family {
            BarrierFamily::Eckart => {
                let sech = 1.0 / u.cosh();
                let tanh = u.tanh();
                let s2 = sech * sech;
                RealValueAndDerivs {
                    v: self.v0 * s2,
                    dv: -2.0 * self.v0 * s2 * tanh / self.l,
                    d2v: self.v0 * s2 * (4.0 * tanh * tanh - 2.0 * s2) / (self.l * self.l),
                }
            }
            BarrierFamily::Algebraic { k } => {
                let w = 1.0 + u * u;
                let kf = f64::from(k);
                let wk1 = 1.0 / w.powi(k as i32 + 1);
                let wk = wk1 * w;
                RealValueAndDerivs {
                    v: self.v0 * wk,
                    dv: -2.0 * kf * self.v0 * u * wk1 / self.l,
                    d2v: self.v0 * (4.0 * kf * (kf + 1.0) * u * u * (wk1 / w) - 2.0 * kf * wk1)
                        / (self.l * self.l),
                }
            }
            BarrierFamily::Gaussian => {
                let g = (-u * u).exp();
                RealValueAndDerivs {
                    v: self.v0 * g,
                    dv: -2.0 * self.v0 * u * g / self.l,
                    d2v: self.v0 * g * (4.0 * u * u - 2.0) / (self.l * self.l),
                }
            }
            BarrierFamily::Parabolic => RealValueAndDerivs {
                v: self.v0 * (1.0 - u * u),
                dv: -2.0 * self.v0 * u / self.l,
                d2v: -2.0 * self.v0 / (self.l * self.l),
            },
        };
        let s = self.drive_at(t);
        if s != 0.0 {
            out.v += q * s;
            out.dv += s;
        }
        out
    }
}

/// Angle (radians, measured from the positive real axis) along which the
/// zero-energy complex orbits of the barrier focus at large |q|.
///
/// Power-law tails focus at pi / (2 (k + 1)); faster-than-power decay pushes
/// the angle to zero (orbits run parallel to the real axis); the parabolic
/// barrier has no asymptotic free region at all, so no angle exists.
pub fn burning_line_angle(spec: &PotentialSpec) -> Option<f64> {
    match spec.family {
        BarrierFamily::Algebraic { k } => {
            Some(std::f64::consts::PI / (2.0 * (f64::from(k) + 1.0)))
        }
        BarrierFamily::Eckart | BarrierFamily::Gaussian => Some(0.0),
        BarrierFamily::Parabolic => None,
    }
}

const ESCAPE_RADIUS_UNITS: f64 = 1e3;

/// Outward-walking bracket search from the barrier top; returns the first
/// interval on the chosen side where the frozen potential crosses `e`.
fn bracket_crossing(
    spec: &PotentialSpec,
    e: f64,
    t: f64,
    q_top: f64,
    side: f64,
) -> Result<(f64, f64), CoreError> {
    let mut step = 0.25 * spec.l;
    let mut inner = q_top;
    let escape = ESCAPE_RADIUS_UNITS * spec.l;
    loop {
        let outer = inner + side * step;
        if (outer - q_top).abs() > escape {
            return Err(CoreError::NonBracketable {
                what: "turning point of the frozen potential",
                lo: q_top.min(outer),
                hi: q_top.max(outer),
            });
        }
        if spec.eval(outer, t).v < e {
            return Ok((inner, outer));
        }
        inner = outer;
        step *= 1.5;
    }
}

fn turning_point_on_side(spec: &PotentialSpec, e: f64, t: f64, side: f64) -> Result<f64, CoreError> {
    spec.validate()?;
    let (q_top, v_top) = spec.barrier_top(t)?;
    if e >= v_top {
        return Err(CoreError::NoTurningPoint {
            energy: e,
            top: v_top,
        });
    }
    let (inner, outer) = bracket_crossing(spec, e, t, q_top, side)?;
    brent_root(
        |q| spec.eval(q, t).v - e,
        inner,
        outer,
        1e-12,
        "turning point",
    )
}

/// Classical turning point on the right flank of the barrier frozen at time
/// `t`: the innermost q > q_top with V(q, t) = E.
pub fn turning_point(spec: &PotentialSpec, e: f64, t: f64) -> Result<f64, CoreError> {
    turning_point_on_side(spec, e, t, 1.0)
}

/// Left-flank counterpart of [`turning_point`]. For static barriers it equals
/// the mirrored right turning point; with a drive the tilt breaks the
/// symmetry and the root is solved on its own.
pub fn turning_point_left(spec: &PotentialSpec, e: f64, t: f64) -> Result<f64, CoreError> {
    turning_point_on_side(spec, e, t, -1.0)
}
