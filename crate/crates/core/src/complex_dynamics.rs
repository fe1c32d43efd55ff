//! Classical motion in the complex coordinate plane.
//!
//! Writing q = x + iy and continuing a real barrier analytically, Newton's
//! equation q'' = -dV/dq splits into two coupled real equations driven by the
//! real and imaginary parts of the complex force. For static potentials the
//! complex energy v^2/2 + V(q) is conserved, which makes its real and
//! imaginary parts ([`energy_split`]) sharp diagnostics for the integrator.
//!
//! Orbits fall into three geometric classes: (a) orbits that cross the
//! imaginary axis and connect the two sides of the barrier, (b) orbits
//! confined to one side, and (c) zero-real-velocity orbits with real energy
//! that climb off the axis and merge onto the barrier's burning lines, the
//! asymptotic rays that all class-(c) orbits share. [`emit_orbit_atlas`]
//! integrates a batch of initial conditions and attaches those lines.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::CoreError;
use crate::integrate::Driver;
use crate::potentials::{burning_line_angle, turning_point, Potential, PotentialSpec};

/// Orbit termination: orbits either run out their time budget, leave the
/// domain |q| > 10^3 l, or come close enough to a pole of the continued
/// potential that further integration is meaningless.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitTermination {
    TimeExhausted,
    LeftDomain,
    PoleAbort,
}

/// Geometric orbit class; `Unclassified` covers starts that fit none of the
/// three patterns (for example large-|eps_im| orbits that happen not to cross).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitClass {
    A,
    B,
    C,
    Unclassified,
}

impl std::fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OrbitClass::A => "a",
            OrbitClass::B => "b",
            OrbitClass::C => "c",
            OrbitClass::Unclassified => "unclassified",
        };
        f.write_str(s)
    }
}

/// Instantaneous state of a complex orbit: position x + iy, velocity
/// vx + i vy, and the time it was recorded at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub t: f64,
}

impl ComplexState {
    pub fn new(x: f64, y: f64, vx: f64, vy: f64) -> Self {
        Self { x, y, vx, vy, t: 0.0 }
    }

    pub fn q(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn v(&self) -> Complex64 {
        Complex64::new(self.vx, self.vy)
    }
}

/// One integrated orbit: time-ordered samples (accepted integrator steps,
/// densified near imaginary-axis crossings so classification from samples is
/// reliable), the class, and why integration stopped.
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub samples: Vec<ComplexState>,
    pub classification: OrbitClass,
    pub terminal_reason: OrbitTermination,
}

/// One straight drawing primitive attached to an atlas: burning-line rays or
/// segments, and zero-length turning-point markers.
#[derive(Debug, Clone)]
pub struct AtlasLine {
    pub kind: String,
    pub label: String,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

/// A batch of integrated orbits plus the barrier's burning lines and
/// real-axis turning points at the reference energy V0/2. Per-orbit failures
/// stay in the batch as errors keyed by input index.
#[derive(Debug)]
pub struct OrbitAtlas {
    pub orbits: Vec<Result<OrbitRecord, CoreError>>,
    pub lines: Vec<AtlasLine>,
}

/// Real and imaginary parts of the complex energy v^2/2 + V(q) of a static
/// barrier: eps_re = (vx^2 - vy^2)/2 + r and eps_im = vx vy + j, with r and j
/// the real and imaginary parts of the continued potential.
///
/// Caller keeps the state off the pole set; at a pole the potential itself
/// is infinite and so is the returned energy.
pub fn energy_split(state: &ComplexState, spec: &PotentialSpec) -> (f64, f64) {
    let d = spec
        .eval_complex_with_exclusion(state.q(), 0.0, 0.0)
        .expect("zero exclusion radius admits every point");
    let eps_re = 0.5 * (state.vx * state.vx - state.vy * state.vy) + d.v.re;
    let eps_im = state.vx * state.vy + d.v.im;
    (eps_re, eps_im)
}

/// Integration ends once the orbit is this far (units of l) outside the
/// region the atlas cares about.
const ESCAPE_RADIUS_UNITS: f64 = 1e3;

/// Orbits are abandoned (PoleAbort) when they come within this distance of a
/// pole, in units of l. Wider than the evaluation exclusion radius so the
/// abort triggers before force evaluations degenerate.
const POLE_ABORT_UNITS: f64 = 1e-3;

/// Integrates one orbit of the complex-plane Newton equation from `initial`
/// for a duration `t_max`, with relative tolerance `tol` in [1e-12, 1e-4].
///
/// Samples are recorded at every accepted step. Termination is by time,
/// domain escape at |q| > 10^3 l, or pole approach; the record carries the
/// reason. Errors are reserved for invalid inputs, an initial state on the
/// pole set, and integrator step failure.
pub fn integrate_complex(
    spec: &PotentialSpec,
    initial: ComplexState,
    t_max: f64,
    tol: f64,
) -> Result<OrbitRecord, CoreError> {
    spec.validate()?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(CoreError::InvalidParameter {
            name: "t_max",
            message: format!("duration must be positive and finite, got {t_max}"),
        });
    }
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(CoreError::InvalidParameter {
            name: "tol",
            message: format!("tolerance must lie in [1e-12, 1e-4], got {tol}"),
        });
    }
    // The initial point must be evaluable; mid-run pole approaches terminate
    // gracefully instead.
    spec.eval_complex(initial.q(), initial.t)?;

    let escape = ESCAPE_RADIUS_UNITS * spec.l;
    let abort_dist = POLE_ABORT_UNITS;

    // The driver tolerance is held a notch below the requested one so the
    // documented conservation bound (10 tol V0) holds with headroom; the
    // stage evaluations use a zero exclusion radius because rejected trial
    // steps may probe arbitrarily close to a pole without harm.
    let rhs = |t: f64, y: &[f64; 4], dy: &mut [f64; 4]| {
        let d = spec
            .eval_complex_with_exclusion(Complex64::new(y[0], y[1]), t, 0.0)
            .expect("zero exclusion radius admits every point");
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = -d.dv.re;
        dy[3] = -d.dv.im;
    };
    let rtol = (0.1 * tol).max(1e-13);
    let atol = rtol * 1e-3 * spec.l;
    let mut driver = Driver::new(
        rhs,
        initial.t,
        [initial.x, initial.y, initial.vx, initial.vy],
        initial.t + t_max,
        rtol,
        atol,
    );

    let state_at = |t: f64, y: &[f64; 4]| ComplexState {
        x: y[0],
        y: y[1],
        vx: y[2],
        vy: y[3],
        t,
    };

    let mut samples = vec![initial];
    let mut terminal = OrbitTermination::TimeExhausted;
    while let Some(step) = driver.step()? {
        // If the endpoints hide an excursion across x = 0, keep interior
        // interpolants so classification from samples alone stays faithful.
        if step.y0[0] * step.y1[0] > 0.0 {
            let h = step.t1 - step.t0;
            let probes = [0.25, 0.5, 0.75].map(|th| step.eval(step.t0 + th * h));
            if probes.iter().any(|p| p[0] * step.y0[0] < 0.0) {
                for (th, p) in [0.25, 0.5, 0.75].iter().zip(probes.iter()) {
                    samples.push(state_at(step.t0 + th * h, p));
                }
            }
        }
        let end = state_at(step.t1, &step.y1);
        samples.push(end);

        let q = end.q();
        let mid = step.eval(0.5 * (step.t0 + step.t1));
        let near_pole = spec.pole_distance(q) < abort_dist
            || spec.pole_distance(Complex64::new(mid[0], mid[1])) < abort_dist;
        if near_pole {
            terminal = OrbitTermination::PoleAbort;
            break;
        }
        if q.norm() > escape {
            terminal = OrbitTermination::LeftDomain;
            break;
        }
    }

    let mut record = OrbitRecord {
        samples,
        classification: OrbitClass::Unclassified,
        terminal_reason: terminal,
    };
    record.classification = classify_orbit(&record, spec);
    Ok(record)
}

/// Classifies an orbit from its samples:
///
/// * class (a) if the real part of q changes sign anywhere,
/// * class (c) if the start has vx = 0 (within 1e-12) and eps_im = 0 (within
///   1e-9 V0),
/// * class (b) if |eps_im| < V(x_i) and the orbit never crosses; this keeps
///   real sub-barrier orbits (eps_im exactly 0) in class (b), where they
///   belong geometrically,
/// * otherwise unclassified.
///
/// Fewer than 10 samples cannot support a verdict and yield `Unclassified`.
pub fn classify_orbit(record: &OrbitRecord, spec: &PotentialSpec) -> OrbitClass {
    let samples = &record.samples;
    if samples.len() < 10 {
        return OrbitClass::Unclassified;
    }
    let crossed = samples
        .windows(2)
        .any(|w| w[0].x * w[1].x < 0.0 || w[1].x == 0.0)
        || samples[0].x == 0.0;
    if crossed {
        return OrbitClass::A;
    }
    let first = &samples[0];
    let (_, eps_im) = energy_split(first, spec);
    if first.vx.abs() <= 1e-12 && eps_im.abs() <= 1e-9 * spec.v0 {
        return OrbitClass::C;
    }
    let barrier_at_x0 = spec.eval(first.x, 0.0).v;
    if eps_im.abs() < barrier_at_x0 {
        return OrbitClass::B;
    }
    OrbitClass::Unclassified
}

/// Duration of the representative class-(c) run used to measure the burning
/// height of exponential-tail barriers, in units of l sqrt(m / V0).
const HEIGHT_PROBE_TIME_UNITS: f64 = 2000.0;

/// Measures where a representative class-(c) orbit settles for barriers whose
/// burning lines run parallel to the real axis. Returns the final |y|.
fn measured_burning_height(spec: &PotentialSpec, tol: f64) -> Option<f64> {
    let x_rep = 2.0 * spec.l;
    let v_rep = spec.eval(x_rep, 0.0).v;
    if v_rep <= 0.0 {
        return None;
    }
    let start = ComplexState::new(x_rep, 0.0, 0.0, (2.0 * v_rep).sqrt());
    let tau = spec.l * (crate::MASS / spec.v0).sqrt();
    let record =
        integrate_complex(spec, start, HEIGHT_PROBE_TIME_UNITS * tau, tol.min(1e-9)).ok()?;
    record.samples.last().map(|s| s.y.abs())
}

/// Integrates a batch of initial conditions concurrently, classifies each
/// orbit, and attaches the barrier's burning lines plus real-axis turning
/// points at the reference energy V0/2.
///
/// Burning lines come in two geometries: power-law tails give four rays from
/// the origin at angles +-phi and pi -+ phi with phi = pi / (2(k+1));
/// exponential-class tails give two horizontal lines at a height measured
/// from a representative class-(c) orbit. The parabolic barrier has neither.
pub fn emit_orbit_atlas(
    spec: &PotentialSpec,
    initial_conditions: &[ComplexState],
    t_max: f64,
    tol: f64,
) -> OrbitAtlas {
    let orbits: Vec<Result<OrbitRecord, CoreError>> = initial_conditions
        .par_iter()
        .map(|ic| integrate_complex(spec, *ic, t_max, tol))
        .collect();

    let extent = orbits
        .iter()
        .flatten()
        .flat_map(|r| r.samples.iter())
        .map(|s| s.q().norm())
        .fold(10.0 * spec.l, f64::max);

    let mut lines = Vec::new();
    match burning_line_angle(spec) {
        Some(phi) if phi > 0.0 => {
            let r0 = 2.0 * spec.l;
            let r1 = 1.1 * extent;
            let deg = phi.to_degrees();
            for (angle, label) in [
                (phi, format!("arg q = +{deg:.1} deg")),
                (-phi, format!("arg q = -{deg:.1} deg")),
                (std::f64::consts::PI - phi, format!("arg q = {:.1} deg", 180.0 - deg)),
                (std::f64::consts::PI + phi, format!("arg q = {:.1} deg", 180.0 + deg)),
            ] {
                lines.push(AtlasLine {
                    kind: "burning_line".to_string(),
                    label,
                    x0: r0 * angle.cos(),
                    y0: r0 * angle.sin(),
                    x1: r1 * angle.cos(),
                    y1: r1 * angle.sin(),
                });
            }
        }
        Some(_) => {
            if let Some(h) = measured_burning_height(spec, tol) {
                for sign in [1.0, -1.0] {
                    lines.push(AtlasLine {
                        kind: "burning_line".to_string(),
                        label: format!("y = {:+.4} l", sign * h / spec.l),
                        x0: -1.1 * extent,
                        y0: sign * h,
                        x1: 1.1 * extent,
                        y1: sign * h,
                    });
                }
            }
        }
        None => {}
    }

    if let Ok(q0) = turning_point(spec, 0.5 * spec.v0, 0.0) {
        for q in [q0, -q0] {
            lines.push(AtlasLine {
                kind: "turning_point".to_string(),
                label: "E = 0.5 V0".to_string(),
                x0: q,
                y0: 0.0,
                x1: q,
                y1: 0.0,
            });
        }
    }

    OrbitAtlas { orbits, lines }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::BarrierFamily;

    fn algebraic2() -> PotentialSpec {
        PotentialSpec {
            family: BarrierFamily::Algebraic { k: 2 },
            v0: 1.0,
            l: 1.0,
            drive: None,
        }
    }

    fn eckart() -> PotentialSpec {
        PotentialSpec {
            family: BarrierFamily::Eckart,
            v0: 1.0,
            l: 1.0,
            drive: None,
        }
    }

    /// vy for a zero-energy class-(c) start on the real axis.
    fn class_c_vy(spec: &PotentialSpec, x: f64) -> f64 {
        (2.0 * spec.eval(x, 0.0).v).sqrt()
    }

    #[test]
    fn far_field_motion_is_free() {
        let spec = algebraic2();
        let start = ComplexState::new(500.0, 0.0, -0.1, 0.0);
        let rec = integrate_complex(&spec, start, 100.0, 1e-9).unwrap();
        for s in &rec.samples {
            assert!((s.x - (500.0 - 0.1 * s.t)).abs() < 1e-4);
            assert!(s.y.abs() < 1e-4);
        }
    }

    #[test]
    fn static_energy_is_conserved() {
        let spec = eckart();
        let start = ComplexState::new(3.0, 0.4, -1.0, 0.3);
        let (e_re0, e_im0) = energy_split(&start, &spec);
        for tol in [1e-6, 1e-8, 1e-10] {
            let rec = integrate_complex(&spec, start, 50.0, tol).unwrap();
            let drift = rec
                .samples
                .iter()
                .map(|s| {
                    let (e_re, e_im) = energy_split(s, &spec);
                    (e_re - e_re0).abs().max((e_im - e_im0).abs())
                })
                .fold(0.0, f64::max);
            assert!(
                drift <= 10.0 * tol * spec.v0,
                "tol {tol}: energy drift {drift}"
            );
        }
    }

    #[test]
    fn forward_then_reversed_returns_home() {
        let spec = eckart();
        let start = ComplexState::new(3.0, 0.4, -1.0, 0.3);
        let tol = 1e-8;
        let out = integrate_complex(&spec, start, 20.0, tol).unwrap();
        let end = *out.samples.last().unwrap();
        let back_start = ComplexState {
            vx: -end.vx,
            vy: -end.vy,
            t: 0.0,
            ..end
        };
        let back = integrate_complex(&spec, back_start, 20.0, tol).unwrap();
        let home = back.samples.last().unwrap();
        let scale = (start.x * start.x
            + start.y * start.y
            + start.vx * start.vx
            + start.vy * start.vy)
            .sqrt();
        let err = ((home.x - start.x).powi(2)
            + (home.y - start.y).powi(2)
            + (home.vx + start.vx).powi(2)
            + (home.vy + start.vy).powi(2))
        .sqrt();
        assert!(err / scale < 100.0 * tol, "round trip error {err}");
    }

    #[test]
    fn real_axis_stays_closed() {
        let spec = eckart();
        let start = ComplexState::new(2.5, 0.0, -1.2, 0.0);
        let rec = integrate_complex(&spec, start, 30.0, 1e-9).unwrap();
        for s in &rec.samples {
            // j(x, 0) = 0 keeps the axis invariant; in IEEE arithmetic the
            // imaginary parts stay exactly +-0.
            assert!(s.y.abs() < 1e-12);
            assert!(s.vy.abs() < 1e-12);
        }
        assert_eq!(rec.classification, OrbitClass::B);
    }

    #[test]
    fn class_c_orbit_finds_the_asymptotic_ray() {
        let spec = algebraic2();
        let x0 = 10.0;
        let start = ComplexState::new(x0, 0.0, 0.0, class_c_vy(&spec, x0));
        let rec = integrate_complex(&spec, start, 5.5e4, 1e-9).unwrap();
        assert_eq!(rec.classification, OrbitClass::C);
        let target = 30.0f64;
        let mut past = 0;
        for s in &rec.samples {
            if s.q().norm() > 50.0 {
                past += 1;
                let angle = s.y.atan2(s.x).to_degrees();
                assert!(
                    (angle - target).abs() < 0.5,
                    "angle {angle} at |q| = {}",
                    s.q().norm()
                );
            }
        }
        assert!(past > 3, "orbit never reached |q| > 50");
    }

    #[test]
    fn energy_split_zero_energy_construction() {
        let spec = algebraic2();
        let x = 10.0;
        let s = ComplexState::new(x, 0.0, 0.0, class_c_vy(&spec, x));
        let (e_re, e_im) = energy_split(&s, &spec);
        assert!(e_re.abs() < 1e-15);
        assert!(e_im.abs() < 1e-15);
    }

    #[test]
    fn energy_split_sign_and_duplicate_formula() {
        use rand::{Rng, SeedableRng};
        let spec = eckart();
        // On the real axis eps_im reduces to vx vy, negative for incoming
        // states that rise into the upper half plane.
        let s = ComplexState::new(4.0, 0.0, -0.7, 0.2);
        let (_, e_im) = energy_split(&s, &spec);
        assert_eq!(e_im, -0.7 * 0.2);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let s = ComplexState::new(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-1.2..1.2),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let (e_re, e_im) = energy_split(&s, &spec);
            let v = spec.eval_complex_with_exclusion(s.q(), 0.0, 0.0).unwrap().v;
            assert!((e_re - (0.5 * (s.vx * s.vx - s.vy * s.vy) + v.re)).abs() < 1e-14);
            assert!((e_im - (s.vx * s.vy + v.im)).abs() < 1e-14);
        }
    }

    #[test]
    fn large_eps_im_orbit_crosses_and_is_class_a() {
        let spec = algebraic2();
        // |eps_im| = 0.05 far exceeds V(10) ~ 1e-4, so the orbit sails across.
        let start = ComplexState::new(10.0, 0.0, -0.5, 0.1);
        let rec = integrate_complex(&spec, start, 400.0, 1e-9).unwrap();
        assert_eq!(rec.classification, OrbitClass::A);
    }

    #[test]
    fn moderate_eps_im_orbit_stays_on_one_side() {
        let spec = algebraic2();
        // |eps_im| = 0.015 < V(2) = 0.04: confined to its side of the barrier.
        let start = ComplexState::new(2.0, 0.0, -0.15, 0.1);
        let rec = integrate_complex(&spec, start, 400.0, 1e-9).unwrap();
        assert!(rec.samples.iter().all(|s| s.x > 0.0));
        assert_eq!(rec.classification, OrbitClass::B);
    }

    #[test]
    fn orbit_aimed_at_a_pole_aborts() {
        let spec = eckart();
        // Straight up the imaginary axis into the pole at i pi / 2.
        let start = ComplexState::new(0.0, 1.0, 0.0, 1.0);
        let rec = integrate_complex(&spec, start, 10.0, 1e-9).unwrap();
        assert_eq!(rec.terminal_reason, OrbitTermination::PoleAbort);
        let last = rec.samples.last().unwrap();
        let pole = Complex64::new(0.0, std::f64::consts::FRAC_PI_2);
        assert!((last.q() - pole).norm() < 5e-3);
    }

    #[test]
    fn fast_outbound_orbit_leaves_the_domain() {
        let spec = algebraic2();
        let start = ComplexState::new(500.0, 0.0, 2.0, 0.0);
        let rec = integrate_complex(&spec, start, 500.0, 1e-8).unwrap();
        assert_eq!(rec.terminal_reason, OrbitTermination::LeftDomain);
        let last = rec.samples.last().unwrap();
        assert!(last.q().norm() > 1e3);
    }

    #[test]
    fn initial_state_on_pole_set_is_rejected() {
        let spec = algebraic2();
        let start = ComplexState::new(0.0, 1.0 - 1e-9, 0.0, 0.1);
        assert!(matches!(
            integrate_complex(&spec, start, 1.0, 1e-8),
            Err(CoreError::PoleProximity { .. })
        ));
    }

    #[test]
    fn atlas_draws_rays_markers_and_classifies() {
        let spec = algebraic2();
        let ics = vec![
            ComplexState::new(5.0, 0.0, 0.0, class_c_vy(&spec, 5.0)),
            ComplexState::new(5.0, 0.0, 0.0, -class_c_vy(&spec, 5.0)),
            ComplexState::new(10.0, 0.0, -0.5, 0.1),
            ComplexState::new(2.0, 0.0, -0.15, 0.1),
        ];
        let atlas = emit_orbit_atlas(&spec, &ics, 5.5e4, 1e-9);
        assert_eq!(atlas.orbits.len(), 4);
        let classes: Vec<OrbitClass> = atlas
            .orbits
            .iter()
            .map(|r| r.as_ref().unwrap().classification)
            .collect();
        assert_eq!(
            classes,
            vec![OrbitClass::C, OrbitClass::C, OrbitClass::A, OrbitClass::B]
        );

        let rays: Vec<&AtlasLine> = atlas
            .lines
            .iter()
            .filter(|l| l.kind == "burning_line")
            .collect();
        assert_eq!(rays.len(), 4);
        let mut angles: Vec<f64> = rays
            .iter()
            .map(|l| l.y1.atan2(l.x1).to_degrees())
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in angles.iter().zip([-150.0, -30.0, 30.0, 150.0]) {
            assert!((got - want).abs() < 1e-9, "ray at {got}, wanted {want}");
        }

        let markers: Vec<&AtlasLine> = atlas
            .lines
            .iter()
            .filter(|l| l.kind == "turning_point")
            .collect();
        assert_eq!(markers.len(), 2);
        // V0 / (1 + q^2)^2 = V0 / 2 at q^2 = sqrt(2) - 1
        let q0 = (2.0f64.sqrt() - 1.0).sqrt();
        for m in &markers {
            assert!((m.x0.abs() - q0).abs() < 1e-9);
            assert_eq!(m.y0, 0.0);
        }
    }

    #[test]
    fn eckart_burning_lines_run_parallel_to_the_axis() {
        let spec = eckart();
        let ics = vec![ComplexState::new(2.0, 0.0, 0.0, class_c_vy(&spec, 2.0))];
        let atlas = emit_orbit_atlas(&spec, &ics, 2000.0, 1e-9);
        let lines: Vec<&AtlasLine> = atlas
            .lines
            .iter()
            .filter(|l| l.kind == "burning_line")
            .collect();
        assert_eq!(lines.len(), 2);
        for l in &lines {
            assert_eq!(l.y0, l.y1, "line must be horizontal");
            // measured settling height of the representative orbit; it creeps
            // toward pi/2 as the orbit coasts out, so only a loose band holds
            assert!(
                (l.y0.abs() - std::f64::consts::FRAC_PI_2).abs() < 0.05,
                "height {}",
                l.y0
            );
        }
        assert!(lines.iter().any(|l| l.y0 > 0.0));
        assert!(lines.iter().any(|l| l.y0 < 0.0));
    }

    #[test]
    fn parabolic_atlas_has_no_burning_lines() {
        let spec = PotentialSpec {
            family: BarrierFamily::Parabolic,
            v0: 1.0,
            l: 1.0,
            drive: None,
        };
        let ics = vec![ComplexState::new(0.5, 0.0, 0.4, 0.0)];
        let atlas = emit_orbit_atlas(&spec, &ics, 5.0, 1e-8);
        assert!(atlas.lines.iter().all(|l| l.kind != "burning_line"));
        assert_eq!(
            atlas.lines.iter().filter(|l| l.kind == "turning_point").count(),
            2
        );
    }

    /// Neighbouring starts with slightly detuned energy peel away from the
    /// burning line: the separation grows by orders of magnitude while a pure
    /// shift of the start along the axis would contract kinematically.
    #[test]
    fn burning_line_neighborhood_is_unstable() {
        let spec = algebraic2();
        let x0 = 20.0;
        let vy = class_c_vy(&spec, x0);
        let sep_at = |t: f64| {
            let a = integrate_complex(&spec, ComplexState::new(x0, 0.0, 0.0, vy), t, 1e-10)
                .unwrap();
            let b = integrate_complex(
                &spec,
                ComplexState::new(x0, 0.0, 0.0, vy * (1.0 + 1e-8)),
                t,
                1e-10,
            )
            .unwrap();
            let sa = a.samples.last().unwrap();
            let sb = b.samples.last().unwrap();
            (sa.q() - sb.q()).norm()
        };
        let early = sep_at(1.5e4);
        let mid = sep_at(6.0e4);
        let late = sep_at(1.2e5);
        assert!(early < mid && mid < late, "{early} {mid} {late}");
        assert!(late / early > 15.0, "growth {}", late / early);
        assert!(late > 1e-5, "late separation {late}");
    }
}
