//! Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince pair) with a quartic
//! dense-output interpolant.
//!
//! The driver yields every accepted step together with its interpolation
//! coefficients, so callers can sample trajectories at arbitrary times,
//! bisect for events (momentum sign changes), and track prefactor branches
//! without re-integrating. Integration direction follows the sign of
//! `t_end - t0`; all tolerances are per-component with the usual
//! `atol + rtol * |y|` scaling.

use crate::error::CoreError;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];

/// Fifth-order minus fourth-order weights, used for the error estimate.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Dense-output weights for the quartic interpolant.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted integrator step with its dense-output polynomial.
#[derive(Debug, Clone)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    /// Evaluates the interpolant at `t`, which should lie within [t0, t1]
    /// (the polynomial extrapolates smoothly but with no error control).
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let theta = if h == 0.0 { 0.0 } else { (t - self.t0) / h };
        let th1 = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + th1 * (self.rcont[2][i] + theta * (self.rcont[3][i] + th1 * self.rcont[4][i])));
        }
        y
    }
}

/// Streaming adaptive driver. Construct once per trajectory and pull accepted
/// steps until it reports completion.
pub struct Driver<const N: usize, F> {
    f: F,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    t_end: f64,
    h: f64,
    dir: f64,
    rtol: f64,
    atol: f64,
    h_max: f64,
    steps: usize,
    max_steps: usize,
    done: bool,
}

impl<const N: usize, F> Driver<N, F>
where
    F: FnMut(f64, &[f64; N], &mut [f64; N]),
{
    pub fn new(mut f: F, t0: f64, y0: [f64; N], t_end: f64, rtol: f64, atol: f64) -> Self {
        let dir = if t_end >= t0 { 1.0 } else { -1.0 };
        let span = (t_end - t0).abs();
        let mut k1 = [0.0; N];
        f(t0, &y0, &mut k1);
        // Conservative first step: the controller converges to the right
        // scale within a couple of steps, and a deterministic start matters
        // more here than saving two rejections.
        let h0 = (span * 1e-4).max(1e-12);
        Self {
            f,
            t: t0,
            y: y0,
            k1,
            t_end,
            h: dir * h0,
            dir,
            rtol,
            atol,
            h_max: span,
            steps: 0,
            max_steps: 4_000_000,
            done: span == 0.0,
        }
    }

    /// Caps the step size (used to keep slow external driving resolved and
    /// event brackets tight).
    pub fn set_h_max(&mut self, h_max: f64) {
        self.h_max = h_max.abs().max(1e-12);
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Advances by one accepted step; returns `None` once `t_end` is reached.
    pub fn step(&mut self) -> Result<Option<Step<N>>, CoreError> {
        if self.done {
            return Ok(None);
        }
        let mut k = [[0.0; N]; 7];
        k[0] = self.k1;
        loop {
            self.steps += 1;
            if self.steps > self.max_steps {
                return Err(CoreError::StepFailure {
                    t: self.t,
                    reason: "step budget exhausted",
                });
            }
            let mut h = self.h.clamp(-self.h_max, self.h_max);
            // Don't overshoot the endpoint; stretch slightly instead of
            // leaving a sliver that would force a denormal-sized final step.
            let mut final_step = false;
            if self.dir * (self.t + 1.01 * h - self.t_end) > 0.0 {
                h = self.t_end - self.t;
                final_step = true;
            }
            if h.abs() < 1e-14 * self.t.abs().max(1.0) {
                return Err(CoreError::StepFailure {
                    t: self.t,
                    reason: "step size underflow",
                });
            }

            let stages: [&[f64]; 6] = [&A2, &A3, &A4, &A5, &A6, &A7];
            let mut y_stage = [0.0; N];
            for (s, a_row) in stages.iter().enumerate() {
                for i in 0..N {
                    let mut acc = 0.0;
                    for (j, aij) in a_row.iter().enumerate() {
                        acc += aij * k[j][i];
                    }
                    y_stage[i] = self.y[i] + h * acc;
                }
                (self.f)(self.t + C[s + 1] * h, &y_stage, &mut k[s + 1]);
            }
            let y1 = y_stage; // the 7th stage point is the 5th-order solution (FSAL)

            let mut err_sq = 0.0;
            for i in 0..N {
                let mut e = 0.0;
                for j in 0..7 {
                    e += E[j] * k[j][i];
                }
                e *= h;
                let sc = self.atol + self.rtol * self.y[i].abs().max(y1[i].abs());
                let r = e / sc;
                err_sq += r * r;
            }
            let err = (err_sq / N as f64).sqrt();

            if !err.is_finite() {
                self.h = 0.1 * h;
                continue;
            }
            if err <= 1.0 {
                let mut rcont = [[0.0; N]; 5];
                for i in 0..N {
                    let dy = y1[i] - self.y[i];
                    let bspl = h * k[0][i] - dy;
                    rcont[0][i] = self.y[i];
                    rcont[1][i] = dy;
                    rcont[2][i] = bspl;
                    rcont[3][i] = dy - h * k[6][i] - bspl;
                    let mut d = 0.0;
                    for j in 0..7 {
                        d += D[j] * k[j][i];
                    }
                    rcont[4][i] = h * d;
                }
                let t1 = if final_step { self.t_end } else { self.t + h };
                let step = Step {
                    t0: self.t,
                    t1,
                    y0: self.y,
                    y1,
                    rcont,
                };
                self.t = t1;
                self.y = y1;
                self.k1 = k[6];
                let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
                self.h = h * factor;
                if final_step || self.dir * (self.t - self.t_end) >= 0.0 {
                    self.done = true;
                }
                return Ok(Some(step));
            }
            let factor = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            self.h = h * factor;
        }
    }
}

/// Integrates to `t_end` discarding intermediate structure; returns the final
/// state. Convenience for tests and scalar pushes.
pub fn integrate_to<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    rtol: f64,
    atol: f64,
) -> Result<[f64; N], CoreError>
where
    F: FnMut(f64, &[f64; N], &mut [f64; N]),
{
    let mut driver = Driver::new(f, t0, y0, t_end, rtol, atol);
    while driver.step()?.is_some() {}
    Ok(*driver.y())
}
