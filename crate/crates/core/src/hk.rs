//! The Herman-Kluk frozen-Gaussian propagator.
//!
//! The correlation ⟨ψ_f| exp(-iHt/ħ) |ψ_i⟩ is estimated as a Monte Carlo
//! average over phase-space points (q, p) drawn around the initial packet:
//! each point launches a real classical trajectory carrying its action S and
//! monodromy matrix, and contributes
//!
//! ```text
//! weight * <psi_f|g(p_t, q_t)> * R(t) * exp(i S / hbar) * <g(p, q)|psi_i>
//! ```
//!
//! with g the frozen coherent state of width gamma and R the fluctuation
//! prefactor, a square root whose branch must be followed continuously in
//! time. Everything here is deterministic for a fixed seed: samples are drawn
//! up front from a counter-based stream and summed in index order with
//! compensated accumulation, so results do not depend on the worker count.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rayon::prelude::*;

use crate::error::CoreError;
use crate::integrate::{Driver, Step};
use crate::numerics::{ComplexSum, CompensatedSum};
use crate::potentials::Potential;
use crate::spectra::CorrelationSeries;
use crate::MASS;

/// A normalized Gaussian wave packet exp(-γ(x-q)²/2 + i p (x-q)/ħ) with the
/// L²-normalizing prefactor (γ/π)^{1/4}.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaussianPacket {
    /// Inverse squared width, > 0.
    pub gamma: f64,
    /// Center position.
    pub q: f64,
    /// Center momentum.
    pub p: f64,
}

impl GaussianPacket {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(CoreError::InvalidParameter {
                name: "gamma",
                message: format!("packet width must be positive and finite, got {}", self.gamma),
            });
        }
        if !(self.q.is_finite() && self.p.is_finite()) {
            return Err(CoreError::InvalidParameter {
                name: "packet center",
                message: format!("center must be finite, got q = {}, p = {}", self.q, self.p),
            });
        }
        Ok(())
    }
}

/// Linearized flow (∂ final / ∂ initial) of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyMatrix {
    pub m_qq: f64,
    pub m_qp: f64,
    pub m_pq: f64,
    pub m_pp: f64,
}

impl MonodromyMatrix {
    pub fn identity() -> Self {
        Self {
            m_qq: 1.0,
            m_qp: 0.0,
            m_pq: 0.0,
            m_pp: 1.0,
        }
    }

    /// Deviation of the determinant from 1; zero for exact Hamiltonian flow.
    pub fn symplectic_defect(&self) -> f64 {
        self.m_qq * self.m_pp - self.m_qp * self.m_pq - 1.0
    }
}

/// One phase-space draw: position, momentum, and the importance weight that
/// converts the sample average into the flat dq dp / 2πħ integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub q: f64,
    pub p: f64,
    pub weight: f64,
}

/// Continuous-branch bookkeeping for the prefactor square root: the unwrapped
/// argument of R² and the time it was last updated (used in error reports).
#[derive(Debug, Clone, Copy)]
pub struct BranchState {
    pub theta: f64,
    pub t: f64,
}

impl BranchState {
    /// Branch at t = 0, where the monodromy is the identity and R = 1.
    pub fn new() -> Self {
        Self { theta: 0.0, t: 0.0 }
    }
}

impl Default for BranchState {
    fn default() -> Self {
        Self::new()
    }
}

/// Snapshot of one propagated sample at a single time.
#[derive(Debug, Clone, Copy)]
pub struct HkSample {
    pub q0: f64,
    pub p0: f64,
    pub qt: f64,
    pub pt: f64,
    pub action: f64,
    pub monodromy: MonodromyMatrix,
    pub prefactor: Complex64,
    /// Importance weight times the initial coherent-state overlap; the
    /// time-dependent factors multiply this.
    pub weight: Complex64,
    /// Turning-point jump factor; exactly 1 for ordinary trajectories.
    pub tunnel: f64,
}

/// One trajectory sampled at the requested times: phase-space point, action,
/// monodromy, and branch-continuous prefactor per time.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub action: Vec<f64>,
    pub monodromy: Vec<MonodromyMatrix>,
    pub prefactor: Vec<Complex64>,
}

/// Result of an HK run: the correlation series plus ensemble diagnostics.
#[derive(Debug, Clone)]
pub struct HkRun {
    pub series: CorrelationSeries,
    /// Requested ensemble size N (the estimator divides by this).
    pub n_samples: usize,
    /// Trajectories that failed to integrate and were excluded.
    pub n_aborted: usize,
}

/// R² as a complex number: ½ [m_qq + m_pp - iħγ m_qp + i m_pq/(ħγ)]. The
/// prefactor is its continuously tracked square root.
pub(crate) fn prefactor_squared(m: &MonodromyMatrix, gamma: f64, hbar: f64) -> Complex64 {
    Complex64::new(
        0.5 * (m.m_qq + m.m_pp),
        0.5 * (m.m_pq / (hbar * gamma) - hbar * gamma * m.m_qp),
    )
}

/// Maps an angle difference into (-π, π].
fn principal_angle(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = x - two_pi * (x / two_pi).round();
    if r <= -std::f64::consts::PI {
        r += two_pi;
    }
    r
}

/// Fluctuation prefactor R for a monodromy matrix, with the square-root
/// branch continued from `branch` (which is advanced in place).
///
/// Fails with BranchLoss if the argument of R² moved by more than π/2 since
/// the previous update; the caller must then evaluate on a finer stride.
pub fn hk_prefactor(
    m: &MonodromyMatrix,
    gamma: f64,
    hbar: f64,
    branch: &mut BranchState,
) -> Result<Complex64, CoreError> {
    let z = prefactor_squared(m, gamma, hbar);
    let jump = principal_angle(z.arg() - branch.theta);
    if jump.abs() > std::f64::consts::FRAC_PI_2 {
        return Err(CoreError::BranchLoss {
            t: branch.t,
            jump,
        });
    }
    branch.theta += jump;
    Ok(Complex64::from_polar(z.norm().sqrt(), 0.5 * branch.theta))
}

/// Closed-form overlap ⟨a|b⟩ of two Gaussian packets (possibly different
/// widths): a single complex Gaussian integral.
pub fn coherent_overlap(a: &GaussianPacket, b: &GaussianPacket, hbar: f64) -> Complex64 {
    let alpha = 0.5 * (a.gamma + b.gamma);
    let beta = Complex64::new(
        a.gamma * a.q + b.gamma * b.q,
        (b.p - a.p) / hbar,
    );
    let c = Complex64::new(
        -0.5 * (a.gamma * a.q * a.q + b.gamma * b.q * b.q),
        (a.p * a.q - b.p * b.q) / hbar,
    );
    let norm = (a.gamma * b.gamma).powf(0.25) / std::f64::consts::PI.sqrt();
    let gauss = (std::f64::consts::PI / alpha).sqrt();
    norm * gauss * (beta * beta / (4.0 * alpha) + c).exp()
}

/// Draws `n` phase-space points around `packet` from the density
/// ∝ |⟨g(p,q)|ψ_i⟩|² (Gaussian with σ_q² = 1/γ, σ_p² = γħ²) and attaches the
/// importance weight 1 / |⟨g(p,q)|ψ_i⟩|² that converts sample means into
/// dq dp / 2πħ integrals. Deterministic for a fixed seed.
///
/// An optional filter keeps only the samples whose (q, p) satisfy it; the
/// draw sequence is unaffected, so filtered and unfiltered calls with the
/// same seed see the same underlying stream.
pub fn sample_phase_space(
    packet: &GaussianPacket,
    n: usize,
    seed: u64,
    hbar: f64,
    filter: Option<&(dyn Fn(f64, f64) -> bool + Sync)>,
) -> Vec<PhaseSample> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let sigma_q = 1.0 / packet.gamma.sqrt();
    let sigma_p = packet.gamma.sqrt() * hbar;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let z1: f64 = rng.sample(rand_distr::StandardNormal);
        let z2: f64 = rng.sample(rand_distr::StandardNormal);
        let q = packet.q + sigma_q * z1;
        let p = packet.p + sigma_p * z2;
        if let Some(f) = filter {
            if !f(q, p) {
                continue;
            }
        }
        // 1 / |<g|psi>|^2 = exp(+gamma dq^2 / 2 + dp^2 / (2 gamma hbar^2)),
        // evaluated from the unit normals to avoid re-deriving the distances
        let weight = (0.5 * (z1 * z1 + z2 * z2)).exp();
        out.push(PhaseSample { q, p, weight });
    }
    out
}

/// Right-hand side of the 7-dimensional trajectory system
/// [q, p, S, m_qq, m_qp, m_pq, m_pp].
pub(crate) fn trajectory_rhs<'a, P: Potential + ?Sized>(
    pot: &'a P,
) -> impl FnMut(f64, &[f64; 7], &mut [f64; 7]) + 'a {
    move |t, y, dy| {
        let d = pot.eval(y[0], t);
        dy[0] = y[1] / MASS;
        dy[1] = -d.dv;
        dy[2] = 0.5 * y[1] * y[1] / MASS - d.v;
        dy[3] = y[5] / MASS;
        dy[4] = y[6] / MASS;
        dy[5] = -d.d2v * y[3];
        dy[6] = -d.d2v * y[4];
    }
}

pub(crate) fn monodromy_of(y: &[f64; 7]) -> MonodromyMatrix {
    MonodromyMatrix {
        m_qq: y[3],
        m_qp: y[4],
        m_pq: y[5],
        m_pp: y[6],
    }
}

/// Advances the branch argument from (t_a, theta_a) to t_b inside one dense
/// step, bisecting until each move is at most π/2.
pub(crate) fn unwrap_through(
    step: &Step<7>,
    t_a: f64,
    t_b: f64,
    theta_a: f64,
    gamma: f64,
    hbar: f64,
    depth: u32,
) -> Result<f64, CoreError> {
    let y_b = step.eval(t_b);
    let z_b = prefactor_squared(&monodromy_of(&y_b), gamma, hbar);
    let jump = principal_angle(z_b.arg() - theta_a);
    if jump.abs() <= std::f64::consts::FRAC_PI_2 {
        return Ok(theta_a + jump);
    }
    if depth == 0 {
        return Err(CoreError::BranchLoss { t: t_b, jump });
    }
    let t_m = 0.5 * (t_a + t_b);
    let theta_m = unwrap_through(step, t_a, t_m, theta_a, gamma, hbar, depth - 1)?;
    unwrap_through(step, t_m, t_b, theta_m, gamma, hbar, depth - 1)
}

/// Minimum number of branch checkpoints per trajectory; the integrator step
/// size is capped so the prefactor argument is examined at least this often.
pub(crate) const BRANCH_CHECKPOINTS: usize = 200;

/// Propagates one real trajectory from (q0, p0) at t = 0 through all
/// requested `times` (sorted ascending, first ≥ 0), accumulating action and
/// monodromy and tracking the prefactor branch continuously.
pub fn propagate_real<P: Potential + ?Sized>(
    pot: &P,
    q0: f64,
    p0: f64,
    times: &[f64],
    gamma: f64,
    hbar: f64,
    tol: f64,
) -> Result<TrajectoryRecord, CoreError> {
    if times.is_empty() {
        return Err(CoreError::InvalidParameter {
            name: "times",
            message: "at least one sample time is required".to_string(),
        });
    }
    if times.windows(2).any(|w| w[0] >= w[1]) || times[0] < 0.0 {
        return Err(CoreError::InvalidParameter {
            name: "times",
            message: "sample times must be non-negative and strictly increasing".to_string(),
        });
    }
    let t_end = *times.last().unwrap();

    let mut rec = TrajectoryRecord {
        times: times.to_vec(),
        q: Vec::with_capacity(times.len()),
        p: Vec::with_capacity(times.len()),
        action: Vec::with_capacity(times.len()),
        monodromy: Vec::with_capacity(times.len()),
        prefactor: Vec::with_capacity(times.len()),
    };

    let mut next = 0;
    if times[0] == 0.0 {
        rec.q.push(q0);
        rec.p.push(p0);
        rec.action.push(0.0);
        rec.monodromy.push(MonodromyMatrix::identity());
        rec.prefactor.push(Complex64::new(1.0, 0.0));
        next = 1;
    }
    if t_end == 0.0 {
        return Ok(rec);
    }

    let y0 = [q0, p0, 0.0, 1.0, 0.0, 0.0, 1.0];
    let mut driver = Driver::new(trajectory_rhs(pot), 0.0, y0, t_end, tol, tol * 1e-3);
    driver.set_h_max(t_end / BRANCH_CHECKPOINTS as f64);

    let mut branch = BranchState::new();
    while let Some(step) = driver.step()? {
        // Walk the branch through every event inside this step in time
        // order: requested sample times first, then the step endpoint.
        let mut t_prev = step.t0;
        while next < times.len() && times[next] <= step.t1 {
            let t_req = times[next];
            branch.theta =
                unwrap_through(&step, t_prev, t_req, branch.theta, gamma, hbar, 40)?;
            branch.t = t_req;
            let y = step.eval(t_req);
            let m = monodromy_of(&y);
            let z = prefactor_squared(&m, gamma, hbar);
            rec.q.push(y[0]);
            rec.p.push(y[1]);
            rec.action.push(y[2]);
            rec.monodromy.push(m);
            rec.prefactor
                .push(Complex64::from_polar(z.norm().sqrt(), 0.5 * branch.theta));
            t_prev = t_req;
            next += 1;
        }
        branch.theta = unwrap_through(&step, t_prev, step.t1, branch.theta, gamma, hbar, 40)?;
        branch.t = step.t1;
    }
    Ok(rec)
}

/// Samples processed per parallel work item; chunk partial sums are reduced
/// in index order afterwards, so the total is independent of thread count.
pub(crate) const CHUNK: usize = 1024;

pub(crate) struct ChunkPartial {
    pub(crate) sums: Vec<ComplexSum>,
    pub(crate) abs2: Vec<CompensatedSum>,
    pub(crate) aborted: usize,
}

/// Herman-Kluk estimate of ⟨ψ_f| exp(-iHt/ħ) |ψ_i⟩ at the requested times
/// from `n` trajectories seeded deterministically.
///
/// The coherent-state basis width is taken from ψ_i. Per-time Monte Carlo
/// standard errors accompany the values. Trajectories that fail to integrate
/// are excluded and counted; more than 1% failures abort the run.
pub fn hk_correlation<P: Potential + ?Sized>(
    pot: &P,
    psi_i: &GaussianPacket,
    psi_f: &GaussianPacket,
    times: &[f64],
    n: usize,
    seed: u64,
    hbar: f64,
    tol: f64,
) -> Result<HkRun, CoreError> {
    psi_i.validate()?;
    psi_f.validate()?;
    if n == 0 {
        return Err(CoreError::InvalidParameter {
            name: "n",
            message: "ensemble size must be at least 1".to_string(),
        });
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(CoreError::InvalidParameter {
            name: "hbar",
            message: format!("hbar must be positive and finite, got {hbar}"),
        });
    }
    let samples = sample_phase_space(psi_i, n, seed, hbar, None);
    let contributions = hk_ensemble_sum(pot, psi_i, psi_f, times, &samples, hbar, tol)?;
    finalize_run(contributions, times, n)
}

/// Sums HK contributions for an explicit sample list. Shared by the plain
/// and the turning-point-extended propagators (the latter splits its samples
/// by energy class first).
pub(crate) fn hk_ensemble_sum<P: Potential + ?Sized>(
    pot: &P,
    psi_i: &GaussianPacket,
    psi_f: &GaussianPacket,
    times: &[f64],
    samples: &[PhaseSample],
    hbar: f64,
    tol: f64,
) -> Result<Vec<ChunkPartial>, CoreError> {
    let gamma = psi_i.gamma;
    let partials: Vec<ChunkPartial> = samples
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut part = ChunkPartial {
                sums: vec![ComplexSum::new(); times.len()],
                abs2: vec![CompensatedSum::new(); times.len()],
                aborted: 0,
            };
            for s in chunk {
                let basis = GaussianPacket {
                    gamma,
                    q: s.q,
                    p: s.p,
                };
                let from_i = coherent_overlap(&basis, psi_i, hbar) * s.weight;
                match propagate_real(pot, s.q, s.p, times, gamma, hbar, tol) {
                    Ok(rec) => {
                        for j in 0..times.len() {
                            let moving = GaussianPacket {
                                gamma,
                                q: rec.q[j],
                                p: rec.p[j],
                            };
                            let phase =
                                Complex64::from_polar(1.0, rec.action[j] / hbar);
                            let c = coherent_overlap(psi_f, &moving, hbar)
                                * rec.prefactor[j]
                                * phase
                                * from_i;
                            part.sums[j].add(c);
                            part.abs2[j].add(c.norm_sqr());
                        }
                    }
                    Err(_) => part.aborted += 1,
                }
            }
            part
        })
        .collect();
    Ok(partials)
}

pub(crate) fn finalize_run(
    partials: Vec<ChunkPartial>,
    times: &[f64],
    n: usize,
) -> Result<HkRun, CoreError> {
    let aborted: usize = partials.iter().map(|p| p.aborted).sum();
    if aborted * 100 > n {
        return Err(CoreError::TooManyAborts {
            aborted,
            total: n,
        });
    }
    let mut values = Vec::with_capacity(times.len());
    let mut stderr = Vec::with_capacity(times.len());
    for j in 0..times.len() {
        let mut total = ComplexSum::new();
        let mut total_abs2 = CompensatedSum::new();
        for part in &partials {
            total.add(part.sums[j].value());
            total_abs2.add(part.abs2[j].value());
        }
        let mean = total.value() / n as f64;
        let var = (total_abs2.value() / n as f64 - mean.norm_sqr()).max(0.0);
        values.push(mean);
        stderr.push((var / n as f64).sqrt());
    }
    Ok(HkRun {
        series: CorrelationSeries {
            times: times.to_vec(),
            values,
            stderr: Some(stderr),
        },
        n_samples: n,
        n_aborted: aborted,
    })
}
