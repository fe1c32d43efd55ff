//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the propagators and their supporting numerics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    /// A complex potential evaluation came closer to a pole of the analytic
    /// continuation than the exclusion radius allows.
    #[error("evaluation point ({re}, {im}) lies within {radius} of a potential pole")]
    PoleProximity { re: f64, im: f64, radius: f64 },

    /// The requested energy admits no classical turning point (at or above the
    /// barrier maximum of the frozen potential).
    #[error("no turning point: E = {energy} is not below the barrier top {top}")]
    NoTurningPoint { energy: f64, top: f64 },

    /// A root bracket could not be established on the search interval.
    #[error("could not bracket a root of {what} on ({lo}, {hi})")]
    NonBracketable {
        what: &'static str,
        lo: f64,
        hi: f64,
    },

    /// The adaptive integrator could not meet its tolerance before hitting the
    /// minimum step size or the step budget.
    #[error("step control failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: &'static str },

    /// A barrier-action segment mixes classically allowed and forbidden
    /// regions; split it at the turning points first.
    #[error("action segment [{from}, {to}] crosses a turning point at E = {energy}")]
    MixedSegment { from: f64, to: f64, energy: f64 },

    /// The Herman-Kluk prefactor argument rotated by more than pi/2 between
    /// consecutive tracked points even after refinement, so the square-root
    /// branch can no longer be followed continuously.
    #[error("prefactor branch lost near t = {t}: argument jump {jump} rad")]
    BranchLoss { t: f64, jump: f64 },

    /// A single trajectory produced an implausible number of turning-point
    /// events; almost certainly a runaway configuration.
    #[error("trajectory exceeded {limit} turning-point events")]
    JumpBudgetExceeded { limit: usize },

    /// Probability mass reached the edge of a grid without an absorbing layer.
    #[error("grid edge contamination: wraparound mass {mass:.3e} at t = {t}")]
    EdgeContamination { t: f64, mass: f64 },

    /// The grid does not cover a wave packet with the required margin.
    #[error("grid [{x_min}, {x_max}] does not cover packet at q = {q} with an 8-sigma margin")]
    GridCoverage { x_min: f64, x_max: f64, q: f64 },

    /// A transmission energy grid leaves the band where both packets carry
    /// resolvable momentum amplitude.
    #[error("energy {energy} lies outside the resolvable band [{lo}, {hi}]")]
    BandExceeded { energy: f64, lo: f64, hi: f64 },

    /// A correlation series neither decayed at its final time nor was a taper
    /// window supplied, so its Fourier transform would be truncation-dominated.
    #[error("correlation has not decayed at t = {t} (|c| = {tail:.3e} vs peak {peak:.3e}) and no taper was supplied")]
    InsufficientDecay { t: f64, tail: f64, peak: f64 },

    /// Too many Monte Carlo trajectories aborted for the ensemble average to
    /// be trusted.
    #[error("{aborted} of {total} trajectories aborted (limit is 1%)")]
    TooManyAborts { aborted: usize, total: usize },

    /// A parameter failed its documented validity range.
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter {
        name: &'static str,
        message: String,
    },
}
