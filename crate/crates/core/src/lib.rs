//! Real-time tunneling through one-dimensional barriers with semiclassical
//! initial-value propagators.
//!
//! The crate is organized around three ways of computing the cross-correlation
//! `c_fi(t) = <psi_f| exp(-i H t / hbar) |psi_i>` between Gaussian wave packets
//! launched at a scattering barrier:
//!
//! * [`hk::hk_correlation`] - the Herman-Kluk frozen-Gaussian propagator,
//!   a Monte Carlo sum over real classical trajectories,
//! * [`ehk::ehk_correlation`] - the same sum extended below the barrier by
//!   trajectories that connect the classical turning points with an
//!   instantaneous jump weighted by the imaginary barrier action,
//! * [`oracle::oracle_correlation`] - an exact split-operator grid propagation
//!   used as the reference.
//!
//! Supporting modules: [`potentials`] (analytic barrier families, complex
//! continuation, turning points), [`complex_dynamics`] (classical mechanics in
//! the complex coordinate plane and orbit classification), [`wkb`] (barrier
//! actions and uniform transmission), and [`spectra`] (windowed Fourier
//! inversion of correlation functions into transmission probabilities).
//!
//! Units: the particle mass is fixed to m = 1 and hbar is passed explicitly
//! wherever a quantum scale enters.

pub mod complex_dynamics;
pub mod ehk;
pub mod error;
pub mod hk;
pub mod integrate;
pub mod numerics;
pub mod oracle;
pub mod potentials;
pub mod quadrature;
pub mod spectra;
pub mod wkb;

pub use complex_dynamics::{
    classify_orbit, emit_orbit_atlas, energy_split, integrate_complex, AtlasLine, ComplexState,
    OrbitAtlas, OrbitClass, OrbitRecord, OrbitTermination,
};
pub use ehk::{ehk_correlation, tunneling_trajectory, EhkConfig, EhkRun, JumpPhase, JumpPolicy};
pub use error::CoreError;
pub use hk::{
    coherent_overlap, hk_correlation, hk_prefactor, propagate_real, sample_phase_space,
    BranchState, GaussianPacket, HkRun, HkSample, MonodromyMatrix, PhaseSample, TrajectoryRecord,
};
pub use oracle::{
    exact_eckart_transmission, grid_propagate, oracle_correlation, AbsorberConfig, GridConfig,
    GridState,
};
pub use potentials::{
    burning_line_angle, turning_point, turning_point_left, BarrierFamily, ComplexValueAndDerivs,
    Drive, Potential, PotentialSpec, RealValueAndDerivs,
};
pub use spectra::{
    momentum_amplitude, resolvable_band, transmission_from_correlation, CorrelationSeries, Method,
    Taper, TransmissionCurve, TransmissionPoint,
};
pub use wkb::{short_action, tunnel_factor, uniform_wkb_transmission, ActionValue};

/// Particle mass. The classical equations of motion, the variational system,
/// and the grid kinetic operator all assume unit mass; keeping the constant
/// named makes the mass-dependence of formulas visible at the use sites.
pub const MASS: f64 = 1.0;
