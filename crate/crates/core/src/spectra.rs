//! Observables assembled from correlation functions.
//!
//! The central operation inverts a time correlation c(t) = ⟨ψ_f|U(t)|ψ_i⟩
//! between incoming and outgoing wave packets into an energy-resolved
//! transmission probability. The inversion divides the windowed Fourier
//! transform of c(t) by the energy-normalized free amplitudes of the two
//! packets, so a freely moving packet gives P(E) = 1 identically; a barrier
//! in between turns P(E) into the transmission coefficient.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::hk::GaussianPacket;
use crate::MASS;

/// A sampled complex correlation function with optional per-point Monte
/// Carlo standard errors.
#[derive(Debug, Clone)]
pub struct CorrelationSeries {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub stderr: Option<Vec<f64>>,
}

impl CorrelationSeries {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.values.len() != self.times.len() {
            return Err(CoreError::InvalidParameter {
                name: "series",
                message: format!(
                    "length mismatch: {} times vs {} values",
                    self.times.len(),
                    self.values.len()
                ),
            });
        }
        if let Some(se) = &self.stderr {
            if se.len() != self.times.len() {
                return Err(CoreError::InvalidParameter {
                    name: "series",
                    message: format!(
                        "length mismatch: {} times vs {} stderr entries",
                        self.times.len(),
                        se.len()
                    ),
                });
            }
        }
        if self.times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::InvalidParameter {
                name: "series",
                message: "times must be strictly increasing".to_string(),
            });
        }
        Ok(())
    }
}

/// Which computation produced a transmission curve; carried into output
/// files so overlaid methods stay distinguishable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ehk,
    Hk,
    UniformWkb,
    ExactFormula,
    GridFlux,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Ehk => "eHK",
            Method::Hk => "HK",
            Method::UniformWkb => "uniformWKB",
            Method::ExactFormula => "exactFormula",
            Method::GridFlux => "gridFlux",
        })
    }
}

/// One energy sample of a transmission curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionPoint {
    pub energy: f64,
    pub p: f64,
}

/// Transmission probability over an energy band, tagged by method.
#[derive(Debug, Clone)]
pub struct TransmissionCurve {
    pub energies: Vec<f64>,
    pub p: Vec<f64>,
    pub method: Method,
}

impl TransmissionCurve {
    pub fn points(&self) -> impl Iterator<Item = TransmissionPoint> + '_ {
        self.energies
            .iter()
            .zip(&self.p)
            .map(|(&energy, &p)| TransmissionPoint { energy, p })
    }
}

/// Default trailing fraction of the series smoothed to zero by the taper.
pub const DEFAULT_TAPER_FRACTION: f64 = 0.2;

/// Window applied to the correlation before Fourier transforming, to
/// suppress ringing from the finite time span.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Taper {
    /// No window; the series itself must have decayed.
    None,
    /// Half-cosine rolloff over the trailing `fraction` of the time span.
    HalfCosine { fraction: f64 },
}

impl Default for Taper {
    fn default() -> Self {
        Taper::HalfCosine {
            fraction: DEFAULT_TAPER_FRACTION,
        }
    }
}

impl Taper {
    fn validate(&self) -> Result<(), CoreError> {
        if let Taper::HalfCosine { fraction } = self {
            if !(*fraction > 0.0 && *fraction < 1.0) {
                return Err(CoreError::InvalidParameter {
                    name: "taper fraction",
                    message: format!("must lie in (0, 1), got {fraction}"),
                });
            }
        }
        Ok(())
    }

    /// Window value at time `t` for a series spanning [t0, t1].
    fn weight(&self, t: f64, t0: f64, t1: f64) -> f64 {
        match self {
            Taper::None => 1.0,
            Taper::HalfCosine { fraction } => {
                let start = t1 - fraction * (t1 - t0);
                if t <= start {
                    1.0
                } else {
                    0.5 * (1.0 + (std::f64::consts::PI * (t - start) / (t1 - start)).cos())
                }
            }
        }
    }
}

/// Momentum-space amplitude of a Gaussian packet in the convention
/// φ(p) = (2πħ)^(-1/2) ∫ dx exp(-i p x / ħ) ψ(x), which evaluates to
/// (1/(πγħ²))^(1/4) exp(-(p-p₀)²/(2γħ²)) exp(-i p q₀ / ħ).
pub fn momentum_amplitude(packet: &GaussianPacket, p: f64, hbar: f64) -> Complex64 {
    let dp = p - packet.p;
    let mag = (1.0 / (std::f64::consts::PI * packet.gamma * hbar * hbar)).powf(0.25)
        * (-dp * dp / (2.0 * packet.gamma * hbar * hbar)).exp();
    Complex64::from_polar(mag, -p * packet.q / hbar)
}

/// Relative momentum-amplitude floor below which the energy deconvolution
/// is considered ill-posed.
const BAND_FLOOR: f64 = 1e-3;

/// Energy interval over which both packets carry at least `BAND_FLOOR` of
/// their peak momentum amplitude on their own propagation branch.
pub fn resolvable_band(
    psi_i: &GaussianPacket,
    psi_f: &GaussianPacket,
    hbar: f64,
) -> Result<(f64, f64), CoreError> {
    for (name, pkt) in [("initial packet", psi_i), ("final packet", psi_f)] {
        pkt.validate()?;
        if pkt.p == 0.0 {
            return Err(CoreError::InvalidParameter {
                name: "packet momentum",
                message: format!("{name} has zero momentum; propagation direction undefined"),
            });
        }
    }
    // |phi| falls to BAND_FLOOR of its peak at |p - |p0|| = half_width
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for pkt in [psi_i, psi_f] {
        let half_width = hbar * (2.0 * pkt.gamma * (1.0 / BAND_FLOOR).ln()).sqrt();
        lo = lo.max(pkt.p.abs() - half_width);
        hi = hi.min(pkt.p.abs() + half_width);
    }
    lo = lo.max(0.0);
    if lo >= hi {
        return Err(CoreError::InvalidParameter {
            name: "packets",
            message: "momentum bands of the two packets do not overlap".to_string(),
        });
    }
    let e_lo = 0.5 * lo * lo / MASS;
    let e_hi = 0.5 * hi * hi / MASS;
    Ok((e_lo, e_hi))
}

/// Energy-normalized free amplitude ⟨E, direction|ψ⟩ = √(m/p) φ(±p) at the
/// packet's own propagation branch (sign of the packet's center momentum).
fn energy_amplitude(pkt: &GaussianPacket, energy: f64, hbar: f64) -> Complex64 {
    let p = (2.0 * MASS * energy).sqrt();
    let branch = pkt.p.signum() * p;
    (MASS / p).sqrt() * momentum_amplitude(pkt, branch, hbar)
}

/// Number of energy samples generated when no explicit grid is requested.
const ENERGY_SAMPLES: usize = 400;

/// Fraction of the peak |c| the final value must have decayed to when no
/// taper window is applied.
const DECAY_FLOOR: f64 = 1e-3;

/// Inverts a correlation series into a transmission curve.
///
/// The windowed transform c̃(E) = ∫ dt exp(i E t / ħ) c(t) (trapezoidal over
/// the series grid) is divided by 2πħ η_f*(E) η_i(E), with η the
/// energy-normalized free amplitude of each packet; the transmission is the
/// squared modulus of that ratio. Energies are either taken from `energies`
/// (each must lie in the resolvable band) or generated as a uniform grid
/// spanning the band.
pub fn transmission_from_correlation(
    series: &CorrelationSeries,
    psi_i: &GaussianPacket,
    psi_f: &GaussianPacket,
    hbar: f64,
    taper: Taper,
    energies: Option<&[f64]>,
    method: Method,
) -> Result<TransmissionCurve, CoreError> {
    series.validate()?;
    taper.validate()?;
    if series.times.len() < 2 {
        return Err(CoreError::InvalidParameter {
            name: "series",
            message: "at least two time samples are required".to_string(),
        });
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(CoreError::InvalidParameter {
            name: "hbar",
            message: format!("hbar must be positive and finite, got {hbar}"),
        });
    }
    let (e_lo, e_hi) = resolvable_band(psi_i, psi_f, hbar)?;

    if matches!(taper, Taper::None) {
        let peak = series.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tail = series.values.last().unwrap().norm();
        if tail > DECAY_FLOOR * peak {
            return Err(CoreError::InsufficientDecay {
                t: *series.times.last().unwrap(),
                tail,
                peak,
            });
        }
    }

    let grid: Vec<f64> = match energies {
        Some(es) => {
            for &e in es {
                if !(e >= e_lo && e <= e_hi) {
                    return Err(CoreError::BandExceeded {
                        energy: e,
                        lo: e_lo,
                        hi: e_hi,
                    });
                }
            }
            es.to_vec()
        }
        None => (0..ENERGY_SAMPLES)
            .map(|i| e_lo + (e_hi - e_lo) * i as f64 / (ENERGY_SAMPLES - 1) as f64)
            .collect(),
    };

    let t0 = series.times[0];
    let t1 = *series.times.last().unwrap();
    let windowed: Vec<Complex64> = series
        .times
        .iter()
        .zip(&series.values)
        .map(|(&t, &c)| c * taper.weight(t, t0, t1))
        .collect();

    let mut p_out = Vec::with_capacity(grid.len());
    for &energy in &grid {
        let mut acc = Complex64::new(0.0, 0.0);
        for w in 0..series.times.len() - 1 {
            let (ta, tb) = (series.times[w], series.times[w + 1]);
            let fa = windowed[w] * Complex64::from_polar(1.0, energy * ta / hbar);
            let fb = windowed[w + 1] * Complex64::from_polar(1.0, energy * tb / hbar);
            acc += 0.5 * (tb - ta) * (fa + fb);
        }
        let denom = 2.0 * std::f64::consts::PI
            * hbar
            * energy_amplitude(psi_f, energy, hbar).conj()
            * energy_amplitude(psi_i, energy, hbar);
        let s = acc / denom;
        p_out.push(s.norm_sqr());
    }

    Ok(TransmissionCurve {
        energies: grid,
        p: p_out,
        method,
    })
}
