//! The `transmit` subcommand: correlation functions chained into
//! transmission curves, one tagged block of rows per requested method.

use ehk_core::{
    exact_eckart_transmission, transmission_from_correlation, uniform_wkb_transmission,
    BarrierFamily, Method, Taper,
};

use crate::commands::run_propagator;
use crate::config::{CurveMethod, Propagator, Resolved};
use crate::error::CliError;
use crate::output::{CurveMeta, OutDir};

pub fn run(resolved: &Resolved, force: bool) -> anyhow::Result<()> {
    let config = &resolved.config;
    let request = config.transmission.as_ref().ok_or_else(|| {
        CliError::Config(
            "no [transmission] section: set the energy grid and the method list".to_string(),
        )
    })?;
    if request.methods.is_empty() {
        return Err(CliError::Config("transmission.methods is empty".to_string()).into());
    }
    if !(request.e_min_over_v0 > 0.0 && request.e_max_over_v0 >= request.e_min_over_v0) {
        return Err(CliError::Config(format!(
            "transmission energies must satisfy 0 < e_min <= e_max, got [{}, {}]",
            request.e_min_over_v0, request.e_max_over_v0
        ))
        .into());
    }
    if request.n_energies == 0 {
        return Err(CliError::Config("transmission.n_energies must be at least 1".to_string()).into());
    }
    let energies = energy_grid(
        request.e_min_over_v0 * config.potential.v0,
        request.e_max_over_v0 * config.potential.v0,
        request.n_energies,
    );

    let mut out = OutDir::prepare(&resolved.out_dir, &resolved.hash, "transmit", force)?;
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for &method in &request.methods {
        let (tag, p, counts) = match method {
            CurveMethod::Ehk | CurveMethod::Hk | CurveMethod::Oracle => {
                let (propagator, tag) = match method {
                    CurveMethod::Ehk => (Propagator::Ehk, Method::Ehk),
                    CurveMethod::Hk => (Propagator::Hk, Method::Hk),
                    _ => (Propagator::Oracle, Method::GridFlux),
                };
                let times = config.times()?.grid()?;
                let (series, counts) = run_propagator(config, propagator, &times)?;
                let curve = transmission_from_correlation(
                    &series,
                    &config.packets()?.initial,
                    &config.packets()?.final_,
                    config.hbar,
                    Taper::default(),
                    Some(&energies),
                    tag,
                )?;
                (tag, curve.p, counts)
            }
            CurveMethod::UniformWkb => {
                let p = energies
                    .iter()
                    .map(|&e| uniform_wkb_transmission(&config.potential, e, config.hbar))
                    .collect();
                (Method::UniformWkb, p, None)
            }
            CurveMethod::Exact => {
                if config.potential.family != (BarrierFamily::Eckart) {
                    return Err(CliError::Config(
                        "the exact transmission formula covers only the sech² barrier \
                         (family = \"eckart\")"
                            .to_string(),
                    )
                    .into());
                }
                let p = energies
                    .iter()
                    .map(|&e| {
                        exact_eckart_transmission(
                            config.potential.v0,
                            config.potential.l,
                            e,
                            config.hbar,
                        )
                    })
                    .collect();
                (Method::ExactFormula, p, None)
            }
        };
        let p: Vec<f64> = p;
        for (e, p) in energies.iter().zip(&p) {
            rows.push(format!("{},{p},{tag}", e / config.potential.v0));
        }
        curves.push(CurveMeta {
            method: tag.to_string(),
            n_energies: energies.len(),
            counts,
        });
    }

    if curves.iter().any(|c| c.counts.is_some()) {
        let sampling = config.sampling();
        out.seed = Some(sampling.seed);
        out.n_traj = Some(sampling.n_traj);
    }
    out.curves = Some(curves);
    out.write_csv("transmission.csv", "e_over_v0,p,method", rows)?;
    out.write_config(&toml::to_string(config)?)?;
    out.finish()
}

/// Inclusive uniform grid; a single requested energy sits at the lower edge.
fn energy_grid(e_min: f64, e_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![e_min];
    }
    (0..n)
        .map(|i| e_min + (e_max - e_min) * i as f64 / (n - 1) as f64)
        .collect()
}
