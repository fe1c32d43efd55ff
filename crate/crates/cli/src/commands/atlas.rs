//! The `atlas` subcommand: a batch of complex-plane orbits plus the
//! barrier's burning lines and reference turning points, written as
//! `orbits.csv` and `burning_lines.csv`.

use ehk_core::{emit_orbit_atlas, ComplexState, OrbitTermination};

use crate::config::Resolved;
use crate::error::CliError;
use crate::output::{OrbitMeta, OutDir};

pub fn run(resolved: &Resolved, force: bool) -> anyhow::Result<()> {
    let config = &resolved.config;
    let request = config.atlas.as_ref().ok_or_else(|| {
        CliError::Config(
            "no [atlas] section: set t_max, tol, and at least one [[atlas.starts]]".to_string(),
        )
    })?;
    if request.starts.is_empty() {
        return Err(CliError::Config("atlas.starts is empty".to_string()).into());
    }
    if !(request.t_max > 0.0 && request.t_max.is_finite()) {
        return Err(CliError::Config(format!(
            "atlas.t_max must be positive and finite, got {}",
            request.t_max
        ))
        .into());
    }

    let starts: Vec<ComplexState> = request
        .starts
        .iter()
        .map(|s| ComplexState::new(s.x, s.y, s.vx, s.vy))
        .collect();
    let mut out = OutDir::prepare(&resolved.out_dir, &resolved.hash, "atlas", force)?;

    let atlas = emit_orbit_atlas(&config.potential, &starts, request.t_max, request.tol);

    let mut orbit_rows = Vec::new();
    let mut metas = Vec::with_capacity(atlas.orbits.len());
    for (orbit_id, result) in atlas.orbits.iter().enumerate() {
        match result {
            Ok(record) => {
                let class = record.classification.to_string();
                for s in &record.samples {
                    orbit_rows.push(format!("{orbit_id},{class},{},{},{}", s.t, s.x, s.y));
                }
                metas.push(OrbitMeta {
                    orbit_id,
                    class,
                    outcome: termination_name(record.terminal_reason).to_string(),
                    n_samples: record.samples.len(),
                });
            }
            Err(err) => metas.push(OrbitMeta {
                orbit_id,
                class: "failed".to_string(),
                outcome: err.to_string(),
                n_samples: 0,
            }),
        }
    }
    let line_rows: Vec<String> = atlas
        .lines
        .iter()
        .map(|l| {
            format!(
                "{},{},{},{},{},{}",
                l.kind, l.label, l.x0, l.y0, l.x1, l.y1
            )
        })
        .collect();

    out.orbits = Some(metas);
    out.write_csv("orbits.csv", "orbit_id,class,t,x,y", orbit_rows)?;
    out.write_csv("burning_lines.csv", "kind,label,x0,y0,x1,y1", line_rows)?;
    out.write_config(&toml::to_string(config)?)?;
    out.finish()
}

fn termination_name(reason: OrbitTermination) -> &'static str {
    match reason {
        OrbitTermination::TimeExhausted => "time_exhausted",
        OrbitTermination::LeftDomain => "left_domain",
        OrbitTermination::PoleAbort => "pole_abort",
    }
}
