//! The `wkb` subcommand: a per-energy table of the barrier action, the
//! tunnel factor, and the uniform transmission, written as `wkb.csv`.
//!
//! Above the frozen barrier top there are no turning points and no action;
//! those cells stay empty while the uniform transmission (which continues
//! smoothly through the top) is still reported.

use ehk_core::potentials::{turning_point, turning_point_left};
use ehk_core::{short_action, uniform_wkb_transmission};

use crate::config::Resolved;
use crate::error::CliError;
use crate::output::{cell, OutDir};

pub fn run(resolved: &Resolved, force: bool) -> anyhow::Result<()> {
    let config = &resolved.config;
    let request = config.wkb.ok_or_else(|| {
        CliError::Config("no [wkb] section: set the energy grid to tabulate".to_string())
    })?;
    if !(request.e_min_over_v0 > 0.0 && request.e_max_over_v0 >= request.e_min_over_v0) {
        return Err(CliError::Config(format!(
            "wkb energies must satisfy 0 < e_min <= e_max, got [{}, {}]",
            request.e_min_over_v0, request.e_max_over_v0
        ))
        .into());
    }
    if request.n_energies == 0 {
        return Err(CliError::Config("wkb.n_energies must be at least 1".to_string()).into());
    }

    let spec = &config.potential;
    let (_, v_top) = spec.barrier_top(0.0)?;
    let mut out = OutDir::prepare(&resolved.out_dir, &resolved.hash, "wkb", force)?;

    let n = request.n_energies;
    let e_min = request.e_min_over_v0 * spec.v0;
    let e_max = request.e_max_over_v0 * spec.v0;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let e = if n == 1 {
            e_min
        } else {
            e_min + (e_max - e_min) * i as f64 / (n - 1) as f64
        };
        let p_uniform = uniform_wkb_transmission(spec, e, config.hbar);
        let (abs_w, tunnel) = if e < v_top {
            let q_r = turning_point(spec, e, 0.0)?;
            let q_l = turning_point_left(spec, e, 0.0)?;
            let action = short_action(spec, e, q_l, q_r)?;
            let abs_w = action.w.norm();
            (Some(abs_w), Some((-abs_w / config.hbar).exp()))
        } else {
            (None, None)
        };
        rows.push(format!(
            "{e},{},{},{p_uniform}",
            cell(abs_w),
            cell(tunnel)
        ));
    }

    out.write_csv("wkb.csv", "e,abs_w,tunnel,p_uniform", rows)?;
    out.write_config(&toml::to_string(config)?)?;
    out.finish()
}
