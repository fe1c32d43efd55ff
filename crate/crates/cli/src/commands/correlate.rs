//! The `correlate` subcommand: the packet cross-correlation under the
//! configured propagator, written as `correlation.csv`.

use ehk_core::{coherent_overlap, CorrelationSeries};

use crate::commands::{correlation_rows, run_propagator};
use crate::config::Resolved;
use crate::output::OutDir;

pub fn run(resolved: &Resolved, force: bool) -> anyhow::Result<()> {
    let config = &resolved.config;
    let pair = config.packets()?;
    let window = config.times()?;
    let times = window.grid()?;
    let mut out = OutDir::prepare(&resolved.out_dir, &resolved.hash, "correlate", force)?;

    // A zero-length window asks for nothing but the instant t = 0, where the
    // correlation is the closed-form packet overlap; no propagation runs.
    let (series, counts) = if window.t_max == 0.0 {
        let c0 = coherent_overlap(&pair.final_, &pair.initial, config.hbar);
        (
            CorrelationSeries {
                times,
                values: vec![c0],
                stderr: None,
            },
            None,
        )
    } else {
        run_propagator(config, config.propagator, &times)?
    };

    // The seed and ensemble size are facts of the configuration whenever a
    // Monte Carlo propagator is selected, even if the zero-window shortcut
    // meant no ensemble actually ran.
    if config.propagator != crate::config::Propagator::Oracle {
        let sampling = config.sampling();
        out.seed = Some(sampling.seed);
        out.n_traj = Some(sampling.n_traj);
    }
    out.counts = counts;
    out.write_csv("correlation.csv", "t,re_c,im_c,stderr", correlation_rows(&series))?;
    out.write_config(&toml::to_string(config)?)?;
    out.finish()
}
