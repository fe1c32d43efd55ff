//! The `oracle` subcommand: the split-operator grid reference. Writes the
//! correlation series like `correlate` does, plus a binary checkpoint of the
//! wave function at the end of the window for later inspection or reuse.

use ehk_core::{coherent_overlap, grid_propagate, oracle_correlation, CorrelationSeries, GridState};

use crate::commands::correlation_rows;
use crate::config::Resolved;
use crate::output::OutDir;

pub fn run(resolved: &Resolved, force: bool) -> anyhow::Result<()> {
    let config = &resolved.config;
    let pair = config.packets()?;
    let window = config.times()?;
    let times = window.grid()?;
    let grid = config.grid()?;
    let mut out = OutDir::prepare(&resolved.out_dir, &resolved.hash, "oracle", force)?;

    let (series, state) = if window.t_max == 0.0 {
        let c0 = coherent_overlap(&pair.final_, &pair.initial, config.hbar);
        let series = CorrelationSeries {
            times,
            values: vec![c0],
            stderr: None,
        };
        (series, GridState::from_packet(grid, &pair.initial, config.hbar))
    } else {
        let series = oracle_correlation(
            &config.potential,
            &pair.initial,
            &pair.final_,
            &times,
            grid,
            config.hbar,
        )?;
        let mut states = grid_propagate(
            &config.potential,
            grid,
            &pair.initial,
            &[window.t_max],
            config.hbar,
        )?;
        (series, states.pop().expect("one requested time yields one state"))
    };

    out.write_csv("correlation.csv", "t,re_c,im_c,stderr", correlation_rows(&series))?;
    out.write_file("checkpoint.bin", |w| state.save_checkpoint(w))?;
    out.write_config(&toml::to_string(config)?)?;
    out.finish()
}
