//! One module per subcommand, plus the propagator dispatch they share.

pub mod atlas;
pub mod correlate;
pub mod oracle;
pub mod transmit;
pub mod wkb;

use ehk_core::{ehk_correlation, hk_correlation, oracle_correlation, CorrelationSeries};

use crate::config::{Propagator, RunConfig};
use crate::output::Counts;

/// Computes the cross-correlation at the given instants with an explicit
/// propagator choice. Monte Carlo propagators return their ensemble
/// bookkeeping; the grid reference returns `None`.
pub(crate) fn run_propagator(
    config: &RunConfig,
    propagator: Propagator,
    times: &[f64],
) -> anyhow::Result<(CorrelationSeries, Option<Counts>)> {
    let pair = config.packets()?;
    match propagator {
        Propagator::Hk => {
            let s = config.sampling();
            let run = hk_correlation(
                &config.potential,
                &pair.initial,
                &pair.final_,
                times,
                s.n_traj,
                s.seed,
                config.hbar,
                s.tol,
            )?;
            Ok((
                run.series,
                Some(Counts {
                    n_samples: run.n_samples,
                    n_aborted: run.n_aborted,
                    ..Counts::default()
                }),
            ))
        }
        Propagator::Ehk => {
            let s = config.sampling();
            let run = ehk_correlation(
                &config.potential,
                &pair.initial,
                &pair.final_,
                times,
                s.n_traj,
                s.seed,
                config.hbar,
                s.tol,
                &config.ehk(),
            )?;
            Ok((
                run.series,
                Some(Counts {
                    n_samples: run.n_samples,
                    n_aborted: run.n_aborted,
                    n_above: Some(run.n_above),
                    n_below: Some(run.n_below),
                    n_rerouted: Some(run.n_rerouted),
                    n_jumps: Some(run.n_jumps),
                }),
            ))
        }
        Propagator::Oracle => {
            let series = oracle_correlation(
                &config.potential,
                &pair.initial,
                &pair.final_,
                times,
                config.grid()?,
                config.hbar,
            )?;
            Ok((series, None))
        }
    }
}

/// CSV rows `t,re_c,im_c,stderr` for a correlation series; the error cell is
/// empty when the series carries none.
pub(crate) fn correlation_rows(series: &CorrelationSeries) -> Vec<String> {
    (0..series.times.len())
        .map(|j| {
            let c = series.values[j];
            let se = match &series.stderr {
                Some(se) => format!("{}", se[j]),
                None => String::new(),
            };
            format!("{},{},{},{}", series.times[j], c.re, c.im, se)
        })
        .collect()
}
