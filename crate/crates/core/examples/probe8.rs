//! Localize the fig2a-regime eHK/oracle shape mismatch: population-margin
//! sweep down to near zero, with the L2 split into early and late window
//! thirds and the largest per-sample deviations printed.

use ehk_core::{
    ehk_correlation, oracle_correlation, AbsorberConfig, BarrierFamily, EhkConfig, GaussianPacket,
    GridConfig, PotentialSpec,
};

fn main() {
    let hbar = 0.4;
    let spec = PotentialSpec {
        family: BarrierFamily::Eckart,
        v0: 1.0,
        l: 1.0,
        drive: None,
    };
    let psi_i = GaussianPacket {
        gamma: 6.0,
        q: 40.0,
        p: -0.5,
    };
    let psi_f = GaussianPacket {
        gamma: 6.0,
        q: -40.0,
        p: -0.5,
    };
    let times: Vec<f64> = (0..=400).map(|i| 320.0 * i as f64 / 400.0).collect();
    let grid = GridConfig {
        x_min: -300.0,
        x_max: 300.0,
        n: 8192,
        dt: 0.02,
        absorber: Some(AbsorberConfig {
            fraction: 0.1,
            k_ref: 1.25,
            strength: None,
        }),
    };
    let oracle = oracle_correlation(&spec, &psi_i, &psi_f, &times, &grid, hbar).unwrap();
    let den: f64 = oracle.values.iter().map(|c| c.re * c.re).sum();
    let split = times.len() * 2 / 3;

    for margin in [0.02, 0.05, 0.10, 0.15] {
        let config = EhkConfig {
            delta_pb: margin * spec.v0,
            ..EhkConfig::with_default_margin(spec.v0)
        };
        let n = if margin == 0.15 { 200_000 } else { 100_000 };
        let run =
            ehk_correlation(&spec, &psi_i, &psi_f, &times, n, 2024, hbar, 1e-8, &config).unwrap();
        let mut num = 0.0;
        let mut num_early = 0.0;
        let mut num_late = 0.0;
        let mut worst: Vec<(f64, f64)> = Vec::new();
        for (j, (g, w)) in run.series.values.iter().zip(&oracle.values).enumerate() {
            let d2 = (g.re - w.re).powi(2);
            num += d2;
            if j < split {
                num_early += d2;
            } else {
                num_late += d2;
            }
            worst.push((d2, times[j]));
        }
        worst.sort_by(|a, b| b.0.total_cmp(&a.0));
        let se2: f64 = run
            .series
            .stderr
            .as_ref()
            .unwrap()
            .iter()
            .map(|s| s * s)
            .sum();
        println!(
            "margin {margin:.2} n {n}: L2 {:.3} (early {:.3}, late {:.3}) noise [{:.3},{:.3}] peaks at t = {:.0} {:.0} {:.0} {:.0} {:.0}",
            (num / den).sqrt(),
            (num_early / den).sqrt(),
            (num_late / den).sqrt(),
            (0.5 * se2 / den).sqrt(),
            (se2 / den).sqrt(),
            worst[0].1,
            worst[1].1,
            worst[2].1,
            worst[3].1,
            worst[4].1
        );
    }
}
