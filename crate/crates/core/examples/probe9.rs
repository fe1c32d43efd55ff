//! Does a wider momentum spread (larger hbar at fixed gamma l^2 and
//! V0/(p^2/2)) move the transmitted signal away from the barrier top and
//! shrink the early-window eHK/oracle shape error? Also attributes the error
//! by running plain HK over the same window, and tracks the plain-HK
//! final-third envelope ratio.

use ehk_core::{
    ehk_correlation, hk_correlation, oracle_correlation, AbsorberConfig, BarrierFamily, EhkConfig,
    GaussianPacket, GridConfig, PotentialSpec,
};

fn main() {
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
    let split = times.len() * 2 / 3;

    for hbar in [0.4, 0.5, 0.6] {
        let grid = GridConfig {
            x_min: -300.0,
            x_max: 300.0,
            n: 8192,
            dt: 0.02,
            absorber: Some(AbsorberConfig {
                fraction: 0.1,
                k_ref: 0.5 / hbar,
                strength: None,
            }),
        };
        let oracle = oracle_correlation(&spec, &psi_i, &psi_f, &times, &grid, hbar).unwrap();
        let den: f64 = oracle.values.iter().map(|c| c.re * c.re).sum();

        let config = EhkConfig::with_default_margin(spec.v0);
        let run = ehk_correlation(
            &spec, &psi_i, &psi_f, &times, 100_000, 2024, hbar, 1e-8, &config,
        )
        .unwrap();
        let l2_parts = |values: &[num_complex::Complex64]| {
            let mut early = 0.0;
            let mut late = 0.0;
            for (j, (g, w)) in values.iter().zip(&oracle.values).enumerate() {
                let d2 = (g.re - w.re).powi(2);
                if j < split {
                    early += d2;
                } else {
                    late += d2;
                }
            }
            (
                ((early + late) / den).sqrt(),
                (early / den).sqrt(),
                (late / den).sqrt(),
            )
        };
        let (full, early, late) = l2_parts(&run.series.values);
        let se2: f64 = run
            .series
            .stderr
            .as_ref()
            .unwrap()
            .iter()
            .map(|s| s * s)
            .sum();

        let hk = hk_correlation(&spec, &psi_i, &psi_f, &times, 50_000, 2024, hbar, 1e-8).unwrap();
        let (_, hk_early, _) = l2_parts(&hk.series.values);
        let env = |values: &[num_complex::Complex64]| {
            values[split..].iter().map(|c| c.norm()).fold(0.0, f64::max)
        };
        let hk_ratio = env(&hk.series.values) / env(&oracle.values);

        println!(
            "hbar {hbar:.1}: den {:.2e} eHK L2 {full:.3} (early {early:.3}, late {late:.3}) noise [{:.3},{:.3}] | plain-HK early {hk_early:.3} final-third ratio {hk_ratio:.4}",
            den.sqrt(),
            (0.5 * se2 / den).sqrt(),
            (se2 / den).sqrt(),
        );
    }
}
