//! L2 deviation of eHK vs the grid oracle across the quantumness ratio, plus
//! the best single complex factor z (amplitude x phase) mapping eHK onto the
//! oracle and the residual after applying it.

use num_complex::Complex64;

use ehk_core::{
    ehk_correlation, oracle_correlation, AbsorberConfig, BarrierFamily, EhkConfig, GaussianPacket,
    GridConfig, PotentialSpec,
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

    for hbar in [0.4, 0.35, 0.3, 0.25] {
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
        let t0 = std::time::Instant::now();
        let run = ehk_correlation(
            &spec, &psi_i, &psi_f, &times, 100_000, 2024, hbar, 1e-8, &config,
        )
        .unwrap();
        let num: f64 = run
            .series
            .values
            .iter()
            .zip(&oracle.values)
            .map(|(g, w)| (g.re - w.re).powi(2))
            .sum();
        let se2: f64 = run
            .series
            .stderr
            .as_ref()
            .unwrap()
            .iter()
            .map(|s| s * s)
            .sum();
        // Complex least squares: z = sum(o conj(e)) / sum|e|^2, then the
        // Re-component L2 of (z e - o).
        let mut zn = Complex64::new(0.0, 0.0);
        let mut zd = 0.0;
        for (e, o) in run.series.values.iter().zip(&oracle.values) {
            zn += o * e.conj();
            zd += e.norm_sqr();
        }
        let z = zn / zd;
        let res: f64 = run
            .series
            .values
            .iter()
            .zip(&oracle.values)
            .map(|(e, o)| (z * e - o).re.powi(2))
            .sum();
        println!(
            "hbar {hbar:.2}: den {:.2e} L2 {:.3} noise [{:.3},{:.3}] |z| {:.3} arg z {:+.3} rad residual {:.3} below {:.2}% jumps/traj {:.2} ({:.0?})",
            den.sqrt(),
            (num / den).sqrt(),
            (0.5 * se2 / den).sqrt(),
            (se2 / den).sqrt(),
            z.norm(),
            z.arg(),
            (res / den).sqrt(),
            100.0 * run.n_below as f64 / run.n_samples as f64,
            run.n_jumps as f64 / run.n_below.max(1) as f64,
            t0.elapsed()
        );
    }
}
