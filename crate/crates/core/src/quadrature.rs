//! Adaptive Gauss-Kronrod quadrature and the square-root-regularized integral
//! used for barrier actions.

/// 15-point Kronrod nodes on [-1, 1] (positive half; the rule is symmetric).
const XK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];

const WK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

/// Weights of the embedded 7-point Gauss rule (nodes XK[1], XK[3], XK[5], XK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = 0.0;
    let mut g = 0.0;
    for i in 0..8 {
        let (fp, fm) = if i == 7 {
            let v = f(c);
            (v, 0.0)
        } else {
            (f(c + h * XK[i]), f(c - h * XK[i]))
        };
        let pair = fp + fm;
        k += WK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        } else if i == 7 {
            g += WG[3] * fp;
        }
    }
    // i == 7 contributes to both rules once (central node)
    (k * h, (k - g) * h)
}

fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err) = gk15(f, a, b);
    if err.abs() <= tol || depth >= 48 {
        return val;
    }
    let c = 0.5 * (a + b);
    adaptive(f, a, c, 0.5 * tol, depth + 1) + adaptive(f, c, b, 0.5 * tol, depth + 1)
}

/// Adaptive Gauss-Kronrod integration of `f` over [a, b] to a relative
/// tolerance `rel` (with a tiny absolute floor so integrals of zero converge).
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // the error budget is anchored to the integrand's own scale: an integral
    // suppressed by cancellation (oscillatory phases) would otherwise demand
    // absolute accuracy at the floating-point floor
    let (l1, _) = gk15(&mut |x| f(x).abs(), a, b);
    let (first, _) = gk15(&mut f, a, b);
    let tol = rel * first.abs().max(l1) + 1e-300;
    adaptive(&mut f, a, b, tol, 0)
}

/// Integrates `g(q)` over [a, b] where `g` vanishes like a square root at both
/// endpoints (the classic turning-point singularity of sqrt(V - E)).
///
/// The interval is split in the middle and each half is mapped by q = a + s^2
/// (resp. q = b - s^2), which turns the sqrt branch point into a smooth
/// integrand that the Gauss-Kronrod rule handles at full order.
pub fn integrate_sqrt_endpoints<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, rel: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let mid = 0.5 * (a + b);
    let left = integrate(
        |s| 2.0 * s * g(a + s * s),
        0.0,
        (mid - a).sqrt(),
        0.5 * rel,
    );
    let right = integrate(
        |s| 2.0 * s * g(b - s * s),
        0.0,
        (b - mid).sqrt(),
        0.5 * rel,
    );
    left + right
}
