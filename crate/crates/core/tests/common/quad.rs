//! Adaptive Gauss–Kronrod (7/15) quadrature, used as an independent oracle.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, depth: u32) -> f64 {
    let (v, err) = gk15(f, a, b);
    if err <= abs_tol || depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, abs_tol / 2.0, depth - 1) + adapt(f, m, b, abs_tol / 2.0, depth - 1)
}

/// Integral of `f` over `[a, b]`, split at the given interior break points.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], abs_tol: f64) -> f64 {
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(f64::total_cmp);
    let n = (pts.len() - 1) as f64;
    pts.windows(2).map(|w| adapt(&f, w[0], w[1], abs_tol / n, 40)).sum()
}

/// Voigt profile as the convolution of its Gaussian and Lorentzian parts.
pub fn voigt_by_quadrature(detuning: f64, doppler_hwhm: f64, lorentz_hwhm: f64) -> f64 {
    use std::f64::consts::{LN_2, PI};
    let sigma = doppler_hwhm / LN_2.sqrt();
    let gauss = |t: f64| (-(t / sigma).powi(2)).exp() / (sigma * PI.sqrt());
    let lorentz = |u: f64| lorentz_hwhm / (PI * (u * u + lorentz_hwhm * lorentz_hwhm));
    let f = |t: f64| gauss(t) * lorentz(detuning - t);
    let lim = 12.0 * sigma;
    let breaks = [
        detuning - 10.0 * lorentz_hwhm,
        detuning - lorentz_hwhm,
        detuning,
        detuning + lorentz_hwhm,
        detuning + 10.0 * lorentz_hwhm,
        -sigma,
        0.0,
        sigma,
    ];
    // The peak value bounds the answer from above; scale the tolerance with a
    // cheap estimate of the result so tiny wing values are still resolved.
    let estimate = f(detuning.clamp(-lim, lim)).max(f(0.0)) * sigma * 1e-3;
    integrate(f, -lim, lim, &breaks, (estimate * 1e-10).max(1e-300))
}
