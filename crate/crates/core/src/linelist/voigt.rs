//! Area-normalized Voigt line shape via Weideman's rational approximation
//! of the Faddeeva function w(z) = exp(-z²) erfc(-iz).

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

use super::LineListError;

const TERMS: usize = 32;

struct Weideman {
    l: f64,
    coeffs: [f64; TERMS],
}

/// Coefficients of the expansion in powers of `(L + iz)/(L - iz)`.
fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = TERMS as f64;
        let m = 2 * TERMS;
        let l = (n / 2f64.sqrt()).sqrt();
        // f(t) = exp(-t²)(L² + t²) sampled at t = L tan(θ/2), θ = kπ/M, k = -M+1..M-1,
        // then a real DFT of length 2M (the k = ±M sample is zero).
        let f = |k: i64| {
            let theta = k as f64 * PI / m as f64;
            let t = l * (theta / 2.0).tan();
            (-t * t).exp() * (l * l + t * t)
        };
        let mut coeffs = [0.0; TERMS];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let order = (j + 1) as f64;
            let mut acc = 0.0;
            for k in -(m as i64) + 1..m as i64 {
                acc += f(k) * (PI * order * k as f64 / m as f64).cos();
            }
            *c = acc / (2 * m) as f64;
        }
        Weideman { l, coeffs }
    })
}

/// Faddeeva function for `Im z >= 0`.
pub fn faddeeva(z: Complex64) -> Complex64 {
    let table = weideman();
    let i = Complex64::i();
    let denom = table.l - i * z;
    let zz = (table.l + i * z) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for &c in table.coeffs.iter().rev() {
        p = p * zz + c;
    }
    2.0 * p / (denom * denom) + (1.0 / PI.sqrt()) / denom
}

/// Gaussian line shape with half width at half maximum `hwhm`.
pub fn gaussian_profile(detuning: f64, hwhm: f64) -> f64 {
    let x = detuning / hwhm;
    (LN_2 / PI).sqrt() / hwhm * (-LN_2 * x * x).exp()
}

/// Lorentzian line shape with half width at half maximum `hwhm`.
pub fn lorentz_profile(detuning: f64, hwhm: f64) -> f64 {
    hwhm / (PI * (detuning * detuning + hwhm * hwhm))
}

/// Voigt profile value in cm for a detuning in cm⁻¹.
///
/// The pure-Doppler and pure-Lorentz limits are evaluated in closed form.
pub fn voigt_profile(detuning: f64, doppler_hwhm: f64, lorentz_hwhm: f64) -> Result<f64, LineListError> {
    if !(doppler_hwhm >= 0.0 && lorentz_hwhm >= 0.0) {
        return Err(LineListError::InvalidWidths { doppler_hwhm, lorentz_hwhm });
    }
    Ok(if doppler_hwhm == 0.0 && lorentz_hwhm == 0.0 {
        return Err(LineListError::DegenerateWidths);
    } else if lorentz_hwhm == 0.0 {
        gaussian_profile(detuning, doppler_hwhm)
    } else if doppler_hwhm == 0.0 {
        lorentz_profile(detuning, lorentz_hwhm)
    } else {
        voigt_unchecked(detuning, doppler_hwhm, lorentz_hwhm)
    })
}

/// Voigt value for strictly positive widths; no validation.
#[inline]
pub(crate) fn voigt_unchecked(detuning: f64, doppler_hwhm: f64, lorentz_hwhm: f64) -> f64 {
    // 1/e half width of the Gaussian
    let sigma = doppler_hwhm / LN_2.sqrt();
    let z = Complex64::new(detuning.abs() / sigma, lorentz_hwhm / sigma);
    faddeeva(z).re / (sigma * PI.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faddeeva_known_values() {
        // w(i) = exp(1) erfc(1)
        let w = faddeeva(Complex64::new(0.0, 1.0));
        assert!((w.re - 0.427_583_576_155_807).abs() < 1e-12, "{w}");
        assert!(w.im.abs() < 1e-12);
        // w(x) on the real axis has real part exp(-x²)
        for x in [0.0, 0.5, 1.0, 2.0] {
            let w = faddeeva(Complex64::new(x, 0.0));
            assert!((w.re - (-x * x as f64).exp()).abs() < 1e-12, "x={x} w={w}");
        }
    }

    #[test]
    fn pure_limits_are_closed_forms() {
        let g = voigt_profile(0.0, 0.01, 0.0).unwrap();
        assert!((g - (LN_2 / PI).sqrt() / 0.01).abs() <= 1e-12 * g);
        let l = voigt_profile(0.0, 0.0, 0.07).unwrap();
        assert!((l - 1.0 / (PI * 0.07)).abs() <= 1e-12 * l);
    }

    #[test]
    fn degenerate_widths_rejected() {
        assert!(matches!(voigt_profile(0.1, 0.0, 0.0), Err(LineListError::DegenerateWidths)));
        assert!(voigt_profile(0.1, -1.0, 0.1).is_err());
    }

    #[test]
    fn near_limits_approach_closed_forms() {
        // A tiny Lorentz width barely perturbs the Gaussian core.
        let v = voigt_profile(0.005, 0.01, 1e-9).unwrap();
        let g = gaussian_profile(0.005, 0.01);
        assert!((v - g).abs() < 1e-6 * g);
    }
}
