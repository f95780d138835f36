//! One-dimensional quadrature: adaptive Gauss–Kronrod, fixed Gauss–Legendre,
//! and the `x = a + (b−a) sin²θ` map that flattens inverse-square-root endpoints.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights at the odd positions.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol·|I|)` or `max_intervals` is hit,
/// in which case [`Error::Quadrature`] carries the residual estimate.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        if !value.is_finite() {
            return Err(Error::Quadrature { estimate: value, error_estimate: error });
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Estimate { value, error });
        }
        if parts.len() >= max_intervals {
            return Err(Error::Quadrature { estimate: value, error_estimate: error });
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval collapsed to machine resolution
            return Err(Error::Quadrature { estimate: value, error_estimate: error });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Default tolerance for density integrals.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;

/// Integrate `g(x)` over `[a, b]` after the substitution `x = a + (b−a)sin²θ`.
///
/// `g` may carry integrable `1/√(x−a)` and `1/√(b−x)` singularities; the
/// Jacobian `2(b−a) sinθ cosθ` cancels them and the θ-integrand stays bounded.
pub fn integrate_sin2<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, abs_tol: f64) -> Result<Estimate> {
    let w = b - a;
    if w == 0.0 {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let h = |t: f64| {
        let (s, c) = t.sin_cos();
        let x = a + w * s * s;
        let jac = 2.0 * w * s * c;
        if jac == 0.0 {
            0.0
        } else {
            g(x) * jac
        }
    };
    adaptive(h, 0.0, FRAC_PI_2, abs_tol, 1e-13, 4000)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn odd_order_has_zero_node() {
        let (x, w) = gauss_legendre(5);
        assert!(x[2].abs() < 1e-15);
        assert!((w[2] - 128.0 / 225.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_smooth_and_kinked_integrands() {
        let e = adaptive(|x: f64| x.exp(), 0.0, 1.0, 1e-13, 0.0, 100).unwrap();
        assert!((e.value - (std::f64::consts::E - 1.0)).abs() < 1e-13);
        let e = adaptive(|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-12, 0.0, 500).unwrap();
        assert!((e.value - (0.045 + 0.245)).abs() < 1e-11);
    }

    #[test]
    fn sin2_map_removes_inverse_sqrt_edges() {
        // ∫_0^1 dx / √(x(1−x)) = π
        let e = integrate_sin2(|x: f64| 1.0 / (x * (1.0 - x)).sqrt(), 0.0, 1.0, 1e-13).unwrap();
        assert!((e.value - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let r = adaptive(|x: f64| 1.0 / x, 0.0, 1.0, 1e-12, 0.0, 50);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
