//! Checking samples and curves against the analytic laws: histograms,
//! L1/KS distances, goodness-of-fit tests, the principal-value form of the
//! saddle-point equation and the Coulomb energy functional.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::density::{require_open_min_wall, DensityCurve, DensityLaw};
use crate::error::{domain, invalid, Error, Result};
use crate::params::BarrierSpec;
use crate::quadrature::adaptive;

/// Fixed-bin histogram that also counts samples outside its range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// All samples, including out-of-range ones.
    pub total: u64,
    pub below: u64,
    pub above: u64,
}

/// Bin `samples` into `n_bins` equal bins over `range` (right edge inclusive).
pub fn histogram(samples: &[f64], n_bins: usize, range: (f64, f64)) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::Empty("no samples to bin".into()));
    }
    if n_bins == 0 {
        return Err(invalid("n_bins must be positive"));
    }
    let (lo, hi) = range;
    if !(hi > lo) {
        return Err(invalid(format!("empty histogram range [{lo}, {hi}]")));
    }
    let width = (hi - lo) / n_bins as f64;
    let edges: Vec<f64> = (0..=n_bins).map(|k| lo + k as f64 * width).collect();
    let mut counts = vec![0u64; n_bins];
    let (mut below, mut above) = (0, 0);
    for &x in samples {
        if x < lo {
            below += 1;
        } else if x > hi {
            above += 1;
        } else {
            let k = (((x - lo) / width) as usize).min(n_bins - 1);
            counts[k] += 1;
        }
    }
    Ok(Histogram { edges, counts, total: samples.len() as u64, below, above })
}

impl Histogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Counts divided by `total · width`; integrates to the in-range fraction.
    pub fn density(&self) -> Vec<f64> {
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, w)| c as f64 / (self.total as f64 * (w[1] - w[0])))
            .collect()
    }

    pub fn out_of_range(&self) -> u64 {
        self.below + self.above
    }
}

/// Distance between a histogram and a density curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveDistance {
    pub l1: f64,
    pub ks: f64,
    /// Histogram range and curve support do not overlap.
    pub disjoint: bool,
}

/// L1 distance between the histogram density and the curve's bin averages,
/// plus any mass (of either) outside the histogram range; KS distance
/// between the binned empirical CDF and the curve CDF at the bin edges.
///
/// Bin averages (CDF differences) rather than midpoint values keep the
/// comparison unbiased next to inverse-square-root edges.
pub fn compare_density(h: &Histogram, curve: &DensityCurve) -> Result<CurveDistance> {
    let (a, b) = curve.support;
    let (lo, hi) = (h.edges[0], h.edges[h.edges.len() - 1]);
    if b < lo || a > hi {
        return Ok(CurveDistance { l1: 2.0, ks: 1.0, disjoint: true });
    }
    let total = h.total as f64;
    let cdf: Vec<f64> = h.edges.iter().map(|&e| curve.cdf(e)).collect();
    let mut l1 = h.out_of_range() as f64 / total + cdf[0] + (1.0 - cdf[cdf.len() - 1]);
    let mut ks = (h.below as f64 / total - cdf[0]).abs();
    let mut emp = h.below as f64;
    for (k, &c) in h.counts.iter().enumerate() {
        let curve_mass = cdf[k + 1] - cdf[k];
        l1 += (c as f64 / total - curve_mass).abs();
        emp += c as f64;
        ks = ks.max((emp / total - cdf[k + 1]).abs());
    }
    Ok(CurveDistance { l1, ks, disjoint: false })
}

/// One-sample KS distance `sup |F_n − F|` of raw samples against `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("no samples".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// CDF of `law` tabulated in `θ` on `n` cells and interpolated linearly in
/// `θ`; fast enough for KS distances over millions of samples.
pub fn cdf_interpolant(law: &DensityLaw, n: usize) -> Result<impl Fn(f64) -> f64 + use<>> {
    if n == 0 {
        return Err(invalid("need at least one cell"));
    }
    let (a, b) = law.support();
    let h = FRAC_PI_2 / n as f64;
    let mut table = Vec::with_capacity(n + 1);
    table.push(0.0);
    let mut acc = 0.0;
    for k in 0..n {
        let t0 = k as f64 * h;
        acc += adaptive(|t| law.theta_weight(t), t0, t0 + h, 1e-15, 1e-13, 200)?.value;
        table.push(acc);
    }
    let total = acc;
    Ok(move |x: f64| {
        if x <= a {
            return 0.0;
        }
        if x >= b {
            return 1.0;
        }
        let t = ((x - a) / (b - a)).sqrt().asin() / h;
        let k = (t as usize).min(n - 1);
        let f = t - k as f64;
        ((table[k] + f * (table[k + 1] - table[k])) / total).clamp(0.0, 1.0)
    })
}

/// Result of a goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value
/// (Stephens' small-sample correction to the effective size).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("two-sample KS needs both samples".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    let p = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
    Ok(TestResult { statistic: d, p_value: p })
}

/// Pearson χ² test of `observed` counts against `expected` counts; bins with
/// expected count below 5 are merged into their right neighbour.
pub fn chi_square_test(observed: &[u64], expected: &[f64], fitted_params: usize) -> Result<TestResult> {
    if observed.len() != expected.len() {
        return Err(Error::DimensionMismatch { expected: expected.len(), got: observed.len() });
    }
    let mut stat = 0.0;
    let mut bins = 0usize;
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        o_acc += o as f64;
        e_acc += e;
        if e_acc >= 5.0 {
            stat += (o_acc - e_acc).powi(2) / e_acc;
            bins += 1;
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 {
        stat += (o_acc - e_acc).powi(2) / e_acc;
        bins += 1;
    }
    if bins <= fitted_params + 1 {
        return Err(invalid("too few populated bins for a chi-square test"));
    }
    let df = (bins - 1 - fitted_params) as f64;
    let dist = ChiSquared::new(df).map_err(|e| invalid(e.to_string()))?;
    Ok(TestResult { statistic: stat, p_value: 1.0 - dist.cdf(stat) })
}

/// Minimum distance from the support edges for [`pv_saddle_residual`].
pub const PV_EDGE_MARGIN: f64 = 1e-3;

/// `PV ∫ ρ_ζ(x′)/(x − x′) dx′ − 1/(2(1−ζ))` for the min-wall equilibrium
/// density at an interior point `x`.
///
/// The pole is removed by subtracting `ρ(x)/(x − x′)`, whose principal value
/// over the support is `ln((x−a)/(b−x))`; the remainder is integrated in the
/// `sin²θ` variable, split at `x`.
pub fn pv_saddle_residual(zeta: f64, x: f64) -> Result<f64> {
    require_open_min_wall(zeta)?;
    let law = DensityLaw::equilibrium(BarrierSpec::min_wall(zeta)?)?;
    let (a, b) = law.support();
    if !(x - a > PV_EDGE_MARGIN && b - x > PV_EDGE_MARGIN) {
        return Err(domain(format!("x = {x} is within {PV_EDGE_MARGIN} of the support [{a}, {b}]")));
    }
    let w = b - a;
    let rho_x = law.density(x);
    let theta_x = ((x - a) / w).sqrt().asin();
    let f = |t: f64| {
        let jac = w * (2.0 * t).sin();
        (law.theta_weight(t) - rho_x * jac) / (x - law.x_of_theta(t))
    };
    let left = adaptive(f, 0.0, theta_x, 1e-12, 1e-12, 2000)?;
    let right = adaptive(f, theta_x, FRAC_PI_2, 1e-12, 1e-12, 2000)?;
    let pv = left.value + right.value + rho_x * ((x - a) / (b - x)).ln();
    Ok(pv - 0.5 / (1.0 - zeta))
}

/// Parametrization `t ↦ (x(t), ρ(x(t))·dx/dt)` of a curve on `[0, t_max]`.
struct Chart<'a> {
    t_max: f64,
    x_of: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    weight: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    t_of: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
}

fn chart(curve: &DensityCurve) -> Chart<'_> {
    let (a, b) = curve.support;
    match &curve.law {
        Some(law) => Chart {
            t_max: FRAC_PI_2,
            x_of: Box::new(move |t| law.x_of_theta(t)),
            weight: Box::new(move |t| law.theta_weight(t)),
            t_of: Box::new(move |x| ((x - a) / (b - a)).clamp(0.0, 1.0).sqrt().asin()),
        },
        None => Chart {
            t_max: b - a,
            x_of: Box::new(move |t| a + t),
            weight: Box::new(move |t| curve.density(a + t)),
            t_of: Box::new(move |x| x - a),
        },
    }
}

/// `−½ ∬ ρ(x) ρ(x′) ln|x − x′| dx dx′`.
///
/// Nested adaptive quadrature in the `sin²θ` variable (or `x` for tabulated
/// curves); the inner integral is split at the diagonal so the logarithmic
/// singularity sits at an interval endpoint.
pub fn log_interaction_energy(curve: &DensityCurve) -> Result<f64> {
    let (a, b) = curve.support;
    if a == b {
        return Err(domain("a point mass has infinite interaction energy"));
    }
    let c = chart(curve);
    let inner = |x: f64| -> f64 {
        let tx = (c.t_of)(x);
        let g = |t: f64| (c.weight)(t) * (x - (c.x_of)(t)).abs().ln();
        let l = adaptive(g, 0.0, tx, 1e-13, 1e-12, 2000);
        let r = adaptive(g, tx, c.t_max, 1e-13, 1e-12, 2000);
        match (l, r) {
            (Ok(l), Ok(r)) => l.value + r.value,
            _ => f64::NAN,
        }
    };
    let outer = adaptive(|t| (c.weight)(t) * inner((c.x_of)(t)), 0.0, c.t_max, 1e-11, 1e-11, 2000)?;
    Ok(-0.5 * outer.value)
}

/// Coulomb-gas energy `½∫xρ − ½∬ρρ ln|x−x′|` of a feasible curve under a min
/// wall at `zeta`. The normalization and trace multipliers contribute nothing
/// because the curve must satisfy both constraints to `1e-6`.
pub fn energy_functional(curve: &DensityCurve, zeta: f64) -> Result<f64> {
    curve.check_feasible(1e-6)?;
    if curve.support.0 < zeta - 1e-12 {
        return Err(Error::Infeasible(format!(
            "support starts at {} below the wall {zeta}",
            curve.support.0
        )));
    }
    let linear = 0.5 * curve.expect(|x| x)?;
    Ok(linear + log_interaction_energy(curve)?)
}

/// A perturbation of `base` that keeps its support, normalization and first
/// moment: `θ`-weight times `1 + Σ cₖ cos(2kθ)` over the three `modes`, with
/// `c` spanning the null space of the two linear constraints and scaled so
/// that `max|cₖ| = amplitude`.
pub fn feasible_bump(base: &DensityLaw, modes: [usize; 3], amplitude: f64) -> Result<DensityLaw> {
    if modes.contains(&0) {
        return Err(invalid("modes are numbered from 1"));
    }
    let mut rows = [[0.0; 3]; 2];
    for (col, &k) in modes.iter().enumerate() {
        let kk = 2.0 * k as f64;
        let c = |t: f64| base.theta_weight(t) * (kk * t).cos();
        rows[0][col] = adaptive(c, 0.0, FRAC_PI_2, 1e-14, 1e-13, 2000)?.value;
        rows[1][col] = adaptive(|t| c(t) * base.x_of_theta(t), 0.0, FRAC_PI_2, 1e-14, 1e-13, 2000)?.value;
    }
    let [r0, r1] = rows;
    let null = [
        r0[1] * r1[2] - r0[2] * r1[1],
        r0[2] * r1[0] - r0[0] * r1[2],
        r0[0] * r1[1] - r0[1] * r1[0],
    ];
    let scale = null.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(invalid("degenerate constraint matrix"));
    }
    let mut coeffs = vec![0.0; *modes.iter().max().unwrap_or(&1)];
    for (&k, v) in modes.iter().zip(null) {
        coeffs[k - 1] += amplitude * v / scale;
    }
    Ok(DensityLaw::Modulated { base: Box::new(base.clone()), coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::seeded_rng;
    use rand::Rng;

    fn min_curve(z: f64) -> DensityCurve {
        DensityCurve::for_barrier(&BarrierSpec::min_wall(z).unwrap(), 64).unwrap()
    }

    #[test]
    fn histogram_basics() {
        let h = histogram(&[0.5; 10], 1, (0.0, 1.0)).unwrap();
        assert_eq!(h.counts, vec![10]);
        assert!(histogram(&[], 3, (0.0, 1.0)).is_err());
        assert!(histogram(&[1.0], 3, (1.0, 1.0)).is_err());
        let h = histogram(&[-1.0, 0.2, 1.0, 2.0], 2, (0.0, 1.0)).unwrap();
        assert_eq!((h.below, h.above, h.counts.clone()), (1, 1, vec![1, 1]));

        let mut rng = seeded_rng(1, 0);
        let xs: Vec<f64> = (0..1_000_000).map(|_| rng.random::<f64>()).collect();
        let h = histogram(&xs, 10, (0.0, 1.0)).unwrap();
        let tol = 3.0 * (1e5_f64 * 0.9).sqrt();
        assert!(h.counts.iter().all(|&c| (c as f64 - 1e5).abs() < tol));
        let integral: f64 = h.density().iter().map(|d| d * 0.1).sum();
        assert!((integral - 1.0).abs() < 1e-12);
    }

    fn draw(law: &DensityLaw, n: usize, seed: u64) -> Vec<f64> {
        // inverse-CDF sampling by bisection
        let mut rng = seeded_rng(seed, 0);
        let (a, b) = law.support();
        let grid: Vec<f64> = (0..=2000).map(|k| a + (b - a) * k as f64 / 2000.0).collect();
        let cdf: Vec<f64> = grid.iter().map(|&x| law.cdf(x)).collect();
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let k = cdf.partition_point(|&c| c < u).clamp(1, grid.len() - 1);
                let f = (u - cdf[k - 1]) / (cdf[k] - cdf[k - 1]).max(1e-300);
                grid[k - 1] + f * (grid[k] - grid[k - 1])
            })
            .collect()
    }

    #[test]
    fn compare_density_self_consistency_and_shift() {
        let law = DensityLaw::equilibrium(BarrierSpec::min_wall(0.5).unwrap()).unwrap();
        let curve = DensityCurve::from_law(law.clone(), 128).unwrap();
        let xs = draw(&law, 1_000_000, 2);
        let h = histogram(&xs, 50, (0.5, 2.5)).unwrap();
        let d = compare_density(&h, &curve).unwrap();
        assert!(d.l1 < 0.02 && d.ks < 0.01, "{d:?}");

        // semicircle shifted by 0.5: exact overlap deficit in L1
        let sc = DensityCurve::from_law(DensityLaw::Semicircle { radius: 1.0 }, 64).unwrap();
        let shifted: Vec<f64> = draw(&DensityLaw::Semicircle { radius: 1.0 }, 400_000, 3)
            .into_iter()
            .map(|x| x + 0.5)
            .collect();
        let h = histogram(&shifted, 200, (0.0, 2.5)).unwrap();
        let d = compare_density(&h, &sc).unwrap();
        let exact = adaptive(
            |x: f64| {
                (crate::density::semicircle_density(x, 1.0) - crate::density::semicircle_density(x - 0.5, 1.0)).abs()
            },
            0.0,
            2.5,
            1e-10,
            1e-10,
            2000,
        )
        .unwrap()
        .value;
        assert!((d.l1 - exact).abs() < 0.03, "{} vs {exact}", d.l1);

        let far = histogram(&[10.0, 11.0], 4, (10.0, 12.0)).unwrap();
        let d = compare_density(&far, &sc).unwrap();
        assert!(d.disjoint && d.l1 == 2.0);
    }

    #[test]
    fn exact_binning_converges() {
        let law = DensityLaw::Semicircle { radius: 1.0 };
        let curve = DensityCurve::from_law(law.clone(), 64).unwrap();
        // exact expected counts: the only residual is rounding of the counts
        for bins in [10usize, 40, 160] {
            let total = 10_000_000u64;
            let edges: Vec<f64> = (0..=bins).map(|k| 2.0 * k as f64 / bins as f64).collect();
            let counts = edges.windows(2).map(|w| ((law.cdf(w[1]) - law.cdf(w[0])) * total as f64).round() as u64).collect();
            let h = Histogram { edges, counts, total, below: 0, above: 0 };
            let d = compare_density(&h, &curve).unwrap();
            assert!(d.l1 < 1e-4 && d.ks < 1e-6, "{bins}: {d:?}");
        }
    }

    #[test]
    fn interpolated_cdf_tracks_quadrature() {
        let law = DensityLaw::equilibrium(BarrierSpec::max_wall(2.0).unwrap()).unwrap();
        let f = cdf_interpolant(&law, 2000).unwrap();
        for x in [0.0, 0.01, 0.3, 1.0, 1.7, 1.999, 2.0] {
            assert!((f(x) - law.cdf(x)).abs() < 1e-6, "{x}");
        }
    }

    #[test]
    fn raw_and_two_sample_ks() {
        let mut rng = seeded_rng(4, 0);
        let a: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_distance(&a, |x| x.clamp(0.0, 1.0)).unwrap() < 0.03);
        let t = ks_two_sample(&a, &b).unwrap();
        assert!(t.p_value > 0.01, "{t:?}");
        let c: Vec<f64> = b.iter().map(|x| x * 0.9).collect();
        assert!(ks_two_sample(&a, &c).unwrap().p_value < 1e-6);
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn chi_square_accepts_matching_counts() {
        let t = chi_square_test(&[98, 103, 99, 100], &[100.0; 4], 0).unwrap();
        assert!(t.p_value > 0.9);
        let t = chi_square_test(&[150, 50, 100, 100], &[100.0; 4], 0).unwrap();
        assert!(t.p_value < 1e-6);
    }

    #[test]
    fn pv_residual_examples() {
        assert!(pv_saddle_residual(0.5, 1.5).unwrap().abs() < 1e-3);
        assert!(pv_saddle_residual(0.0, 2.0).unwrap().abs() < 1e-3);
        for z in [0.0, 0.25, 0.5, 0.75] {
            let (a, b) = (z, 4.0 - 3.0 * z);
            let r: Vec<f64> = (1..40)
                .map(|k| pv_saddle_residual(z, a + (b - a) * k as f64 / 40.0).unwrap())
                .collect();
            let hi = r.iter().cloned().fold(f64::MIN, f64::max);
            let lo = r.iter().cloned().fold(f64::MAX, f64::min);
            assert!(hi.abs() < 1e-3 && lo.abs() < 1e-3 && hi - lo < 2e-3, "zeta {z}: {lo} {hi}");
        }
        assert!(pv_saddle_residual(0.5, 0.5005).is_err());
        assert!(pv_saddle_residual(1.0, 1.0).is_err());
    }

    #[test]
    fn energy_matches_saddle_value() {
        for z in [0.0, 0.25, 0.5, 0.75] {
            let e = energy_functional(&min_curve(z), z).unwrap();
            let expected = 0.75 - 0.5 * (1.0 - z).ln();
            assert!((e - expected).abs() < 1e-4, "zeta {z}: {e} vs {expected}");
            let log_part = log_interaction_energy(&min_curve(z)).unwrap();
            assert!((log_part - (0.25 - 0.5 * (1.0 - z).ln())).abs() < 1e-4);
        }
        assert!((energy_functional(&min_curve(0.5), 0.5).unwrap() - 1.096_57).abs() < 1e-4);
    }

    #[test]
    fn energy_rejects_infeasible_curves() {
        let sc = DensityCurve::from_law(DensityLaw::Semicircle { radius: 0.5 }, 32).unwrap();
        assert!(energy_functional(&sc, 0.0).is_ok());
        assert!(matches!(energy_functional(&sc, 0.8), Err(Error::Infeasible(_))));
        let grid: Vec<f64> = (0..=100).map(|k| 2.0 * k as f64 / 100.0).collect();
        let flat = DensityCurve::tabulated(grid, vec![0.25; 101]).unwrap();
        assert!(matches!(energy_functional(&flat, 0.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn saddle_point_is_a_minimum() {
        let base = DensityLaw::equilibrium(BarrierSpec::min_wall(0.3).unwrap()).unwrap();
        let e0 = energy_functional(&DensityCurve::from_law(base.clone(), 16).unwrap(), 0.3).unwrap();
        for modes in [[1, 2, 3], [2, 3, 4], [1, 3, 5]] {
            for amp in [1e-2, -1e-2] {
                let bump = feasible_bump(&base, modes, amp).unwrap();
                let curve = DensityCurve::from_law(bump, 16).unwrap();
                let e = energy_functional(&curve, 0.3).unwrap();
                assert!(e > e0, "{modes:?} {amp}: {e} <= {e0}");
            }
        }
    }
}
