//! Sampling the fixed-trace Schmidt spectrum.
//!
//! Two independent routes:
//!
//! * a Metropolis chain on the unit simplex whose pair-transfer moves keep
//!   `Σλ = 1` by construction and reject any state crossing the wall;
//! * exact draws from Gaussian random pure states (`β = 1, 2`), whose reduced
//!   density matrix spectrum follows the same joint law.

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::params::{BarrierSpec, EnsembleParams, WallSide};

/// The generator used everywhere in the crate.
pub type SeededRng = ChaCha12Rng;

/// Generator for stream `stream` of master seed `seed`.
///
/// Streams are ChaCha stream ids, so `(seed, k)` for different `k` never
/// overlap. Matrix `j` of an ensemble uses stream `j`; the eigenvalue chain
/// uses [`CHAIN_STREAM`].
pub fn seeded_rng(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id reserved for the Metropolis chain.
pub const CHAIN_STREAM: u64 = u32::MAX as u64;

/// Schmidt eigenvalues, ascending, on the unit simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts `values` and checks `λᵢ ∈ [0, 1]`, `|Σλ − 1| ≤ 1e-12`.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("spectrum".into()));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(invalid(format!("eigenvalue {v} outside [0, 1]")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("eigenvalues sum to {sum}, not 1")));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    /// Maximally mixed spectrum `λᵢ = 1/N`.
    pub fn uniform(n: usize) -> Self {
        Self { values: vec![1.0 / n as f64; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `Nλᵢ`, ascending.
    pub fn rescaled(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.values.len() as f64;
        self.values.iter().map(move |v| v * n)
    }

    /// `tr ρ² = Σλᵢ²`.
    pub fn purity(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Von Neumann entropy `−Σλ ln λ` in nats.
    pub fn entropy(&self) -> f64 {
        -self.values.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()
    }
}

/// Log of the joint eigenvalue density without its normalization and delta:
/// `[β(M−N+1)/2 − 1] Σ ln λᵢ + β Σ_{i<j} ln|λᵢ − λⱼ|`.
///
/// Zero eigenvalues and degeneracies give `−∞`.
pub fn log_weight(values: &[f64], params: &EnsembleParams) -> f64 {
    if values.iter().any(|&v| v <= 0.0) {
        return f64::NEG_INFINITY;
    }
    let a = params.eigenvalue_exponent();
    let mut w = a * values.iter().map(|v| v.ln()).sum::<f64>();
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = (values[i] - values[j]).abs();
            if d == 0.0 {
                return f64::NEG_INFINITY;
            }
            w += params.beta * d.ln();
        }
    }
    w
}

/// Trace-preserving move `λᵢ += ε`, `λⱼ −= ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTransfer {
    pub i: usize,
    pub j: usize,
    pub epsilon: f64,
}

impl PairTransfer {
    /// Distinct indices uniformly at random and `ε ~ U(−δ, δ)`.
    pub fn draw<R: Rng + ?Sized>(n: usize, delta: f64, rng: &mut R) -> Self {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let epsilon = delta * (2.0 * rng.random::<f64>() - 1.0);
        Self { i, j, epsilon }
    }

    /// New values of the two touched coordinates.
    #[inline]
    pub fn moved(&self, values: &[f64]) -> (f64, f64) {
        (values[self.i] + self.epsilon, values[self.j] - self.epsilon)
    }
}

/// Candidate state of a pair transfer (unsorted, possibly infeasible).
pub fn propose_pair_transfer<R: Rng + ?Sized>(s: &Spectrum, delta: f64, rng: &mut R) -> (PairTransfer, Vec<f64>) {
    let mv = PairTransfer::draw(s.len(), delta, rng);
    let mut v = s.values().to_vec();
    let (vi, vj) = mv.moved(&v);
    v[mv.i] = vi;
    v[mv.j] = vj;
    (mv, v)
}

/// Change of [`log_weight`] under a pair transfer, in `O(N)`.
///
/// Returns `−∞` when the move leaves the simplex or makes two levels
/// coincide.
pub fn log_weight_delta(values: &[f64], mv: &PairTransfer, exponent: f64, beta: f64) -> f64 {
    let (i, j) = (mv.i, mv.j);
    let (old_i, old_j) = (values[i], values[j]);
    let (new_i, new_j) = mv.moved(values);
    if new_i <= 0.0 || new_j <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut log_ratio = 0.0;
    let (mut num, mut den) = (1.0, 1.0);
    let mut pending = 0;
    for (k, &v) in values.iter().enumerate() {
        if k == i || k == j {
            continue;
        }
        num *= (new_i - v) * (new_j - v);
        den *= (old_i - v) * (old_j - v);
        pending += 1;
        if pending == 16 {
            log_ratio += (num / den).abs().ln();
            num = 1.0;
            den = 1.0;
            pending = 0;
        }
    }
    log_ratio += (num / den).abs().ln();
    log_ratio += ((new_i - new_j) / (old_i - old_j)).abs().ln();
    let vandermonde = beta * log_ratio;
    if !vandermonde.is_finite() && vandermonde < 0.0 {
        return f64::NEG_INFINITY;
    }
    let confinement = if exponent == 0.0 { 0.0 } else { exponent * ((new_i / old_i) * (new_j / old_j)).ln() };
    vandermonde + confinement
}

/// Metropolis chain settings. One sweep is `N` proposals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Total sweeps, burn-in included.
    pub steps: usize,
    pub burn_in: usize,
    /// Initial half-width `δ` of the transfer, in units of `λ`.
    pub step_width: f64,
    /// Emit every `thin`-th sweep after burn-in.
    pub thin: usize,
    pub seed: u64,
}

impl ChainConfig {
    pub fn new(steps: usize, burn_in: usize, thin: usize, seed: u64) -> Result<Self> {
        let cfg = Self { steps, burn_in, step_width: 1e-3, thin, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps <= self.burn_in {
            return Err(invalid(format!("steps ({}) must exceed burn_in ({})", self.steps, self.burn_in)));
        }
        if !(self.step_width > 0.0) {
            return Err(invalid("step_width must be positive"));
        }
        if self.thin == 0 {
            return Err(invalid("thin must be at least 1"));
        }
        Ok(())
    }

    /// Number of emitted spectra.
    pub fn kept(&self) -> usize {
        (self.steps - self.burn_in) / self.thin
    }
}

/// Post-burn-in chain statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub acceptance_rate: f64,
    /// Integrated autocorrelation time of `λ_min`, in sweeps.
    pub autocorrelation_time: f64,
    pub n_kept: usize,
    /// Proposal half-width after burn-in tuning.
    pub step_width: f64,
    /// Acceptance rate fell outside `[0.05, 0.95]`.
    pub acceptance_warning: bool,
}

const TUNE_WINDOW: usize = 50;

/// A running Metropolis chain.
pub struct Chain {
    values: Vec<f64>,
    params: EnsembleParams,
    barrier: BarrierSpec,
    delta: f64,
    rng: SeededRng,
    accepted: u64,
    proposed: u64,
}

impl Chain {
    /// Start from `λᵢ = 1/N` plus a jitter small enough to stay inside the
    /// wall. Fails when the wall admits only the pinned spectrum.
    pub fn new(params: EnsembleParams, barrier: BarrierSpec, step_width: f64, rng: SeededRng) -> Result<Self> {
        barrier.validate()?;
        if params.n < 2 {
            return Err(invalid("chain needs n >= 2"));
        }
        match barrier.side {
            WallSide::Min if barrier.zeta >= 1.0 => {
                return Err(domain("min wall at zeta >= 1 leaves no room to move"))
            }
            WallSide::Max if barrier.zeta <= 1.0 => {
                return Err(domain("max wall at zeta <= 1 leaves no room to move"))
            }
            _ => {}
        }
        let mut rng = rng;
        let n = params.n;
        let gap = match barrier.side {
            WallSide::None => 1.0,
            _ => (barrier.zeta - 1.0).abs().min(1.0),
        };
        let amp = 0.25 * gap / n as f64;
        let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let mean = u.iter().sum::<f64>() / n as f64;
        let mut values: Vec<f64> = u.iter().map(|x| 1.0 / n as f64 + amp * (x - mean)).collect();
        let sum: f64 = values.iter().sum();
        values.iter_mut().for_each(|v| *v /= sum);
        Ok(Self { values, params, barrier, delta: step_width, rng, accepted: 0, proposed: 0 })
    }

    #[inline]
    fn admits(&self, v: f64) -> bool {
        let x = v * self.params.n as f64;
        v > 0.0 && v < 1.0 && self.barrier.admits(x)
    }

    /// One sweep of `N` proposals; returns the number accepted.
    pub fn sweep(&mut self) -> usize {
        let n = self.params.n;
        let exponent = self.params.eigenvalue_exponent();
        let beta = self.params.beta;
        let mut acc = 0;
        for _ in 0..n {
            let mv = PairTransfer::draw(n, self.delta, &mut self.rng);
            let (vi, vj) = mv.moved(&self.values);
            if !self.admits(vi) || !self.admits(vj) {
                continue;
            }
            let dw = log_weight_delta(&self.values, &mv, exponent, beta);
            if dw >= 0.0 || self.rng.random::<f64>().ln() < dw {
                self.values[mv.i] = vi;
                self.values[mv.j] = vj;
                acc += 1;
            }
        }
        self.accepted += acc as u64;
        self.proposed += n as u64;
        acc
    }

    /// Burn in for `sweeps`, adapting `δ` toward 20–50 % acceptance.
    pub fn burn_in(&mut self, sweeps: usize) {
        let n = self.params.n;
        let max_delta = 1.0 / n as f64;
        let mut window = 0;
        let mut window_acc = 0;
        for _ in 0..sweeps {
            window_acc += self.sweep();
            window += 1;
            if window == TUNE_WINDOW {
                let rate = window_acc as f64 / (TUNE_WINDOW * n) as f64;
                if rate < 0.2 {
                    self.delta *= 0.7;
                } else if rate > 0.5 {
                    self.delta = (self.delta * 1.4).min(max_delta);
                }
                window = 0;
                window_acc = 0;
            }
        }
        self.accepted = 0;
        self.proposed = 0;
    }

    pub fn step_width(&self) -> f64 {
        self.delta
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// Raw current state (unsorted).
    pub fn state(&self) -> &[f64] {
        &self.values
    }

    pub fn current_min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Current state as a sorted, renormalized [`Spectrum`].
    pub fn spectrum(&self) -> Spectrum {
        let sum: f64 = self.values.iter().sum();
        let mut v: Vec<f64> = self.values.iter().map(|x| x / sum).collect();
        v.sort_by(f64::total_cmp);
        Spectrum { values: v }
    }
}

/// Run a Metropolis chain and return the thinned post-burn-in spectra.
///
/// The step width adapts during burn-in only. The autocorrelation time in
/// the diagnostics is measured on the per-sweep `λ_min` series.
pub fn mcmc_sample(
    params: &EnsembleParams,
    barrier: &BarrierSpec,
    cfg: &ChainConfig,
) -> Result<(Vec<Spectrum>, ChainDiagnostics)> {
    cfg.validate()?;
    let mut chain = Chain::new(*params, *barrier, cfg.step_width, seeded_rng(cfg.seed, CHAIN_STREAM))?;
    chain.burn_in(cfg.burn_in);
    let sampling = cfg.steps - cfg.burn_in;
    let mut out = Vec::with_capacity(cfg.kept());
    let mut trace = Vec::with_capacity(sampling);
    for sweep in 1..=sampling {
        chain.sweep();
        trace.push(chain.current_min());
        if sweep % cfg.thin == 0 {
            out.push(chain.spectrum());
        }
    }
    let acceptance_rate = chain.acceptance_rate();
    let diag = ChainDiagnostics {
        acceptance_rate,
        autocorrelation_time: integrated_autocorrelation_time(&trace),
        n_kept: out.len(),
        step_width: chain.step_width(),
        acceptance_warning: !(0.05..=0.95).contains(&acceptance_rate),
    };
    Ok((out, diag))
}

/// Thinning `ceil(2τ)` from a pilot chain of `pilot_sweeps` after burn-in.
pub fn pilot_thinning(
    params: &EnsembleParams,
    barrier: &BarrierSpec,
    burn_in: usize,
    pilot_sweeps: usize,
    seed: u64,
) -> Result<usize> {
    let cfg = ChainConfig::new(burn_in + pilot_sweeps, burn_in, pilot_sweeps.max(1), seed)?;
    let (_, diag) = mcmc_sample(params, barrier, &cfg)?;
    Ok((2.0 * diag.autocorrelation_time).ceil().max(1.0) as usize)
}

/// Integrated autocorrelation time `τ = 1/2 + Σ_{t≥1} ρ(t)` with Geyer's
/// initial positive sequence truncation; `τ = 1/2` for independent draws.
pub fn integrated_autocorrelation_time(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 0.5;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let autocov = |lag: usize| -> f64 {
        centred[..n - lag].iter().zip(&centred[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
    };
    let c0 = autocov(0);
    if c0 <= 0.0 {
        return 0.5;
    }
    let mut total = 0.0;
    let mut k = 0;
    while 2 * k + 1 < n / 2 {
        let pair = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        total += pair;
        k += 1;
    }
    (total - 0.5).max(0.5)
}

/// Exact draw of the Schmidt spectrum of a random pure state in `C^N ⊗ C^M`
/// (`β = 2`) or `R^N ⊗ R^M` (`β = 1`) with i.i.d. Gaussian amplitudes.
pub fn direct_pure_state_spectrum<R: Rng + ?Sized>(params: &EnsembleParams, rng: &mut R) -> Result<Spectrum> {
    let (n, m) = (params.n, params.m);
    if n == 1 {
        return Ok(Spectrum { values: vec![1.0] });
    }
    let mut raw: Vec<f64> = if params.beta == 2.0 {
        let c = Mat::<Complex64>::from_fn(n, m, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let gram = &c * c.adjoint();
        gram.self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::Domain(format!("eigensolver failed: {e:?}")))?
    } else if params.beta == 1.0 {
        let c = Mat::<f64>::from_fn(n, m, |_, _| rng.sample(StandardNormal));
        let gram = &c * c.transpose();
        gram.self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::Domain(format!("eigensolver failed: {e:?}")))?
    } else {
        return Err(Error::Unsupported(format!(
            "direct sampling needs beta in {{1, 2}}, got {}",
            params.beta
        )));
    };
    raw.iter_mut().for_each(|v| *v = v.max(0.0));
    let trace: f64 = raw.iter().sum();
    raw.iter_mut().for_each(|v| *v /= trace);
    raw.sort_by(f64::total_cmp);
    Ok(Spectrum { values: raw })
}

/// Monte Carlo estimate of `P(Nλ_min > ζ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub zeta: f64,
    pub p: f64,
    /// Binomial standard error; for zero successes, the 95 % upper bound `3/n`.
    pub stderr: f64,
    pub successes: u64,
    pub draws: u64,
    pub zero_successes: bool,
}

impl TailEstimate {
    fn from_counts(zeta: f64, successes: u64, draws: u64) -> Self {
        let n = draws as f64;
        let p = successes as f64 / n;
        let zero = successes == 0;
        let stderr = if zero { 3.0 / n } else { (p * (1.0 - p) / n).sqrt() };
        Self { zeta, p, stderr, successes, draws, zero_successes: zero }
    }

    /// `−ln p̂ / (βN²)`, the finite-N rate-function estimate.
    pub fn empirical_rate(&self, params: &EnsembleParams) -> f64 {
        let n = params.n as f64;
        -self.p.ln() / (params.beta * n * n)
    }
}

/// Fraction of `n_draws` exact pure-state spectra with `Nλ_min > ζ`.
pub fn estimate_tail_probability<R: Rng + ?Sized>(
    params: &EnsembleParams,
    zeta: f64,
    n_draws: usize,
    rng: &mut R,
) -> Result<TailEstimate> {
    Ok(estimate_tail_curve(params, &[zeta], n_draws, rng)?[0])
}

/// Tail estimates for several `ζ` from one shared set of draws, so the curve
/// is non-increasing in `ζ` by construction.
pub fn estimate_tail_curve<R: Rng + ?Sized>(
    params: &EnsembleParams,
    zetas: &[f64],
    n_draws: usize,
    rng: &mut R,
) -> Result<Vec<TailEstimate>> {
    if n_draws == 0 {
        return Err(invalid("n_draws must be positive"));
    }
    if let Some(z) = zetas.iter().find(|z| !(0.0..=1.0).contains(*z)) {
        return Err(domain(format!("min-wall tail needs 0 <= zeta <= 1, got {z}")));
    }
    let n = params.n as f64;
    let mut counts = vec![0u64; zetas.len()];
    for _ in 0..n_draws {
        let x = direct_pure_state_spectrum(params, rng)?.min() * n;
        for (c, &z) in counts.iter_mut().zip(zetas) {
            if x > z {
                *c += 1;
            }
        }
    }
    Ok(zetas.iter().zip(counts).map(|(&z, c)| TailEstimate::from_counts(z, c, n_draws as u64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(n: usize, beta: f64) -> EnsembleParams {
        EnsembleParams::square(n, beta).unwrap()
    }

    #[test]
    fn log_weight_examples() {
        let p = sq(2, 2.0);
        assert_eq!(log_weight(&[0.5, 0.5], &p), f64::NEG_INFINITY);
        assert!((log_weight(&[0.25, 0.75], &p) - 2.0 * 0.5_f64.ln()).abs() < 1e-15);
        let p1 = sq(2, 1.0);
        let expected = -0.5 * (0.25_f64.ln() + 0.75_f64.ln()) + 0.5_f64.ln();
        assert!((log_weight(&[0.25, 0.75], &p1) - expected).abs() < 1e-15);
        assert!((expected - 0.143_841).abs() < 1e-5);
        assert_eq!(log_weight(&[0.0, 1.0], &p1), f64::NEG_INFINITY);
    }

    #[test]
    fn delta_matches_full_log_weight() {
        let mut rng = seeded_rng(3, 0);
        let p = EnsembleParams::new(6, 9, 1.0).unwrap();
        let s = Spectrum::new(vec![0.05, 0.1, 0.15, 0.2, 0.22, 0.28]).unwrap();
        for _ in 0..200 {
            let (mv, cand) = propose_pair_transfer(&s, 0.03, &mut rng);
            let full = log_weight(&cand, &p) - log_weight(s.values(), &p);
            let fast = log_weight_delta(s.values(), &mv, p.eigenvalue_exponent(), p.beta);
            if full.is_finite() {
                assert!((full - fast).abs() < 1e-10, "{full} vs {fast}");
            } else {
                assert_eq!(fast, f64::NEG_INFINITY);
            }
        }
    }

    #[test]
    fn proposal_preserves_trace_and_zero_move_is_identity() {
        let s = Spectrum::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let mv = PairTransfer { i: 1, j: 3, epsilon: 0.0 };
        let (a, b) = mv.moved(s.values());
        assert_eq!((a, b), (0.2, 0.4));
        assert_eq!(log_weight_delta(s.values(), &mv, 0.0, 2.0), 0.0);
        let mut rng = seeded_rng(1, 0);
        for _ in 0..100 {
            let (_, c) = propose_pair_transfer(&s, 0.05, &mut rng);
            assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        let neg = PairTransfer { i: 0, j: 3, epsilon: -0.2 };
        assert_eq!(log_weight_delta(s.values(), &neg, 0.0, 2.0), f64::NEG_INFINITY);
    }

    #[test]
    fn pair_indices_are_distinct() {
        let mut rng = seeded_rng(9, 0);
        for _ in 0..1000 {
            let mv = PairTransfer::draw(3, 0.1, &mut rng);
            assert_ne!(mv.i, mv.j);
            assert!(mv.epsilon.abs() <= 0.1);
        }
    }

    #[test]
    fn chain_respects_min_wall_and_trace() {
        let p = sq(20, 2.0);
        let b = BarrierSpec::min_wall(0.5).unwrap();
        let cfg = ChainConfig::new(3000, 1000, 10, 7).unwrap();
        let (spectra, diag) = mcmc_sample(&p, &b, &cfg).unwrap();
        assert_eq!(spectra.len(), 200);
        assert_eq!(diag.n_kept, 200);
        assert!(diag.acceptance_rate > 0.15 && diag.acceptance_rate < 0.6, "{diag:?}");
        assert!(diag.autocorrelation_time >= 0.5);
        for s in &spectra {
            assert!((s.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(s.min() * 20.0 >= 0.5);
        }
    }

    #[test]
    fn chain_respects_max_wall() {
        let p = sq(15, 2.0);
        let b = BarrierSpec::max_wall(1.6).unwrap();
        let cfg = ChainConfig::new(2000, 500, 5, 11).unwrap();
        let (spectra, _) = mcmc_sample(&p, &b, &cfg).unwrap();
        assert!(spectra.iter().all(|s| s.max() * 15.0 <= 1.6));
    }

    #[test]
    fn same_seed_same_chain() {
        let p = sq(8, 2.0);
        let b = BarrierSpec::none();
        let cfg = ChainConfig::new(400, 100, 3, 42).unwrap();
        let (a, _) = mcmc_sample(&p, &b, &cfg).unwrap();
        let (c, _) = mcmc_sample(&p, &b, &cfg).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn infeasible_walls_are_domain_errors() {
        let p = sq(5, 2.0);
        let cfg = ChainConfig::new(10, 1, 1, 0).unwrap();
        let err = mcmc_sample(&p, &BarrierSpec::min_wall(1.0).unwrap(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        assert!(mcmc_sample(&p, &BarrierSpec::max_wall(1.0).unwrap(), &cfg).is_err());
    }

    #[test]
    fn chain_config_validation() {
        assert!(ChainConfig::new(10, 10, 1, 0).is_err());
        assert!(ChainConfig::new(10, 0, 0, 0).is_err());
        let mut c = ChainConfig::new(10, 0, 1, 0).unwrap();
        c.step_width = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn autocorrelation_time_of_iid_and_ar1() {
        let mut rng = seeded_rng(5, 0);
        let iid: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let tau = integrated_autocorrelation_time(&iid);
        assert!((tau - 0.5).abs() < 0.1, "{tau}");
        // AR(1) with φ = 0.9 has τ = (1+φ)/(2(1−φ)) = 9.5
        let mut x = 0.0;
        let ar: Vec<f64> = (0..200_000)
            .map(|_| {
                x = 0.9 * x + rng.sample::<f64, _>(StandardNormal);
                x
            })
            .collect();
        let tau = integrated_autocorrelation_time(&ar);
        assert!((tau - 9.5).abs() < 1.5, "{tau}");
        assert_eq!(integrated_autocorrelation_time(&[1.0; 100]), 0.5);
    }

    #[test]
    fn direct_sampler_basics() {
        let mut rng = seeded_rng(2, 0);
        let one = direct_pure_state_spectrum(&EnsembleParams::new(1, 7, 2.0).unwrap(), &mut rng).unwrap();
        assert_eq!(one.values(), &[1.0]);
        for beta in [1.0, 2.0] {
            let s = direct_pure_state_spectrum(&EnsembleParams::new(4, 6, beta).unwrap(), &mut rng).unwrap();
            assert_eq!(s.len(), 4);
            assert!((s.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(s.values().windows(2).all(|w| w[0] <= w[1]));
        }
        let err = direct_pure_state_spectrum(&EnsembleParams::new(3, 3, 4.0).unwrap(), &mut rng);
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }

    #[test]
    fn tail_estimates() {
        let p = sq(3, 2.0);
        let mut rng = seeded_rng(4, 0);
        let t = estimate_tail_probability(&p, 0.0, 2000, &mut rng).unwrap();
        assert_eq!(t.p, 1.0);
        let t = estimate_tail_probability(&p, 1.0, 500, &mut rng).unwrap();
        assert!(t.zero_successes);
        assert!((t.stderr - 3.0 / 500.0).abs() < 1e-15);
        let curve = estimate_tail_curve(&p, &[0.0, 0.05, 0.1, 0.2, 0.4], 5000, &mut rng).unwrap();
        assert!(curve.windows(2).all(|w| w[1].p <= w[0].p));
        assert!(estimate_tail_probability(&p, 1.5, 10, &mut rng).is_err());
    }

    #[test]
    fn spectrum_validation_and_summaries() {
        assert!(Spectrum::new(vec![]).is_err());
        assert!(Spectrum::new(vec![0.5, 0.6]).is_err());
        assert!(Spectrum::new(vec![-0.1, 1.1]).is_err());
        let s = Spectrum::new(vec![0.75, 0.25]).unwrap();
        assert_eq!(s.values(), &[0.25, 0.75]);
        assert!((s.purity() - 0.625).abs() < 1e-15);
        let u = Spectrum::uniform(4);
        assert!((u.entropy() - 4.0_f64.ln()).abs() < 1e-15);
        assert_eq!(u.rescaled().collect::<Vec<_>>(), vec![1.0; 4]);
    }
}
