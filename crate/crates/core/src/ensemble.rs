//! Random bipartite density matrices `ρ₁₂ = U diag(λ) U†`, their partial
//! transpose and log negativity, and the shifted-GUE model `Y = X + I/N`.

use std::io::{Read, Write};

use faer::{Mat, MatRef, Par, Side};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::{BarrierSpec, EnsembleParams};
use crate::sampler::{mcmc_sample, seeded_rng, ChainConfig, ChainDiagnostics, Spectrum};

/// Split of an `N = n1·n2` dimensional space into subsystems 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub n1: usize,
    pub n2: usize,
}

impl Bipartition {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(invalid("subsystem dimensions must be positive"));
        }
        Ok(Self { n1, n2 })
    }

    pub fn dim(&self) -> usize {
        self.n1 * self.n2
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: n });
        }
        Ok(())
    }
}

/// Haar-random `n × n` unitary: QR of a complex Ginibre matrix with the
/// columns of `Q` rephased by `R_kk/|R_kk|`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat<Complex64> {
    let g = Mat::<Complex64>::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.compute_Q();
    let r = qr.R();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { d / d.norm() };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Hermitian, unit-trace density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Mat<Complex64>);

impl DensityMatrix {
    /// Wraps `m` after checking hermiticity and trace to `1e-12`.
    pub fn new(m: Mat<Complex64>) -> Result<Self> {
        let dev = hermiticity_deviation(m.as_ref())?;
        if dev > 1e-12 {
            return Err(Error::NotHermitian(dev));
        }
        let tr = trace(m.as_ref()).re;
        if (tr - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("trace {tr} differs from 1")));
        }
        Ok(Self(m))
    }

    pub fn as_mat(&self) -> MatRef<'_, Complex64> {
        self.0.as_ref()
    }

    pub fn into_inner(self) -> Mat<Complex64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        let m = &self.0;
        let n = m.nrows();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                s += m[(i, j)].norm_sqr();
            }
        }
        s
    }
}

fn trace(m: MatRef<'_, Complex64>) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

fn hermiticity_deviation(m: MatRef<'_, Complex64>) -> Result<f64> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
    }
    let mut dev: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    Ok(dev)
}

/// `U diag(s) U†`.
pub fn assemble_density(s: &Spectrum, u: MatRef<'_, Complex64>) -> Result<DensityMatrix> {
    let n = s.len();
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.nrows() });
    }
    let scaled = Mat::<Complex64>::from_fn(n, n, |i, j| u[(i, j)] * s.values()[j]);
    let mut rho = &scaled * u.adjoint();
    // restore exact hermiticity lost to rounding
    for j in 0..n {
        rho[(j, j)] = Complex64::new(rho[(j, j)].re, 0.0);
        for i in 0..j {
            let avg = 0.5 * (rho[(i, j)] + rho[(j, i)].conj());
            rho[(i, j)] = avg;
            rho[(j, i)] = avg.conj();
        }
    }
    Ok(DensityMatrix(rho))
}

/// Partial transpose on subsystem 2. With row index `i·n2 + α` and column
/// index `j·n2 + β`, entry `((i,β),(j,α))` of the result is `ρ((i,α),(j,β))`.
pub fn partial_transpose(rho: MatRef<'_, Complex64>, parts: &Bipartition) -> Result<Mat<Complex64>> {
    parts.check(rho.nrows())?;
    parts.check(rho.ncols())?;
    let n2 = parts.n2;
    Ok(Mat::from_fn(rho.nrows(), rho.ncols(), |r, c| {
        let (i, b) = (r / n2, r % n2);
        let (j, a) = (c / n2, c % n2);
        rho[(i * n2 + a, j * n2 + b)]
    }))
}

/// Partial transpose on subsystem 1 (same spectrum as on subsystem 2).
pub fn partial_transpose_first(rho: MatRef<'_, Complex64>, parts: &Bipartition) -> Result<Mat<Complex64>> {
    parts.check(rho.nrows())?;
    parts.check(rho.ncols())?;
    let n2 = parts.n2;
    Ok(Mat::from_fn(rho.nrows(), rho.ncols(), |r, c| {
        let (j, a) = (r / n2, r % n2);
        let (i, b) = (c / n2, c % n2);
        rho[(i * n2 + a, j * n2 + b)]
    }))
}

/// Real eigenvalues of a Hermitian matrix, ascending; may be negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtSpectrum {
    values: Vec<f64>,
}

impl PtSpectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("spectrum".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
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

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `N μᵢ`, ascending.
    pub fn rescaled(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.values.len() as f64;
        self.values.iter().map(move |v| v * n)
    }
}

/// Eigenvalues of a Hermitian matrix (hermiticity checked to `1e-10`).
pub fn hermitian_spectrum(m: MatRef<'_, Complex64>) -> Result<PtSpectrum> {
    let dev = hermiticity_deviation(m)?;
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    let vals = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Domain(format!("eigensolver failed: {e:?}")))?;
    PtSpectrum::new(vals)
}

/// `ln Σ|μᵢ|`, natural log; zero for a PPT spectrum.
pub fn log_negativity(pt: &PtSpectrum) -> f64 {
    if pt.min() >= 0.0 {
        return 0.0;
    }
    pt.values.iter().map(|v| v.abs()).sum::<f64>().ln()
}

/// Spectrum of `Y = X + I/N` with `X` from the GUE scaled so that
/// `⟨tr X²⟩ = purity − 1/N`: diagonal entries real with variance `σ²`,
/// off-diagonal complex with `E|X_ij|² = σ²`, `σ² = (purity − 1/N)/N²`.
pub fn gue_model_sample<R: Rng + ?Sized>(n: usize, purity: f64, rng: &mut R) -> Result<PtSpectrum> {
    if n == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let nf = n as f64;
    if !(1.0 / nf - 1e-15..=1.0).contains(&purity) {
        return Err(Error::Domain(format!("purity {purity} outside [1/N, 1]")));
    }
    let var = ((purity - 1.0 / nf) / (nf * nf)).max(0.0);
    if var == 0.0 {
        return PtSpectrum::new(vec![1.0 / nf; n]);
    }
    let sd = var.sqrt();
    let off = sd * std::f64::consts::FRAC_1_SQRT_2;
    let mut x = Mat::<Complex64>::zeros(n, n);
    for j in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        x[(j, j)] = Complex64::new(sd * d + 1.0 / nf, 0.0);
        for i in 0..j {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(off * re, off * im);
            x[(i, j)] = z;
            x[(j, i)] = z.conj();
        }
    }
    hermitian_spectrum(x.as_ref())
}

/// One matrix of a partial-transpose experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtSample {
    pub spectrum: Spectrum,
    pub pt: PtSpectrum,
    pub log_negativity: f64,
}

/// Ensemble mean of the log negativity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_matrices: usize,
    /// Fraction of matrices with a negative PT eigenvalue.
    pub npt_fraction: f64,
}

impl NegativityEstimate {
    pub fn from_samples(samples: &[PtSample]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("no matrices".into()));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().map(|s| s.log_negativity).sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|s| (s.log_negativity - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let npt = samples.iter().filter(|s| s.pt.min() < 0.0).count() as f64 / n;
        Ok(Self { mean, stderr: (var / n).sqrt(), n_matrices: samples.len(), npt_fraction: npt })
    }
}

/// Draw `n_matrices` spectra from the constrained chain, pair each with an
/// independent Haar unitary, and partially transpose.
///
/// The chain runs `cfg.burn_in + n_matrices·cfg.thin` sweeps, so `cfg.steps`
/// is ignored. A wall pinned at `ζ = 1` admits only `λᵢ = 1/N` and skips the
/// chain. Matrix `j` draws its unitary from stream `j` of `cfg.seed`.
pub fn sample_pt_ensemble(
    params: &EnsembleParams,
    parts: &Bipartition,
    barrier: &BarrierSpec,
    n_matrices: usize,
    cfg: &ChainConfig,
) -> Result<(Vec<PtSample>, Option<ChainDiagnostics>)> {
    parts.check(params.n)?;
    barrier.validate()?;
    if n_matrices == 0 {
        return Err(invalid("n_matrices must be positive"));
    }
    faer::set_global_parallelism(Par::Seq);
    let (spectra, diag) = if barrier.is_pinned() {
        (vec![Spectrum::uniform(params.n); n_matrices], None)
    } else {
        let run = ChainConfig { steps: cfg.burn_in + n_matrices * cfg.thin, ..*cfg };
        let (s, d) = mcmc_sample(params, barrier, &run)?;
        (s, Some(d))
    };
    let samples = spectra
        .into_par_iter()
        .enumerate()
        .map(|(j, spectrum)| {
            let mut rng = seeded_rng(cfg.seed, j as u64);
            let u = haar_unitary(params.n, &mut rng);
            let rho = assemble_density(&spectrum, u.as_ref())?;
            let pt = hermitian_spectrum(partial_transpose(rho.as_mat(), parts)?.as_ref())?;
            let log_negativity = log_negativity(&pt);
            Ok(PtSample { spectrum, pt, log_negativity })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((samples, diag))
}

/// Mean log negativity over `n_matrices` constrained random states.
pub fn average_negativity(
    params: &EnsembleParams,
    parts: &Bipartition,
    barrier: &BarrierSpec,
    n_matrices: usize,
    cfg: &ChainConfig,
) -> Result<NegativityEstimate> {
    let (samples, _) = sample_pt_ensemble(params, parts, barrier, n_matrices, cfg)?;
    NegativityEstimate::from_samples(&samples)
}

const DUMP_MAGIC: &[u8; 8] = b"SLDPMAT1";
const ENDIAN_TAG: u32 = 0x0102_0304;

/// Write a complex matrix as: 8-byte magic `SLDPMAT1`, `u32` endianness tag
/// `0x01020304`, `u64` rows, `u64` cols, then row-major `(re, im)` pairs of
/// `f64`. All fields little-endian.
pub fn write_matrix_dump<W: Write>(mut w: W, m: MatRef<'_, Complex64>) -> std::io::Result<()> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&ENDIAN_TAG.to_le_bytes())?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Inverse of [`write_matrix_dump`].
pub fn read_matrix_dump<R: Read>(mut r: R) -> Result<Mat<Complex64>> {
    let io = |e: std::io::Error| invalid(format!("matrix dump: {e}"));
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != DUMP_MAGIC {
        return Err(invalid("matrix dump: bad magic"));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4).map_err(io)?;
    if u32::from_le_bytes(b4) != ENDIAN_TAG {
        return Err(invalid("matrix dump: unexpected endianness tag"));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8).map_err(io)?;
    let rows = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8).map_err(io)?;
    let cols = u64::from_le_bytes(b8) as usize;
    let mut data = vec![0.0f64; 2 * rows * cols];
    for v in data.iter_mut() {
        r.read_exact(&mut b8).map_err(io)?;
        *v = f64::from_le_bytes(b8);
    }
    Ok(Mat::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        Complex64::new(data[k], data[k + 1])
    }))
}
