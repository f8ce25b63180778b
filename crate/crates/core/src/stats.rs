//! Stylized-fact estimators over price series.
//!
//! Standard deviations use the population convention (divide by the count).
//! The squared-return autocorrelation is the raw moment
//! `<g^2(t) g^2(t + tau)>` without mean subtraction, so an uncorrelated
//! normalized series sits at 1 rather than 0.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StatsError {
    #[error("series too short: need more than {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("non-positive price {value} at index {index}")]
    NonPositivePrice { index: usize, value: f64 },
    #[error("degenerate series: zero standard deviation")]
    Degenerate,
    #[error("lag {tau} out of range for series of length {len}")]
    TauOutOfRange { tau: usize, len: usize },
    #[error("histogram needs at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("no usable samples")]
    Empty,
    #[error("cannot pool return interval {got} with {expected}")]
    Mismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, StatsError>;

/// Relative returns `r(t) = (p(t+dt) - p(t)) / p(t)` for `t = warmup..n-dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub dt: usize,
    pub start: usize,
    pub values: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fraction of returns that are exactly zero.
    pub fn zero_fraction(&self) -> f64 {
        zero_fraction(&self.values)
    }
}

pub fn zero_fraction(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&r| r == 0.0).count() as f64 / values.len() as f64
}

/// Population mean and standard deviation, two-pass.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean0 = values.iter().sum::<f64>() / n;
    // second pass corrects the mean for rounding in the first
    let correction = values.iter().map(|x| x - mean0).sum::<f64>() / n;
    let mean = mean0 + correction;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn returns(prices: &[f64], dt: usize, warmup: usize) -> Result<ReturnSeries> {
    if dt == 0 {
        return Err(StatsError::TooShort { needed: 1, got: 0 });
    }
    let needed = dt + warmup;
    if prices.len() <= needed {
        return Err(StatsError::TooShort { needed, got: prices.len() });
    }
    if let Some((index, &value)) = prices.iter().enumerate().find(|(_, &p)| !(p > 0.0)) {
        return Err(StatsError::NonPositivePrice { index, value });
    }
    let values: Vec<f64> = (warmup..prices.len() - dt)
        .map(|t| (prices[t + dt] - prices[t]) / prices[t])
        .collect();
    let (mean, std) = mean_std(&values);
    Ok(ReturnSeries { dt, start: warmup, values, mean, std })
}

/// `g(t) = (r(t) - mean) / sigma`.
pub fn normalize(rs: &ReturnSeries) -> Result<Vec<f64>> {
    normalize_values(&rs.values)
}

pub fn normalize_values(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    let (mean, std) = mean_std(values);
    if !(std > 0.0) || values.iter().all(|&v| v == values[0]) {
        return Err(StatsError::Degenerate);
    }
    Ok(values.iter().map(|x| (x - mean) / std).collect())
}

/// Standard deviation inside each window of `window` consecutive values,
/// advancing by `stride`. Windows whose values are all identical report
/// exactly zero.
pub fn windowed_volatility(values: &[f64], window: usize, stride: usize) -> Result<Vec<f64>> {
    if window == 0 || values.len() < window {
        return Err(StatsError::TooShort { needed: window.max(1) - 1, got: values.len() });
    }
    let stride = stride.max(1);
    let n = values.len();
    let (shift, _) = mean_std(values);
    let mut s1 = vec![0.0; n + 1];
    let mut s2 = vec![0.0; n + 1];
    // length of the run of identical values ending at each index
    let mut run = vec![0usize; n];
    for (i, &x) in values.iter().enumerate() {
        let d = x - shift;
        s1[i + 1] = s1[i] + d;
        s2[i + 1] = s2[i] + d * d;
        run[i] = if i > 0 && values[i - 1] == x { run[i - 1] + 1 } else { 1 };
    }
    let w = window as f64;
    Ok((0..=n - window)
        .step_by(stride)
        .map(|start| {
            let end = start + window;
            if run[end - 1] >= window {
                return 0.0;
            }
            let sum = s1[end] - s1[start];
            let sum_sq = s2[end] - s2[start];
            ((sum_sq - sum * sum / w) / w).max(0.0).sqrt()
        })
        .collect())
}

const FFT_MIN_LAGS: usize = 32;

/// `acf(tau) = mean_t g^2(t) g^2(t + tau)` for each requested lag.
pub fn acf_squared(g: &[f64], taus: &[usize]) -> Result<Vec<f64>> {
    let n = g.len();
    if let Some(&tau) = taus.iter().find(|&&tau| tau >= n) {
        return Err(StatsError::TauOutOfRange { tau, len: n });
    }
    let sq: Vec<f64> = g.iter().map(|x| x * x).collect();
    if taus.len() < FFT_MIN_LAGS {
        return Ok(taus
            .iter()
            .map(|&tau| {
                let sum: f64 = sq[..n - tau].iter().zip(&sq[tau..]).map(|(a, b)| a * b).sum();
                sum / (n - tau) as f64
            })
            .collect());
    }
    let sums = lagged_products_fft(&sq);
    Ok(taus.iter().map(|&tau| sums[tau] / (n - tau) as f64).collect())
}

/// `sum_t x(t) x(t + tau)` for every `tau < x.len()`, via zero-padded FFT.
fn lagged_products_fft(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    forward.process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    inverse.process(&mut buf);
    let scale = 1.0 / size as f64;
    buf[..n].iter().map(|z| z.re * scale).collect()
}

/// `mean(g^4) - 3` of the normalized series.
pub fn excess_kurtosis(values: &[f64]) -> Result<f64> {
    if values.len() < 4 {
        return Err(StatsError::TooShort { needed: 3, got: values.len() });
    }
    let g = normalize_values(values)?;
    Ok(g.iter().map(|x| x.powi(4)).sum::<f64>() / g.len() as f64 - 3.0)
}

pub fn skewness(values: &[f64]) -> Result<f64> {
    let g = normalize_values(values)?;
    Ok(g.iter().map(|x| x.powi(3)).sum::<f64>() / g.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogNormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub used: usize,
    /// Non-positive samples left out of the fit.
    pub excluded: usize,
}

impl LogNormalFit {
    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 || self.sigma <= 0.0 {
            return 0.0;
        }
        let z = (x.ln() - self.mu) / self.sigma;
        (-0.5 * z * z).exp() / (x * self.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }
}

/// Fits a log-normal by the mean and standard deviation of `ln(x)` over the
/// positive samples.
pub fn fit_log_normal(values: &[f64]) -> Result<LogNormalFit> {
    let logs: Vec<f64> = values.iter().filter(|&&v| v > 0.0).map(|v| v.ln()).collect();
    if logs.is_empty() {
        return Err(StatsError::Empty);
    }
    let (mu, sigma) = mean_std(&logs);
    Ok(LogNormalFit { mu, sigma, used: logs.len(), excluded: values.len() - logs.len() })
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// Standard normal density.
    Normal,
    /// Log-normal fitted to the positive samples.
    LogNormal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Normalized so that `sum(density * width) = 1` over the binned range.
    pub density: Vec<f64>,
    /// Reference density evaluated at the bin centres.
    pub reference: Vec<f64>,
    pub out_of_range: usize,
    pub excluded_non_positive: usize,
    pub fit: Option<LogNormalFit>,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Density histogram with uniform bins over `range`, or over the sample
/// range when `range` is `None`. For [`Reference::LogNormal`] non-positive
/// samples are dropped and counted.
pub fn histogram(
    values: &[f64],
    bins: usize,
    range: Option<(f64, f64)>,
    reference: Reference,
) -> Result<Histogram> {
    if bins < 2 {
        return Err(StatsError::TooFewBins(bins));
    }
    let (kept, fit): (Vec<f64>, Option<LogNormalFit>) = match reference {
        Reference::Normal => (values.iter().copied().filter(|v| v.is_finite()).collect(), None),
        Reference::LogNormal => {
            let fit = fit_log_normal(values)?;
            (values.iter().copied().filter(|&v| v > 0.0 && v.is_finite()).collect(), Some(fit))
        }
    };
    if kept.is_empty() {
        return Err(StatsError::Empty);
    }
    let excluded_non_positive = values.len() - kept.len();
    let (lo, hi) = range.unwrap_or_else(|| {
        let lo = kept.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = kept.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    });
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0u64; bins];
    let mut out_of_range = 0;
    for &v in &kept {
        if v < lo || v > hi {
            out_of_range += 1;
            continue;
        }
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let inside: u64 = counts.iter().sum();
    let density = counts
        .iter()
        .map(|&c| if inside == 0 { 0.0 } else { c as f64 / (inside as f64 * width) })
        .collect();
    let centers: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let reference = centers
        .iter()
        .map(|&x| match (reference, fit) {
            (Reference::LogNormal, Some(f)) => f.pdf(x),
            _ => normal_pdf(x),
        })
        .collect();
    Ok(Histogram { edges, counts, density, reference, out_of_range, excluded_non_positive, fit })
}

/// Histogram of `|values|` with logarithmically spaced bins over
/// `[lo, hi]`. Returns `(bin_center, density)` pairs.
pub fn log_abs_histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
    if bins < 2 {
        return Err(StatsError::TooFewBins(bins));
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let step = (lhi - llo) / bins as f64;
    let mut counts = vec![0u64; bins];
    let mut inside = 0u64;
    for v in values.iter().map(|v| v.abs()) {
        if v < lo || v > hi {
            continue;
        }
        let idx = (((v.ln() - llo) / step) as usize).min(bins - 1);
        counts[idx] += 1;
        inside += 1;
    }
    Ok((0..bins)
        .map(|i| {
            let a = (llo + step * i as f64).exp();
            let b = (llo + step * (i + 1) as f64).exp();
            let d = if inside == 0 { 0.0 } else { counts[i] as f64 / (inside as f64 * (b - a)) };
            ((a * b).sqrt(), d)
        })
        .collect())
}

/// Everything the stylized-fact report needs for one return interval.
#[derive(Debug, Clone)]
pub struct IntervalReport {
    pub dt: usize,
    pub returns: ReturnSeries,
    pub normalized: Vec<f64>,
    pub excess_kurtosis: f64,
    pub volatility: Vec<f64>,
    pub acf_taus: Vec<usize>,
    pub acf: Vec<f64>,
}

pub struct AnalysisRequest {
    pub dt: usize,
    pub warmup: usize,
    pub window: usize,
    pub stride: usize,
    pub max_tau: usize,
}

pub fn analyze(prices: &[f64], req: &AnalysisRequest) -> Result<IntervalReport> {
    let rs = returns(prices, req.dt, req.warmup)?;
    let g = normalize(&rs)?;
    let excess_kurtosis = excess_kurtosis(&rs.values)?;
    let volatility = windowed_volatility(&g, req.window, req.stride)?;
    let max_tau = req.max_tau.min(g.len() - 1);
    let acf_taus: Vec<usize> = (0..=max_tau).collect();
    let acf = acf_squared(&g, &acf_taus)?;
    Ok(IntervalReport {
        dt: req.dt,
        returns: rs,
        normalized: g,
        excess_kurtosis,
        volatility,
        acf_taus,
        acf,
    })
}

/// Combines per-run reports for one interval: normalized returns and
/// volatilities are concatenated, the ACF is averaged over runs.
pub fn pool(reports: &[IntervalReport]) -> Result<IntervalReport> {
    let first = reports.first().ok_or(StatsError::Empty)?;
    if let Some(r) = reports.iter().find(|r| r.dt != first.dt) {
        return Err(StatsError::Mismatch { expected: first.dt, got: r.dt });
    }
    let values: Vec<f64> = reports.iter().flat_map(|r| r.returns.values.iter().copied()).collect();
    let (mean, std) = mean_std(&values);
    let normalized: Vec<f64> = reports.iter().flat_map(|r| r.normalized.iter().copied()).collect();
    let volatility = reports.iter().flat_map(|r| r.volatility.iter().copied()).collect();
    let lags = reports.iter().map(|r| r.acf.len()).min().unwrap_or(0);
    let acf = (0..lags)
        .map(|k| reports.iter().map(|r| r.acf[k]).sum::<f64>() / reports.len() as f64)
        .collect();
    Ok(IntervalReport {
        dt: first.dt,
        returns: ReturnSeries { dt: first.dt, start: first.returns.start, values, mean, std },
        excess_kurtosis: excess_kurtosis(&normalized)?,
        normalized,
        volatility,
        acf_taus: first.acf_taus[..lags].to_vec(),
        acf,
    })
}
