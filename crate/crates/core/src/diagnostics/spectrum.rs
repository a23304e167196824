//! Hann-windowed periodograms, log-domain spline smoothing and the
//! low-frequency rise metric.

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default number of log-spaced spline knots.
pub const DEFAULT_KNOT_COUNT: usize = 24;

/// Spectral values below this fraction of the peak are floored before
/// taking logarithms.
pub const LOG_FLOOR: f64 = 1e-12;

/// Minimum number of grid points between neighbouring spline knots.
pub const MIN_POINTS_PER_SPAN: usize = 4;

/// Frequency bands, in units of the drive frequency, compared by
/// [`low_freq_rise`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct Bands {
    pub low_max: f64,
    pub high_min: f64,
    pub high_max: f64,
}

impl Default for Bands {
    fn default() -> Self {
        Self {
            low_max: 0.1,
            high_min: 0.2,
            high_max: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Window {
    Hann,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerSpectrum {
    /// Angular frequencies `k Δϖ`, `k ≥ 1`.
    pub omega: Vec<f64>,
    pub raw: Vec<f64>,
    /// Spline-smoothed spectrum; empty until [`spline_smooth`] runs.
    pub smooth: Vec<f64>,
    pub sample_interval: f64,
    /// Length of the analysed series.
    pub series_len: usize,
    pub window: Window,
}

impl PowerSpectrum {
    pub fn delta_omega(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.series_len as f64 * self.sample_interval)
    }

    /// Duration of the analysed series.
    pub fn duration(&self) -> f64 {
        self.series_len as f64 * self.sample_interval
    }
}

/// Periodic Hann window of length `n`.
fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let x = std::f64::consts::PI * i as f64 / n as f64;
            x.sin().powi(2)
        })
        .collect()
}

/// Mean-removed, Hann-windowed `x_w`, as analysed by [`periodogram`].
pub fn windowed(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    hann(n)
        .iter()
        .zip(series)
        .map(|(w, x)| w * (x - mean))
        .collect()
}

/// One-sided periodogram normalized so that `Σ S Δϖ` equals the variance
/// of the windowed series.
pub fn periodogram(series: &[f64], sample_interval: f64) -> Result<PowerSpectrum> {
    let n = series.len();
    if n < 128 {
        return Err(Error::InsufficientData(format!(
            "series of length {n} (need at least 128)"
        )));
    }
    if !(sample_interval > 0.0) {
        return Err(Error::InvalidParameter("sample interval must be positive".into()));
    }
    let mut buf: Vec<Complex<f64>> = windowed(series)
        .into_iter()
        .map(|x| Complex::new(x, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let d_omega = 2.0 * std::f64::consts::PI / (n as f64 * sample_interval);
    let norm = 1.0 / ((n * n) as f64 * d_omega);
    let half = n / 2;
    let mut omega = Vec::with_capacity(half);
    let mut raw = Vec::with_capacity(half);
    for (k, x) in buf.iter().enumerate().take(half + 1).skip(1) {
        let paired = !(n % 2 == 0 && k == half);
        let factor = if paired { 2.0 } else { 1.0 };
        omega.push(k as f64 * d_omega);
        raw.push(factor * x.norm_sqr() * norm);
    }
    Ok(PowerSpectrum {
        omega,
        raw,
        smooth: Vec::new(),
        sample_interval,
        series_len: n,
        window: Window::Hann,
    })
}

/// [`periodogram`] of `(t, x)` samples, which must be uniformly spaced.
pub fn periodogram_sampled(times: &[f64], values: &[f64]) -> Result<PowerSpectrum> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::InsufficientData("mismatched or empty series".into()));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1.0));
    if !uniform {
        return Err(Error::InvalidParameter("non-uniform sampling".into()));
    }
    periodogram(values, dt)
}

/// Clamped cubic B-spline basis on `knots` (boundary knots repeated).
struct CubicBasis {
    full: Vec<f64>,
    dim: usize,
}

impl CubicBasis {
    fn new(knots: &[f64]) -> Self {
        let mut full = vec![knots[0]; 3];
        full.extend_from_slice(knots);
        full.extend(std::iter::repeat(knots[knots.len() - 1]).take(3));
        let dim = full.len() - 4;
        Self { full, dim }
    }

    fn eval(&self, x: f64) -> Vec<f64> {
        let t = &self.full;
        let last = t[t.len() - 1];
        let x = x.clamp(t[0], last);
        // Degree-0 indicator, with the right end folded into the last span.
        let mut b: Vec<f64> = (0..t.len() - 1)
            .map(|i| {
                let inside = if x == last {
                    t[i] < x && x <= t[i + 1]
                } else {
                    t[i] <= x && x < t[i + 1]
                };
                if inside {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        for d in 1..=3 {
            for i in 0..t.len() - 1 - d {
                let left = if t[i + d] > t[i] {
                    (x - t[i]) / (t[i + d] - t[i]) * b[i]
                } else {
                    0.0
                };
                let right = if t[i + d + 1] > t[i + 1] {
                    (t[i + d + 1] - x) / (t[i + d + 1] - t[i + 1]) * b[i + 1]
                } else {
                    0.0
                };
                b[i] = left + right;
            }
        }
        b.truncate(self.dim);
        b
    }
}

/// Drops interior knots until every span holds at least
/// [`MIN_POINTS_PER_SPAN`] grid points; log spacing otherwise leaves the
/// lowest spans empty on a linear frequency grid.
fn sparse_merged(candidates: &[f64], x: &[f64]) -> Vec<f64> {
    let last = candidates[candidates.len() - 1];
    let mut knots = vec![candidates[0]];
    let mut j = 0;
    for &k in &candidates[1..candidates.len() - 1] {
        let start = *knots.last().unwrap();
        let count = x[j..].iter().take_while(|&&v| v < k).filter(|&&v| v >= start).count();
        let remaining = x.iter().filter(|&&v| v >= k).count();
        if count >= MIN_POINTS_PER_SPAN && remaining >= MIN_POINTS_PER_SPAN {
            knots.push(k);
            while j < x.len() && x[j] < k {
                j += 1;
            }
        }
    }
    knots.push(last);
    knots
}

/// Least-squares cubic spline fit of `log S` against `log ϖ` with
/// `knot_count` knots spaced evenly in `log ϖ` (or placed at the grid
/// points when `knot_count` reaches the grid size).
pub fn spline_smooth(spectrum: &PowerSpectrum, knot_count: usize) -> Result<PowerSpectrum> {
    if knot_count < 4 {
        return Err(Error::InvalidParameter(format!(
            "knot_count must be at least 4, got {knot_count}"
        )));
    }
    let n = spectrum.omega.len();
    if n < 4 || spectrum.omega.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InsufficientData("degenerate frequency grid".into()));
    }
    let x: Vec<f64> = spectrum.omega.iter().map(|w| w.ln()).collect();
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InsufficientData("frequency grid is not increasing".into()));
    }
    let peak = spectrum.raw.iter().cloned().fold(0.0, f64::max);
    let floor = if peak > 0.0 { peak * LOG_FLOOR } else { f64::MIN_POSITIVE };
    let y: Vec<f64> = spectrum.raw.iter().map(|s| s.max(floor).ln()).collect();

    let knots: Vec<f64> = if knot_count >= n {
        x.clone()
    } else {
        let (lo, hi) = (x[0], x[n - 1]);
        let candidates: Vec<f64> = (0..knot_count)
            .map(|i| lo + (hi - lo) * i as f64 / (knot_count - 1) as f64)
            .collect();
        sparse_merged(&candidates, &x)
    };
    let basis = CubicBasis::new(&knots);
    let design = DMatrix::from_fn(n, basis.dim, |_, _| 0.0);
    let mut design = design;
    for (row, &xi) in x.iter().enumerate() {
        for (col, v) in basis.eval(xi).into_iter().enumerate() {
            design[(row, col)] = v;
        }
    }
    let rhs = DVector::from_vec(y);
    let svd = design.clone().svd(true, true);
    let eps = 1e-12 * svd.singular_values.max();
    let coef = svd
        .solve(&rhs, eps)
        .map_err(|e| Error::InsufficientData(format!("spline fit failed: {e}")))?;
    let fitted = design * coef;
    Ok(PowerSpectrum {
        smooth: fitted.iter().map(|v| v.exp()).collect(),
        ..spectrum.clone()
    })
}

/// Band log-power difference
/// `mean log S̃ over (0, low_max·Ω] − mean log S̃ over [high_min·Ω, high_max·Ω]`.
pub fn low_freq_rise(spectrum: &PowerSpectrum, drive_omega: f64, bands: &Bands) -> Result<f64> {
    if spectrum.smooth.len() != spectrum.omega.len() {
        return Err(Error::InvalidParameter("spectrum has not been smoothed".into()));
    }
    let period = 2.0 * std::f64::consts::PI / drive_omega;
    if spectrum.duration() < 200.0 * period * (1.0 - 1e-9) {
        return Err(Error::InsufficientData(format!(
            "series spans {:.1} drive periods (need 200)",
            spectrum.duration() / period
        )));
    }
    let top = *spectrum.omega.last().unwrap();
    if top < bands.high_max * drive_omega * (1.0 - 1e-9) {
        return Err(Error::InsufficientData(format!(
            "spectrum ends at {top}, below {} Ω",
            bands.high_max
        )));
    }
    let band_mean = |lo: f64, hi: f64| {
        let vals: Vec<f64> = spectrum
            .omega
            .iter()
            .zip(&spectrum.smooth)
            .filter(|(w, _)| **w > lo * (1.0 - 1e-12) && **w <= hi * (1.0 + 1e-12))
            .map(|(_, s)| s.ln())
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    let low = band_mean(f64::MIN_POSITIVE, bands.low_max * drive_omega);
    let high = band_mean(bands.high_min * drive_omega, bands.high_max * drive_omega);
    Ok(low - high)
}

/// Periodogram, smoothing and rise metric in one pass.
pub fn spectrum_and_rise(
    series: &[f64],
    sample_interval: f64,
    drive_omega: f64,
    knot_count: usize,
    bands: &Bands,
) -> Result<(PowerSpectrum, f64)> {
    let s = spline_smooth(&periodogram(series, sample_interval)?, knot_count)?;
    let r = low_freq_rise(&s, drive_omega, bands)?;
    Ok((s, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn white(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    fn synthetic(omega: Vec<f64>, f: impl Fn(f64) -> f64) -> PowerSpectrum {
        let n = omega.len();
        PowerSpectrum {
            raw: omega.iter().map(|&w| f(w)).collect(),
            smooth: Vec::new(),
            sample_interval: std::f64::consts::PI / omega[n - 1],
            series_len: 2 * n,
            window: Window::Hann,
            omega,
        }
    }

    #[test]
    fn sinusoid_peak() {
        let n = 1024;
        let dt = 0.5;
        let k0 = 37;
        let w0 = 2.0 * std::f64::consts::PI * k0 as f64 / (n as f64 * dt);
        let x: Vec<f64> = (0..n).map(|i| (w0 * i as f64 * dt).sin()).collect();
        let s = periodogram(&x, dt).unwrap();
        let (imax, _) = s
            .raw
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        assert!((s.omega[imax] - w0).abs() < 1e-12);
        let mut sorted = s.raw.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        assert!(10.0 * (s.raw[imax] / median).log10() >= 40.0);
    }

    #[test]
    fn parseval_on_random_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..20 {
            let n = 128 + rng.random_range(0..400);
            let dt = 0.1 + rng.random::<f64>();
            let x: Vec<f64> = (0..n)
                .map(|i| rng.random::<f64>() * 3.0 + (i as f64 * 0.01 * trial as f64).sin())
                .collect();
            let s = periodogram(&x, dt).unwrap();
            let xw = windowed(&x);
            let mean = xw.iter().sum::<f64>() / n as f64;
            let var = xw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let total: f64 = s.raw.iter().sum::<f64>() * s.delta_omega();
            assert!(((total - var) / var).abs() < 1e-6, "n={n}: {total} vs {var}");
            assert!(s.raw.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn white_noise_is_flat() {
        let x = white(1 << 14, 9);
        let s = periodogram(&x, 1.0).unwrap();
        let q = s.raw.len() / 4;
        let bands: Vec<f64> = (0..4)
            .map(|b| s.raw[b * q..(b + 1) * q].iter().sum::<f64>() / q as f64)
            .collect();
        let max = bands.iter().cloned().fold(0.0, f64::max);
        let min = bands.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 1.5);
    }

    #[test]
    fn non_uniform_sampling_is_rejected() {
        let mut t: Vec<f64> = (0..200).map(|i| i as f64).collect();
        t[50] += 0.3;
        let x = vec![0.0; 200];
        assert!(matches!(periodogram_sampled(&t, &x), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn constant_spectrum_smooths_to_itself() {
        let s = synthetic((1..=500).map(|k| k as f64 * 0.01).collect(), |_| 2.5);
        let sm = spline_smooth(&s, DEFAULT_KNOT_COUNT).unwrap();
        let worst = sm.smooth.iter().map(|v| (v - 2.5).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn exponential_spectrum_is_tracked() {
        let s = synthetic((1..=1000).map(|k| k as f64 * 0.001).collect(), |w| (-w / 0.1).exp());
        let sm = spline_smooth(&s, DEFAULT_KNOT_COUNT).unwrap();
        for ((w, raw), fit) in s.omega.iter().zip(&s.raw).zip(&sm.smooth) {
            if (0.01..=0.5).contains(w) {
                assert!(((fit - raw) / raw).abs() < 0.05, "at {w}: {fit} vs {raw}");
            }
        }
    }

    #[test]
    fn full_knot_count_interpolates() {
        let s = synthetic((1..=30).map(|k| k as f64 * 0.05).collect(), |w| 1.0 + (7.0 * w).sin().powi(2));
        let sm = spline_smooth(&s, 30).unwrap();
        for (fit, raw) in sm.smooth.iter().zip(&s.raw) {
            assert!(((fit - raw) / raw).abs() < 1e-8);
        }
    }

    #[test]
    fn too_few_knots() {
        let s = synthetic((1..=30).map(|k| k as f64).collect(), |_| 1.0);
        assert!(spline_smooth(&s, 3).is_err());
    }

    #[test]
    fn white_noise_has_no_rise() {
        let (_, r) = spectrum_and_rise(&white(1 << 14, 21), 2.0 * std::f64::consts::PI, 1.0, 24, &Bands::default())
            .unwrap();
        assert!(r.abs() < 0.5, "R = {r}");
    }

    #[test]
    fn inverse_frequency_spectrum_rises() {
        // Grid of a 500-period strobe series with Ω = 1.
        let omega: Vec<f64> = (1..=250).map(|k| k as f64 / 500.0).collect();
        let s = synthetic(omega.clone(), |w| 1.0 / w);
        let mut s = spline_smooth(&s, DEFAULT_KNOT_COUNT).unwrap();
        s.sample_interval = 2.0 * std::f64::consts::PI;
        s.series_len = 500;
        let r = low_freq_rise(&s, 1.0, &Bands::default()).unwrap();
        // Direct evaluation on the curve: mean(-ln ϖ) over each band.
        let mean = |lo: f64, hi: f64| {
            let v: Vec<f64> = omega.iter().filter(|w| **w > lo && **w <= hi + 1e-12).map(|w| -w.ln()).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let expected = mean(0.0, 0.1) - mean(0.2 - 1e-12, 0.5);
        assert!((r - expected).abs() < 0.05, "{r} vs {expected}");
        assert!(r > 1.0);
    }

    #[test]
    fn drive_tone_has_no_rise() {
        // Once-per-period sampling aliases the drive to zero frequency; with
        // eight samples per period the tone sits at Ω, outside both bands.
        let n = 8 * 512;
        let dt = 2.0 * std::f64::consts::PI / 8.0;
        let mut noise = white(n, 4);
        for (i, x) in noise.iter_mut().enumerate() {
            *x = 0.05 * *x + (i as f64 * dt).cos();
        }
        let (_, r) = spectrum_and_rise(&noise, dt, 1.0, DEFAULT_KNOT_COUNT, &Bands::default()).unwrap();
        assert!(r.abs() < 0.5, "R = {r}");
    }

    #[test]
    fn scaling_leaves_rise_unchanged() {
        let x = white(4096, 5);
        let cx: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let dt = 2.0 * std::f64::consts::PI / 8.0;
        let (s1, r1) = spectrum_and_rise(&x, dt, 1.0, 24, &Bands::default()).unwrap();
        let (s2, r2) = spectrum_and_rise(&cx, dt, 1.0, 24, &Bands::default()).unwrap();
        assert!((r1 - r2).abs() < 1e-9);
        for (a, b) in s1.raw.iter().zip(&s2.raw) {
            assert!((b - 9.0 * a).abs() <= 1e-9 * b.abs());
        }
    }

    #[test]
    fn short_series_cannot_resolve_low_frequencies() {
        let x = white(150, 1);
        let s = spline_smooth(&periodogram(&x, 2.0 * std::f64::consts::PI).unwrap(), 24).unwrap();
        assert!(matches!(low_freq_rise(&s, 1.0, &Bands::default()), Err(Error::InsufficientData(_))));
    }
}
