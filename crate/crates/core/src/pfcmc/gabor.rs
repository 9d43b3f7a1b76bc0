//! Complex Gabor filter bank producing per-pixel magnitude features.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FeatureSet;
use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::scalar::Real;

/// Default envelope ratio. Compact enough that each kernel keeps a low-pass
/// component (DC gain `exp(-pi^2 k^2)`, about 0.3), so magnitudes track
/// local level as well as texture.
const ENVELOPE_RATIO: f64 = 0.35;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaborBankConfig {
    pub scales: usize,
    pub orientations: usize,
    pub kernel_size: usize,
    /// Highest center frequency, cycles per pixel.
    pub f_max: f64,
    /// Frequency ratio between consecutive scales.
    pub scale_factor: f64,
    /// Envelope width in carrier wavelengths, along and across the carrier.
    pub envelope: f64,
}

impl Default for GaborBankConfig {
    fn default() -> Self {
        Self {
            scales: 5,
            orientations: 8,
            kernel_size: 11,
            f_max: 0.25,
            scale_factor: std::f64::consts::SQRT_2,
            envelope: ENVELOPE_RATIO,
        }
    }
}

impl GaborBankConfig {
    pub fn dim(&self) -> usize {
        self.scales * self.orientations
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales == 0 || self.orientations == 0 {
            return Err(Error::param("Gabor bank needs at least one scale and orientation"));
        }
        if self.kernel_size == 0 || self.kernel_size % 2 == 0 {
            return Err(Error::param(format!("Gabor kernel size must be odd, got {}", self.kernel_size)));
        }
        if !(self.f_max > 0.0) || !(self.scale_factor > 0.0) {
            return Err(Error::param("Gabor frequencies must be positive"));
        }
        if !(self.envelope > 0.0) || !self.envelope.is_finite() {
            return Err(Error::param(format!("Gabor envelope must be positive, got {}", self.envelope)));
        }
        Ok(())
    }
}

/// One complex kernel stored as separate real/imaginary planes.
#[derive(Debug, Clone)]
pub struct GaborKernel<T> {
    pub size: usize,
    pub frequency: f64,
    pub orientation: f64,
    pub re: Vec<T>,
    pub im: Vec<T>,
}

/// `g(x, y) = f^2/(pi k e) * exp(-(f/k)^2 x'^2 - (f/e)^2 y'^2) * exp(i 2 pi f x')`
/// with `x'` along the carrier direction.
pub fn gabor_kernel<T: Real>(size: usize, frequency: f64, orientation: f64, envelope: f64) -> GaborKernel<T> {
    let half = (size / 2) as isize;
    let (kappa, eta) = (envelope, envelope);
    let amp = frequency * frequency / (std::f64::consts::PI * kappa * eta);
    let (sin_t, cos_t) = orientation.sin_cos();
    let mut re = Vec::with_capacity(size * size);
    let mut im = Vec::with_capacity(size * size);
    for y in -half..=half {
        for x in -half..=half {
            let (x, y) = (x as f64, y as f64);
            let xp = x * cos_t + y * sin_t;
            let yp = -x * sin_t + y * cos_t;
            let env = amp * (-(frequency / kappa).powi(2) * xp * xp - (frequency / eta).powi(2) * yp * yp).exp();
            let phase = 2.0 * std::f64::consts::PI * frequency * xp;
            re.push(T::lit(env * phase.cos()));
            im.push(T::lit(env * phase.sin()));
        }
    }
    GaborKernel { size, frequency, orientation, re, im }
}

/// Kernels ordered scale-major: index `v * orientations + u`.
pub fn gabor_bank<T: Real>(cfg: &GaborBankConfig) -> Vec<GaborKernel<T>> {
    let mut bank = Vec::with_capacity(cfg.dim());
    for v in 0..cfg.scales {
        let f = cfg.f_max / cfg.scale_factor.powi(v as i32);
        for u in 0..cfg.orientations {
            let theta = u as f64 * std::f64::consts::PI / cfg.orientations as f64;
            bank.push(gabor_kernel(cfg.kernel_size, f, theta, cfg.envelope));
        }
    }
    bank
}

fn pad_replicate<T: Real>(image: &Raster<T>, pad: usize) -> (Vec<T>, usize) {
    let pw = image.width() + 2 * pad;
    let ph = image.height() + 2 * pad;
    let mut out = Vec::with_capacity(pw * ph);
    for r in 0..ph {
        for c in 0..pw {
            out.push(image.get_clamped(r as isize - pad as isize, c as isize - pad as isize));
        }
    }
    (out, pw)
}

fn magnitude_response<T: Real>(
    padded: &[T],
    pw: usize,
    width: usize,
    height: usize,
    kernel: &GaborKernel<T>,
) -> Vec<T> {
    let ks = kernel.size;
    let mut out = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            let (mut re, mut im) = (T::zero(), T::zero());
            for i in 0..ks {
                let row = &padded[(r + i) * pw + c..(r + i) * pw + c + ks];
                let kre = &kernel.re[i * ks..(i + 1) * ks];
                let kim = &kernel.im[i * ks..(i + 1) * ks];
                for j in 0..ks {
                    re += row[j] * kre[j];
                    im += row[j] * kim[j];
                }
            }
            out.push((re * re + im * im).sqrt());
        }
    }
    out
}

/// Standardizes in place; returns false (and zeroes the channel) when the
/// channel has no spread.
fn standardize<T: Real>(channel: &mut [T]) -> bool {
    let (lo, hi) = channel.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &v| (a.min(v), b.max(v)));
    let scale = lo.abs().max(hi.abs());
    if hi - lo <= T::epsilon() * T::lit(64.0) * scale || hi - lo == T::zero() {
        channel.iter_mut().for_each(|v| *v = T::zero());
        return false;
    }
    let n = T::from_usize_lossy(channel.len());
    let mean = channel.iter().copied().sum::<T>() / n;
    let var = channel.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    let inv_sd = T::one() / var.sqrt();
    channel.iter_mut().for_each(|v| *v = (*v - mean) * inv_sd);
    true
}

/// Magnitude of each bank response (replicate padding), each channel then
/// standardized to zero mean and unit variance over the image.
pub fn gabor_features<T: Real>(image: &Raster<T>, cfg: &GaborBankConfig) -> Result<FeatureSet<T>> {
    cfg.validate()?;
    let (w, h) = (image.width(), image.height());
    if cfg.kernel_size > w.min(h) {
        return Err(Error::param(format!("Gabor kernel {} exceeds image {w}x{h}", cfg.kernel_size)));
    }
    let bank = gabor_bank::<T>(cfg);
    let (padded, pw) = pad_replicate(image, cfg.kernel_size / 2);
    let channels: Vec<(Vec<T>, bool)> = bank
        .par_iter()
        .map(|kernel| {
            let mut ch = magnitude_response(&padded, pw, w, h, kernel);
            let ok = standardize(&mut ch);
            (ch, ok)
        })
        .collect();
    let degenerate = channels.iter().filter(|(_, ok)| !ok).count();
    if degenerate > 0 {
        log::warn!("{degenerate} of {} Gabor channels have zero variance and were zeroed", channels.len());
    }
    let dim = channels.len();
    let count = w * h;
    let mut data = vec![T::zero(); count * dim];
    for (d, (ch, _)) in channels.iter().enumerate() {
        for (s, &v) in ch.iter().enumerate() {
            data[s * dim + d] = v;
        }
    }
    FeatureSet::new(count, dim, data)
}
