//! Deep difference image: distance-weighted pooling of both acquisitions,
//! absolute log-ratio, then normalized multi-scale pooling accumulated over
//! window sizes 1, 3, ..., 2T-1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::scalar::Real;

/// Floor applied to pooled intensities before the log-ratio.
pub const LOG_RATIO_FLOOR: f64 = 1e-6;

/// `k`x`k` pooling weights that decay with distance from the window center.
///
/// Off-center weights are `1 / (k^2 d)`, with `d` the Euclidean distance to
/// the center cell; the center holds `2 / k^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolKernel<T> {
    k: usize,
    weights: Vec<T>,
}

impl<T: Real> PoolKernel<T> {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 || k % 2 == 0 {
            return Err(Error::param(format!("pooling window must be odd and positive, got {k}")));
        }
        let k2 = T::from_usize_lossy(k * k);
        let c = (k / 2) as isize;
        let mut weights = Vec::with_capacity(k * k);
        for i in 0..k as isize {
            for j in 0..k as isize {
                let w = if i == c && j == c {
                    T::lit(2.0) / k2
                } else {
                    let d2 = T::from_isize((c - i) * (c - i) + (c - j) * (c - j)).unwrap();
                    T::one() / (k2 * d2.sqrt())
                };
                weights.push(w);
            }
        }
        Ok(Self { k, weights })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> T {
        self.weights[i * self.k + j]
    }

    /// `(1/k^2) * sum(w_ij)`, the response of pooling to a unit image.
    pub fn mean(&self) -> T {
        self.weights.iter().copied().sum::<T>() / T::from_usize_lossy(self.k * self.k)
    }
}

pub fn pool_kernel<T: Real>(k: usize) -> Result<PoolKernel<T>> {
    PoolKernel::new(k)
}

pub fn kernel_mean<T: Real>(kernel: &PoolKernel<T>) -> T {
    kernel.mean()
}

/// Same-size weighted pooling with replicate padding:
/// `out(n, m) = (1/k^2) * sum_ij w_ij * I(n + i - c, m + j - c)`.
pub fn weighted_pool<T: Real>(image: &Raster<T>, kernel: &PoolKernel<T>) -> Result<Raster<T>> {
    let k = kernel.size();
    let (w, h) = (image.width(), image.height());
    if k > w.min(h) {
        return Err(Error::param(format!("pooling window {k} exceeds image {w}x{h}")));
    }
    let c = (k / 2) as isize;
    let norm = T::one() / T::from_usize_lossy(k * k);
    let mut out = Vec::with_capacity(w * h);
    for n in 0..h as isize {
        for m in 0..w as isize {
            let mut acc = T::zero();
            for i in 0..k {
                let row = n + i as isize - c;
                for j in 0..k {
                    acc += kernel.weight(i, j) * image.get_clamped(row, m + j as isize - c);
                }
            }
            out.push(acc * norm);
        }
    }
    Ok(Raster::from_parts(w, h, out))
}

/// `|ln(i2p / i1p)|` with both inputs floored at [`LOG_RATIO_FLOOR`].
pub fn log_ratio<T: Real>(i1p: &Raster<T>, i2p: &Raster<T>) -> Result<Raster<T>> {
    if !i1p.same_shape(i2p) {
        return Err(Error::param(format!(
            "log-ratio inputs differ in size: {}x{} vs {}x{}",
            i1p.width(),
            i1p.height(),
            i2p.width(),
            i2p.height()
        )));
    }
    let eps = T::lit(LOG_RATIO_FLOOR);
    // difference of logs keeps the result exactly symmetric in its inputs
    let values =
        i1p.values().iter().zip(i2p.values()).map(|(&a, &b)| (b.max(eps).ln() - a.max(eps).ln()).abs()).collect();
    Ok(Raster::from_parts(i1p.width(), i1p.height(), values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DdiParams {
    /// Pre-pooling window applied to both acquisitions.
    pub k: usize,
    /// Number of accumulated scales.
    pub t: usize,
}

impl Default for DdiParams {
    fn default() -> Self {
        Self { k: 3, t: 9 }
    }
}

impl DdiParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k % 2 == 0 {
            return Err(Error::param(format!("k must be odd and positive, got {}", self.k)));
        }
        if self.t == 0 {
            return Err(Error::param("T must be at least 1"));
        }
        Ok(())
    }

    /// Largest accumulation window, `2T - 1`.
    pub fn max_window(&self) -> usize {
        2 * self.t - 1
    }
}

/// Intermediate images of the difference stage; the pooled inputs feed the
/// patch extractor later on.
#[derive(Debug, Clone)]
pub struct DdiStages<T> {
    pub pooled1: Raster<T>,
    pub pooled2: Raster<T>,
    pub log_ratio: Raster<T>,
    pub ddi: Raster<T>,
}

/// `(1/T) * sum_t pool(I_d, 2t-1) / mean(kernel(2t-1))`.
pub fn accumulate_scales<T: Real>(diff: &Raster<T>, t: usize) -> Result<Raster<T>> {
    if t == 0 {
        return Err(Error::param("T must be at least 1"));
    }
    let mut acc = vec![T::zero(); diff.len()];
    for step in 1..=t {
        let kernel = PoolKernel::new(2 * step - 1)?;
        let inv_mean = T::one() / kernel.mean();
        let pooled = weighted_pool(diff, &kernel)?;
        for (a, &p) in acc.iter_mut().zip(pooled.values()) {
            *a += p * inv_mean;
        }
    }
    let inv_t = T::one() / T::from_usize_lossy(t);
    Ok(Raster::from_parts(diff.width(), diff.height(), acc.into_iter().map(|v| v * inv_t).collect()))
}

pub fn deep_difference_stages<T: Real>(i1: &Raster<T>, i2: &Raster<T>, params: &DdiParams) -> Result<DdiStages<T>> {
    params.validate()?;
    if !i1.same_shape(i2) {
        return Err(Error::param("input images differ in size"));
    }
    let side = i1.width().min(i1.height());
    if params.max_window() > side || params.k > side {
        return Err(Error::param(format!(
            "window {} exceeds the smaller image side {side}",
            params.max_window().max(params.k)
        )));
    }
    let kernel = PoolKernel::new(params.k)?;
    let pooled1 = weighted_pool(i1, &kernel)?;
    let pooled2 = weighted_pool(i2, &kernel)?;
    let diff = log_ratio(&pooled1, &pooled2)?;
    let ddi = accumulate_scales(&diff, params.t)?;
    Ok(DdiStages { pooled1, pooled2, log_ratio: diff, ddi })
}

pub fn deep_difference<T: Real>(i1: &Raster<T>, i2: &Raster<T>, params: &DdiParams) -> Result<Raster<T>> {
    Ok(deep_difference_stages(i1, i2, params)?.ddi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn unit_kernel_is_two() {
        let k = PoolKernel::<f64>::new(1).unwrap();
        assert_eq!(k.weights(), &[2.0]);
        assert_eq!(k.mean(), 2.0);
    }

    #[test]
    fn three_by_three_weights() {
        let k = PoolKernel::<f64>::new(3).unwrap();
        assert_abs_diff_eq!(k.weight(1, 1), 2.0 / 9.0, epsilon = 1e-15);
        for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            assert_abs_diff_eq!(k.weight(i, j), 1.0 / 9.0, epsilon = 1e-15);
        }
        for (i, j) in [(0, 0), (0, 2), (2, 0), (2, 2)] {
            assert_abs_diff_eq!(k.weight(i, j), 0.078567420131839, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(k.mean(), 0.10899292746600234, epsilon = 1e-12);
    }

    #[test]
    fn five_by_five_distance_two() {
        let k = PoolKernel::<f64>::new(5).unwrap();
        // 1-based (1,3) is two rows above the center
        assert_abs_diff_eq!(k.weight(0, 2), 0.02, epsilon = 1e-15);
    }

    #[test]
    fn even_or_zero_window_rejected() {
        assert!(PoolKernel::<f64>::new(4).is_err());
        assert!(PoolKernel::<f64>::new(0).is_err());
    }

    #[test]
    fn kernel_is_rotation_and_transpose_symmetric() {
        for k in [3, 5, 7, 9] {
            let ker = PoolKernel::<f64>::new(k).unwrap();
            for i in 0..k {
                for j in 0..k {
                    assert_eq!(ker.weight(i, j), ker.weight(j, i));
                    assert_eq!(ker.weight(i, j), ker.weight(j, k - 1 - i));
                }
            }
            assert!(ker.mean() > 0.0);
        }
    }

    #[test]
    fn constant_image_scales_by_kernel_mean() {
        let img = Raster::<f64>::filled(6, 5, 0.4).unwrap();
        for k in [1, 3, 5] {
            let ker = PoolKernel::new(k).unwrap();
            let out = weighted_pool(&img, &ker).unwrap();
            for &v in out.values() {
                assert_abs_diff_eq!(v, 0.4 * ker.mean(), epsilon = 1e-14);
            }
        }
        let ones = Raster::<f64>::filled(3, 3, 1.0).unwrap();
        let out = weighted_pool(&ones, &PoolKernel::new(3).unwrap()).unwrap();
        assert_abs_diff_eq!(out.get(1, 1), 0.10899292746600234, epsilon = 1e-9);
    }

    #[test]
    fn unit_window_doubles() {
        let img = Raster::<f64>::new(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let out = weighted_pool(&img, &PoolKernel::new(1).unwrap()).unwrap();
        assert_eq!(out.values(), &[0.2, 0.4, 0.6, 0.8]);
    }

    #[test]
    fn oversized_window_rejected() {
        let img = Raster::<f64>::filled(4, 2, 1.0).unwrap();
        assert!(weighted_pool(&img, &PoolKernel::new(3).unwrap()).is_err());
    }

    #[test]
    fn log_ratio_cases() {
        let a = Raster::<f64>::new(2, 1, vec![2.0, 0.7]).unwrap();
        let b = Raster::<f64>::new(2, 1, vec![0.5, 0.7 * std::f64::consts::E]).unwrap();
        let out = log_ratio(&a, &b).unwrap();
        assert_abs_diff_eq!(out.values()[0], 4f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.values()[1], 1.0, epsilon = 1e-12);
        let same = log_ratio(&a, &a).unwrap();
        assert!(same.values().iter().all(|&v| v == 0.0));
        let c = Raster::<f64>::filled(1, 2, 1.0).unwrap();
        assert!(log_ratio(&a, &c).is_err());
    }

    #[test]
    fn log_ratio_floors_zeros() {
        let a = Raster::<f64>::new(1, 1, vec![0.0]).unwrap();
        let b = Raster::<f64>::new(1, 1, vec![1.0]).unwrap();
        let out = log_ratio(&a, &b).unwrap();
        assert_abs_diff_eq!(out.values()[0], -(LOG_RATIO_FLOOR.ln()), epsilon = 1e-9);
    }

    #[test]
    fn identical_inputs_give_zero_ddi() {
        let img = Raster::<f64>::from_fn(12, 10, |r, c| 0.1 + 0.05 * ((r * 7 + c * 3) % 11) as f64).unwrap();
        let ddi = deep_difference(&img, &img, &DdiParams { k: 3, t: 4 }).unwrap();
        assert!(ddi.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_difference_is_fixed_point() {
        let d = Raster::<f64>::filled(20, 20, 0.37).unwrap();
        for t in [1, 3, 7] {
            let out = accumulate_scales(&d, t).unwrap();
            assert!(out.values().iter().all(|v| (v - 0.37).abs() < 1e-12));
        }
    }

    #[test]
    fn window_larger_than_image_rejected() {
        let img = Raster::<f64>::filled(8, 8, 0.5).unwrap();
        assert!(deep_difference(&img, &img, &DdiParams { k: 3, t: 5 }).is_err());
        assert!(deep_difference(&img, &img, &DdiParams { k: 3, t: 4 }).is_ok());
    }

    proptest! {
        #[test]
        fn pooling_is_linear(
            xs in prop::collection::vec(-5.0f64..5.0, 36),
            ys in prop::collection::vec(-5.0f64..5.0, 36),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let x = Raster::new(6, 6, xs).unwrap();
            let y = Raster::new(6, 6, ys).unwrap();
            let ker = PoolKernel::new(5).unwrap();
            let comb = Raster::new(6, 6, x.values().iter().zip(y.values()).map(|(p, q)| a * p + b * q).collect()).unwrap();
            let lhs = weighted_pool(&comb, &ker).unwrap();
            let px = weighted_pool(&x, &ker).unwrap();
            let py = weighted_pool(&y, &ker).unwrap();
            for i in 0..36 {
                prop_assert!((lhs.values()[i] - (a * px.values()[i] + b * py.values()[i])).abs() < 1e-9);
            }
        }

        #[test]
        fn ddi_symmetric_in_inputs(
            xs in prop::collection::vec(0.01f64..1.0, 81),
            ys in prop::collection::vec(0.01f64..1.0, 81),
            t in 1usize..5,
        ) {
            let x = Raster::new(9, 9, xs).unwrap();
            let y = Raster::new(9, 9, ys).unwrap();
            let p = DdiParams { k: 3, t };
            let d1 = deep_difference(&x, &y, &p).unwrap();
            let d2 = deep_difference(&y, &x, &p).unwrap();
            for (a, b) in d1.values().iter().zip(d2.values()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
