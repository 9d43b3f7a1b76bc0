//! Image carriers shared by every stage, plus the scaling helpers the
//! clustering stage needs.

mod io;

pub use io::{
    decode_pgm, decode_sarf, encode_pgm, encode_sarf, load_f32, load_pgm, load_raster, save_f32, save_pgm,
    save_pgm_bytes, SARF_HEADER_LEN, SARF_MAGIC,
};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major grid of finite real pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Real> Raster<T> {
    pub fn new(width: usize, height: usize, values: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param(format!("raster dimensions must be positive, got {width}x{height}")));
        }
        if values.len() != width * height {
            return Err(Error::Length { expected: width * height, found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("non-finite pixel at index {i}")));
        }
        Ok(Self { width, height, values })
    }

    /// Skips the finiteness scan. Callers guarantee the invariants.
    pub(crate) fn from_parts(width: usize, height: usize, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), width * height);
        Self { width, height, values }
    }

    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                values.push(f(r, c));
            }
        }
        Self::new(width, height, values)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.width + col]
    }

    /// Pixel lookup with edge-clamp (replicate) semantics for
    /// out-of-bounds coordinates.
    #[inline]
    pub fn get_clamped(&self, row: isize, col: isize) -> T {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.values[r * self.width + c]
    }

    pub fn same_shape<U>(&self, other: &Raster<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.width, self.height, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn min_max(&self) -> (T, T) {
        self.values.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn mean(&self) -> T {
        mean_of(&self.values)
    }

    /// Population variance.
    pub fn variance(&self) -> T {
        variance_of(&self.values)
    }

    /// Copies out the `h`x`w` block whose top-left corner is `(row, col)`.
    pub fn block(&self, row: usize, col: usize, h: usize, w: usize) -> Result<Self> {
        if row + h > self.height || col + w > self.width {
            return Err(Error::param("block exceeds raster bounds"));
        }
        let mut out = Vec::with_capacity(h * w);
        for r in row..row + h {
            out.extend_from_slice(&self.values[r * self.width + col..r * self.width + col + w]);
        }
        Ok(Self::from_parts(w, h, out))
    }

    pub fn cast<U: Real>(&self) -> Raster<U> {
        Raster::from_parts(self.width, self.height, self.values.iter().map(|v| U::lit(v.as_f64())).collect())
    }
}

pub(crate) fn mean_of<T: Real>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    values.iter().copied().sum::<T>() / T::from_usize_lossy(values.len())
}

pub(crate) fn variance_of<T: Real>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let m = mean_of(values);
    values.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / T::from_usize_lossy(values.len())
}

/// Min-max scales to `[0, 1]` and then subtracts the mean of the scaled
/// values, so the output has zero mean and lies within `[-1, 1]`.
pub fn normalize_center<T: Real>(raster: &Raster<T>) -> Result<Raster<T>> {
    let (lo, hi) = raster.min_max();
    if !(hi > lo) {
        return Err(Error::DegenerateInput("image is constant; nothing to cluster".into()));
    }
    let span = hi - lo;
    let scaled: Vec<T> = raster.values.iter().map(|&v| (v - lo) / span).collect();
    let m = mean_of(&scaled);
    Ok(Raster::from_parts(raster.width, raster.height, scaled.into_iter().map(|v| v - m).collect()))
}

/// Row-major changed (`true`) / unchanged (`false`) map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMap {
    width: usize,
    height: usize,
    labels: Vec<bool>,
}

impl BinaryMap {
    pub fn new(width: usize, height: usize, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::Length { expected: width * height, found: labels.len() });
        }
        Ok(Self { width, height, labels })
    }

    pub fn filled(width: usize, height: usize, changed: bool) -> Self {
        Self { width, height, labels: vec![changed; width * height] }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.labels[row * self.width + col]
    }

    pub fn count_changed(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    /// Thresholds a `[0, 1]` raster at one half, e.g. a loaded ground truth.
    pub fn from_raster<T: Real>(raster: &Raster<T>) -> Self {
        let half = T::lit(0.5);
        Self {
            width: raster.width(),
            height: raster.height(),
            labels: raster.values().iter().map(|&v| v >= half).collect(),
        }
    }

    /// Gray levels 0 (unchanged) and 255 (changed).
    pub fn to_gray(&self) -> Vec<u8> {
        self.labels.iter().map(|&l| if l { 255 } else { 0 }).collect()
    }

    pub fn save_pgm(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        save_pgm_bytes(self.width, self.height, &self.to_gray(), path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn rejects_wrong_length_and_non_finite() {
        assert!(matches!(Raster::<f64>::new(2, 2, vec![0.0; 3]), Err(Error::Length { .. })));
        assert!(Raster::<f64>::new(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(Raster::<f64>::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn clamped_access_replicates_edges() {
        let r = Raster::<f64>::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(r.get_clamped(-3, -1), 1.0);
        assert_eq!(r.get_clamped(0, 9), 2.0);
        assert_eq!(r.get_clamped(5, 5), 4.0);
    }

    #[test]
    fn normalize_center_hand_example() {
        let r = Raster::<f64>::new(4, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let n = normalize_center(&r).unwrap();
        let expected = [-0.5, -1.0 / 6.0, 1.0 / 6.0, 0.5];
        for (a, b) in n.values().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn normalize_center_constant_is_degenerate() {
        let r = Raster::<f64>::filled(2, 2, 5.0).unwrap();
        assert!(matches!(normalize_center(&r), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn binary_map_from_raster_threshold() {
        let r = Raster::<f32>::new(3, 1, vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(BinaryMap::from_raster(&r).labels(), &[false, true, true]);
    }

    proptest! {
        #[test]
        fn normalize_center_zero_mean_and_bounded(vals in prop::collection::vec(-1e3f64..1e3, 2..64)) {
            let n = vals.len();
            let r = Raster::new(n, 1, vals).unwrap();
            prop_assume!(r.min_max().1 > r.min_max().0);
            let out = normalize_center(&r).unwrap();
            prop_assert!(out.mean().abs() < 1e-9);
            prop_assert!(out.values().iter().all(|v| (-1.0..=1.0).contains(v)));
        }

        #[test]
        fn normalize_center_affine_invariant(
            vals in prop::collection::vec(-10.0f64..10.0, 2..64),
            a in 0.01f64..100.0,
            b in -50.0f64..50.0,
        ) {
            let n = vals.len();
            let r = Raster::new(n, 1, vals).unwrap();
            prop_assume!(r.min_max().1 - r.min_max().0 > 1e-3);
            let t = r.map(|v| a * v + b).unwrap();
            let x = normalize_center(&r).unwrap();
            let y = normalize_center(&t).unwrap();
            for (p, q) in x.values().iter().zip(y.values()) {
                prop_assert!((p - q).abs() < 1e-9);
            }
        }
    }
}
