//! Parallel FCM pseudo-labeling: two sigmoid mappings of the normalized
//! difference image, Gabor features of each, two independent FCM runs, and
//! an agreement code that splits pixels into changed / unchanged /
//! intermediate.

mod fcm;
mod gabor;

pub use fcm::{fcm, FcmParams, FcmResult};
pub use gabor::{gabor_bank, gabor_features, gabor_kernel, GaborBankConfig, GaborKernel};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{normalize_center, save_pgm_bytes, BinaryMap, Raster};
use crate::scalar::Real;

/// Row-major `count x dim` matrix of per-pixel feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet<T> {
    count: usize,
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> FeatureSet<T> {
    pub fn new(count: usize, dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != count * dim {
            return Err(Error::Length { expected: count * dim, found: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("feature set contains non-finite values"));
        }
        Ok(Self { count, dim, data })
    }

    /// One-dimensional features taken straight from the pixels.
    pub fn from_raster(raster: &Raster<T>) -> Self {
        Self { count: raster.len(), dim: 1, data: raster.values().to_vec() }
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, s: usize) -> &[T] {
        &self.data[s * self.dim..(s + 1) * self.dim]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmoidParams {
    pub gamma: f64,
    pub mu: f64,
}

/// `1 / (1 + exp(-gamma (x + mu)))` per pixel.
pub fn sigmoid_map<T: Real>(image: &Raster<T>, p: SigmoidParams) -> Result<Raster<T>> {
    if !(p.gamma > 0.0) {
        return Err(Error::param(format!("sigmoid slope must be positive, got {}", p.gamma)));
    }
    let (gamma, mu) = (T::lit(p.gamma), T::lit(p.mu));
    image.map(|x| T::one() / (T::one() + (-gamma * (x + mu)).exp()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PfcmcConfig {
    /// Shared sigmoid slope of both mappings.
    pub gamma: f64,
    /// Center bias, the midpoint of the two sigmoid offsets.
    pub b: f64,
    /// Distance between the two sigmoid offsets.
    pub delta: f64,
    pub gabor: GaborBankConfig,
    pub fcm: FcmParams,
    pub seed: u64,
}

impl Default for PfcmcConfig {
    fn default() -> Self {
        Self { gamma: 7.0, b: 0.0, delta: 0.12, gabor: GaborBankConfig::default(), fcm: FcmParams::default(), seed: 0 }
    }
}

impl PfcmcConfig {
    pub fn mu1(&self) -> f64 {
        self.b + self.delta / 2.0
    }

    pub fn mu2(&self) -> f64 {
        self.b - self.delta / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::param("gamma must be positive"));
        }
        if !(self.delta > 0.0) {
            return Err(Error::param("delta must be positive"));
        }
        self.gabor.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PixelClass {
    Unchanged,
    Changed,
    Intermediate,
}

impl PixelClass {
    pub fn gray(self) -> u8 {
        match self {
            PixelClass::Unchanged => 0,
            PixelClass::Intermediate => 128,
            PixelClass::Changed => 255,
        }
    }

    pub fn from_gray(g: u8) -> Option<Self> {
        match g {
            0 => Some(PixelClass::Unchanged),
            128 => Some(PixelClass::Intermediate),
            255 => Some(PixelClass::Changed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeWayMap {
    width: usize,
    height: usize,
    labels: Vec<PixelClass>,
}

impl ThreeWayMap {
    pub fn new(width: usize, height: usize, labels: Vec<PixelClass>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::Length { expected: width * height, found: labels.len() });
        }
        Ok(Self { width, height, labels })
    }

    /// Averages two binary label maps: both changed, both unchanged, or
    /// disagreeing (intermediate).
    pub fn encode(a: &BinaryMap, b: &BinaryMap) -> Result<Self> {
        if a.width() != b.width() || a.height() != b.height() {
            return Err(Error::param("label maps differ in size"));
        }
        let labels = a
            .labels()
            .iter()
            .zip(b.labels())
            .map(|(&x, &y)| match (x, y) {
                (true, true) => PixelClass::Changed,
                (false, false) => PixelClass::Unchanged,
                _ => PixelClass::Intermediate,
            })
            .collect();
        Ok(Self { width: a.width(), height: a.height(), labels })
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
    pub fn labels(&self) -> &[PixelClass] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn indices_of(&self, class: PixelClass) -> Vec<usize> {
        self.labels.iter().enumerate().filter(|(_, &l)| l == class).map(|(i, _)| i).collect()
    }

    pub fn count(&self, class: PixelClass) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }

    pub fn to_gray(&self) -> Vec<u8> {
        self.labels.iter().map(|l| l.gray()).collect()
    }

    pub fn from_gray(width: usize, height: usize, gray: &[u8]) -> Result<Self> {
        let labels = gray
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                PixelClass::from_gray(g)
                    .ok_or_else(|| Error::Parse { offset: i, message: format!("gray level {g} is not a pseudo-label") })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(width, height, labels)
    }

    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        save_pgm_bytes(self.width, self.height, &self.to_gray(), path)
    }

    /// Reads a map written by [`ThreeWayMap::save_pgm`].
    pub fn load_pgm(path: impl AsRef<Path>) -> Result<Self> {
        let r: Raster<f64> = crate::raster::load_pgm(path)?;
        let gray: Vec<u8> = r.values().iter().map(|v| (v * 255.0).round() as u8).collect();
        Self::from_gray(r.width(), r.height(), &gray)
    }
}

/// Hard-assigns by argmax membership and names the cluster with the larger
/// mean difference value "changed". Exact membership ties go to unchanged.
pub fn orient_labels<T: Real>(result: &FcmResult<T>, ddi: &Raster<T>) -> Result<BinaryMap> {
    if result.memberships.len() != ddi.len() {
        return Err(Error::Length { expected: ddi.len(), found: result.memberships.len() });
    }
    let hard = result.hard_labels();
    let mut sums = [T::zero(); 2];
    let mut counts = [0usize; 2];
    for (h, &v) in hard.iter().zip(ddi.values()) {
        if let Some(c) = *h {
            sums[c] += v;
            counts[c] += 1;
        }
    }
    if counts[0] == 0 || counts[1] == 0 {
        log::warn!("FCM produced an empty cluster; labeling every pixel unchanged");
        return Ok(BinaryMap::filled(ddi.width(), ddi.height(), false));
    }
    let mean0 = sums[0] / T::from_usize_lossy(counts[0]);
    let mean1 = sums[1] / T::from_usize_lossy(counts[1]);
    let changed = if mean1 > mean0 { 1 } else { 0 };
    BinaryMap::new(ddi.width(), ddi.height(), hard.iter().map(|h| *h == Some(changed)).collect())
}

/// Both oriented FCM label maps together with their agreement code.
#[derive(Debug, Clone)]
pub struct PfcmcOutput {
    pub first: BinaryMap,
    pub second: BinaryMap,
    pub map: ThreeWayMap,
}

pub fn pfcmc_detailed<T: Real>(ddi: &Raster<T>, cfg: &PfcmcConfig) -> Result<PfcmcOutput> {
    cfg.validate()?;
    let centered = normalize_center(ddi)?;
    let run = |mu: f64, seed: u64| -> Result<BinaryMap> {
        let mapped = sigmoid_map(&centered, SigmoidParams { gamma: cfg.gamma, mu })?;
        let features = gabor_features(&mapped, &cfg.gabor)?;
        let result = fcm(&features, &cfg.fcm, seed)?;
        if !result.converged {
            log::warn!("FCM (seed {seed}) stopped after {} iterations without converging", result.iterations);
        }
        orient_labels(&result, ddi)
    };
    let (first, second) = rayon::join(|| run(cfg.mu1(), cfg.seed), || run(cfg.mu2(), cfg.seed.wrapping_add(1)));
    let (first, second) = (first?, second?);
    let map = ThreeWayMap::encode(&first, &second)?;
    Ok(PfcmcOutput { first, second, map })
}

pub fn pfcmc<T: Real>(ddi: &Raster<T>, cfg: &PfcmcConfig) -> Result<ThreeWayMap> {
    Ok(pfcmc_detailed(ddi, cfg)?.map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sigmoid_values() {
        let img = Raster::<f64>::new(3, 1, vec![-0.2, 0.3, 0.0]).unwrap();
        let out = sigmoid_map(&img, SigmoidParams { gamma: 3.0, mu: 0.2 }).unwrap();
        assert_abs_diff_eq!(out.values()[0], 0.5, epsilon = 1e-15);
        let out = sigmoid_map(&img, SigmoidParams { gamma: 7.0, mu: 0.0 }).unwrap();
        assert_abs_diff_eq!(out.values()[1], 0.8909031788043871, epsilon = 1e-6);
        assert!(out.values()[0] < out.values()[2] && out.values()[2] < out.values()[1]);
        assert!(sigmoid_map(&img, SigmoidParams { gamma: 0.0, mu: 0.0 }).is_err());
    }

    #[test]
    fn larger_offset_dominates() {
        let img = Raster::<f64>::from_fn(7, 3, |r, c| (r as f64 - 1.0) * 0.4 + c as f64 * 0.05).unwrap();
        let cfg = PfcmcConfig { b: 0.03, ..Default::default() };
        let hi = sigmoid_map(&img, SigmoidParams { gamma: cfg.gamma, mu: cfg.mu1() }).unwrap();
        let lo = sigmoid_map(&img, SigmoidParams { gamma: cfg.gamma, mu: cfg.mu2() }).unwrap();
        assert!(hi.values().iter().zip(lo.values()).all(|(a, b)| a >= b));
        assert_abs_diff_eq!(cfg.mu1() - cfg.mu2(), 0.12, epsilon = 1e-15);
        assert_abs_diff_eq!((cfg.mu1() + cfg.mu2()) / 2.0, 0.03, epsilon = 1e-15);
    }

    fn two_cluster_result(u: Vec<[f64; 2]>) -> FcmResult<f64> {
        FcmResult {
            memberships: u,
            centroids: [vec![0.0], vec![1.0]],
            iterations: 1,
            converged: true,
            objective: vec![],
        }
    }

    #[test]
    fn orientation_follows_brighter_cluster() {
        let ddi = Raster::<f64>::new(4, 1, vec![0.8, 0.1, 0.8, 0.1]).unwrap();
        let res = two_cluster_result(vec![[0.9, 0.1], [0.2, 0.8], [0.7, 0.3], [0.1, 0.9]]);
        let map = orient_labels(&res, &ddi).unwrap();
        assert_eq!(map.labels(), &[true, false, true, false]);
        assert_eq!(orient_labels(&res.swapped(), &ddi).unwrap(), map);
    }

    #[test]
    fn tie_goes_to_unchanged() {
        let ddi = Raster::<f64>::new(3, 1, vec![0.9, 0.5, 0.1]).unwrap();
        let res = two_cluster_result(vec![[0.9, 0.1], [0.5, 0.5], [0.1, 0.9]]);
        assert_eq!(orient_labels(&res, &ddi).unwrap().labels(), &[true, false, false]);
    }

    #[test]
    fn empty_cluster_all_unchanged() {
        let ddi = Raster::<f64>::new(2, 1, vec![0.9, 0.1]).unwrap();
        let res = two_cluster_result(vec![[0.9, 0.1], [0.8, 0.2]]);
        assert_eq!(orient_labels(&res, &ddi).unwrap().count_changed(), 0);
    }

    #[test]
    fn encode_cases() {
        let a = BinaryMap::new(4, 1, vec![true, false, true, false]).unwrap();
        let b = BinaryMap::new(4, 1, vec![true, false, false, true]).unwrap();
        let m = ThreeWayMap::encode(&a, &b).unwrap();
        use PixelClass::*;
        assert_eq!(m.labels(), &[Changed, Unchanged, Intermediate, Intermediate]);
        assert_eq!(ThreeWayMap::from_gray(4, 1, &m.to_gray()).unwrap(), m);
        assert!(ThreeWayMap::from_gray(1, 1, &[7]).is_err());
    }

    #[test]
    fn blob_scene_partitions_and_is_deterministic() {
        let ddi = Raster::<f64>::from_fn(40, 40, |r, c| {
            let d = ((r as f64 - 20.0).powi(2) + (c as f64 - 14.0).powi(2)).sqrt();
            let noise = ((r * 31 + c * 17) % 13) as f64 * 0.01;
            if d < 6.0 {
                1.0 + noise
            } else {
                0.1 + noise
            }
        })
        .unwrap();
        let cfg = PfcmcConfig { seed: 5, ..Default::default() };
        let out = pfcmc_detailed(&ddi, &cfg).unwrap();
        let total = out.map.count(PixelClass::Changed)
            + out.map.count(PixelClass::Unchanged)
            + out.map.count(PixelClass::Intermediate);
        assert_eq!(total, 1600);
        for (i, l) in out.map.labels().iter().enumerate() {
            let disagree = out.first.labels()[i] != out.second.labels()[i];
            assert_eq!(disagree, *l == PixelClass::Intermediate);
        }
        assert_eq!(out.map, pfcmc(&ddi, &cfg).unwrap());
        // the bright disc center must be found
        assert_eq!(out.map.labels()[20 * 40 + 14], PixelClass::Changed);
        assert_eq!(out.map.labels()[2 * 40 + 38], PixelClass::Unchanged);
    }

    #[test]
    fn constant_ddi_is_degenerate() {
        let ddi = Raster::<f64>::filled(16, 16, 0.2).unwrap();
        assert!(matches!(pfcmc(&ddi, &PfcmcConfig::default()), Err(Error::DegenerateInput(_))));
    }
}
