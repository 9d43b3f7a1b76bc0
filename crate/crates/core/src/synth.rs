//! Seeded synthetic bi-temporal scenes under multiplicative gamma speckle.
//!
//! A piecewise-constant reflectivity map is shared by both dates; the second
//! date multiplies a set of random non-overlapping discs by a change gain.
//! Each date then gets an independent unit-mean gamma speckle field with
//! shape `L` (the number of looks), and both images are rescaled jointly
//! into `[0, 1]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryMap, Raster};
use crate::scalar::Real;

const PLACEMENT_ATTEMPTS: usize = 2000;
/// Allowed relative deviation of the realized imbalance ratio.
const IR_TOLERANCE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Background {
    pub base: f64,
    /// Painted in order over the base level.
    pub rects: Vec<Rect>,
}

impl Default for Background {
    fn default() -> Self {
        Self {
            base: 0.25,
            rects: vec![
                Rect { x: 0, y: 0, w: 120, h: 90, level: 0.5 },
                Rect { x: 150, y: 170, w: 106, h: 86, level: 0.12 },
                Rect { x: 30, y: 170, w: 80, h: 60, level: 0.38 },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    /// Number of looks; speckle variance is `1 / looks`.
    pub looks: f64,
    pub n_regions: usize,
    /// Inclusive disc radius range in pixels.
    pub region_radius: [f64; 2],
    pub change_gain: f64,
    /// Divide instead of multiply by the gain inside change regions.
    pub darken: bool,
    /// Desired changed / unchanged pixel ratio.
    pub target_ir: f64,
    pub background: Background,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            looks: 1.0,
            n_regions: 5,
            region_radius: [5.0, 16.0],
            change_gain: 10.0,
            darken: false,
            target_ir: 0.02,
            background: Background::default(),
            seed: 42,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Spec("scene dimensions must be positive".into()));
        }
        if !(self.looks > 0.0) {
            return Err(Error::Spec("looks must be positive".into()));
        }
        if !(self.change_gain > 1.0) {
            return Err(Error::Spec("change_gain must exceed 1 (use darken for darkening changes)".into()));
        }
        let [lo, hi] = self.region_radius;
        if !(lo >= 1.0 && hi >= lo) {
            return Err(Error::Spec(format!("bad radius range [{lo}, {hi}]")));
        }
        if !(self.target_ir >= 0.0) {
            return Err(Error::Spec("target_ir must be non-negative".into()));
        }
        if (self.target_ir > 0.0) != (self.n_regions > 0) {
            return Err(Error::Spec("target_ir > 0 requires at least one region and vice versa".into()));
        }
        if !(self.background.base > 0.0) || self.background.rects.iter().any(|r| !(r.level > 0.0)) {
            return Err(Error::Spec("reflectivity levels must be positive".into()));
        }
        Ok(())
    }

    /// Noise-free first-date reflectivity.
    pub fn reflectivity(&self) -> Vec<f64> {
        let mut r = vec![self.background.base; self.width * self.height];
        for rect in &self.background.rects {
            for y in rect.y..(rect.y + rect.h).min(self.height) {
                for x in rect.x..(rect.x + rect.w).min(self.width) {
                    r[y * self.width + x] = rect.level;
                }
            }
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub row: f64,
    pub col: f64,
    pub radius: f64,
}

impl Disc {
    fn contains(&self, r: usize, c: usize) -> bool {
        let (dr, dc) = (r as f64 - self.row, c as f64 - self.col);
        dr * dr + dc * dc <= self.radius * self.radius
    }
}

#[derive(Debug, Clone)]
pub struct SarScene<T> {
    pub i1: Raster<T>,
    pub i2: Raster<T>,
    pub truth: BinaryMap,
    /// Clean reflectivity of both dates, before speckle and rescaling.
    pub clean1: Vec<f64>,
    pub clean2: Vec<f64>,
    pub discs: Vec<Disc>,
}

/// Unit-mean gamma field with shape `looks` (scale `1 / looks`).
pub fn speckle_field(count: usize, looks: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let gamma = Gamma::new(looks, 1.0 / looks).map_err(|e| Error::Spec(format!("speckle: {e}")))?;
    Ok((0..count).map(|_| gamma.sample(rng)).collect())
}

fn place_discs(spec: &SceneSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Disc>> {
    if spec.n_regions == 0 {
        return Ok(Vec::new());
    }
    let total = (spec.width * spec.height) as f64;
    let want_changed = total * spec.target_ir / (1.0 + spec.target_ir);
    let [lo, hi] = spec.region_radius;
    let base: Vec<f64> = (0..spec.n_regions).map(|_| rng.random_range(lo..=hi)).collect();
    let area: f64 = base.iter().map(|r| std::f64::consts::PI * r * r).sum();
    let scale = (want_changed / area).sqrt();
    let radii: Vec<f64> = base.iter().map(|r| (r * scale).clamp(lo, hi)).collect();

    let mut discs: Vec<Disc> = Vec::with_capacity(radii.len());
    for &radius in &radii {
        let margin = radius + 1.0;
        if 2.0 * margin >= spec.width as f64 || 2.0 * margin >= spec.height as f64 {
            return Err(Error::Spec(format!("radius {radius:.1} does not fit the scene")));
        }
        let mut placed = None;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let cand = Disc {
                row: rng.random_range(margin..spec.height as f64 - margin),
                col: rng.random_range(margin..spec.width as f64 - margin),
                radius,
            };
            let clear = discs.iter().all(|d| {
                let (dr, dc) = (d.row - cand.row, d.col - cand.col);
                (dr * dr + dc * dc).sqrt() > d.radius + cand.radius + 2.0
            });
            if clear {
                placed = Some(cand);
                break;
            }
        }
        discs.push(placed.ok_or_else(|| Error::Spec("could not place non-overlapping change regions".into()))?);
    }
    Ok(discs)
}

pub fn generate_pair<T: Real>(spec: &SceneSpec) -> Result<SarScene<T>> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let discs = place_discs(spec, &mut rng)?;

    let mut labels = vec![false; w * h];
    for r in 0..h {
        for c in 0..w {
            labels[r * w + c] = discs.iter().any(|d| d.contains(r, c));
        }
    }
    let truth = BinaryMap::new(w, h, labels)?;
    let nc = truth.count_changed();
    let realized = nc as f64 / (w * h - nc) as f64;
    if spec.target_ir > 0.0 && (realized / spec.target_ir - 1.0).abs() > IR_TOLERANCE {
        return Err(Error::Spec(format!(
            "target_ir {} unreachable with radii in [{}, {}]: realized {realized:.4}",
            spec.target_ir, spec.region_radius[0], spec.region_radius[1]
        )));
    }

    let clean1 = spec.reflectivity();
    let factor = if spec.darken { 1.0 / spec.change_gain } else { spec.change_gain };
    let clean2: Vec<f64> = clean1.iter().zip(truth.labels()).map(|(&v, &ch)| if ch { v * factor } else { v }).collect();

    let s1 = speckle_field(w * h, spec.looks, &mut rng)?;
    let s2 = speckle_field(w * h, spec.looks, &mut rng)?;
    let raw1: Vec<f64> = clean1.iter().zip(&s1).map(|(a, b)| a * b).collect();
    let raw2: Vec<f64> = clean2.iter().zip(&s2).map(|(a, b)| a * b).collect();
    let peak = raw1.iter().chain(&raw2).copied().fold(0.0f64, f64::max);
    let to_raster = |raw: &[f64]| Raster::new(w, h, raw.iter().map(|&v| T::lit(v / peak)).collect());
    Ok(SarScene { i1: to_raster(&raw1)?, i2: to_raster(&raw2)?, truth, clean1, clean2, discs })
}

/// Linear 8-bit preview, stretched so the given quantile maps to white.
pub fn preview_gray<T: Real>(raster: &Raster<T>, quantile: f64) -> Vec<u8> {
    let mut sorted: Vec<f64> = raster.values().iter().map(|v| v.as_f64()).collect();
    sorted.sort_by(f64::total_cmp);
    let idx = ((sorted.len() - 1) as f64 * quantile.clamp(0.0, 1.0)).round() as usize;
    let top = sorted[idx].max(f64::MIN_POSITIVE);
    raster.values().iter().map(|v| ((v.as_f64() / top).clamp(0.0, 1.0) * 255.0).round() as u8).collect()
}
