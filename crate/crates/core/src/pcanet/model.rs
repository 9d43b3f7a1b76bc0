//! PCANet model: training, per-patch features, and the `SARP` container.
//!
//! `SARP` layout, little-endian:
//!
//! | offset | size | field                                     |
//! |--------|------|-------------------------------------------|
//! | 0      | 4    | magic `b"SARP"`                           |
//! | 4      | 4    | λ (u32)                                   |
//! | 8      | 4    | L1 (u32)                                  |
//! | 12     | 4    | L2 (u32)                                  |
//! | 16     | ...  | L1 stage-1 filters, 2λ² f32 each          |
//! | ...    | ...  | L1 banks of L2 stage-2 filters, same size |

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::filters::learn_pca_filters;
use super::forward::{binarize_encode, correlate_same, histogram_feature, stage_forward, PcanetFeature, MAX_L2};
use super::patches::{Patch, PatchSet};
use super::sampling::SampleSelection;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const SARP_MAGIC: &[u8; 4] = b"SARP";

#[derive(Debug, Clone, PartialEq)]
pub struct PcanetModel<T> {
    lambda: usize,
    stage1: Vec<Patch<T>>,
    /// One bank of stage-2 filters per stage-1 filter.
    stage2: Vec<Vec<Patch<T>>>,
}

impl<T: Real> PcanetModel<T> {
    pub fn new(lambda: usize, stage1: Vec<Patch<T>>, stage2: Vec<Vec<Patch<T>>>) -> Result<Self> {
        if stage1.is_empty() || stage2.len() != stage1.len() {
            return Err(Error::param("need one stage-2 bank per stage-1 filter"));
        }
        let l2 = stage2[0].len();
        if l2 == 0 || l2 > MAX_L2 || stage2.iter().any(|b| b.len() != l2) {
            return Err(Error::param("stage-2 banks must share a size in 1..=31"));
        }
        let shape_ok = |p: &Patch<T>| p.rows() == 2 * lambda && p.cols() == lambda;
        if !stage1.iter().all(shape_ok) || !stage2.iter().flatten().all(shape_ok) {
            return Err(Error::param(format!("filters must be {}x{lambda}", 2 * lambda)));
        }
        Ok(Self { lambda, stage1, stage2 })
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn l1(&self) -> usize {
        self.stage1.len()
    }

    pub fn l2(&self) -> usize {
        self.stage2[0].len()
    }

    pub fn stage1(&self) -> &[Patch<T>] {
        &self.stage1
    }

    pub fn stage2(&self) -> &[Vec<Patch<T>>] {
        &self.stage2
    }

    pub fn feature_len(&self) -> usize {
        self.l1() << self.l2()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(SARP_MAGIC);
        for v in [self.lambda, self.l1(), self.l2()] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for f in self.stage1.iter().chain(self.stage2.iter().flatten()) {
            for &v in f.data() {
                out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..4] != SARP_MAGIC {
            return Err(Error::Parse { offset: 0, message: "not a SARP model".into() });
        }
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
        let (lambda, l1, l2) = (word(4), word(8), word(12));
        let size = 2 * lambda * lambda;
        let expected = l1 * (1 + l2) * size;
        let payload = &bytes[16..];
        if payload.len() != 4 * expected {
            return Err(Error::Length { expected, found: payload.len() / 4 });
        }
        let mut floats = payload.chunks_exact(4).map(|c| T::lit(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64));
        let mut take = || Patch::new(2 * lambda, lambda, floats.by_ref().take(size).collect());
        let stage1 = (0..l1).map(|_| take()).collect::<Result<Vec<_>>>()?;
        let stage2 =
            (0..l1).map(|_| (0..l2).map(|_| take()).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
        Self::new(lambda, stage1, stage2)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

/// Learns stage-1 filters from the selected patches, then one stage-2 bank
/// per stage-1 filter from that filter's responses on the same patches.
pub fn train_pcanet<T: Real>(
    patches: &PatchSet<T>,
    selection: &SampleSelection,
    l1: usize,
    l2: usize,
) -> Result<PcanetModel<T>> {
    if selection.is_empty() {
        return Err(Error::param("empty training selection"));
    }
    if let Some(&bad) = selection.indices.iter().find(|&&i| i >= patches.len()) {
        return Err(Error::param(format!("selected pixel {bad} outside patch set of {}", patches.len())));
    }
    if l2 == 0 || l2 > MAX_L2 {
        return Err(Error::param(format!("L2 must be in 1..={MAX_L2}")));
    }
    let chosen: Vec<Patch<T>> = selection.indices.iter().map(|&i| patches.get(i).clone()).collect();
    let stage1 = learn_pca_filters(&chosen, l1)?;
    let stage2 = stage1
        .par_iter()
        .map(|filter| {
            let responses = chosen.iter().map(|p| correlate_same(p, filter)).collect::<Result<Vec<_>>>()?;
            learn_pca_filters(&responses, l2)
        })
        .collect::<Result<Vec<_>>>()?;
    PcanetModel::new(patches.lambda(), stage1, stage2)
}

/// Stage 1, per-filter stage 2, hashing and histogramming of one patch.
pub fn features_for<T: Real>(patch: &Patch<T>, model: &PcanetModel<T>) -> Result<PcanetFeature<T>> {
    if patch.rows() != 2 * model.lambda || patch.cols() != model.lambda {
        return Err(Error::param(format!(
            "patch is {}x{}, model expects {}x{}",
            patch.rows(),
            patch.cols(),
            2 * model.lambda,
            model.lambda
        )));
    }
    let first = stage_forward(patch, &model.stage1)?;
    let codes = first
        .iter()
        .zip(&model.stage2)
        .map(|(response, bank)| binarize_encode(&stage_forward(response, bank)?))
        .collect::<Result<Vec<_>>>()?;
    histogram_feature(&codes, model.l2())
}
