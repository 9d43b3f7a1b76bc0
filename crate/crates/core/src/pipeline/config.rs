use serde::{Deserialize, Serialize};

use crate::ddi::DdiParams;
use crate::error::{Error, Result};
use crate::pfcmc::{FcmParams, GaborBankConfig, PfcmcConfig};
use crate::svm::SvmParams;

/// Every knob of the detector. Omitted JSON fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub k: usize,
    #[serde(alias = "T")]
    pub t: usize,
    pub gamma: f64,
    pub b: f64,
    pub delta: f64,
    pub lambda: usize,
    #[serde(alias = "L1")]
    pub l1: usize,
    #[serde(alias = "L2")]
    pub l2: usize,
    /// Training samples as a fraction of the pixel count.
    pub sample_fraction: f64,
    /// Share of changed samples among the training samples.
    pub sample_ratio: f64,
    pub svm: SvmParams,
    pub fcm: FcmParams,
    pub gabor: GaborBankConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            k: 3,
            t: 9,
            gamma: 7.0,
            b: 0.0,
            delta: 0.12,
            lambda: 5,
            l1: 8,
            l2: 8,
            sample_fraction: 0.2,
            sample_ratio: 0.5,
            svm: SvmParams::default(),
            fcm: FcmParams::default(),
            gabor: GaborBankConfig::default(),
            seed: 42,
        }
    }
}

/// Seed offsets of the randomized stages; the two FCM runs use the
/// clustering seed and its successor.
pub const CLUSTER_STAGE: u64 = 0;
pub const SAMPLING_STAGE: u64 = 2;
pub const SVM_STAGE: u64 = 3;

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn ddi(&self) -> DdiParams {
        DdiParams { k: self.k, t: self.t }
    }

    pub fn pfcmc(&self) -> PfcmcConfig {
        PfcmcConfig {
            gamma: self.gamma,
            b: self.b,
            delta: self.delta,
            gabor: self.gabor.clone(),
            fcm: self.fcm,
            seed: self.stage_seed(CLUSTER_STAGE),
        }
    }

    pub fn stage_seed(&self, stage: u64) -> u64 {
        self.seed.wrapping_add(stage)
    }

    pub fn sample_count(&self, pixels: usize) -> usize {
        (self.sample_fraction * pixels as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.ddi().validate()?;
        self.pfcmc().validate()?;
        if self.lambda == 0 || self.lambda % 2 == 0 {
            return Err(Error::param(format!("lambda must be odd, got {}", self.lambda)));
        }
        if self.l1 == 0 || self.l1 > 2 * self.lambda * self.lambda {
            return Err(Error::param("L1 must be in 1..=2·lambda²"));
        }
        if self.l2 == 0 || self.l2 > 2 * self.lambda * self.lambda || self.l2 > crate::pcanet::MAX_L2 {
            return Err(Error::param("L2 must be in 1..=min(2·lambda², 31)"));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(Error::param("sample_fraction must be in (0, 1]"));
        }
        if !(self.sample_ratio > 0.0 && self.sample_ratio < 1.0) {
            return Err(Error::param("sample_ratio must be in (0, 1)"));
        }
        if !(self.svm.c > 0.0) || self.svm.epochs == 0 {
            return Err(Error::param("svm needs c > 0 and epochs >= 1"));
        }
        if !(self.fcm.m > 1.0) || !(self.fcm.tol > 0.0) || self.fcm.max_iter == 0 {
            return Err(Error::param("fcm needs m > 1, tol > 0, max_iter >= 1"));
        }
        Ok(())
    }
}
