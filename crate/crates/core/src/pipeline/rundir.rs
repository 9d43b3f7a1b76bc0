//! Run-directory layout. Every stage boundary is persisted so a later stage
//! can restart from the files alone.
//!
//! | file             | content                                         |
//! |------------------|-------------------------------------------------|
//! | `config.json`    | effective configuration                         |
//! | `pooled1.sarf`   | first image after k-window weighted pooling     |
//! | `pooled2.sarf`   | second image after k-window weighted pooling    |
//! | `log_ratio.sarf` | absolute log-ratio of the pooled images         |
//! | `ddi.sarf`       | deep difference image                           |
//! | `ddi.pgm`        | min-max stretched preview of the DDI            |
//! | `pseudo.pgm`     | pseudo-labels: 0 unchanged, 128 intermediate, 255 changed |
//! | `pcanet.sarp`    | PCANet filter banks                             |
//! | `svm.sarv`       | linear SVM                                      |
//! | `change_map.pgm` | final map: 0 unchanged, 255 changed             |
//! | `metrics.json`   | scores, when a ground truth was supplied        |

use std::fs;
use std::path::{Path, PathBuf};

use crate::ddi::DdiStages;
use crate::error::Result;
use crate::raster::{load_f32, save_f32, save_pgm_bytes, Raster};
use crate::scalar::Real;

pub const CONFIG: &str = "config.json";
pub const POOLED1: &str = "pooled1.sarf";
pub const POOLED2: &str = "pooled2.sarf";
pub const LOG_RATIO: &str = "log_ratio.sarf";
pub const DDI: &str = "ddi.sarf";
pub const DDI_PREVIEW: &str = "ddi.pgm";
pub const PSEUDO: &str = "pseudo.pgm";
pub const PCANET: &str = "pcanet.sarp";
pub const SVM: &str = "svm.sarv";
pub const CHANGE_MAP: &str = "change_map.pgm";
pub const METRICS: &str = "metrics.json";

#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(root.as_ref())?;
        Ok(Self { root: root.as_ref().to_path_buf() })
    }

    pub fn open(root: impl AsRef<Path>) -> Self {
        Self { root: root.as_ref().to_path_buf() }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn has(&self, name: &str) -> bool {
        self.path(name).is_file()
    }

    pub fn save_ddi_stages<T: Real>(&self, stages: &DdiStages<T>) -> Result<()> {
        save_f32(&stages.pooled1, self.path(POOLED1))?;
        save_f32(&stages.pooled2, self.path(POOLED2))?;
        save_f32(&stages.log_ratio, self.path(LOG_RATIO))?;
        save_f32(&stages.ddi, self.path(DDI))?;
        save_pgm_bytes(stages.ddi.width(), stages.ddi.height(), &stretch(&stages.ddi), self.path(DDI_PREVIEW))
    }

    pub fn load_ddi_stages<T: Real>(&self) -> Result<DdiStages<T>> {
        Ok(DdiStages {
            pooled1: load_f32(self.path(POOLED1))?,
            pooled2: load_f32(self.path(POOLED2))?,
            log_ratio: load_f32(self.path(LOG_RATIO))?,
            ddi: load_f32(self.path(DDI))?,
        })
    }
}

/// Min-max stretch to 8 bits.
pub fn stretch<T: Real>(raster: &Raster<T>) -> Vec<u8> {
    let (lo, hi) = raster.min_max();
    let span = (hi - lo).as_f64();
    raster
        .values()
        .iter()
        .map(|&v| if span > 0.0 { ((v - lo).as_f64() / span * 255.0).round() as u8 } else { 0 })
        .collect()
}
