use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::{PipelineConfig, SAMPLING_STAGE, SVM_STAGE};
use crate::ddi::{deep_difference_stages, log_ratio, DdiStages};
use crate::error::{Error, Result};
use crate::pcanet::{balance_sample, extract_patches, features_for, train_pcanet, PatchSet, PcanetModel};
use crate::pfcmc::{fcm, orient_labels, pfcmc, FcmParams, FeatureSet, PixelClass, ThreeWayMap};
use crate::raster::{BinaryMap, Raster};
use crate::scalar::Real;
use crate::svm::{predict, train_svm, SvmModel};

/// Result of the classification stage.
#[derive(Debug, Clone)]
pub struct Classification<T> {
    pub change_map: BinaryMap,
    pub pcanet: Option<PcanetModel<T>>,
    pub svm: Option<SvmModel<T>>,
    /// Number of intermediate pixels resolved by the classifier.
    pub predicted: usize,
    /// Set when training was impossible and the map fell back to the
    /// pseudo-labels alone (intermediate pixels become unchanged).
    pub fallback: Option<String>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput<T> {
    pub change_map: BinaryMap,
    pub ddi: Raster<T>,
    pub pseudo: ThreeWayMap,
    pub stages: DdiStages<T>,
    pub pcanet: Option<PcanetModel<T>>,
    pub svm: Option<SvmModel<T>>,
    pub predicted: usize,
    pub fallback: Option<String>,
}

fn pseudo_only(pseudo: &ThreeWayMap) -> BinaryMap {
    let labels = pseudo.labels().iter().map(|&l| l == PixelClass::Changed).collect();
    BinaryMap::new(pseudo.width(), pseudo.height(), labels).expect("same size")
}

/// PCANet features of the given pixels, computed once per distinct pixel.
fn feature_rows<T: Real>(
    patches: &PatchSet<T>,
    model: &PcanetModel<T>,
    pixels: &[usize],
) -> Result<BTreeMap<usize, Vec<T>>> {
    let mut unique = pixels.to_vec();
    unique.sort_unstable();
    unique.dedup();
    let rows = unique
        .par_iter()
        .map(|&p| features_for(patches.get(p), model).map(|f| (p, f.values)))
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().collect())
}

/// Trains PCANet + SVM on balanced confident pseudo-labels and classifies
/// the intermediate pixels. Confident pixels keep their pseudo-labels.
pub fn classify_intermediate<T: Real>(
    pooled1: &Raster<T>,
    pooled2: &Raster<T>,
    pseudo: &ThreeWayMap,
    cfg: &PipelineConfig,
) -> Result<Classification<T>> {
    cfg.validate()?;
    if !pooled1.same_shape(pooled2) || pooled1.width() != pseudo.width() || pooled1.height() != pseudo.height() {
        return Err(Error::param("pooled images and pseudo-label map differ in size"));
    }
    let mut change_map = pseudo_only(pseudo);
    let intermediate = pseudo.indices_of(PixelClass::Intermediate);
    if intermediate.is_empty() {
        log::info!("no intermediate pixels; pseudo-labels are final");
        return Ok(Classification { change_map, pcanet: None, svm: None, predicted: 0, fallback: None });
    }
    let selection = match balance_sample(
        pseudo,
        cfg.sample_count(pseudo.len()),
        cfg.sample_ratio,
        cfg.stage_seed(SAMPLING_STAGE),
    ) {
        Ok(sel) => sel,
        Err(Error::DegenerateTraining(why)) => {
            log::warn!("cannot train classifier ({why}); using clustering result alone");
            return Ok(Classification { change_map, pcanet: None, svm: None, predicted: 0, fallback: Some(why) });
        }
        Err(e) => return Err(e),
    };
    let patches = extract_patches(pooled1, pooled2, cfg.lambda)?;
    let model = train_pcanet(&patches, &selection, cfg.l1, cfg.l2)?;
    let dim = model.feature_len();

    let rows = feature_rows(&patches, &model, &selection.indices)?;
    let mut matrix = Vec::with_capacity(selection.len() * dim);
    for &p in &selection.indices {
        matrix.extend_from_slice(&rows[&p]);
    }
    drop(rows);
    let labels: Vec<i8> = selection.labels.iter().map(|&c| if c { 1 } else { -1 }).collect();
    let svm = train_svm(&matrix, dim, &labels, &cfg.svm, cfg.stage_seed(SVM_STAGE))?;
    drop(matrix);

    let decided = intermediate
        .par_iter()
        .map(|&p| {
            let f = features_for(patches.get(p), &model)?;
            Ok((p, predict(&svm, &f.values)?.0 == 1))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut labels = change_map.labels().to_vec();
    for &(p, changed) in &decided {
        labels[p] = changed;
    }
    change_map = BinaryMap::new(pseudo.width(), pseudo.height(), labels)?;
    Ok(Classification { change_map, pcanet: Some(model), svm: Some(svm), predicted: decided.len(), fallback: None })
}

/// Difference image, parallel-FCM pseudo-labels, PCANet + SVM on the
/// intermediate pixels, reassembled by pixel position.
pub fn run_pipeline<T: Real>(i1: &Raster<T>, i2: &Raster<T>, cfg: &PipelineConfig) -> Result<PipelineOutput<T>> {
    cfg.validate()?;
    let stages = deep_difference_stages(i1, i2, &cfg.ddi())?;
    let pseudo = pfcmc(&stages.ddi, &cfg.pfcmc())?;
    let cls = classify_intermediate(&stages.pooled1, &stages.pooled2, &pseudo, cfg)?;
    Ok(PipelineOutput {
        change_map: cls.change_map,
        ddi: stages.ddi.clone(),
        pseudo,
        stages,
        pcanet: cls.pcanet,
        svm: cls.svm,
        predicted: cls.predicted,
        fallback: cls.fallback,
    })
}

/// Reference detector: plain log-ratio of the raw images clustered by a
/// single FCM run on the pixel values.
pub fn baseline_change_map<T: Real>(
    i1: &Raster<T>,
    i2: &Raster<T>,
    params: &FcmParams,
    seed: u64,
) -> Result<BinaryMap> {
    let di = log_ratio(i1, i2)?;
    let result = fcm(&FeatureSet::from_raster(&di), params, seed)?;
    orient_labels(&result, &di)
}
