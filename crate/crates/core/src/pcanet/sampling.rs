use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pfcmc::{PixelClass, ThreeWayMap};

/// Training pixels drawn from the confident pseudo-labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSelection {
    pub indices: Vec<usize>,
    /// `true` for changed.
    pub labels: Vec<bool>,
}

impl SampleSelection {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn draw(pool: &[usize], need: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if pool.len() >= need {
        index::sample(rng, pool.len(), need).into_iter().map(|i| pool[i]).collect()
    } else {
        (0..need).map(|_| pool[rng.random_range(0..pool.len())]).collect()
    }
}

/// Draws `round(total * ratio)` changed and the rest unchanged pixels.
/// A class is sampled without replacement when it has enough pixels and
/// with replacement otherwise, which over-samples the rare changed class
/// and down-samples the dominant unchanged one.
pub fn balance_sample(map: &ThreeWayMap, total: usize, ratio: f64, seed: u64) -> Result<SampleSelection> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::param(format!("sample ratio must be in (0, 1], got {ratio}")));
    }
    let changed = map.indices_of(PixelClass::Changed);
    let unchanged = map.indices_of(PixelClass::Unchanged);
    if changed.is_empty() || unchanged.is_empty() {
        return Err(Error::DegenerateTraining(format!(
            "pseudo-labels hold {} changed and {} unchanged pixels",
            changed.len(),
            unchanged.len()
        )));
    }
    let want_changed = (total as f64 * ratio).round() as usize;
    let want_unchanged = total - want_changed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices = draw(&changed, want_changed, &mut rng);
    indices.extend(draw(&unchanged, want_unchanged, &mut rng));
    let mut labels = vec![true; want_changed];
    labels.resize(total, false);
    Ok(SampleSelection { indices, labels })
}
