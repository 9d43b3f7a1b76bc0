//! Linear SVM trained by seeded stochastic subgradient descent on the
//! L2-regularized hinge loss, over per-dimension standardized features.
//!
//! Models serialize to the `SARV` container (little-endian): magic
//! `b"SARV"`, u32 dimension, two reserved u32 zeros, then f32 bias,
//! `dim` weights, `dim` training means and `dim` training deviations
//! (0 marks a constant, ignored channel).

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const SARV_MAGIC: &[u8; 4] = b"SARV";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    /// Hinge-loss weight `C` in `½‖w‖² + C Σ max(0, 1 - y f(x))`.
    pub c: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 1.0, epochs: 20 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel<T> {
    pub weights: Vec<T>,
    pub bias: T,
    pub means: Vec<T>,
    /// Zero for channels that were constant during training.
    pub stds: Vec<T>,
}

/// Training outcome with the objective measured after every epoch.
#[derive(Debug, Clone)]
pub struct SvmTraining<T> {
    pub model: SvmModel<T>,
    pub objective: Vec<T>,
    /// Epoch (1-based) whose weights were kept.
    pub best_epoch: usize,
}

impl<T: Real> SvmModel<T> {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Standardizes with the stored training statistics.
    pub fn standardize(&self, x: &[T], out: &mut [T]) {
        for d in 0..x.len() {
            out[d] = if self.stds[d] > T::zero() { (x[d] - self.means[d]) / self.stds[d] } else { T::zero() };
        }
    }

    /// Decision value on an already standardized vector.
    pub fn decision_standardized(&self, z: &[T]) -> T {
        self.weights.iter().zip(z).map(|(&w, &v)| w * v).sum::<T>() + self.bias
    }

    pub fn decision(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dim() {
            return Err(Error::param(format!("feature has {} dims, model expects {}", x.len(), self.dim())));
        }
        let mut z = vec![T::zero(); x.len()];
        self.standardize(x, &mut z);
        Ok(self.decision_standardized(&z))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * (1 + 3 * self.dim()));
        out.extend_from_slice(SARV_MAGIC);
        out.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        out.extend_from_slice(&[0u8; 8]);
        let mut push = |v: T| out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        push(self.bias);
        self.weights.iter().chain(&self.means).chain(&self.stds).for_each(|&v| push(v));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..4] != SARV_MAGIC {
            return Err(Error::Parse { offset: 0, message: "not a SARV model".into() });
        }
        let dim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let expected = 1 + 3 * dim;
        let payload = &bytes[16..];
        if payload.len() != 4 * expected {
            return Err(Error::Length { expected, found: payload.len() / 4 });
        }
        let vals: Vec<T> =
            payload.chunks_exact(4).map(|c| T::lit(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)).collect();
        Ok(Self {
            bias: vals[0],
            weights: vals[1..1 + dim].to_vec(),
            means: vals[1 + dim..1 + 2 * dim].to_vec(),
            stds: vals[1 + 2 * dim..].to_vec(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

fn column_stats<T: Real>(features: &[T], dim: usize) -> (Vec<T>, Vec<T>) {
    let n = features.len() / dim;
    let nt = T::from_usize_lossy(n);
    let mut means = vec![T::zero(); dim];
    for row in features.chunks_exact(dim) {
        for (m, &v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= nt);
    let mut vars = vec![T::zero(); dim];
    for row in features.chunks_exact(dim) {
        for d in 0..dim {
            let e = row[d] - means[d];
            vars[d] += e * e;
        }
    }
    let stds = vars
        .into_iter()
        .zip(&means)
        .map(|(v, &m)| {
            let sd = (v / nt).sqrt();
            // spread below rounding noise counts as constant
            if sd > T::epsilon() * T::lit(16.0) * (m.abs() + T::one()) {
                sd
            } else {
                T::zero()
            }
        })
        .collect();
    (means, stds)
}

/// Trains on row-major `features` (`labels.len()` rows of `dim` values)
/// with labels `+1` (changed) and `-1` (unchanged).
///
/// Each step uses the Pegasos schedule `eta_t = 1/(lambda t)` with
/// `lambda = 1/(C n)`, which minimizes the objective above up to the
/// constant factor `C n`; the bias enters as a regularized constant
/// feature. The epoch with the lowest objective is returned.
pub fn train_svm_with_history<T: Real>(
    features: &[T],
    dim: usize,
    labels: &[i8],
    params: &SvmParams,
    seed: u64,
) -> Result<SvmTraining<T>> {
    let n = labels.len();
    if dim == 0 || features.len() != n * dim {
        return Err(Error::Length { expected: n * dim, found: features.len() });
    }
    if labels.iter().any(|&y| y != 1 && y != -1) {
        return Err(Error::param("labels must be +1 or -1"));
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    if n < 2 || positives == 0 || positives == n {
        return Err(Error::DegenerateTraining(format!("{positives} positive of {n} training samples")));
    }
    if !(params.c > 0.0) || params.epochs == 0 {
        return Err(Error::param("SVM needs C > 0 and at least one epoch"));
    }

    let (means, stds) = column_stats(features, dim);
    let standardized = |s: usize, out: &mut [T]| {
        let row = &features[s * dim..(s + 1) * dim];
        for d in 0..dim {
            out[d] = if stds[d] > T::zero() { (row[d] - means[d]) / stds[d] } else { T::zero() };
        }
        out[dim] = T::one();
    };
    let ys: Vec<T> = labels.iter().map(|&y| T::lit(y as f64)).collect();
    let c = T::lit(params.c);
    let lambda = T::one() / (c * T::from_usize_lossy(n));

    let objective = |w: &[T], buf: &mut [T]| -> T {
        let mut hinge = T::zero();
        for s in 0..n {
            standardized(s, buf);
            let m = ys[s] * w.iter().zip(buf.iter()).map(|(&a, &b)| a * b).sum::<T>();
            hinge += (T::one() - m).max(T::zero());
        }
        T::lit(0.5) * w.iter().map(|&v| v * v).sum::<T>() + c * hinge
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut w = vec![T::zero(); dim + 1];
    let mut x = vec![T::zero(); dim + 1];
    let mut best = (T::infinity(), w.clone(), 0usize);
    let mut history = Vec::with_capacity(params.epochs);
    let mut t = 0usize;
    for epoch in 1..=params.epochs {
        order.shuffle(&mut rng);
        for &s in &order {
            t += 1;
            let tt = T::from_usize_lossy(t);
            let eta = T::one() / (lambda * tt);
            standardized(s, &mut x);
            let margin = ys[s] * w.iter().zip(&x).map(|(&a, &b)| a * b).sum::<T>();
            let shrink = T::one() - T::one() / tt;
            if margin < T::one() {
                let step = eta * ys[s];
                for (wi, &xi) in w.iter_mut().zip(&x) {
                    *wi = *wi * shrink + step * xi;
                }
            } else {
                w.iter_mut().for_each(|wi| *wi *= shrink);
            }
        }
        let obj = objective(&w, &mut x);
        history.push(obj);
        if obj < best.0 {
            best = (obj, w.clone(), epoch);
        }
    }
    let (_, w, best_epoch) = best;
    let bias = w[dim];
    let model = SvmModel { weights: w[..dim].to_vec(), bias, means, stds };
    Ok(SvmTraining { model, objective: history, best_epoch })
}

pub fn train_svm<T: Real>(
    features: &[T],
    dim: usize,
    labels: &[i8],
    params: &SvmParams,
    seed: u64,
) -> Result<SvmModel<T>> {
    Ok(train_svm_with_history(features, dim, labels, params, seed)?.model)
}

/// `(label, decision)`; a zero decision counts as unchanged (`-1`).
pub fn predict<T: Real>(model: &SvmModel<T>, feature: &[T]) -> Result<(i8, T)> {
    let d = model.decision(feature)?;
    Ok((if d > T::zero() { 1 } else { -1 }, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOY: [f64; 8] = [0.0, 0.0, 0.0, 1.0, 3.0, 3.0, 3.0, 4.0];
    const TOY_Y: [i8; 4] = [-1, -1, 1, 1];

    #[test]
    fn separable_toy_fits() {
        let model = train_svm(&TOY, 2, &TOY_Y, &SvmParams::default(), 0).unwrap();
        for (row, &y) in TOY.chunks(2).zip(&TOY_Y) {
            assert_eq!(predict(&model, row).unwrap().0, y);
        }
    }

    #[test]
    fn objective_not_worse_than_first_epoch() {
        let tr = train_svm_with_history(&TOY, 2, &TOY_Y, &SvmParams { c: 1.0, epochs: 30 }, 4).unwrap();
        let kept = tr.objective[tr.best_epoch - 1];
        assert!(kept <= tr.objective[0]);
    }

    #[test]
    fn flipped_labels_negate_decisions() {
        let flipped: Vec<i8> = TOY_Y.iter().map(|y| -y).collect();
        let a = train_svm(&TOY, 2, &TOY_Y, &SvmParams::default(), 8).unwrap();
        let b = train_svm(&TOY, 2, &flipped, &SvmParams::default(), 8).unwrap();
        for row in TOY.chunks(2) {
            let (da, db) = (a.decision(row).unwrap(), b.decision(row).unwrap());
            assert!((da + db).abs() < 1e-9, "{da} vs {db}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = train_svm(&TOY, 2, &TOY_Y, &SvmParams::default(), 3).unwrap();
        let b = train_svm(&TOY, 2, &TOY_Y, &SvmParams::default(), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hand_predictions() {
        let model = SvmModel { weights: vec![1.0, 0.0], bias: 0.0, means: vec![0.0; 2], stds: vec![1.0; 2] };
        assert_eq!(predict(&model, &[2.0, 5.0]).unwrap(), (1, 2.0));
        assert_eq!(predict(&model, &[0.0, 0.0]).unwrap(), (-1, 0.0));
        assert!(predict(&model, &[1.0]).is_err());
    }

    #[test]
    fn constant_channel_ignored() {
        let feats = [0.0, 7.0, 0.1, 7.0, 3.0, 7.0, 3.1, 7.0];
        let model = train_svm(&feats, 2, &TOY_Y, &SvmParams::default(), 1).unwrap();
        assert_eq!(model.stds[1], 0.0);
        assert_eq!(model.decision(&[3.0, 7.0]).unwrap(), model.decision(&[3.0, -100.0]).unwrap());
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(
            train_svm(&TOY, 2, &[1, 1, 1, 1], &SvmParams::default(), 0),
            Err(Error::DegenerateTraining(_))
        ));
    }

    #[test]
    fn sarv_round_trip() {
        let model: SvmModel<f32> =
            SvmModel { weights: vec![0.5, -1.25], bias: 0.75, means: vec![1.0, 2.0], stds: vec![0.0, 3.0] };
        let bytes = model.to_bytes();
        assert_eq!(&bytes[..8], b"SARV\x02\x00\x00\x00");
        assert_eq!(SvmModel::<f32>::from_bytes(&bytes).unwrap(), model);
        assert!(SvmModel::<f32>::from_bytes(&bytes[..bytes.len() - 4]).is_err());
    }

    proptest! {
        #[test]
        fn decision_affine_in_standardized_space(
            w in prop::collection::vec(-2.0f64..2.0, 4),
            b in -1.0f64..1.0,
            x1 in prop::collection::vec(-5.0f64..5.0, 4),
            x2 in prop::collection::vec(-5.0f64..5.0, 4),
            alpha in 0.0f64..1.0,
        ) {
            let model = SvmModel { weights: w, bias: b, means: vec![0.0; 4], stds: vec![1.0; 4] };
            let mix: Vec<f64> = x1.iter().zip(&x2).map(|(p, q)| alpha * p + (1.0 - alpha) * q).collect();
            let lhs = model.decision_standardized(&mix);
            let rhs = alpha * model.decision_standardized(&x1) + (1.0 - alpha) * model.decision_standardized(&x2);
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }
    }
}
