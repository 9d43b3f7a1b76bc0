//! Two-cluster fuzzy c-means.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FeatureSet;
use crate::error::{Error, Result};
use crate::scalar::Real;

const INIT_RETRIES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FcmParams {
    /// Fuzzifier, must exceed 1.
    pub m: f64,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FcmParams {
    fn default() -> Self {
        Self { m: 2.0, tol: 1e-5, max_iter: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcmResult<T> {
    /// One `[u0, u1]` row per sample; rows sum to one.
    pub memberships: Vec<[T; 2]>,
    pub centroids: [Vec<T>; 2],
    pub iterations: usize,
    pub converged: bool,
    /// Objective `sum_s sum_c u^m ||x_s - v_c||^2` after each iteration.
    pub objective: Vec<T>,
}

impl<T: Real> FcmResult<T> {
    /// Argmax cluster per sample; `None` on an exact tie.
    pub fn hard_labels(&self) -> Vec<Option<usize>> {
        self.memberships
            .iter()
            .map(|u| match u[0].partial_cmp(&u[1]) {
                Some(std::cmp::Ordering::Greater) => Some(0),
                Some(std::cmp::Ordering::Less) => Some(1),
                _ => None,
            })
            .collect()
    }

    /// Same clustering with the two clusters' indices exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            memberships: self.memberships.iter().map(|u| [u[1], u[0]]).collect(),
            centroids: [self.centroids[1].clone(), self.centroids[0].clone()],
            iterations: self.iterations,
            converged: self.converged,
            objective: self.objective.clone(),
        }
    }
}

#[inline]
fn sq_dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

fn update_memberships<T: Real>(features: &FeatureSet<T>, centroids: &[Vec<T>; 2], exponent: T, out: &mut [[T; 2]]) {
    for (s, u) in out.iter_mut().enumerate() {
        let x = features.row(s);
        let d0 = sq_dist(x, &centroids[0]);
        let d1 = sq_dist(x, &centroids[1]);
        *u = if d0 == T::zero() && d1 == T::zero() {
            [T::lit(0.5), T::lit(0.5)]
        } else if d0 == T::zero() {
            [T::one(), T::zero()]
        } else if d1 == T::zero() {
            [T::zero(), T::one()]
        } else {
            // u0 = 1 / (1 + (d0/d1)^(1/(m-1))) on squared distances
            let r = (d0 / d1).powf(exponent);
            let u0 = T::one() / (T::one() + r);
            [u0, T::one() - u0]
        };
    }
}

fn update_centroids<T: Real>(features: &FeatureSet<T>, memberships: &[[T; 2]], m: T) -> [Vec<T>; 2] {
    let dim = features.dim();
    let mut sums = [vec![T::zero(); dim], vec![T::zero(); dim]];
    let mut weights = [T::zero(); 2];
    for (s, u) in memberships.iter().enumerate() {
        let x = features.row(s);
        for c in 0..2 {
            let w = u[c].powf(m);
            weights[c] += w;
            for (acc, &xi) in sums[c].iter_mut().zip(x) {
                *acc += w * xi;
            }
        }
    }
    for c in 0..2 {
        if weights[c] > T::zero() {
            let inv = T::one() / weights[c];
            sums[c].iter_mut().for_each(|v| *v *= inv);
        }
    }
    sums
}

fn objective<T: Real>(features: &FeatureSet<T>, memberships: &[[T; 2]], centroids: &[Vec<T>; 2], m: T) -> T {
    memberships
        .iter()
        .enumerate()
        .map(|(s, u)| {
            let x = features.row(s);
            u[0].powf(m) * sq_dist(x, &centroids[0]) + u[1].powf(m) * sq_dist(x, &centroids[1])
        })
        .sum()
}

/// Seeded two-cluster FCM. Centroids start at two distinct samples; the
/// loop alternates membership and centroid updates until the largest
/// centroid displacement drops below `tol` or `max_iter` is reached.
pub fn fcm<T: Real>(features: &FeatureSet<T>, params: &FcmParams, seed: u64) -> Result<FcmResult<T>> {
    let n = features.count();
    if n < 2 {
        return Err(Error::param("FCM needs at least two samples"));
    }
    if !(params.m > 1.0) {
        return Err(Error::param(format!("FCM fuzzifier must exceed 1, got {}", params.m)));
    }
    if params.max_iter == 0 || !(params.tol > 0.0) {
        return Err(Error::param("FCM needs max_iter >= 1 and tol > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut init = None;
    for _ in 0..INIT_RETRIES {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b && features.row(a) != features.row(b) {
            init = Some((a, b));
            break;
        }
    }
    let (a, b) = match init {
        Some(pair) => pair,
        None => {
            // fall back to a scan for any sample distinct from the first draw
            let a = rng.random_range(0..n);
            let b = (0..n)
                .find(|&j| features.row(j) != features.row(a))
                .ok_or_else(|| Error::DegenerateInput("all feature vectors are identical".into()))?;
            (a, b)
        }
    };

    let m = T::lit(params.m);
    let exponent = T::one() / (m - T::one());
    let tol = T::lit(params.tol);
    let mut centroids = [features.row(a).to_vec(), features.row(b).to_vec()];
    let mut memberships = vec![[T::zero(); 2]; n];
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iter {
        iterations += 1;
        update_memberships(features, &centroids, exponent, &mut memberships);
        let next = update_centroids(features, &memberships, m);
        let shift = (0..2).map(|c| sq_dist(&next[c], &centroids[c]).sqrt()).fold(T::zero(), T::max);
        centroids = next;
        history.push(objective(features, &memberships, &centroids, m));
        if shift < tol {
            converged = true;
            break;
        }
    }
    // memberships consistent with the final centroids
    update_memberships(features, &centroids, exponent, &mut memberships);
    Ok(FcmResult { memberships, centroids, iterations, converged, objective: history })
}
