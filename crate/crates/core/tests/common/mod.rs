//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use sarcd::pcanet::Patch;
use sarcd::{BinaryMap, Raster};

/// Sum of squared distances to the cluster means, for a two-way split.
pub fn two_means_cost(points: &[[f64; 2]], side: &[bool]) -> f64 {
    let mut cost = 0.0;
    for want in [false, true] {
        let members: Vec<&[f64; 2]> = points.iter().zip(side).filter(|(_, &s)| s == want).map(|(p, _)| p).collect();
        if members.is_empty() {
            return f64::INFINITY;
        }
        let n = members.len() as f64;
        let mx = members.iter().map(|p| p[0]).sum::<f64>() / n;
        let my = members.iter().map(|p| p[1]).sum::<f64>() / n;
        cost += members.iter().map(|p| (p[0] - mx).powi(2) + (p[1] - my).powi(2)).sum::<f64>();
    }
    cost
}

/// Exact 2-means in the plane. An optimal split is linearly separable, so
/// it is found among the splits by lines through two data points, with the
/// two points on the line assigned every possible way.
pub fn brute_two_means_2d(points: &[[f64; 2]]) -> Vec<bool> {
    let n = points.len();
    let mut best = (f64::INFINITY, vec![false; n]);
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (points[i], points[j]);
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let base: Vec<bool> = points.iter().map(|p| dx * (p[1] - a[1]) - dy * (p[0] - a[0]) > 0.0).collect();
            for (si, sj) in [(false, false), (false, true), (true, false), (true, true)] {
                let mut side = base.clone();
                side[i] = si;
                side[j] = sj;
                let cost = two_means_cost(points, &side);
                if cost < best.0 {
                    best = (cost, side);
                }
            }
        }
    }
    best.1
}

/// Exhaustive minimum of the 2-means cost over every split of a small 1-D
/// sample.
pub fn brute_two_means_1d(values: &[f64]) -> Vec<bool> {
    let n = values.len();
    assert!(n <= 20);
    let points: Vec<[f64; 2]> = values.iter().map(|&v| [v, 0.0]).collect();
    let mut best = (f64::INFINITY, vec![false; n]);
    for mask in 1u32..(1 << n) - 1 {
        let side: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let cost = two_means_cost(&points, &side);
        if cost < best.0 {
            best = (cost, side);
        }
    }
    best.1
}

/// Two labelings agree up to exchanging the classes.
pub fn same_partition(a: &[bool], b: &[bool]) -> bool {
    a == b || a.iter().zip(b).all(|(x, y)| x != y)
}

/// Two Gaussian blobs far apart, `n` points in total.
pub fn separated_blobs(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.5).unwrap();
    (0..n)
        .map(|i| {
            let c = if i % 3 == 0 { [6.0, 4.0] } else { [0.0, 0.0] };
            [c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]
        })
        .collect()
}

pub fn random_patches(count: usize, rows: usize, cols: usize, seed: u64) -> Vec<Patch<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Patch::new(rows, cols, (0..rows * cols).map(|_| rng.random::<f64>()).collect()).unwrap())
        .collect()
}

/// Leading eigenvectors of the mean-removed patch scatter, by nalgebra,
/// ordered by decreasing eigenvalue.
pub fn pca_oracle(patches: &[Patch<f64>], count: usize) -> Vec<Vec<f64>> {
    let dim = patches[0].data().len();
    let columns: Vec<f64> = patches
        .iter()
        .flat_map(|p| {
            let mean = p.data().iter().sum::<f64>() / dim as f64;
            p.data().iter().map(move |v| v - mean)
        })
        .collect();
    let x = DMatrix::from_column_slice(dim, patches.len(), &columns);
    let eig = SymmetricEigen::new(&x * x.transpose());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order.iter().take(count).map(|&k| eig.eigenvectors.column(k).iter().copied().collect()).collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

pub fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
    cov / (variance(a) * variance(b)).sqrt()
}

/// Unchanged background block of the default scene, clear of every change
/// disc by more than the widest smoothing window.
pub const QUIET_ROWS: std::ops::Range<usize> = 100..160;
pub const QUIET_COLS: std::ops::Range<usize> = 16..144;

pub fn quiet_block(r: &Raster<f64>) -> Vec<f64> {
    QUIET_ROWS.flat_map(|row| QUIET_COLS.map(move |col| r.get(row, col))).collect()
}

pub fn quiet_block_is_clear(truth: &BinaryMap, margin: usize) -> bool {
    let w = truth.width();
    (QUIET_ROWS.start - margin..QUIET_ROWS.end + margin)
        .all(|r| (QUIET_COLS.start - margin..QUIET_COLS.end + margin).all(|c| !truth.labels()[r * w + c]))
}
