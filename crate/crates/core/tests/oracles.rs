mod common;

use common::*;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

use sarcd::pcanet::{learn_pca_filters, symmetric_eigen};
use sarcd::pfcmc::{fcm, FcmParams, FeatureSet};

fn hard(result: &sarcd::FcmResult64) -> Vec<bool> {
    result.hard_labels().iter().map(|l| *l == Some(1)).collect()
}

#[test]
fn fcm_agrees_with_exhaustive_split_on_five_points() {
    let values = [0.0, 0.01, 0.02, 1.0, 0.99];
    let oracle = brute_two_means_1d(&values);
    assert!(same_partition(&oracle, &[false, false, false, true, true]));
    for seed in 0..10 {
        let r = fcm(&FeatureSet::new(5, 1, values.to_vec()).unwrap(), &FcmParams::default(), seed).unwrap();
        assert!(same_partition(&hard(&r), &oracle), "seed {seed}");
    }
}

#[test]
fn fcm_agrees_with_brute_force_two_means_in_the_plane() {
    let points = separated_blobs(200, 11);
    let oracle = brute_two_means_2d(&points);
    let data: Vec<f64> = points.iter().flatten().copied().collect();
    let set = FeatureSet::new(200, 2, data).unwrap();
    for seed in [0, 1, 42] {
        let r = fcm(&set, &FcmParams::default(), seed).unwrap();
        assert!(same_partition(&hard(&r), &oracle), "seed {seed}");
        assert!(r.objective.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }
}

#[test]
fn pca_filters_match_dense_eigendecomposition() {
    let patches = random_patches(50, 10, 5, 3);
    let filters = learn_pca_filters(&patches, 8).unwrap();
    let oracle = pca_oracle(&patches, 8);
    for (l, (f, o)) in filters.iter().zip(&oracle).enumerate() {
        let c = cosine(f.data(), o).abs();
        assert!(c >= 1.0 - 1e-8, "filter {l}: |cos| = {c}");
    }
    for a in 0..filters.len() {
        for b in 0..filters.len() {
            let dot: f64 = filters[a].data().iter().zip(filters[b].data()).map(|(x, y)| x * y).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((dot - want).abs() < 1e-8, "({a},{b}) = {dot}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn jacobi_spectrum_matches_nalgebra(n in 2usize..9, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let s = &a + a.transpose();
        let flat: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| s[(i, j)]).collect();
        let (values, vectors) = symmetric_eigen(&flat, n);
        let mut want: Vec<f64> = SymmetricEigen::new(s.clone()).eigenvalues.iter().copied().collect();
        want.sort_by(|a, b| b.total_cmp(a));
        for (got, want) in values.iter().zip(&want) {
            prop_assert!((got - want).abs() < 1e-10);
        }
        // columns are eigenvectors: S v = lambda v
        for k in 0..n {
            for i in 0..n {
                let sv: f64 = (0..n).map(|j| s[(i, j)] * vectors[j * n + k]).sum();
                prop_assert!((sv - values[k] * vectors[i * n + k]).abs() < 1e-9);
            }
        }
    }
}
