//! Seeded statistical checks on the generator, the smoothing stages and the
//! scores. Measured values are noted next to each bound.

mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sarcd::ddi::{deep_difference_stages, log_ratio, pool_kernel, weighted_pool, DdiParams};
use sarcd::metrics::{confusion, kappa};
use sarcd::synth::{generate_pair, speckle_field, SceneSpec};
use sarcd::{BinaryMap, Raster};

#[test]
fn speckle_mean_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let field = speckle_field(256 * 256, 1.0, &mut rng).unwrap();
    let mean = field.iter().sum::<f64>() / field.len() as f64;
    // measured 1.00601
    assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
}

#[test]
fn speckle_fields_are_independent() {
    let scene = generate_pair::<f64>(&SceneSpec::default()).unwrap();
    let (mut s1, mut s2) = (Vec::new(), Vec::new());
    for i in 0..scene.truth.len() {
        if !scene.truth.labels()[i] {
            s1.push(scene.i1.values()[i] / scene.clean1[i]);
            s2.push(scene.i2.values()[i] / scene.clean2[i]);
        }
    }
    let rho = correlation(&s1, &s2);
    // measured 0.00273
    assert!(rho.abs() < 0.02, "correlation {rho}");
}

#[test]
fn pooling_variance_shrinks_with_window() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Raster::from_fn(128, 128, |_, _| rng.random::<f64>()).unwrap();
    let mut last = f64::INFINITY;
    for t in 1..=9 {
        let kernel = pool_kernel::<f64>(2 * t - 1).unwrap();
        let pooled = weighted_pool(&noise, &kernel).unwrap();
        let interior: Vec<f64> = (16..112)
            .flat_map(|r| (16..112).map(move |c| (r, c)))
            .map(|(r, c)| pooled.get(r, c) / kernel.mean())
            .collect();
        let v = variance(&interior);
        assert!(v <= last, "t={t}: {v} > {last}");
        last = v;
    }
}

#[test]
fn difference_image_is_smoother_than_pooled_log_ratio() {
    let scene = generate_pair::<f64>(&SceneSpec::default()).unwrap();
    assert!(quiet_block_is_clear(&scene.truth, 10));
    let st = deep_difference_stages(&scene.i1, &scene.i2, &DdiParams { k: 3, t: 9 }).unwrap();
    let (v_ddi, v_d) = (variance(&quiet_block(&st.ddi)), variance(&quiet_block(&st.log_ratio)));
    // measured 0.00873 vs 0.0935; the raw log-ratio block variance is 1.328
    assert!(v_ddi < v_d, "{v_ddi} vs {v_d}");
    let raw = log_ratio(&scene.i1, &scene.i2).unwrap();
    let v_raw = variance(&quiet_block(&raw));
    assert!(v_ddi < 0.5 * v_raw, "{v_ddi} vs raw {v_raw}");
}

#[test]
fn kappa_of_independent_maps_is_near_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 1000 * 1000;
    let a = BinaryMap::new(1000, 1000, (0..n).map(|_| rng.random_bool(0.3)).collect()).unwrap();
    let b = BinaryMap::new(1000, 1000, (0..n).map(|_| rng.random_bool(0.3)).collect()).unwrap();
    let kc = kappa(&confusion(&a, &b).unwrap()).unwrap();
    // measured 0.00012
    assert!(kc.abs() < 0.01, "kappa {kc}");
}
