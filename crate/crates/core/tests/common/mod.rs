#![allow(dead_code)]

use ccm_ths::ccm::{full_truncation, ClusterAmplitudes, TruncationSet};
use ccm_ths::config_space::LinearOperator;
use ccm_ths::linalg::{CMat, C64};
use ccm_ths::models::{ModelInstance, ModelSpec};
use rand::Rng;

pub fn random_hermitian(rng: &mut impl Rng, d: usize, scale: f64) -> CMat {
    let mut m = CMat::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::new(rng.random_range(-scale..scale), 0.0);
        for j in i + 1..d {
            let z = C64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

pub fn random_matrix(rng: &mut impl Rng, d: usize, scale: f64) -> CMat {
    CMat::from_fn(d, d, |_, _| C64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
}

/// A random small model: a bundled one, or a random Hermitian matrix
/// carried by the configuration machinery of an oscillator or spin chain.
pub fn random_model(rng: &mut impl Rng) -> ModelInstance {
    match rng.random_range(0..5) {
        0 => ModelSpec::oscillator(rng.random_range(0.0..0.5), rng.random_range(3..=16)).unwrap().build().unwrap(),
        1 => ModelSpec::spin_chain(rng.random_range(2..=4), rng.random_range(0.0..1.0), 1.0)
            .unwrap()
            .build()
            .unwrap(),
        2 => ModelSpec::composite(
            ModelSpec::oscillator(rng.random_range(0.0..0.3), rng.random_range(2..=4)).unwrap(),
            ModelSpec::spin_chain(2, rng.random_range(0.0..1.0), 1.0).unwrap(),
        )
        .unwrap()
        .build()
        .unwrap(),
        k => {
            let carrier = if k == 3 {
                ModelSpec::oscillator(0.0, rng.random_range(2..=10)).unwrap()
            } else {
                ModelSpec::spin_chain(rng.random_range(2..=3), 0.0, 1.0).unwrap()
            };
            let mut m = carrier.build().unwrap();
            let d = m.dimension();
            m.hamiltonian = LinearOperator::hermitian(random_hermitian(rng, d, 1.0)).unwrap();
            m.name = format!("random Hermitian on {}", m.name);
            m
        }
    }
}

/// Random amplitudes on a random nonempty subset of the excited configurations.
pub fn random_truncation(rng: &mut impl Rng, model: &ModelInstance) -> TruncationSet {
    let full = full_truncation(&model.basis).unwrap();
    if rng.random_bool(0.5) {
        return full;
    }
    let mut keep: Vec<usize> = full.indices().iter().copied().filter(|_| rng.random_bool(0.6)).collect();
    if keep.is_empty() {
        keep.push(full.indices()[0]);
    }
    ccm_ths::ccm::TruncationSpec::explicit(keep).select(&model.basis).unwrap()
}

pub fn random_amplitudes(rng: &mut impl Rng, model: &ModelInstance) -> ClusterAmplitudes {
    let t = random_truncation(rng, model);
    ccm_ths::cli::random_amplitudes(rng, model, &t).unwrap()
}

pub fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Print the acceptance line and fail the test if the criterion does not hold.
pub fn report(criterion: u32, title: &str, passed: bool, detail: &str) {
    println!("criterion {criterion:>2} [{}] {title}: {detail}", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "criterion {criterion} ({title}) failed: {detail}");
}
