//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test --test acceptance -- --nocapture --test-threads=1`
//! to see the lines in order.

mod common;

use std::time::{Duration, Instant};

use ccm_ths::ccm::{
    assemble_cluster, full_truncation, ket_jacobian, ket_jacobian_fd, nilpotent_exp, similarity_transform, solve,
    sub_n_truncation, CcmSolution, SolverOptions,
};
use ccm_ths::cli::{self, parse_config, CheckStatus, RunOptions};
use ccm_ths::config_space::LinearOperator;
use ccm_ths::linalg::{self, CMat, C64};
use ccm_ths::models::{bundled, bundled_interacting, ModelInstance, ModelSpec};
use ccm_ths::{oracle, ths};
use common::{random_amplitudes, random_hermitian, random_model, rel_diff, report};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_260_219;

fn solve_full(model: &ModelInstance) -> CcmSolution {
    let t = full_truncation(&model.basis).unwrap();
    solve(model, &t, &SolverOptions::default()).unwrap_or_else(|e| panic!("{}: {e}", model.name))
}

fn secs(d: Duration) -> String {
    format!("{:.3} s", d.as_secs_f64())
}

#[test]
fn criterion_01_harmonic_anchor() {
    let start = Instant::now();
    let model = ModelSpec::oscillator(0.0, 20).unwrap().build().unwrap();
    let spectrum = oracle::exact_eigensystem(&model.hamiltonian).unwrap().real_eigenvalues();
    let sol = solve_full(&model);
    let elapsed = start.elapsed();
    let lowest_ok = spectrum[..3] == [1.0, 3.0, 5.0];
    let passed = lowest_ok
        && sol.energy == 1.0
        && sol.ket_residual_norm <= 1e-10
        && sol.newton_steps == 0
        && elapsed < Duration::from_secs(1);
    report(
        1,
        "harmonic-oscillator anchor",
        passed,
        &format!(
            "lowest {:?}, E = {}, residual {:.1e}, Newton steps {}, {}",
            &spectrum[..3],
            sol.energy,
            sol.ket_residual_norm,
            sol.newton_steps,
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_02_full_truncation_exactness() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_model = String::new();
    for spec in bundled_interacting() {
        let model = spec.build().unwrap();
        let exact = oracle::exact_ground_energy(&model).unwrap();
        let err = (solve_full(&model).energy - exact).abs();
        if err >= worst {
            worst = err;
            worst_model = model.name.clone();
        }
    }
    let elapsed = start.elapsed();
    report(
        2,
        "full-truncation exactness",
        worst <= 1e-8 && elapsed < Duration::from_secs(30),
        &format!("max |E_CCM − E_exact| = {worst:.2e} ({worst_model}), {}", secs(elapsed)),
    );
}

#[test]
fn criterion_03_quasi_hermiticity_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let model = random_model(&mut rng);
        let amps = random_amplitudes(&mut rng, &model);
        let s = assemble_cluster(&amps, &model.ops).unwrap();
        let h_hat = similarity_transform(&model.hamiltonian, &s).unwrap();
        let omega = LinearOperator::new(nilpotent_exp(&s).unwrap());
        let theta = ths::metric_from_map(&omega).unwrap();
        worst = worst.max(ths::quasi_hermiticity_defect(&h_hat, &theta));
    }
    let elapsed = start.elapsed();
    report(
        3,
        "quasi-Hermiticity identity",
        worst <= 1e-12 && elapsed < Duration::from_secs(10),
        &format!("max defect over 100 draws = {worst:.2e}, {}", secs(elapsed)),
    );
}

#[test]
fn criterion_04_rehermitization_equivalence() {
    let mut worst_herm: f64 = 0.0;
    let mut worst_spec: f64 = 0.0;
    for spec in bundled() {
        let model = spec.build().unwrap();
        let sol = solve_full(&model);
        let s = sol.cluster_operator(&model.ops).unwrap();
        let theta = ths::metric_from_map(&LinearOperator::new(nilpotent_exp(&s).unwrap())).unwrap();
        let hs = ths::rehermitize(&sol.transformed, &theta).unwrap();
        worst_herm = worst_herm.max(linalg::hermiticity_defect_frobenius(hs.matrix()));
        let exact = oracle::exact_eigensystem(&model.hamiltonian).unwrap().real_eigenvalues();
        let (_, dev) = ths::spectra_match(&ths::general_eigenvalues(hs.matrix()), &exact, 1e-8);
        worst_spec = worst_spec.max(dev);
    }
    report(
        4,
        "re-Hermitization equivalence",
        worst_herm <= 1e-8 && worst_spec <= 1e-8,
        &format!("max Hermiticity defect {worst_herm:.2e}, max spectral deviation {worst_spec:.2e}"),
    );
}

#[test]
fn criterion_05_doublet_contract() {
    let mut worst_bi: f64 = 0.0;
    let mut worst_comp: f64 = 0.0;
    let mut count = 0;
    for spec in bundled() {
        let model = spec.build().unwrap();
        for n in [1, 2, usize::MAX] {
            let t = if n == usize::MAX {
                full_truncation(&model.basis).unwrap()
            } else {
                sub_n_truncation(&model.basis, n).unwrap()
            };
            let sol = solve(&model, &t, &SolverOptions::default()).unwrap();
            let d = ths::doublet_eigensolve(&sol.transformed).unwrap();
            worst_bi = worst_bi.max(d.biorthonormality_defect());
            worst_comp = worst_comp.max(d.completeness_defect());
            count += 1;
        }
    }
    report(
        5,
        "doublet contract",
        worst_bi <= 1e-10 && worst_comp <= 1e-8,
        &format!("{count} solves: max biorthonormality defect {worst_bi:.2e}, max completeness defect {worst_comp:.2e}"),
    );
}

#[test]
fn criterion_06_left_eigen_doublet_after_bra_solve() {
    let mut worst: f64 = 0.0;
    for spec in bundled() {
        let model = spec.build().unwrap();
        let sol = solve_full(&model);
        worst = worst.max(cli::left_eigenrow_defect(&model, &sol).unwrap());
    }
    report(
        6,
        "left eigenrow after bra solve",
        worst <= 1e-8,
        &format!("max ‖⟨Φ|S̃ĥ − E⟨Φ|S̃‖ = {worst:.2e}"),
    );
}

#[test]
fn criterion_07_ccm_ths_dictionary() {
    let mut worst: f64 = 0.0;
    let mut worst_model = String::new();
    for spec in bundled_interacting() {
        let model = spec.build().unwrap();
        let sol = solve_full(&model);
        let r = ths::ccm_ths_dictionary_check(&sol, &model).unwrap();
        if r.discrepancy >= worst {
            worst = r.discrepancy;
            worst_model = model.name.clone();
        }
    }
    report(
        7,
        "CCM↔THS dictionary",
        worst <= 1e-8,
        &format!("max ‖u − v‖ = {worst:.2e} ({worst_model})"),
    );
}

#[test]
fn criterion_08_size_extensivity() {
    let pairs = [
        (ModelSpec::oscillator(0.1, 6).unwrap(), ModelSpec::spin_chain(2, 0.2, 1.0).unwrap()),
        (ModelSpec::oscillator(0.3, 8).unwrap(), ModelSpec::oscillator(0.1, 5).unwrap()),
        (ModelSpec::spin_chain(2, 0.5, 1.0).unwrap(), ModelSpec::spin_chain(3, 0.2, 1.0).unwrap()),
    ];
    let mut worst: f64 = 0.0;
    for (a, b) in pairs {
        let ea = solve_full(&a.build().unwrap()).energy;
        let eb = solve_full(&b.build().unwrap()).energy;
        let eab = solve_full(&ModelSpec::composite(a, b).unwrap().build().unwrap()).energy;
        worst = worst.max((eab - ea - eb).abs());
    }
    report(
        8,
        "size extensivity",
        worst <= 1e-8,
        &format!("max |E(A⊕B) − E(A) − E(B)| = {worst:.2e} over 3 composites"),
    );
}

#[test]
fn criterion_09_transform_oracle_and_jacobian() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let mut worst_transform: f64 = 0.0;
    for _ in 0..50 {
        let model = random_model(&mut rng);
        let amps = random_amplitudes(&mut rng, &model);
        let s = assemble_cluster(&amps, &model.ops).unwrap();
        let series = similarity_transform(&model.hamiltonian, &s).unwrap();
        let dense = oracle::dense_exp_transform(&model.hamiltonian, &s);
        worst_transform = worst_transform.max(rel_diff(series.matrix(), dense.matrix()));
    }
    let mut worst_jac: f64 = 0.0;
    for _ in 0..20 {
        let model = random_model(&mut rng);
        let amps = random_amplitudes(&mut rng, &model);
        let s = assemble_cluster(&amps, &model.ops).unwrap();
        let h_hat = similarity_transform(&model.hamiltonian, &s).unwrap();
        let analytic = ket_jacobian(&h_hat, amps.truncation(), &model.ops).unwrap();
        let fd = ket_jacobian_fd(&model.hamiltonian, &amps, &model.ops, 1e-6).unwrap();
        worst_jac = worst_jac.max(rel_diff(&fd, &analytic));
    }
    report(
        9,
        "transform oracle equivalence",
        worst_transform <= 1e-10 && worst_jac <= 1e-5,
        &format!("max transform deviation {worst_transform:.2e} (50 draws), max Jacobian deviation {worst_jac:.2e} (20 points)"),
    );
}

#[test]
fn criterion_10_pi_symmetry_cooccurrence() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
    let mut cases = 0;
    let mut consistent = 0;
    let mut generic_nontrivial = true;
    for _ in 0..10 {
        let model = random_model(&mut rng);
        let h = &model.hamiltonian;
        let d = model.dimension();
        // unitary: exp(iK) with K Hermitian
        let k = random_hermitian(&mut rng, d, 1.0);
        let eig = k.clone().symmetric_eigen();
        let phases = CMat::from_diagonal(&eig.eigenvalues.map(|x| C64::new(0.0, x).exp()));
        let unitary = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
        // analytic function of H, scaled so that the map stays well conditioned
        let spread = {
            let e = h.matrix().clone().symmetric_eigen().eigenvalues;
            e.max() - e.min()
        };
        let alpha = 2.0 / spread.max(1.0);
        let func = linalg::hermitian_function(h.matrix(), |x| (alpha * x).exp());
        // generic eˢ
        let amps = random_amplitudes(&mut rng, &model);
        let s = assemble_cluster(&amps, &model.ops).unwrap();
        let generic = nilpotent_exp(&s).unwrap();
        for (kind, omega) in [("unitary", unitary), ("exp(αH)", func), ("generic", generic)] {
            let r = ths::pi_symmetry_report(h, &LinearOperator::new(omega)).unwrap();
            cases += 1;
            if r.consistent {
                consistent += 1;
            }
            if kind != "generic" && r.commutator_defect > ths::PI_COMMUTATOR_THRESHOLD {
                generic_nontrivial = false;
            }
        }
    }
    report(
        10,
        "Π-symmetry co-occurrence",
        consistent == cases && generic_nontrivial,
        &format!("{consistent}/{cases} constructed cases consistent"),
    );
}

#[test]
fn criterion_11_cli_reproducibility() {
    let config = parse_config(
        r#"{"model": {"kind": "oscillator", "lambda": 0.1, "dim": 12},
            "truncation": "full",
            "checks": {"oracle": true}}"#,
    )
    .unwrap();
    let opts = RunOptions { verify: true, seed: 42 };
    let strip = |r: &cli::RunReport| {
        let mut v = serde_json::to_value(r).unwrap();
        v.as_object_mut().unwrap().remove("timings");
        serde_json::to_string_pretty(&v).unwrap()
    };
    let first = strip(&cli::run(&config, &opts));
    let second = strip(&cli::run(&config, &opts));
    let identical = first == second;

    let sweep = cli::sweep_sub_n(&config, &opts);
    let endpoint = sweep.sweep.last().and_then(|r| r.error).unwrap_or(f64::INFINITY);
    let all_passed = sweep.defects.iter().all(|d| d.status == CheckStatus::Passed);
    report(
        11,
        "CLI reproducibility",
        identical && endpoint <= 1e-8 && all_passed,
        &format!("reports identical modulo timings: {identical}, SUB-n sweep endpoint error {endpoint:.2e}"),
    );
}
