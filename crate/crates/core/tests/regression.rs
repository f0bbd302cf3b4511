//! Pinned reference numbers, computed once with the independent oracle and
//! cross-checked against the library's own eigensolvers.

use ccm_ths::ccm::{solve, sub_n_truncation, SolverOptions};
use ccm_ths::models::{ModelInstance, ModelSpec};
use ccm_ths::oracle;

fn close(found: f64, pinned: f64, tol: f64) -> bool {
    (found - pinned).abs() <= tol * pinned.abs().max(1.0)
}

fn sub_n_error(model: &ModelInstance, n: usize, exact: f64) -> f64 {
    let t = sub_n_truncation(&model.basis, n).unwrap();
    (solve(model, &t, &SolverOptions::default()).unwrap().energy - exact).abs()
}

#[test]
fn anharmonic_oscillator_ground_energies() {
    for (lambda, dim, pinned) in [
        (0.1, 40, 1.065285509543722),
        (0.1, 16, 1.065285509422153),
        (0.1, 12, 1.065285540599688),
        (0.3, 16, 1.164047168796106),
    ] {
        let model = ModelSpec::oscillator(lambda, dim).unwrap().build().unwrap();
        let e = oracle::exact_ground_energy(&model).unwrap();
        assert!(close(e, pinned, 1e-12), "λ={lambda} D={dim}: {e} vs {pinned}");
        let reference = model.hamiltonian.matrix().clone().symmetric_eigen().eigenvalues.min();
        assert!(close(reference, pinned, 1e-12), "library eigensolver disagrees: {reference}");
    }
}

#[test]
fn anharmonic_oscillator_sub_n_errors() {
    let model = ModelSpec::oscillator(0.1, 16).unwrap().build().unwrap();
    let exact = oracle::exact_ground_energy(&model).unwrap();
    for (n, pinned) in [
        (1, 9.714490577846124e-3),
        (2, 7.148852315823628e-4),
        (4, 3.595728470040526e-5),
    ] {
        let err = sub_n_error(&model, n, exact);
        assert!(close(err, pinned, 1e-6), "SUB-{n}: {err:e} vs {pinned:e}");
    }
}

#[test]
fn ising_chain_sub_n_errors() {
    let model = ModelSpec::spin_chain(4, 0.2, 1.0).unwrap().build().unwrap();
    let exact = oracle::exact_ground_energy(&model).unwrap();
    assert!(close(exact, -3.061734803953752, 1e-12), "{exact}");
    for (n, pinned) in [
        (1, 2.176750068282551e-3),
        (2, 1.547107204723729e-3),
        (3, 1.53237136217843e-3),
    ] {
        let err = sub_n_error(&model, n, exact);
        assert!(close(err, pinned, 1e-6), "g=0.2 SUB-{n}: {err:e} vs {pinned:e}");
    }
    assert!(sub_n_error(&model, 4, exact) <= 1e-10);

    let model = ModelSpec::spin_chain(4, 0.5, 1.0).unwrap().build().unwrap();
    let exact = oracle::exact_ground_energy(&model).unwrap();
    for (n, pinned) in [
        (1, 6.786048579064019e-2),
        (2, 4.696715352953594e-2),
        (3, 4.380086348058576e-2),
    ] {
        let err = sub_n_error(&model, n, exact);
        assert!(close(err, pinned, 1e-6), "g=0.5 SUB-{n}: {err:e} vs {pinned:e}");
    }

    let model = ModelSpec::spin_chain(3, 0.2, 1.0).unwrap().build().unwrap();
    let exact = oracle::exact_ground_energy(&model).unwrap();
    for (n, pinned) in [(1, 8.19493956313355e-3), (2, 7.611286347067203e-3)] {
        let err = sub_n_error(&model, n, exact);
        assert!(close(err, pinned, 1e-6), "N=3 SUB-{n}: {err:e} vs {pinned:e}");
    }
}

#[test]
fn sub_n_errors_decrease_for_the_oscillator() {
    let model = ModelSpec::oscillator(0.1, 16).unwrap().build().unwrap();
    let exact = oracle::exact_ground_energy(&model).unwrap();
    let errors: Vec<f64> = (1..=6).map(|n| sub_n_error(&model, n, exact)).collect();
    assert!(errors.windows(2).all(|w| w[1] <= w[0]), "{errors:?}");
}
