//! The four CLI commands, each producing a [`RunReport`].

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::RunConfig;
use super::report::{
    amplitude_table, AmplitudeRow, CheckStatus, Defect, EnergyReport, ErrorReport, ResidualReport, RunReport,
    SpectrumComparison, SweepRow, TraceRow,
};
use crate::ccm::{
    assemble_cluster, bra_row, full_truncation, nilpotent_exp, similarity_transform, solve, sub_n_truncation,
    BraAmplitudes, CcmSolution, ClusterAmplitudes, TruncationSet,
};
use crate::config_space::LinearOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};
use crate::models::{ModelInstance, ModelRegistry};
use crate::{oracle, ths};

/// Command-line switches shared by all commands.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Enable the oracle cross-checks regardless of the config.
    pub verify: bool,
    pub seed: u64,
}

pub const ENERGY_TOLERANCE: f64 = 1e-8;
pub const TRANSFORM_TOLERANCE: f64 = 1e-10;
pub const GROUND_VECTOR_TOLERANCE: f64 = 1e-7;
pub const QUASI_HERMITICITY_TOLERANCE: f64 = 1e-12;
pub const SPECTRUM_TOLERANCE: f64 = 1e-8;
pub const BRA_RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Random amplitude draws used by the transform cross-check under `--verify`.
pub const VERIFY_DRAWS: usize = 5;

fn timed<T>(report: &mut RunReport, key: &str, f: impl FnOnce(&mut RunReport) -> T) -> T {
    let t = Instant::now();
    let out = f(report);
    report.timings.insert(key.into(), t.elapsed().as_secs_f64());
    out
}

fn record_error(report: &mut RunReport, err: Error) {
    if let Error::NoConvergence { trace, .. } = &err {
        report.trace = trace.iter().map(TraceRow::from).collect();
    }
    report.error = Some(ErrorReport::from(&err));
}

fn fill_solution(report: &mut RunReport, model: &ModelInstance, sol: &CcmSolution) {
    report.energy = Some(EnergyReport {
        value: sol.energy,
        imaginary: sol.energy_imaginary,
    });
    report.residuals = Some(ResidualReport {
        ket: sol.ket_residual_norm,
        bra: sol.bra_residual_norm,
        tolerance: sol.tolerance,
    });
    report.newton_steps = Some(sol.newton_steps);
    report.stability = Some(sol.stability);
    report.ket_amplitudes = amplitude_table(&model.basis, sol.ket.iter());
    report.bra_amplitudes = amplitude_table(&model.basis, sol.bra.iter());
    report.trace = sol.iterations.iter().map(TraceRow::from).collect();
    report.defects.push(Defect::judged("ket_residual", sol.ket_residual_norm, sol.tolerance));
    report.defects.push(Defect::judged("bra_residual", sol.bra_residual_norm, BRA_RESIDUAL_TOLERANCE));
}

/// `solve`: build → ket → bra → requested checks.
pub fn run(config: &RunConfig, opts: &RunOptions) -> RunReport {
    let mut report = RunReport::new("solve", opts.seed, config.to_json());
    let total = Instant::now();
    if let Err(e) = run_inner(config, opts, &mut report) {
        record_error(&mut report, e);
    }
    report.timings.insert("total".into(), total.elapsed().as_secs_f64());
    report.finish();
    report
}

fn run_inner(config: &RunConfig, opts: &RunOptions, report: &mut RunReport) -> Result<()> {
    let model = timed(report, "build", |_| config.model.build())?;
    report.model = model.name.clone();
    report.dimension = model.dimension();
    let truncation = config.truncation.select(&model.basis)?;
    let sol = timed(report, "solve", |_| solve(&model, &truncation, &config.solver.options()))?;
    fill_solution(report, &model, &sol);
    timed(report, "checks", |report| {
        if config.checks.ths_verify {
            ths_checks(report, &model, &sol);
        }
        if config.checks.dictionary {
            dictionary_check(report, &model, &sol);
        }
        if config.checks.extensivity && config.model.kind() == "composite" {
            extensivity_check(report, config, &sol);
        }
        if config.checks.oracle || opts.verify {
            oracle_checks(report, &model, &sol, opts.seed);
        }
    });
    Ok(())
}

fn push_result(report: &mut RunReport, name: &str, tolerance: f64, value: Result<f64>) {
    report.defects.push(match value {
        Ok(v) => Defect::judged(name, v, tolerance),
        Err(e) => Defect::failed(name, tolerance, &e),
    });
}

fn compare_spectra(report: &mut RunReport, name: &str, found: &[C64], exact: &[f64]) {
    let (ok, worst) = ths::spectra_match(found, exact, SPECTRUM_TOLERANCE);
    report.spectra.push(SpectrumComparison {
        name: name.into(),
        max_deviation: worst,
        tolerance: SPECTRUM_TOLERANCE,
        status: if ok { CheckStatus::Passed } else { CheckStatus::Failed },
    });
}

/// Metric, re-Hermitization, doublet and Π-symmetry checks on a solution.
pub fn ths_checks(report: &mut RunReport, model: &ModelInstance, sol: &CcmSolution) {
    let h_hat = &sol.transformed;
    let exact = match oracle::exact_eigensystem(&model.hamiltonian) {
        Ok(sys) => Some(sys.real_eigenvalues()),
        Err(e) => {
            report.defects.push(Defect::failed("exact_spectrum", SPECTRUM_TOLERANCE, &e));
            None
        }
    };
    let omega = sol
        .cluster_operator(&model.ops)
        .and_then(|s| nilpotent_exp(&s))
        .map(LinearOperator::new);
    let omega = match omega {
        Ok(o) => o,
        Err(e) => {
            report.defects.push(Defect::failed("cluster_exponential", 0.0, &e));
            return;
        }
    };
    match ths::metric_from_map(&omega) {
        Ok(theta) => {
            report.defects.push(Defect::judged(
                "quasi_hermiticity",
                ths::quasi_hermiticity_defect(h_hat, &theta),
                QUASI_HERMITICITY_TOLERANCE,
            ));
            match ths::rehermitize(h_hat, &theta) {
                Ok(hs) => {
                    report.defects.push(Defect::judged(
                        "rehermitized_hermiticity",
                        linalg::hermiticity_defect_frobenius(hs.matrix()),
                        SPECTRUM_TOLERANCE,
                    ));
                    if let Some(exact) = &exact {
                        compare_spectra(report, "rehermitized_vs_exact", &ths::general_eigenvalues(hs.matrix()), exact);
                    }
                }
                Err(e) => report.defects.push(Defect::failed("rehermitized_hermiticity", SPECTRUM_TOLERANCE, &e)),
            }
        }
        Err(e) => report.defects.push(Defect::failed("quasi_hermiticity", QUASI_HERMITICITY_TOLERANCE, &e)),
    }
    match ths::doublet_eigensolve(h_hat) {
        Ok(d) => {
            report.defects.push(Defect::judged(
                "doublet_biorthonormality",
                d.biorthonormality_defect(),
                ths::BIORTHONORMALITY_TOLERANCE,
            ));
            report.defects.push(Defect::judged("doublet_completeness", d.completeness_defect(), SPECTRUM_TOLERANCE));
            let (right, left) = d.residuals();
            report.defects.push(Defect::judged("doublet_residual", right.max(left), ths::RESIDUAL_TOLERANCE));
            if let Some(exact) = &exact {
                compare_spectra(report, "transformed_vs_exact", &d.eigenvalues, exact);
            }
            push_result(
                report,
                "metric_from_spectrum",
                SPECTRUM_TOLERANCE,
                ths::metric_from_spectrum(&d, None)
                    .map(|theta| ths::quasi_hermiticity_defect(h_hat, &theta)),
            );
        }
        Err(e) => report.defects.push(Defect::failed("doublet_biorthonormality", ths::BIORTHONORMALITY_TOLERANCE, &e)),
    }
    match ths::pi_symmetry_report(&model.hamiltonian, &omega) {
        Ok(p) => report.defects.push(Defect {
            name: "pi_symmetry_cooccurrence".into(),
            value: Some(if p.consistent { 0.0 } else { 1.0 }),
            tolerance: 0.0,
            status: if p.consistent { CheckStatus::Passed } else { CheckStatus::Failed },
            note: Some(format!(
                "commutator defect {:.3e} (threshold {:.0e}), hermiticity defect {:.3e} (threshold {:.0e})",
                p.commutator_defect,
                ths::PI_COMMUTATOR_THRESHOLD,
                p.hermiticity_defect,
                ths::PI_HERMITICITY_THRESHOLD
            )),
        }),
        Err(e) => report.defects.push(Defect::failed("pi_symmetry_cooccurrence", 0.0, &e)),
    }
    let name = "bra_left_eigenrow";
    if sol.ket.truncation().is_full() {
        push_result(report, name, SPECTRUM_TOLERANCE, left_eigenrow_defect(model, sol));
    } else {
        report
            .defects
            .push(Defect::skipped(name, SPECTRUM_TOLERANCE, "only an eigenrow at full truncation"));
    }
}

/// `‖⟨Φ|S̃ĥ − E⟨Φ|S̃‖`.
pub fn left_eigenrow_defect(model: &ModelInstance, sol: &CcmSolution) -> Result<f64> {
    let row = bra_row(&sol.bra, &model.ops)?;
    let lhs = &row * sol.transformed.matrix();
    Ok((lhs - row * c(sol.energy)).norm())
}

fn dictionary_check(report: &mut RunReport, model: &ModelInstance, sol: &CcmSolution) {
    let name = "dictionary";
    let tol = ths::DICTIONARY_TOLERANCE;
    if !sol.ket.truncation().is_full() {
        report.defects.push(Defect::skipped(name, tol, "requires full truncation"));
        return;
    }
    match ths::ccm_ths_dictionary_check(sol, model) {
        Ok(r) => report.defects.push(Defect::judged(name, r.discrepancy, tol)),
        Err(e @ Error::DegenerateGroundState { .. }) => {
            report.defects.push(Defect::skipped(name, tol, e.to_string()))
        }
        Err(e) => report.defects.push(Defect::failed(name, tol, &e)),
    }
}

fn extensivity_check(report: &mut RunReport, config: &RunConfig, sol: &CcmSolution) {
    let name = "extensivity";
    if !sol.ket.truncation().is_full() {
        report.defects.push(Defect::skipped(name, ENERGY_TOLERANCE, "requires full truncation"));
        return;
    }
    let parts = || -> Result<f64> {
        let json = config.model.to_json();
        let registry = ModelRegistry::default();
        let mut sum = 0.0;
        for (i, part) in json["parts"].as_array().into_iter().flatten().enumerate() {
            let spec = registry.parse(part, &format!("model.parts[{i}]"))?;
            let m = spec.build()?;
            let t = full_truncation(&m.basis)?;
            sum += solve(&m, &t, &config.solver.options())?.energy;
        }
        Ok((sol.energy - sum).abs())
    };
    push_result(report, name, ENERGY_TOLERANCE, parts());
}

/// Random cluster amplitudes on `truncation`, scaled down with excitation level.
pub fn random_amplitudes(rng: &mut impl Rng, model: &ModelInstance, truncation: &TruncationSet) -> Result<ClusterAmplitudes> {
    let values = truncation
        .indices()
        .iter()
        .map(|&j| {
            let level = model.basis.excitation_level(j) as f64;
            let scale = 0.3 / (level * level);
            C64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
        })
        .collect();
    ClusterAmplitudes::new(truncation.clone(), values)
}

fn relative_difference(a: &CMat, b: &CMat) -> f64 {
    linalg::frobenius(&(a - b)) / linalg::frobenius(b).max(f64::MIN_POSITIVE)
}

fn oracle_checks(report: &mut RunReport, model: &ModelInstance, sol: &CcmSolution, seed: u64) {
    let full = sol.ket.truncation().is_full();
    match oracle::exact_ground_energy(model) {
        Ok(exact) => {
            report.exact_energy = Some(exact);
            if full {
                report
                    .defects
                    .push(Defect::judged("energy_vs_exact", (sol.energy - exact).abs(), ENERGY_TOLERANCE));
            }
        }
        Err(e) => report.defects.push(Defect::failed("energy_vs_exact", ENERGY_TOLERANCE, &e)),
    }
    push_result(
        report,
        "transform_vs_dense_exp",
        TRANSFORM_TOLERANCE,
        sol.cluster_operator(&model.ops).map(|s| {
            relative_difference(sol.transformed.matrix(), oracle::dense_exp_transform(&model.hamiltonian, &s).matrix())
        }),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = || -> Result<f64> {
        let mut worst: f64 = 0.0;
        for _ in 0..VERIFY_DRAWS {
            let amps = random_amplitudes(&mut rng, model, sol.ket.truncation())?;
            let s = assemble_cluster(&amps, &model.ops)?;
            let series = similarity_transform(&model.hamiltonian, &s)?;
            let dense = oracle::dense_exp_transform(&model.hamiltonian, &s);
            worst = worst.max(relative_difference(series.matrix(), dense.matrix()));
        }
        Ok(worst)
    };
    push_result(report, "transform_vs_dense_exp_random", TRANSFORM_TOLERANCE, draws());
    let name = "ground_vector_match";
    if full {
        match oracle::ground_vector_match(sol, model) {
            Ok(v) => report.defects.push(Defect::judged(name, v, GROUND_VECTOR_TOLERANCE)),
            Err(e @ Error::OrthogonalReference { .. }) => {
                report.defects.push(Defect::skipped(name, GROUND_VECTOR_TOLERANCE, e.to_string()))
            }
            Err(e) => report.defects.push(Defect::failed(name, GROUND_VECTOR_TOLERANCE, &e)),
        }
    }
}

/// `sweep-subn`: one solve per SUB-n level, errors against the exact energy.
pub fn sweep_sub_n(config: &RunConfig, opts: &RunOptions) -> RunReport {
    let mut report = RunReport::new("sweep-subn", opts.seed, config.to_json());
    let total = Instant::now();
    if let Err(e) = sweep_inner(config, &mut report) {
        record_error(&mut report, e);
    }
    report.timings.insert("total".into(), total.elapsed().as_secs_f64());
    report.finish();
    report
}

fn sweep_inner(config: &RunConfig, report: &mut RunReport) -> Result<()> {
    let model = config.model.build()?;
    report.model = model.name.clone();
    report.dimension = model.dimension();
    let exact = oracle::exact_ground_energy(&model)?;
    report.exact_energy = Some(exact);
    let opts = config.solver.options();
    for n in 1..=model.basis.max_level() {
        let t = Instant::now();
        let truncation = sub_n_truncation(&model.basis, n)?;
        let row = match solve(&model, &truncation, &opts) {
            Ok(sol) => SweepRow {
                n,
                size: truncation.len(),
                energy: Some(sol.energy),
                error: Some((sol.energy - exact).abs()),
                iterations: Some(sol.newton_steps),
                failure: None,
            },
            Err(e) => SweepRow {
                n,
                size: truncation.len(),
                energy: None,
                error: None,
                iterations: None,
                failure: Some(ErrorReport::from(&e)),
            },
        };
        report.timings.insert(format!("n={n:03}"), t.elapsed().as_secs_f64());
        report.sweep.push(row);
    }
    let name = "sweep_endpoint";
    match report.sweep.last() {
        Some(SweepRow { error: Some(err), .. }) => {
            let err = *err;
            report.defects.push(Defect::judged(name, err, ENERGY_TOLERANCE));
        }
        Some(SweepRow { failure: Some(f), .. }) => {
            let note = format!("{}: {}", f.kind, f.message);
            report.defects.push(Defect {
                name: name.into(),
                value: None,
                tolerance: ENERGY_TOLERANCE,
                status: CheckStatus::Failed,
                note: Some(note),
            });
        }
        _ => {}
    }
    Ok(())
}

/// `spectrum`: the exact spectrum of the model Hamiltonian.
pub fn spectrum(config: &RunConfig, opts: &RunOptions) -> RunReport {
    let mut report = RunReport::new("spectrum", opts.seed, config.to_json());
    let total = Instant::now();
    let inner = |report: &mut RunReport| -> Result<()> {
        let model = config.model.build()?;
        report.model = model.name.clone();
        report.dimension = model.dimension();
        let sys = oracle::exact_eigensystem(&model.hamiltonian)?;
        report.spectrum = sys.real_eigenvalues();
        report.exact_energy = report.spectrum.first().copied();
        report
            .defects
            .push(Defect::judged("oracle_residual", sys.max_residual(), oracle::RESIDUAL_CONTRACT));
        if opts.verify || config.checks.oracle {
            let main: Vec<C64> = model
                .hamiltonian
                .matrix()
                .clone()
                .symmetric_eigenvalues()
                .iter()
                .map(|&x| c(x))
                .collect();
            compare_spectra(report, "main_vs_oracle", &main, &report.spectrum.clone());
        }
        Ok(())
    };
    if let Err(e) = inner(&mut report) {
        record_error(&mut report, e);
    }
    report.timings.insert("total".into(), total.elapsed().as_secs_f64());
    report.finish();
    report
}

/// `ths-verify`: THS and dictionary checks on a solution, either solved
/// afresh or rebuilt from the amplitude tables of an earlier report.
pub fn ths_verify(config: &RunConfig, opts: &RunOptions, previous: Option<&RunReport>) -> RunReport {
    let mut report = RunReport::new("ths-verify", opts.seed, config.to_json());
    let total = Instant::now();
    let inner = |report: &mut RunReport| -> Result<()> {
        let model = config.model.build()?;
        report.model = model.name.clone();
        report.dimension = model.dimension();
        let truncation = config.truncation.select(&model.basis)?;
        let sol = match previous {
            Some(prev) => {
                if let Some(e) = &prev.error {
                    return Err(Error::InvalidSpec(format!(
                        "the referenced report holds no solution ({}: {})",
                        e.kind, e.message
                    )));
                }
                let ket = amplitudes_from_table(&truncation, &prev.ket_amplitudes)?;
                let bra = amplitudes_from_table(&truncation, &prev.bra_amplitudes)?;
                CcmSolution::from_amplitudes(
                    &model,
                    ClusterAmplitudes::new(truncation.clone(), ket)?,
                    BraAmplitudes::new(truncation.clone(), bra)?,
                    config.solver.tolerance,
                )?
            }
            None => solve(&model, &truncation, &config.solver.options())?,
        };
        fill_solution(report, &model, &sol);
        ths_checks(report, &model, &sol);
        dictionary_check(report, &model, &sol);
        if opts.verify || config.checks.oracle {
            oracle_checks(report, &model, &sol, opts.seed);
        }
        Ok(())
    };
    if let Err(e) = inner(&mut report) {
        record_error(&mut report, e);
    }
    report.timings.insert("total".into(), total.elapsed().as_secs_f64());
    report.finish();
    report
}

fn amplitudes_from_table(truncation: &TruncationSet, rows: &[AmplitudeRow]) -> Result<Vec<C64>> {
    let ordinals: Vec<usize> = rows.iter().map(|r| r.ordinal).collect();
    if ordinals != truncation.indices() {
        return Err(Error::BasisMismatch(
            "amplitude table does not match the configured truncation".into(),
        ));
    }
    Ok(rows.iter().map(|r| C64::new(r.value[0], r.value[1])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::parse_config;

    #[test]
    fn harmonic_anchor_exits_cleanly() {
        let cfg = parse_config(r#"{"model": {"kind": "oscillator", "lambda": 0, "dim": 20}, "checks": {"oracle": true}}"#).unwrap();
        let mut r = run(&cfg, &RunOptions::default());
        assert_eq!(r.finish(), 0, "{:#?}", r.defects);
        assert_eq!(r.energy.as_ref().unwrap().value, 1.0);
        assert_eq!(r.newton_steps, Some(0));
    }

    #[test]
    fn uncoupled_chain_has_zero_amplitudes() {
        let cfg = parse_config(r#"{"model": {"kind": "spin_chain", "sites": 3, "field": 0}}"#).unwrap();
        let mut r = run(&cfg, &RunOptions::default());
        assert_eq!(r.finish(), 0, "{:#?}", r.defects);
        assert_eq!(r.energy.as_ref().unwrap().value, -2.0);
        assert!(r.ket_amplitudes.iter().all(|a| a.value == [0.0, 0.0]));
    }

    #[test]
    fn failed_solve_is_reported_not_raised() {
        let cfg = parse_config(
            r#"{"model": {"kind": "oscillator", "lambda": 0.3, "dim": 16}, "solver": {"max_iterations": 1}}"#,
        )
        .unwrap();
        let mut r = run(&cfg, &RunOptions::default());
        assert_eq!(r.finish(), 1);
        assert_eq!(r.error.as_ref().unwrap().kind, "NoConvergence");
        assert!(!r.trace.is_empty());
    }
}
