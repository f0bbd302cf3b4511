//! Newton solver for the ket equations, the linear bra solve and
//! bi-variational expectation values.

use serde::Serialize;

use crate::config_space::{LinearOperator, OperatorFamily};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, C64};
use crate::models::ModelInstance;

use super::transform::{
    assemble_bra, assemble_cluster, energy_functional, inf_norm, ket_jacobian, ket_jacobian_fd,
    ket_residuals, similarity_transform, BraAmplitudes, ClusterAmplitudes, Energy,
};
use super::truncation::TruncationSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Damping {
    /// Step-length multiplier applied on each backtracking trial.
    pub factor: f64,
    /// Maximum backtracking trials per Newton step.
    pub max_halvings: usize,
}

impl Default for Damping {
    fn default() -> Self {
        Self {
            factor: 0.5,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Convergence threshold on `‖r‖∞`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: Damping,
    /// Jacobians with `σ_min/σ_max` below this are treated as singular.
    pub singular_rcond: f64,
    /// Consecutive singular Jacobians tolerated before giving up.
    pub max_singular_steps: usize,
    /// Number of residual-flow steps taken before Newton on each attempt.
    /// Later attempts run only if the previous root was unstable.
    pub warmup_schedule: Vec<usize>,
    /// Compare the analytic Jacobian with central differences at each step.
    pub check_jacobian: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 200,
            damping: Damping::default(),
            singular_rcond: 1e-12,
            max_singular_steps: 50,
            warmup_schedule: vec![0, 10, 100],
            check_jacobian: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Initial residual evaluation.
    Start,
    Newton,
    /// Residual-flow step `𝒮 ← 𝒮 − τ r` (used at singular Jacobians).
    Flow,
}

/// One line of the convergence trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub attempt: usize,
    pub step: usize,
    pub kind: StepKind,
    /// `‖r‖∞` after the step.
    pub residual_norm: f64,
    /// Accepted step length (1 for a full Newton step).
    pub damping: f64,
    pub energy: f64,
}

/// Outcome of the ket solve.
#[derive(Debug, Clone)]
pub struct KetSolution {
    pub amplitudes: ClusterAmplitudes,
    pub energy: Energy,
    pub residual_norm: f64,
    pub newton_steps: usize,
    pub trace: Vec<IterationRecord>,
    /// Smallest real part of the Jacobian spectrum at the root. For a full
    /// truncation these are the excitation energies `E_k − E`, so a negative
    /// value marks an excited-state root.
    pub stability: f64,
    /// `ĥ` at the converged amplitudes.
    pub transformed: LinearOperator,
    /// Largest analytic-vs-finite-difference Jacobian discrepancy seen
    /// (only with `check_jacobian`).
    pub jacobian_check: Option<f64>,
}

/// Full bi-variational ground-state solution.
#[derive(Debug, Clone)]
pub struct CcmSolution {
    pub energy: f64,
    pub energy_imaginary: f64,
    pub ket: ClusterAmplitudes,
    pub bra: BraAmplitudes,
    pub ket_residual_norm: f64,
    pub bra_residual_norm: f64,
    pub tolerance: f64,
    pub newton_steps: usize,
    pub iterations: Vec<IterationRecord>,
    pub stability: f64,
    /// Largest imaginary part among ket and bra amplitudes.
    pub max_imag_amplitude: f64,
    pub transformed: LinearOperator,
    pub jacobian_check: Option<f64>,
}

impl CcmSolution {
    pub fn cluster_operator(&self, family: &OperatorFamily) -> Result<LinearOperator> {
        assemble_cluster(&self.ket, family)
    }

    pub fn bra_operator(&self, family: &OperatorFamily) -> Result<LinearOperator> {
        assemble_bra(&self.bra, family)
    }

    /// Rebuild a solution from stored amplitudes (e.g. read back from a
    /// report), recomputing `ĥ`, the energy and both residuals.
    pub fn from_amplitudes(
        model: &ModelInstance,
        ket: ClusterAmplitudes,
        bra: BraAmplitudes,
        tolerance: f64,
    ) -> Result<Self> {
        if ket.truncation() != bra.truncation() {
            return Err(Error::BasisMismatch("ket and bra amplitudes use different truncations".into()));
        }
        let family = &model.ops;
        let s = assemble_cluster(&ket, family)?;
        let transformed = similarity_transform(&model.hamiltonian, &s)?;
        let energy = energy_functional(&transformed);
        let r = ket_residuals(&transformed, ket.truncation(), family)?;
        let jac = ket_jacobian(&transformed, ket.truncation(), family)?;
        let bra_residual = bra_residual(&transformed, energy.value, &bra, family)?;
        Ok(Self {
            energy: energy.value,
            energy_imaginary: energy.imaginary,
            max_imag_amplitude: ket.max_imag().max(bra.max_imag()),
            ket_residual_norm: inf_norm(&r),
            bra_residual_norm: bra_residual,
            stability: min_real_eigenvalue(&jac),
            ket,
            bra,
            tolerance,
            newton_steps: 0,
            iterations: Vec::new(),
            transformed,
            jacobian_check: None,
        })
    }
}

/// `max_ȷ |⟨Φ|S̃(ĥ−E)C_ȷ⁺|Φ⟩|`, scaled like the residual of [`solve_bra`].
fn bra_residual(h_sim: &LinearOperator, energy: f64, bra: &BraAmplitudes, family: &OperatorFamily) -> Result<f64> {
    let d = family.dimension();
    let row = bra_row(bra, family)?;
    let shifted = h_sim.matrix() - CMat::identity(d, d) * c(energy);
    let left = row * &shifted;
    let phi = linalg::unit_vector(d, 0);
    let worst = bra
        .truncation()
        .indices()
        .iter()
        .map(|&j| (&left * family.creation_sparse(j).apply(&phi))[(0, 0)].norm())
        .fold(0.0, f64::max);
    let amax = bra.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(worst / (linalg::max_abs(&shifted).max(1.0) * (1.0 + amax)))
}

/// Smallest real part of the eigenvalues of a (small) complex matrix.
fn min_real_eigenvalue(m: &CMat) -> f64 {
    crate::ths::general_eigenvalues(m)
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min)
}

/// Step size of the residual flow: inverse spread of the diagonal of `H`.
fn flow_step(h: &LinearOperator) -> f64 {
    let diag = h.matrix().diagonal();
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z.re), hi.max(z.re)));
    let spread = (hi - lo).max(linalg::max_abs(h.matrix())).max(1e-12);
    1.0 / spread
}

struct Attempt {
    amps: ClusterAmplitudes,
    transformed: LinearOperator,
    residual: Vec<C64>,
    newton_steps: usize,
    jacobian: Option<CMat>,
    jacobian_check: Option<f64>,
}

/// Solve `⟨Φ|C_ȷ⁻ ĥ|Φ⟩ = 0, ȷ ∈ T` by damped Newton from `𝒮 = 0`.
///
/// At a singular Jacobian (e.g. when the reference is degenerate with another
/// configuration) a residual-flow step `𝒮 ← 𝒮 − τ r` is taken instead. A
/// converged root whose Jacobian has an eigenvalue with negative real part is
/// an excited-state root; the solve is then repeated with a longer flow
/// warm-up from `warmup_schedule`, and the lowest-energy root is returned if
/// no stable one is found.
pub fn solve_ket(model: &ModelInstance, truncation: &TruncationSet, opts: &SolverOptions) -> Result<KetSolution> {
    let family = &model.ops;
    if truncation.basis_dimension() != family.dimension() {
        return Err(Error::BasisMismatch(format!(
            "truncation for dimension {} used with model of dimension {}",
            truncation.basis_dimension(),
            family.dimension()
        )));
    }
    let schedule: &[usize] = if opts.warmup_schedule.is_empty() {
        &[0]
    } else {
        &opts.warmup_schedule
    };
    let tau = flow_step(&model.hamiltonian);
    let mut trace = Vec::new();
    let mut best: Option<(Attempt, f64)> = None;
    let mut last_err = None;

    for (attempt_no, &warmup) in schedule.iter().enumerate() {
        match run_attempt(model, truncation, opts, attempt_no, warmup, tau, &mut trace) {
            Ok(attempt) => {
                let jac = match &attempt.jacobian {
                    Some(j) => j.clone(),
                    None => ket_jacobian(&attempt.transformed, truncation, family)?,
                };
                let stability = min_real_eigenvalue(&jac);
                let energy = energy_functional(&attempt.transformed).value;
                let stable = stability >= -opts.tolerance.max(1e-9);
                let better = best
                    .as_ref()
                    .map(|(b, _)| energy < energy_functional(&b.transformed).value)
                    .unwrap_or(true);
                if stable {
                    best = Some((attempt, stability));
                    break;
                }
                if better {
                    best = Some((attempt, stability));
                }
            }
            Err(e @ (Error::NoConvergence { .. } | Error::SingularJacobian { .. })) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }

    let (attempt, stability) = match best {
        Some(b) => b,
        None => {
            return Err(match last_err {
                Some(Error::NoConvergence { residual, .. }) => Error::NoConvergence { residual, trace },
                Some(e) => e,
                None => Error::NoConvergence {
                    residual: f64::NAN,
                    trace,
                },
            })
        }
    };
    Ok(KetSolution {
        energy: energy_functional(&attempt.transformed),
        residual_norm: inf_norm(&attempt.residual),
        newton_steps: attempt.newton_steps,
        amplitudes: attempt.amps,
        trace,
        stability,
        transformed: attempt.transformed,
        jacobian_check: attempt.jacobian_check,
    })
}

fn evaluate(
    model: &ModelInstance,
    amps: &ClusterAmplitudes,
) -> Result<(LinearOperator, Vec<C64>)> {
    let s = assemble_cluster(amps, &model.ops)?;
    let h = similarity_transform(&model.hamiltonian, &s)?;
    let r = ket_residuals(&h, amps.truncation(), &model.ops)?;
    Ok((h, r))
}

fn run_attempt(
    model: &ModelInstance,
    truncation: &TruncationSet,
    opts: &SolverOptions,
    attempt_no: usize,
    warmup: usize,
    tau: f64,
    trace: &mut Vec<IterationRecord>,
) -> Result<Attempt> {
    let family = &model.ops;
    let mut amps = ClusterAmplitudes::zeros(truncation.clone());
    let (mut h, mut r) = evaluate(model, &amps)?;
    let record = |trace: &mut Vec<IterationRecord>, step, kind, r: &[C64], damping, h: &LinearOperator| {
        trace.push(IterationRecord {
            attempt: attempt_no,
            step,
            kind,
            residual_norm: inf_norm(r),
            damping,
            energy: energy_functional(h).value,
        })
    };
    record(trace, 0, StepKind::Start, &r, 0.0, &h);

    let mut step = 0;
    let mut newton_steps = 0;
    let mut singular_run = 0;
    let mut jacobian_check: Option<f64> = None;

    for _ in 0..warmup {
        if inf_norm(&r) <= opts.tolerance {
            break;
        }
        step += 1;
        amps = flow_update(&amps, &r, tau)?;
        (h, r) = evaluate(model, &amps)?;
        record(trace, step, StepKind::Flow, &r, tau, &h);
    }

    loop {
        let rnorm = inf_norm(&r);
        if !rnorm.is_finite() {
            return Err(Error::NoConvergence {
                residual: rnorm,
                trace: trace.clone(),
            });
        }
        if rnorm <= opts.tolerance {
            return Ok(Attempt {
                amps,
                transformed: h,
                residual: r,
                newton_steps,
                jacobian: None,
                jacobian_check,
            });
        }
        if step >= opts.max_iterations {
            return Err(Error::NoConvergence {
                residual: rnorm,
                trace: trace.clone(),
            });
        }
        step += 1;

        let jac = ket_jacobian(&h, truncation, family)?;
        if opts.check_jacobian {
            let fd = ket_jacobian_fd(&model.hamiltonian, &amps, family, 1e-6)?;
            let rel = linalg::max_abs(&(&jac - &fd)) / linalg::max_abs(&fd).max(1.0);
            jacobian_check = Some(jacobian_check.unwrap_or(0.0).max(rel));
        }
        let rc = linalg::rcond(&jac);
        if rc < opts.singular_rcond {
            singular_run += 1;
            if singular_run > opts.max_singular_steps {
                return Err(Error::SingularJacobian { rcond: rc });
            }
            amps = flow_update(&amps, &r, tau)?;
            (h, r) = evaluate(model, &amps)?;
            record(trace, step, StepKind::Flow, &r, tau, &h);
            continue;
        }
        singular_run = 0;

        let rhs = -CVec::from_vec(r.clone());
        let delta = jac
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularJacobian { rcond: rc })?;

        // Backtracking: shrink the step until ‖r‖∞ decreases.
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.damping.max_halvings {
            let trial = shifted(&amps, &delta, t)?;
            let (ht, rt) = evaluate(model, &trial)?;
            if inf_norm(&rt) < rnorm {
                accepted = Some((trial, ht, rt));
                break;
            }
            t *= opts.damping.factor;
        }
        let Some((trial, ht, rt)) = accepted else {
            return Err(Error::NoConvergence {
                residual: rnorm,
                trace: trace.clone(),
            });
        };
        amps = trial;
        h = ht;
        r = rt;
        newton_steps += 1;
        record(trace, step, StepKind::Newton, &r, t, &h);
    }
}

fn shifted(amps: &ClusterAmplitudes, delta: &CVec, t: f64) -> Result<ClusterAmplitudes> {
    let values = amps
        .values()
        .iter()
        .zip(delta.iter())
        .map(|(a, d)| a + d * c(t))
        .collect();
    ClusterAmplitudes::new(amps.truncation().clone(), values)
}

fn flow_update(amps: &ClusterAmplitudes, r: &[C64], tau: f64) -> Result<ClusterAmplitudes> {
    let values = amps.values().iter().zip(r).map(|(a, ri)| a - ri * c(tau)).collect();
    ClusterAmplitudes::new(amps.truncation().clone(), values)
}

/// Solve the linear bra equations at fixed `ĥ` and `E`:
/// `⟨Φ|(ĥ−E)C_ȷ⁺|Φ⟩ + Σ_J 𝒮̃_J ⟨Φ|C_J⁻(ĥ−E)C_ȷ⁺|Φ⟩ = 0` for `ȷ ∈ T`.
/// Returns the amplitudes and the scaled residual norm.
pub fn solve_bra(
    h_sim: &LinearOperator,
    energy: f64,
    truncation: &TruncationSet,
    family: &OperatorFamily,
) -> Result<(BraAmplitudes, f64)> {
    if truncation.basis_dimension() != family.dimension() || h_sim.dim() != family.dimension() {
        return Err(Error::BasisMismatch("bra solve inputs have different dimensions".into()));
    }
    let d = family.dimension();
    let shifted_h = h_sim.matrix() - CMat::identity(d, d) * c(energy);
    let phi = linalg::unit_vector(d, 0);
    let kets: Vec<CVec> = truncation
        .indices()
        .iter()
        .map(|&j| family.creation_sparse(j).apply(&phi))
        .collect();
    let n = truncation.len();
    // Row a: equation for ȷ = T[a]; column b: unknown 𝒮̃_{T[b]}.
    let mut m = CMat::zeros(n, n);
    let mut rhs = CVec::zeros(n);
    for (a, ket) in kets.iter().enumerate() {
        let col = &shifted_h * ket;
        rhs[a] = -col[0];
        for (b, bra) in kets.iter().enumerate() {
            m[(a, b)] = bra.dotc(&col);
        }
    }
    let rc = linalg::rcond(&m);
    let x = if rc < 1e-13 {
        // A singular system can still be consistent, e.g. when the reference
        // is exactly degenerate with another configuration and decouples
        // from it; take the minimum-norm solution and keep it only if it
        // actually satisfies the equations.
        let svd = m.clone().svd(true, true);
        let eps = 1e-12 * svd.singular_values.max();
        svd.solve(&rhs, eps).map_err(|_| Error::SingularSystem { rcond: rc })?
    } else {
        m.clone().lu().solve(&rhs).ok_or(Error::SingularSystem { rcond: rc })?
    };
    let scale = linalg::max_abs(&shifted_h).max(1.0) * (1.0 + x.camax());
    let residual = (&m * &x - &rhs).camax() / scale;
    if rc < 1e-13 && !(residual <= 1e-12) {
        return Err(Error::SingularSystem { rcond: rc });
    }
    let amps = BraAmplitudes::new(truncation.clone(), x.iter().copied().collect())?;
    Ok((amps, residual))
}

/// Ket solve followed by the bra solve.
pub fn solve(model: &ModelInstance, truncation: &TruncationSet, opts: &SolverOptions) -> Result<CcmSolution> {
    let ket = solve_ket(model, truncation, opts)?;
    let (bra, bra_residual) = solve_bra(&ket.transformed, ket.energy.value, truncation, &model.ops)?;
    let max_imag = ket.amplitudes.max_imag().max(bra.max_imag());
    Ok(CcmSolution {
        energy: ket.energy.value,
        energy_imaginary: ket.energy.imaginary,
        ket: ket.amplitudes,
        bra,
        ket_residual_norm: ket.residual_norm,
        bra_residual_norm: bra_residual,
        tolerance: opts.tolerance,
        newton_steps: ket.newton_steps,
        iterations: ket.trace,
        stability: ket.stability,
        max_imag_amplitude: max_imag,
        transformed: ket.transformed,
        jacobian_check: ket.jacobian_check,
    })
}

/// `Λ̄ = ⟨Φ|S̃ e⁻ˢ Λ eˢ|Φ⟩`.
pub fn expectation(
    observable: &LinearOperator,
    ket: &ClusterAmplitudes,
    bra: &BraAmplitudes,
    family: &OperatorFamily,
) -> Result<C64> {
    observable.check_basis(family.basis())?;
    let s = assemble_cluster(ket, family)?;
    let sb = assemble_bra(bra, family)?;
    let transformed = similarity_transform(observable, &s)?;
    let row = sb.matrix().row(0).into_owned();
    Ok((row * transformed.matrix().column(0)).to_scalar())
}

/// Left row `⟨Φ|S̃`.
pub fn bra_row(bra: &BraAmplitudes, family: &OperatorFamily) -> Result<nalgebra::RowDVector<C64>> {
    Ok(assemble_bra(bra, family)?.matrix().row(0).into_owned())
}
