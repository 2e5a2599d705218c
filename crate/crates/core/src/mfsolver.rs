//! Damped Newton solver for the mean field problem and natural-parameter
//! continuation of its solution branch over lambda in (-inf, 8*pi).
//!
//! The problem has a unique solution for every lambda below 8*pi and the
//! solution set is an analytic curve in lambda with no folds, so natural
//! continuation with adaptive steps is sufficient; no arclength machinery
//! is used. Each Newton direction solves the exact Frechet derivative of
//! the discrete residual, `K - lambda (M_rho - rho <.>)`, via a banded
//! factorization plus a rank-one correction.

use crate::diagnostics::{self, BranchPoint};
use crate::error::{Error, Result};
use crate::grid::{Field, Mesh};
use crate::linalg::RankOneSolver;
use crate::spectrum::BranchSpectrumEngine;
use crate::LAMBDA_SUP;

/// A converged solution of the mean field problem at fixed lambda.
#[derive(Clone, Debug)]
pub struct MeanFieldState {
    pub lambda: f64,
    /// Solution psi (so u = lambda * psi solves the Gel'fand problem).
    pub psi: Field,
    /// Normalized density e^{lambda psi} / integral(e^{lambda psi}).
    pub rho: Field,
    /// integral of e^{lambda psi} over the domain.
    pub mass_eu: f64,
    /// Relative residual of the accepted iterate in the weighted norm.
    pub residual_norm: f64,
    /// Newton iterations spent.
    pub iterations: usize,
}

/// Continuation controls; `delta` guards the lambda ceiling
/// (the branch never requests lambda >= 8*pi - delta).
#[derive(Clone, Debug)]
pub struct ContinuationConfig {
    pub lambda_start: f64,
    pub lambda_end: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub e_max: f64,
    pub delta: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            lambda_start: 0.0,
            lambda_end: LAMBDA_SUP - 0.1,
            initial_step: 0.2,
            min_step: 1e-5,
            newton_tol: 1e-10,
            max_newton_iters: 40,
            e_max: 10.0,
            delta: 1e-3,
        }
    }
}

impl ContinuationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_end <= LAMBDA_SUP - self.delta) {
            return Err(Error::InvalidParam(format!(
                "lambda_end = {} must stay below 8*pi - delta = {}",
                self.lambda_end,
                LAMBDA_SUP - self.delta
            )));
        }
        if !(self.lambda_start <= self.lambda_end) {
            return Err(Error::InvalidParam(
                "lambda_start must not exceed lambda_end".into(),
            ));
        }
        if !(self.min_step > 0.0 && self.initial_step >= self.min_step) {
            return Err(Error::InvalidParam("invalid step sizes".into()));
        }
        if !(self.newton_tol > 0.0 && self.delta > 0.0 && self.e_max > 0.0) {
            return Err(Error::InvalidParam("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Why a continuation run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Reached the requested lambda range on both sides.
    LambdaEnd,
    /// Energy exceeded the configured cap (blow-up evidence).
    EnergyCap,
    /// Adaptive step underflowed before reaching the target.
    StepUnderflow,
}

/// The computed piece of the solution branch, ordered by ascending
/// lambda, with energies strictly increasing along the list.
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub states: Vec<MeanFieldState>,
    pub termination: Termination,
}

impl Branch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the branch point closest to the given lambda.
    pub fn nearest_index(&self, lambda: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (p.lambda - lambda).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }
}

/// Normalized density of a potential: rho = e^{lambda psi} / integral,
/// computed with max-subtraction, plus the plain mass integral.
pub fn density(mesh: &Mesh, lambda: f64, psi: &Field) -> Result<(Field, f64)> {
    if !mesh.owns(psi) {
        return Err(Error::MeshMismatch);
    }
    if !psi.is_finite() {
        return Err(Error::NonFinite("psi"));
    }
    let s = psi.map(|v| lambda * v);
    let smax = s.max();
    let e = s.map(|v| (v - smax).exp());
    let denom = mesh.integrate(&e)?;
    let rho = e.map(|v| v / denom);
    let log_mass = smax + denom.ln();
    Ok((rho, log_mass.exp()))
}

/// Weighted relative residual of the mean field equation at psi.
fn residual(mesh: &Mesh, psi: &Field, rho: &Field) -> Result<(Field, f64)> {
    let mut f = mesh.apply_laplacian(psi)?;
    f.axpy(-1.0, rho);
    let scale = mesh.norm_w(rho)?.max(1e-300);
    let rel = mesh.norm_w(&f)? / scale;
    Ok((f, rel))
}

/// The smallest relative residual the discrete operator can express in
/// floating point at this iterate (rounding of the second differences);
/// convergence targets can not go below it on fine grids.
fn residual_floor(mesh: &Mesh, psi: &Field, rho_norm_w: f64) -> f64 {
    let bound = mesh.laplacian_rounding_bound(psi);
    8.0 * f64::EPSILON * bound / rho_norm_w.max(1e-300)
}

/// Solves the mean field problem at fixed lambda by damped Newton
/// iteration from the given initial guess.
pub fn newton_solve(
    mesh: &Mesh,
    lambda: f64,
    psi_init: &Field,
    cfg: &ContinuationConfig,
) -> Result<MeanFieldState> {
    if !(lambda < LAMBDA_SUP) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    if !mesh.owns(psi_init) {
        return Err(Error::MeshMismatch);
    }
    let mut psi = psi_init.clone();
    let (mut rho, mut mass) = density(mesh, lambda, &psi)?;
    let (mut f, mut res) = residual(mesh, &psi, &rho)?;
    let mut iters = 0usize;

    // converge to the requested tolerance or to the floating point
    // evaluation floor of the residual, whichever is larger
    let mut tol = cfg
        .newton_tol
        .max(residual_floor(mesh, &psi, mesh.norm_w(&rho)?));

    while res > tol {
        if iters >= cfg.max_newton_iters {
            return Err(Error::NonConvergence {
                iterations: iters,
                residual: res,
            });
        }
        iters += 1;
        // m = w .* rho; Jacobian = A - lambda (diag(m) - m m^T)
        let m: Vec<f64> = mesh
            .weights()
            .iter()
            .zip(rho.as_slice())
            .map(|(&w, &r)| w * r)
            .collect();
        let solver = RankOneSolver::constrained(mesh.weighted_laplacian(), &m, lambda)?;
        let rhs: Vec<f64> = mesh
            .weights()
            .iter()
            .zip(f.as_slice())
            .map(|(&w, &v)| -w * v)
            .collect();
        let step = mesh.field_from_values(solver.solve(&rhs)?)?;

        // step-halving on residual increase
        let mut t = 1.0;
        let mut halvings = 0;
        loop {
            let mut trial = psi.clone();
            trial.axpy(t, &step);
            let (rho_t, mass_t) = density(mesh, lambda, &trial)?;
            let (f_t, res_t) = residual(mesh, &trial, &rho_t)?;
            if res_t < res || res_t <= tol {
                psi = trial;
                rho = rho_t;
                mass = mass_t;
                f = f_t;
                res = res_t;
                tol = cfg
                    .newton_tol
                    .max(residual_floor(mesh, &psi, mesh.norm_w(&rho)?));
                break;
            }
            halvings += 1;
            if halvings > 30 {
                return Err(Error::NonConvergence {
                    iterations: iters,
                    residual: res,
                });
            }
            t *= 0.5;
        }
    }

    let state = MeanFieldState {
        lambda,
        psi,
        rho,
        mass_eu: mass,
        residual_norm: res,
        iterations: iters,
    };
    validate_state(mesh, &state)?;
    Ok(state)
}

fn validate_state(mesh: &Mesh, state: &MeanFieldState) -> Result<()> {
    let mass = mesh.integrate(&state.rho)?;
    if (mass - 1.0).abs() > 1e-12 {
        return Err(Error::Anomaly(format!(
            "density mass {mass} drifted from one"
        )));
    }
    if state.rho.min() <= 0.0 {
        return Err(Error::DegenerateDensity);
    }
    if state.lambda >= 0.0 && state.psi.min() < -1e-10 {
        return Err(Error::Anomaly(format!(
            "psi dips to {} below zero at lambda = {}",
            state.psi.min(),
            state.lambda
        )));
    }
    Ok(())
}

/// Continues the branch from the explicit lambda = 0 solution over
/// [lambda_start, lambda_end], assembling a diagnostic point per
/// accepted state. Steps halve on Newton failure and grow by 1.5x
/// (capped) after quick convergence; a direction stops when it reaches
/// its lambda target, the energy cap, or the minimum step.
pub fn continue_branch(mesh: &Mesh, cfg: &ContinuationConfig) -> Result<Branch> {
    cfg.validate()?;
    let base = newton_solve(mesh, 0.0, &mesh.zeros(), cfg)?;

    let mut up: Vec<MeanFieldState> = Vec::new();
    let mut down: Vec<MeanFieldState> = Vec::new();
    let mut termination = Termination::LambdaEnd;

    if cfg.lambda_end > 0.0 {
        termination = march(mesh, cfg, &base, cfg.lambda_end, true, &mut up)?;
    }
    if cfg.lambda_start < 0.0 {
        let t = march(mesh, cfg, &base, cfg.lambda_start, false, &mut down)?;
        if termination == Termination::LambdaEnd {
            termination = t;
        }
    }

    let mut states: Vec<MeanFieldState> = Vec::new();
    states.extend(down.into_iter().rev());
    if cfg.lambda_start <= 0.0 && cfg.lambda_end >= 0.0 {
        states.push(base);
    }
    states.extend(up);

    let mut engine = BranchSpectrumEngine::new(mesh)?;
    let mut points = Vec::with_capacity(states.len());
    for state in &states {
        points.push(diagnostics::branch_point(mesh, state, &mut engine)?);
    }
    for i in 1..points.len() {
        if !(points[i].energy > points[i - 1].energy) {
            return Err(Error::NonMonotoneEnergy(i));
        }
    }
    Ok(Branch {
        points,
        states,
        termination,
    })
}

/// Marches from the base state toward `target`, pushing accepted states
/// (base excluded) in visit order.
fn march(
    mesh: &Mesh,
    cfg: &ContinuationConfig,
    base: &MeanFieldState,
    target: f64,
    upward: bool,
    out: &mut Vec<MeanFieldState>,
) -> Result<Termination> {
    let dir = if upward { 1.0 } else { -1.0 };
    let max_step = 2.5 * cfg.initial_step;
    let mut step = cfg.initial_step;
    let mut last = base.clone();
    let mut prev: Option<MeanFieldState> = None;

    loop {
        let remaining = (target - last.lambda) * dir;
        if remaining <= 1e-14 {
            return Ok(Termination::LambdaEnd);
        }
        let h = step.min(remaining);
        let lambda = last.lambda + dir * h;
        // secant predictor from the two previous states
        let mut guess = last.psi.clone();
        if let Some(p) = &prev {
            let dl = last.lambda - p.lambda;
            if dl.abs() > 1e-14 {
                let scale = (lambda - last.lambda) / dl;
                let mut d = last.psi.clone();
                d.axpy(-1.0, &p.psi);
                guess.axpy(scale, &d);
            }
        }
        match newton_solve(mesh, lambda, &guess, cfg) {
            Ok(state) => {
                let quick = state.iterations <= 5;
                prev = Some(last);
                last = state.clone();
                let energy = diagnostics::energy(mesh, &state)?;
                out.push(state);
                if upward && energy > cfg.e_max {
                    return Ok(Termination::EnergyCap);
                }
                if quick {
                    step = (step * 1.5).min(max_step);
                }
            }
            Err(Error::NonConvergence { .. }) | Err(Error::SingularSystem(_)) => {
                step *= 0.5;
                if step < cfg.min_step {
                    return Ok(Termination::StepUnderflow);
                }
            }
            Err(e) => return Err(e),
        }
    }
}
