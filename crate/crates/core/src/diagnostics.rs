//! Branch diagnostics: the energy, the Gel'fand parameter, the
//! monotonicity trigger g and its first-order ODE, the derivative fields
//! z, w, eta, the energy-parametrized diagram, and the verification
//! suite that checks the identities tying them together.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Field, Mesh, MeshSpec};
use crate::linalg::RankOneSolver;
use crate::mfsolver::{continue_branch, newton_solve, Branch, ContinuationConfig, MeanFieldState, Termination};
use crate::spectrum::{constrained_spectrum, BranchSpectrumEngine};
use crate::LAMBDA_SUP;

/// Scalar diagnostics of one accepted branch state.
#[derive(Clone, Debug)]
pub struct BranchPoint {
    pub lambda: f64,
    pub energy: f64,
    pub mu: f64,
    pub g: f64,
    pub sigma1: f64,
    pub nu1: f64,
    pub mean_z: f64,
    pub min_z: f64,
    pub mass_eu: f64,
    pub newton_iters: usize,
}

/// One row of the energy-parametrized diagram.
#[derive(Clone, Copy, Debug)]
pub struct DiagramPoint {
    pub energy: f64,
    pub mu: f64,
    pub lambda: f64,
}

/// Diagram rows plus the shape facts the diagram is expected to satisfy.
#[derive(Clone, Debug)]
pub struct DiagramSummary {
    pub points: Vec<DiagramPoint>,
    /// Index of the maximal mu.
    pub max_index: usize,
    /// mu at the row closest to lambda = 0.
    pub mu_at_e0: f64,
    /// Exactly one interior local maximum of mu.
    pub single_interior_max: bool,
    /// mu strictly increasing before the maximum and strictly
    /// decreasing after it.
    pub rising_then_falling: bool,
    /// lambda strictly increasing with energy.
    pub lambda_increasing: bool,
}

/// Outcome of one verification check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(skip)]
    pub worst_lambda: Option<f64>,
}

/// Report of the identity / inequality verification suite.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Numerical domain-kind evidence from blow-up runs at two resolutions;
/// index 0 is the requested resolution, index 1 the refined one.
#[derive(Clone, Debug)]
pub struct KindEvidence {
    pub verdict: KindVerdict,
    pub e_last: [f64; 2],
    pub lambda_last: [f64; 2],
    pub growth_exponent: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindVerdict {
    FirstKindEvidence,
    SecondKindEvidence,
    Inconclusive,
}

impl KindVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            KindVerdict::FirstKindEvidence => "FirstKindEvidence",
            KindVerdict::SecondKindEvidence => "SecondKindEvidence",
            KindVerdict::Inconclusive => "Inconclusive",
        }
    }
}

// ---------------------------------------------------------------------
// scalar diagnostics
// ---------------------------------------------------------------------

/// Branch energy: one half of the rho-weighted mean of psi. The Dirichlet
/// form and the Green-function double average are evaluated as well and
/// must agree; the mean form is returned.
pub fn energy(mesh: &Mesh, state: &MeanFieldState) -> Result<f64> {
    let e_mean = 0.5 * mesh.inner_w(&state.rho, &state.psi)?;
    let e_grad = 0.5 * mesh.dirichlet_form(&state.psi, &state.psi)?;
    let g_rho = mesh.solve_dirichlet(&state.rho)?;
    let e_green = 0.5 * mesh.inner_w(&state.rho, &g_rho)?;
    let tol = 1e-6 * e_mean.abs().max(1e-12);
    if (e_grad - e_mean).abs() > tol || (e_green - e_mean).abs() > tol {
        return Err(Error::Anomaly(format!(
            "energy forms disagree: mean {e_mean:.12e}, grad {e_grad:.12e}, green {e_green:.12e}"
        )));
    }
    Ok(e_mean)
}

/// Green-function double average of the domain (the energy at lambda = 0).
pub fn energy_zero(mesh: &Mesh) -> Result<f64> {
    let one = mesh.constant(1.0);
    let h = mesh.solve_dirichlet(&one)?;
    Ok(0.5 * mesh.integrate(&h)? / (mesh.area() * mesh.area()))
}

/// Gel'fand parameter of a state: mu = lambda / mass.
pub fn mu_of(state: &MeanFieldState) -> f64 {
    state.lambda / state.mass_eu
}

fn rho_mass_vector(mesh: &Mesh, state: &MeanFieldState) -> Vec<f64> {
    mesh.weights()
        .iter()
        .zip(state.rho.as_slice())
        .map(|(&w, &r)| w * r)
        .collect()
}

fn constrained_solve(mesh: &Mesh, state: &MeanFieldState, rhs: &[f64]) -> Result<Vec<f64>> {
    let m = rho_mass_vector(mesh, state);
    let solver = RankOneSolver::constrained(mesh.weighted_laplacian(), &m, state.lambda)?;
    solver.solve(rhs)
}

/// z = du/dlambda, the lambda-derivative of the Gel'fand solution,
/// solving `-Delta z - lambda rho z_0 = rho`.
pub fn solve_z(mesh: &Mesh, state: &MeanFieldState) -> Result<Field> {
    let m = rho_mass_vector(mesh, state);
    let z = constrained_solve(mesh, state, &m)?;
    mesh.field_from_values(z)
}

/// w = dz/dlambda, solving
/// `-Delta w - lambda rho w_0 = 2 rho z_0 + lambda rho (z_0^2)_0`.
pub fn solve_w(mesh: &Mesh, state: &MeanFieldState, z: &Field) -> Result<Field> {
    let mean_z = mesh.inner_w(&state.rho, z)?;
    let z0 = z.map(|v| v - mean_z);
    let z0sq = z0.map(|v| v * v);
    let mean_z0sq = mesh.inner_w(&state.rho, &z0sq)?;
    let m = rho_mass_vector(mesh, state);
    let rhs: Vec<f64> = m
        .iter()
        .zip(z0.as_slice())
        .zip(z0sq.as_slice())
        .map(|((&mi, &z0i), &z0si)| mi * (2.0 * z0i + state.lambda * (z0si - mean_z0sq)))
        .collect();
    let w = constrained_solve(mesh, state, &rhs)?;
    mesh.field_from_values(w)
}

/// eta = dpsi/dlambda, solving `-Delta eta - lambda rho eta_0 = rho psi_0`.
pub fn solve_eta(mesh: &Mesh, state: &MeanFieldState) -> Result<Field> {
    let mean_psi = mesh.inner_w(&state.rho, &state.psi)?;
    let m = rho_mass_vector(mesh, state);
    let rhs: Vec<f64> = m
        .iter()
        .zip(state.psi.as_slice())
        .map(|(&mi, &p)| mi * (p - mean_psi))
        .collect();
    let eta = constrained_solve(mesh, state, &rhs)?;
    mesh.field_from_values(eta)
}

/// The diagram trigger g = 1 - lambda <z> and the coefficients of the
/// first-order ODE g' = a g + b:
/// `a = -(2 lambda <z_0^2> + lambda <z^2> + <z>)`, `b = -lambda^2 <z^3>`.
pub fn g_and_coeffs(mesh: &Mesh, state: &MeanFieldState, z: &Field) -> Result<(f64, f64, f64)> {
    let lam = state.lambda;
    let mz = mesh.inner_w(&state.rho, z)?;
    let z2 = z.mul(z);
    let mz2 = mesh.inner_w(&state.rho, &z2)?;
    let mz3 = mesh.inner_w(&state.rho, &z2.mul(z))?;
    let mz02 = mz2 - mz * mz;
    let g = 1.0 - lam * mz;
    let a = -(2.0 * lam * mz02 + lam * mz2 + mz);
    let b = -lam * lam * mz3;
    Ok((g, a, b))
}

/// The mean field functional `J(u) = 1/2 int |grad u|^2 - lambda log int e^u`
/// whose critical points are the branch solutions u = lambda psi.
pub fn functional_value(mesh: &Mesh, lambda: f64, u: &Field) -> Result<f64> {
    if !mesh.owns(u) {
        return Err(Error::MeshMismatch);
    }
    let quad = 0.5 * mesh.dirichlet_form(u, u)?;
    let umax = u.max();
    let e = u.map(|v| (v - umax).exp());
    let log_mass = umax + mesh.integrate(&e)?.ln();
    Ok(quad - lambda * log_mass)
}

/// Assembles the diagnostic point of an accepted state; used by the
/// continuation driver.
pub(crate) fn branch_point(
    mesh: &Mesh,
    state: &MeanFieldState,
    engine: &mut BranchSpectrumEngine,
) -> Result<BranchPoint> {
    let (sigma1, nu1) = engine.leading_eigenvalues(mesh, &state.rho, state.lambda)?;
    if sigma1 <= 0.0 {
        return Err(Error::Anomaly(format!(
            "constrained sigma_1 = {sigma1:.6e} is not positive at lambda = {}",
            state.lambda
        )));
    }
    let e = energy(mesh, state)?;
    if !(e > 0.0) {
        return Err(Error::Anomaly(format!(
            "non-positive energy {e} at lambda = {}",
            state.lambda
        )));
    }
    let z = solve_z(mesh, state)?;
    let mean_z = mesh.inner_w(&state.rho, &z)?;
    if !(mean_z > 0.0) {
        return Err(Error::Anomaly(format!(
            "<z> = {mean_z:.6e} is not positive at lambda = {}",
            state.lambda
        )));
    }
    Ok(BranchPoint {
        lambda: state.lambda,
        energy: e,
        mu: mu_of(state),
        g: 1.0 - state.lambda * mean_z,
        sigma1,
        nu1,
        mean_z,
        min_z: z.min(),
        mass_eu: state.mass_eu,
        newton_iters: state.iterations,
    })
}

// ---------------------------------------------------------------------
// finite differences on the branch grid
// ---------------------------------------------------------------------

/// Derivative at the interior nodes of a non-uniform grid by the
/// three-point Lagrange formula; endpoints carry NaN.
fn central_derivative(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![f64::NAN; n];
    for i in 1..n - 1 {
        let hm = x[i] - x[i - 1];
        let hp = x[i + 1] - x[i];
        d[i] = -hp / (hm * (hm + hp)) * f[i - 1] + (hp - hm) / (hm * hp) * f[i]
            + hm / (hp * (hm + hp)) * f[i + 1];
    }
    d
}

// ---------------------------------------------------------------------
// verification suite
// ---------------------------------------------------------------------

struct PointData {
    mean_eta: f64,
    eta_identity_rhs: f64,
    mz: f64,
    mz3: f64,
    a: f64,
    b: f64,
    g: f64,
    min_z: f64,
    max_abs_z: f64,
}

/// Runs the identity and inequality checks along a computed branch.
/// Failures are report entries, not errors.
pub fn verify_branch(mesh: &Mesh, branch: &Branch) -> Result<VerificationReport> {
    let n = branch.len();
    if n < 5 {
        return Err(Error::InvalidParam(format!(
            "verification needs at least 5 branch points (got {n})"
        )));
    }
    let lambdas: Vec<f64> = branch.points.iter().map(|p| p.lambda).collect();
    let energies: Vec<f64> = branch.points.iter().map(|p| p.energy).collect();
    let mus: Vec<f64> = branch.points.iter().map(|p| p.mu).collect();

    let mut data = Vec::with_capacity(n);
    for state in &branch.states {
        let z = solve_z(mesh, state)?;
        let (g, a, b) = g_and_coeffs(mesh, state, &z)?;
        let mz = mesh.inner_w(&state.rho, &z)?;
        let mz3 = mesh.inner_w(&state.rho, &z.mul(&z).mul(&z))?;
        let eta = solve_eta(mesh, state)?;
        let mean_eta = mesh.inner_w(&state.rho, &eta)?;
        let mean_psi = mesh.inner_w(&state.rho, &state.psi)?;
        let psi0 = state.psi.map(|v| v - mean_psi);
        let eta0 = eta.map(|v| v - mean_eta);
        let psi0sq = mesh.inner_w(&state.rho, &psi0.mul(&psi0))?;
        let cross = mesh.inner_w(&state.rho, &psi0.mul(&eta0))?;
        data.push(PointData {
            mean_eta,
            eta_identity_rhs: psi0sq + state.lambda * cross,
            mz,
            mz3,
            a,
            b,
            g,
            min_z: z.min(),
            max_abs_z: z.max_abs(),
        });
    }

    let mut checks = Vec::new();

    // (1) dE/dlambda = <eta>
    let de = central_derivative(&lambdas, &energies);
    let mut worst = 0.0f64;
    let mut worst_lambda = None;
    for i in 1..n - 1 {
        let r = (de[i] - data[i].mean_eta).abs() / data[i].mean_eta.abs().max(1e-300);
        if r > worst {
            worst = r;
            worst_lambda = Some(lambdas[i]);
        }
    }
    checks.push(CheckResult {
        name: "energy_derivative_matches_eta_mean".into(),
        pass: worst <= 1e-2,
        residual: worst,
        tolerance: 1e-2,
        worst_lambda,
    });

    // (2) dE/dlambda > 0
    let mut min_de = f64::INFINITY;
    let mut worst_lambda = None;
    for i in 1..n - 1 {
        if de[i] < min_de {
            min_de = de[i];
            worst_lambda = Some(lambdas[i]);
        }
    }
    checks.push(CheckResult {
        name: "energy_strictly_increasing".into(),
        pass: min_de > 0.0,
        residual: min_de,
        tolerance: 0.0,
        worst_lambda,
    });

    // (3) eta identity <eta> = <psi_0^2> + lambda <psi_0 eta_0>
    let mut worst = 0.0f64;
    let mut worst_lambda = None;
    for (i, d) in data.iter().enumerate() {
        let r = (d.mean_eta - d.eta_identity_rhs).abs() / d.mean_eta.abs().max(1e-300);
        if r > worst {
            worst = r;
            worst_lambda = Some(lambdas[i]);
        }
    }
    checks.push(CheckResult {
        name: "eta_mean_identity".into(),
        pass: worst <= 1e-2,
        residual: worst,
        tolerance: 1e-2,
        worst_lambda,
    });

    // (4) pointwise g-ODE: g' = a g + b
    let gs: Vec<f64> = data.iter().map(|d| d.g).collect();
    let dg = central_derivative(&lambdas, &gs);
    let mut max_dg = 0.0f64;
    for i in 1..n - 1 {
        max_dg = max_dg.max(dg[i].abs());
    }
    let mut worst = 0.0f64;
    let mut worst_lambda = None;
    for i in 1..n - 1 {
        let r = (dg[i] - (data[i].a * data[i].g + data[i].b)).abs();
        if r > worst {
            worst = r;
            worst_lambda = Some(lambdas[i]);
        }
    }
    let rel = worst / max_dg.max(1e-300);
    checks.push(CheckResult {
        name: "g_ode_pointwise".into(),
        pass: rel <= 1e-2,
        residual: rel,
        tolerance: 1e-2,
        worst_lambda,
    });

    // (5) integrated g-ODE by trapezoid accumulation, in the rescaled
    // form g(l) = e^{A(l)} - int_0^l e^{A(l)-A(t)} t^2 <z^3> dt (the
    // plain e^{-A} form overflows near the ceiling). The accumulation is
    // restricted to the sub-range where the branch step resolves the
    // integrating factor (|a| * dlambda <= 0.8); beyond that trapezoid
    // sums carry no information.
    {
        let i0 = branch.nearest_index(0.0);
        let mut a_acc = vec![f64::NAN; n];
        a_acc[i0] = 0.0;
        let mut lo = i0;
        let mut hi = i0;
        while hi + 1 < n {
            let dl = lambdas[hi + 1] - lambdas[hi];
            if data[hi].a.abs().max(data[hi + 1].a.abs()) * dl > 0.8 {
                break;
            }
            a_acc[hi + 1] = a_acc[hi] + 0.5 * (data[hi].a + data[hi + 1].a) * dl;
            hi += 1;
        }
        while lo > 0 {
            let dl = lambdas[lo] - lambdas[lo - 1];
            if data[lo].a.abs().max(data[lo - 1].a.abs()) * dl > 0.8 {
                break;
            }
            a_acc[lo - 1] = a_acc[lo] - 0.5 * (data[lo].a + data[lo - 1].a) * dl;
            lo -= 1;
        }
        let mut worst = 0.0f64;
        let mut worst_lambda = None;
        for i in lo..=hi {
            // trapezoid of e^{A_i - A(t)} t^2 <z^3> from lambda = 0 to lambda_i
            let mut integral = 0.0;
            let f = |j: usize| (a_acc[i] - a_acc[j]).exp() * lambdas[j] * lambdas[j] * data[j].mz3;
            if i > i0 {
                for j in i0..i {
                    integral += 0.5 * (f(j) + f(j + 1)) * (lambdas[j + 1] - lambdas[j]);
                }
            } else {
                for j in i..i0 {
                    integral -= 0.5 * (f(j) + f(j + 1)) * (lambdas[j + 1] - lambdas[j]);
                }
            }
            let r = data[i].g - a_acc[i].exp() + integral;
            let scale = 1.0 + data[i].g.abs() + integral.abs() + a_acc[i].exp();
            let rel = r.abs() / scale;
            if rel > worst {
                worst = rel;
                worst_lambda = Some(lambdas[i]);
            }
        }
        checks.push(CheckResult {
            name: "g_ode_integrated".into(),
            pass: worst <= 1e-2,
            residual: worst,
            tolerance: 1e-2,
            worst_lambda,
        });
    }

    // (6) <z> > 0 everywhere
    let mut min_mz = f64::INFINITY;
    let mut worst_lambda = None;
    for (i, d) in data.iter().enumerate() {
        if d.mz < min_mz {
            min_mz = d.mz;
            worst_lambda = Some(lambdas[i]);
        }
    }
    checks.push(CheckResult {
        name: "mean_z_positive".into(),
        pass: min_mz > 0.0,
        residual: min_mz,
        tolerance: 0.0,
        worst_lambda,
    });

    // (7) integral maximum principle: g >= 0 forces z >= 0 pointwise
    let mut worst = f64::NEG_INFINITY;
    let mut worst_lambda = None;
    for (i, d) in data.iter().enumerate() {
        if d.g >= 0.0 {
            let defect = -d.min_z / d.max_abs_z.max(1e-300);
            if defect > worst {
                worst = defect;
                worst_lambda = Some(lambdas[i]);
            }
        }
    }
    let worst = if worst.is_finite() { worst } else { 0.0 };
    checks.push(CheckResult {
        name: "integral_maximum_principle".into(),
        pass: worst <= 1e-6,
        residual: worst,
        tolerance: 1e-6,
        worst_lambda,
    });

    // (8) single sign change of g (once the branch crosses it)
    {
        let sign_changes = gs.windows(2).filter(|p| p[0] > 0.0 && p[1] <= 0.0).count()
            + gs.windows(2).filter(|p| p[0] <= 0.0 && p[1] > 0.0).count();
        let crossed = gs.iter().any(|&g| g <= 0.0);
        let pass = if crossed {
            sign_changes == 1
        } else {
            sign_changes == 0
        };
        checks.push(CheckResult {
            name: "g_single_sign_change".into(),
            pass,
            residual: sign_changes as f64,
            tolerance: 1.0,
            worst_lambda: None,
        });
    }

    // (9) Fourier identity sigma_j beta_j = alpha_j at sampled states
    {
        let mut worst = 0.0f64;
        let mut worst_lambda = None;
        let mut samples: Vec<usize> = [0.1, 0.3, 0.5, 0.7, 0.9]
            .iter()
            .map(|q| ((n - 1) as f64 * q).round() as usize)
            .map(|i| i.clamp(1, n - 2))
            .collect();
        samples.dedup();
        for &i in &samples {
            let state = &branch.states[i];
            let spec = constrained_spectrum(mesh, &state.rho, state.lambda, 5)?;
            let eta = solve_eta(mesh, state)?;
            let mean_eta = mesh.inner_w(&state.rho, &eta)?;
            let mean_psi = mesh.inner_w(&state.rho, &state.psi)?;
            let psi0 = state.psi.map(|v| v - mean_psi);
            let eta0 = eta.map(|v| v - mean_eta);
            let psi_scale = mesh.inner_w(&state.rho, &psi0.mul(&psi0))?.sqrt();
            for j in 0..spec.len() {
                if spec.modes[j] != 0 {
                    // disk modes >= 1 are orthogonal to radial fields by
                    // the angular integral; both sides vanish identically
                    continue;
                }
                let phi = &spec.phis[j];
                let mean_phi = mesh.inner_w(&state.rho, phi)?;
                let phi0 = phi.map(|v| v - mean_phi);
                let alpha = mesh.inner_w(&state.rho, &phi0.mul(&psi0))?;
                let beta = mesh.inner_w(&state.rho, &phi0.mul(&eta0))?;
                let denom = alpha.abs().max(1e-8 * psi_scale).max(1e-300);
                let r = (spec.sigmas[j] * beta - alpha).abs() / denom;
                if r > worst {
                    worst = r;
                    worst_lambda = Some(state.lambda);
                }
            }
        }
        checks.push(CheckResult {
            name: "fourier_mode_identity".into(),
            pass: worst <= 1e-2,
            residual: worst,
            tolerance: 1e-2,
            worst_lambda,
        });
    }

    // (10) g = mass * d(mu)/dlambda
    {
        let dmu = central_derivative(&lambdas, &mus);
        let g_scale = gs.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let mut worst = 0.0f64;
        let mut worst_lambda = None;
        for i in 1..n - 1 {
            let pred = branch.points[i].mass_eu * dmu[i];
            let r = (gs[i] - pred).abs() / gs[i].abs().max(0.05 * g_scale).max(1e-300);
            if r > worst {
                worst = r;
                worst_lambda = Some(lambdas[i]);
            }
        }
        checks.push(CheckResult {
            name: "g_matches_mass_times_dmu".into(),
            pass: worst <= 1e-2,
            residual: worst,
            tolerance: 1e-2,
            worst_lambda,
        });
    }

    // (11) spectral positivity along the branch
    {
        let mut min_sigma = f64::INFINITY;
        let mut worst_lambda = None;
        for p in &branch.points {
            if p.sigma1 < min_sigma {
                min_sigma = p.sigma1;
                worst_lambda = Some(p.lambda);
            }
        }
        checks.push(CheckResult {
            name: "sigma1_positive".into(),
            pass: min_sigma > 0.0,
            residual: min_sigma,
            tolerance: 0.0,
            worst_lambda,
        });
        let mut min_ls = f64::INFINITY;
        let mut worst_lambda = None;
        for p in &branch.points {
            if p.lambda + p.sigma1 < min_ls {
                min_ls = p.lambda + p.sigma1;
                worst_lambda = Some(p.lambda);
            }
        }
        checks.push(CheckResult {
            name: "lambda_plus_sigma1_positive".into(),
            pass: min_ls > 0.0,
            residual: min_ls,
            tolerance: 0.0,
            worst_lambda,
        });
    }

    Ok(VerificationReport { checks })
}

/// Variant of `verify_branch` for tests: overrides the stored energies
/// (used as a negative control with a corrupted value).
#[doc(hidden)]
pub fn verify_branch_with_energies(
    mesh: &Mesh,
    branch: &Branch,
    energies: &[f64],
) -> Result<VerificationReport> {
    let mut patched = Branch {
        points: branch.points.clone(),
        states: branch.states.clone(),
        termination: branch.termination,
    };
    for (p, &e) in patched.points.iter_mut().zip(energies) {
        p.energy = e;
    }
    verify_branch(mesh, &patched)
}

// ---------------------------------------------------------------------
// bending point and diagram
// ---------------------------------------------------------------------

/// Locates the unique sign change of g by bisection with fresh mean
/// field solves between the bracketing branch points. Returns
/// (lambda_*, E_*, mu_*).
pub fn find_lambda_star(
    mesh: &Mesh,
    branch: &Branch,
    cfg: &ContinuationConfig,
) -> Result<(f64, f64, f64)> {
    let gs: Vec<f64> = branch.points.iter().map(|p| p.g).collect();
    let idx = gs
        .windows(2)
        .position(|p| p[0] > 0.0 && p[1] <= 0.0)
        .ok_or(Error::NoSignChange)?;
    let mut lo = branch.points[idx].lambda;
    let mut hi = branch.points[idx + 1].lambda;
    let mut warm = branch.states[idx].psi.clone();
    let mut best: Option<MeanFieldState> = None;
    let mut best_g = f64::INFINITY;

    for _ in 0..200 {
        if hi - lo < 1e-6 && best.is_some() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let state = newton_solve(mesh, mid, &warm, cfg)?;
        warm = state.psi.clone();
        let z = solve_z(mesh, &state)?;
        let mz = mesh.inner_w(&state.rho, &z)?;
        let g = 1.0 - mid * mz;
        if g.abs() < best_g {
            best_g = g.abs();
            best = Some(state);
        }
        if g.abs() <= 1e-8 {
            break;
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let state = best.ok_or_else(|| Error::Anomaly("bisection made no progress".into()))?;
    let lambda_star = state.lambda;
    if !(lambda_star >= 4.0 * PI - 0.5 && lambda_star < LAMBDA_SUP) {
        return Err(Error::Anomaly(format!(
            "lambda_* = {lambda_star} outside [4*pi, 8*pi)"
        )));
    }
    let e_star = energy(mesh, &state)?;
    let mu_star = mu_of(&state);
    Ok((lambda_star, e_star, mu_star))
}

/// Re-indexes the branch by energy and checks the expected diagram
/// shape. Errors only on non-monotone energy (a discretization failure);
/// shape facts are reported in the summary.
pub fn mu_infty_diagram(branch: &Branch) -> Result<DiagramSummary> {
    let n = branch.len();
    for i in 1..n {
        if !(branch.points[i].energy > branch.points[i - 1].energy) {
            return Err(Error::NonMonotoneEnergy(i));
        }
    }
    let points: Vec<DiagramPoint> = branch
        .points
        .iter()
        .map(|p| DiagramPoint {
            energy: p.energy,
            mu: p.mu,
            lambda: p.lambda,
        })
        .collect();
    let mus: Vec<f64> = points.iter().map(|p| p.mu).collect();
    let mut maxima = Vec::new();
    for i in 1..n - 1 {
        if mus[i] > mus[i - 1] && mus[i] > mus[i + 1] {
            maxima.push(i);
        }
    }
    let max_index = maxima
        .first()
        .copied()
        .unwrap_or_else(|| {
            mus.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap_or(0)
        });
    let rising = (1..=max_index).all(|i| mus[i] > mus[i - 1]);
    let falling = (max_index + 1..n).all(|i| mus[i] < mus[i - 1]);
    let lambda_increasing = (1..n).all(|i| points[i].lambda > points[i - 1].lambda);
    let mu_at_e0 = points[branch.nearest_index(0.0)].mu;
    Ok(DiagramSummary {
        points,
        max_index,
        mu_at_e0,
        single_interior_max: maxima.len() == 1,
        rising_then_falling: rising && falling,
        lambda_increasing,
    })
}

// ---------------------------------------------------------------------
// domain classification
// ---------------------------------------------------------------------

/// Runs the continuation toward the ceiling at the given and the doubled
/// resolution and reports blow-up evidence. The verdict is numerical
/// evidence, not a proof.
pub fn classify_domain(spec: &MeshSpec, cfg: &ContinuationConfig) -> Result<KindEvidence> {
    let mut e_last = [0.0; 2];
    let mut lambda_last = [0.0; 2];
    let mut growth = [0.0; 2];
    let mut terminations = [Termination::LambdaEnd; 2];

    for (i, s) in [spec.clone(), spec.refined()].into_iter().enumerate() {
        let mesh = crate::grid::build_mesh(s)?;
        let run_cfg = ContinuationConfig {
            lambda_start: 0.0,
            ..cfg.clone()
        };
        let branch = continue_branch(&mesh, &run_cfg)?;
        let last = branch
            .points
            .last()
            .ok_or_else(|| Error::Anomaly("empty branch".into()))?;
        e_last[i] = last.energy;
        lambda_last[i] = last.lambda;
        growth[i] = growth_exponent(&branch);
        terminations[i] = branch.termination;
    }

    let both_capped = terminations.iter().all(|t| *t == Termination::EnergyCap);
    let both_reached = terminations.iter().all(|t| *t == Termination::LambdaEnd);
    let growth_positive = growth.iter().all(|&p| p > 0.0);
    let growth_consistent = {
        let hi = growth[0].max(growth[1]);
        hi > 0.0 && (growth[0] - growth[1]).abs() <= 0.5 * hi
    };
    let verdict = if both_capped && growth_positive && growth_consistent {
        KindVerdict::FirstKindEvidence
    } else if both_reached && e_last.iter().all(|&e| e < cfg.e_max) {
        KindVerdict::SecondKindEvidence
    } else {
        KindVerdict::Inconclusive
    };
    Ok(KindEvidence {
        verdict,
        e_last,
        lambda_last,
        growth_exponent: growth,
    })
}

/// Least-squares slope of E against ln(1/(8 pi - lambda)) over the upper
/// tail of the branch.
fn growth_exponent(branch: &Branch) -> f64 {
    let n = branch.len();
    let tail = (n / 3).max(5).min(n);
    let pts = &branch.points[n - tail..];
    let xs: Vec<f64> = pts
        .iter()
        .map(|p| (1.0 / (LAMBDA_SUP - p.lambda)).ln())
        .collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.energy).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_mesh;
    use crate::oracles;

    fn disk(n_r: usize) -> Mesh {
        build_mesh(MeshSpec::DiskRadial { mode: 0, n_r }).unwrap()
    }

    fn disk_state(mesh: &Mesh, lambda: f64) -> MeanFieldState {
        let cfg = ContinuationConfig::default();
        let mut state = newton_solve(mesh, 0.0, &mesh.zeros(), &cfg).unwrap();
        // walk up in moderate steps for a safe warm start
        let mut l = 0.0;
        while (l - lambda).abs() > 1e-12 {
            l = if lambda > l {
                (l + 2.0).min(lambda)
            } else {
                (l - 2.0).max(lambda)
            };
            state = newton_solve(mesh, l, &state.psi, &cfg).unwrap();
        }
        state
    }

    #[test]
    fn energy_zero_matches_disk_value() {
        let mesh = disk(2048);
        let e0 = energy_zero(&mesh).unwrap();
        assert!((e0 - oracles::disk_e0()).abs() < 1e-6, "{e0}");
    }

    #[test]
    fn energy_zero_agrees_with_lambda_zero_state() {
        let mesh = build_mesh(MeshSpec::Rectangle {
            a: 1.0,
            b: 1.0,
            n_x: 32,
            n_y: 32,
        })
        .unwrap();
        let cfg = ContinuationConfig::default();
        let state = newton_solve(&mesh, 0.0, &mesh.zeros(), &cfg).unwrap();
        let e_state = energy(&mesh, &state).unwrap();
        let e0 = energy_zero(&mesh).unwrap();
        assert!((e_state - e0).abs() < 1e-10 * e0);
    }

    #[test]
    fn energy_matches_closed_form_along_the_family() {
        let mesh = disk(1024);
        for alpha in [0.5, 1.0, 3.0] {
            let rec = oracles::liouville_closed_form(alpha).unwrap();
            let state = disk_state(&mesh, rec.lambda);
            let e = energy(&mesh, &state).unwrap();
            assert!(
                (e - rec.energy).abs() < 1e-4,
                "alpha {alpha}: {e} vs {}",
                rec.energy
            );
        }
    }

    #[test]
    fn energy_at_lambda_zero_is_e0_value() {
        let mesh = disk(1024);
        let cfg = ContinuationConfig::default();
        let state = newton_solve(&mesh, 0.0, &mesh.zeros(), &cfg).unwrap();
        let e = energy(&mesh, &state).unwrap();
        assert!((e - 1.0 / (16.0 * PI)).abs() < 1e-6);
    }

    #[test]
    fn mu_matches_closed_form() {
        let mesh = disk(1024);
        let state = disk_state(&mesh, 4.0 * PI);
        assert!((mu_of(&state) - 2.0).abs() < 1e-4);
        let state = disk_state(&mesh, 2.0 * PI);
        let expected = oracles::disk_mu_of_lambda(2.0 * PI);
        assert!((expected - 1.5).abs() < 1e-12);
        assert!((mu_of(&state) - 1.5).abs() < 1e-4);
    }

    #[test]
    fn z_at_lambda_zero_solves_plain_poisson_problem() {
        let mesh = disk(512);
        let cfg = ContinuationConfig::default();
        let state = newton_solve(&mesh, 0.0, &mesh.zeros(), &cfg).unwrap();
        let z = solve_z(&mesh, &state).unwrap();
        let direct = mesh.solve_dirichlet(&state.rho).unwrap();
        let mut diff = z.clone();
        diff.axpy(-1.0, &direct);
        assert!(diff.max_abs() < 1e-10);
        // <z> = 2 E_0 at lambda = 0
        let mz = mesh.inner_w(&state.rho, &z).unwrap();
        let e0 = energy_zero(&mesh).unwrap();
        assert!((mz - 2.0 * e0).abs() < 1e-10);
    }

    #[test]
    fn mean_z_matches_closed_form_at_four_pi() {
        let mesh = disk(1024);
        let state = disk_state(&mesh, 4.0 * PI);
        let z = solve_z(&mesh, &state).unwrap();
        let mz = mesh.inner_w(&state.rho, &z).unwrap();
        assert!((mz - 1.0 / (4.0 * PI)).abs() < 1e-4, "{mz}");
    }

    #[test]
    fn z_matches_finite_difference_of_u() {
        let mesh = disk(512);
        let cfg = ContinuationConfig::default();
        let lambda = 2.0 * PI;
        let state = disk_state(&mesh, lambda);
        let z = solve_z(&mesh, &state).unwrap();
        let eps = 1e-4;
        let up = newton_solve(&mesh, lambda + eps, &state.psi, &cfg).unwrap();
        let dn = newton_solve(&mesh, lambda - eps, &state.psi, &cfg).unwrap();
        // u = lambda psi
        let mut du = up.psi.map(|v| (lambda + eps) * v);
        du.axpy(-1.0, &dn.psi.map(|v| (lambda - eps) * v));
        du.scale(1.0 / (2.0 * eps));
        let mut diff = du;
        diff.axpy(-1.0, &z);
        assert!(
            diff.max_abs() < 1e-5 * z.max_abs().max(1.0),
            "{}",
            diff.max_abs()
        );
    }

    #[test]
    fn w_satisfies_mean_identity_and_finite_difference() {
        let mesh = disk(512);
        let cfg = ContinuationConfig::default();
        for lambda in [2.0 * PI, 4.0 * PI, 6.0 * PI] {
            let state = disk_state(&mesh, lambda);
            let z = solve_z(&mesh, &state).unwrap();
            let w = solve_w(&mesh, &state, &z).unwrap();
            let mw = mesh.inner_w(&state.rho, &w).unwrap();
            let mz = mesh.inner_w(&state.rho, &z).unwrap();
            let z0 = z.map(|v| v - mz);
            let mz02 = mesh.inner_w(&state.rho, &z0.mul(&z0)).unwrap();
            let mz03 = mesh.inner_w(&state.rho, &z0.mul(&z0).mul(&z0)).unwrap();
            let rhs = 2.0 * mz02 + lambda * mz03;
            assert!(
                (mw - rhs).abs() < 1e-6 * mw.abs().max(1e-6),
                "lambda {lambda}: {mw} vs {rhs}"
            );
            if (lambda - 2.0 * PI).abs() < 1e-12 {
                let eps = 1e-4;
                let up = newton_solve(&mesh, lambda + eps, &state.psi, &cfg).unwrap();
                let dn = newton_solve(&mesh, lambda - eps, &state.psi, &cfg).unwrap();
                let zu = solve_z(&mesh, &up).unwrap();
                let zd = solve_z(&mesh, &dn).unwrap();
                let mut dw = zu;
                dw.axpy(-1.0, &zd);
                dw.scale(1.0 / (2.0 * eps));
                let mut diff = dw;
                diff.axpy(-1.0, &w);
                assert!(diff.max_abs() < 1e-4 * w.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn eta_identities_hold() {
        let mesh = disk(512);
        for lambda in [2.0 * PI, 4.0 * PI] {
            let state = disk_state(&mesh, lambda);
            let eta = solve_eta(&mesh, &state).unwrap();
            let mean_eta = mesh.inner_w(&state.rho, &eta).unwrap();
            let mean_psi = mesh.inner_w(&state.rho, &state.psi).unwrap();
            let psi0 = state.psi.map(|v| v - mean_psi);
            let eta0 = eta.map(|v| v - mean_eta);
            let rhs = mesh.inner_w(&state.rho, &psi0.mul(&psi0)).unwrap()
                + lambda * mesh.inner_w(&state.rho, &psi0.mul(&eta0)).unwrap();
            assert!((mean_eta - rhs).abs() < 1e-8 * mean_eta.abs());
            // z = psi + lambda eta
            let z = solve_z(&mesh, &state).unwrap();
            let mut recon = state.psi.clone();
            recon.axpy(lambda, &eta);
            let mut diff = recon;
            diff.axpy(-1.0, &z);
            assert!(diff.max_abs() < 1e-8 * z.max_abs());
        }
    }

    #[test]
    fn eta_at_lambda_zero_solves_plain_problem() {
        let mesh = disk(256);
        let cfg = ContinuationConfig::default();
        let state = newton_solve(&mesh, 0.0, &mesh.zeros(), &cfg).unwrap();
        let eta = solve_eta(&mesh, &state).unwrap();
        let mean_psi = mesh.inner_w(&state.rho, &state.psi).unwrap();
        let rhs = state
            .rho
            .mul(&state.psi.map(|v| v - mean_psi));
        let direct = mesh.solve_dirichlet(&rhs).unwrap();
        let mut diff = eta;
        diff.axpy(-1.0, &direct);
        assert!(diff.max_abs() < 1e-10);
    }

    #[test]
    fn g_matches_closed_forms() {
        let mesh = disk(1024);
        let cfg = ContinuationConfig::default();
        let state0 = newton_solve(&mesh, 0.0, &mesh.zeros(), &cfg).unwrap();
        let z0 = solve_z(&mesh, &state0).unwrap();
        let (g0, _, _) = g_and_coeffs(&mesh, &state0, &z0).unwrap();
        assert!((g0 - 1.0).abs() < 1e-10);

        let state = disk_state(&mesh, 4.0 * PI);
        let z = solve_z(&mesh, &state).unwrap();
        let (g, _, _) = g_and_coeffs(&mesh, &state, &z).unwrap();
        assert!(g.abs() < 1e-3, "{g}");

        let state = disk_state(&mesh, 6.0 * PI);
        let z = solve_z(&mesh, &state).unwrap();
        let (g, _, _) = g_and_coeffs(&mesh, &state, &z).unwrap();
        assert!((g + 2.0).abs() < 1e-3, "{g}");
    }

    #[test]
    fn functional_is_critical_at_solutions() {
        let mesh = disk(256);
        let lambda = 3.0;
        let state = disk_state(&mesh, lambda);
        let u = state.psi.map(|v| lambda * v);
        let j0 = functional_value(&mesh, lambda, &u).unwrap();
        // directional derivatives vanish to second order
        let v = mesh.field_from_fn(|p| (1.0 - p[0] * p[0]) * (2.0 + (3.0 * p[0]).sin()));
        for eps in [1e-3, 1e-4] {
            let mut up = u.clone();
            up.axpy(eps, &v);
            let mut dn = u.clone();
            dn.axpy(-eps, &v);
            let jp = functional_value(&mesh, lambda, &up).unwrap();
            let jm = functional_value(&mesh, lambda, &dn).unwrap();
            let slope = (jp - jm) / (2.0 * eps);
            assert!(slope.abs() < 20.0 * eps, "slope {slope} at eps {eps}");
            assert!(jp >= j0 - 1e-12 && jm >= j0 - 1e-12); // lambda < 4 pi: minimum
        }
        assert!(
            (functional_value(&mesh, lambda, &mesh.zeros()).unwrap()
                + lambda * PI.ln())
            .abs()
                < 1e-12
        );
    }

    #[test]
    fn functional_is_convex_for_negative_lambda() {
        let mesh = disk(256);
        let lambda = -5.0;
        let state = disk_state(&mesh, lambda);
        let u = state.psi.map(|v| lambda * v);
        let j0 = functional_value(&mesh, lambda, &u).unwrap();
        let mut rng = crate::linalg::SplitMix64::new(99);
        for _case in 0..3 {
            let v = mesh
                .field_from_values(
                    (0..mesh.n_interior()).map(|_| 0.3 * rng.next_f64()).collect(),
                )
                .unwrap();
            let mut pert = u.clone();
            pert.axpy(1.0, &v);
            let j = functional_value(&mesh, lambda, &pert).unwrap();
            assert!(j >= j0, "{j} < {j0}");
        }
    }
}
