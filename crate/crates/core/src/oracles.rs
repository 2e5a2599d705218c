//! Closed-form ground truth on the unit disk.
//!
//! The radial family `u(r) = 2 ln((1+alpha)/(1+alpha r^2))` solves
//! `-Delta u = mu e^u` with `mu = 8 alpha / (1+alpha)^2` and induces
//! `lambda = 8 pi alpha / (1+alpha)`. Every branch quantity has a closed
//! form in `c = 1 + alpha`; this module evaluates those forms and an
//! independent adaptive quadrature, never touching the mesh solvers, so
//! the two paths can cross-check each other.

use crate::error::{Error, Result};
use crate::spectrum::bessel_zero;
use crate::LAMBDA_SUP;
use std::f64::consts::PI;

/// Family parameter of the explicit disk solutions.
#[derive(Clone, Copy, Debug)]
pub struct LiouvilleParam {
    alpha: f64,
}

impl LiouvilleParam {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParam(format!("alpha = {alpha} must be > 0")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Closed-form branch quantities of the disk family at one parameter.
#[derive(Clone, Copy, Debug)]
pub struct LiouvilleRecord {
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
    pub mass_eu: f64,
    pub energy: f64,
    pub g: f64,
    pub mean_z: f64,
}

impl LiouvilleRecord {
    /// The explicit solution of the Gel'fand problem at this parameter.
    pub fn u(&self, r: f64) -> f64 {
        2.0 * ((1.0 + self.alpha) / (1.0 + self.alpha * r * r)).ln()
    }

    /// The mean field solution `psi = u / lambda` (alpha > 0 only).
    pub fn psi(&self, r: f64) -> f64 {
        self.u(r) / self.lambda
    }
}

/// phi(e) = ((1+e) ln(1+e) - e) / e^2, the analytic kernel of the disk
/// energy; phi(0) = 1/2.
fn phi_kernel(e: f64) -> f64 {
    if e.abs() < 0.5 {
        // sum_{k>=0} (-1)^k e^k / ((k+1)(k+2))
        let mut term = 1.0;
        let mut s = 0.0;
        for k in 0..64 {
            let coeff = 1.0 / (((k + 1) * (k + 2)) as f64);
            s += term * coeff;
            term *= -e;
            if term.abs() * coeff < 1e-18 {
                break;
            }
        }
        s
    } else {
        ((1.0 + e) * (1.0 + e).ln() - e) / (e * e)
    }
}

/// phi'(e), by the same split.
fn phi_kernel_prime(e: f64) -> f64 {
    if e.abs() < 0.5 {
        let mut term = 1.0; // e^{k-1} accumulated below
        let mut s = 0.0;
        for k in 1..64 {
            let coeff = k as f64 / (((k + 1) * (k + 2)) as f64);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * coeff * term;
            term *= e;
            if term.abs() * coeff < 1e-18 {
                break;
            }
        }
        s
    } else {
        (2.0 * e - (e + 2.0) * (1.0 + e).ln()) / (e * e * e)
    }
}

/// Disk energy as a function of lambda < 8*pi:
/// `E = c phi(c-1) / (8 pi)` with `c = 8 pi / (8 pi - lambda)`.
pub fn disk_energy_of_lambda(lambda: f64) -> f64 {
    let c = LAMBDA_SUP / (LAMBDA_SUP - lambda);
    c * phi_kernel(c - 1.0) / LAMBDA_SUP
}

/// d E / d lambda of the closed-form disk energy.
pub fn disk_energy_prime(lambda: f64) -> f64 {
    let c = LAMBDA_SUP / (LAMBDA_SUP - lambda);
    let de_dc = (phi_kernel(c - 1.0) + c * phi_kernel_prime(c - 1.0)) / LAMBDA_SUP;
    de_dc * c * c / LAMBDA_SUP
}

/// mu(lambda) = lambda (8 pi - lambda) / (8 pi)^2 * 8... = lambda(8pi-lambda)/(8 pi^2).
pub fn disk_mu_of_lambda(lambda: f64) -> f64 {
    lambda * (LAMBDA_SUP - lambda) / (8.0 * PI * PI)
}

/// g(lambda) = (8 pi - 2 lambda) / (8 pi - lambda).
pub fn disk_g_of_lambda(lambda: f64) -> f64 {
    (LAMBDA_SUP - 2.0 * lambda) / (LAMBDA_SUP - lambda)
}

/// <z_lambda> = 1 / (8 pi - lambda).
pub fn disk_mean_z_of_lambda(lambda: f64) -> f64 {
    1.0 / (LAMBDA_SUP - lambda)
}

/// mass(lambda) = integral of e^u = pi c.
pub fn disk_mass_of_lambda(lambda: f64) -> f64 {
    PI * LAMBDA_SUP / (LAMBDA_SUP - lambda)
}

/// Green-function double average of the unit disk: E0 = 1/(16 pi).
/// (h = (1-r^2)/4 solves -Delta h = 1, integral of h = pi/8, and
/// E0 = (pi/8) / (2 pi^2).)
pub fn disk_e0() -> f64 {
    1.0 / (16.0 * PI)
}

/// Closed-form record of the disk family at `alpha > 0`.
pub fn liouville_closed_form(alpha: f64) -> Result<LiouvilleRecord> {
    let p = LiouvilleParam::new(alpha)?;
    let alpha = p.alpha();
    let c = 1.0 + alpha;
    let lambda = LAMBDA_SUP * alpha / c;
    Ok(LiouvilleRecord {
        alpha,
        lambda,
        mu: 8.0 * alpha / (c * c),
        mass_eu: PI * c,
        energy: c * phi_kernel(alpha) / LAMBDA_SUP,
        g: disk_g_of_lambda(lambda),
        mean_z: disk_mean_z_of_lambda(lambda),
    })
}

/// One row of the disk eigenvalue table for the mean-subtracted problem
/// `-Delta phi = sigma (phi - avg phi)` with zero boundary data.
#[derive(Clone, Debug)]
pub struct AppendixEntry {
    pub n: u32,
    pub m: u32,
    pub sigma: f64,
    pub multiplicity: u32,
    pub description: String,
}

/// Enumerates the exact spectrum of the mean-subtracted disk problem:
/// `sigma_{n,m} = mu_{n,m}^2` with `mu_{n,m}` the m-th zero of `J_n`.
/// Radial eigenfunctions occur only at the `J_1` zeros (the radial
/// boundary condition reduces to `J_1(sqrt(sigma)) = 0`), so each
/// `sigma_{1,m}` carries three eigenfunctions and each `sigma_{n,m}`
/// with n >= 2 carries two.
pub fn appendix_eigenpairs(n_max: u32, m_max: u32) -> Result<Vec<AppendixEntry>> {
    if n_max < 1 || m_max < 1 {
        return Err(Error::InvalidParam(
            "appendix table needs n_max >= 1 and m_max >= 1".into(),
        ));
    }
    let mut rows = Vec::new();
    for n in 1..=n_max {
        for m in 1..=m_max {
            let z = bessel_zero(n, m)?;
            let (mult, description) = if n == 1 {
                (
                    3,
                    format!(
                        "J0({z:.6}r) - J0({z:.6}) (radial), cos(t) J1({z:.6}r), sin(t) J1({z:.6}r)"
                    ),
                )
            } else {
                (
                    2,
                    format!("cos({n}t) J{n}({z:.6}r), sin({n}t) J{n}({z:.6}r)"),
                )
            };
            rows.push(AppendixEntry {
                n,
                m,
                sigma: z * z,
                multiplicity: mult,
                description,
            });
        }
    }
    rows.sort_by(|a, b| a.sigma.partial_cmp(&b.sigma).unwrap());
    Ok(rows)
}

/// Adaptive Simpson quadrature, the independent 1D integration path used
/// to validate the closed forms.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1)
                + rec(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    rec(f, a, fa, b, fb, fm, whole, tol, 48)
}
