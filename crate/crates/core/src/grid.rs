//! Discrete domains: cell-centered meshes, the Dirichlet Laplacian and
//! quadrature.
//!
//! Two domain families are supported. The unit disk is reduced per
//! angular mode to a radial grid with cell centers `r_i = (i - 1/2) h`,
//! `h = 1/n_r` (no node at the axis); the operator
//! `-(1/r)(r u')' + n^2/r^2 u` is discretized in conservative flux form
//! with fluxes at cell faces. Rectangles use the five-point stencil on a
//! uniform cell-centered grid. Dirichlet data enters through half-cell
//! boundary fluxes, which keeps the weighted operator symmetric positive
//! definite and makes the quadrature weights sum exactly to the domain
//! area.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::linalg::{BandedCholesky, SymBanded};

static NEXT_MESH_ID: AtomicU64 = AtomicU64::new(1);

pub const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Domain description.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshSpec {
    /// Unit disk reduced to a radial grid for one angular mode.
    DiskRadial { mode: u32, n_r: usize },
    /// Axis-aligned rectangle of sides `a <= b`.
    Rectangle {
        a: f64,
        b: f64,
        n_x: usize,
        n_y: usize,
    },
}

impl MeshSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MeshSpec::DiskRadial { n_r, .. } => {
                if n_r < 16 {
                    return Err(Error::InvalidSpec(format!("n_r = {n_r} < 16")));
                }
            }
            MeshSpec::Rectangle { a, b, n_x, n_y } => {
                if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::InvalidSpec(format!("sides a = {a}, b = {b}")));
                }
                if a > b {
                    return Err(Error::InvalidSpec(format!(
                        "canonical orientation requires a <= b (got a = {a}, b = {b})"
                    )));
                }
                if n_x < 16 || n_y < 16 {
                    return Err(Error::InvalidSpec(format!(
                        "node counts n_x = {n_x}, n_y = {n_y} must be >= 16"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same domain with twice the resolution in every direction.
    pub fn refined(&self) -> MeshSpec {
        match *self {
            MeshSpec::DiskRadial { mode, n_r } => MeshSpec::DiskRadial { mode, n_r: 2 * n_r },
            MeshSpec::Rectangle { a, b, n_x, n_y } => MeshSpec::Rectangle {
                a,
                b,
                n_x: 2 * n_x,
                n_y: 2 * n_y,
            },
        }
    }
}

/// One real value per interior node of a mesh.
#[derive(Clone, Debug)]
pub struct Field {
    mesh_id: u64,
    values: Vec<f64>,
}

impl Field {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// self + alpha * other (same mesh).
    pub fn axpy(&mut self, alpha: f64, other: &Field) {
        assert_eq!(self.mesh_id, other.mesh_id, "field mesh mismatch");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn shift(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v += c);
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            mesh_id: self.mesh_id,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise product with another field of the same mesh.
    pub fn mul(&self, other: &Field) -> Field {
        assert_eq!(self.mesh_id, other.mesh_id, "field mesh mismatch");
        Field {
            mesh_id: self.mesh_id,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }
}

/// Immutable discrete domain with its weighted Laplacian and quadrature.
pub struct Mesh {
    id: u64,
    spec: MeshSpec,
    coords: Vec<[f64; 2]>,
    weights: Vec<f64>,
    area: f64,
    /// Weighted operator `A = W K` (symmetric positive definite); the
    /// pointwise Laplacian is `K = W^{-1} A`.
    lap: SymBanded,
    lap_norm: f64,
    chol: BandedCholesky,
}

/// Builds a mesh, assembling the weighted Dirichlet Laplacian and its
/// Cholesky factor.
pub fn build_mesh(spec: MeshSpec) -> Result<Mesh> {
    spec.validate()?;
    let (coords, weights, area, lap) = match spec {
        MeshSpec::DiskRadial { mode, n_r } => assemble_radial(mode, n_r),
        MeshSpec::Rectangle { a, b, n_x, n_y } => assemble_rectangle(a, b, n_x, n_y),
    };
    let chol = lap.cholesky().map_err(|e| {
        Error::Anomaly(format!("weighted Laplacian is not positive definite: {e}"))
    })?;
    let lap_norm = lap.inf_norm();
    Ok(Mesh {
        id: NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed),
        spec,
        coords,
        weights,
        area,
        lap,
        lap_norm,
        chol,
    })
}

fn assemble_radial(mode: u32, n_r: usize) -> (Vec<[f64; 2]>, Vec<f64>, f64, SymBanded) {
    let h = 1.0 / n_r as f64;
    let r: Vec<f64> = (0..n_r).map(|i| (i as f64 + 0.5) * h).collect();
    let weights: Vec<f64> = r.iter().map(|&ri| TAU * ri * h).collect();
    let coords: Vec<[f64; 2]> = r.iter().map(|&ri| [ri, 0.0]).collect();
    let mut a = SymBanded::zeros(n_r, 1);
    // interior face at r = i h carries conductance 2*pi*(i h)/h = 2*pi*i;
    // the face at the axis (i = 0) carries none.
    for i in 0..n_r {
        let c_left = if i == 0 { 0.0 } else { TAU * i as f64 };
        let c_right = if i + 1 == n_r {
            // half-cell closure against the boundary value at r = 1
            TAU * 2.0 / h
        } else {
            TAU * (i + 1) as f64
        };
        a.add(i, i, c_left + c_right);
        if i + 1 < n_r {
            a.add(i + 1, i, -TAU * (i + 1) as f64);
        }
    }
    if mode > 0 {
        let m2 = (mode as f64) * (mode as f64);
        for i in 0..n_r {
            a.add(i, i, TAU * h * m2 / r[i]);
        }
    }
    (coords, weights, std::f64::consts::PI, a)
}

fn assemble_rectangle(
    a_len: f64,
    b_len: f64,
    n_x: usize,
    n_y: usize,
) -> (Vec<[f64; 2]>, Vec<f64>, f64, SymBanded) {
    let hx = a_len / n_x as f64;
    let hy = b_len / n_y as f64;
    // order along the direction with fewer cells for minimum bandwidth
    let x_fast = n_x <= n_y;
    let (nf, ns) = if x_fast { (n_x, n_y) } else { (n_y, n_x) };
    let n = n_x * n_y;
    let mut coords = Vec::with_capacity(n);
    for s in 0..ns {
        for f in 0..nf {
            let (i, j) = if x_fast { (f, s) } else { (s, f) };
            coords.push([(i as f64 + 0.5) * hx, (j as f64 + 0.5) * hy]);
        }
    }
    let w = hx * hy;
    let weights = vec![w; n];
    let (cf, cs) = if x_fast {
        (hy / hx, hx / hy) // conductance across fast/slow faces
    } else {
        (hx / hy, hy / hx)
    };
    let mut a = SymBanded::zeros(n, nf);
    for s in 0..ns {
        for f in 0..nf {
            let idx = s * nf + f;
            let mut diag = 0.0;
            // fast-direction neighbors
            diag += if f == 0 { 2.0 * cf } else { cf };
            diag += if f + 1 == nf { 2.0 * cf } else { cf };
            if f + 1 < nf {
                a.add(idx + 1, idx, -cf);
            }
            // slow-direction neighbors
            diag += if s == 0 { 2.0 * cs } else { cs };
            diag += if s + 1 == ns { 2.0 * cs } else { cs };
            if s + 1 < ns {
                a.add(idx + nf, idx, -cs);
            }
            a.add(idx, idx, diag);
        }
    }
    (coords, weights, a_len * b_len, a)
}

impl Mesh {
    pub fn spec(&self) -> &MeshSpec {
        &self.spec
    }

    pub fn n_interior(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub(crate) fn weighted_laplacian(&self) -> &SymBanded {
        &self.lap
    }

    pub(crate) fn laplacian_cholesky(&self) -> &BandedCholesky {
        &self.chol
    }

    pub fn owns(&self, f: &Field) -> bool {
        f.mesh_id == self.id
    }

    fn check(&self, f: &Field) -> Result<()> {
        if self.owns(f) {
            Ok(())
        } else {
            Err(Error::MeshMismatch)
        }
    }

    pub fn zeros(&self) -> Field {
        Field {
            mesh_id: self.id,
            values: vec![0.0; self.n_interior()],
        }
    }

    pub fn constant(&self, c: f64) -> Field {
        Field {
            mesh_id: self.id,
            values: vec![c; self.n_interior()],
        }
    }

    pub fn field_from_fn(&self, f: impl Fn(&[f64; 2]) -> f64) -> Field {
        Field {
            mesh_id: self.id,
            values: self.coords.iter().map(f).collect(),
        }
    }

    pub fn field_from_values(&self, values: Vec<f64>) -> Result<Field> {
        if values.len() != self.n_interior() {
            return Err(Error::InvalidParam(format!(
                "field length {} does not match mesh size {}",
                values.len(),
                self.n_interior()
            )));
        }
        Ok(Field {
            mesh_id: self.id,
            values,
        })
    }

    /// Moves a field between meshes with identical node layouts (the
    /// radial meshes of different angular modes share their grid).
    pub fn adopt(&self, f: &Field) -> Result<Field> {
        self.field_from_values(f.values.clone())
    }

    /// K f, the discrete `-Delta` with zero Dirichlet data.
    pub fn apply_laplacian(&self, f: &Field) -> Result<Field> {
        self.check(f)?;
        let mut out = vec![0.0; f.len()];
        self.lap.matvec(f.as_slice(), &mut out);
        for (o, &w) in out.iter_mut().zip(&self.weights) {
            *o /= w;
        }
        Ok(Field {
            mesh_id: self.id,
            values: out,
        })
    }

    /// Discrete Green operator: returns `f` with `K f = rhs` to a
    /// normwise backward error of 1e-12.
    pub fn solve_dirichlet(&self, rhs: &Field) -> Result<Field> {
        self.check(rhs)?;
        if !rhs.is_finite() {
            return Err(Error::NonFinite("solve_dirichlet rhs"));
        }
        let b: Vec<f64> = rhs
            .as_slice()
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| v * w)
            .collect();
        let bnorm = crate::linalg::norm2(&b);
        let mut x = self.chol.solve(&b);
        if bnorm > 0.0 {
            let eta = |x: &[f64], r: &[f64]| {
                crate::linalg::norm2(r) / (self.lap_norm * crate::linalg::norm2(x) + bnorm)
            };
            let mut last = f64::INFINITY;
            for _refine in 0..3 {
                let mut ax = vec![0.0; x.len()];
                self.lap.matvec(&x, &mut ax);
                let r: Vec<f64> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
                last = eta(&x, &r);
                if last <= 1e-14 {
                    break;
                }
                let dx = self.chol.solve(&r);
                for (xi, di) in x.iter_mut().zip(&dx) {
                    *xi += di;
                }
            }
            if last > 1e-12 {
                return Err(Error::Anomaly(format!(
                    "Poisson solve stalled at backward error {last:.3e}"
                )));
            }
        }
        Ok(Field {
            mesh_id: self.id,
            values: x,
        })
    }

    /// Weighted norm of the entrywise rounding bound |K||f| of the
    /// pointwise Laplacian; the residual of the discrete equation can
    /// not be evaluated more accurately than epsilon times this.
    pub(crate) fn laplacian_rounding_bound(&self, f: &Field) -> f64 {
        let mut y = vec![0.0; f.len()];
        self.lap.abs_matvec(f.as_slice(), &mut y);
        let mut s = 0.0;
        for ((&w, &v), _) in self.weights.iter().zip(&y).zip(f.as_slice()) {
            let node = v / w;
            s += w * node * node;
        }
        s.sqrt()
    }

    /// Quadrature: sum of w_i f_i.
    pub fn integrate(&self, f: &Field) -> Result<f64> {
        self.check(f)?;
        Ok(self
            .weights
            .iter()
            .zip(f.as_slice())
            .map(|(&w, &v)| w * v)
            .sum())
    }

    /// Quadrature-weighted inner product.
    pub fn inner_w(&self, f: &Field, g: &Field) -> Result<f64> {
        self.check(f)?;
        self.check(g)?;
        Ok(self
            .weights
            .iter()
            .zip(f.as_slice())
            .zip(g.as_slice())
            .map(|((&w, &a), &b)| w * a * b)
            .sum())
    }

    /// Quadrature-weighted L2 norm.
    pub fn norm_w(&self, f: &Field) -> Result<f64> {
        Ok(self.inner_w(f, f)?.max(0.0).sqrt())
    }

    /// Dirichlet form f^T (W K) g = integral of grad f . grad g.
    pub fn dirichlet_form(&self, f: &Field, g: &Field) -> Result<f64> {
        self.check(f)?;
        self.check(g)?;
        Ok(self.lap.quad_form(f.as_slice(), g.as_slice()))
    }

    /// Outward normal derivative at r = 1 of a radial profile, second
    /// order: one-sided quadratic through the three outermost cell
    /// centers, extrapolated to the wall. The stencil annihilates
    /// constants, so the smooth O(h^2) offset of discrete eigenvectors
    /// near the wall does not pollute it.
    pub fn radial_normal_derivative(&self, f: &Field) -> Result<f64> {
        self.check(f)?;
        let n_r = match self.spec {
            MeshSpec::DiskRadial { n_r, .. } => n_r,
            _ => {
                return Err(Error::InvalidParam(
                    "normal derivative is defined for radial meshes only".into(),
                ))
            }
        };
        let h = 1.0 / n_r as f64;
        let v1 = f.as_slice()[n_r - 1]; // r = 1 - h/2
        let v2 = f.as_slice()[n_r - 2]; // r = 1 - 3h/2
        let v3 = f.as_slice()[n_r - 3]; // r = 1 - 5h/2
        Ok((2.0 * v1 - 3.0 * v2 + v3) / h)
    }
}
