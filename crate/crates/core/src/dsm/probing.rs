use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use super::BoundaryData;
use crate::error::{DsmError, Result};
use crate::geometry::{BoundaryMesh, DomainKind, GammaPiece};
use crate::kernels::{
    bessel_coeff_ratio, bessel_k0, bessel_k1, disk_poisson_eta, fourier_order, RectSetup, DEFAULT_IMAGES,
};
use crate::pde::{solve_mixed_with, SolveOptions, Source};

/// How the probing flux η_x on Γ is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provider {
    /// Poisson kernel or its absorbing-disk series.
    DiskAnalytic,
    /// Strip closed form with images, μ₀ = 0 rectangles measured on opposite sides.
    RectImages,
    /// Reaction flux of the finite-difference mixed problem.
    FdSolve,
}

fn check_interior(mesh: &BoundaryMesh, x: [f64; 2]) -> Result<()> {
    let geo = &mesh.grid.geometry;
    if !geo.contains(x) {
        return Err(DsmError::PointOutsideDomain(x[0], x[1]));
    }
    if let DomainKind::Rectangle { .. } = geo.kind {
        if geo.inner_distance(x) < mesh.grid.h_min() * (1.0 - 1e-9) {
            return Err(DsmError::PointTooCloseToBoundary(x[0], x[1]));
        }
    }
    Ok(())
}

fn disk_eta(x: [f64; 2], mesh: &Arc<BoundaryMesh>, mu0: f64) -> Result<BoundaryData> {
    if mesh.grid.is_rectangle() {
        return Err(DsmError::UnsupportedProvider("disk provider on a rectangle".into()));
    }
    if mu0 == 0.0 {
        let values = mesh
            .nodes
            .iter()
            .map(|n| disk_poisson_eta(x, n.pos[1].atan2(n.pos[0])))
            .collect::<Result<Vec<_>>>()?;
        return Ok(BoundaryData { mesh: mesh.clone(), values });
    }
    let r = x[0].hypot(x[1]);
    if r >= 1.0 - 1e-12 {
        return Err(DsmError::PointOnBoundary(x[0], x[1]));
    }
    let t = mu0.sqrt();
    let tx = x[1].atan2(x[0]);
    let n_max = fourier_order(r);
    let ratios = (0..=n_max as i64).map(|n| bessel_coeff_ratio(n, t, r)).collect::<Result<Vec<_>>>()?;
    let values = mesh
        .nodes
        .iter()
        .map(|nd| {
            let p = nd.pos[1].atan2(nd.pos[0]) - tx;
            let s: f64 = ratios.iter().enumerate().skip(1).map(|(n, c)| 2.0 * c * (n as f64 * p).cos()).sum();
            (ratios[0] + s) / (2.0 * PI)
        })
        .collect();
    Ok(BoundaryData { mesh: mesh.clone(), values })
}

/// η_x sampled on the nodes of `mesh` (Γ) by the chosen provider.
pub fn probing_eta(x: [f64; 2], mesh: &Arc<BoundaryMesh>, mu0: f64, provider: Provider) -> Result<BoundaryData> {
    check_interior(mesh, x)?;
    match provider {
        Provider::DiskAnalytic => disk_eta(x, mesh, mu0),
        Provider::RectImages => {
            if mu0 != 0.0 {
                return Err(DsmError::UnsupportedProvider("image series needs μ₀ = 0".into()));
            }
            let setup = RectSetup::from_grid(&mesh.grid)?;
            let values =
                mesh.nodes.iter().map(|n| setup.eta(x, n.pos, DEFAULT_IMAGES)).collect::<Result<Vec<_>>>()?;
            Ok(BoundaryData { mesh: mesh.clone(), values })
        }
        Provider::FdSolve => {
            let grid = &mesh.grid;
            let mu = vec![mu0; grid.len()];
            let w = solve_mixed_with(grid, &mu, &BoundaryData::zeros(mesh), Some(&Source::Point(x)), SolveOptions::default())?;
            crate::pde::reaction_flux(&w, &mu, mesh)
        }
    }
}

/// Probing fluxes of every grid node at once. By discrete reciprocity
/// η_x(y) = −u_y(x)/ω_y, where u_y is the mixed solution with Dirichlet data
/// equal to one at the Γ node y and zero at the other Γ nodes.
#[derive(Debug, Clone)]
pub struct ProbingTable {
    pub mesh: Arc<BoundaryMesh>,
    columns: Vec<Vec<f64>>,
}

impl ProbingTable {
    pub fn build(mesh: &Arc<BoundaryMesh>, mu0: f64) -> Result<Self> {
        let grid = &mesh.grid;
        let mu = vec![mu0; grid.len()];
        let columns = (0..mesh.len())
            .into_par_iter()
            .map(|m| {
                let mut d = BoundaryData::zeros(mesh);
                d.values[m] = 1.0;
                let u = solve_mixed_with(grid, &mu, &d, None, SolveOptions { tol: 1e-12, max_iter: None })?;
                let w = mesh.nodes[m].weight;
                Ok(u.values.iter().map(|v| -v / w).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(ProbingTable { mesh: mesh.clone(), columns })
    }

    /// η_x on Γ for the grid node `k`.
    pub fn eta(&self, k: usize) -> BoundaryData {
        BoundaryData { mesh: self.mesh.clone(), values: self.columns.iter().map(|c| c[k]).collect() }
    }
}

const GL_X: [f64; 4] = [0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363];
const GL_W: [f64; 4] = [0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];

fn gauss_legendre(a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (x, w) in GL_X.iter().zip(&GL_W) {
            sum += w * (f(c - 0.5 * h * x) + f(c + 0.5 * h * x));
        }
    }
    0.5 * h * sum
}

/// `(F'(r), F''(r))` for the radial fundamental solution of −Δ + μ₀.
fn radial_derivatives(r: f64, mu0: f64) -> (f64, f64) {
    if mu0 == 0.0 {
        (-1.0 / (2.0 * PI * r), 1.0 / (2.0 * PI * r * r))
    } else {
        let k = mu0.sqrt();
        let (k0, k1) = (bessel_k0(k * r), bessel_k1(k * r));
        (-k * k1 / (2.0 * PI), k * k / (2.0 * PI) * (k0 + k1 / (k * r)))
    }
}

const LINE_PANELS: usize = 32;
const ARC_PANELS: usize = 512;

/// `(|∂Φ_x/∂ν|_{H⁰(Γ)}, |∂Φ_x/∂ν|_{H¹(Γ)})` for the free-space fundamental
/// solution, by Gauss–Legendre quadrature over each smooth piece of Γ.
pub fn fundamental_flux_norms(x: [f64; 2], gamma: &BoundaryMesh, mu0: f64) -> Result<(f64, f64)> {
    if !(mu0 >= 0.0) {
        return Err(DsmError::InvalidMedium("μ₀ must be ≥ 0".into()));
    }
    let (mut h0, mut h1) = (0.0, 0.0);
    for piece in &gamma.pieces {
        match *piece {
            GammaPiece::Line { a, b, normal } => {
                let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                let tau = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
                let d = (a[0] - x[0]) * normal[0] + (a[1] - x[1]) * normal[1];
                let limit = if gamma.grid.is_rectangle() { gamma.grid.h_min() * (1.0 - 1e-9) } else { 1e-12 };
                if d < limit {
                    return Err(DsmError::PointTooCloseToBoundary(x[0], x[1]));
                }
                let sf = (x[0] - a[0]) * tau[0] + (x[1] - a[1]) * tau[1];
                let (ta, tb) = ((-sf / d).atan(), ((len - sf) / d).atan());
                let eval = |th: f64| {
                    let c = th.cos();
                    let r = d / c;
                    let (f1, f2) = radial_derivatives(r, mu0);
                    let g = f1 * d / r;
                    let dg = d * (f2 / r - f1 / (r * r)) * (d * th.tan()) / r;
                    (d / (c * c), g, dg)
                };
                let e0 = gauss_legendre(ta, tb, LINE_PANELS, |th| {
                    let (ds, g, _) = eval(th);
                    ds * g * g
                });
                let e1 = gauss_legendre(ta, tb, LINE_PANELS, |th| {
                    let (ds, _, dg) = eval(th);
                    ds * dg * dg
                });
                h0 += e0;
                h1 += e1;
            }
            GammaPiece::Arc { start, end } => {
                let rx = x[0].hypot(x[1]);
                if rx >= 1.0 - 1e-12 {
                    return Err(DsmError::PointTooCloseToBoundary(x[0], x[1]));
                }
                let eval = |th: f64| {
                    let y = [th.cos(), th.sin()];
                    let tau = [-y[1], y[0]];
                    let v = [y[0] - x[0], y[1] - x[1]];
                    let r = v[0].hypot(v[1]);
                    let rh = [v[0] / r, v[1] / r];
                    let (f1, f2) = radial_derivatives(r, mu0);
                    let rn = rh[0] * y[0] + rh[1] * y[1];
                    let rt = rh[0] * tau[0] + rh[1] * tau[1];
                    (f1 * rn, (f2 - f1 / r) * rt * rn + f1 * rt)
                };
                h0 += gauss_legendre(start, end, ARC_PANELS, |th| eval(th).0.powi(2));
                h1 += gauss_legendre(start, end, ARC_PANELS, |th| eval(th).1.powi(2));
            }
        }
    }
    Ok((h0.sqrt(), h1.sqrt()))
}
