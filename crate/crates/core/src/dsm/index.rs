use std::sync::Arc;

use rayon::prelude::*;

use super::probing::{fundamental_flux_norms, probing_eta, Provider, ProbingTable};
use super::{duality_product, eta_norms_numeric, norm_factor, surface_laplacian, BoundaryData};
use crate::error::{DsmError, Result};
use crate::geometry::{boundary_trace, full_boundary, BoundaryMesh, Grid2D, Side};
use crate::pde::{solve_mixed, solve_neumann, Field, Inclusion, Medium, Shape, Source};
use crate::synthesis::{synthesize, DomainSpec, ExperimentConfig, FluxPattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    I,
    IViaPhi,
    Modified,
    ModifiedSquared,
}

/// Index values on a sampling grid, normalized to max 1. Inactive nodes
/// (boundary, outside the disk) hold zero.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMap {
    pub grid: Grid2D,
    pub values: Vec<f64>,
    pub active: Vec<bool>,
    pub kind: IndexKind,
    /// The raw map was identically zero, so no normalization took place.
    pub degenerate: bool,
}

impl IndexMap {
    /// `|raw| / max |raw|`, squared afterwards for [`IndexKind::ModifiedSquared`].
    pub fn from_raw(grid: &Grid2D, raw: &[f64], active: Vec<bool>, kind: IndexKind) -> Self {
        let m = raw.iter().zip(&active).filter(|(_, a)| **a).fold(0.0f64, |m, (v, _)| m.max(v.abs()));
        let degenerate = !(m > 0.0 && m.is_finite());
        let values = raw
            .iter()
            .zip(&active)
            .map(|(v, a)| {
                if degenerate || !*a {
                    0.0
                } else {
                    let n = v.abs() / m;
                    if kind == IndexKind::ModifiedSquared {
                        n * n
                    } else {
                        n
                    }
                }
            })
            .collect();
        IndexMap { grid: grid.clone(), values, active, kind, degenerate }
    }

    /// Pointwise mean of maps on one grid, renormalized to max 1.
    pub fn average(maps: &[IndexMap]) -> Result<IndexMap> {
        let first = maps.first().ok_or_else(|| DsmError::InvalidConfig("no maps to average".into()))?;
        if maps.iter().any(|m| m.grid != first.grid) {
            return Err(DsmError::MeshMismatch);
        }
        let mean: Vec<f64> = (0..first.values.len())
            .map(|k| maps.iter().map(|m| m.values[k]).sum::<f64>() / maps.len() as f64)
            .collect();
        let mut out = IndexMap::from_raw(&first.grid, &mean, first.active.clone(), IndexKind::Modified);
        out.kind = first.kind;
        Ok(out)
    }

    pub fn argmax(&self) -> Option<[f64; 2]> {
        (0..self.values.len())
            .filter(|&k| self.active[k])
            .max_by(|&a, &b| self.values[a].total_cmp(&self.values[b]))
            .filter(|_| !self.degenerate)
            .map(|k| self.grid.node(k))
    }

    /// Active nodes above `threshold` that dominate their eight neighbours,
    /// strongest first. Ties go to the node with the smaller index.
    pub fn local_maxima(&self, threshold: f64) -> Vec<[f64; 2]> {
        let g = &self.grid;
        let mut found: Vec<(f64, usize)> = Vec::new();
        for k in 0..self.values.len() {
            let v = self.values[k];
            if !self.active[k] || v <= threshold {
                continue;
            }
            let (i, j) = g.ij(k);
            let mut is_max = true;
            'nb: for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= g.nx as i64 || nj >= g.ny as i64 {
                        continue;
                    }
                    let q = g.index(ni as usize, nj as usize);
                    if self.values[q] > v || (self.values[q] == v && q < k) {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                found.push((v, k));
            }
        }
        found.sort_by(|a, b| b.0.total_cmp(&a.0));
        found.into_iter().map(|(_, k)| g.node(k)).collect()
    }

    /// Coordinates of active nodes with value at least `threshold`.
    pub fn superlevel(&self, threshold: f64) -> Vec<[f64; 2]> {
        (0..self.values.len())
            .filter(|&k| self.active[k] && self.values[k] >= threshold)
            .map(|k| self.grid.node(k))
            .collect()
    }
}

/// True when `found` and `truth` have equal size and pair up one-to-one
/// within distance `tol`.
pub fn match_centers(found: &[[f64; 2]], truth: &[[f64; 2]], tol: f64) -> bool {
    fn rec(found: &[[f64; 2]], truth: &[[f64; 2]], used: &mut Vec<bool>, tol: f64) -> bool {
        let Some((p, rest)) = found.split_first() else { return true };
        for (t, c) in truth.iter().enumerate() {
            if !used[t] && (p[0] - c[0]).hypot(p[1] - c[1]) <= tol {
                used[t] = true;
                if rec(rest, truth, used, tol) {
                    return true;
                }
                used[t] = false;
            }
        }
        false
    }
    found.len() == truth.len() && rec(found, truth, &mut vec![false; truth.len()], tol)
}

fn sampling_nodes(grid: &Grid2D) -> Vec<bool> {
    (0..grid.len()).map(|k| grid.is_sampling_node(k)).collect()
}

/// Per sampling node: `⟨η_x, fs⟩₁` and the norm factor `|η_x|^{1/2}_{H¹}|η_x|^{3/4}_{H⁰}`.
pub fn duality_map(
    fs: &BoundaryData,
    sampling: &Grid2D,
    provider: Provider,
    mu0: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<bool>)> {
    fs.mesh.check_stencils()?;
    let active = sampling_nodes(sampling);
    let table = if provider == Provider::FdSolve {
        if *sampling != fs.mesh.grid {
            return Err(DsmError::MeshMismatch);
        }
        Some(ProbingTable::build(&fs.mesh, mu0)?)
    } else {
        None
    };
    let pairs = (0..sampling.len())
        .into_par_iter()
        .map(|k| {
            if !active[k] {
                return Ok((0.0, 0.0));
            }
            let eta = match &table {
                Some(t) => t.eta(k),
                None => probing_eta(sampling.node(k), &fs.mesh, mu0, provider)?,
            };
            let (h0, h1) = eta_norms_numeric(&eta)?;
            Ok((duality_product(fs, &eta, 1)?, norm_factor(h0, h1)))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (num, fac) = pairs.into_iter().unzip();
    Ok((num, fac, active))
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        0.0
    }
}

/// I(x) = ⟨η_x, fs⟩₁ / (|η_x|^{1/2}_{H¹} |η_x|^{3/4}_{H⁰}).
pub fn index_i(fs: &BoundaryData, sampling: &Grid2D, provider: Provider, mu0: f64) -> Result<IndexMap> {
    let (num, fac, active) = duality_map(fs, sampling, provider, mu0)?;
    let raw: Vec<f64> = num.iter().zip(&fac).map(|(a, b)| ratio(*a, *b)).collect();
    Ok(IndexMap::from_raw(sampling, &raw, active, IndexKind::I))
}

/// φ with φ = Δ_Γ fs on Γ, zero flux elsewhere, −Δφ + μ₀φ = 0 inside.
pub fn solve_phi(fs: &BoundaryData, grid: &Grid2D, mu0: f64) -> Result<Field> {
    if fs.mesh.grid != *grid {
        return Err(DsmError::MeshMismatch);
    }
    solve_mixed(grid, mu0, &surface_laplacian(fs)?, None)
}

/// The index with its numerator replaced by φ(x).
pub fn index_i_via_phi(fs: &BoundaryData, sampling: &Grid2D, provider: Provider, mu0: f64) -> Result<IndexMap> {
    let phi = solve_phi(fs, sampling, mu0)?;
    let (_, fac, active) = duality_map(fs, sampling, provider, mu0)?;
    let raw: Vec<f64> = phi.values.iter().zip(&fac).map(|(a, b)| ratio(*a, *b)).collect();
    Ok(IndexMap::from_raw(sampling, &raw, active, IndexKind::IViaPhi))
}

/// Unnormalized Ĩ(x) = φ(x)/(‖φ‖∞ + |φ(x)|) / (h1^{1/2} h0^{3/4}) with the
/// norms of the fundamental-solution flux; ‖φ‖∞ runs over the sampling nodes.
pub fn modified_raw(phi: &Field, gamma: &BoundaryMesh, mu0: f64) -> Result<(Vec<f64>, Vec<bool>)> {
    let grid = &phi.grid;
    let active = sampling_nodes(grid);
    let sup = phi.values.iter().zip(&active).filter(|(_, a)| **a).fold(0.0f64, |m, (v, _)| m.max(v.abs()));
    if sup == 0.0 {
        return Ok((vec![0.0; grid.len()], active));
    }
    let raw = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if !active[k] {
                return Ok(0.0);
            }
            let p = phi.values[k];
            let (h0, h1) = fundamental_flux_norms(grid.node(k), gamma, mu0)?;
            Ok(ratio(p / (sup + p.abs()), norm_factor(h0, h1)))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((raw, active))
}

pub fn modified_index(
    phi: &Field,
    sampling: &Grid2D,
    gamma: &BoundaryMesh,
    mu0: f64,
    square: bool,
) -> Result<IndexMap> {
    if phi.grid != *sampling {
        return Err(DsmError::MeshMismatch);
    }
    let (raw, active) = modified_raw(phi, gamma, mu0)?;
    let kind = if square { IndexKind::ModifiedSquared } else { IndexKind::Modified };
    Ok(IndexMap::from_raw(sampling, &raw, active, kind))
}

/// Point-inclusion experiment for the modified index.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSetup {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub gamma: Vec<Side>,
    pub mu0: f64,
    pub mu1: f64,
    /// Inclusion radius in fine cells.
    pub radius_cells: f64,
    pub fine_h: f64,
    pub recon_h: f64,
}

impl Default for KernelSetup {
    fn default() -> Self {
        KernelSetup {
            x: [0.0, 1.0],
            y: [-1.0, 1.0],
            gamma: vec![Side::Left, Side::Right],
            mu0: 0.0,
            mu1: 50.0,
            radius_cells: 2.0,
            fine_h: 0.004,
            recon_h: 0.011,
        }
    }
}

impl KernelSetup {
    pub fn config(&self, z: [f64; 2]) -> ExperimentConfig {
        ExperimentConfig {
            domain: DomainSpec { x: self.x, y: self.y, gamma: self.gamma.clone() },
            medium: Medium {
                mu0: self.mu0,
                inclusions: vec![Inclusion {
                    shape: Shape::Disk { center: z, radius: self.radius_cells * self.fine_h },
                    mu_inside: self.mu0 + self.mu1,
                }],
            },
            flux: FluxPattern::UniformFlow,
            fine_h: self.fine_h,
            recon_h: self.recon_h,
            noise_level: 0.0,
            rng_seed: 0,
        }
    }
}

/// K̃(·, z): the modified index of noise-free data from a small disk at `z`.
pub fn kernel_ktilde(z: [f64; 2], setup: &KernelSetup) -> Result<IndexMap> {
    let config = setup.config(z);
    let pair = synthesize(&config)?;
    let grid = config.recon_grid()?;
    let phi = solve_phi(&pair.fs, &grid, setup.mu0)?;
    modified_index(&phi, &grid, &pair.fs.mesh, setup.mu0, false)
}

/// K(·, z) on a rectangle: the index of the Neumann function G_z traced on Γ,
/// everything by finite differences on `grid` (μ₀ = 0).
pub fn kernel_k_fd(z: [f64; 2], grid: &Grid2D) -> Result<IndexMap> {
    let full = Arc::new(full_boundary(grid));
    let g = BoundaryData::from_fn(&full, |_| -1.0 / full.total_length());
    let gz = solve_neumann(grid, &Medium::homogeneous(0.0), Some(&g), Some(&Source::Point(z)))?;
    let gamma = Arc::new(boundary_trace(grid));
    index_i(&gz.trace(&gamma)?, grid, Provider::FdSolve, 0.0)
}
