//! Five-point finite differences for −Δu + μu = source on rectangles, with
//! Neumann, Dirichlet and mixed boundary conditions, solved by preconditioned CG.
//!
//! The operator is assembled in symmetric (finite-volume) form: row `p` equals
//! the ghost-node central scheme multiplied by the node's control-volume area,
//! so reactions at Dirichlet nodes divided by the boundary weight are the
//! discrete outward fluxes.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dsm::BoundaryData;
use crate::error::{DsmError, Result};
use crate::geometry::{full_boundary, BoundaryMesh, DomainGeometry, Grid2D};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    Disk { center: [f64; 2], radius: f64 },
    Rect { center: [f64; 2], width: f64, height: f64 },
}

impl Shape {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        const EPS: f64 = 1e-12;
        match *self {
            Shape::Disk { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) <= radius + EPS,
            Shape::Rect { center, width, height } => {
                (p[0] - center[0]).abs() <= 0.5 * width + EPS && (p[1] - center[1]).abs() <= 0.5 * height + EPS
            }
        }
    }

    pub fn center(&self) -> [f64; 2] {
        match *self {
            Shape::Disk { center, .. } | Shape::Rect { center, .. } => center,
        }
    }

    /// Smallest distance from the shape to the domain boundary (negative if it pokes out).
    fn clearance(&self, geometry: &DomainGeometry) -> f64 {
        match *self {
            Shape::Disk { center, radius } => geometry.inner_distance(center) - radius,
            Shape::Rect { center, width, height } => {
                let (a, b) = (0.5 * width, 0.5 * height);
                [[-a, -b], [a, -b], [a, b], [-a, b]]
                    .iter()
                    .map(|d| geometry.inner_distance([center[0] + d[0], center[1] + d[1]]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            Shape::Disk { center, radius } => center.iter().all(|c| c.is_finite()) && radius > 0.0,
            Shape::Rect { center, width, height } => {
                center.iter().all(|c| c.is_finite()) && width > 0.0 && height > 0.0
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inclusion {
    pub shape: Shape,
    pub mu_inside: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Medium {
    pub mu0: f64,
    #[serde(default)]
    pub inclusions: Vec<Inclusion>,
}

impl Medium {
    pub fn homogeneous(mu0: f64) -> Self {
        Medium { mu0, inclusions: Vec::new() }
    }

    pub fn mu_at(&self, p: [f64; 2]) -> f64 {
        self.inclusions.iter().rev().find(|inc| inc.shape.contains(p)).map_or(self.mu0, |inc| inc.mu_inside)
    }

    /// Coefficients and placement, against a grid with spacing `h`.
    pub fn validate(&self, geometry: &DomainGeometry, h: f64) -> Result<()> {
        if !(self.mu0 >= 0.0 && self.mu0.is_finite()) {
            return Err(DsmError::InvalidMedium(format!("background coefficient {} must be ≥ 0", self.mu0)));
        }
        for (k, inc) in self.inclusions.iter().enumerate() {
            if !(inc.mu_inside >= 0.0 && inc.mu_inside.is_finite()) {
                return Err(DsmError::InvalidMedium(format!("inclusion {k}: coefficient must be ≥ 0")));
            }
            if !inc.shape.is_valid() {
                return Err(DsmError::InvalidMedium(format!("inclusion {k}: degenerate shape")));
            }
            if inc.shape.clearance(geometry) < h * (1.0 - 1e-9) {
                return Err(DsmError::InvalidMedium(format!(
                    "inclusion {k} is closer than one cell to the boundary"
                )));
            }
        }
        Ok(())
    }

    pub fn sample(&self, grid: &Grid2D) -> Vec<f64> {
        (0..grid.len()).map(|k| self.mu_at(grid.node(k))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Grid2D) -> Self {
        Field { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: &Grid2D, f: impl Fn([f64; 2]) -> f64) -> Self {
        Field { grid: grid.clone(), values: (0..grid.len()).map(|k| f(grid.node(k))).collect() }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Values at the nodes of a boundary mesh built on the same grid.
    pub fn trace(&self, mesh: &Arc<BoundaryMesh>) -> Result<BoundaryData> {
        if mesh.grid != self.grid {
            return Err(DsmError::MeshMismatch);
        }
        let values = mesh
            .nodes
            .iter()
            .map(|n| n.grid_index.map(|g| self.values[g]).ok_or(DsmError::MeshMismatch))
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundaryData { mesh: mesh.clone(), values })
    }
}

pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *vals.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
            last = Some((r, c));
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            y[r] = (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.vals[k] * x[self.cols[k]]).sum();
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .find(|&k| self.cols[k] == r)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }
}

/// Null vector of a semidefinite system and the functional fixing the gauge.
#[derive(Debug, Clone, Copy)]
pub struct NullSpace<'a> {
    pub vector: &'a [f64],
    /// The solution is shifted along `vector` until `gauge · x = 0`.
    pub gauge: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    /// Defaults to `20·√n`.
    pub max_iter: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iter: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_out(v: &mut [f64], n: &[f64], nn: f64) {
    let c = dot(v, n) / nn;
    v.iter_mut().zip(n).for_each(|(x, y)| *x -= c * y);
}

/// Jacobi-preconditioned conjugate gradients. Rows with a zero diagonal are
/// treated as eliminated unknowns and stay zero.
pub fn linear_solve(
    op: &dyn LinearOperator,
    rhs: &[f64],
    opts: SolveOptions,
    null: Option<NullSpace<'_>>,
) -> Result<Solution> {
    let n = op.dim();
    let max_iter = opts.max_iter.unwrap_or_else(|| (20.0 * (n as f64).sqrt()).ceil() as usize);
    let mut b = rhs.to_vec();
    let nn = null.map(|ns| dot(ns.vector, ns.vector));
    if let (Some(ns), Some(nn)) = (null, nn) {
        let bn = dot(&b, &b).sqrt();
        let net = dot(&b, ns.vector);
        if net.abs() > 1e-8 * nn.sqrt() * bn {
            return Err(DsmError::IncompatibleFlux { net, scale: nn.sqrt() * bn });
        }
        project_out(&mut b, ns.vector, nn);
    }
    let inv_d: Vec<f64> = op.diagonal().iter().map(|&d| if d != 0.0 { 1.0 / d } else { 0.0 }).collect();
    let bnorm = dot(&b, &b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(Solution { x, iterations: 0, residual: 0.0 });
    }
    let mut r = b;
    let mut z: Vec<f64> = r.iter().zip(&inv_d).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = 1.0;
    for it in 1..=max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(DsmError::SolverDivergence { iterations: it, residual: res });
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        if let (Some(ns), Some(nn)) = (null, nn) {
            project_out(&mut r, ns.vector, nn);
        }
        res = dot(&r, &r).sqrt() / bnorm;
        if res <= opts.tol {
            if let Some(ns) = null {
                let c = dot(ns.gauge, &x) / dot(ns.gauge, ns.vector);
                x.iter_mut().zip(ns.vector).for_each(|(a, v)| *a -= c * v);
            }
            return Ok(Solution { x, iterations: it, residual: res });
        }
        for k in 0..n {
            z[k] = r[k] * inv_d[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(DsmError::SolverDivergence { iterations: max_iter, residual: res })
}

/// Matrix-free −Δ + μ on a rectangle grid; rows flagged `fixed` are eliminated.
#[derive(Debug, Clone)]
pub struct FdOperator {
    pub grid: Grid2D,
    pub mu: Vec<f64>,
    pub fixed: Vec<bool>,
}

impl FdOperator {
    pub fn new(grid: &Grid2D, mu: Vec<f64>) -> Self {
        FdOperator { grid: grid.clone(), fixed: vec![false; grid.len()], mu }
    }

    fn axis_weight(i: usize, n: usize) -> f64 {
        if i == 0 || i + 1 == n {
            0.5
        } else {
            1.0
        }
    }

    /// Control-volume area of a node.
    pub fn area(&self, k: usize) -> f64 {
        let g = &self.grid;
        let (i, j) = g.ij(k);
        g.hx * g.hy * Self::axis_weight(i, g.nx) * Self::axis_weight(j, g.ny)
    }

    pub fn areas(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|k| self.area(k)).collect()
    }

    /// Unmasked product `y = M x` over all nodes.
    pub fn apply_full(&self, x: &[f64], y: &mut [f64]) {
        let g = &self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let rx = g.hy / g.hx;
        let ry = g.hx / g.hy;
        for j in 0..ny {
            let ay = Self::axis_weight(j, ny);
            for i in 0..nx {
                let ax = Self::axis_weight(i, nx);
                let k = j * nx + i;
                let xk = x[k];
                let cx = rx * ay;
                let cy = ry * ax;
                let mut acc = self.mu[k] * g.hx * g.hy * ax * ay * xk;
                if i > 0 {
                    acc += cx * (xk - x[k - 1]);
                }
                if i + 1 < nx {
                    acc += cx * (xk - x[k + 1]);
                }
                if j > 0 {
                    acc += cy * (xk - x[k - nx]);
                }
                if j + 1 < ny {
                    acc += cy * (xk - x[k + nx]);
                }
                y[k] = acc;
            }
        }
    }

    fn full_diagonal(&self) -> Vec<f64> {
        let g = &self.grid;
        (0..g.len())
            .map(|k| {
                let (i, j) = g.ij(k);
                let ax = Self::axis_weight(i, g.nx);
                let ay = Self::axis_weight(j, g.ny);
                let nbx = (i > 0) as usize + (i + 1 < g.nx) as usize;
                let nby = (j > 0) as usize + (j + 1 < g.ny) as usize;
                nbx as f64 * (g.hy / g.hx) * ay + nby as f64 * (g.hx / g.hy) * ax + self.mu[k] * g.hx * g.hy * ax * ay
            })
            .collect()
    }
}

impl LinearOperator for FdOperator {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_full(x, y);
        for (v, f) in y.iter_mut().zip(&self.fixed) {
            if *f {
                *v = 0.0;
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let mut d = self.full_diagonal();
        for (v, f) in d.iter_mut().zip(&self.fixed) {
            if *f {
                *v = 0.0;
            }
        }
        d
    }
}

/// Right-hand side terms beyond boundary data.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// Unit point load at the node nearest to the point.
    Point([f64; 2]),
    /// Volume density sampled at every grid node.
    Density(Vec<f64>),
}

fn require_rectangle(grid: &Grid2D) -> Result<()> {
    if grid.is_rectangle() && grid.nx >= 2 && grid.ny >= 2 {
        Ok(())
    } else {
        Err(DsmError::WrongDomain)
    }
}

fn add_source(op: &FdOperator, source: Option<&Source>, b: &mut [f64]) -> Result<Option<usize>> {
    match source {
        None => Ok(None),
        Some(Source::Point(p)) => {
            if !op.grid.geometry.contains(*p) {
                return Err(DsmError::PointOutsideDomain(p[0], p[1]));
            }
            let (i, j) = op.grid.nearest(*p);
            let k = op.grid.index(i, j);
            b[k] += 1.0;
            Ok(Some(k))
        }
        Some(Source::Density(s)) => {
            if s.len() != b.len() {
                return Err(DsmError::MeshMismatch);
            }
            for (k, v) in s.iter().enumerate() {
                b[k] += v * op.area(k);
            }
            Ok(None)
        }
    }
}

/// Neumann load vector: each edge node receives its flux times the boundary
/// length of its control volume. At a corner the owning side supplies one
/// direction, the next node along the other side supplies the other.
fn neumann_load(grid: &Grid2D, g: &BoundaryData, b: &mut [f64]) -> Result<()> {
    if g.mesh.grid.nx != grid.nx || g.mesh.grid.ny != grid.ny || g.mesh.grid.origin != grid.origin {
        return Err(DsmError::MeshMismatch);
    }
    let by_node: HashMap<usize, f64> =
        g.mesh.nodes.iter().zip(&g.values).filter_map(|(n, v)| n.grid_index.map(|k| (k, *v))).collect();
    let (nx, ny) = (grid.nx, grid.ny);
    let value = |i: usize, j: usize| by_node.get(&grid.index(i, j)).copied().unwrap_or(0.0);
    for j in 0..ny {
        for i in 0..nx {
            let horiz = j == 0 || j + 1 == ny;
            let vert = i == 0 || i + 1 == nx;
            if !horiz && !vert {
                continue;
            }
            let ax = FdOperator::axis_weight(i, nx);
            let ay = FdOperator::axis_weight(j, ny);
            let own = value(i, j);
            let k = grid.index(i, j);
            match (horiz, vert) {
                (true, false) => b[k] += own * grid.hx * ax,
                (false, true) => b[k] += own * grid.hy * ay,
                _ => {
                    let owner_horizontal = grid.owner_side(i, j).is_none_or(|s| s.is_horizontal());
                    let jn = if j == 0 { 1.min(ny - 1) } else { ny.saturating_sub(2) };
                    let in_ = if i == 0 { 1.min(nx - 1) } else { nx.saturating_sub(2) };
                    let (gh, gv) = if owner_horizontal {
                        (own, if ny > 2 { value(i, jn) } else { own })
                    } else {
                        (if nx > 2 { value(in_, j) } else { own }, own)
                    };
                    b[k] += gh * grid.hx * ax + gv * grid.hy * ay;
                }
            }
        }
    }
    Ok(())
}

/// Trapezoid weights of the full boundary as a per-node vector (zero inside).
pub fn boundary_gauge(grid: &Grid2D) -> Vec<f64> {
    let mesh = full_boundary(grid);
    let mut w = vec![0.0; grid.len()];
    for n in &mesh.nodes {
        if let Some(k) = n.grid_index {
            w[k] = n.weight;
        }
    }
    w
}

/// −Δu + μu = source with ∂u/∂ν = g on the whole boundary. When μ vanishes
/// identically the solution is the representative with zero boundary mean.
pub fn solve_neumann(
    grid: &Grid2D,
    medium: &Medium,
    g: Option<&BoundaryData>,
    source: Option<&Source>,
) -> Result<Field> {
    solve_neumann_with(grid, medium, g, source, SolveOptions::default())
}

pub fn solve_neumann_with(
    grid: &Grid2D,
    medium: &Medium,
    g: Option<&BoundaryData>,
    source: Option<&Source>,
    opts: SolveOptions,
) -> Result<Field> {
    require_rectangle(grid)?;
    let op = FdOperator::new(grid, medium.sample(grid));
    let mut b = vec![0.0; grid.len()];
    if let Some(g) = g {
        neumann_load(grid, g, &mut b)?;
    }
    add_source(&op, source, &mut b)?;
    let singular = op.mu.iter().all(|m| *m == 0.0);
    let sol = if singular {
        let ones = vec![1.0; grid.len()];
        let gauge = boundary_gauge(grid);
        linear_solve(&op, &b, opts, Some(NullSpace { vector: &ones, gauge: &gauge }))?
    } else {
        linear_solve(&op, &b, opts, None)?
    };
    Ok(Field { grid: grid.clone(), values: sol.x })
}

/// Dirichlet data on the Γ nodes of `dirichlet.mesh`, zero flux on the rest of
/// the boundary, constant coefficient `mu0`.
pub fn solve_mixed(
    grid: &Grid2D,
    mu0: f64,
    dirichlet: &BoundaryData,
    source: Option<[f64; 2]>,
) -> Result<Field> {
    solve_mixed_with(grid, &vec![mu0; grid.len()], dirichlet, source.map(Source::Point).as_ref(), SolveOptions::default())
}

pub fn solve_mixed_with(
    grid: &Grid2D,
    mu: &[f64],
    dirichlet: &BoundaryData,
    source: Option<&Source>,
    opts: SolveOptions,
) -> Result<Field> {
    require_rectangle(grid)?;
    if dirichlet.mesh.grid.nx != grid.nx || dirichlet.mesh.grid.ny != grid.ny {
        return Err(DsmError::MeshMismatch);
    }
    let mut op = FdOperator::new(grid, mu.to_vec());
    let mut ud = vec![0.0; grid.len()];
    for (n, v) in dirichlet.mesh.nodes.iter().zip(&dirichlet.values) {
        let k = n.grid_index.ok_or(DsmError::MeshMismatch)?;
        if !v.is_finite() {
            return Err(DsmError::InvalidConfig("non-finite Dirichlet data".into()));
        }
        op.fixed[k] = true;
        ud[k] = *v;
    }
    let mut b = vec![0.0; grid.len()];
    op.apply_full(&ud, &mut b);
    b.iter_mut().for_each(|v| *v = -*v);
    if let Some(k) = add_source(&op, source, &mut b)? {
        if op.fixed[k] {
            let p = grid.node(k);
            return Err(DsmError::SourceOnBoundary(p[0], p[1]));
        }
    }
    for (v, f) in b.iter_mut().zip(&op.fixed) {
        if *f {
            *v = 0.0;
        }
    }
    let sol = linear_solve(&op, &b, opts, None)?;
    let values = sol.x.iter().zip(&ud).zip(&op.fixed).map(|((x, d), f)| if *f { *d } else { *x }).collect();
    Ok(Field { grid: grid.clone(), values })
}

/// Discrete outward flux of `w` through the Γ nodes of `mesh`: the operator
/// reaction at each node divided by its quadrature weight. Valid where the
/// right-hand side vanishes at the Γ nodes.
pub fn reaction_flux(w: &Field, mu: &[f64], mesh: &Arc<BoundaryMesh>) -> Result<BoundaryData> {
    let op = FdOperator::new(&w.grid, mu.to_vec());
    let mut r = vec![0.0; w.grid.len()];
    op.apply_full(&w.values, &mut r);
    let values = mesh
        .nodes
        .iter()
        .map(|n| n.grid_index.map(|k| r[k] / n.weight).ok_or(DsmError::MeshMismatch))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundaryData { mesh: mesh.clone(), values })
}
