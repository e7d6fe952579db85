//! Domains, tensor grids and the ordered discretization of the measurement boundary.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{DsmError, Result};

const MESH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    pub fn normal(self) -> [f64; 2] {
        match self {
            Side::Bottom => [0.0, -1.0],
            Side::Right => [1.0, 0.0],
            Side::Top => [0.0, 1.0],
            Side::Left => [-1.0, 0.0],
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Side::Bottom | Side::Top)
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Bottom => Side::Top,
            Side::Right => Side::Left,
            Side::Top => Side::Bottom,
            Side::Left => Side::Right,
        }
    }

    fn bit(self) -> u8 {
        match self {
            Side::Bottom => 1,
            Side::Right => 2,
            Side::Top => 4,
            Side::Left => 8,
        }
    }
}

/// A set of rectangle sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Sides(u8);

impl Sides {
    pub fn all() -> Self {
        Sides(15)
    }

    pub fn from_list(sides: &[Side]) -> Self {
        Sides(sides.iter().fold(0, |acc, s| acc | s.bit()))
    }

    pub fn contains(self, side: Side) -> bool {
        self.0 & side.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_all(self) -> bool {
        self.0 == 15
    }

    pub fn iter(self) -> impl Iterator<Item = Side> {
        Side::ALL.into_iter().filter(move |s| self.contains(*s))
    }

    /// `Some((low, high))` when the set is exactly one pair of opposite sides,
    /// `high` being the side whose outward normal points along the positive axis.
    pub fn opposite_pair(self) -> Option<(Side, Side)> {
        if self == Sides::from_list(&[Side::Bottom, Side::Top]) {
            Some((Side::Bottom, Side::Top))
        } else if self == Sides::from_list(&[Side::Left, Side::Right]) {
            Some((Side::Left, Side::Right))
        } else {
            None
        }
    }
}

/// Measurement part of the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    Sides(Sides),
    /// Angular interval `[start, end]` of the unit circle, radians.
    Arc { start: f64, end: f64 },
    FullCircle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    Rectangle { x: [f64; 2], y: [f64; 2] },
    UnitDisk,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainGeometry {
    pub kind: DomainKind,
    pub gamma: Gamma,
}

impl DomainGeometry {
    pub fn rectangle(x: [f64; 2], y: [f64; 2], gamma: &[Side]) -> Result<Self> {
        let g = DomainGeometry {
            kind: DomainKind::Rectangle { x, y },
            gamma: Gamma::Sides(Sides::from_list(gamma)),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn unit_disk(gamma: Gamma) -> Result<Self> {
        let g = DomainGeometry { kind: DomainKind::UnitDisk, gamma };
        g.validate()?;
        Ok(g)
    }

    /// (−1,1)×(0,0.4) measured on top and bottom.
    pub fn slab() -> Self {
        DomainGeometry {
            kind: DomainKind::Rectangle { x: [-1.0, 1.0], y: [0.0, 0.4] },
            gamma: Gamma::Sides(Sides::from_list(&[Side::Top, Side::Bottom])),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.gamma) {
            (DomainKind::Rectangle { x, y }, Gamma::Sides(s)) => {
                if !(x[1] - x[0] > 0.0 && y[1] - y[0] > 0.0) || !x.iter().chain(&y).all(|v| v.is_finite()) {
                    return Err(DsmError::InvalidGeometry("rectangle extents must be positive".into()));
                }
                if s.is_empty() {
                    return Err(DsmError::InvalidGeometry("measurement boundary is empty".into()));
                }
                Ok(())
            }
            (DomainKind::UnitDisk, Gamma::FullCircle) => Ok(()),
            (DomainKind::UnitDisk, Gamma::Arc { start, end }) => {
                let len = end - start;
                if !(len > 0.0 && len < 2.0 * PI) || !start.is_finite() {
                    return Err(DsmError::InvalidGeometry(format!(
                        "arc [{start}, {end}] must have length in (0, 2π)"
                    )));
                }
                Ok(())
            }
            _ => Err(DsmError::InvalidGeometry("measurement boundary does not match domain kind".into())),
        }
    }

    /// Bounding box `[x0, x1] × [y0, y1]`.
    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        match self.kind {
            DomainKind::Rectangle { x, y } => (x, y),
            DomainKind::UnitDisk => ([-1.0, 1.0], [-1.0, 1.0]),
        }
    }

    /// Signed distance to the boundary, positive inside.
    pub fn inner_distance(&self, p: [f64; 2]) -> f64 {
        match self.kind {
            DomainKind::Rectangle { x, y } => {
                (p[0] - x[0]).min(x[1] - p[0]).min(p[1] - y[0]).min(y[1] - p[1])
            }
            DomainKind::UnitDisk => 1.0 - p[0].hypot(p[1]),
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.inner_distance(p) > 0.0
    }
}

/// Uniform tensor grid over the domain (the bounding box for the disk).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub geometry: DomainGeometry,
    pub origin: [f64; 2],
    pub hx: f64,
    pub hy: f64,
    pub nx: usize,
    pub ny: usize,
    /// Boundary nodes per full turn on the unit disk; zero for rectangles.
    pub n_theta: usize,
}

fn cells_strict(extent: f64, h: f64, axis: char) -> Result<usize> {
    let c = extent / h;
    let r = c.round();
    if r < 1.0 || (c - r).abs() > MESH_TOL * r.max(1.0) {
        return Err(DsmError::NonConformingMesh { axis, extent, h });
    }
    Ok(r as usize)
}

fn cells_snapped(extent: f64, h: f64) -> usize {
    let c = extent / h;
    let r = c.round();
    if r >= 1.0 && (c - r).abs() <= MESH_TOL * r {
        r as usize
    } else {
        (c.ceil() as usize).max(1)
    }
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(DsmError::InvalidGeometry(format!("mesh size {h} must be positive")))
    }
}

fn assemble(geometry: DomainGeometry, h: f64, cx: usize, cy: usize) -> Grid2D {
    let (bx, by) = geometry.bounds();
    let n_theta = match geometry.kind {
        DomainKind::UnitDisk => ((2.0 * PI / h).round() as usize).max(8),
        DomainKind::Rectangle { .. } => 0,
    };
    Grid2D {
        geometry,
        origin: [bx[0], by[0]],
        hx: (bx[1] - bx[0]) / cx as f64,
        hy: (by[1] - by[0]) / cy as f64,
        nx: cx + 1,
        ny: cy + 1,
        n_theta,
    }
}

/// Grid whose spacing must divide the domain extents.
pub fn build_grid(geometry: DomainGeometry, h: f64) -> Result<Grid2D> {
    geometry.validate()?;
    check_h(h)?;
    let (bx, by) = geometry.bounds();
    let cx = cells_strict(bx[1] - bx[0], h, 'x')?;
    let cy = cells_strict(by[1] - by[0], h, 'y')?;
    Ok(assemble(geometry, h, cx, cy))
}

/// Grid with the cell count per axis rounded up when `h` does not divide the
/// extent, and the spacing rescaled per axis to fit.
pub fn build_grid_snapped(geometry: DomainGeometry, h: f64) -> Result<Grid2D> {
    geometry.validate()?;
    check_h(h)?;
    let (bx, by) = geometry.bounds();
    Ok(assemble(geometry, h, cells_snapped(bx[1] - bx[0], h), cells_snapped(by[1] - by[0], h)))
}

impl Grid2D {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn coord(&self, i: usize, j: usize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.hx, self.origin[1] + j as f64 * self.hy]
    }

    pub fn node(&self, k: usize) -> [f64; 2] {
        let (i, j) = self.ij(k);
        self.coord(i, j)
    }

    pub fn h_min(&self) -> f64 {
        self.hx.min(self.hy)
    }

    pub fn is_rectangle(&self) -> bool {
        matches!(self.geometry.kind, DomainKind::Rectangle { .. })
    }

    /// Node nearest to `p`, clamped to the grid.
    pub fn nearest(&self, p: [f64; 2]) -> (usize, usize) {
        let fi = ((p[0] - self.origin[0]) / self.hx).round();
        let fj = ((p[1] - self.origin[1]) / self.hy).round();
        let i = fi.clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = fj.clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }

    pub fn on_edge(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    /// Sampling nodes usable as interior probe locations: rectangle nodes at
    /// least one cell away from the boundary, or disk nodes with `|x| < 1`.
    pub fn is_sampling_node(&self, k: usize) -> bool {
        let (i, j) = self.ij(k);
        match self.geometry.kind {
            DomainKind::Rectangle { .. } => !self.on_edge(i, j),
            DomainKind::UnitDisk => {
                let p = self.coord(i, j);
                p[0].hypot(p[1]) < 1.0 - 1e-9
            }
        }
    }

    /// The side owning rectangle edge node `(i, j)`. Corners go to the
    /// horizontal side unless only the vertical side is measured.
    pub fn owner_side(&self, i: usize, j: usize) -> Option<Side> {
        let gamma = match self.geometry.gamma {
            Gamma::Sides(s) => s,
            _ => return None,
        };
        let horiz = if j == 0 {
            Some(Side::Bottom)
        } else if j + 1 == self.ny {
            Some(Side::Top)
        } else {
            None
        };
        let vert = if i == 0 {
            Some(Side::Left)
        } else if i + 1 == self.nx {
            Some(Side::Right)
        } else {
            None
        };
        match (horiz, vert) {
            (Some(h), Some(v)) => {
                if !gamma.contains(h) && gamma.contains(v) {
                    Some(v)
                } else {
                    Some(h)
                }
            }
            (Some(h), None) => Some(h),
            (None, Some(v)) => Some(v),
            (None, None) => None,
        }
    }
}

/// Finite-difference weights at one boundary node, at most five points.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stencil {
    pub idx: [usize; 5],
    pub w: [f64; 5],
    pub len: usize,
}

impl Stencil {
    pub fn apply(&self, v: &[f64]) -> f64 {
        (0..self.len).map(|k| self.w[k] * v[self.idx[k]]).sum()
    }
}

/// Weights for derivatives `0..=m` at `z` from nodes `x` (Fornberg's recursion).
pub fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub pos: [f64; 2],
    pub normal: [f64; 2],
    /// Arc length from the start of the node's segment.
    pub s: f64,
    pub weight: f64,
    pub segment: usize,
    pub grid_index: Option<usize>,
    pub side: Option<Side>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub len: usize,
    pub closed: bool,
    pub length: f64,
}

impl Segment {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Smooth pieces of Γ used by analytic boundary quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaPiece {
    Line { a: [f64; 2], b: [f64; 2], normal: [f64; 2] },
    /// Arc of the unit circle between angles `start < end`.
    Arc { start: f64, end: f64 },
}

/// Edge node of a rectangle that is not on Γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplementNode {
    pub grid_index: usize,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMesh {
    pub grid: Grid2D,
    pub gamma: Gamma,
    pub nodes: Vec<BoundaryNode>,
    pub segments: Vec<Segment>,
    pub complement: Vec<ComplementNode>,
    pub pieces: Vec<GammaPiece>,
    d1: Vec<Stencil>,
    d2: Vec<Stencil>,
}

impl BoundaryMesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn integrate(&self, v: &[f64]) -> f64 {
        self.nodes.iter().zip(v).map(|(n, x)| n.weight * x).sum()
    }

    pub fn check_stencils(&self) -> Result<()> {
        for (k, seg) in self.segments.iter().enumerate() {
            if seg.len < 3 {
                return Err(DsmError::SegmentTooShort { segment: k, nodes: seg.len });
            }
        }
        Ok(())
    }

    /// First (`order = 1`) or second arc-length derivative per node.
    pub fn derivative(&self, v: &[f64], order: usize) -> Result<Vec<f64>> {
        self.check_stencils()?;
        let st = match order {
            1 => &self.d1,
            2 => &self.d2,
            _ => return Err(DsmError::InvalidConfig(format!("derivative order {order}"))),
        };
        Ok(st.iter().map(|s| s.apply(v)).collect())
    }

    pub fn stencil(&self, k: usize, order: usize) -> &Stencil {
        if order == 1 {
            &self.d1[k]
        } else {
            &self.d2[k]
        }
    }

    fn finish(
        grid: Grid2D,
        gamma: Gamma,
        mut nodes: Vec<BoundaryNode>,
        segments: Vec<Segment>,
        complement: Vec<ComplementNode>,
        pieces: Vec<GammaPiece>,
    ) -> Self {
        let mut d1 = vec![Stencil::default(); nodes.len()];
        let mut d2 = vec![Stencil::default(); nodes.len()];
        for seg in &segments {
            let n = seg.len;
            let s: Vec<f64> = nodes[seg.range()].iter().map(|b| b.s).collect();
            for i in 0..n {
                let w = &mut nodes[seg.start + i];
                w.weight = if seg.closed {
                    let prev = if i == 0 { s[n - 1] - seg.length } else { s[i - 1] };
                    let next = if i + 1 == n { s[0] + seg.length } else { s[i + 1] };
                    0.5 * (next - prev)
                } else {
                    let prev = if i == 0 { s[0] } else { s[i - 1] };
                    let next = if i + 1 == n { s[n - 1] } else { s[i + 1] };
                    0.5 * (next - prev)
                };
            }
            if n < 3 {
                continue;
            }
            let closed_window = |i: usize| -> Vec<(f64, usize)> {
                let p = if n >= 5 { 5 } else { 3 } as isize;
                (-(p / 2)..=p / 2)
                    .map(|o| {
                        let j = (i as isize + o).rem_euclid(n as isize) as usize;
                        let mut t = s[j] - s[i];
                        if o > 0 && t <= 0.0 {
                            t += seg.length;
                        }
                        if o < 0 && t >= 0.0 {
                            t -= seg.length;
                        }
                        (t, seg.start + j)
                    })
                    .collect()
            };
            // open segments: central three-point stencils, one-sided at the ends
            let open_window = |i: usize, order: usize| -> Vec<(f64, usize)> {
                let p = if i == 0 || i + 1 == n { (order + 2).min(n) } else { 3 };
                let lo = i.saturating_sub(1).min(n - p);
                (lo..lo + p).map(|j| (s[j] - s[i], seg.start + j)).collect()
            };
            let stencil = |win: Vec<(f64, usize)>, order: usize| {
                let (offsets, idx): (Vec<f64>, Vec<usize>) = win.into_iter().unzip();
                let c = fd_weights(0.0, &offsets, order);
                let mut st = Stencil { len: idx.len(), ..Default::default() };
                for k in 0..idx.len() {
                    st.idx[k] = idx[k];
                    st.w[k] = c[order][k];
                }
                st
            };
            for i in 0..n {
                let (a, b) = if seg.closed {
                    (stencil(closed_window(i), 1), stencil(closed_window(i), 2))
                } else {
                    (stencil(open_window(i, 1), 1), stencil(open_window(i, 2), 2))
                };
                d1[seg.start + i] = a;
                d2[seg.start + i] = b;
            }
        }
        BoundaryMesh { grid, gamma, nodes, segments, complement, pieces, d1, d2 }
    }

    /// Uniform-angle discretization of a disk measurement boundary with `n`
    /// nodes (per full turn for the circle, in total for an arc).
    pub fn disk(gamma: Gamma, n: usize) -> Result<Self> {
        let geometry = DomainGeometry::unit_disk(gamma)?;
        let grid = build_grid_snapped(geometry, 2.0 * PI / n.max(1) as f64)?;
        Ok(Self::disk_on(grid, gamma, n))
    }

    fn disk_on(grid: Grid2D, gamma: Gamma, n: usize) -> Self {
        let (start, len, closed) = match gamma {
            Gamma::Arc { start, end } => (start, end - start, false),
            _ => (0.0, 2.0 * PI, true),
        };
        let dt = if closed { len / n as f64 } else { len / (n.max(2) - 1) as f64 };
        let nodes = (0..n)
            .map(|k| {
                let t = start + k as f64 * dt;
                let p = [t.cos(), t.sin()];
                BoundaryNode {
                    pos: p,
                    normal: p,
                    s: k as f64 * dt,
                    weight: 0.0,
                    segment: 0,
                    grid_index: None,
                    side: None,
                }
            })
            .collect();
        let seg = Segment { start: 0, len: n, closed, length: len };
        let piece = GammaPiece::Arc { start, end: start + len };
        Self::finish(grid, gamma, nodes, vec![seg], Vec::new(), vec![piece])
    }
}

/// Counter-clockwise walk over all edge nodes starting at the lower-left corner.
fn rectangle_loop(grid: &Grid2D) -> Vec<(usize, usize)> {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut out = Vec::with_capacity(2 * (nx + ny));
    out.extend((0..nx).map(|i| (i, 0)));
    out.extend((1..ny).map(|j| (nx - 1, j)));
    out.extend((0..nx - 1).rev().map(|i| (i, ny - 1)));
    out.extend((1..ny - 1).rev().map(|j| (0, j)));
    out
}

fn side_piece(grid: &Grid2D, side: Side) -> GammaPiece {
    let (bx, by) = grid.geometry.bounds();
    let (a, b) = match side {
        Side::Bottom => ([bx[0], by[0]], [bx[1], by[0]]),
        Side::Right => ([bx[1], by[0]], [bx[1], by[1]]),
        Side::Top => ([bx[1], by[1]], [bx[0], by[1]]),
        Side::Left => ([bx[0], by[1]], [bx[0], by[0]]),
    };
    GammaPiece::Line { a, b, normal: side.normal() }
}

fn trace_rectangle(grid: &Grid2D, gamma: Sides) -> BoundaryMesh {
    let mut g = grid.clone();
    g.geometry.gamma = Gamma::Sides(gamma);
    let lp = rectangle_loop(&g);
    let owners: Vec<Side> = lp.iter().map(|&(i, j)| g.owner_side(i, j).expect("edge node")).collect();
    let inside: Vec<bool> = owners.iter().map(|s| gamma.contains(*s)).collect();
    let m = lp.len();
    let all = inside.iter().all(|b| *b);
    let first = if all { 0 } else { (0..m).find(|&k| inside[k] && !inside[(k + m - 1) % m]).unwrap_or(0) };

    let mut nodes = Vec::new();
    let mut segments: Vec<Segment> = Vec::new();
    let mut complement = Vec::new();
    let mut prev: Option<[f64; 2]> = None;
    for step in 0..m {
        let k = (first + step) % m;
        let (i, j) = lp[k];
        let gi = g.index(i, j);
        if !inside[k] {
            complement.push(ComplementNode { grid_index: gi, side: owners[k] });
            prev = None;
            continue;
        }
        let p = g.coord(i, j);
        let s = match prev {
            None => {
                segments.push(Segment { start: nodes.len(), len: 0, closed: all, length: 0.0 });
                0.0
            }
            Some(q) => {
                let last: &BoundaryNode = nodes.last().expect("segment has a node");
                last.s + (p[0] - q[0]).hypot(p[1] - q[1])
            }
        };
        let seg = segments.len() - 1;
        segments[seg].len += 1;
        segments[seg].length = s;
        nodes.push(BoundaryNode {
            pos: p,
            normal: owners[k].normal(),
            s,
            weight: 0.0,
            segment: seg,
            grid_index: Some(gi),
            side: Some(owners[k]),
        });
        prev = Some(p);
    }
    if all {
        let p0 = nodes[0].pos;
        let pl = nodes[nodes.len() - 1].pos;
        segments[0].length += (p0[0] - pl[0]).hypot(p0[1] - pl[1]);
    }
    let pieces = gamma.iter().map(|s| side_piece(&g, s)).collect();
    BoundaryMesh::finish(g, Gamma::Sides(gamma), nodes, segments, complement, pieces)
}

fn trace(grid: &Grid2D, gamma: Gamma) -> BoundaryMesh {
    match (grid.geometry.kind, gamma) {
        (DomainKind::Rectangle { .. }, Gamma::Sides(s)) => trace_rectangle(grid, s),
        (_, Gamma::Arc { start, end }) => {
            let dt = 2.0 * PI / grid.n_theta as f64;
            let n = (((end - start) / dt).ceil() as usize + 1).max(3);
            BoundaryMesh::disk_on(grid.clone(), gamma, n)
        }
        _ => BoundaryMesh::disk_on(grid.clone(), Gamma::FullCircle, grid.n_theta),
    }
}

/// Γ of the grid's geometry as ordered segments with trapezoid weights.
pub fn boundary_trace(grid: &Grid2D) -> BoundaryMesh {
    trace(grid, grid.geometry.gamma)
}

/// The whole boundary as a single closed segment.
pub fn full_boundary(grid: &Grid2D) -> BoundaryMesh {
    match grid.geometry.kind {
        DomainKind::Rectangle { .. } => trace_rectangle(grid, Sides::all()),
        DomainKind::UnitDisk => trace(grid, Gamma::FullCircle),
    }
}
