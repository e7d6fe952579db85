//! Synthetic Cauchy data: fine-mesh forward solves, restriction of the traces
//! to the reconstruction mesh, and multiplicative uniform noise.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsm::BoundaryData;
use crate::error::{DsmError, Result};
use crate::geometry::{
    boundary_trace, build_grid_snapped, full_boundary, BoundaryMesh, DomainGeometry, DomainKind, Gamma, Grid2D, Side,
};
use crate::pde::{solve_neumann, Inclusion, Medium, Shape};

/// Name of the noise generator, recorded in run metadata.
pub const RNG_NAME: &str = "ChaCha8";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub gamma: Vec<Side>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxPattern {
    /// Unit flux in through one measured side and out through the opposite one.
    UniformFlow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    pub medium: Medium,
    pub flux: FluxPattern,
    pub fine_h: f64,
    pub recon_h: f64,
    pub noise_level: f64,
    pub rng_seed: u64,
}

impl ExperimentConfig {
    pub fn geometry(&self) -> Result<DomainGeometry> {
        DomainGeometry::rectangle(self.domain.x, self.domain.y, &self.domain.gamma)
    }

    pub fn validate(&self) -> Result<DomainGeometry> {
        let geo = self.geometry()?;
        if !(self.fine_h > 0.0 && self.fine_h < self.recon_h && self.recon_h.is_finite()) {
            return Err(DsmError::InvalidConfig(format!(
                "need 0 < fine_h < recon_h, got {} and {}",
                self.fine_h, self.recon_h
            )));
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return Err(DsmError::InvalidConfig("noise_level must be ≥ 0".into()));
        }
        self.medium.validate(&geo, self.fine_h)?;
        Ok(geo)
    }

    pub fn fine_grid(&self) -> Result<Grid2D> {
        build_grid_snapped(self.geometry()?, self.fine_h)
    }

    pub fn recon_grid(&self) -> Result<Grid2D> {
        build_grid_snapped(self.geometry()?, self.recon_h)
    }

    /// Centers of the inclusions.
    pub fn centers(&self) -> Vec<[f64; 2]> {
        self.medium.inclusions.iter().map(|i| i.shape.center()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CauchyPair {
    /// Flux on the whole reconstruction boundary.
    pub g: BoundaryData,
    pub f: BoundaryData,
    pub f0: BoundaryData,
    /// `f − f0` before noise.
    pub fs: BoundaryData,
    pub fs_noisy: BoundaryData,
}

/// +1 on the measured side facing the positive axis, −1 on its opposite,
/// 0 elsewhere, sampled on the whole boundary of `grid`.
pub fn uniform_flow_flux(grid: &Grid2D) -> Result<BoundaryData> {
    let (low, high) = match (grid.geometry.kind, grid.geometry.gamma) {
        (DomainKind::Rectangle { .. }, Gamma::Sides(s)) => s.opposite_pair().ok_or(DsmError::WrongDomain)?,
        _ => return Err(DsmError::WrongDomain),
    };
    let mesh = Arc::new(full_boundary(grid));
    Ok(BoundaryData::from_fn(&mesh, |n| match n.side {
        Some(s) if s == high => 1.0,
        Some(s) if s == low => -1.0,
        _ => 0.0,
    }))
}

/// Linear interpolation in normalized arc length onto another discretization
/// of the same Γ.
pub fn restrict(data: &BoundaryData, target: &Arc<BoundaryMesh>) -> Result<BoundaryData> {
    let src = &data.mesh;
    if src.segments.len() != target.segments.len() {
        return Err(DsmError::MeshMismatch);
    }
    let mut out = vec![0.0; target.len()];
    for (ss, ts) in src.segments.iter().zip(&target.segments) {
        if ss.closed != ts.closed || ss.len == 0 {
            return Err(DsmError::MeshMismatch);
        }
        let s: Vec<f64> = src.nodes[ss.range()].iter().map(|n| n.s).collect();
        let v = &data.values[ss.range()];
        for k in ts.range() {
            let mut q = target.nodes[k].s / ts.length * ss.length;
            if ss.closed {
                q = q.rem_euclid(ss.length);
            } else {
                q = q.clamp(0.0, s[ss.len - 1]);
            }
            let j = s.partition_point(|x| *x <= q).saturating_sub(1);
            let (s1, v1) = if j + 1 < ss.len {
                (s[j + 1], v[j + 1])
            } else if ss.closed {
                (ss.length, v[0])
            } else {
                (s[j], v[j])
            };
            out[k] = if s1 > s[j] { v[j] + (v1 - v[j]) * (q - s[j]) / (s1 - s[j]) } else { v[j] };
        }
    }
    BoundaryData::new(target.clone(), out)
}

/// `f + ε δ max|f|` with δ i.i.d. uniform on [−1, 1].
pub fn add_noise(fs: &BoundaryData, eps: f64, seed: u64) -> BoundaryData {
    if eps == 0.0 {
        return fs.clone();
    }
    let m = fs.max_abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = fs.values.iter().map(|v| v + eps * rng.gen_range(-1.0..=1.0) * m).collect();
    BoundaryData { mesh: fs.mesh.clone(), values }
}

/// Fine-mesh traces `(f, f0)` on Γ before restriction.
pub fn fine_traces(config: &ExperimentConfig) -> Result<(BoundaryData, BoundaryData)> {
    config.validate()?;
    let fine = config.fine_grid()?;
    let g = uniform_flow_flux(&fine)?;
    let u = solve_neumann(&fine, &config.medium, Some(&g), None)?;
    let u0 = solve_neumann(&fine, &Medium::homogeneous(config.medium.mu0), Some(&g), None)?;
    let gamma = Arc::new(boundary_trace(&fine));
    Ok((u.trace(&gamma)?, u0.trace(&gamma)?))
}

pub fn synthesize(config: &ExperimentConfig) -> Result<CauchyPair> {
    let (f_fine, f0_fine) = fine_traces(config)?;
    let recon = config.recon_grid()?;
    let gamma = Arc::new(boundary_trace(&recon));
    let f = restrict(&f_fine, &gamma)?;
    let f0 = restrict(&f0_fine, &gamma)?;
    let fs = f.sub(&f0)?;
    let fs_noisy = add_noise(&fs, config.noise_level, config.rng_seed);
    Ok(CauchyPair { g: uniform_flow_flux(&recon)?, f, f0, fs, fs_noisy })
}

fn disk(c: [f64; 2]) -> Inclusion {
    Inclusion { shape: Shape::Disk { center: c, radius: 0.065 }, mu_inside: 50.0 }
}

fn rect(c: [f64; 2], width: f64, height: f64) -> Inclusion {
    Inclusion { shape: Shape::Rect { center: c, width, height }, mu_inside: 50.0 }
}

/// The five slab experiments.
pub fn example_catalog(n: u32) -> Result<ExperimentConfig> {
    let inclusions = match n {
        1 => vec![disk([-0.5, 0.25]), disk([0.25, 0.15])],
        2 => vec![disk([-0.3, 0.1]), disk([-0.3, 0.3]), disk([0.3, 0.1]), disk([0.3, 0.3])],
        3 => vec![disk([-0.5, 0.3]), disk([-0.3, 0.1]), disk([0.0, 0.3]), disk([0.3, 0.1])],
        4 => vec![rect([0.0, 0.15], 0.1, 0.2)],
        5 => vec![rect([-0.1, 0.125], 0.4, 0.05), rect([-0.1, 0.275], 0.4, 0.05)],
        _ => return Err(DsmError::UnknownExample(n)),
    };
    Ok(ExperimentConfig {
        domain: DomainSpec { x: [-1.0, 1.0], y: [0.0, 0.4], gamma: vec![Side::Top, Side::Bottom] },
        medium: Medium { mu0: 0.0, inclusions },
        flux: FluxPattern::UniformFlow,
        fine_h: 0.004,
        recon_h: 0.011,
        noise_level: 0.05,
        rng_seed: 42,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_grid;

    #[test]
    fn slab_flux_values() {
        let g = build_grid(DomainGeometry::slab(), 0.02).unwrap();
        let f = uniform_flow_flux(&g).unwrap();
        let net = f.mesh.integrate(&f.values);
        assert!(net.abs() < 1e-14, "{net}");
        for (n, v) in f.mesh.nodes.iter().zip(&f.values) {
            match n.side {
                Some(Side::Top) => assert_eq!(*v, 1.0),
                Some(Side::Bottom) => assert_eq!(*v, -1.0),
                _ => assert_eq!(*v, 0.0),
            }
        }
        let geo = DomainGeometry::rectangle([-1.0, 1.0], [0.0, 0.4], &[Side::Top]).unwrap();
        assert!(matches!(uniform_flow_flux(&build_grid(geo, 0.02).unwrap()), Err(DsmError::WrongDomain)));
    }

    #[test]
    fn catalog_entries() {
        let c = example_catalog(1).unwrap();
        assert_eq!(c.centers(), vec![[-0.5, 0.25], [0.25, 0.15]]);
        let c = example_catalog(2).unwrap();
        assert_eq!(c.centers(), vec![[-0.3, 0.1], [-0.3, 0.3], [0.3, 0.1], [0.3, 0.3]]);
        let c = example_catalog(4).unwrap();
        assert_eq!(c.medium.inclusions[0].shape, Shape::Rect { center: [0.0, 0.15], width: 0.1, height: 0.2 });
        assert!(matches!(example_catalog(9), Err(DsmError::UnknownExample(9))));
        for n in 1..=5 {
            example_catalog(n).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn noise_contract() {
        let g = build_grid(DomainGeometry::slab(), 0.02).unwrap();
        let mesh = Arc::new(boundary_trace(&g));
        let fs = BoundaryData::from_fn(&mesh, |n| (3.0 * n.pos[0]).sin());
        assert_eq!(add_noise(&fs, 0.0, 1), fs);
        let a = add_noise(&fs, 0.05, 42);
        assert_eq!(a, add_noise(&fs, 0.05, 42));
        assert_ne!(a, add_noise(&fs, 0.05, 43));
        let m = fs.max_abs();
        assert!(a.values.iter().zip(&fs.values).all(|(x, y)| (x - y).abs() <= 0.05 * m));
    }

    #[test]
    fn restriction_reproduces_linear_data() {
        let fine = build_grid(DomainGeometry::slab(), 0.004).unwrap();
        let coarse = build_grid_snapped(DomainGeometry::slab(), 0.011).unwrap();
        let fm = Arc::new(boundary_trace(&fine));
        let cm = Arc::new(boundary_trace(&coarse));
        let d = BoundaryData::from_fn(&fm, |n| 2.0 * n.pos[0] - n.pos[1]);
        let r = restrict(&d, &cm).unwrap();
        for (n, v) in cm.nodes.iter().zip(&r.values) {
            assert!((v - (2.0 * n.pos[0] - n.pos[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let mut v = serde_json::to_value(example_catalog(1).unwrap()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(serde_json::from_value::<ExperimentConfig>(v).is_err());
        let s = serde_json::to_string(&example_catalog(5).unwrap()).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, example_catalog(5).unwrap());
    }
}
