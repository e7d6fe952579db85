//! The sampling method: boundary calculus on Γ, duality products, probing
//! functions and the index maps built from them.

mod index;
mod probing;

use std::sync::Arc;

pub use index::{
    duality_map, index_i, index_i_via_phi, kernel_k_fd, kernel_ktilde, match_centers, modified_index,
    modified_raw, solve_phi, IndexKind, IndexMap, KernelSetup,
};
pub use probing::{fundamental_flux_norms, probing_eta, Provider, ProbingTable};

use crate::error::{DsmError, Result};
use crate::geometry::BoundaryMesh;

/// Scalar samples on the nodes of a boundary mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub mesh: Arc<BoundaryMesh>,
    pub values: Vec<f64>,
}

impl BoundaryData {
    pub fn new(mesh: Arc<BoundaryMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(DsmError::MeshMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DsmError::InvalidConfig("boundary data must be finite".into()));
        }
        Ok(BoundaryData { mesh, values })
    }

    pub fn zeros(mesh: &Arc<BoundaryMesh>) -> Self {
        BoundaryData { mesh: mesh.clone(), values: vec![0.0; mesh.len()] }
    }

    pub fn from_fn(mesh: &Arc<BoundaryMesh>, f: impl Fn(&crate::geometry::BoundaryNode) -> f64) -> Self {
        BoundaryData { mesh: mesh.clone(), values: mesh.nodes.iter().map(f).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_mesh(&self, other: &BoundaryData) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh
    }

    pub fn scaled(&self, a: f64) -> Self {
        BoundaryData { mesh: self.mesh.clone(), values: self.values.iter().map(|v| a * v).collect() }
    }

    pub fn sub(&self, other: &BoundaryData) -> Result<Self> {
        if !self.same_mesh(other) {
            return Err(DsmError::MeshMismatch);
        }
        Ok(BoundaryData {
            mesh: self.mesh.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }
}

/// Second arc-length derivative along each segment of Γ.
pub fn surface_laplacian(d: &BoundaryData) -> Result<BoundaryData> {
    Ok(BoundaryData { mesh: d.mesh.clone(), values: d.mesh.derivative(&d.values, 2)? })
}

/// ⟨φ, ψ⟩ₛ for s = 0 (plain pairing) or s = 1 (−Δ_Γφ against ψ).
pub fn duality_product(phi: &BoundaryData, psi: &BoundaryData, s: u8) -> Result<f64> {
    if !phi.same_mesh(psi) {
        return Err(DsmError::MeshMismatch);
    }
    match s {
        0 => Ok(phi.mesh.integrate(&phi.values.iter().zip(&psi.values).map(|(a, b)| a * b).collect::<Vec<_>>())),
        1 => {
            let lap = phi.mesh.derivative(&phi.values, 2)?;
            Ok(-phi.mesh.nodes.iter().zip(&lap).zip(&psi.values).map(|((n, l), p)| n.weight * l * p).sum::<f64>())
        }
        _ => Err(DsmError::InvalidConfig(format!("duality index s = {s} is not supported"))),
    }
}

/// `(|η|_{H⁰}, |η|_{H¹})`, the latter a seminorm from the first arc-length derivative.
pub fn eta_norms_numeric(eta: &BoundaryData) -> Result<(f64, f64)> {
    let d1 = eta.mesh.derivative(&eta.values, 1)?;
    let w = eta.mesh.nodes.iter().map(|n| n.weight);
    let h0: f64 = w.clone().zip(&eta.values).map(|(w, v)| w * v * v).sum();
    let h1: f64 = w.zip(&d1).map(|(w, v)| w * v * v).sum();
    Ok((h0.sqrt(), h1.sqrt()))
}

/// `|I|` denominators: `h1^{1/2} h0^{3/4}`.
pub(crate) fn norm_factor(h0: f64, h1: f64) -> f64 {
    h1.sqrt() * h0.powf(0.75)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boundary_trace, build_grid, DomainGeometry, Gamma, Side};
    use std::f64::consts::PI;

    fn circle(n: usize) -> Arc<BoundaryMesh> {
        Arc::new(BoundaryMesh::disk(Gamma::FullCircle, n).unwrap())
    }

    fn angle(n: &crate::geometry::BoundaryNode) -> f64 {
        n.pos[1].atan2(n.pos[0])
    }

    #[test]
    fn laplacian_of_linear_and_quadratic() {
        let geo = DomainGeometry::rectangle([0.0, 1.0], [-1.0, 1.0], &[Side::Left, Side::Right]).unwrap();
        let g = build_grid(geo, 0.25).unwrap();
        let m = Arc::new(boundary_trace(&g));
        let lin = surface_laplacian(&BoundaryData::from_fn(&m, |n| 3.0 * n.pos[1] - 1.0)).unwrap();
        assert!(lin.max_abs() < 1e-12, "{}", lin.max_abs());
        let q = surface_laplacian(&BoundaryData::from_fn(&m, |n| n.pos[1] * n.pos[1])).unwrap();
        assert!(q.values.iter().all(|v| (v - 2.0).abs() < 1e-9), "{:?}", q.values);
    }

    #[test]
    fn laplacian_eigenfunction_on_circle() {
        let m = circle(1024);
        let d = surface_laplacian(&BoundaryData::from_fn(&m, |n| (3.0 * angle(n)).cos())).unwrap();
        let err = m.nodes.iter().zip(&d.values).map(|(n, v)| (v + 9.0 * (3.0 * angle(n)).cos()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn short_segments_are_rejected() {
        let m = Arc::new(BoundaryMesh::disk(Gamma::Arc { start: 0.0, end: 0.1 }, 2).unwrap());
        let d = BoundaryData::zeros(&m);
        assert!(matches!(surface_laplacian(&d), Err(DsmError::SegmentTooShort { .. })));
    }

    #[test]
    fn products_on_circle() {
        let m = circle(2048);
        let one = BoundaryData::from_fn(&m, |_| 1.0);
        assert!((duality_product(&one, &one, 0).unwrap() - 2.0 * PI).abs() < 1e-12);
        let c4 = BoundaryData::from_fn(&m, |n| (4.0 * angle(n)).cos());
        let v = duality_product(&c4, &c4, 1).unwrap();
        assert!((v - 16.0 * PI).abs() < 1e-3 * 16.0 * PI);
        let c2 = BoundaryData::from_fn(&m, |n| (2.0 * angle(n)).cos());
        let c3 = BoundaryData::from_fn(&m, |n| (3.0 * angle(n)).cos());
        assert!(duality_product(&c2, &c3, 1).unwrap().abs() < 1e-8);
    }

    #[test]
    fn mismatched_meshes() {
        let a = BoundaryData::zeros(&circle(64));
        let b = BoundaryData::zeros(&circle(65));
        assert!(matches!(duality_product(&a, &b, 0), Err(DsmError::MeshMismatch)));
    }

    #[test]
    fn norms_of_simple_data() {
        let geo = DomainGeometry::rectangle([0.0, 2.0], [0.0, 1.0], &[Side::Top]).unwrap();
        let g = build_grid(geo, 0.1).unwrap();
        let m = Arc::new(boundary_trace(&g));
        let (h0, h1) = eta_norms_numeric(&BoundaryData::from_fn(&m, |_| 1.5)).unwrap();
        assert!((h0 - 1.5 * 2f64.sqrt()).abs() < 1e-12 && h1.abs() < 1e-10);
        let c = circle(4096);
        let (h0, h1) = eta_norms_numeric(&BoundaryData::from_fn(&c, |n| angle(n).sin())).unwrap();
        assert!((h0 - PI.sqrt()).abs() < 1e-6 && (h1 - PI.sqrt()).abs() < 1e-6);
    }
}
