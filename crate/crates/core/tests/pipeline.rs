use std::sync::Arc;

use dsmdot_core::dsm::*;
use dsmdot_core::geometry::*;
use dsmdot_core::kernels::disk_kernel_k;
use dsmdot_core::synthesis::*;

fn clean_pair(n: u32) -> (ExperimentConfig, CauchyPair, Grid2D) {
    let cfg = example_catalog(n).unwrap();
    let pair = synthesize(&cfg).unwrap();
    let grid = cfg.recon_grid().unwrap();
    (cfg, pair, grid)
}

#[test]
fn each_trace_peaks_next_to_its_nearest_inclusion() {
    let (_, pair, _) = clean_pair(1);
    assert!(pair.fs.max_abs() > 0.0);
    let peak = |y: f64| {
        let (k, _) = pair
            .fs
            .values
            .iter()
            .enumerate()
            .filter(|(k, _)| pair.fs.mesh.nodes[*k].pos[1] == y)
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap();
        (pair.fs.mesh.nodes[k].pos[0], pair.fs.values[k].abs())
    };
    let (xb, vb) = peak(0.0);
    let (xt, vt) = peak(0.4);
    assert!((xb - 0.25).abs() < 0.1 && (xt + 0.5).abs() < 0.1, "{xb} {xt}");
    assert!((vb - vt).abs() < 0.05 * vb, "{vb} {vt}");
}

#[test]
fn clean_four_disk_example_is_resolved() {
    let (cfg, pair, grid) = clean_pair(2);
    let phi = solve_phi(&pair.fs, &grid, 0.0).unwrap();
    let map = modified_index(&phi, &grid, &pair.fs.mesh, 0.0, true).unwrap();
    let maxima = map.local_maxima(0.5);
    assert!(match_centers(&maxima, &cfg.centers(), 0.1), "{maxima:?}");
}

#[test]
fn index_and_phi_variant_share_the_argmax() {
    let (_, pair, grid) = clean_pair(1);
    let a = index_i(&pair.fs, &grid, Provider::FdSolve, 0.0).unwrap().argmax().unwrap();
    let b = index_i_via_phi(&pair.fs, &grid, Provider::FdSolve, 0.0).unwrap().argmax().unwrap();
    assert!((a[0] - b[0]).abs() <= grid.hx + 1e-12 && (a[1] - b[1]).abs() <= grid.hy + 1e-12, "{a:?} {b:?}");
}

#[test]
fn zero_data_gives_zero_maps() {
    let grid = build_grid_snapped(DomainGeometry::slab(), 0.04).unwrap();
    let mesh = Arc::new(boundary_trace(&grid));
    let fs = BoundaryData::zeros(&mesh);
    let i = index_i(&fs, &grid, Provider::RectImages, 0.0).unwrap();
    let phi = solve_phi(&fs, &grid, 0.0).unwrap();
    let m = modified_index(&phi, &grid, &mesh, 0.0, true).unwrap();
    for map in [i, m] {
        assert!(map.degenerate);
        assert!(map.values.iter().all(|v| *v == 0.0));
        assert_eq!(map.argmax(), None);
    }
}

#[test]
fn disk_kernel_of_the_centre_is_flat() {
    let grid = build_grid_snapped(DomainGeometry::unit_disk(Gamma::FullCircle).unwrap(), 0.05).unwrap();
    for k in (0..grid.len()).filter(|&k| grid.is_sampling_node(k)) {
        assert_eq!(disk_kernel_k(grid.node(k), [0.0, 0.0], Gamma::FullCircle).unwrap(), 0.0);
    }
}

#[test]
fn synthesis_keeps_the_meshes_apart() {
    let cfg = example_catalog(3).unwrap();
    assert!(cfg.fine_h < cfg.recon_h);
    let pair = synthesize(&cfg).unwrap();
    assert_eq!(pair.fs.mesh.grid, cfg.recon_grid().unwrap());
    let fine = cfg.fine_grid().unwrap();
    assert_eq!((fine.nx, fine.ny), (501, 101));
}
