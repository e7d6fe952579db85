use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use dsmdot_core::dsm::{
    index_i, index_i_via_phi, kernel_ktilde, modified_index, solve_phi, IndexKind, IndexMap, KernelSetup, Provider,
};
use dsmdot_core::geometry::{boundary_trace, build_grid_snapped, DomainGeometry, Gamma};
use dsmdot_core::kernels::disk_kernel_k;
use dsmdot_core::synthesis::{example_catalog, synthesize, ExperimentConfig, RNG_NAME};
use dsmdot_core::DsmError;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{boundary_csv, grid_csv, pgm, read_boundary_csv, read_manifest, OutDir, RunManifest};
use crate::{CliError, ForwardArgs, KernelArgs, KernelDomain, Method, ReconstructArgs};

pub const BOUNDARY_FILES: [&str; 4] = ["g.csv", "f.csv", "f0.csv", "fs_noisy.csv"];

fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn forward(a: &ForwardArgs) -> Result<(), CliError> {
    let mut config = match (&a.config, a.example) {
        (Some(p), _) => load_config(p)?,
        (None, Some(n)) => example_catalog(n)?,
        (None, None) => return Err(CliError::Usage("either --example or --config is required".into())),
    };
    if let Some(s) = a.seed {
        config.rng_seed = s;
    }
    if let Some(eps) = a.noise {
        config.noise_level = eps;
    }
    config.validate()?;

    let t = Instant::now();
    let pair = synthesize(&config)?;
    let secs = t.elapsed().as_secs_f64();

    let mut m = RunManifest::new("forward");
    m.config = Some(serde_json::to_value(&config).expect("config serializes"));
    m.seed = Some(config.rng_seed);
    m.rng = Some(RNG_NAME.into());
    m.timings.insert("synthesize".into(), secs);
    m.details.insert("example".into(), a.example.map_or(Value::Null, |n| json!(n)));
    m.details.insert("boundary_nodes".into(), json!(pair.fs.mesh.len()));
    m.details.insert("noise_bound".into(), json!(config.noise_level * pair.fs.max_abs()));

    let mut out = OutDir::create(&a.out, m)?;
    for (name, data) in BOUNDARY_FILES.iter().zip([&pair.g, &pair.f, &pair.f0, &pair.fs_noisy]) {
        out.write(name, boundary_csv(data).as_bytes())?;
    }
    let p = out.finish()?;
    println!("wrote {} boundary nodes in {secs:.2} s, manifest {}", pair.fs.mesh.len(), p.display());
    Ok(())
}

fn report(map: &IndexMap, dir: &Path, command: &str, mut m: RunManifest) -> Result<PathBuf, CliError> {
    let maxima = map.local_maxima(0.5);
    m.details.insert("degenerate".into(), json!(map.degenerate));
    m.details.insert("argmax".into(), json!(map.argmax()));
    m.details.insert("local_maxima".into(), json!(maxima));
    m.details.insert("grid".into(), json!({ "nx": map.grid.nx, "ny": map.grid.ny }));
    let mut out = OutDir::create(dir, m)?;
    out.write("index.csv", grid_csv(map).as_bytes())?;
    out.write("index.pgm", &pgm(map))?;
    let p = out.finish()?;
    if map.degenerate {
        eprintln!("warning: {command} produced an all-zero index map");
    } else {
        for x in &maxima {
            println!("local maximum at ({:.4}, {:.4})", x[0], x[1]);
        }
    }
    Ok(p)
}

pub fn reconstruct(a: &ReconstructArgs) -> Result<(), CliError> {
    let input = read_manifest(&a.data)?;
    let mpath = a.data.join(crate::output::MANIFEST);
    let bad = |message: String| CliError::Config { path: mpath.clone(), line: 0, column: 0, message };
    let config: ExperimentConfig = match input.config.clone() {
        Some(v) => serde_json::from_value(v).map_err(|e| bad(e.to_string()))?,
        None => return Err(bad("manifest carries no experiment configuration".into())),
    };
    config.validate()?;
    let grid = config.recon_grid()?;
    let mesh = Arc::new(boundary_trace(&grid));
    let fs = read_boundary_csv(&a.data.join("fs_noisy.csv"), &mesh)?;
    let mu0 = config.medium.mu0;

    let t = Instant::now();
    let map = match a.method {
        Method::I => index_i(&fs, &grid, Provider::FdSolve, mu0)?,
        Method::Phi => index_i_via_phi(&fs, &grid, Provider::FdSolve, mu0)?,
        Method::Modified | Method::Modified2 => {
            let phi = solve_phi(&fs, &grid, mu0)?;
            modified_index(&phi, &grid, &mesh, mu0, a.method == Method::Modified2)?
        }
    };
    let secs = t.elapsed().as_secs_f64();

    let mut m = RunManifest::new("reconstruct");
    m.config = input.config;
    m.seed = input.seed;
    m.rng = input.rng;
    m.timings.insert("index".into(), secs);
    m.details.insert("method".into(), json!(a.method.name()));
    m.details.insert("data".into(), json!(a.data.display().to_string()));
    let dir = a.out.clone().unwrap_or_else(|| a.data.join(a.method.name()));
    let p = report(&map, &dir, "reconstruct", m)?;
    println!("{} map in {secs:.2} s, manifest {}", a.method.name(), p.display());
    Ok(())
}

fn disk_kernel_map(z: [f64; 2], gamma: Gamma, h: f64) -> Result<IndexMap, DsmError> {
    let grid = build_grid_snapped(DomainGeometry::unit_disk(gamma)?, h)?;
    let raw = (0..grid.len())
        .into_par_iter()
        .map(|k| if grid.is_sampling_node(k) { disk_kernel_k(grid.node(k), z, gamma) } else { Ok(0.0) })
        .collect::<Result<Vec<f64>, DsmError>>()?;
    let active = (0..grid.len()).map(|k| grid.is_sampling_node(k)).collect();
    Ok(IndexMap::from_raw(&grid, &raw, active, IndexKind::I))
}

pub fn kernel(a: &KernelArgs) -> Result<(), CliError> {
    let z = a.z;
    if !(a.h > 0.0 && a.h < 1.0) {
        return Err(CliError::Usage(format!("--h must lie in (0, 1), got {}", a.h)));
    }
    let t = Instant::now();
    let (map, name) = match a.domain {
        KernelDomain::DiskFull | KernelDomain::DiskHalf => {
            let gamma = if a.domain == KernelDomain::DiskFull {
                Gamma::FullCircle
            } else {
                Gamma::Arc { start: 0.0, end: std::f64::consts::PI }
            };
            if !DomainGeometry::unit_disk(gamma)?.contains(z) {
                return Err(DsmError::PointOutsideDomain(z[0], z[1]).into());
            }
            (disk_kernel_map(z, gamma, a.h)?, "K")
        }
        KernelDomain::Rect => {
            let setup = KernelSetup::default();
            if !setup.config(z).geometry()?.contains(z) {
                return Err(DsmError::PointOutsideDomain(z[0], z[1]).into());
            }
            (kernel_ktilde(z, &setup)?, "K~")
        }
    };
    let secs = t.elapsed().as_secs_f64();

    let mut m = RunManifest::new("kernel");
    m.timings.insert("kernel".into(), secs);
    m.details.insert("kernel".into(), json!(name));
    m.details.insert("domain".into(), json!(format!("{:?}", a.domain)));
    m.details.insert("star".into(), json!(z));
    let p = report(&map, &a.out, "kernel", m)?;
    if let Some(x) = map.argmax() {
        println!("{name} peaks at ({:.4}, {:.4}) for z = ({}, {}), manifest {}", x[0], x[1], z[0], z[1], p.display());
    }
    Ok(())
}
