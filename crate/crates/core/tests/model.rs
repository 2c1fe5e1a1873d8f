use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::Command;

use nbcar::data::{build_weight_matrix, design_matrix, read_adjacency, read_zone_table, CovariateSpec};
use nbcar::model::{FitData, PriorSpec};
use nbcar::sampler::{run_chain, summarize, SamplerSpec};
use nbcar::synth::reference_zones;
use nbcar::{Data, Error};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn load(zones: &str, adjacency: &str, spec: &CovariateSpec) -> Data {
    let (table, _) = read_zone_table(File::open(fixture(zones)).unwrap()).unwrap();
    let records = read_adjacency(File::open(fixture(adjacency)).unwrap()).unwrap();
    let (w, _) = build_weight_matrix(&records, &table).unwrap();
    let x = design_matrix(&table, spec).unwrap();
    FitData::new(table.crash_counts(), x, w, table.ids().map(String::from).collect()).unwrap()
}

#[test]
fn fixture_files_match_the_built_in_reference() {
    let (zones, adjacency) = reference_zones();
    let (table, warnings) = read_zone_table(File::open(fixture("zones12.csv")).unwrap()).unwrap();
    assert!(warnings.is_empty());
    for (file, built) in table.records().iter().zip(&zones) {
        assert_eq!(file.zone_id, built.zone_id);
        assert_eq!(file.crash_count, built.crash_count);
        assert_eq!(file.land_use_class, built.land_use_class);
        for name in ["area_km2", "arterial_length_km", "access_density", "signal_density", "road_density", "betweenness"] {
            assert!((file.numeric(name).unwrap() - built.numeric(name).unwrap()).abs() < 1e-12, "{name}");
        }
    }
    assert_eq!(read_adjacency(File::open(fixture("adjacency12.csv")).unwrap()).unwrap(), adjacency);
}

#[test]
fn single_precision_fit_tracks_double() {
    let spec = CovariateSpec { covariates: vec!["access_density".into()], include_intercept: true, landuse_base: None };
    let data = load("zones12.csv", "adjacency12.csv", &spec);
    let (table, _) = read_zone_table(File::open(fixture("zones12.csv")).unwrap()).unwrap();
    let records = read_adjacency(File::open(fixture("adjacency12.csv")).unwrap()).unwrap();
    let (w, _) = build_weight_matrix::<f32>(&records, &table).unwrap();
    let x = design_matrix::<f32>(&table, &spec).unwrap();
    let data32 = FitData::new(table.crash_counts(), x, w, data.zone_ids.clone()).unwrap();

    let run = SamplerSpec { iterations: 6000, burn_in: 1000, fix_k_at: Some(2.0), fix_phi_at_zero: true, ..Default::default() };
    let a = summarize(&run_chain(&run, &data, &PriorSpec::default()).unwrap()).unwrap();
    let b = summarize(&run_chain(&run, &data32, &PriorSpec::default()).unwrap()).unwrap();
    let (ma, mb) = (a.get("access_density").unwrap().mean, b.get("access_density").unwrap().mean as f64);
    assert!((ma - mb).abs() < 0.03, "{ma} vs {mb}");
}

#[test]
fn island_fixture_keeps_the_island_at_zero() {
    let spec = CovariateSpec { covariates: vec!["access_density".into()], include_intercept: true, landuse_base: None };
    let data = load("zones_island.csv", "adjacency_island.csv", &spec);
    assert_eq!(data.w.islands(), vec![4]);
    assert_eq!(data.icar_rank(), 3);
    let draws = run_chain(&SamplerSpec { iterations: 1500, burn_in: 500, ..Default::default() }, &data, &PriorSpec::default()).unwrap();
    assert!(draws.column_by_name("phi[E]").unwrap().iter().all(|&v| v == 0.0));
    for row in &draws.rows {
        let total: f64 = row[4..8].iter().sum();
        assert!(total.abs() < 1e-9);
    }
}

#[test]
fn unevaluable_start_aborts_the_sampler() {
    let data = load("zones12.csv", "adjacency12.csv", &CovariateSpec::default());
    let priors = PriorSpec { beta_precision: 1e308, ..Default::default() };
    match run_chain(&SamplerSpec { iterations: 10, burn_in: 0, ..Default::default() }, &data, &priors) {
        Err(Error::SamplerAbort { iteration, dump, .. }) => {
            assert_eq!(iteration, 0);
            assert!(dump.contains("beta"), "{dump}");
        }
        other => panic!("expected an abort, got {other:?}"),
    }

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "beta_precision = 1e308\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nbcar"))
        .args(["fit", "--iterations", "10", "--burn-in", "0", "--config"])
        .arg(&cfg)
        .arg("--zones")
        .arg(fixture("zones12.csv"))
        .arg("--adjacency")
        .arg(fixture("adjacency12.csv"))
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sampler aborted"));
}
