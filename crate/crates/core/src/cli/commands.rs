//! Subcommand implementations. Each returns the warnings it emitted; the caller
//! maps errors and warnings to exit codes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cli::config::{RunConfig, TruthConfig};
use crate::cli::CommonArgs;
use crate::data::{
    build_weight_matrix, descriptive_stats, design_matrix, landuse_proportions, read_adjacency,
    read_zone_table, write_adjacency, write_stats, write_zone_table, WeightMatrix, ZoneTable,
};
use crate::error::{Error, Result};
use crate::model::FitData;
use crate::sampler::{
    ess, format_table, geweke_z, is_reported, read_draws, run_chains, summarize, write_draws, write_summary,
    ChainDraws, FitSummary,
};
use crate::synth::{simulate_dataset, write_truth, TruthSpec};

/// |Geweke z| above this on a reported parameter is a diagnostic warning.
const GEWEKE_WARN: f64 = 2.58;
/// ESS below this on a reported parameter is a diagnostic warning.
const ESS_WARN: f64 = 100.0;

/// First header line of every output file.
pub fn provenance(seed: u64, digest: &str) -> String {
    format!("nbcar {} seed={seed} config={digest}", env!("CARGO_PKG_VERSION"))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(mut out: BufWriter<File>, path: &Path) -> Result<()> {
    out.flush().map_err(|e| Error::io(path, e))
}

/// Prefixes parse and validation errors with the file they came from.
fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io { .. } => e,
        other => Error::Config(format!("{}: {other}", path.display())),
    })
}

fn run_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut c = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let s = &mut c.sampler;
    if let Some(v) = common.seed {
        s.seed = v;
    }
    if let Some(v) = common.iterations {
        s.iterations = v;
    }
    if let Some(v) = common.burn_in {
        s.burn_in = v;
    }
    if let Some(v) = common.thin {
        s.thin = v;
    }
    if let Some(v) = common.chains {
        c.chains = v;
    }
    c.validate()?;
    Ok(c)
}

fn load_zones(path: &Path) -> Result<(ZoneTable, Vec<String>)> {
    in_file(path, read_zone_table(open(path)?))
}

fn load_inputs(zones: &Path, adjacency: &Path) -> Result<(ZoneTable, WeightMatrix<f64>, Vec<String>)> {
    let (table, mut warnings) = load_zones(zones)?;
    let records = in_file(adjacency, read_adjacency(open(adjacency)?))?;
    let (w, w_warn) = in_file(adjacency, build_weight_matrix(&records, &table))?;
    warnings.extend(w_warn);
    Ok((table, w, warnings))
}

fn fit_data(table: &ZoneTable, w: WeightMatrix<f64>, config: &RunConfig) -> Result<FitData<f64>> {
    let x = design_matrix(table, &config.covariates)?;
    FitData::new(table.crash_counts(), x, w, table.ids().map(String::from).collect())
}

fn reported(summary: FitSummary<f64>) -> FitSummary<f64> {
    FitSummary { rows: summary.rows.into_iter().filter(|r| is_reported(&r.name)).collect() }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.filter(|x| x.is_finite()).map_or("NA".to_string(), |x| x.to_string())
}

/// One row per chain and parameter, preceded by the run's warnings.
fn write_diagnostics<W: Write>(
    mut out: W,
    draws: &ChainDraws<f64>,
    header: &[String],
    warnings: &[String],
) -> Result<()> {
    let io = |e| Error::io("<diagnostics>", e);
    for line in header {
        writeln!(out, "# {line}").map_err(io)?;
    }
    for w in warnings {
        writeln!(out, "# warning: {w}").map_err(io)?;
    }
    writeln!(out, "chain,parameter,geweke_z,ess,acceptance_rate").map_err(io)?;
    for meta in &draws.chains {
        let chain = draws.chain(meta.chain);
        for (j, name) in draws.names.iter().enumerate() {
            let col = chain.column(j);
            writeln!(
                out,
                "{},{},{},{},{}",
                meta.chain,
                name,
                fmt_opt(geweke_z(&col).ok()),
                fmt_opt(ess(&col).ok()),
                fmt_opt(meta.acceptance.get(j).copied())
            )
            .map_err(io)?;
        }
    }
    Ok(())
}

fn diagnostic_warnings(draws: &ChainDraws<f64>) -> Vec<String> {
    let mut warnings = Vec::new();
    for meta in &draws.chains {
        let chain = draws.chain(meta.chain);
        if meta.nonfinite_rejections > 0 {
            warnings.push(format!(
                "chain {}: {} proposals rejected for a non-finite log posterior",
                meta.chain, meta.nonfinite_rejections
            ));
        }
        for (j, name) in draws.names.iter().enumerate().filter(|(_, n)| is_reported(n)) {
            let col = chain.column(j);
            if let Ok(z) = geweke_z(&col) {
                if z.abs() > GEWEKE_WARN {
                    warnings.push(format!("chain {}: Geweke z for {name} is {z:.2}", meta.chain));
                }
            }
            if let Ok(e) = ess(&col) {
                if e < ESS_WARN {
                    warnings.push(format!("chain {}: ESS for {name} is {e:.1}", meta.chain));
                }
            }
        }
    }
    warnings
}

pub fn cmd_fit(zones: &Path, adjacency: &Path, out_dir: &Path, common: &CommonArgs) -> Result<Vec<String>> {
    let config = run_config(common)?;
    let (table, w, mut warnings) = load_inputs(zones, adjacency)?;
    let data = fit_data(&table, w, &config)?;
    let draws = run_chains(&config.sampler, config.chains, &data, &config.priors)?;
    let summary = reported(summarize(&draws)?);

    let header = vec![provenance(config.sampler.seed, &config.digest())];
    let summary_path = out_dir.join(&config.summary_out);
    let draws_path = out_dir.join(&config.draws_out);
    let diagnostics_path = out_dir.join(&config.diagnostics_out);

    let mut out = create(&summary_path)?;
    write_summary(&mut out, &summary, &header)?;
    finish(out, &summary_path)?;

    let mut out = create(&draws_path)?;
    write_draws(&mut out, &draws, &header)?;
    finish(out, &draws_path)?;

    warnings.extend(diagnostic_warnings(&draws));
    let mut out = create(&diagnostics_path)?;
    write_diagnostics(&mut out, &draws, &header, &warnings)?;
    finish(out, &diagnostics_path)?;

    println!("{}", format_table(&summary));
    Ok(warnings)
}

/// Lattice flags override the truth file. Trim and zero-arterial counts default to
/// the 202/198 layout only on the default lattice; other shapes default to none.
pub fn cmd_simulate(
    out_dir: &Path,
    rows: Option<usize>,
    cols: Option<usize>,
    trim: Option<usize>,
    zero_arterial: Option<usize>,
    common: &CommonArgs,
) -> Result<Vec<String>> {
    let mut config = match &common.config {
        Some(path) => TruthConfig::from_file(path)?,
        None => TruthConfig::default(),
    };
    if let Some(v) = common.seed {
        config.seed = v;
    }
    let keep_trim = trim.is_some() || config.is_explicit("trim");
    let keep_zero = zero_arterial.is_some() || config.is_explicit("zero_arterial");
    let t = &mut config.truth;
    let default = TruthSpec::default();
    if let Some(v) = rows {
        t.rows = v;
    }
    if let Some(v) = cols {
        t.cols = v;
    }
    let reshaped = (t.rows, t.cols) != (default.rows, default.cols);
    if let Some(v) = trim {
        t.trim = v;
    } else if reshaped && !keep_trim {
        t.trim = 0;
    }
    if let Some(v) = zero_arterial {
        t.zero_arterial = v;
    } else if reshaped && !keep_zero {
        t.zero_arterial = 0;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let data = simulate_dataset(&config.truth, &mut rng)?;
    let header = vec![provenance(config.seed, &config.digest())];

    let path = out_dir.join("zones.csv");
    let mut out = create(&path)?;
    write_zone_table(&mut out, &data.zones, &header)?;
    finish(out, &path)?;

    let path = out_dir.join("adjacency.csv");
    let mut out = create(&path)?;
    write_adjacency(&mut out, &data.adjacency, &header)?;
    finish(out, &path)?;

    let path = out_dir.join("truth.csv");
    let mut out = create(&path)?;
    write_truth(&mut out, &data, &header)?;
    finish(out, &path)?;

    println!(
        "{} zones ({} modelled), {} adjacency pairs written to {}",
        data.zones.len(),
        data.phi.len(),
        data.adjacency.len(),
        out_dir.display()
    );
    Ok(Vec::new())
}

/// Reuses the draws file's provenance line, so the output matches the fit's summary.
pub fn cmd_summarize(draws_path: &Path, out: Option<&Path>, common: &CommonArgs) -> Result<Vec<String>> {
    let (draws, header) = in_file(draws_path, read_draws::<f64, _>(open(draws_path)?))?;
    let line = match header.iter().find(|l| l.starts_with("nbcar ")) {
        Some(l) => l.clone(),
        None => {
            let config = run_config(common)?;
            provenance(config.sampler.seed, &config.digest())
        }
    };
    let summary = reported(in_file(draws_path, summarize(&draws))?);
    match out {
        Some(path) => {
            let mut file = create(path)?;
            write_summary(&mut file, &summary, &[line])?;
            finish(file, path)?;
            println!("{}", format_table(&summary));
        }
        None => write_summary(std::io::stdout().lock(), &summary, &[line])?,
    }
    Ok(Vec::new())
}

pub fn cmd_stats(zones: &Path, out: Option<&Path>, common: &CommonArgs) -> Result<Vec<String>> {
    let config = run_config(common)?;
    let (table, warnings) = load_zones(zones)?;
    let stats = descriptive_stats(&table)?;
    let mut header = vec![provenance(config.sampler.seed, &config.digest())];
    header.push(format!("zones={}", table.len()));
    for (name, share) in landuse_proportions(&table) {
        header.push(format!("landuse {name}={share}"));
    }
    match out {
        Some(path) => {
            let mut file = create(path)?;
            write_stats(&mut file, &stats, &header)?;
            finish(file, path)?;
        }
        None => write_stats(std::io::stdout().lock(), &stats, &header)?,
    }
    Ok(warnings)
}

pub fn cmd_check(zones: &Path, adjacency: &Path, common: &CommonArgs) -> Result<Vec<String>> {
    let config = run_config(common)?;
    let (table, w, warnings) = load_inputs(zones, adjacency)?;
    let components = w.components().count;
    let islands = w.islands().len();
    let edges = w.edges().len();
    let data = fit_data(&table, w, &config)?;
    println!(
        "ok: {} zones ({} excluded), {} adjacent pairs, {} connected component(s), {} island(s), {} design columns",
        data.n(),
        table.excluded().len(),
        edges,
        components,
        islands,
        data.p()
    );
    Ok(warnings)
}
