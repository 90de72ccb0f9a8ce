//! `roadnet` command-line front end.
//!
//! Each subcommand loads its inputs, calls into `roadnet_core` and writes the
//! result atomically. Exit codes: 0 success, 1 input error, 2 internal error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use roadnet_core::evaluate::{self, optimize_parameter, samples_for, SearchInterval};
use roadnet_core::geo::{centroid, project};
use roadnet_core::ingest::{self, group_by_network, Target};
use roadnet_core::pattern::{self, StudyWindow};
use roadnet_core::report::{self, Prediction};
use roadnet_core::{
    Error, Method, MethodParams, Network, ObservationSet, Result, Station, Variable,
};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "roadnet",
    version,
    about = "Road weather station network analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Station counts, nearest-neighbor spacing and regional counts per network and union
    Coverage(CoverageArgs),
    /// L-function clustering test against CSR simulation envelopes
    Pattern(PatternArgs),
    /// Interpolate one variable at target locations
    Interp(InterpArgs),
    /// Leave-one-out RMS comparison of interpolation methods
    Crossval(CrossvalArgs),
    /// Mean, standard deviation and CV% per variable and timestamp
    Summary(SummaryArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CoverageArgs {
    #[arg(long)]
    pub stations: PathBuf,
    #[arg(long)]
    pub regions: PathBuf,
    #[arg(long)]
    pub out_prefix: PathBuf,
    /// Drop stations within this many km of an earlier station (off by default)
    #[arg(long)]
    pub dedupe_radius_km: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct PatternArgs {
    #[arg(long)]
    pub stations: PathBuf,
    /// Restrict to one network (RWIS, MTO_CAMERA, ENV_CANADA)
    #[arg(long)]
    pub network: Option<String>,
    #[arg(long, default_value_t = pattern::DEFAULT_SIMULATIONS)]
    pub sims: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = pattern::DEFAULT_BANDS)]
    pub bins: usize,
    #[arg(long)]
    pub out_prefix: PathBuf,
    /// Also write an SVG plot
    #[arg(long)]
    pub svg: bool,
    /// Also write a JSON mirror of the CSV
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct InterpArgs {
    #[arg(long)]
    pub stations: PathBuf,
    #[arg(long)]
    pub obs: PathBuf,
    #[arg(long)]
    pub targets: PathBuf,
    /// idw, rbf, ok or all
    #[arg(long)]
    pub method: String,
    #[arg(long)]
    pub variable: String,
    #[arg(long)]
    pub timestamp: String,
    /// IDW power; cross-validated when omitted
    #[arg(long)]
    pub power: Option<f64>,
    /// RBF kernel parameter (1/km); cross-validated when omitted
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CrossvalArgs {
    #[arg(long)]
    pub stations: PathBuf,
    #[arg(long)]
    pub obs: PathBuf,
    /// idw, rbf, ok or all; repeatable or comma separated
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub method: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SummaryArgs {
    #[arg(long)]
    pub obs: PathBuf,
    /// Optional registry to validate station ids against
    #[arg(long)]
    pub stations: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("roadnet: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_input() {
        EXIT_INPUT
    } else {
        EXIT_INTERNAL
    }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Coverage(a) => cmd_coverage(a),
        Command::Pattern(a) => cmd_pattern(a),
        Command::Interp(a) => cmd_interp(a),
        Command::Crossval(a) => cmd_crossval(a),
        Command::Summary(a) => cmd_summary(a),
    }
}

/// Writes through a temporary file in the destination directory, then renames.
fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    fill(tmp.as_file_mut())?;
    tmp.as_file_mut().flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)
            .map_err(|e| Error::Input(format!("failed to write JSON: {e}")))?;
        writeln!(w).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn coverage_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    (
        with_suffix(prefix, "_coverage.csv"),
        with_suffix(prefix, "_coverage.json"),
    )
}

pub fn pattern_paths(prefix: &Path) -> (PathBuf, PathBuf, PathBuf) {
    (
        with_suffix(prefix, "_lfunction.csv"),
        with_suffix(prefix, "_lfunction.svg"),
        with_suffix(prefix, "_lfunction.json"),
    )
}

fn json_beside(out: &Path) -> PathBuf {
    out.with_extension("json")
}

pub fn cmd_coverage(a: &CoverageArgs) -> Result<()> {
    let mut stations: Vec<Station> = ingest::load_stations(&a.stations)?;
    if let Some(r) = a.dedupe_radius_km {
        if r.is_nan() || r < 0.0 {
            return Err(Error::Input(format!(
                "--dedupe-radius-km must be >= 0, got {r}"
            )));
        }
        stations = ingest::dedupe_colocated(&stations, r);
    }
    let regions = ingest::load_regions(&a.regions)?;
    let registries: Vec<Vec<Station>> = group_by_network(&stations)
        .into_iter()
        .map(|(_, s)| s)
        .collect();
    let report = pattern::coverage_report(&registries, &regions)?;
    let (csv_path, json_path) = coverage_paths(&a.out_prefix);
    write_atomic(&csv_path, |w| report::write_coverage(w, &report))?;
    write_json(&json_path, &report)
}

/// The L-function analysis behind `pattern`, exposed for equivalence checks.
pub fn pattern_result(
    stations: &[Station],
    network: Option<Network>,
    sims: usize,
    seed: u64,
    bins: usize,
) -> Result<roadnet_core::LFunctionResult> {
    let selected: Vec<_> = stations
        .iter()
        .filter(|s| network.is_none_or(|n| s.network == n))
        .map(|s| s.location)
        .collect();
    if selected.len() < 2 {
        return Err(Error::Input(format!(
            "pattern analysis needs at least 2 stations, found {}",
            selected.len()
        )));
    }
    if bins == 0 {
        return Err(Error::Input("--bins must be at least 1".into()));
    }
    let reference = centroid(&selected).expect("nonempty");
    let points = project(&selected, reference);
    let window = StudyWindow::around(&points)?;
    let distances = window.default_distances(bins);
    pattern::l_function(&points, &window, &distances, sims, seed)
}

pub fn cmd_pattern(a: &PatternArgs) -> Result<()> {
    let stations: Vec<Station> = ingest::load_stations(&a.stations)?;
    let network = a
        .network
        .as_deref()
        .map(str::parse::<Network>)
        .transpose()?;
    let result = pattern_result(&stations, network, a.sims, a.seed, a.bins)?;
    let (csv_path, svg_path, json_path) = pattern_paths(&a.out_prefix);
    write_atomic(&csv_path, |w| report::write_lfunction(w, &result))?;
    if a.svg {
        let title = format!(
            "L function: {} ({} simulations, seed {})",
            network.map_or("all stations", |n| n.as_str()),
            a.sims,
            a.seed
        );
        let svg = report::lfunction_svg(&result, &title);
        write_atomic(&svg_path, |w| {
            w.write_all(svg.as_bytes()).map_err(|source| Error::Io {
                path: svg_path.clone(),
                source,
            })
        })?;
    }
    if a.json {
        write_json(&json_path, &result)?;
    }
    Ok(())
}

pub fn parse_methods(raw: &[String]) -> Result<Vec<Method>> {
    let mut methods = Vec::new();
    for m in raw {
        if m.eq_ignore_ascii_case("all") {
            methods.extend(Method::ALL);
        } else {
            methods.push(m.parse::<Method>().map_err(|_| {
                Error::Input(format!(
                    "unknown method {m:?}; expected one of idw, rbf, ok, all"
                ))
            })?);
        }
    }
    let mut seen = Vec::new();
    methods.retain(|m| {
        let fresh = !seen.contains(m);
        seen.push(*m);
        fresh
    });
    Ok(methods)
}

fn find_set<'a>(
    sets: &'a [ObservationSet],
    variable: Variable,
    timestamp: &str,
) -> Result<&'a ObservationSet> {
    sets.iter()
        .find(|s| s.variable == variable && s.timestamp == timestamp)
        .ok_or_else(|| {
            let available: Vec<String> = sets
                .iter()
                .map(|s| format!("{} @ {}", s.variable, s.timestamp))
                .collect();
            Error::Input(format!(
                "no observations for {variable} at {timestamp}; available: {}",
                available.join(", ")
            ))
        })
}

/// Predictions behind `interp`, exposed for equivalence checks.
pub fn interp_predictions(
    stations: &[Station],
    obs: &ObservationSet,
    targets: &[Target<f64>],
    methods: &[Method],
    power: Option<f64>,
    sigma: Option<f64>,
) -> Result<Vec<Prediction<f64>>> {
    let samples = samples_for(obs, stations)?;
    let mut params = MethodParams::default();
    if methods.contains(&Method::Idw) {
        params.idw_power = match power {
            Some(p) => p,
            None => {
                optimize_parameter(
                    Method::Idw,
                    &samples,
                    &params,
                    SearchInterval::default_for(Method::Idw),
                )?
                .params
                .idw_power
            }
        };
    }
    if methods.contains(&Method::Rbf) {
        params.rbf_sigma = match sigma {
            Some(s) => s,
            None => {
                optimize_parameter(
                    Method::Rbf,
                    &samples,
                    &params,
                    SearchInterval::default_for(Method::Rbf),
                )?
                .params
                .rbf_sigma
            }
        };
    }
    let mut rows = Vec::with_capacity(targets.len() * methods.len());
    for t in targets {
        for &m in methods {
            rows.push(Prediction {
                target_id: t.target_id.clone(),
                location: t.location,
                method: m,
                variable: obs.variable,
                timestamp: obs.timestamp.clone(),
                value: evaluate::predict(m, &samples, t.location, &params)?,
            });
        }
    }
    Ok(rows)
}

#[derive(Serialize)]
struct PredictionJson<'a> {
    target_id: &'a str,
    lat: f64,
    lon: f64,
    method: Method,
    variable: Variable,
    timestamp: &'a str,
    predicted_value: f64,
}

pub fn cmd_interp(a: &InterpArgs) -> Result<()> {
    let methods = parse_methods(std::slice::from_ref(&a.method))?;
    let variable: Variable = a.variable.parse()?;
    let stations: Vec<Station> = ingest::load_stations(&a.stations)?;
    let sets = ingest::load_observations(&a.obs, &stations)?;
    let targets = ingest::load_targets(&a.targets)?;
    let obs = find_set(&sets, variable, &a.timestamp)?;
    let rows = interp_predictions(&stations, obs, &targets, &methods, a.power, a.sigma)?;
    write_atomic(&a.out, |w| report::write_predictions(w, &rows))?;
    if a.json {
        let mirror: Vec<_> = rows
            .iter()
            .map(|p| PredictionJson {
                target_id: &p.target_id,
                lat: p.location.lat(),
                lon: p.location.lon(),
                method: p.method,
                variable: p.variable,
                timestamp: &p.timestamp,
                predicted_value: p.value,
            })
            .collect();
        write_json(&json_beside(&a.out), &mirror)?;
    }
    Ok(())
}

pub fn cmd_crossval(a: &CrossvalArgs) -> Result<()> {
    let methods = parse_methods(&a.method)?;
    let stations: Vec<Station> = ingest::load_stations(&a.stations)?;
    let sets = ingest::load_observations(&a.obs, &stations)?;
    if sets.is_empty() {
        return Err(Error::Input(format!(
            "{} contains no observations",
            a.obs.display()
        )));
    }
    let cells = evaluate::compare_methods(&sets, &stations, &methods, &MethodParams::default())?;
    write_atomic(&a.out, |w| report::write_rms_table(w, &cells))?;
    if a.json {
        write_json(&json_beside(&a.out), &cells)?;
    }
    Ok(())
}

pub fn cmd_summary(a: &SummaryArgs) -> Result<()> {
    let sets: Vec<ObservationSet> = match &a.stations {
        Some(path) => {
            let stations: Vec<Station> = ingest::load_stations(path)?;
            ingest::load_observations(&a.obs, &stations)?
        }
        None => ingest::load_observations_unresolved(&a.obs)?,
    };
    let rows = sets
        .iter()
        .map(evaluate::summary_stats)
        .collect::<Result<Vec<_>>>()?;
    write_atomic(&a.out, |w| report::write_summary(w, &rows))?;
    if a.json {
        write_json(&json_beside(&a.out), &rows)?;
    }
    Ok(())
}
