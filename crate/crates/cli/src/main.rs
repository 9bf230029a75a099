use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use goa_core::approx::{apply_restorations, approx_module, rank_columns, select_restorations};
use goa_core::cost::{estimate, CostReport, DeviceParams};
use goa_core::exec::{compile_cluster, hardware_weights, run_cluster_with};
use goa_core::mapper::{pack, MappingPlan};
use goa_core::photonic::GoaArch;
use goa_core::search::{
    exhaustive_search, ga_search, Bounds, Normalization, SearchConfig, Weights,
    SEARCH_SCHEMA_VERSION,
};
use goa_core::trainer::{
    blobs, hw_aware_train, load_csv, restore_and_retrain, train_float, Activation, BlobSpec,
    Dataset, RestoredMask, ToyNet, TrainSchedule, TrainTrace,
};
use goa_core::workload::{adjust_depths, partition, AdjustedNetwork, Network, WeightMatrix};
use goa_core::{ErrorKind, GoaError};

const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "goa", version, about = "Map, cost and search hybrid MZI/MRR optical accelerators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search (m, n, k) for the workloads listed in a search config.
    Search {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        device_params: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Score every candidate instead of running the genetic search.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Pack a network onto an architecture and estimate its cost.
    Map {
        #[arg(long)]
        arch: PathBuf,
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        device_params: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Pad layer depths before mapping.
        #[arg(long)]
        adjust: bool,
    },
    /// Run random weights through the simulated grid and compare with the dense product.
    Simulate {
        #[arg(long)]
        arch: PathBuf,
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train a small classifier in float and hardware form, then sweep restoration budgets.
    TrainDemo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug)]
enum CliError {
    Goa(GoaError),
    Io { path: PathBuf, source: std::io::Error },
    Parse { path: PathBuf, source: serde_json::Error },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Goa(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Parse { path, source } => {
                let (line, column) = (source.line(), source.column());
                let msg = source.to_string();
                let suffix = format!(" at line {line} column {column}");
                let msg = msg.strip_suffix(&suffix).unwrap_or(&msg);
                write!(f, "{}:{line}:{column}: {msg}", path.display())
            }
        }
    }
}

impl From<GoaError> for CliError {
    fn from(e: GoaError) -> Self {
        CliError::Goa(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Goa(e) => match e.kind() {
                ErrorKind::User => 1,
                ErrorKind::Infeasible => 2,
                ErrorKind::Internal => 3,
            },
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Input files read so far, hashed in order for the run report.
#[derive(Default)]
struct Inputs {
    hasher: Sha256,
    names: Vec<String>,
}

impl Inputs {
    fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.hasher.update(text.as_bytes());
        self.names.push(file_name(path));
        Ok(text)
    }

    fn json<T: DeserializeOwned>(&mut self, path: &Path) -> CliResult<T> {
        let text = self.read(path)?;
        serde_json::from_str(&text).map_err(|source| CliError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    fn hash(&self) -> String {
        hex::encode(self.hasher.clone().finalize())
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

#[derive(Serialize)]
struct RunReport {
    schema_version: u32,
    tool_version: &'static str,
    /// Subcommand, input file names and options; output paths are left out.
    command: Vec<String>,
    config_hash: String,
    outputs: Vec<String>,
    summary: serde_json::Value,
}

struct Output {
    files: Vec<(String, String)>,
    summary: serde_json::Value,
}

impl Output {
    fn new(summary: serde_json::Value) -> Self {
        Self {
            files: Vec::new(),
            summary,
        }
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| GoaError::Internal(format!("serializing {name}: {e}")))?;
        text.push('\n');
        self.files.push((name.into(), text));
        Ok(())
    }

    fn text(&mut self, name: &str, text: String) {
        self.files.push((name.into(), text));
    }
}

fn write_output(
    out: Option<&Path>,
    command: Vec<String>,
    inputs: &Inputs,
    output: Output,
) -> CliResult<()> {
    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        command,
        config_hash: inputs.hash(),
        outputs: output.files.iter().map(|(n, _)| n.clone()).collect(),
        summary: output.summary,
    };
    let report_text = serde_json::to_string_pretty(&report)
        .map_err(|e| GoaError::Internal(format!("serializing report: {e}")))?;
    let Some(dir) = out else {
        println!("{report_text}");
        return Ok(());
    };
    let io = |path: &Path, source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for (name, text) in &output.files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| io(&path, e))?;
    }
    let path = dir.join("report.json");
    fs::write(&path, report_text + "\n").map_err(|e| io(&path, e))?;
    info!("wrote {} files to {}", output.files.len() + 1, dir.display());
    Ok(())
}

#[derive(Deserialize)]
struct ArchFile {
    schema_version: u32,
    #[serde(flatten)]
    arch: GoaArch,
}

fn load_arch(inputs: &mut Inputs, path: &Path) -> CliResult<GoaArch> {
    let file: ArchFile = inputs.json(path)?;
    if file.schema_version != 1 {
        return Err(GoaError::InvalidConfig(format!(
            "{}: unsupported arch schema_version {}",
            path.display(),
            file.schema_version
        ))
        .into());
    }
    file.arch.validate()?;
    Ok(file.arch)
}

fn load_network(inputs: &mut Inputs, path: &Path) -> CliResult<Network> {
    let net: Network = inputs.json(path)?;
    net.validate()?;
    Ok(net)
}

fn load_params(inputs: &mut Inputs, path: &Path) -> CliResult<DeviceParams> {
    let p: DeviceParams = inputs.json(path)?;
    p.validate()?;
    Ok(p)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WorkloadRef {
    Path(PathBuf),
    Inline(Network),
}

/// Search config as written on disk: workloads may be paths relative to the file.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchFile {
    schema_version: u32,
    #[serde(default)]
    weights: Weights,
    mzi_budget: usize,
    wavelengths: usize,
    m_range: Bounds,
    n_range: Bounds,
    k_range: Bounds,
    population: usize,
    generations: usize,
    crossover_rate: f64,
    mutation_rate: f64,
    seed: u64,
    #[serde(default)]
    normalization: Normalization,
    workloads: Vec<WorkloadRef>,
}

fn load_search(inputs: &mut Inputs, path: &Path) -> CliResult<SearchConfig> {
    let file: SearchFile = inputs.json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut workloads = Vec::with_capacity(file.workloads.len());
    for w in file.workloads {
        workloads.push(match w {
            WorkloadRef::Path(p) => load_network(inputs, &base.join(p))?,
            WorkloadRef::Inline(n) => n,
        });
    }
    let cfg = SearchConfig {
        schema_version: file.schema_version,
        weights: file.weights,
        mzi_budget: file.mzi_budget,
        wavelengths: file.wavelengths,
        m_range: file.m_range,
        n_range: file.n_range,
        k_range: file.k_range,
        population: file.population,
        generations: file.generations,
        crossover_rate: file.crossover_rate,
        mutation_rate: file.mutation_rate,
        seed: file.seed,
        normalization: file.normalization,
        workloads,
    };
    if cfg.schema_version != SEARCH_SCHEMA_VERSION {
        return Err(GoaError::InvalidConfig(format!(
            "{}: unsupported search schema_version {}",
            path.display(),
            cfg.schema_version
        ))
        .into());
    }
    Ok(cfg)
}

fn run_search(
    config: &Path,
    device_params: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    exhaustive: bool,
) -> CliResult<()> {
    let mut inputs = Inputs::default();
    let mut cfg = load_search(&mut inputs, config)?;
    let params = load_params(&mut inputs, device_params)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let mut command = vec!["search".to_string()];
    command.extend(inputs.names.iter().cloned());
    command.push(format!("seed={}", cfg.seed));
    let output = if exhaustive {
        command.push("exhaustive".into());
        let ranked = exhaustive_search(&cfg, &params)?;
        let best = ranked.first().ok_or(GoaError::EmptyFeasibleRegion)?;
        if !best.feasible {
            return Err(GoaError::EmptyFeasibleRegion.into());
        }
        let mut o = Output::new(serde_json::json!({
            "best": best.genome(),
            "candidates": ranked.len(),
        }));
        o.json("search.json", &ranked)?;
        o
    } else {
        let result = ga_search(&cfg, &params)?;
        info!(
            "best (m, n, k) = {:?} after {} evaluations",
            result.best.genome(),
            result.evaluations
        );
        let mut o = Output::new(serde_json::json!({
            "best": result.best.genome(),
            "evaluations": result.evaluations,
        }));
        o.json("search.json", &result)?;
        o
    };
    write_output(out, command, &inputs, output)
}

fn summary_text(net: &Network, plan: &MappingPlan, cost: &CostReport) -> String {
    let mut s = format!(
        "network {}\narch m={} n={} k={} wavelengths={}\n",
        net.name, plan.arch.m, plan.arch.n, plan.arch.k, plan.arch.wavelengths
    );
    s += &format!(
        "clusters {}\npasses {}\neo_conversions {}\nutilization {:.4}\n",
        plan.clusters.len(),
        plan.mapping_cost,
        plan.eo_conversions,
        plan.utilization()
    );
    for (i, pass) in plan.passes.iter().enumerate() {
        let mut ids: Vec<usize> = pass.iter().map(|p| p.cluster).collect();
        ids.dedup();
        s += &format!(
            "pass {i}: {} segments, {} modules, clusters {ids:?}\n",
            pass.len(),
            plan.occupied_modules(i)
        );
    }
    s += &format!(
        "latency_ns {:.3}\nenergy_pj {:.3}\narea_um2 {:.1}\nstatic_power_mw {:.3}\nparams {}\n",
        cost.latency_ns, cost.energy_pj, cost.area_um2, cost.static_power_mw, cost.params_label
    );
    s
}

fn run_map(
    arch: &Path,
    network: &Path,
    device_params: &Path,
    out: Option<&Path>,
    adjust: bool,
) -> CliResult<()> {
    let mut inputs = Inputs::default();
    let arch = load_arch(&mut inputs, arch)?;
    let mut net = load_network(&mut inputs, network)?;
    let params = load_params(&mut inputs, device_params)?;
    let mut command = vec!["map".to_string()];
    command.extend(inputs.names.iter().cloned());
    let adjusted: Option<AdjustedNetwork> = if adjust {
        command.push("adjust".into());
        let a = adjust_depths(&net, &arch)?;
        net = a.adjusted.clone();
        Some(a)
    } else {
        None
    };
    let plan = pack(&net.cluster_shapes(arch.k), &arch)?;
    plan.validate()?;
    let cost = estimate(&arch, &plan, &params)?;
    let mut output = Output::new(serde_json::json!({
        "clusters": plan.clusters.len(),
        "mapping_cost": plan.mapping_cost,
        "eo_conversions": plan.eo_conversions,
        "utilization": plan.utilization(),
        "latency_ns": cost.latency_ns,
        "energy_pj": cost.energy_pj,
    }));
    output.json("plan.json", &plan)?;
    output.json("cost.json", &cost)?;
    if let Some(a) = &adjusted {
        output.json("adjusted.json", a)?;
    }
    output.text("summary.txt", summary_text(&net, &plan, &cost));
    write_output(out, command, &inputs, output)
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SimulateFile {
    #[serde(default)]
    seed: u64,
    /// Module columns to keep exact, chosen by approximation error.
    #[serde(default)]
    restoration_budget: usize,
    /// Tuning of each grid row; defaults to row `i` on channel `i`.
    #[serde(default)]
    wavelength_map: Option<Vec<usize>>,
    /// Maximum accepted `|y_hw - W_hw x|` per output.
    #[serde(default = "default_sim_tolerance")]
    tolerance: f64,
}

fn default_sim_tolerance() -> f64 {
    1e-8
}

#[derive(Serialize)]
struct ClusterCheck {
    cluster: usize,
    layer: usize,
    rows: usize,
    cols: usize,
    segments: usize,
    restored: Vec<usize>,
    max_abs_error: f64,
    /// `‖W_hw - W‖_F / ‖W‖_F` of the compiled matrix.
    relative_approximation_error: f64,
}

#[derive(Serialize)]
struct SimulationReport {
    schema_version: u32,
    seed: u64,
    restoration_shortfall: bool,
    tolerance: f64,
    max_abs_error: f64,
    clusters: Vec<ClusterCheck>,
}

fn run_simulate(
    arch: &Path,
    network: &Path,
    config: Option<&Path>,
    out: Option<&Path>,
    seed: Option<u64>,
) -> CliResult<()> {
    use rand::{Rng, SeedableRng};

    let mut inputs = Inputs::default();
    let arch = load_arch(&mut inputs, arch)?;
    let net = load_network(&mut inputs, network)?;
    let mut cfg: SimulateFile = match config {
        Some(p) => inputs.json(p)?,
        None => SimulateFile {
            tolerance: default_sim_tolerance(),
            ..SimulateFile::default()
        },
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let mut command = vec!["simulate".to_string()];
    command.extend(inputs.names.iter().cloned());
    command.push(format!("seed={}", cfg.seed));

    let k = arch.k;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let shapes = net.cluster_shapes(k);
    let mut clusters = Vec::with_capacity(shapes.len());
    for s in &shapes {
        clusters.push(partition(&WeightMatrix::random(s.layer, s.rows, s.cols, &mut rng), k)?);
    }
    let plan = pack(&shapes, &arch)?;
    let (shapes, plan, shortfall) = if cfg.restoration_budget > 0 {
        let mut residuals = Vec::with_capacity(clusters.len());
        for c in &clusters {
            let mut r = nalgebra::DMatrix::zeros(c.rows_mod, c.cols_mod);
            for br in 0..c.rows_mod {
                for bc in 0..c.cols_mod {
                    r[(br, bc)] = approx_module(c.block(br, bc))?.residual;
                }
            }
            residuals.push(r);
        }
        let ranking = rank_columns(&shapes, &residuals)?;
        let selection = select_restorations(&ranking, cfg.restoration_budget, &plan)?;
        if selection.shortfall {
            warn!(
                "only {} of {} requested columns could be restored",
                selection.columns.len(),
                cfg.restoration_budget
            );
        }
        let widened = apply_restorations(&shapes, &selection);
        let plan = pack(&widened, &arch)?;
        (widened, plan, selection.shortfall)
    } else {
        (shapes, plan, false)
    };
    plan.validate()?;

    let mut programs = Vec::with_capacity(clusters.len());
    for (c, s) in clusters.iter().zip(&shapes) {
        programs.push(compile_cluster(c, s)?);
    }
    let mut checks = Vec::with_capacity(clusters.len());
    let mut worst: f64 = 0.0;
    for (id, (c, s)) in clusters.iter().zip(&shapes).enumerate() {
        let x: Vec<f64> = (0..s.cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = run_cluster_with(&plan, &programs, id, &x, cfg.wavelength_map.as_deref())?;
        let w_hw = hardware_weights(c, s)?;
        let expect = &w_hw * nalgebra::DVector::from_column_slice(&x);
        let err = y
            .iter()
            .zip(expect.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let w = c.reassemble().values;
        worst = worst.max(err);
        checks.push(ClusterCheck {
            cluster: id,
            layer: s.layer,
            rows: s.rows,
            cols: s.cols,
            segments: plan.segments_of(id).len(),
            restored: s.restored.clone(),
            max_abs_error: err,
            relative_approximation_error: (&w_hw - &w).norm() / w.norm().max(f64::MIN_POSITIVE),
        });
    }
    if worst > cfg.tolerance {
        return Err(GoaError::Internal(format!(
            "simulated output deviates from the dense product by {worst:e} (tolerance {:e})",
            cfg.tolerance
        ))
        .into());
    }
    let report = SimulationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed: cfg.seed,
        restoration_shortfall: shortfall,
        tolerance: cfg.tolerance,
        max_abs_error: worst,
        clusters: checks,
    };
    let mut output = Output::new(serde_json::json!({
        "clusters": report.clusters.len(),
        "mapping_cost": plan.mapping_cost,
        "max_abs_error": worst,
    }));
    output.json("plan.json", &plan)?;
    output.json("simulation.json", &report)?;
    write_output(out, command, &inputs, output)
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum DataSource {
    Blobs {
        classes: usize,
        per_class: usize,
        spread: f64,
    },
    Csv {
        path: PathBuf,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainFile {
    schema_version: u32,
    arch: GoaArch,
    dims: Vec<usize>,
    classes: usize,
    #[serde(default)]
    activation: Activation,
    data: DataSource,
    validation: usize,
    schedule: TrainSchedule,
    #[serde(default)]
    restoration_budgets: Vec<usize>,
}

#[derive(Serialize)]
struct SweepPoint {
    budget: usize,
    restored_columns: usize,
    total_columns: usize,
    shortfall: bool,
    mapping_cost: usize,
    accuracy: f64,
}

#[derive(Serialize)]
struct TrainReport {
    schema_version: u32,
    seed: u64,
    train_samples: usize,
    validation_samples: usize,
    float: TrainTrace,
    hardware: TrainTrace,
    sweep: Vec<SweepPoint>,
}

fn run_train_demo(config: &Path, out: Option<&Path>, seed: Option<u64>) -> CliResult<()> {
    let mut inputs = Inputs::default();
    let mut cfg: TrainFile = inputs.json(config)?;
    if cfg.schema_version != 1 {
        return Err(GoaError::InvalidConfig(format!(
            "{}: unsupported train-demo schema_version {}",
            config.display(),
            cfg.schema_version
        ))
        .into());
    }
    if let Some(s) = seed {
        cfg.schedule.seed = s;
    }
    cfg.arch.validate()?;
    cfg.schedule.validate()?;
    let seed = cfg.schedule.seed;
    let width = *cfg.dims.first().ok_or_else(|| GoaError::InvalidConfig("empty dims".into()))?;
    let data: Dataset = match &cfg.data {
        DataSource::Blobs {
            classes,
            per_class,
            spread,
        } => blobs(&BlobSpec {
            classes: *classes,
            per_class: *per_class,
            spread: *spread,
            width,
            seed,
        })?,
        DataSource::Csv { path } => {
            let path = config.parent().unwrap_or(Path::new(".")).join(path);
            inputs.read(&path)?;
            load_csv(&path, width)?
        }
    };
    if data.classes > cfg.classes {
        return Err(GoaError::InvalidConfig(format!(
            "data has {} classes, the net scores {}",
            data.classes, cfg.classes
        ))
        .into());
    }
    let mut command = vec!["train-demo".to_string()];
    command.extend(inputs.names.iter().cloned());
    command.push(format!("seed={seed}"));

    let (train, val) = data.split(cfg.validation, seed)?;
    let net = ToyNet::new(cfg.dims.clone(), cfg.classes, cfg.activation, seed)?;
    let float = train_float(net.clone(), &train, &val, &cfg.schedule)?;
    let hw = hw_aware_train(
        net,
        &train,
        &val,
        &cfg.schedule,
        &cfg.arch,
        &RestoredMask::none(cfg.dims.len() - 1),
    )?;
    let total_columns: usize = cfg.dims[1..].iter().map(|d| d.div_ceil(cfg.arch.k)).sum();
    let mut sweep = Vec::with_capacity(cfg.restoration_budgets.len());
    for &budget in &cfg.restoration_budgets {
        let r = restore_and_retrain(&hw, &train, &val, &cfg.schedule, &cfg.arch, budget)?;
        info!(
            "budget {budget}: {} columns restored, accuracy {:.4}",
            r.selection.columns.len(),
            r.retrained.trace.final_accuracy
        );
        sweep.push(SweepPoint {
            budget,
            restored_columns: r.selection.columns.len(),
            total_columns,
            shortfall: r.selection.shortfall,
            mapping_cost: r.plan.mapping_cost,
            accuracy: r.retrained.trace.final_accuracy,
        });
    }
    let report = TrainReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed,
        train_samples: train.len(),
        validation_samples: val.len(),
        float: float.trace,
        hardware: hw.trace,
        sweep,
    };
    let mut output = Output::new(serde_json::json!({
        "float_accuracy": report.float.final_accuracy,
        "hardware_accuracy": report.hardware.final_accuracy,
        "sweep": report.sweep.iter().map(|p| (p.budget, p.accuracy)).collect::<Vec<_>>(),
    }));
    output.json("trace.json", &report)?;
    write_output(out, command, &inputs, output)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Search {
            config,
            device_params,
            out,
            seed,
            exhaustive,
        } => run_search(&config, &device_params, out.as_deref(), seed, exhaustive),
        Command::Map {
            arch,
            network,
            device_params,
            out,
            adjust,
        } => run_map(&arch, &network, &device_params, out.as_deref(), adjust),
        Command::Simulate {
            arch,
            network,
            config,
            out,
            seed,
        } => run_simulate(&arch, &network, config.as_deref(), out.as_deref(), seed),
        Command::TrainDemo { config, out, seed } => run_train_demo(&config, out.as_deref(), seed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GOA_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
