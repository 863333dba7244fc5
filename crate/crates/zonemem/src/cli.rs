//! `zonemem` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use zonemem_core::sim::run_detailed;
use zonemem_core::worldgen;
use zonemem_core::{
    compare, BaselineParams, ComparisonReport, MemStore, OversizedZoneMode, PolicyConfig, RunArtifacts, Scenario,
    ScenarioTrace, SignatureSource, WorldMap, ZonePolicyParams,
};

use crate::error::{Error, Result};
use crate::export::{ledger_csv, trace_csv, Summary};
use crate::io;
use crate::ltm::FileStore;
use crate::svg;

#[derive(Debug, Parser)]
#[command(
    name = "zonemem",
    version,
    about = "Zone-based SLAM map memory management: world generation, replay and comparison"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a world from a spec file or a preset.
    GenWorld(GenWorldArgs),
    /// Replay a scenario under one policy.
    Run(RunArgs),
    /// Replay a scenario under both policies and compare them.
    Compare(CompareArgs),
    /// Re-render outputs from saved trace.json files.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    Baseline,
    Zone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Error,
    ForceLoad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Emit {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StoreKind {
    /// Payloads synthesized in memory.
    Mem,
    /// Single-file store written to `<out>/ltm.zmlt`.
    File,
}

#[derive(Debug, Args)]
pub struct GenWorldArgs {
    /// World spec JSON.
    #[arg(long, conflicts_with = "preset")]
    pub spec: Option<PathBuf>,
    /// Built-in spec: hospital, hospital-small or hospital-grid.
    #[arg(long)]
    pub preset: Option<String>,
    /// Overrides the world-spec seed; presets default to 42.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file, or a directory to write world.json into.
    #[arg(long, env = "ZONEMEM_OUT", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct WorldArgs {
    /// World JSON written by gen-world.
    #[arg(long, conflicts_with = "preset")]
    pub world: Option<PathBuf>,
    /// Built-in world, generated on the fly (default hospital).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Preset name (loop, round-trip) or scenario JSON.
    #[arg(long, default_value = "loop")]
    pub scenario: String,
    #[arg(long, value_enum, default_value = "file")]
    pub store: StoreKind,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 100)]
    pub memory_thr: usize,
    #[arg(long, default_value_t = 10)]
    pub max_retrieved: usize,
    #[arg(long, default_value_t = 0.25)]
    pub immunization_ratio: f64,
    #[arg(long, default_value_t = 3)]
    pub neighborhood_depth: usize,
    #[arg(long, value_enum, default_value = "error")]
    pub oversized_zone_mode: ModeArg,
    /// Replaces every portal radius (meters).
    #[arg(long)]
    pub portal_radius: Option<f64>,
    /// Simulated fetch latency per signature, reported in the store stats.
    #[arg(long, default_value_t = 0)]
    pub latency_ms: u64,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, env = "ZONEMEM_OUT", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv,json")]
    pub emit: Vec<Emit>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub world: WorldArgs,
    #[arg(long, value_enum, default_value = "zone")]
    pub policy: PolicyKind,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub world: WorldArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// One trace re-renders a run; two re-render a comparison (first is the reference).
    #[arg(long = "trace", required = true, num_args = 1)]
    pub traces: Vec<PathBuf>,
    #[arg(long, env = "ZONEMEM_OUT", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv,json,svg")]
    pub emit: Vec<Emit>,
}

impl ParamArgs {
    fn validate(&self) -> Result<()> {
        if self.memory_thr == 0 {
            return Err(Error::Usage("--memory-thr must be positive".into()));
        }
        if self.max_retrieved == 0 {
            return Err(Error::Usage("--max-retrieved must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.immunization_ratio) {
            return Err(Error::Usage("--immunization-ratio must lie in [0, 1]".into()));
        }
        if self.portal_radius.is_some_and(|r| !(r.is_finite() && r > 0.0)) {
            return Err(Error::Usage("--portal-radius must be positive".into()));
        }
        Ok(())
    }

    pub fn baseline(&self) -> BaselineParams {
        BaselineParams {
            memory_thr: self.memory_thr,
            max_retrieved: self.max_retrieved,
            local_immunization_ratio: self.immunization_ratio,
            neighborhood_depth: self.neighborhood_depth,
        }
    }

    pub fn zone(&self) -> ZonePolicyParams {
        ZonePolicyParams {
            memory_thr: self.memory_thr,
            portal_radius_override: self.portal_radius,
            oversized_zone_mode: match self.oversized_zone_mode {
                ModeArg::Error => OversizedZoneMode::Error,
                ModeArg::ForceLoad => OversizedZoneMode::ForceLoad,
            },
        }
    }

    pub fn config(&self, policy: PolicyKind) -> PolicyConfig {
        match policy {
            PolicyKind::Baseline => PolicyConfig::Baseline(self.baseline()),
            PolicyKind::Zone => PolicyConfig::Zone(self.zone()),
        }
    }
}

/// Contents of `comparison.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonFile {
    #[serde(flatten)]
    pub report: ComparisonReport,
    pub summary_a: Summary,
    pub summary_b: Summary,
}

fn load_world(args: &WorldArgs) -> Result<WorldMap> {
    match (&args.world, &args.preset) {
        (Some(path), _) => io::load_world(path),
        (None, preset) => io::preset_world(preset.as_deref().unwrap_or("hospital"), args.seed),
    }
}

fn open_store(
    kind: StoreKind,
    map: &WorldMap,
    out: &Path,
    latency_ms: u64,
) -> Result<Box<dyn SignatureSource + Send + Sync>> {
    Ok(match kind {
        StoreKind::Mem => Box::new(MemStore::new(map).with_latency(latency_ms)),
        StoreKind::File => {
            std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
            Box::new(FileStore::build(&out.join("ltm.zmlt"), map)?.with_latency(latency_ms))
        }
    })
}

/// Writes the per-run outputs into `dir` and returns the summary.
fn write_run(
    dir: &Path,
    artifacts: &RunArtifacts,
    store: Option<&dyn SignatureSource>,
    emit: &[Emit],
) -> Result<Summary> {
    let trace = &artifacts.trace;
    let summary = Summary::new(trace, store.map(|s| s.stats()));
    if emit.contains(&Emit::Csv) {
        io::write_bytes(&dir.join("trace.csv"), &trace_csv(trace)?)?;
        io::write_bytes(&dir.join("ledger.csv"), &ledger_csv(&artifacts.ledger)?)?;
    }
    if emit.contains(&Emit::Json) {
        io::write_json(&dir.join("trace.json"), trace)?;
    }
    if emit.contains(&Emit::Svg) {
        io::write_bytes(&dir.join("trace.svg"), svg::trace_svg(trace).as_bytes())?;
    }
    io::write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

fn failure(trace: &ScenarioTrace) -> Result<()> {
    match &trace.error {
        Some(e) if trace.failed => Err(Error::RunFailed(format!(
            "{} run stopped at frame {}: {e}",
            trace.policy.as_str(),
            trace.records.len()
        ))),
        _ => Ok(()),
    }
}

fn one_line(trace: &ScenarioTrace) -> String {
    let t = &trace.totals;
    format!(
        "{} {}: loads {} (batch {}) unloads {} peak_wm {} frames {}{}",
        trace.scenario,
        trace.policy.as_str(),
        t.cumulative_loads,
        t.batch_loads,
        t.cumulative_unloads,
        t.peak_wm,
        t.frames,
        if trace.failed { " FAILED" } else { "" }
    )
}

pub fn gen_world(args: &GenWorldArgs) -> Result<PathBuf> {
    let mut spec = match (&args.spec, &args.preset) {
        (Some(path), _) => io::load_spec(path)?,
        (None, name) => {
            let name = name.as_deref().unwrap_or("hospital");
            worldgen::preset(name, 42).ok_or_else(|| Error::Usage(format!("unknown preset {name}")))?
        }
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let map = worldgen::generate(&spec)?;
    let path = if args.out.extension().is_some_and(|e| e == "json") {
        args.out.clone()
    } else {
        args.out.join("world.json")
    };
    io::save_world(&path, &map)?;
    println!(
        "wrote {} ({} zones, {} signatures)",
        path.display(),
        map.zones.len(),
        map.signature_count()
    );
    Ok(path)
}

pub fn run(args: &RunArgs) -> Result<Summary> {
    args.params.validate()?;
    let map = load_world(&args.world)?;
    let scenario = io::load_scenario(&args.world.scenario)?;
    let store = open_store(args.world.store, &map, &args.out.out, args.params.latency_ms)?;
    let artifacts = run_detailed(&map, store.as_ref(), &args.params.config(args.policy), &scenario)?;
    let summary = write_run(&args.out.out, &artifacts, Some(store.as_ref()), &args.out.emit)?;
    println!("{}", one_line(&artifacts.trace));
    failure(&artifacts.trace)?;
    Ok(summary)
}

fn run_pair(
    map: &WorldMap,
    scenario: &Scenario,
    args: &CompareArgs,
) -> Result<[(RunArtifacts, Box<dyn SignatureSource + Send + Sync>); 2]> {
    let out = &args.out.out;
    let stores = match args.world.store {
        StoreKind::Mem => [
            open_store(StoreKind::Mem, map, out, args.params.latency_ms)?,
            open_store(StoreKind::Mem, map, out, args.params.latency_ms)?,
        ],
        StoreKind::File => {
            let built = open_store(StoreKind::File, map, out, args.params.latency_ms)?;
            let reopened: Box<dyn SignatureSource + Send + Sync> =
                Box::new(FileStore::open(&out.join("ltm.zmlt"))?.with_latency(args.params.latency_ms));
            [built, reopened]
        }
    };
    let configs = [
        args.params.config(PolicyKind::Baseline),
        args.params.config(PolicyKind::Zone),
    ];
    let [s_base, s_zone] = stores;
    let (a, b) = std::thread::scope(|scope| {
        let hb = scope.spawn(|| run_detailed(map, s_base.as_ref(), &configs[0], scenario));
        let hz = scope.spawn(|| run_detailed(map, s_zone.as_ref(), &configs[1], scenario));
        (
            hb.join().expect("baseline run panicked"),
            hz.join().expect("zone run panicked"),
        )
    });
    Ok([(a?, s_base), (b?, s_zone)])
}

pub fn compare_cmd(args: &CompareArgs) -> Result<ComparisonFile> {
    args.params.validate()?;
    let map = load_world(&args.world)?;
    let scenario = io::load_scenario(&args.world.scenario)?;
    let [(base, s_base), (zone, s_zone)] = run_pair(&map, &scenario, args)?;
    let out = &args.out.out;
    let summary_a = write_run(&out.join("baseline"), &base, Some(s_base.as_ref()), &args.out.emit)?;
    let summary_b = write_run(&out.join("zone"), &zone, Some(s_zone.as_ref()), &args.out.emit)?;
    let report = compare(&base.trace, &zone.trace)?;
    let file = ComparisonFile {
        report,
        summary_a,
        summary_b,
    };
    io::write_json(&out.join("comparison.json"), &file)?;
    io::write_bytes(
        &out.join("comparison.svg"),
        svg::comparison_svg(&base.trace, &zone.trace).as_bytes(),
    )?;
    println!("{}", one_line(&base.trace));
    println!("{}", one_line(&zone.trace));
    println!(
        "zone/baseline load ratio {} unload ratio {}",
        fmt_ratio(file.report.load_ratio),
        fmt_ratio(file.report.unload_ratio)
    );
    failure(&base.trace)?;
    failure(&zone.trace)?;
    Ok(file)
}

fn fmt_ratio(r: Option<f64>) -> String {
    r.map_or_else(|| "n/a".to_string(), |r| format!("{r:.4}"))
}

pub fn report(args: &ReportArgs) -> Result<()> {
    let traces: Vec<ScenarioTrace> = args.traces.iter().map(|p| io::read_json(p)).collect::<Result<_>>()?;
    match traces.as_slice() {
        [t] => {
            if args.emit.contains(&Emit::Csv) {
                io::write_bytes(&args.out.join("trace.csv"), &trace_csv(t)?)?;
            }
            if args.emit.contains(&Emit::Json) {
                io::write_json(&args.out.join("summary.json"), &Summary::new(t, None))?;
            }
            if args.emit.contains(&Emit::Svg) {
                io::write_bytes(&args.out.join("trace.svg"), svg::trace_svg(t).as_bytes())?;
            }
            println!("{}", one_line(t));
        }
        [a, b] => {
            let file = ComparisonFile {
                report: compare(a, b)?,
                summary_a: Summary::new(a, None),
                summary_b: Summary::new(b, None),
            };
            if args.emit.contains(&Emit::Json) {
                io::write_json(&args.out.join("comparison.json"), &file)?;
            }
            if args.emit.contains(&Emit::Svg) {
                io::write_bytes(&args.out.join("comparison.svg"), svg::comparison_svg(a, b).as_bytes())?;
            }
            println!(
                "{} vs {}: load ratio {} unload ratio {}",
                a.policy.as_str(),
                b.policy.as_str(),
                fmt_ratio(file.report.load_ratio),
                fmt_ratio(file.report.unload_ratio)
            );
        }
        _ => return Err(Error::Usage("report takes one or two --trace files".into())),
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenWorld(a) => gen_world(a).map(|_| ()),
        Command::Run(a) => run(a).map(|_| ()),
        Command::Compare(a) => compare_cmd(a).map(|_| ()),
        Command::Report(a) => report(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// Errors are reported as one `error: ...` line on stderr.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("error: invalid arguments");
            eprintln!("{first}");
            return 2;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}
