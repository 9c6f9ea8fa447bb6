use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qdemux_core::budget::write_sweep;
use qdemux_core::experiment::{analyze, delay_scan, rabi_map, simulate, simulate_hom_pair, SimulationOutput};
use qdemux_core::reproduce::{reproduce, write_with_provenance, LINE_CUT_T1};
use qdemux_core::tagfile::{read_file, write_file, TagFileHeader};
use qdemux_core::units::ev_to_hz;
use qdemux_core::visibility::write_line_cut;
use qdemux_core::{
    correct_hom, multiphoton_rate, visibility_eq2, visibility_map, DemuxScheme, Eq2Inputs, Error,
    Experiment, GammaRule, Scenario,
};

#[derive(Parser)]
#[command(name = "qdemux", version, about = "Passively demultiplexed quantum-dot photon pairs: simulation, analysis and models")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "QDEMUX_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario into tag files or tables.
    Simulate(SimulateArgs),
    /// Correlate a tag file and extract figures of merit.
    Analyze(AnalyzeArgs),
    /// Evaluate the closed-form visibility models.
    Model(ModelArgs),
    /// Rate and loss budget of an n-mode demultiplexer.
    Budget(BudgetArgs),
    /// Run every experiment and write all figure tables plus a summary.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of laser periods.
    #[arg(long)]
    n_periods: Option<u64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario, Error> {
        let mut s = match &self.config {
            Some(p) => Scenario::load(p).map_err(with_path(p))?,
            None => Scenario::default(),
        };
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(n) = self.n_periods {
            s.sequence.n_periods = n;
            s.duration = None;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Binary,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Text => "tags",
            Format::Binary => "qdt",
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Tag file to analyze.
    #[arg(long)]
    tags: PathBuf,
    /// Distinguishable (cross-polarized) reference run for HOM visibility.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// g²(0) used in the HOM multiphoton correction.
    #[arg(long, default_value_t = 0.0)]
    g2: f64,
    /// Scenario whose analysis settings replace those in the tag file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    /// Corrected HOM visibility from V_raw, g², R and T.
    #[arg(long, num_args = 4, value_names = ["V_RAW", "G2", "R", "T"])]
    eq1: Option<Vec<f64>>,
    /// H-V visibility from T1 (ps), FSS (µeV) and wandering Σ (GHz).
    #[arg(long, num_args = 2..=3, value_names = ["T1_PS", "FSS_UEV", "SIGMA_GHZ"])]
    eq2: Option<Vec<f64>>,
    /// Write the lifetime × FSS visibility map and line cuts to --out.
    #[arg(long)]
    map: bool,
    /// Print the line cut at this lifetime (ps).
    #[arg(long, value_name = "T1_PS")]
    line_cut: Option<f64>,
    /// Decimal places of printed values.
    #[arg(long, default_value_t = 3)]
    digits: usize,
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output directory for --map.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BudgetArgs {
    /// Number of spatial modes.
    #[arg(long)]
    n: Option<u32>,
    /// Split the first stage passively by polarization-selective stimulation.
    #[arg(long)]
    passive: bool,
    /// Demultiplexer JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also print an active vs passive table for 1..=SWEEP modes.
    #[arg(long)]
    sweep: Option<u32>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Analyze(a) => run_analyze(a),
        Command::Model(a) => run_model(a),
        Command::Budget(a) => run_budget(a),
        Command::Reproduce(a) => run_reproduce(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}

fn with_path(p: &Path) -> impl FnOnce(Error) -> Error + '_ {
    move |e| match e {
        Error::Io(io) => Error::Data(format!("{}: {io}", p.display())),
        e => e,
    }
}

fn usage(field: &str, msg: &str) -> Error {
    Error::Config {
        field: field.to_string(),
        message: msg.to_string(),
    }
}

fn write_tags(dir: &Path, s: &Scenario, out: &SimulationOutput, format: Format) -> Result<PathBuf, Error> {
    let path = dir.join(format!("{}.{}", s.experiment, format.extension()));
    write_file(&path, &TagFileHeader::for_scenario(s, out.duration), &out.stream_refs())?;
    println!("{}", path.display());
    Ok(path)
}

fn run_simulate(a: SimulateArgs) -> Result<(), Error> {
    let s = a.scenario.load()?;
    fs::create_dir_all(&a.out)?;
    match s.experiment {
        Experiment::DelayScan => {
            let scan = delay_scan(&s)?;
            let path = a.out.join("delay_scan.tsv");
            write_with_provenance(&path, &s, |w| scan.write_table(w))?;
            println!("{}", path.display());
        }
        Experiment::RabiMap => {
            let map = rabi_map(&s)?;
            let path = a.out.join("rabi_map.tsv");
            write_with_provenance(&path, &s, |w| map.write_table(w))?;
            println!("{}", path.display());
        }
        e => match e.hom_reference() {
            Some(reference) => {
                let (co, cross) = simulate_hom_pair(&s)?;
                write_tags(&a.out, &s, &co, a.format)?;
                let rs = Scenario {
                    experiment: reference,
                    ..s.clone()
                };
                write_tags(&a.out, &rs, &cross, a.format)?;
            }
            None => {
                let out = simulate(&s)?;
                write_tags(&a.out, &s, &out, a.format)?;
            }
        },
    }
    Ok(())
}

fn run_analyze(a: AnalyzeArgs) -> Result<(), Error> {
    let file = read_file(&a.tags).map_err(with_path(&a.tags))?;
    let mut s = file.header.scenario()?;
    if let Some(p) = &a.config {
        s.analysis = Scenario::load(p).map_err(with_path(p))?.analysis;
    }
    let reference = match &a.reference {
        Some(p) => Some(read_file(p).map_err(with_path(p))?.streams),
        None => None,
    };
    let report = analyze(s.experiment, &s, &file.streams, reference.as_ref(), a.g2)?;
    fs::create_dir_all(&a.out)?;
    for (name, h) in &report.histograms {
        let path = a.out.join(format!("{}_{name}.tsv", s.experiment));
        write_with_provenance(&path, &s, |w| h.write_table(w))?;
    }
    let metrics: BTreeMap<&str, serde_json::Value> = report
        .metrics
        .iter()
        .map(|(k, m)| (k.as_str(), json!({"value": m.value, "uncertainty": m.uncertainty})))
        .collect();
    let doc = json!({
        "experiment": s.experiment,
        "seed": s.seed,
        "scenario_hash": s.hash(),
        "metrics": metrics,
    });
    let text = serde_json::to_string_pretty(&doc)?;
    fs::write(a.out.join("metrics.json"), &text)?;
    println!("{text}");
    Ok(())
}

fn run_model(a: ModelArgs) -> Result<(), Error> {
    let d = a.digits;
    let mut did = false;
    if let Some(v) = &a.eq1 {
        let c = correct_hom(v[0], v[1], v[2], v[3])?;
        if c.unphysical {
            log::warn!("corrected visibility exceeds 1");
        }
        println!("{:.d$}", c.value);
        did = true;
    }
    if let Some(v) = &a.eq2 {
        let sigma = v.get(2).copied().unwrap_or(0.0) * 1e9;
        let inputs = Eq2Inputs::new(v[0] * 1e-12, ev_to_hz(v[1] * 1e-6), sigma);
        println!("{:.d$}", visibility_eq2(&inputs)?);
        did = true;
    }
    if a.map || a.line_cut.is_some() {
        let s = a.scenario.load()?;
        let g = &s.visibility_map;
        let vmap = visibility_map(&g.t1_axis(), &g.fss_axis(), g.sigma, GammaRule::Radiative)?;
        if let Some(t1) = a.line_cut {
            let cut = vmap.line_cut(t1 * 1e-12)?;
            write_line_cut(io::stdout().lock(), t1 * 1e-12, &cut)?;
        }
        if a.map {
            let out = a.out.as_ref().ok_or_else(|| usage("out", "--map needs --out"))?;
            fs::create_dir_all(out)?;
            let path = out.join("visibility_map.tsv");
            write_with_provenance(&path, &s, |w| vmap.write_table(w))?;
            eprintln!("{}", path.display());
            for t1 in LINE_CUT_T1 {
                let cut = vmap.line_cut(t1)?;
                let path = out.join(format!("line_cut_{:.0}ps.tsv", t1 * 1e12));
                write_with_provenance(&path, &s, |w| write_line_cut(w, t1, &cut))?;
                eprintln!("{}", path.display());
            }
        }
        did = true;
    }
    if !did {
        return Err(usage("model", "give --eq1, --eq2, --map or --line-cut"));
    }
    Ok(())
}

fn run_budget(a: BudgetArgs) -> Result<(), Error> {
    let mut scheme = match &a.config {
        Some(p) => serde_json::from_str::<DemuxScheme>(&fs::read_to_string(p).map_err(|e| with_path(p)(e.into()))?)?,
        None => DemuxScheme::default(),
    };
    if let Some(n) = a.n {
        scheme.n_modes = n;
    }
    if a.passive {
        scheme.passive_doubling = true;
    }
    let report = multiphoton_rate(&scheme)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(&json!({"scheme": scheme, "report": report}))?)?;
    if let Some(max) = a.sweep {
        write_sweep(&scheme, max, &mut out)?;
    }
    Ok(())
}

fn run_reproduce(a: ReproduceArgs) -> Result<(), Error> {
    let s = a.scenario.load()?;
    let summary = reproduce(&s, &a.out)?;
    for e in &summary.entries {
        println!(
            "{:<22} {:>12.6} ± {:<10.6} target {:>10.4} ± {:<6} {}",
            e.name,
            e.extracted,
            e.uncertainty,
            e.target,
            e.tolerance,
            if e.pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(())
}
