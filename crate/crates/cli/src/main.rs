use std::fs;
use std::io::BufReader;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use chartsynth::bench::read_manifest;
use chartsynth::datagen::RemoteConfig;
use chartsynth::metrics::{parse_predictions, score_run, Prediction};
use chartsynth::model::{ChartType, GeneratorKind, TemplateRegistry};
use chartsynth::pipeline::{gold_table, Pipeline, PipelineConfig, Stage};
use chartsynth_review::ServeConfig;

/// Synthetic chart data, renders, QA and benchmark packaging.
#[derive(Parser)]
#[command(name = "chartsynth", version)]
struct Cli {
    #[command(flatten)]
    flags: ConfigFlags,
    #[command(subcommand)]
    command: Command,
}

/// Pipeline settings. Flags override the config file, which overrides defaults.
#[derive(Args, Default)]
struct ConfigFlags {
    /// JSON config file (fields as in the persisted config.json)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated chart type ids; all types when omitted
    #[arg(long, global = true, value_delimiter = ',')]
    types: Option<Vec<ChartType>>,
    /// Charts per type
    #[arg(short = 'm', long = "charts", global = true)]
    m: Option<usize>,
    /// Styles per type
    #[arg(short = 'n', long = "styles", global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    topics: Option<PathBuf>,
    /// procedural or remote
    #[arg(long, global = true, value_parser = parse_kind)]
    generator: Option<GeneratorKind>,
    /// Chat-completion endpoint for the remote generator
    #[arg(long, global = true)]
    endpoint: Option<String>,
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    annotated_fraction: Option<f64>,
    /// Blank-image ink threshold
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Benchmark entries per chart type
    #[arg(long, global = true)]
    per_type: Option<usize>,
    #[arg(long, global = true)]
    unannotated_fraction: Option<f64>,
    /// Numeric match threshold for extractability
    #[arg(long, global = true)]
    rho: Option<f64>,
    /// Worker threads, 0 = one per core
    #[arg(long, short = 'j', global = true)]
    workers: Option<usize>,
    /// Rerun stages even when their outputs are current
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Dump or validate chart templates
    Templates {
        #[command(subcommand)]
        action: TemplateAction,
    },
    GenData,
    GenStyles,
    Compose,
    GenQa,
    Filter,
    Package,
    /// Every stage in order, skipping stages whose outputs are current
    RunAll,
    /// HTTP review queue over the packaged manifest
    ServeReview {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Defaults to <output>/benchmark/manifest.jsonl
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Defaults to <output>/benchmark/verdicts.jsonl
        #[arg(long)]
        verdicts: Option<PathBuf>,
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
    /// Score predictions against the manifest
    Evaluate {
        /// JSONL: {entry_id, answer, long_answer?, table?}
        #[arg(long, required_unless_present = "emit_gold")]
        predictions: Option<PathBuf>,
        /// Defaults to <output>/benchmark/manifest.jsonl
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Write gold answers as a predictions file and exit
        #[arg(long)]
        emit_gold: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum TemplateAction {
    /// Write the shipped templates as <id>.json + <id>.txt
    Dump { dir: PathBuf },
    /// Check a template directory
    Validate { dir: PathBuf },
}

fn parse_kind(s: &str) -> Result<GeneratorKind, String> {
    match s {
        "procedural" => Ok(GeneratorKind::Procedural),
        "remote" => Ok(GeneratorKind::Remote),
        _ => Err(format!("unknown generator {s:?}; expected procedural or remote")),
    }
}

impl ConfigFlags {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => PipelineConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = &self.$flag { c.$field = v.clone(); })*
            };
        }
        set!(output => output, seed => seed, types => chart_types, m => m, n => n,
             generator => generator, annotated_fraction => annotated_fraction, tau => tau,
             per_type => per_type, unannotated_fraction => unannotated_fraction, rho => rho,
             workers => workers);
        if self.topics.is_some() {
            c.topics_file = self.topics.clone();
        }
        if self.endpoint.is_some() || self.model.is_some() {
            let mut remote = match c.remote.take() {
                Some(r) => r,
                None => serde_json::from_value::<RemoteConfig>(json!({"endpoint": "", "model": ""}))?,
            };
            if let Some(e) = &self.endpoint {
                remote.endpoint = e.clone();
            }
            if let Some(m) = &self.model {
                remote.model = m.clone();
            }
            c.remote = Some(remote);
        }
        Ok(c)
    }
}

fn run_stage(flags: &ConfigFlags, stage: Stage) -> Result<()> {
    let p = Pipeline::new(flags.resolve()?)?;
    let report = p.run_stage(stage, flags.force)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn templates(action: &TemplateAction) -> Result<()> {
    match action {
        TemplateAction::Dump { dir } => {
            TemplateRegistry::builtin().dump(dir)?;
            println!("wrote {} templates to {}", ChartType::ALL.len(), dir.display());
        }
        TemplateAction::Validate { dir } => {
            let registry = TemplateRegistry::load_dir(dir)?;
            let mut problems = Vec::new();
            for t in ChartType::ALL {
                match registry.get(t) {
                    Ok(template) => problems.extend(template.self_check().into_iter().map(|p| format!("{t}: {p}"))),
                    Err(_) => problems.push(format!("{t}: missing template")),
                }
            }
            for p in &problems {
                eprintln!("{p}");
            }
            if !problems.is_empty() {
                bail!("{} template problems in {}", problems.len(), dir.display());
            }
            println!("{} templates ok", ChartType::ALL.len());
        }
    }
    Ok(())
}

fn evaluate(
    flags: &ConfigFlags,
    predictions: Option<&Path>,
    manifest: Option<&Path>,
    emit_gold: Option<&Path>,
    as_json: bool,
) -> Result<()> {
    let config = flags.resolve()?;
    let root = config.output.clone();
    let manifest_path = manifest.map(Path::to_path_buf).unwrap_or_else(|| root.join("benchmark/manifest.jsonl"));
    let manifest = read_manifest(&manifest_path)?;
    if let Some(out) = emit_gold {
        let mut lines = String::new();
        for e in &manifest.entries {
            let p = Prediction {
                entry_id: e.entry_id.clone(),
                answer: e.qa.short_answer.clone(),
                long_answer: Some(e.qa.long_answer.clone()),
                table: Some(gold_table(&root, &e.gold_data_path)?),
            };
            lines.push_str(&serde_json::to_string(&p)?);
            lines.push('\n');
        }
        fs::write(out, lines)?;
        println!("wrote {} gold predictions to {}", manifest.entries.len(), out.display());
        return Ok(());
    }
    let path = predictions.expect("clap requires predictions");
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let preds = parse_predictions(BufReader::new(file), path)?;
    let report = score_run(&preds, &manifest, |e| gold_table(&root, &e.gold_data_path))?;
    if as_json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let flags = &cli.flags;
    match &cli.command {
        Command::Templates { action } => templates(action),
        Command::GenData => run_stage(flags, Stage::GenData),
        Command::GenStyles => run_stage(flags, Stage::GenStyles),
        Command::Compose => run_stage(flags, Stage::Compose),
        Command::GenQa => run_stage(flags, Stage::GenQa),
        Command::Filter => run_stage(flags, Stage::Filter),
        Command::Package => run_stage(flags, Stage::Package),
        Command::RunAll => {
            let p = Pipeline::new(flags.resolve()?)?;
            let mut force = flags.force;
            for stage in Stage::ALL {
                let report = p.run_stage(stage, force)?;
                force |= !report.skipped;
                println!("{}", serde_json::to_string(&report)?);
            }
            Ok(())
        }
        Command::ServeReview { addr, manifest, verdicts, static_dir } => {
            let config = flags.resolve()?;
            let mut serve = ServeConfig::for_root(&config.output, *addr);
            serve.rho = config.rho;
            if let Some(m) = manifest {
                serve.manifest = m.clone();
            }
            if let Some(v) = verdicts {
                serve.verdicts = v.clone();
            }
            serve.static_dir = static_dir.clone();
            eprintln!("review queue on http://{addr}");
            tokio::runtime::Runtime::new()?.block_on(chartsynth_review::serve(serve))?;
            Ok(())
        }
        Command::Evaluate { predictions, manifest, emit_gold, json } => {
            evaluate(flags, predictions.as_deref(), manifest.as_deref(), emit_gold.as_deref(), *json)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
