//! `negfuse`: combine, evaluate and serve ensemble classifier predictions.
//!
//! Exit codes: 0 success, 2 input or validation error, 1 internal error.

use std::fmt::Write as _;
use std::io::IsTerminal;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use negfuse_core::io::{load_class_names, load_ensemble, load_labels, write_report, EnsembleManifest, ReportFormat};
use negfuse_core::synthetic::{generate_dataset, six_model_profiles, ModelProfile};
use negfuse_core::{combine, compare_methods, rank_classes, Method, TiePolicy};
use negfuse_service::{resolve_config_path, AppState, MockConfig, MockModel, ServiceConfig, CONFIG_ENV};

#[derive(Debug, Parser)]
#[command(name = "negfuse", version, about = "Ensemble combination of classifier confidences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Combine the models' predictions for one sample.
    Combine {
        #[arg(long)]
        manifest: PathBuf,
        /// Sample id present in every prediction file.
        #[arg(long)]
        sample: String,
        #[command(flatten)]
        rule: RuleArgs,
    },
    /// Accuracy of one method over a labeled set.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[command(flatten)]
        rule: RuleArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Accuracy table for several methods over the same labeled set.
    Compare {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Methods to compare, comma separated.
        #[arg(long = "method", value_delimiter = ',', default_value = "top,average,negation")]
        methods: Vec<Method>,
        #[arg(long, default_value = "mean-conf")]
        tie: TiePolicy,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Generate a synthetic ensemble: prediction files, manifest and labels.
    Simulate {
        /// JSON array of model profiles; six profiles spanning 0.60-0.74 when omitted.
        #[arg(long)]
        profiles: Option<PathBuf>,
        /// Number of classes.
        #[arg(long, default_value_t = 50)]
        classes: usize,
        /// Number of samples.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the aggregation service.
    Serve {
        #[arg(long, env = CONFIG_ENV)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
    /// Run a fixture-backed mock model endpoint.
    MockModel {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 8081)]
        port: u16,
    },
}

#[derive(Debug, Args)]
struct RuleArgs {
    #[arg(long, default_value = "negation")]
    method: Method,
    #[arg(long, default_value = "mean-conf")]
    tie: TiePolicy,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, default_value = "text")]
    format: ReportFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<negfuse_core::Error> for CliError {
    fn from(e: negfuse_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<negfuse_service::ServiceError> for CliError {
    fn from(e: negfuse_service::ServiceError) -> Self {
        match e {
            negfuse_service::ServiceError::Io(e) => CliError::Internal(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Input(msg) | CliError::Internal(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Combine { manifest, sample, rule } => cmd_combine(&manifest, &sample, rule),
        Command::Evaluate { manifest, labels, rule, output } => {
            cmd_compare(&manifest, &labels, &[rule.method], rule.tie, output)
        }
        Command::Compare { manifest, labels, methods, tie, output } => {
            cmd_compare(&manifest, &labels, &methods, tie, output)
        }
        Command::Simulate { profiles, classes, samples, seed, out } => {
            cmd_simulate(profiles.as_deref(), classes, samples, seed, &out)
        }
        Command::Serve { config, port } => cmd_serve(config, port),
        Command::MockModel { config, port } => cmd_mock_model(&config, port),
    }
}

fn load(manifest_path: &Path) -> Result<(EnsembleManifest, Vec<negfuse_core::EnsembleFrame>), CliError> {
    let (manifest, frames) = load_ensemble(manifest_path)?;
    if manifest.few_models() {
        eprintln!(
            "warning: ensemble has {} model(s); at least 3 are recommended",
            manifest.models.len()
        );
    }
    Ok((manifest, frames))
}

fn cmd_combine(manifest_path: &Path, sample: &str, rule: RuleArgs) -> Result<(), CliError> {
    let (manifest, frames) = load(manifest_path)?;
    let frame = frames
        .iter()
        .find(|f| f.sample_id() == sample)
        .ok_or_else(|| CliError::Input(format!("sample `{sample}` not found in prediction files")))?;
    let names = match &manifest.class_names {
        Some(path) => Some(load_class_names(&manifest.resolve(path))?),
        None => None,
    };
    let label = |c: usize| match names.as_ref().and_then(|n| n.get(c)) {
        Some(name) => format!("{c} ({name})"),
        None => c.to_string(),
    };

    let decision = combine(frame, rule.method, rule.tie);
    let mut out = String::new();
    let _ = writeln!(out, "sample: {sample}");
    let _ = writeln!(out, "method: {}", decision.method);
    let _ = writeln!(out, "predicted: {}", label(decision.predicted.index()));
    let _ = writeln!(out, "tie_broken: {}", decision.tie_broken);
    let scores: Vec<String> = decision.scores.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "scores: {}", scores.join(" "));
    let ranking: Vec<String> = rank_classes(&decision).iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "ranking: {}", ranking.join(" "));
    print!("{out}");
    Ok(())
}

fn cmd_compare(
    manifest_path: &Path,
    labels_path: &Path,
    methods: &[Method],
    tie: TiePolicy,
    output: OutputArgs,
) -> Result<(), CliError> {
    let labels = load_labels(labels_path)?;
    let (_, frames) = load(manifest_path)?;
    let table = compare_methods(&frames, &labels, methods, tie)?;
    let report = write_report(&table, output.format);
    match output.out {
        Some(path) => std::fs::write(&path, report)
            .map_err(|e| CliError::Internal(format!("{}: {e}", path.display()))),
        None => {
            print!("{}", String::from_utf8_lossy(&report));
            Ok(())
        }
    }
}

fn cmd_simulate(
    profiles_path: Option<&Path>,
    classes: usize,
    samples: usize,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let profiles: Vec<ModelProfile> = match profiles_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None => six_model_profiles(),
    };
    let dataset = generate_dataset(&profiles, classes, samples, seed)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Internal(format!("{}: {e}", out.display())))?;
    let manifest = dataset.write_to_dir(out)?;
    for (model, profile) in manifest.models.iter().zip(&profiles) {
        println!(
            "{} target {:.4} realized {:.4}",
            model.model_id, profile.target_accuracy, model.validation_accuracy
        );
    }
    Ok(())
}

fn cmd_serve(config: Option<PathBuf>, port: u16) -> Result<(), CliError> {
    let path = resolve_config_path(config)
        .ok_or_else(|| CliError::Input(format!("no configuration: pass --config or set {CONFIG_ENV}")))?;
    let config = ServiceConfig::load(&path)?;
    if config.endpoints.len() < 3 {
        eprintln!(
            "warning: ensemble has {} model(s); at least 3 are recommended",
            config.endpoints.len()
        );
    }
    let state = AppState::new(config)?;
    runtime()?.block_on(async move {
        let listener = bind(port).await?;
        negfuse_service::serve(state, listener).await.map_err(CliError::from)
    })
}

fn cmd_mock_model(config: &Path, port: u16) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config).map_err(|e| CliError::Input(format!("{}: {e}", config.display())))?;
    let mut mock: MockConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", config.display())))?;
    if mock.fixture.is_relative() {
        if let Some(dir) = config.parent() {
            mock.fixture = dir.join(&mock.fixture);
        }
    }
    let model = MockModel::from_config(&mock)?;
    runtime()?.block_on(async move {
        let listener = bind(port).await?;
        axum::serve(listener, model.router())
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::Internal(e.to_string()))
    })
}

fn runtime() -> Result<tokio::runtime::Runtime, CliError> {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))
}

async fn bind(port: u16) -> Result<tokio::net::TcpListener, CliError> {
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| CliError::Internal(format!("bind {addr}: {e}")))?;
    tracing::info!(%addr, "listening");
    Ok(listener)
}
