//! The `rovergym` command-line tool.

pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rovergym_core::registry::EnvListing;
use rovergym_core::robot::{self, PluginKind, PluginSpec, RobotModel};
use rovergym_core::{EnvError, EnvRegistry};
use rovergym_rl::{Algo, Checkpoint, CheckpointError, RlError};
use rovergym_teleop::{KillReport, ServeConfig, TeleopError};
use thiserror::Error;

use crate::config::{CliConfig, ConfigError, Manifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;

pub const DEFAULT_PORT: u16 = 8765;
/// Session opened by `serve` before any client connects.
pub const DEFAULT_SESSION: &str = "default";

#[derive(Debug, Parser)]
#[command(name = "rovergym", version = config::VERSION, about = "Rover simulation, training and teleoperation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List registered environments with their space dimensions.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Train a policy and write curve.csv, checkpoint.json and manifest.json.
    Train(TrainArgs),
    /// Evaluate a checkpoint with its deterministic policy.
    Eval(EvalArgs),
    /// Parse, validate or compose robot descriptions.
    Robot {
        #[command(subcommand)]
        command: RobotCommand,
    },
    /// Serve teleoperation sessions until killed or interrupted.
    Serve(ServeArgs),
    /// Stop every session of a running server.
    Kill(Endpoint),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// JSON file with `train` and `env` sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override any config field, e.g. `--set train.ppo.lr=1e-3`.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Environment id; taken from the manifest when rerunning one.
    pub env_id: Option<String>,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Rerun a previous run from its manifest.json.
    #[arg(long, conflicts_with = "config")]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub algo: Option<Algo>,
    #[arg(long)]
    pub timesteps: Option<u64>,
    #[arg(long, default_value = "run")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub checkpoint: PathBuf,
    /// Defaults to the environment the checkpoint was trained on.
    #[arg(long)]
    pub env: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub episodes: usize,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Also evaluate a uniform-random policy on the same episodes.
    #[arg(long)]
    pub baseline: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum RobotCommand {
    /// Parse a URDF file into the model JSON (.rmodel.json).
    Parse {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report structural and physical violations of a URDF or model JSON.
    Validate {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Attach plugins and derive the rover geometry.
    Attach(AttachArgs),
}

#[derive(Debug, Args)]
pub struct AttachArgs {
    pub path: PathBuf,
    /// Left and right wheel joints, e.g. `wheel_L2,wheel_R2`.
    #[arg(long, value_name = "LEFT,RIGHT")]
    pub diff_drive: Option<String>,
    /// Sensors take an optional `=LINK` and default to the root link.
    #[arg(long, value_name = "LINK", num_args = 0..=1, require_equals = true, default_missing_value = "")]
    pub imu: Option<String>,
    #[arg(long, value_name = "LINK", num_args = 0..=1, require_equals = true, default_missing_value = "")]
    pub gps: Option<String>,
    #[arg(long, value_name = "LINK", num_args = 0..=1, require_equals = true, default_missing_value = "")]
    pub sonar: Option<String>,
    #[arg(long, value_name = "LINK", num_args = 0..=1, require_equals = true, default_missing_value = "")]
    pub lidar: Option<String>,
    #[arg(long, value_name = "LINK", num_args = 0..=1, require_equals = true, default_missing_value = "")]
    pub magnetic_field: Option<String>,
    /// Extra plugin parameter, e.g. `imu.sigma=0.01`.
    #[arg(long = "param", value_name = "PLUGIN.KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Endpoint {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = DEFAULT_PORT)]
    pub port: u16,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "lsd_force_lidar-v0")]
    pub env: String,
    #[command(flatten)]
    pub endpoint: Endpoint,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Directory with the built browser cockpit.
    #[arg(long, value_name = "DIR", num_args = 0..=1, require_equals = true, default_missing_value = "cockpit/dist")]
    pub cockpit: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Rl(#[from] RlError),
    #[error("{path}: {source}")]
    Checkpoint { path: PathBuf, source: CheckpointError },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: robot::ParseError },
    #[error("{path}: invalid model JSON: {source}")]
    ModelJson { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Plugin(#[from] robot::PluginError),
    #[error("{0} violation(s)")]
    Violations(usize),
    #[error(transparent)]
    Teleop(#[from] TeleopError),
    #[error("{0}")]
    Http(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_DOMAIN,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(io_err(path))
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::List { json } => list(&EnvRegistry::with_defaults(), json, out),
        Command::Train(args) => train(args, out, err),
        Command::Eval(args) => eval(args, out),
        Command::Robot { command } => robot_command(command, out, err),
        Command::Serve(args) => serve(args, out),
        Command::Kill(endpoint) => kill(&endpoint, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(io_err(Path::new("<stdout>")))
}

/// Aligned `id obs act` table.
pub fn listing_table(listing: &[EnvListing]) -> String {
    let width = listing.iter().map(|l| l.id.len()).max().unwrap_or(0).max(2);
    let mut s = format!("{:<width$}  {:>4}  {:>4}\n", "ID", "OBS", "ACT");
    for l in listing {
        s.push_str(&format!(
            "{:<width$}  {:>4}  {:>4}\n",
            l.id, l.observation_dim, l.action_dim
        ));
    }
    s
}

pub fn list(registry: &EnvRegistry, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let listing = registry.listing(&Default::default())?;
    if json {
        emit(
            out,
            &serde_json::to_string_pretty(&listing).expect("listing serializes"),
        )
    } else {
        write!(out, "{}", listing_table(&listing)).map_err(io_err(Path::new("<stdout>")))
    }
}

fn resolve_config(args: &ConfigArgs, base: Option<CliConfig>) -> Result<CliConfig, CliError> {
    let mut config = match base {
        Some(base) => {
            let mut root = base.to_value();
            for o in &args.overrides {
                config::apply_override(&mut root, o)?;
            }
            CliConfig::from_value(root)?
        }
        None => CliConfig::load(args.config.as_deref(), &args.overrides)?,
    };
    if let Some(seed) = args.seed {
        config.train.seed = seed;
    }
    Ok(config)
}

fn train(args: TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let (env_id, base) = match &args.manifest {
        Some(path) => {
            let m = Manifest::load(path)?;
            if args.env_id.as_ref().is_some_and(|id| *id != m.env_id) {
                return Err(CliError::Usage(format!("manifest was recorded for {}", m.env_id)));
            }
            (m.env_id, Some(m.config))
        }
        None => (
            args.env_id
                .clone()
                .ok_or_else(|| CliError::Usage("train needs an ENV_ID or --manifest".into()))?,
            None,
        ),
    };
    let mut config = resolve_config(&args.config, base)?;
    if let Some(algo) = args.algo {
        config.train.algo = algo;
    }
    if let Some(t) = args.timesteps {
        config.train.total_timesteps = t;
    }
    config.train.validate()?;
    std::fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    let manifest = Manifest::new(&env_id, &config);
    write_file(
        &args.out.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    let mut env = rovergym_core::make_with(&env_id, config.train.seed, &config.env)?;
    let outcome = rovergym_rl::train_with(env.as_mut(), &config.train, &mut |row| {
        let _ = writeln!(err, "step {:>9}  mean return {:.4}", row.step, row.value);
    })?;
    write_file(&args.out.join("curve.csv"), &outcome.curve.to_csv())?;
    write_file(&args.out.join("checkpoint.json"), &outcome.checkpoint.to_json())?;
    emit(
        out,
        &format!(
            "trained {} on {} for {} steps ({} episodes); wrote {}",
            config.train.algo.as_str(),
            env_id,
            outcome.steps,
            outcome.episodes,
            args.out.display()
        ),
    )
}

fn eval(args: EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.checkpoint).map_err(io_err(&args.checkpoint))?;
    let checkpoint = Checkpoint::from_json(&text).map_err(|source| CliError::Checkpoint {
        path: args.checkpoint.clone(),
        source,
    })?;
    let config = resolve_config(&args.config, None)?;
    let env_id = args.env.clone().unwrap_or_else(|| checkpoint.env_id.clone());
    let seed = config.train.seed;
    let eval = rovergym_rl::evaluate_checkpoint(&checkpoint, &env_id, &config.env, args.episodes, seed)?;
    let baseline = if args.baseline {
        Some(rovergym_rl::evaluate_random(&env_id, &config.env, args.episodes, seed)?)
    } else {
        None
    };
    if args.json {
        let v = serde_json::json!({ "env_id": env_id, "policy": eval, "random": baseline });
        return emit(out, &serde_json::to_string_pretty(&v).expect("evaluation serializes"));
    }
    let fmt_rms = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
    let mut lines = vec![
        format!("env {env_id}, {} episodes", eval.episodes),
        format!("success rate      {:.3}", eval.success_rate),
        format!("mean reward       {:.4}", eval.mean_reward),
        format!(
            "stability rms     longitudinal {:.4}  lateral {:.4}",
            eval.longitudinal_rms, eval.lateral_rms
        ),
        format!(
            "success-only rms  longitudinal {}  lateral {}",
            fmt_rms(eval.success_longitudinal_rms),
            fmt_rms(eval.success_lateral_rms)
        ),
    ];
    if let Some(b) = baseline {
        lines.push(format!(
            "random baseline   success {:.3}  rms longitudinal {:.4}  lateral {:.4}",
            b.success_rate, b.longitudinal_rms, b.lateral_rms
        ));
    }
    emit(out, &lines.join("\n"))
}

fn load_model(path: &Path, err: &mut dyn Write) -> Result<RobotModel, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    if path.extension().is_some_and(|e| e == "json") {
        return RobotModel::from_json(&text).map_err(|source| CliError::ModelJson {
            path: path.to_path_buf(),
            source,
        });
    }
    let parsed = robot::parse(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    for w in &parsed.warnings {
        let _ = writeln!(err, "warning: {}: {w}", path.display());
    }
    Ok(parsed.model)
}

fn output_model(model: &RobotModel, dest: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match dest {
        Some(p) => write_file(p, &model.to_json()),
        None => emit(out, &model.to_json()),
    }
}

fn robot_command(command: RobotCommand, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        RobotCommand::Parse { path, out: dest } => {
            let model = load_model(&path, err)?;
            output_model(&model, dest.as_deref(), out)
        }
        RobotCommand::Validate { path, json } => {
            let model = load_model(&path, err)?;
            let violations = robot::validate(&model);
            if json {
                emit(
                    out,
                    &serde_json::to_string_pretty(&violations).expect("violations serialize"),
                )?;
            } else if violations.is_empty() {
                emit(out, "no violations")?;
            } else {
                for v in &violations {
                    emit(out, &format!("{}: {v}", v.kind()))?;
                }
            }
            if violations.is_empty() {
                Ok(())
            } else {
                Err(CliError::Violations(violations.len()))
            }
        }
        RobotCommand::Attach(args) => attach(args, out, err),
    }
}

/// Plugin specs from the attach flags.
pub fn plugin_specs(args: &AttachArgs) -> Result<Vec<PluginSpec>, CliError> {
    let mut specs = Vec::new();
    if let Some(pair) = &args.diff_drive {
        let (left, right) = pair
            .split_once(',')
            .filter(|(l, r)| !l.is_empty() && !r.is_empty())
            .ok_or_else(|| CliError::Usage("--diff-drive expects LEFT,RIGHT joint names".into()))?;
        specs.push(
            PluginSpec::new(PluginKind::DiffDrive)
                .param("left_joint", left)
                .param("right_joint", right),
        );
    }
    for (kind, link) in [
        (PluginKind::Imu, &args.imu),
        (PluginKind::Gps, &args.gps),
        (PluginKind::Sonar, &args.sonar),
        (PluginKind::Lidar, &args.lidar),
        (PluginKind::MagneticField, &args.magnetic_field),
    ] {
        if let Some(link) = link {
            let spec = PluginSpec::new(kind);
            specs.push(if link.is_empty() {
                spec
            } else {
                spec.param("link", link)
            });
        }
    }
    for p in &args.params {
        let bad = || CliError::Usage(format!("--param `{p}` must look like plugin.key=value"));
        let (lhs, value) = p.split_once('=').ok_or_else(bad)?;
        let (kind, key) = lhs.split_once('.').ok_or_else(bad)?;
        let kind: PluginKind = kind.parse().map_err(|_| bad())?;
        let spec = specs
            .iter_mut()
            .find(|s| s.kind == kind)
            .ok_or_else(|| CliError::Usage(format!("--param `{p}` names a plugin that is not attached")))?;
        spec.params.insert(key.to_string(), value.to_string());
    }
    if specs.is_empty() {
        return Err(CliError::Usage("attach needs at least one plugin flag".into()));
    }
    Ok(specs)
}

fn attach(args: AttachArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let specs = plugin_specs(&args)?;
    let model = load_model(&args.path, err)?;
    let model = robot::attach_plugins(&model, &specs)?;
    if model.plugin(PluginKind::DiffDrive).is_some() {
        let g = robot::derive_geometry(&model)?;
        let _ = writeln!(
            err,
            "derived geometry: track_width {} wheel_radius {} wheelbase {} chassis_length {} mass {}",
            g.track_width, g.wheel_radius, g.wheelbase, g.chassis_length, g.mass
        );
    }
    output_model(&model, args.out.as_deref(), out)
}

fn endpoint_addr(e: &Endpoint) -> Result<SocketAddr, CliError> {
    use std::net::ToSocketAddrs;
    (e.host.as_str(), e.port)
        .to_socket_addrs()
        .map_err(|source| CliError::Usage(format!("bad address {}:{}: {source}", e.host, e.port)))?
        .next()
        .ok_or_else(|| CliError::Usage(format!("bad address {}:{}", e.host, e.port)))
}

fn runtime() -> Result<tokio::runtime::Runtime, CliError> {
    tokio::runtime::Runtime::new().map_err(io_err(Path::new("<tokio runtime>")))
}

fn serve(args: ServeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = resolve_config(&args.config, None)?;
    let addr = endpoint_addr(&args.endpoint)?;
    let serve_config = ServeConfig {
        env_id: args.env.clone(),
        seed: config.train.seed,
        options: config.env,
        cockpit_dir: args.cockpit.clone(),
        ..ServeConfig::default()
    };
    runtime()?.block_on(async {
        let server = rovergym_teleop::serve(addr, serve_config).await?;
        server.open_session(DEFAULT_SESSION)?;
        let bound = server.local_addr();
        emit(
            out,
            &format!(
                "serving {} on ws://{bound}/session/{{id}} (session `{DEFAULT_SESSION}` running)",
                args.env
            ),
        )?;
        out.flush().map_err(io_err(Path::new("<stdout>")))?;
        let stopped = tokio::select! {
            _ = tokio::signal::ctrl_c() => Some(server.kill_all().await),
            _ = server.shutdown_requested() => None,
        };
        if let Some(n) = stopped {
            emit(out, &format!("interrupted; stopped {n} session(s)"))?;
        }
        server.wait().await.map_err(io_err(Path::new("<listener>")))?;
        Ok(())
    })
}

fn kill(endpoint: &Endpoint, out: &mut dyn Write) -> Result<(), CliError> {
    let addr = endpoint_addr(endpoint)?;
    let report = runtime()?.block_on(async {
        let response = reqwest::Client::new().post(format!("http://{addr}/kill")).send().await;
        match response {
            Ok(r) => r
                .json::<KillReport>()
                .await
                .map(Some)
                .map_err(|e| CliError::Http(e.to_string())),
            Err(e) if e.is_connect() => Ok(None),
            Err(e) => Err(CliError::Http(e.to_string())),
        }
    })?;
    match report {
        None => emit(out, "no sessions"),
        Some(r) => emit(out, &format!("stopped {} session(s)", r.stopped)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_listing_is_just_the_header() {
        assert_eq!(listing_table(&[]), "ID   OBS   ACT\n");
    }

    #[test]
    fn table_columns_align() {
        let rows = [
            EnvListing {
                id: "a-v0".into(),
                observation_dim: 3,
                action_dim: 6,
            },
            EnvListing {
                id: "long_name-v1".into(),
                observation_dim: 773,
                action_dim: 2,
            },
        ];
        let table = listing_table(&rows);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.len() == lines[0].len()));
    }

    #[test]
    fn attach_flags_to_specs() {
        let cli = Cli::try_parse_from([
            "rovergym",
            "robot",
            "attach",
            "x.urdf",
            "--diff-drive",
            "wheel_L2,wheel_R2",
            "--imu",
            "--gps=base_link",
            "--param",
            "imu.sigma=0.01",
        ])
        .unwrap();
        let Command::Robot {
            command: RobotCommand::Attach(args),
        } = cli.command
        else {
            panic!("wrong subcommand")
        };
        let specs = plugin_specs(&args).unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[0].params["left_joint"], "wheel_L2");
        assert!(!specs[1].params.contains_key("link"));
        assert_eq!(specs[1].params["sigma"], "0.01");
        assert_eq!(specs[2].params["link"], "base_link");
    }
}
