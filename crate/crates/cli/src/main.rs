use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};
use taleweaver_core::{GameSession, SessionConfig};
use taleweaver_server::api::{self, AppState, SessionView};
use taleweaver_server::store::{load_snapshot, SessionStore, StoreError};
use taleweaver_server::{simulate, Config, HostError, ReplayError, Script};

mod play;

/// Exit codes: 0 success, 1 game-level failure, 2 usage or config error.
const GAME_FAILURE: u8 = 1;
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "taleweaver", version, about = "Tell stories to the King, collect weapons, win the battle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play in the terminal, one line per turn.
    Play {
        #[arg(long)]
        config: Option<PathBuf>,
        /// JSON array of King replies (or a simulate script) used instead of a live model.
        #[arg(long)]
        scripted: Option<PathBuf>,
        /// Session directory root; defaults to storage.root from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the HTTP/WebSocket service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Rebuild a session from its transcript and print the final state.
    Replay {
        #[arg(long)]
        session: PathBuf,
    },
    /// Play a scripted game headlessly with stub images.
    Simulate {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Game settings; defaults apply without it.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl ToString) -> Failure {
    Failure { code, message: message.to_string() }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Play { config, scripted, out, seed } => run_play(config, scripted, out, seed),
        Command::Serve { config } => run_serve(&config),
        Command::Replay { session } => run_replay(&session),
        Command::Simulate { script, out, config } => run_simulate(&script, &out, config.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("taleweaver: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn load_config(path: &Path) -> Result<Config, Failure> {
    Config::load(path).map_err(|e| fail(USAGE, e))
}

fn run_play(config: Option<PathBuf>, scripted: Option<PathBuf>, out: Option<PathBuf>, seed: Option<u64>) -> Result<(), Failure> {
    let config = match (&config, &scripted) {
        (Some(path), _) => load_config(path)?,
        (None, Some(_)) => Config::default(),
        (None, None) => return Err(fail(USAGE, "play needs --config or --scripted")),
    };
    let mut file_config = config.clone();
    if let Some(path) = &scripted {
        file_config.providers.chat.script = Some(path.clone());
    }
    let services = file_config.services().map_err(|e| fail(USAGE, e))?;
    let session_config = file_config.session_config().map_err(|e| fail(USAGE, e))?;
    let root = out.unwrap_or(file_config.storage.root.clone());
    let seed = seed.unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos() as u64));
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    play::run(&root, seed, session_config, services, stdin.lock(), stdout.lock())
}

fn run_serve(path: &Path) -> Result<(), Failure> {
    let config = load_config(path)?;
    let services = config.services().map_err(|e| fail(USAGE, e))?;
    let session_config = config.session_config().map_err(|e| fail(USAGE, e))?;
    let state = AppState::new(SessionStore::new(&config.storage.root), session_config, services);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| fail(GAME_FAILURE, e))?;
    runtime.block_on(async {
        let listener = api::bind(&config.server.bind).await.map_err(|e| fail(GAME_FAILURE, e))?;
        eprintln!("taleweaver: serving on {}", config.server.bind);
        api::serve(listener, state).await.map_err(|e| fail(GAME_FAILURE, e))
    })
}

fn digest(session: &GameSession) -> String {
    let bytes = serde_json::to_vec(session).expect("session serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn run_replay(dir: &Path) -> Result<(), Failure> {
    let session = taleweaver_server::replay_dir(dir).map_err(|e| match e {
        ReplayError::CorruptTranscript { .. } => fail(GAME_FAILURE, e),
        ReplayError::Store(_) => fail(GAME_FAILURE, e),
    })?;
    let state_sha256 = digest(&session);
    let snapshot_sha256 = load_snapshot(dir).ok().map(|s| digest(&s.session));
    let report = serde_json::json!({
        "phase": session.phase,
        "weapons": session.weapons.len(),
        "matches_snapshot": snapshot_sha256.as_ref().map(|s| *s == state_sha256),
        "state_sha256": state_sha256,
        "snapshot_sha256": snapshot_sha256,
        "session": SessionView::from(&session),
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn run_simulate(script_path: &Path, out: &Path, config: Option<&Path>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(script_path).map_err(|e| fail(USAGE, format!("{}: {e}", script_path.display())))?;
    let script = Script::from_json(&text).map_err(|e| fail(USAGE, format!("{}: {e}", script_path.display())))?;
    let session_config = match config {
        Some(path) => load_config(path)?.session_config().map_err(|e| fail(USAGE, e))?,
        None => SessionConfig::default(),
    };
    let summary = simulate(&script, session_config, out).map_err(|e| match e {
        HostError::Store(StoreError::AlreadyExists(_)) | HostError::Session(_) => fail(USAGE, e),
        other => fail(GAME_FAILURE, other),
    })?;
    println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    match summary.outcome.as_deref() {
        Some("won") => Ok(()),
        Some(_) => Err(fail(GAME_FAILURE, "the King won")),
        None => Err(fail(GAME_FAILURE, "script ended before the game did")),
    }
}
