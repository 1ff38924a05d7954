//! The `tortuga` command: an interactive command center, a batch checker,
//! a transcript replayer and the session server.

use std::fs::File;
use std::io::{self, BufRead, BufReader, IsTerminal, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tortuga::dialog::{Features, UserEvent};
use tortuga::session::render::{render_lines, render_text, PROMPT};
use tortuga::session::{
    create_session, read_jsonl, replay, replay_with, Payload, ReplayReport, SessionConfig, SessionEvent,
    TranscriptWriter,
};
use tortuga::{check_source, Diagnostic, PrimitiveRegistry};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    /// One JSON record per line.
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "tortuga", version, about = "Talk to a turtle world in Logo or plain words")]
pub struct Cli {
    /// World seed; drawn at random when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Backend name from the config file, or `mock`.
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// TOML config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Turn the assistant off: plain command center only.
    #[arg(long, global = true)]
    pub no_assistant: bool,
    #[command(subcommand)]
    pub mode: Mode,
}

#[derive(Debug, Subcommand)]
pub enum Mode {
    /// Interactive command center reading from stdin.
    Repl {
        /// Append the session transcript to this file.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Check source files for errors without running them.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Replay transcripts and compare what the engine says.
    Replay {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Also print each replayed conversation as command center text.
        #[arg(long)]
        text: bool,
    },
    /// Serve sessions over HTTP and WebSocket.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Directory for session transcripts.
        #[arg(long)]
        transcripts: Option<PathBuf>,
    },
}

/// Flags win over the config file, which wins over defaults.
pub fn resolve_config(cli: &Cli) -> Result<SessionConfig, String> {
    let mut config = match &cli.config {
        Some(path) => SessionConfig::from_path(path).map_err(|e| e.to_string())?,
        None => SessionConfig::default(),
    };
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    if let Some(b) = &cli.backend {
        config.backend = b.clone();
    }
    if cli.no_assistant {
        config.features = Features::without_assistant();
    }
    Ok(config)
}

pub fn run(cli: &Cli, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let config = match resolve_config(cli) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "tortuga: {e}");
            return EXIT_USAGE;
        }
    };
    let result = match &cli.mode {
        Mode::Repl { transcript } => repl(&config, transcript.as_deref(), cli.format, input, out, err),
        Mode::Check { files } => Ok(check(files, cli.format, out, err)),
        Mode::Replay { files, text } => Ok(replay_files(files, *text, cli, &config, out, err)),
        Mode::Serve { addr, transcripts } => serve(config, *addr, transcripts.clone(), err),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "tortuga: {e}");
        EXIT_USAGE
    })
}

const REPL_HELP: &str = "\
Type Logo code or plain words. Other commands:
  :pick LABEL    choose an offered option
  :run           run the current code
  :edit TEXT     change the current code (\\n for new lines)
  :version N     show version N of the code
  :ask TEXT      ask about the explanation
  :quit          leave";

fn meta_command(line: &str) -> Result<Option<UserEvent>, String> {
    let (cmd, rest) = line.split_once(' ').unwrap_or((line, ""));
    let rest = rest.trim();
    Ok(Some(match cmd {
        ":pick" => UserEvent::OptionSelected(rest.to_owned()),
        ":run" => UserEvent::RunRequested,
        ":edit" => UserEvent::AskEdit(rest.replace("\\n", "\n")),
        ":version" => UserEvent::NavigateVersion(rest.parse().map_err(|_| format!("not a version number: {rest}"))?),
        ":ask" => UserEvent::FollowUp(rest.to_owned()),
        ":quit" => return Ok(None),
        _ => return Err(format!("unknown command {cmd}; try :help")),
    }))
}

fn repl(
    config: &SessionConfig,
    transcript: Option<&Path>,
    format: Format,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<u8, String> {
    let mut session = create_session(config).map_err(|e| e.to_string())?;
    let mut writer = match transcript {
        Some(path) => {
            let mut w = TranscriptWriter::append(path).map_err(|e| format!("{}: {e}", path.display()))?;
            w.write(session.transcript()).map_err(|e| e.to_string())?;
            Some(w)
        }
        None => None,
    };
    let echo = !io::stdin().is_terminal();
    let human = format == Format::Human;
    let mut line = String::new();
    loop {
        if human {
            write!(out, "{PROMPT}").map_err(|e| e.to_string())?;
            out.flush().map_err(|e| e.to_string())?;
        }
        line.clear();
        if input.read_line(&mut line).map_err(|e| e.to_string())? == 0 {
            if human {
                writeln!(out).map_err(|e| e.to_string())?;
            }
            break;
        }
        let text = line.trim_end_matches(['\n', '\r']);
        if human && echo {
            writeln!(out, "{text}").map_err(|e| e.to_string())?;
        }
        let event = if human {
            if text == ":help" {
                writeln!(out, "{REPL_HELP}").map_err(|e| e.to_string())?;
                continue;
            }
            if text.starts_with(':') {
                match meta_command(text) {
                    Ok(Some(e)) => e,
                    Ok(None) => break,
                    Err(msg) => {
                        writeln!(err, "{msg}").map_err(|e| e.to_string())?;
                        continue;
                    }
                }
            } else {
                UserEvent::RawMessage(text.to_owned())
            }
        } else {
            if text.trim().is_empty() {
                continue;
            }
            match serde_json::from_str(text) {
                Ok(e) => e,
                Err(e) => {
                    let record = serde_json::json!({ "error": e.to_string() });
                    writeln!(out, "{record}").map_err(|e| e.to_string())?;
                    continue;
                }
            }
        };
        let events = session.handle_blocking(event);
        if let Some(w) = &mut writer {
            w.write(&events).map_err(|e| format!("transcript: {e}"))?;
        }
        if human {
            let shown: Vec<SessionEvent> = events
                .into_iter()
                .filter(|e| !matches!(e.payload, Payload::User(_)))
                .collect();
            for l in render_lines(&shown, session.features()) {
                writeln!(out, "{l}").map_err(|e| e.to_string())?;
            }
        } else {
            for e in &events {
                let text = serde_json::to_string(e).map_err(|e| e.to_string())?;
                writeln!(out, "{text}").map_err(|e| e.to_string())?;
            }
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct Located<'a> {
    line: usize,
    col: usize,
    #[serde(flatten)]
    diagnostic: &'a Diagnostic,
}

#[derive(Serialize)]
struct CheckRecord<'a> {
    file: String,
    diagnostics: Vec<Located<'a>>,
}

/// Exit 0 when every file is clean, 1 when any has errors, 2 when a file
/// cannot be read.
pub fn check(files: &[PathBuf], format: Format, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let reg = PrimitiveRegistry::builtin();
    let mut status = EXIT_OK;
    for path in files {
        let source = match std::fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(err, "{}: {e}", path.display());
                status = EXIT_USAGE;
                continue;
            }
        };
        let diagnostics = if source.trim().is_empty() {
            Vec::new()
        } else {
            check_source(&source, reg).1
        };
        if diagnostics.iter().any(Diagnostic::is_error) && status == EXIT_OK {
            status = EXIT_FAILED;
        }
        let located: Vec<Located> = diagnostics
            .iter()
            .map(|d| {
                let (line, col) = d.span.line_col(&source);
                Located {
                    line,
                    col,
                    diagnostic: d,
                }
            })
            .collect();
        let _ = match format {
            Format::Structured => {
                let record = CheckRecord {
                    file: path.display().to_string(),
                    diagnostics: located,
                };
                writeln!(out, "{}", serde_json::to_string(&record).expect("plain data"))
            }
            Format::Human if located.is_empty() => writeln!(out, "{}: ok", path.display()),
            Format::Human => located.iter().try_for_each(|l| {
                writeln!(
                    out,
                    "{}:{}:{}: error[{}]: {}",
                    path.display(),
                    l.line,
                    l.col,
                    l.diagnostic.code,
                    l.diagnostic.message
                )
            }),
        };
    }
    status
}

#[derive(Serialize)]
struct ReplayRecord<'a> {
    file: String,
    passed: bool,
    events: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    actual: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    index: Option<usize>,
}

/// Replays one transcript file with the mock backend, or with `backend` when
/// one is given.
pub fn replay_file(
    path: &Path,
    backend: Option<Arc<dyn tortuga::assistant::ModelBackend>>,
) -> Result<ReplayReport, String> {
    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let events = read_jsonl(BufReader::new(file)).map_err(|e| format!("{}: {e}", path.display()))?;
    let report = match backend {
        Some(b) => replay_with(&events, b),
        None => replay(&events),
    };
    report.map_err(|e| format!("{}: {e}", path.display()))
}

fn replay_files(
    files: &[PathBuf],
    text: bool,
    cli: &Cli,
    config: &SessionConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> u8 {
    let backend = match &cli.backend {
        Some(_) => match config.build_backend() {
            Ok(b) => Some(b),
            Err(e) => {
                let _ = writeln!(err, "tortuga: {e}");
                return EXIT_USAGE;
            }
        },
        None => None,
    };
    for path in files {
        let report = match replay_file(path, backend.clone()) {
            Ok(r) => r,
            Err(e) => {
                let _ = writeln!(err, "{e}");
                return EXIT_USAGE;
            }
        };
        let name = path.display().to_string();
        let _ = match cli.format {
            Format::Structured => {
                let d = report.divergence.as_ref();
                let record = ReplayRecord {
                    file: name,
                    passed: report.passed(),
                    events: report.expected.len(),
                    expected: d.and_then(|d| d.expected.as_deref()),
                    actual: d.and_then(|d| d.actual.as_deref()),
                    index: d.map(|d| d.index),
                };
                writeln!(out, "{}", serde_json::to_string(&record).expect("plain data"))
            }
            Format::Human if report.passed() => writeln!(out, "PASS {name} ({} events)", report.expected.len()),
            Format::Human => write!(out, "FAIL {name}\n{}", report.diff()),
        };
        if text && cli.format == Format::Human {
            let _ = write!(out, "{}", render_text(&report.events));
        }
        if !report.passed() {
            return EXIT_FAILED;
        }
    }
    EXIT_OK
}

fn serve(
    config: SessionConfig,
    addr: SocketAddr,
    transcripts: Option<PathBuf>,
    err: &mut dyn Write,
) -> Result<u8, String> {
    config.build_backend().map_err(|e| e.to_string())?;
    if let Some(dir) = &transcripts {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    let server = tortuga_server::ServerConfig {
        session: config,
        transcript_dir: transcripts,
        ..tortuga_server::ServerConfig::default()
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    match runtime.block_on(tortuga_server::serve(addr, server)) {
        Ok(()) => Ok(EXIT_OK),
        Err(e) => {
            let _ = writeln!(err, "tortuga: {e}");
            Ok(EXIT_FAILED)
        }
    }
}
