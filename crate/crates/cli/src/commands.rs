use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use dialogos_core::analytics::{
    format_ratio, mode_usage_ratio, participation_stats, profile_report,
};
use dialogos_core::corpus::{generate, CorpusSpec};
use dialogos_core::events::{emit_log, parse_log, EventLog, EventRecord, LogError};
use dialogos_core::forum::{
    build_session_grid, consecutive_fraction, group_sessions, load_manifest, CourseManifest,
};
use dialogos_core::grammar::{load_grammar, ActGrammar};
use dialogos_core::ids::ChannelId;
use dialogos_core::peers::Directory;
use dialogos_core::world::replay;
use dialogos_server::net::now_ms;
use dialogos_server::{Hub, Server};
use thiserror::Error;

use crate::parse::{format_duration, Window};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or input files that do not load.
    #[error("{0}")]
    Usage(String),
    /// Inputs load but their content is unusable.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn log_error(e: LogError) -> CliError {
    let msg = format!("{}: {e}", e.code());
    match e {
        LogError::CorruptLog { .. } | LogError::SchemaViolation(_) => CliError::Data(msg),
        LogError::StorageFailure(_) => CliError::Usage(msg),
    }
}

fn grammar_from(path: Option<&Path>) -> Result<ActGrammar> {
    match path {
        None => Ok(ActGrammar::splach()),
        Some(p) => load_grammar(&read(p)?).map_err(|e| {
            CliError::Usage(format!("{}: {}: {e}", e.code(), p.display()))
        }),
    }
}

fn manifest_from(path: Option<&Path>) -> Result<CourseManifest> {
    match path {
        None => Ok(CourseManifest::fixture()),
        Some(p) => load_manifest(&read(p)?).map_err(|e| {
            CliError::Usage(format!("{}: {}: {e}", e.code(), p.display()))
        }),
    }
}

fn read_log(path: &Path) -> Result<Vec<EventRecord>> {
    parse_log(&read(path)?).map_err(log_error)
}

fn out() -> std::io::StdoutLock<'static> {
    std::io::stdout().lock()
}

fn write_all(text: &str) -> Result<()> {
    let mut o = out();
    o.write_all(text.as_bytes())
        .and_then(|_| o.flush())
        .map_err(|e| CliError::Data(format!("cannot write output: {e}")))
}

pub fn serve(
    grammar: &Path,
    manifest: &Path,
    log_path: &Path,
    listen: &str,
    directory: Option<&Path>,
) -> Result<()> {
    let grammar = Arc::new(grammar_from(Some(grammar))?);
    let manifest = Arc::new(manifest_from(Some(manifest))?);
    let seed = directory
        .map(|p| {
            Directory::from_json(&read(p)?)
                .map_err(|e| CliError::Usage(format!("{}: {}: {e}", e.code(), p.display())))
        })
        .transpose()?;
    let log = EventLog::open(log_path).map_err(log_error)?;
    let replayed = log.len();
    let world = replay(log.records(), grammar, Some(manifest)).map_err(log_error)?;
    let mut hub = Hub::new(world, log);
    let now = now_ms();
    if let Some(seed) = &seed {
        let n = hub
            .seed_directory(seed, now)
            .map_err(|e| CliError::Data(format!("directory bootstrap failed: {e}")))?;
        log::info!("bootstrap added {n} directory entries");
    }
    hub.reset_presence(now)
        .map_err(|e| CliError::Data(format!("presence reset failed: {e}")))?;
    let horizon = hub.world().seq();

    let rt = tokio::runtime::Runtime::new()
        .map_err(|e| CliError::Usage(format!("cannot start runtime: {e}")))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(listen)
            .await
            .map_err(|e| CliError::Usage(format!("cannot listen on {listen}: {e}")))?;
        let addr = listener
            .local_addr()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        write_all(&format!(
            "dialogos listening on {addr} (replayed {replayed} events, seq horizon {horizon})\n"
        ))?;
        Server::new(hub)
            .run(listener)
            .await
            .map_err(|e| CliError::Data(format!("server stopped: {e}")))
    })
}

pub fn report_profiles(log: &Path, window: Option<Window>) -> Result<()> {
    let records = read_log(log)?;
    let slice: Vec<EventRecord> = match window {
        Some(w) => records.into_iter().filter(|r| w.contains(r.seq)).collect(),
        None => records,
    };
    write_all(&profile_report(&participation_stats(&slice)))
}

pub fn report_usage(log: &Path) -> Result<()> {
    let records = read_log(log)?;
    let u = mode_usage_ratio(&records);
    write_all(&format!(
        "metric\tcontextual_per_global\nopened_ratio\t{}\nsent_ratio\t{}\n",
        u.opened_ratio, u.sent_ratio
    ))
}

pub fn report_sessions(
    log: &Path,
    channel: &str,
    delta: Duration,
    grid: bool,
    grammar: Option<&Path>,
    manifest: Option<&Path>,
) -> Result<()> {
    let grammar = Arc::new(grammar_from(grammar)?);
    let manifest = Arc::new(manifest_from(manifest)?);
    let records = read_log(log)?;
    let world = replay(&records, grammar, Some(manifest)).map_err(log_error)?;
    let ch = world
        .channel(&ChannelId::from(channel))
        .map_err(|e| CliError::Data(format!("{}: {e}", e.code())))?;
    let forum_err = |e: dialogos_core::forum::ForumError| CliError::Data(format!("{}: {e}", e.code()));
    let sessions = group_sessions(ch.tree.messages(), delta).map_err(forum_err)?;
    let fraction = consecutive_fraction(ch.tree.messages(), delta).map_err(forum_err)?;

    let mut text = format!(
        "# channel={channel} delta={} messages={} sessions={} consecutive_fraction={}\n",
        format_duration(delta),
        ch.tree.len(),
        sessions.len(),
        format_ratio(fraction)
    );
    let join = |ids: &[dialogos_core::InterventionId]| {
        ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
    };
    if grid {
        let g = build_session_grid(&ch.tree, delta).map_err(forum_err)?;
        text.push_str("thread");
        for (i, s) in g.columns.iter().enumerate() {
            text.push_str(&format!("\ts{}:{}", i + 1, s.author));
        }
        text.push('\n');
        for (r, root) in g.rows.iter().enumerate() {
            text.push_str(&root.to_string());
            for c in 0..g.columns.len() {
                text.push('\t');
                text.push_str(&join(g.cell(r, c)));
            }
            text.push('\n');
        }
    } else {
        text.push_str("session\tauthor\tstart_ts\tend_ts\tmessages\n");
        for (i, s) in sessions.iter().enumerate() {
            text.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                i + 1,
                s.author,
                s.start_ts,
                s.end_ts,
                join(&s.members)
            ));
        }
    }
    write_all(&text)
}

pub fn gen_corpus(users: usize, messages: usize, consecutive: f64, seed: u64) -> Result<()> {
    let spec = CorpusSpec {
        users,
        messages,
        consecutive,
        seed,
    };
    let corpus = generate(&spec, &ActGrammar::splach())
        .map_err(|e| CliError::Usage(format!("invalid corpus request: {e}")))?;
    write_all(&emit_log(&corpus.records))?;
    eprintln!(
        "achieved consecutive fraction {} (target {}, {} of {} messages)",
        format_ratio(corpus.achieved),
        format_ratio(consecutive),
        corpus.consecutive_count,
        messages
    );
    Ok(())
}

pub fn check_grammar(path: &Path) -> Result<()> {
    let g = grammar_from(Some(path))?;
    let terminal = g.terminal_acts();
    let mut text = String::new();
    for act in &terminal {
        text.push_str(&format!("warning: terminal act {act} has no successors\n"));
    }
    let tail = match terminal.len() {
        0 => "no terminal acts".to_string(),
        1 => "1 terminal act".to_string(),
        n => format!("{n} terminal acts"),
    };
    text.push_str(&format!(
        "{}: {} acts, {} edges, {tail}\n",
        g.name(),
        g.acts().len(),
        g.edge_count()
    ));
    write_all(&text)
}
