//! The `kanbanx` command-line client.
//!
//! Works directly on a data directory holding one subdirectory per workspace.
//! Each mutating subcommand maps to exactly one engine command and runs under
//! an exclusive lock on the workspace directory.
//!
//! Exit codes: 0 accepted, 2 rejected by the engine (rule name on stderr),
//! 1 usage or I/O error.

pub mod render;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kanbanx_core::metrics::{card_table, cumulative_flow_csv};
use kanbanx_core::model::slug;
use kanbanx_core::store::{self, WorkspaceLock, GENESIS_FILE};
use kanbanx_core::{
    coverage_ratio, execute, flow_metrics, list_presets, load_preset, principle_usage, trace,
    validate, BoardId, CardId, ChangeSpec, Command, CompletionPolicy, FileStore, FocusTemplate,
    PrincipleId, WipPolicy, Workspace, WorkspaceConfig,
};
use serde::Serialize;
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REJECTED: i32 = 2;

/// Snapshot cadence for workspaces written by the CLI.
const SNAPSHOT_EVERY: u64 = 100;

#[derive(Debug, Parser)]
#[command(name = "kanbanx", version, about = "Kanban boards with parallel focus boards")]
pub struct Cli {
    /// Directory holding one subdirectory per workspace.
    #[arg(long, env = "KANBANX_DATA_DIR", default_value = ".kanbanx", global = true)]
    pub data_dir: PathBuf,
    /// Workspace id; may be omitted when the data directory holds exactly one.
    #[arg(long, short = 'w', global = true)]
    pub workspace: Option<String>,
    #[arg(long, value_enum, default_value_t = Output::Human, global = true)]
    pub output: Output,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Human,
    Structured,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Completion {
    Strict,
    Warn,
}

impl From<Completion> for CompletionPolicy {
    fn from(c: Completion) -> Self {
        match c {
            Completion::Strict => CompletionPolicy::Strict,
            Completion::Warn => CompletionPolicy::Warn,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Create a workspace.
    Init {
        name: String,
        /// Defaults to a slug of the name.
        #[arg(long)]
        id: Option<String>,
        /// Shared WIP limit across all boards.
        #[arg(long, default_value_t = 3)]
        wip: u32,
        #[arg(long, value_enum, default_value_t = Completion::Strict)]
        completion: Completion,
    },
    /// Add a task to the back of the development backlog.
    Task {
        title: String,
        #[arg(long, default_value = "")]
        description: String,
    },
    /// Add or list focus boards.
    #[command(subcommand)]
    Focus(FocusCmd),
    /// Extract an X-Tag from a development card onto a focus board.
    Extract {
        task: String,
        /// Focus id or name.
        focus: String,
        title: String,
        /// Principle ids the X-Tag cites.
        #[arg(long = "principle", short = 'p')]
        principles: Vec<String>,
        #[arg(long, default_value = "")]
        description: String,
    },
    /// Mark a development card with an existing X-Tag.
    Link {
        dev_card: String,
        xtag: String,
        #[arg(long)]
        note: Option<String>,
    },
    /// Remove a mark between a development card and an X-Tag.
    Unlink {
        dev_card: String,
        xtag: String,
    },
    /// Start a task together with its queued X-Tags.
    Start { task: String },
    /// Move a card to a named column on its own board.
    Move { card: String, column: String },
    /// Finish an X-Tag, feeding change tasks to the front of the backlog.
    DoneXtag {
        xtag: String,
        /// `title` or `title::description`; repeat for several, in order.
        #[arg(long = "change", short = 'c')]
        changes: Vec<String>,
    },
    /// Finish a development card; gated on its X-Tags.
    DoneTask { task: String },
    /// Add, revise, retire or look up principles.
    #[command(subcommand)]
    Principle(PrincipleCmd),
    /// Replace the WIP and completion policies.
    Policy(PolicyArgs),
    /// Print every board.
    Board,
    /// Coverage and flow metrics.
    #[command(subcommand)]
    Metrics(MetricsCmd),
    /// Print everything connected to a card.
    Trace { card: String },
    /// Write the portable event export.
    Export {
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Create a workspace from an export.
    Import {
        /// Target data directory; defaults to --data-dir.
        #[arg(long)]
        into: Option<PathBuf>,
        /// Read from a file instead of stdin.
        file: Option<PathBuf>,
    },
    /// List, show or apply focus presets.
    #[command(subcommand)]
    Preset(PresetCmd),
    /// Print the workspace checksum.
    Checksum,
    /// Check every structural invariant.
    Validate,
}

#[derive(Debug, Subcommand)]
pub enum FocusCmd {
    Add {
        name: String,
        #[arg(long = "principle", short = 'p')]
        principles: Vec<String>,
    },
    List,
}

#[derive(Debug, Subcommand)]
pub enum PrincipleCmd {
    /// Add a principle to a focus board.
    Add { focus: String, statement: String },
    /// Replace the statement and bump the version.
    Revise { principle: String, statement: String },
    /// Stop new X-Tags from citing the principle.
    Retire { principle: String },
    /// X-Tags citing the principle and the cards they mark.
    Usage { principle: String },
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    /// Shared limit; keeps the current one when omitted.
    #[arg(long)]
    pub wip: Option<u32>,
    /// Per-board cap as `board=limit`; replaces all current caps when given.
    #[arg(long = "board-limit")]
    pub board_limits: Vec<String>,
    /// Drop every per-board cap.
    #[arg(long, conflicts_with = "board_limits")]
    pub clear_board_limits: bool,
    #[arg(long, value_enum)]
    pub completion: Option<Completion>,
}

#[derive(Debug, Subcommand)]
pub enum MetricsCmd {
    /// Share of unfinished development cards marked into a focus.
    Coverage {
        #[arg(long)]
        focus: Option<String>,
    },
    /// Lead and cycle times, throughput and cumulative flow.
    Flow {
        #[arg(long, default_value_t = 10)]
        window: u64,
        /// Print only the cumulative-flow series as CSV.
        #[arg(long)]
        cfd_csv: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum PresetCmd {
    List,
    Show { name: String },
    /// Add the preset's focus board; --file applies a custom template.
    Apply {
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        file: Option<PathBuf>,
    },
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                EXIT_ERROR
            } else {
                let _ = write!(stdout, "{e}");
                EXIT_OK
            };
            return code;
        }
    };
    let mut ctx = Ctx { cli, stdin, stdout, stderr };
    match ctx.dispatch() {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(ctx.stderr, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

struct Ctx<'a> {
    cli: Cli,
    stdin: &'a mut dyn BufRead,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

fn to_ids<T: From<String>>(items: &[String]) -> Vec<T> {
    items.iter().cloned().map(T::from).collect()
}

fn parse_change(spec: &str) -> ChangeSpec {
    match spec.split_once("::") {
        Some((title, description)) => ChangeSpec::new(title.trim(), description.trim()),
        None => ChangeSpec::new(spec.trim(), ""),
    }
}

/// Maps a focus name to its id; anything unknown goes to the engine as is.
fn focus_id(ws: &Workspace, key: &str) -> BoardId {
    ws.resolve_focus(key)
        .map(|f| f.id().clone())
        .unwrap_or_else(|| BoardId::new(key))
}

impl Ctx<'_> {
    fn dispatch(&mut self) -> anyhow::Result<i32> {
        use Cmd::*;
        let cmd = match &self.cli.command {
            Init {
                name,
                id,
                wip,
                completion,
            } => {
                let config = WorkspaceConfig::new(
                    id.clone().unwrap_or_else(|| slug(name)),
                    name.clone(),
                    WipPolicy::shared(*wip),
                    (*completion).into(),
                );
                return self.init(config);
            }
            Task { title, description } => Command::CreateTask {
                title: title.clone(),
                description: description.clone(),
            },
            Focus(FocusCmd::Add { name, principles }) => Command::add_focus(name.clone(), principles.clone()),
            Focus(FocusCmd::List) => {
                let ws = self.read()?;
                let body: Vec<_> = ws
                    .focus_boards
                    .iter()
                    .map(|f| json!({ "id": f.id(), "name": f.focus_name, "principles": f.principles }))
                    .collect();
                let text = render::focus_list(&ws);
                return self.show(&body, &text);
            }
            Extract {
                task,
                focus,
                title,
                principles,
                description,
            } => {
                let ws = self.read()?;
                Command::ExtractXtag {
                    task: task.as_str().into(),
                    focus: focus_id(&ws, focus),
                    title: title.clone(),
                    description: description.clone(),
                    principles: to_ids(principles),
                }
            }
            Link { dev_card, xtag, note } => Command::LinkMark {
                dev_card: dev_card.as_str().into(),
                xtag: xtag.as_str().into(),
                note: note.clone(),
            },
            Unlink { dev_card, xtag } => Command::UnlinkMark {
                dev_card: dev_card.as_str().into(),
                xtag: xtag.as_str().into(),
            },
            Start { task } => Command::start_task(task.as_str()),
            Move { card, column } => Command::move_card(card.as_str(), column.clone()),
            DoneXtag { xtag, changes } => {
                Command::complete_xtag(xtag.as_str(), changes.iter().map(|c| parse_change(c)).collect())
            }
            DoneTask { task } => Command::complete_task(task.as_str()),
            Principle(PrincipleCmd::Add { focus, statement }) => {
                let ws = self.read()?;
                Command::AddPrinciple {
                    focus: focus_id(&ws, focus),
                    statement: statement.clone(),
                }
            }
            Principle(PrincipleCmd::Revise { principle, statement }) => Command::RevisePrinciple {
                principle: principle.as_str().into(),
                statement: statement.clone(),
            },
            Principle(PrincipleCmd::Retire { principle }) => Command::RetirePrinciple {
                principle: principle.as_str().into(),
            },
            Principle(PrincipleCmd::Usage { principle }) => {
                let ws = self.read()?;
                let usage = principle_usage(&ws, &PrincipleId::new(principle.clone()))?;
                let mut text = String::new();
                for u in &usage {
                    let cards: Vec<&str> = u.dev_cards.iter().map(CardId::as_str).collect();
                    text.push_str(&format!("{} <- {}\n", u.xtag, cards.join(" ")));
                }
                if usage.is_empty() {
                    text.push_str("unused\n");
                }
                return self.show(&json!({ "principle": principle, "usage": usage }), &text);
            }
            Policy(args) => {
                let ws = self.read()?;
                self.policy_command(&ws, args)?
            }
            Board => {
                let ws = self.read()?;
                let text = render::board(&ws);
                return self.show(&ws, &text);
            }
            Metrics(MetricsCmd::Coverage { focus }) => {
                let ws = self.read()?;
                let mut all = BTreeMap::new();
                let mut text = String::new();
                for f in &ws.focus_boards {
                    if focus.as_deref().is_some_and(|k| ws.resolve_focus(k).map(|x| x.id()) != Some(f.id())) {
                        continue;
                    }
                    let ratio = coverage_ratio(&ws, f.id())?;
                    text.push_str(&format!("{:<4} {:<20} {ratio:.2}\n", f.id().as_str(), f.focus_name));
                    all.insert(f.id().to_string(), ratio);
                }
                if let (Some(k), true) = (focus, all.is_empty()) {
                    bail!("no focus {k}");
                }
                return self.show(&json!({ "coverage": all }), &text);
            }
            Metrics(MetricsCmd::Flow { window, cfd_csv }) => {
                let (genesis, events) = self.log()?;
                let m = flow_metrics(&Workspace::new(&genesis)?, &events, *window)?;
                if *cfd_csv {
                    self.stdout.write_all(cumulative_flow_csv(&m).as_bytes())?;
                    return Ok(EXIT_OK);
                }
                let mut text = card_table(&m);
                text.push_str("\nthroughput\n");
                for t in &m.throughput {
                    text.push_str(&format!("  {:<6} {:>4}..{:<4} {}\n", t.board.as_str(), t.from_tick, t.to_tick, t.done));
                }
                return self.show(&m, &text);
            }
            Trace { card } => {
                let ws = self.read()?;
                let graph = trace(&ws, &CardId::new(card.clone()))?;
                let text = render::trace(&graph);
                return self.show(&graph, &text);
            }
            Export { out } => {
                let (genesis, events) = self.log()?;
                match out {
                    Some(path) => {
                        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                        store::export(&genesis, &events, std::io::BufWriter::new(file))?;
                    }
                    None => store::export(&genesis, &events, &mut *self.stdout)?,
                }
                return Ok(EXIT_OK);
            }
            Import { into, file } => return self.import(into.clone(), file.clone()),
            Preset(PresetCmd::List) => {
                let names = list_presets();
                let text: String = names.iter().map(|n| format!("{n}\n")).collect();
                return self.show(&names, &text);
            }
            Preset(PresetCmd::Show { name }) => {
                let t = load_preset(name)?;
                let mut text = format!("{}\n", t.focus_name);
                for (i, p) in t.principles.iter().enumerate() {
                    text.push_str(&format!("  [{i}] {p}\n"));
                }
                for x in &t.example_xtags {
                    text.push_str(&format!("  e.g. {}  {:?}\n", x.title, x.principles));
                }
                return self.show(&t, &text);
            }
            Preset(PresetCmd::Apply { name, file }) => {
                let t = match (name, file) {
                    (Some(name), None) => load_preset(name)?,
                    (None, Some(path)) => {
                        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                        FocusTemplate::from_json(&text)?
                    }
                    _ => bail!("give a preset name or --file"),
                };
                t.to_command()
            }
            Checksum => {
                let ws = self.read()?;
                let sum = ws.checksum();
                return self.show(&json!({ "checksum": sum, "clock": ws.clock }), &format!("{sum}\n"));
            }
            Validate => {
                let ws = self.read()?;
                let report = validate(&ws);
                let mut text = String::new();
                for v in &report.violations {
                    text.push_str(&format!("{}: {}\n", v.rule, v.message));
                }
                if report.ok {
                    text.push_str("ok\n");
                }
                self.show(&report, &text)?;
                return Ok(if report.ok { EXIT_OK } else { EXIT_ERROR });
            }
        };
        self.mutate(cmd)
    }

    fn policy_command(&self, ws: &Workspace, args: &PolicyArgs) -> anyhow::Result<Command> {
        let mut wip = ws.wip_policy.clone();
        if let Some(limit) = args.wip {
            wip.shared_limit = limit;
        }
        if args.clear_board_limits {
            wip.per_board_limits.clear();
        }
        if !args.board_limits.is_empty() {
            wip.per_board_limits.clear();
            for spec in &args.board_limits {
                let (board, limit) = spec
                    .split_once('=')
                    .ok_or_else(|| anyhow!("--board-limit expects board=limit, got {spec:?}"))?;
                let limit: u32 = limit.trim().parse().with_context(|| format!("bad limit in {spec:?}"))?;
                let board = match board.trim() {
                    b if BoardId::new(b).is_dev() => BoardId::dev(),
                    b => focus_id(ws, b),
                };
                wip.per_board_limits.insert(board, limit);
            }
        }
        Ok(Command::SetPolicy {
            wip_policy: wip,
            completion_policy: args.completion.map_or(ws.completion_policy, Into::into),
        })
    }

    fn show<T: Serialize + ?Sized>(&mut self, value: &T, text: &str) -> anyhow::Result<i32> {
        match self.cli.output {
            Output::Structured => self.stdout.write_all(structured(value)?.as_bytes())?,
            Output::Human => self.stdout.write_all(text.as_bytes())?,
        }
        Ok(EXIT_OK)
    }

    fn workspace_dir(&self) -> anyhow::Result<PathBuf> {
        let root = &self.cli.data_dir;
        if let Some(id) = &self.cli.workspace {
            let dir = root.join(id);
            if !dir.join(GENESIS_FILE).is_file() {
                bail!("no workspace {id} in {}", root.display());
            }
            return Ok(dir);
        }
        let found = workspaces_in(root)?;
        match found.as_slice() {
            [one] => Ok(root.join(one)),
            [] => bail!("no workspace in {}; run `kanbanx init`", root.display()),
            many => bail!("several workspaces in {} ({}); pass --workspace", root.display(), many.join(", ")),
        }
    }

    fn open(&self) -> anyhow::Result<(WorkspaceLock, FileStore)> {
        let dir = self.workspace_dir()?;
        let lock = WorkspaceLock::acquire(&dir)?;
        let store = FileStore::open(&dir)?;
        Ok((lock, store))
    }

    fn read(&self) -> anyhow::Result<Workspace> {
        let (_lock, store) = self.open()?;
        Ok(store.workspace()?)
    }

    fn log(&self) -> anyhow::Result<(WorkspaceConfig, Vec<kanbanx_core::Event>)> {
        let (_lock, store) = self.open()?;
        Ok((store.genesis().clone(), store.events().to_vec()))
    }

    fn init(&mut self, config: WorkspaceConfig) -> anyhow::Result<i32> {
        let ws = Workspace::new(&config)?;
        let dir = self.cli.data_dir.join(config.id.as_str());
        let _lock = WorkspaceLock::acquire(&dir)?;
        FileStore::create(&dir, config)?;
        let text = format!("created workspace {} in {}\n", ws.id, dir.display());
        self.show(&json!({ "id": ws.id, "dir": dir, "checksum": ws.checksum() }), &text)
    }

    fn mutate(&mut self, cmd: Command) -> anyhow::Result<i32> {
        let (_lock, mut store) = self.open()?;
        let mut ws = store.workspace()?;
        let wall = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true);
        let result = execute(&mut ws, &cmd, Some(wall));
        for e in &result.events {
            store.append(e.clone())?;
        }
        if result.accepted && ws.clock % SNAPSHOT_EVERY == 0 {
            store.write_snapshot(&ws)?;
        }
        for w in &result.warnings {
            writeln!(self.stderr, "warning: {w}")?;
        }
        if let Some(r) = &result.rejection {
            writeln!(self.stderr, "rejected: {}: {}", r.rule, r.message)?;
            if self.cli.output == Output::Structured {
                self.stdout.write_all(structured(&result)?.as_bytes())?;
            }
            return Ok(EXIT_REJECTED);
        }
        let text: String = result
            .events
            .iter()
            .flat_map(|e| &e.effects)
            .map(|e| render::effect_line(e) + "\n")
            .collect();
        self.show(&result, &text)
    }

    fn import(&mut self, into: Option<PathBuf>, file: Option<PathBuf>) -> anyhow::Result<i32> {
        let root = into.unwrap_or_else(|| self.cli.data_dir.clone());
        let (genesis, events) = match &file {
            Some(path) => {
                let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                store::read_export(BufReader::new(f))?
            }
            None => store::read_export(&mut *self.stdin)?,
        };
        let dir = root.join(genesis.id.as_str());
        let _lock = WorkspaceLock::acquire(&dir)?;
        let mut store = FileStore::create(&dir, genesis)?;
        for e in events {
            store.append(e)?;
        }
        let ws = store.workspace()?;
        let text = format!("imported {} ({} events) into {}\n{}\n", ws.id, ws.clock, dir.display(), ws.checksum());
        self.show(&json!({ "id": ws.id, "dir": dir, "clock": ws.clock, "checksum": ws.checksum() }), &text)
    }
}

/// Ids of the workspaces under `root`, sorted.
pub fn workspaces_in(root: &Path) -> anyhow::Result<Vec<String>> {
    let mut found = Vec::new();
    if !root.is_dir() {
        return Ok(found);
    }
    for entry in std::fs::read_dir(root).with_context(|| format!("reading {}", root.display()))? {
        let path = entry?.path();
        if path.join(GENESIS_FILE).is_file() {
            if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                found.push(name.to_owned());
            }
        }
    }
    found.sort();
    Ok(found)
}

/// Pretty JSON with sorted keys, so re-rendering parsed output is a no-op.
pub fn structured<T: Serialize + ?Sized>(value: &T) -> anyhow::Result<String> {
    let value = serde_json::to_value(value)?;
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}
