//! Seeded random command sequences.
//!
//! Most commands name entities that exist, so sequences get deep into the
//! workflow; a steady fraction use unknown ids, wrong kinds, blank titles or
//! impossible policies so every rejection rule is exercised.

use std::collections::BTreeMap;

use kanbanx_core::{
    BoardId, CardId, CardKind, ChangeSpec, Command, CompletionPolicy, PrincipleId, Stage,
    WipPolicy, Workspace, WorkspaceConfig,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FOCUS_NAMES: [&str; 3] = ["Security", "Sustainability", "Performance"];
pub const MAX_LEN: usize = 200;

pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Shared limit in 1..=5, either completion policy.
    pub fn genesis(&mut self) -> WorkspaceConfig {
        let limit = self.rng.random_range(1..=5);
        let policy = if self.rng.random_bool(0.7) {
            CompletionPolicy::Strict
        } else {
            CompletionPolicy::Warn
        };
        WorkspaceConfig::new("gen", "gen", WipPolicy::shared(limit), policy)
    }

    /// Sequence length in 1..=MAX_LEN.
    pub fn length(&mut self) -> usize {
        self.rng.random_range(1..=MAX_LEN)
    }

    fn title(&mut self, stem: &str, n: u64) -> String {
        if self.rng.random_bool(0.02) {
            "  ".into()
        } else {
            format!("{stem} {n}")
        }
    }

    fn card(&mut self, ids: &[CardId], bogus: &str) -> CardId {
        match ids.choose(&mut self.rng) {
            Some(id) if self.rng.random_bool(0.95) => id.clone(),
            _ => CardId::new(bogus),
        }
    }

    fn changes(&mut self, max: usize) -> Vec<ChangeSpec> {
        let n = self.rng.random_range(0..=max);
        (0..n)
            .map(|i| {
                let title = if self.rng.random_bool(0.01) { String::new() } else { format!("change {i}") };
                ChangeSpec::new(title, "")
            })
            .collect()
    }

    /// One command for the current state.
    pub fn command(&mut self, ws: &Workspace) -> Command {
        let by_kind = |pred: fn(CardKind) -> bool| -> Vec<CardId> {
            ws.cards.values().filter(|c| pred(c.kind)).map(|c| c.id.clone()).collect()
        };
        let dev = by_kind(|k| k.is_dev());
        let tags = by_kind(|k| k == CardKind::Xtag);
        let all: Vec<CardId> = ws.cards.keys().cloned().collect();
        let queued_dev: Vec<CardId> = dev.iter().filter(|c| ws.stage_of(c) == Some(Stage::Queue)).cloned().collect();
        let active: Vec<CardId> = all.iter().filter(|c| ws.stage_of(c) == Some(Stage::Active)).cloned().collect();
        let active_tags: Vec<CardId> = tags.iter().filter(|c| active.contains(c)).cloned().collect();
        let active_dev: Vec<CardId> = dev.iter().filter(|c| active.contains(c)).cloned().collect();
        let focuses: Vec<BoardId> = ws.focus_boards.iter().map(|f| f.id().clone()).collect();
        let principles: Vec<PrincipleId> = ws
            .focus_boards
            .iter()
            .flat_map(|f| f.principles.iter().map(|p| p.id.clone()))
            .collect();

        let roll = self.rng.random_range(0..100u32);
        match roll {
            0..=13 => Command::create_task(self.title("task", ws.counters.tasks + 1)),
            14..=17 => {
                let name = *FOCUS_NAMES.choose(&mut self.rng).expect("non-empty");
                let n = self.rng.random_range(0..=3);
                Command::add_focus(name, (0..n).map(|i| format!("{name} principle {i}")))
            }
            18..=19 => Command::AddPrinciple {
                focus: focuses.choose(&mut self.rng).cloned().unwrap_or_else(|| BoardId::new("F9")),
                statement: self.title("principle", ws.counters.principles + 1),
            },
            20 => Command::RevisePrinciple {
                principle: principles.choose(&mut self.rng).cloned().unwrap_or_else(|| PrincipleId::new("P99")),
                statement: "revised".into(),
            },
            21..=22 => Command::RetirePrinciple {
                principle: principles.choose(&mut self.rng).cloned().unwrap_or_else(|| PrincipleId::new("P99")),
            },
            23..=37 => {
                let task = self.card(&dev, "T999");
                let focus = match focuses.choose(&mut self.rng) {
                    Some(f) if self.rng.random_bool(0.97) => f.clone(),
                    _ => BoardId::new("F9"),
                };
                let own: Vec<PrincipleId> = ws
                    .focus(&focus)
                    .map(|f| f.principles.iter().map(|p| p.id.clone()).collect())
                    .unwrap_or_default();
                let mut cited: Vec<PrincipleId> = Vec::new();
                let r = self.rng.random_range(0..100u32);
                if r < 3 {
                    // none
                } else if r < 6 {
                    cited.extend(principles.choose(&mut self.rng).cloned());
                } else {
                    let k = self.rng.random_range(1..=2);
                    for _ in 0..k {
                        cited.extend(own.choose(&mut self.rng).cloned());
                    }
                    if cited.is_empty() {
                        cited.push(PrincipleId::new("P99"));
                    }
                }
                Command::extract_xtag(task, focus, self.title("tag", ws.counters.xtags + 1), cited)
            }
            38..=43 => {
                let d = self.card(&dev, "C999");
                let x = if self.rng.random_bool(0.05) { self.card(&dev, "X999") } else { self.card(&tags, "X999") };
                Command::link_mark(d, x)
            }
            44..=45 => match ws.marks.choose(&mut self.rng) {
                Some(m) => Command::UnlinkMark {
                    dev_card: m.dev_card.clone(),
                    xtag: m.xtag.clone(),
                },
                None => Command::UnlinkMark {
                    dev_card: "T1".into(),
                    xtag: "X1".into(),
                },
            },
            46..=60 => {
                let pool = if queued_dev.is_empty() || self.rng.random_bool(0.15) { &all } else { &queued_dev };
                Command::start_task(self.card(pool, "T999"))
            }
            61..=72 => {
                let card = self.card(&all, "T999");
                let column = match ws.card(&card).and_then(|c| ws.board(&c.board_id())) {
                    Some(b) if self.rng.random_bool(0.97) => {
                        b.columns.choose(&mut self.rng).expect("columns").name.clone()
                    }
                    _ => "Nowhere".into(),
                };
                Command::move_card(card, column)
            }
            73..=84 => {
                let pool = if active_tags.is_empty() || self.rng.random_bool(0.1) { &all } else { &active_tags };
                let x = self.card(pool, "X999");
                let changes = self.changes(5);
                Command::complete_xtag(x, changes)
            }
            85..=95 => {
                let pool = if active_dev.is_empty() || self.rng.random_bool(0.1) { &all } else { &active_dev };
                Command::complete_task(self.card(pool, "T999"))
            }
            _ => {
                let low = if self.rng.random_bool(0.05) { 0 } else { 1 };
                let shared = self.rng.random_range(low..=5);
                let mut per_board = BTreeMap::new();
                if self.rng.random_bool(0.3) {
                    let mut boards: Vec<BoardId> = vec![BoardId::dev()];
                    boards.extend(focuses.iter().cloned());
                    if self.rng.random_bool(0.1) {
                        boards.push(BoardId::new("F9"));
                    }
                    let b = boards.choose(&mut self.rng).expect("non-empty").clone();
                    per_board.insert(b, self.rng.random_range(1..=5));
                }
                let completion = if self.rng.random_bool(0.6) {
                    CompletionPolicy::Strict
                } else {
                    CompletionPolicy::Warn
                };
                Command::SetPolicy {
                    wip_policy: WipPolicy {
                        shared_limit: shared,
                        per_board_limits: per_board,
                    },
                    completion_policy: completion,
                }
            }
        }
    }
}
