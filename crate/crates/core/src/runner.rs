//! Round-robin games, suites of games, and their replay logs.
//!
//! Agents take turns in fixed team order, each controlling
//! `blocks_per_slice` consecutive pieces. Every action goes through the same
//! loop: draw piece, agent selects, board settles, trainer judges, the design
//! routes the judgment, the agent learns. A game ends when the incoming piece
//! has no legal placement, when an explicit piece list runs out, or when the
//! per-game block limit is reached.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{AgentConfig, Selection, StarAgent};
use crate::board::{hex16, Board, Color, DEFAULT_HEIGHT, DEFAULT_WIDTH};
use crate::error::{Error, Result};
use crate::feedback::{
    route_partial, DesignKind, FeedbackContext, FeedbackSignal, StateRef, TrainerSignal,
};
use crate::piece::{Piece, Shape};
use crate::placement::{apply_placement, legal_placements, PlacementAction};
use crate::proxy::{proxy_signal, ProxyPolicy};
use crate::social::{
    AgentId, GlobalScope, PermissibilityVerdict, SocialCode, SocialCodeKind, TeamProfile,
};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BlockSequence {
    /// Pieces drawn uniformly over shape × color from a generator seeded by
    /// `(seed, game index)`; every design sees the same pieces.
    SeededShared,
    /// The same fixed list for every game.
    ExplicitList { pieces: Vec<Piece> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchConfig {
    pub team: TeamProfile,
    pub blocks_per_slice: usize,
    pub board_width: usize,
    pub board_height: usize,
    pub colors: Vec<Color>,
    pub social_code: SocialCodeKind,
    pub global_scope: GlobalScope,
    pub design: DesignKind,
    pub seed: u64,
    pub games: usize,
    pub block_sequence: BlockSequence,
    pub max_blocks_per_game: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            team: TeamProfile::experiment_pair(),
            blocks_per_slice: 2,
            board_width: DEFAULT_WIDTH,
            board_height: DEFAULT_HEIGHT,
            colors: Color::ALL.to_vec(),
            social_code: SocialCodeKind::Global,
            global_scope: GlobalScope::WholeTeam,
            design: DesignKind::Parallel,
            seed: DEFAULT_SEED,
            games: 10,
            block_sequence: BlockSequence::SeededShared,
            max_blocks_per_game: 500,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.blocks_per_slice == 0 {
            return Err(Error::config("blocks_per_slice must be at least 1"));
        }
        if self.board_width < 4 || self.board_height < 4 {
            return Err(Error::config("board must be at least 4x4"));
        }
        if self.colors.is_empty() {
            return Err(Error::config("at least one color is required"));
        }
        if self
            .colors
            .iter()
            .enumerate()
            .any(|(i, c)| self.colors[..i].contains(c))
        {
            return Err(Error::config("duplicate color"));
        }
        if self.games == 0 {
            return Err(Error::config("games must be at least 1"));
        }
        if self.max_blocks_per_game == 0 {
            return Err(Error::config("max_blocks_per_game must be at least 1"));
        }
        if let BlockSequence::ExplicitList { pieces } = &self.block_sequence {
            if let Some(p) = pieces.iter().find(|p| !self.colors.contains(&p.color)) {
                return Err(Error::config(format!(
                    "piece {p} uses a color outside the color set"
                )));
            }
        }
        Ok(())
    }

    pub fn team_size(&self) -> usize {
        self.team.len()
    }

    pub fn social(&self) -> SocialCode {
        SocialCode {
            kind: self.social_code,
            global_scope: self.global_scope,
        }
    }

    pub fn empty_board(&self) -> Board {
        Board::new(self.board_width, self.board_height)
    }

    /// Index into the team of the agent placing block `block_index`.
    pub fn acting_index(&self, block_index: usize) -> usize {
        acting_index(block_index, self.team_size(), self.blocks_per_slice)
    }

    pub fn pieces(&self, game_index: usize) -> PieceStream {
        match &self.block_sequence {
            BlockSequence::SeededShared => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(game_index as u64);
                PieceStream::Seeded {
                    rng: Box::new(rng),
                    colors: self.colors.clone(),
                }
            }
            BlockSequence::ExplicitList { pieces } => PieceStream::Listed {
                pieces: pieces.clone(),
                next: 0,
            },
        }
    }

    /// Hash of the pieces a game can draw (up to the block limit).
    pub fn game_sequence_hash(&self, game_index: usize) -> String {
        let mut hasher = Sha256::new();
        for p in self.pieces(game_index).take(self.max_blocks_per_game) {
            hasher.update(p.to_string());
        }
        hex16(&hasher.finalize())
    }

    /// Hash of every game's piece sequence; equal across designs and codes
    /// for the same seed.
    pub fn sequence_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for g in 0..self.games {
            hasher.update(self.game_sequence_hash(g));
        }
        hex16(&hasher.finalize())
    }

    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex16(&Sha256::digest(json.as_bytes()))
    }

    /// One fresh agent per team member.
    pub fn build_agents(&self, agent_config: &AgentConfig) -> Result<Vec<StarAgent>> {
        self.team
            .ids()
            .map(|id| StarAgent::new(id, self.design, agent_config.clone(), self.board_width))
            .collect()
    }
}

pub fn acting_index(block_index: usize, team_size: usize, blocks_per_slice: usize) -> usize {
    (block_index / blocks_per_slice) % team_size
}

#[derive(Debug, Clone)]
pub enum PieceStream {
    Seeded {
        rng: Box<ChaCha8Rng>,
        colors: Vec<Color>,
    },
    Listed {
        pieces: Vec<Piece>,
        next: usize,
    },
}

impl Iterator for PieceStream {
    type Item = Piece;

    fn next(&mut self) -> Option<Piece> {
        match self {
            PieceStream::Seeded { rng, colors } => {
                let shape = Shape::ALL[rng.gen_range(0..Shape::ALL.len())];
                let color = colors[rng.gen_range(0..colors.len())];
                Some(Piece::new(shape, color))
            }
            PieceStream::Listed { pieces, next } => {
                let p = pieces.get(*next).copied();
                *next += 1;
                p
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameStats {
    pub game: usize,
    pub step: usize,
    pub rows_cleared: usize,
    pub actions: usize,
    pub permissible_actions: usize,
}

/// Everything a trainer gets to see about one action.
#[derive(Debug, Clone, Copy)]
pub struct StepView<'a> {
    pub game: usize,
    pub step: usize,
    pub acting: AgentId,
    pub before: &'a Board,
    pub piece: Piece,
    pub action: PlacementAction,
    pub after: &'a Board,
    pub rows_cleared: usize,
    pub stats: GameStats,
}

pub trait Trainer {
    fn feedback(&mut self, view: &StepView<'_>) -> Result<TrainerSignal>;

    fn game_over(&mut self, _record: &GameRecord) -> Result<()> {
        Ok(())
    }
}

/// In-process proxy trainer: both judgments for every action.
#[derive(Debug, Clone)]
pub struct ProxyTrainer {
    pub policy: ProxyPolicy,
    pub code: SocialCode,
    pub team: TeamProfile,
}

impl ProxyTrainer {
    pub fn for_config(config: &MatchConfig, policy: ProxyPolicy) -> Self {
        ProxyTrainer {
            policy,
            code: config.social(),
            team: config.team.clone(),
        }
    }
}

impl Trainer for ProxyTrainer {
    fn feedback(&mut self, view: &StepView<'_>) -> Result<TrainerSignal> {
        proxy_signal(
            &self.policy,
            self.code,
            &self.team,
            view.acting,
            view.before,
            view.piece,
            view.action,
        )
        .map(Into::into)
    }
}

/// Never says anything.
#[derive(Debug, Clone, Copy, Default)]
pub struct SilentTrainer;

impl Trainer for SilentTrainer {
    fn feedback(&mut self, _view: &StepView<'_>) -> Result<TrainerSignal> {
        Ok(TrainerSignal::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionSnapshot {
    pub effectiveness: f64,
    pub social_output: f64,
    pub rank: usize,
    pub fallback: bool,
    pub filter_active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub acting_agent: AgentId,
    pub board_before: String,
    pub piece: Piece,
    pub action: PlacementAction,
    pub rows_cleared: usize,
    pub board_after: String,
    pub verdict: PermissibilityVerdict,
    pub signal: TrainerSignal,
    pub delivered: Vec<FeedbackSignal>,
    pub prediction: PredictionSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameHeader {
    pub game: usize,
    pub seed: u64,
    pub design: DesignKind,
    pub social_code: SocialCode,
    pub team: TeamProfile,
    pub board_width: usize,
    pub board_height: usize,
    pub blocks_per_slice: usize,
    pub config_hash: String,
    pub sequence_hash: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameEnd {
    NoLegalAction,
    SequenceExhausted,
    BlockLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSummary {
    pub game: usize,
    pub rows_cleared: usize,
    pub actions_total: usize,
    pub permissible_actions: usize,
    pub end: GameEnd,
    pub final_board: String,
}

impl GameSummary {
    /// Share of permissible actions in percent; a game without actions
    /// counts as fully permissible.
    pub fn pct_permissible(&self) -> f64 {
        if self.actions_total == 0 {
            100.0
        } else {
            100.0 * self.permissible_actions as f64 / self.actions_total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub header: GameHeader,
    pub steps: Vec<StepRecord>,
    pub summary: GameSummary,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum RecordLine {
    Game(GameHeader),
    Step(StepRecord),
    Summary(GameSummary),
}

impl GameRecord {
    pub fn write_ndjson<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer(&mut out, &RecordLine::Game(self.header.clone()))?;
        out.write_all(b"\n")?;
        for s in &self.steps {
            serde_json::to_writer(&mut out, &RecordLine::Step(s.clone()))?;
            out.write_all(b"\n")?;
        }
        serde_json::to_writer(&mut out, &RecordLine::Summary(self.summary.clone()))?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn to_ndjson(&self) -> String {
        let mut buf = Vec::new();
        self.write_ndjson(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn digest(&self) -> String {
        hex16(&Sha256::digest(self.to_ndjson().as_bytes()))
    }

    pub fn pct_permissible(&self) -> f64 {
        self.summary.pct_permissible()
    }
}

pub fn write_records<W: Write>(records: &[GameRecord], mut out: W) -> Result<()> {
    for r in records {
        r.write_ndjson(&mut out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records<R: BufRead>(input: R) -> Result<Vec<GameRecord>> {
    let mut records = Vec::new();
    let mut current: Option<(GameHeader, Vec<StepRecord>)> = None;
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |what: &str| Error::Protocol(format!("record line {}: {what}", n + 1));
        // Tagged-enum buffering would turn numeric map keys into strings, so
        // dispatch on the tag by hand.
        let value: serde_json::Value = serde_json::from_str(&line)?;
        let parsed = match value.get("type").and_then(|t| t.as_str()) {
            Some("game") => RecordLine::Game(serde_json::from_value(value)?),
            Some("step") => RecordLine::Step(serde_json::from_value(value)?),
            Some("summary") => RecordLine::Summary(serde_json::from_value(value)?),
            _ => return Err(malformed("unknown line type")),
        };
        match parsed {
            RecordLine::Game(h) => {
                if current.is_some() {
                    return Err(malformed("game header before previous summary"));
                }
                current = Some((h, Vec::new()));
            }
            RecordLine::Step(s) => current
                .as_mut()
                .ok_or_else(|| malformed("step outside a game"))?
                .1
                .push(s),
            RecordLine::Summary(summary) => {
                let (header, steps) = current
                    .take()
                    .ok_or_else(|| malformed("summary outside a game"))?;
                records.push(GameRecord {
                    header,
                    steps,
                    summary,
                });
            }
        }
    }
    if current.is_some() {
        return Err(Error::Protocol("record ends inside a game".into()));
    }
    Ok(records)
}

fn check_agents(config: &MatchConfig, agents: &[StarAgent]) -> Result<()> {
    if agents.len() != config.team_size()
        || agents
            .iter()
            .zip(config.team.ids())
            .any(|(a, id)| a.id() != id)
    {
        return Err(Error::config("agents must match the team members in order"));
    }
    if let Some(a) = agents.iter().find(|a| a.design() != config.design) {
        return Err(Error::config(format!(
            "agent {} runs design {} but the match uses {}",
            a.id(),
            a.design(),
            config.design
        )));
    }
    Ok(())
}

/// An action that has been chosen and settled but not yet judged.
#[derive(Debug, Clone)]
pub struct PendingStep {
    pub step: usize,
    pub acting: AgentId,
    acting_index: usize,
    pub before: Board,
    pub piece: Piece,
    pub selection: Selection,
    pub after: Board,
    pub rows_cleared: usize,
    pub verdict: PermissibilityVerdict,
    /// Totals including this action.
    pub stats: GameStats,
}

/// One game driven step by step: [`GameRun::propose`] lets the acting agent
/// choose, [`GameRun::resolve`] delivers the trainer's judgment. The batch
/// runner and the live gateway both go through this.
#[derive(Debug)]
pub struct GameRun {
    game: usize,
    board: Board,
    pieces: PieceStream,
    steps: Vec<StepRecord>,
    stats: GameStats,
    pending: Option<PendingStep>,
    end: Option<GameEnd>,
}

impl GameRun {
    pub fn new(config: &MatchConfig, game: usize) -> Result<Self> {
        config.validate()?;
        Ok(GameRun {
            game,
            board: config.empty_board(),
            pieces: config.pieces(game),
            steps: Vec::new(),
            stats: GameStats {
                game,
                ..GameStats::default()
            },
            pending: None,
            end: None,
        })
    }

    pub fn game(&self) -> usize {
        self.game
    }

    pub fn board(&self) -> &Board {
        &self.board
    }

    pub fn stats(&self) -> GameStats {
        self.stats
    }

    pub fn pending(&self) -> Option<&PendingStep> {
        self.pending.as_ref()
    }

    pub fn end(&self) -> Option<GameEnd> {
        self.end
    }

    /// Draws the next piece and has the acting agent choose. Returns `None`
    /// once the game is over. Calling it again before `resolve` returns the
    /// same pending step.
    pub fn propose(
        &mut self,
        config: &MatchConfig,
        agents: &mut [StarAgent],
    ) -> Result<Option<&PendingStep>> {
        if self.end.is_some() {
            return Ok(None);
        }
        if self.pending.is_some() {
            return Ok(self.pending.as_ref());
        }
        check_agents(config, agents)?;
        let step = self.steps.len();
        if step >= config.max_blocks_per_game {
            self.end = Some(GameEnd::BlockLimit);
            return Ok(None);
        }
        let Some(piece) = self.pieces.next() else {
            self.end = Some(GameEnd::SequenceExhausted);
            return Ok(None);
        };
        if legal_placements(&self.board, piece).is_empty() {
            self.end = Some(GameEnd::NoLegalAction);
            return Ok(None);
        }
        let acting_index = config.acting_index(step);
        let agent = &mut agents[acting_index];
        let acting = agent.id();
        let selection = agent.select_action(&self.board, piece)?;
        let (after, rows_cleared) = apply_placement(&self.board, piece, selection.action)?;
        let verdict = config.social().judge_placement(
            &config.team,
            acting,
            &self.board,
            piece,
            selection.action,
        )?;
        let mut stats = self.stats;
        stats.step = step;
        stats.actions += 1;
        stats.rows_cleared += rows_cleared;
        stats.permissible_actions += usize::from(verdict.permissible);
        self.pending = Some(PendingStep {
            step,
            acting,
            acting_index,
            before: self.board.clone(),
            piece,
            selection,
            after,
            rows_cleared,
            verdict,
            stats,
        });
        Ok(self.pending.as_ref())
    }

    /// Routes the trainer's signal for the pending action through the design,
    /// lets the acting agent learn, and settles the board.
    pub fn resolve(
        &mut self,
        config: &MatchConfig,
        agents: &mut [StarAgent],
        signal: TrainerSignal,
    ) -> Result<&StepRecord> {
        let p = self
            .pending
            .take()
            .ok_or(Error::Protocol("no action is awaiting feedback".into()))?;
        let before_digest = p.before.digest();
        let ctx = FeedbackContext {
            agent: p.acting,
            state: StateRef {
                board: before_digest.clone(),
                piece: p.piece,
            },
            action: p.selection.action,
        };
        let events = route_partial(config.design, &signal, &ctx);
        for e in &events {
            if let Err(err) = agents[p.acting_index].ingest_feedback(e) {
                self.pending = Some(p);
                return Err(err);
            }
        }
        self.steps.push(StepRecord {
            step: p.step,
            acting_agent: p.acting,
            board_before: before_digest,
            piece: p.piece,
            action: p.selection.action,
            rows_cleared: p.rows_cleared,
            board_after: p.after.digest(),
            verdict: p.verdict,
            signal,
            delivered: events.iter().map(|e| e.signal).collect(),
            prediction: PredictionSnapshot {
                effectiveness: p.selection.predicted_effectiveness,
                social_output: p.selection.social_output,
                rank: p.selection.audit.rank,
                fallback: p.selection.audit.fallback,
                filter_active: p.selection.audit.filter_active,
            },
        });
        self.board = p.after;
        self.stats = p.stats;
        Ok(self.steps.last().expect("just pushed"))
    }

    /// The finished record. Fails while an action is still pending or the
    /// game has not ended.
    pub fn finish(self, config: &MatchConfig) -> Result<GameRecord> {
        let end = self
            .end
            .ok_or(Error::Protocol("game has not ended".into()))?;
        let code = config.social();
        Ok(GameRecord {
            header: GameHeader {
                game: self.game,
                seed: config.seed,
                design: config.design,
                social_code: code,
                team: config.team.clone(),
                board_width: config.board_width,
                board_height: config.board_height,
                blocks_per_slice: config.blocks_per_slice,
                config_hash: config.digest(),
                sequence_hash: config.game_sequence_hash(self.game),
            },
            summary: GameSummary {
                game: self.game,
                rows_cleared: self.stats.rows_cleared,
                actions_total: self.stats.actions,
                permissible_actions: self.stats.permissible_actions,
                end,
                final_board: self.board.to_grid_string(),
            },
            steps: self.steps,
        })
    }
}

impl PendingStep {
    pub fn view(&self, game: usize) -> StepView<'_> {
        StepView {
            game,
            step: self.step,
            acting: self.acting,
            before: &self.before,
            piece: self.piece,
            action: self.selection.action,
            after: &self.after,
            rows_cleared: self.rows_cleared,
            stats: self.stats,
        }
    }
}

/// Plays one game. `agents` must follow the team order of `config.team`.
pub fn run_game(
    config: &MatchConfig,
    agents: &mut [StarAgent],
    trainer: &mut dyn Trainer,
    game: usize,
) -> Result<GameRecord> {
    check_agents(config, agents)?;
    let mut run = GameRun::new(config, game)?;
    while let Some(p) = run.propose(config, agents)? {
        let signal = trainer.feedback(&p.view(game))?;
        run.resolve(config, agents, signal)?;
    }
    let record = run.finish(config)?;
    trainer.game_over(&record)?;
    Ok(record)
}

/// Plays `config.games` games in a row with the same agents, so learning
/// carries over from one game to the next.
pub fn run_suite(
    config: &MatchConfig,
    agents: &mut [StarAgent],
    trainer: &mut dyn Trainer,
) -> Result<Vec<GameRecord>> {
    config.validate()?;
    (0..config.games)
        .map(|g| run_game(config, agents, trainer, g))
        .collect()
}

/// Fresh agents, proxy trainer, full suite.
pub fn run_proxy_suite(
    config: &MatchConfig,
    agent_config: &AgentConfig,
    policy: ProxyPolicy,
) -> Result<(Vec<GameRecord>, Vec<StarAgent>)> {
    let mut agents = config.build_agents(agent_config)?;
    let mut trainer = ProxyTrainer::for_config(config, policy);
    let records = run_suite(config, &mut agents, &mut trainer)?;
    Ok((records, agents))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReplayTotals {
    pub games: usize,
    pub steps: usize,
    pub rows_cleared: usize,
    pub permissible_actions: usize,
}

/// Re-simulates every game from its piece and action log and checks every
/// board hash, row count, verdict and summary total.
pub fn replay(records: &[GameRecord]) -> Result<ReplayTotals> {
    let mut totals = ReplayTotals::default();
    for rec in records {
        let h = &rec.header;
        let game = h.game;
        let mismatch = |step: usize, what: String| Error::ReplayMismatch { game, step, what };
        let mut board = Board::new(h.board_width, h.board_height);
        let mut rows = 0;
        let mut permissible = 0;
        for (i, s) in rec.steps.iter().enumerate() {
            if s.step != i {
                return Err(mismatch(i, format!("step index {}", s.step)));
            }
            let expected_actor =
                h.team.members()[acting_index(i, h.team.len(), h.blocks_per_slice)].id;
            if s.acting_agent != expected_actor {
                return Err(mismatch(
                    i,
                    format!(
                        "acting agent {} (expected {expected_actor})",
                        s.acting_agent
                    ),
                ));
            }
            if board.digest() != s.board_before {
                return Err(mismatch(i, "board before".into()));
            }
            let verdict = h.social_code.judge_placement(
                &h.team,
                s.acting_agent,
                &board,
                s.piece,
                s.action,
            )?;
            if verdict != s.verdict {
                return Err(mismatch(i, "verdict".into()));
            }
            let (after, cleared) = apply_placement(&board, s.piece, s.action)?;
            if cleared != s.rows_cleared || after.digest() != s.board_after {
                return Err(mismatch(i, "board after".into()));
            }
            rows += cleared;
            permissible += usize::from(verdict.permissible);
            board = after;
        }
        let sum = &rec.summary;
        if sum.rows_cleared != rows
            || sum.actions_total != rec.steps.len()
            || sum.permissible_actions != permissible
            || sum.final_board != board.to_grid_string()
        {
            return Err(mismatch(rec.steps.len(), "summary totals".into()));
        }
        totals.games += 1;
        totals.steps += rec.steps.len();
        totals.rows_cleared += rows;
        totals.permissible_actions += permissible;
    }
    Ok(totals)
}
