//! Live trainer sessions over websocket.
//!
//! Each connection owns one [`Session`]. The session is a plain state
//! machine (no I/O): it consumes client messages and produces the server
//! messages to send back. [`Gateway`] wraps it with a websocket listener,
//! the optional auto-advance timer and the idle timeout.
//!
//! Message shapes are documented in `docs/protocol.md`.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::net::{TcpListener, TcpStream};
use tokio::time::Instant;
use tokio_tungstenite::tungstenite::Message;

use crate::agent::{AgentConfig, StarAgent};
use crate::error::{Error, Result};
use crate::feedback::{DesignKind, Effectiveness, SocialLabel, TrainerSignal};
use crate::piece::Piece;
use crate::placement::PlacementAction;
use crate::runner::{write_records, GameEnd, GameRecord, GameRun, GameStats, MatchConfig};
use crate::social::{AgentId, SocialCodeKind};

pub type SessionId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Phase {
    /// Connected, not started; configuration may still change.
    Idle,
    AwaitingAction,
    AwaitingFeedback,
    Ended,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    #[serde(rename = "match")]
    pub base: MatchConfig,
    pub agent: AgentConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ControlCmd {
    /// Start the session, or resume after `pause`.
    Start,
    /// Stop advancing after the current action.
    Pause,
    /// Replace the session config (only before `start`).
    Config,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum ClientMessage {
    #[serde(rename_all = "camelCase")]
    Feedback {
        #[serde(default)]
        effectiveness: Option<Effectiveness>,
        #[serde(default)]
        social: Option<SocialLabel>,
        /// When present, must name the pending game and step.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        game: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step: Option<usize>,
    },
    #[serde(rename_all = "camelCase")]
    Control {
        cmd: ControlCmd,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        config: Option<SessionConfig>,
    },
}

impl ClientMessage {
    pub fn feedback(signal: TrainerSignal) -> Self {
        ClientMessage::Feedback {
            effectiveness: signal.effectiveness,
            social: signal.social,
            game: None,
            step: None,
        }
    }

    pub fn control(cmd: ControlCmd) -> Self {
        ClientMessage::Control { cmd, config: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WireStats {
    pub rows_cleared: usize,
    pub actions: usize,
    pub permissible_actions: usize,
}

impl From<GameStats> for WireStats {
    fn from(s: GameStats) -> Self {
        WireStats {
            rows_cleared: s.rows_cleared,
            actions: s.actions,
            permissible_actions: s.permissible_actions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ErrorKind {
    Protocol,
    Stale,
    Config,
    Timeout,
    Ended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum ServerMessage {
    #[serde(rename_all = "camelCase")]
    Hello {
        session: SessionId,
        phase: Phase,
        design: DesignKind,
        code: SocialCodeKind,
        games: usize,
        board_width: usize,
        board_height: usize,
    },
    /// The acting agent's chosen action, awaiting feedback. `board` is the
    /// board before the piece lands.
    #[serde(rename_all = "camelCase")]
    State {
        session: SessionId,
        game: usize,
        step: usize,
        board: String,
        piece: Piece,
        acting_agent: AgentId,
        action: PlacementAction,
        /// Totals before this action.
        game_stats: WireStats,
        design: DesignKind,
        code: SocialCodeKind,
    },
    #[serde(rename_all = "camelCase")]
    GameEnd {
        session: SessionId,
        game: usize,
        rows_cleared: usize,
        actions_total: usize,
        permissible_actions: usize,
        pct_permissible: f64,
        end: GameEnd,
        board: String,
    },
    #[serde(rename_all = "camelCase")]
    SessionEnd { session: SessionId, games: usize },
    #[serde(rename_all = "camelCase")]
    Status {
        session: SessionId,
        phase: Phase,
        paused: bool,
    },
    #[serde(rename_all = "camelCase")]
    Error {
        session: SessionId,
        kind: ErrorKind,
        message: String,
    },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

/// One trainer's session: a suite of games whose pace is set by feedback.
#[derive(Debug)]
pub struct Session {
    id: SessionId,
    config: SessionConfig,
    agents: Vec<StarAgent>,
    run: Option<GameRun>,
    phase: Phase,
    paused: bool,
    finished: Vec<GameRecord>,
    unsaved: usize,
}

impl Session {
    pub fn new(id: SessionId, config: SessionConfig) -> Result<Self> {
        let agents = config.base.build_agents(&config.agent)?;
        config.base.validate()?;
        Ok(Session {
            id,
            config,
            agents,
            run: None,
            phase: Phase::Idle,
            paused: false,
            finished: Vec::new(),
            unsaved: 0,
        })
    }

    pub fn id(&self) -> SessionId {
        self.id
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn agents(&self) -> &[StarAgent] {
        &self.agents
    }

    pub fn records(&self) -> &[GameRecord] {
        &self.finished
    }

    /// Game and step of the action awaiting feedback.
    pub fn pending_key(&self) -> Option<(usize, usize)> {
        if self.phase != Phase::AwaitingFeedback {
            return None;
        }
        let run = self.run.as_ref()?;
        Some((run.game(), run.pending()?.step))
    }

    /// Records finished since the previous call.
    pub fn take_unsaved(&mut self) -> &[GameRecord] {
        let from = self.finished.len() - self.unsaved;
        self.unsaved = 0;
        &self.finished[from..]
    }

    pub fn hello(&self) -> ServerMessage {
        let m = &self.config.base;
        ServerMessage::Hello {
            session: self.id,
            phase: self.phase,
            design: m.design,
            code: m.social_code,
            games: m.games,
            board_width: m.board_width,
            board_height: m.board_height,
        }
    }

    fn error(&self, kind: ErrorKind, message: impl Into<String>) -> ServerMessage {
        ServerMessage::Error {
            session: self.id,
            kind,
            message: message.into(),
        }
    }

    fn status(&self) -> ServerMessage {
        ServerMessage::Status {
            session: self.id,
            phase: self.phase,
            paused: self.paused,
        }
    }

    /// Parses and handles one text frame. Malformed input produces an error
    /// reply and leaves the session unchanged.
    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![self.error(ErrorKind::Protocol, format!("malformed message: {e}"))],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        match msg {
            ClientMessage::Control { cmd, config } => self.control(cmd, config),
            ClientMessage::Feedback {
                effectiveness,
                social,
                game,
                step,
            } => {
                if self.phase != Phase::AwaitingFeedback {
                    let kind = if self.phase == Phase::Ended {
                        ErrorKind::Ended
                    } else {
                        ErrorKind::Stale
                    };
                    log::info!(
                        "session {}: feedback rejected in phase {:?}",
                        self.id,
                        self.phase
                    );
                    return vec![self.error(kind, "no action is awaiting feedback")];
                }
                let run = self.run.as_ref().expect("a game is running");
                let pending = run.pending().expect("awaiting feedback");
                if game.is_some_and(|g| g != run.game()) || step.is_some_and(|s| s != pending.step)
                {
                    log::info!(
                        "session {}: stale feedback for game {game:?} step {step:?}",
                        self.id
                    );
                    return vec![self.error(
                        ErrorKind::Stale,
                        format!(
                            "pending action is game {} step {}",
                            run.game(),
                            pending.step
                        ),
                    )];
                }
                self.deliver(TrainerSignal {
                    effectiveness,
                    social,
                })
            }
        }
    }

    /// Auto-advance: the pending action gets no signal on either channel.
    pub fn feedback_timeout(&mut self) -> Vec<ServerMessage> {
        if self.phase != Phase::AwaitingFeedback {
            return Vec::new();
        }
        self.deliver(TrainerSignal::default())
    }

    fn control(&mut self, cmd: ControlCmd, config: Option<SessionConfig>) -> Vec<ServerMessage> {
        match cmd {
            ControlCmd::Config => {
                if self.phase != Phase::Idle {
                    return vec![self.error(
                        ErrorKind::Config,
                        "configuration is only accepted before start",
                    )];
                }
                let Some(config) = config else {
                    return vec![self.error(ErrorKind::Protocol, "config command without config")];
                };
                match Session::new(self.id, config) {
                    Ok(fresh) => {
                        *self = fresh;
                        vec![self.hello()]
                    }
                    Err(e) => vec![self.error(ErrorKind::Config, e.to_string())],
                }
            }
            ControlCmd::Pause => {
                if self.phase == Phase::Ended {
                    return vec![self.error(ErrorKind::Ended, "session has ended")];
                }
                self.paused = true;
                vec![self.status()]
            }
            ControlCmd::Start => match self.phase {
                Phase::Ended => vec![self.error(ErrorKind::Ended, "session has ended")],
                Phase::AwaitingFeedback => {
                    self.paused = false;
                    vec![self.status()]
                }
                Phase::Idle | Phase::AwaitingAction => {
                    self.paused = false;
                    let mut out = vec![self.status()];
                    out.extend(self.advance());
                    out
                }
            },
        }
    }

    fn deliver(&mut self, signal: TrainerSignal) -> Vec<ServerMessage> {
        let run = self.run.as_mut().expect("a game is running");
        if let Err(e) = run.resolve(&self.config.base, &mut self.agents, signal) {
            return vec![self.error(ErrorKind::Protocol, e.to_string())];
        }
        self.phase = Phase::AwaitingAction;
        if self.paused {
            return vec![self.status()];
        }
        self.advance()
    }

    /// Moves on to the next action, finishing games as they end.
    fn advance(&mut self) -> Vec<ServerMessage> {
        let mut out = Vec::new();
        loop {
            if self.run.is_none() {
                let next = self.finished.len();
                if next >= self.config.base.games {
                    self.phase = Phase::Ended;
                    out.push(ServerMessage::SessionEnd {
                        session: self.id,
                        games: next,
                    });
                    return out;
                }
                match GameRun::new(&self.config.base, next) {
                    Ok(run) => self.run = Some(run),
                    Err(e) => {
                        out.push(self.error(ErrorKind::Config, e.to_string()));
                        return out;
                    }
                }
            }
            let run = self.run.as_mut().expect("just ensured");
            let before = run.stats();
            let game = run.game();
            match run.propose(&self.config.base, &mut self.agents) {
                Ok(Some(p)) => {
                    out.push(ServerMessage::State {
                        session: self.id,
                        game,
                        step: p.step,
                        board: p.before.to_grid_string(),
                        piece: p.piece,
                        acting_agent: p.acting,
                        action: p.selection.action,
                        game_stats: before.into(),
                        design: self.config.base.design,
                        code: self.config.base.social_code,
                    });
                    self.phase = Phase::AwaitingFeedback;
                    return out;
                }
                Ok(None) => {
                    let run = self.run.take().expect("running");
                    match run.finish(&self.config.base) {
                        Ok(record) => {
                            let s = &record.summary;
                            out.push(ServerMessage::GameEnd {
                                session: self.id,
                                game: s.game,
                                rows_cleared: s.rows_cleared,
                                actions_total: s.actions_total,
                                permissible_actions: s.permissible_actions,
                                pct_permissible: s.pct_permissible(),
                                end: s.end,
                                board: s.final_board.clone(),
                            });
                            self.finished.push(record);
                            self.unsaved += 1;
                        }
                        Err(e) => {
                            out.push(self.error(ErrorKind::Protocol, e.to_string()));
                            return out;
                        }
                    }
                }
                Err(e) => {
                    out.push(self.error(ErrorKind::Protocol, e.to_string()));
                    return out;
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    /// Config every new session starts from.
    pub session: SessionConfig,
    /// Auto-advance with no signal when the trainer stays silent this long.
    pub feedback_timeout: Option<Duration>,
    /// Close a session that receives nothing for this long.
    pub idle_timeout: Duration,
    /// Directory for per-session NDJSON game records.
    pub record_dir: Option<PathBuf>,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            session: SessionConfig::default(),
            feedback_timeout: None,
            idle_timeout: Duration::from_secs(600),
            record_dir: None,
        }
    }
}

pub struct Gateway {
    listener: TcpListener,
    config: Arc<GatewayConfig>,
    next_id: Arc<AtomicU64>,
}

impl Gateway {
    pub async fn bind(addr: impl tokio::net::ToSocketAddrs, config: GatewayConfig) -> Result<Self> {
        config.session.base.validate()?;
        if let Some(dir) = &config.record_dir {
            std::fs::create_dir_all(dir)?;
        }
        Ok(Gateway {
            listener: TcpListener::bind(addr).await?,
            config: Arc::new(config),
            next_id: Arc::new(AtomicU64::new(1)),
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accepts connections until the task is dropped; every connection runs
    /// its own session task.
    pub async fn run(self) -> Result<()> {
        loop {
            let (stream, peer) = self.listener.accept().await?;
            let id = self.next_id.fetch_add(1, Ordering::Relaxed);
            let config = Arc::clone(&self.config);
            tokio::spawn(async move {
                match serve_connection(stream, id, &config).await {
                    Ok(()) => log::info!("session {id} from {peer} closed"),
                    Err(e) => log::warn!("session {id} from {peer} failed: {e}"),
                }
            });
        }
    }
}

fn save_records(config: &GatewayConfig, session: &mut Session) -> Result<()> {
    let id = session.id();
    let fresh = session.take_unsaved();
    let Some(dir) = &config.record_dir else {
        return Ok(());
    };
    if fresh.is_empty() {
        return Ok(());
    }
    let path = dir.join(format!("session-{id}.ndjson"));
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    write_records(fresh, std::io::BufWriter::new(file))
}

async fn serve_connection(stream: TcpStream, id: SessionId, config: &GatewayConfig) -> Result<()> {
    let ws = tokio_tungstenite::accept_async(stream)
        .await
        .map_err(|e| Error::Protocol(e.to_string()))?;
    let (mut tx, mut rx) = ws.split();
    let mut session = Session::new(id, config.session.clone())?;
    #[allow(clippy::result_large_err)]
    let send = |msgs: Vec<ServerMessage>| msgs.into_iter().map(|m| Ok(Message::text(m.to_json())));

    tx.send(Message::text(session.hello().to_json()))
        .await
        .map_err(|e| Error::Protocol(e.to_string()))?;
    let mut idle_deadline = Instant::now() + config.idle_timeout;
    // the timer belongs to one pending action and survives unrelated messages
    let mut feedback_deadline: Option<(Instant, (usize, usize))> = None;

    loop {
        let auto_advance = async {
            match feedback_deadline {
                Some((d, _)) => tokio::time::sleep_until(d).await,
                None => std::future::pending().await,
            }
        };
        let out = tokio::select! {
            frame = rx.next() => {
                idle_deadline = Instant::now() + config.idle_timeout;
                match frame {
                    None | Some(Ok(Message::Close(_))) => break,
                    Some(Err(e)) => return Err(Error::Protocol(e.to_string())),
                    Some(Ok(Message::Text(text))) => session.handle_text(&text),
                    Some(Ok(Message::Binary(_))) => {
                        vec![ServerMessage::Error { session: id, kind: ErrorKind::Protocol, message: "binary frames are not supported".into() }]
                    }
                    Some(Ok(_)) => continue,
                }
            }
            _ = auto_advance => session.feedback_timeout(),
            _ = tokio::time::sleep_until(idle_deadline) => {
                let timeout = Error::SessionTimeout(config.idle_timeout);
                let msg = ServerMessage::Error { session: id, kind: ErrorKind::Timeout, message: timeout.to_string() };
                let _ = tx.send(Message::text(msg.to_json())).await;
                let _ = tx.close().await;
                save_records(config, &mut session)?;
                return Err(timeout);
            }
        };
        let mut stream = futures_util::stream::iter(send(out));
        tx.send_all(&mut stream)
            .await
            .map_err(|e| Error::Protocol(e.to_string()))?;
        save_records(config, &mut session)?;

        feedback_deadline = match (session.pending_key(), config.feedback_timeout) {
            (Some(key), Some(t)) if !session.is_paused() => match feedback_deadline {
                Some((d, k)) if k == key => Some((d, key)),
                _ => Some((Instant::now() + t, key)),
            },
            _ => None,
        };
    }
    save_records(config, &mut session)
}
