//! The learning agent: rank placements by predicted effectiveness, walk down
//! the ranking until the social filter accepts one, and learn both models from
//! per-action trainer feedback.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::board::{hex16, Board};
use crate::error::{Error, Result};
use crate::features::{effectiveness_len, placement_outcome, FeatureVector, SOCIAL_LEN};
use crate::feedback::{DesignKind, FeedbackEvent, FeedbackSignal, SocialLabel};
use crate::model::{EffectivenessModel, SocialArchitecture, SocialModel};
use crate::piece::Piece;
use crate::placement::{legal_placements, PlacementAction};

pub use crate::social::AgentId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub effectiveness_learning_rate: f64,
    pub social_learning_rate: f64,
    pub decision_threshold: f64,
    /// Width of the optional hidden layer of the social model; `None` keeps
    /// it a single logistic unit.
    pub social_hidden_width: Option<usize>,
    /// Seed for the hidden layer's initial weights.
    pub init_seed: u64,
    /// After a filtered choice, also train both models as if the trainer had
    /// confirmed it (+1, permissible).
    pub self_training: bool,
    /// Express each candidate's effectiveness features relative to the mean
    /// over all legal placements of the same decision. Rankings within a
    /// decision are unchanged; what the regressor sees loses the component
    /// that only reflects how full the board already is.
    pub relative_effectiveness: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            effectiveness_learning_rate: 0.02,
            social_learning_rate: 0.02,
            decision_threshold: 0.5,
            social_hidden_width: None,
            init_seed: 0,
            self_training: false,
            relative_effectiveness: true,
        }
    }
}

impl AgentConfig {
    pub fn social_architecture(&self) -> SocialArchitecture {
        match self.social_hidden_width {
            None => SocialArchitecture::Linear,
            Some(width) => SocialArchitecture::Hidden { width },
        }
    }

    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex16(&Sha256::digest(json.as_bytes()))
    }
}

/// One candidate as the selector sees it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub action: PlacementAction,
    pub effectiveness: f64,
    pub social_output: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub action: PlacementAction,
    pub effectiveness: f64,
    pub social_output: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditTrail {
    /// Candidates in the order the filter examined them.
    pub examined: Vec<AuditEntry>,
    /// 1-based position of the chosen action in the effectiveness ranking.
    pub rank: usize,
    /// No candidate passed the filter; the most-likely-permissible one was
    /// taken instead.
    pub fallback: bool,
    pub filter_active: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub action: PlacementAction,
    pub predicted_effectiveness: f64,
    pub social_output: f64,
    pub audit: AuditTrail,
}

/// Effective-action selector followed by the social filter.
///
/// Candidates are ranked by predicted effectiveness, highest first, ties kept
/// in the given order. With the filter active the first candidate whose
/// social output reaches `threshold` wins; if none does, the candidate with
/// the highest social output is returned (earliest in the ranking on ties).
/// Returns the index into `candidates` and the audit trail.
pub fn select_from(
    candidates: &[Candidate],
    threshold: f64,
    filter_active: bool,
) -> Option<(usize, AuditTrail)> {
    if candidates.is_empty() {
        return None;
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        candidates[b]
            .effectiveness
            .partial_cmp(&candidates[a].effectiveness)
            .expect("finite predictions")
    });

    let entry = |i: usize, passed: bool| AuditEntry {
        action: candidates[i].action,
        effectiveness: candidates[i].effectiveness,
        social_output: candidates[i].social_output,
        passed,
    };

    if !filter_active {
        let best = order[0];
        return Some((
            best,
            AuditTrail {
                examined: vec![entry(best, true)],
                rank: 1,
                fallback: false,
                filter_active,
            },
        ));
    }

    let mut examined = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        let passed = candidates[i].social_output >= threshold;
        examined.push(entry(i, passed));
        if passed {
            return Some((
                i,
                AuditTrail {
                    examined,
                    rank: pos + 1,
                    fallback: false,
                    filter_active,
                },
            ));
        }
    }

    let mut best_pos = 0;
    for pos in 1..order.len() {
        if candidates[order[pos]].social_output > candidates[order[best_pos]].social_output {
            best_pos = pos;
        }
    }
    Some((
        order[best_pos],
        AuditTrail {
            examined,
            rank: best_pos + 1,
            fallback: true,
            filter_active,
        },
    ))
}

fn center_effectiveness(features: &mut [(PlacementAction, FeatureVector)]) {
    let Some(first) = features.first() else {
        return;
    };
    let n = features.len() as f64;
    let mut mean = vec![0.0; first.1.effectiveness.len()];
    for (_, f) in features.iter() {
        for (m, v) in mean.iter_mut().zip(&f.effectiveness) {
            *m += v / n;
        }
    }
    for (_, f) in features.iter_mut() {
        for (v, m) in f.effectiveness.iter_mut().zip(&mean) {
            *v -= m;
        }
    }
}

#[derive(Debug, Clone)]
struct PendingAction {
    board: String,
    piece: Piece,
    action: PlacementAction,
    features: FeatureVector,
}

#[derive(Debug, Clone)]
pub struct StarAgent {
    id: AgentId,
    design: DesignKind,
    config: AgentConfig,
    effectiveness: EffectivenessModel,
    social: SocialModel,
    pending: Option<PendingAction>,
}

impl StarAgent {
    pub fn new(
        id: AgentId,
        design: DesignKind,
        config: AgentConfig,
        board_width: usize,
    ) -> Result<Self> {
        let effectiveness = EffectivenessModel::new(
            effectiveness_len(board_width),
            config.effectiveness_learning_rate,
        );
        let social = SocialModel::new(
            SOCIAL_LEN,
            config.social_architecture(),
            config.social_learning_rate,
            config.decision_threshold,
            config.init_seed ^ u64::from(id.0),
        )?;
        Ok(StarAgent {
            id,
            design,
            config,
            effectiveness,
            social,
            pending: None,
        })
    }

    pub fn id(&self) -> AgentId {
        self.id
    }

    pub fn design(&self) -> DesignKind {
        self.design
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn effectiveness_model(&self) -> &EffectivenessModel {
        &self.effectiveness
    }

    pub fn social_model(&self) -> &SocialModel {
        &self.social
    }

    pub fn effectiveness_model_mut(&mut self) -> &mut EffectivenessModel {
        &mut self.effectiveness
    }

    pub fn social_model_mut(&mut self) -> &mut SocialModel {
        &mut self.social
    }

    pub fn has_pending(&self) -> bool {
        self.pending.is_some()
    }

    pub fn predict_permissible(
        &self,
        board: &Board,
        piece: Piece,
        action: PlacementAction,
    ) -> Result<bool> {
        let outcome = placement_outcome(board, piece, action)?;
        Ok(self
            .social
            .predict_permissible(&outcome.features.social_input()))
    }

    pub fn candidates(
        &self,
        board: &Board,
        piece: Piece,
    ) -> Result<Vec<(Candidate, FeatureVector)>> {
        let mut features = legal_placements(board, piece)
            .into_iter()
            .map(|action| placement_outcome(board, piece, action).map(|o| (action, o.features)))
            .collect::<Result<Vec<_>>>()?;
        if self.config.relative_effectiveness {
            center_effectiveness(&mut features);
        }
        Ok(features
            .into_iter()
            .map(|(action, f)| {
                let candidate = Candidate {
                    action,
                    effectiveness: self.effectiveness.predict(&f.effectiveness),
                    social_output: self.social.output(&f.social_input()),
                };
                (candidate, f)
            })
            .collect())
    }

    /// Chooses a placement and remembers it as the action awaiting feedback.
    pub fn select_action(&mut self, board: &Board, piece: Piece) -> Result<Selection> {
        let scored = self.candidates(board, piece)?;
        let candidates: Vec<Candidate> = scored.iter().map(|(c, _)| *c).collect();
        let (idx, audit) = select_from(
            &candidates,
            self.social.threshold(),
            self.design.filter_active(),
        )
        .ok_or(Error::NoLegalAction)?;
        let chosen = candidates[idx];
        let features = scored
            .into_iter()
            .nth(idx)
            .map(|(_, f)| f)
            .expect("index in range");

        if self.config.self_training && audit.filter_active && !audit.fallback {
            self.effectiveness.update(&features.effectiveness, 1.0);
            self.social
                .update(&features.social_input(), SocialLabel::Permissible.target());
        }

        self.pending = Some(PendingAction {
            board: board.digest(),
            piece,
            action: chosen.action,
            features,
        });
        Ok(Selection {
            action: chosen.action,
            predicted_effectiveness: chosen.effectiveness,
            social_output: chosen.social_output,
            audit,
        })
    }

    /// Applies one gradient step for the event's channel, provided the event
    /// refers to the pending action and the design delivers that channel.
    pub fn ingest_feedback(&mut self, event: &FeedbackEvent) -> Result<()> {
        let stale = Error::StaleFeedback { agent: self.id };
        if event.agent != self.id {
            return Err(stale);
        }
        let pending = self
            .pending
            .as_ref()
            .ok_or(Error::StaleFeedback { agent: self.id })?;
        if pending.board != event.state.board
            || pending.piece != event.state.piece
            || pending.action != event.action
        {
            return Err(stale);
        }
        if !self.design.accepts(event.channel()) {
            return Ok(());
        }
        match event.signal {
            FeedbackSignal::Effectiveness(v) => self
                .effectiveness
                .update(&pending.features.effectiveness, v.value()),
            FeedbackSignal::Social(label) => self
                .social
                .update(&pending.features.social_input(), label.target()),
        }
        Ok(())
    }

    pub fn checkpoint(&self) -> AgentCheckpoint {
        AgentCheckpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            agent: self.id,
            design: self.design,
            config_hash: self.config.digest(),
            config: self.config.clone(),
            social_architecture: self.social.architecture(),
            effectiveness: self.effectiveness.parameters().to_vec(),
            social: self.social.parameters().to_vec(),
        }
    }

    /// Rebuilds an agent from a checkpoint. The design may differ from the
    /// one the checkpoint was trained under.
    pub fn from_checkpoint(
        cp: &AgentCheckpoint,
        design: DesignKind,
        board_width: usize,
    ) -> Result<Self> {
        if cp.format != CHECKPOINT_FORMAT || cp.version != CHECKPOINT_VERSION {
            return Err(Error::config(format!(
                "unsupported checkpoint {} v{}",
                cp.format, cp.version
            )));
        }
        if cp.config.digest() != cp.config_hash {
            return Err(Error::config("checkpoint config hash mismatch"));
        }
        let mut agent = StarAgent::new(cp.agent, design, cp.config.clone(), board_width)?;
        agent
            .effectiveness
            .set_parameters(cp.effectiveness.clone())?;
        agent.social.set_parameters(cp.social.clone())?;
        Ok(agent)
    }
}

pub const CHECKPOINT_FORMAT: &str = "star-agent";
pub const CHECKPOINT_VERSION: u32 = 1;

/// JSON dump of both models' parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentCheckpoint {
    pub format: String,
    pub version: u32,
    pub agent: AgentId,
    pub design: DesignKind,
    pub config_hash: String,
    pub config: AgentConfig,
    pub social_architecture: SocialArchitecture,
    pub effectiveness: Vec<f64>,
    pub social: Vec<f64>,
}

impl AgentCheckpoint {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}
