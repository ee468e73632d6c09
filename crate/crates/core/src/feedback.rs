//! Trainer signals and the four ways of delivering them to agents.
//!
//! The trainer always judges an action on two separate axes: was it
//! effective, and was it permissible. A [`DesignKind`] decides what the agent
//! actually receives:
//!
//! | design               | effectiveness channel        | social channel |
//! |----------------------|------------------------------|----------------|
//! | `Parallel`           | trainer's effectiveness      | trainer's label |
//! | `EffectivenessAlone` | trainer's effectiveness      | dropped        |
//! | `SocialAlone`        | dropped                      | trainer's label |
//! | `Blended`            | +1 iff effective and permissible, else -1 | dropped |
//!
//! The social filter only runs for designs that deliver the social channel.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::piece::Piece;
use crate::placement::PlacementAction;
use crate::social::AgentId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    Parallel,
    #[serde(alias = "effect")]
    EffectivenessAlone,
    #[serde(alias = "social")]
    SocialAlone,
    Blended,
}

impl DesignKind {
    pub const ALL: [DesignKind; 4] = [
        DesignKind::Parallel,
        DesignKind::EffectivenessAlone,
        DesignKind::SocialAlone,
        DesignKind::Blended,
    ];

    /// Short name used on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            DesignKind::Parallel => "parallel",
            DesignKind::EffectivenessAlone => "effect",
            DesignKind::SocialAlone => "social",
            DesignKind::Blended => "blended",
        }
    }

    pub fn filter_active(self) -> bool {
        matches!(self, DesignKind::Parallel | DesignKind::SocialAlone)
    }

    pub fn accepts(self, channel: Channel) -> bool {
        match channel {
            Channel::Effectiveness => !matches!(self, DesignKind::SocialAlone),
            Channel::Social => matches!(self, DesignKind::Parallel | DesignKind::SocialAlone),
        }
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for DesignKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "parallel" => Ok(DesignKind::Parallel),
            "effect" | "effectiveness" | "effectiveness_alone" | "effectiveness-alone" => {
                Ok(DesignKind::EffectivenessAlone)
            }
            "social" | "social_alone" | "social-alone" => Ok(DesignKind::SocialAlone),
            "blended" => Ok(DesignKind::Blended),
            other => Err(Error::config(format!("unknown design '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Effectiveness,
    Social,
}

/// Scalar effectiveness feedback; serialized as `1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Effectiveness {
    Effective,
    Ineffective,
}

impl Effectiveness {
    pub fn value(self) -> f64 {
        match self {
            Effectiveness::Effective => 1.0,
            Effectiveness::Ineffective => -1.0,
        }
    }
}

impl TryFrom<i8> for Effectiveness {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Effectiveness::Effective),
            -1 => Ok(Effectiveness::Ineffective),
            other => Err(Error::Protocol(format!(
                "effectiveness must be 1 or -1, got {other}"
            ))),
        }
    }
}

impl From<Effectiveness> for i8 {
    fn from(e: Effectiveness) -> i8 {
        match e {
            Effectiveness::Effective => 1,
            Effectiveness::Ineffective => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SocialLabel {
    Permissible,
    Unacceptable,
}

impl SocialLabel {
    pub fn from_permissible(permissible: bool) -> Self {
        if permissible {
            SocialLabel::Permissible
        } else {
            SocialLabel::Unacceptable
        }
    }

    /// Classifier target: 1 for permissible, 0 for unacceptable.
    pub fn target(self) -> f64 {
        match self {
            SocialLabel::Permissible => 1.0,
            SocialLabel::Unacceptable => 0.0,
        }
    }
}

/// Both judgments, as the proxy always produces them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RawTrainerSignal {
    pub effectiveness: Effectiveness,
    pub social: SocialLabel,
}

/// What a live trainer actually pressed; either button may be missing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrainerSignal {
    pub effectiveness: Option<Effectiveness>,
    pub social: Option<SocialLabel>,
}

impl From<RawTrainerSignal> for TrainerSignal {
    fn from(raw: RawTrainerSignal) -> Self {
        TrainerSignal {
            effectiveness: Some(raw.effectiveness),
            social: Some(raw.social),
        }
    }
}

impl TrainerSignal {
    pub fn complete(&self) -> Option<RawTrainerSignal> {
        Some(RawTrainerSignal {
            effectiveness: self.effectiveness?,
            social: self.social?,
        })
    }
}

/// Channel-tagged value. The enum ties each channel to its value domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "channel", content = "value", rename_all = "snake_case")]
pub enum FeedbackSignal {
    Effectiveness(Effectiveness),
    Social(SocialLabel),
}

impl FeedbackSignal {
    pub fn channel(&self) -> Channel {
        match self {
            FeedbackSignal::Effectiveness(_) => Channel::Effectiveness,
            FeedbackSignal::Social(_) => Channel::Social,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateRef {
    /// [`crate::board::Board::digest`] of the board the action was taken on.
    pub board: String,
    pub piece: Piece,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeedbackContext {
    pub agent: AgentId,
    pub state: StateRef,
    pub action: PlacementAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub agent: AgentId,
    pub state: StateRef,
    pub action: PlacementAction,
    pub signal: FeedbackSignal,
}

impl FeedbackEvent {
    pub fn new(ctx: &FeedbackContext, signal: FeedbackSignal) -> Self {
        FeedbackEvent {
            agent: ctx.agent,
            state: ctx.state.clone(),
            action: ctx.action,
            signal,
        }
    }

    pub fn channel(&self) -> Channel {
        self.signal.channel()
    }
}

/// Turn the trainer's two judgments into the events `design` delivers.
pub fn route(
    design: DesignKind,
    raw: RawTrainerSignal,
    ctx: &FeedbackContext,
) -> Vec<FeedbackEvent> {
    route_partial(design, &raw.into(), ctx)
}

/// Like [`route`] but tolerates missing channels: a missing judgment
/// produces no event. Under `Blended` a single known negative judgment is
/// enough to emit `-1`; `+1` needs both judgments present and positive.
pub fn route_partial(
    design: DesignKind,
    signal: &TrainerSignal,
    ctx: &FeedbackContext,
) -> Vec<FeedbackEvent> {
    let eff = signal.effectiveness.map(FeedbackSignal::Effectiveness);
    let soc = signal.social.map(FeedbackSignal::Social);
    let signals: Vec<FeedbackSignal> = match design {
        DesignKind::Parallel => eff.into_iter().chain(soc).collect(),
        DesignKind::EffectivenessAlone => eff.into_iter().collect(),
        DesignKind::SocialAlone => soc.into_iter().collect(),
        DesignKind::Blended => {
            let negative = signal.effectiveness == Some(Effectiveness::Ineffective)
                || signal.social == Some(SocialLabel::Unacceptable);
            let positive = signal.effectiveness == Some(Effectiveness::Effective)
                && signal.social == Some(SocialLabel::Permissible);
            if negative {
                vec![FeedbackSignal::Effectiveness(Effectiveness::Ineffective)]
            } else if positive {
                vec![FeedbackSignal::Effectiveness(Effectiveness::Effective)]
            } else {
                Vec::new()
            }
        }
    };
    signals
        .into_iter()
        .map(|s| FeedbackEvent::new(ctx, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Color;
    use crate::piece::Shape;

    fn ctx() -> FeedbackContext {
        FeedbackContext {
            agent: AgentId(1),
            state: StateRef {
                board: "00".into(),
                piece: Piece::new(Shape::T, Color::Red),
            },
            action: PlacementAction::new(0, 3),
        }
    }

    fn raw(e: Effectiveness, s: SocialLabel) -> RawTrainerSignal {
        RawTrainerSignal {
            effectiveness: e,
            social: s,
        }
    }

    fn signals(events: &[FeedbackEvent]) -> Vec<FeedbackSignal> {
        events.iter().map(|e| e.signal).collect()
    }

    #[test]
    fn parallel_emits_both() {
        let ev = route(
            DesignKind::Parallel,
            raw(Effectiveness::Effective, SocialLabel::Permissible),
            &ctx(),
        );
        assert_eq!(
            signals(&ev),
            vec![
                FeedbackSignal::Effectiveness(Effectiveness::Effective),
                FeedbackSignal::Social(SocialLabel::Permissible)
            ]
        );
    }

    #[test]
    fn blended_effective_but_unacceptable_is_negative() {
        let ev = route(
            DesignKind::Blended,
            raw(Effectiveness::Effective, SocialLabel::Unacceptable),
            &ctx(),
        );
        assert_eq!(
            signals(&ev),
            vec![FeedbackSignal::Effectiveness(Effectiveness::Ineffective)]
        );
    }

    #[test]
    fn social_alone_discards_effectiveness() {
        let ev = route(
            DesignKind::SocialAlone,
            raw(Effectiveness::Ineffective, SocialLabel::Permissible),
            &ctx(),
        );
        assert_eq!(
            signals(&ev),
            vec![FeedbackSignal::Social(SocialLabel::Permissible)]
        );
    }

    #[test]
    fn blended_is_a_conjunction() {
        for e in [Effectiveness::Effective, Effectiveness::Ineffective] {
            for s in [SocialLabel::Permissible, SocialLabel::Unacceptable] {
                let ev = route(DesignKind::Blended, raw(e, s), &ctx());
                let expected = if e == Effectiveness::Effective && s == SocialLabel::Permissible {
                    Effectiveness::Effective
                } else {
                    Effectiveness::Ineffective
                };
                assert_eq!(signals(&ev), vec![FeedbackSignal::Effectiveness(expected)]);
            }
        }
    }

    #[test]
    fn partial_signals() {
        let only_social = TrainerSignal {
            effectiveness: None,
            social: Some(SocialLabel::Permissible),
        };
        assert_eq!(
            signals(&route_partial(DesignKind::Parallel, &only_social, &ctx())),
            vec![FeedbackSignal::Social(SocialLabel::Permissible)]
        );
        assert!(route_partial(DesignKind::Blended, &only_social, &ctx()).is_empty());
        assert!(route_partial(DesignKind::EffectivenessAlone, &only_social, &ctx()).is_empty());
        let only_bad = TrainerSignal {
            effectiveness: None,
            social: Some(SocialLabel::Unacceptable),
        };
        assert_eq!(
            signals(&route_partial(DesignKind::Blended, &only_bad, &ctx())),
            vec![FeedbackSignal::Effectiveness(Effectiveness::Ineffective)]
        );
        assert!(route_partial(DesignKind::Parallel, &TrainerSignal::default(), &ctx()).is_empty());
    }

    #[test]
    fn events_carry_context() {
        let ev = route(
            DesignKind::Parallel,
            raw(Effectiveness::Ineffective, SocialLabel::Unacceptable),
            &ctx(),
        );
        assert!(ev
            .iter()
            .all(|e| e.agent == AgentId(1) && e.action == PlacementAction::new(0, 3)));
    }

    #[test]
    fn effectiveness_wire_values() {
        assert_eq!(
            serde_json::to_string(&Effectiveness::Ineffective).unwrap(),
            "-1"
        );
        assert_eq!(
            serde_json::from_str::<Effectiveness>("1").unwrap(),
            Effectiveness::Effective
        );
        assert!(serde_json::from_str::<Effectiveness>("0").is_err());
        assert_eq!(
            serde_json::to_string(&SocialLabel::Unacceptable).unwrap(),
            "\"unacceptable\""
        );
    }

    #[test]
    fn design_channels() {
        assert!(DesignKind::Parallel.filter_active());
        assert!(DesignKind::SocialAlone.filter_active());
        assert!(!DesignKind::Blended.filter_active());
        assert!(!DesignKind::EffectivenessAlone.filter_active());
        assert!(!DesignKind::SocialAlone.accepts(Channel::Effectiveness));
        assert!(!DesignKind::Blended.accepts(Channel::Social));
        for d in DesignKind::ALL {
            assert_eq!(d.cli_name().parse::<DesignKind>().unwrap(), d);
        }
    }
}
