//! Scripted stand-in for the human trainer.
//!
//! Effectiveness comes from a fixed board heuristic: an action is called
//! effective when its score is within `approval_margin` of the best legal
//! placement. Permissibility comes straight from the ground-truth social code.

use serde::{Deserialize, Serialize};

use crate::board::Board;
use crate::error::{Error, Result};
use crate::features::BoardStats;
use crate::feedback::{Effectiveness, RawTrainerSignal, SocialLabel};
use crate::piece::Piece;
use crate::placement::{apply_placement, legal_placements, PlacementAction};
use crate::social::{AgentId, SocialCode, TeamProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalWeights {
    pub aggregate_height: f64,
    pub holes: f64,
    pub bumpiness: f64,
    pub rows_cleared: f64,
}

impl Default for EvalWeights {
    fn default() -> Self {
        EvalWeights {
            aggregate_height: -0.51,
            holes: -0.36,
            bumpiness: -0.18,
            rows_cleared: 0.76,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProxyPolicy {
    pub weights: EvalWeights,
    pub approval_margin: f64,
}

impl ProxyPolicy {
    /// Heuristic value of a settled board reached by clearing `rows_cleared`.
    pub fn eval_board(&self, after: &Board, rows_cleared: usize) -> f64 {
        let s = BoardStats::of(after);
        let w = &self.weights;
        w.aggregate_height * s.aggregate_height as f64
            + w.holes * s.holes as f64
            + w.bumpiness * s.bumpiness as f64
            + w.rows_cleared * rows_cleared as f64
    }

    pub fn eval_placement(
        &self,
        before: &Board,
        piece: Piece,
        action: PlacementAction,
    ) -> Result<f64> {
        let (after, cleared) = apply_placement(before, piece, action)?;
        Ok(self.eval_board(&after, cleared))
    }

    /// Scores of every legal placement, in enumeration order.
    pub fn scores(&self, before: &Board, piece: Piece) -> Vec<(PlacementAction, f64)> {
        legal_placements(before, piece)
            .into_iter()
            .map(|a| {
                (
                    a,
                    self.eval_placement(before, piece, a)
                        .expect("legal placement"),
                )
            })
            .collect()
    }

    /// Highest-scoring placement; the earliest one in enumeration order wins
    /// ties.
    pub fn best_placement(&self, before: &Board, piece: Piece) -> Option<(PlacementAction, f64)> {
        best_of(self.scores(before, piece))
    }

    pub fn effectiveness(
        &self,
        before: &Board,
        piece: Piece,
        chosen: PlacementAction,
    ) -> Result<Effectiveness> {
        let chosen_score = self.eval_placement(before, piece, chosen)?;
        let (_, best) = self
            .best_placement(before, piece)
            .ok_or(Error::IllegalPlacement { action: chosen })?;
        Ok(if chosen_score >= best - self.approval_margin {
            Effectiveness::Effective
        } else {
            Effectiveness::Ineffective
        })
    }
}

pub(crate) fn best_of(
    scores: impl IntoIterator<Item = (PlacementAction, f64)>,
) -> Option<(PlacementAction, f64)> {
    scores.into_iter().fold(
        None,
        |best: Option<(PlacementAction, f64)>, (a, s)| match best {
            Some((_, bs)) if bs >= s => best,
            _ => Some((a, s)),
        },
    )
}

/// Both trainer judgments for the action `acting` just chose.
pub fn proxy_signal(
    policy: &ProxyPolicy,
    code: SocialCode,
    team: &TeamProfile,
    acting: AgentId,
    before: &Board,
    piece: Piece,
    chosen: PlacementAction,
) -> Result<RawTrainerSignal> {
    let effectiveness = policy.effectiveness(before, piece, chosen)?;
    let verdict = code.judge_placement(team, acting, before, piece, chosen)?;
    Ok(RawTrainerSignal {
        effectiveness,
        social: SocialLabel::from_permissible(verdict.permissible),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Color;
    use crate::piece::Shape;
    use crate::social::{judge, SocialCodeKind};

    fn bumpy_board() -> Board {
        "\
......
......
......
R.....
RR..G.
RRB.GG"
            .parse()
            .unwrap()
    }

    #[test]
    fn argmax_is_effective() {
        let policy = ProxyPolicy::default();
        let board = bumpy_board();
        let piece = Piece::new(Shape::T, Color::Blue);
        let (best, _) = policy.best_placement(&board, piece).unwrap();
        let sig = proxy_signal(
            &policy,
            SocialCodeKind::Global.into(),
            &TeamProfile::experiment_pair(),
            AgentId(1),
            &board,
            piece,
            best,
        )
        .unwrap();
        assert_eq!(sig.effectiveness, Effectiveness::Effective);
    }

    #[test]
    fn worst_placement_is_ineffective_when_spread_exceeds_margin() {
        let policy = ProxyPolicy {
            approval_margin: 0.5,
            ..ProxyPolicy::default()
        };
        let board = bumpy_board();
        let piece = Piece::new(Shape::I, Color::Green);
        let scores = policy.scores(&board, piece);
        let max = scores.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        let (worst, min) =
            scores
                .iter()
                .copied()
                .fold((scores[0].0, f64::INFINITY), |acc, (a, s)| {
                    if s < acc.1 {
                        (a, s)
                    } else {
                        acc
                    }
                });
        assert!(max - min > policy.approval_margin, "spread {}", max - min);
        assert_eq!(
            policy.effectiveness(&board, piece, worst).unwrap(),
            Effectiveness::Ineffective
        );
    }

    #[test]
    fn margin_admits_near_best() {
        let board = bumpy_board();
        let piece = Piece::new(Shape::O, Color::Red);
        let strict = ProxyPolicy::default();
        let lenient = ProxyPolicy {
            approval_margin: 1e9,
            ..ProxyPolicy::default()
        };
        for a in legal_placements(&board, piece) {
            assert_eq!(
                lenient.effectiveness(&board, piece, a).unwrap(),
                Effectiveness::Effective
            );
        }
        let effective = legal_placements(&board, piece)
            .into_iter()
            .filter(|&a| {
                strict.effectiveness(&board, piece, a).unwrap() == Effectiveness::Effective
            })
            .count();
        assert!(effective >= 1);
    }

    #[test]
    fn social_signal_follows_judge() {
        let policy = ProxyPolicy::default();
        let team = TeamProfile::experiment_pair();
        let board = bumpy_board();
        for color in Color::ALL {
            let piece = Piece::new(Shape::L, color);
            for a in legal_placements(&board, piece) {
                let (after, _) = apply_placement(&board, piece, a).unwrap();
                for kind in SocialCodeKind::ALL {
                    for acting in [AgentId(1), AgentId(2)] {
                        let sig =
                            proxy_signal(&policy, kind.into(), &team, acting, &board, piece, a)
                                .unwrap();
                        let truth = judge(kind, &team, acting, &board, &after).unwrap();
                        assert_eq!(sig.social == SocialLabel::Permissible, truth.permissible);
                    }
                }
            }
        }
    }

    #[test]
    fn harmful_move_is_unacceptable_even_if_effective() {
        // Agent 2 strongly dislikes red-green; flattening the stack by putting
        // the red O next to the green block is the heuristic's best move.
        let board: Board = "\
.......
.......
GGGG...
GGGG..."
            .parse()
            .unwrap();
        let piece = Piece::new(Shape::O, Color::Red);
        let policy = ProxyPolicy::default();
        let (best, _) = policy.best_placement(&board, piece).unwrap();
        assert_eq!(best, PlacementAction::new(0, 4));
        let sig = proxy_signal(
            &policy,
            SocialCodeKind::Simple.into(),
            &TeamProfile::experiment_pair(),
            AgentId(1),
            &board,
            piece,
            best,
        )
        .unwrap();
        assert_eq!(sig.effectiveness, Effectiveness::Effective);
        assert_eq!(sig.social, SocialLabel::Unacceptable);
    }

    #[test]
    fn illegal_choice_is_an_error() {
        let board = bumpy_board();
        let piece = Piece::new(Shape::O, Color::Red);
        let err = proxy_signal(
            &ProxyPolicy::default(),
            SocialCodeKind::Global.into(),
            &TeamProfile::experiment_pair(),
            AgentId(1),
            &board,
            piece,
            PlacementAction::new(0, 5),
        )
        .unwrap_err();
        assert!(matches!(err, Error::IllegalPlacement { .. }));
    }
}
