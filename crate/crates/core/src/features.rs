//! Features the learners see for a candidate placement.
//!
//! Effectiveness features describe the settled board after the move:
//! one entry per column height, then max height, hole count, bumpiness and
//! rows cleared. Height-like quantities are divided by the board height and
//! rows cleared by 4 so that every entry stays in a small range; the linear
//! learner's step size is tuned for that scale.
//!
//! Social features are the change of every unordered color-pair count.

use serde::{Deserialize, Serialize};

use crate::affinity::{placement_pair_delta, PairCounts, PairKey};
use crate::board::Board;
use crate::error::Result;
use crate::piece::Piece;
use crate::placement::{apply_placement, PlacementAction};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoardStats {
    pub column_heights: Vec<usize>,
    pub aggregate_height: usize,
    pub max_height: usize,
    pub holes: usize,
    pub bumpiness: usize,
}

impl BoardStats {
    pub fn of(board: &Board) -> Self {
        let column_heights = board.column_heights();
        let bumpiness = column_heights.windows(2).map(|w| w[0].abs_diff(w[1])).sum();
        BoardStats {
            aggregate_height: column_heights.iter().sum(),
            max_height: column_heights.iter().copied().max().unwrap_or(0),
            holes: board.holes(),
            bumpiness,
            column_heights,
        }
    }
}

pub fn effectiveness_len(board_width: usize) -> usize {
    board_width + 4
}

pub const SOCIAL_LEN: usize = PairKey::COUNT;

pub fn effectiveness_features(after: &Board, rows_cleared: usize) -> Vec<f64> {
    let stats = BoardStats::of(after);
    let h = after.height() as f64;
    let mut x: Vec<f64> = stats.column_heights.iter().map(|&c| c as f64 / h).collect();
    x.push(stats.max_height as f64 / h);
    x.push(stats.holes as f64 / h);
    x.push(stats.bumpiness as f64 / h);
    x.push(rows_cleared as f64 / 4.0);
    x
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub effectiveness: Vec<f64>,
    pub social: PairCounts,
}

impl FeatureVector {
    pub fn social_input(&self) -> [f64; SOCIAL_LEN] {
        self.social.as_f64()
    }
}

/// Features of one candidate plus the board it settles into.
#[derive(Debug, Clone)]
pub struct PlacementOutcome {
    pub action: PlacementAction,
    pub after: Board,
    pub rows_cleared: usize,
    pub features: FeatureVector,
}

pub fn placement_outcome(
    before: &Board,
    piece: Piece,
    action: PlacementAction,
) -> Result<PlacementOutcome> {
    let (after, rows_cleared) = apply_placement(before, piece, action)?;
    let (social, _) = placement_pair_delta(before, piece, action)?;
    Ok(PlacementOutcome {
        action,
        features: FeatureVector {
            effectiveness: effectiveness_features(&after, rows_cleared),
            social,
        },
        after,
        rows_cleared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::pair_counts;
    use crate::board::Color;
    use crate::piece::Shape;
    use crate::placement::legal_placements;

    #[test]
    fn stats_of_small_board() {
        let board: Board = "....\n.R..\n....\nR.B.".parse().unwrap();
        let s = BoardStats::of(&board);
        assert_eq!(s.column_heights, vec![1, 3, 1, 0]);
        assert_eq!(s.aggregate_height, 5);
        assert_eq!(s.max_height, 3);
        assert_eq!(s.holes, 2);
        assert_eq!(s.bumpiness, 2 + 2 + 1);
    }

    #[test]
    fn feature_lengths() {
        let board = Board::standard();
        let x = effectiveness_features(&board, 0);
        assert_eq!(x.len(), effectiveness_len(10));
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn social_features_equal_pair_count_difference() {
        let board: Board = "......\n......\nRG..B.\nGBB.RG".parse().unwrap();
        let piece = Piece::new(Shape::L, Color::Green);
        for a in legal_placements(&board, piece) {
            let out = placement_outcome(&board, piece, a).unwrap();
            assert_eq!(
                out.features.social,
                pair_counts(&out.after) - pair_counts(&board)
            );
        }
    }
}
