//! Placement-level actions: choose an orientation and a column, then the piece
//! falls straight down from the top of the well until it rests.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::board::Board;
use crate::error::{Error, Result};
use crate::piece::Piece;

/// `column` is the leftmost column of the orientation's bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlacementAction {
    #[serde(rename = "rotation")]
    pub rotation_index: usize,
    pub column: usize,
}

impl PlacementAction {
    pub fn new(rotation_index: usize, column: usize) -> Self {
        PlacementAction {
            rotation_index,
            column,
        }
    }
}

impl fmt::Display for PlacementAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}c{}", self.rotation_index, self.column)
    }
}

/// Board cells `(row, col)` the piece occupies once it comes to rest.
pub fn landing_cells(
    board: &Board,
    piece: Piece,
    action: PlacementAction,
) -> Option<[(usize, usize); 4]> {
    let orientation = piece.shape.orientations().get(action.rotation_index)?;
    let piece_w = orientation.iter().map(|c| c.1).max().unwrap() + 1;
    let piece_h = orientation.iter().map(|c| c.0).max().unwrap() + 1;
    if action.column + piece_w > board.width() || piece_h > board.height() {
        return None;
    }
    let fits = |top: usize| {
        orientation
            .iter()
            .all(|&(r, c)| !board.is_filled(top + r, action.column + c))
    };
    if !fits(0) {
        return None;
    }
    let mut top = 0;
    while top + piece_h < board.height() && fits(top + 1) {
        top += 1;
    }
    Some(orientation.map(|(r, c)| (top + r, action.column + c)))
}

/// Every legal placement ordered by `(rotation_index, column)`.
pub fn legal_placements(board: &Board, piece: Piece) -> Vec<PlacementAction> {
    let mut out = Vec::new();
    for (rot, orientation) in piece.shape.orientations().iter().enumerate() {
        let piece_w = orientation.iter().map(|c| c.1).max().unwrap() + 1;
        if piece_w > board.width() {
            continue;
        }
        for col in 0..=(board.width() - piece_w) {
            let action = PlacementAction::new(rot, col);
            if landing_cells(board, piece, action).is_some() {
                out.push(action);
            }
        }
    }
    out
}

/// The piece written into the board at its resting cells, before any row is
/// cleared.
pub fn place_without_clearing(
    board: &Board,
    piece: Piece,
    action: PlacementAction,
) -> Result<(Board, [(usize, usize); 4])> {
    let cells = landing_cells(board, piece, action).ok_or(Error::IllegalPlacement { action })?;
    let mut next = board.clone();
    for &(r, c) in &cells {
        next.set(r, c, Some(piece.color));
    }
    Ok((next, cells))
}

/// Drops the piece, clears full rows and returns the settled board together
/// with the number of rows cleared.
pub fn apply_placement(
    board: &Board,
    piece: Piece,
    action: PlacementAction,
) -> Result<(Board, usize)> {
    let (mut next, _) = place_without_clearing(board, piece, action)?;
    let cleared = next.clear_full_rows();
    Ok((next, cleared))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Color;
    use crate::piece::Shape;

    fn piece(shape: Shape) -> Piece {
        Piece::new(shape, Color::Red)
    }

    #[test]
    fn o_piece_on_empty_standard_board_has_nine_placements() {
        let placements = legal_placements(&Board::standard(), piece(Shape::O));
        assert_eq!(placements.len(), 9);
        assert!(placements.iter().all(|a| a.rotation_index == 0));
        assert_eq!(
            placements.iter().map(|a| a.column).collect::<Vec<_>>(),
            (0..9).collect::<Vec<_>>()
        );
    }

    #[test]
    fn placements_are_sorted() {
        let placements = legal_placements(&Board::standard(), piece(Shape::T));
        let mut sorted = placements.clone();
        sorted.sort();
        assert_eq!(placements, sorted);
        // 8 + 9 + 8 + 9
        assert_eq!(placements.len(), 34);
    }

    #[test]
    fn single_open_column_admits_only_vertical_i_there() {
        // 6 wide, 6 tall; every column but 2 is filled from row 2 down.
        let board: Board = "......\n......\nRR.RRR\nRR.RRR\nRR.RRR\nRR.RRR"
            .parse()
            .unwrap();
        let placements = legal_placements(&board, piece(Shape::I));
        // Brute force by simulation: try every (rotation, column) and keep the
        // ones whose resting cells are in-bounds and unoccupied.
        let mut expected = Vec::new();
        for rot in 0..Shape::I.rotation_count() {
            for col in 0..board.width() {
                if let Some(cells) =
                    landing_cells(&board, piece(Shape::I), PlacementAction::new(rot, col))
                {
                    assert!(cells.iter().all(|&(r, c)| !board.is_filled(r, c)));
                    expected.push(PlacementAction::new(rot, col));
                }
            }
        }
        assert_eq!(placements, expected);
        // flat I rests on row 1 at columns 0..=2; only the open column has
        // room for a vertical I
        let flat = placements.iter().filter(|a| a.rotation_index == 0).count();
        assert_eq!(flat, 3);
        let vertical: Vec<_> = placements
            .iter()
            .filter(|a| a.rotation_index == 1)
            .collect();
        assert_eq!(vertical, vec![&PlacementAction::new(1, 2)]);
        let (after, cleared) =
            apply_placement(&board, piece(Shape::I), PlacementAction::new(1, 2)).unwrap();
        assert_eq!(cleared, 4);
        assert!(after.is_empty());
    }

    #[test]
    fn blocked_spawn_area_yields_no_placements() {
        let mut board = Board::new(6, 8);
        for c in 0..6 {
            board.set(0, c, Some(Color::Blue));
        }
        for shape in Shape::ALL {
            assert!(legal_placements(&board, piece(shape)).is_empty());
        }
    }

    #[test]
    fn flat_i_on_empty_board() {
        let (after, cleared) = apply_placement(
            &Board::standard(),
            piece(Shape::I),
            PlacementAction::new(0, 0),
        )
        .unwrap();
        assert_eq!(cleared, 0);
        assert_eq!(after.filled_count(), 4);
        for c in 0..4 {
            assert!(after.is_filled(19, c));
        }
    }

    #[test]
    fn filling_a_four_cell_gap_clears_one_row() {
        let mut board = Board::standard();
        for c in 4..10 {
            board.set(19, c, Some(Color::Green));
        }
        let (after, cleared) =
            apply_placement(&board, piece(Shape::I), PlacementAction::new(0, 0)).unwrap();
        assert_eq!(cleared, 1);
        assert!(after.is_empty());
    }

    #[test]
    fn o_piece_completes_two_rows() {
        let mut board = Board::new(6, 6);
        for r in 4..6 {
            for c in 0..6 {
                if c != 2 && c != 3 {
                    board.set(r, c, Some(Color::Blue));
                }
            }
        }
        board.set(3, 0, Some(Color::Green));
        let (after, cleared) =
            apply_placement(&board, piece(Shape::O), PlacementAction::new(0, 2)).unwrap();
        assert_eq!(cleared, 2);
        // the lone green cell drops to the floor
        assert_eq!(after.filled_count(), 1);
        assert_eq!(after.get(5, 0), Some(Color::Green));
    }

    #[test]
    fn illegal_placement_is_rejected() {
        let board = Board::standard();
        let err = apply_placement(&board, piece(Shape::O), PlacementAction::new(0, 9)).unwrap_err();
        assert!(matches!(err, Error::IllegalPlacement { .. }));
        let err = apply_placement(&board, piece(Shape::O), PlacementAction::new(1, 0)).unwrap_err();
        assert!(matches!(err, Error::IllegalPlacement { .. }));
    }

    #[test]
    fn overhang_leaves_hole() {
        let mut board = Board::new(5, 4);
        board.set(3, 0, Some(Color::Red));
        // flat I rests on column 0, leaving holes under columns 1..3
        let (after, _) =
            apply_placement(&board, piece(Shape::I), PlacementAction::new(0, 0)).unwrap();
        assert_eq!(after.holes(), 3);
    }
}
