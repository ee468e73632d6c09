//! Color-pair adjacency counting and per-agent affinity.
//!
//! Two filled cells are adjacent when they share an edge (horizontal or
//! vertical neighbours; diagonals do not count). Pairs are unordered, so a red
//! cell next to a blue cell is the same pair as blue next to red.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Sub};

use serde::{Deserialize, Serialize};

use crate::board::{Board, Color};
use crate::error::{Error, Result};
use crate::piece::Piece;
use crate::placement::{place_without_clearing, PlacementAction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKey {
    RedRed,
    GreenGreen,
    BlueBlue,
    RedGreen,
    RedBlue,
    GreenBlue,
}

impl PairKey {
    pub const COUNT: usize = 6;

    pub const ALL: [PairKey; 6] = [
        PairKey::RedRed,
        PairKey::GreenGreen,
        PairKey::BlueBlue,
        PairKey::RedGreen,
        PairKey::RedBlue,
        PairKey::GreenBlue,
    ];

    pub fn of(a: Color, b: Color) -> PairKey {
        use Color::*;
        match (a.min(b), a.max(b)) {
            (Red, Red) => PairKey::RedRed,
            (Green, Green) => PairKey::GreenGreen,
            (Blue, Blue) => PairKey::BlueBlue,
            (Red, Green) => PairKey::RedGreen,
            (Red, Blue) => PairKey::RedBlue,
            (Green, Blue) => PairKey::GreenBlue,
            _ => unreachable!("min/max ordering"),
        }
    }

    pub fn colors(self) -> (Color, Color) {
        use Color::*;
        match self {
            PairKey::RedRed => (Red, Red),
            PairKey::GreenGreen => (Green, Green),
            PairKey::BlueBlue => (Blue, Blue),
            PairKey::RedGreen => (Red, Green),
            PairKey::RedBlue => (Red, Blue),
            PairKey::GreenBlue => (Green, Blue),
        }
    }

    pub fn is_same_color(self) -> bool {
        let (a, b) = self.colors();
        a == b
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PairKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.colors();
        write!(f, "{a}-{b}")
    }
}

/// Edge counts (or count differences) per unordered color pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairCounts(pub [i32; PairKey::COUNT]);

impl PairCounts {
    pub fn zero() -> Self {
        PairCounts::default()
    }

    pub fn get(&self, key: PairKey) -> i32 {
        self.0[key.index()]
    }

    pub fn total(&self) -> i32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    pub fn as_f64(&self) -> [f64; PairKey::COUNT] {
        self.0.map(f64::from)
    }

    fn bump(&mut self, a: Color, b: Color, by: i32) {
        self.0[PairKey::of(a, b).index()] += by;
    }
}

impl Index<PairKey> for PairCounts {
    type Output = i32;
    fn index(&self, key: PairKey) -> &i32 {
        &self.0[key.index()]
    }
}

impl IndexMut<PairKey> for PairCounts {
    fn index_mut(&mut self, key: PairKey) -> &mut i32 {
        &mut self.0[key.index()]
    }
}

impl Add for PairCounts {
    type Output = PairCounts;
    fn add(mut self, rhs: PairCounts) -> PairCounts {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl Sub for PairCounts {
    type Output = PairCounts;
    fn sub(mut self, rhs: PairCounts) -> PairCounts {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

/// Counts every 4-adjacency edge between two filled cells exactly once.
pub fn pair_counts(board: &Board) -> PairCounts {
    let mut counts = PairCounts::zero();
    for r in 0..board.height() {
        for c in 0..board.width() {
            let Some(here) = board.get(r, c) else {
                continue;
            };
            if c + 1 < board.width() {
                if let Some(right) = board.get(r, c + 1) {
                    counts.bump(here, right, 1);
                }
            }
            if r + 1 < board.height() {
                if let Some(below) = board.get(r + 1, c) {
                    counts.bump(here, below, 1);
                }
            }
        }
    }
    counts
}

/// Pair-count change caused by one placement, including edges removed by row
/// clears and edges formed when the rows above a cleared row collapse onto the
/// rows below it. Equivalent to
/// `pair_counts(apply_placement(..).0) - pair_counts(board)`, computed from the
/// rows touched by the move only.
pub fn placement_pair_delta(
    board: &Board,
    piece: Piece,
    action: PlacementAction,
) -> Result<(PairCounts, usize)> {
    let (placed, cells) = place_without_clearing(board, piece, action)?;
    let mut delta = PairCounts::zero();

    // edges that involve at least one new cell; a new-new edge is seen twice
    for &(r, c) in &cells {
        for (nr, nc) in neighbours(r, c, placed.width(), placed.height()) {
            if let Some(other) = placed.get(nr, nc) {
                let both_new = cells.contains(&(nr, nc));
                if !both_new || (nr, nc) > (r, c) {
                    delta.bump(piece.color, other, 1);
                }
            }
        }
    }

    let mut cleared: Vec<usize> = cells.iter().map(|&(r, _)| r).collect();
    cleared.sort_unstable();
    cleared.dedup();
    cleared.retain(|&r| placed.row_full(r));
    if cleared.is_empty() {
        return Ok((delta, 0));
    }

    let w = placed.width();
    let h = placed.height();
    let is_cleared = |r: usize| cleared.binary_search(&r).is_ok();
    for &r in &cleared {
        // horizontal edges inside the row (a full row has w - 1 of them)
        for c in 0..w - 1 {
            delta.bump(placed.get(r, c).unwrap(), placed.get(r, c + 1).unwrap(), -1);
        }
        for c in 0..w {
            let here = placed.get(r, c).unwrap();
            if r > 0 {
                if let Some(up) = placed.get(r - 1, c) {
                    delta.bump(here, up, -1);
                }
            }
            // an edge between two cleared rows was already taken from the
            // lower row's upward check
            if r + 1 < h && !is_cleared(r + 1) {
                if let Some(down) = placed.get(r + 1, c) {
                    delta.bump(here, down, -1);
                }
            }
        }
    }

    // rows directly above a maximal run of cleared rows land on the first
    // surviving row below the run
    let mut i = 0;
    while i < cleared.len() {
        let top = cleared[i];
        let mut bottom = top;
        while i + 1 < cleared.len() && cleared[i + 1] == bottom + 1 {
            i += 1;
            bottom = cleared[i];
        }
        i += 1;
        if top == 0 || bottom + 1 >= h {
            continue;
        }
        let (upper, lower) = (top - 1, bottom + 1);
        for c in 0..w {
            if let (Some(a), Some(b)) = (placed.get(upper, c), placed.get(lower, c)) {
                delta.bump(a, b, 1);
            }
        }
    }

    Ok((delta, cleared.len()))
}

fn neighbours(r: usize, c: usize, w: usize, h: usize) -> impl Iterator<Item = (usize, usize)> {
    let mut out = [(usize::MAX, usize::MAX); 4];
    if r > 0 {
        out[0] = (r - 1, c);
    }
    if r + 1 < h {
        out[1] = (r + 1, c);
    }
    if c > 0 {
        out[2] = (r, c - 1);
    }
    if c + 1 < w {
        out[3] = (r, c + 1);
    }
    out.into_iter().filter(|p| p.0 != usize::MAX)
}

/// An agent's liking for each unordered color pair: `+1`/`-1` for plain
/// likes and dislikes, `+2`/`-2` for strong ones, `0` for indifference.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PreferenceTable", into = "PreferenceTable")]
pub struct PreferenceMatrix([i8; PairKey::COUNT]);

impl PreferenceMatrix {
    pub fn indifferent() -> Self {
        PreferenceMatrix::default()
    }

    pub fn from_pairs(pairs: &[(PairKey, i64)]) -> Result<Self> {
        let mut m = PreferenceMatrix::indifferent();
        for &(key, w) in pairs {
            m.set(key, w)?;
        }
        Ok(m)
    }

    pub fn set(&mut self, key: PairKey, weight: i64) -> Result<()> {
        if !(-2..=2).contains(&weight) {
            return Err(Error::PreferenceWeight(weight));
        }
        self.0[key.index()] = weight as i8;
        Ok(())
    }

    pub fn weight(&self, key: PairKey) -> i32 {
        i32::from(self.0[key.index()])
    }

    pub fn weights(&self) -> [i32; PairKey::COUNT] {
        self.0.map(i32::from)
    }

    /// Weighted sum of a count (or count-difference) vector.
    pub fn score(&self, counts: &PairCounts) -> i32 {
        counts
            .0
            .iter()
            .zip(self.0)
            .map(|(&n, w)| n * i32::from(w))
            .sum()
    }

    /// First teammate of the two-agent experiment team: likes red-green,
    /// strongly likes green-blue, dislikes red-blue.
    pub fn first_teammate() -> Self {
        Self::from_pairs(&[
            (PairKey::RedGreen, 1),
            (PairKey::GreenBlue, 2),
            (PairKey::RedBlue, -1),
        ])
        .expect("weights in range")
    }

    /// Second teammate: likes green-blue, strongly likes red-blue, strongly
    /// dislikes red-green.
    pub fn second_teammate() -> Self {
        Self::from_pairs(&[
            (PairKey::GreenBlue, 1),
            (PairKey::RedBlue, 2),
            (PairKey::RedGreen, -2),
        ])
        .expect("weights in range")
    }
}

impl Add for PreferenceMatrix {
    type Output = [i32; PairKey::COUNT];
    fn add(self, rhs: PreferenceMatrix) -> [i32; PairKey::COUNT] {
        let mut out = self.weights();
        for (o, w) in out.iter_mut().zip(rhs.weights()) {
            *o += w;
        }
        out
    }
}

/// Config-file form: one optional integer per unordered pair.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PreferenceTable {
    #[serde(default, skip_serializing_if = "is_zero")]
    red_red: i64,
    #[serde(default, skip_serializing_if = "is_zero")]
    green_green: i64,
    #[serde(default, skip_serializing_if = "is_zero")]
    blue_blue: i64,
    #[serde(default, skip_serializing_if = "is_zero")]
    red_green: i64,
    #[serde(default, skip_serializing_if = "is_zero")]
    red_blue: i64,
    #[serde(default, skip_serializing_if = "is_zero")]
    green_blue: i64,
}

fn is_zero(v: &i64) -> bool {
    *v == 0
}

impl TryFrom<PreferenceTable> for PreferenceMatrix {
    type Error = Error;
    fn try_from(t: PreferenceTable) -> Result<Self> {
        PreferenceMatrix::from_pairs(&[
            (PairKey::RedRed, t.red_red),
            (PairKey::GreenGreen, t.green_green),
            (PairKey::BlueBlue, t.blue_blue),
            (PairKey::RedGreen, t.red_green),
            (PairKey::RedBlue, t.red_blue),
            (PairKey::GreenBlue, t.green_blue),
        ])
    }
}

impl From<PreferenceMatrix> for PreferenceTable {
    fn from(m: PreferenceMatrix) -> Self {
        let w = |k| i64::from(m.weight(k));
        PreferenceTable {
            red_red: w(PairKey::RedRed),
            green_green: w(PairKey::GreenGreen),
            blue_blue: w(PairKey::BlueBlue),
            red_green: w(PairKey::RedGreen),
            red_blue: w(PairKey::RedBlue),
            green_blue: w(PairKey::GreenBlue),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AffinityScore(pub i32);

pub fn affinity(board: &Board, prefs: &PreferenceMatrix) -> AffinityScore {
    AffinityScore(prefs.score(&pair_counts(board)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piece::Shape;
    use crate::placement::{apply_placement, legal_placements};

    /// Independent edge scan: visit every ordered pair of distinct filled
    /// cells and keep the ones at Manhattan distance 1, then halve.
    fn brute_force_counts(board: &Board) -> PairCounts {
        let mut filled = Vec::new();
        for r in 0..board.height() {
            for c in 0..board.width() {
                if let Some(color) = board.get(r, c) {
                    filled.push((r as i64, c as i64, color));
                }
            }
        }
        let mut doubled = PairCounts::zero();
        for a in &filled {
            for b in &filled {
                if (a.0 - b.0).abs() + (a.1 - b.1).abs() == 1 {
                    doubled[PairKey::of(a.2, b.2)] += 1;
                }
            }
        }
        PairCounts(doubled.0.map(|v| v / 2))
    }

    #[test]
    fn empty_board_has_no_pairs() {
        assert!(pair_counts(&Board::standard()).is_zero());
        assert_eq!(
            affinity(&Board::standard(), &PreferenceMatrix::first_teammate()),
            AffinityScore(0)
        );
    }

    #[test]
    fn red_next_to_blue() {
        let board: Board = "...\nRB.".parse().unwrap();
        let counts = pair_counts(&board);
        assert_eq!(counts[PairKey::RedBlue], 1);
        assert_eq!(counts.total(), 1);
    }

    #[test]
    fn two_by_two_red_block_has_four_edges() {
        let board: Board = "....\n.RR.\n.RR.".parse().unwrap();
        assert_eq!(brute_force_counts(&board)[PairKey::RedRed], 4);
        assert_eq!(pair_counts(&board), brute_force_counts(&board));
    }

    #[test]
    fn diagonals_do_not_count() {
        let board: Board = "R.\n.B".parse().unwrap();
        assert!(pair_counts(&board).is_zero());
    }

    #[test]
    fn column_of_three_colors() {
        let board: Board = "R\nG\nB".parse().unwrap();
        let prefs =
            PreferenceMatrix::from_pairs(&[(PairKey::RedGreen, 2), (PairKey::GreenBlue, -1)])
                .unwrap();
        let counts = brute_force_counts(&board);
        assert_eq!(counts.total(), 2);
        assert_eq!(prefs.score(&counts), 1);
        assert_eq!(affinity(&board, &prefs), AffinityScore(1));
    }

    #[test]
    fn six_red_blue_and_eight_blue_green_edges_score_minus_ten() {
        // top row: 6 red-blue edges; bottom-left checkerboard: 5 horizontal
        // and 3 vertical blue-green edges
        let board: Board = "\
RBRBRBR
.......
BGB....
GBGB..."
            .parse()
            .unwrap();
        let counts = brute_force_counts(&board);
        assert_eq!(counts[PairKey::RedBlue], 6);
        assert_eq!(counts[PairKey::GreenBlue], 8);
        assert_eq!(counts.total(), 14);
        let prefs =
            PreferenceMatrix::from_pairs(&[(PairKey::RedBlue, 1), (PairKey::GreenBlue, -2)])
                .unwrap();
        assert_eq!(affinity(&board, &prefs), AffinityScore(-10));
    }

    #[test]
    fn weights_out_of_range_are_rejected() {
        assert!(matches!(
            PreferenceMatrix::from_pairs(&[(PairKey::RedBlue, 3)]),
            Err(Error::PreferenceWeight(3))
        ));
        assert!(PreferenceMatrix::from_pairs(&[(PairKey::RedBlue, -2)]).is_ok());
    }

    #[test]
    fn preference_table_serde() {
        let m = PreferenceMatrix::second_teammate();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"red_green":-2,"red_blue":2,"green_blue":1}"#);
        let back: PreferenceMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<PreferenceMatrix>(r#"{"red_blue":5}"#).is_err());
    }

    #[test]
    fn team_fixture_same_color_indifferent() {
        for m in [
            PreferenceMatrix::first_teammate(),
            PreferenceMatrix::second_teammate(),
        ] {
            for key in PairKey::ALL.into_iter().filter(|k| k.is_same_color()) {
                assert_eq!(m.weight(key), 0);
            }
        }
    }

    #[test]
    fn incremental_delta_handles_clears() {
        let board: Board = "\
......
B.....
RG.GRB
GGBB.B"
            .parse()
            .unwrap();
        for shape in Shape::ALL {
            for color in Color::ALL {
                let piece = Piece::new(shape, color);
                for a in legal_placements(&board, piece) {
                    let (after, cleared) = apply_placement(&board, piece, a).unwrap();
                    let (delta, inc_cleared) = placement_pair_delta(&board, piece, a).unwrap();
                    assert_eq!(inc_cleared, cleared);
                    assert_eq!(
                        delta,
                        brute_force_counts(&after) - brute_force_counts(&board),
                        "{piece} {a}"
                    );
                }
            }
        }
    }
}
