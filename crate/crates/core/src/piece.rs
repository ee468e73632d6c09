//! The seven tetrominoes and their distinct rotations.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::board::Color;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Shape {
    I,
    O,
    T,
    S,
    Z,
    J,
    L,
}

/// Cell offsets `(row, col)` of one orientation, normalized so the minimum row
/// and column are both zero.
pub type Orientation = [(usize, usize); 4];

impl Shape {
    pub const ALL: [Shape; 7] = [
        Shape::I,
        Shape::O,
        Shape::T,
        Shape::S,
        Shape::Z,
        Shape::J,
        Shape::L,
    ];

    fn spawn_cells(self) -> [(i32, i32); 4] {
        match self {
            Shape::I => [(0, 0), (0, 1), (0, 2), (0, 3)],
            Shape::O => [(0, 0), (0, 1), (1, 0), (1, 1)],
            Shape::T => [(0, 1), (1, 0), (1, 1), (1, 2)],
            Shape::S => [(0, 1), (0, 2), (1, 0), (1, 1)],
            Shape::Z => [(0, 0), (0, 1), (1, 1), (1, 2)],
            Shape::J => [(0, 0), (1, 0), (1, 1), (1, 2)],
            Shape::L => [(0, 2), (1, 0), (1, 1), (1, 2)],
        }
    }

    /// Distinct orientations in clockwise order starting from the spawn
    /// orientation (I, S, Z: 2; O: 1; T, J, L: 4).
    pub fn orientations(self) -> &'static [Orientation] {
        static TABLE: OnceLock<Vec<Vec<Orientation>>> = OnceLock::new();
        let table =
            TABLE.get_or_init(|| Shape::ALL.iter().map(|s| build_orientations(*s)).collect());
        &table[self as usize]
    }

    pub fn rotation_count(self) -> usize {
        self.orientations().len()
    }
}

fn normalize(cells: [(i32, i32); 4]) -> Orientation {
    let min_r = cells.iter().map(|c| c.0).min().unwrap();
    let min_c = cells.iter().map(|c| c.1).min().unwrap();
    let mut out = cells.map(|(r, c)| ((r - min_r) as usize, (c - min_c) as usize));
    out.sort_unstable();
    out
}

fn build_orientations(shape: Shape) -> Vec<Orientation> {
    let mut cells = shape.spawn_cells();
    let mut out: Vec<Orientation> = Vec::with_capacity(4);
    for _ in 0..4 {
        let norm = normalize(cells);
        if !out.contains(&norm) {
            out.push(norm);
        }
        // clockwise quarter turn with rows pointing down
        cells = cells.map(|(r, c)| (c, -r));
    }
    out
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" => Ok(Shape::I),
            "O" => Ok(Shape::O),
            "T" => Ok(Shape::T),
            "S" => Ok(Shape::S),
            "Z" => Ok(Shape::Z),
            "J" => Ok(Shape::J),
            "L" => Ok(Shape::L),
            other => Err(Error::config(format!("unknown shape '{other}'"))),
        }
    }
}

/// A tetromino with a single color shared by all four cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Piece {
    pub shape: Shape,
    pub color: Color,
}

impl Piece {
    pub fn new(shape: Shape, color: Color) -> Piece {
        Piece { shape, color }
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.shape, self.color.symbol())
    }
}

/// Parses the compact `<shape><color>` form, e.g. `TR` or `IB`.
impl FromStr for Piece {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        match (chars.next(), chars.next(), chars.next()) {
            (Some(shape), Some(color), None) => {
                let color = Color::from_symbol(color.to_ascii_uppercase())
                    .ok_or_else(|| Error::config(format!("bad piece color in '{s}'")))?;
                Ok(Piece::new(shape.to_string().parse()?, color))
            }
            _ => Err(Error::config(format!(
                "bad piece '{s}', expected e.g. 'TR'"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_counts_are_standard() {
        let counts: Vec<usize> = Shape::ALL.iter().map(|s| s.rotation_count()).collect();
        assert_eq!(counts, vec![2, 1, 4, 2, 2, 4, 4]);
    }

    #[test]
    fn every_orientation_has_four_distinct_cells() {
        for shape in Shape::ALL {
            for o in shape.orientations() {
                let mut cells = o.to_vec();
                cells.dedup();
                assert_eq!(cells.len(), 4);
                assert!(cells.iter().any(|c| c.0 == 0));
                assert!(cells.iter().any(|c| c.1 == 0));
            }
        }
    }

    #[test]
    fn vertical_i_is_second_rotation() {
        let vertical = Shape::I.orientations()[1];
        assert_eq!(vertical, [(0, 0), (1, 0), (2, 0), (3, 0)]);
    }

    #[test]
    fn piece_parse() {
        assert_eq!(
            "TR".parse::<Piece>().unwrap(),
            Piece::new(Shape::T, Color::Red)
        );
        assert!("TX".parse::<Piece>().is_err());
        assert!("T".parse::<Piece>().is_err());
    }
}
