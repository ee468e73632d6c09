//! Colored Tetris well.
//!
//! Row 0 is the top of the well. Cells are stored row-major. The text form
//! uses one character per cell (`.` empty, `R`/`G`/`B` filled) with the top
//! row first and rows separated by `\n`; it is the format used by fixtures,
//! replay logs and the trainer protocol.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const DEFAULT_WIDTH: usize = 10;
pub const DEFAULT_HEIGHT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Green,
    Blue,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::Red, Color::Green, Color::Blue];

    pub fn symbol(self) -> char {
        match self {
            Color::Red => 'R',
            Color::Green => 'G',
            Color::Blue => 'B',
        }
    }

    pub fn from_symbol(c: char) -> Option<Color> {
        match c {
            'R' => Some(Color::Red),
            'G' => Some(Color::Green),
            'B' => Some(Color::Blue),
            _ => None,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
        };
        f.write_str(name)
    }
}

impl FromStr for Color {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "red" | "r" => Ok(Color::Red),
            "green" | "g" => Ok(Color::Green),
            "blue" | "b" => Ok(Color::Blue),
            other => Err(Error::config(format!("unknown color '{other}'"))),
        }
    }
}

pub type Cell = Option<Color>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Board {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
}

impl Board {
    pub fn new(width: usize, height: usize) -> Board {
        assert!(width > 0 && height > 0, "board dimensions must be positive");
        Board {
            width,
            height,
            cells: vec![None; width * height],
        }
    }

    pub fn standard() -> Board {
        Board::new(DEFAULT_WIDTH, DEFAULT_HEIGHT)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.width + col]
    }

    #[inline]
    pub fn is_filled(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.width + col].is_some()
    }

    pub fn set(&mut self, row: usize, col: usize, cell: Cell) {
        self.cells[row * self.width + col] = cell;
    }

    pub fn filled_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(Option::is_none)
    }

    pub fn row_full(&self, row: usize) -> bool {
        self.cells[row * self.width..(row + 1) * self.width]
            .iter()
            .all(Option::is_some)
    }

    pub fn full_rows(&self) -> Vec<usize> {
        (0..self.height).filter(|&r| self.row_full(r)).collect()
    }

    /// Removes every full row and shifts the rows above it down. Returns the
    /// number of rows removed.
    pub fn clear_full_rows(&mut self) -> usize {
        let w = self.width;
        let mut kept: Vec<Cell> = Vec::with_capacity(self.cells.len());
        let mut cleared = 0;
        for row in 0..self.height {
            if self.row_full(row) {
                cleared += 1;
            } else {
                kept.extend_from_slice(&self.cells[row * w..(row + 1) * w]);
            }
        }
        if cleared > 0 {
            let mut cells = vec![None; cleared * w];
            cells.extend(kept);
            self.cells = cells;
        }
        cleared
    }

    /// Height of each column measured from the floor to its topmost filled cell.
    pub fn column_heights(&self) -> Vec<usize> {
        (0..self.width)
            .map(|c| {
                (0..self.height)
                    .find(|&r| self.is_filled(r, c))
                    .map_or(0, |r| self.height - r)
            })
            .collect()
    }

    /// Empty cells with at least one filled cell above them in the same column.
    pub fn holes(&self) -> usize {
        let mut holes = 0;
        for c in 0..self.width {
            let mut covered = false;
            for r in 0..self.height {
                if self.is_filled(r, c) {
                    covered = true;
                } else if covered {
                    holes += 1;
                }
            }
        }
        holes
    }

    /// Row-major grid text, top row first.
    pub fn to_grid_string(&self) -> String {
        let mut s = String::with_capacity((self.width + 1) * self.height);
        for r in 0..self.height {
            if r > 0 {
                s.push('\n');
            }
            for c in 0..self.width {
                s.push(self.get(r, c).map_or('.', Color::symbol));
            }
        }
        s
    }

    pub fn from_grid_str(text: &str) -> Result<Board> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        if rows.is_empty() {
            return Err(Error::Board("empty grid".into()));
        }
        let width = rows[0].chars().count();
        let mut board = Board::new(width, rows.len());
        for (r, line) in rows.iter().enumerate() {
            if line.chars().count() != width {
                return Err(Error::Board(format!(
                    "row {r} has {} cells, expected {width}",
                    line.chars().count()
                )));
            }
            for (c, ch) in line.chars().enumerate() {
                let cell = match ch {
                    '.' => None,
                    other => Some(
                        Color::from_symbol(other)
                            .ok_or_else(|| Error::Board(format!("bad cell '{other}'")))?,
                    ),
                };
                board.set(r, c, cell);
            }
        }
        Ok(board)
    }

    /// Stable content hash (hex, 16 bytes of SHA-256 over the grid text and
    /// dimensions).
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("{}x{}\n", self.width, self.height));
        hasher.update(self.to_grid_string());
        hex16(&hasher.finalize())
    }

    pub fn mirrored(&self) -> Board {
        let mut out = Board::new(self.width, self.height);
        for r in 0..self.height {
            for c in 0..self.width {
                out.set(r, self.width - 1 - c, self.get(r, c));
            }
        }
        out
    }
}

pub(crate) fn hex16(bytes: &[u8]) -> String {
    bytes[..16].iter().map(|b| format!("{b:02x}")).collect()
}

impl fmt::Debug for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Board {}x{}", self.width, self.height)?;
        f.write_str(&self.to_grid_string())
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_grid_string())
    }
}

impl FromStr for Board {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Board::from_grid_str(s)
    }
}
