//! Pair counts and teammate affinities of a board, and how one placement
//! changes them.

use star::affinity::{affinity, pair_counts, PairKey};
use star::board::{Board, Color};
use star::piece::{Piece, Shape};
use star::placement::{apply_placement, legal_placements};
use star::social::{delta_incremental, TeamProfile};

fn main() -> anyhow::Result<()> {
    let board: Board = [
        "..........",
        "..........",
        "..........",
        "..........",
        "..........",
        "..........",
        "..........",
        "..........",
        "..........",
        "..........",
        "..........",
        "..........",
        "..........",
        "..........",
        "..........",
        "..........",
        "......G...",
        "B....GGR..",
        "BB.RRBBR..",
        "RBGGRBBRR.",
    ]
    .join("\n")
    .parse()?;
    println!("{board}\n");

    let counts = pair_counts(&board);
    for key in PairKey::ALL {
        println!("{key:?}: {}", counts.get(key));
    }

    let team = TeamProfile::experiment_pair();
    for m in team.members() {
        println!("agent {} affinity {}", m.id, affinity(&board, &m.prefs).0);
    }

    // every place a blue T can go, with each teammate's change in affinity
    let piece = Piece::new(Shape::T, Color::Blue);
    println!("\nblue T placements:");
    for action in legal_placements(&board, piece) {
        let deltas = delta_incremental(&team, &board, piece, action)?;
        let (_, cleared) = apply_placement(&board, piece, action)?;
        println!(
            "  rot {} col {}  deltas {:?}  rows cleared {cleared}",
            action.rotation_index, action.column, deltas
        );
    }
    Ok(())
}
