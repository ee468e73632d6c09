//! The same placements judged under the Global and Simple codes.

use star::board::{Board, Color};
use star::piece::{Piece, Shape};
use star::placement::legal_placements;
use star::social::{GlobalScope, SocialCode, SocialCodeKind, TeamProfile};

fn main() -> anyhow::Result<()> {
    let board: Board = format!(
        "{}\n..G.......\n.RGB...R..\nBRGBB.RRGG",
        "..........\n".repeat(17).trim_end()
    )
    .parse()?;
    let team = TeamProfile::experiment_pair();
    let actor = team.members()[0].id;
    let codes = [
        ("global", SocialCode::from(SocialCodeKind::Global)),
        (
            "global, actor excluded",
            SocialCode {
                kind: SocialCodeKind::Global,
                global_scope: GlobalScope::ExcludeActor,
            },
        ),
        ("simple", SocialCode::from(SocialCodeKind::Simple)),
    ];

    let piece = Piece::new(Shape::L, Color::Red);
    println!("agent {actor} places a red L on\n{board}\n");
    for action in legal_placements(&board, piece) {
        let mut line = format!("rot {} col {}:", action.rotation_index, action.column);
        for (name, code) in &codes {
            let v = code.judge_placement(&team, actor, &board, piece, action)?;
            let mark = if v.permissible { "ok" } else { "NO" };
            line += &format!("  {name} {mark} (delta {:+})", v.delta);
        }
        let v = codes[0]
            .1
            .judge_placement(&team, actor, &board, piece, action)?;
        println!("{line}  per agent {:?}", v.per_agent_deltas);
    }
    Ok(())
}
