//! One agent's decision: candidates ranked by predicted effectiveness, then
//! filtered by the social model.

use star::affinity::PairKey;
use star::agent::{AgentConfig, StarAgent};
use star::board::{Board, Color};
use star::feedback::DesignKind;
use star::piece::{Piece, Shape};
use star::placement::legal_placements;
use star::social::{AgentId, SocialCode, SocialCodeKind, TeamProfile};

fn show(agent: &mut StarAgent, board: &Board, piece: Piece) -> anyhow::Result<()> {
    let sel = agent.select_action(board, piece)?;
    println!(
        "chose rot {} col {} (rank {}, p(permissible) {:.3}, fallback {})",
        sel.action.rotation_index,
        sel.action.column,
        sel.audit.rank,
        sel.social_output,
        sel.audit.fallback
    );
    for e in sel.audit.examined.iter().take(5) {
        println!(
            "  examined rot {} col {}: eff {:+.3} social {:.3} {}",
            e.action.rotation_index,
            e.action.column,
            e.effectiveness,
            e.social_output,
            if e.passed { "pass" } else { "reject" }
        );
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let team = TeamProfile::experiment_pair();
    let code = SocialCode::from(SocialCodeKind::Global);
    let id = AgentId(1);
    let mut agent = StarAgent::new(id, DesignKind::Parallel, AgentConfig::default(), 10)?;

    let board: Board = format!(
        "{}\nGG....RR..\nGBB..RRB..",
        "..........\n".repeat(18).trim_end()
    )
    .parse()?;
    let piece = Piece::new(Shape::O, Color::Red);
    for action in legal_placements(&board, piece) {
        let v = code.judge_placement(&team, id, &board, piece, action)?;
        println!(
            "ground truth rot {} col {}: {} {:?}",
            action.rotation_index, action.column, v.permissible, v.per_agent_deltas
        );
    }
    println!("untrained:");
    show(&mut agent, &board, piece)?;

    // logit = 10 * (team-summed pair weights . pair deltas) + 5, positive
    // exactly when the Global code allows the move
    let mut params: Vec<f64> = (0..PairKey::COUNT)
        .map(|k| {
            10.0 * team
                .members()
                .iter()
                .map(|m| m.prefs.weights()[k] as f64)
                .sum::<f64>()
        })
        .collect();
    params.push(5.0);
    agent.social_model_mut().set_parameters(params)?;
    println!("\nwith the Global rule as its social model:");
    show(&mut agent, &board, piece)?;
    Ok(())
}
