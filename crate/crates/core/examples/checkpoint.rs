//! Save trained agents, load them back and keep training. The reloaded
//! agents make exactly the choices the originals would have.

use star::agent::{AgentCheckpoint, AgentConfig, StarAgent};
use star::proxy::ProxyPolicy;
use star::runner::{run_suite, MatchConfig, ProxyTrainer};

fn main() -> anyhow::Result<()> {
    let config = MatchConfig {
        games: 3,
        ..MatchConfig::default()
    };
    let mut agents = config.build_agents(&AgentConfig::default())?;
    let mut trainer = ProxyTrainer::for_config(&config, ProxyPolicy::default());
    run_suite(&config, &mut agents, &mut trainer)?;

    let dir = tempfile::tempdir()?;
    for a in &agents {
        a.checkpoint()
            .save(dir.path().join(format!("agent-{}.json", a.id())))?;
    }
    let mut reloaded = agents
        .iter()
        .map(|a| {
            let cp = AgentCheckpoint::load(dir.path().join(format!("agent-{}.json", a.id())))?;
            Ok(StarAgent::from_checkpoint(
                &cp,
                config.design,
                config.board_width,
            )?)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let later = MatchConfig {
        seed: config.seed + 1,
        ..config.clone()
    };
    let a = run_suite(&later, &mut agents, &mut trainer)?;
    let b = run_suite(&later, &mut reloaded, &mut trainer)?;
    println!("continued training from checkpoint matches: {}", a == b);
    for r in &b {
        println!(
            "game {}: {} rows, {:.1}% permissible",
            r.header.game + 1,
            r.summary.rows_cleared,
            r.pct_permissible()
        );
    }
    Ok(())
}
