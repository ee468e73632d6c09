//! Ten games taught by the human proxy, for one design and code.
//!
//!     cargo run --example proxy_suite -- blended simple

use star::agent::AgentConfig;
use star::feedback::DesignKind;
use star::proxy::ProxyPolicy;
use star::runner::{run_proxy_suite, MatchConfig};
use star::social::SocialCodeKind;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let design: DesignKind = args.next().as_deref().unwrap_or("parallel").parse()?;
    let code: SocialCodeKind = args.next().as_deref().unwrap_or("global").parse()?;
    let config = MatchConfig {
        design,
        social_code: code,
        ..MatchConfig::default()
    };

    let (records, agents) =
        run_proxy_suite(&config, &AgentConfig::default(), ProxyPolicy::default())?;
    println!("{design} / {code} code, seed {}", config.seed);
    for r in &records {
        let fallbacks = r.steps.iter().filter(|s| s.prediction.fallback).count();
        println!(
            "game {:>2}: {:>4} rows  {:>4} actions  {:>5.1}% permissible  {fallbacks} fallbacks  ({:?})",
            r.header.game + 1,
            r.summary.rows_cleared,
            r.summary.actions_total,
            r.pct_permissible(),
            r.summary.end
        );
    }
    for a in &agents {
        let w: Vec<String> = a
            .social_model()
            .parameters()
            .iter()
            .map(|p| format!("{p:+.3}"))
            .collect();
        println!(
            "agent {} social weights [RR GG BB RG RB GB | bias]: {}",
            a.id(),
            w.join(" ")
        );
    }
    Ok(())
}
