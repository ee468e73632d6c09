//! Game records round-trip through NDJSON and replay checks every board hash.
//! A record edited by hand no longer replays.

use star::agent::AgentConfig;
use star::proxy::ProxyPolicy;
use star::runner::{read_records, replay, run_proxy_suite, write_records, MatchConfig};

fn main() -> anyhow::Result<()> {
    let config = MatchConfig {
        games: 3,
        ..MatchConfig::default()
    };
    let (records, _) = run_proxy_suite(&config, &AgentConfig::default(), ProxyPolicy::default())?;

    let mut bytes = Vec::new();
    write_records(&records, &mut bytes)?;
    let text = String::from_utf8(bytes)?;
    println!(
        "{} NDJSON lines, {} bytes",
        text.lines().count(),
        text.len()
    );
    println!(
        "first line: {:.160}...",
        text.lines().next().unwrap_or_default()
    );

    let back = read_records(text.as_bytes())?;
    assert_eq!(back, records);
    let totals = replay(&back)?;
    println!(
        "replay ok: {} games, {} actions, {} rows, {} permissible",
        totals.games, totals.steps, totals.rows_cleared, totals.permissible_actions
    );

    let mut tampered = back.clone();
    tampered[1].steps[4].action.column ^= 1;
    match replay(&tampered) {
        Ok(_) => println!("tampered record replayed?!"),
        Err(e) => println!("tampered record rejected: {e}"),
    }
    Ok(())
}
