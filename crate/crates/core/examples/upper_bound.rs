//! Rows a player could clear while never breaking the social code, next to
//! what the proxy's own greedy play clears when it ignores the code.

use star::harness::{compute_upper_bound, greedy_rows, oracle_game};
use star::proxy::ProxyPolicy;
use star::runner::MatchConfig;
use star::social::SocialCodeKind;

fn main() -> anyhow::Result<()> {
    let policy = ProxyPolicy::default();
    for code in SocialCodeKind::ALL {
        let config = MatchConfig {
            social_code: code,
            ..MatchConfig::default()
        };
        let bound = compute_upper_bound(&config, &policy)?;
        let greedy = greedy_rows(&config, &policy)?;
        println!("{code} code");
        for (g, (b, r)) in bound.iter().zip(&greedy).enumerate() {
            let detail = oracle_game(&config, &policy, true, g)?;
            println!(
                "  game {:>2}: bound {b:>3} rows in {:>3} actions ({} permissible, {:?});  unconstrained {r:>3}",
                g + 1,
                detail.actions,
                detail.permissible_actions,
                detail.end
            );
        }
    }
    Ok(())
}
