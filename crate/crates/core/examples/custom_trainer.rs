//! Plugging in a different trainer. This one only ever presses the social
//! button, and skips every third action the way a tired human might.

use star::agent::AgentConfig;
use star::feedback::{DesignKind, SocialLabel, TrainerSignal};
use star::runner::{run_suite, MatchConfig, StepView, Trainer};
use star::social::SocialCode;

struct SocialOnly {
    code: SocialCode,
    team: star::social::TeamProfile,
    seen: usize,
}

impl Trainer for SocialOnly {
    fn feedback(&mut self, view: &StepView<'_>) -> star::error::Result<TrainerSignal> {
        self.seen += 1;
        if self.seen.is_multiple_of(3) {
            return Ok(TrainerSignal::default());
        }
        let v = self
            .code
            .judge(&self.team, view.acting, view.before, view.after)?;
        Ok(TrainerSignal {
            effectiveness: None,
            social: Some(SocialLabel::from_permissible(v.permissible)),
        })
    }
}

fn main() -> anyhow::Result<()> {
    let config = MatchConfig {
        design: DesignKind::Parallel,
        games: 5,
        ..MatchConfig::default()
    };
    let mut agents = config.build_agents(&AgentConfig::default())?;
    let mut trainer = SocialOnly {
        code: config.social(),
        team: config.team.clone(),
        seen: 0,
    };
    for r in run_suite(&config, &mut agents, &mut trainer)? {
        let delivered: usize = r.steps.iter().map(|s| s.delivered.len()).sum();
        println!(
            "game {}: {} actions, {} labels delivered, {:.1}% permissible",
            r.header.game + 1,
            r.summary.actions_total,
            delivered,
            r.pct_permissible()
        );
    }
    Ok(())
}
