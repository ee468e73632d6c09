//! How each feedback design turns the trainer's two judgments into learning
//! events, for complete and partial signals.

use star::board::{Board, Color};
use star::feedback::{
    route_partial, DesignKind, Effectiveness, FeedbackContext, SocialLabel, StateRef, TrainerSignal,
};
use star::piece::{Piece, Shape};
use star::placement::PlacementAction;
use star::social::AgentId;

fn main() {
    let piece = Piece::new(Shape::S, Color::Green);
    let ctx = FeedbackContext {
        agent: AgentId(1),
        state: StateRef {
            board: Board::standard().digest(),
            piece,
        },
        action: PlacementAction::new(0, 3),
    };
    let signals = [
        (
            "effective, permissible",
            Some(Effectiveness::Effective),
            Some(SocialLabel::Permissible),
        ),
        (
            "effective, unacceptable",
            Some(Effectiveness::Effective),
            Some(SocialLabel::Unacceptable),
        ),
        (
            "ineffective, permissible",
            Some(Effectiveness::Ineffective),
            Some(SocialLabel::Permissible),
        ),
        (
            "social only: unacceptable",
            None,
            Some(SocialLabel::Unacceptable),
        ),
        (
            "effectiveness only: +1",
            Some(Effectiveness::Effective),
            None,
        ),
        ("nothing", None, None),
    ];
    for (name, effectiveness, social) in signals {
        println!("{name}");
        let signal = TrainerSignal {
            effectiveness,
            social,
        };
        for design in DesignKind::ALL {
            let events: Vec<String> = route_partial(design, &signal, &ctx)
                .iter()
                .map(|e| format!("{:?}", e.signal))
                .collect();
            println!("  {:<9} -> [{}]", design.cli_name(), events.join(", "));
        }
    }
}
