//! Ground-truth social codes.
//!
//! A social code maps the affinity changes an action causes to a binary
//! verdict. Under the global code an action is unacceptable only when the
//! team's summed affinity drops; under the simple code it is unacceptable as
//! soon as any agent other than the actor loses affinity.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::affinity::{affinity, placement_pair_delta, PairCounts, PreferenceMatrix};
use crate::board::Board;
use crate::error::{Error, Result};
use crate::piece::Piece;
use crate::placement::PlacementAction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SocialCodeKind {
    Global,
    Simple,
}

impl SocialCodeKind {
    pub const ALL: [SocialCodeKind; 2] = [SocialCodeKind::Global, SocialCodeKind::Simple];

    pub fn name(self) -> &'static str {
        match self {
            SocialCodeKind::Global => "global",
            SocialCodeKind::Simple => "simple",
        }
    }
}

impl fmt::Display for SocialCodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SocialCodeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "global" => Ok(SocialCodeKind::Global),
            "simple" => Ok(SocialCodeKind::Simple),
            other => Err(Error::config(format!("unknown social code '{other}'"))),
        }
    }
}

/// Whose affinities the global code sums.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalScope {
    #[default]
    WholeTeam,
    ExcludeActor,
}

/// A social code together with its scope switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SocialCode {
    pub kind: SocialCodeKind,
    #[serde(default)]
    pub global_scope: GlobalScope,
}

impl From<SocialCodeKind> for SocialCode {
    fn from(kind: SocialCodeKind) -> Self {
        SocialCode {
            kind,
            global_scope: GlobalScope::WholeTeam,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamMember {
    pub id: AgentId,
    pub prefs: PreferenceMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<TeamMember>", into = "Vec<TeamMember>")]
pub struct TeamProfile {
    members: Vec<TeamMember>,
}

impl TeamProfile {
    pub fn new(members: Vec<TeamMember>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::config("team has no agents"));
        }
        for (i, m) in members.iter().enumerate() {
            if members[..i].iter().any(|o| o.id == m.id) {
                return Err(Error::config(format!("duplicate agent id {}", m.id)));
            }
        }
        Ok(TeamProfile { members })
    }

    /// The two-agent team used throughout the experiments.
    pub fn experiment_pair() -> Self {
        TeamProfile::new(vec![
            TeamMember {
                id: AgentId(1),
                prefs: PreferenceMatrix::first_teammate(),
            },
            TeamMember {
                id: AgentId(2),
                prefs: PreferenceMatrix::second_teammate(),
            },
        ])
        .expect("distinct ids")
    }

    pub fn members(&self) -> &[TeamMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.members.iter().map(|m| m.id)
    }

    pub fn position(&self, id: AgentId) -> Result<usize> {
        self.members
            .iter()
            .position(|m| m.id == id)
            .ok_or(Error::UnknownAgent(id))
    }

    pub fn prefs(&self, id: AgentId) -> Result<&PreferenceMatrix> {
        Ok(&self.members[self.position(id)?].prefs)
    }

    /// Per-member affinity change for a pair-count delta, in team order.
    pub fn deltas_from_pairs(&self, pair_delta: &PairCounts) -> Vec<i32> {
        self.members
            .iter()
            .map(|m| m.prefs.score(pair_delta))
            .collect()
    }
}

impl TryFrom<Vec<TeamMember>> for TeamProfile {
    type Error = Error;
    fn try_from(members: Vec<TeamMember>) -> Result<Self> {
        TeamProfile::new(members)
    }
}

impl From<TeamProfile> for Vec<TeamMember> {
    fn from(t: TeamProfile) -> Self {
        t.members
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermissibilityVerdict {
    pub permissible: bool,
    /// Summed affinity change over the agents the global code considers.
    pub delta: i32,
    pub per_agent_deltas: BTreeMap<AgentId, i32>,
}

impl SocialCode {
    /// Verdict from per-member affinity changes given in team order.
    pub fn verdict_from_deltas(
        &self,
        team: &TeamProfile,
        acting: AgentId,
        deltas: &[i32],
    ) -> Result<PermissibilityVerdict> {
        let actor = team.position(acting)?;
        debug_assert_eq!(deltas.len(), team.len());
        let others = || {
            deltas
                .iter()
                .enumerate()
                .filter(move |(i, _)| *i != actor)
                .map(|(_, d)| *d)
        };
        let delta = match self.global_scope {
            GlobalScope::WholeTeam => deltas.iter().sum(),
            GlobalScope::ExcludeActor => others().sum(),
        };
        let permissible = match self.kind {
            SocialCodeKind::Global => delta >= 0,
            SocialCodeKind::Simple => others().all(|d| d >= 0),
        };
        Ok(PermissibilityVerdict {
            permissible,
            delta,
            per_agent_deltas: team.ids().zip(deltas.iter().copied()).collect(),
        })
    }

    pub fn judge(
        &self,
        team: &TeamProfile,
        acting: AgentId,
        before: &Board,
        after: &Board,
    ) -> Result<PermissibilityVerdict> {
        team.position(acting)?;
        let deltas: Vec<i32> = team
            .members()
            .iter()
            .map(|m| affinity(after, &m.prefs).0 - affinity(before, &m.prefs).0)
            .collect();
        self.verdict_from_deltas(team, acting, &deltas)
    }

    /// Ground-truth verdict for a candidate placement, without materializing
    /// the resulting board.
    pub fn judge_placement(
        &self,
        team: &TeamProfile,
        acting: AgentId,
        before: &Board,
        piece: Piece,
        action: PlacementAction,
    ) -> Result<PermissibilityVerdict> {
        let (pairs, _) = placement_pair_delta(before, piece, action)?;
        self.verdict_from_deltas(team, acting, &team.deltas_from_pairs(&pairs))
    }

    /// How much the action hurts: the negative part of the team sum for the
    /// global code, the summed losses of the other agents for the simple one.
    pub fn harm(&self, verdict: &PermissibilityVerdict, acting: AgentId) -> i32 {
        match self.kind {
            SocialCodeKind::Global => (-verdict.delta).max(0),
            SocialCodeKind::Simple => verdict
                .per_agent_deltas
                .iter()
                .filter(|(id, _)| **id != acting)
                .map(|(_, d)| (-d).max(0))
                .sum(),
        }
    }
}

/// Judge an action given the boards before and after it (after any clears).
pub fn judge(
    kind: SocialCodeKind,
    team: &TeamProfile,
    acting: AgentId,
    before: &Board,
    after: &Board,
) -> Result<PermissibilityVerdict> {
    SocialCode::from(kind).judge(team, acting, before, after)
}

/// Per-agent affinity change of a placement, from the rows the move touches.
pub fn delta_incremental(
    team: &TeamProfile,
    before: &Board,
    piece: Piece,
    action: PlacementAction,
) -> Result<BTreeMap<AgentId, i32>> {
    let (pairs, _) = placement_pair_delta(before, piece, action)?;
    Ok(team.ids().zip(team.deltas_from_pairs(&pairs)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::PairKey;
    use crate::board::Color;
    use crate::piece::Shape;
    use crate::placement::apply_placement;

    fn team_of(a: &[(PairKey, i64)], b: &[(PairKey, i64)]) -> TeamProfile {
        TeamProfile::new(vec![
            TeamMember {
                id: AgentId(1),
                prefs: PreferenceMatrix::from_pairs(a).unwrap(),
            },
            TeamMember {
                id: AgentId(2),
                prefs: PreferenceMatrix::from_pairs(b).unwrap(),
            },
        ])
        .unwrap()
    }

    #[test]
    fn unchanged_board_is_permissible_under_both_codes() {
        let board: Board = "....\nR...".parse().unwrap();
        let team = TeamProfile::experiment_pair();
        for kind in SocialCodeKind::ALL {
            let v = judge(kind, &team, AgentId(1), &board, &board).unwrap();
            assert!(v.permissible);
            assert_eq!(v.delta, 0);
            assert_eq!(v.per_agent_deltas.len(), 2);
        }
    }

    #[test]
    fn isolated_placement_has_zero_delta() {
        let board: Board = "......\n......\nR.....".parse().unwrap();
        let piece = Piece::new(Shape::O, Color::Blue);
        let action = PlacementAction::new(0, 3);
        let (after, _) = apply_placement(&board, piece, action).unwrap();
        let v = judge(
            SocialCodeKind::Global,
            &TeamProfile::experiment_pair(),
            AgentId(2),
            &board,
            &after,
        )
        .unwrap();
        assert!(v.permissible);
        assert_eq!(v.delta, 0);
        let inc =
            delta_incremental(&TeamProfile::experiment_pair(), &board, piece, action).unwrap();
        assert!(inc.values().all(|&d| d == 0));
    }

    /// A flat blue I dropped onto `bottom` at column 0. Both teams below only
    /// weigh red-blue (agent 1) and green-blue (agent 2).
    fn blue_bar_on(bottom: &str) -> (Board, Board, TeamProfile) {
        let before: Board = format!("......\n......\n......\n{bottom}").parse().unwrap();
        let piece = Piece::new(Shape::I, Color::Blue);
        let (after, cleared) = apply_placement(&before, piece, PlacementAction::new(0, 0)).unwrap();
        assert_eq!(cleared, 0);
        let team = team_of(&[(PairKey::RedBlue, 1)], &[(PairKey::GreenBlue, -1)]);
        let inc = delta_incremental(&team, &before, piece, PlacementAction::new(0, 0)).unwrap();
        let full = judge(SocialCodeKind::Global, &team, AgentId(1), &before, &after).unwrap();
        assert_eq!(inc, full.per_agent_deltas);
        (before, after, team)
    }

    #[test]
    fn actor_gains_three_teammate_loses_one() {
        let (before, after, team) = blue_bar_on("RRRG..");
        let global = judge(SocialCodeKind::Global, &team, AgentId(1), &before, &after).unwrap();
        assert_eq!(global.per_agent_deltas[&AgentId(1)], 3);
        assert_eq!(global.per_agent_deltas[&AgentId(2)], -1);
        assert_eq!(global.delta, 2);
        assert!(global.permissible);
        let simple = judge(SocialCodeKind::Simple, &team, AgentId(1), &before, &after).unwrap();
        assert!(!simple.permissible);
        // the same move made by agent 2 harms nobody else
        let simple = judge(SocialCodeKind::Simple, &team, AgentId(2), &before, &after).unwrap();
        assert!(simple.permissible);
    }

    #[test]
    fn actor_gains_one_teammate_loses_two() {
        let (before, after, team) = blue_bar_on("RGG...");
        let global = judge(SocialCodeKind::Global, &team, AgentId(1), &before, &after).unwrap();
        assert_eq!(global.per_agent_deltas[&AgentId(1)], 1);
        assert_eq!(global.per_agent_deltas[&AgentId(2)], -2);
        assert_eq!(global.delta, -1);
        assert!(!global.permissible);
        assert!(
            !judge(SocialCodeKind::Simple, &team, AgentId(1), &before, &after)
                .unwrap()
                .permissible
        );
    }

    #[test]
    fn exclude_actor_scope_drops_own_delta() {
        let (before, after, team) = blue_bar_on("RRRG..");
        let code = SocialCode {
            kind: SocialCodeKind::Global,
            global_scope: GlobalScope::ExcludeActor,
        };
        let v = code.judge(&team, AgentId(1), &before, &after).unwrap();
        assert_eq!(v.delta, -1);
        assert!(!v.permissible);
    }

    #[test]
    fn unknown_agent_is_an_error() {
        let board = Board::new(4, 4);
        let err = judge(
            SocialCodeKind::Simple,
            &TeamProfile::experiment_pair(),
            AgentId(9),
            &board,
            &board,
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnknownAgent(AgentId(9))));
    }

    #[test]
    fn harm_measures() {
        let (before, after, team) = blue_bar_on("RGG...");
        let global = SocialCode::from(SocialCodeKind::Global);
        let v = global.judge(&team, AgentId(1), &before, &after).unwrap();
        assert_eq!(global.harm(&v, AgentId(1)), 1);
        let simple = SocialCode::from(SocialCodeKind::Simple);
        let v = simple.judge(&team, AgentId(1), &before, &after).unwrap();
        assert_eq!(simple.harm(&v, AgentId(1)), 2);
        assert_eq!(simple.harm(&v, AgentId(2)), 0);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let m = TeamMember {
            id: AgentId(1),
            prefs: PreferenceMatrix::indifferent(),
        };
        assert!(TeamProfile::new(vec![m.clone(), m]).is_err());
        assert!(TeamProfile::new(vec![]).is_err());
    }
}
