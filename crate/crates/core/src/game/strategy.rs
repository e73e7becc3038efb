use serde::{Deserialize, Serialize};

use super::pmap::{self, PartialMap};
use super::{GameKind, Move, Player, Side, ToleranceSchedule};
use crate::metric::{MetricSpace, Point};
use crate::rank::Budget;
use crate::tuple::PointTuple;

/// Materialized strategy trees larger than this are refused.
pub const MAX_TREE_NODES: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub a: PointTuple,
    pub b: PointTuple,
}

/// A strategy for one player, replayable against any opponent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    pub game: GameKind,
    pub player: Player,
    pub pair: Pair,
    pub budget: Budget,
    /// Finite budget Player 1 commits to when `budget` is omega.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effective_budget: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ToleranceSchedule>,
    /// Coordinates `(i, j)` of the base pair whose distances already disagree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<[usize; 2]>,
    #[serde(flatten)]
    pub body: StrategyBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyBody {
    Tree(Node),
    System(BackAndForthSystem),
}

/// A node of a strategy tree.
///
/// Player-1 nodes hold the chosen move and a child for every reply; Player-2
/// nodes hold, for every legal Player-1 move, the chosen reply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "turn", rename_all = "lowercase")]
pub enum Node {
    #[serde(rename = "player1")]
    One {
        #[serde(rename = "move")]
        mv: Move,
        children: Vec<ReplyBranch>,
    },
    #[serde(rename = "player2")]
    Two { children: Vec<MoveBranch> },
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplyBranch {
    pub reply: Point,
    pub node: Node,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveBranch {
    #[serde(rename = "move")]
    pub mv: Move,
    pub reply: Point,
    pub node: Node,
}

impl Node {
    pub fn count(&self) -> usize {
        1 + match self {
            Node::One { children, .. } => children.iter().map(|c| c.node.count()).sum(),
            Node::Two { children } => children.iter().map(|c| c.node.count()).sum(),
            Node::End => 0,
        }
    }

    /// Child reached when Player 2 answers the stored move with `reply`.
    pub fn after_reply(&self, reply: Point) -> Option<&Node> {
        match self {
            Node::One { children, .. } => children
                .binary_search_by_key(&reply, |c| c.reply)
                .ok()
                .map(|i| &children[i].node),
            _ => None,
        }
    }

    /// Branch answering Player-1 move `mv`.
    pub fn branch(&self, mv: &Move) -> Option<&MoveBranch> {
        match self {
            Node::Two { children } => children
                .binary_search_by(|c| c.mv.cmp(mv))
                .ok()
                .map(|i| &children[i]),
            _ => None,
        }
    }

    pub fn branch_mut(&mut self, mv: &Move) -> Option<&mut MoveBranch> {
        match self {
            Node::Two { children } => children
                .binary_search_by(|c| c.mv.cmp(mv))
                .ok()
                .map(move |i| &mut children[i]),
            _ => None,
        }
    }
}

/// A family of partial isometries closed under back-and-forth extension.
///
/// Serves as a finite certificate that Player 2 survives every budget: from
/// any member, every Player-1 move on either side has an answer that stays in
/// the family. Player 2 answers with the least point that does.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackAndForthSystem {
    pub maps: Vec<Vec<(Point, Point)>>,
}

impl BackAndForthSystem {
    pub(crate) fn new(mut maps: Vec<PartialMap>) -> Self {
        maps.sort();
        maps.dedup();
        BackAndForthSystem { maps }
    }

    pub fn contains(&self, map: &[(Point, Point)]) -> bool {
        self.maps.binary_search_by(|m| m.as_slice().cmp(map)).is_ok()
    }

    /// Player 2's answer to `(side, x)` from member `map`.
    pub fn reply(&self, space: &MetricSpace, map: &[(Point, Point)], side: Side, x: Point) -> Option<Point> {
        space.points().find(|&y| {
            let (l, r) = match side {
                Side::Left => (x, y),
                Side::Right => (y, x),
            };
            pmap::insert(map, l, r).is_some_and(|m| self.contains(&m))
        })
    }

    /// Problems with the certificate; empty iff it is a valid back-and-forth
    /// system containing `start`.
    pub fn verify(&self, space: &MetricSpace, start: &[(Point, Point)]) -> Vec<String> {
        let mut problems = Vec::new();
        if !self.contains(start) {
            problems.push(format!("start map {start:?} is not a member"));
        }
        for m in &self.maps {
            if m.windows(2).any(|w| w[0].0 >= w[1].0) || pmap::from_tuples(
                &m.iter().map(|p| p.0).collect::<Vec<_>>(),
                &m.iter().map(|p| p.1).collect::<Vec<_>>(),
            )
            .is_none()
            {
                problems.push(format!("{m:?} is not a sorted injective map"));
                continue;
            }
            if m.iter().any(|&(x, y)| x >= space.len() || y >= space.len()) {
                problems.push(format!("{m:?} leaves the space"));
                continue;
            }
            if !pmap::is_isometric(space, m) {
                problems.push(format!("{m:?} is not distance preserving"));
            }
            for side in Side::BOTH {
                for x in space.points() {
                    if self.reply(space, m, side, x).is_none() {
                        problems.push(format!("{m:?} has no answer to {side:?} {x}"));
                    }
                }
            }
        }
        problems
    }
}

impl Strategy {
    pub fn tree(&self) -> Option<&Node> {
        match &self.body {
            StrategyBody::Tree(n) => Some(n),
            StrategyBody::System(_) => None,
        }
    }

    pub fn node_count(&self) -> usize {
        match &self.body {
            StrategyBody::Tree(n) => n.count(),
            StrategyBody::System(s) => s.maps.len(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}
