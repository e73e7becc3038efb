//! Ehrenfeucht–Fraïssé games and tolerance-scheduled approximation games on a
//! finite metric space, solved by memoized backward induction.

mod approx;
mod ef;
pub(crate) mod pmap;
mod policy;
mod replay;
mod strategy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};
use crate::rational::Rational;

pub use approx::{approx_omega_budget, approx_related, metric_rank_upper, solve_approx_game, ApproxSolver};
pub(crate) use ef::atomic_witness;
pub use ef::{ef_exhaustion_budget, solve_ef_game, EfSolver};
pub use policy::{IsometryPolicy, Player2Policy, SolverPolicy};
pub use replay::{
    approx_conditions_hold, exhaustive_check, partial_isometry, replay_game, ExhaustiveReport,
    OpponentMove, TranscriptStep, Verdict,
};
pub use strategy::{BackAndForthSystem, MoveBranch, Node, Pair, ReplyBranch, Strategy, StrategyBody, MAX_TREE_NODES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    /// Side Player 1 elongates at move `j` of the approximation game.
    pub fn for_approx_move(j: usize) -> Side {
        if j % 2 == 0 {
            Side::Left
        } else {
            Side::Right
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    #[serde(rename = "player1")]
    One,
    #[serde(rename = "player2")]
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    Ef,
    Approx,
}

/// A Player-1 move: an ordinal below the current bound and a point on one side.
///
/// Field order gives the tie-break order: ordinal, then point, then left before right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Move {
    pub ordinal: u32,
    pub point: Point,
    pub side: Side,
}

impl Move {
    pub fn new(ordinal: u32, side: Side, point: Point) -> Self {
        Move { ordinal, side, point }
    }

    /// The `(left, right)` pair produced when `reply` answers this move.
    pub fn pair_with(&self, reply: Point) -> (Point, Point) {
        match self.side {
            Side::Left => (self.point, reply),
            Side::Right => (reply, self.point),
        }
    }
}

/// A tolerance schedule `f(j) = base * ratio^j` with `base > 0` and `0 < ratio < 1`,
/// hence strictly decreasing, positive and tending to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule")]
pub struct ToleranceSchedule {
    pub base: Rational,
    pub ratio: Rational,
}

#[derive(Deserialize)]
struct RawSchedule {
    base: Rational,
    ratio: Rational,
}

impl TryFrom<RawSchedule> for ToleranceSchedule {
    type Error = Error;
    fn try_from(r: RawSchedule) -> Result<Self> {
        ToleranceSchedule::geometric(r.base, r.ratio)
    }
}

impl ToleranceSchedule {
    pub fn geometric(base: Rational, ratio: Rational) -> Result<Self> {
        if !base.is_positive() {
            return Err(Error::Precondition(format!("schedule base {base} must be positive")));
        }
        if !ratio.is_positive() || ratio >= Rational::ONE {
            return Err(Error::Precondition(format!("schedule ratio {ratio} must lie in (0, 1)")));
        }
        Ok(ToleranceSchedule { base, ratio })
    }

    pub fn at(&self, j: usize) -> Rational {
        self.base * self.ratio.pow(j as u32)
    }

    /// First index `j` with `f(j) <= bound`. `bound` must be positive.
    pub fn first_index_at_most(&self, bound: Rational) -> usize {
        let mut j = 0;
        let mut v = self.base;
        while v > bound {
            v = v * self.ratio;
            j += 1;
        }
        j
    }

    /// The two schedules used by default when bounding metric ranks.
    pub fn default_family() -> Vec<ToleranceSchedule> {
        vec![
            ToleranceSchedule::geometric(Rational::new(1, 4), Rational::new(1, 2)).expect("valid"),
            ToleranceSchedule::geometric(Rational::new(1, 16), Rational::new(1, 2)).expect("valid"),
        ]
    }
}

impl fmt::Display for ToleranceSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "geometric:{},{}", self.base, self.ratio)
    }
}

/// Parses `geometric:q,r`.
impl FromStr for ToleranceSchedule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix("geometric:")
            .ok_or_else(|| Error::Parse(format!("unknown schedule `{s}`, expected geometric:q,r")))?;
        let (q, r) = body
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("schedule `{s}` needs two parameters")))?;
        ToleranceSchedule::geometric(q.parse()?, r.parse()?)
    }
}

/// Result of solving a game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub winner: Player,
    pub strategy: Strategy,
    pub explored: usize,
}

/// Checks tuple lengths and point ranges shared by every game entry point.
pub(crate) fn check_pair(space: &MetricSpace, a: &[Point], b: &[Point]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    for &p in a.iter().chain(b) {
        space.check_point(p)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_values() {
        let f: ToleranceSchedule = "geometric:1/4,1/2".parse().unwrap();
        assert_eq!(f.at(0), Rational::new(1, 4));
        assert_eq!(f.at(3), Rational::new(1, 32));
        assert!((0..10).all(|j| f.at(j + 1) < f.at(j)));
        assert_eq!(f.first_index_at_most(Rational::new(1, 2)), 0);
        let g: ToleranceSchedule = "geometric:4,1/2".parse().unwrap();
        assert_eq!(g.first_index_at_most(Rational::new(1, 2)), 3);
        assert_eq!(g.to_string(), "geometric:4,1/2");
    }

    #[test]
    fn schedule_rejects_bad_parameters() {
        assert!("geometric:0,1/2".parse::<ToleranceSchedule>().is_err());
        assert!("geometric:1,1".parse::<ToleranceSchedule>().is_err());
        assert!("geometric:1,-1/2".parse::<ToleranceSchedule>().is_err());
        assert!("linear:1,1/2".parse::<ToleranceSchedule>().is_err());
        let bad = r#"{"base":"1","ratio":"3/2"}"#;
        assert!(serde_json::from_str::<ToleranceSchedule>(bad).is_err());
    }

    #[test]
    fn side_schedule_alternates() {
        assert_eq!(Side::for_approx_move(0), Side::Left);
        assert_eq!(Side::for_approx_move(1), Side::Right);
        assert_eq!(Side::for_approx_move(4), Side::Left);
    }
}
