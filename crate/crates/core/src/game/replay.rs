use serde::{Deserialize, Serialize};

use super::policy::Player2Policy;
use super::strategy::{Node, Strategy, StrategyBody};
use super::{check_pair, pmap, GameKind, Move, Player, Side, ToleranceSchedule};
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};
use crate::rank::Budget;

/// Whether `left_i -> right_i` preserves every distance exactly.
pub fn partial_isometry(space: &MetricSpace, left: &[Point], right: &[Point]) -> bool {
    left.len() == right.len()
        && (0..left.len()).all(|i| (0..i).all(|j| space.d(left[i], left[j]) == space.d(right[i], right[j])))
}

/// End-of-game conditions of the approximation game for base pair `(a, b)`
/// and extensions `(c, d)`.
pub fn approx_conditions_hold(
    space: &MetricSpace,
    a: &[Point],
    b: &[Point],
    c: &[Point],
    d: &[Point],
    f: &ToleranceSchedule,
) -> bool {
    let tol: Vec<_> = (0..c.len()).map(|j| f.at(j)).collect();
    let first = (0..c.len()).all(|j| {
        a.iter()
            .zip(b)
            .all(|(&ai, &bi)| (space.d(ai, c[j]) - space.d(bi, d[j])).abs() < tol[j])
    });
    let second = (0..c.len())
        .all(|j| (0..j).all(|i| (space.d(c[i], c[j]) - space.d(d[i], d[j])).abs() < tol[i] + tol[j]));
    first && second
}

/// One scripted opponent action: a reply to a Player-1 strategy, or a move
/// against a Player-2 strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpponentMove {
    Reply(Point),
    Play(Move),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptStep {
    #[serde(rename = "move")]
    pub mv: Move,
    pub reply: Point,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub winner: Player,
    pub transcript: Vec<TranscriptStep>,
}

fn opening_bound(strategy: &Strategy) -> Result<u32> {
    match (strategy.player, strategy.budget, strategy.effective_budget) {
        (_, Budget::Finite(n), _) => Ok(n),
        (Player::One, Budget::Omega, Some(n)) => Ok(n),
        (Player::One, Budget::Omega, None) => Err(Error::ShapeMismatch(
            "omega Player-1 strategy without an effective budget".into(),
        )),
        (Player::Two, Budget::Omega, _) => Ok(u32::MAX),
    }
}

fn check_move(space: &MetricSpace, game: GameKind, step: usize, bound: u32, mv: &Move) -> Result<()> {
    let reason = if mv.ordinal >= bound {
        format!("ordinal {} is not below {}", mv.ordinal, bound)
    } else if mv.point >= space.len() {
        format!("point {} is outside the space", mv.point)
    } else if game == GameKind::Approx && mv.side != Side::for_approx_move(step) {
        format!("move {step} must elongate the {:?} side", Side::for_approx_move(step))
    } else {
        return Ok(());
    };
    Err(Error::IllegalMove { step, reason })
}

fn judge(space: &MetricSpace, strategy: &Strategy, transcript: &[TranscriptStep]) -> Result<Player> {
    let (c, d): (Vec<_>, Vec<_>) = transcript.iter().map(|s| s.mv.pair_with(s.reply)).unzip();
    let (a, b) = (&strategy.pair.a, &strategy.pair.b);
    let survives = match strategy.game {
        GameKind::Ef => {
            let left: Vec<_> = a.iter().chain(&c).copied().collect();
            let right: Vec<_> = b.iter().chain(&d).copied().collect();
            partial_isometry(space, &left, &right)
        }
        GameKind::Approx => {
            let f = strategy
                .schedule
                .as_ref()
                .ok_or_else(|| Error::ShapeMismatch("approximation strategy without a schedule".into()))?;
            approx_conditions_hold(space, a, b, &c, &d, f)
        }
    };
    Ok(if survives { Player::Two } else { Player::One })
}

/// Plays `strategy` against `script` and reports who wins.
///
/// Against a Player-1 strategy the script lists replies; against a Player-2
/// strategy it lists Player-1 moves and must end with an ordinal-0 move.
pub fn replay_game(space: &MetricSpace, strategy: &Strategy, script: &[OpponentMove]) -> Result<Verdict> {
    check_pair(space, &strategy.pair.a, &strategy.pair.b)?;
    let mut bound = opening_bound(strategy)?;
    let mut transcript = Vec::new();
    let mut step = 0;
    match strategy.player {
        Player::One => {
            let mut node = strategy
                .tree()
                .ok_or_else(|| Error::ShapeMismatch("Player-1 strategies must be trees".into()))?;
            while bound > 0 {
                let Node::One { mv, .. } = node else {
                    return Err(Error::ShapeMismatch(format!("strategy stops at step {step} with budget {bound} left")));
                };
                check_move(space, strategy.game, step, bound, mv)?;
                let reply = match script.get(step) {
                    Some(&OpponentMove::Reply(y)) if y < space.len() => y,
                    Some(other) => {
                        return Err(Error::IllegalMove { step, reason: format!("{other:?} is not a reply in range") })
                    }
                    None => return Err(Error::IllegalMove { step, reason: "script ends before the game".into() }),
                };
                transcript.push(TranscriptStep { mv: *mv, reply });
                node = node
                    .after_reply(reply)
                    .ok_or_else(|| Error::ShapeMismatch(format!("no branch for reply {reply} at step {step}")))?;
                bound = mv.ordinal;
                step += 1;
            }
        }
        Player::Two => {
            let mut history: Vec<(Move, Point)> = Vec::new();
            while bound > 0 {
                let mv = match script.get(step) {
                    Some(OpponentMove::Play(mv)) => *mv,
                    Some(other) => {
                        return Err(Error::IllegalMove { step, reason: format!("{other:?} is not a move") })
                    }
                    None => return Err(Error::IllegalMove { step, reason: "script ends before ordinal 0".into() }),
                };
                check_move(space, strategy.game, step, bound, &mv)?;
                let Some(reply) = strategy.reply(space, &history, &mv).filter(|&y| y < space.len()) else {
                    return Ok(Verdict { winner: Player::One, transcript });
                };
                history.push((mv, reply));
                transcript.push(TranscriptStep { mv, reply });
                bound = mv.ordinal;
                step += 1;
            }
        }
    }
    if script.len() > step {
        return Err(Error::IllegalMove { step, reason: "script continues after the game ended".into() });
    }
    let winner = judge(space, strategy, &transcript)?;
    Ok(Verdict { winner, transcript })
}

/// Outcome of replaying a strategy against every opponent line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustiveReport {
    pub player: Player,
    pub lines: usize,
    pub losing: usize,
    /// The first few losing opponent scripts.
    pub losing_lines: Vec<Vec<OpponentMove>>,
    /// Problems found in a back-and-forth certificate.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub problems: Vec<String>,
}

impl ExhaustiveReport {
    pub fn sound(&self) -> bool {
        self.losing == 0 && self.problems.is_empty()
    }
}

const KEPT_LINES: usize = 16;

struct Sweep<'a> {
    space: &'a MetricSpace,
    strategy: &'a Strategy,
    report: ExhaustiveReport,
}

impl Sweep<'_> {
    fn leaf(&mut self, script: &[OpponentMove]) -> Result<()> {
        let v = replay_game(self.space, self.strategy, script)?;
        self.report.lines += 1;
        if v.winner != self.strategy.player {
            self.report.losing += 1;
            if self.report.losing_lines.len() < KEPT_LINES {
                self.report.losing_lines.push(script.to_vec());
            }
        }
        Ok(())
    }

    fn replies(&mut self, node: &Node, script: &mut Vec<OpponentMove>) -> Result<()> {
        match node {
            Node::One { mv, children } => {
                for c in children {
                    script.push(OpponentMove::Reply(c.reply));
                    if mv.ordinal == 0 {
                        self.leaf(script)?;
                    } else {
                        self.replies(&c.node, script)?;
                    }
                    script.pop();
                }
                if children.len() != self.space.len() {
                    return Err(Error::ShapeMismatch(format!("{} replies covered, expected {}", children.len(), self.space.len())));
                }
                Ok(())
            }
            _ => self.leaf(script),
        }
    }

    fn moves(&mut self, bound: u32, script: &mut Vec<OpponentMove>) -> Result<()> {
        if bound == 0 {
            return self.leaf(script);
        }
        let sides: &[Side] = match self.strategy.game {
            GameKind::Ef => &Side::BOTH,
            GameKind::Approx => &[Side::for_approx_move(script.len())][..],
        };
        let sides = sides.to_vec();
        for ordinal in 0..bound {
            for x in self.space.points() {
                for &side in &sides {
                    script.push(OpponentMove::Play(Move::new(ordinal, side, x)));
                    if ordinal == 0 {
                        self.leaf(script)?;
                    } else {
                        self.moves(ordinal, script)?;
                    }
                    script.pop();
                }
            }
        }
        Ok(())
    }
}

/// Replays `strategy` against every opponent line at its stated budget.
/// Back-and-forth certificates are checked for closure instead.
pub fn exhaustive_check(space: &MetricSpace, strategy: &Strategy) -> Result<ExhaustiveReport> {
    check_pair(space, &strategy.pair.a, &strategy.pair.b)?;
    let mut sweep = Sweep {
        space,
        strategy,
        report: ExhaustiveReport {
            player: strategy.player,
            lines: 0,
            losing: 0,
            losing_lines: Vec::new(),
            problems: Vec::new(),
        },
    };
    match (&strategy.body, strategy.player) {
        (StrategyBody::System(system), Player::Two) => {
            sweep.report.lines = system.maps.len();
            sweep.report.problems = match pmap::from_tuples(&strategy.pair.a, &strategy.pair.b) {
                Some(start) => system.verify(space, &start),
                None => vec!["base pair is not a function".into()],
            };
        }
        (StrategyBody::System(_), Player::One) => {
            return Err(Error::ShapeMismatch("Player-1 strategies must be trees".into()))
        }
        (StrategyBody::Tree(root), Player::One) => {
            let bound = opening_bound(strategy)?;
            if bound == 0 {
                sweep.leaf(&[])?;
            } else {
                sweep.replies(root, &mut Vec::new())?;
            }
        }
        (StrategyBody::Tree(_), Player::Two) => {
            let Budget::Finite(n) = strategy.budget else {
                return Err(Error::ShapeMismatch("omega Player-2 strategies must be systems".into()));
            };
            sweep.moves(n, &mut Vec::new())?;
        }
    }
    Ok(sweep.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{solve_approx_game, solve_ef_game};
    use crate::metric::fixtures::*;
    use crate::rational::Rational;
    use crate::tuple::PointTuple;

    fn t(v: &[Point]) -> PointTuple {
        PointTuple::from(v.to_vec())
    }

    #[test]
    fn empty_script_against_depth_zero() {
        let p = path3();
        let s = solve_ef_game(&p, &t(&[0, 2]), &t(&[0, 1]), Budget::Finite(0)).unwrap().strategy;
        let v = replay_game(&p, &s, &[]).unwrap();
        assert_eq!(v.winner, Player::One);
        assert!(v.transcript.is_empty());
    }

    #[test]
    fn distinguishing_path3_beats_every_reply() {
        let p = path3();
        let s = solve_ef_game(&p, &t(&[0]), &t(&[1]), Budget::Finite(1)).unwrap().strategy;
        for y in p.points() {
            assert_eq!(replay_game(&p, &s, &[OpponentMove::Reply(y)]).unwrap().winner, Player::One);
        }
        let r = exhaustive_check(&p, &s).unwrap();
        assert_eq!((r.lines, r.losing), (3, 0));
    }

    #[test]
    fn corrupted_reply_is_caught() {
        let p = path3();
        let mut s = solve_ef_game(&p, &t(&[0]), &t(&[2]), Budget::Finite(1)).unwrap().strategy;
        assert!(exhaustive_check(&p, &s).unwrap().sound());
        let StrategyBody::Tree(root) = &mut s.body else { panic!() };
        let b = root.branch_mut(&Move::new(0, Side::Left, 0)).unwrap();
        b.reply = 1;
        let r = exhaustive_check(&p, &s).unwrap();
        assert!(r.losing >= 1);
        assert_eq!(r.losing_lines[0], vec![OpponentMove::Play(Move::new(0, Side::Left, 0))]);
    }

    #[test]
    fn illegal_scripts() {
        let p = path3();
        let s = solve_ef_game(&p, &t(&[0]), &t(&[2]), Budget::Finite(1)).unwrap().strategy;
        let bad = [OpponentMove::Play(Move::new(1, Side::Left, 0))];
        assert!(matches!(replay_game(&p, &s, &bad), Err(Error::IllegalMove { step: 0, .. })));
        assert!(matches!(replay_game(&p, &s, &[]), Err(Error::IllegalMove { .. })));
        let two = [OpponentMove::Play(Move::new(0, Side::Left, 0)); 2];
        assert!(matches!(replay_game(&p, &s, &two), Err(Error::IllegalMove { step: 1, .. })));
    }

    #[test]
    fn approx_strategies_are_sound() {
        let p = path3();
        let f = ToleranceSchedule::geometric(Rational::new(1, 4), Rational::new(1, 2)).unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 1)] {
            for n in 0..3 {
                let s = solve_approx_game(&p, &t(&[a]), &t(&[b]), Budget::Finite(n), f).unwrap().strategy;
                assert!(exhaustive_check(&p, &s).unwrap().sound(), "{a} {b} {n}");
            }
        }
    }

    #[test]
    fn system_certificates_checked_by_closure() {
        let s = square();
        let o = solve_ef_game(&s, &t(&[0]), &t(&[1]), Budget::Omega).unwrap();
        let r = exhaustive_check(&s, &o.strategy).unwrap();
        assert!(r.sound() && r.lines > 0);
    }

    #[test]
    fn conditions_checker() {
        let p = path3();
        let f = ToleranceSchedule::geometric(Rational::from_integer(4), Rational::new(1, 2)).unwrap();
        assert!(approx_conditions_hold(&p, &[0], &[1], &[2], &[0], &f));
        let g = ToleranceSchedule::geometric(Rational::new(1, 4), Rational::new(1, 2)).unwrap();
        assert!(!approx_conditions_hold(&p, &[0], &[1], &[2], &[0], &g));
        assert!(partial_isometry(&p, &[0, 1], &[2, 1]));
        assert!(!partial_isometry(&p, &[0, 2], &[0, 1]));
    }
}
