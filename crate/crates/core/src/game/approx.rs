use std::collections::{BTreeSet, HashMap};

use super::ef::EfSolver;
use super::strategy::{MoveBranch, Node, Pair, ReplyBranch, Strategy, StrategyBody};
use super::{check_pair, GameKind, GameOutcome, Move, Player, Side, ToleranceSchedule, MAX_TREE_NODES};
use crate::error::{Error, Result};
use crate::metric::{min_distance_gap, MetricSpace, Point};
use crate::rank::{Budget, RankValue};
use crate::rational::Rational;
use crate::tuple::PointTuple;

type Moves = Vec<(Point, Point)>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Sequence(Moves, u32),
    Set(Moves, bool, u32),
}

/// Budget from which the approximation game's outcome no longer changes.
///
/// Past the first index `J` with `f(J) <= gap/2` every tolerance test is an
/// exact distance test, so Player 1 can spend `J` moves and then replay a
/// winning Ehrenfeucht–Fraïssé line, using at most two moves per round to
/// reach the side it wants.
pub fn approx_omega_budget(space: &MetricSpace, a: &[Point], f: &ToleranceSchedule) -> u32 {
    let distinct: BTreeSet<_> = a.iter().collect();
    let rounds = (space.len() - distinct.len()).max(1) as u32;
    let lead = match min_distance_gap(space) {
        Ok(g) => f.first_index_at_most(g.min_gap / Rational::from_integer(2)) as u32,
        Err(_) => 0,
    };
    lead + 2 * rounds
}

/// Memoized backward induction for the approximation game on one base pair.
///
/// Memo keys carry the full move sequence, since the tolerance at move `j` is
/// `f(j)`. When `f(0)` is already at most half the smallest distance gap all
/// tests are exact and positions collapse to the set of played pairs plus the
/// side to move.
pub struct ApproxSolver<'a> {
    space: &'a MetricSpace,
    a: Vec<Point>,
    b: Vec<Point>,
    schedule: ToleranceSchedule,
    tolerances: Vec<Rational>,
    exact: bool,
    memo: HashMap<Key, bool>,
}

impl<'a> ApproxSolver<'a> {
    pub fn new(space: &'a MetricSpace, a: &[Point], b: &[Point], schedule: ToleranceSchedule) -> Result<Self> {
        check_pair(space, a, b)?;
        let exact = match min_distance_gap(space) {
            Ok(g) => schedule.at(0) <= g.min_gap / Rational::from_integer(2),
            Err(_) => true,
        };
        Ok(ApproxSolver {
            space,
            a: a.to_vec(),
            b: b.to_vec(),
            schedule,
            tolerances: Vec::new(),
            exact,
            memo: HashMap::new(),
        })
    }

    pub fn explored(&self) -> usize {
        self.memo.len()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    fn tolerance(&mut self, j: usize) -> Rational {
        while self.tolerances.len() <= j {
            let next = self.schedule.at(self.tolerances.len());
            self.tolerances.push(next);
        }
        self.tolerances[j]
    }

    /// Conditions (I) and (II) restricted to the new pair at index `moves.len()`.
    fn admissible(&mut self, moves: &Moves, c: Point, d: Point) -> bool {
        let j = moves.len();
        let s = self.space;
        if self.exact {
            return self.a.iter().zip(&self.b).all(|(&ai, &bi)| s.class(ai, c) == s.class(bi, d))
                && moves.iter().all(|&(ci, di)| s.class(ci, c) == s.class(di, d));
        }
        let fj = self.tolerance(j);
        if !self.a.iter().zip(&self.b).all(|(&ai, &bi)| s.d(ai, c).abs_diff(&s.d(bi, d)) < fj) {
            return false;
        }
        for (i, &(ci, di)) in moves.iter().enumerate() {
            let fi = self.tolerance(i);
            if s.d(ci, c).abs_diff(&s.d(di, d)) >= fi + fj {
                return false;
            }
        }
        true
    }

    fn key(&self, moves: &Moves, beta: u32) -> Key {
        if self.exact {
            let mut set = moves.clone();
            set.sort_unstable();
            set.dedup();
            Key::Set(set, moves.len() % 2 == 1, beta)
        } else {
            Key::Sequence(moves.clone(), beta)
        }
    }

    /// Player 2 wins from `moves` (all admissible) when Player 1 must play below `beta`.
    fn wins(&mut self, moves: &Moves, beta: u32) -> bool {
        if beta == 0 {
            return true;
        }
        let key = self.key(moves, beta);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        // a longer continuation only adds conditions, so ordinal beta - 1 is the hardest
        let result = self.space.points().all(|x| self.answer(moves, x, beta - 1).is_some());
        self.memo.insert(key, result);
        result
    }

    fn answer(&mut self, moves: &Moves, x: Point, ordinal: u32) -> Option<Point> {
        let side = Side::for_approx_move(moves.len());
        for y in self.space.points() {
            let (c, d) = Move::new(ordinal, side, x).pair_with(y);
            if !self.admissible(moves, c, d) {
                continue;
            }
            let mut ext = moves.clone();
            ext.push((c, d));
            if self.wins(&ext, ordinal) {
                return Some(y);
            }
        }
        None
    }

    /// Whether Player 2 wins from the start with budget `beta`.
    pub fn player2_wins_at(&mut self, beta: u32) -> bool {
        self.wins(&Vec::new(), beta)
    }

    fn extend(&mut self, moves: Option<&Moves>, mv: &Move, y: Point) -> Option<Moves> {
        let moves = moves?;
        let (c, d) = mv.pair_with(y);
        if self.admissible(moves, c, d) {
            let mut ext = moves.clone();
            ext.push((c, d));
            Some(ext)
        } else {
            None
        }
    }

    fn p1_tree(&mut self, moves: Option<&Moves>, j: usize, beta: u32, nodes: &mut usize) -> Result<Node> {
        *nodes += 1;
        if *nodes > MAX_TREE_NODES {
            return Err(Error::StrategyTooLarge { limit: MAX_TREE_NODES });
        }
        let side = Side::for_approx_move(j);
        let mv = match moves {
            None => Move::new(0, side, 0),
            Some(m) => (0..beta)
                .flat_map(|o| self.space.points().map(move |x| (o, x)))
                .find(|&(o, x)| self.answer(m, x, o).is_none())
                .map(|(o, x)| Move::new(o, side, x))
                .ok_or_else(|| Error::Internal("no winning Player-1 move at a losing position".into()))?,
        };
        let mut children = Vec::with_capacity(self.space.len());
        for y in self.space.points() {
            let ext = self.extend(moves, &mv, y);
            let node = if mv.ordinal == 0 {
                Node::End
            } else {
                self.p1_tree(ext.as_ref(), j + 1, mv.ordinal, nodes)?
            };
            children.push(ReplyBranch { reply: y, node });
        }
        Ok(Node::One { mv, children })
    }

    fn p2_tree(&mut self, moves: &Moves, beta: u32, nodes: &mut usize) -> Result<Node> {
        *nodes += 1;
        if *nodes > MAX_TREE_NODES {
            return Err(Error::StrategyTooLarge { limit: MAX_TREE_NODES });
        }
        if beta == 0 {
            return Ok(Node::End);
        }
        let side = Side::for_approx_move(moves.len());
        let mut children = Vec::new();
        for ordinal in 0..beta {
            for x in self.space.points() {
                let mv = Move::new(ordinal, side, x);
                let reply = self
                    .answer(moves, x, ordinal)
                    .ok_or_else(|| Error::Internal("Player 2 has no answer at a winning position".into()))?;
                let ext = self.extend(Some(moves), &mv, reply).expect("answer is admissible");
                let node = self.p2_tree(&ext, ordinal, nodes)?;
                children.push(MoveBranch { mv, reply, node });
            }
        }
        Ok(Node::Two { children })
    }
}

/// Solves the approximation game on `(a, b)` with schedule `f` at budget `alpha`.
///
/// Budget 0 is an immediate Player-2 win: no move is played, so conditions
/// (I) and (II) hold vacuously.
pub fn solve_approx_game(
    space: &MetricSpace,
    a: &PointTuple,
    b: &PointTuple,
    alpha: Budget,
    f: ToleranceSchedule,
) -> Result<GameOutcome> {
    let mut solver = ApproxSolver::new(space, a, b, f)?;
    let omega_budget = approx_omega_budget(space, a, &f);
    let beta = match alpha {
        Budget::Finite(n) => n,
        Budget::Omega => omega_budget,
    };
    let mut strategy = Strategy {
        game: GameKind::Approx,
        player: Player::Two,
        pair: Pair { a: a.clone(), b: b.clone() },
        budget: alpha,
        effective_budget: None,
        schedule: Some(f),
        witness: None,
        body: StrategyBody::Tree(Node::End),
    };
    let mut nodes = 0;
    if solver.player2_wins_at(beta) {
        strategy.body = match alpha {
            Budget::Finite(n) => StrategyBody::Tree(solver.p2_tree(&Vec::new(), n, &mut nodes)?),
            Budget::Omega => {
                // exact answers satisfy every positive tolerance, so the exact
                // back-and-forth system doubles as the certificate
                let mut ef = EfSolver::new(space);
                let start = ef.start(a, b).ok_or_else(|| {
                    Error::Internal("Player 2 survives the omega budget from a non-isometric pair".into())
                })?;
                StrategyBody::System(ef.back_and_forth_system(&start).map_err(|_| {
                    Error::Internal("approximation and exact games disagree at omega".into())
                })?)
            }
        };
    } else {
        strategy.player = Player::One;
        let effective = match alpha {
            Budget::Finite(n) => n,
            Budget::Omega => {
                let n = (1..=omega_budget)
                    .find(|&n| !solver.player2_wins_at(n))
                    .expect("Player 1 wins by the omega budget");
                strategy.effective_budget = Some(n);
                n
            }
        };
        strategy.body = StrategyBody::Tree(solver.p1_tree(Some(&Vec::new()), 0, effective, &mut nodes)?);
    }
    Ok(GameOutcome {
        winner: strategy.player,
        strategy,
        explored: solver.explored(),
    })
}

/// Whether Player 2 wins the approximation game at `alpha`.
pub fn approx_related(
    space: &MetricSpace,
    a: &PointTuple,
    b: &PointTuple,
    alpha: Budget,
    f: ToleranceSchedule,
) -> Result<bool> {
    let mut solver = ApproxSolver::new(space, a, b, f)?;
    let beta = match alpha {
        Budget::Finite(n) => n,
        Budget::Omega => approx_omega_budget(space, a, &f),
    };
    Ok(solver.player2_wins_at(beta))
}

/// Least finite budget at which some schedule in `family` defeats Player 2,
/// or `Infinity` if none does by its omega budget.
///
/// Each witnessing schedule certifies an upper bound on the rank defined over
/// all computable schedules; that rank itself is not computed.
pub fn metric_rank_upper(
    space: &MetricSpace,
    a: &PointTuple,
    b: &PointTuple,
    family: &[ToleranceSchedule],
) -> Result<RankValue> {
    if family.is_empty() {
        return Err(Error::Precondition("empty schedule family".into()));
    }
    let mut best = RankValue::Infinity;
    for &f in family {
        let mut solver = ApproxSolver::new(space, a, b, f)?;
        let limit = approx_omega_budget(space, a, &f);
        for mu in 1..=limit {
            if RankValue::Finite(mu) >= best {
                break;
            }
            if !solver.player2_wins_at(mu) {
                best = RankValue::Finite(mu);
                break;
            }
        }
    }
    Ok(best)
}
