use std::collections::{BTreeSet, HashMap, VecDeque};

use super::pmap::{self, PartialMap};
use super::strategy::{BackAndForthSystem, MoveBranch, Node, Pair, ReplyBranch, Strategy, StrategyBody};
use super::{check_pair, GameKind, GameOutcome, Move, Player, Side, MAX_TREE_NODES};
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};
use crate::rank::Budget;
use crate::tuple::PointTuple;

/// Budget past which Player 2's survival no longer depends on the budget.
///
/// If Player 2 survives `|M| - k` rounds from a position naming `k` distinct
/// points, Player 1 can spend those rounds naming every remaining point, so
/// the answers assemble into a bijective isometry and Player 2 survives any
/// budget.
pub fn ef_exhaustion_budget(space: &MetricSpace, a: &[Point]) -> u32 {
    let distinct: BTreeSet<_> = a.iter().collect();
    (space.len() - distinct.len()) as u32
}

/// Memoized backward induction for the Ehrenfeucht–Fraïssé game.
///
/// Positions are partial isometries (the exact game only sees the map, not the
/// order in which it was built) paired with the current ordinal bound.
pub struct EfSolver<'a> {
    space: &'a MetricSpace,
    memo: HashMap<(PartialMap, u32), bool>,
}

impl<'a> EfSolver<'a> {
    pub fn new(space: &'a MetricSpace) -> Self {
        EfSolver { space, memo: HashMap::new() }
    }

    pub fn space(&self) -> &'a MetricSpace {
        self.space
    }

    /// Number of memoized positions.
    pub fn explored(&self) -> usize {
        self.memo.len()
    }

    /// The start map of a pair, if it is a partial isometry.
    pub(crate) fn start(&self, a: &[Point], b: &[Point]) -> Option<PartialMap> {
        pmap::from_tuples(a, b).filter(|m| pmap::is_isometric(self.space, m))
    }

    /// Whether Player 2 wins the game from `(a, b)` with the given budget.
    pub fn player2_wins(&mut self, a: &[Point], b: &[Point], budget: Budget) -> bool {
        match self.start(a, b) {
            None => false,
            Some(map) => {
                let beta = match budget {
                    Budget::Finite(n) => n,
                    Budget::Omega => u32::MAX,
                };
                self.wins(&map, beta)
            }
        }
    }

    /// Player 2 wins from the isometric `map` when Player 1 must play ordinals below `beta`.
    pub(crate) fn wins(&mut self, map: &PartialMap, beta: u32) -> bool {
        let beta = beta.min((self.space.len() - map.len()) as u32);
        if beta == 0 {
            return true;
        }
        let key = (map.clone(), beta);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        // surviving the longest continuation implies surviving every shorter one
        let mut result = true;
        'outer: for x in self.space.points() {
            for side in Side::BOTH {
                if self.answer(map, side, x, beta - 1).is_none() {
                    result = false;
                    break 'outer;
                }
            }
        }
        self.memo.insert(key, result);
        result
    }

    /// Least reply to `(side, x)` after which Player 2 still wins at `ordinal`.
    pub(crate) fn answer(&mut self, map: &PartialMap, side: Side, x: Point, ordinal: u32) -> Option<Point> {
        for y in self.space.points() {
            let (l, r) = Move::new(ordinal, side, x).pair_with(y);
            if !pmap::extends(self.space, map, l, r) {
                continue;
            }
            let ext = pmap::insert(map, l, r).expect("isometric extension is injective");
            if self.wins(&ext, ordinal) {
                return Some(y);
            }
        }
        None
    }

    fn extend(&self, map: Option<&PartialMap>, mv: &Move, y: Point) -> Option<PartialMap> {
        let map = map?;
        let (l, r) = mv.pair_with(y);
        if pmap::extends(self.space, map, l, r) {
            pmap::insert(map, l, r)
        } else {
            None
        }
    }

    /// Player-1 tree from a position where Player 1 wins at `beta > 0`.
    /// `map` is `None` once Player 2 has already broken the isometry.
    fn p1_tree(&mut self, map: Option<&PartialMap>, beta: u32, nodes: &mut usize) -> Result<Node> {
        *nodes += 1;
        if *nodes > MAX_TREE_NODES {
            return Err(Error::StrategyTooLarge { limit: MAX_TREE_NODES });
        }
        let mv = match map {
            None => Move::new(0, Side::Left, 0),
            Some(m) => self
                .winning_p1_move(m, beta)
                .ok_or_else(|| Error::Internal("no winning Player-1 move at a losing position".into()))?,
        };
        let mut children = Vec::with_capacity(self.space.len());
        for y in self.space.points() {
            let ext = self.extend(map, &mv, y);
            let node = if mv.ordinal == 0 {
                Node::End
            } else {
                self.p1_tree(ext.as_ref(), mv.ordinal, nodes)?
            };
            children.push(ReplyBranch { reply: y, node });
        }
        Ok(Node::One { mv, children })
    }

    fn winning_p1_move(&mut self, map: &PartialMap, beta: u32) -> Option<Move> {
        for ordinal in 0..beta {
            for x in self.space.points() {
                for side in Side::BOTH {
                    if self.answer(map, side, x, ordinal).is_none() {
                        return Some(Move::new(ordinal, side, x));
                    }
                }
            }
        }
        None
    }

    fn p2_tree(&mut self, map: &PartialMap, beta: u32, nodes: &mut usize) -> Result<Node> {
        *nodes += 1;
        if *nodes > MAX_TREE_NODES {
            return Err(Error::StrategyTooLarge { limit: MAX_TREE_NODES });
        }
        if beta == 0 {
            return Ok(Node::End);
        }
        let mut children = Vec::new();
        for ordinal in 0..beta {
            for x in self.space.points() {
                for side in Side::BOTH {
                    let mv = Move::new(ordinal, side, x);
                    let reply = self
                        .answer(map, side, x, ordinal)
                        .ok_or_else(|| Error::Internal("Player 2 has no answer at a winning position".into()))?;
                    let ext = self.extend(Some(map), &mv, reply).expect("answer extends");
                    let node = self.p2_tree(&ext, ordinal, nodes)?;
                    children.push(MoveBranch { mv, reply, node });
                }
            }
        }
        Ok(Node::Two { children })
    }

    /// Back-and-forth system of every position reachable under Player 2's
    /// least answers from a start map Player 2 wins at every budget.
    pub(crate) fn back_and_forth_system(&mut self, start: &PartialMap) -> Result<BackAndForthSystem> {
        if !self.wins(start, u32::MAX) {
            return Err(Error::Precondition("Player 2 does not survive every budget".into()));
        }
        let mut seen: BTreeSet<PartialMap> = BTreeSet::new();
        let mut queue = VecDeque::from([start.clone()]);
        seen.insert(start.clone());
        while let Some(map) = queue.pop_front() {
            for x in self.space.points() {
                for side in Side::BOTH {
                    let y = self
                        .answer(&map, side, x, u32::MAX)
                        .ok_or_else(|| Error::Internal("no answer inside a winning system".into()))?;
                    let ext = self
                        .extend(Some(&map), &Move::new(0, side, x), y)
                        .expect("answer extends");
                    if seen.insert(ext.clone()) {
                        queue.push_back(ext);
                    }
                }
            }
        }
        Ok(BackAndForthSystem::new(seen.into_iter().collect()))
    }
}

/// First coordinate pair `(i, j)` whose distances differ between `a` and `b`.
pub(crate) fn atomic_witness(space: &MetricSpace, a: &[Point], b: &[Point]) -> Option<[usize; 2]> {
    (0..a.len())
        .flat_map(|i| (i..a.len()).map(move |j| (i, j)))
        .find(|&(i, j)| space.d(a[i], a[j]) != space.d(b[i], b[j]))
        .map(|(i, j)| [i, j])
}

/// Solves the Ehrenfeucht–Fraïssé game on `(a, b)` at budget `alpha`.
///
/// Ties are broken toward the lowest ordinal, then the lowest point, then the
/// left side. At budget omega a winning Player 1 commits to the least finite
/// budget it wins; a winning Player 2 is certified by a back-and-forth system.
pub fn solve_ef_game(space: &MetricSpace, a: &PointTuple, b: &PointTuple, alpha: Budget) -> Result<GameOutcome> {
    check_pair(space, a, b)?;
    let mut solver = EfSolver::new(space);
    let start = solver.start(a, b);
    let cap = ef_exhaustion_budget(space, a);
    let mut nodes = 0;
    let mut strategy = Strategy {
        game: GameKind::Ef,
        player: Player::Two,
        pair: Pair { a: a.clone(), b: b.clone() },
        budget: alpha,
        effective_budget: None,
        schedule: None,
        witness: None,
        body: StrategyBody::Tree(Node::End),
    };
    let p2_wins = match (&start, alpha) {
        (None, _) => false,
        (Some(m), Budget::Finite(n)) => solver.wins(m, n),
        (Some(m), Budget::Omega) => solver.wins(m, cap),
    };
    if p2_wins {
        let map = start.expect("winning start is isometric");
        strategy.body = match alpha {
            Budget::Finite(n) => StrategyBody::Tree(solver.p2_tree(&map, n, &mut nodes)?),
            Budget::Omega => StrategyBody::System(solver.back_and_forth_system(&map)?),
        };
    } else {
        strategy.player = Player::One;
        strategy.witness = atomic_witness(space, a, b);
        let beta = match (alpha, &start) {
            (Budget::Finite(n), _) => n,
            (Budget::Omega, None) => 1,
            (Budget::Omega, Some(m)) => {
                let m = m.clone();
                (1..=cap).find(|&n| !solver.wins(&m, n)).expect("loses by the exhaustion budget")
            }
        };
        if alpha == Budget::Omega {
            strategy.effective_budget = Some(beta);
        }
        if beta > 0 {
            strategy.body = StrategyBody::Tree(solver.p1_tree(start.as_ref(), beta, &mut nodes)?);
        }
    }
    Ok(GameOutcome {
        winner: strategy.player,
        strategy,
        explored: solver.explored(),
    })
}
