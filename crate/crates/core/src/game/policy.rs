use std::cell::RefCell;

use super::ef::EfSolver;
use super::pmap::{self, PartialMap};
use super::strategy::{Strategy, StrategyBody};
use super::Move;
use crate::metric::{MetricSpace, Point};

/// Something that answers Player-1 moves given the play so far.
pub trait Player2Policy {
    /// Reply to `mv` after `history`, or `None` if the policy has no answer.
    fn reply(&self, space: &MetricSpace, history: &[(Move, Point)], mv: &Move) -> Option<Point>;
}

fn current_map(a: &[Point], b: &[Point], history: &[(Move, Point)]) -> Option<PartialMap> {
    let mut map = pmap::from_tuples(a, b)?;
    for (m, y) in history {
        let (l, r) = m.pair_with(*y);
        map = pmap::insert(&map, l, r)?;
    }
    Some(map)
}

impl Player2Policy for Strategy {
    fn reply(&self, space: &MetricSpace, history: &[(Move, Point)], mv: &Move) -> Option<Point> {
        match &self.body {
            StrategyBody::Tree(root) => {
                let mut node = root;
                for (m, _) in history {
                    node = &node.branch(m)?.node;
                }
                node.branch(mv).map(|b| b.reply)
            }
            StrategyBody::System(system) => {
                let map = current_map(&self.pair.a, &self.pair.b, history)?;
                system.reply(space, &map, mv.side, mv.point)
            }
        }
    }
}

/// Answers through a fixed bijection: `perm[x]` to left moves and the
/// preimage to right moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsometryPolicy {
    pub perm: Vec<Point>,
}

impl Player2Policy for IsometryPolicy {
    fn reply(&self, _space: &MetricSpace, _history: &[(Move, Point)], mv: &Move) -> Option<Point> {
        match mv.side {
            super::Side::Left => self.perm.get(mv.point).copied(),
            super::Side::Right => self.perm.iter().position(|&y| y == mv.point),
        }
    }
}

/// Answers Ehrenfeucht–Fraïssé moves by solving the remaining game on demand.
pub struct SolverPolicy<'a> {
    a: Vec<Point>,
    b: Vec<Point>,
    solver: RefCell<EfSolver<'a>>,
}

impl<'a> SolverPolicy<'a> {
    pub fn new(space: &'a MetricSpace, a: &[Point], b: &[Point]) -> Self {
        SolverPolicy {
            a: a.to_vec(),
            b: b.to_vec(),
            solver: RefCell::new(EfSolver::new(space)),
        }
    }
}

impl Player2Policy for SolverPolicy<'_> {
    fn reply(&self, space: &MetricSpace, history: &[(Move, Point)], mv: &Move) -> Option<Point> {
        let map = current_map(&self.a, &self.b, history)?;
        if !pmap::is_isometric(space, &map) {
            return None;
        }
        self.solver.borrow_mut().answer(&map, mv.side, mv.point, mv.ordinal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{solve_ef_game, Side};
    use crate::metric::fixtures::path3;
    use crate::rank::Budget;
    use crate::tuple::PointTuple;

    #[test]
    fn policies_agree_on_the_path_swap() {
        let p = path3();
        let a = PointTuple::from(vec![0]);
        let b = PointTuple::from(vec![2]);
        let system = solve_ef_game(&p, &a, &b, Budget::Omega).unwrap().strategy;
        let tree = solve_ef_game(&p, &a, &b, Budget::Finite(2)).unwrap().strategy;
        let iso = IsometryPolicy { perm: vec![2, 1, 0] };
        let solver = SolverPolicy::new(&p, &a, &b);
        for x in p.points() {
            for side in Side::BOTH {
                let mv = Move::new(1, side, x);
                let want = Some(2 - x);
                assert_eq!(system.reply(&p, &[], &mv), want);
                assert_eq!(tree.reply(&p, &[], &mv), want);
                assert_eq!(iso.reply(&p, &[], &mv), want);
                assert_eq!(solver.reply(&p, &[], &mv), want);
            }
        }
        let hist = [(Move::new(1, Side::Left, 1), 1)];
        assert_eq!(tree.reply(&p, &hist, &Move::new(0, Side::Right, 0)), Some(2));
    }
}
