//! The back-and-forth hierarchy and Scott ranks of tuples and spaces.

use std::collections::{HashMap, HashSet};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::pmap::{self, PartialMap};
use crate::game::{atomic_witness, check_pair, GameKind, Move, Node, Pair, Player, ReplyBranch, Side, Strategy, StrategyBody, MAX_TREE_NODES};
use crate::metric::{MetricSpace, Point};
use crate::rank::{Budget, RankValue};
use crate::tuple::PointTuple;

/// Whether `a_i -> b_i` preserves every distance exactly.
pub fn atomic_related(space: &MetricSpace, a: &PointTuple, b: &PointTuple) -> Result<bool> {
    check_pair(space, a, b)?;
    Ok((0..a.len()).all(|i| (0..i).all(|j| space.class(a[i], a[j]) == space.class(b[i], b[j]))))
}

/// Memoized rank recursion on partial isometries.
///
/// An atomically related pair has rank `1 + min(F, B)`, where `F` is the
/// least over new left points of the best rank Player 2 reaches by
/// answering, and `B` the same for right points. A map defined everywhere is
/// a bijective isometry and has rank `∞`.
pub struct RankSolver<'a> {
    space: &'a MetricSpace,
    memo: HashMap<PartialMap, RankValue>,
}

impl<'a> RankSolver<'a> {
    pub fn new(space: &'a MetricSpace) -> Self {
        RankSolver { space, memo: HashMap::new() }
    }

    pub fn rank(&mut self, a: &[Point], b: &[Point]) -> Result<RankValue> {
        check_pair(self.space, a, b)?;
        Ok(match self.start(a, b) {
            Some(map) => self.rank_map(&map),
            None => RankValue::Finite(0),
        })
    }

    fn start(&self, a: &[Point], b: &[Point]) -> Option<PartialMap> {
        pmap::from_tuples(a, b).filter(|m| pmap::is_isometric(self.space, m))
    }

    /// Rank of `map ∪ {x -> y}`, 0 when that breaks the isometry.
    fn extension_rank(&mut self, map: &PartialMap, x: Point, y: Point) -> RankValue {
        if !pmap::extends(self.space, map, x, y) {
            return RankValue::Finite(0);
        }
        match pmap::insert(map, x, y) {
            Some(ext) => self.rank_map(&ext),
            None => RankValue::Finite(0),
        }
    }

    fn rank_map(&mut self, map: &PartialMap) -> RankValue {
        let n = self.space.len();
        if map.len() == n {
            return RankValue::Infinity;
        }
        if let Some(&r) = self.memo.get(map) {
            return r;
        }
        let mut best = RankValue::Infinity;
        for side in Side::BOTH {
            for x in self.space.points() {
                let free = match side {
                    Side::Left => pmap::image(map, x).is_none(),
                    Side::Right => pmap::preimage(map, x).is_none(),
                };
                if !free {
                    continue;
                }
                let mut reach = RankValue::Finite(0);
                for y in self.space.points() {
                    let (l, r) = Move::new(0, side, x).pair_with(y);
                    reach = reach.max(self.extension_rank(map, l, r));
                    if reach >= best {
                        break;
                    }
                }
                best = best.min(reach);
            }
        }
        let r = best.succ();
        self.memo.insert(map.clone(), r);
        r
    }

    /// Least-ordinal Player-1 move winning from `map` below `beta`.
    fn winning_move(&mut self, map: &PartialMap, beta: u32) -> Option<Move> {
        for ordinal in 0..beta {
            for x in self.space.points() {
                for side in Side::BOTH {
                    let worst = self
                        .space
                        .points()
                        .map(|y| {
                            let (l, r) = Move::new(ordinal, side, x).pair_with(y);
                            self.extension_rank(map, l, r)
                        })
                        .max()
                        .unwrap_or(RankValue::Finite(0));
                    if worst <= RankValue::Finite(ordinal) {
                        return Some(Move::new(ordinal, side, x));
                    }
                }
            }
        }
        None
    }

    fn p1_tree(&mut self, map: Option<&PartialMap>, beta: u32, nodes: &mut usize) -> Result<Node> {
        *nodes += 1;
        if *nodes > MAX_TREE_NODES {
            return Err(Error::StrategyTooLarge { limit: MAX_TREE_NODES });
        }
        let mv = match map {
            None => Move::new(0, Side::Left, 0),
            Some(m) => self
                .winning_move(m, beta)
                .ok_or_else(|| Error::Internal("rank exceeds the budget of a distinguishing strategy".into()))?,
        };
        let mut children = Vec::with_capacity(self.space.len());
        for y in self.space.points() {
            let (l, r) = mv.pair_with(y);
            let ext = map
                .filter(|m| pmap::extends(self.space, m, l, r))
                .and_then(|m| pmap::insert(m, l, r));
            let node = if mv.ordinal == 0 {
                Node::End
            } else {
                self.p1_tree(ext.as_ref(), mv.ordinal, nodes)?
            };
            children.push(ReplyBranch { reply: y, node });
        }
        Ok(Node::One { mv, children })
    }
}

/// Rank of a pair: the least level at which the tuples separate, or `∞`.
pub fn scott_rank_pair(space: &MetricSpace, a: &PointTuple, b: &PointTuple) -> Result<RankValue> {
    RankSolver::new(space).rank(a, b)
}

/// A Player-1 strategy winning the Ehrenfeucht–Fraïssé game at budget `SR(a, b)`.
///
/// Rank 0 pairs get an empty tree and the coordinates of a mismatched distance.
pub fn distinguishing_strategy(space: &MetricSpace, a: &PointTuple, b: &PointTuple) -> Result<Strategy> {
    let mut solver = RankSolver::new(space);
    let n = match solver.rank(a, b)? {
        RankValue::Finite(n) => n,
        r => return Err(Error::Precondition(format!("pair has rank {r}; Player 1 cannot win"))),
    };
    let body = if n == 0 {
        Node::End
    } else {
        let start = solver.start(a, b);
        solver.p1_tree(start.as_ref(), n, &mut 0)?
    };
    Ok(Strategy {
        game: GameKind::Ef,
        player: Player::One,
        pair: Pair { a: a.clone(), b: b.clone() },
        budget: Budget::Finite(n),
        effective_budget: None,
        schedule: None,
        witness: atomic_witness(space, a, b),
        body: StrategyBody::Tree(body),
    })
}

struct Level {
    tuples: Vec<Vec<Point>>,
    index: HashMap<Vec<Point>, usize>,
    ranks: HashMap<(usize, usize), RankValue>,
}

impl Level {
    fn new(space: &MetricSpace, p: usize) -> Self {
        let tuples: Vec<Vec<Point>> = space.points().permutations(p).collect();
        let index = tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Level { tuples, index, ranks: HashMap::new() }
    }
}

/// The relations `~_n` on tuples of distinct points, for every length up to `p_max`.
///
/// Computed as a fixed point: level 0 is exact distance agreement and each
/// pass keeps the pairs whose one-point extensions are still related at the
/// previous level. Extensions past the longest tracked length are ranked
/// on demand. Pairs with repeated points are answered by collapsing
/// repeats, which `~_0` forces to line up.
pub struct BackAndForthTable {
    size: usize,
    p_max: usize,
    levels: Vec<Level>,
    stabilization: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEntry {
    pub a: PointTuple,
    pub b: PointTuple,
    pub rank: RankValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableExport {
    pub p: usize,
    pub pairs: Vec<RankEntry>,
    pub stabilization: u32,
}

impl BackAndForthTable {
    pub fn compute(space: &MetricSpace, p_max: usize) -> Result<Self> {
        if p_max == 0 {
            return Err(Error::Precondition("tuple length bound must be at least 1".into()));
        }
        let depth = p_max.min(space.len());
        // levels[p] holds tuples of length p; index 0 is a placeholder
        let levels: Vec<Level> = (0..=depth).map(|p| Level::new(space, p)).collect();
        let atomic = |t: &[Point], u: &[Point]| {
            (0..t.len()).all(|i| (0..i).all(|j| space.class(t[i], t[j]) == space.class(u[i], u[j])))
        };
        let mut related: Vec<Vec<(usize, usize)>> = levels
            .iter()
            .map(|lv| {
                let k = lv.tuples.len();
                (0..k)
                    .flat_map(|i| (0..k).map(move |j| (i, j)))
                    .filter(|&(i, j)| atomic(&lv.tuples[i], &lv.tuples[j]))
                    .collect()
            })
            .collect();
        related[0].clear();

        let mut frontier: HashMap<(usize, usize, Point, Point), RankValue> = HashMap::new();
        let mut frontier_top = 0;
        if depth < space.len() {
            let mut solver = RankSolver::new(space);
            let top = &levels[depth];
            for &(i, j) in &related[depth] {
                let (t, u) = (&top.tuples[i], &top.tuples[j]);
                for x in space.points().filter(|x| !t.contains(x)) {
                    for y in space.points().filter(|y| !u.contains(y)) {
                        let r = solver.rank(&[t.as_slice(), &[x]].concat(), &[u.as_slice(), &[y]].concat())?;
                        if let RankValue::Finite(k) = r {
                            frontier_top = frontier_top.max(k);
                        }
                        frontier.insert((i, j, x, y), r);
                    }
                }
            }
        }

        let mut levels = levels;
        let mut n = 0u32;
        loop {
            let sets: Vec<HashSet<(usize, usize)>> =
                related.iter().map(|r| r.iter().copied().collect()).collect();
            let holds = |p: usize, i: usize, j: usize, x: Point, y: Point| -> bool {
                if p < depth {
                    let (t, u) = (&levels[p].tuples[i], &levels[p].tuples[j]);
                    let next = &levels[p + 1].index;
                    let ti = next[&[t.as_slice(), &[x]].concat()];
                    let uj = next[&[u.as_slice(), &[y]].concat()];
                    sets[p + 1].contains(&(ti, uj))
                } else {
                    frontier.get(&(i, j, x, y)).is_some_and(|&r| r > RankValue::Finite(n))
                }
            };
            let survives = |p: usize, i: usize, j: usize| -> bool {
                let (t, u) = (&levels[p].tuples[i], &levels[p].tuples[j]);
                let forth = space
                    .points()
                    .filter(|x| !t.contains(x))
                    .all(|x| space.points().filter(|y| !u.contains(y)).any(|y| holds(p, i, j, x, y)));
                let back = space
                    .points()
                    .filter(|y| !u.contains(y))
                    .all(|y| space.points().filter(|x| !t.contains(x)).any(|x| holds(p, i, j, x, y)));
                forth && back
            };
            let next: Vec<Vec<(usize, usize)>> = (0..=depth)
                .map(|p| related[p].par_iter().copied().filter(|&(i, j)| survives(p, i, j)).collect())
                .collect();
            let changed = next.iter().zip(&related).any(|(a, b)| a.len() != b.len());
            if !changed && n >= frontier_top {
                break;
            }
            for p in 1..=depth {
                let kept: HashSet<_> = next[p].iter().copied().collect();
                for &pair in &related[p] {
                    if !kept.contains(&pair) {
                        levels[p].ranks.insert(pair, RankValue::Finite(n + 1));
                    }
                }
            }
            related = next;
            n += 1;
        }
        for p in 1..=depth {
            for &pair in &related[p] {
                levels[p].ranks.insert(pair, RankValue::Infinity);
            }
        }
        Ok(BackAndForthTable { size: space.len(), p_max: depth, levels, stabilization: n })
    }

    /// Longest tracked tuple length.
    pub fn p_max(&self) -> usize {
        self.p_max
    }

    /// Least level after which no tracked relation changes.
    pub fn stabilization_level(&self) -> u32 {
        self.stabilization
    }

    /// Rank of a pair whose collapsed length is tracked.
    pub fn rank(&self, a: &[Point], b: &[Point]) -> Result<RankValue> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
        }
        if let Some(&index) = a.iter().chain(b).find(|&&p| p >= self.size) {
            return Err(Error::PointOutOfRange { index, size: self.size });
        }
        let Some(map) = pmap::from_tuples(a, b) else {
            return Ok(RankValue::Finite(0));
        };
        // collapse repeats, keeping first occurrences in order
        let mut t = Vec::new();
        let mut u = Vec::new();
        for (&x, &y) in a.iter().zip(b) {
            if !t.contains(&x) {
                t.push(x);
                u.push(y);
            }
        }
        debug_assert_eq!(t.len(), map.len());
        if t.is_empty() {
            return Ok(RankValue::Infinity);
        }
        let level = self
            .levels
            .get(t.len())
            .filter(|_| t.len() <= self.p_max)
            .ok_or_else(|| Error::Precondition(format!("tuple length {} is not tracked", t.len())))?;
        let (i, j) = (level.index[&t], level.index[&u]);
        Ok(level.ranks.get(&(i, j)).copied().unwrap_or(RankValue::Finite(0)))
    }

    /// Whether `a ~_n b`.
    pub fn related_at(&self, n: u32, a: &[Point], b: &[Point]) -> Result<bool> {
        Ok(self.rank(a, b)? > RankValue::Finite(n))
    }

    /// Every pair of distinct-point tuples of one length, in lexicographic order.
    pub fn entries(&self, p: usize) -> Vec<RankEntry> {
        let Some(level) = self.levels.get(p).filter(|_| p >= 1) else {
            return Vec::new();
        };
        let k = level.tuples.len();
        (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| RankEntry {
                a: PointTuple::from(level.tuples[i].clone()),
                b: PointTuple::from(level.tuples[j].clone()),
                rank: level.ranks.get(&(i, j)).copied().unwrap_or(RankValue::Finite(0)),
            })
            .collect()
    }

    pub fn export(&self) -> TableExport {
        TableExport {
            p: self.p_max,
            pairs: (1..=self.p_max).flat_map(|p| self.entries(p)).collect(),
            stabilization: self.stabilization,
        }
    }
}

pub fn compute_bf_table(space: &MetricSpace, p_max: usize) -> Result<BackAndForthTable> {
    BackAndForthTable::compute(space, p_max)
}

/// Rank of a whole space together with the tuple realizing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceRank {
    pub rank: RankValue,
    /// A tuple `a` of largest `SR(a)`.
    pub tuple: PointTuple,
    pub tuple_rank: u32,
    /// A pair with `SR(a, b) = SR(a)`, absent when every partner of `a` has rank `∞`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<RankEntry>,
}

/// `sup (SR(a) + 1)` over tuples of distinct points, where `SR(a)` is the
/// largest finite `SR(a, b)` (0 if there is none).
pub fn scott_rank_space(space: &MetricSpace) -> Result<SpaceRank> {
    let mut best = SpaceRank {
        rank: RankValue::Finite(1),
        tuple: PointTuple::new(),
        tuple_rank: 0,
        witness: None,
    };
    if space.is_empty() {
        return Ok(best);
    }
    let table = BackAndForthTable::compute(space, space.len())?;
    for p in 1..=space.len() {
        let level = &table.levels[p];
        let k = level.tuples.len();
        for i in 0..k {
            let top = (0..k)
                .filter_map(|j| match level.ranks.get(&(i, j)).copied().unwrap_or(RankValue::Finite(0)) {
                    RankValue::Finite(r) => Some((r, j)),
                    _ => None,
                })
                .max_by_key(|&(r, j)| (r, std::cmp::Reverse(j)));
            if let Some((r, j)) = top {
                if r > best.tuple_rank {
                    best = SpaceRank {
                        rank: RankValue::Finite(r + 1),
                        tuple: PointTuple::from(level.tuples[i].clone()),
                        tuple_rank: r,
                        witness: Some(RankEntry {
                            a: PointTuple::from(level.tuples[i].clone()),
                            b: PointTuple::from(level.tuples[j].clone()),
                            rank: RankValue::Finite(r),
                        }),
                    };
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{exhaustive_check, solve_ef_game};
    use crate::metric::fixtures::*;

    fn t(v: &[Point]) -> PointTuple {
        PointTuple::from(v.to_vec())
    }

    #[test]
    fn atomic_examples() {
        let p = path3();
        assert!(atomic_related(&p, &t(&[0]), &t(&[2])).unwrap());
        assert!(atomic_related(&p, &t(&[0, 1]), &t(&[2, 1])).unwrap());
        assert!(!atomic_related(&p, &t(&[0, 2]), &t(&[0, 1])).unwrap());
        assert!(atomic_related(&p, &t(&[0]), &t(&[0, 1])).is_err());
    }

    #[test]
    fn path3_ranks() {
        let p = path3();
        assert_eq!(scott_rank_pair(&p, &t(&[0]), &t(&[1])).unwrap(), RankValue::Finite(1));
        assert_eq!(scott_rank_pair(&p, &t(&[0]), &t(&[2])).unwrap(), RankValue::Infinity);
        assert_eq!(scott_rank_pair(&p, &t(&[0, 2]), &t(&[2, 0])).unwrap(), RankValue::Infinity);
        assert_eq!(scott_rank_pair(&p, &t(&[1, 1]), &t(&[1, 1])).unwrap(), RankValue::Infinity);
        assert_eq!(scott_rank_pair(&p, &t(&[0, 0]), &t(&[0, 1])).unwrap(), RankValue::Finite(0));
        let table = compute_bf_table(&p, 2).unwrap();
        assert_eq!(table.rank(&[0], &[1]).unwrap(), RankValue::Finite(1));
        assert_eq!(table.rank(&[0], &[2]).unwrap(), RankValue::Infinity);
        assert_eq!(table.rank(&[0, 0], &[2, 2]).unwrap(), RankValue::Infinity);
        assert_eq!(table.stabilization_level(), 1);
        let sr = scott_rank_space(&p).unwrap();
        assert_eq!(sr.rank, RankValue::Finite(2));
        assert_eq!(sr.witness.unwrap().rank, RankValue::Finite(1));
    }

    #[test]
    fn square_singletons_are_infinite() {
        let s = square();
        let table = compute_bf_table(&s, 1).unwrap();
        for x in s.points() {
            for y in s.points() {
                assert_eq!(table.rank(&[x], &[y]).unwrap(), RankValue::Infinity);
            }
        }
    }

    #[test]
    fn single_point_space() {
        let s = single();
        assert_eq!(scott_rank_space(&s).unwrap().rank, RankValue::Finite(1));
    }

    #[test]
    fn frontier_matches_full_table() {
        let l = line();
        let full = compute_bf_table(&l, 4).unwrap();
        for p_max in 1..4 {
            let part = compute_bf_table(&l, p_max).unwrap();
            for e in part.export().pairs {
                assert_eq!(full.rank(&e.a, &e.b).unwrap(), e.rank);
            }
        }
    }

    #[test]
    fn distinguishing_examples() {
        let p = path3();
        let s = distinguishing_strategy(&p, &t(&[0]), &t(&[1])).unwrap();
        match s.tree().unwrap() {
            Node::One { mv, .. } => assert_eq!(*mv, Move::new(0, Side::Left, 2)),
            other => panic!("{other:?}"),
        }
        assert!(exhaustive_check(&p, &s).unwrap().sound());
        let z = distinguishing_strategy(&p, &t(&[0, 2]), &t(&[0, 1])).unwrap();
        assert_eq!((z.tree(), z.witness), (Some(&Node::End), Some([0, 1])));
        assert!(distinguishing_strategy(&p, &t(&[0]), &t(&[2])).is_err());

        let l = line();
        let s = distinguishing_strategy(&l, &t(&[0]), &t(&[3])).unwrap();
        assert_eq!(s.budget, Budget::Finite(1));
        assert!(exhaustive_check(&l, &s).unwrap().sound());
    }

    #[test]
    fn ranks_match_game_outcomes() {
        let s = line();
        let mut solver = RankSolver::new(&s);
        for a in s.points() {
            for b in s.points() {
                let r = solver.rank(&[a], &[b]).unwrap();
                for n in 0..4 {
                    let o = solve_ef_game(&s, &t(&[a]), &t(&[b]), Budget::Finite(n)).unwrap();
                    assert_eq!(r > RankValue::Finite(n), o.winner == Player::Two);
                }
            }
        }
    }
}
