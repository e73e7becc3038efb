//! Compact approximation systems: self-maps `φ_n : A_n → A_n` of nested nets
//! that approximately preserve distances and the base pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{check_pair, GameKind, Move, Player, Player2Policy, Side, Strategy};
use crate::metric::{min_distance_gap, MetricSpace, Point};
use crate::nets::NetFamily;
use crate::rank::Budget;
use crate::rational::Rational;
use crate::tuple::PointTuple;

/// Maps `φ_0, ..., φ_depth`, each listed as `(z, φ_n(z))` over `A_n` in index order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KSystem {
    pub depth: usize,
    pub a: PointTuple,
    pub b: PointTuple,
    pub phi: Vec<Vec<(Point, Point)>>,
    pub nets: NetFamily,
}

impl KSystem {
    pub fn image(&self, n: usize, z: Point) -> Option<Point> {
        let level = self.phi.get(n)?;
        level.binary_search_by_key(&z, |&(x, _)| x).ok().map(|i| level[i].1)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clause {
    #[serde(rename = "i")]
    Range,
    #[serde(rename = "ii")]
    Anchors,
    #[serde(rename = "iii")]
    Distances,
    #[serde(rename = "iv")]
    Covering,
}

/// One failed clause. `value` must be below `bound` for the clause to hold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemViolation {
    pub clause: Clause,
    pub levels: Vec<usize>,
    pub points: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<Rational>,
}

fn radius(n: usize) -> Rational {
    Rational::pow2_neg(n as u32)
}

fn check_shape<'n>(space: &MetricSpace, nets: &'n NetFamily, system: &KSystem) -> Result<Vec<&'n [Point]>> {
    check_pair(space, &system.a, &system.b)?;
    if system.phi.len() != system.depth + 1 {
        return Err(Error::ShapeMismatch(format!(
            "depth {} needs {} maps, found {}",
            system.depth,
            system.depth + 1,
            system.phi.len()
        )));
    }
    let mut levels = Vec::with_capacity(system.phi.len());
    for (n, map) in system.phi.iter().enumerate() {
        let net = nets.require_level(n)?;
        if system.nets.level(n) != Some(net) {
            return Err(Error::ShapeMismatch(format!("system was built over a different A_{n}")));
        }
        if map.len() != net.len() || map.iter().zip(net).any(|(&(z, _), &w)| z != w) {
            return Err(Error::ShapeMismatch(format!("φ_{n} is not defined exactly on A_{n}")));
        }
        for &(_, y) in map {
            space.check_point(y)?;
        }
        levels.push(net);
    }
    Ok(levels)
}

/// Every violated clause of `system`; empty iff it is a `depth`-system.
pub fn verify_k_system(space: &MetricSpace, nets: &NetFamily, system: &KSystem) -> Result<Vec<SystemViolation>> {
    let levels = check_shape(space, nets, system)?;
    let (a, b) = (&system.a, &system.b);
    let mut out = Vec::new();
    for (n, map) in system.phi.iter().enumerate() {
        for &(z, w) in map {
            if !levels[n].contains(&w) {
                out.push(SystemViolation { clause: Clause::Range, levels: vec![n], points: vec![z, w], value: None, bound: None });
            }
        }
        for (i, (&ai, &bi)) in a.iter().zip(b.iter()).enumerate() {
            for &(z, w) in map {
                let value = space.d(ai, z).abs_diff(&space.d(bi, w));
                if value >= radius(n) {
                    out.push(SystemViolation {
                        clause: Clause::Anchors,
                        levels: vec![n],
                        points: vec![i, z],
                        value: Some(value),
                        bound: Some(radius(n)),
                    });
                }
            }
        }
    }
    for n in 0..system.phi.len() {
        for m in 0..=n {
            let bound = radius(m) + radius(n);
            for &(y, fy) in &system.phi[m] {
                for &(z, fz) in &system.phi[n] {
                    let value = space.d(y, z).abs_diff(&space.d(fy, fz));
                    if value >= bound {
                        out.push(SystemViolation {
                            clause: Clause::Distances,
                            levels: vec![m, n],
                            points: vec![y, z],
                            value: Some(value),
                            bound: Some(bound),
                        });
                    }
                }
            }
        }
    }
    for (n, map) in system.phi.iter().enumerate() {
        let bound = Rational::pow2_neg_pred(n as u32);
        for x in space.points() {
            let value = map.iter().map(|&(_, w)| space.d(x, w)).min().expect("nets are nonempty");
            if value >= bound {
                out.push(SystemViolation { clause: Clause::Covering, levels: vec![n], points: vec![x], value: Some(value), bound: Some(bound) });
            }
        }
    }
    Ok(out)
}

/// Result of searching the tree of k-systems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum SearchOutcome {
    Found {
        system: KSystem,
        nodes: u64,
    },
    /// No k-system exists; `max_depth_reached` is the deepest level of any
    /// system found, absent if not even a 0-system exists.
    Exhausted {
        k: usize,
        max_depth_reached: Option<usize>,
        nodes: u64,
    },
}

impl SearchOutcome {
    pub fn system(&self) -> Option<&KSystem> {
        match self {
            SearchOutcome::Found { system, .. } => Some(system),
            SearchOutcome::Exhausted { .. } => None,
        }
    }
}

/// Node budget of a single search.
pub const MAX_SEARCH_NODES: u64 = 200_000_000;

struct Search<'a> {
    space: &'a MetricSpace,
    a: &'a [Point],
    b: &'a [Point],
    levels: Vec<&'a [Point]>,
    phi: Vec<Vec<Point>>,
    nodes: u64,
    deepest: Option<usize>,
}

impl Search<'_> {
    fn admissible(&self, n: usize, idx: usize, w: Point) -> bool {
        let s = self.space;
        let z = self.levels[n][idx];
        let rn = radius(n);
        if !self.a.iter().zip(self.b).all(|(&ai, &bi)| s.d(ai, z).abs_diff(&s.d(bi, w)) < rn) {
            return false;
        }
        for m in 0..=n {
            let bound = radius(m) + rn;
            let assigned = if m == n { idx } else { self.levels[m].len() };
            for (j, &y) in self.levels[m][..assigned].iter().enumerate() {
                if s.d(y, z).abs_diff(&s.d(self.phi[m][j], w)) >= bound {
                    return false;
                }
            }
        }
        true
    }

    fn covering(&self, n: usize) -> bool {
        let r = Rational::pow2_neg_pred(n as u32);
        self.space
            .points()
            .all(|x| self.phi[n].iter().any(|&w| self.space.d(x, w) < r))
    }

    /// Fills `φ_n` from index `idx` on; true once a full k-system is built.
    fn fill(&mut self, n: usize, idx: usize, k: usize) -> Result<bool> {
        if idx == self.levels[n].len() {
            if !self.covering(n) {
                return Ok(false);
            }
            self.deepest = self.deepest.max(Some(n));
            if n == k {
                return Ok(true);
            }
            self.phi.push(vec![0; self.levels[n + 1].len()]);
            if self.fill(n + 1, 0, k)? {
                return Ok(true);
            }
            self.phi.pop();
            return Ok(false);
        }
        for wi in 0..self.levels[n].len() {
            let w = self.levels[n][wi];
            if !self.admissible(n, idx, w) {
                continue;
            }
            self.nodes += 1;
            if self.nodes > MAX_SEARCH_NODES {
                return Err(Error::CapExceeded { what: "search nodes", value: self.nodes as usize, cap: MAX_SEARCH_NODES as usize });
            }
            self.phi[n][idx] = w;
            if self.fill(n, idx + 1, k)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Depth-first search for the lexicographically least k-system.
///
/// Maps are filled level by level, net points in index order, candidate
/// images in index order, pruning on clauses (ii) and (iii) as each image is
/// placed and on clause (iv) as each level closes.
pub fn search_k_system(
    space: &MetricSpace,
    a: &PointTuple,
    b: &PointTuple,
    nets: &NetFamily,
    k: usize,
) -> Result<SearchOutcome> {
    check_pair(space, a, b)?;
    let levels = (0..=k).map(|n| nets.require_level(n)).collect::<Result<Vec<_>>>()?;
    let mut search = Search {
        space,
        a,
        b,
        phi: vec![vec![0; levels[0].len()]],
        levels,
        nodes: 0,
        deepest: None,
    };
    if search.fill(0, 0, k)? {
        let phi = search
            .phi
            .iter()
            .zip(&search.levels)
            .map(|(images, net)| net.iter().copied().zip(images.iter().copied()).collect())
            .collect();
        Ok(SearchOutcome::Found {
            system: KSystem { depth: k, a: a.clone(), b: b.clone(), phi, nets: nets.clone() },
            nodes: search.nodes,
        })
    } else {
        Ok(SearchOutcome::Exhausted { k, max_depth_reached: search.deepest, nodes: search.nodes })
    }
}

fn require_ef_player2(strategy: &Strategy, rounds: usize) -> Result<()> {
    if strategy.game != GameKind::Ef || strategy.player != Player::Two {
        return Err(Error::Precondition("need a Player-2 Ehrenfeucht–Fraïssé strategy".into()));
    }
    match strategy.budget {
        Budget::Finite(n) if (n as usize) < rounds => Err(Error::Precondition(format!(
            "strategy budget {n} is below the {rounds} rounds required"
        ))),
        _ => Ok(()),
    }
}

/// Builds a k-system by playing the net `A_k` against Player 2's strategy.
///
/// Player 1 names the points of `A_k` in index order on the left with
/// ordinals `L, L-1, ..., 1`, and each answer is snapped to the
/// lowest-index point of `A_n` within `2^-n`. If an image family fails to
/// cover, the uncovered point is played on the right with ordinal 0, and
/// the strategy's answer is shown to break the isometry.
pub fn strategy_to_k_system(space: &MetricSpace, nets: &NetFamily, strategy: &Strategy, k: usize) -> Result<KSystem> {
    let net = nets.require_level(k)?;
    require_ef_player2(strategy, net.len() + 1)?;
    strategy_to_k_system_with(space, &strategy.pair.a, &strategy.pair.b, nets, strategy, k)
}

/// As [`strategy_to_k_system`], for any Player-2 policy.
pub fn strategy_to_k_system_with(
    space: &MetricSpace,
    a: &PointTuple,
    b: &PointTuple,
    nets: &NetFamily,
    policy: &impl Player2Policy,
    k: usize,
) -> Result<KSystem> {
    check_pair(space, a, b)?;
    let c = nets.require_level(k)?.to_vec();
    let l = c.len();
    let mut history: Vec<(Move, Point)> = Vec::with_capacity(l + 1);
    for (i, &ci) in c.iter().enumerate() {
        let mv = Move::new((l - i) as u32, Side::Left, ci);
        let y = policy
            .reply(space, &history, &mv)
            .ok_or_else(|| Error::StrategyLoses(format!("no answer to {mv:?}")))?;
        space.check_point(y)?;
        history.push((mv, y));
    }
    let left: Vec<Point> = a.iter().copied().chain(c.iter().copied()).collect();
    let right: Vec<Point> = b.iter().copied().chain(history.iter().map(|h| h.1)).collect();
    if !crate::game::partial_isometry(space, &left, &right) {
        return Err(Error::StrategyLoses("answers to the net enumeration break the isometry".into()));
    }
    let d: Vec<Point> = history.iter().map(|h| h.1).collect();
    let mut phi = Vec::with_capacity(k + 1);
    for n in 0..=k {
        let an = nets.require_level(n)?;
        let r = radius(n);
        let mut map = Vec::with_capacity(an.len());
        for &z in an {
            let i = c.iter().position(|&x| x == z).ok_or_else(|| Error::Precondition(format!("A_{n} is not contained in A_{k}")))?;
            let snap = an
                .iter()
                .copied()
                .find(|&w| space.d(d[i], w) < r)
                .ok_or_else(|| Error::Precondition(format!("A_{n} does not cover at radius 2^-{n}")))?;
            map.push((z, snap));
        }
        let cover = Rational::pow2_neg_pred(n as u32);
        if let Some(y) = space.points().find(|&x| map.iter().all(|&(_, w)| space.d(x, w) >= cover)) {
            let mv = Move::new(0, Side::Right, y);
            let reply = policy
                .reply(space, &history, &mv)
                .ok_or_else(|| Error::StrategyLoses(format!("no answer to the extra round {mv:?}")))?;
            let mut l2 = left.clone();
            l2.push(reply);
            let mut r2 = right.clone();
            r2.push(y);
            if crate::game::partial_isometry(space, &l2, &r2) {
                return Err(Error::Internal(format!("φ_{n} fails to cover {y} yet the extra round is answered")));
            }
            return Err(Error::StrategyLoses(format!(
                "φ_{n} misses {y}; the extra round (0, {y}) on the right is answered with {reply}, breaking the isometry"
            )));
        }
        phi.push(map);
    }
    Ok(KSystem { depth: k, a: a.clone(), b: b.clone(), phi, nets: nets.clone() })
}

/// A self-map of the space with exhaustively checked properties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsometryMap {
    pub perm: Vec<Point>,
    pub distance_preserving: bool,
    pub bijective: bool,
    pub carries_pair: bool,
}

impl IsometryMap {
    pub fn certify(space: &MetricSpace, perm: Vec<Point>, a: &[Point], b: &[Point]) -> Self {
        let n = space.len();
        let bijective = perm.len() == n && {
            let mut seen = vec![false; n];
            perm.iter().all(|&y| y < n && !std::mem::replace(&mut seen[y], true))
        };
        let distance_preserving = perm.len() == n
            && perm.iter().all(|&y| y < n)
            && (0..n).all(|x| (0..x).all(|y| space.d(x, y) == space.d(perm[x], perm[y])));
        let carries_pair = a.len() == b.len() && a.iter().zip(b).all(|(&x, &y)| perm.get(x) == Some(&y));
        IsometryMap { perm, distance_preserving, bijective, carries_pair }
    }

    pub fn is_certified(&self) -> bool {
        self.distance_preserving && self.bijective && self.carries_pair
    }
}

/// Least depth `n` at or past the terminal depth with `2^-(n-1) < gap / 2`.
pub fn snap_depth(space: &MetricSpace, nets: &NetFamily) -> usize {
    let half = match min_distance_gap(space) {
        Ok(g) => g.min_gap / Rational::from_integer(2),
        Err(_) => return nets.terminal_depth,
    };
    (nets.terminal_depth..)
        .find(|&n| Rational::pow2_neg_pred(n as u32) < half)
        .expect("radii shrink below any positive gap")
}

/// Reads the autoisometry off a system reaching the snap depth.
///
/// Past that depth consecutive images are closer than the smallest distance
/// gap, so `φ_n` no longer changes and equals the limit map.
pub fn system_to_isometry(space: &MetricSpace, nets: &NetFamily, system: &KSystem) -> Result<IsometryMap> {
    let n = snap_depth(space, nets);
    if system.depth < n {
        return Err(Error::Precondition(format!("system depth {} is below the snap depth {n}", system.depth)));
    }
    let violations = verify_k_system(space, nets, system)?;
    if !violations.is_empty() {
        return Err(Error::Precondition(format!("not a valid system: {} violations", violations.len())));
    }
    let perm: Vec<Point> = space
        .points()
        .map(|x| system.image(n, x).ok_or_else(|| Error::Internal(format!("A_{n} misses point {x}"))))
        .collect::<Result<_>>()?;
    let map = IsometryMap::certify(space, perm, &system.a, &system.b);
    if !map.is_certified() {
        return Err(Error::Internal(format!("valid system yields an uncertified map {:?}", map.perm)));
    }
    Ok(map)
}

/// Reads an autoisometry off one play against Player 2's strategy.
///
/// Player 1 enumerates the points twice over, alternating sides: the `i`-th
/// point on the left, then on the right, with ordinals counting down from
/// `2|M| - 1`. The answers to the left moves define the map.
pub fn strategy_stream_isometry(space: &MetricSpace, strategy: &Strategy) -> Result<IsometryMap> {
    require_ef_player2(strategy, 2 * space.len())?;
    stream_isometry_with(space, &strategy.pair.a, &strategy.pair.b, strategy)
}

/// As [`strategy_stream_isometry`], for any Player-2 policy.
pub fn stream_isometry_with(
    space: &MetricSpace,
    a: &PointTuple,
    b: &PointTuple,
    policy: &impl Player2Policy,
) -> Result<IsometryMap> {
    check_pair(space, a, b)?;
    let total = 2 * space.len() as u32;
    let mut history: Vec<(Move, Point)> = Vec::new();
    for (round, p) in space.points().flat_map(|p| [(Side::Left, p), (Side::Right, p)]).enumerate() {
        let mv = Move::new(total - 1 - round as u32, p.0, p.1);
        let y = policy
            .reply(space, &history, &mv)
            .ok_or_else(|| Error::StrategyLoses(format!("no answer to {mv:?}")))?;
        space.check_point(y)?;
        history.push((mv, y));
    }
    let (left, right): (Vec<Point>, Vec<Point>) = a
        .iter()
        .copied()
        .zip(b.iter().copied())
        .chain(history.iter().map(|(m, y)| m.pair_with(*y)))
        .unzip();
    if !crate::game::partial_isometry(space, &left, &right) {
        return Err(Error::StrategyLoses("the streamed play breaks the isometry".into()));
    }
    let mut perm = vec![usize::MAX; space.len()];
    for (&x, &y) in left.iter().zip(&right) {
        perm[x] = y;
    }
    let map = IsometryMap::certify(space, perm, a, b);
    if !map.is_certified() {
        return Err(Error::Internal(format!("isometric play yields an uncertified map {:?}", map.perm)));
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{solve_ef_game, IsometryPolicy};
    use crate::metric::fixtures::*;
    use crate::nets::build_net_family;

    fn t(v: &[Point]) -> PointTuple {
        PointTuple::from(v.to_vec())
    }

    fn identity_system(nets: &NetFamily, k: usize, a: &[Point]) -> KSystem {
        let phi = (0..=k).map(|n| nets.level(n).unwrap().iter().map(|&z| (z, z)).collect()).collect();
        KSystem { depth: k, a: t(a), b: t(a), phi, nets: nets.clone() }
    }

    #[test]
    fn identity_is_a_system() {
        let l = line();
        let nets = build_net_family(&l, 8);
        let sys = identity_system(&nets, 5, &[]);
        assert!(verify_k_system(&l, &nets, &sys).unwrap().is_empty());
        let map = system_to_isometry(&l, &nets, &sys).unwrap();
        assert_eq!(map.perm, vec![0, 1, 2, 3]);
    }

    #[test]
    fn square_rotation_by_two() {
        let s = square();
        let nets = build_net_family(&s, 8);
        let rot = [2, 3, 0, 1];
        let phi = (0..=3).map(|n| nets.level(n).unwrap().iter().map(|&z| (z, rot[z])).collect()).collect();
        let sys = KSystem { depth: 3, a: t(&[0]), b: t(&[2]), phi, nets: nets.clone() };
        assert!(verify_k_system(&s, &nets, &sys).unwrap().is_empty());
        let map = system_to_isometry(&s, &nets, &sys).unwrap();
        assert_eq!(map.perm, rot.to_vec());
        assert!(map.is_certified());
    }

    #[test]
    fn path3_anchor_clause_fails() {
        let p = path3();
        let nets = build_net_family(&p, 4);
        for img in p.points() {
            let phi = vec![vec![(0, 1), (1, 0), (2, img)]; 2];
            let sys = KSystem { depth: 1, a: t(&[0]), b: t(&[1]), phi, nets: nets.clone() };
            let v = verify_k_system(&p, &nets, &sys).unwrap();
            assert!(v.iter().any(|v| v.clause == Clause::Anchors && v.levels == vec![1] && v.points == vec![0, 2]));
        }
    }

    #[test]
    fn search_examples() {
        let p = path3();
        let nets = build_net_family(&p, 4);
        match search_k_system(&p, &t(&[0]), &t(&[1]), &nets, 1).unwrap() {
            SearchOutcome::Exhausted { max_depth_reached, .. } => assert_eq!(max_depth_reached, None),
            other => panic!("{other:?}"),
        }
        let found = search_k_system(&p, &t(&[0]), &t(&[0]), &nets, 3).unwrap();
        assert!(verify_k_system(&p, &nets, found.system().unwrap()).unwrap().is_empty());
        let s = square();
        let nets = build_net_family(&s, 4);
        let found = search_k_system(&s, &t(&[0]), &t(&[1]), &nets, 3).unwrap();
        let map = system_to_isometry(&s, &nets, found.system().unwrap()).unwrap();
        assert_eq!(map.perm[0], 1);
    }

    #[test]
    fn strategies_give_systems() {
        for (space, a, b) in [(square(), 0, 2), (path3(), 0, 2), (path3(), 1, 1)] {
            let nets = build_net_family(&space, 6);
            let strat = solve_ef_game(&space, &t(&[a]), &t(&[b]), Budget::Omega).unwrap().strategy;
            for k in 0..=snap_depth(&space, &nets) {
                let sys = strategy_to_k_system(&space, &nets, &strat, k).unwrap();
                assert!(verify_k_system(&space, &nets, &sys).unwrap().is_empty());
            }
            let sys = strategy_to_k_system(&space, &nets, &strat, snap_depth(&space, &nets)).unwrap();
            assert!(system_to_isometry(&space, &nets, &sys).unwrap().is_certified());
        }
    }

    #[test]
    fn non_surjective_policy_is_refuted() {
        // answers every move with point 0
        struct Stuck;
        impl Player2Policy for Stuck {
            fn reply(&self, _: &MetricSpace, _: &[(Move, Point)], _: &Move) -> Option<Point> {
                Some(0)
            }
        }
        let l = line();
        let nets = build_net_family(&l, 4);
        let r = strategy_to_k_system_with(&l, &t(&[]), &t(&[]), &nets, &Stuck, 0);
        assert!(matches!(r, Err(Error::StrategyLoses(_))));
    }

    #[test]
    fn streaming() {
        let p = path3();
        let strat = solve_ef_game(&p, &t(&[0]), &t(&[2]), Budget::Omega).unwrap().strategy;
        assert_eq!(strategy_stream_isometry(&p, &strat).unwrap().perm, vec![2, 1, 0]);
        let s = square();
        let strat = solve_ef_game(&s, &t(&[0]), &t(&[1]), Budget::Omega).unwrap().strategy;
        let map = strategy_stream_isometry(&s, &strat).unwrap();
        assert!(map.is_certified() && map.perm[0] == 1);
        let id = stream_isometry_with(&p, &t(&[1]), &t(&[1]), &IsometryPolicy { perm: vec![0, 1, 2] }).unwrap();
        assert_eq!(id.perm, vec![0, 1, 2]);
        let short = solve_ef_game(&p, &t(&[0]), &t(&[2]), Budget::Finite(2)).unwrap().strategy;
        assert!(matches!(strategy_stream_isometry(&p, &short), Err(Error::Precondition(_))));
    }
}
