//! Brute-force reference implementations.
//!
//! Nothing here reuses the solvers: distances are compared as rationals read
//! from the plain matrix, and the back-and-forth relations are evaluated by
//! direct recursion without memoization. Size caps are hard errors.

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};
use crate::rank::RankValue;
use crate::rational::Rational;

pub const DEFAULT_AUTO_CAP: usize = 8;
pub const MAX_RANK_POINTS: usize = 5;
pub const MAX_RANK_TUPLE: usize = 3;
pub const MAX_RANK_BUDGET: u32 = 5;

fn cap(what: &'static str, value: usize, limit: usize) -> Result<()> {
    if value > limit {
        Err(Error::CapExceeded { what, value, cap: limit })
    } else {
        Ok(())
    }
}

fn extend(d: &[Vec<Rational>], perm: &mut Vec<Point>, used: &mut [bool], out: &mut Vec<Vec<Point>>) {
    let x = perm.len();
    if x == d.len() {
        out.push(perm.clone());
        return;
    }
    for y in 0..d.len() {
        if used[y] || (0..x).any(|w| d[x][w] != d[y][perm[w]]) {
            continue;
        }
        used[y] = true;
        perm.push(y);
        extend(d, perm, used, out);
        perm.pop();
        used[y] = false;
    }
}

/// Every distance-preserving permutation, in lexicographic order.
pub fn enumerate_autoisometries(space: &MetricSpace, max_points: usize) -> Result<Vec<Vec<Point>>> {
    cap("points", space.len(), max_points)?;
    let d = space.matrix();
    let mut out = Vec::new();
    extend(&d, &mut Vec::new(), &mut vec![false; d.len()], &mut out);
    Ok(out)
}

/// Whether some autoisometry sends `a_i` to `b_i` for every `i`.
pub fn exists_autoisometry_mapping(space: &MetricSpace, a: &[Point], b: &[Point], max_points: usize) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    for &p in a.iter().chain(b) {
        if p >= space.len() {
            return Err(Error::PointOutOfRange { index: p, size: space.len() });
        }
    }
    Ok(enumerate_autoisometries(space, max_points)?
        .iter()
        .any(|perm| a.iter().zip(b).all(|(&x, &y)| perm[x] == y)))
}

struct Naive {
    d: Vec<Vec<Rational>>,
}

impl Naive {
    fn atomic(&self, a: &[Point], b: &[Point]) -> bool {
        (0..a.len()).all(|i| (0..a.len()).all(|j| self.d[a[i]][a[j]] == self.d[b[i]][b[j]]))
    }

    /// `a ~_n b`, straight from the recursive definition.
    fn related(&self, n: u32, a: &mut Vec<Point>, b: &mut Vec<Point>) -> bool {
        if !self.atomic(a, b) {
            return false;
        }
        if n == 0 {
            return true;
        }
        if !self.related(n - 1, a, b) {
            return false;
        }
        let m = self.d.len();
        let forth = (0..m).all(|x| {
            (0..m).any(|y| {
                a.push(x);
                b.push(y);
                let r = self.related(n - 1, a, b);
                a.pop();
                b.pop();
                r
            })
        });
        forth
            && (0..m).all(|y| {
                (0..m).any(|x| {
                    a.push(x);
                    b.push(y);
                    let r = self.related(n - 1, a, b);
                    a.pop();
                    b.pop();
                    r
                })
            })
    }
}

/// Rank of a pair by naive recursion on the level.
///
/// A pair naming `k` distinct points that is still related at level
/// `|M| - k` is reported as `∞`, after confirming that an autoisometry
/// carries one tuple to the other. That level must fit under `budget_cap`.
pub fn brute_scott_rank_pair(space: &MetricSpace, a: &[Point], b: &[Point], budget_cap: u32) -> Result<RankValue> {
    cap("points", space.len(), MAX_RANK_POINTS)?;
    cap("tuple length", a.len(), MAX_RANK_TUPLE)?;
    cap("budget", budget_cap as usize, MAX_RANK_BUDGET as usize)?;
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    for &p in a.iter().chain(b) {
        if p >= space.len() {
            return Err(Error::PointOutOfRange { index: p, size: space.len() });
        }
    }
    let mut distinct = a.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let horizon = (space.len() - distinct.len()) as u32;
    cap("stabilization level", horizon as usize, budget_cap as usize)?;
    let naive = Naive { d: space.matrix() };
    for n in 0..=horizon {
        if !naive.related(n, &mut a.to_vec(), &mut b.to_vec()) {
            return Ok(RankValue::Finite(n));
        }
    }
    if !exists_autoisometry_mapping(space, a, b, MAX_RANK_POINTS)? {
        return Err(Error::Internal(format!(
            "pair related at level {horizon} without an autoisometry"
        )));
    }
    Ok(RankValue::Infinity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::fixtures::*;

    #[test]
    fn fixture_autoisometries() {
        assert_eq!(enumerate_autoisometries(&path3(), 8).unwrap(), vec![vec![0, 1, 2], vec![2, 1, 0]]);
        assert_eq!(enumerate_autoisometries(&square(), 8).unwrap().len(), 8);
        assert_eq!(enumerate_autoisometries(&line(), 8).unwrap(), vec![vec![0, 1, 2, 3]]);
        assert!(matches!(enumerate_autoisometries(&square(), 3), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn mapping_queries() {
        let p = path3();
        assert!(exists_autoisometry_mapping(&p, &[1], &[1], 8).unwrap());
        assert!(!exists_autoisometry_mapping(&p, &[0], &[1], 8).unwrap());
        assert!(exists_autoisometry_mapping(&p, &[0, 1], &[2, 1], 8).unwrap());
        let l = line();
        assert!(!exists_autoisometry_mapping(&l, &[0], &[3], 8).unwrap());
    }

    #[test]
    fn brute_ranks() {
        let p = path3();
        assert_eq!(brute_scott_rank_pair(&p, &[0], &[1], 5).unwrap(), RankValue::Finite(1));
        assert_eq!(brute_scott_rank_pair(&p, &[0], &[2], 5).unwrap(), RankValue::Infinity);
        assert_eq!(brute_scott_rank_pair(&p, &[1, 1], &[1, 1], 5).unwrap(), RankValue::Infinity);
        assert_eq!(brute_scott_rank_pair(&p, &[0, 2], &[0, 1], 5).unwrap(), RankValue::Finite(0));
        assert!(matches!(brute_scott_rank_pair(&p, &[0], &[1], 1), Err(Error::CapExceeded { .. })));
        assert!(matches!(brute_scott_rank_pair(&p, &[0, 1, 2, 0], &[0, 1, 2, 0], 5), Err(Error::CapExceeded { .. })));
    }
}
