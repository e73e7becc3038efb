//! Nested families of finite nets `A_0 ⊆ A_1 ⊆ ...` where `A_n` covers the
//! space with open balls of radius `2^-n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetFamily {
    pub nets: Vec<Vec<Point>>,
    pub terminal_depth: usize,
}

/// True iff every point lies at distance `< radius` from some member of `centers`.
pub fn covers(space: &MetricSpace, centers: &[Point], radius: Rational) -> bool {
    space
        .points()
        .all(|x| centers.iter().any(|&z| space.d(x, z) < radius))
}

fn grow(space: &MetricSpace, net: &mut Vec<Point>, radius: Rational) {
    while let Some(x) = space
        .points()
        .find(|&x| !net.iter().any(|&z| space.d(x, z) < radius))
    {
        net.push(x);
    }
    net.sort_unstable();
}

/// Greedy lowest-index-first nets, truncated at `min(max_depth, terminal_depth)`.
pub fn build_net_family(space: &MetricSpace, max_depth: usize) -> NetFamily {
    let mut nets: Vec<Vec<Point>> = Vec::new();
    let mut current = Vec::new();
    let mut n = 0u32;
    let terminal_depth = loop {
        grow(space, &mut current, Rational::pow2_neg(n));
        if (n as usize) <= max_depth {
            nets.push(current.clone());
        }
        if current.len() == space.len() {
            break n as usize;
        }
        n += 1;
    };
    NetFamily { nets, terminal_depth }
}

impl NetFamily {
    /// Deepest level stored.
    pub fn depth(&self) -> usize {
        self.nets.len().saturating_sub(1)
    }

    pub fn is_complete(&self) -> bool {
        self.depth() >= self.terminal_depth
    }

    /// `A_n`, continuing with the full point set past the terminal depth.
    pub fn level(&self, n: usize) -> Option<&[Point]> {
        if n < self.nets.len() {
            Some(&self.nets[n])
        } else if self.is_complete() {
            self.nets.last().map(Vec::as_slice)
        } else {
            None
        }
    }

    pub fn require_level(&self, n: usize) -> Result<&[Point]> {
        self.level(n).ok_or_else(|| {
            Error::Precondition(format!("net family stops at depth {} < {n}", self.depth()))
        })
    }

    /// Checks nesting, covering and the terminal depth exactly.
    pub fn verify(&self, space: &MetricSpace) -> Result<()> {
        if self.nets.is_empty() {
            return Err(Error::ShapeMismatch("net family has no levels".into()));
        }
        for (n, net) in self.nets.iter().enumerate() {
            for &z in net {
                space.check_point(z)?;
            }
            if !covers(space, net, Rational::pow2_neg(n as u32)) {
                return Err(Error::Precondition(format!("A_{n} does not cover at radius 2^-{n}")));
            }
            if n > 0 && !self.nets[n - 1].iter().all(|z| net.contains(z)) {
                return Err(Error::Precondition(format!("A_{} is not contained in A_{n}", n - 1)));
            }
        }
        let full = |net: &Vec<Point>| net.len() == space.len();
        match self.nets.iter().position(full) {
            Some(t) if t != self.terminal_depth => Err(Error::Precondition(format!(
                "terminal depth is {t}, document says {}",
                self.terminal_depth
            ))),
            None if self.terminal_depth <= self.depth() => Err(Error::Precondition(
                "terminal depth reached without a full net".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::fixtures::*;

    #[test]
    fn single_point() {
        let f = build_net_family(&single(), 5);
        assert_eq!(f.terminal_depth, 0);
        assert_eq!(f.nets, vec![vec![0]]);
        assert_eq!(f.level(4), Some(&[0][..]));
    }

    #[test]
    fn path3_needs_every_point_below_radius_one() {
        let f = build_net_family(&path3(), 3);
        assert_eq!(f.level(1), Some(&[0, 1, 2][..]));
        // radius 1 is strict, so A_0 already holds every point
        assert_eq!(f.terminal_depth, 0);
    }

    #[test]
    fn line_nets() {
        let f = build_net_family(&line(), 5);
        for n in 1..=5 {
            assert_eq!(f.level(n).unwrap(), &[0, 1, 2, 3]);
        }
        f.verify(&line()).unwrap();
    }

    #[test]
    fn coarse_levels_on_a_fine_space() {
        // points at 0, 1/8, 1/4, 2 on the line
        let coords: Vec<Vec<Rational>> = [(0, 1), (1, 8), (1, 4), (2, 1)]
            .iter()
            .map(|&(n, d)| vec![Rational::new(n, d)])
            .collect();
        let s = MetricSpace::from_coordinates(
            (0..4).map(|i| format!("q{i}")).collect(),
            &coords,
            crate::metric::Norm::L1,
        )
        .unwrap();
        let f = build_net_family(&s, 10);
        assert_eq!(f.nets[0], vec![0, 3]);
        assert_eq!(f.nets[1], vec![0, 3]);
        assert_eq!(f.nets[2], vec![0, 2, 3]);
        assert_eq!(f.nets[3], vec![0, 1, 2, 3]);
        assert_eq!(f.nets.len(), 4);
        assert_eq!(f.terminal_depth, 3);
        f.verify(&s).unwrap();

        let truncated = build_net_family(&s, 2);
        assert_eq!(truncated.nets.len(), 3);
        assert_eq!(truncated.terminal_depth, 3);
        assert!(truncated.level(3).is_none());
        truncated.verify(&s).unwrap();
    }

    #[test]
    fn json_round_trip() {
        let f = build_net_family(&square(), 3);
        assert_eq!(NetFamily::from_json(&f.to_json()).unwrap(), f);
        assert!(f.to_json().starts_with("{\"nets\":"));
    }
}
