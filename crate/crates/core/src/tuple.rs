use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::metric::Point;

/// A finite sequence of point indices. Repeats are allowed.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointTuple(Vec<Point>);

impl PointTuple {
    pub fn new() -> Self {
        PointTuple(Vec::new())
    }

    pub fn push(&mut self, p: Point) {
        self.0.push(p);
    }

    pub fn extended(&self, p: Point) -> Self {
        let mut v = self.0.clone();
        v.push(p);
        PointTuple(v)
    }

    pub fn as_slice(&self) -> &[Point] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Point> {
        self.0
    }

    /// Number of distinct points in the tuple.
    pub fn distinct_count(&self) -> usize {
        let mut v = self.0.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }

    pub fn has_repeats(&self) -> bool {
        self.distinct_count() != self.0.len()
    }
}

impl Deref for PointTuple {
    type Target = [Point];
    fn deref(&self) -> &[Point] {
        &self.0
    }
}

impl From<Vec<Point>> for PointTuple {
    fn from(v: Vec<Point>) -> Self {
        PointTuple(v)
    }
}

impl From<&[Point]> for PointTuple {
    fn from(v: &[Point]) -> Self {
        PointTuple(v.to_vec())
    }
}

impl FromIterator<Point> for PointTuple {
    fn from_iter<I: IntoIterator<Item = Point>>(iter: I) -> Self {
        PointTuple(iter.into_iter().collect())
    }
}

/// Comma-separated indices, e.g. `0,2,1`. The empty string is the empty tuple.
impl FromStr for PointTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(PointTuple::new());
        }
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<Point>()
                    .map_err(|_| Error::Parse(format!("bad point index `{t}`")))
            })
            .collect()
    }
}

impl fmt::Display for PointTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse() {
        assert_eq!("0, 2,1".parse::<PointTuple>().unwrap().as_slice(), &[0, 2, 1]);
        assert!("".parse::<PointTuple>().unwrap().is_empty());
        assert!("0,x".parse::<PointTuple>().is_err());
    }

    #[test]
    fn distinct() {
        let t = PointTuple::from(vec![3, 1, 3]);
        assert_eq!(t.distinct_count(), 2);
        assert!(t.has_repeats());
        assert_eq!(t.to_string(), "(3,1,3)");
    }
}
