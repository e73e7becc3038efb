//! Finite metric spaces with exact rational distances.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::tuple::PointTuple;

/// A point of a [`MetricSpace`], identified by its row index.
pub type Point = usize;

/// One failed metric axiom, with the indices that witness it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum Violation {
    NotSquare { row: usize, len: usize, expected: usize },
    NonzeroDiagonal { i: usize, value: Rational },
    Symmetry { i: usize, j: usize, forward: Rational, backward: Rational },
    Positivity { i: usize, j: usize, value: Rational },
    /// `d(i,k) > d(i,j) + d(j,k)`.
    Triangle { i: usize, j: usize, k: usize, direct: Rational, via: Rational },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSquare { row, len, expected } => {
                write!(f, "row {row} has {len} entries, expected {expected}")
            }
            Violation::NonzeroDiagonal { i, value } => {
                write!(f, "diagonal entry ({i},{i}) is {value}, expected 0")
            }
            Violation::Symmetry { i, j, forward, backward } => {
                write!(f, "symmetry fails at ({i},{j}): {forward} vs {backward}")
            }
            Violation::Positivity { i, j, value } => {
                write!(f, "positivity fails at ({i},{j}): distance {value}")
            }
            Violation::Triangle { i, j, k, direct, via } => {
                write!(f, "triangle inequality fails at ({i},{j},{k}): {direct} > {via}")
            }
        }
    }
}

/// Every violated axiom of a candidate distance matrix. Empty iff the matrix is a metric.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the metric axioms on a rational matrix.
pub fn validate_matrix(dist: &[Vec<Rational>]) -> ValidationReport {
    let n = dist.len();
    let mut violations = Vec::new();
    for (row, entries) in dist.iter().enumerate() {
        if entries.len() != n {
            violations.push(Violation::NotSquare { row, len: entries.len(), expected: n });
        }
    }
    if !violations.is_empty() {
        return ValidationReport { violations };
    }
    for (i, row) in dist.iter().enumerate() {
        if !row[i].is_zero() {
            violations.push(Violation::NonzeroDiagonal { i, value: row[i] });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if dist[i][j] != dist[j][i] {
                violations.push(Violation::Symmetry {
                    i,
                    j,
                    forward: dist[i][j],
                    backward: dist[j][i],
                });
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for (a, b) in [(i, j), (j, i)] {
                if !dist[a][b].is_positive() {
                    violations.push(Violation::Positivity { i: a, j: b, value: dist[a][b] });
                }
            }
        }
    }
    for i in 0..n {
        for k in 0..n {
            if i == k {
                continue;
            }
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let via = dist[i][j] + dist[j][k];
                if dist[i][k] > via {
                    violations.push(Violation::Triangle { i, j, k, direct: dist[i][k], via });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// A finite metric space: labelled points and an exact distance matrix.
///
/// Alongside the rationals every entry carries a small integer class id with
/// `class(i,j) == class(k,l)` iff `d(i,j) == d(k,l)`, which keeps exact
/// equality tests cheap in the solvers.
#[derive(Clone, PartialEq, Eq)]
pub struct MetricSpace {
    labels: Vec<String>,
    dist: Vec<Rational>,
    class: Vec<u32>,
    values: Vec<Rational>,
}

impl fmt::Debug for MetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricSpace")
            .field("labels", &self.labels)
            .field("dist", &self.matrix())
            .finish()
    }
}

/// Norm used when building a space from rational coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    Linf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricDocument {
    labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist: Option<Vec<Vec<Rational>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<Vec<Rational>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    norm: Option<Norm>,
}

impl MetricSpace {
    /// Builds a validated space. Fails on the first violated axiom.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<Rational>>) -> Result<Self> {
        if labels.len() != dist.len() {
            return Err(Error::Parse(format!(
                "{} labels for a {}-row matrix",
                labels.len(),
                dist.len()
            )));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::Parse(format!("duplicate label `{l}`")));
            }
        }
        let report = validate_matrix(&dist);
        if let Some(v) = report.violations.into_iter().next() {
            return Err(Error::InvalidMetric(v));
        }
        Ok(Self::from_valid(labels, dist))
    }

    fn from_valid(labels: Vec<String>, dist: Vec<Vec<Rational>>) -> Self {
        let values: Vec<Rational> = dist
            .iter()
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let flat: Vec<Rational> = dist.into_iter().flatten().collect();
        let class = flat
            .iter()
            .map(|d| values.binary_search(d).expect("value present") as u32)
            .collect();
        MetricSpace { labels, dist: flat, class, values }
    }

    /// Builds a space with default labels `p0, p1, ...`.
    pub fn from_matrix(dist: Vec<Vec<Rational>>) -> Result<Self> {
        let labels = (0..dist.len()).map(|i| format!("p{i}")).collect();
        Self::new(labels, dist)
    }

    /// Builds a space from integer matrix entries.
    pub fn from_integer_matrix(dist: &[Vec<i64>]) -> Result<Self> {
        Self::from_matrix(
            dist.iter()
                .map(|row| row.iter().map(|&v| Rational::from(v)).collect())
                .collect(),
        )
    }

    /// Builds a space from rational coordinates under the L1 or L-infinity norm.
    pub fn from_coordinates(labels: Vec<String>, coords: &[Vec<Rational>], norm: Norm) -> Result<Self> {
        let dim = coords.first().map_or(0, Vec::len);
        if coords.iter().any(|c| c.len() != dim) {
            return Err(Error::Parse("coordinates of differing dimension".into()));
        }
        let dist = coords
            .iter()
            .map(|x| {
                coords
                    .iter()
                    .map(|y| {
                        let diffs = x.iter().zip(y).map(|(a, b)| a.abs_diff(b));
                        match norm {
                            Norm::L1 => diffs.sum(),
                            Norm::Linf => diffs.max().unwrap_or(Rational::ZERO),
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(labels, dist)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, p: Point) -> &str {
        &self.labels[p]
    }

    pub fn index_of(&self, label: &str) -> Option<Point> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub fn d(&self, x: Point, y: Point) -> Rational {
        self.dist[x * self.len() + y]
    }

    /// Class id of `d(x, y)`; equal ids mean equal distances.
    #[inline]
    pub fn class(&self, x: Point, y: Point) -> u32 {
        self.class[x * self.len() + y]
    }

    /// Distinct distance values in increasing order, including 0.
    pub fn distance_values(&self) -> &[Rational] {
        &self.values
    }

    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        self.dist.chunks(self.len().max(1)).map(<[Rational]>::to_vec).collect()
    }

    pub fn points(&self) -> std::ops::Range<Point> {
        0..self.len()
    }

    pub fn check_point(&self, p: Point) -> Result<()> {
        if p < self.len() {
            Ok(())
        } else {
            Err(Error::PointOutOfRange { index: p, size: self.len() })
        }
    }

    pub fn check_tuple(&self, t: &PointTuple) -> Result<()> {
        t.iter().try_for_each(|&p| self.check_point(p))
    }

    /// Re-checks the axioms; always empty for a constructed space.
    pub fn validate(&self) -> ValidationReport {
        validate_matrix(&self.matrix())
    }

    /// The space with point `i` renamed to position `perm[i]`.
    pub fn relabel(&self, perm: &[Point]) -> Result<Self> {
        let n = self.len();
        let mut inverse = vec![usize::MAX; n];
        if perm.len() != n {
            return Err(Error::ShapeMismatch(format!("permutation of length {} for {n} points", perm.len())));
        }
        for (i, &p) in perm.iter().enumerate() {
            if p >= n || inverse[p] != usize::MAX {
                return Err(Error::ShapeMismatch("not a permutation".into()));
            }
            inverse[p] = i;
        }
        let labels = inverse.iter().map(|&i| self.labels[i].clone()).collect();
        let dist = (0..n)
            .map(|a| (0..n).map(|b| self.d(inverse[a], inverse[b])).collect())
            .collect();
        Ok(Self::from_valid(labels, dist))
    }

    pub fn to_json(&self) -> String {
        let doc = MetricDocument {
            labels: self.labels.clone(),
            dist: Some(self.matrix()),
            coords: None,
            norm: None,
        };
        serde_json::to_string(&doc).expect("serializable")
    }
}

/// Parses the JSON document `{"labels": [...], "dist": [[...]]}`.
///
/// A document may give `"coords"` and `"norm"` (`"l1"` or `"linf"`) instead of `"dist"`.
pub fn parse_metric_space(document: &str) -> Result<MetricSpace> {
    let doc: MetricDocument = serde_json::from_str(document)?;
    match (doc.dist, doc.coords) {
        (Some(dist), None) => MetricSpace::new(doc.labels, dist),
        (None, Some(coords)) => {
            let norm = doc
                .norm
                .ok_or_else(|| Error::Parse("`coords` requires `norm`".into()))?;
            MetricSpace::from_coordinates(doc.labels, &coords, norm)
        }
        _ => Err(Error::Parse("exactly one of `dist` or `coords` is required".into())),
    }
}

/// Every violated axiom of a space document, instead of stopping at the first.
pub fn validate_document(document: &str) -> Result<ValidationReport> {
    let doc: MetricDocument = serde_json::from_str(document)?;
    match doc.dist {
        Some(dist) if doc.coords.is_none() => {
            if doc.labels.len() != dist.len() {
                return Err(Error::Parse(format!("{} labels for a {}-row matrix", doc.labels.len(), dist.len())));
            }
            Ok(validate_matrix(&dist))
        }
        _ => parse_metric_space(document).map(|s| s.validate()),
    }
}

/// Coordinatewise sum of distances between equal-length tuples.
pub fn product_distance(space: &MetricSpace, s: &PointTuple, t: &PointTuple) -> Result<Rational> {
    if s.len() != t.len() {
        return Err(Error::LengthMismatch { left: s.len(), right: t.len() });
    }
    space.check_tuple(s)?;
    space.check_tuple(t)?;
    Ok(s.iter().zip(t.iter()).map(|(&x, &y)| space.d(x, y)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceGaps {
    pub min_positive: Rational,
    /// Smallest difference between two distinct distance values (0 counts as a value).
    pub min_gap: Rational,
}

pub fn min_distance_gap(space: &MetricSpace) -> Result<DistanceGaps> {
    if space.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: space.len() });
    }
    let v = space.distance_values();
    let min_gap = v.windows(2).map(|w| w[1] - w[0]).min().expect("two values");
    Ok(DistanceGaps { min_positive: v[1], min_gap })
}

/// Named spaces used throughout the tests and documentation.
pub mod fixtures {
    use super::*;

    fn named(labels: &[&str], rows: &[&[i64]]) -> MetricSpace {
        MetricSpace::new(
            labels.iter().map(|s| s.to_string()).collect(),
            rows.iter()
                .map(|r| r.iter().map(|&v| Rational::from(v)).collect())
                .collect(),
        )
        .expect("fixture is a metric")
    }

    /// Path A - B - C with unit edges.
    pub fn path3() -> MetricSpace {
        named(&["A", "B", "C"], &[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]])
    }

    /// 4-cycle v0..v3 with unit edges and diagonals 2.
    pub fn square() -> MetricSpace {
        named(
            &["v0", "v1", "v2", "v3"],
            &[&[0, 1, 2, 1], &[1, 0, 1, 2], &[2, 1, 0, 1], &[1, 2, 1, 0]],
        )
    }

    /// Points 0, 1, 3, 7 on the line.
    pub fn line() -> MetricSpace {
        let coords: Vec<Vec<Rational>> = [0, 1, 3, 7].iter().map(|&c| vec![Rational::from(c)]).collect();
        MetricSpace::from_coordinates(
            (0..4).map(|i| format!("p{i}")).collect(),
            &coords,
            Norm::L1,
        )
        .expect("line is a metric")
    }

    pub fn single() -> MetricSpace {
        named(&["p0"], &[&[0]])
    }

    pub fn by_name(name: &str) -> Option<MetricSpace> {
        match name.to_ascii_lowercase().as_str() {
            "path3" | "space_path3" => Some(path3()),
            "square" | "space_square" => Some(square()),
            "line" | "space_line" => Some(line()),
            "single" => Some(single()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn fixtures_are_valid() {
        for s in [path3(), square(), line(), single()] {
            assert!(s.validate().is_valid(), "{s:?}");
        }
    }

    #[test]
    fn parse_path3() {
        let doc = r#"{"labels":["A","B","C"],"dist":[["0","1","2"],["1","0","1"],["2","1","0"]]}"#;
        let s = parse_metric_space(doc).unwrap();
        assert_eq!(s, path3());
    }

    #[test]
    fn parse_normalizes_rationals() {
        let doc = r#"{"labels":["x","y"],"dist":[["0","2/4"],["1/2","0"]]}"#;
        let s = parse_metric_space(doc).unwrap();
        assert_eq!(s.d(0, 1), Rational::new(1, 2));
        assert!(s.to_json().contains("\"1/2\""));
    }

    #[test]
    fn parse_reports_symmetry() {
        let doc = r#"{"labels":["x","y"],"dist":[["0","1"],["2","0"]]}"#;
        match parse_metric_space(doc) {
            Err(Error::InvalidMetric(Violation::Symmetry { i: 0, j: 1, .. })) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(matches!(parse_metric_space("{"), Err(Error::Parse(_))));
        let doc = r#"{"labels":["x"],"dist":[["zero"]]}"#;
        assert!(matches!(parse_metric_space(doc), Err(Error::Parse(_))));
        let doc = r#"{"labels":["x","x"],"dist":[["0","1"],["1","0"]]}"#;
        assert!(matches!(parse_metric_space(doc), Err(Error::Parse(_))));
    }

    #[test]
    fn parse_coordinates() {
        let doc = r#"{"labels":["a","b","c"],"coords":[["0","0"],["1","2"],["3","1"]],"norm":"linf"}"#;
        let s = parse_metric_space(doc).unwrap();
        assert_eq!(s.d(0, 1), r(2));
        assert_eq!(s.d(1, 2), r(2));
        assert_eq!(s.d(0, 2), r(3));
    }

    #[test]
    fn validate_reports_every_violation() {
        assert!(validate_matrix(&line().matrix()).is_valid());

        let zero = vec![
            vec![r(0), r(1), r(0)],
            vec![r(1), r(0), r(1)],
            vec![r(0), r(1), r(0)],
        ];
        let rep = validate_matrix(&zero);
        assert!(rep
            .violations
            .contains(&Violation::Positivity { i: 0, j: 2, value: r(0) }));

        let tri = vec![
            vec![r(0), r(1), r(5)],
            vec![r(1), r(0), r(1)],
            vec![r(5), r(1), r(0)],
        ];
        let rep = validate_matrix(&tri);
        assert_eq!(
            rep.violations[0],
            Violation::Triangle { i: 0, j: 1, k: 2, direct: r(5), via: r(2) }
        );

        let ragged = vec![vec![r(0), r(1)], vec![r(1)]];
        assert!(matches!(validate_matrix(&ragged).violations[0], Violation::NotSquare { row: 1, .. }));
    }

    #[test]
    fn square_is_tight_triangle() {
        let s = square();
        assert_eq!(s.d(0, 2), s.d(0, 1) + s.d(1, 2));
    }

    #[test]
    fn product_distance_examples() {
        let p = path3();
        let t = PointTuple::from(vec![0, 1]);
        assert_eq!(product_distance(&p, &t, &t).unwrap(), r(0));
        assert_eq!(product_distance(&p, &t, &PointTuple::from(vec![1, 2])).unwrap(), r(2));
        let l = line();
        assert_eq!(
            product_distance(&l, &PointTuple::from(vec![0, 1]), &PointTuple::from(vec![2, 3])).unwrap(),
            r(9)
        );
        assert!(matches!(
            product_distance(&p, &t, &PointTuple::from(vec![0])),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn gaps() {
        let g = min_distance_gap(&path3()).unwrap();
        assert_eq!((g.min_positive, g.min_gap), (r(1), r(1)));
        let g = min_distance_gap(&square()).unwrap();
        assert_eq!((g.min_positive, g.min_gap), (r(1), r(1)));
        let l = line();
        let positive: Vec<_> = l.distance_values()[1..].to_vec();
        assert_eq!(positive, [1, 2, 3, 4, 6, 7].map(r).to_vec());
        assert_eq!(min_distance_gap(&l).unwrap().min_gap, r(1));
        assert!(matches!(min_distance_gap(&single()), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn relabel_moves_distances() {
        let s = path3();
        let t = s.relabel(&[2, 0, 1]).unwrap();
        assert_eq!(t.labels(), ["B", "C", "A"]);
        assert_eq!(t.d(2, 1), s.d(0, 2));
    }

    fn small_space() -> impl Strategy<Value = MetricSpace> {
        (1usize..=5).prop_flat_map(|n| {
            proptest::collection::vec(1i64..=4, n * (n - 1) / 2).prop_filter_map("metric", move |vals| {
                let mut m = vec![vec![r(0); n]; n];
                let mut it = vals.into_iter();
                for i in 0..n {
                    for j in i + 1..n {
                        let v = r(it.next().unwrap());
                        m[i][j] = v;
                        m[j][i] = v;
                    }
                }
                MetricSpace::from_matrix(m).ok()
            })
        })
    }

    proptest! {
        #[test]
        fn json_round_trip(s in small_space()) {
            prop_assert_eq!(parse_metric_space(&s.to_json()).unwrap(), s);
        }

        #[test]
        fn product_distance_is_metric(s in small_space(), len in 1usize..=3, seed in any::<u64>()) {
            let n = s.len();
            let mut x = seed;
            let mut next = || { x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (x >> 33) as usize % n };
            let t: Vec<PointTuple> = (0..3).map(|_| PointTuple::from((0..len).map(|_| next()).collect::<Vec<_>>())).collect();
            let d = |a: &PointTuple, b: &PointTuple| product_distance(&s, a, b).unwrap();
            prop_assert_eq!(d(&t[0], &t[1]), d(&t[1], &t[0]));
            prop_assert_eq!(d(&t[0], &t[1]).is_zero(), t[0] == t[1]);
            prop_assert!(d(&t[0], &t[2]) <= d(&t[0], &t[1]) + d(&t[1], &t[2]));
        }
    }
}
