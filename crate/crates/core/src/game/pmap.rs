//! Finite partial maps between points, kept sorted by domain point.

use crate::metric::{MetricSpace, Point};

pub(crate) type PartialMap = Vec<(Point, Point)>;

/// The map `a_i -> b_i` if it is a well-defined injection.
pub(crate) fn from_tuples(a: &[Point], b: &[Point]) -> Option<PartialMap> {
    let mut map: PartialMap = Vec::with_capacity(a.len());
    for (&x, &y) in a.iter().zip(b) {
        map = insert(&map, x, y)?;
    }
    Some(map)
}

/// `map ∪ {x -> y}` if still an injection.
pub(crate) fn insert(map: &[(Point, Point)], x: Point, y: Point) -> Option<PartialMap> {
    match map.binary_search_by_key(&x, |&(l, _)| l) {
        Ok(i) => (map[i].1 == y).then(|| map.to_vec()),
        Err(i) => {
            if map.iter().any(|&(_, r)| r == y) {
                return None;
            }
            let mut out = Vec::with_capacity(map.len() + 1);
            out.extend_from_slice(&map[..i]);
            out.push((x, y));
            out.extend_from_slice(&map[i..]);
            Some(out)
        }
    }
}

pub(crate) fn image(map: &[(Point, Point)], x: Point) -> Option<Point> {
    map.binary_search_by_key(&x, |&(l, _)| l).ok().map(|i| map[i].1)
}

pub(crate) fn preimage(map: &[(Point, Point)], y: Point) -> Option<Point> {
    map.iter().find(|&&(_, r)| r == y).map(|&(l, _)| l)
}

/// Whether adding `x -> y` to an isometric `map` keeps it isometric.
#[inline]
pub(crate) fn extends(space: &MetricSpace, map: &[(Point, Point)], x: Point, y: Point) -> bool {
    map.iter().all(|&(l, r)| space.class(x, l) == space.class(y, r))
}

pub(crate) fn is_isometric(space: &MetricSpace, map: &[(Point, Point)]) -> bool {
    map.iter()
        .enumerate()
        .all(|(i, &(x, y))| map[..i].iter().all(|&(l, r)| space.class(x, l) == space.class(y, r)))
}
