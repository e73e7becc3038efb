//! Generated families of small spaces for exhaustive and randomized checks.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::metric::MetricSpace;
use crate::rational::Rational;

fn upper(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn canonical(n: usize, m: &[Vec<usize>]) -> Vec<usize> {
    let pairs = upper(n);
    (0..n)
        .permutations(n)
        .map(|p| pairs.iter().map(|&(i, j)| m[p[i]][p[j]]).collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

/// Every metric on `n` points with off-diagonal distances drawn from
/// `values`, one per isometry class, ordered by canonical form.
pub fn enumerate_spaces(n: usize, values: &[Rational]) -> Vec<MetricSpace> {
    let pairs = upper(n);
    let mut seen = std::collections::BTreeSet::new();
    for choice in pairs.iter().map(|_| 0..values.len()).multi_cartesian_product() {
        let mut m = vec![vec![0usize; n]; n];
        for (&(i, j), &c) in pairs.iter().zip(&choice) {
            m[i][j] = c + 1;
            m[j][i] = c + 1;
        }
        let d = |i: usize, j: usize| if i == j { Rational::ZERO } else { values[m[i][j] - 1] };
        let metric = (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| d(i, k) <= d(i, j) + d(j, k))));
        if metric {
            seen.insert(canonical(n, &m));
        }
    }
    if n <= 1 {
        seen.insert(Vec::new());
    }
    seen.into_iter()
        .map(|code| {
            let mut dist = vec![vec![Rational::ZERO; n]; n];
            for (&(i, j), &c) in pairs.iter().zip(&code) {
                dist[i][j] = values[c - 1];
                dist[j][i] = values[c - 1];
            }
            MetricSpace::from_matrix(dist).expect("enumerated matrices are metrics")
        })
        .collect()
}

/// All spaces with `1..=max_points` points from [`enumerate_spaces`].
pub fn enumerate_up_to(max_points: usize, values: &[Rational]) -> Vec<MetricSpace> {
    (1..=max_points).flat_map(|n| enumerate_spaces(n, values)).collect()
}

/// Distances `{1, 2, 3}` used by the exhaustive corpus.
pub fn small_integer_values() -> Vec<Rational> {
    (1..=3).map(Rational::from_integer).collect()
}

/// `count` seeded random spaces on `2..=max_points` points with distances
/// from `{1, 3/2, 2}`; any such choice satisfies the triangle inequality.
pub fn random_spaces(seed: u64, count: usize, max_points: usize) -> Vec<MetricSpace> {
    let values = [Rational::ONE, Rational::new(3, 2), Rational::from_integer(2)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(2..=max_points.max(2));
            let mut dist = vec![vec![Rational::ZERO; n]; n];
            for (i, j) in upper(n) {
                let v = values[rng.gen_range(0..values.len())];
                dist[i][j] = v;
                dist[j][i] = v;
            }
            MetricSpace::from_matrix(dist).expect("distances within a factor of 2 are metric")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_sizes() {
        let v = small_integer_values();
        let sizes: Vec<usize> = (1..=5).map(|n| enumerate_spaces(n, &v).len()).collect();
        assert_eq!(sizes, vec![1, 3, 9, 48, 363]);
    }

    #[test]
    fn random_spaces_are_reproducible() {
        let a = random_spaces(7, 20, 6);
        assert_eq!(a, random_spaces(7, 20, 6));
        assert!(a.iter().all(|s| (2..=6).contains(&s.len())));
        assert_ne!(a, random_spaces(8, 20, 6));
    }
}
