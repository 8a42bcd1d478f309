use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A configuration written as `(x, sigma)`: `x` weakly decreasing, and the
/// particle at position `i` has species `k_{sigma(i)}` where
/// `k = (1^{N_1}, 2^{N_2}, ..., n^{N_n})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderedConfig {
    x: Vec<i64>,
    sigma: Vec<usize>,
    blocks: Vec<usize>,
    site_species: Vec<Vec<usize>>,
    species_counts: Vec<usize>,
    inversions: usize,
}

impl OrderedConfig {
    pub fn x(&self) -> &[i64] {
        &self.x
    }

    /// One-line notation, 1-based values.
    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    /// Block sizes `m(x)` of equal entries of `x`, left to right.
    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    /// `L[i][j]`: number of species-`j+1` particles in block `i`.
    pub fn site_species_counts(&self) -> &[Vec<usize>] {
        &self.site_species
    }

    /// `(N_1, ..., N_n)`.
    pub fn species_counts(&self) -> &[usize] {
        &self.species_counts
    }

    pub fn inversions(&self) -> usize {
        self.inversions
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The particle multiset, sorted by site descending then species.
    pub fn particles(&self) -> Vec<(i64, usize)> {
        config_from_permutation(&self.x, &self.sigma, &self.species_counts)
            .expect("stored permutation is valid")
    }
}

/// Number of pairs `i < j` with `s[i] > s[j]`.
pub fn inversions(s: &[usize]) -> usize {
    let mut n = 0;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if s[i] > s[j] {
                n += 1;
            }
        }
    }
    n
}

/// Minimal-inversion `(x, sigma)` form of a particle multiset over species
/// `1..=n`.
///
/// Particles are sorted by site descending and species ascending, and the
/// labels of each species are handed out left to right.
pub fn canonical_order(particles: &[(i64, usize)], n: usize) -> Result<OrderedConfig> {
    if let Some(&(_, sp)) = particles.iter().find(|&&(_, sp)| sp == 0 || sp > n) {
        return domain(format!("species {sp} outside 1..={n}"));
    }
    let mut sorted = particles.to_vec();
    sorted.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut species_counts = vec![0usize; n];
    for &(_, sp) in &sorted {
        species_counts[sp - 1] += 1;
    }
    let mut next_label: Vec<usize> = species_counts
        .iter()
        .scan(1, |acc, &c| {
            let start = *acc;
            *acc += c;
            Some(start)
        })
        .collect();

    let mut x = Vec::with_capacity(sorted.len());
    let mut sigma = Vec::with_capacity(sorted.len());
    let mut blocks: Vec<usize> = Vec::new();
    let mut site_species: Vec<Vec<usize>> = Vec::new();
    for (i, &(site, sp)) in sorted.iter().enumerate() {
        if i == 0 || sorted[i - 1].0 != site {
            blocks.push(0);
            site_species.push(vec![0; n]);
        }
        *blocks.last_mut().unwrap() += 1;
        site_species.last_mut().unwrap()[sp - 1] += 1;
        x.push(site);
        sigma.push(next_label[sp - 1]);
        next_label[sp - 1] += 1;
    }
    let inv = inversions(&sigma);
    Ok(OrderedConfig {
        x,
        sigma,
        blocks,
        site_species,
        species_counts,
        inversions: inv,
    })
}

/// The particle multiset described by an arbitrary `(x, sigma)` pair, sorted
/// by site descending then species ascending.
pub fn config_from_permutation(
    x: &[i64],
    sigma: &[usize],
    species_counts: &[usize],
) -> Result<Vec<(i64, usize)>> {
    let total: usize = species_counts.iter().sum();
    if x.len() != sigma.len() || x.len() != total {
        return domain("x, sigma and species counts have inconsistent sizes");
    }
    let mut seen = vec![false; total];
    for &s in sigma {
        if s == 0 || s > total || seen[s - 1] {
            return domain("sigma is not a permutation");
        }
        seen[s - 1] = true;
    }
    let k: Vec<usize> = species_counts
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| std::iter::repeat_n(j + 1, c))
        .collect();
    let mut out: Vec<(i64, usize)> = x.iter().zip(sigma).map(|(&s, &l)| (s, k[l - 1])).collect();
    out.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn digits(s: &str) -> Vec<usize> {
        s.bytes().map(|b| (b - b'0') as usize).collect()
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (1..=n).collect();
        heap(n, &mut cur, &mut out);
        out
    }

    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, a, out);
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        heap(k - 1, a, out);
    }

    // Species counts (1,2,2,3) split over three sites as blocks (1,4,3).
    const FIG_X: [i64; 8] = [2, 1, 1, 1, 1, 0, 0, 0];
    const FIG_N: [usize; 4] = [1, 2, 2, 3];

    #[test]
    fn eight_particle_example() {
        let parts = config_from_permutation(&FIG_X, &digits("21467358"), &FIG_N).unwrap();
        for other in ["21476358", "21567438", "35178426"] {
            let o = config_from_permutation(&FIG_X, &digits(other), &FIG_N).unwrap();
            assert_eq!(o, parts, "{other} should describe the same configuration");
            assert!(inversions(&digits(other)) > inversions(&digits("21467358")));
        }
        let oc = canonical_order(&parts, 4).unwrap();
        assert_eq!(oc.sigma(), digits("21467358").as_slice());
        assert_eq!(oc.blocks(), &[1, 4, 3]);
        assert_eq!(oc.inversions(), 6);
        assert_eq!(oc.site_species_counts()[1], vec![1, 0, 1, 2]);

        let ties = permutations(8)
            .into_iter()
            .filter(|s| {
                inversions(s) <= 6
                    && config_from_permutation(&FIG_X, s, &FIG_N).unwrap() == parts
            })
            .count();
        assert_eq!(ties, 1);
    }

    #[test]
    fn trivial_cases() {
        let same = canonical_order(&[(0, 3), (0, 1), (0, 2)], 3).unwrap();
        assert_eq!(same.sigma(), &[1, 2, 3]);
        assert_eq!(same.inversions(), 0);
        assert_eq!(same.blocks(), &[3]);

        let distinct = canonical_order(&[(0, 1), (2, 2), (1, 3)], 3).unwrap();
        assert_eq!(distinct.x(), &[2, 1, 0]);
        assert_eq!(distinct.sigma(), &[2, 3, 1]);
        assert_eq!(distinct.inversions(), 2);
        assert!(canonical_order(&[(0, 4)], 3).is_err());
    }

    fn small_config() -> impl Strategy<Value = (usize, Vec<(i64, usize)>)> {
        (1usize..=3).prop_flat_map(|n| {
            (Just(n), prop::collection::vec((-1i64..=1, 1..=n), 1..=5))
        })
    }

    proptest! {
        #[test]
        fn canonical_is_minimal_and_round_trips((n, parts) in small_config()) {
            let oc = canonical_order(&parts, n).unwrap();
            let mut want = parts.clone();
            want.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            prop_assert_eq!(oc.particles(), want.clone());
            prop_assert_eq!(canonical_order(&oc.particles(), n).unwrap(), oc.clone());
            for s in permutations(parts.len()) {
                if config_from_permutation(oc.x(), &s, oc.species_counts()).unwrap() == want {
                    prop_assert!(
                        inversions(&s) > oc.inversions() || s.as_slice() == oc.sigma()
                    );
                }
            }
            let rows: usize = oc.site_species_counts().iter().map(|r| r.iter().sum::<usize>()).sum();
            prop_assert_eq!(rows, parts.len());
        }
    }
}
