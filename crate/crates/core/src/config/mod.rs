//! Particle configurations and the combinatorics attached to them.
//!
//! Three views of the same state are used throughout the crate:
//!
//! * [`OccupancyConfig`]: species-by-site counts, the general state.
//! * [`LabeledConfig`]: one particle per species, stored as the vector of
//!   positions. This is the state of the finite dual process and an element
//!   of the graded poset ordered componentwise.
//! * [`OrderedConfig`]: the `(x, sigma)` form with `x` weakly decreasing and
//!   `sigma` the minimal-inversion permutation.

mod occupancy;
mod ordered;

pub use occupancy::{Count, OccupancyConfig};
pub use ordered::{canonical_order, config_from_permutation, inversions, OrderedConfig};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::qalg::{q_factorial, QRationalFunction};

/// Positions `(x_1, ..., x_N)`; entry `i` is the site of the species-`i+1`
/// particle. Distinct species may share sites.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabeledConfig(Vec<i64>);

impl LabeledConfig {
    pub fn new(positions: Vec<i64>) -> Self {
        LabeledConfig(positions)
    }

    pub fn positions(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Rank in the graded poset: the sum of positions.
    pub fn rank(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Componentwise order.
    pub fn le(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Move the particle of species `j` (0-based) by `delta`.
    pub fn shifted(&self, j: usize, delta: i64) -> Self {
        let mut v = self.0.clone();
        v[j] += delta;
        LabeledConfig(v)
    }

    /// Translate every particle by `delta`.
    pub fn translated(&self, delta: i64) -> Self {
        LabeledConfig(self.0.iter().map(|x| x + delta).collect())
    }

    /// Number of particles of lower species index sharing the site of `j`.
    pub fn blockers(&self, j: usize) -> usize {
        let s = self.0[j];
        self.0[..j].iter().filter(|&&x| x == s).count()
    }
}

impl From<Vec<i64>> for LabeledConfig {
    fn from(v: Vec<i64>) -> Self {
        LabeledConfig(v)
    }
}

/// Pairwise overlaps `I_ij = |[x_i, y_i] ∩ [x_j, y_j]|` of integer intervals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntersectionMatrix(Vec<Vec<u64>>);

impl IntersectionMatrix {
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.0[i][j]
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.0
    }

    /// Interval lengths (the diagonal).
    pub fn lengths(&self) -> Vec<u64> {
        (0..self.size()).map(|i| self.0[i][i]).collect()
    }
}

/// Intersection numbers of the intervals joining each start `x_i` to its
/// target `y_i`. Intervals must be oriented, `x_i <= y_i`.
pub fn intersection_matrix(x: &LabeledConfig, y: &LabeledConfig) -> Result<IntersectionMatrix> {
    if x.len() != y.len() {
        return domain(format!("dimension mismatch: {} vs {}", x.len(), y.len()));
    }
    let (xs, ys) = (x.positions(), y.positions());
    if let Some(i) = (0..xs.len()).find(|&i| xs[i] > ys[i]) {
        return domain(format!(
            "interval [{}, {}] for species {} is reversed",
            xs[i],
            ys[i],
            i + 1
        ));
    }
    let n = xs.len();
    let m = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let lo = xs[i].max(xs[j]);
                    let hi = ys[i].min(ys[j]);
                    if hi >= lo {
                        (hi - lo + 1) as u64
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    Ok(IntersectionMatrix(m))
}

/// `N_y^{(n+1-j)}(eta)`: number of particles of species `1..=n+1-j` at sites
/// `>= y`. `j` is 1-based.
pub fn height(eta: &OccupancyConfig, y: i64, j: usize) -> Result<u64> {
    let n = eta.species();
    if j == 0 || j > n {
        return domain(format!("height index j={j} outside 1..={n}"));
    }
    let top = n + 1 - j;
    let mut total = 0u64;
    for ((site, species), count) in eta.iter() {
        if site >= y && species <= top {
            match count {
                Count::Finite(c) => total += u64::from(c),
                Count::Infinite => {
                    return domain(format!(
                        "infinitely many species-{species} particles at site {site} >= {y}"
                    ))
                }
            }
        }
    }
    Ok(total)
}

/// `W(x) = prod_z 1 / [k_z]_q!` where `k_z` counts entries of `x` equal to `z`.
pub fn weight_w(x: &[i64]) -> QRationalFunction {
    let mut sorted = x.to_vec();
    sorted.sort_unstable();
    let mut den = QRationalFunction::one();
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        den = &den * &QRationalFunction::from(q_factorial(j));
        i += j;
    }
    den.recip().expect("q-factorials are nonzero")
}

/// `prod_j [N_j]_q! / prod_{i,j} [L_ij]_q!` for an ordered configuration.
pub fn multiplicity_factor(oc: &OrderedConfig) -> QRationalFunction {
    let mut num = QRationalFunction::one();
    for &nj in oc.species_counts() {
        num = &num * &QRationalFunction::from(q_factorial(nj));
    }
    let mut den = QRationalFunction::one();
    for row in oc.site_species_counts() {
        for &l in row {
            den = &den * &QRationalFunction::from(q_factorial(l));
        }
    }
    &num / &den
}

/// Color-blind projection: merge species `N_1 + ... + N_{i-1} + 1 ..=
/// N_1 + ... + N_i` into the single species `i`.
pub fn project(xi: &OccupancyConfig, blocks: &[usize]) -> Result<OccupancyConfig> {
    let total: usize = blocks.iter().sum();
    if total != xi.species() {
        return domain(format!(
            "projection blocks sum to {total} but configuration has {} species",
            xi.species()
        ));
    }
    if blocks.contains(&0) {
        return domain("projection blocks must be positive");
    }
    let mut target = vec![0usize; total + 1];
    let mut s = 1;
    for (b, &len) in blocks.iter().enumerate() {
        for _ in 0..len {
            target[s] = b + 1;
            s += 1;
        }
    }
    let mut out = OccupancyConfig::new(blocks.len());
    for ((site, species), count) in xi.iter() {
        out.add(site, target[species], count)?;
    }
    Ok(out)
}
