//! Seeded Gillespie simulation of the continuous-time process and of its
//! embedded jump chain.
//!
//! Replica `r` of a run with master seed `s` draws from stream `r` of the
//! ChaCha8 generator keyed by `s`. Estimates are integer hit counts summed
//! over replicas, so they are identical for any split of the replicas across
//! threads.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{LabeledConfig, OccupancyConfig};
use crate::error::{domain, Result};
use crate::generator::site_rates_f64;
use crate::numeric::check_q;

/// Replicas simulated per parallel work item.
pub const BLOCK: u64 = 4096;

/// Indicator-mean estimate with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub hits: u64,
}

impl SimEstimate {
    pub fn from_hits(hits: u64, samples: u64, seed: u64) -> Self {
        let n = samples as f64;
        let mean = hits as f64 / n;
        SimEstimate {
            mean,
            stderr: (mean * (1.0 - mean) / n).sqrt(),
            samples,
            seed,
            hits,
        }
    }

    /// Pool two estimates drawn from disjoint replica ranges of one seed.
    pub fn merge(&self, other: &SimEstimate) -> Result<SimEstimate> {
        if self.seed != other.seed {
            return domain(format!(
                "cannot merge estimates with seeds {} and {}",
                self.seed, other.seed
            ));
        }
        Ok(SimEstimate::from_hits(
            self.hits + other.hits,
            self.samples + other.samples,
            self.seed,
        ))
    }

    /// `|a - b|` in units of the combined standard error.
    pub fn z_score(&self, value: f64, value_stderr: f64) -> f64 {
        let s = (self.stderr * self.stderr + value_stderr * value_stderr).sqrt();
        let d = (self.mean - value).abs();
        if s == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / s
        }
    }
}

/// Generator for replica `replica` of the run seeded by `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

fn exp_sample<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// Index drawn with probability proportional to `weights`.
fn categorical<R: Rng>(rng: &mut R, weights: &[f64], total: f64) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn labeled_rates(x: &[i64], q: f64, out: &mut Vec<f64>) -> f64 {
    out.clear();
    let mut total = 0.0;
    for j in 0..x.len() {
        let b = x[..j].iter().filter(|&&s| s == x[j]).count();
        let r = q.powi(b as i32);
        total += r;
        out.push(r);
    }
    total
}

fn run_labeled<R: Rng>(x: &mut [i64], t_end: f64, q: f64, rng: &mut R, rates: &mut Vec<f64>) {
    let mut t = 0.0;
    loop {
        let total = labeled_rates(x, q, rates);
        t += exp_sample(rng, total);
        if t > t_end {
            return;
        }
        let j = categorical(rng, rates, total);
        x[j] += 1;
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!("time must be finite and nonnegative, got {t}"));
    }
    Ok(())
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return domain("at least one sample is required");
    }
    Ok(())
}

/// One trajectory of the labeled process up to time `t_end`.
pub fn simulate_labeled<R: Rng>(x0: &LabeledConfig, t_end: f64, q: f64, rng: &mut R) -> Result<LabeledConfig> {
    check_q(q)?;
    check_time(t_end)?;
    let mut x = x0.positions().to_vec();
    run_labeled(&mut x, t_end, q, rng, &mut Vec::new());
    Ok(LabeledConfig::new(x))
}

/// One trajectory of the occupancy process up to time `t_end`.
pub fn simulate_occupancy<R: Rng>(
    xi0: &OccupancyConfig,
    t_end: f64,
    q: f64,
    rng: &mut R,
) -> Result<OccupancyConfig> {
    check_q(q)?;
    check_time(t_end)?;
    if xi0.has_infinite() {
        return domain("simulation needs a finite configuration");
    }
    let mut xi = xi0.clone();
    let mut t = 0.0;
    let mut moves = Vec::new();
    let mut rates = Vec::new();
    loop {
        moves.clear();
        rates.clear();
        for site in xi.sites() {
            for (i, r) in site_rates_f64(&xi.at_site(site)?, q).into_iter().enumerate() {
                if r > 0.0 {
                    moves.push((site, i + 1));
                    rates.push(r);
                }
            }
        }
        let total: f64 = rates.iter().sum();
        if total == 0.0 {
            return Ok(xi);
        }
        t += exp_sample(rng, total);
        if t > t_end {
            return Ok(xi);
        }
        let (site, species) = moves[categorical(rng, &rates, total)];
        xi = xi.jumped(site, species)?;
    }
}

/// `steps` jumps of the embedded chain of the labeled process.
pub fn simulate_embedded<R: Rng>(x0: &LabeledConfig, steps: u64, q: f64, rng: &mut R) -> Result<LabeledConfig> {
    check_q(q)?;
    let mut x = x0.positions().to_vec();
    let mut rates = Vec::new();
    for _ in 0..steps {
        let total = labeled_rates(&x, q, &mut rates);
        let j = categorical(rng, &rates, total);
        x[j] += 1;
    }
    Ok(LabeledConfig::new(x))
}

/// Sum over `replicas` of the indicator vectors produced by `observe`, which
/// writes one flag per observable for a single replica.
fn count_hits<F>(seed: u64, replicas: Range<u64>, observables: usize, observe: F) -> Vec<u64>
where
    F: Fn(&mut ChaCha8Rng, &mut [bool]) + Sync,
{
    let base = ChaCha8Rng::seed_from_u64(seed);
    let blocks: Vec<Range<u64>> = (replicas.start..replicas.end)
        .step_by(BLOCK as usize)
        .map(|s| s..(s + BLOCK).min(replicas.end))
        .collect();
    blocks
        .into_par_iter()
        .map(|block| {
            let mut counts = vec![0u64; observables];
            let mut flags = vec![false; observables];
            for r in block {
                let mut rng = base.clone();
                rng.set_stream(r);
                flags.iter_mut().for_each(|f| *f = false);
                observe(&mut rng, &mut flags);
                for (c, &f) in counts.iter_mut().zip(&flags) {
                    *c += f as u64;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; observables],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// `P_x(X(t) <= y)` for every `y` in `ys`, all from the same trajectories
/// of replicas `replicas`.
pub fn estimate_cdf_replicas(
    x: &LabeledConfig,
    ys: &[LabeledConfig],
    t: f64,
    q: f64,
    seed: u64,
    replicas: Range<u64>,
) -> Result<Vec<SimEstimate>> {
    check_q(q)?;
    check_time(t)?;
    check_samples(replicas.end.saturating_sub(replicas.start))?;
    if let Some(y) = ys.iter().find(|y| y.len() != x.len()) {
        return domain(format!("target {:?} and start {:?} differ in length", y.positions(), x.positions()));
    }
    let samples = replicas.end - replicas.start;
    let targets: Vec<&[i64]> = ys.iter().map(|y| y.positions()).collect();
    let start = x.positions();
    let counts = count_hits(seed, replicas, ys.len(), |rng, flags| {
        let mut z = start.to_vec();
        let mut rates = Vec::with_capacity(z.len());
        run_labeled(&mut z, t, q, rng, &mut rates);
        for (f, y) in flags.iter_mut().zip(&targets) {
            *f = z.iter().zip(y.iter()).all(|(a, b)| a <= b);
        }
    });
    Ok(counts
        .into_iter()
        .map(|h| SimEstimate::from_hits(h, samples, seed))
        .collect())
}

/// [`estimate_cdf_replicas`] over replicas `0..samples`.
pub fn estimate_cdf_many(
    x: &LabeledConfig,
    ys: &[LabeledConfig],
    t: f64,
    q: f64,
    samples: u64,
    seed: u64,
) -> Result<Vec<SimEstimate>> {
    check_samples(samples)?;
    estimate_cdf_replicas(x, ys, t, q, seed, 0..samples)
}

/// Estimate of `P_x(X(t) <= y)`.
pub fn estimate_cdf(
    x: &LabeledConfig,
    y: &LabeledConfig,
    t: f64,
    q: f64,
    samples: u64,
    seed: u64,
) -> Result<SimEstimate> {
    Ok(estimate_cdf_many(x, std::slice::from_ref(y), t, q, samples, seed)?[0])
}

/// Estimate of the probability that the embedded chain from `x` visits `y`.
/// Each replica runs until its rank reaches that of `y` or a coordinate
/// overshoots.
pub fn estimate_hitting(x: &LabeledConfig, y: &LabeledConfig, q: f64, samples: u64, seed: u64) -> Result<SimEstimate> {
    check_q(q)?;
    check_samples(samples)?;
    if x.len() != y.len() {
        return domain("start and target have different dimensions");
    }
    let start = x.positions();
    let target = y.positions();
    let counts = count_hits(seed, 0..samples, 1, |rng, flags| {
        let mut z = start.to_vec();
        let mut rates = Vec::with_capacity(z.len());
        while z.iter().zip(target).all(|(a, b)| a <= b) {
            if z == target {
                flags[0] = true;
                return;
            }
            let total = labeled_rates(&z, q, &mut rates);
            let j = categorical(rng, &rates, total);
            z[j] += 1;
        }
    });
    Ok(SimEstimate::from_hits(counts[0], samples, seed))
}

/// Estimate of the dual probability that the finite process started with
/// `k_j` species-`j` particles at the origin keeps every species-`j` particle
/// strictly left of `M_{n+1-j}` at time `t`.
pub fn estimate_qmoment(k: &[usize], m: &[i64], t: f64, q: f64, samples: u64, seed: u64) -> Result<SimEstimate> {
    check_q(q)?;
    check_time(t)?;
    check_samples(samples)?;
    let n = k.len();
    if n == 0 || m.len() != n {
        return domain("k and M must be nonempty and of equal length");
    }
    let mut start = OccupancyConfig::new(n);
    for (j, &kj) in k.iter().enumerate() {
        start.add(0, j + 1, crate::config::Count::Finite(kj as u32))?;
    }
    if start.is_empty() {
        return domain("at least one particle is required");
    }
    let limits: Vec<i64> = (0..n).map(|j| m[n - 1 - j]).collect();
    let counts = count_hits(seed, 0..samples, 1, |rng, flags| {
        let end = simulate_occupancy(&start, t, q, rng).expect("finite configuration");
        flags[0] = end.iter().all(|((s, sp), _)| s < limits[sp - 1]);
    });
    Ok(SimEstimate::from_hits(counts[0], samples, seed))
}

/// Start configurations of the reference `q = 0.6`, `t = 2` table.
pub const TABLE_STARTS: [[i64; 3]; 5] = [[0, 0, 0], [0, 0, -1], [0, -1, 0], [0, -1, -1], [0, 0, -2]];

/// Target offsets `y - x` of the reference table, in column order.
pub const TABLE_OFFSETS: [[i64; 3]; 7] = [
    [0, 1, 0],
    [0, 0, 1],
    [0, 0, 2],
    [0, 1, 4],
    [0, 1, 3],
    [0, 1, 2],
    [0, 1, 1],
];

/// One cell of the CDF table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub x: LabeledConfig,
    pub offset: Vec<i64>,
    pub estimate: SimEstimate,
}

/// Every cell of the table at `(q, t)`. Each row is estimated from one set
/// of trajectories.
pub fn estimate_table(q: f64, t: f64, samples: u64, seed: u64) -> Result<Vec<TableCell>> {
    let mut cells = Vec::new();
    for start in TABLE_STARTS {
        let x = LabeledConfig::new(start.to_vec());
        let ys: Vec<LabeledConfig> = TABLE_OFFSETS
            .iter()
            .map(|d| LabeledConfig::new(start.iter().zip(d).map(|(a, b)| a + b).collect()))
            .collect();
        let est = estimate_cdf_many(&x, &ys, t, q, samples, seed)?;
        for (d, e) in TABLE_OFFSETS.iter().zip(est) {
            cells.push(TableCell {
                x: x.clone(),
                offset: d.to_vec(),
                estimate: e,
            });
        }
    }
    Ok(cells)
}

fn tuple(v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(i64::to_string).collect();
    format!("\"({})\"", parts.join(","))
}

/// CSV with columns `x, y-x, estimate, stderr, samples, seed`.
pub fn table_csv(cells: &[TableCell]) -> String {
    let mut out = String::from("x,y-x,estimate,stderr,samples,seed\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{:.7},{:.7},{},{}\n",
            tuple(c.x.positions()),
            tuple(&c.offset),
            c.estimate.mean,
            c.estimate.stderr,
            c.estimate.samples,
            c.estimate.seed
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{cdf, duality_qmoment, hitting_prob_numeric};
    use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

    fn lc(v: &[i64]) -> LabeledConfig {
        LabeledConfig::new(v.to_vec())
    }

    #[test]
    fn zero_time_leaves_the_start() {
        let mut rng = replica_rng(1, 0);
        let x = lc(&[0, -1, 3]);
        assert_eq!(simulate_labeled(&x, 0.0, 0.5, &mut rng).unwrap(), x);
        let xi = OccupancyConfig::from_labeled(&x);
        assert_eq!(simulate_occupancy(&xi, 0.0, 0.5, &mut rng).unwrap(), xi);
        assert!(simulate_labeled(&x, -1.0, 0.5, &mut rng).is_err());
    }

    #[test]
    fn single_particle_displacement_is_poisson() {
        let (t, runs) = (1.5, 1_000_000u64);
        let bins = 9usize;
        let counts = count_hits(11, 0..runs, bins, |rng, flags| {
            let mut z = vec![0i64];
            run_labeled(&mut z, t, 0.4, rng, &mut Vec::new());
            flags[(z[0] as usize).min(bins - 1)] = true;
        });
        let law = Poisson::new(t).unwrap();
        let mut stat = 0.0;
        let mut tail = 1.0;
        for (k, &c) in counts.iter().enumerate() {
            let p = if k + 1 < bins { law.pmf(k as u64) } else { tail };
            tail -= p;
            let e = p * runs as f64;
            stat += (c as f64 - e).powi(2) / e;
        }
        let p_value = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
        assert!(p_value > 0.001, "chi-square {stat}, p = {p_value}");
    }

    #[test]
    fn fixed_seed_reproduces_trajectories() {
        let x = lc(&[0, 0, 0]);
        let a = simulate_labeled(&x, 3.0, 0.6, &mut replica_rng(5, 9)).unwrap();
        let b = simulate_labeled(&x, 3.0, 0.6, &mut replica_rng(5, 9)).unwrap();
        assert_eq!(a, b);
        let e1 = estimate_cdf(&x, &lc(&[0, 1, 3]), 2.0, 0.6, 20_000, 3).unwrap();
        let e2 = estimate_cdf(&x, &lc(&[0, 1, 3]), 2.0, 0.6, 20_000, 3).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn thread_count_does_not_change_estimates() {
        let x = lc(&[0, -1, 0]);
        let y = lc(&[0, 0, 4]);
        let a = estimate_cdf(&x, &y, 2.0, 0.6, 30_000, 8).unwrap();
        for threads in [1, 3] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let b = pool.install(|| estimate_cdf(&x, &y, 2.0, 0.6, 30_000, 8)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn half_batches_merge_to_the_full_batch() {
        let x = lc(&[0, 0]);
        let ys = [lc(&[1, 1])];
        let full = estimate_cdf_replicas(&x, &ys, 1.0, 0.3, 4, 0..10_001).unwrap()[0];
        let a = estimate_cdf_replicas(&x, &ys, 1.0, 0.3, 4, 0..5_000).unwrap()[0];
        let b = estimate_cdf_replicas(&x, &ys, 1.0, 0.3, 4, 5_000..10_001).unwrap()[0];
        let m = a.merge(&b).unwrap();
        assert_eq!(m.mean, full.mean);
        assert_eq!(m.hits, full.hits);
        assert!((m.stderr - full.stderr).abs() <= 1e-15);
        let other = estimate_cdf_replicas(&x, &ys, 1.0, 0.3, 5, 0..10).unwrap()[0];
        assert!(a.merge(&other).is_err());
    }

    #[test]
    fn stderr_is_binomial() {
        let e = SimEstimate::from_hits(30, 100, 0);
        assert!((e.stderr - (0.3f64 * 0.7 / 100.0).sqrt()).abs() < 1e-15);
        assert!(estimate_cdf(&lc(&[0]), &lc(&[1]), 1.0, 0.5, 0, 1).is_err());
        assert!(estimate_hitting(&lc(&[0]), &lc(&[1]), 0.5, 0, 1).is_err());
    }

    #[test]
    fn cdf_estimates_match_exact_values() {
        let grid = [
            (lc(&[0, 0, 0]), lc(&[0, 1, 3])),
            (lc(&[0, -1]), lc(&[1, 1])),
            (lc(&[0, 0, -1]), lc(&[1, 1, 0])),
            (lc(&[2]), lc(&[3])),
        ];
        for (i, (x, y)) in grid.iter().enumerate() {
            for &(q, t) in &[(0.3, 0.5), (0.6, 2.0)] {
                let e = estimate_cdf(x, y, t, q, 100_000, i as u64).unwrap();
                let want = cdf(x, y, q, t).unwrap();
                assert!(e.z_score(want, 0.0) < 4.0, "{x:?} {y:?} {q} {t}: {} vs {want}", e.mean);
            }
        }
    }

    #[test]
    fn hitting_estimates_match_exact_values() {
        for (x, y) in [(lc(&[0, -1, -2]), lc(&[1, 3, 2])), (lc(&[0, 0]), lc(&[2, 1]))] {
            let e = estimate_hitting(&x, &y, 0.6, 100_000, 17).unwrap();
            let want = hitting_prob_numeric(&x, &y, 0.6).unwrap();
            assert!(e.z_score(want, 0.0) < 4.0, "{} vs {want}", e.mean);
        }
        let miss = estimate_hitting(&lc(&[0, 0]), &lc(&[-1, 3]), 0.6, 100, 1).unwrap();
        assert_eq!(miss.hits, 0);
    }

    #[test]
    fn qmoment_estimates_match_duality() {
        let (k, m, q, t) = ([1usize, 2], [3i64, 2], 0.5, 1.0);
        let e = estimate_qmoment(&k, &m, t, q, 50_000, 2).unwrap();
        let want = duality_qmoment(&k, &m, q, t).unwrap();
        assert!(e.z_score(want, 0.0) < 4.0, "{} vs {want}", e.mean);
    }

    #[test]
    fn embedded_chain_raises_rank_by_one_per_step() {
        let x = lc(&[0, 0, 0]);
        let z = simulate_embedded(&x, 7, 0.6, &mut replica_rng(0, 0)).unwrap();
        assert_eq!(z.rank(), 7);
    }

    #[test]
    fn table_layout() {
        let cells = estimate_table(0.6, 2.0, 200, 42).unwrap();
        assert_eq!(cells.len(), 35);
        let csv = table_csv(&cells);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,y-x,estimate,stderr,samples,seed"));
        assert!(lines.next().unwrap().starts_with("\"(0,0,0)\",\"(0,1,0)\","));
        assert_eq!(csv.lines().count(), 36);
    }
}
