use std::collections::BTreeMap;
use std::hash::Hash;

use super::exppoly::ExpPoly;
use crate::config::{LabeledConfig, OccupancyConfig};
use crate::error::{domain, Error, Result};
use crate::generator::{jump_rates, labeled_jump_rates};
use crate::numeric::{check_q, compensated_sum};
use crate::qalg::QPolynomial;

/// Default cap on the number of states a single solve may visit.
pub const DEFAULT_MAX_STATES: usize = 200_000;

/// A state of a finite process whose every jump raises the rank by one.
pub trait ChainState: Clone + Eq + Hash + Ord {
    fn rank(&self) -> i64;
    /// Outgoing jumps with exact rates.
    fn moves(&self) -> Vec<(Self, QPolynomial)>;
}

impl ChainState for LabeledConfig {
    fn rank(&self) -> i64 {
        LabeledConfig::rank(self)
    }

    fn moves(&self) -> Vec<(Self, QPolynomial)> {
        labeled_jump_rates(self)
            .into_iter()
            .map(|t| (t.target, t.rate))
            .collect()
    }
}

impl ChainState for OccupancyConfig {
    fn rank(&self) -> i64 {
        self.iter()
            .map(|((s, _), c)| s * i64::from(c.finite().unwrap_or(0)))
            .sum()
    }

    fn moves(&self) -> Vec<(Self, QPolynomial)> {
        jump_rates(self)
            .expect("finite configuration")
            .into_iter()
            .map(|t| (t.target, t.rate))
            .collect()
    }
}

/// Exact time-`t` law of a finite process restricted to a region, with the
/// mass that left the region lumped into an absorbing escaped class.
#[derive(Clone, Debug)]
pub struct ExpPolyDistribution<S: Ord> {
    q: f64,
    entries: BTreeMap<S, ExpPoly>,
    escaped: ExpPoly,
}

impl<S: ChainState> ExpPolyDistribution<S> {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn entries(&self) -> &BTreeMap<S, ExpPoly> {
        &self.entries
    }

    pub fn escaped(&self) -> &ExpPoly {
        &self.escaped
    }

    pub fn prob(&self, state: &S, t: f64) -> f64 {
        self.entries.get(state).map_or(0.0, |p| p.eval(t))
    }

    /// Probability of still being inside the region at time `t`.
    pub fn inside_mass(&self, t: f64) -> f64 {
        compensated_sum(self.entries.values().map(|p| p.eval(t)))
    }

    /// Sum of all entries and the escaped class as a single expression.
    pub fn total(&self) -> ExpPoly {
        let mut acc = self.escaped.clone();
        for p in self.entries.values() {
            acc.add_scaled(p, 1.0);
        }
        acc
    }
}

/// Solve the forward equations from `start` on the region `inside`, which
/// must be closed under reversed jumps (once left, never re-entered).
pub fn forward_solve<S: ChainState>(
    start: &S,
    inside: impl Fn(&S) -> bool,
    q: f64,
    max_states: usize,
) -> Result<ExpPolyDistribution<S>> {
    let mut entries: BTreeMap<S, ExpPoly> = BTreeMap::new();
    let mut escape_flux = ExpPoly::zero();
    if !inside(start) {
        return Ok(ExpPolyDistribution {
            q,
            entries,
            escaped: ExpPoly::constant(1.0),
        });
    }
    // Pending inflow per state, grouped by rank so each level is finished
    // before the next one starts.
    let mut levels: BTreeMap<i64, BTreeMap<S, ExpPoly>> = BTreeMap::new();
    levels
        .entry(start.rank())
        .or_default()
        .insert(start.clone(), ExpPoly::zero());
    while let Some((_, level)) = levels.pop_first() {
        for (z, inflow) in level {
            let moves = z.moves();
            let lambda = moves
                .iter()
                .fold(QPolynomial::zero(), |acc, (_, r)| &acc + r);
            let p = if &z == start {
                ExpPoly::exp(&lambda, q)
            } else {
                inflow.convolve_exp(&lambda, q)
            };
            for (target, rate) in moves {
                let r = rate.eval(q);
                if inside(&target) {
                    let slot = levels
                        .entry(target.rank())
                        .or_default()
                        .entry(target)
                        .or_default();
                    slot.add_scaled(&p, r);
                } else {
                    escape_flux.add_scaled(&p, r);
                }
            }
            entries.insert(z, p);
            if entries.len() > max_states {
                return Err(Error::Resource(format!(
                    "forward solve exceeded {max_states} states"
                )));
            }
        }
    }
    let escaped = escape_flux.convolve_exp(&QPolynomial::zero(), q);
    Ok(ExpPolyDistribution {
        q,
        entries,
        escaped,
    })
}

/// Exact law of `X(t)` started from `x` on the box `x <= z <= bound`.
pub fn finite_time_dist(
    x: &LabeledConfig,
    bound: &LabeledConfig,
    q: f64,
    max_states: usize,
) -> Result<ExpPolyDistribution<LabeledConfig>> {
    check_q(q)?;
    if x.len() != bound.len() {
        return domain("start and bound have different dimensions");
    }
    if !x.le(bound) {
        return domain("bound must dominate the start componentwise");
    }
    let b = bound.positions().to_vec();
    forward_solve(
        x,
        |z: &LabeledConfig| z.positions().iter().zip(&b).all(|(a, c)| a <= c),
        q,
        max_states,
    )
}

/// `P_x(X(t) <= y)` componentwise. Zero when `x` is not below `y`.
pub fn cdf(x: &LabeledConfig, y: &LabeledConfig, q: f64, t: f64) -> Result<f64> {
    Ok(cdf_many(x, y, q, &[t])?[0])
}

/// [`cdf`] at several times from a single solve.
pub fn cdf_many(x: &LabeledConfig, y: &LabeledConfig, q: f64, ts: &[f64]) -> Result<Vec<f64>> {
    check_q(q)?;
    if x.len() != y.len() {
        return domain("start and target have different dimensions");
    }
    if let Some(t) = ts.iter().find(|t| !(**t >= 0.0)) {
        return domain(format!("time must be nonnegative, got {t}"));
    }
    if !x.le(y) {
        return Ok(vec![0.0; ts.len()]);
    }
    let dist = finite_time_dist(x, y, q, DEFAULT_MAX_STATES)?;
    Ok(ts.iter().map(|&t| dist.inside_mass(t)).collect())
}

/// `sum over xi in S(k, M) of P_0(xi(t))` for the finite process started with
/// `k_j` species-`j` particles at the origin; `S(k, M)` keeps every species-`j`
/// particle strictly left of `M_{n+1-j}`.
pub fn duality_qmoment(k: &[usize], m: &[i64], q: f64, t: f64) -> Result<f64> {
    check_q(q)?;
    let n = k.len();
    if n == 0 || m.len() != n {
        return domain("k and M must be nonempty and of equal length");
    }
    if k.iter().sum::<usize>() == 0 {
        return domain("at least one particle is required");
    }
    if !(t >= 0.0) {
        return domain(format!("time must be nonnegative, got {t}"));
    }
    let mut start = OccupancyConfig::new(n);
    for (j, &kj) in k.iter().enumerate() {
        start.add(0, j + 1, crate::config::Count::Finite(kj as u32))?;
    }
    let limits: Vec<i64> = (0..n).map(|j| m[n - 1 - j]).collect();
    let inside = |xi: &OccupancyConfig| xi.iter().all(|((s, sp), _)| s < limits[sp - 1]);
    let dist = forward_solve(&start, inside, q, DEFAULT_MAX_STATES)?;
    Ok(dist.inside_mass(t))
}
