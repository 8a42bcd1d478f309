use std::collections::{BTreeMap, HashMap};

use crate::config::LabeledConfig;
use crate::error::{domain, Error, Result};
use crate::generator::{labeled_jump_rates, labeled_total_rate};
use crate::qalg::{QPolynomial, QRationalFunction};

/// Default cap on the number of states a hitting-probability sweep may visit.
pub const DEFAULT_MAX_HIT_STATES: usize = 100_000;

/// Values carried through the hitting recursion.
pub trait HitWeight: Clone {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
}

impl HitWeight for QRationalFunction {
    fn zero() -> Self {
        QRationalFunction::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
}

impl HitWeight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
}

/// Hitting probabilities of the embedded jump chain, organised by rank.
#[derive(Clone, Debug)]
pub struct HittingTable<W> {
    levels: BTreeMap<i64, HashMap<LabeledConfig, W>>,
}

impl<W: HitWeight> HittingTable<W> {
    pub fn get(&self, z: &LabeledConfig) -> Option<&W> {
        self.levels.get(&z.rank()).and_then(|l| l.get(z))
    }

    pub fn levels(&self) -> impl Iterator<Item = (i64, &HashMap<LabeledConfig, W>)> {
        self.levels.iter().map(|(r, l)| (*r, l))
    }

    /// Sum of the probabilities on each rank level.
    pub fn level_sums(&self) -> Vec<(i64, W)> {
        self.levels
            .iter()
            .map(|(r, l)| (*r, l.values().fold(W::zero(), |a, b| a.add(b))))
            .collect()
    }
}

/// Run the rank recursion `P(z) = sum_{w covered by z} P(w) T(w, z)` from `x`,
/// keeping states accepted by `keep` and stopping after rank `max_rank`.
fn sweep<W: HitWeight>(
    x: &LabeledConfig,
    start: W,
    step: &impl Fn(&W, &QPolynomial, &QPolynomial) -> W,
    keep: impl Fn(&LabeledConfig) -> bool,
    max_rank: i64,
    max_states: usize,
) -> Result<HittingTable<W>> {
    let mut levels: BTreeMap<i64, HashMap<LabeledConfig, W>> = BTreeMap::new();
    let mut current: HashMap<LabeledConfig, W> = HashMap::new();
    current.insert(x.clone(), start);
    let mut rank = x.rank();
    let mut seen = 0usize;
    loop {
        seen += current.len();
        if seen > max_states {
            return Err(Error::Resource(format!(
                "hitting sweep exceeded {max_states} states"
            )));
        }
        if rank == max_rank {
            levels.insert(rank, current);
            break;
        }
        let mut next: HashMap<LabeledConfig, W> = HashMap::new();
        for (w, pw) in &current {
            let lambda = labeled_total_rate(w)?;
            for t in labeled_jump_rates(w) {
                if !keep(&t.target) {
                    continue;
                }
                let contrib = step(pw, &t.rate, &lambda);
                next.entry(t.target)
                    .and_modify(|v| *v = v.add(&contrib))
                    .or_insert(contrib);
            }
        }
        levels.insert(rank, current);
        current = next;
        rank += 1;
    }
    Ok(HittingTable { levels })
}

fn hit<W: HitWeight>(
    x: &LabeledConfig,
    y: &LabeledConfig,
    start: W,
    step: &impl Fn(&W, &QPolynomial, &QPolynomial) -> W,
) -> Result<W> {
    if x.len() != y.len() {
        return domain("start and target have different dimensions");
    }
    if x.is_empty() {
        return domain("empty configuration");
    }
    if !x.le(y) {
        return Ok(W::zero());
    }
    let yb = y.positions().to_vec();
    let table = sweep(
        x,
        start,
        step,
        |z| z.positions().iter().zip(&yb).all(|(a, b)| a <= b),
        y.rank(),
        DEFAULT_MAX_HIT_STATES,
    )?;
    Ok(table.get(y).cloned().unwrap_or_else(W::zero))
}

/// Probability that the process started at `x` ever visits `y`, exact in `q`.
pub fn hitting_prob_symbolic(x: &LabeledConfig, y: &LabeledConfig) -> Result<QRationalFunction> {
    hit(x, y, QRationalFunction::one(), &symbolic_step)
}

fn symbolic_step(w: &QRationalFunction, rate: &QPolynomial, lambda: &QPolynomial) -> QRationalFunction {
    w * &QRationalFunction::new(rate.clone(), lambda.clone()).expect("positive exit rate")
}

/// [`hitting_prob_symbolic`] evaluated in floating point at `q`.
pub fn hitting_prob_numeric(x: &LabeledConfig, y: &LabeledConfig, q: f64) -> Result<f64> {
    crate::numeric::check_q(q)?;
    hit(x, y, 1.0, &|w: &f64, r: &QPolynomial, l: &QPolynomial| w * r.eval(q) / l.eval(q))
}

/// All hitting probabilities from `x` on the first `levels` rank levels.
pub fn hitting_table_symbolic(
    x: &LabeledConfig,
    levels: usize,
) -> Result<HittingTable<QRationalFunction>> {
    if x.is_empty() {
        return domain("empty configuration");
    }
    sweep(
        x,
        QRationalFunction::one(),
        &symbolic_step,
        |_| true,
        x.rank() + levels as i64,
        DEFAULT_MAX_HIT_STATES,
    )
}
