use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use super::forward::cdf_many;
use super::hitting::hitting_prob_symbolic;
use crate::config::{intersection_matrix, IntersectionMatrix, LabeledConfig};
use crate::error::{domain, Result};
use crate::qalg::QRationalFunction;

/// Largest search window (states) for the common-start chain search.
const CHAIN_SEARCH_LIMIT: usize = 2_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct CdfCheck {
    pub q: f64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HitCheck {
    pub lhs: QRationalFunction,
    pub rhs: QRationalFunction,
    pub equal: bool,
}

/// Outcome of comparing two start/target pairs.
#[derive(Clone, Debug, Serialize)]
pub struct ShiftReport {
    pub intersection_equal: bool,
    pub rank_difference_equal: bool,
    /// Whether each pair can be walked, one unit shift of one particle at a
    /// time and without changing the intersection numbers, to a pair whose
    /// starts coincide. `None` when the search window is too large.
    pub common_start_chain: [Option<bool>; 2],
    pub cdf: Vec<CdfCheck>,
    pub hitting: Option<HitCheck>,
    /// Equal intersection numbers and rank differences, yet some distribution
    /// check failed.
    pub invariance_violation: bool,
}

impl ShiftReport {
    pub fn cdf_pass(&self) -> bool {
        self.cdf.iter().all(|c| c.pass)
    }

    pub fn hitting_equal(&self) -> Option<bool> {
        self.hitting.as_ref().map(|h| h.equal)
    }
}

/// Compare `P_x(X(t) <= y)` with `P_{x'}(X(t) <= y')` over a grid of `(q, t)`
/// and, when `symbolic` is set, the exact hitting probabilities.
#[allow(clippy::too_many_arguments)]
pub fn verify_shift(
    x: &LabeledConfig,
    y: &LabeledConfig,
    x2: &LabeledConfig,
    y2: &LabeledConfig,
    qs: &[f64],
    ts: &[f64],
    symbolic: bool,
    tol: f64,
) -> Result<ShiftReport> {
    let n = x.len();
    if [y.len(), x2.len(), y2.len()].iter().any(|&m| m != n) {
        return domain("all four configurations must have the same dimension");
    }
    let i1 = intersection_matrix(x, y)?;
    let i2 = intersection_matrix(x2, y2)?;
    let intersection_equal = i1 == i2;
    let rank_difference_equal = y.rank() - x.rank() == y2.rank() - x2.rank();

    let mut cdf = Vec::new();
    for &q in qs {
        let a = cdf_many(x, y, q, ts)?;
        let b = cdf_many(x2, y2, q, ts)?;
        for (k, &t) in ts.iter().enumerate() {
            cdf.push(CdfCheck {
                q,
                t,
                lhs: a[k],
                rhs: b[k],
                pass: (a[k] - b[k]).abs() < tol,
            });
        }
    }
    let hitting = if symbolic {
        let lhs = hitting_prob_symbolic(x, y)?;
        let rhs = hitting_prob_symbolic(x2, y2)?;
        let equal = lhs == rhs;
        Some(HitCheck { lhs, rhs, equal })
    } else {
        None
    };
    let common_start_chain = [common_start_chain(x, y, &i1), common_start_chain(x2, y2, &i2)];
    let invariance_violation =
        intersection_equal && rank_difference_equal && cdf.iter().any(|c| !c.pass);
    Ok(ShiftReport {
        intersection_equal,
        rank_difference_equal,
        common_start_chain,
        cdf,
        hitting,
        invariance_violation,
    })
}

/// Breadth-first search over unit shifts `(x, y) -> (x +- e_j, y +- e_j)`
/// that keep the intersection numbers, looking for a pair with all starts
/// equal.
fn common_start_chain(x: &LabeledConfig, y: &LabeledConfig, target: &IntersectionMatrix) -> Option<bool> {
    let n = x.len();
    let lengths: Vec<i64> = x
        .positions()
        .iter()
        .zip(y.positions())
        .map(|(a, b)| b - a)
        .collect();
    let span = lengths.iter().copied().max().unwrap_or(0) + n as i64 + 1;
    let lo = x.positions().iter().copied().min()? - span;
    let hi = x.positions().iter().copied().max()? + span;
    let width = (hi - lo + 1) as usize;
    if width.checked_pow(n as u32).is_none_or(|s| s > CHAIN_SEARCH_LIMIT) {
        return None;
    }
    let target_of = |xs: &[i64]| -> LabeledConfig {
        LabeledConfig::new(xs.iter().zip(&lengths).map(|(a, l)| a + l).collect())
    };
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(x.positions().to_vec());
    queue.push_back(x.positions().to_vec());
    while let Some(cur) = queue.pop_front() {
        if cur.iter().all(|&v| v == cur[0]) {
            return Some(true);
        }
        for j in 0..n {
            for d in [-1i64, 1] {
                let mut nx = cur.clone();
                nx[j] += d;
                if nx[j] < lo || nx[j] > hi || seen.contains(&nx) {
                    continue;
                }
                let ny = target_of(&nx);
                let ok = intersection_matrix(&LabeledConfig::new(nx.clone()), &ny)
                    .is_ok_and(|m| &m == target);
                if ok {
                    seen.insert(nx.clone());
                    queue.push_back(nx);
                }
            }
        }
    }
    Some(false)
}
