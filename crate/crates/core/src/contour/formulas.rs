use itertools::Itertools;
use num_complex::Complex64;

use super::kernel::{b_raw, permutations_with_inverse, symmetrized_a_raw};
use super::quad::{integrate, integrate_b, Grid, IntegralResult};
use super::spec::{ContourSpec, DEFAULT_LARGE_RADIUS, DEFAULT_NODES};
use crate::config::{
    canonical_order, intersection_matrix, inversions, multiplicity_factor, LabeledConfig,
    OrderedConfig,
};
use crate::error::{domain, Error, Result};
use crate::numeric::check_q;
use crate::qalg::{c_coeff, q_factorial};

/// Largest particle count accepted by [`transition_prob_contour`].
pub const MAX_TRANSITION_PARTICLES: usize = 5;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn check_t(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        domain(format!("time must be finite and nonnegative, got {t}"))
    }
}

fn check_dim(spec: &ContourSpec, n: usize) -> Result<()> {
    if spec.dim() != n {
        return Err(Error::Contour(format!(
            "{} circles given for {n} variables",
            spec.dim()
        )));
    }
    Ok(())
}

/// `(1 - w)^{-e} e^{-w t}` at every node of `circle`, optionally divided by `w`.
fn power_factor(nodes: &[Complex64], e: i64, t: f64, over_w: bool) -> Vec<Complex64> {
    nodes
        .iter()
        .map(|&w| {
            let mut v = (one() - w).powi(-(e as i32)) * (-w * t).exp();
            if over_w {
                v /= w;
            }
            v
        })
        .collect()
}

/// Permutation listing the indices of `x` by decreasing value, ties broken
/// by index, which is the sorting permutation with fewest inversions.
pub fn sorting_permutation(x: &[i64]) -> Vec<usize> {
    (0..x.len()).sorted_by_key(|&i| (-x[i], i)).collect()
}

/// `P_0((x, sigma) at time t)` for particles all started at the origin, by
/// quadrature over large circles of the symmetrized integrand
/// `([N]_q!)^{-1} sum_omega A_omega(w_{omega^{-1}(1)}, ...)` (equal to `B(w)`).
pub fn transition_prob_contour(
    x: &OrderedConfig,
    t: f64,
    q: f64,
    spec: &ContourSpec,
) -> Result<IntegralResult> {
    check_q(q)?;
    check_t(t)?;
    let n = x.len();
    if n > MAX_TRANSITION_PARTICLES {
        return Err(Error::Resource(format!(
            "{n} particles exceed the symmetrization limit of {MAX_TRANSITION_PARTICLES}"
        )));
    }
    check_dim(spec, n)?;
    spec.check_large()?;
    if x.x().iter().any(|&v| v < 0) {
        return Ok(IntegralResult::default());
    }
    let grid = Grid::new(spec);
    let factors: Vec<Vec<Complex64>> = x
        .x()
        .iter()
        .zip(&grid.nodes)
        .map(|(&xj, nodes)| power_factor(nodes, xj + 1, t, false))
        .collect();
    let perms = permutations_with_inverse(n);
    let raw = integrate(spec, &grid, &factors, |w| symmetrized_a_raw(w, q, &perms))?;
    let prefactor = q.powi(x.inversions() as i32) * multiplicity_factor(x).eval_f64(q)?
        / q_factorial(n).eval(q)
        * if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(raw.scaled(prefactor))
}

/// [`transition_prob_contour`] for one particle per species at `z`, on the
/// default large circles.
pub fn transition_prob_labeled(z: &LabeledConfig, t: f64, q: f64, nodes: usize) -> Result<f64> {
    let particles: Vec<(i64, usize)> = z
        .positions()
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i + 1))
        .collect();
    let oc = canonical_order(&particles, z.len())?;
    let spec = ContourSpec::large(z.len(), DEFAULT_LARGE_RADIUS, nodes);
    transition_prob_contour(&oc, t, q, &spec)?.probability()
}

/// Joint q-moment `E[prod_j q^{k_j N^{(n+1-j)}}]` for the process started
/// from piles of each species; `intervals[m] = (y_m, x_m)` contributes
/// `k_m` exponents `M = x_m - y_m`.
pub fn qmoment_contour(
    k: &[usize],
    intervals: &[(i64, i64)],
    t: f64,
    q: f64,
    spec: &ContourSpec,
) -> Result<IntegralResult> {
    if k.len() != intervals.len() {
        return domain("k and the intervals must have equal length");
    }
    let mut m = Vec::new();
    for (&km, &(y, x)) in k.iter().zip(intervals) {
        m.extend(std::iter::repeat_n(x - y, km));
    }
    qmoment_from_exponents(&m, t, q, spec)
}

/// The small-contour q-moment integral with exponents `M_1 >= M_2 >= ...`.
pub fn qmoment_from_exponents(m: &[i64], t: f64, q: f64, spec: &ContourSpec) -> Result<IntegralResult> {
    check_q(q)?;
    check_t(t)?;
    let n = m.len();
    if n == 0 {
        return domain("at least one exponent is required");
    }
    if m.iter().any(|&v| v < 0) {
        return domain(format!("exponents must be nonnegative, got {m:?}"));
    }
    if m.windows(2).any(|w| w[0] < w[1]) {
        return domain(format!("exponents must be nonincreasing, got {m:?}"));
    }
    check_dim(spec, n)?;
    spec.check_small(q)?;
    let grid = Grid::new(spec);
    let factors: Vec<Vec<Complex64>> = m
        .iter()
        .zip(&grid.nodes)
        .map(|(&mj, nodes)| power_factor(nodes, mj, t, true))
        .collect();
    let raw = integrate_b(&grid, &factors, q)?;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(raw.scaled(sign * q.powi((n * (n - 1) / 2) as i32)))
}

/// Which contour formula, if any, gives `P_x(X(t) <= y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CdfRoute {
    /// Intersection numbers match a common start with nondecreasing interval
    /// lengths; the q-moment formula applies with these exponents.
    Moment(Vec<i64>),
    /// Common start: sum transition probabilities over the box.
    TransitionSum,
}

/// Decide whether `P_x(X(t) <= y)` has a contour formula.
pub fn cdf_route(x: &LabeledConfig, y: &LabeledConfig) -> Result<Option<CdfRoute>> {
    let ix = intersection_matrix(x, y)?;
    let lengths: Vec<i64> = ix.lengths().iter().map(|&l| l as i64).collect();
    if lengths.windows(2).all(|w| w[0] <= w[1]) {
        let base = LabeledConfig::new(vec![0; x.len()]);
        let top = LabeledConfig::new(lengths.iter().map(|l| l - 1).collect());
        if intersection_matrix(&base, &top)? == ix {
            return Ok(Some(CdfRoute::Moment(lengths.iter().rev().copied().collect())));
        }
    }
    let p = x.positions();
    if p.iter().all(|&v| v == p[0]) {
        return Ok(Some(CdfRoute::TransitionSum));
    }
    Ok(None)
}

/// `P_x(X(t) <= y)` by contour integration, when [`cdf_route`] finds a
/// formula. `nodes = None` picks the node count from the contour geometry.
pub fn cdf_contour(
    x: &LabeledConfig,
    y: &LabeledConfig,
    t: f64,
    q: f64,
    nodes: Option<usize>,
) -> Result<f64> {
    check_q(q)?;
    check_t(t)?;
    if x.len() != y.len() || x.is_empty() {
        return domain("start and target must be nonempty and of equal length");
    }
    if !x.le(y) {
        return Ok(0.0);
    }
    match cdf_route(x, y)? {
        Some(CdfRoute::Moment(m)) => {
            let mut spec = ContourSpec::small(q, m.len(), DEFAULT_NODES)?;
            spec.nodes_per_circle = nodes.unwrap_or_else(|| spec.auto_nodes(q, 0));
            qmoment_from_exponents(&m, t, q, &spec)?.probability()
        }
        Some(CdfRoute::TransitionSum) => {
            let origin = x.positions()[0];
            let mut spec = ContourSpec::large(x.len(), DEFAULT_LARGE_RADIUS, DEFAULT_NODES);
            spec.nodes_per_circle = nodes.unwrap_or_else(|| spec.auto_nodes(q, x.len()));
            let mut total = IntegralResult::default();
            for z in y
                .positions()
                .iter()
                .map(|&b| 0..=b - origin)
                .multi_cartesian_product()
            {
                let particles: Vec<(i64, usize)> =
                    z.iter().enumerate().map(|(i, &s)| (s, i + 1)).collect();
                let oc = canonical_order(&particles, z.len())?;
                total = total + transition_prob_contour(&oc, t, q, &spec)?;
            }
            total.probability()
        }
        None => domain(format!(
            "no contour formula for the start {:?} and target {:?}",
            x.positions(),
            y.positions()
        )),
    }
}

/// Exponent data of the mixed integral: `m` feeds the first `L - K`
/// variables as `(1 - w)^{-M-1} / w`, the ordered `x` the last `K` as
/// `(1 - w)^{-x-1}`.
fn mixed_factors(grid: &Grid, m: &[i64], xs: &[i64], t: f64) -> Vec<Vec<Complex64>> {
    let lead = m.len();
    grid.nodes
        .iter()
        .enumerate()
        .map(|(j, nodes)| {
            if j < lead {
                power_factor(nodes, m[j] + 1, t, true)
            } else {
                power_factor(nodes, xs[j - lead] + 1, t, false)
            }
        })
        .collect()
}

fn fixed_part(x: &[i64]) -> Result<(Vec<i64>, usize)> {
    if x.iter().any(|&v| v < 0) {
        return domain(format!("fixed positions must be nonnegative, got {x:?}"));
    }
    let sigma = sorting_permutation(x);
    let xs = sigma.iter().map(|&i| x[i]).collect();
    Ok((xs, inversions(&sigma)))
}

/// `q^{inv sigma} (-1)^L (2 pi i)^{-L}` times the integral of
/// `B(w_1..w_L) prod_{j <= L-K} (1-w_j)^{-M_j-1}/w_j prod_{j > L-K}
/// (1-w_j)^{-xbar-1} e^{-w_j t}` with the first `P` circles large and the
/// rest small. `m` holds `M_1..M_{L-K}` and `x` the `K` fixed positions.
#[allow(clippy::too_many_arguments)]
pub fn contour_j(
    k: usize,
    l: usize,
    p: usize,
    m: &[i64],
    x: &[i64],
    t: f64,
    q: f64,
    spec: &ContourSpec,
) -> Result<IntegralResult> {
    check_q(q)?;
    check_t(t)?;
    if x.len() != k || l < k || m.len() != l - k || p > l {
        return domain(format!(
            "J needs K = {k} positions, {} exponents and P <= L = {l}",
            l.saturating_sub(k)
        ));
    }
    check_dim(spec, l)?;
    spec.check_mixed(q, p)?;
    let (xs, inv) = fixed_part(x)?;
    let grid = Grid::new(spec);
    let factors = mixed_factors(&grid, m, &xs, t);
    let raw = integrate_b(&grid, &factors, q)?;
    let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(raw.scaled(sign * q.powi(inv as i32)))
}

/// Large-contour term for `L` variables. `m` holds the `N - K` bounds
/// `M_1..M_{N-K}`. Each choice of `L - K` indices `K <= i_1 < ... < N` picks
/// the bounds `M_{N-i}` and carries the weight `q^{i_1 + ...}`; when all
/// bounds coincide the sum collapses to `c(q, N, K, L - K)` times one
/// integral.
#[allow(clippy::too_many_arguments)]
pub fn contour_i(
    n: usize,
    l: usize,
    k: usize,
    m: &[i64],
    x: &[i64],
    t: f64,
    q: f64,
    spec: &ContourSpec,
) -> Result<IntegralResult> {
    check_q(q)?;
    check_t(t)?;
    if k > l || l > n || m.len() != n - k || x.len() != k {
        return domain(format!(
            "I needs K <= L <= N, N - K bounds and K positions (N={n}, L={l}, K={k})"
        ));
    }
    check_dim(spec, l)?;
    spec.check_large()?;
    let (xs, inv) = fixed_part(x)?;
    let grid = Grid::new(spec);
    let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut total = IntegralResult::default();
    let mut cache: Vec<(Vec<i64>, IntegralResult)> = Vec::new();
    for subset in (k..n).combinations(l - k) {
        let weight = q.powi(subset.iter().sum::<usize>() as i32);
        let mut bounds: Vec<i64> = subset.iter().map(|&i| m[n - i - 1]).collect();
        bounds.reverse();
        let value = match cache.iter().find(|(b, _)| *b == bounds) {
            Some((_, v)) => *v,
            None => {
                let factors = mixed_factors(&grid, &bounds, &xs, t);
                let v = integrate_b(&grid, &factors, q)?;
                cache.push((bounds, v));
                v
            }
        };
        total = total + value.scaled(weight);
    }
    Ok(total.scaled(sign * q.powi(inv as i32)))
}

/// Small-contour integral `c(q, N, K, N - K) J(K, N, 0)`.
pub fn contour_i_tilde(
    n: usize,
    k: usize,
    m: &[i64],
    x: &[i64],
    t: f64,
    q: f64,
    spec: &ContourSpec,
) -> Result<IntegralResult> {
    if k > n {
        return domain(format!("K = {k} exceeds N = {n}"));
    }
    let c = c_coeff(n, k, n - k)?.eval(q);
    Ok(contour_j(k, n, 0, m, x, t, q, spec)?.scaled(c))
}

/// Modulus of the integral of `B(w) (q^{-(k+1)}/w_{k+1} - q^{-k}/w_k)
/// prod_j (1 - w_j)^{-e_j-1} e^{-w_j t}` over large circles, which vanishes
/// when `e_k = e_{k+1}` because the integrand is then antisymmetric in
/// `w_k, w_{k+1}`. `k` is 1-based.
pub fn antisymmetry_check(k: usize, e: &[i64], t: f64, q: f64, spec: &ContourSpec) -> Result<f64> {
    check_q(q)?;
    check_t(t)?;
    let n = e.len();
    if k == 0 || k >= n {
        return domain(format!("need 1 <= k < N, got k = {k}, N = {n}"));
    }
    if e[k - 1] != e[k] {
        return domain(format!("exponents {} and {} must agree", e[k - 1], e[k]));
    }
    check_dim(spec, n)?;
    spec.check_large()?;
    let grid = Grid::new(spec);
    let factors: Vec<Vec<Complex64>> = e
        .iter()
        .zip(&grid.nodes)
        .map(|(&ej, nodes)| power_factor(nodes, ej + 1, t, false))
        .collect();
    let a = q.powi(-(k as i32 + 1));
    let b = q.powi(-(k as i32));
    let raw = integrate(spec, &grid, &factors, |w| {
        b_raw(w, q) * (a / w[k] - b / w[k - 1])
    })?;
    Ok(raw.value.norm())
}
