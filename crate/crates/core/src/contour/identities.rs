use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::formulas::{antisymmetry_check, contour_i, contour_i_tilde, contour_j};
use super::kernel::{b_factor, symmetrized_a};
use super::quad::IntegralResult;
use super::spec::{ContourSpec, DEFAULT_LARGE_RADIUS};
use crate::error::Result;
use crate::qalg::{c_coeff, q_factorial};

/// Tolerance of the identity suite.
pub const IDENTITY_TOLERANCE: f64 = 1e-8;

/// One side-by-side comparison of two expressions that must agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub detail: String,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub difference: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: &str, detail: String, lhs: Complex64, rhs: Complex64) -> Self {
        let difference = (lhs - rhs).norm();
        IdentityCheck {
            name: name.into(),
            detail,
            lhs,
            rhs,
            difference,
            pass: difference < IDENTITY_TOLERANCE,
        }
    }
}

/// Randomized parameters for one run of the suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityParams {
    pub n: usize,
    pub k: usize,
    pub m: Vec<i64>,
    pub x: Vec<i64>,
}

impl IdentityParams {
    /// `N` in `2..=3`, `1 <= K < N`, nonincreasing bounds in `0..4` and
    /// fixed positions in `0..3`.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=3usize);
        let k = rng.random_range(1..n);
        let mut m: Vec<i64> = (0..n - k).map(|_| rng.random_range(0..4)).collect();
        m.sort_unstable_by(|a, b| b.cmp(a));
        let x = (0..k).map(|_| rng.random_range(0..3)).collect();
        IdentityParams { n, k, m, x }
    }
}

fn mixed(q: f64, large: usize, total: usize) -> Result<ContourSpec> {
    Ok(ContourSpec::mixed(q, large, total - large, 8)?.with_auto_nodes(q, large))
}

fn large(q: f64, n: usize) -> ContourSpec {
    ContourSpec::large(n, DEFAULT_LARGE_RADIUS, 8).with_auto_nodes(q, n)
}

/// Every contour identity at the parameters drawn from `seed`:
///
/// * the sum over `L` of the large-contour terms equals the small-contour
///   integral,
/// * the all-large term with `L = N` is `c(q, N, K, N - K)` times the mixed
///   integral with `N - K` large circles,
/// * `J(K, L, P - 1) = J(K, L, P) + q^{P-L} J(K, L - 1, P - 1)` with the
///   `P`-th bound removed,
/// * antisymmetric integrands integrate to zero over identical circles,
/// * the symmetrized `A` kernel is `[N]_q!` times `B`.
pub fn identity_suite(q: f64, t: f64, seed: u64) -> Result<Vec<IdentityCheck>> {
    let IdentityParams { n, k, m, x } = IdentityParams::random(seed);
    let tag = format!("N={n} K={k} M={m:?} x={x:?} q={q} t={t}");
    let mut out = Vec::new();

    let mut sum = IntegralResult::default();
    for l in k..=n {
        sum = sum + contour_i(n, l, k, &m, &x, t, q, &large(q, l))?;
    }
    let small = ContourSpec::small(q, n, 8)?.with_auto_nodes(q, 0);
    let tilde = contour_i_tilde(n, k, &m, &x, t, q, &small)?;
    out.push(IdentityCheck::new("sum-of-large-terms", tag.clone(), sum.value, tilde.value));

    let all_large = contour_i(n, n, k, &m, &x, t, q, &large(q, n))?;
    let j = contour_j(k, n, n - k, &m, &x, t, q, &mixed(q, n - k, n)?)?;
    let c = c_coeff(n, k, n - k)?.eval(q);
    out.push(IdentityCheck::new("large-term-as-mixed", tag.clone(), all_large.value, j.value * c));

    for p in 1..=n - k {
        let lhs = contour_j(k, n, p - 1, &m, &x, t, q, &mixed(q, p - 1, n)?)?;
        let a = contour_j(k, n, p, &m, &x, t, q, &mixed(q, p, n)?)?;
        let mut rest = m.clone();
        rest.remove(p - 1);
        let b = contour_j(k, n - 1, p - 1, &rest, &x, t, q, &mixed(q, p - 1, n - 1)?)?;
        let rhs = a.value + q.powi(p as i32 - n as i32) * b.value;
        out.push(IdentityCheck::new("recursion", format!("{tag} P={p}"), lhs.value, rhs));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let kk = rng.random_range(1..n);
    let mut e: Vec<i64> = (0..n).map(|_| rng.random_range(0..4)).collect();
    e[kk] = e[kk - 1];
    let r = antisymmetry_check(kk, &e, t, q, &large(q, n))?;
    out.push(IdentityCheck::new(
        "antisymmetry",
        format!("k={kk} e={e:?} q={q} t={t}"),
        Complex64::new(r, 0.0),
        Complex64::new(0.0, 0.0),
    ));

    let w: Vec<Complex64> = (0..n)
        .map(|_| Complex64::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let lhs = symmetrized_a(&w, q)?;
    let rhs = b_factor(&w, q)? * q_factorial(n).eval(q);
    out.push(IdentityCheck::new("symmetrization", format!("w={w:?} q={q}"), lhs, rhs));
    Ok(out)
}
