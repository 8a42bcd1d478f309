//! Diffusive-scaling limit of the joint q-moments.
//!
//! With `t = L` and `M_j = L + sigma_j L^{1/2}`, the small-contour q-moment
//! tends to
//!
//! ```text
//! q^{N(N-1)/2} (2 pi)^{-N} int B(u) prod_j (i / u_j) exp(-i sigma_j u_j - u_j^2 / 2) du
//! ```
//!
//! over the horizontal lines `Im u_j = delta_j`, the image of the nested
//! circles near 1. The lines are ordered like the circles, so the poles of
//! `B` at `u_i = q u_j` and the pole of `1 / u_j` at 0 all stay off the
//! contour. [`limit_density`] drops the `i / u_j` factors, which amounts to
//! differentiating once in every `sigma_j`, and is normalized so that the
//! one-particle density is `exp(-sigma^2 / 2)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{integrate_b, Circle, ContourSpec, Grid, IntegralResult};
use crate::error::{domain, Error, Result};
use crate::numeric::check_q;

/// Largest particle count accepted by the line quadrature.
pub const MAX_LIMIT_PARTICLES: usize = 4;

/// Target truncation and discretization error of the line quadrature.
pub const LINE_TOLERANCE: f64 = 1e-14;

/// Upper bound on the trapezoid step along the lines.
pub const MAX_STEP: f64 = 0.05;

/// Tensor grids larger than this are refused.
pub const MAX_POINTS: f64 = 1e9;

/// Node count bounds for the finite-`L` contours.
pub const MIN_FINITE_NODES: usize = 64;
pub const MAX_FINITE_NODES: usize = 16384;

/// Largest imaginary part tolerated in a real-valued result.
const IMAG_TOLERANCE: f64 = 1e-6;

/// Trapezoid rule on the shifted lines `Im u_j = shifts[j]`, sampled at
/// `-half_width + k * step`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineRule {
    pub shifts: Vec<f64>,
    pub step: f64,
    pub half_width: f64,
}

impl LineRule {
    /// Shifts `delta_1 < ... < delta_N = 1` with equal clearances `delta_1`
    /// and `q delta_{j+1} - delta_j`, and a step that resolves that clearance.
    pub fn new(sigma: &[f64], q: f64) -> Result<Self> {
        check_query(sigma, q)?;
        let n = sigma.len();
        let mut s = vec![1.0f64];
        for _ in 1..n {
            let last = s[s.len() - 1];
            s.push((last + 1.0) / q);
        }
        let top = s[n - 1];
        let shifts: Vec<f64> = s.iter().map(|v| v / top).collect();
        let gap = shifts[0];
        let step = (TAU * gap / (1.0 / LINE_TOLERANCE).ln()).min(MAX_STEP);
        let reach = sigma.iter().fold(0.0f64, |a, s| a.max(s.abs()));
        Ok(LineRule {
            shifts,
            step,
            half_width: (reach + 8.0).max(8.0),
        })
    }

    pub fn points_per_line(&self) -> usize {
        // a multiple of 4 keeps the error estimate on nested subgrids
        let n = (2.0 * self.half_width / self.step).ceil() as usize + 1;
        n.div_ceil(4) * 4
    }
}

fn check_query(sigma: &[f64], q: f64) -> Result<()> {
    check_q(q)?;
    if sigma.is_empty() || sigma.len() > MAX_LIMIT_PARTICLES {
        return domain(format!(
            "sigma must have between 1 and {MAX_LIMIT_PARTICLES} entries, got {}",
            sigma.len()
        ));
    }
    if sigma.iter().any(|s| !s.is_finite()) {
        return domain("sigma entries must be finite");
    }
    Ok(())
}

fn line_integral(sigma: &[f64], q: f64, rule: &LineRule, antiderivative: bool) -> Result<IntegralResult> {
    let n = sigma.len();
    let pts = rule.points_per_line();
    if (pts as f64).powi(n as i32) > MAX_POINTS {
        return Err(Error::Resource(format!(
            "line quadrature needs {pts}^{n} points; reduce the particle count or raise q"
        )));
    }
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut factors = Vec::with_capacity(n);
    for (j, &delta) in rule.shifts.iter().enumerate() {
        let u: Vec<Complex64> = (0..pts)
            .map(|k| Complex64::new(-rule.half_width + k as f64 * rule.step, delta))
            .collect();
        let f: Vec<Complex64> = u
            .iter()
            .map(|&u| {
                let g = (-Complex64::i() * sigma[j] * u - u * u / 2.0).exp();
                if antiderivative {
                    g * Complex64::i() / u
                } else {
                    g
                }
            })
            .collect();
        weights.push(vec![Complex64::new(rule.step, 0.0); pts]);
        factors.push(f);
        nodes.push(u);
    }
    let grid = Grid::from_parts(nodes, weights);
    let r = integrate_b(&grid, &factors, q)?;
    Ok(r.scaled(q.powi((n * (n - 1) / 2) as i32)))
}

fn real_part(r: IntegralResult, what: &str) -> Result<f64> {
    if r.value.im.abs() > IMAG_TOLERANCE {
        return Err(Error::Consistency(format!(
            "{what} has imaginary part {:e}",
            r.value.im
        )));
    }
    Ok(r.value.re)
}

/// Limit density, normalized so that the one-particle case is
/// `exp(-sigma^2 / 2)`.
pub fn limit_density(sigma: &[f64], q: f64) -> Result<f64> {
    let rule = LineRule::new(sigma, q)?;
    limit_density_with(sigma, q, &rule)
}

/// [`limit_density`] with an explicit line rule.
pub fn limit_density_with(sigma: &[f64], q: f64, rule: &LineRule) -> Result<f64> {
    check_query(sigma, q)?;
    let r = line_integral(sigma, q, rule, false)?;
    let norm = TAU.powf(-(sigma.len() as f64) / 2.0);
    real_part(r.scaled(norm), "limit density")
}

/// Limit of the joint q-moment: `(2 pi)^{-N/2}` times the iterated integral
/// of [`limit_density`] over `(-inf, sigma_1] x ... x (-inf, sigma_N]`. The
/// antiderivative is taken in closed form under the integral sign, which is
/// where the `i / u_j` factors come from.
pub fn limit_qmoment(sigma: &[f64], q: f64) -> Result<f64> {
    let rule = LineRule::new(sigma, q)?;
    limit_qmoment_with(sigma, q, &rule)
}

/// [`limit_qmoment`] with an explicit line rule.
pub fn limit_qmoment_with(sigma: &[f64], q: f64, rule: &LineRule) -> Result<f64> {
    check_query(sigma, q)?;
    let r = line_integral(sigma, q, rule, true)?;
    let norm = TAU.powi(-(sigma.len() as i32));
    real_part(r.scaled(norm), "limit q-moment")
}

/// `M_j = floor(L + sigma_j L^{1/2})`.
pub fn finite_l_exponents(sigma: &[f64], l: f64) -> Vec<i64> {
    sigma.iter().map(|s| (l + s * l.sqrt()).floor() as i64).collect()
}

/// Circles centered at 1 with radii `1 - eps_j`, where
/// `eps_j = (q/2)^{N-j} L^{-1/2}`: they pass within `O(L^{-1/2})` of 0,
/// where the integrand concentrates, and still nest as small contours.
pub fn finite_l_contours(n: usize, q: f64, l: f64, nodes: usize) -> ContourSpec {
    let circles = (0..n)
        .map(|j| {
            let eps = (q / 2.0).powi((n - 1 - j) as i32) / l.sqrt();
            Circle::new(Complex64::new(1.0, 0.0), 1.0 - eps)
        })
        .collect();
    ContourSpec {
        circles,
        nodes_per_circle: nodes,
    }
}

/// The q-moment at `t = L`, `M_j = floor(L + sigma_j L^{1/2})`:
/// `(-1)^N q^{N(N-1)/2} (2 pi i)^{-N} int B(w) prod_j (1 - w_j)^{-M_j} e^{-w_j t} dw_j / w_j`
/// on [`finite_l_contours`]. `nodes = None` picks the node count from the
/// contour geometry.
pub fn finite_l_qmoment(sigma: &[f64], q: f64, l: f64, nodes: Option<usize>) -> Result<IntegralResult> {
    check_query(sigma, q)?;
    if !(l >= 1.0 && l.is_finite()) {
        return domain(format!("L must be at least 1, got {l}"));
    }
    let n = sigma.len();
    let m = finite_l_exponents(sigma, l);
    if m.iter().any(|&v| v < 0) {
        return domain("sigma is too negative for this L");
    }
    let mut spec = finite_l_contours(n, q, l, 8);
    spec.check_small(q)?;
    spec.nodes_per_circle = match nodes {
        Some(k) => k,
        None => finite_nodes(&spec, q),
    };
    spec.check_small(q)?;
    if (spec.nodes_per_circle as f64).powi(n as i32) > MAX_POINTS {
        return Err(Error::Resource(format!(
            "finite-L contour needs {}^{n} points",
            spec.nodes_per_circle
        )));
    }
    let grid = Grid::new(&spec);
    // log form: |1 - w|^{-M} and e^{-wt} separately over- and underflow
    let factors: Vec<Vec<Complex64>> = grid
        .nodes
        .iter()
        .zip(&m)
        .map(|(ws, &mj)| {
            ws.iter()
                .map(|&w| (-(mj as f64) * (1.0 - w).ln() - w * l).exp() / w)
                .collect()
        })
        .collect();
    let r = integrate_b(&grid, &factors, q)?;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(r.scaled(sign * q.powi((n * (n - 1) / 2) as i32)))
}

fn finite_nodes(spec: &ContourSpec, q: f64) -> usize {
    let rate = spec.convergence_rate(q, 0);
    let n = if rate < 1.0 {
        (LINE_TOLERANCE.ln() / rate.ln()).ceil() as usize
    } else {
        MAX_FINITE_NODES
    };
    n.div_ceil(8).saturating_mul(8).clamp(MIN_FINITE_NODES, MAX_FINITE_NODES)
}

/// One row of a finite-`L` convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteLPoint {
    pub l: f64,
    pub exponents: Vec<i64>,
    pub value: f64,
    pub est_error: f64,
    pub distance_to_limit: f64,
}

/// Finite-`L` q-moments at each `L` in `ls`, with their distance to
/// [`limit_qmoment`].
pub fn convergence_study(sigma: &[f64], q: f64, ls: &[f64]) -> Result<(f64, Vec<FiniteLPoint>)> {
    let limit = limit_qmoment(sigma, q)?;
    let mut rows = Vec::with_capacity(ls.len());
    for &l in ls {
        let r = finite_l_qmoment(sigma, q, l, None)?;
        let value = real_part(r, "finite-L q-moment")?;
        rows.push(FiniteLPoint {
            l,
            exponents: finite_l_exponents(sigma, l),
            value,
            est_error: r.est_error,
            distance_to_limit: (value - limit).abs(),
        });
    }
    Ok((limit, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{b_raw, qmoment_from_exponents};
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn one_particle_density_is_gaussian() {
        for s in [-2.0, 0.0, 1.0, 3.0] {
            let want = (-s * s / 2.0f64).exp();
            for q in [0.3, 0.6, 0.8] {
                let got = limit_density(&[s], q).unwrap();
                assert!((got - want).abs() < 1e-10, "sigma={s} q={q}: {got} vs {want}");
            }
        }
        assert!((limit_density(&[0.0], 0.5).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_particle_moment_is_the_normal_cdf() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        for s in [-3.0, -0.5, 0.0, 0.5, 2.0] {
            let a = limit_qmoment(&[s], 0.3).unwrap();
            let b = limit_qmoment(&[s], 0.8).unwrap();
            assert!((a - normal.cdf(s)).abs() < 1e-10, "{s}: {a}");
            assert!((a - b).abs() < 1e-10);
        }
        assert!(limit_qmoment(&[9.0], 0.5).unwrap() > 1.0 - 1e-12);
        assert!(limit_qmoment(&[-9.0], 0.5).unwrap() < 1e-12);
        assert!((limit_qmoment(&[0.0], 0.5).unwrap() - 0.5).abs() < 1e-12);
    }

    /// Composite Gauss-Legendre on the lines `Im u_j = c delta_j`.
    fn gauss_legendre_density(sigma: &[f64; 2], q: f64, c: f64) -> Complex64 {
        // 8-point rule on [-1, 1]
        let xg = [
            0.1834346424956498, 0.525532409916329, 0.7966664774136267, 0.9602898564975363,
        ];
        let wg = [
            0.362683783378362, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763,
        ];
        let rule = LineRule::new(sigma, q).unwrap();
        let (a, panels) = (10.0, 800usize);
        let hw = a / panels as f64;
        let mut pts = Vec::new();
        for p in 0..panels {
            let mid = -a + (2 * p + 1) as f64 * hw;
            for k in 0..4 {
                pts.push((mid + hw * xg[k], hw * wg[k]));
                pts.push((mid - hw * xg[k], hw * wg[k]));
            }
        }
        let line = |j: usize| -> Vec<(Complex64, Complex64)> {
            pts.iter()
                .map(|&(x, w)| {
                    let u = Complex64::new(x, c * rule.shifts[j]);
                    (u, w * (-Complex64::i() * sigma[j] * u - u * u / 2.0).exp())
                })
                .collect()
        };
        let (l0, l1) = (line(0), line(1));
        let mut acc = Complex64::new(0.0, 0.0);
        for &(u0, f0) in &l0 {
            for &(u1, f1) in &l1 {
                acc += b_raw(&[u0, u1], q) * f0 * f1;
            }
        }
        acc * q / TAU
    }

    #[test]
    fn two_particle_density_matches_gauss_legendre() {
        let want = gauss_legendre_density(&[0.0, 0.0], 0.6, 0.7);
        assert!(want.im.abs() < 1e-10);
        let got = limit_density(&[0.0, 0.0], 0.6).unwrap();
        assert!((got - want.re).abs() < 1e-8, "{got} vs {}", want.re);
    }

    #[test]
    fn limit_moment_is_monotone() {
        let grid = [-1.0, 0.0, 1.0, 2.0];
        for &a in &grid {
            let mut last = f64::NEG_INFINITY;
            for &b in &grid {
                let v = limit_qmoment(&[a, b], 0.6).unwrap();
                assert!(v >= last - 1e-12, "({a},{b})");
                last = v;
            }
        }
        let lo = limit_qmoment(&[0.0, 1.0], 0.6).unwrap();
        let hi = limit_qmoment(&[1.0, 1.0], 0.6).unwrap();
        assert!(lo <= hi);
    }

    #[test]
    fn density_is_the_mixed_derivative_of_the_moment() {
        let (s, q, h) = ([0.4, -0.2], 0.6, 1e-3);
        let f = |a: f64, b: f64| limit_qmoment(&[s[0] + a, s[1] + b], q).unwrap();
        let mixed = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
        let want = limit_density(&s, q).unwrap() / TAU;
        assert!((mixed - want).abs() < 1e-5, "{mixed} vs {want}");
    }

    #[test]
    fn finite_l_contours_agree_with_nested_small_contours() {
        let (q, l) = (0.6, 20.0);
        let sigma = [0.5, 0.5];
        let m = finite_l_exponents(&sigma, l);
        let a = finite_l_qmoment(&sigma, q, l, None).unwrap();
        let spec = ContourSpec::small(q, 2, 8).unwrap().with_auto_nodes(q, 0);
        let b = qmoment_from_exponents(&m, l, q, &spec).unwrap();
        assert!((a.value - b.value).norm() < 1e-9, "{} vs {}", a.value, b.value);
    }

    #[test]
    fn finite_l_moments_approach_the_limit() {
        let (limit, rows) = convergence_study(&[1.0, 1.0], 0.6, &[100.0, 400.0, 1600.0]).unwrap();
        assert!((limit - 0.75525173106).abs() < 1e-9, "{limit}");
        for w in rows.windows(2) {
            assert!(w[1].distance_to_limit < w[0].distance_to_limit);
            // consistent with an L^{-1/2} rate: quadrupling L roughly halves the gap
            let ratio = w[0].distance_to_limit / w[1].distance_to_limit;
            assert!(ratio > 1.5 && ratio < 2.7, "{ratio}");
        }
        for r in &rows {
            assert!(r.est_error < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_queries() {
        assert!(limit_density(&[], 0.5).is_err());
        assert!(limit_density(&[0.0; 5], 0.5).is_err());
        assert!(limit_qmoment(&[f64::NAN], 0.5).is_err());
        assert!(limit_qmoment(&[0.0], 1.5).is_err());
        assert!(finite_l_qmoment(&[0.0], 0.5, 0.5, None).is_err());
    }
}
