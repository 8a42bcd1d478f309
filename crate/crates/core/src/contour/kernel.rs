use itertools::Itertools;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Distance below which a denominator is treated as a pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// `S(a, b) = -(q b - a) / (q a - b)`.
pub fn s_factor(a: Complex64, b: Complex64, q: f64) -> Result<Complex64> {
    let den = q * a - b;
    if den.norm() < POLE_TOLERANCE {
        return Err(Error::NumericalPole(format!("q*{a} = {b}")));
    }
    Ok(-(q * b - a) / den)
}

/// `B(w) = prod_{i<j} (w_i - w_j) / (w_i - q w_j)`.
pub fn b_factor(w: &[Complex64], q: f64) -> Result<Complex64> {
    for (i, a) in w.iter().enumerate() {
        for b in &w[i + 1..] {
            if (a - q * b).norm() < POLE_TOLERANCE {
                return Err(Error::NumericalPole(format!("{a} = q*{b}")));
            }
        }
    }
    Ok(b_raw(w, q))
}

pub(crate) fn b_raw(w: &[Complex64], q: f64) -> Complex64 {
    let mut num = Complex64::new(1.0, 0.0);
    let mut den = Complex64::new(1.0, 0.0);
    for (i, a) in w.iter().enumerate() {
        for b in &w[i + 1..] {
            num *= a - b;
            den *= a - q * b;
        }
    }
    num / den
}

/// `A_sigma(w) = prod over inversions i<j, sigma(i)>sigma(j) of
/// S(w_{sigma(j)}, w_{sigma(i)})`, with `sigma` a 0-based permutation.
pub fn a_sigma(sigma: &[usize], w: &[Complex64], q: f64) -> Result<Complex64> {
    check_perm(sigma, w.len())?;
    let mut out = Complex64::new(1.0, 0.0);
    for i in 0..sigma.len() {
        for j in i + 1..sigma.len() {
            if sigma[i] > sigma[j] {
                out *= s_factor(w[sigma[j]], w[sigma[i]], q)?;
            }
        }
    }
    Ok(out)
}

fn check_perm(sigma: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if sigma.len() != n {
        return domain("permutation and argument lengths differ");
    }
    for &s in sigma {
        if s >= n || std::mem::replace(&mut seen[s], true) {
            return domain(format!("{sigma:?} is not a permutation of 0..{n}"));
        }
    }
    Ok(())
}

/// Every permutation of `0..n` paired with its inverse.
pub(crate) fn permutations_with_inverse(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    (0..n)
        .permutations(n)
        .map(|p| {
            let mut inv = vec![0; n];
            for (i, &s) in p.iter().enumerate() {
                inv[s] = i;
            }
            (p, inv)
        })
        .collect()
}

/// `sum_sigma A_sigma(w_{sigma^{-1}(1)}, ..., w_{sigma^{-1}(n)})`.
pub fn symmetrized_a(w: &[Complex64], q: f64) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    let mut arg = vec![Complex64::new(0.0, 0.0); w.len()];
    for (p, inv) in permutations_with_inverse(w.len()) {
        for (k, a) in arg.iter_mut().enumerate() {
            *a = w[inv[k]];
        }
        total += a_sigma(&p, &arg, q)?;
    }
    Ok(total)
}

/// Unchecked [`symmetrized_a`] over a precomputed permutation table.
pub(crate) fn symmetrized_a_raw(
    w: &[Complex64],
    q: f64,
    perms: &[(Vec<usize>, Vec<usize>)],
) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for (p, inv) in perms {
        let mut term = Complex64::new(1.0, 0.0);
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i] > p[j] {
                    let a = w[inv[p[j]]];
                    let b = w[inv[p[i]]];
                    term *= -(q * b - a) / (q * a - b);
                }
            }
        }
        total += term;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qalg::q_factorial;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn small_cases() {
        assert_eq!(b_factor(&[c(0.3, 1.0)], 0.5).unwrap(), c(1.0, 0.0));
        assert_eq!(b_factor(&[], 0.5).unwrap(), c(1.0, 0.0));
        let w = [c(2.0, 0.0), c(1.0, 0.0)];
        assert!((b_factor(&w, 0.5).unwrap() - c(2.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!(b_factor(&[c(0.5, 0.0), c(1.0, 0.0)], 0.5).is_err());
        assert!(a_sigma(&[0, 0], &w, 0.5).is_err());
        assert_eq!(a_sigma(&[0, 1], &w, 0.5).unwrap(), c(1.0, 0.0));
    }

    fn arb_w(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n)
            .prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect())
    }

    proptest! {
        #[test]
        fn b_is_scale_invariant(w in arb_w(4), s in 0.2f64..3.0, arg in 0.0f64..6.0, q in 0.1f64..0.9) {
            let scale = Complex64::from_polar(s, arg);
            let v: Vec<Complex64> = w.iter().map(|z| z * scale).collect();
            if let (Ok(a), Ok(b)) = (b_factor(&w, q), b_factor(&v, q)) {
                prop_assert!((a - b).norm() <= 1e-9 * (1.0 + a.norm()));
            }
        }

        #[test]
        fn symmetrization_identity(n in 1usize..=4, seed in arb_w(4), q in 0.1f64..0.9) {
            let w = &seed[..n];
            if let (Ok(lhs), Ok(b)) = (symmetrized_a(w, q), b_factor(w, q)) {
                let rhs = b * q_factorial(n).eval(q);
                prop_assert!((lhs - rhs).norm() <= 1e-8 * (1.0 + rhs.norm()), "{lhs} {rhs}");
                let perms = permutations_with_inverse(n);
                prop_assert!((symmetrized_a_raw(w, q, &perms) - lhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
            }
        }
    }
}
