use std::collections::BTreeMap;

use crate::numeric::compensated_sum;
use crate::qalg::QPolynomial;

/// Coincidence threshold for decay rates whose exact keys differ but whose
/// numeric values agree. Below it the repeated-rate formula is used.
const RATE_TIE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
struct Term {
    mu: f64,
    /// `coeffs[j]` multiplies `t^j`.
    coeffs: Vec<f64>,
}

/// A finite sum `sum_k e^{-mu_k t} p_k(t)`.
///
/// Each exponential is keyed by the exact polynomial in `q` that produced its
/// rate, so repeated rates are recognised structurally and give polynomial
/// factors rather than near-singular divisions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpPoly {
    terms: BTreeMap<QPolynomial, Term>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `e^{-rate t}`.
    pub fn exp(rate: &QPolynomial, q: f64) -> Self {
        let mut out = Self::zero();
        out.terms.insert(
            rate.clone(),
            Term {
                mu: rate.eval(q),
                coeffs: vec![1.0],
            },
        );
        out
    }

    pub fn constant(c: f64) -> Self {
        let mut out = Self::exp(&QPolynomial::zero(), 0.5);
        out.terms.get_mut(&QPolynomial::zero()).unwrap().coeffs[0] = c;
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of distinct exponentials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(rate key, mu, polynomial coefficients)` per exponential.
    pub fn terms(&self) -> impl Iterator<Item = (&QPolynomial, f64, &[f64])> {
        self.terms.iter().map(|(k, t)| (k, t.mu, t.coeffs.as_slice()))
    }

    pub fn eval(&self, t: f64) -> f64 {
        compensated_sum(self.terms.values().flat_map(|term| {
            let e = (-term.mu * t).exp();
            let mut tp = 1.0;
            term.coeffs.iter().map(move |c| {
                let v = c * tp * e;
                tp *= t;
                v
            })
        }))
    }

    fn add_term(&mut self, key: &QPolynomial, mu: f64, j: usize, c: f64) {
        if c == 0.0 {
            return;
        }
        let term = self.terms.entry(key.clone()).or_insert_with(|| Term {
            mu,
            coeffs: Vec::new(),
        });
        if term.coeffs.len() <= j {
            term.coeffs.resize(j + 1, 0.0);
        }
        term.coeffs[j] += c;
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &ExpPoly, c: f64) {
        for (k, t) in &other.terms {
            for (j, &a) in t.coeffs.iter().enumerate() {
                self.add_term(k, t.mu, j, c * a);
            }
        }
    }

    /// `int_0^t e^{-lambda (t - s)} self(s) ds`, the solution of
    /// `p' = -lambda p + self`, `p(0) = 0`.
    pub fn convolve_exp(&self, rate: &QPolynomial, q: f64) -> ExpPoly {
        let lambda = rate.eval(q);
        let mut out = ExpPoly::zero();
        for (key, term) in &self.terms {
            let d = lambda - term.mu;
            let tied = key == rate || d.abs() < RATE_TIE;
            for (j, &c) in term.coeffs.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                if tied {
                    out.add_term(rate, lambda, j + 1, c / (j + 1) as f64);
                    continue;
                }
                // int_0^t s^j e^{ds} ds = e^{dt} sum_i (-1)^{j-i} j!/(i! d^{j-i+1}) t^i
                //                         - (-1)^j j!/d^{j+1}
                let mut f = 1.0 / d; // j!/(i! d^{j-i+1}) at i = j
                for i in (0..=j).rev() {
                    let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
                    out.add_term(key, term.mu, i, c * sign * f);
                    if i > 0 {
                        f *= i as f64 / d;
                    }
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                out.add_term(rate, lambda, 0, -c * sign * f);
            }
        }
        out
    }

    /// Largest coefficient magnitude among the non-constant parts, plus the
    /// deviation of the constant part from `c`. Zero means `self == c`
    /// identically in `t`.
    pub fn distance_from_constant(&self, c: f64) -> f64 {
        let mut worst = (c - self.constant_part()).abs();
        for (k, t) in &self.terms {
            let skip = if k.is_zero() { 1 } else { 0 };
            for &a in t.coeffs.iter().skip(skip) {
                worst = worst.max(a.abs());
            }
        }
        worst
    }

    fn constant_part(&self) -> f64 {
        self.terms
            .get(&QPolynomial::zero())
            .and_then(|t| t.coeffs.first().copied())
            .unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(c: i64) -> QPolynomial {
        QPolynomial::from(c)
    }

    #[test]
    fn poisson_chain() {
        // p_0 = e^{-t}, p_{n+1} = conv(p_n, 1) gives e^{-t} t^n / n!.
        let q = 0.5;
        let mut p = ExpPoly::exp(&k(1), q);
        let mut fact = 1.0;
        for n in 0..6 {
            if n > 0 {
                fact *= n as f64;
            }
            for &t in &[0.3f64, 2.0, 5.0] {
                let want = (-t).exp() * t.powi(n) / fact;
                assert!((p.eval(t) - want).abs() < 1e-14);
            }
            p = p.convolve_exp(&k(1), q);
        }
    }

    #[test]
    fn distinct_rates() {
        // int_0^t e^{-2(t-s)} e^{-s} ds = e^{-t} - e^{-2t}
        let q = 0.3;
        let p = ExpPoly::exp(&k(1), q).convolve_exp(&k(2), q);
        for &t in &[0.1f64, 1.0, 4.0] {
            let want = (-t).exp() - (-2.0 * t).exp();
            assert!((p.eval(t) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn polynomial_times_exponential() {
        // int_0^t e^{-3(t-s)} s e^{-s} ds = e^{-t}(t/2 - 1/4) + e^{-3t}/4
        let q = 0.3;
        let mut f = ExpPoly::zero();
        f.add_term(&k(1), 1.0, 1, 1.0);
        let p = f.convolve_exp(&k(3), q);
        for &t in &[0.2f64, 1.5, 3.0] {
            let want = (-t).exp() * (t / 2.0 - 0.25) + (-3.0 * t).exp() / 4.0;
            assert!((p.eval(t) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_detection() {
        let q = 0.4;
        let e = ExpPoly::exp(&k(1), q);
        let mut total = e.convolve_exp(&QPolynomial::zero(), q);
        total.add_scaled(&e, 1.0);
        assert!(total.distance_from_constant(1.0) < 1e-15);
        assert!(ExpPoly::constant(0.5).distance_from_constant(1.0) > 0.4);
    }
}
