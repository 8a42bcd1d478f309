//! q-deformed arithmetic over the formal parameter `q`.
//!
//! Everything here is exact: q-integers, q-factorials and q-multinomials are
//! integer-coefficient polynomials, and the hitting-probability solver works
//! in [`QRationalFunction`].

mod poly;
mod ratfunc;

pub use poly::QPolynomial;
pub use ratfunc::QRationalFunction;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// A numeric value of `q`, restricted to the open interval `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QValue(f64);

impl QValue {
    pub fn new(q: f64) -> Result<Self> {
        if q > 0.0 && q < 1.0 {
            Ok(QValue(q))
        } else {
            domain(format!("q must lie in (0,1), got {q}"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for QValue {
    type Error = Error;
    fn try_from(q: f64) -> Result<Self> {
        QValue::new(q)
    }
}

impl From<QValue> for f64 {
    fn from(q: QValue) -> f64 {
        q.0
    }
}

/// `[k]_q = 1 + q + ... + q^{k-1}`; `[0]_q = 0`.
pub fn q_int(k: usize) -> QPolynomial {
    QPolynomial::new(vec![BigInt::one(); k])
}

/// `[k]_q! = [1]_q [2]_q ... [k]_q`.
pub fn q_factorial(k: usize) -> QPolynomial {
    (1..=k).fold(QPolynomial::one(), |acc, j| &acc * &q_int(j))
}

/// `[N; m_1, ..., m_r]_q = [N]_q! / ([m_1]_q! ... [m_r]_q!)` with `N = sum m_i`.
///
/// The quotient is always a polynomial; a remainder means the arithmetic is
/// broken and is treated as an invariant violation.
pub fn q_multinomial(m: &[usize]) -> QPolynomial {
    let n: usize = m.iter().sum();
    let den = m
        .iter()
        .fold(QPolynomial::one(), |acc, &mi| &acc * &q_factorial(mi));
    q_factorial(n)
        .div_exact(&den)
        .expect("q-multinomial division left a remainder")
}

/// `(alpha; q)_k = (1 - alpha)(1 - q alpha) ... (1 - q^{k-1} alpha)`.
pub fn q_pochhammer(alpha: &QRationalFunction, k: usize) -> QRationalFunction {
    let one = QRationalFunction::one();
    (0..k).fold(one.clone(), |acc, j| {
        let term = &one - &(&QRationalFunction::q_pow(j) * alpha);
        &acc * &term
    })
}

/// `c(q, N, K, m)`: sum over `K <= i_1 < ... < i_m <= N-1` of
/// `q^{i_1 + ... + i_m}`, i.e. the m-th elementary symmetric polynomial of
/// `q^K, ..., q^{N-1}`.
pub fn c_coeff(n: usize, k: usize, m: usize) -> Result<QPolynomial> {
    if k > n || m > n - k {
        return domain(format!("c(q,N={n},K={k},m={m}) needs 0 <= m <= N-K"));
    }
    // e[j] = elementary symmetric polynomial of degree j in the variables seen so far.
    let mut e = vec![QPolynomial::zero(); m + 1];
    e[0] = QPolynomial::one();
    for i in k..n {
        for j in (1..=m).rev() {
            let add = e[j - 1].shift(i);
            e[j] = &e[j] + &add;
        }
    }
    Ok(e.swap_remove(m))
}

/// The same coefficient as a rational function, handy for mixing with
/// symbolic results.
pub fn c_coeff_rf(n: usize, k: usize, m: usize) -> Result<QRationalFunction> {
    c_coeff(n, k, m).map(QRationalFunction::from)
}
