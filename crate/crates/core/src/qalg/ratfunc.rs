//! Exact rational functions of `q` kept in canonical form.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::poly::QPolynomial;
use super::QValue;
use crate::error::{Error, Result};

/// `numerator / denominator` with integer-coefficient polynomials.
///
/// Canonical form: the two polynomials are coprime over the rationals, the
/// combined integer content is one, and the denominator's leading
/// coefficient is positive. The zero function is `0 / 1`. Derived equality
/// is therefore equality of functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QRationalFunction {
    num: QPolynomial,
    den: QPolynomial,
}

impl QRationalFunction {
    pub fn new(num: QPolynomial, den: QPolynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(num: QPolynomial, den: QPolynomial) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let g = num.gcd(&den);
        let mut n = num.div_exact(&g).expect("gcd divides numerator");
        let mut d = den.div_exact(&g).expect("gcd divides denominator");
        let mut c = n.content().gcd(&d.content());
        if d.leading().is_some_and(Signed::is_negative) {
            c = -c;
        }
        if !c.is_one() {
            n = QPolynomial::new(n.coeffs().iter().map(|a| a / &c).collect());
            d = QPolynomial::new(d.coeffs().iter().map(|a| a / &c).collect());
        }
        QRationalFunction { num: n, den: d }
    }

    pub fn zero() -> Self {
        QRationalFunction {
            num: QPolynomial::zero(),
            den: QPolynomial::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_poly(QPolynomial::one())
    }

    pub fn from_poly(p: QPolynomial) -> Self {
        Self::canonical(p, QPolynomial::one())
    }

    pub fn from_int(c: i64) -> Self {
        Self::from_poly(QPolynomial::from(c))
    }

    pub fn q_pow(k: usize) -> Self {
        Self::from_poly(QPolynomial::q_pow(k))
    }

    pub fn numerator(&self) -> &QPolynomial {
        &self.num
    }

    pub fn denominator(&self) -> &QPolynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("reciprocal of zero".into()));
        }
        Ok(Self::canonical(self.den.clone(), self.num.clone()))
    }

    /// Evaluate at a numeric `q`; errors if the denominator vanishes there.
    pub fn eval(&self, q: QValue) -> Result<f64> {
        self.eval_f64(q.get())
    }

    pub fn eval_f64(&self, q: f64) -> Result<f64> {
        let d = self.den.eval(q);
        let scale = self
            .den
            .coeffs()
            .iter()
            .map(|c| num_traits::ToPrimitive::to_f64(&c.abs()).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        if d == 0.0 || d.abs() <= 1e-14 * scale {
            return Err(Error::Pole(q));
        }
        Ok(self.num.eval(q) / d)
    }

    /// Exact value at a rational `q = a / b`.
    pub fn eval_rational(&self, a: &BigInt, b: &BigInt) -> Result<num_rational::BigRational> {
        let hom = |p: &QPolynomial, deg: usize| -> BigInt {
            // b^deg * p(a/b)
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c * a.pow(k as u32) * b.pow((deg - k) as u32))
                .sum()
        };
        let deg = self.num.coeffs().len().max(self.den.coeffs().len());
        let d = hom(&self.den, deg);
        if d.is_zero() {
            return Err(Error::Domain("evaluation at a pole".into()));
        }
        Ok(num_rational::BigRational::new(hom(&self.num, deg), d))
    }

    pub fn pow(&self, e: u32) -> Self {
        Self::canonical(self.num.pow(e), self.den.pow(e))
    }
}

impl Add for &QRationalFunction {
    type Output = QRationalFunction;
    fn add(self, rhs: &QRationalFunction) -> QRationalFunction {
        if self.den == rhs.den {
            return QRationalFunction::canonical(&self.num + &rhs.num, self.den.clone());
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        QRationalFunction::canonical(num, &self.den * &rhs.den)
    }
}

impl Sub for &QRationalFunction {
    type Output = QRationalFunction;
    fn sub(self, rhs: &QRationalFunction) -> QRationalFunction {
        self + &(-rhs)
    }
}

impl Mul for &QRationalFunction {
    type Output = QRationalFunction;
    fn mul(self, rhs: &QRationalFunction) -> QRationalFunction {
        QRationalFunction::canonical(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for &QRationalFunction {
    type Output = QRationalFunction;
    /// Panics on division by the zero function.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &QRationalFunction) -> QRationalFunction {
        self * &rhs.recip().expect("division by zero rational function")
    }
}

impl Neg for &QRationalFunction {
    type Output = QRationalFunction;
    fn neg(self) -> QRationalFunction {
        QRationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for QRationalFunction {
            type Output = QRationalFunction;
            fn $m(self, rhs: QRationalFunction) -> QRationalFunction {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl From<QPolynomial> for QRationalFunction {
    fn from(p: QPolynomial) -> Self {
        Self::from_poly(p)
    }
}

/// Canonical text form `(c0 + c1*q + ...)/(d0 + d1*q + ...)`.
impl fmt::Display for QRationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})/({})", self.num, self.den)
    }
}

fn parse_poly(s: &str) -> Result<QPolynomial> {
    let s = s.trim();
    let s = s
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("expected parenthesised polynomial: {s:?}")))?;
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact == "0" {
        return Ok(QPolynomial::zero());
    }
    // Split into signed terms.
    let mut terms = Vec::new();
    let mut cur = String::new();
    for (i, ch) in compact.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);
    let mut coeffs: Vec<BigInt> = Vec::new();
    for term in terms {
        let bad = || Error::Parse(format!("bad term {term:?}"));
        let (sign, body) = match term.strip_prefix('-') {
            Some(b) => (-1, b),
            None => (1, term.strip_prefix('+').unwrap_or(&term)),
        };
        let (c, k) = match body.split_once('*') {
            None => (body, 0usize),
            Some((c, var)) => {
                let k = match var {
                    "q" => 1,
                    v => v
                        .strip_prefix("q^")
                        .and_then(|e| e.parse().ok())
                        .ok_or_else(bad)?,
                };
                (c, k)
            }
        };
        let c: BigInt = c.parse().map_err(|_| bad())?;
        if coeffs.len() <= k {
            coeffs.resize(k + 1, BigInt::zero());
        }
        coeffs[k] += c * sign;
    }
    Ok(QPolynomial::new(coeffs))
}

impl serde::Serialize for QRationalFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for QRationalFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for QRationalFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s
            .find(")/(")
            .ok_or_else(|| Error::Parse(format!("expected (num)/(den): {s:?}")))?;
        let num = parse_poly(&s[..=split])?;
        let den = parse_poly(&s[split + 2..])?;
        QRationalFunction::new(num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> QPolynomial {
        QPolynomial::from_i64s(c)
    }

    fn rf(n: &[i64], d: &[i64]) -> QRationalFunction {
        QRationalFunction::new(p(n), p(d)).unwrap()
    }

    #[test]
    fn eval_simple() {
        let f = rf(&[0, 1], &[1, 1]);
        let v = f.eval(QValue::new(0.5).unwrap()).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn add_zero_is_identity() {
        let f = rf(&[3, 0, 1], &[1, 1]);
        assert_eq!(&f + &QRationalFunction::zero(), f);
    }

    #[test]
    fn common_factors_cancel() {
        let a = p(&[1, 2, 5]);
        let b = p(&[2, 0, 1]);
        for k in [-3i64, 2, 7] {
            let kk = QPolynomial::from(k);
            let lhs = QRationalFunction::new(a.clone(), b.clone()).unwrap();
            let rhs = QRationalFunction::new(&a * &kk, &b * &kk).unwrap();
            assert_eq!(lhs, rhs);
        }
        // polynomial common factor
        let f = QRationalFunction::new(&a * &p(&[1, 1]), &b * &p(&[1, 1])).unwrap();
        assert_eq!(f, QRationalFunction::new(a, b).unwrap());
    }

    #[test]
    fn denominator_sign_normalised() {
        assert_eq!(rf(&[1], &[-2]), rf(&[-1], &[2]));
        assert!(rf(&[1], &[0, -2]).denominator().leading().unwrap().is_positive());
    }

    #[test]
    fn pole_detected() {
        let f = rf(&[1], &[-1, 2]);
        assert!(matches!(f.eval_f64(0.5), Err(Error::Pole(_))));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(QRationalFunction::new(p(&[1]), QPolynomial::zero()).is_err());
    }

    #[test]
    fn text_round_trip() {
        let f = rf(&[0, 0, 7, -3], &[729, 1, 0, 2]);
        let s = f.to_string();
        assert_eq!(s, "(7*q^2 - 3*q^3)/(729 + 1*q + 2*q^3)");
        assert_eq!(s.parse::<QRationalFunction>().unwrap(), f);
        assert_eq!("(0)/(1)".parse::<QRationalFunction>().unwrap(), QRationalFunction::zero());
    }

    #[test]
    fn exact_rational_evaluation() {
        let f = rf(&[0, 1], &[1, 1]);
        let v = f.eval_rational(&BigInt::from(1), &BigInt::from(2)).unwrap();
        assert_eq!(v, num_rational::BigRational::new(1.into(), 3.into()));
    }
}
