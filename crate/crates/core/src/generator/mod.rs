//! Jump rates, the embedded jump chain and the graded-poset structure.
//!
//! A species-`i` particle at a site holding `c_1, ..., c_n` particles of each
//! species jumps one step right at rate `q^{c_1 + ... + c_{i-1}} [c_i]_q`.
//! The rates at a site telescope to `[c_1 + ... + c_n]_q`.

use crate::config::{LabeledConfig, OccupancyConfig};
use crate::error::{domain, Error, Result};
use crate::qalg::{q_int, QPolynomial, QRationalFunction};

/// A single rightward jump out of an occupancy configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub site: i64,
    pub species: usize,
    pub target: OccupancyConfig,
    pub rate: QPolynomial,
}

/// A single rightward jump of one labeled particle (`species` is 0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledTransition {
    pub species: usize,
    pub target: LabeledConfig,
    pub rate: QPolynomial,
}

/// Per-species rates at one site, given per-species counts there.
pub fn site_rates(counts: &[u32]) -> Vec<QPolynomial> {
    let mut above = 0usize;
    counts
        .iter()
        .map(|&c| {
            let r = if c == 0 {
                QPolynomial::zero()
            } else {
                q_int(c as usize).shift(above)
            };
            above += c as usize;
            r
        })
        .collect()
}

/// Numeric counterpart of [`site_rates`].
pub fn site_rates_f64(counts: &[u32], q: f64) -> Vec<f64> {
    let mut above = 0i32;
    counts
        .iter()
        .map(|&c| {
            let r = q.powi(above) * (1.0 - q.powi(c as i32)) / (1.0 - q);
            above += c as i32;
            r
        })
        .collect()
}

/// All jumps out of `xi`, one per occupied `(site, species)` pair.
pub fn jump_rates(xi: &OccupancyConfig) -> Result<Vec<Transition>> {
    if xi.has_infinite() {
        return domain("jump rates need a finite configuration");
    }
    let mut out = Vec::new();
    for site in xi.sites() {
        let counts = xi.at_site(site)?;
        for (i, rate) in site_rates(&counts).into_iter().enumerate() {
            if rate.is_zero() {
                continue;
            }
            out.push(Transition {
                site,
                species: i + 1,
                target: xi.jumped(site, i + 1)?,
                rate,
            });
        }
    }
    Ok(out)
}

/// Jumps out of a labeled configuration; species `j` moves at rate
/// `q^{#(i < j at the same site)}`.
pub fn labeled_jump_rates(x: &LabeledConfig) -> Vec<LabeledTransition> {
    (0..x.len())
        .map(|j| LabeledTransition {
            species: j,
            target: x.shifted(j, 1),
            rate: QPolynomial::q_pow(x.blockers(j)),
        })
        .collect()
}

/// Numeric labeled rates written into `out` (indexed by species).
pub fn labeled_rates_f64(x: &[i64], q: f64, out: &mut Vec<f64>) {
    out.clear();
    for j in 0..x.len() {
        let b = x[..j].iter().filter(|&&s| s == x[j]).count();
        out.push(q.powi(b as i32));
    }
}

/// `lambda_xi = -L(xi, xi)`, the total exit rate.
pub fn total_rate(xi: &OccupancyConfig) -> Result<QPolynomial> {
    if xi.is_empty() {
        return Err(Error::Domain("empty configuration has zero exit rate".into()));
    }
    let mut acc = QPolynomial::zero();
    for t in jump_rates(xi)? {
        acc = &acc + &t.rate;
    }
    Ok(acc)
}

/// Total exit rate of a labeled configuration: `sum over sites of [m]_q`.
pub fn labeled_total_rate(x: &LabeledConfig) -> Result<QPolynomial> {
    if x.is_empty() {
        return Err(Error::Domain("empty configuration has zero exit rate".into()));
    }
    let mut sorted = x.positions().to_vec();
    sorted.sort_unstable();
    let mut acc = QPolynomial::zero();
    let mut i = 0;
    while i < sorted.len() {
        let m = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        acc = &acc + &q_int(m);
        i += m;
    }
    Ok(acc)
}

/// Embedded-chain probability `rate(xi -> zeta) / lambda_xi`, exact in `q`.
pub fn embedded_transition_symbolic(
    xi: &OccupancyConfig,
    zeta: &OccupancyConfig,
) -> Result<QRationalFunction> {
    let lambda = total_rate(xi)?;
    let mut num = QPolynomial::zero();
    for t in jump_rates(xi)? {
        if &t.target == zeta {
            num = &num + &t.rate;
        }
    }
    QRationalFunction::new(num, lambda)
}

/// Embedded-chain probability evaluated at a numeric `q`.
pub fn embedded_transition(xi: &OccupancyConfig, zeta: &OccupancyConfig, q: f64) -> Result<f64> {
    embedded_transition_symbolic(xi, zeta)?.eval_f64(q)
}

/// `z = x + e_j` for some `j`.
pub fn covers(x: &LabeledConfig, z: &LabeledConfig) -> bool {
    if x.len() != z.len() {
        return false;
    }
    let mut diff = 0;
    for (a, b) in x.positions().iter().zip(z.positions()) {
        match b - a {
            0 => {}
            1 => diff += 1,
            _ => return false,
        }
    }
    diff == 1
}

pub fn rank(x: &LabeledConfig) -> i64 {
    x.rank()
}

/// Numeric counterpart of [`labeled_total_rate`].
pub fn labeled_total_rate_f64(x: &[i64], q: f64) -> f64 {
    let mut sorted = x.to_vec();
    sorted.sort_unstable();
    let mut acc = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let m = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        acc += (1.0 - q.powi(m as i32)) / (1.0 - q);
        i += m;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lc(v: &[i64]) -> LabeledConfig {
        LabeledConfig::new(v.to_vec())
    }

    fn occ(n: usize, parts: &[(i64, usize)]) -> OccupancyConfig {
        OccupancyConfig::from_particles(n, parts).unwrap()
    }

    #[test]
    fn single_particle_rate_is_one() {
        let t = jump_rates(&occ(2, &[(7, 2)])).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t[0].rate.is_one());
        assert!(total_rate(&occ(2, &[(7, 2)])).unwrap().is_one());
        assert!(jump_rates(&OccupancyConfig::new(3)).unwrap().is_empty());
        assert!(total_rate(&OccupancyConfig::new(3)).is_err());
    }

    #[test]
    fn mixed_site_rates() {
        let r = site_rates(&[1, 2, 2]);
        assert_eq!(r[0], q_int(1));
        assert_eq!(r[1], q_int(2).shift(1));
        assert_eq!(r[2], q_int(2).shift(3));
        let sum = r.iter().fold(QPolynomial::zero(), |a, b| &a + b);
        assert_eq!(sum, q_int(5));
    }

    #[test]
    fn total_rates() {
        assert_eq!(total_rate(&occ(1, &[(0, 1); 4])).unwrap(), q_int(4));
        assert_eq!(total_rate(&occ(1, &[(0, 1), (3, 1)])).unwrap(), QPolynomial::from(2));
        assert_eq!(labeled_total_rate(&lc(&[0, 0, 1])).unwrap(), &q_int(2) + &q_int(1));
    }

    #[test]
    fn embedded_two_species() {
        let xi = occ(2, &[(0, 1), (0, 2)]);
        let a = occ(2, &[(1, 1), (0, 2)]);
        let b = occ(2, &[(0, 1), (1, 2)]);
        let pa = embedded_transition_symbolic(&xi, &a).unwrap();
        let pb = embedded_transition_symbolic(&xi, &b).unwrap();
        assert_eq!(pa, "(1)/(1 + 1*q)".parse().unwrap());
        assert_eq!(pb, "(1*q)/(1 + 1*q)".parse().unwrap());
        assert_eq!(&pa + &pb, QRationalFunction::one());
        assert_eq!(embedded_transition(&xi, &xi, 0.5).unwrap(), 0.0);
        assert!(embedded_transition(&OccupancyConfig::new(2), &xi, 0.5).is_err());
        let single = occ(1, &[(0, 1)]);
        assert_eq!(embedded_transition(&single, &occ(1, &[(1, 1)]), 0.3).unwrap(), 1.0);
    }

    #[test]
    fn cover_relation() {
        let x = lc(&[0, -1, -2]);
        assert!(covers(&x, &lc(&[1, -1, -2])));
        assert!(!covers(&x, &lc(&[1, 0, -2])));
        assert!(!covers(&x, &x));
        assert_eq!(rank(&x), -3);
    }

    fn occupancy_vector() -> impl Strategy<Value = Vec<u32>> {
        (1usize..=4).prop_flat_map(|n| prop::collection::vec(0u32..=6, n))
            .prop_filter("m <= 6", |v| v.iter().sum::<u32>() <= 6)
    }

    #[test]
    fn telescoping_exhaustive() {
        for n in 1..=4usize {
            let mut counts = vec![0u32; n];
            loop {
                let m: u32 = counts.iter().sum();
                if m <= 6 {
                    let sum = site_rates(&counts).iter().fold(QPolynomial::zero(), |a, b| &a + b);
                    assert_eq!(sum, q_int(m as usize), "{counts:?}");
                }
                let mut i = 0;
                while i < n && counts[i] == 6 {
                    counts[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
                counts[i] += 1;
            }
        }
    }

    proptest! {
        #[test]
        fn symbolic_and_numeric_agree(counts in occupancy_vector(), q in 0.01f64..0.99) {
            let s = site_rates(&counts);
            let f = site_rates_f64(&counts, q);
            for (a, b) in s.iter().zip(&f) {
                prop_assert!((a.eval(q) - b).abs() < 1e-12);
            }
        }

        #[test]
        fn rates_decrease_with_species_for_equal_counts(c in 1u32..4, n in 2usize..5, q in 0.01f64..0.99) {
            let f = site_rates_f64(&vec![c; n], q);
            for w in f.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
        }

        #[test]
        fn embedded_is_distribution_on_covers(
            pos in prop::collection::vec(-2i64..=2, 1..=4),
            q in 0.05f64..0.95,
        ) {
            let x = LabeledConfig::new(pos);
            let xi = OccupancyConfig::from_labeled(&x);
            let lambda = labeled_total_rate(&x).unwrap().eval(q);
            let mut total = 0.0;
            for t in labeled_jump_rates(&x) {
                prop_assert!(covers(&x, &t.target));
                prop_assert_eq!(t.target.rank(), x.rank() + 1);
                let z = OccupancyConfig::from_labeled(&t.target);
                let p = embedded_transition(&xi, &z, q).unwrap();
                prop_assert!((p - t.rate.eval(q) / lambda).abs() < 1e-12);
                total += p;
            }
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!((labeled_total_rate_f64(x.positions(), q) - lambda).abs() < 1e-12);
        }
    }
}
