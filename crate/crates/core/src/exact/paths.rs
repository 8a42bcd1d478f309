use super::exppoly::ExpPoly;
use crate::numeric::check_q;
use crate::config::LabeledConfig;
use crate::error::{domain, Error, Result};
use crate::generator::{labeled_jump_rates, labeled_total_rate};
use crate::numeric::compensated_sum;
use crate::qalg::QPolynomial;

/// Default cap on the number of enumerated paths.
pub const DEFAULT_MAX_PATHS: usize = 1_000_000;

struct Walk<'a> {
    y: &'a [i64],
    q: f64,
    t: f64,
    max_paths: usize,
    paths: usize,
    terms: Vec<f64>,
}

impl Walk<'_> {
    /// `phase` is the density-like term of the current holding time and
    /// `survival` the probability that the holding times so far exceed `t`
    /// as a function of `t`.
    fn visit(
        &mut self,
        z: &LabeledConfig,
        weight: f64,
        phase: &ExpPoly,
        survival: &ExpPoly,
    ) -> Result<()> {
        let moves = labeled_jump_rates(z);
        let lambda = moves.iter().fold(QPolynomial::zero(), |a, m| &a + &m.rate);
        let lam = lambda.eval(self.q);
        for m in moves {
            let p = weight * m.rate.eval(self.q) / lam;
            let inside = m.target.positions().iter().zip(self.y).all(|(a, b)| a <= b);
            if !inside {
                self.paths += 1;
                if self.paths > self.max_paths {
                    return Err(Error::Resource(format!(
                        "path enumeration exceeded {} paths",
                        self.max_paths
                    )));
                }
                self.terms.push(p * survival.eval(self.t));
                continue;
            }
            let mu = labeled_total_rate(&m.target)?;
            let next_phase = scaled(&phase.convolve_exp(&mu, self.q), lam);
            let mut next_survival = survival.clone();
            next_survival.add_scaled(&next_phase, 1.0);
            self.visit(&m.target, p, &next_phase, &next_survival)?;
        }
        Ok(())
    }
}

fn scaled(p: &ExpPoly, c: f64) -> ExpPoly {
    let mut out = ExpPoly::zero();
    out.add_scaled(p, c);
    out
}

/// `P_x(X(t) <= y)` by summing over every jump-chain path that stays in the
/// box `[x, y]` and then leaves it: path probability times the chance that
/// the holding times along the path outlast `t`.
pub fn path_decomposition_cdf(
    x: &LabeledConfig,
    y: &LabeledConfig,
    q: f64,
    t: f64,
    max_paths: usize,
) -> Result<f64> {
    check_q(q)?;
    if x.len() != y.len() || x.is_empty() {
        return domain("start and target must be nonempty and of equal length");
    }
    if !(t >= 0.0) {
        return domain(format!("time must be nonnegative, got {t}"));
    }
    if !x.le(y) {
        return Ok(0.0);
    }
    let lambda = labeled_total_rate(x)?;
    let phase = ExpPoly::exp(&lambda, q);
    let mut walk = Walk {
        y: y.positions(),
        q,
        t,
        max_paths,
        paths: 0,
        terms: Vec::new(),
    };
    walk.visit(x, 1.0, &phase, &phase.clone())?;
    Ok(compensated_sum(walk.terms))
}
