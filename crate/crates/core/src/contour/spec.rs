use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Required clearance between a contour and the singularities it must avoid.
pub const CONTOUR_MARGIN: f64 = 1e-6;

/// Default trapezoid nodes per circle.
pub const DEFAULT_NODES: usize = 256;

/// Default radius of the large circles.
pub const DEFAULT_LARGE_RADIUS: f64 = 2.0;

/// Target accuracy when choosing the node count automatically.
pub const AUTO_TOLERANCE: f64 = 1e-12;

/// Node count bounds for the automatic choice.
pub const MIN_AUTO_NODES: usize = 64;
pub const MAX_AUTO_NODES: usize = 1024;

/// Right end of every small circle on the real axis.
const SMALL_OUTER: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Circle { center, radius }
    }

    /// Point at angle `2 pi k / nodes`.
    pub fn node(&self, k: usize, nodes: usize) -> Complex64 {
        let theta = std::f64::consts::TAU * k as f64 / nodes as f64;
        self.center + Complex64::from_polar(self.radius, theta)
    }

    fn is_origin_centered(&self) -> bool {
        self.center.norm() < 1e-12
    }

    fn reach(&self) -> f64 {
        self.center.norm() + self.radius
    }
}

/// One circle per integration variable, all sampled at the same number of
/// trapezoid nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub circles: Vec<Circle>,
    pub nodes_per_circle: usize,
}

impl ContourSpec {
    /// `n` copies of the origin-centered circle of radius `radius`.
    pub fn large(n: usize, radius: f64, nodes: usize) -> Self {
        ContourSpec {
            circles: vec![Circle::new(Complex64::new(0.0, 0.0), radius); n],
            nodes_per_circle: nodes,
        }
    }

    /// Nested circles for `n` variables: circle `r` is the disk with real
    /// diameter `[a_r, 1.5]`, where `a_1 < a_2 < ...` grow geometrically in
    /// `1/q` so that circle `r` swallows `q` times every later circle.
    pub fn small(q: f64, n: usize, nodes: usize) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Contour(format!("q must lie in (0,1), got {q}")));
        }
        let mut s = vec![1.0f64];
        for _ in 1..n {
            let last = *s.last().expect("nonempty");
            s.push((last + 1.0) / q);
        }
        let g = 1.0 / (s.last().copied().unwrap_or(1.0) + SMALL_OUTER);
        let circles = s
            .iter()
            .take(n)
            .map(|&sr| {
                let a = g * sr;
                Circle::new(
                    Complex64::new((a + SMALL_OUTER) / 2.0, 0.0),
                    (SMALL_OUTER - a) / 2.0,
                )
            })
            .collect();
        let spec = ContourSpec {
            circles,
            nodes_per_circle: nodes,
        };
        spec.check_small(q)?;
        Ok(spec)
    }

    /// `large` origin-centered circles followed by `small` nested ones.
    pub fn mixed(q: f64, large: usize, small: usize, nodes: usize) -> Result<Self> {
        let mut spec = Self::large(large, DEFAULT_LARGE_RADIUS, nodes);
        spec.circles
            .extend(Self::small(q, small, nodes)?.circles);
        spec.check_mixed(q, large)?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.circles.len()
    }

    fn check_nodes(&self) -> Result<()> {
        if self.nodes_per_circle < 8 || !self.nodes_per_circle.is_multiple_of(4) {
            return Err(Error::Contour(format!(
                "nodes per circle must be a multiple of 4 and at least 8, got {}",
                self.nodes_per_circle
            )));
        }
        if self.circles.iter().any(|c| !(c.radius > 0.0) || !c.center.is_finite()) {
            return Err(Error::Contour("circles need finite centers and positive radii".into()));
        }
        Ok(())
    }

    /// Smallest clearance of the nesting conditions: each circle contains 1,
    /// excludes 0, and contains `q` times every later circle.
    pub fn small_margin(&self, q: f64) -> f64 {
        let mut margin = f64::INFINITY;
        for (r, c) in self.circles.iter().enumerate() {
            margin = margin.min(c.center.norm() - c.radius);
            margin = margin.min(c.radius - (Complex64::new(1.0, 0.0) - c.center).norm());
            for d in &self.circles[r + 1..] {
                margin = margin.min(c.radius - (c.center - q * d.center).norm() - q * d.radius);
            }
        }
        margin
    }

    /// Worst ratio, over all circles, of the distance to the nearest enclosed
    /// singularity and the radius, or of the radius and the distance to the
    /// nearest excluded one. The trapezoid error decays like `rate^nodes`.
    /// The first `large` circles are origin-centered.
    pub fn convergence_rate(&self, q: f64, large: usize) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        let mut worst: f64 = 0.0;
        for (r, c) in self.circles.iter().enumerate() {
            let mut inner = (one - c.center).norm();
            for d in &self.circles[r + 1..] {
                inner = inner.max((c.center - q * d.center).norm() + q * d.radius);
            }
            let mut outer = if r < large { f64::INFINITY } else { c.center.norm() };
            for d in &self.circles[..r] {
                outer = outer.min(d.radius / q - (d.center / q - c.center).norm());
            }
            worst = worst.max(inner / c.radius).max(c.radius / outer);
        }
        worst
    }

    /// Node count reaching [`AUTO_TOLERANCE`] at the predicted convergence
    /// rate, rounded up to a multiple of 8 and clamped to
    /// `[MIN_AUTO_NODES, MAX_AUTO_NODES]`.
    pub fn auto_nodes(&self, q: f64, large: usize) -> usize {
        let rate = self.convergence_rate(q, large);
        let n = if rate < 1.0 {
            (AUTO_TOLERANCE.ln() / rate.ln()).ceil() as usize
        } else {
            MAX_AUTO_NODES
        };
        n.div_ceil(8).saturating_mul(8).clamp(MIN_AUTO_NODES, MAX_AUTO_NODES)
    }

    /// The same circles with the node count chosen by [`Self::auto_nodes`].
    pub fn with_auto_nodes(mut self, q: f64, large: usize) -> Self {
        self.nodes_per_circle = self.auto_nodes(q, large);
        self
    }

    pub fn check_small(&self, q: f64) -> Result<()> {
        self.check_nodes()?;
        let m = self.small_margin(q);
        if m < CONTOUR_MARGIN {
            return Err(Error::Contour(format!(
                "small contours violate the nesting conditions at q = {q} (margin {m:e})"
            )));
        }
        Ok(())
    }

    /// Large circles must be centered at the origin and enclose 1.
    pub fn check_large(&self) -> Result<()> {
        self.check_nodes()?;
        for c in &self.circles {
            if !c.is_origin_centered() || c.radius < 1.0 + CONTOUR_MARGIN {
                return Err(Error::Contour(format!(
                    "large circle {c:?} must be centered at 0 with radius > 1"
                )));
            }
        }
        Ok(())
    }

    /// The first `large` circles are large and enclose every later small
    /// circle; the rest are valid small contours.
    pub fn check_mixed(&self, q: f64, large: usize) -> Result<()> {
        if large > self.dim() {
            return Err(Error::Contour(format!(
                "{large} large circles requested but only {} given",
                self.dim()
            )));
        }
        let (big, small) = self.circles.split_at(large);
        ContourSpec {
            circles: big.to_vec(),
            nodes_per_circle: self.nodes_per_circle,
        }
        .check_large()?;
        let small = ContourSpec {
            circles: small.to_vec(),
            nodes_per_circle: self.nodes_per_circle,
        };
        small.check_small(q)?;
        let reach = small.circles.iter().map(Circle::reach).fold(0.0, f64::max);
        if let Some(c) = big.iter().find(|c| c.radius < reach + CONTOUR_MARGIN) {
            return Err(Error::Contour(format!(
                "large circle of radius {} does not enclose the small circles (reach {reach})",
                c.radius
            )));
        }
        Ok(())
    }
}
