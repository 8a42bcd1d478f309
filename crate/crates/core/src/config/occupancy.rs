use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use super::LabeledConfig;
use crate::error::{domain, Error, Result};

/// Occupation number of one species at one site. `Infinite` only appears in
/// source configurations used as duality initial data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Count {
    Finite(u32),
    Infinite,
}

impl Count {
    pub fn finite(self) -> Option<u32> {
        match self {
            Count::Finite(c) => Some(c),
            Count::Infinite => None,
        }
    }

    fn plus(self, other: Count) -> Count {
        match (self, other) {
            (Count::Finite(a), Count::Finite(b)) => Count::Finite(a + b),
            _ => Count::Infinite,
        }
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Count::Finite(c) => s.serialize_u32(*c),
            Count::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Count;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a nonnegative integer or \"inf\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Count, E> {
                u32::try_from(v)
                    .map(Count::Finite)
                    .map_err(|_| E::custom("count too large"))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Count, E> {
                u64::try_from(v)
                    .map_err(|_| E::custom("negative count"))
                    .and_then(|u| self.visit_u64(u))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Count, E> {
                if v == "inf" {
                    Ok(Count::Infinite)
                } else {
                    Err(E::custom(format!("unknown count {v:?}")))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Species-by-site occupation numbers with finite support.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupancyConfig {
    n: usize,
    source: bool,
    counts: BTreeMap<(i64, usize), Count>,
}

impl OccupancyConfig {
    /// Empty configuration with `n` species.
    pub fn new(n: usize) -> Self {
        OccupancyConfig {
            n,
            source: false,
            counts: BTreeMap::new(),
        }
    }

    /// Empty source configuration; infinite counts are permitted.
    pub fn new_source(n: usize) -> Self {
        OccupancyConfig {
            source: true,
            ..Self::new(n)
        }
    }

    /// One particle of species `i + 1` at `x[i]`.
    pub fn from_labeled(x: &LabeledConfig) -> Self {
        let mut out = Self::new(x.len());
        for (i, &s) in x.positions().iter().enumerate() {
            out.add(s, i + 1, Count::Finite(1)).expect("valid species");
        }
        out
    }

    /// Build from a multiset of `(site, species)` particles.
    pub fn from_particles(n: usize, particles: &[(i64, usize)]) -> Result<Self> {
        let mut out = Self::new(n);
        for &(s, sp) in particles {
            out.add(s, sp, Count::Finite(1))?;
        }
        Ok(out)
    }

    pub fn species(&self) -> usize {
        self.n
    }

    pub fn is_source(&self) -> bool {
        self.source
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Add `count` particles of `species` (1-based) at `site`.
    pub fn add(&mut self, site: i64, species: usize, count: Count) -> Result<()> {
        if species == 0 || species > self.n {
            return domain(format!("species {species} outside 1..={}", self.n));
        }
        if count == Count::Infinite && !self.source {
            return domain("infinite occupancy outside a source configuration");
        }
        if count == Count::Finite(0) {
            return Ok(());
        }
        let e = self.counts.entry((site, species)).or_insert(Count::Finite(0));
        *e = e.plus(count);
        Ok(())
    }

    pub fn get(&self, site: i64, species: usize) -> Count {
        self.counts
            .get(&(site, species))
            .copied()
            .unwrap_or(Count::Finite(0))
    }

    /// Nonzero entries in `(site, species)` order.
    pub fn iter(&self) -> impl Iterator<Item = ((i64, usize), Count)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    /// Occupied sites, ascending.
    pub fn sites(&self) -> Vec<i64> {
        let mut s: Vec<i64> = self.counts.keys().map(|&(x, _)| x).collect();
        s.dedup();
        s
    }

    /// Finite per-species counts at `site`, indexed by species - 1.
    pub fn at_site(&self, site: i64) -> Result<Vec<u32>> {
        (1..=self.n)
            .map(|sp| {
                self.get(site, sp).finite().ok_or_else(|| {
                    Error::Domain(format!("infinite occupancy at site {site}"))
                })
            })
            .collect()
    }

    pub fn has_infinite(&self) -> bool {
        self.counts.values().any(|c| *c == Count::Infinite)
    }

    /// Total number of particles; errors on infinite entries.
    pub fn total(&self) -> Result<u64> {
        let mut t = 0u64;
        for c in self.counts.values() {
            match c {
                Count::Finite(c) => t += u64::from(*c),
                Count::Infinite => return domain("infinite configuration has no total"),
            }
        }
        Ok(t)
    }

    /// The particles as a multiset of `(site, species)` pairs.
    pub fn particles(&self) -> Result<Vec<(i64, usize)>> {
        let mut out = Vec::new();
        for ((s, sp), c) in self.iter() {
            let c = c
                .finite()
                .ok_or_else(|| Error::Domain("infinite configuration".into()))?;
            out.extend(std::iter::repeat_n((s, sp), c as usize));
        }
        Ok(out)
    }

    /// Move one species-`species` particle from `site` to `site + 1`.
    pub fn jumped(&self, site: i64, species: usize) -> Result<Self> {
        let mut out = self.clone();
        match out.counts.get_mut(&(site, species)) {
            Some(Count::Finite(c)) if *c > 0 => {
                *c -= 1;
                if *c == 0 {
                    out.counts.remove(&(site, species));
                }
            }
            Some(Count::Infinite) => {}
            _ => return domain(format!("no species-{species} particle at {site}")),
        }
        out.add(site + 1, species, Count::Finite(1))?;
        Ok(out)
    }

    pub fn translated(&self, delta: i64) -> Self {
        OccupancyConfig {
            n: self.n,
            source: self.source,
            counts: self.counts.iter().map(|(&(s, sp), &c)| ((s + delta, sp), c)).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ParticleRecord {
    site: i64,
    species: usize,
    count: Count,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    n: usize,
    particles: Vec<ParticleRecord>,
}

impl Serialize for OccupancyConfig {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Wire {
            n: self.n,
            particles: self
                .iter()
                .map(|((site, species), count)| ParticleRecord {
                    site,
                    species,
                    count,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OccupancyConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        let source = w.particles.iter().any(|p| p.count == Count::Infinite);
        let mut out = OccupancyConfig {
            source,
            ..OccupancyConfig::new(w.n)
        };
        for p in w.particles {
            out.add(p.site, p.species, p.count).map_err(de::Error::custom)?;
        }
        Ok(out)
    }
}
