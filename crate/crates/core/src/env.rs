//! Resistance environments: i.i.d. sampling, single-edge flips, and
//! exhaustive enumeration of the two-point cube `{a,b}^E`.
//!
//! Sampling is fully deterministic: a [`SeedSpec`] names one replica of a
//! campaign, and per-edge draws come from a SplitMix64 stream seeded by an
//! avalanche mix of `(master_seed, stream_index)`. Replicas can therefore
//! be computed in any order, on any platform, with identical results.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::Network;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a 64-bit avalanche mix.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The SplitMix64 generator: a Weyl counter pushed through [`mix64`].
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Names one stream of a seeded campaign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        SeedSpec { master_seed, stream_index }
    }

    /// The mixed 64-bit seed of this stream.
    pub fn stream_seed(&self) -> u64 {
        mix64(self.master_seed.wrapping_add(mix64(self.stream_index.wrapping_add(GOLDEN_GAMMA))))
    }

    pub fn rng(&self) -> SplitMix64 {
        SplitMix64::new(self.stream_seed())
    }
}

/// An edge-resistance law. All parameters are strictly positive, so the
/// environment is bounded away from 0 and infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Distribution {
    /// Value `a` or `b`, each with probability 1/2.
    Bernoulli { a: f64, b: f64 },
    /// Uniform on `[lo, hi)`.
    Uniform { lo: f64, hi: f64 },
    /// Deterministic value.
    Constant { c: f64 },
}

fn positive(x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::NonPositiveParameter)
    }
}

impl Distribution {
    pub fn bernoulli(a: f64, b: f64) -> Result<Self> {
        let (a, b) = (positive(a)?, positive(b)?);
        if a > b {
            return Err(Error::ReversedBounds);
        }
        Ok(Distribution::Bernoulli { a, b })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let (lo, hi) = (positive(lo)?, positive(hi)?);
        if lo > hi {
            return Err(Error::ReversedBounds);
        }
        Ok(Distribution::Uniform { lo, hi })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Ok(Distribution::Constant { c: positive(c)? })
    }

    /// Smallest value the law can produce.
    pub fn lower_bound(&self) -> f64 {
        match *self {
            Distribution::Bernoulli { a, .. } => a,
            Distribution::Uniform { lo, .. } => lo,
            Distribution::Constant { c } => c,
        }
    }

    /// Largest value the law can produce.
    pub fn upper_bound(&self) -> f64 {
        match *self {
            Distribution::Bernoulli { b, .. } => b,
            Distribution::Uniform { hi, .. } => hi,
            Distribution::Constant { c } => c,
        }
    }

    /// Mean of the law.
    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Bernoulli { a, b } => 0.5 * (a + b),
            Distribution::Uniform { lo, hi } => 0.5 * (lo + hi),
            Distribution::Constant { c } => c,
        }
    }

    /// Mean of the reciprocal, `E[1/X]`.
    pub fn mean_reciprocal(&self) -> f64 {
        match *self {
            Distribution::Bernoulli { a, b } => 0.5 * (1.0 / a + 1.0 / b),
            Distribution::Uniform { lo, hi } => {
                if hi == lo {
                    1.0 / lo
                } else {
                    (crate::math::ln(hi) - crate::math::ln(lo)) / (hi - lo)
                }
            }
            Distribution::Constant { c } => 1.0 / c,
        }
    }

    /// Map one 64-bit word to a draw. Bernoulli values are returned as
    /// exactly `a` or `b`, with no arithmetic performed on them.
    #[inline]
    pub fn draw(&self, word: u64) -> f64 {
        match *self {
            Distribution::Bernoulli { a, b } => {
                if word >> 63 == 1 {
                    b
                } else {
                    a
                }
            }
            Distribution::Uniform { lo, hi } => {
                let u = (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                lo + (hi - lo) * u
            }
            Distribution::Constant { c } => c,
        }
    }
}

/// Where an environment's values came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Provenance {
    pub distribution: Distribution,
    pub seed: SeedSpec,
}

/// One resistance per edge, indexed by edge id.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    resistances: Vec<f64>,
    provenance: Option<Provenance>,
}

impl Environment {
    /// Wrap explicit resistances; every entry must be finite and positive.
    pub fn new(resistances: Vec<f64>) -> Result<Self> {
        for (edge, &r) in resistances.iter().enumerate() {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::NonPositiveResistance { edge });
            }
        }
        Ok(Environment { resistances, provenance: None })
    }

    /// The all-`c` environment on `len` edges.
    pub fn constant(len: usize, c: f64) -> Result<Self> {
        positive(c)?;
        Ok(Environment { resistances: alloc::vec![c; len], provenance: None })
    }

    /// One i.i.d. draw per edge, deterministic given `(dist, seed)`.
    pub fn sample(net: &Network, dist: Distribution, seed: SeedSpec) -> Self {
        let mut rng = seed.rng();
        let resistances = (0..net.edge_count()).map(|_| dist.draw(rng.next_u64())).collect();
        Environment { resistances, provenance: Some(Provenance { distribution: dist, seed }) }
    }

    pub fn len(&self) -> usize {
        self.resistances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resistances.is_empty()
    }

    pub fn resistance(&self, edge: usize) -> f64 {
        self.resistances[edge]
    }

    pub fn resistances(&self) -> &[f64] {
        &self.resistances
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Check this environment against a network's edge count.
    pub fn validate(&self, net: &Network) -> Result<()> {
        if self.len() != net.edge_count() {
            return Err(Error::LengthMismatch { expected: net.edge_count(), got: self.len() });
        }
        Ok(())
    }

    /// The flipped environment: agrees off `edge`, and carries `a + b - r_e`
    /// there. On the two-point support this is exactly the swap `a <-> b`,
    /// which keeps the flip an exact involution in floating point.
    pub fn flip(&self, edge: usize, a: f64, b: f64) -> Result<Self> {
        if edge >= self.len() {
            return Err(Error::EdgeOutOfRange { edge, count: self.len() });
        }
        let r = self.resistances[edge];
        let flipped = if r == a {
            b
        } else if r == b {
            a
        } else {
            return Err(Error::NotTwoPoint { edge });
        };
        let mut resistances = self.resistances.clone();
        resistances[edge] = flipped;
        Ok(Environment { resistances, provenance: None })
    }
}

/// Cap on exhaustive enumeration: `2^24` environments.
pub const ENUMERATION_LIMIT: usize = 24;

/// Iterator over all `2^|E|` two-point environments, in lexicographic bit
/// order: bit `e` of the mask set means `r_e = b`.
pub struct EnvironmentIter {
    mask: u64,
    total: u64,
    a: f64,
    b: f64,
    edges: usize,
}

impl EnvironmentIter {
    /// The environment for one specific mask.
    pub fn environment_for(edges: usize, mask: u64, a: f64, b: f64) -> Environment {
        let resistances = (0..edges)
            .map(|e| if mask >> e & 1 == 1 { b } else { a })
            .collect();
        Environment { resistances, provenance: None }
    }
}

impl Iterator for EnvironmentIter {
    type Item = Environment;

    fn next(&mut self) -> Option<Environment> {
        if self.mask == self.total {
            return None;
        }
        let env = Self::environment_for(self.edges, self.mask, self.a, self.b);
        self.mask += 1;
        Some(env)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = (self.total - self.mask) as usize;
        (rest, Some(rest))
    }
}

impl ExactSizeIterator for EnvironmentIter {}

/// All environments in `{a,b}^E` for the network's edge set.
pub fn enumerate(net: &Network, a: f64, b: f64) -> Result<EnvironmentIter> {
    enumerate_edges(net.edge_count(), a, b)
}

/// Same, by raw edge count.
pub fn enumerate_edges(edges: usize, a: f64, b: f64) -> Result<EnvironmentIter> {
    positive(a)?;
    positive(b)?;
    if a > b {
        return Err(Error::ReversedBounds);
    }
    if edges > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge { edges, limit: ENUMERATION_LIMIT });
    }
    Ok(EnvironmentIter { mask: 0, total: 1u64 << edges, a, b, edges })
}
