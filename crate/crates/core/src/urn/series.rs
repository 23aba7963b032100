//! Sampling `S = Σ_{j≥m} ξ_j/j^α` directly, and the colour-class counts of an
//! embedded urn with a very large number of competitors.
//!
//! Competitors are i.i.d. pure-birth processes, so given `S = s` the number of
//! colours selected exactly `r` times is binomial with the transient
//! probability `P(N_s = r)` of the birth chain. That lets a replica with `10^{22}`
//! colours cost as much as one with ten.

use rand_distr::{Binomial, Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{hurwitz_zeta, power_tail, BirthChain};
use crate::rng::Substream;

/// Sampler for `S` with the terms `j = m..=J` drawn explicitly and the rest
/// replaced by a Gamma variable with the same mean and variance.
#[derive(Clone, Debug)]
pub struct SeriesSampler {
    alpha: f64,
    m: u64,
    last: u64,
    tail: Gamma<f64>,
    tail_mean: f64,
}

impl SeriesSampler {
    pub fn new(alpha: f64, m: u64) -> Result<Self> {
        Self::with_last(alpha, m, (16 * m).max(1024))
    }

    pub fn with_last(alpha: f64, m: u64, last: u64) -> Result<Self> {
        if !(alpha > 1.0) || m == 0 || last < m {
            return Err(Error::InvalidInput(format!(
                "series sampler needs alpha > 1 and 1 <= m <= J (alpha {alpha}, m {m}, J {last})"
            )));
        }
        let mean = power_tail(alpha, last);
        let var = hurwitz_zeta(2.0 * alpha, last as f64 + 1.0);
        let tail = Gamma::new(mean * mean / var, var / mean).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(Self { alpha, m, last, tail, tail_mean: mean })
    }

    pub fn last(&self) -> u64 {
        self.last
    }

    pub fn tail_mean(&self) -> f64 {
        self.tail_mean
    }

    pub fn sample(&self, src: &mut Substream) -> f64 {
        let mut s = 0.0;
        for j in self.m..=self.last {
            s += src.exponential() / (j as f64).powf(self.alpha);
        }
        s + self.tail.sample(src)
    }
}

/// One draw of `S` with the default truncation.
pub fn sample_s(alpha: f64, m: u64, src: &mut Substream) -> Result<f64> {
    Ok(SeriesSampler::new(alpha, m)?.sample(src))
}

/// Colour-class counts of one embedded urn with `n` competitors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateOutcome {
    pub s: f64,
    /// Expected-value inputs: `P(N_S = m − 1)` and `P(N_S ≥ 2m)`.
    pub p_exact: f64,
    pub p_exceed: f64,
    /// Competitors selected more than `2m − 1` times.
    pub exceed_count: u128,
    /// Competitors selected exactly `m − 1` times.
    pub exact_count: u128,
}

impl AggregateOutcome {
    pub fn only_zero_exceeds(&self) -> bool {
        self.exceed_count == 0
    }
}

fn sample_count(n: u128, p: f64, src: &mut Substream) -> Result<u128> {
    if n == 0 || p <= 0.0 {
        return Ok(0);
    }
    if p >= 1.0 {
        return Ok(n);
    }
    if n <= u64::MAX as u128 {
        let b = Binomial::new(n as u64, p).map_err(|e| Error::InvalidInput(e.to_string()))?;
        return Ok(b.sample(src) as u128);
    }
    // Beyond u64 the success probabilities are tiny; the Poisson limit is exact to O(p).
    let lambda = n as f64 * p;
    if lambda > 1e12 {
        // Normal limit; the relative error is far below one count in a million.
        let z: f64 = StandardNormal.sample(src);
        return Ok((lambda + lambda.sqrt() * z).round().max(0.0) as u128);
    }
    let d = Poisson::new(lambda).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(d.sample(src) as u128)
}

/// Draws `S`, then the number of competitors in each class.
pub fn aggregate_replica(
    sampler: &SeriesSampler,
    chain: &BirthChain,
    n: u128,
    src: &mut Substream,
) -> Result<AggregateOutcome> {
    let m = sampler.m as usize;
    if chain.cap() != 2 * m {
        return Err(Error::InvalidInput("birth chain must be capped at 2m".into()));
    }
    let s = sampler.sample(src);
    let dist = chain.distribution(s);
    let p_exact = dist[m - 1];
    let p_exceed = dist[2 * m];
    let exceed_count = sample_count(n, p_exceed, src)?;
    let rest = p_exact / (1.0 - p_exceed);
    let exact_count = sample_count(n - exceed_count, rest, src)?;
    Ok(AggregateOutcome { s, p_exact, p_exceed, exceed_count, exact_count })
}
