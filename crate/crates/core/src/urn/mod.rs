//! The nonlinear Pólya urn with α-power selection weights.
//!
//! Two engines are provided. [`run_sequential`] consumes one uniform per step
//! and applies the cumulative-weight rule of [`select_colour`]. The
//! exponential embedding in [`rubin`] gives every colour an independent
//! pure-birth clock instead, which is what the event evaluators for the
//! long-run urn work with.

pub mod rubin;
pub mod series;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::UniformSource;

pub use rubin::{evaluate_outcome, rubin_race, run_rubin, run_rubin_with, PolyaOutcome, RubinClocks, RubinOptions};
pub use series::{aggregate_replica, sample_s, AggregateOutcome, SeriesSampler};

/// Colour tallies and the number of selections made.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrnState {
    pub tallies: Vec<u64>,
    pub step: u64,
}

impl UrnState {
    pub fn new(tallies: Vec<u64>) -> Result<Self> {
        if tallies.is_empty() {
            return Err(Error::InvalidInput("urn needs at least one colour".into()));
        }
        if tallies.contains(&0) {
            return Err(Error::InvalidInput("every tally must be at least 1".into()));
        }
        Ok(Self { tallies, step: 0 })
    }

    /// `(m, 1, …, 1)` with `n` competitor colours.
    pub fn head_start(m: u64, n: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("head start m must be positive".into()));
        }
        let mut tallies = vec![1; n + 1];
        tallies[0] = m;
        Self::new(tallies)
    }

    pub fn colours(&self) -> usize {
        self.tallies.len()
    }

    pub fn total(&self) -> u64 {
        self.tallies.iter().sum()
    }

    /// Selection probabilities `N_i^α / Σ N^α`.
    pub fn probabilities(&self, alpha: f64) -> Vec<f64> {
        let w: Vec<f64> = self.tallies.iter().map(|&t| (t as f64).powf(alpha)).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    }

    fn apply(&mut self, colour: usize) {
        self.tallies[colour] += 1;
        self.step += 1;
    }
}

/// The colour `i` with `Σ_{i'<i} N^α < u Σ N^α ≤ Σ_{i'≤i} N^α`.
pub fn select_colour(state: &UrnState, u: f64, alpha: f64) -> usize {
    select_weighted(&state.tallies, u, alpha)
}

/// [`select_colour`] on a bare tally slice.
///
/// Boundary values go to the lower index. If rounding leaves `u·total` above
/// the final cumulative sum the last index is returned.
pub fn select_weighted(tallies: &[u64], u: f64, alpha: f64) -> usize {
    let weights = || tallies.iter().map(|&t| (t as f64).powf(alpha));
    let total: f64 = weights().sum();
    let target = u * total;
    let mut cum = 0.0;
    for (i, w) in weights().enumerate() {
        cum += w;
        if target <= cum {
            return i;
        }
    }
    tallies.len() - 1
}

/// One urn run: the start state and every colour chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrnTrace {
    pub initial: UrnState,
    pub choices: Vec<usize>,
    pub uniforms_consumed: u64,
}

impl UrnTrace {
    /// Replays the choices from the initial state.
    pub fn final_state(&self) -> UrnState {
        let mut s = self.initial.clone();
        for &c in &self.choices {
            s.apply(c);
        }
        s
    }

    /// Number of selections of each colour.
    pub fn counts(&self) -> Vec<u64> {
        self.counts_first(self.choices.len())
    }

    /// Selection counts over the first `k` choices.
    pub fn counts_first(&self, k: usize) -> Vec<u64> {
        let mut c = vec![0; self.initial.colours()];
        for &i in &self.choices[..k.min(self.choices.len())] {
            c[i] += 1;
        }
        c
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Run `steps` selections, one uniform each.
pub fn run_sequential<S: UniformSource + ?Sized>(
    initial: &UrnState,
    alpha: f64,
    steps: u64,
    uniforms: &mut S,
) -> Result<UrnTrace> {
    let mut state = initial.clone();
    let mut choices = Vec::with_capacity(steps as usize);
    for done in 0..steps {
        let u = uniforms.next_uniform().ok_or(Error::StreamExhausted { consumed: done, needed: steps })?;
        let c = select_colour(&state, u, alpha);
        state.apply(c);
        choices.push(c);
    }
    Ok(UrnTrace { initial: initial.clone(), choices, uniforms_consumed: steps })
}

/// Colours `k ≥ 1` selected exactly `m − 1` times, and whether every such
/// colour stayed at or below `2m − 1` selections.
pub fn polya_classes(counts: &[u64], m: u64) -> (bool, BTreeSet<usize>) {
    let only_zero = counts.iter().skip(1).all(|&c| c < 2 * m);
    let exact = counts.iter().enumerate().skip(1).filter(|&(_, &c)| c == m - 1).map(|(k, _)| k).collect();
    (only_zero, exact)
}

/// Checks that `trace` starts from `(m, 1, …, 1)`.
fn check_head_start(trace: &UrnTrace, m: u64) -> Result<()> {
    let t = &trace.initial.tallies;
    if m == 0 || t.len() < 2 || t[0] != m || t[1..].iter().any(|&x| x != 1) {
        return Err(Error::InvalidInput(format!("trace must start from (m, 1, ..., 1) with m = {m}")));
    }
    Ok(())
}

/// Both conclusions of the finite-step urn statement: no colour other than 0
/// is selected more than `2m − 1` times, and at least five colours are
/// selected exactly `m − 1` times.
pub fn corollary_event(trace: &UrnTrace, m: u64) -> Result<bool> {
    let (only_zero, exact) = corollary_classes(trace, m)?;
    Ok(only_zero && exact.len() >= 5)
}

/// The classes behind [`corollary_event`]; the exact set is the vertex's
/// P-children when the trace comes from a WARM vertex's uniforms.
pub fn corollary_classes(trace: &UrnTrace, m: u64) -> Result<(bool, BTreeSet<usize>)> {
    check_head_start(trace, m)?;
    Ok(polya_classes(&trace.counts(), m))
}

/// `only_zero_exceeds ∧ |exact set| ≥ min_exact`.
pub fn theorem1_event_counts(only_zero_exceeds: bool, exact_count: u128, min_exact: u128) -> bool {
    only_zero_exceeds && exact_count >= min_exact
}

/// The long-run urn event: colour 0 alone exceeds `2m − 1` selections and at
/// least five colours are selected exactly `m − 1` times.
pub fn theorem1_event(outcome: &PolyaOutcome) -> Result<bool> {
    if !outcome.decided {
        return Err(Error::Undecided);
    }
    Ok(theorem1_event_counts(outcome.only_zero_exceeds, outcome.exact_m_minus_1.len() as u128, 5))
}
