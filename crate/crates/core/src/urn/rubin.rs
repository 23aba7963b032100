//! Exponential embedding of the urn.
//!
//! Colour 0 starts at tally `m` and its `r`-th arrival comes at
//! `Σ_{j=m}^{m+r-1} ξ_j / j^α`; competitor `k` starts at tally 1 and its `r`-th
//! arrival comes at `Z_k^{(r)} = Σ_{j=1}^{r} η_{j,k} / j^α`. Merging the
//! arrival streams reproduces the sequential urn. Colour 0 explodes at
//! `S = Σ_{j≥m} ξ_j / j^α`, so competitor `k` is selected exactly `r` times in
//! total iff `Z_k^{(r)} < S < Z_k^{(r+1)}`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{UrnState, UrnTrace};
use crate::error::{Error, Result};
use crate::numeric::power_tail;
use crate::rng::UniformSource;

/// Merge per-colour arrival clocks to produce the first `steps` selections.
///
/// Colour `i` with tally `t` waits `η / t^α`. Exact ties go to the lower
/// colour, mirroring the sequential rule.
pub fn rubin_race<S: UniformSource + ?Sized>(
    initial: &UrnState,
    alpha: f64,
    steps: u64,
    src: &mut S,
) -> Result<UrnTrace> {
    let mut tallies = initial.tallies.clone();
    let mut drawn = 0u64;
    let mut next_exp = |drawn: &mut u64| -> Result<f64> {
        let e = src.next_exponential().ok_or(Error::StreamExhausted { consumed: *drawn, needed: *drawn + 1 })?;
        *drawn += 1;
        Ok(e)
    };
    let mut next: Vec<f64> = Vec::with_capacity(tallies.len());
    for &t in &tallies {
        next.push(next_exp(&mut drawn)? / (t as f64).powf(alpha));
    }
    let mut choices = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        let (c, &time) =
            next.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0))).expect("at least one colour");
        choices.push(c);
        tallies[c] += 1;
        next[c] = time + next_exp(&mut drawn)? / (tallies[c] as f64).powf(alpha);
    }
    Ok(UrnTrace { initial: initial.clone(), choices, uniforms_consumed: drawn })
}

/// Truncation controls for [`run_rubin_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RubinOptions {
    /// Inflation of the mean tail in the upper end of the bracket on `S`.
    pub kappa: f64,
    /// Number of ξ terms drawn before any comparison (at least 1).
    pub initial_terms: u64,
    /// Last ξ index that may be drawn is `cap_factor · m`.
    pub cap_factor: u64,
}

impl RubinOptions {
    pub fn for_m(m: u64) -> Self {
        Self { kappa: 20.0, initial_terms: 4 * m.max(1), cap_factor: 1 << 20 }
    }
}

/// Clock values of one embedded urn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RubinClocks {
    pub alpha: f64,
    pub m: u64,
    /// `(J, Σ_{j=m}^{J} ξ_j/j^α)` at the initial truncation and after each extension.
    pub s_partial: Vec<(u64, f64)>,
    /// `z_partial[k-1][r-1] = Z_k^{(r)}` for `r = 1..=2m`.
    pub z_partial: Vec<Vec<f64>>,
    /// `[lo, hi]` with `lo` the last partial sum and `hi = lo + κ Σ_{j>J} j^{-α}`.
    pub s_bracket: (f64, f64),
    pub truncation_index: u64,
}

impl RubinClocks {
    /// `Z_k^{(r)}` for `k ≥ 1`; `Z_k^{(0)} = 0`.
    pub fn z(&self, k: usize, r: u64) -> f64 {
        if r == 0 {
            0.0
        } else {
            self.z_partial[k - 1][r as usize - 1]
        }
    }

    pub fn colours(&self) -> usize {
        self.z_partial.len()
    }

    /// Unbiased point estimate of `S`: the partial sum plus the mean tail.
    pub fn s_estimate(&self) -> f64 {
        self.s_bracket.0 + power_tail(self.alpha, self.truncation_index)
    }

    /// Thresholds `S` is compared against.
    fn thresholds(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.m;
        (1..=self.colours()).flat_map(move |k| [self.z(k, m - 1), self.z(k, m), self.z(k, 2 * m)])
    }

    /// Whether every comparison of `S` with a threshold is resolved by the bracket.
    pub fn resolved(&self) -> bool {
        let (lo, hi) = self.s_bracket;
        self.thresholds().all(|z| z < lo || z > hi)
    }
}

/// Outcome of the long-run urn.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyaOutcome {
    /// No colour `k ≥ 1` is selected more than `2m − 1` times.
    pub only_zero_exceeds: bool,
    /// Colours selected exactly `m − 1` times.
    pub exact_m_minus_1: BTreeSet<usize>,
    /// The bracket on `S` resolved every comparison.
    pub decided: bool,
}

/// [`run_rubin_with`] using [`RubinOptions::for_m`].
pub fn run_rubin<S: UniformSource + ?Sized>(alpha: f64, m: u64, n: usize, src: &mut S) -> Result<RubinClocks> {
    run_rubin_with(alpha, m, n, src, RubinOptions::for_m(m))
}

/// Draws `η_{j,k}` for `j ≤ 2m`, `k ≤ n`, then `ξ_m, ξ_{m+1}, …` until the
/// bracket on `S` resolves every comparison or the cap is reached.
///
/// The η block is drawn first and the ξ terms in index order, so a run with a
/// larger initial truncation sees the same variates as a prefix.
pub fn run_rubin_with<S: UniformSource + ?Sized>(
    alpha: f64,
    m: u64,
    n: usize,
    src: &mut S,
    opts: RubinOptions,
) -> Result<RubinClocks> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidInput("the embedding needs alpha > 1".into()));
    }
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("m and n must be positive".into()));
    }
    let mut drawn = 0u64;
    let mut exp = |drawn: &mut u64| -> Result<f64> {
        let e = src.next_exponential().ok_or(Error::StreamExhausted { consumed: *drawn, needed: *drawn + 1 })?;
        *drawn += 1;
        Ok(e)
    };
    let r_max = 2 * m;
    let mut z_partial = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = Vec::with_capacity(r_max as usize);
        let mut acc = 0.0;
        for j in 1..=r_max {
            acc += exp(&mut drawn)? / (j as f64).powf(alpha);
            row.push(acc);
        }
        z_partial.push(row);
    }

    let cap = opts.cap_factor.saturating_mul(m).max(m);
    let mut last = m - 1;
    let mut lo = 0.0;
    let mut target = (m - 1 + opts.initial_terms.max(1)).min(cap);
    let mut clocks =
        RubinClocks { alpha, m, s_partial: Vec::new(), z_partial, s_bracket: (0.0, 0.0), truncation_index: 0 };
    loop {
        while last < target {
            last += 1;
            lo += exp(&mut drawn)? / (last as f64).powf(alpha);
        }
        clocks.s_partial.push((last, lo));
        clocks.truncation_index = last;
        clocks.s_bracket = (lo, lo + opts.kappa * power_tail(alpha, last));
        if clocks.resolved() || last >= cap {
            break;
        }
        target = (last.saturating_mul(2)).min(cap);
    }
    Ok(clocks)
}

/// Compare `S` against every competitor's partial sums.
pub fn evaluate_outcome(clocks: &RubinClocks, m: u64) -> PolyaOutcome {
    let (lo, hi) = clocks.s_bracket;
    let mut decided = true;
    // S > z when z < lo, S < z when z > hi.
    let mut below = |z: f64| -> bool {
        if z < lo {
            true
        } else {
            if z <= hi {
                decided = false;
            }
            false
        }
    };
    let mut only_zero = true;
    let mut exact = BTreeSet::new();
    for k in 1..=clocks.colours() {
        if below(clocks.z(k, 2 * m)) {
            only_zero = false;
        }
        let reached = below(clocks.z(k, m - 1));
        let not_next = !below(clocks.z(k, m));
        if reached && not_next {
            exact.insert(k);
        }
    }
    PolyaOutcome { only_zero_exceeds: only_zero, exact_m_minus_1: exact, decided }
}

impl PolyaOutcome {
    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}
