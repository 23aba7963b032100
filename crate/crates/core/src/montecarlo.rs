//! Replica orchestration, Wilson intervals, and finite checks of the
//! single-urn estimates.
//!
//! Replica `i` of a run with seed `s` always reads `Substream::for_replica(s, i)`
//! and results are reduced in index order, so every estimate is a pure function
//! of `(seed, inputs)` whatever the size of the worker pool.
//!
//! The verifiers return a [`PropositionReport`]. Statements that only hold for
//! large `m` are checked through finite surrogates (trends over an `m` grid)
//! and the report says so.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{hypoexp_cdf, partial_sum_cdf, simplex_bounds, two_term_cdf, wilson_interval, BirthChain, Z95};
use crate::params::{derive_delta0, derive_n, derive_s_bounds};
use crate::rng::{derive_key, Substream};
use crate::urn::{aggregate_replica, theorem1_event_counts, AggregateOutcome, SeriesSampler};

/// Result of one replica of a Bernoulli experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Success,
    Failure,
    Undecided,
}

impl From<bool> for Outcome {
    fn from(b: bool) -> Self {
        if b {
            Outcome::Success
        } else {
            Outcome::Failure
        }
    }
}

/// A probability estimate over decided replicas with a 95% Wilson interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub successes: u64,
    pub trials: u64,
    pub undecided: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed_base: u64,
}

impl McEstimate {
    pub fn from_counts(successes: u64, trials: u64, undecided: u64, seed_base: u64) -> Result<Self> {
        if successes + undecided > trials {
            return Err(Error::InvalidInput(format!(
                "successes {successes} + undecided {undecided} exceed trials {trials}"
            )));
        }
        let decided = trials - undecided;
        let p_hat = if decided == 0 { 0.0 } else { successes as f64 / decided as f64 };
        let (ci_low, ci_high) = wilson_interval(successes, decided, Z95);
        // Guard the last ulp so the invariant ci_low <= p_hat <= ci_high holds exactly.
        Ok(Self {
            successes,
            trials,
            undecided,
            p_hat,
            ci_low: ci_low.min(p_hat),
            ci_high: ci_high.max(p_hat),
            seed_base,
        })
    }

    pub fn decided(&self) -> u64 {
        self.trials - self.undecided
    }

    pub fn undecided_fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.undecided as f64 / self.trials as f64
        }
    }

    /// Pools the counts of two runs. The seed of `self` is kept.
    pub fn merge(&self, other: &McEstimate) -> Result<Self> {
        Self::from_counts(
            self.successes + other.successes,
            self.trials + other.trials,
            self.undecided + other.undecided,
            self.seed_base,
        )
    }
}

/// Runs `f` on replicas `0..replicas`, returning results in replica order.
pub fn run_replicas<T, F>(replicas: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut Substream) -> T + Sync,
{
    (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut src = Substream::for_replica(seed, i);
            f(i, &mut src)
        })
        .collect()
}

/// Estimates the probability of the event decided by `f`.
pub fn estimate_event<O, F>(f: F, replicas: u64, seed: u64) -> Result<McEstimate>
where
    O: Into<Outcome>,
    F: Fn(u64, &mut Substream) -> O + Sync,
{
    if replicas == 0 {
        return Err(Error::InvalidInput("replicas must be at least 1".into()));
    }
    let (succ, und) = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut src = Substream::for_replica(seed, i);
            match f(i, &mut src).into() {
                Outcome::Success => (1u64, 0u64),
                Outcome::Failure => (0, 0),
                Outcome::Undecided => (0, 1),
            }
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    McEstimate::from_counts(succ, replicas, und, seed)
}

/// One draw of `Σ_{j=first}^{last} η_j / j^α`.
pub fn sample_partial_sum(alpha: f64, first: u64, last: u64, src: &mut Substream) -> f64 {
    (first..=last).map(|j| src.exponential() / (j as f64).powf(alpha)).sum()
}

/// Plain Monte Carlo estimate of `P(Z′ < s)`, `Z′ = Σ_{j=1}^{m−1} η_j / j^α`.
pub fn estimate_cdf_zprime(alpha: f64, m: u64, s: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    check_alpha(alpha)?;
    if !(s > 0.0) {
        return Err(Error::InvalidInput(format!("s must be positive, got {s}")));
    }
    estimate_event(|_, src| sample_partial_sum(alpha, 1, m.saturating_sub(1), src) < s, samples, seed)
}

/// Importance-sampling estimate of `P(Z^{(r)} < s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltedEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// Exponential tilt added to every rate `j^α`.
    pub theta: f64,
    pub samples: u64,
    /// Samples that landed below `s`.
    pub hits: u64,
}

impl TiltedEstimate {
    /// `estimate ± Z95 · std_error`, the lower end clamped at zero.
    pub fn interval(&self) -> (f64, f64) {
        let h = Z95 * self.std_error;
        ((self.estimate - h).max(0.0), self.estimate + h)
    }
}

/// Tilt `θ ≥ 0` with `Σ_{j≤r} 1/(j^α + θ) = s`, so the tilted mean sits at `s`.
pub fn tilt_for(alpha: f64, r: u64, s: f64) -> f64 {
    let mean_at = |theta: f64| -> f64 { (1..=r).map(|j| 1.0 / ((j as f64).powf(alpha) + theta)).sum() };
    if r == 0 || s >= mean_at(0.0) {
        return 0.0;
    }
    let mut hi = r as f64 / s;
    while mean_at(hi) > s {
        hi *= 2.0;
    }
    crate::numeric::bisect(0.0, hi, |t| s - mean_at(t))
}

/// Estimates `P(Σ_{j=1}^r η_j/j^α < s)` by sampling each term at rate
/// `j^α + θ` and reweighting. Efficient deep in the lower tail where plain
/// sampling sees no hits.
pub fn tilted_cdf(alpha: f64, r: u64, s: f64, samples: u64, seed: u64) -> Result<TiltedEstimate> {
    check_alpha(alpha)?;
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    if !(s > 0.0) {
        return Err(Error::InvalidInput(format!("s must be positive, got {s}")));
    }
    let theta = tilt_for(alpha, r, s);
    let rates: Vec<f64> = (1..=r).map(|j| (j as f64).powf(alpha)).collect();
    let log_norm: f64 = rates.iter().map(|a| (a / (a + theta)).ln()).sum();
    let weights = run_replicas(samples, seed, |_, src| {
        let y: f64 = rates.iter().map(|a| src.exponential() / (a + theta)).sum();
        if y < s {
            (log_norm + theta * y).exp()
        } else {
            0.0
        }
    });
    let n = samples as f64;
    let hits = weights.iter().filter(|&&w| w > 0.0).count() as u64;
    let mean = weights.iter().sum::<f64>() / n;
    let second = weights.iter().map(|w| w * w).sum::<f64>() / n;
    let var = (second - mean * mean).max(0.0);
    let std_error = if samples > 1 { (var / (n - 1.0)).sqrt() } else { f64::INFINITY };
    Ok(TiltedEstimate { estimate: mean, std_error, theta, samples, hits })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("alpha must be > 1, got {alpha}")))
    }
}

fn check_replicas(replicas: u64) -> Result<()> {
    if replicas == 0 {
        Err(Error::InvalidInput("replicas must be at least 1".into()))
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Insufficient,
}

impl Verdict {
    fn from_check(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Fail dominates, then pass; a report with only insufficient cells is insufficient.
    pub fn combine(cells: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Insufficient;
        for v in cells {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Pass => out = Verdict::Pass,
                Verdict::Insufficient => {}
            }
        }
        out
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Insufficient => "insufficient",
        })
    }
}

/// One grid point of a verifier. `margin ≥ 0` exactly when the checked
/// inequality holds; the inputs, values and counts are enough to recompute it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub label: String,
    pub inputs: BTreeMap<String, f64>,
    pub values: BTreeMap<String, f64>,
    pub counts: BTreeMap<String, u64>,
    pub verdict: Verdict,
    pub margin: f64,
}

impl Cell {
    fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            inputs: BTreeMap::new(),
            values: BTreeMap::new(),
            counts: BTreeMap::new(),
            verdict: Verdict::Insufficient,
            margin: 0.0,
        }
    }

    fn input(mut self, k: &str, v: f64) -> Self {
        self.inputs.insert(k.into(), v);
        self
    }

    fn value(mut self, k: &str, v: f64) -> Self {
        self.values.insert(k.into(), v);
        self
    }

    fn count(mut self, k: &str, v: u64) -> Self {
        self.counts.insert(k.into(), v);
        self
    }

    fn estimate(self, prefix: &str, e: &McEstimate) -> Self {
        self.count(&format!("{prefix}_successes"), e.successes)
            .count(&format!("{prefix}_trials"), e.trials)
            .value(&format!("{prefix}_p_hat"), e.p_hat)
            .value(&format!("{prefix}_ci_low"), e.ci_low)
            .value(&format!("{prefix}_ci_high"), e.ci_high)
    }

    fn judged(mut self, verdict: Verdict, margin: f64) -> Self {
        self.verdict = verdict;
        self.margin = margin;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub id: String,
    /// True when the underlying statement is asymptotic and the cells check a
    /// finite stand-in.
    pub surrogate: bool,
    pub cells: Vec<Cell>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl PropositionReport {
    fn new(id: &str, surrogate: bool, cells: Vec<Cell>, notes: Vec<String>) -> Self {
        let verdict = Verdict::combine(cells.iter().map(|c| c.verdict));
        Self { id: id.into(), surrogate, cells, verdict, notes }
    }

    pub fn cell(&self, label: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.label == label)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl fmt::Display for PropositionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.surrogate { " (finite surrogate)" } else { "" };
        writeln!(f, "{}{}: {}", self.id, kind, self.verdict)?;
        let w = self.cells.iter().map(|c| c.label.len()).max().unwrap_or(4).max(4);
        writeln!(f, "  {:<w$}  {:<12}  {:>12}  values", "cell", "verdict", "margin")?;
        for c in &self.cells {
            let vals: Vec<String> = c
                .counts
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .chain(c.values.iter().map(|(k, v)| format!("{k}={v:.6e}")))
                .collect();
            writeln!(f, "  {:<w$}  {:<12}  {:>12.4e}  {}", c.label, c.verdict.to_string(), c.margin, vals.join(" "))?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Verifiers

/// Coverage of the interval `|S − 1/((α−1)m^{α−1})| < C₁/m^{α−1/2}`.
/// Passes when the lower Wilson bound reaches 0.99; `m ≤ 2` is reported only.
pub fn verify_p_s(alpha: f64, m: u64, c1: f64, replicas: u64, seed: u64) -> Result<PropositionReport> {
    check_alpha(alpha)?;
    check_replicas(replicas)?;
    if !(c1 > 0.0) {
        return Err(Error::InvalidInput(format!("c1 must be positive, got {c1}")));
    }
    let sampler = SeriesSampler::new(alpha, m)?;
    let mf = m as f64;
    let centre = 1.0 / ((alpha - 1.0) * mf.powf(alpha - 1.0));
    let half = c1 / mf.powf(alpha - 0.5);
    let est = estimate_event(|_, src| (sampler.sample(src) - centre).abs() < half, replicas, seed)?;
    let margin = est.ci_low - 0.99;
    let verdict = if m <= 2 { Verdict::Insufficient } else { Verdict::from_check(margin >= 0.0) };
    let cell = Cell::new(format!("m={m}"))
        .input("alpha", alpha)
        .input("m", mf)
        .input("c1", c1)
        .input("threshold", 0.99)
        .value("centre", centre)
        .value("half_width", half)
        .estimate("cover", &est)
        .judged(verdict, margin);
    let mut notes = vec![format!("pass iff cover_ci_low >= 0.99; seed {seed}")];
    if m <= 2 {
        notes.push("m <= 2 is below any asymptotic regime; reported without a threshold".into());
    }
    Ok(PropositionReport::new("p_S", true, vec![cell], notes))
}

/// Monotone density of `Z′` on `[0, s₊]` (as convexity of its CDF on a
/// `grid`-point mesh) and `n·P(s − m^{−α} < Z′ < s) > 100` on `[s₋, s₊]`.
///
/// The decisions use the exact CDF; `samples > 0` adds Monte Carlo CDF values
/// at the same points for comparison.
pub fn verify_p_zincr(alpha: f64, m: u64, c1: f64, grid: usize, samples: u64, seed: u64) -> Result<PropositionReport> {
    check_alpha(alpha)?;
    if m < 2 {
        return Err(Error::InvalidInput("Z' needs m >= 2".into()));
    }
    let (s_minus, s_plus) = derive_s_bounds(alpha, m, c1)?;
    let r = m - 1;
    let f = |x: f64| partial_sum_cdf(alpha, r, x);
    let mut cells = Vec::new();
    let mut notes = vec![format!("exact CDF decides; seed {seed}")];

    // (a) convexity.
    let xs: Vec<f64> =
        if grid <= 1 { vec![s_plus] } else { (0..grid).map(|i| s_plus * i as f64 / (grid - 1) as f64).collect() };
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let tol = 1e-10 * fs.last().copied().unwrap_or(0.0);
    let mut cell = Cell::new("convexity")
        .input("alpha", alpha)
        .input("m", m as f64)
        .input("c1", c1)
        .input("grid", grid as f64)
        .input("s_plus", s_plus)
        .count("points", xs.len() as u64);
    if xs.len() < 3 {
        notes.push("fewer than 3 grid points: convexity holds vacuously".into());
        cell = cell.judged(Verdict::Insufficient, 0.0);
    } else {
        let mut worst = f64::INFINITY;
        let mut at = 0.0;
        for i in 1..xs.len() - 1 {
            let d2 = fs[i + 1] - 2.0 * fs[i] + fs[i - 1];
            if d2 < worst {
                worst = d2;
                at = xs[i];
            }
        }
        cell = cell
            .value("min_second_difference", worst)
            .value("argmin", at)
            .value("tolerance", tol)
            .judged(Verdict::from_check(worst >= -tol), worst + tol);
    }
    if samples > 0 {
        let zs = run_replicas(samples, seed, |_, src| sample_partial_sum(alpha, 1, r, src));
        let mut inside = 0u64;
        for (&x, &fx) in xs.iter().zip(&fs) {
            let hits = zs.iter().filter(|&&z| z < x).count() as u64;
            let e = McEstimate::from_counts(hits, samples, 0, seed)?;
            if e.ci_low <= fx && fx <= e.ci_high {
                inside += 1;
            }
        }
        cell = cell.count("mc_samples", samples).count("mc_points_covering_exact", inside);
    }
    cells.push(cell);

    // (b) the count of colours landing just below s.
    let p_lower = f(s_minus);
    let n = derive_n(alpha, m, p_lower)?;
    let width = (m as f64).powf(-alpha);
    let points = grid.max(1);
    for i in 0..points {
        let s = if points == 1 { s_minus } else { s_minus + (s_plus - s_minus) * i as f64 / (points - 1) as f64 };
        let p = f(s) - f((s - width).max(0.0));
        let expected = n as f64 * p;
        cells.push(
            Cell::new(format!("count s={s:.6e}"))
                .input("s", s)
                .input("width", width)
                .input("n", n as f64)
                .value("p_window", p)
                .value("n_times_p", expected)
                .judged(Verdict::from_check(expected > 100.0), expected - 100.0),
        );
    }
    notes.push(format!("n = {n} from P(Z' < s_minus) = {p_lower:e}"));
    Ok(PropositionReport::new("p_Zincr", true, cells, notes))
}

/// `P(Z″ ≤ 1/(10(2m)^{α−1}))`, `Z″ = Σ_{j=m}^{2m} η_j/j^α`, on an `m` grid.
/// Passes when the failure frequency does not increase along the grid
/// (each Wilson lower bound at most the previous upper bound).
pub fn verify_p_large_dev(alpha: f64, m_grid: &[u64], replicas: u64, seed: u64) -> Result<PropositionReport> {
    check_alpha(alpha)?;
    check_replicas(replicas)?;
    if m_grid.is_empty() || m_grid.contains(&0) || m_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("m grid must be non-empty, positive and strictly increasing".into()));
    }
    let mut cells = Vec::new();
    let mut ests = Vec::new();
    for &m in m_grid {
        let threshold = 1.0 / (10.0 * (2.0 * m as f64).powf(alpha - 1.0));
        let est = estimate_event(
            |_, src| sample_partial_sum(alpha, m, 2 * m, src) <= threshold,
            replicas,
            derive_key(seed, &m.to_le_bytes(), "large-dev"),
        )?;
        let exact = hypoexp_cdf(alpha, m, 2 * m, threshold);
        let mean: f64 = (m..=2 * m).map(|j| (j as f64).powf(-alpha)).sum();
        cells.push(
            Cell::new(format!("m={m}"))
                .input("m", m as f64)
                .input("threshold", threshold)
                .value("mean_z2", mean)
                .value("exact_failure", exact)
                .estimate("failure", &est),
        );
        ests.push(est);
    }
    let mut trend_margin = f64::INFINITY;
    for w in ests.windows(2) {
        trend_margin = trend_margin.min(w[0].ci_high - w[1].ci_low);
    }
    let mut trend = Cell::new("trend").count("points", m_grid.len() as u64);
    // Least-squares slope of −ln(failure) against m over cells with hits.
    let pts: Vec<(f64, f64)> =
        m_grid.iter().zip(&ests).filter(|(_, e)| e.successes > 0).map(|(&m, e)| (m as f64, -e.p_hat.ln())).collect();
    if pts.len() >= 2 {
        let k = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / k, sy / k);
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        trend = trend.value("c2_fit", sxy / sxx);
    }
    trend = if m_grid.len() < 2 {
        trend.judged(Verdict::Insufficient, 0.0)
    } else {
        trend.judged(Verdict::from_check(trend_margin >= 0.0), trend_margin)
    };
    cells.push(trend);
    let notes = vec![
        "failure = Z'' <= 1/(10 (2m)^(alpha-1)); a near-zero frequency is reported as is".into(),
        format!("seed {seed}"),
    ];
    Ok(PropositionReport::new("p_LargeDev", true, cells, notes))
}

/// `P(Z′ < s′) < (s′/s)^m P(Z′ < s)` for `s′ ≥ s`, with Wilson slack on both
/// sides. Both events are read off the same samples.
pub fn verify_lemma_ss(
    alpha: f64,
    m: u64,
    s: f64,
    s_prime: f64,
    replicas: u64,
    seed: u64,
) -> Result<PropositionReport> {
    check_alpha(alpha)?;
    check_replicas(replicas)?;
    if !(s > 0.0) || s_prime < s {
        return Err(Error::InvalidInput(format!("need 0 < s <= s', got s = {s}, s' = {s_prime}")));
    }
    if m < 2 {
        return Err(Error::InvalidInput("Z' needs m >= 2".into()));
    }
    let r = m - 1;
    let zs = run_replicas(replicas, seed, |_, src| sample_partial_sum(alpha, 1, r, src));
    let lo = zs.iter().filter(|&&z| z < s).count() as u64;
    let hi = zs.iter().filter(|&&z| z < s_prime).count() as u64;
    let e_s = McEstimate::from_counts(lo, replicas, 0, seed)?;
    let e_sp = McEstimate::from_counts(hi, replicas, 0, seed)?;
    let factor = (s_prime / s).powf(m as f64);
    let margin = factor * e_s.ci_high - e_sp.ci_low;
    let exact_s = partial_sum_cdf(alpha, r, s);
    let exact_sp = partial_sum_cdf(alpha, r, s_prime);
    let cell = Cell::new(format!("s={s} s'={s_prime}"))
        .input("alpha", alpha)
        .input("m", m as f64)
        .input("s", s)
        .input("s_prime", s_prime)
        .value("factor", factor)
        .value("exact_s", exact_s)
        .value("exact_s_prime", exact_sp)
        .estimate("below_s", &e_s)
        .estimate("below_s_prime", &e_sp)
        .judged(Verdict::from_check(margin >= 0.0), margin);
    let notes = vec!["pass iff below_s_prime_ci_low <= factor * below_s_ci_high".into(), format!("seed {seed}")];
    Ok(PropositionReport::new("lemma_ss", false, vec![cell], notes))
}

/// Inputs of [`verify_p_growing`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowingInputs {
    pub alpha: f64,
    pub m: u64,
    pub beta: f64,
    pub c1: f64,
    /// Points `s₋ i / grid`, `i = 1..=grid`, paired as `x ≤ y`.
    pub grid: usize,
    /// Arguments for the two-sided bound at `p ∈ {2, 3}`.
    pub xs: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
}

/// Tolerance for the closed-form bound comparison.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// The growth bound `F(x) ≤ e (x/y)^p F(y)` for `Z′` with `p = ⌈m^β⌉` on
/// `0 < x ≤ y ≤ s₋`, and the simplex bounds on `P(Z^{(p)} < x)` for `p = 2, 3`.
pub fn verify_p_growing(inp: &GrowingInputs) -> Result<PropositionReport> {
    let alpha = inp.alpha;
    check_alpha(alpha)?;
    let beta_max = (alpha - 1.0) / alpha;
    if !(inp.beta > 0.0 && inp.beta < beta_max) {
        return Err(Error::InvalidInput(format!("beta must lie in (0, {beta_max}), got {}", inp.beta)));
    }
    if inp.m < 2 {
        return Err(Error::InvalidInput("Z' needs m >= 2".into()));
    }
    let mut cells = Vec::new();
    let mut notes = vec![format!("exact CDF decides; seed {}", inp.seed)];

    // (a) growth of Z′ on [0, s₋].
    let (s_minus, _) = derive_s_bounds(alpha, inp.m, inp.c1)?;
    let p = (inp.m as f64).powf(inp.beta).ceil();
    let r = inp.m - 1;
    let pts: Vec<f64> = (1..=inp.grid.max(1)).map(|i| s_minus * i as f64 / inp.grid.max(1) as f64).collect();
    let fs: Vec<f64> = pts.iter().map(|&x| partial_sum_cdf(alpha, r, x)).collect();
    let mut worst = f64::INFINITY;
    let mut pairs = 0u64;
    for i in 0..pts.len() {
        for j in i..pts.len() {
            pairs += 1;
            let bound = std::f64::consts::E * (pts[i] / pts[j]).powf(p) * fs[j];
            // Relative slack: ln(bound / F(x)), +inf when F(x) underflows.
            let slack = if fs[i] > 0.0 { (bound / fs[i]).ln() } else { f64::INFINITY };
            worst = worst.min(slack);
        }
    }
    let mut cell = Cell::new("growth")
        .input("alpha", alpha)
        .input("m", inp.m as f64)
        .input("beta", inp.beta)
        .input("c1", inp.c1)
        .input("s_minus", s_minus)
        .input("p", p)
        .count("pairs", pairs)
        .value("cdf_at_s_minus", *fs.last().unwrap_or(&0.0));
    if inp.samples > 0 {
        let hits = estimate_cdf_zprime(alpha, inp.m, s_minus, inp.samples, inp.seed)?;
        cell = cell.estimate("mc_below_s_minus", &hits);
    }
    cells.push(cell.judged(Verdict::from_check(worst >= 0.0), worst));

    // (b) the simplex bounds, against closed forms.
    for &q in &[2u64, 3] {
        for &x in &inp.xs {
            let truth = if q == 2 { two_term_cdf(alpha, x) } else { partial_sum_cdf(alpha, 3, x) };
            let (lower, upper) = simplex_bounds(alpha, q, x);
            let cond = (q as f64).powf(alpha) * x;
            let margin = (truth - lower).min(upper - truth);
            let cell = Cell::new(format!("bounds p={q} x={x}"))
                .input("p", q as f64)
                .input("x", x)
                .value("truth", truth)
                .value("lower", lower)
                .value("upper", upper)
                .value("p_alpha_x", cond);
            cells.push(if !(x > 0.0 && cond < 1.0) {
                cell.judged(Verdict::Insufficient, margin)
            } else {
                cell.judged(Verdict::from_check(margin >= -SIMPLEX_TOL), margin)
            });
        }
    }
    if inp.xs.iter().any(|&x| !(x > 0.0 && 3f64.powf(alpha) * x < 1.0)) {
        notes.push("bounds cells with p^alpha x >= 1 are outside the lemma and marked insufficient".into());
    }
    Ok(PropositionReport::new("p_growing", false, cells, notes))
}

/// `m^α P(Z′ < (1−δ)s₋) / P(Z′ < s₋)` on an increasing `m` grid.
/// Passes when the exact ratio strictly decreases along the grid;
/// `replicas > 0` adds tilted Monte Carlo estimates of both probabilities.
pub fn verify_p_delta(
    alpha: f64,
    m_grid: &[u64],
    delta: f64,
    c1: f64,
    replicas: u64,
    seed: u64,
) -> Result<PropositionReport> {
    check_alpha(alpha)?;
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidInput(format!("delta must lie in [0, 1), got {delta}")));
    }
    if m_grid.is_empty() || m_grid.iter().any(|&m| m < 2) || m_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("m grid must be strictly increasing with m >= 2".into()));
    }
    let mut cells = Vec::new();
    let mut ratios = Vec::new();
    for &m in m_grid {
        let (s_minus, _) = derive_s_bounds(alpha, m, c1)?;
        let x = (1.0 - delta) * s_minus;
        let r = m - 1;
        let f_x = partial_sum_cdf(alpha, r, x);
        let f_s = partial_sum_cdf(alpha, r, s_minus);
        let ratio = (m as f64).powf(alpha) * f_x / f_s;
        let mut cell = Cell::new(format!("m={m}"))
            .input("m", m as f64)
            .input("s_minus", s_minus)
            .input("delta", delta)
            .value("cdf_shrunk", f_x)
            .value("cdf_s_minus", f_s)
            .value("ratio", ratio);
        if replicas > 0 {
            let key = derive_key(seed, &m.to_le_bytes(), "delta");
            let a = tilted_cdf(alpha, r, x, replicas, derive_key(key, b"x", "tilt"))?;
            let b = tilted_cdf(alpha, r, s_minus, replicas, derive_key(key, b"s", "tilt"))?;
            cell = cell
                .value("mc_cdf_shrunk", a.estimate)
                .value("mc_cdf_shrunk_se", a.std_error)
                .value("mc_cdf_s_minus", b.estimate)
                .value("mc_cdf_s_minus_se", b.std_error)
                .count("mc_samples", replicas);
        }
        cells.push(cell);
        ratios.push(ratio);
    }
    let mut margin = f64::INFINITY;
    for w in ratios.windows(2) {
        margin = margin.min(w[0] - w[1]);
    }
    let trend = Cell::new("trend").count("points", m_grid.len() as u64);
    cells.push(if m_grid.len() < 2 {
        trend.judged(Verdict::Insufficient, 0.0)
    } else {
        // Strict decrease: a flat sequence fails.
        trend.judged(Verdict::from_check(margin > 0.0), margin)
    });
    let notes = vec![
        "pass iff the ratio strictly decreases along the m grid; the limit itself is not checked".into(),
        format!("c1 = {c1}; seed {seed}"),
    ];
    Ok(PropositionReport::new("p_delta", true, cells, notes))
}

// ---------------------------------------------------------------------------
// The single-urn pipeline

/// Samples used for the tilted estimate of `P(Z′ < s₋)`.
pub const TILT_SAMPLES: u64 = 100_000;

/// Seed of the tilted estimate. Fixed, so that `n` depends on `(α, m, C₁)`
/// only and runs with different replica seeds can be pooled.
pub const TILT_SEED: u64 = 0x5eed_7117;

/// Default number of colours required in the exactly-`(m−1)` class.
pub const MIN_EXACT: u128 = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub alpha: f64,
    pub m: u64,
    pub c1: f64,
    pub min_exact: u128,
    pub delta0: f64,
    pub s_minus: f64,
    pub s_plus: f64,
    /// Estimate of `P(Z′ < s₋)` used for `n`.
    pub p_lower: TiltedEstimate,
    pub p_lower_exact: f64,
    pub n: u128,
    /// `n` recomputed at the upper and lower ends of the `P(Z′ < s₋)` interval
    /// (`None` when the lower end is zero).
    pub n_range: (u128, Option<u128>),
    pub event: McEstimate,
    pub only_zero_exceeds: McEstimate,
    pub exact_at_least: McEstimate,
    pub undecided_fraction: f64,
    /// Mean size of the exactly-`(m−1)` class.
    pub mean_exact_count: f64,
    /// `ln(n P(Z′ < s₊)) / √m`.
    pub c2_fit: f64,
    #[serde(skip)]
    pub outcomes: Vec<AggregateOutcome>,
}

impl Theorem1Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Per-replica outcomes, one JSON object per line.
    pub fn outcomes_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for o in &self.outcomes {
            out.push_str(&serde_json::to_string(o)?);
            out.push('\n');
        }
        Ok(out)
    }
}

impl fmt::Display for Theorem1Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |e: &McEstimate| {
            format!("{:.4} [{:.4}, {:.4}] ({}/{})", e.p_hat, e.ci_low, e.ci_high, e.successes, e.decided())
        };
        writeln!(f, "urn with head start m = {}, alpha = {}, c1 = {}", self.m, self.alpha, self.c1)?;
        writeln!(f, "  s_minus, s_plus     {:.6e}, {:.6e}", self.s_minus, self.s_plus)?;
        writeln!(
            f,
            "  P(Z' < s_minus)     {:.6e} +- {:.2e} (exact {:.6e})",
            self.p_lower.estimate, self.p_lower.std_error, self.p_lower_exact
        )?;
        let hi = self.n_range.1.map_or("inf".to_string(), |v| v.to_string());
        writeln!(f, "  n                   {} (range {} .. {})", self.n, self.n_range.0, hi)?;
        writeln!(f, "  J_m                 {}", row(&self.event))?;
        writeln!(f, "  only zero exceeds   {}", row(&self.only_zero_exceeds))?;
        writeln!(f, "  exact class >= {:<4} {}", self.min_exact, row(&self.exact_at_least))?;
        writeln!(f, "  undecided fraction  {}", self.undecided_fraction)?;
        writeln!(f, "  mean exact class    {:.3}", self.mean_exact_count)?;
        write!(f, "  c2 fit              {:.4}", self.c2_fit)
    }
}

/// Full single-urn pipeline: `s±`, `P(Z′ < s₋)`, the colour count `n`, then
/// `replicas` embedded urns with `n` competitors.
pub fn run_theorem1(alpha: f64, m: u64, c1: f64, replicas: u64, seed: u64, min_exact: u128) -> Result<Theorem1Report> {
    check_alpha(alpha)?;
    check_replicas(replicas)?;
    if m < 2 {
        return Err(Error::InvalidInput("the pipeline needs m >= 2".into()));
    }
    let delta0 = derive_delta0(alpha);
    let (s_minus, s_plus) = derive_s_bounds(alpha, m, c1)?;
    let r = m - 1;
    let p_lower = tilted_cdf(alpha, r, s_minus, TILT_SAMPLES, TILT_SEED)?;
    let p_lower_exact = partial_sum_cdf(alpha, r, s_minus);
    let n = derive_n(alpha, m, p_lower.estimate)?;
    let (p_lo, p_hi) = p_lower.interval();
    let n_range = (derive_n(alpha, m, p_hi.min(1.0))?, if p_lo > 0.0 { Some(derive_n(alpha, m, p_lo)?) } else { None });

    let sampler = SeriesSampler::new(alpha, m)?;
    let chain = BirthChain::new(alpha, 1, 2 * m as usize);
    let outcomes: Vec<AggregateOutcome> =
        run_replicas(replicas, seed, |_, src| aggregate_replica(&sampler, &chain, n, src))
            .into_iter()
            .collect::<Result<_>>()?;

    let count = |pred: &dyn Fn(&AggregateOutcome) -> bool| outcomes.iter().filter(|o| pred(o)).count() as u64;
    let ev = count(&|o| theorem1_event_counts(o.only_zero_exceeds(), o.exact_count, min_exact));
    let oz = count(&|o| o.only_zero_exceeds());
    let ex = count(&|o| o.exact_count >= min_exact);
    let mean_exact_count = outcomes.iter().map(|o| o.exact_count as f64).sum::<f64>() / replicas as f64;
    let c2_fit = (n as f64 * partial_sum_cdf(alpha, r, s_plus)).ln() / (m as f64).sqrt();
    Ok(Theorem1Report {
        alpha,
        m,
        c1,
        min_exact,
        delta0,
        s_minus,
        s_plus,
        p_lower,
        p_lower_exact,
        n,
        n_range,
        event: McEstimate::from_counts(ev, replicas, 0, seed)?,
        only_zero_exceeds: McEstimate::from_counts(oz, replicas, 0, seed)?,
        exact_at_least: McEstimate::from_counts(ex, replicas, 0, seed)?,
        undecided_fraction: 0.0,
        mean_exact_count,
        c2_fit,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_evaluators() {
        let t = estimate_event(|_, _| true, 400, 1).unwrap();
        assert_eq!(t.p_hat, 1.0);
        assert!(t.ci_low > 0.99);
        let f = estimate_event(|_, _| false, 400, 1).unwrap();
        assert_eq!(f.p_hat, 0.0);
        assert_eq!(f.ci_low, 0.0);
        assert!(estimate_event(|_, _| true, 0, 1).is_err());
    }

    #[test]
    fn undecided_replicas_are_excluded() {
        let e = estimate_event(
            |i, _| match i % 4 {
                0 => Outcome::Undecided,
                1 => Outcome::Success,
                _ => Outcome::Failure,
            },
            400,
            3,
        )
        .unwrap();
        assert_eq!((e.successes, e.undecided, e.trials), (100, 100, 400));
        assert!((e.p_hat - 1.0 / 3.0).abs() < 1e-12);
        assert!((e.undecided_fraction() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn merge_pools_counts() {
        let a = McEstimate::from_counts(30, 100, 2, 1).unwrap();
        let b = McEstimate::from_counts(40, 100, 0, 2).unwrap();
        let c = a.merge(&b).unwrap();
        assert_eq!((c.successes, c.trials, c.undecided, c.seed_base), (70, 200, 2, 1));
        assert!(McEstimate::from_counts(5, 4, 0, 0).is_err());
    }

    #[test]
    fn wilson_coverage_on_fair_coin() {
        // Exact coverage of the 95% Wilson interval at n = 10⁴, p = 1/2,
        // summing the binomial pmf over the covering success counts.
        let n = 10_000u64;
        let mut ln_pmf = vec![0.0f64; n as usize + 1];
        let ln_half = 0.5f64.ln();
        let mut ln_choose = 0.0f64;
        for k in 0..=n {
            if k > 0 {
                ln_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
            }
            ln_pmf[k as usize] = ln_choose + n as f64 * ln_half;
        }
        let exact: f64 = (0..=n)
            .filter(|&k| {
                let (lo, hi) = wilson_interval(k, n, Z95);
                lo <= 0.5 && 0.5 <= hi
            })
            .map(|k| ln_pmf[k as usize].exp())
            .sum();
        assert!(exact > 0.94 && exact < 0.96, "exact coverage {exact}");

        let covered = (0..100u64)
            .filter(|&meta| {
                let e = estimate_event(|_, src| src.uniform() <= 0.5, n, 1000 + meta).unwrap();
                e.ci_low <= 0.5 && 0.5 <= e.ci_high
            })
            .count();
        assert!(covered >= 94, "covered {covered} of 100");
    }

    #[test]
    fn estimates_are_seed_deterministic() {
        let a = estimate_cdf_zprime(2.0, 4, 0.5, 5000, 9).unwrap();
        let b = estimate_cdf_zprime(2.0, 4, 0.5, 5000, 9).unwrap();
        assert_eq!(a, b);
        let c = estimate_cdf_zprime(2.0, 4, 0.5, 5000, 10).unwrap();
        assert_ne!(a.successes, c.successes);
    }

    fn within_3_sigma(e: &McEstimate, p: f64) -> bool {
        let sd = (p * (1.0 - p) / e.trials as f64).sqrt();
        (e.p_hat - p).abs() <= 3.0 * sd
    }

    #[test]
    fn zprime_cdf_small_cases() {
        for &s in &[0.1, 0.7, 2.0] {
            let e = estimate_cdf_zprime(2.5, 2, s, 100_000, 4).unwrap();
            assert!(within_3_sigma(&e, 1.0 - (-s).exp()), "m=2 s={s}: {}", e.p_hat);
            let e = estimate_cdf_zprime(2.0, 3, s, 100_000, 5).unwrap();
            let exact = 1.0 - (4.0 * (-s).exp() - (-4.0 * s).exp()) / 3.0;
            assert!(within_3_sigma(&e, exact), "m=3 s={s}: {} vs {exact}", e.p_hat);
        }
        let e = estimate_cdf_zprime(2.0, 10, 1e3, 1000, 6).unwrap();
        assert_eq!(e.p_hat, 1.0);
        assert!(estimate_cdf_zprime(2.0, 3, 0.0, 10, 1).is_err());
    }

    #[test]
    fn tilt_matches_exact_deep_tail() {
        for &(m, s) in &[(5u64, 0.1), (20, 0.03), (30, 0.0276)] {
            let exact = partial_sum_cdf(2.0, m - 1, s);
            let t = tilted_cdf(2.0, m - 1, s, 50_000, 8).unwrap();
            assert!(t.theta > 0.0);
            assert!(
                (t.estimate - exact).abs() < 4.0 * t.std_error,
                "m={m}: {} +- {} vs {exact}",
                t.estimate,
                t.std_error
            );
            assert!(t.std_error < 0.05 * exact);
        }
        // Above the mean there is no tilt.
        assert_eq!(tilt_for(2.0, 4, 10.0), 0.0);
    }

    #[test]
    fn p_s_verdicts() {
        let pass = verify_p_s(2.0, 1000, 6.0, 2000, 1).unwrap();
        assert_eq!(pass.verdict, Verdict::Pass, "{pass}");
        let fail = verify_p_s(2.0, 1000, 0.001, 2000, 1).unwrap();
        assert_eq!(fail.verdict, Verdict::Fail);
        let tiny = verify_p_s(2.0, 2, 6.0, 500, 1).unwrap();
        assert_eq!(tiny.verdict, Verdict::Insufficient);
        // Recompute the decision from the stored counts.
        let c = &pass.cells[0];
        let (lo, _) = wilson_interval(c.counts["cover_successes"], c.counts["cover_trials"], Z95);
        assert_eq!(lo >= 0.99, c.verdict == Verdict::Pass);
    }

    #[test]
    fn zincr_convexity_threshold() {
        // m = 3, α = 2: the density rises up to ln 4 / 3 ≈ 0.4621.
        let knee = 4f64.ln() / 3.0;
        for &(c1, want) in &[(0.3, Verdict::Pass), (1.0, Verdict::Fail)] {
            let s_plus = (1.0 + c1 / 3f64.sqrt()) / 3.0;
            assert_eq!(s_plus < knee, want == Verdict::Pass);
            let r = verify_p_zincr(2.0, 3, c1, 101, 0, 1).unwrap();
            assert_eq!(r.cell("convexity").unwrap().verdict, want, "{r}");
        }
        let one = verify_p_zincr(2.0, 3, 0.3, 1, 0, 1).unwrap();
        assert_eq!(one.cell("convexity").unwrap().verdict, Verdict::Insufficient);
    }

    #[test]
    fn zincr_count_margin_positive_at_s_minus() {
        let r = verify_p_zincr(2.0, 10, 1.0, 5, 20_000, 2).unwrap();
        let counts: Vec<&Cell> = r.cells.iter().filter(|c| c.label.starts_with("count")).collect();
        assert_eq!(counts.len(), 5);
        assert!(counts.iter().all(|c| c.margin > 0.0 && c.verdict == Verdict::Pass));
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn large_dev_trend() {
        let r = verify_p_large_dev(2.0, &[1, 2, 4, 50, 100], 20_000, 3).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r}");
        let m1 = r.cell("m=1").unwrap();
        let exact = m1.values["exact_failure"];
        let p = m1.values["failure_p_hat"];
        assert!((p - exact).abs() < 4.0 * (exact * (1.0 - exact) / 20_000.0).sqrt());
        // Far below the mean the failure frequency is honestly zero.
        assert_eq!(r.cell("m=100").unwrap().counts["failure_successes"], 0);
        assert!(verify_p_large_dev(2.0, &[50, 100], 0, 3).is_err());
    }

    #[test]
    fn lemma_ss_cases() {
        let eq = verify_lemma_ss(2.0, 5, 0.3, 0.3, 10_000, 1).unwrap();
        assert_eq!(eq.verdict, Verdict::Pass);
        let r = verify_lemma_ss(2.0, 5, 0.1, 0.2, 200_000, 1).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let c = &r.cells[0];
        let e = McEstimate::from_counts(c.counts["below_s_successes"], c.counts["below_s_trials"], 0, 1).unwrap();
        assert!(within_3_sigma(&e, c.values["exact_s"]));
        assert!(verify_lemma_ss(2.0, 5, 0.2, 0.1, 10, 1).is_err());
    }

    #[test]
    fn simplex_bounds_closed_form() {
        for &x in &[0.01f64, 0.05, 0.1] {
            let b = 4.0;
            let truth = 1.0 - (b * (-x).exp() - (-b * x).exp()) / (b - 1.0);
            let (lo, hi) = (2.0 * x * x * (-4.0 * x).exp(), 2.0 * x * x);
            assert!(lo - 1e-12 <= truth && truth <= hi + 1e-12, "x={x}");
        }
        let r = verify_p_growing(&GrowingInputs {
            alpha: 2.0,
            m: 20,
            beta: 0.3,
            c1: 1.0,
            grid: 8,
            xs: vec![0.01, 0.05, 0.1],
            samples: 0,
            seed: 1,
        })
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r}");
        assert_eq!(r.cells.len(), 1 + 6);
    }

    #[test]
    fn growing_rejects_boundary_beta() {
        let mut inp = GrowingInputs { alpha: 2.0, m: 20, beta: 0.5, c1: 1.0, grid: 4, xs: vec![], samples: 0, seed: 1 };
        assert!(verify_p_growing(&inp).is_err());
        // With x = y only, the factor e carries the check.
        inp.beta = 0.4;
        inp.grid = 1;
        let r = verify_p_growing(&inp).unwrap();
        assert!((r.cells[0].margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_verdicts() {
        let grid = [10, 20, 40];
        let zero = verify_p_delta(2.0, &grid, 0.0, 1.0, 0, 1).unwrap();
        assert_eq!(zero.verdict, Verdict::Fail);
        for (c, &m) in zero.cells.iter().zip(&grid) {
            assert!((c.values["ratio"] - (m * m) as f64).abs() < 1e-9);
        }
        let half = verify_p_delta(2.0, &grid, 0.5, 1.0, 0, 1).unwrap();
        assert_eq!(half.verdict, Verdict::Pass);
        // The proof's δ = (α−1)/(20·2^α) does not yet decrease on this grid.
        let proof = verify_p_delta(2.0, &grid, 1.0 / 80.0, 1.0, 0, 1).unwrap();
        assert_eq!(proof.verdict, Verdict::Fail);
        let r = |m: &str| proof.cell(m).unwrap().values["ratio"];
        assert!((r("m=10") - 91.2).abs() < 0.1 && (r("m=20") - 331.1).abs() < 0.1);
    }

    #[test]
    fn delta_tilted_corroboration() {
        let r = verify_p_delta(2.0, &[10, 20], 0.5, 1.0, 20_000, 4).unwrap();
        for c in r.cells.iter().filter(|c| c.label.starts_with("m=")) {
            let (mc, se, ex) = (c.values["mc_cdf_shrunk"], c.values["mc_cdf_shrunk_se"], c.values["cdf_shrunk"]);
            assert!((mc - ex).abs() < 4.0 * se, "{}: {mc} vs {ex}", c.label);
        }
    }

    #[test]
    fn theorem1_pipeline_small() {
        let a = run_theorem1(2.0, 10, 1.0, 200, 11, MIN_EXACT).unwrap();
        let b = run_theorem1(2.0, 10, 1.0, 200, 11, MIN_EXACT).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.undecided_fraction, 0.0);
        assert!(a.n > 4_000_000_000 && a.n < 6_500_000_000, "n = {}", a.n);
        assert!(a.n_range.0 <= a.n && a.n <= a.n_range.1.unwrap());
        // The exact class has ~ n P(N_S = m−1) members; thousands at this n.
        assert!(a.mean_exact_count > 100.0);
        assert_eq!(a.outcomes.len(), 200);

        let one = run_theorem1(2.0, 10, 1.0, 1, 11, MIN_EXACT).unwrap();
        assert!(one.event.ci_high - one.event.ci_low > 0.7);

        let other = run_theorem1(2.0, 10, 1.0, 50, 12, MIN_EXACT).unwrap();
        assert_eq!(other.n, a.n);

        let none = run_theorem1(2.0, 10, 1.0, 200, 11, a.n + 1).unwrap();
        assert_eq!(none.event.successes, 0);
        assert_eq!(none.event.p_hat, 0.0);
    }
}
