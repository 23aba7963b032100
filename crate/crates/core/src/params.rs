//! The parameter ledger shared by the urn, WARM and analysis modules.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::bisect;

/// Safety factor applied to the maximal admissible `δ₀`.
pub const DELTA0_SHRINK: f64 = 0.99;

/// Default confidence constant `C₁`.
pub const DEFAULT_C1: f64 = 6.0;

/// Largest `δ ∈ (0, 1/2)` with `(3δ/(1−2δ))^α ≤ δ/2`, times [`DELTA0_SHRINK`].
pub fn derive_delta0(alpha: f64) -> f64 {
    assert!(alpha > 1.0, "derive_delta0 needs alpha > 1");
    let g = |d: f64| (3.0 * d / (1.0 - 2.0 * d)).powf(alpha) - d / 2.0;
    // g < 0 near 0 (α > 1) and g > 0 once 3δ/(1−2δ) ≥ 1, i.e. δ ≥ 1/5.
    // Walk up from 0 to bracket the first sign change.
    let mut lo = 1e-12;
    while g(lo) >= 0.0 {
        lo *= 0.5;
        assert!(lo > 0.0, "no admissible delta0");
    }
    let mut hi = lo;
    while g(hi) < 0.0 && hi < 0.2 {
        lo = hi;
        hi = (hi * 1.5).min(0.2);
    }
    bisect(lo, hi, g) * DELTA0_SHRINK
}

/// `s± = (1/(α−1) ± C₁/√m) / m^{α−1}`.
pub fn s_bounds_raw(alpha: f64, m: u64, c1: f64) -> (f64, f64) {
    let m = m as f64;
    let centre = 1.0 / (alpha - 1.0);
    let half = c1 / m.sqrt();
    let scale = m.powf(alpha - 1.0);
    ((centre - half) / scale, (centre + half) / scale)
}

/// [`s_bounds_raw`], rejecting `s₋ ≤ 0`.
pub fn derive_s_bounds(alpha: f64, m: u64, c1: f64) -> Result<(f64, f64)> {
    let (lo, hi) = s_bounds_raw(alpha, m, c1);
    if lo <= 0.0 {
        return Err(Error::Param(format!(
            "s_minus = {lo:e} <= 0: m = {m} is too small for c1 = {c1} (need c1/sqrt(m) < 1/(alpha-1))"
        )));
    }
    Ok((lo, hi))
}

/// Number of competitor colours `⌈100 m^α / p⌉` given `p ≈ P(Z′ < s₋)`.
///
/// Returned as `u128`: at moderate `m` the count exceeds `u64`. Above 2^53 the
/// ceiling is only as exact as the `f64` quotient.
pub fn derive_n(alpha: f64, m: u64, p_lower: f64) -> Result<u128> {
    if !(p_lower > 0.0 && p_lower <= 1.0) {
        return Err(Error::Param(format!("p_lower must lie in (0, 1], got {p_lower}")));
    }
    let x = (100.0 * (m as f64).powf(alpha) / p_lower).ceil();
    if !x.is_finite() || x >= u128::MAX as f64 {
        return Err(Error::Param(format!("colour count overflows: {x:e}")));
    }
    Ok(x as u128)
}

/// `M′ = ⌈ε⁻² q⁻¹ M⌉`.
pub fn derive_mprime(big_m: u64, eps: f64, q: f64) -> u64 {
    (big_m as f64 / (eps * eps * q)).ceil() as u64
}

/// User-supplied parameters; everything else is derived.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamInputs {
    pub alpha: f64,
    pub m: u64,
    pub n: u64,
    #[serde(rename = "M")]
    pub big_m: u64,
    pub eps: f64,
    pub q: f64,
    #[serde(default = "default_c1")]
    pub c1: f64,
}

fn default_c1() -> f64 {
    DEFAULT_C1
}

/// Full parameter ledger.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub alpha: f64,
    pub m: u64,
    pub n: u64,
    #[serde(rename = "M")]
    pub big_m: u64,
    pub eps: f64,
    pub q: f64,
    pub delta0: f64,
    pub c1: f64,
    pub mprime: u64,
    pub s_minus: f64,
    pub s_plus: f64,
}

/// Named constraint of the ledger.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Constraint {
    /// α > 1.
    Alpha,
    /// m, n, M ≥ 1.
    Positive,
    /// ε ∈ (0, 1), q ∈ (0, 1).
    Unit,
    /// `(3δ₀/(1−2δ₀))^α < δ₀/2`, `δ₀ ∈ (0, 1/2)`.
    DeltaDef,
    /// `M > 4mn`.
    Mmn,
    /// `q < min(ε²/M, δ₀ε²/n)`.
    QeM,
    /// `M′ = ⌈ε⁻²q⁻¹M⌉`.
    MPrime,
    /// `s₋ > 0` and `s±` match their closed form.
    Spm,
}

impl Constraint {
    pub fn name(self) -> &'static str {
        match self {
            Constraint::Alpha => "alpha",
            Constraint::Positive => "positive",
            Constraint::Unit => "unit",
            Constraint::DeltaDef => "delta-def",
            Constraint::Mmn => "Mmn",
            Constraint::QeM => "qeM",
            Constraint::MPrime => "mprime",
            Constraint::Spm => "spm",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl ParamSet {
    pub fn derive(inputs: &ParamInputs) -> Result<Self> {
        if !(inputs.alpha > 1.0) {
            return Err(Error::Param(format!("alpha must exceed 1, got {}", inputs.alpha)));
        }
        if !(inputs.eps > 0.0 && inputs.q > 0.0) {
            return Err(Error::Param("eps and q must be positive".into()));
        }
        let (s_minus, s_plus) = s_bounds_raw(inputs.alpha, inputs.m.max(1), inputs.c1);
        Ok(Self {
            alpha: inputs.alpha,
            m: inputs.m,
            n: inputs.n,
            big_m: inputs.big_m,
            eps: inputs.eps,
            q: inputs.q,
            delta0: derive_delta0(inputs.alpha),
            c1: inputs.c1,
            mprime: derive_mprime(inputs.big_m, inputs.eps, inputs.q),
            s_minus,
            s_plus,
        })
    }

    pub fn inputs(&self) -> ParamInputs {
        ParamInputs {
            alpha: self.alpha,
            m: self.m,
            n: self.n,
            big_m: self.big_m,
            eps: self.eps,
            q: self.q,
            c1: self.c1,
        }
    }

    /// `t₀(v) = ε/λ_v`.
    pub fn t0(&self, rate: f64) -> f64 {
        self.eps / rate
    }

    /// `t₁(v) = M/(ελ_v)`.
    pub fn t1(&self, rate: f64) -> f64 {
        self.big_m as f64 / (self.eps * rate)
    }

    pub fn vertex_times(&self, rate: f64) -> VertexTimes {
        VertexTimes { t0: self.t0(rate), t1: self.t1(rate) }
    }

    /// Every violated constraint, sorted. Empty means valid.
    pub fn validate(&self) -> Vec<Constraint> {
        let mut out = Vec::new();
        if !(self.alpha > 1.0) {
            out.push(Constraint::Alpha);
        }
        if self.m == 0 || self.n == 0 || self.big_m == 0 {
            out.push(Constraint::Positive);
        }
        if !(self.eps > 0.0 && self.eps < 1.0 && self.q > 0.0 && self.q < 1.0) {
            out.push(Constraint::Unit);
        }
        let d = self.delta0;
        let delta_ok = d > 0.0 && d < 0.5 && self.alpha > 1.0 && (3.0 * d / (1.0 - 2.0 * d)).powf(self.alpha) < d / 2.0;
        if !delta_ok {
            out.push(Constraint::DeltaDef);
        }
        // Integer arithmetic, so the boundary M = 4mn is exact.
        let four_mn = 4u128 * self.m as u128 * self.n as u128;
        if !(self.big_m as u128 > four_mn) {
            out.push(Constraint::Mmn);
        }
        let eps2 = self.eps * self.eps;
        let bound = (eps2 / self.big_m as f64).min(self.delta0 * eps2 / self.n as f64);
        if !(self.q < bound) {
            out.push(Constraint::QeM);
        }
        if self.eps > 0.0 && self.q > 0.0 && self.mprime != derive_mprime(self.big_m, self.eps, self.q) {
            out.push(Constraint::MPrime);
        }
        let (lo, hi) = s_bounds_raw(self.alpha, self.m.max(1), self.c1);
        if !(self.s_minus > 0.0) || self.s_minus != lo || self.s_plus != hi {
            out.push(Constraint::Spm);
        }
        out.sort();
        out.dedup();
        out
    }

    /// Parse the flat `key = value` config format. Derived keys are recomputed.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let inputs: ParamInputs = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        Self::derive(&inputs)
    }

    /// Flat `key = value` rendering, one key per line.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.table() {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    /// Key/value pairs in a fixed order, values rendered exactly.
    pub fn table(&self) -> Vec<(&'static str, String)> {
        vec![
            ("alpha", fmt_f64(self.alpha)),
            ("m", self.m.to_string()),
            ("n", self.n.to_string()),
            ("M", self.big_m.to_string()),
            ("eps", fmt_f64(self.eps)),
            ("q", fmt_f64(self.q)),
            ("c1", fmt_f64(self.c1)),
            ("delta0", fmt_f64(self.delta0)),
            ("mprime", self.mprime.to_string()),
            ("s_minus", fmt_f64(self.s_minus)),
            ("s_plus", fmt_f64(self.s_plus)),
        ]
    }

    /// Field-by-field differences, for refusing to merge mismatched runs.
    pub fn diff(&self, other: &ParamSet) -> BTreeMap<&'static str, (String, String)> {
        self.table()
            .into_iter()
            .zip(other.table())
            .filter(|((_, a), (_, b))| a != b)
            .map(|((k, a), (_, b))| (k, (a, b)))
            .collect()
    }
}

/// Always prints a decimal point so the value re-parses as a float.
fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// `t₀(v)` and `t₁(v)` for one vertex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexTimes {
    pub t0: f64,
    pub t1: f64,
}
