//! Flag and config-file values. A flag wins over the file, the file over the
//! built-in default.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};
use warmlab::graph::BlockSpec;
use warmlab::{ParamInputs, ParamSet};

use crate::Usage;

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Reinforcement exponent
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Head start of colour 0 (urn) / P-child threshold (tree)
    #[arg(long, global = true)]
    pub m: Option<u64>,
    /// Number of colours (urn) or tree arity
    #[arg(long, global = true)]
    pub n: Option<u64>,
    /// Urn steps per vertex
    #[arg(long = "M", global = true)]
    #[serde(rename = "M")]
    pub big_m: Option<u64>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Rate decay per tree level
    #[arg(long, global = true)]
    pub q: Option<f64>,
    #[arg(long, global = true)]
    pub c1: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub replicas: Option<u64>,
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Worker threads; defaults to the available parallelism
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Settings {
    /// `self` with gaps filled from `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        Settings {
            alpha: self.alpha.or(lower.alpha),
            m: self.m.or(lower.m),
            n: self.n.or(lower.n),
            big_m: self.big_m.or(lower.big_m),
            eps: self.eps.or(lower.eps),
            q: self.q.or(lower.q),
            c1: self.c1.or(lower.c1),
            seed: self.seed.or(lower.seed),
            replicas: self.replicas.or(lower.replicas),
            horizon: self.horizon.or(lower.horizon),
            depth: self.depth.or(lower.depth),
            threads: self.threads.or(lower.threads),
        }
    }

    pub fn from_file(path: &Path) -> anyhow::Result<Settings> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read config {}: {e}", path.display())))?;
        let s: Settings =
            toml::from_str(&text).map_err(|e| Usage(format!("config {}: {}", path.display(), e.message())))?;
        Ok(s)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(2.0)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn replicas(&self) -> u64 {
        self.replicas.unwrap_or(1000)
    }

    pub fn require<T: Copy>(&self, v: Option<T>, key: &str) -> anyhow::Result<T> {
        v.ok_or_else(|| Usage(format!("missing required key `{key}` (flag --{key} or config file)")).into())
    }

    /// Full ledger inputs; every key except `c1` must be present.
    pub fn param_inputs(&self) -> anyhow::Result<ParamInputs> {
        Ok(ParamInputs {
            alpha: self.require(self.alpha, "alpha")?,
            m: self.require(self.m, "m")?,
            n: self.require(self.n, "n")?,
            big_m: self.require(self.big_m, "M")?,
            eps: self.require(self.eps, "eps")?,
            q: self.require(self.q, "q")?,
            c1: self.c1.unwrap_or(warmlab::params::DEFAULT_C1),
        })
    }

    pub fn param_set(&self) -> anyhow::Result<ParamSet> {
        let inputs = self.param_inputs()?;
        ParamSet::derive(&inputs).map_err(|e| Usage(e.to_string()).into())
    }
}

/// Parses a blocks file: one `arity depth q` line per tree, `#` comments.
pub fn parse_blocks(text: &str) -> anyhow::Result<Vec<BlockSpec>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = || Usage(format!("blocks line {}: expected `arity depth q`, got `{line}`", i + 1));
        if f.len() != 3 {
            return Err(bad().into());
        }
        out.push(BlockSpec {
            arity: f[0].parse().map_err(|_| bad())?,
            depth: f[1].parse().map_err(|_| bad())?,
            q: f[2].parse().map_err(|_| bad())?,
        });
    }
    if out.is_empty() {
        return Err(Usage("blocks file lists no trees".into()).into());
    }
    Ok(out)
}

pub fn read_blocks(path: &PathBuf) -> anyhow::Result<Vec<BlockSpec>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading blocks file {}", path.display()))
        .map_err(|e| Usage(format!("{e:#}")))?;
    parse_blocks(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_file_beats_default() {
        let flags = Settings { m: Some(5), ..Default::default() };
        let file: Settings = toml::from_str("m = 3\nalpha = 1.5\n").unwrap();
        let s = flags.over(file);
        assert_eq!(s.m, Some(5));
        assert_eq!(s.alpha(), 1.5);
        assert_eq!(s.seed(), 0);
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        assert!(toml::from_str::<Settings>("alhpa = 2.0\n").is_err());
        let s: Settings = toml::from_str("M = 100\n").unwrap();
        assert_eq!(s.big_m, Some(100));
    }

    #[test]
    fn missing_key_is_usage_error() {
        let s = Settings { alpha: Some(2.0), ..Default::default() };
        let e = s.param_inputs().unwrap_err();
        assert!(e.downcast_ref::<Usage>().is_some());
        assert!(e.to_string().contains("`m`"));
    }

    #[test]
    fn blocks_file() {
        let b = parse_blocks("# chain\n3 2 0.1\n4 2 0.05 # second\n\n").unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[1].arity, 4);
        assert!(parse_blocks("3 2\n").is_err());
        assert!(parse_blocks("# nothing\n").is_err());
    }
}
