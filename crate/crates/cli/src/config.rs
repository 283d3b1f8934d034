//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use ctoq::haarhp::{BasisOrder, HpConfig, XiSpec};
use serde::Serialize;

pub const DEFAULT_MAX_QUBITS: usize = 8;
pub const DEFAULT_SEED: u64 = 42;

const KEYS: [&str; 9] =
    ["n_qubits_bh", "n_qubits_msg", "n_qubits_rad", "xi", "trials", "seed", "epsilon", "max_qubits", "basis_order"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub n_qubits_bh: usize,
    pub n_qubits_msg: usize,
    /// Radiation sizes to sweep, in the order given.
    pub n_qubits_rad: Vec<usize>,
    pub xi: XiSpec,
    pub trials: usize,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub max_qubits: usize,
    pub basis_order: BasisOrder,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected `key = value`", no + 1))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                bail!("line {}: unknown key '{k}'", no + 1);
            }
            if map.insert(k.to_string(), v.to_string()).is_some() {
                bail!("line {}: duplicate key '{k}'", no + 1);
            }
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        let req_usize = |k: &str| -> Result<usize> {
            get(k).ok_or_else(|| anyhow!("missing key '{k}'"))?.parse().with_context(|| format!("bad value for '{k}'"))
        };
        let n_bh = req_usize("n_qubits_bh")?;
        let n_msg = req_usize("n_qubits_msg")?;
        let rads = match get("n_qubits_rad") {
            Some(v) => parse_list(v)?,
            None => (0..=n_bh + n_msg).collect(),
        };
        if rads.is_empty() {
            bail!("n_qubits_rad is empty");
        }
        let xi = parse_xi(get("xi").unwrap_or("pure"))?;
        let trials = match get("trials") {
            Some(v) => v.parse().context("bad value for 'trials'")?,
            None => 100,
        };
        let seed = get("seed").map(|v| v.parse().context("bad value for 'seed'")).transpose()?;
        let epsilon = get("epsilon").map(|v| v.parse().context("bad value for 'epsilon'")).transpose()?;
        let max_qubits = match get("max_qubits") {
            Some(v) => v.parse().context("bad value for 'max_qubits'")?,
            None => DEFAULT_MAX_QUBITS,
        };
        let basis_order = match get("basis_order").unwrap_or("zx") {
            "zx" | "ZX" => BasisOrder::ZX,
            "xz" | "XZ" => BasisOrder::XZ,
            other => bail!("basis_order must be zx or xz, got '{other}'"),
        };
        Ok(RunConfig { n_qubits_bh: n_bh, n_qubits_msg: n_msg, n_qubits_rad: rads, xi, trials, seed, epsilon, max_qubits, basis_order })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    /// Checks the size cap and builds one HpConfig per radiation size.
    pub fn hp_configs(&self, seed: u64, allow_large: bool) -> Result<Vec<HpConfig>> {
        let total = self.n_qubits_bh + self.n_qubits_msg;
        if total > self.max_qubits && !allow_large {
            bail!("N + k = {total} exceeds the cap of {} qubits (raise max_qubits or pass --allow-large)", self.max_qubits);
        }
        self.n_qubits_rad
            .iter()
            .map(|&l| {
                let mut c = HpConfig::new(self.n_qubits_bh, self.n_qubits_msg, l, &self.xi, seed, self.trials)?;
                c.basis_order = self.basis_order;
                Ok(c)
            })
            .collect()
    }
}

/// `3`, `1,2,4` or `0..3` (inclusive).
pub fn parse_list(v: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = v.split_once("..") {
        let a: usize = a.trim().parse().context("bad range start")?;
        let b: usize = b.trim().parse().context("bad range end")?;
        if a > b {
            bail!("empty range {a}..{b}");
        }
        return Ok((a..=b).collect());
    }
    v.split(',').map(|s| s.trim().parse::<usize>().with_context(|| format!("bad list entry '{s}'"))).collect()
}

pub fn parse_xi(v: &str) -> Result<XiSpec> {
    match v {
        "pure" => Ok(XiSpec::Pure),
        "maximally_mixed" => Ok(XiSpec::MaximallyMixed),
        _ => {
            let Some(rest) = v.strip_prefix("mixed:") else {
                bail!("xi must be pure, maximally_mixed or mixed:<csv>, got '{v}'");
            };
            let w = rest
                .split(',')
                .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad spectrum entry '{s}'")))
                .collect::<Result<Vec<_>>>()?;
            Ok(XiSpec::Mixed(w))
        }
    }
}

/// Seed precedence: explicit flag, then config, then `CTOQ_SEED`, then 42.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match std::env::var("CTOQ_SEED") {
        Ok(s) => s.trim().parse().with_context(|| format!("CTOQ_SEED is not an integer: '{s}'")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let c = RunConfig::parse(
            "# comment\nn_qubits_bh = 3\nn_qubits_msg = 1 # trailing\nn_qubits_rad = 2..4\nxi = mixed:0.5,0.5\ntrials=10\nseed = 9\nbasis_order = xz\n",
        )
        .unwrap();
        assert_eq!(c.n_qubits_rad, vec![2, 3, 4]);
        assert_eq!(c.xi, XiSpec::Mixed(vec![0.5, 0.5]));
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.basis_order, BasisOrder::XZ);
        assert_eq!(c.max_qubits, DEFAULT_MAX_QUBITS);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("n_qubits_bh = 2\n").is_err());
        assert!(RunConfig::parse("n_qubits_bh = 2\nn_qubits_msg = 1\nbogus = 1\n").is_err());
        assert!(RunConfig::parse("n_qubits_bh = 2\nn_qubits_msg = 1\nxi = hot\n").is_err());
        assert!(RunConfig::parse("n_qubits_bh = 2\nn_qubits_msg = 1\nn_qubits_msg = 1\n").is_err());
        let c = RunConfig::parse("n_qubits_bh = 2\nn_qubits_msg = 1\ntrials = 0\n").unwrap();
        assert!(c.hp_configs(1, false).is_err());
        let c = RunConfig::parse("n_qubits_bh = 8\nn_qubits_msg = 1\nn_qubits_rad = 0\n").unwrap();
        assert!(c.hp_configs(1, false).is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("1, 3").unwrap(), vec![1, 3]);
        assert_eq!(parse_list("2").unwrap(), vec![2]);
        assert!(parse_list("3..1").is_err());
    }
}
