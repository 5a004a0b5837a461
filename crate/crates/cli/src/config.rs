//! Job descriptors. Integers are carried as decimal strings on disk.

use std::str::FromStr;

use anticyclo_core::arith::residue::{factorize, gcd, is_prime};
use anticyclo_core::curve::EllipticCurveQ;
use anticyclo_core::quadratic::forms::is_fundamental;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const CONFIG_SCHEMA: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Hypotheses,
    Sieve,
    Brandt,
    Theta,
    Stabilize,
    Glue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRecord {
    pub label: String,
    pub a: [String; 5],
    pub conductor: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimePower {
    pub p: String,
    pub n: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlueRecord {
    pub m: String,
    pub primes: Vec<PrimePower>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    #[serde(default = "default_sieve")]
    pub sieve: String,
    #[serde(default = "default_hecke")]
    pub hecke: String,
}

impl Default for Bounds {
    fn default() -> Self {
        Self { sieve: default_sieve(), hecke: default_hecke() }
    }
}

fn default_sieve() -> String {
    "200".into()
}

fn default_hecke() -> String {
    "50".into()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    #[serde(default)]
    pub big_image: bool,
    #[serde(default)]
    pub cm: bool,
    #[serde(default)]
    pub allow_special_discriminants: bool,
    /// All runs use the same primitive integral eigenvector (required for gluing).
    #[serde(default)]
    pub shared_normalization: bool,
}

/// The on-disk job descriptor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub schema_version: String,
    pub curve: CurveRecord,
    pub d_k: String,
    pub p: String,
    pub n: String,
    #[serde(default = "one")]
    pub m_prime: String,
    #[serde(default = "zero")]
    pub r: String,
    #[serde(default)]
    pub glue: Option<GlueRecord>,
    #[serde(default)]
    pub bounds: Bounds,
    #[serde(default)]
    pub flags: Flags,
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub cache_dir: Option<String>,
    #[serde(default)]
    pub out: Option<String>,
}

fn one() -> String {
    "1".into()
}

fn zero() -> String {
    "0".into()
}

#[derive(Clone, Debug)]
pub struct GlueSpec {
    pub m: u64,
    pub primes: Vec<(u64, u32)>,
}

/// A validated job.
#[derive(Clone, Debug)]
pub struct JobConfig {
    pub raw: RawConfig,
    pub label: String,
    pub curve: EllipticCurveQ,
    pub d_k: i64,
    pub p: u64,
    pub n: u32,
    pub m_prime: u64,
    pub r: u32,
    pub glue: Option<GlueSpec>,
    pub sieve_bound: u64,
    pub hecke_bound: u64,
    pub flags: Flags,
    pub tasks: Vec<Task>,
    pub n_minus: u64,
    pub n_plus: u64,
}

fn num<T: FromStr>(field: &str, s: &str) -> Result<T, CliError> {
    s.trim().parse().map_err(|_| CliError::Config(format!("{field}: '{s}' is not a valid integer")))
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_raw(raw: RawConfig) -> Result<Self, CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if raw.schema_version != CONFIG_SCHEMA {
            return bad(format!("config schema {} is not supported (expected {CONFIG_SCHEMA})", raw.schema_version));
        }
        let mut a = [0i64; 5];
        for (i, s) in raw.curve.a.iter().enumerate() {
            a[i] = num(&format!("curve.a[{i}]"), s)?;
        }
        let conductor: u64 = num("curve.conductor", &raw.curve.conductor)?;
        let mut curve = EllipticCurveQ::new(a, conductor).map_err(|e| CliError::Config(e.to_string()))?;
        curve.cm = raw.flags.cm;
        let d_k: i64 = num("d_k", &raw.d_k)?;
        let p: u64 = num("p", &raw.p)?;
        let n: u32 = num("n", &raw.n)?;
        let m_prime: u64 = num("m_prime", &raw.m_prime)?;
        let r: u32 = num("r", &raw.r)?;
        let sieve_bound: u64 = num("bounds.sieve", &raw.bounds.sieve)?;
        let hecke_bound: u64 = num("bounds.hecke", &raw.bounds.hecke)?;

        if d_k >= 0 || !is_fundamental(d_k) {
            return bad(format!("d_k = {d_k} is not a negative fundamental discriminant"));
        }
        if (d_k == -3 || d_k == -4) && !raw.flags.allow_special_discriminants {
            return bad(format!("d_k = {d_k} has extra units; set allow_special_discriminants"));
        }
        if !is_prime(p) || p < 5 {
            return bad(format!("p = {p} must be a prime >= 5"));
        }
        if n == 0 || n > 6 {
            return bad(format!("n = {n} must lie in 1..=6"));
        }
        if m_prime == 0 || r > 3 {
            return bad("m_prime must be positive and r at most 3".into());
        }
        let big_n = conductor * m_prime * d_k.unsigned_abs();
        if big_n % p == 0 {
            return bad(format!("p = {p} divides N m' d_K = {big_n}"));
        }
        if gcd(m_prime, conductor) != 1 || gcd(m_prime, d_k.unsigned_abs()) != 1 {
            return bad(format!("m' = {m_prime} must be prime to N d_K"));
        }
        if gcd(conductor, d_k.unsigned_abs()) != 1 {
            return bad("N and d_K must be coprime".into());
        }
        let n_minus = curve.n_minus(d_k);
        let n_plus = curve.n_plus(d_k);
        let fm = factorize(n_minus);
        if fm.iter().any(|&(_, e)| e > 1) || fm.len() % 2 == 0 {
            return bad(format!("N- = {n_minus} must be a square-free product of an odd number of primes"));
        }
        if factorize(n_plus).iter().any(|&(_, e)| e > 1) {
            return bad(format!("N+ = {n_plus} must be square-free"));
        }
        let glue = match &raw.glue {
            None => None,
            Some(g) => {
                let m: u64 = num("glue.m", &g.m)?;
                let mut primes = Vec::new();
                for pp in &g.primes {
                    let q: u64 = num("glue.primes.p", &pp.p)?;
                    let k: u32 = num("glue.primes.n", &pp.n)?;
                    if !is_prime(q) || q < 5 || k == 0 || (conductor * m * d_k.unsigned_abs()) % q == 0 {
                        return bad(format!("glue prime {q}^{k} is not admissible for this job"));
                    }
                    if primes.iter().any(|&(x, _)| x == q) {
                        return bad(format!("glue prime {q} is repeated"));
                    }
                    primes.push((q, k));
                }
                if m == 0 || gcd(m, conductor * d_k.unsigned_abs()) != 1 || primes.is_empty() {
                    return bad("glue.m must be prime to N d_K and at least one prime is needed".into());
                }
                Some(GlueSpec { m, primes })
            }
        };
        if raw.tasks.contains(&Task::Glue) && glue.is_none() {
            return bad("task glue needs a glue section".into());
        }
        if raw.tasks.contains(&Task::Stabilize) && r == 0 {
            return bad("task stabilize needs r >= 1".into());
        }
        let mut tasks = raw.tasks.clone();
        tasks.sort();
        tasks.dedup();
        Ok(Self {
            label: raw.curve.label.clone(),
            curve,
            d_k,
            p,
            n,
            m_prime,
            r,
            glue,
            sieve_bound,
            hecke_bound,
            flags: raw.flags.clone(),
            tasks,
            n_minus,
            n_plus,
            raw,
        })
    }

    pub fn has(&self, t: Task) -> bool {
        self.tasks.contains(&t)
    }

    /// sha256 of the canonical config, ignoring paths.
    pub fn digest(&self) -> String {
        let mut raw = self.raw.clone();
        raw.cache_dir = None;
        raw.out = None;
        raw.tasks = self.tasks.clone();
        let text = serde_json::to_string(&raw).expect("serializable");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample() -> String {
        r#"{
            "schema_version": "1",
            "curve": {"label": "11a", "a": ["0", "-1", "1", "-10", "-20"], "conductor": "11"},
            "d_k": "-20", "p": "7", "n": "1", "r": "1",
            "tasks": ["sieve", "hypotheses"]
        }"#
        .into()
    }

    #[test]
    fn parses_and_validates() {
        let c = JobConfig::from_json(&sample()).unwrap();
        assert_eq!((c.n_minus, c.n_plus), (11, 1));
        assert_eq!(c.tasks, vec![Task::Hypotheses, Task::Sieve]);
        assert_eq!(c.sieve_bound, 200);
        let bad = sample().replace("\"7\"", "\"11\"");
        assert!(matches!(JobConfig::from_json(&bad), Err(CliError::Config(_))));
        let bad = sample().replace("\"-20\"", "\"-7\"");
        assert!(matches!(JobConfig::from_json(&bad), Err(CliError::Config(_))));
        let bad = sample().replace("\"7\"", "7");
        assert!(matches!(JobConfig::from_json(&bad), Err(CliError::Config(_))));
    }

    #[test]
    fn digest_ignores_paths() {
        let a = JobConfig::from_json(&sample()).unwrap();
        let mut raw = a.raw.clone();
        raw.cache_dir = Some("/tmp/x".into());
        let b = JobConfig::from_raw(raw).unwrap();
        assert_eq!(a.digest(), b.digest());
    }
}
