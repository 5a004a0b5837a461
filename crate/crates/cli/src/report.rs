//! Run reports. Every integer is written as a decimal string.

use std::collections::BTreeMap;

use anticyclo_core::group_ring::GroupRingElement;
use anticyclo_core::theta::Provenance;
use serde::Serialize;
use serde_json::Value;

pub const REPORT_SCHEMA: &str = "1";

pub fn s<T: ToString>(x: T) -> String {
    x.to_string()
}

pub fn strs<T: ToString + Copy>(xs: &[T]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

/// A group ring element over Z/p^n[Γ_m].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElementJson {
    pub group_order: String,
    pub generator: String,
    pub modulus: String,
    pub coefficients: Vec<String>,
}

impl ElementJson {
    pub fn new(e: &GroupRingElement, generator: &str) -> Self {
        Self {
            group_order: s(e.order()),
            generator: generator.into(),
            modulus: s(e.ring().base().modulus()),
            coefficients: strs(e.flat()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProvenanceJson {
    pub curve: String,
    pub d_k: String,
    pub p: String,
    pub n: String,
    pub conductor: String,
    pub walk: Vec<String>,
    pub generator: String,
    pub eigenform: Vec<String>,
    pub pinned: bool,
}

impl From<&Provenance> for ProvenanceJson {
    fn from(p: &Provenance) -> Self {
        Self {
            curve: p.curve.clone(),
            d_k: s(p.d_k),
            p: s(p.p),
            n: s(p.n),
            conductor: s(p.conductor),
            walk: strs(&p.walk),
            generator: s(p.generator),
            eigenform: strs(&p.eigenform),
            pinned: p.pinned,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerdictJson {
    pub status: String,
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SievePrimeJson {
    pub ell: String,
    pub a_ell: String,
    pub signs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EigenvalueJson {
    pub q: String,
    pub brandt: String,
    pub point_count: String,
    pub used_as_input: bool,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BrandtJson {
    pub n_minus: String,
    pub n_plus: String,
    pub class_count: String,
    pub weights: Vec<String>,
    pub mass: String,
    pub mass_formula: String,
    pub matrices: BTreeMap<String, Vec<Vec<String>>>,
    pub eigenvector: Vec<String>,
    pub eigenvalues: Vec<EigenvalueJson>,
    pub commute: bool,
    pub self_adjoint: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharacterJson {
    pub index: String,
    pub factor: String,
    pub value: Vec<String>,
    pub valuation: String,
    /// "inf" when L lies in every power of I_χ.
    pub vanishing_order: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelJson {
    pub level: String,
    pub theta: ElementJson,
    pub bd: ElementJson,
    pub characters: Vec<CharacterJson>,
    pub provenance: ProvenanceJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultipleJson {
    pub level: String,
    pub c: Option<ElementJson>,
    pub kernel_log_size: Option<String>,
    pub residual_zero: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckJson {
    pub name: String,
    pub level: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilizeJson {
    pub alpha: String,
    pub e_p: ElementJson,
    pub e_p_split: bool,
    pub e_p_invertible: bool,
    pub po_verdict: String,
    pub base_case_validated: bool,
    pub stabilized: Vec<LevelJson>,
    pub checks: Vec<CheckJson>,
    pub multiples: Vec<MultipleJson>,
    /// Number of tower levels; deeper towers separate more normalizations.
    pub tower_depth: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GlueInputJson {
    pub prime: String,
    pub exponent: String,
    pub bd: ElementJson,
    pub provenance: ProvenanceJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GlueJson {
    pub level: String,
    pub inputs: Vec<GlueInputJson>,
    pub modulus: String,
    pub coefficients: Vec<String>,
    pub reductions_match: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub schema_version: String,
    pub config_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<BTreeMap<String, VerdictJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sieve: Option<Vec<SievePrimeJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brandt: Option<BrandtJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<LevelJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stabilize: Option<StabilizeJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub glue: Option<GlueJson>,
    /// Wall-clock milliseconds per step; excluded from determinism comparisons.
    pub timing: BTreeMap<String, String>,
}

impl RunReport {
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("serializable")
    }
}

/// The report with timing fields removed.
pub fn strip_timing(v: &Value) -> Value {
    let mut v = v.clone();
    if let Value::Object(m) = &mut v {
        m.remove("timing");
    }
    v
}

/// Flattens a JSON value into `path,value` rows in key order.
pub fn to_csv(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    walk(&if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") }, x, out);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            Value::String(t) => out.push((prefix.into(), t.clone())),
            Value::Null => out.push((prefix.into(), String::new())),
            other => out.push((prefix.into(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk("", v, &mut rows);
    let mut text = String::from("path,value\n");
    for (k, x) in rows {
        let x = if x.contains(',') || x.contains('"') { format!("\"{}\"", x.replace('"', "\"\"")) } else { x };
        text.push_str(&format!("{k},{x}\n"));
    }
    text
}
