//! Serializable report documents. Rationals are always `"p/q"` strings.

use serde::Serialize;

use kahler_core::delta::{DeltaReport, DeltaVerdict, EvaluatedRow, Reproduction, VerdictStatus};
use kahler_core::geometry::EinsteinData;
use kahler_core::ratjet::fmt_rational;
use kahler_core::Rational;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SCOPE_NOTE: &str =
    "consistent means no refutation over the finite test family and the seeded random polynomials; refuted is exact";

pub fn q(r: &Rational) -> String {
    fmt_rational(r)
}

#[derive(Serialize, Clone, Debug)]
pub struct ConfigEcho {
    pub spec: String,
    pub max_k: u32,
    pub order: u32,
    pub seed: u64,
    pub expect: Option<String>,
}

#[derive(Serialize, Clone, Debug)]
pub struct EinsteinBlock {
    pub is_einstein: bool,
    pub lambda: Option<String>,
    /// `Ric_11(0) / g_11(0)`, reported even when the metric is not Einstein.
    pub ratio: String,
    pub checked_degree: i32,
}

impl From<&EinsteinData> for EinsteinBlock {
    fn from(e: &EinsteinData) -> Self {
        EinsteinBlock {
            is_einstein: e.is_einstein,
            lambda: e.lambda().map(q),
            ratio: q(&e.ratio),
            checked_degree: e.checked_degree,
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct PolynomialBlock {
    pub display: String,
    /// Coefficients of `X^0 .. X^k`.
    pub coefficients: Vec<String>,
}

#[derive(Serialize, Clone, Debug)]
pub struct TermBlock {
    pub coeff: String,
    pub hol: Vec<u32>,
    pub anti: Vec<u32>,
    pub bidegree: [u32; 2],
}

#[derive(Serialize, Clone, Debug)]
pub struct ForcedBlock {
    pub j: u32,
    pub value: String,
}

#[derive(Serialize, Clone, Debug)]
pub struct WitnessRowBlock {
    pub function: String,
    pub terms: Vec<TermBlock>,
    /// `Delta^k phi(0)`.
    pub kahler: String,
    /// `Delta_c^j phi(0)` for `j = 1..k`.
    pub euclidean: Vec<String>,
    /// The coefficient `a_j` this row alone forces, if any.
    pub forces: Option<ForcedBlock>,
}

impl WitnessRowBlock {
    pub fn new(row: &EvaluatedRow, names: &[String]) -> Self {
        WitnessRowBlock {
            function: row.function.render(names),
            terms: row
                .function
                .terms
                .iter()
                .map(|(i, c)| TermBlock {
                    coeff: q(c),
                    hol: i.hol().to_vec(),
                    anti: i.anti().to_vec(),
                    bidegree: [i.hol_degree(), i.anti_degree()],
                })
                .collect(),
            kahler: q(&row.kahler),
            euclidean: row.moments.iter().map(q).collect(),
            forces: row.forced().map(|(j, v)| ForcedBlock { j, value: q(&v) }),
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct VerdictBlock {
    pub k: u32,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_k: Option<PolynomialBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<WitnessRowBlock>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free: Option<Vec<u32>>,
}

impl VerdictBlock {
    pub fn new(v: &DeltaVerdict, names: &[String]) -> Self {
        let mut block = VerdictBlock { k: v.k, status: "", p_k: None, witness: None, free: None };
        match &v.status {
            VerdictStatus::Consistent(p) => {
                block.status = "consistent";
                block.p_k = Some(PolynomialBlock {
                    display: p.to_string(),
                    coefficients: p.coefficients().iter().map(q).collect(),
                });
            }
            VerdictStatus::Refuted(rows) => {
                block.status = "refuted";
                block.witness = Some(rows.iter().map(|r| WitnessRowBlock::new(r, names)).collect());
            }
            VerdictStatus::Underdetermined(free) => {
                block.status = "underdetermined";
                block.free = Some(free.clone());
            }
        }
        block
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct ReproductionBlock {
    pub lambda: String,
    pub frame: Vec<String>,
    pub d3_z1_4: String,
    /// `d3_z1_4 - 12 lambda`.
    pub comp1_offset: String,
    pub d3_z1z2_sq: Option<String>,
    /// `d_1 dbar_1 g^{2 2bar}, d_2 dbar_2 g^{1 1bar}, d_2 dbar_1 g^{1 2bar}, d_1 dbar_2 g^{2 1bar}` at 0.
    pub cross_terms: Option<Vec<String>>,
    pub relation_holds: Option<bool>,
}

impl ReproductionBlock {
    pub fn new(r: &Reproduction, names: &[String]) -> Self {
        ReproductionBlock {
            lambda: q(&r.lambda),
            frame: r.frame.iter().map(|&i| names[i].clone()).collect(),
            d3_z1_4: q(&r.d3_z1_4),
            comp1_offset: q(&r.comp1_offset),
            d3_z1z2_sq: r.d3_z1z2_sq.as_ref().map(q),
            cross_terms: r.cross_terms.as_ref().map(|c| c.iter().map(q).collect()),
            relation_holds: r.relation_holds,
        }
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct CheckDocument {
    pub version: &'static str,
    pub config: ConfigEcho,
    pub dim: usize,
    pub variables: Vec<String>,
    pub einstein: EinsteinBlock,
    pub verdicts: Vec<VerdictBlock>,
    pub scope: &'static str,
    pub reproduction: Option<ReproductionBlock>,
    pub expectation_met: Option<bool>,
    pub timing_ms: Option<u64>,
}

impl CheckDocument {
    pub fn new(config: ConfigEcho, report: &DeltaReport) -> Self {
        let names = &report.variable_names;
        CheckDocument {
            version: VERSION,
            config,
            dim: report.dim,
            variables: names.clone(),
            einstein: EinsteinBlock::from(&report.einstein),
            verdicts: report.verdicts.iter().map(|v| VerdictBlock::new(v, names)).collect(),
            scope: SCOPE_NOTE,
            reproduction: report.reproduction.as_ref().map(|r| ReproductionBlock::new(r, names)),
            expectation_met: None,
            timing_ms: None,
        }
    }
}

/// One instance of a `reproduce` suite.
#[derive(Serialize, Clone, Debug)]
pub struct Instance {
    pub label: String,
    pub pass: bool,
    /// Exact values, in display order.
    pub values: Vec<NamedValue>,
}

#[derive(Serialize, Clone, Debug)]
pub struct NamedValue {
    pub name: String,
    pub value: String,
}

impl Instance {
    pub fn new(label: impl Into<String>, pass: bool) -> Self {
        Instance { label: label.into(), pass, values: Vec::new() }
    }

    pub fn value(mut self, name: &str, v: impl Into<String>) -> Self {
        self.values.push(NamedValue { name: name.to_string(), value: v.into() });
        self
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct ReproduceDocument {
    pub version: &'static str,
    pub target: String,
    pub instances: Vec<Instance>,
    pub notes: Vec<String>,
    pub pass: bool,
}

#[derive(Serialize, Clone, Debug)]
pub struct CatalogEntry {
    pub spec: String,
    pub dim: usize,
    pub rank: Option<usize>,
    pub optional: bool,
    /// `ok`, or the rejection message for entries that fail their gate.
    pub status: String,
    pub is_einstein: Option<bool>,
    pub lambda: Option<String>,
}

#[derive(Serialize, Clone, Debug)]
pub struct CatalogDocument {
    pub version: &'static str,
    pub entries: Vec<CatalogEntry>,
}
