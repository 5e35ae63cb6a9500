//! File schemas and their resolution against a model.
//!
//! One JSON model format serves both calculi, discriminated by `kind`.
//! CPT tables are stored flat in exactly the in-memory lookup order (child
//! slowest-varying, last parent fastest), so loading is a zero-transform,
//! bit-exact copy. Focal sets are lists of label tuples in universe
//! variable order.
//!
//! Result files echo the query (model hash, evidence, parameters) and list
//! one row per rank; rerunning the same query reproduces the file byte for
//! byte.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dst::{FocalSet, MassUniverse};
use crate::error::{Error, Result};
use crate::ga::{GaParams, RankedExplanation};
use crate::model::{Evidence, Model, ModelKind, Variable};
use crate::prob::CptUniverse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindField {
    Bayesian,
    Dst,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub kind: KindField,
    pub variables: Vec<VariableSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cpts: Vec<CptSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub masses: Vec<MassSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CptSpec {
    pub child: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parents: Vec<String>,
    /// Flat probabilities in lookup order: child slowest-varying, last
    /// parent fastest.
    pub table: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassSpec {
    pub vars: Vec<String>,
    pub focal: Vec<FocalSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FocalSpec {
    /// Value-label tuples, one label per universe variable, in `vars` order.
    pub tuples: Vec<Vec<String>>,
    pub mass: f64,
}

/// Parses a model document and resolves all names and labels to ordinals.
/// Structural problems (unknown names, arity mismatches, kind/universe
/// mismatches) are parse errors; numeric problems (bad table lengths or
/// sums) are left for validation to report.
pub fn parse_model_str(text: &str) -> Result<Model> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    resolve_model(&file)
}

pub fn resolve_model(file: &ModelFile) -> Result<Model> {
    let variables: Vec<Variable> = file
        .variables
        .iter()
        .enumerate()
        .map(|(i, spec)| Variable::new(i, spec.name.clone(), spec.values.clone()))
        .collect();
    for (i, spec) in file.variables.iter().enumerate() {
        if spec.values.is_empty() {
            return Err(Error::Parse(format!(
                "variables[{i}] \"{}\": empty value list",
                spec.name
            )));
        }
        if let Some(first) = file.variables[..i].iter().position(|v| v.name == spec.name) {
            return Err(Error::Parse(format!(
                "variables[{i}] \"{}\": name already used by variables[{first}]",
                spec.name
            )));
        }
    }
    let lookup = |loc: &str, name: &str| -> Result<usize> {
        variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::Parse(format!("{loc}: unknown variable \"{name}\"")))
    };
    match file.kind {
        KindField::Bayesian => {
            if !file.masses.is_empty() {
                return Err(Error::Parse(
                    "a bayesian model must not carry a masses section".into(),
                ));
            }
            let mut cpts = Vec::with_capacity(file.cpts.len());
            for (i, spec) in file.cpts.iter().enumerate() {
                let loc = format!("cpts[{i}]");
                let mut vars = vec![lookup(&loc, &spec.child)?];
                for p in &spec.parents {
                    vars.push(lookup(&loc, p)?);
                }
                cpts.push(CptUniverse::new(vars, spec.table.clone()));
            }
            Ok(Model::bayesian(variables, cpts))
        }
        KindField::Dst => {
            if !file.cpts.is_empty() {
                return Err(Error::Parse(
                    "a dst model must not carry a cpts section".into(),
                ));
            }
            let mut masses = Vec::with_capacity(file.masses.len());
            for (i, spec) in file.masses.iter().enumerate() {
                let loc = format!("masses[{i}]");
                let vars: Vec<usize> = spec
                    .vars
                    .iter()
                    .map(|name| lookup(&loc, name))
                    .collect::<Result<_>>()?;
                let mut focal = Vec::with_capacity(spec.focal.len());
                for (j, fspec) in spec.focal.iter().enumerate() {
                    let floc = format!("{loc}.focal[{j}]");
                    let mut tuples = Vec::with_capacity(fspec.tuples.len());
                    for labels in &fspec.tuples {
                        if labels.len() != vars.len() {
                            return Err(Error::Parse(format!(
                                "{floc}: tuple has {} labels, universe lists {} variables",
                                labels.len(),
                                vars.len()
                            )));
                        }
                        let tuple: Vec<usize> = labels
                            .iter()
                            .zip(&vars)
                            .map(|(label, &v)| {
                                variables[v].ordinal_of(label).ok_or_else(|| {
                                    Error::Parse(format!(
                                        "{floc}: \"{label}\" is not a value of variable \"{}\"",
                                        variables[v].name
                                    ))
                                })
                            })
                            .collect::<Result<_>>()?;
                        tuples.push(tuple);
                    }
                    if tuples.is_empty() {
                        return Err(Error::Parse(format!("{floc}: no tuples")));
                    }
                    focal.push((FocalSet::new(vars.clone(), tuples)?, fspec.mass));
                }
                masses.push(MassUniverse::new(vars, focal)?);
            }
            Ok(Model::dst(variables, masses))
        }
    }
}

/// Serializes a model back into its file form, labels and all.
pub fn model_file_of(model: &Model) -> ModelFile {
    let variables = model
        .variables()
        .iter()
        .map(|v| VariableSpec {
            name: v.name.clone(),
            values: v.frame.clone(),
        })
        .collect();
    let name_of = |id: usize| model.variables()[id].name.clone();
    match model.kind() {
        ModelKind::Bayesian => ModelFile {
            kind: KindField::Bayesian,
            variables,
            cpts: model
                .cpt_universes()
                .unwrap()
                .iter()
                .map(|cpt| CptSpec {
                    child: name_of(cpt.variables()[0]),
                    parents: cpt.variables()[1..].iter().map(|&v| name_of(v)).collect(),
                    table: cpt.valuations().to_vec(),
                })
                .collect(),
            masses: Vec::new(),
        },
        ModelKind::Dst => ModelFile {
            kind: KindField::Dst,
            variables,
            cpts: Vec::new(),
            masses: model
                .mass_universes()
                .unwrap()
                .iter()
                .map(|m| MassSpec {
                    vars: m.universe_vars().iter().map(|&v| name_of(v)).collect(),
                    focal: m
                        .focal()
                        .iter()
                        .map(|(fs, mass)| FocalSpec {
                            tuples: fs
                                .tuples()
                                .map(|t| {
                                    t.iter()
                                        .zip(fs.universe_vars())
                                        .map(|(&ord, &v)| {
                                            model.variables()[v].frame[ord].clone()
                                        })
                                        .collect()
                                })
                                .collect(),
                            mass: *mass,
                        })
                        .collect(),
                })
                .collect(),
        },
    }
}

pub fn model_to_json(model: &Model) -> String {
    let mut s = serde_json::to_string_pretty(&model_file_of(model)).expect("schema serializes");
    s.push('\n');
    s
}

/// Evidence files map variable names to non-empty lists of allowed value
/// labels.
pub type EvidenceFile = BTreeMap<String, Vec<String>>;

pub fn parse_evidence_str(text: &str, model: &Model) -> Result<Evidence> {
    let file: EvidenceFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut allowed = BTreeMap::new();
    for (name, labels) in &file {
        let var = model
            .variable_by_name(name)
            .ok_or_else(|| Error::Parse(format!("evidence: unknown variable \"{name}\"")))?;
        if labels.is_empty() {
            return Err(Error::Parse(format!(
                "evidence for \"{name}\": empty value list"
            )));
        }
        let ordinals: Vec<usize> = labels
            .iter()
            .map(|label| {
                var.ordinal_of(label).ok_or_else(|| {
                    Error::Parse(format!(
                        "evidence for \"{name}\": \"{label}\" is not a value of this variable"
                    ))
                })
            })
            .collect::<Result<_>>()?;
        allowed.insert(var.id, ordinals);
    }
    Evidence::new(model, allowed).map_err(|e| Error::Parse(e.to_string()))
}

/// Label-level echo of evidence, for result files.
pub fn evidence_labels(ev: &Evidence, model: &Model) -> BTreeMap<String, Vec<String>> {
    ev.iter()
        .map(|(var, ordinals)| {
            let v = &model.variables()[var];
            (
                v.name.clone(),
                ordinals.iter().map(|&o| v.frame[o].clone()).collect(),
            )
        })
        .collect()
}

/// Query echo embedded in every result file.
#[derive(Debug, Clone, Serialize)]
pub struct QueryEcho {
    pub command: String,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_generations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stagnation_window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elitism: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<String>,
}

impl QueryEcho {
    pub fn solver(k: usize, params: &GaParams) -> QueryEcho {
        QueryEcho {
            command: "solve".into(),
            k,
            seed: Some(params.seed),
            population_size: Some(params.population_size),
            p_m: Some(params.p_m),
            p_c: Some(params.p_c),
            max_generations: Some(params.max_generations),
            stagnation_window: Some(params.stagnation_window),
            elitism: Some(params.elitism),
            selection: Some(params.selection.as_str()),
        }
    }

    pub fn oracle(k: usize) -> QueryEcho {
        QueryEcho {
            command: "oracle".into(),
            k,
            seed: None,
            population_size: None,
            p_m: None,
            p_c: None,
            max_generations: None,
            stagnation_window: None,
            elitism: None,
            selection: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub rank: usize,
    pub assignment: BTreeMap<String, String>,
    /// Plain objective value; sub-underflow scores print as 0 here but
    /// stay distinguishable through `log_score`.
    pub score: f64,
    /// Natural log of the score (null in JSON for an exact zero).
    pub log_score: f64,
    pub generations_used: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultFile {
    pub model_hash: String,
    pub evidence: BTreeMap<String, Vec<String>>,
    pub query: QueryEcho,
    pub results: Vec<ResultRow>,
    pub warnings: Vec<String>,
}

/// Assembles a result file from ranked explanations, flagging any score
/// inversion across ranks (discovery order is preserved, never re-sorted).
pub fn result_file(
    model: &Model,
    model_hash: u64,
    ev: &Evidence,
    query: QueryEcho,
    ranked: &[RankedExplanation],
) -> ResultFile {
    let results: Vec<ResultRow> = ranked
        .iter()
        .map(|r| ResultRow {
            rank: r.rank,
            assignment: r
                .config
                .values()
                .iter()
                .zip(model.variables())
                .map(|(&ord, var)| (var.name.clone(), var.frame[ord].clone()))
                .collect(),
            score: r.score.value(),
            log_score: r.score.ln(),
            generations_used: r.generations_used,
        })
        .collect();
    let mut warnings = Vec::new();
    for w in ranked.windows(2) {
        if w[1].score.total_cmp(&w[0].score).is_gt() {
            warnings.push(format!(
                "rank {} score {:e} exceeds rank {} score {:e}; ranks reflect discovery order",
                w[1].rank,
                w[1].score.value(),
                w[0].rank,
                w[0].score.value()
            ));
        }
    }
    ResultFile {
        model_hash: format!("{model_hash:016x}"),
        evidence: evidence_labels(ev, model),
        query,
        results,
        warnings,
    }
}

pub fn result_to_json(file: &ResultFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("schema serializes");
    s.push('\n');
    s
}

pub fn result_to_text(file: &ResultFile) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "model: {}", file.model_hash).unwrap();
    if file.evidence.is_empty() {
        writeln!(out, "evidence: (none)").unwrap();
    } else {
        let parts: Vec<String> = file
            .evidence
            .iter()
            .map(|(name, vals)| {
                if vals.len() == 1 {
                    format!("{name} = {}", vals[0])
                } else {
                    format!("{name} in {{{}}}", vals.join(", "))
                }
            })
            .collect();
        writeln!(out, "evidence: {}", parts.join("; ")).unwrap();
    }
    let q = &file.query;
    let mut qline = format!("query: {} k={}", q.command, q.k);
    if let Some(seed) = q.seed {
        qline.push_str(&format!(" seed={seed}"));
    }
    if let Some(p) = q.population_size {
        qline.push_str(&format!(" pop={p}"));
    }
    if let (Some(pm), Some(pc)) = (q.p_m, q.p_c) {
        qline.push_str(&format!(" pm={pm} pc={pc}"));
    }
    if let Some(g) = q.max_generations {
        qline.push_str(&format!(" gens={g}"));
    }
    if let Some(s) = q.stagnation_window {
        qline.push_str(&format!(" stagnation={s}"));
    }
    if let Some(e) = q.elitism {
        qline.push_str(&format!(" elitism={e}"));
    }
    if let Some(sel) = &q.selection {
        qline.push_str(&format!(" selection={sel}"));
    }
    writeln!(out, "{qline}").unwrap();
    writeln!(out, "rank  score                   ln(score)           gens  assignment").unwrap();
    for row in &file.results {
        let assignment: Vec<String> = row
            .assignment
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        writeln!(
            out,
            "{:<5} {:<23} {:<19} {:<5} {}",
            row.rank,
            format!("{:.12e}", row.score),
            format!("{:.6}", row.log_score),
            row.generations_used,
            assignment.join(" ")
        )
        .unwrap();
    }
    for w in &file.warnings {
        writeln!(out, "warning: {w}").unwrap();
    }
    out
}

/// FNV-1a 64-bit hash; used to stamp result files with the model they
/// answered.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
