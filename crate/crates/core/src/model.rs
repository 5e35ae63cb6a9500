//! Variables, frames, configurations, evidence, and the model container
//! shared by the probabilistic and belief-function engines.
//!
//! All values here are immutable after construction and safe to share
//! across threads. Construction is deliberately permissive: a model with
//! broken universes can be built and inspected, and [`Model::validate`]
//! reports every violation instead of stopping at the first.

use std::collections::BTreeMap;

use crate::dst::{singleton_commonality_for, CommonalityTable, MassUniverse};
use crate::error::{Error, Result};
use crate::prob::CptUniverse;
use crate::score::Score;
use crate::{dst, prob};

/// Largest frame the artifact accepts; ordinals beyond this are rejected
/// by the validator.
pub const MAX_FRAME_LEN: usize = 1 << 16;

/// A discrete variable with an ordered frame of value labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    /// Dense 0-based index; must equal the variable's position in the model.
    pub id: usize,
    pub name: String,
    /// Ordered value labels; ordinal = position in this list.
    pub frame: Vec<String>,
}

impl Variable {
    pub fn new(id: usize, name: impl Into<String>, frame: Vec<String>) -> Variable {
        Variable {
            id,
            name: name.into(),
            frame,
        }
    }

    pub fn ordinal_of(&self, label: &str) -> Option<usize> {
        self.frame.iter().position(|l| l == label)
    }
}

/// A total assignment: one value ordinal per model variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    values: Vec<usize>,
}

impl Configuration {
    pub fn new(values: Vec<usize>) -> Configuration {
        Configuration { values }
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value ordinal assigned to `var`, or an index error for a short
    /// configuration.
    pub fn value(&self, var: usize) -> Result<usize> {
        self.values.get(var).copied().ok_or_else(|| {
            Error::Index(format!(
                "configuration has {} values, no entry for variable {var}",
                self.values.len()
            ))
        })
    }
}

/// The set of values a variable may take at a given locus: either its full
/// frame or an evidence-restricted subset.
#[derive(Debug, Clone, Copy)]
pub enum AllowedValues<'a> {
    Full(usize),
    Subset(&'a [usize]),
}

impl AllowedValues<'_> {
    pub fn len(&self) -> usize {
        match self {
            AllowedValues::Full(n) => *n,
            AllowedValues::Subset(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// i-th allowed value in ascending order.
    pub fn get(&self, i: usize) -> usize {
        match self {
            AllowedValues::Full(_) => i,
            AllowedValues::Subset(s) => s[i],
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        match self {
            AllowedValues::Full(n) => v < *n,
            AllowedValues::Subset(s) => s.contains(&v),
        }
    }
}

/// Per-variable allowed-value subsets; variables absent from the map are
/// unconstrained. A singleton subset clamps the variable outright.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence {
    allowed: BTreeMap<usize, Vec<usize>>,
}

impl Evidence {
    pub fn unconstrained() -> Evidence {
        Evidence::default()
    }

    /// Builds evidence against a model, checking that every subset is
    /// non-empty and within its variable's frame. Subsets are stored
    /// sorted and deduplicated.
    pub fn new(model: &Model, allowed: BTreeMap<usize, Vec<usize>>) -> Result<Evidence> {
        let mut clean = BTreeMap::new();
        for (var, mut vals) in allowed {
            let frame_len = model.frame_len(var).ok_or_else(|| {
                Error::Params(format!("evidence references unknown variable id {var}"))
            })?;
            vals.sort_unstable();
            vals.dedup();
            if vals.is_empty() {
                return Err(Error::Params(format!(
                    "evidence for variable {} lists no allowed values",
                    model.variables[var].name
                )));
            }
            if let Some(&bad) = vals.iter().find(|&&v| v >= frame_len) {
                return Err(Error::Params(format!(
                    "evidence for variable {} allows ordinal {bad}, frame has {frame_len} values",
                    model.variables[var].name
                )));
            }
            clean.insert(var, vals);
        }
        Ok(Evidence { allowed: clean })
    }

    pub fn is_empty(&self) -> bool {
        self.allowed.is_empty()
    }

    pub fn allowed(&self, var: usize) -> Option<&[usize]> {
        self.allowed.get(&var).map(|v| v.as_slice())
    }

    /// Effective domain of `var` under this evidence.
    pub fn domain(&self, var: usize, frame_len: usize) -> AllowedValues<'_> {
        match self.allowed.get(&var) {
            Some(s) => AllowedValues::Subset(s),
            None => AllowedValues::Full(frame_len),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.allowed.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    /// True iff every constrained variable's value lies in its allowed
    /// subset.
    pub fn satisfies(&self, config: &Configuration) -> bool {
        self.allowed.iter().all(|(&var, vals)| {
            config
                .values()
                .get(var)
                .is_some_and(|v| vals.binary_search(v).is_ok())
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Bayesian,
    Dst,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Bayesian => "bayesian",
            ModelKind::Dst => "dst",
        }
    }
}

/// The model's local universes: conditional probability tables for the
/// Bayesian calculus, mass functions for the Dempster-Shafer calculus.
#[derive(Debug, Clone)]
pub enum UniverseSet {
    Bayesian(Vec<CptUniverse>),
    Dst {
        masses: Vec<MassUniverse>,
        /// Singleton commonality per universe, precomputed so scoring
        /// shares the CPT indexing path. `None` where the universe is
        /// structurally broken (the validator reports why).
        tables: Vec<Option<CommonalityTable>>,
    },
}

/// A valuation-based model: variables plus one universe per valuation.
#[derive(Debug, Clone)]
pub struct Model {
    variables: Vec<Variable>,
    universes: UniverseSet,
}

impl Model {
    pub fn bayesian(variables: Vec<Variable>, cpts: Vec<CptUniverse>) -> Model {
        Model {
            variables,
            universes: UniverseSet::Bayesian(cpts),
        }
    }

    pub fn dst(variables: Vec<Variable>, masses: Vec<MassUniverse>) -> Model {
        let tables = masses
            .iter()
            .map(|m| singleton_commonality_for(m, &variables).ok())
            .collect();
        Model {
            variables,
            universes: UniverseSet::Dst { masses, tables },
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self.universes {
            UniverseSet::Bayesian(_) => ModelKind::Bayesian,
            UniverseSet::Dst { .. } => ModelKind::Dst,
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    pub fn frame_len(&self, var: usize) -> Option<usize> {
        self.variables.get(var).map(|v| v.frame.len())
    }

    pub fn variable_by_name(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn universes(&self) -> &UniverseSet {
        &self.universes
    }

    pub fn cpt_universes(&self) -> Option<&[CptUniverse]> {
        match &self.universes {
            UniverseSet::Bayesian(cpts) => Some(cpts),
            UniverseSet::Dst { .. } => None,
        }
    }

    pub fn mass_universes(&self) -> Option<&[MassUniverse]> {
        match &self.universes {
            UniverseSet::Dst { masses, .. } => Some(masses),
            UniverseSet::Bayesian(_) => None,
        }
    }

    pub fn commonality_tables(&self) -> Option<&[Option<CommonalityTable>]> {
        match &self.universes {
            UniverseSet::Dst { tables, .. } => Some(tables),
            UniverseSet::Bayesian(_) => None,
        }
    }

    /// Objective score of a configuration under this model's calculus.
    pub fn score(&self, config: &Configuration) -> Result<Score> {
        match self.kind() {
            ModelKind::Bayesian => prob::prob_score(config, self),
            ModelKind::Dst => dst::dst_score(config, self),
        }
    }

    /// True iff the configuration is a total assignment with every ordinal
    /// in range.
    pub fn config_in_range(&self, config: &Configuration) -> bool {
        config.len() == self.variables.len()
            && config
                .values()
                .iter()
                .zip(&self.variables)
                .all(|(&v, var)| v < var.frame.len())
    }

    /// Checks every model invariant and returns the full list of
    /// violations; an empty report means the model is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.validate_variables(&mut out);
        match &self.universes {
            UniverseSet::Bayesian(cpts) => {
                for (i, cpt) in cpts.iter().enumerate() {
                    self.validate_cpt(i, cpt, &mut out);
                }
            }
            UniverseSet::Dst { masses, .. } => {
                for (i, m) in masses.iter().enumerate() {
                    self.validate_mass(i, m, &mut out);
                }
            }
        }
        out
    }

    fn validate_variables(&self, out: &mut Vec<String>) {
        let mut seen_names: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, v) in self.variables.iter().enumerate() {
            let loc = format!("variable[{i}] \"{}\"", v.name);
            if v.id != i {
                out.push(format!("{loc}: id {} does not match position {i}", v.id));
            }
            if v.frame.is_empty() {
                out.push(format!("{loc}: frame is empty"));
            }
            if v.frame.len() > MAX_FRAME_LEN {
                out.push(format!(
                    "{loc}: frame has {} values, limit is {MAX_FRAME_LEN}",
                    v.frame.len()
                ));
            }
            let mut labels: Vec<&str> = v.frame.iter().map(|s| s.as_str()).collect();
            labels.sort_unstable();
            for w in labels.windows(2) {
                if w[0] == w[1] {
                    out.push(format!("{loc}: duplicate value label \"{}\"", w[0]));
                }
            }
            if let Some(&first) = seen_names.get(v.name.as_str()) {
                out.push(format!(
                    "{loc}: name already used by variable[{first}]"
                ));
            } else {
                seen_names.insert(&v.name, i);
            }
        }
    }

    fn universe_vars_ok(&self, loc: &str, vars: &[usize], out: &mut Vec<String>) -> bool {
        let n = self.variables.len();
        let mut ok = true;
        for &v in vars {
            if v >= n {
                out.push(format!(
                    "{loc}: references variable id {v} (model has {n} variables)"
                ));
                ok = false;
            }
        }
        let mut sorted = vars.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                out.push(format!("{loc}: variable id {} listed twice", w[0]));
                ok = false;
            }
        }
        if vars.is_empty() {
            out.push(format!("{loc}: lists no variables"));
            ok = false;
        }
        ok
    }

    fn validate_cpt(&self, i: usize, cpt: &CptUniverse, out: &mut Vec<String>) {
        let loc = format!("cpt[{i}]");
        if !self.universe_vars_ok(&loc, cpt.variables(), out) {
            return;
        }
        let dims: Vec<usize> = cpt
            .variables()
            .iter()
            .map(|&v| self.variables[v].frame.len())
            .collect();
        let expected: Option<usize> = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
        let Some(expected) = expected else {
            out.push(format!("{loc}: table size overflows"));
            return;
        };
        if cpt.valuations().len() != expected {
            out.push(format!(
                "{loc}: table has {} entries, expected {expected}",
                cpt.valuations().len()
            ));
            return;
        }
        for (j, &p) in cpt.valuations().iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                out.push(format!("{loc}: entry {j} is {p}, outside [0, 1]"));
            }
        }
        // Child is the slowest-varying axis, so a conditional distribution
        // occupies entries {col + stride * c} for one fixed parent column.
        let child_len = dims[0];
        let stride = expected / child_len;
        for col in 0..stride {
            let sum: f64 = (0..child_len).map(|c| cpt.valuations()[col + c * stride]).sum();
            if (sum - 1.0).abs() > 1e-9 {
                out.push(format!(
                    "{loc}: conditional distribution for parent column {col} sums to {sum:.9}, expected 1 (tolerance 1e-9)"
                ));
            }
        }
    }

    fn validate_mass(&self, i: usize, m: &MassUniverse, out: &mut Vec<String>) {
        let loc = format!("mass[{i}]");
        if !self.universe_vars_ok(&loc, m.universe_vars(), out) {
            return;
        }
        let dims: Vec<usize> = m
            .universe_vars()
            .iter()
            .map(|&v| self.variables[v].frame.len())
            .collect();
        let mut sum = 0.0;
        let mut seen: Vec<&crate::dst::FocalSet> = Vec::new();
        for (j, (fs, mass)) in m.focal().iter().enumerate() {
            if *mass < 0.0 {
                out.push(format!("{loc}: focal[{j}] has negative mass {mass}"));
            }
            sum += mass;
            for tuple in fs.tuples() {
                for (pos, (&ord, &dim)) in tuple.iter().zip(&dims).enumerate() {
                    if ord >= dim {
                        out.push(format!(
                            "{loc}: focal[{j}] tuple ordinal {ord} out of range for variable id {} ({dim} values)",
                            m.universe_vars()[pos]
                        ));
                    }
                }
            }
            if seen.iter().any(|prev| prev.tuples_eq(fs)) {
                out.push(format!("{loc}: focal[{j}] duplicates an earlier focal set"));
            }
            seen.push(fs);
        }
        if (sum - 1.0).abs() > 1e-9 {
            out.push(format!(
                "{loc}: masses sum to {sum:.9}, expected 1 (tolerance 1e-9)"
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dst::FocalSet;

    fn binary_var(id: usize, name: &str) -> Variable {
        Variable::new(id, name, vec![format!("{name}0"), format!("{name}1")])
    }

    fn two_var_model() -> Model {
        // X -> Y chain with uniform CPTs.
        let vars = vec![binary_var(0, "x"), binary_var(1, "y")];
        let cpts = vec![
            CptUniverse::new(vec![0], vec![0.5, 0.5]),
            CptUniverse::new(vec![1, 0], vec![0.5, 0.5, 0.5, 0.5]),
        ];
        Model::bayesian(vars, cpts)
    }

    #[test]
    fn empty_evidence_satisfies_anything() {
        let ev = Evidence::unconstrained();
        assert!(ev.satisfies(&Configuration::new(vec![0, 1])));
        assert!(ev.satisfies(&Configuration::new(vec![])));
    }

    #[test]
    fn subset_evidence_checks_membership() {
        let model = Model::dst(
            vec![Variable::new(
                0,
                "A",
                vec!["a1".into(), "a2".into(), "a3".into()],
            )],
            vec![],
        );
        // A restricted to {a1, a3}.
        let ev = Evidence::new(&model, BTreeMap::from([(0, vec![0, 2])])).unwrap();
        assert!(!ev.satisfies(&Configuration::new(vec![1])));
        assert!(ev.satisfies(&Configuration::new(vec![0])));
        assert!(ev.satisfies(&Configuration::new(vec![2])));
    }

    #[test]
    fn evidence_rejects_empty_and_out_of_range_subsets() {
        let model = two_var_model();
        assert!(Evidence::new(&model, BTreeMap::from([(0, vec![])])).is_err());
        assert!(Evidence::new(&model, BTreeMap::from([(0, vec![2])])).is_err());
        assert!(Evidence::new(&model, BTreeMap::from([(7, vec![0])])).is_err());
    }

    #[test]
    fn out_of_range_universe_reference_is_reported() {
        let vars = vec![binary_var(0, "x")];
        let model = Model::bayesian(vars, vec![CptUniverse::new(vec![1], vec![0.5, 0.5])]);
        let report = model.validate();
        assert_eq!(report.len(), 1);
        assert!(report[0].contains("cpt[0]"), "{report:?}");
        assert!(report[0].contains("variable id 1"), "{report:?}");
    }

    #[test]
    fn broken_cpt_normalization_is_reported() {
        let vars = vec![binary_var(0, "x")];
        let model = Model::bayesian(vars, vec![CptUniverse::new(vec![0], vec![0.5, 0.4])]);
        let report = model.validate();
        assert_eq!(report.len(), 1);
        assert!(report[0].contains("sums to 0.9"), "{report:?}");
    }

    #[test]
    fn valid_model_has_empty_report() {
        assert!(two_var_model().validate().is_empty());
    }

    #[test]
    fn mass_violations_are_all_reported() {
        let vars = vec![binary_var(0, "x")];
        let fs = FocalSet::new(vec![0], vec![vec![0]]).unwrap();
        let dup = FocalSet::new(vec![0], vec![vec![0]]).unwrap();
        let m = MassUniverse::new(vec![0], vec![(fs, 0.5), (dup, 0.3)]).unwrap();
        let model = Model::dst(vars, vec![m]);
        let report = model.validate();
        // Duplicate focal set and a 0.8 mass total.
        assert_eq!(report.len(), 2, "{report:?}");
    }

    #[test]
    fn widening_evidence_never_flips_satisfies_to_false() {
        let model = Model::dst(
            vec![
                Variable::new(0, "A", vec!["a1".into(), "a2".into(), "a3".into()]),
                binary_var(1, "b"),
            ],
            vec![],
        );
        let narrow = Evidence::new(&model, BTreeMap::from([(0, vec![0]), (1, vec![1])])).unwrap();
        let wide = Evidence::new(&model, BTreeMap::from([(0, vec![0, 2]), (1, vec![1])])).unwrap();
        for a in 0..3 {
            for b in 0..2 {
                let c = Configuration::new(vec![a, b]);
                if narrow.satisfies(&c) {
                    assert!(wide.satisfies(&c));
                }
            }
        }
    }
}
