//! Conditional probability tables with a fixed flat storage layout, and the
//! probabilistic objective (product of table lookups).
//!
//! The layout contract: a universe lists its variables with the conditioned
//! variable first, then the conditioning variables. The flat table is in
//! mixed-radix order over that list with the LAST listed variable as the
//! fastest-varying axis, so the conditioned variable is the slowest. Model
//! files store tables in exactly this order.

use crate::error::{Error, Result};
use crate::model::{Configuration, Model, ModelKind};
use crate::score::Score;

/// A conditional probability table over {child ∪ parents}.
#[derive(Debug, Clone, PartialEq)]
pub struct CptUniverse {
    /// Conditioned variable first, then the conditioning variables.
    variables: Vec<usize>,
    /// Flat probabilities, length = product of the listed frame sizes.
    valuations: Vec<f64>,
}

impl CptUniverse {
    /// Construction is permissive; `Model::validate` reports shape and
    /// normalization problems.
    pub fn new(variables: Vec<usize>, valuations: Vec<f64>) -> CptUniverse {
        CptUniverse {
            variables,
            valuations,
        }
    }

    pub fn variables(&self) -> &[usize] {
        &self.variables
    }

    /// Cardinality of the variable list.
    pub fn card(&self) -> usize {
        self.variables.len()
    }

    pub fn valuations(&self) -> &[f64] {
        &self.valuations
    }

    /// Looks up the table entry for a configuration.
    ///
    /// The index is built from the last listed variable inward:
    /// `idx = config[v_last]`, then for each earlier variable
    /// `idx += size * config[v_j]` with `size` the product of the frame
    /// sizes consumed so far.
    pub fn find_valuation(&self, config: &Configuration, model: &Model) -> Result<f64> {
        let idx = mixed_radix_index(&self.variables, config, model)?;
        self.valuations.get(idx).copied().ok_or_else(|| {
            Error::Index(format!(
                "table index {idx} out of range for {}-entry table",
                self.valuations.len()
            ))
        })
    }
}

/// Product of frame sizes, guarded against overflow.
pub(crate) fn table_len(dims: &[usize]) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Capacity("table size overflows usize".into()))
}

/// Mixed-radix index of a configuration restricted to `vars`; the last
/// listed variable is the fastest-varying axis.
pub fn mixed_radix_index(vars: &[usize], config: &Configuration, model: &Model) -> Result<usize> {
    let last = *vars.last().ok_or_else(|| {
        Error::Index("universe lists no variables".into())
    })?;
    let mut idx = checked_value(config, last, model)?;
    let mut size = model.frame_len(last).expect("checked by checked_value");
    for &v in vars[..vars.len() - 1].iter().rev() {
        idx += size * checked_value(config, v, model)?;
        size *= model.frame_len(v).expect("checked by checked_value");
    }
    Ok(idx)
}

/// Same index map for a bare tuple with known dimensions.
pub(crate) fn tuple_index(tuple: &[usize], dims: &[usize]) -> Option<usize> {
    if tuple.len() != dims.len() || dims.is_empty() {
        return None;
    }
    let mut idx = 0usize;
    let mut size = 1usize;
    for (&v, &d) in tuple.iter().zip(dims).rev() {
        if v >= d {
            return None;
        }
        idx += size * v;
        size *= d;
    }
    Some(idx)
}

/// Inverse of `tuple_index`.
pub(crate) fn decode_index(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut tuple = vec![0; dims.len()];
    for (slot, &d) in tuple.iter_mut().zip(dims).rev() {
        *slot = idx % d;
        idx /= d;
    }
    tuple
}

fn checked_value(config: &Configuration, var: usize, model: &Model) -> Result<usize> {
    let v = config.value(var)?;
    let frame_len = model
        .frame_len(var)
        .ok_or_else(|| Error::Index(format!("unknown variable id {var}")))?;
    if v >= frame_len {
        return Err(Error::Index(format!(
            "ordinal {v} out of range for variable id {var} ({frame_len} values)"
        )));
    }
    Ok(v)
}

/// Joint probability of a configuration: the product over all universes of
/// their table lookups, accumulated in log space with an exact-zero
/// short-circuit.
pub fn prob_score(config: &Configuration, model: &Model) -> Result<Score> {
    if model.kind() != ModelKind::Bayesian {
        return Err(Error::Params("prob_score requires a bayesian model".into()));
    }
    let mut score = Score::ONE;
    for cpt in model.cpt_universes().expect("kind checked") {
        let p = cpt.find_valuation(config, model)?;
        if p == 0.0 {
            return Ok(Score::ZERO);
        }
        score *= Score::from_value(p);
    }
    Ok(score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Variable;

    fn var(id: usize, name: &str, len: usize) -> Variable {
        Variable::new(id, name, (0..len).map(|i| format!("{name}{i}")).collect())
    }

    #[test]
    fn singleton_universe_lookup() {
        let model = Model::bayesian(
            vec![var(0, "x", 2)],
            vec![CptUniverse::new(vec![0], vec![0.5, 0.5])],
        );
        let cpt = &model.cpt_universes().unwrap()[0];
        let p = cpt
            .find_valuation(&Configuration::new(vec![0]), &model)
            .unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn index_map_is_the_stated_mixed_radix_order() {
        // Child X (2 values) listed first, parent Y (3 values) last: the
        // index must be y + 3*x. Enumerate all 6 cells against that oracle.
        let model = Model::bayesian(
            vec![var(0, "x", 2), var(1, "y", 3)],
            vec![CptUniverse::new(
                vec![0, 1],
                (0..6).map(|i| i as f64 / 10.0).collect(),
            )],
        );
        let cpt = &model.cpt_universes().unwrap()[0];
        let mut hit = [false; 6];
        for x in 0..2 {
            for y in 0..3 {
                let expected = y + 3 * x;
                let config = Configuration::new(vec![x, y]);
                let idx = mixed_radix_index(cpt.variables(), &config, &model).unwrap();
                assert_eq!(idx, expected, "config x={x} y={y}");
                hit[idx] = true;
                let p = cpt.find_valuation(&config, &model).unwrap();
                assert_eq!(p, expected as f64 / 10.0);
            }
        }
        assert!(hit.iter().all(|&h| h), "index map must be a bijection");
        // Spot checks from the contract: (X=1, Y=2) -> slot 5, zeros -> slot 0.
        assert_eq!(
            mixed_radix_index(cpt.variables(), &Configuration::new(vec![1, 2]), &model).unwrap(),
            5
        );
        assert_eq!(
            mixed_radix_index(cpt.variables(), &Configuration::new(vec![0, 0]), &model).unwrap(),
            0
        );
    }

    #[test]
    fn out_of_range_ordinal_is_an_index_error() {
        let model = Model::bayesian(
            vec![var(0, "x", 2)],
            vec![CptUniverse::new(vec![0], vec![0.5, 0.5])],
        );
        let cpt = &model.cpt_universes().unwrap()[0];
        let err = cpt
            .find_valuation(&Configuration::new(vec![2]), &model)
            .unwrap_err();
        assert!(matches!(err, Error::Index(_)));
    }

    #[test]
    fn deterministic_chain_scores_one() {
        // x0 is always 1; y copies x.
        let model = Model::bayesian(
            vec![var(0, "x", 2), var(1, "y", 2)],
            vec![
                CptUniverse::new(vec![0], vec![0.0, 1.0]),
                CptUniverse::new(vec![1, 0], vec![1.0, 0.0, 0.0, 1.0]),
            ],
        );
        let consistent = Configuration::new(vec![1, 1]);
        assert!((prob_score(&consistent, &model).unwrap().value() - 1.0).abs() < 1e-15);
        let zero = Configuration::new(vec![0, 0]);
        assert_eq!(prob_score(&zero, &model).unwrap().value(), 0.0);
    }

    #[test]
    fn score_matches_brute_force_joint() {
        // Three variables, chain x -> y -> z, fixed non-uniform tables.
        let model = Model::bayesian(
            vec![var(0, "x", 2), var(1, "y", 3), var(2, "z", 2)],
            vec![
                CptUniverse::new(vec![0], vec![0.3, 0.7]),
                CptUniverse::new(vec![1, 0], vec![0.2, 0.5, 0.5, 0.25, 0.3, 0.25]),
                CptUniverse::new(vec![2, 1], vec![0.9, 0.4, 0.6, 0.1, 0.6, 0.4]),
            ],
        );
        assert!(model.validate().is_empty(), "{:?}", model.validate());
        let mut total = 0.0;
        for x in 0..2 {
            for y in 0..3 {
                for z in 0..2 {
                    // Independent oracle: direct lookups multiplied in
                    // plain arithmetic. Flat order is child-slowest, so
                    // p(y|x) sits at index x + 2y and p(z|y) at y + 3z.
                    let px = [0.3, 0.7][x];
                    let py = [[0.2, 0.5], [0.5, 0.25], [0.3, 0.25]][y][x];
                    let pz = [[0.9, 0.4, 0.6], [0.1, 0.6, 0.4]][z][y];
                    let expected = px * py * pz;
                    let got = prob_score(&Configuration::new(vec![x, y, z]), &model)
                        .unwrap()
                        .value();
                    assert!((got - expected).abs() < 1e-12, "x={x} y={y} z={z}");
                    total += got;
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn score_is_universe_order_independent() {
        let vars = vec![var(0, "x", 2), var(1, "y", 3), var(2, "z", 2)];
        let cpts = vec![
            CptUniverse::new(vec![0], vec![0.3, 0.7]),
            CptUniverse::new(vec![1, 0], vec![0.2, 0.5, 0.5, 0.25, 0.3, 0.25]),
            CptUniverse::new(vec![2, 1], vec![0.9, 0.4, 0.6, 0.1, 0.6, 0.4]),
        ];
        let forward = Model::bayesian(vars.clone(), cpts.clone());
        let mut reversed_cpts = cpts;
        reversed_cpts.reverse();
        let reversed = Model::bayesian(vars, reversed_cpts);
        let c = Configuration::new(vec![1, 2, 0]);
        let a = prob_score(&c, &forward).unwrap().value();
        let b = prob_score(&c, &reversed).unwrap().value();
        assert!((a - b).abs() <= 1e-12 * a.max(b));
    }
}
