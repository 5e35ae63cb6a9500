//! Exact brute-force reference: enumerates every evidence-compatible
//! configuration to produce ground-truth top-k lists and exact joint
//! quantities. Deliberately naive and guarded by explicit capacity limits;
//! it exists to verify the engines and the genetic search at small scale,
//! not to compete with them.

use crate::dst::{combine, MassUniverse};
use crate::error::{Error, Result};
use crate::ga::RankedExplanation;
use crate::model::{AllowedValues, Configuration, Evidence, Model, ModelKind};
use crate::score::Score;

/// Default ceiling on the number of configurations `enumerate_top_k` will
/// walk.
pub const DEFAULT_ENUMERATION_GUARD: u64 = 1 << 24;

/// Default ceiling on the size of a materialized joint table.
pub const DEFAULT_JOINT_TABLE_GUARD: u64 = 1 << 20;

/// Exact top-k result. Scores strictly respect the sort; ties are broken
/// lexicographically on the configuration ordinals so the order is
/// deterministic.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub top: Vec<RankedExplanation>,
    pub total_enumerated: u64,
}

fn effective_domains<'a>(model: &'a Model, ev: &'a Evidence) -> Vec<AllowedValues<'a>> {
    model
        .variables()
        .iter()
        .map(|var| ev.domain(var.id, var.frame.len()))
        .collect()
}

fn space_size(domains: &[AllowedValues<'_>]) -> Option<u64> {
    domains
        .iter()
        .try_fold(1u64, |acc, d| acc.checked_mul(d.len() as u64))
}

/// Walks every evidence-compatible configuration in lexicographic order,
/// calling `visit` with each one.
fn for_each_config(
    domains: &[AllowedValues<'_>],
    mut visit: impl FnMut(&Configuration) -> Result<()>,
) -> Result<()> {
    let n = domains.len();
    let mut cursor = vec![0usize; n];
    let mut config = Configuration::new(domains.iter().map(|d| d.get(0)).collect());
    loop {
        visit(&config)?;
        // Odometer step, last variable fastest.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < domains[pos].len() {
                break;
            }
            cursor[pos] = 0;
        }
        let values: Vec<usize> = cursor
            .iter()
            .zip(domains)
            .map(|(&c, d)| d.get(c))
            .collect();
        config = Configuration::new(values);
    }
}

/// Exact top-k by score with deterministic tie-breaking; `k` is capped at
/// the space size. The best-k list is maintained bounded during the walk so
/// memory stays O(k) even at the guard limit.
pub fn enumerate_top_k(
    model: &Model,
    ev: &Evidence,
    k: usize,
    guard: u64,
) -> Result<OracleResult> {
    if k == 0 {
        return Err(Error::Params("k must be at least 1".into()));
    }
    if model.variable_count() == 0 {
        return Err(Error::Params("model has no variables".into()));
    }
    let domains = effective_domains(model, ev);
    let total = space_size(&domains)
        .ok_or_else(|| Error::Capacity("evidence-compatible space overflows u64".into()))?;
    if total > guard {
        return Err(Error::Capacity(format!(
            "evidence-compatible space has {total} configurations, guard is {guard}; \
             use the genetic solver instead"
        )));
    }
    let k = k.min(total as usize);

    // Sorted best-k: score descending, then configuration ascending.
    let mut best: Vec<(Score, Configuration)> = Vec::with_capacity(k + 1);
    for_each_config(&domains, |config| {
        let score = model.score(config)?;
        let candidate = (score, config.clone());
        let pos = best
            .binary_search_by(|probe| {
                candidate
                    .0
                    .total_cmp(&probe.0)
                    .then_with(|| probe.1.cmp(&candidate.1))
            })
            .unwrap_or_else(|p| p);
        if pos < k {
            best.insert(pos, candidate);
            best.truncate(k);
        }
        Ok(())
    })?;

    let top = best
        .into_iter()
        .enumerate()
        .map(|(i, (score, config))| RankedExplanation {
            rank: i + 1,
            config,
            score,
            generations_used: 0,
        })
        .collect();
    Ok(OracleResult {
        top,
        total_enumerated: total,
    })
}

/// Exact joint singleton commonality Q({config}) obtained by iterated
/// Dempster combination over all universes, then summing the masses of the
/// focal sets containing the configuration's projection.
pub fn exact_joint_commonality(model: &Model, config: &Configuration) -> Result<f64> {
    if model.kind() != ModelKind::Dst {
        return Err(Error::Params(
            "exact_joint_commonality requires a dst model".into(),
        ));
    }
    let masses = model.mass_universes().expect("kind checked");
    let Some(first) = masses.first() else {
        // No valuations at all: total ignorance.
        return Ok(1.0);
    };
    let mut joint: MassUniverse = first.clone();
    for m in &masses[1..] {
        joint = combine(&joint, m, model)?.0;
    }
    let tuple: Vec<usize> = joint
        .universe_vars()
        .iter()
        .map(|&v| config.value(v))
        .collect::<Result<_>>()?;
    let q = joint
        .focal()
        .iter()
        .filter(|(fs, _)| fs.contains(&tuple))
        .map(|(_, mass)| mass)
        .sum();
    Ok(q)
}

/// The full joint distribution of a Bayesian model, flattened in
/// mixed-radix order over the variables (variable 0 slowest, the last
/// fastest). Computed by direct multiplication of table lookups in plain
/// arithmetic, independent of the log-space scoring path, so the two can
/// cross-check each other.
pub fn joint_table(model: &Model, guard: u64) -> Result<Vec<f64>> {
    if model.kind() != ModelKind::Bayesian {
        return Err(Error::Params("joint_table requires a bayesian model".into()));
    }
    let no_evidence = Evidence::unconstrained();
    let domains = effective_domains(model, &no_evidence);
    let total = space_size(&domains)
        .ok_or_else(|| Error::Capacity("joint table size overflows u64".into()))?;
    if total > guard {
        return Err(Error::Capacity(format!(
            "joint table would hold {total} entries, guard is {guard}"
        )));
    }
    let cpts = model.cpt_universes().expect("kind checked");
    let mut table = Vec::with_capacity(total as usize);
    for_each_config(&domains, |config| {
        let mut p = 1.0;
        for cpt in cpts {
            p *= cpt.find_valuation(config, model)?;
        }
        table.push(p);
        Ok(())
    })?;
    Ok(table)
}
