//! Dempster-Shafer calculus over product frames: mass functions stored as
//! focal sets, derived belief / plausibility / commonality, Dempster's rule
//! of combination, mass-space marginalization, and the singleton-commonality
//! objective used by the search.
//!
//! Everything works on focal elements; explicit power sets are never
//! materialized. Combination cylindrically extends focal sets to the union
//! universe and intersects them pairwise, which is guarded by a tuple-count
//! capacity limit.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{Configuration, Model, ModelKind, Variable};
use crate::prob::{decode_index, mixed_radix_index, table_len, tuple_index};
use crate::score::Score;

/// Most tuples a cylindrically extended focal set may materialize.
pub const EXTENSION_GUARD: usize = 1 << 24;

/// A non-empty set of value tuples over an ordered list of variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FocalSet {
    universe_vars: Vec<usize>,
    tuples: BTreeSet<Vec<usize>>,
}

impl FocalSet {
    /// Builds a focal set; duplicate tuples collapse silently (set
    /// semantics). Errors on an empty tuple list or arity mismatch.
    pub fn new(
        universe_vars: Vec<usize>,
        tuples: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<FocalSet> {
        let arity = universe_vars.len();
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != arity {
                return Err(Error::Params(format!(
                    "focal tuple has {} values, universe lists {arity} variables",
                    t.len()
                )));
            }
            set.insert(t);
        }
        if set.is_empty() {
            return Err(Error::Params("focal set has no tuples".into()));
        }
        Ok(FocalSet {
            universe_vars,
            tuples: set,
        })
    }

    /// The whole product frame over `universe_vars`.
    pub fn full_frame(universe_vars: Vec<usize>, model: &Model) -> Result<FocalSet> {
        let dims = dims_for(&universe_vars, model.variables())?;
        let len = table_len(&dims)?;
        if len > EXTENSION_GUARD {
            return Err(Error::Capacity(format!(
                "full frame has {len} tuples, guard is {EXTENSION_GUARD}"
            )));
        }
        let tuples = (0..len).map(|i| decode_index(i, &dims));
        FocalSet::new(universe_vars, tuples)
    }

    pub fn singleton(universe_vars: Vec<usize>, tuple: Vec<usize>) -> Result<FocalSet> {
        FocalSet::new(universe_vars, [tuple])
    }

    pub fn universe_vars(&self) -> &[usize] {
        &self.universe_vars
    }

    pub fn tuples(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.tuples.iter()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.tuples.contains(tuple)
    }

    pub fn is_subset_of(&self, other: &FocalSet) -> bool {
        self.tuples.is_subset(&other.tuples)
    }

    pub fn intersects(&self, other: &FocalSet) -> bool {
        self.tuples.intersection(&other.tuples).next().is_some()
    }

    /// Canonical tuple-set equality, ignoring how the sets were built.
    pub fn tuples_eq(&self, other: &FocalSet) -> bool {
        self.tuples == other.tuples
    }

    fn from_set(universe_vars: Vec<usize>, tuples: BTreeSet<Vec<usize>>) -> FocalSet {
        debug_assert!(!tuples.is_empty());
        FocalSet {
            universe_vars,
            tuples,
        }
    }
}

/// A basic probability assignment over a subset of the model's variables,
/// stored as (focal set, mass) pairs.
#[derive(Debug, Clone)]
pub struct MassUniverse {
    universe_vars: Vec<usize>,
    focal: Vec<(FocalSet, f64)>,
}

impl MassUniverse {
    /// Builds a mass universe. Exact-zero masses are dropped (a zero-mass
    /// focal set is semantically absent); negative masses and bad totals
    /// are kept for the validator to report.
    pub fn new(universe_vars: Vec<usize>, focal: Vec<(FocalSet, f64)>) -> Result<MassUniverse> {
        for (fs, _) in &focal {
            if fs.universe_vars() != universe_vars {
                return Err(Error::Params(format!(
                    "focal set over variables {:?} does not match universe {:?}",
                    fs.universe_vars(),
                    universe_vars
                )));
            }
        }
        let focal = focal.into_iter().filter(|(_, m)| *m != 0.0).collect();
        Ok(MassUniverse {
            universe_vars,
            focal,
        })
    }

    /// Total ignorance: the whole product frame carries mass 1.
    pub fn vacuous(universe_vars: Vec<usize>, model: &Model) -> Result<MassUniverse> {
        let full = FocalSet::full_frame(universe_vars.clone(), model)?;
        MassUniverse::new(universe_vars, vec![(full, 1.0)])
    }

    pub fn universe_vars(&self) -> &[usize] {
        &self.universe_vars
    }

    pub fn focal(&self) -> &[(FocalSet, f64)] {
        &self.focal
    }

    pub fn total_mass(&self) -> f64 {
        self.focal.iter().map(|(_, m)| m).sum()
    }
}

/// Commonality at every singleton of a universe's product frame, flattened
/// in the same mixed-radix layout as a CPT (last listed variable fastest).
#[derive(Debug, Clone)]
pub struct CommonalityTable {
    universe_vars: Vec<usize>,
    dims: Vec<usize>,
    q: Vec<f64>,
}

impl CommonalityTable {
    pub fn universe_vars(&self) -> &[usize] {
        &self.universe_vars
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Q values in flat index order.
    pub fn values(&self) -> &[f64] {
        &self.q
    }

    /// Tuple for row `idx`, in universe variable order.
    pub fn row_tuple(&self, idx: usize) -> Vec<usize> {
        decode_index(idx, &self.dims)
    }

    /// Q at the projection of a full configuration onto this universe.
    pub fn q_at(&self, config: &Configuration, model: &Model) -> Result<f64> {
        let idx = mixed_radix_index(&self.universe_vars, config, model)?;
        Ok(self.q[idx])
    }
}

pub(crate) fn dims_for(vars: &[usize], variables: &[Variable]) -> Result<Vec<usize>> {
    vars.iter()
        .map(|&v| {
            variables
                .get(v)
                .map(|var| var.frame.len())
                .ok_or_else(|| Error::Index(format!("unknown variable id {v}")))
        })
        .collect()
}

/// Singleton commonality of a mass universe: for every singleton tuple t,
/// Q(t) is the total mass of focal sets containing t.
pub fn singleton_commonality(m: &MassUniverse, model: &Model) -> Result<CommonalityTable> {
    singleton_commonality_for(m, model.variables())
}

pub(crate) fn singleton_commonality_for(
    m: &MassUniverse,
    variables: &[Variable],
) -> Result<CommonalityTable> {
    let dims = dims_for(m.universe_vars(), variables)?;
    let len = table_len(&dims)?;
    let mut q = vec![0.0; len];
    for (fs, mass) in m.focal() {
        for tuple in fs.tuples() {
            let idx = tuple_index(tuple, &dims).ok_or_else(|| {
                Error::Index(format!("focal tuple {tuple:?} out of range for {dims:?}"))
            })?;
            q[idx] += mass;
        }
    }
    Ok(CommonalityTable {
        universe_vars: m.universe_vars().to_vec(),
        dims,
        q,
    })
}

/// Bel(A): total mass of focal sets contained in A.
pub fn belief(m: &MassUniverse, a: &FocalSet) -> f64 {
    debug_assert_eq!(m.universe_vars(), a.universe_vars());
    m.focal()
        .iter()
        .filter(|(fs, _)| fs.is_subset_of(a))
        .map(|(_, mass)| mass)
        .sum()
}

/// Pl(A): total mass of focal sets intersecting A; equals
/// 1 - Bel(complement of A).
pub fn plausibility(m: &MassUniverse, a: &FocalSet) -> f64 {
    debug_assert_eq!(m.universe_vars(), a.universe_vars());
    m.focal()
        .iter()
        .filter(|(fs, _)| fs.intersects(a))
        .map(|(_, mass)| mass)
        .sum()
}

/// Cylindrical extension of a focal set's tuples to `union_vars`.
fn extend_tuples(
    fs: &FocalSet,
    union_vars: &[usize],
    model: &Model,
) -> Result<BTreeSet<Vec<usize>>> {
    if fs.universe_vars() == union_vars {
        return Ok(fs.tuples.clone());
    }
    // Position of each union variable inside the source universe, if any.
    let source_pos: Vec<Option<usize>> = union_vars
        .iter()
        .map(|v| fs.universe_vars().iter().position(|u| u == v))
        .collect();
    let missing: Vec<usize> = union_vars
        .iter()
        .zip(&source_pos)
        .filter(|(_, p)| p.is_none())
        .map(|(&v, _)| v)
        .collect();
    let missing_dims = dims_for(&missing, model.variables())?;
    let fill_count = table_len(&missing_dims)?;
    let total = fs
        .len()
        .checked_mul(fill_count)
        .ok_or_else(|| Error::Capacity("extension size overflows usize".into()))?;
    if total > EXTENSION_GUARD {
        return Err(Error::Capacity(format!(
            "cylindrical extension would materialize {total} tuples, guard is {EXTENSION_GUARD}"
        )));
    }
    let mut out = BTreeSet::new();
    for tuple in fs.tuples() {
        for fill_idx in 0..fill_count {
            let fill = decode_index(fill_idx, &missing_dims);
            let mut fill_it = fill.iter();
            let extended: Vec<usize> = source_pos
                .iter()
                .map(|p| match p {
                    Some(pos) => tuple[*pos],
                    None => *fill_it.next().expect("one fill value per missing var"),
                })
                .collect();
            out.insert(extended);
        }
    }
    Ok(out)
}

/// Dempster's rule of combination in mass space.
///
/// Focal sets are cylindrically extended to the union of the two universes,
/// intersected pairwise, and the mass products on non-empty intersections
/// are renormalized by one minus the conflict (the total product mass on
/// empty intersections). Returns the combined universe and the conflict.
pub fn combine(
    m1: &MassUniverse,
    m2: &MassUniverse,
    model: &Model,
) -> Result<(MassUniverse, f64)> {
    let mut union_vars = m1.universe_vars().to_vec();
    for &v in m2.universe_vars() {
        if !union_vars.contains(&v) {
            union_vars.push(v);
        }
    }
    let ext1: Vec<(BTreeSet<Vec<usize>>, f64)> = m1
        .focal()
        .iter()
        .map(|(fs, mass)| Ok((extend_tuples(fs, &union_vars, model)?, *mass)))
        .collect::<Result<_>>()?;
    let ext2: Vec<(BTreeSet<Vec<usize>>, f64)> = m2
        .focal()
        .iter()
        .map(|(fs, mass)| Ok((extend_tuples(fs, &union_vars, model)?, *mass)))
        .collect::<Result<_>>()?;

    let mut acc: BTreeMap<BTreeSet<Vec<usize>>, f64> = BTreeMap::new();
    let mut conflict = 0.0;
    for (t1, w1) in &ext1 {
        for (t2, w2) in &ext2 {
            let inter: BTreeSet<Vec<usize>> = t1.intersection(t2).cloned().collect();
            let w = w1 * w2;
            if inter.is_empty() {
                conflict += w;
            } else {
                *acc.entry(inter).or_insert(0.0) += w;
            }
        }
    }
    if acc.is_empty() {
        return Err(Error::TotalConflict);
    }
    let kept: f64 = acc.values().sum();
    let focal = acc
        .into_iter()
        .map(|(tuples, w)| (FocalSet::from_set(union_vars.clone(), tuples), w / kept))
        .collect();
    Ok((MassUniverse::new(union_vars, focal)?, conflict))
}

/// Marginalizes a mass universe onto `keep` by projecting every focal set
/// and merging equal projections (canonical sorted-tuple form). Total mass
/// is preserved.
pub fn marginalize_mass(m: &MassUniverse, keep: &[usize]) -> Result<MassUniverse> {
    if keep.is_empty() {
        return Err(Error::Params("projection onto no variables".into()));
    }
    let positions: Vec<usize> = keep
        .iter()
        .map(|v| {
            m.universe_vars().iter().position(|u| u == v).ok_or_else(|| {
                Error::Params(format!(
                    "variable id {v} is not in universe {:?}",
                    m.universe_vars()
                ))
            })
        })
        .collect::<Result<_>>()?;
    let mut acc: BTreeMap<BTreeSet<Vec<usize>>, f64> = BTreeMap::new();
    for (fs, mass) in m.focal() {
        let projected: BTreeSet<Vec<usize>> = fs
            .tuples()
            .map(|t| positions.iter().map(|&p| t[p]).collect())
            .collect();
        *acc.entry(projected).or_insert(0.0) += mass;
    }
    let focal = acc
        .into_iter()
        .map(|(tuples, mass)| (FocalSet::from_set(keep.to_vec(), tuples), mass))
        .collect();
    MassUniverse::new(keep.to_vec(), focal)
}

/// The search objective for belief-function models: the product over all
/// universes of the singleton commonality at the configuration's
/// projection. Proportional to the joint plausibility of the singleton
/// configuration, not equal to it.
pub fn dst_score(config: &Configuration, model: &Model) -> Result<Score> {
    if model.kind() != ModelKind::Dst {
        return Err(Error::Params("dst_score requires a dst model".into()));
    }
    let tables = model.commonality_tables().expect("kind checked");
    let mut score = Score::ONE;
    for (i, table) in tables.iter().enumerate() {
        let table = table.as_ref().ok_or_else(|| {
            Error::Invalid(format!("mass[{i}] is structurally broken; run validation"))
        })?;
        let q = table.q_at(config, model)?;
        if q == 0.0 {
            return Ok(Score::ZERO);
        }
        score *= Score::from_value(q);
    }
    Ok(score)
}
