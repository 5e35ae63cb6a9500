//! The genetic search: population lifecycle, clamp-preserving mutation and
//! crossover, fitness with blocking, and the outer loop that extracts the
//! k best explanations by blocking each answer before the next run.
//!
//! Every random draw flows from one seeded ChaCha stream, so identical
//! inputs (seed included) reproduce identical output bit for bit. Fitness
//! comparisons happen on the log-space [`Score`] so products of many small
//! probabilities never collapse into false ties.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::model::{Configuration, Evidence, Model};
use crate::score::Score;

/// Parent-selection scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Pick the best of `size` uniformly drawn individuals, once per slot.
    Tournament(usize),
    /// Fitness-proportional draw on max-normalized fitness. Degenerates
    /// when fitness spans many orders of magnitude; kept as an option.
    Roulette,
}

impl Selection {
    pub fn as_str(&self) -> String {
        match self {
            Selection::Tournament(n) => format!("tournament:{n}"),
            Selection::Roulette => "roulette".to_string(),
        }
    }
}

/// Search parameters. The defaults are sized so the bundled ten-variable
/// fixture converges in well under a second; all are overridable.
#[derive(Debug, Clone)]
pub struct GaParams {
    pub population_size: usize,
    /// Per-locus mutation probability.
    pub p_m: f64,
    /// Per-pair crossover probability.
    pub p_c: f64,
    pub max_generations: usize,
    /// Early stop after this many generations without improvement of the
    /// best score; 0 disables.
    pub stagnation_window: usize,
    /// Best individuals copied unchanged into the next generation.
    pub elitism: usize,
    pub selection: Selection,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> GaParams {
        GaParams {
            population_size: 50,
            p_m: 0.05,
            p_c: 0.7,
            max_generations: 200,
            stagnation_window: 50,
            elitism: 1,
            selection: Selection::Tournament(2),
            seed: 0,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Params("population size must be at least 2".into()));
        }
        if self.elitism >= self.population_size {
            return Err(Error::Params(
                "elitism must be smaller than the population size".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.p_m) || !(0.0..=1.0).contains(&self.p_c) {
            return Err(Error::Params(
                "mutation and crossover probabilities must lie in [0, 1]".into(),
            ));
        }
        if let Selection::Tournament(n) = self.selection {
            if n == 0 {
                return Err(Error::Params("tournament size must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Configurations already returned by earlier runs; anything on the stack
/// scores zero so selection pressure moves elsewhere.
#[derive(Debug, Clone, Default)]
pub struct BlockedSet {
    order: Vec<Configuration>,
    index: HashSet<Configuration>,
}

impl BlockedSet {
    pub fn new() -> BlockedSet {
        BlockedSet::default()
    }

    /// Pushes a configuration; returns false if it was already blocked.
    pub fn insert(&mut self, config: Configuration) -> bool {
        if self.index.contains(&config) {
            return false;
        }
        self.index.insert(config.clone());
        self.order.push(config);
        true
    }

    pub fn contains(&self, config: &Configuration) -> bool {
        self.index.contains(config)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Blocked configurations in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = &Configuration> {
        self.order.iter()
    }
}

/// One ranked answer: a configuration, its objective score, and the rank it
/// was discovered at.
#[derive(Debug, Clone)]
pub struct RankedExplanation {
    /// 1-based discovery rank.
    pub rank: usize,
    pub config: Configuration,
    pub score: Score,
    pub generations_used: usize,
}

/// Result of a single GA run.
#[derive(Debug, Clone)]
pub struct GaRun {
    pub best: Configuration,
    pub score: Score,
    /// Fitness-evaluation sweeps performed (the initial population counts
    /// as sweep 1).
    pub generations_used: usize,
    /// Best population score per sweep.
    pub trace: Vec<Score>,
}

/// Blocked configurations score zero; everything else scores the model's
/// objective.
pub fn fitness(config: &Configuration, model: &Model, blocked: &BlockedSet) -> Result<Score> {
    if blocked.contains(config) {
        return Ok(Score::ZERO);
    }
    model.score(config)
}

/// Draws each locus uniformly from its effective domain (the evidence
/// subset where constrained, the full frame otherwise), so every individual
/// satisfies the evidence from birth.
pub fn init_population(
    model: &Model,
    ev: &Evidence,
    params: &GaParams,
    rng: &mut ChaCha12Rng,
) -> Vec<Configuration> {
    (0..params.population_size)
        .map(|_| {
            let values = model
                .variables()
                .iter()
                .map(|var| {
                    let dom = ev.domain(var.id, var.frame.len());
                    dom.get(rng.random_range(0..dom.len()))
                })
                .collect();
            Configuration::new(values)
        })
        .collect()
}

/// Per-locus mutation restricted to the allowed value set. A mutated locus
/// always receives a *different* value; a locus whose allowed set is a
/// singleton never changes, which is exactly how probabilistic clamping
/// falls out of the subset mechanism.
pub fn mutate(
    ind: &Configuration,
    model: &Model,
    ev: &Evidence,
    p_m: f64,
    rng: &mut ChaCha12Rng,
) -> Configuration {
    let mut values = ind.values().to_vec();
    for var in model.variables() {
        let dom = ev.domain(var.id, var.frame.len());
        if dom.len() < 2 {
            continue;
        }
        if rng.random::<f64>() < p_m {
            let current = values[var.id];
            // Uniform draw over the allowed values other than the current
            // one: sample an index into the shortened list and remap the
            // collision onto the last element.
            let mut pick = rng.random_range(0..dom.len() - 1);
            if dom.get(pick) == current {
                pick = dom.len() - 1;
            }
            values[var.id] = dom.get(pick);
        }
    }
    Configuration::new(values)
}

/// Single-point crossover. The cut is uniform over 1..n-1; each offspring
/// locus comes from a parent that satisfies the evidence, so the offspring
/// do too.
pub fn crossover(
    a: &Configuration,
    b: &Configuration,
    rng: &mut ChaCha12Rng,
) -> (Configuration, Configuration) {
    let n = a.len();
    debug_assert_eq!(n, b.len());
    if n < 2 {
        return (a.clone(), b.clone());
    }
    let cut = rng.random_range(1..n);
    let mut c1 = a.values()[..cut].to_vec();
    c1.extend_from_slice(&b.values()[cut..]);
    let mut c2 = b.values()[..cut].to_vec();
    c2.extend_from_slice(&a.values()[cut..]);
    (Configuration::new(c1), Configuration::new(c2))
}

fn argmax(fits: &[Score]) -> usize {
    let mut best = 0;
    for (i, f) in fits.iter().enumerate().skip(1) {
        if f.total_cmp(&fits[best]).is_gt() {
            best = i;
        }
    }
    best
}

/// Indices of the `count` best individuals, ties broken by lower index.
fn elite_indices(fits: &[Score], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fits.len()).collect();
    idx.sort_by(|&a, &b| fits[b].total_cmp(&fits[a]).then(a.cmp(&b)));
    idx.truncate(count);
    idx
}

fn select_parents(
    fits: &[Score],
    params: &GaParams,
    rng: &mut ChaCha12Rng,
) -> Vec<usize> {
    let n = fits.len();
    match params.selection {
        Selection::Tournament(size) => (0..n)
            .map(|_| {
                let mut best = rng.random_range(0..n);
                for _ in 1..size {
                    let challenger = rng.random_range(0..n);
                    if fits[challenger].total_cmp(&fits[best]).is_gt() {
                        best = challenger;
                    }
                }
                best
            })
            .collect(),
        Selection::Roulette => {
            // Normalize in log space: shift by the maximum so at least one
            // weight is 1 and nothing underflows.
            let max_ln = fits
                .iter()
                .map(|f| f.ln())
                .fold(f64::NEG_INFINITY, f64::max);
            if max_ln == f64::NEG_INFINITY {
                // Every individual is blocked or impossible; selection
                // pressure is undefined, fall back to uniform.
                return (0..n).map(|_| rng.random_range(0..n)).collect();
            }
            let weights: Vec<f64> = fits
                .iter()
                .map(|f| {
                    if f.is_zero() {
                        0.0
                    } else {
                        (f.ln() - max_ln).exp()
                    }
                })
                .collect();
            let total: f64 = weights.iter().sum();
            (0..n)
                .map(|_| {
                    let mut u = rng.random::<f64>() * total;
                    for (i, w) in weights.iter().enumerate() {
                        u -= w;
                        if u <= 0.0 {
                            return i;
                        }
                    }
                    n - 1
                })
                .collect()
        }
    }
}

/// Executes one generational run and returns the best individual seen
/// across all generations, not merely the final population.
pub fn run_ga(
    model: &Model,
    ev: &Evidence,
    params: &GaParams,
    blocked: &BlockedSet,
) -> Result<GaRun> {
    params.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);

    // A fully determined search space has exactly one candidate; evaluate
    // it directly instead of spinning generations on identical clones.
    let space_is_point = model
        .variables()
        .iter()
        .all(|var| ev.domain(var.id, var.frame.len()).len() == 1);
    if space_is_point {
        let values = model
            .variables()
            .iter()
            .map(|var| ev.domain(var.id, var.frame.len()).get(0))
            .collect();
        let config = Configuration::new(values);
        let score = fitness(&config, model, blocked)?;
        if score.is_zero() {
            return Err(Error::NoSolution(
                "the single evidence-compatible configuration is blocked or impossible".into(),
            ));
        }
        return Ok(GaRun {
            best: config,
            score,
            generations_used: 1,
            trace: vec![score],
        });
    }

    let mut pop = init_population(model, ev, params, &mut rng);
    let mut fits = pop
        .iter()
        .map(|c| fitness(c, model, blocked))
        .collect::<Result<Vec<Score>>>()?;

    let mut best_idx = argmax(&fits);
    let mut best = pop[best_idx].clone();
    let mut best_fit = fits[best_idx];
    let mut trace = vec![best_fit];
    let mut sweeps = 1usize;
    let mut stagnant = 0usize;

    for _ in 0..params.max_generations {
        if params.stagnation_window > 0 && stagnant >= params.stagnation_window {
            break;
        }
        let parents = select_parents(&fits, params, &mut rng);
        let mut next: Vec<Configuration> = elite_indices(&fits, params.elitism)
            .into_iter()
            .map(|i| pop[i].clone())
            .collect();
        let mut pair = 0usize;
        while next.len() < params.population_size {
            let a = &pop[parents[pair % parents.len()]];
            let b = &pop[parents[(pair + 1) % parents.len()]];
            pair += 2;
            let (c1, c2) = if rng.random::<f64>() < params.p_c {
                crossover(a, b, &mut rng)
            } else {
                (a.clone(), b.clone())
            };
            next.push(mutate(&c1, model, ev, params.p_m, &mut rng));
            if next.len() < params.population_size {
                next.push(mutate(&c2, model, ev, params.p_m, &mut rng));
            }
        }
        pop = next;
        fits = pop
            .iter()
            .map(|c| fitness(c, model, blocked))
            .collect::<Result<Vec<Score>>>()?;
        sweeps += 1;
        best_idx = argmax(&fits);
        trace.push(fits[best_idx]);
        if fits[best_idx].total_cmp(&best_fit).is_gt() {
            best = pop[best_idx].clone();
            best_fit = fits[best_idx];
            stagnant = 0;
        } else {
            stagnant += 1;
        }
    }

    if best_fit.is_zero() {
        return Err(Error::NoSolution(
            "no configuration with positive score was found; the evidence-compatible \
             space may be exhausted or fully blocked"
                .into(),
        ));
    }
    Ok(GaRun {
        best,
        score: best_fit,
        generations_used: sweeps,
        trace,
    })
}

/// Runs the GA k times, blocking each answer before the next run, and
/// returns the k results in discovery order (rank 1..k). Later ranks are
/// not re-sorted: a score inversion is reported by the caller, never
/// silently hidden.
pub fn k_mpe(
    model: &Model,
    ev: &Evidence,
    params: &GaParams,
    k: usize,
) -> Result<Vec<RankedExplanation>> {
    if k == 0 {
        return Err(Error::Params("k must be at least 1".into()));
    }
    params.validate()?;
    // Run 1 replays the caller's seed exactly (k = 1 is identical to a
    // plain run); later runs draw fresh seeds from a stream derived from
    // it so they do not re-walk the blocked optimum's trajectory.
    let mut derive = ChaCha12Rng::seed_from_u64(params.seed);
    let mut blocked = BlockedSet::new();
    let mut out = Vec::with_capacity(k);
    for rank in 1..=k {
        let mut run_params = params.clone();
        let derived: u64 = derive.random();
        if rank > 1 {
            run_params.seed = derived;
        }
        let run = run_ga(model, ev, &run_params, &blocked)?;
        out.push(RankedExplanation {
            rank,
            config: run.best.clone(),
            score: run.score,
            generations_used: run.generations_used,
        });
        blocked.insert(run.best);
    }
    Ok(out)
}
