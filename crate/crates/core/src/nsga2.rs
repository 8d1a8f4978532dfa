//! NSGA-II over refactoring sequences.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::objectives::{ObjectiveSet, ObjectiveVector, Problem};
use crate::refactor::{apply, apply_sequence, random_action, RefactorError, RefactoringSequence};

/// Resampling attempts per failing gene before the sequence is truncated.
pub const REPAIR_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub objectives: ObjectiveSet,
    pub population_size: usize,
    pub max_generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub runs: usize,
    pub seed: u64,
    pub max_sequence_length: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            objectives: ObjectiveSet::POWER_AWARE,
            population_size: 16,
            max_generations: 200,
            crossover_prob: 0.8,
            mutation_prob: 0.2,
            runs: 31,
            seed: 0,
            max_sequence_length: RefactoringSequence::MAX_LEN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("probability `{0}` must lie in [0, 1]")]
    Probability(&'static str),
    #[error("population size {0} must be even and at least 4")]
    PopulationSize(usize),
    #[error("sequence length {0} must be between 1 and 4")]
    SequenceLength(usize),
    #[error("objective set is empty")]
    NoObjectives,
    #[error("at least one run is required")]
    NoRuns,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return Err(ConfigError::Probability("crossover_prob"));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(ConfigError::Probability("mutation_prob"));
        }
        if self.population_size < 4 || !self.population_size.is_multiple_of(2) {
            return Err(ConfigError::PopulationSize(self.population_size));
        }
        if !(1..=RefactoringSequence::MAX_LEN).contains(&self.max_sequence_length) {
            return Err(ConfigError::SequenceLength(self.max_sequence_length));
        }
        if self.objectives.is_empty() {
            return Err(ConfigError::NoObjectives);
        }
        if self.runs == 0 {
            return Err(ConfigError::NoRuns);
        }
        Ok(())
    }

    /// Seed of one run, derived from the master seed.
    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvolveError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Refactor(#[from] RefactorError),
}

/// Anything carrying a genotype and its objective values.
pub trait Solution {
    fn genotype(&self) -> &RefactoringSequence;
    fn objectives(&self) -> &ObjectiveVector;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: RefactoringSequence,
    pub objectives: ObjectiveVector,
    pub rank: usize,
    pub crowding: f64,
}

impl Individual {
    pub fn new(genotype: RefactoringSequence, objectives: ObjectiveVector) -> Self {
        Self {
            genotype,
            objectives,
            rank: 0,
            crowding: 0.0,
        }
    }
}

impl Solution for Individual {
    fn genotype(&self) -> &RefactoringSequence {
        &self.genotype
    }
    fn objectives(&self) -> &ObjectiveVector {
        &self.objectives
    }
}

/// `a` is no worse than `b` on every active objective and strictly better on
/// at least one. Infinite values compare as worst.
///
/// A saturated deployment (infinite response time) is dominated by every
/// feasible one, whatever the other objectives say.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector, set: ObjectiveSet) -> bool {
    let (fa, fb) = (a.response_time.is_finite(), b.response_time.is_finite());
    if fa != fb {
        return fa;
    }
    let mut strictly = false;
    for o in set.iter() {
        let (x, y) = (a.get(o), b.get(o));
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Partitions `points` into ranked fronts of indices (Deb et al.'s fast
/// non-dominated sort). Front 0 holds the points no other point dominates.
pub fn fast_nondominated_sort(points: &[ObjectiveVector], set: ObjectiveSet) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    let mut current = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&points[i], &points[j], set) {
                dominated[i].push(j);
                counts[j] += 1;
            } else if dominates(&points[j], &points[i], set) {
                dominated[j].push(i);
                counts[i] += 1;
            }
        }
    }
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            current.push(i);
        }
    }
    let mut fronts = Vec::new();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(core::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each member of `front` (indices into `points`).
///
/// Boundary points of every objective get `+inf`. Interior points add
/// `(next - prev) / (max - min)` per objective; objectives with zero or
/// non-finite range add nothing.
pub fn crowding_distance(points: &[ObjectiveVector], front: &[usize], set: ObjectiveSet) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut order: Vec<usize> = (0..n).collect();
    for o in set.iter() {
        let value = |k: usize| points[front[k]].get(o);
        order.sort_by(|&x, &y| value(x).total_cmp(&value(y)));
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = value(order[n - 1]) - value(order[0]);
        if !(range.is_finite() && range > 0.0) {
            continue;
        }
        for w in 1..n - 1 {
            let gap = value(order[w + 1]) - value(order[w - 1]);
            if gap.is_finite() {
                dist[order[w]] += gap / range;
            }
        }
    }
    dist
}

/// Sets rank and crowding on every individual; returns the fronts.
pub fn rank_population(pop: &mut [Individual], set: ObjectiveSet) -> Vec<Vec<usize>> {
    let points: Vec<ObjectiveVector> = pop.iter().map(|i| i.objectives).collect();
    let fronts = fast_nondominated_sort(&points, set);
    for (rank, front) in fronts.iter().enumerate() {
        let crowd = crowding_distance(&points, front, set);
        for (&i, c) in front.iter().zip(crowd) {
            pop[i].rank = rank;
            pop[i].crowding = c;
        }
    }
    fronts
}

/// Crowded comparison: lower rank first, then larger crowding distance.
fn crowded_cmp(a: &Individual, b: &Individual) -> Ordering {
    a.rank.cmp(&b.rank).then_with(|| b.crowding.total_cmp(&a.crowding))
}

fn tournament<'a, R: Rng + ?Sized>(pop: &'a [Individual], rng: &mut R) -> &'a Individual {
    let a = &pop[rng.random_range(0..pop.len())];
    let b = &pop[rng.random_range(0..pop.len())];
    if crowded_cmp(b, a) == Ordering::Less {
        b
    } else {
        a
    }
}

/// Single cut point chosen independently in each parent; tails swapped;
/// children truncated to `max_len`.
pub fn crossover<R: Rng + ?Sized>(
    a: &RefactoringSequence,
    b: &RefactoringSequence,
    max_len: usize,
    rng: &mut R,
) -> (RefactoringSequence, RefactoringSequence) {
    let ca = rng.random_range(0..=a.len());
    let cb = rng.random_range(0..=b.len());
    let join = |head: &[_], tail: &[_]| {
        let mut v: Vec<_> = head.iter().chain(tail).cloned().collect();
        v.truncate(max_len);
        RefactoringSequence::new(v).unwrap()
    };
    (
        join(&a.actions()[..ca], &b.actions()[cb..]),
        join(&b.actions()[..cb], &a.actions()[ca..]),
    )
}

/// Replaces one uniformly chosen gene by a fresh valid action for the
/// architecture reached by the preceding genes; an empty sequence gains one
/// gene. `seq` must be feasible.
pub fn mutate<R: Rng + ?Sized>(
    seq: &mut RefactoringSequence,
    problem: &Problem,
    rng: &mut R,
) -> Result<(), RefactorError> {
    let i = if seq.is_empty() {
        0
    } else {
        rng.random_range(0..seq.len())
    };
    let prefix = RefactoringSequence::new(seq.actions()[..i].to_vec())?;
    let arch = apply_sequence(&prefix, &problem.initial)?.architecture;
    let action = random_action(&arch, rng)?;
    let genes = seq.actions_mut();
    if i == genes.len() {
        genes.push(action);
    } else {
        genes[i] = action;
    }
    Ok(())
}

/// Makes `seq` feasible: the first failing gene is resampled up to
/// [`REPAIR_ATTEMPTS`] times, after which the sequence is cut before it.
pub fn repair<R: Rng + ?Sized>(seq: &mut RefactoringSequence, problem: &Problem, rng: &mut R) {
    let mut attempts = vec![0usize; seq.len()];
    loop {
        let index = match apply_sequence(seq, &problem.initial) {
            Ok(_) => return,
            Err(RefactorError::Infeasible { index, .. }) => index,
            Err(_) => unreachable!("apply_sequence only reports infeasibility"),
        };
        let prefix = RefactoringSequence::new(seq.actions()[..index].to_vec()).unwrap();
        let arch = apply_sequence(&prefix, &problem.initial)
            .expect("prefix before the first failure is feasible")
            .architecture;
        let replacement = if attempts[index] < REPAIR_ATTEMPTS {
            attempts[index] += 1;
            random_action(&arch, rng).ok()
        } else {
            None
        };
        match replacement {
            Some(action) => seq.actions_mut()[index] = action,
            None => seq.actions_mut().truncate(index),
        }
    }
}

/// Random feasible sequence of length uniform in `1..=max_len`.
pub fn random_sequence<R: Rng + ?Sized>(
    problem: &Problem,
    max_len: usize,
    rng: &mut R,
) -> Result<RefactoringSequence, RefactorError> {
    let len = rng.random_range(1..=max_len);
    let mut arch = problem.initial.clone();
    let mut genes = Vec::with_capacity(len);
    for _ in 0..len {
        let action = match random_action(&arch, rng) {
            Ok(a) => a,
            Err(e) if genes.is_empty() => return Err(e),
            Err(_) => break,
        };
        arch = apply(&action, &arch)?;
        genes.push(action);
    }
    RefactoringSequence::new(genes)
}

fn evaluated(problem: &Problem, genotype: RefactoringSequence) -> Result<Individual, RefactorError> {
    let e = problem.evaluate(&genotype)?;
    Ok(Individual::new(genotype, e.objectives))
}

/// Outcome of a single optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// Rank-0 individuals of the final population.
    pub front: Vec<Individual>,
    pub generations: usize,
}

pub fn evolve<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    problem: &Problem,
    rng: &mut R,
) -> Result<RunOutcome, EvolveError> {
    evolve_with(config, problem, rng, |_, _| {})
}

/// [`evolve`], calling `observer(generation, population)` after the initial
/// population (generation 0) and after every environmental selection.
pub fn evolve_with<R, F>(
    config: &ExperimentConfig,
    problem: &Problem,
    rng: &mut R,
    mut observer: F,
) -> Result<RunOutcome, EvolveError>
where
    R: Rng + ?Sized,
    F: FnMut(usize, &[Individual]),
{
    config.validate()?;
    let set = config.objectives;
    let size = config.population_size;
    let max_len = config.max_sequence_length;

    let mut pop = Vec::with_capacity(size);
    for _ in 0..size {
        let seq = random_sequence(problem, max_len, rng)?;
        pop.push(evaluated(problem, seq)?);
    }
    rank_population(&mut pop, set);
    observer(0, &pop);

    for generation in 1..=config.max_generations {
        let mut offspring = Vec::with_capacity(size);
        while offspring.len() < size {
            let p1 = tournament(&pop, rng);
            let p2 = tournament(&pop, rng);
            let (mut c1, mut c2) = if rng.random_bool(config.crossover_prob) {
                crossover(&p1.genotype, &p2.genotype, max_len, rng)
            } else {
                (p1.genotype.clone(), p2.genotype.clone())
            };
            for child in [&mut c1, &mut c2] {
                repair(child, problem, rng);
                if rng.random_bool(config.mutation_prob) && mutate(child, problem, rng).is_ok() {
                    child.actions_mut().truncate(max_len);
                    repair(child, problem, rng);
                }
            }
            offspring.push(evaluated(problem, c1)?);
            if offspring.len() < size {
                offspring.push(evaluated(problem, c2)?);
            }
        }

        let mut combined = pop;
        combined.extend(offspring);
        let fronts = rank_population(&mut combined, set);
        let mut keep: Vec<usize> = Vec::with_capacity(size);
        for front in fronts {
            if keep.len() + front.len() <= size {
                keep.extend(front);
            } else {
                let mut last = front;
                last.sort_by(|&a, &b| combined[b].crowding.total_cmp(&combined[a].crowding));
                keep.extend(last.into_iter().take(size - keep.len()));
            }
            if keep.len() == size {
                break;
            }
        }
        let mut slots: Vec<Option<Individual>> = combined.into_iter().map(Some).collect();
        pop = keep.into_iter().map(|i| slots[i].take().unwrap()).collect();
        rank_population(&mut pop, set);
        observer(generation, &pop);
    }

    let front = pop.into_iter().filter(|i| i.rank == 0).collect();
    Ok(RunOutcome {
        front,
        generations: config.max_generations,
    })
}

/// Non-dominated subset of the union of several fronts, without exact
/// duplicates (same genotype and same objective values). Order follows the
/// input order.
pub fn super_front<T: Solution + Clone>(fronts: &[Vec<T>], set: ObjectiveSet) -> Vec<T> {
    let mut seen = BTreeSet::new();
    let mut union: Vec<&T> = Vec::new();
    for s in fronts.iter().flatten() {
        let o = s.objectives();
        let key = (
            s.genotype().clone(),
            [
                o.power.to_bits(),
                o.response_time.to_bits(),
                o.cost.to_bits(),
                o.complexity.to_bits(),
            ],
        );
        if seen.insert(key) {
            union.push(s);
        }
    }
    let points: Vec<ObjectiveVector> = union.iter().map(|s| *s.objectives()).collect();
    let mut best = fast_nondominated_sort(&points, set)
        .into_iter()
        .next()
        .unwrap_or_default();
    best.sort_unstable();
    best.into_iter().map(|i| union[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testing::small;
    use crate::objectives::Objective;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(p: f64, r: f64, c: f64, x: f64) -> ObjectiveVector {
        ObjectiveVector {
            power: p,
            response_time: r,
            cost: c,
            complexity: x,
        }
    }

    /// Two objectives: cost and complexity.
    fn two() -> ObjectiveSet {
        [Objective::Cost, Objective::Complexity].into_iter().collect()
    }

    fn brute_force_fronts(points: &[ObjectiveVector], set: ObjectiveSet) -> Vec<Vec<usize>> {
        let mut left: Vec<usize> = (0..points.len()).collect();
        let mut fronts = Vec::new();
        while !left.is_empty() {
            let front: Vec<usize> = left
                .iter()
                .copied()
                .filter(|&i| !left.iter().any(|&j| dominates(&points[j], &points[i], set)))
                .collect();
            left.retain(|i| !front.contains(i));
            fronts.push(front);
        }
        fronts
    }

    #[test]
    fn dominance_cases() {
        let all = ObjectiveSet::POWER_AWARE;
        assert!(dominates(&v(1., 1., 1., 1.), &v(2., 2., 2., 2.), all));
        assert!(!dominates(&v(1., 1., 1., 1.), &v(1., 1., 1., 1.), all));
        assert!(!dominates(&v(0., 0., 1., 3.), &v(0., 0., 2., 2.), two()));
        assert!(!dominates(&v(0., 0., 2., 2.), &v(0., 0., 1., 3.), two()));
        assert!(dominates(&v(0., 5., 1., 1.), &v(0., f64::INFINITY, 1., 1.), all));
    }

    #[test]
    fn saturated_is_dominated_by_feasible() {
        let cheap = v(1.0, f64::INFINITY, 0.01, 0.0);
        let ok = v(50.0, 30.0, 1.0, 3.0);
        assert!(dominates(&ok, &cheap, ObjectiveSet::BASELINE));
        assert!(!dominates(&cheap, &ok, ObjectiveSet::BASELINE));
    }

    #[test]
    fn inactive_objective_ignored() {
        let a = v(1.0, 1.0, 1.0, 1.0);
        let b = v(0.0, 1.0, 1.0, 1.0);
        assert!(!dominates(&a, &b, ObjectiveSet::BASELINE));
        assert!(dominates(&b, &a, ObjectiveSet::POWER_AWARE));
    }

    #[test]
    fn sort_total_order() {
        let pts = [v(0., 0., 1., 1.), v(0., 0., 2., 2.), v(0., 0., 3., 3.)];
        assert_eq!(fast_nondominated_sort(&pts, two()), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn sort_incomparable() {
        let pts = [v(0., 0., 1., 2.), v(0., 0., 2., 1.)];
        assert_eq!(fast_nondominated_sort(&pts, two()), vec![vec![0, 1]]);
    }

    proptest! {
        #[test]
        fn sort_matches_brute_force(raw in prop::collection::vec((0u8..6, 0u8..6, 0u8..6, 0u8..6), 1..50)) {
            let pts: Vec<_> = raw.iter().map(|&(a, b, c, d)| v(a.into(), b.into(), c.into(), d.into())).collect();
            let mut fast = fast_nondominated_sort(&pts, ObjectiveSet::POWER_AWARE);
            for f in &mut fast { f.sort_unstable(); }
            prop_assert_eq!(fast, brute_force_fronts(&pts, ObjectiveSet::POWER_AWARE));
        }
    }

    #[test]
    fn crowding_small_fronts_infinite() {
        let pts = [v(0., 0., 1., 2.), v(0., 0., 2., 1.)];
        assert_eq!(crowding_distance(&pts, &[0, 1], two()), vec![f64::INFINITY; 2]);
    }

    #[test]
    fn crowding_evenly_spaced() {
        // cost 0, 1, 2 and complexity 2, 1, 0: middle gets 2/2 + 2/2.
        let pts = [v(0., 0., 0., 2.), v(0., 0., 1., 1.), v(0., 0., 2., 0.)];
        let d = crowding_distance(&pts, &[0, 1, 2], two());
        assert_eq!(d[0], f64::INFINITY);
        assert_eq!(d[2], f64::INFINITY);
        assert!((d[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn crowding_identical_points() {
        let pts = [v(1., 1., 1., 1.); 4];
        let d = crowding_distance(&pts, &[0, 1, 2, 3], ObjectiveSet::POWER_AWARE);
        assert_eq!(d.iter().filter(|x| x.is_infinite()).count(), 2);
        assert_eq!(d.iter().filter(|&&x| x == 0.0).count(), 2);
    }

    #[test]
    fn crossover_respects_length() {
        use crate::refactor::RefactoringAction;
        let a = RefactoringSequence::new(vec![RefactoringAction::clon("n1"); 4]).unwrap();
        let b = RefactoringSequence::new(vec![RefactoringAction::clon("n2"); 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (x, y) = crossover(&a, &b, 4, &mut rng);
            assert!(x.len() <= 4 && y.len() <= 4);
            assert!(x.len() + y.len() >= 4);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::default();
        assert_eq!(c.validate(), Ok(()));
        c.population_size = 7;
        assert_eq!(c.validate(), Err(ConfigError::PopulationSize(7)));
        c.population_size = 16;
        c.mutation_prob = 1.2;
        assert!(c.validate().is_err());
        c.mutation_prob = 0.2;
        c.runs = 0;
        assert_eq!(c.validate(), Err(ConfigError::NoRuns));
    }

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            max_generations: 15,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn evolve_is_deterministic() {
        let problem = Problem::new(small(), ObjectiveSet::POWER_AWARE);
        let a = evolve(&small_config(), &problem, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = evolve(&small_config(), &problem, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn evolve_front_is_non_dominated_and_short() {
        let problem = Problem::new(small(), ObjectiveSet::BASELINE);
        let config = ExperimentConfig {
            objectives: ObjectiveSet::BASELINE,
            ..small_config()
        };
        let out = evolve(&config, &problem, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert!(!out.front.is_empty());
        for x in &out.front {
            assert!(x.genotype.len() <= 4);
            for y in &out.front {
                assert!(!dominates(&y.objectives, &x.objectives, config.objectives));
            }
        }
    }

    #[test]
    fn elitism_keeps_best_values() {
        let problem = Problem::new(small(), ObjectiveSet::POWER_AWARE);
        let config = small_config();
        let mut best: Option<Vec<f64>> = None;
        evolve_with(&config, &problem, &mut ChaCha8Rng::seed_from_u64(9), |_, pop| {
            let now: Vec<f64> = config
                .objectives
                .iter()
                .map(|o| {
                    pop.iter()
                        .filter(|i| i.objectives.response_time.is_finite())
                        .map(|i| i.objectives.get(o))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            if let Some(prev) = &best {
                for (p, n) in prev.iter().zip(&now) {
                    assert!(n <= p);
                }
            }
            best = Some(now);
        })
        .unwrap();
    }

    #[test]
    fn super_front_of_one_run_dedups() {
        let g = RefactoringSequence::empty();
        let x = Individual::new(g.clone(), v(1., 1., 1., 1.));
        let y = Individual::new(g, v(2., 0., 1., 1.));
        let front = vec![x.clone(), x.clone(), y.clone()];
        assert_eq!(super_front(&[front], ObjectiveSet::POWER_AWARE), vec![x, y]);
    }

    #[test]
    fn super_front_union_of_disjoint() {
        let g = RefactoringSequence::empty();
        let a = vec![Individual::new(g.clone(), v(0., 0., 1., 4.))];
        let b = vec![Individual::new(g, v(0., 0., 4., 1.))];
        let s = super_front(&[a.clone(), b.clone()], two());
        assert_eq!(s, vec![a[0].clone(), b[0].clone()]);
    }
}
