//! Binary particle swarm under-sampling.
//!
//! A particle's position is a bitmask over the majority (negative) rows of a
//! dataset; bit `j` set means the `j`-th majority row is kept. Each candidate
//! subset is scored by the mean F-measure of a 1-NN classifier under
//! stratified cross validation on all minority rows plus the kept majority
//! rows. Velocities follow the discrete PSO of Kennedy and Eberhart: a bit is
//! set with probability `sigmoid(v)`. Positions are then repaired to exactly
//! `target_ones` set bits before evaluation.

use std::collections::HashMap;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::dataset::{stratified_assign, Dataset, Label};
use crate::error::{Error, Result};
use crate::metrics::{confusion, score};
use crate::neighbors::sq_dist;
use crate::resampling::{Provenance, ResampleOutcome};
use crate::rng;

pub type Mask = Vec<bool>;

const FOLD_SALT: u64 = 0xF01D;
const INIT_SALT: u64 = 0x1417;
const STEP_SALT: u64 = 0x57E9;

/// Largest pool for which pairwise distances are precomputed.
const DISTANCE_CACHE_ROWS: usize = 3000;

#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub max_iterations: usize,
    /// Cognitive coefficient.
    pub c1: f64,
    /// Social coefficient.
    pub c2: f64,
    pub inertia: f64,
    pub v_max: f64,
    pub target_ones: usize,
    pub fitness_folds: usize,
    pub seed: u64,
    /// Stop after this many iterations without a global-best improvement.
    /// Zero disables early stopping.
    pub patience: usize,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            swarm_size: 40,
            max_iterations: 2000,
            c1: 2.0,
            c2: 2.0,
            inertia: 1.0,
            v_max: 4.0,
            target_ones: 0,
            fitness_folds: 5,
            seed: 0,
            patience: 200,
        }
    }
}

impl PsoConfig {
    /// Budget used by the experiment grid: 100 iterations, patience 20.
    pub fn desk_scale() -> Self {
        PsoConfig {
            max_iterations: 100,
            patience: 20,
            ..PsoConfig::default()
        }
    }

    /// Seed of the fold assignment [`pso_undersample`] scores masks with.
    pub fn fitness_fold_seed(&self) -> u64 {
        rng::derive_seed(self.seed, &[FOLD_SALT])
    }

    fn validate(&self, n_major: usize, n_minor: usize) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::InvalidParameter(format!("swarm size {} < 2", self.swarm_size)));
        }
        if self.fitness_folds < 2 {
            return Err(Error::InvalidParameter(format!(
                "fitness folds {} < 2",
                self.fitness_folds
            )));
        }
        if self.v_max.is_nan()
            || self.v_max <= 0.0
            || !self.c1.is_finite()
            || !self.c2.is_finite()
            || !self.inertia.is_finite()
        {
            return Err(Error::InvalidParameter(
                "PSO coefficients must be finite, v_max > 0".into(),
            ));
        }
        if self.target_ones == 0 || self.target_ones > n_major {
            return Err(Error::Infeasible(format!(
                "cannot select {} of {} majority rows",
                self.target_ones, n_major
            )));
        }
        check_fold_sizes(n_minor, self.target_ones, self.fitness_folds)
    }
}

fn check_fold_sizes(n_minor: usize, n_selected: usize, folds: usize) -> Result<()> {
    if n_minor < folds {
        return Err(Error::too_few("minority rows for fitness folds", folds, n_minor));
    }
    if n_selected < folds {
        return Err(Error::too_few(
            "selected majority rows for fitness folds",
            folds,
            n_selected,
        ));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Particle {
    pub position: Mask,
    pub velocity: Vec<f64>,
    pub best_position: Mask,
    pub best_fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoTrace {
    /// Global best after initialisation (entry 0) and after each iteration.
    pub best_fitness: Vec<f64>,
    pub best_position: Mask,
    pub final_fitness: f64,
    /// Distinct masks actually scored (cache misses).
    pub evaluations: usize,
}

impl PsoTrace {
    pub fn iterations_run(&self) -> usize {
        self.best_fitness.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone)]
pub struct PsoOutcome {
    /// Dataset row indices of the selected majority rows, ascending.
    pub selected: Vec<usize>,
    pub trace: PsoTrace,
}

/// Scores majority-row masks for one dataset with a fixed fold seed.
pub struct FitnessEvaluator<'a> {
    ds: &'a Dataset,
    /// For each dataset row, its rank among majority rows (`None` for minority).
    majority_rank: Vec<Option<usize>>,
    n_major: usize,
    n_minor: usize,
    folds: usize,
    fold_seed: u64,
    distances: Option<Vec<f64>>,
}

impl<'a> FitnessEvaluator<'a> {
    pub fn new(ds: &'a Dataset, folds: usize, fold_seed: u64) -> Self {
        let mut n_major = 0;
        let majority_rank = ds
            .labels()
            .iter()
            .map(|l| match l {
                Label::Negative => {
                    n_major += 1;
                    Some(n_major - 1)
                }
                Label::Positive => None,
            })
            .collect();
        let n = ds.len();
        let distances = (n <= DISTANCE_CACHE_ROWS).then(|| {
            let mut d = vec![0.0; n * n];
            d.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
                for (j, slot) in row.iter_mut().enumerate() {
                    *slot = sq_dist(ds.row(i), ds.row(j));
                }
            });
            d
        });
        FitnessEvaluator {
            ds,
            majority_rank,
            n_major,
            n_minor: n - n_major,
            folds,
            fold_seed,
            distances,
        }
    }

    pub fn n_major(&self) -> usize {
        self.n_major
    }

    /// Dataset indices of majority rows, in mask order.
    pub fn majority_rows(&self) -> Vec<usize> {
        (0..self.ds.len())
            .filter(|&i| self.majority_rank[i].is_some())
            .collect()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.distances {
            Some(d) => d[i * self.ds.len() + j],
            None => sq_dist(self.ds.row(i), self.ds.row(j)),
        }
    }

    /// Mean per-fold F-measure of 1-NN over the working set selected by `mask`.
    pub fn evaluate(&self, mask: &[bool]) -> Result<f64> {
        if mask.len() != self.n_major {
            return Err(Error::ShapeMismatch {
                expected: self.n_major,
                found: mask.len(),
            });
        }
        let selected = mask.iter().filter(|&&b| b).count();
        check_fold_sizes(self.n_minor, selected, self.folds)?;

        let working: Vec<usize> = (0..self.ds.len())
            .filter(|&i| self.majority_rank[i].is_none_or(|r| mask[r]))
            .collect();
        let labels: Vec<Label> = working.iter().map(|&i| self.ds.label(i)).collect();
        let plan = stratified_assign(&labels, self.folds, self.fold_seed)?;
        let fold_of = plan.assignments();

        let mut total = 0.0;
        for f in 0..self.folds {
            let mut predicted = Vec::new();
            let mut actual = Vec::new();
            for (p, &row) in working.iter().enumerate() {
                if fold_of[p] != f {
                    continue;
                }
                let mut best = f64::INFINITY;
                let mut best_label = Label::Negative;
                for (q, &other) in working.iter().enumerate() {
                    if fold_of[q] == f {
                        continue;
                    }
                    let d = self.dist(row, other);
                    if d < best {
                        best = d;
                        best_label = labels[q];
                    }
                }
                predicted.push(best_label);
                actual.push(labels[p]);
            }
            total += score(&confusion(&predicted, &actual)?)?.f_measure;
        }
        Ok(total / self.folds as f64)
    }
}

/// Cross-validated 1-NN F-measure of the working set picked by `mask`.
pub fn fitness(mask: &[bool], ds: &Dataset, folds: usize, seed: u64) -> Result<f64> {
    FitnessEvaluator::new(ds, folds, seed).evaluate(mask)
}

/// Flips uniformly chosen bits until exactly `target_ones` are set. Only bits
/// on the excess side are touched.
pub fn repair<R: Rng + ?Sized>(mask: &[bool], target_ones: usize, rng: &mut R) -> Result<Mask> {
    if target_ones > mask.len() {
        return Err(Error::Infeasible(format!(
            "cannot set {target_ones} bits in a mask of length {}",
            mask.len()
        )));
    }
    let mut out = mask.to_vec();
    let ones: Vec<usize> = (0..mask.len()).filter(|&j| mask[j]).collect();
    if ones.len() > target_ones {
        for k in index::sample(rng, ones.len(), ones.len() - target_ones) {
            out[ones[k]] = false;
        }
    } else if ones.len() < target_ones {
        let zeros: Vec<usize> = (0..mask.len()).filter(|&j| !mask[j]).collect();
        for k in index::sample(rng, zeros.len(), target_ones - ones.len()) {
            out[zeros[k]] = true;
        }
    }
    Ok(out)
}

fn random_subset<R: Rng + ?Sized>(n: usize, ones: usize, rng: &mut R) -> Mask {
    let mut m = vec![false; n];
    for j in index::sample(rng, n, ones) {
        m[j] = true;
    }
    m
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

fn mask_key(mask: &[bool]) -> Vec<u64> {
    let mut key = vec![0u64; mask.len().div_ceil(64)];
    for (j, &b) in mask.iter().enumerate() {
        if b {
            key[j / 64] |= 1 << (j % 64);
        }
    }
    key
}

/// Memoised fitness; evaluation of new masks runs in parallel.
struct ScoreCache<'e, 'a> {
    evaluator: &'e FitnessEvaluator<'a>,
    known: HashMap<Vec<u64>, f64>,
    evaluations: usize,
}

impl<'e, 'a> ScoreCache<'e, 'a> {
    fn score_all(&mut self, masks: &[&Mask]) -> Result<Vec<f64>> {
        let keys: Vec<Vec<u64>> = masks.iter().map(|m| mask_key(m)).collect();
        let mut pending: Vec<usize> = Vec::new();
        let mut seen = HashMap::new();
        for (i, k) in keys.iter().enumerate() {
            if !self.known.contains_key(k) && seen.insert(k.clone(), i).is_none() {
                pending.push(i);
            }
        }
        let fresh: Vec<Result<f64>> = pending.par_iter().map(|&i| self.evaluator.evaluate(masks[i])).collect();
        for (&i, f) in pending.iter().zip(fresh) {
            self.known.insert(keys[i].clone(), f?);
            self.evaluations += 1;
        }
        Ok(keys.iter().map(|k| self.known[k]).collect())
    }
}

/// Selects `cfg.target_ones` majority rows of `ds` maximising [`fitness`].
pub fn pso_undersample(ds: &Dataset, cfg: &PsoConfig) -> Result<PsoOutcome> {
    let evaluator = FitnessEvaluator::new(ds, cfg.fitness_folds, cfg.fitness_fold_seed());
    let n = evaluator.n_major();
    cfg.validate(n, ds.len() - n)?;
    let majority = evaluator.majority_rows();
    let mut cache = ScoreCache {
        evaluator: &evaluator,
        known: HashMap::new(),
        evaluations: 0,
    };

    if cfg.target_ones == n {
        let all = vec![true; n];
        let f = cache.score_all(&[&all])?[0];
        return Ok(PsoOutcome {
            selected: majority,
            trace: PsoTrace {
                best_fitness: vec![f],
                best_position: all,
                final_fitness: f,
                evaluations: cache.evaluations,
            },
        });
    }

    let mut swarm: Vec<Particle> = (0..cfg.swarm_size)
        .map(|i| {
            let mut r = rng::stream(cfg.seed, &[INIT_SALT, i as u64]);
            let position = random_subset(n, cfg.target_ones, &mut r);
            let velocity = (0..n).map(|_| r.random_range(-cfg.v_max..=cfg.v_max)).collect();
            Particle {
                best_position: position.clone(),
                position,
                velocity,
                best_fitness: f64::NEG_INFINITY,
            }
        })
        .collect();

    let initial = cache.score_all(&swarm.iter().map(|p| &p.position).collect::<Vec<_>>())?;
    let mut gbest_idx = 0;
    for (i, (p, &f)) in swarm.iter_mut().zip(&initial).enumerate() {
        p.best_fitness = f;
        if f > initial[gbest_idx] {
            gbest_idx = i;
        }
    }
    let mut gbest = swarm[gbest_idx].position.clone();
    let mut gbest_fitness = initial[gbest_idx];
    let mut history = vec![gbest_fitness];
    let mut stale = 0;

    for iter in 1..=cfg.max_iterations {
        let leader = &gbest;
        swarm.par_iter_mut().enumerate().try_for_each(|(i, p)| -> Result<()> {
            let mut r = rng::stream(cfg.seed, &[STEP_SALT, i as u64, iter as u64]);
            let mut next = vec![false; n];
            for j in 0..n {
                let x = f64::from(u8::from(p.position[j]));
                let pb = f64::from(u8::from(p.best_position[j]));
                let gb = f64::from(u8::from(leader[j]));
                let r1: f64 = r.random();
                let r2: f64 = r.random();
                let v = cfg.inertia * p.velocity[j] + cfg.c1 * r1 * (pb - x) + cfg.c2 * r2 * (gb - x);
                let v = v.clamp(-cfg.v_max, cfg.v_max);
                p.velocity[j] = v;
                next[j] = r.random::<f64>() < sigmoid(v);
            }
            p.position = repair(&next, cfg.target_ones, &mut r)?;
            Ok(())
        })?;

        let scores = cache.score_all(&swarm.iter().map(|p| &p.position).collect::<Vec<_>>())?;
        let mut improved = false;
        for (p, &f) in swarm.iter_mut().zip(&scores) {
            if f > p.best_fitness {
                p.best_fitness = f;
                p.best_position = p.position.clone();
            }
            if f > gbest_fitness {
                gbest_fitness = f;
                gbest = p.position.clone();
                improved = true;
            }
        }
        history.push(gbest_fitness);
        stale = if improved { 0 } else { stale + 1 };
        log::trace!("pso iteration {iter}: best {gbest_fitness:.6}");
        if cfg.patience > 0 && stale >= cfg.patience {
            break;
        }
    }

    let selected = majority
        .iter()
        .zip(&gbest)
        .filter_map(|(&row, &keep)| keep.then_some(row))
        .collect();
    Ok(PsoOutcome {
        selected,
        trace: PsoTrace {
            best_fitness: history,
            best_position: gbest,
            final_fitness: gbest_fitness,
            evaluations: cache.evaluations,
        },
    })
}

/// The stand-alone PSO strategy: keep every minority row and a PSO-chosen
/// majority subset of the same size.
pub fn pso_resample(ds: &Dataset, cfg: &PsoConfig) -> Result<(ResampleOutcome, PsoTrace)> {
    let (n_pos, n_neg) = ds.class_counts();
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass {
            positives: n_pos,
            negatives: n_neg,
        });
    }
    let cfg = PsoConfig {
        target_ones: n_pos,
        ..cfg.clone()
    };
    let out = pso_undersample(ds, &cfg)?;
    let mut keep = vec![false; ds.len()];
    for &i in &out.selected {
        keep[i] = true;
    }
    let rows: Vec<usize> = (0..ds.len())
        .filter(|&i| keep[i] || ds.label(i).is_positive())
        .collect();
    Ok((
        ResampleOutcome {
            dataset: ds.subset(&rows),
            provenance: rows.into_iter().map(|source| Provenance::Original { source }).collect(),
        },
        out.trace,
    ))
}
