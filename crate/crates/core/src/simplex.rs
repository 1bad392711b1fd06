//! Derivative-free direct search: Nelder-Mead simplex with an evaluation
//! budget and deterministic seeded restarts.
//!
//! The search always starts from the origin, so the caller's baseline value
//! is part of the record and the result can only improve on it. Batched
//! evaluations (initial simplex, shrink steps) run concurrently but are
//! reduced in index order, so a fixed `(seed, budget)` gives bit-identical
//! results regardless of thread count.

use rayon::prelude::*;

use crate::rng::SplitMix64;

// Standard Nelder-Mead coefficients.
const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Simplex collapse thresholds that trigger a restart.
const VALUE_SPREAD_TOL: f64 = 1e-12;
const POINT_SPREAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DirectSearch {
    /// Maximum number of objective evaluations.
    pub budget: usize,
    /// Seed for the restart perturbations.
    pub seed: u64,
    /// Edge length of the first simplex.
    pub initial_step: f64,
}

impl DirectSearch {
    pub fn new(budget: usize, seed: u64) -> Self {
        Self {
            budget,
            seed,
            initial_step: 0.5,
        }
    }
}

/// Outcome of a direct search.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    /// True when the budget ran out before any simplex cycle converged.
    pub budget_exhausted: bool,
}

struct Tracker<'a, F> {
    f: &'a F,
    evaluations: usize,
    budget: usize,
    best_point: Vec<f64>,
    best_value: f64,
}

impl<'a, F: Fn(&[f64]) -> f64 + Sync> Tracker<'a, F> {
    fn remaining(&self) -> usize {
        self.budget - self.evaluations
    }

    fn eval_one(&mut self, x: &[f64]) -> Option<f64> {
        if self.remaining() == 0 {
            return None;
        }
        let v = (self.f)(x);
        self.evaluations += 1;
        if v > self.best_value {
            self.best_value = v;
            self.best_point = x.to_vec();
        }
        Some(v)
    }

    /// Evaluates a batch concurrently, truncated to the remaining budget;
    /// results come back in input order.
    fn eval_batch(&mut self, xs: &[Vec<f64>]) -> Vec<f64> {
        let take = xs.len().min(self.remaining());
        let values: Vec<f64> = xs[..take].par_iter().map(|x| (self.f)(x)).collect();
        self.evaluations += take;
        for (x, &v) in xs[..take].iter().zip(values.iter()) {
            if v > self.best_value {
                self.best_value = v;
                self.best_point = x.clone();
            }
        }
        values
    }
}

/// Maximizes `f` over `R^dim` within the evaluation budget.
///
/// The origin is always the first vertex of the first simplex.
pub fn maximize<F>(f: F, dim: usize, opts: &DirectSearch) -> SearchResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    assert!(dim >= 1, "direct search needs at least one coordinate");
    assert!(opts.budget >= 1, "budget must be at least 1");

    let mut tracker = Tracker {
        f: &f,
        evaluations: 0,
        budget: opts.budget,
        best_point: vec![0.0; dim],
        best_value: f64::NEG_INFINITY,
    };
    let mut rng = SplitMix64::new(opts.seed);
    let mut converged_once = false;
    let mut origin = vec![0.0; dim];
    let mut step = opts.initial_step;

    loop {
        // A full cycle needs at least the initial simplex.
        if tracker.remaining() < dim + 1 {
            break;
        }
        let converged = run_cycle(&mut tracker, &origin, step, dim);
        converged_once = converged_once || converged;
        if tracker.remaining() == 0 {
            break;
        }
        // Restart around the incumbent with a perturbed, shrunken step.
        origin.clone_from(&tracker.best_point);
        step = opts.initial_step * rng.next_range(0.2, 1.0);
        for x in &mut origin {
            *x += step * rng.next_range(-0.5, 0.5);
        }
    }

    SearchResult {
        best_point: tracker.best_point.clone(),
        best_value: tracker.best_value,
        evaluations: tracker.evaluations,
        budget_exhausted: !converged_once,
    }
}

/// One Nelder-Mead run from a simplex anchored at `origin`; returns whether
/// it converged before the budget ran out.
fn run_cycle<F>(tracker: &mut Tracker<'_, F>, origin: &[f64], step: f64, dim: usize) -> bool
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    points.push(origin.to_vec());
    for i in 0..dim {
        let mut x = origin.to_vec();
        x[i] += step;
        points.push(x);
    }
    let mut values = tracker.eval_batch(&points);
    if values.len() < points.len() {
        return false;
    }

    loop {
        // Internally minimize the negated objective: order worst-first on f.
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).expect("finite objective"));
        let best = order[0];
        let second_worst = order[order.len() - 2];
        let worst = order[order.len() - 1];

        if spread(&values) < VALUE_SPREAD_TOL && diameter(&points) < POINT_SPREAD_TOL {
            return true;
        }
        if tracker.remaining() == 0 {
            return false;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for (k, p) in points.iter().enumerate() {
            if k != worst {
                for (c, &x) in centroid.iter_mut().zip(p.iter()) {
                    *c += x;
                }
            }
        }
        for c in &mut centroid {
            *c /= dim as f64;
        }

        let reflected = affine(&centroid, &points[worst], REFLECT);
        let fr = match tracker.eval_one(&reflected) {
            Some(v) => v,
            None => return false,
        };

        if fr > values[best] {
            // Try to expand further along the same direction.
            let expanded = affine(&centroid, &points[worst], EXPAND);
            match tracker.eval_one(&expanded) {
                Some(fe) if fe > fr => {
                    points[worst] = expanded;
                    values[worst] = fe;
                }
                Some(_) => {
                    points[worst] = reflected;
                    values[worst] = fr;
                }
                None => return false,
            }
        } else if fr > values[second_worst] {
            points[worst] = reflected;
            values[worst] = fr;
        } else {
            // Contract toward the centroid, outside or inside.
            let (candidate, reference) = if fr > values[worst] {
                (affine(&centroid, &points[worst], CONTRACT), fr)
            } else {
                (affine(&centroid, &points[worst], -CONTRACT), values[worst])
            };
            match tracker.eval_one(&candidate) {
                Some(fc) if fc > reference => {
                    points[worst] = candidate;
                    values[worst] = fc;
                }
                Some(_) => {
                    // Shrink everything toward the best vertex.
                    let best_point = points[best].clone();
                    let mut shrunk: Vec<Vec<f64>> = Vec::with_capacity(points.len() - 1);
                    for (k, p) in points.iter().enumerate() {
                        if k == best {
                            continue;
                        }
                        let x: Vec<f64> = best_point
                            .iter()
                            .zip(p.iter())
                            .map(|(&b, &q)| b + SHRINK * (q - b))
                            .collect();
                        shrunk.push(x);
                    }
                    let new_values = tracker.eval_batch(&shrunk);
                    if new_values.len() < shrunk.len() {
                        return false;
                    }
                    let mut it = shrunk.into_iter().zip(new_values);
                    for k in 0..points.len() {
                        if k == best {
                            continue;
                        }
                        let (x, v) = it.next().expect("one replacement per vertex");
                        points[k] = x;
                        values[k] = v;
                    }
                }
                None => return false,
            }
        }
    }
}

/// `centroid + coeff * (centroid - worst)`.
fn affine(centroid: &[f64], worst: &[f64], coeff: f64) -> Vec<f64> {
    centroid
        .iter()
        .zip(worst.iter())
        .map(|(&c, &w)| c + coeff * (c - w))
        .collect()
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

fn diameter(points: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for a in points {
        for b in points {
            let dist2: f64 = a
                .iter()
                .zip(b.iter())
                .map(|(&x, &y)| (x - y) * (x - y))
                .sum();
            d = d.max(dist2.sqrt());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_maximum_in_one_dim() {
        let f = |x: &[f64]| -(x[0] - 1.0) * (x[0] - 1.0);
        let r = maximize(f, 1, &DirectSearch::new(200, 7));
        assert!((r.best_point[0] - 1.0).abs() < 1e-6, "{:?}", r.best_point);
        assert!(r.best_value > -1e-10);
        assert!(!r.budget_exhausted);
    }

    #[test]
    fn finds_quadratic_maximum_in_three_dims() {
        let target = [0.3, -1.2, 2.0];
        let f = |x: &[f64]| {
            -x.iter()
                .zip(target.iter())
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<f64>()
        };
        let r = maximize(f, 3, &DirectSearch::new(600, 11));
        for (a, b) in r.best_point.iter().zip(target.iter()) {
            assert!((a - b).abs() < 1e-4, "{:?}", r.best_point);
        }
    }

    #[test]
    fn origin_value_is_a_floor() {
        // A needle the search will not find: the origin value must survive.
        let f = |x: &[f64]| {
            if x[0].abs() < 1e-300 {
                5.0
            } else {
                -x[0] * x[0] - 1.0
            }
        };
        let r = maximize(f, 1, &DirectSearch::new(50, 3));
        assert!(r.best_value >= 5.0);
        assert_eq!(r.best_point, vec![0.0]);
    }

    #[test]
    fn tiny_budget_sets_exhausted_flag() {
        let f = |x: &[f64]| -x[0] * x[0];
        let r = maximize(f, 1, &DirectSearch::new(3, 1));
        assert!(r.budget_exhausted);
        assert_eq!(r.evaluations, 3);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let f = |x: &[f64]| -(x[0] - 0.7).powi(2) - (x[1] + 0.2).powi(2);
        let a = maximize(f, 2, &DirectSearch::new(300, 99));
        let b = maximize(f, 2, &DirectSearch::new(300, 99));
        assert_eq!(a.best_point, b.best_point);
        assert_eq!(a.best_value, b.best_value);
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn constant_objective_converges() {
        let f = |_: &[f64]| 4.2;
        let r = maximize(f, 2, &DirectSearch::new(100, 5));
        assert_eq!(r.best_value, 4.2);
        assert!(!r.budget_exhausted);
    }
}
