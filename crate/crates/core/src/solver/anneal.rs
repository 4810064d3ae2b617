// Simulated annealing over frequencies and drives, maximizing the smallest
// margin. A small term on the summed violations keeps the walk moving while
// many instances are violated at once.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::model::Model;
use crate::math::exp;

const T_START: f64 = 10.0;
const T_END: f64 = 0.01;

fn score(model: &Model, x: &[f64]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut neg = 0.0;
    for c in &model.cons {
        let m = c.margin(x);
        min = f64::min(min, m);
        if m < 0.0 {
            neg += m;
        }
    }
    (min, min + 1e-3 * neg)
}

/// Returns the best point seen and its smallest margin.
pub(crate) fn anneal(
    model: &Model,
    iterations: u64,
    seed: u64,
    start: Option<&[f64]>,
) -> (Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = model.band;
    let n = model.num_cols();
    let mut x: Vec<f64> = match start {
        Some(s) => s.to_vec(),
        None => (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect(),
    };
    let (mut min, mut energy) = score(model, &x);
    let mut best = (x.clone(), min);
    if n == 0 || iterations == 0 {
        return best;
    }
    let cool = crate::math::powf(T_END / T_START, 1.0 / iterations as f64);
    let mut t = T_START;
    for _ in 0..iterations {
        let j = rng.random_range(0..n);
        let z: f64 = rng.sample(StandardNormal);
        let step = 0.25 * (hi - lo) * (t / T_START) + 0.5;
        let old = x[j];
        x[j] = (old + step * z).clamp(lo, hi);
        let (m, e) = score(model, &x);
        let u: f64 = rng.random();
        if e >= energy || u < exp((e - energy) / t) {
            energy = e;
            min = m;
            if min > best.1 {
                best = (x.clone(), min);
            }
        } else {
            x[j] = old;
        }
        t *= cool;
    }
    best
}
