//! Multi-threaded yield estimation. Trial streams are indexed, so the
//! result does not depend on the thread count.

use freqalloc_core::{DispersionModel, Tally, YieldEngine, YieldError, YieldEstimate};

pub fn estimate(engine: &YieldEngine, model: &DispersionModel, threads: usize) -> Result<YieldEstimate, YieldError> {
    model.validate()?;
    let threads = threads.max(1) as u64;
    let chunk = model.trials.div_ceil(threads);
    let tallies: Vec<Tally> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|k| {
                let lo = (k * chunk).min(model.trials);
                let hi = ((k + 1) * chunk).min(model.trials);
                s.spawn(move || engine.tally(model.sigma, model.seed, lo..hi))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("yield worker panicked"))
            .collect()
    });
    let mut total = Tally::default();
    for t in &tallies {
        total.merge(t);
    }
    Ok(engine.finish(model.sigma, &total))
}

/// Available parallelism, or 1 if unknown.
pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
