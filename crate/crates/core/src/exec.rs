//! Execution strategy and seeded random substreams.
//!
//! With the `parallel` feature (default) independent work items are spread
//! over the current rayon pool; without it everything runs on the calling
//! thread. Both strategies produce bit-identical results: every work item
//! is computed independently and reductions happen afterwards in index
//! order.
//!
//! Monte-Carlo trials are split into fixed-size chunks and chunk `i` draws
//! from ChaCha stream `i` of the run seed. Results therefore depend only on
//! `(seed, trials, chunk size)`, not on how many worker threads run them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random generator used by every sampler in the crate.
pub type SimRng = ChaCha8Rng;

/// Trials per Monte-Carlo chunk.
pub const DEFAULT_CHUNK: u64 = 4096;
/// Chunks evaluated between early-exit checks.
const CHUNKS_PER_ROUND: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Evaluates `f(0..n)` and returns the results in index order.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }
}

/// Independent generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Chunked Bernoulli Monte-Carlo runner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub trials: u64,
    pub seed: u64,
    pub chunk_size: u64,
    pub execution: Execution,
    /// Stop once the 95% half-width drops below this fraction of the
    /// estimate (checked every few chunks). `None` runs every trial.
    pub early_exit_ratio: Option<f64>,
}

/// Raw result of a Bernoulli run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tally {
    pub hits: u64,
    pub trials: u64,
}

impl Tally {
    pub fn fraction(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }

    /// Normal-approximation 95% half-width.
    pub fn ci95_halfwidth(&self) -> f64 {
        let p = self.fraction();
        1.96 * (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

impl MonteCarlo {
    pub fn new(trials: u64, seed: u64) -> Self {
        MonteCarlo {
            trials,
            seed,
            chunk_size: DEFAULT_CHUNK,
            execution: Execution::default(),
            early_exit_ratio: None,
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_early_exit(mut self, ratio: Option<f64>) -> Self {
        self.early_exit_ratio = ratio;
        self
    }

    /// Counts trials for which `event` returns true.
    pub fn count<F>(&self, event: F) -> Tally
    where
        F: Fn(&mut SimRng) -> bool + Sync + Send,
    {
        let chunk = self.chunk_size.max(1);
        let n_chunks = self.trials.div_ceil(chunk);
        let mut tally = Tally { hits: 0, trials: 0 };
        let mut next = 0u64;
        while next < n_chunks {
            let end = (next + CHUNKS_PER_ROUND).min(n_chunks);
            let counts = self.execution.map_indexed((end - next) as usize, |i| {
                let c = next + i as u64;
                let len = chunk.min(self.trials - c * chunk);
                let mut rng = substream(self.seed, c);
                let hits = (0..len).filter(|_| event(&mut rng)).count() as u64;
                (hits, len)
            });
            for (h, n) in counts {
                tally.hits += h;
                tally.trials += n;
            }
            next = end;
            if let Some(ratio) = self.early_exit_ratio {
                if tally.hits > 0 && tally.ci95_halfwidth() < ratio * tally.fraction() {
                    break;
                }
            }
        }
        tally
    }

    /// Evaluates `sample` once per trial and returns the values in trial
    /// order.
    pub fn collect<T, F>(&self, sample: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut SimRng) -> T + Sync + Send,
    {
        let chunk = self.chunk_size.max(1);
        let n_chunks = self.trials.div_ceil(chunk);
        self.execution
            .map_indexed(n_chunks as usize, |c| {
                let c = c as u64;
                let len = chunk.min(self.trials - c * chunk);
                let mut rng = substream(self.seed, c);
                (0..len).map(|_| sample(&mut rng)).collect::<Vec<_>>()
            })
            .into_iter()
            .flatten()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn sequential_and_parallel_agree() {
        let mc = MonteCarlo::new(50_000, 7);
        let f = |rng: &mut SimRng| rng.random::<f64>() < 0.3;
        let a = mc.with_execution(Execution::Sequential).count(f);
        let b = mc.with_execution(Execution::Parallel).count(f);
        assert_eq!(a, b);
        assert_eq!(a.trials, 50_000);
    }

    #[test]
    fn substreams_differ() {
        let a: u64 = substream(1, 0).random();
        let b: u64 = substream(1, 1).random();
        let c: u64 = substream(1, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn early_exit_stops_for_common_events() {
        let mc = MonteCarlo::new(1_000_000, 3).with_early_exit(Some(0.05));
        let t = mc.count(|rng| rng.random::<f64>() < 0.5);
        assert!(t.trials < 1_000_000);
        assert!(t.ci95_halfwidth() < 0.05 * t.fraction());
    }

    #[test]
    fn collect_preserves_trial_count() {
        let mc = MonteCarlo {
            chunk_size: 10,
            ..MonteCarlo::new(95, 1)
        };
        let v = mc.collect(|rng| rng.random::<u32>());
        assert_eq!(v.len(), 95);
    }
}
