use std::time::Instant;

use rayon::prelude::*;

use super::{flip_delta, Backend, SolverReport, SolverStats};
use crate::{BitVector, Error, QuboInstance, Result};

pub const DEFAULT_EXACT_CAP: usize = 25;

/// Absolute energy window within which assignments count as co-optimal.
pub const OPTIMA_TOLERANCE: f64 = 1e-9;

/// Gray-code walks resynchronize their running energy this often.
const RESYNC_INTERVAL: u64 = 1 << 12;

/// Low bits enumerated inside one partition; the rest index partitions.
const PARTITION_BITS: usize = 14;

#[derive(Clone, Debug)]
pub struct ExactConfig {
    pub max_variables: usize,
    pub tolerance: f64,
    pub parallel: bool,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            max_variables: DEFAULT_EXACT_CAP,
            tolerance: OPTIMA_TOLERANCE,
            parallel: true,
        }
    }
}

/// Enumerates all `2^M` assignments with the default configuration.
pub fn solve_exact(q: &QuboInstance) -> Result<SolverReport> {
    solve_exact_with(q, &ExactConfig::default())
}

pub fn solve_exact_with(q: &QuboInstance, config: &ExactConfig) -> Result<SolverReport> {
    if config.max_variables > 63 {
        return Err(Error::Config(format!(
            "exact solver cap {} exceeds the 63-variable enumeration limit",
            config.max_variables
        )));
    }
    let m = q.m();
    if m > config.max_variables {
        return Err(Error::TooManyVariables {
            m,
            cap: config.max_variables,
        });
    }
    let start = Instant::now();
    let low = m.min(PARTITION_BITS);
    let partitions = 1u64 << (m - low);
    let walker = GrayWalker::new(q, low, config.tolerance);

    let results: Vec<PartitionResult> = if config.parallel {
        (0..partitions).into_par_iter().map(|p| walker.run(p)).collect()
    } else {
        (0..partitions).map(|p| walker.run(p)).collect()
    };

    let minimum = results
        .iter()
        .map(|r| r.best)
        .fold(f64::INFINITY, f64::min);
    let mut optima: Vec<u64> = results
        .iter()
        .flat_map(|r| r.candidates.iter())
        .filter(|(_, e)| *e <= minimum + config.tolerance)
        .map(|(mask, _)| *mask)
        .collect();
    // Lexicographic order puts variable 0 first, i.e. the reversed mask.
    optima.sort_unstable_by_key(|mask| mask.reverse_bits());
    let best_mask = optima[0];
    let best = BitVector::from_mask(best_mask, m);
    let energy = q.evaluate_mask(best_mask);

    Ok(SolverReport {
        backend: Backend::Exact,
        best,
        energy,
        all_optima: Some(optima.into_iter().map(|mask| BitVector::from_mask(mask, m)).collect()),
        stats: SolverStats {
            evaluated: 1u64 << m,
            ..SolverStats::default()
        },
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

struct PartitionResult {
    best: f64,
    candidates: Vec<(u64, f64)>,
}

struct GrayWalker<'a> {
    q: &'a QuboInstance,
    low: usize,
    tolerance: f64,
    slack: f64,
}

impl<'a> GrayWalker<'a> {
    fn new(q: &'a QuboInstance, low: usize, tolerance: f64) -> Self {
        let scale: f64 = q.a().iter().map(|v| v.abs()).sum::<f64>() + q.b().iter().map(|v| v.abs()).sum::<f64>();
        Self {
            q,
            low,
            tolerance,
            slack: 1e-9 * (1.0 + scale),
        }
    }

    fn local_fields(&self, mask: u64) -> Vec<f64> {
        let m = self.q.m();
        let a = self.q.a();
        (0..m)
            .map(|i| {
                (0..m)
                    .filter(|&j| mask >> j & 1 == 1)
                    .map(|j| a[(i, j)])
                    .sum()
            })
            .collect()
    }

    /// Walks the `2^low` assignments whose high bits equal `partition`.
    fn run(&self, partition: u64) -> PartitionResult {
        let m = self.q.m();
        let a = self.q.a();
        let b = self.q.b();
        let mut mask = partition << self.low;
        let mut field = self.local_fields(mask);
        let mut energy = self.q.evaluate_mask(mask);

        let mut best = f64::INFINITY;
        let mut candidates = Vec::new();
        let consider = |mask: u64, running: f64, best: &mut f64, candidates: &mut Vec<(u64, f64)>| {
            if running > *best + self.tolerance + self.slack {
                return;
            }
            let exact = self.q.evaluate_mask(mask);
            if exact <= *best + self.tolerance {
                if exact < *best {
                    *best = exact;
                    let cutoff = exact + self.tolerance;
                    candidates.retain(|(_, e)| *e <= cutoff);
                }
                candidates.push((mask, exact));
            }
        };
        consider(mask, energy, &mut best, &mut candidates);

        for step in 1..(1u64 << self.low) {
            let bit = step.trailing_zeros() as usize;
            let set = mask >> bit & 1 == 1;
            energy += flip_delta(a[(bit, bit)], b[bit], field[bit], set);
            let column = a.column(bit);
            if set {
                for (f, c) in field.iter_mut().zip(column.iter()) {
                    *f -= c;
                }
            } else {
                for (f, c) in field.iter_mut().zip(column.iter()) {
                    *f += c;
                }
            }
            mask ^= 1 << bit;
            if step % RESYNC_INTERVAL == 0 {
                field = self.local_fields(mask);
                energy = self.q.evaluate_mask(mask);
            }
            consider(mask, energy, &mut best, &mut candidates);
        }
        debug_assert_eq!(field.len(), m);
        PartitionResult { best, candidates }
    }
}
