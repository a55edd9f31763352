use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{flip_delta, Backend, SolverReport, SolverStats};
use crate::{BitVector, Error, QuboInstance, Result};

/// Simulated-annealing schedule.
///
/// One sweep (a pass over every variable in index order) runs at each rung of
/// a geometric temperature ladder from `t_hi` down to `t_lo`. `t_hi` defaults
/// to `max|A_ij| * M`. Restart 0 starts from the all-zeros vector when
/// `zero_start` is set; the others start from uniformly random bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub sweeps: usize,
    pub restarts: usize,
    pub t_hi: Option<f64>,
    pub t_lo: f64,
    /// Explicit ladder overriding `t_hi`/`t_lo`; its length must equal `sweeps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperatures: Option<Vec<f64>>,
    pub seed: u64,
    pub zero_start: bool,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            sweeps: 200,
            restarts: 50,
            t_hi: None,
            t_lo: 1e-3,
            temperatures: None,
            seed: 0,
            zero_start: true,
        }
    }
}

impl AnnealConfig {
    /// Resolves the temperature ladder for `q`, validating the schedule.
    pub fn ladder(&self, q: &QuboInstance) -> Result<Vec<f64>> {
        if self.sweeps == 0 {
            return Err(Error::Config("sweeps must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be positive".into()));
        }
        if let Some(ladder) = &self.temperatures {
            if ladder.len() != self.sweeps {
                return Err(Error::Config(format!(
                    "temperature ladder has {} rungs but sweeps is {}",
                    ladder.len(),
                    self.sweeps
                )));
            }
            if ladder.iter().any(|t| !t.is_finite() || *t <= 0.0) {
                return Err(Error::Config("temperatures must be positive and finite".into()));
            }
            if ladder.windows(2).any(|w| w[1] >= w[0]) {
                return Err(Error::Config("temperature ladder must be strictly decreasing".into()));
            }
            return Ok(ladder.clone());
        }
        if !self.t_lo.is_finite() || self.t_lo <= 0.0 {
            return Err(Error::Config("t_lo must be positive and finite".into()));
        }
        let t_hi = match self.t_hi {
            Some(t) => {
                if !t.is_finite() || t <= self.t_lo {
                    return Err(Error::Config(format!(
                        "t_hi ({t}) must exceed t_lo ({})",
                        self.t_lo
                    )));
                }
                t
            }
            None => default_t_hi(q, self.t_lo),
        };
        if self.sweeps == 1 {
            return Ok(vec![t_hi]);
        }
        let ratio = (self.t_lo / t_hi).ln() / (self.sweeps - 1) as f64;
        Ok((0..self.sweeps)
            .map(|s| t_hi * (ratio * s as f64).exp())
            .collect())
    }
}

fn default_t_hi(q: &QuboInstance, t_lo: f64) -> f64 {
    let m = q.m() as f64;
    let t = q.max_abs_coefficient() * m;
    if t > t_lo {
        return t;
    }
    // Purely linear (or zero) objectives: fall back to the linear scale.
    let linear = q.b().iter().fold(0.0f64, |acc, v| acc.max(v.abs())) * m;
    linear.max(1.0).max(10.0 * t_lo)
}

/// Runs `restarts` independent annealing chains and returns the best state.
///
/// Each restart draws from its own ChaCha stream keyed by (seed, restart), so
/// the result does not depend on how restarts are scheduled across threads.
pub fn solve_anneal(q: &QuboInstance, config: &AnnealConfig) -> Result<SolverReport> {
    let ladder = config.ladder(q)?;
    let start = Instant::now();
    let chains: Vec<(BitVector, f64)> = (0..config.restarts)
        .into_par_iter()
        .map(|restart| run_chain(q, &ladder, config, restart))
        .collect();

    let mut best_index = 0;
    for (i, (_, e)) in chains.iter().enumerate() {
        if *e < chains[best_index].1 {
            best_index = i;
        }
    }
    let restart_energies: Vec<f64> = chains.iter().map(|(_, e)| *e).collect();
    let (best, energy) = chains[best_index].clone();
    Ok(SolverReport {
        backend: Backend::Anneal,
        best,
        energy,
        all_optima: None,
        stats: SolverStats {
            evaluated: (config.restarts * config.sweeps * q.m()) as u64,
            sweeps: Some(config.sweeps),
            restarts: Some(config.restarts),
            seed: Some(config.seed),
            restart_energies: Some(restart_energies),
        },
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn run_chain(q: &QuboInstance, ladder: &[f64], config: &AnnealConfig, restart: usize) -> (BitVector, f64) {
    let m = q.m();
    let a = q.a();
    let b = q.b();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);

    let mut z: Vec<u8> = if restart == 0 && config.zero_start {
        vec![0; m]
    } else {
        (0..m).map(|_| u8::from(rng.random::<bool>())).collect()
    };
    let mut field = vec![0.0; m];
    let mut energy = 0.0;
    let mut best = z.clone();
    let mut best_energy = f64::INFINITY;

    for &temperature in ladder {
        resync(q, &z, &mut field, &mut energy);
        if energy < best_energy {
            best_energy = energy;
            best.copy_from_slice(&z);
        }
        for i in 0..m {
            let set = z[i] == 1;
            let delta = flip_delta(a[(i, i)], b[i], field[i], set);
            let accept = delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp();
            if !accept {
                continue;
            }
            apply_flip(q, &mut z, &mut field, i);
            energy += delta;
            if energy < best_energy {
                best_energy = energy;
                best.copy_from_slice(&z);
            }
        }
    }

    // Zero-temperature polish of the best state seen.
    resync(q, &best, &mut field, &mut energy);
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..m {
            let delta = flip_delta(a[(i, i)], b[i], field[i], best[i] == 1);
            if delta < -1e-12 * (1.0 + energy.abs()) {
                apply_flip(q, &mut best, &mut field, i);
                energy += delta;
                improved = true;
            }
        }
    }
    let exact = q.evaluate_unchecked(&best);
    (BitVector::new(best).expect("chain state is binary"), exact)
}

fn resync(q: &QuboInstance, z: &[u8], field: &mut [f64], energy: &mut f64) {
    let a = q.a();
    for (i, f) in field.iter_mut().enumerate() {
        *f = z
            .iter()
            .enumerate()
            .filter(|(_, &bit)| bit == 1)
            .map(|(j, _)| a[(i, j)])
            .sum();
    }
    *energy = q.evaluate_unchecked(z);
}

fn apply_flip(q: &QuboInstance, z: &mut [u8], field: &mut [f64], i: usize) {
    let column = q.a().column(i);
    if z[i] == 1 {
        for (f, c) in field.iter_mut().zip(column.iter()) {
            *f -= c;
        }
    } else {
        for (f, c) in field.iter_mut().zip(column.iter()) {
            *f += c;
        }
    }
    z[i] ^= 1;
}
