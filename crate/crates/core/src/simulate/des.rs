use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::SimEstimate;
use crate::error::{domain, Result};
use crate::queueing::{check_stable, QueueSetting};

/// Batches used for the batch-means confidence interval.
const BATCHES: usize = 20;

/// How arrivals are split across M/M/1 subchains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Routing {
    /// Independent uniform choice per arrival; each subchain sees a Poisson stream.
    Random,
    /// Cyclic assignment. Not Poisson per subchain, so it only approximates the
    /// analytical model.
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesConfig {
    pub setting: QueueSetting,
    /// Full-capacity service rate of each stage.
    pub stages: Vec<f64>,
    pub arrival_rate: f64,
    pub subchains: u32,
    pub arrivals: u64,
    /// Leading arrivals excluded from the estimate.
    pub warmup: u64,
    pub seed: u64,
    pub routing: Routing,
}

impl DesConfig {
    /// Random routing and a warmup of the first 10% of arrivals.
    pub fn new(setting: QueueSetting, stages: Vec<f64>, arrival_rate: f64, subchains: u32, arrivals: u64, seed: u64) -> Self {
        Self {
            setting,
            stages,
            arrival_rate,
            subchains,
            arrivals,
            warmup: arrivals / 10,
            seed,
            routing: Routing::Random,
        }
    }

    fn check(&self) -> Result<()> {
        check_stable(&self.stages, self.arrival_rate)?;
        if self.subchains < 1 {
            return Err(domain("subchain count must be at least 1"));
        }
        if self.arrivals <= self.warmup {
            return Err(domain("arrivals must exceed warmup"));
        }
        if ((self.arrivals - self.warmup) as usize) < BATCHES {
            return Err(domain(format!("need at least {BATCHES} post-warmup arrivals")));
        }
        Ok(())
    }
}

/// f64 ordered by `total_cmp`, for the server heap.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Time(f64);

impl Eq for Time {}

impl PartialOrd for Time {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Time {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn exp(rate: f64) -> Result<Exp<f64>> {
    Exp::new(rate).map_err(|e| domain(format!("bad exponential rate {rate}: {e}")))
}

fn arrival_times(rng: &mut ChaCha8Rng, rate: f64, n: usize) -> Result<Vec<f64>> {
    let gap = exp(rate)?;
    let mut t = 0.0;
    Ok((0..n)
        .map(|_| {
            t += gap.sample(rng);
            t
        })
        .collect())
}

/// Parallel subchains of single-server FCFS queues. Within one subchain jobs
/// never overtake, so each stage is a Lindley recursion in arrival order.
fn mm1_sojourns(cfg: &DesConfig, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let l = cfg.subchains as usize;
    let arrivals = arrival_times(rng, cfg.arrival_rate, cfg.arrivals as usize)?;
    let services = cfg
        .stages
        .iter()
        .map(|&mu| exp(mu / f64::from(cfg.subchains)))
        .collect::<Result<Vec<_>>>()?;
    let mut free_at = vec![vec![0.0_f64; cfg.stages.len()]; l];

    let mut out = Vec::with_capacity(arrivals.len());
    for (i, &a) in arrivals.iter().enumerate() {
        let k = match cfg.routing {
            Routing::Random => rng.random_range(0..l),
            Routing::RoundRobin => i % l,
        };
        let mut t = a;
        for (stage, service) in services.iter().enumerate() {
            t = t.max(free_at[k][stage]) + service.sample(rng);
            free_at[k][stage] = t;
        }
        out.push(t - a);
    }
    Ok(out)
}

/// Each stage is a pool of `l` servers at rate `mu / l`. Jobs are served FCFS
/// in the order they reach the stage, on whichever server frees up first.
fn mmm_sojourns(cfg: &DesConfig, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let n = cfg.arrivals as usize;
    let arrivals = arrival_times(rng, cfg.arrival_rate, n)?;
    // (time the job reaches the current stage, job index)
    let mut queue: Vec<(f64, usize)> = arrivals.iter().copied().zip(0..).collect();

    for &mu in &cfg.stages {
        let service = exp(mu / f64::from(cfg.subchains))?;
        let mut servers: BinaryHeap<Reverse<Time>> = (0..cfg.subchains).map(|_| Reverse(Time(0.0))).collect();
        for job in queue.iter_mut() {
            let Reverse(Time(free)) = servers.pop().expect("pool is non-empty");
            let done = job.0.max(free) + service.sample(rng);
            servers.push(Reverse(Time(done)));
            job.0 = done;
        }
        queue.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    }

    let mut out = vec![0.0; n];
    for (t, job) in queue {
        out[job] = t - arrivals[job];
    }
    Ok(out)
}

fn batch_means(samples: &[f64]) -> SimEstimate {
    let size = samples.len() / BATCHES;
    let means: Vec<f64> = samples
        .chunks_exact(size)
        .take(BATCHES)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let k = means.len() as f64;
    let mean = means.iter().sum::<f64>() / k;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let std_error = (var / k).sqrt();
    let t = StudentsT::new(0.0, 1.0, k - 1.0)
        .expect("valid degrees of freedom")
        .inverse_cdf(0.975);
    SimEstimate {
        mean,
        half_width_95: t * std_error,
        std_error,
        samples: (size * BATCHES) as u64,
    }
}

/// Mean sojourn time through the chain, by simulation.
///
/// Deterministic for a given configuration: the generator is ChaCha8 seeded
/// from `cfg.seed`.
pub fn des_tandem(cfg: &DesConfig) -> Result<SimEstimate> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sojourns = match cfg.setting {
        QueueSetting::MM1 => mm1_sojourns(cfg, &mut rng)?,
        QueueSetting::MMM => mmm_sojourns(cfg, &mut rng)?,
    };
    Ok(batch_means(&sojourns[cfg.warmup as usize..]))
}
