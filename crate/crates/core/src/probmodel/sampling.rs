use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::moments::{free_bins, mean_is_integral};
use crate::error::{Error, Result};
use crate::repr;
use crate::setsys::IncidenceSystem;

/// A map from blocks to bins. Bins are 0-based; bin `l - 1` is the one whose
/// blocks do not contribute to X.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub l: u64,
    pub bins: Vec<u32>,
}

fn check_l(l: u64) -> Result<()> {
    free_bins(l)?;
    if l > u64::from(u32::MAX) {
        return Err(Error::params("l must fit in 32 bits"));
    }
    Ok(())
}

/// Fills `bins` with independent uniform bin indices.
pub fn sample_into(rng: &mut impl Rng, l: u64, bins: &mut [u32]) {
    let l = l as u32;
    for x in bins {
        *x = rng.random_range(0..l);
    }
}

/// An i.i.d. uniform assignment of `blocks` blocks, deterministic in `seed`.
pub fn sample_assignment(seed: u64, blocks: usize, l: u64) -> Result<Assignment> {
    check_l(l)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bins = vec![0u32; blocks];
    sample_into(&mut rng, l, &mut bins);
    Ok(Assignment { l, bins })
}

/// X: block `j` is the sum of `phi(b)` over blocks in bin `j`, for `j < l - 1`.
#[allow(non_snake_case)]
pub fn statistic_X(tau: &Assignment, sys: &IncidenceSystem) -> Result<Vec<i64>> {
    if tau.bins.len() != sys.rows() {
        return Err(Error::DimensionMismatch { expected: sys.rows(), found: tau.bins.len() });
    }
    let bins = free_bins(tau.l)?;
    let a = sys.cols();
    let mut x = vec![0i64; bins * a];
    for (b, &j) in tau.bins.iter().enumerate() {
        if u64::from(j) >= tau.l {
            return Err(Error::IndexOutOfRange { index: j.into(), count: tau.l });
        }
        let j = j as usize;
        if j < bins {
            for (xi, &v) in x[j * a..(j + 1) * a].iter_mut().zip(sys.row(b)) {
                *xi += v;
            }
        }
    }
    Ok(x)
}

/// Integer E[X] for one bin, when integral.
fn integral_target(sys: &IncidenceSystem, l: u64) -> Option<Vec<i64>> {
    if !mean_is_integral(sys, l) {
        return None;
    }
    let l = i128::from(l);
    sys.column_sums().into_iter().map(|s| i64::try_from(s / l).ok()).collect()
}

/// Monte Carlo configuration.
#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    /// Trials per seed stream. Part of the reproducibility contract.
    pub chunk_size: u64,
}

impl McConfig {
    pub const DEFAULT_CHUNK: u64 = 4096;

    pub fn new(trials: u64, seed: u64) -> Self {
        Self { trials, seed, workers: 1, chunk_size: Self::DEFAULT_CHUNK }
    }
}

/// Hits within one contiguous range of trial indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChunkCount {
    pub first_trial: u64,
    pub end_trial: u64,
    pub hits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct McReport {
    pub hits: u64,
    pub trials: u64,
    #[serde(with = "repr::sig15")]
    pub phat: f64,
    #[serde(with = "repr::sig15")]
    pub stderr: f64,
    pub seed: u64,
    pub chunk_size: u64,
    /// Set when the answer is known without sampling.
    pub short_circuit: Option<String>,
    pub chunks: Vec<ChunkCount>,
}

fn run_chunk(
    sys: &IncidenceSystem,
    supports: &[Vec<(usize, i64)>],
    target: &[i64],
    l: u64,
    seed: u64,
    chunk: u64,
    len: u64,
) -> u64 {
    let bins = (l - 1) as usize;
    let a = sys.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut tau = vec![0u32; sys.rows()];
    let mut x = vec![0i64; bins * a];
    let mut hits = 0;
    for _ in 0..len {
        sample_into(&mut rng, l, &mut tau);
        x.iter_mut().for_each(|v| *v = 0);
        for (supp, &j) in supports.iter().zip(&tau) {
            let j = j as usize;
            if j < bins {
                for &(i, v) in supp {
                    x[j * a + i] += v;
                }
            }
        }
        if x.chunks(a).all(|blk| blk == target) {
            hits += 1;
        }
    }
    hits
}

/// Estimates `Pr[X = E[X]]` by sampling.
///
/// Trials are cut into chunks of `chunk_size`; chunk `c` draws from the
/// ChaCha8 generator seeded with `seed` on stream `c`. Workers take chunks
/// round-robin and only counts are merged, so the result does not depend on
/// the number of workers.
pub fn monte_carlo_hit_probability(sys: &IncidenceSystem, l: u64, cfg: McConfig) -> Result<McReport> {
    check_l(l)?;
    if cfg.chunk_size == 0 || cfg.workers == 0 {
        return Err(Error::params("chunk size and worker count must be positive"));
    }
    let report = |hits: u64, trials: u64, short: Option<&str>, chunks| {
        let phat = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        let stderr = if trials == 0 { 0.0 } else { (phat * (1.0 - phat) / trials as f64).sqrt() };
        McReport {
            hits,
            trials,
            phat,
            stderr,
            seed: cfg.seed,
            chunk_size: cfg.chunk_size,
            short_circuit: short.map(str::to_owned),
            chunks,
        }
    };
    if l == 1 {
        return Ok(report(cfg.trials, cfg.trials, Some("l = 1: X is the empty vector"), vec![]));
    }
    let Some(target) = integral_target(sys, l) else {
        return Ok(report(0, 0, Some("E[X] is not integral"), vec![]));
    };
    let supports: Vec<_> = (0..sys.rows()).map(|b| sys.row_support(b)).collect();
    let n_chunks = cfg.trials.div_ceil(cfg.chunk_size);
    let bounds = |c: u64| (c * cfg.chunk_size, ((c + 1) * cfg.chunk_size).min(cfg.trials));
    let mut counts = vec![0u64; n_chunks as usize];
    let workers = cfg.workers.min(n_chunks.max(1) as usize);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (supports, target) = (&supports, &target);
                s.spawn(move || {
                    (w as u64..n_chunks)
                        .step_by(workers)
                        .map(|c| {
                            let (lo, hi) = bounds(c);
                            (c, run_chunk(sys, supports, target, l, cfg.seed, c, hi - lo))
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (c, hits) in h.join().expect("sampling worker panicked") {
                counts[c as usize] = hits;
            }
        }
    });
    let chunks: Vec<ChunkCount> = counts
        .iter()
        .enumerate()
        .map(|(c, &hits)| {
            let (first_trial, end_trial) = bounds(c as u64);
            ChunkCount { first_trial, end_trial, hits }
        })
        .collect();
    Ok(report(counts.iter().sum(), cfg.trials, None, chunks))
}

/// Exact `Pr[X = E[X]]` as `hits / l^|B|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExactReport {
    #[serde(with = "repr::big")]
    pub hits: BigUint,
    #[serde(with = "repr::big")]
    pub total: BigUint,
    #[serde(with = "repr::rat")]
    pub probability: BigRational,
}

pub const DEFAULT_EXACT_CAP: u64 = 100_000_000;

/// Enumerates all `l^|B|` assignments.
///
/// Assignments are visited in odometer order, so each step moves O(1)
/// blocks on average; a running count of mismatched coordinates makes the
/// hit test constant time.
pub fn exact_hit_probability(sys: &IncidenceSystem, l: u64, cap: u64) -> Result<ExactReport> {
    check_l(l)?;
    let total = num_traits::pow(BigUint::from(l), sys.rows());
    let done = |hits: BigUint| {
        let probability = BigRational::new(hits.clone().into(), total.clone().into());
        Ok(ExactReport { hits, total: total.clone(), probability })
    };
    if l == 1 {
        return done(BigUint::one());
    }
    let Some(target) = integral_target(sys, l) else {
        return done(BigUint::zero());
    };
    if total > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            what: "l^|B| assignments",
            size: total.to_string(),
            cap: cap.to_string(),
        });
    }
    let bins = (l - 1) as usize;
    let a = sys.cols();
    let supports: Vec<_> = (0..sys.rows()).map(|b| sys.row_support(b)).collect();
    // every block starts in bin l-1, so X = 0
    let mut x = vec![0i64; bins * a];
    let mut mismatched = (0..bins * a).filter(|&i| target[i % a] != 0).count();
    let add = |x: &mut Vec<i64>, mismatched: &mut usize, j: usize, supp: &[(usize, i64)], sign: i64| {
        for &(i, v) in supp {
            let idx = j * a + i;
            let before = x[idx] == target[i];
            x[idx] += sign * v;
            let after = x[idx] == target[i];
            match (before, after) {
                (true, false) => *mismatched += 1,
                (false, true) => *mismatched -= 1,
                _ => {}
            }
        }
    };
    let last = (l - 1) as u32;
    let mut tau = vec![last; sys.rows()];
    let mut hits: u64 = 0;
    loop {
        if mismatched == 0 {
            hits += 1;
        }
        // advance: bins cycle l-1 -> 0 -> 1 -> ... -> l-2 -> l-1 (carry)
        let mut b = 0;
        loop {
            if b == tau.len() {
                return done(BigUint::from(hits));
            }
            let old = tau[b];
            let new = if old == last { 0 } else { old + 1 };
            if old != last {
                add(&mut x, &mut mismatched, old as usize, &supports[b], -1);
            }
            if new != last {
                add(&mut x, &mut mismatched, new as usize, &supports[b], 1);
            }
            tau[b] = new;
            if new != last {
                break;
            }
            b += 1;
        }
    }
}

/// Exact probability as an `f64`, for comparisons.
pub fn exact_as_f64(r: &ExactReport) -> f64 {
    r.probability.to_f64().unwrap_or(f64::NAN)
}
