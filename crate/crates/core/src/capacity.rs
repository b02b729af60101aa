//! Sequential-memory capacity experiments: smallest feature-layer size
//! that retrieves a full episode, swept over episode length and averaged
//! over trials.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::integrate::{init_from_cue, simulate, SimOptions};
use crate::metrics::{contains_cycle_traversal, extract_sequence, RetrievalCriterion};
use crate::model::{build_episode_graph, generate_memories, ModelSpec, SynapseState, Variant};

/// Search-space controls: feature counts form the lattice
/// `n_f_min, n_f_min + resolution, .., n_f_max`.
#[derive(Debug, Clone)]
pub struct CapacityOptions {
    pub n_f_min: usize,
    pub n_f_max: usize,
    pub resolution: usize,
    pub dt: f64,
    pub record_every: usize,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions {
            n_f_min: 10,
            n_f_max: 500,
            resolution: 5,
            dt: 0.01,
            record_every: 10,
        }
    }
}

/// Outcome of one episode-length sweep. A saturated trial failed at every
/// lattice value and is excluded from the mean.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub variant: Variant,
    pub k: usize,
    pub trials: usize,
    pub min_n_f_per_trial: Vec<Option<usize>>,
    pub mean_min_nf: Option<f64>,
    pub std_min_nf: Option<f64>,
    pub saturated_count: usize,
    /// Probe outcomes pooled over trials: n_f -> (successes, attempts).
    pub successes_per_nf: BTreeMap<usize, (usize, usize)>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn trial_seed(master: u64, k: usize, trial: usize, n_f: usize) -> u64 {
    let mut s = splitmix(master);
    s = splitmix(s ^ k as u64);
    s = splitmix(s ^ trial as u64);
    splitmix(s ^ n_f as u64)
}

/// Single cued run: fresh binary memories arranged as one k-cycle, cue at
/// memory 0, success when the extracted sequence walks the whole cycle in
/// order within the criterion's time budget.
///
/// The run is integrated in segments and checked after each one, so a
/// trial that completes its traversal early does not pay for the full
/// budget; the accumulated overlap trace is identical to a single run.
pub fn episode_retrieval_succeeds(
    variant: Variant,
    k: usize,
    n_f: usize,
    seed: u64,
    crit: &RetrievalCriterion,
    opts: &CapacityOptions,
) -> Result<bool> {
    let spec = ModelSpec::canonical(variant, n_f, k);
    let memories = generate_memories(n_f, k, seed)?;
    let cycle: Vec<usize> = (0..k).collect();
    let graph = build_episode_graph(&[cycle.clone()])?;
    let syn = SynapseState::preloaded(&memories, &graph, spec.alpha_s)?;
    let mut state = init_from_cue(&memories.column(0).to_owned(), 0.0, seed ^ 1, &spec, &syn)?;

    let segments = 5usize;
    let seg_duration = crit.max_time / segments as f64;
    let mut acc = crate::integrate::Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        overlaps: Vec::new(),
        energies: None,
    };
    for seg in 0..segments {
        let traj = simulate(
            &spec,
            &syn,
            &state,
            &SimOptions {
                duration: seg_duration,
                dt: opts.dt,
                record_every: opts.record_every,
                record_energy: false,
                record_states: true,
                frozen_delay: false,
            },
        )?;
        state = traj.states.last().expect("segment has snapshots").clone();
        let offset = seg as f64 * seg_duration;
        // The first snapshot duplicates the previous segment's last one.
        let skip = usize::from(seg > 0);
        for (i, &t) in traj.times.iter().enumerate().skip(skip) {
            acc.times.push(offset + t);
            acc.overlaps.push(traj.overlaps[i].clone());
        }
        let seq = extract_sequence(&acc, crit)?;
        if contains_cycle_traversal(&seq, &cycle) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Coarse probe grid: steps of 10 up to 100 feature neurons, steps of 25
/// beyond, clipped to the configured range.
fn coarse_grid(opts: &CapacityOptions) -> Vec<usize> {
    let mut grid = Vec::new();
    let mut v = opts.n_f_min;
    while v <= opts.n_f_max {
        grid.push(v);
        let step = if v < 100 { 10 } else { 25 };
        v += step;
    }
    if *grid.last().unwrap() != opts.n_f_max {
        grid.push(opts.n_f_max);
    }
    grid
}

/// Smallest `n_f` retrieving the episode, per trial, with mean and sample
/// standard deviation over non-saturated trials.
///
/// Each trial scans the coarse grid in ascending order and stops at the
/// first success, so no global monotonicity in `n_f` is assumed; the
/// interval back to the previous coarse value is then refined to the
/// lattice resolution by bisection (success within that interval is
/// treated as monotone, which spot checks support). Trials are
/// independent and run in parallel; results depend only on the seeds,
/// never on the worker count.
pub fn capacity_search(
    variant: Variant,
    k: usize,
    trials: usize,
    crit: &RetrievalCriterion,
    opts: &CapacityOptions,
    seed: u64,
) -> Result<CapacityResult> {
    if k < 2 {
        return Err(invalid("episode length k must be at least 2"));
    }
    if trials == 0 {
        return Err(invalid("at least one trial is required"));
    }
    crit.validate()?;
    if opts.n_f_min == 0 || opts.n_f_min > opts.n_f_max || opts.resolution == 0 {
        return Err(invalid("bad n_f lattice"));
    }
    let coarse = coarse_grid(opts);

    let per_trial: Vec<Result<(Option<usize>, BTreeMap<usize, (usize, usize)>)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut probes = BTreeMap::new();
            let mut succeeds = |n_f: usize| -> Result<bool> {
                let ok = episode_retrieval_succeeds(
                    variant,
                    k,
                    n_f,
                    trial_seed(seed, k, trial, n_f),
                    crit,
                    opts,
                )?;
                let e = probes.entry(n_f).or_insert((0usize, 0usize));
                e.1 += 1;
                if ok {
                    e.0 += 1;
                }
                Ok(ok)
            };

            let mut first_hit = None;
            for (idx, &v) in coarse.iter().enumerate() {
                if succeeds(v)? {
                    first_hit = Some(idx);
                    break;
                }
            }
            let Some(hit) = first_hit else {
                return Ok((None, probes));
            };
            if hit == 0 {
                return Ok((Some(coarse[0]), probes));
            }

            // Bisect the fine lattice strictly between the last coarse
            // failure and the coarse success.
            let mut fine: Vec<usize> = (coarse[hit - 1]..=coarse[hit])
                .step_by(opts.resolution)
                .skip(1)
                .collect();
            if fine.last() != Some(&coarse[hit]) {
                fine.push(coarse[hit]);
            }
            let mut lo = 0usize;
            let mut hi = fine.len() - 1; // coarse[hit] succeeded already
            while lo < hi {
                let mid = (lo + hi) / 2;
                if succeeds(fine[mid])? {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            Ok((Some(fine[hi]), probes))
        })
        .collect();

    let mut min_n_f_per_trial = Vec::with_capacity(trials);
    let mut successes_per_nf: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for r in per_trial {
        let (min_nf, probes) = r?;
        min_n_f_per_trial.push(min_nf);
        for (nf, (s, a)) in probes {
            let e = successes_per_nf.entry(nf).or_insert((0, 0));
            e.0 += s;
            e.1 += a;
        }
    }

    let found: Vec<f64> = min_n_f_per_trial
        .iter()
        .filter_map(|m| m.map(|v| v as f64))
        .collect();
    let saturated_count = trials - found.len();
    let mean_min_nf = if found.is_empty() {
        None
    } else {
        Some(found.iter().sum::<f64>() / found.len() as f64)
    };
    let std_min_nf = if found.len() < 2 {
        None
    } else {
        let mean = mean_min_nf.unwrap();
        Some(
            (found.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (found.len() - 1) as f64)
                .sqrt(),
        )
    };

    Ok(CapacityResult {
        variant,
        k,
        trials,
        min_n_f_per_trial,
        mean_min_nf,
        std_min_nf,
        saturated_count,
        successes_per_nf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_validation() {
        let crit = RetrievalCriterion::default();
        let opts = CapacityOptions::default();
        assert!(capacity_search(Variant::Dsem, 1, 2, &crit, &opts, 1).is_err());
        assert!(capacity_search(Variant::Dsem, 3, 0, &crit, &opts, 1).is_err());
        let bad = CapacityOptions {
            n_f_min: 100,
            n_f_max: 50,
            ..Default::default()
        };
        assert!(capacity_search(Variant::Dsem, 3, 1, &crit, &bad, 1).is_err());
    }

    #[test]
    fn two_memory_dsem_search_finds_small_networks() {
        let crit = RetrievalCriterion {
            max_time: 120.0,
            ..Default::default()
        };
        let opts = CapacityOptions {
            n_f_min: 10,
            n_f_max: 60,
            resolution: 10,
            ..Default::default()
        };
        let res = capacity_search(Variant::Dsem, 2, 3, &crit, &opts, 99).unwrap();
        assert_eq!(res.min_n_f_per_trial.len(), 3);
        assert_eq!(res.saturated_count, 0, "{:?}", res.min_n_f_per_trial);
        assert!(res.mean_min_nf.unwrap() <= 60.0);
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let crit = RetrievalCriterion {
            max_time: 120.0,
            ..Default::default()
        };
        let opts = CapacityOptions {
            n_f_min: 10,
            n_f_max: 40,
            resolution: 10,
            ..Default::default()
        };
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| capacity_search(Variant::Dsem, 2, 4, &crit, &opts, 7).unwrap())
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.min_n_f_per_trial, b.min_n_f_per_trial);
        assert_eq!(a.successes_per_nf, b.successes_per_nf);
        assert_eq!(a.mean_min_nf, b.mean_min_nf);
    }
}
