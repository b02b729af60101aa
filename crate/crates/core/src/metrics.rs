//! Overlap metrics and retrieval-sequence extraction from recorded
//! trajectories.

use ndarray::{Array1, Array2};

use crate::error::{invalid, Result};
use crate::integrate::Trajectory;
use crate::model::ModelSpec;

/// When a memory counts as visited: its overlap must stay at or above
/// `overlap_threshold` continuously for `min_dwell` time units, and only
/// snapshots up to `max_time` are considered.
#[derive(Debug, Clone)]
pub struct RetrievalCriterion {
    pub overlap_threshold: f64,
    pub min_dwell: f64,
    pub max_time: f64,
}

impl Default for RetrievalCriterion {
    fn default() -> Self {
        RetrievalCriterion {
            overlap_threshold: 0.9,
            min_dwell: 1.0,
            max_time: 300.0,
        }
    }
}

impl RetrievalCriterion {
    pub fn validate(&self) -> Result<()> {
        if !(self.overlap_threshold > 0.0 && self.overlap_threshold <= 1.0) {
            return Err(invalid("overlap_threshold must lie in (0, 1]"));
        }
        if !(self.min_dwell > 0.0) || !(self.max_time > 0.0) {
            return Err(invalid("min_dwell and max_time must be positive"));
        }
        Ok(())
    }
}

/// Normalized overlap of the feature state with each stored pattern,
/// `m_i = (1/N_f) xi_i . sigma_f(v_f)`, using the variant's feature
/// activation (the identity for DSEM, so its overlaps are raw).
pub fn overlaps(v_f: &Array1<f64>, xi: &Array2<f64>, spec: &ModelSpec) -> Result<Array1<f64>> {
    if v_f.len() != xi.nrows() {
        return Err(invalid(format!(
            "v_f length {} does not match xi with {} rows",
            v_f.len(),
            xi.nrows()
        )));
    }
    let s = spec.sigma_f().eval(v_f)?;
    Ok(xi.t().dot(&s) / xi.nrows() as f64)
}

/// One qualified stay near a stored memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    pub memory: usize,
    /// Time the overlap first crossed the threshold.
    pub onset: f64,
    /// Snapshot time at which the dwell requirement was met.
    pub qualified_at: f64,
    /// Last snapshot time of the stay still at or above threshold.
    pub end: f64,
    /// Largest overlap seen during the whole stay.
    pub peak_overlap: f64,
}

/// Qualified visits in emission order. Each above-threshold run of a
/// memory produces at most one visit, stamped at the snapshot where its
/// dwell first reaches `min_dwell`; simultaneous qualifications are
/// ordered by overlap, and a visit is dropped if its memory is already
/// the most recent one emitted.
pub fn visit_events(traj: &Trajectory, crit: &RetrievalCriterion) -> Result<Vec<Visit>> {
    crit.validate()?;
    if traj.is_empty() {
        return Ok(Vec::new());
    }
    let n_mem = traj.overlaps[0].len();
    let horizon = traj
        .times
        .iter()
        .take_while(|&&t| t <= crit.max_time)
        .count();

    // (qualified_at, overlap at qualification, memory, onset, end, peak)
    let mut events: Vec<(f64, f64, usize, f64, f64, f64)> = Vec::new();
    for mem in 0..n_mem {
        let mut run_start: Option<usize> = None;
        for k in 0..=horizon {
            let above = k < horizon && traj.overlaps[k][mem] >= crit.overlap_threshold;
            match (run_start, above) {
                (None, true) => run_start = Some(k),
                (Some(s), false) => {
                    push_run(traj, crit, mem, s, k - 1, &mut events);
                    run_start = None;
                }
                _ => {}
            }
        }
    }
    events.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(b.1.partial_cmp(&a.1).unwrap())
    });

    let mut visits = Vec::new();
    let mut last: Option<usize> = None;
    for (qualified_at, _, memory, onset, end, peak_overlap) in events {
        if last != Some(memory) {
            visits.push(Visit {
                memory,
                onset,
                qualified_at,
                end,
                peak_overlap,
            });
            last = Some(memory);
        }
    }
    Ok(visits)
}

fn push_run(
    traj: &Trajectory,
    crit: &RetrievalCriterion,
    mem: usize,
    start: usize,
    end: usize,
    events: &mut Vec<(f64, f64, usize, f64, f64, f64)>,
) {
    let onset = traj.times[start];
    // First snapshot in the run with dwell >= min_dwell.
    let qualified = (start..=end).find(|&k| traj.times[k] - onset >= crit.min_dwell);
    if let Some(q) = qualified {
        let peak = (start..=end)
            .map(|k| traj.overlaps[k][mem])
            .fold(f64::NEG_INFINITY, f64::max);
        events.push((
            traj.times[q],
            traj.overlaps[q][mem],
            mem,
            onset,
            traj.times[end],
            peak,
        ));
    }
}

/// Ordered memory indices visited by the trajectory.
pub fn extract_sequence(traj: &Trajectory, crit: &RetrievalCriterion) -> Result<Vec<usize>> {
    Ok(visit_events(traj, crit)?.into_iter().map(|v| v.memory).collect())
}

/// True when `seq` contains `cycle.len()` consecutive entries that walk
/// the cycle in order, starting anywhere in it.
pub fn contains_cycle_traversal(seq: &[usize], cycle: &[usize]) -> bool {
    let k = cycle.len();
    if k == 0 || seq.len() < k {
        return false;
    }
    let succ = |m: usize| -> Option<usize> {
        cycle
            .iter()
            .position(|&c| c == m)
            .map(|p| cycle[(p + 1) % k])
    };
    'outer: for w in seq.windows(k) {
        if !cycle.contains(&w[0]) {
            continue;
        }
        for pair in w.windows(2) {
            if succ(pair[0]) != Some(pair[1]) {
                continue 'outer;
            }
        }
        return true;
    }
    false
}
