//! Cross-module behavioral invariants of the canonical experiments that
//! go beyond single-module unit tests.

use gsemm_core::capacity::episode_retrieval_succeeds;
use gsemm_core::*;
use ndarray::Array2;

fn canonical_setup(variant: Variant, seed: u64) -> (ModelSpec, SynapseState, Array2<f64>) {
    let spec = ModelSpec::canonical(variant, 100, 7);
    let memories = generate_memories(100, 7, seed).unwrap();
    let graph = build_episode_graph(&[vec![0, 1, 2], vec![3, 4, 5, 6]]).unwrap();
    let syn = SynapseState::preloaded(&memories, &graph, spec.alpha_s).unwrap();
    (spec, syn, memories)
}

fn cued_run(variant: Variant, seed: u64, cue: usize, duration: f64) -> Trajectory {
    let (spec, syn, memories) = canonical_setup(variant, seed);
    let init = init_from_cue(&memories.column(cue).to_owned(), 0.0, seed, &spec, &syn).unwrap();
    simulate(
        &spec,
        &syn,
        &init,
        &SimOptions {
            duration,
            record_states: false,
            ..Default::default()
        },
    )
    .unwrap()
}

#[test]
fn episode_selectivity_when_cueing_the_second_episode() {
    // Cueing inside episode two never extracts an index from episode one.
    for variant in [Variant::Lisem, Variant::Dsem] {
        for seed in 0..20 {
            let traj = cued_run(variant, seed, 3, 300.0);
            let seq = extract_sequence(&traj, &RetrievalCriterion::default()).unwrap();
            assert!(
                seq.iter().all(|&m| m >= 3),
                "{variant:?} seed {seed}: extracted {seq:?}"
            );
            assert!(!seq.is_empty(), "{variant:?} seed {seed}: nothing extracted");
        }
    }
}

#[test]
fn retrieval_does_not_settle_into_one_memory() {
    // The extracted sequence keeps growing with the horizon: the episode
    // repeats instead of reaching an equilibrium ground state. The
    // softmax variant sustains this indefinitely.
    let traj = cued_run(Variant::Dsem, 0, 0, 300.0);
    let count_until = |max_time: f64| {
        let crit = RetrievalCriterion {
            max_time,
            ..Default::default()
        };
        extract_sequence(&traj, &crit).unwrap().len()
    };
    let short = count_until(150.0);
    let long = count_until(300.0);
    assert!(
        short < long,
        "sequence stopped growing: {short} visits by t=150, {long} by t=300"
    );
}

#[test]
fn feature_state_stays_within_the_drive_bound() {
    // Sup-norm of the feature state never exceeds the worst-case drive:
    // the associative term plus the sequence term at |v_d| <= 1.
    let (spec, syn, memories) = canonical_setup(Variant::Lisem, 0);
    let init = init_from_cue(&memories.column(0).to_owned(), 0.0, 0, &spec, &syn).unwrap();
    let traj = simulate(&spec, &syn, &init, &SimOptions::default()).unwrap();

    let row_abs_sum_max = |m: &Array2<f64>| {
        m.rows()
            .into_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0f64, f64::max)
    };
    let assoc_bound = spec.alpha_s * row_abs_sum_max(&syn.xi.dot(&syn.xi.t()));
    let seq_gain = spec.alpha_s.sqrt() * spec.delay_coupling();
    let seq_bound =
        seq_gain * row_abs_sum_max(&syn.xi.dot(&syn.phi.t()).dot(&syn.xi.t()));
    let bound = assoc_bound + seq_bound + 1.0;

    for (state, &t) in traj.states.iter().zip(&traj.times) {
        let sup = state.v_f.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        assert!(sup <= bound, "|v_f| = {sup} exceeds {bound} at t = {t}");
        assert!(state.v_d.iter().all(|&x| x.abs() <= 1.0 + 1e-12));
    }
}

#[test]
fn two_memory_episodes_retrieve_reliably_at_a_hundred_neurons() {
    // Desk-scale pilot, frozen: short episodes succeed on nearly every
    // draw well below the capacity limit.
    let crit = RetrievalCriterion {
        max_time: 150.0,
        ..Default::default()
    };
    let opts = CapacityOptions::default();
    for variant in [Variant::Lisem, Variant::Dsem] {
        let mut successes = 0;
        for trial in 0..100 {
            if episode_retrieval_succeeds(variant, 2, 100, 9000 + trial, &crit, &opts).unwrap() {
                successes += 1;
            }
        }
        assert!(
            successes >= 95,
            "{variant:?}: only {successes}/100 two-memory episodes retrieved"
        );
    }
}
