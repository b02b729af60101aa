//! Cue a stored episode and print the retrieved memory sequence.
//!
//! Run: cargo run --release --example retrieval [lisem|dsem]

use gsemm_core::*;

fn main() {
    let variant = match std::env::args().nth(1).as_deref() {
        Some("lisem") => Variant::Lisem,
        _ => Variant::Dsem,
    };
    let spec = ModelSpec::canonical(variant, 100, 7);
    let memories = generate_memories(spec.n_f, spec.n_h, 7).unwrap();
    let graph = build_episode_graph(&[vec![0, 1, 2], vec![3, 4, 5, 6]]).unwrap();
    let syn = SynapseState::preloaded(&memories, &graph, spec.alpha_s).unwrap();

    let cue = memories.column(0).to_owned();
    let init = init_from_cue(&cue, 0.0, 1, &spec, &syn).unwrap();
    let traj = simulate(
        &spec,
        &syn,
        &init,
        &SimOptions {
            duration: 300.0,
            record_energy: true,
            ..Default::default()
        },
    )
    .unwrap();

    println!("{} with seven memories in two episodes, cued at memory 1", variant.name());
    for visit in visit_events(&traj, &RetrievalCriterion::default()).unwrap() {
        println!(
            "  memory {} from t = {:6.1} to {:6.1} (peak overlap {:.3})",
            visit.memory + 1,
            visit.onset,
            visit.end,
            visit.peak_overlap
        );
    }
    let energies = traj.energies.as_ref().unwrap();
    let max_f = energies.iter().map(|e| e.f_rate).fold(f64::NEG_INFINITY, f64::max);
    println!("largest fast-subsystem energy rate along the run: {max_f:.2e}");
}
