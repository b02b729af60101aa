//! Property checks of the structural invariants.

use gsemm_core::*;
use ndarray::Array1;
use proptest::prelude::*;

fn disjoint_cycles() -> impl Strategy<Value = Vec<Vec<usize>>> {
    // Partition a prefix of 0..n into cycles of length >= 2.
    (2usize..12).prop_flat_map(|n| {
        proptest::collection::vec(2usize..5, 0..3).prop_map(move |lens| {
            let mut cycles = Vec::new();
            let mut next = 0;
            for len in lens {
                if next + len > n {
                    break;
                }
                cycles.push((next..next + len).collect());
                next += len;
            }
            cycles
        })
    })
}

proptest! {
    #[test]
    fn phi_nonzeros_are_exactly_the_edges(cycles in disjoint_cycles(), alpha_s in 0.01f64..10.0) {
        let graph = build_episode_graph(&cycles).unwrap();
        let phi = build_phi(&graph, alpha_s).unwrap();
        let w = alpha_s.sqrt().recip();
        let n = graph.n_nodes();
        for k in 0..n {
            for j in 0..n {
                if graph.edges().contains(&(k, j)) {
                    prop_assert!((phi[[k, j]] - w).abs() < 1e-15);
                } else {
                    prop_assert_eq!(phi[[k, j]], 0.0);
                }
            }
        }
        // Cycles are deterministic successor maps: at most one nonzero
        // per row and per column.
        for k in 0..n {
            prop_assert!((0..n).filter(|&j| phi[[k, j]] != 0.0).count() <= 1);
            prop_assert!((0..n).filter(|&j| phi[[j, k]] != 0.0).count() <= 1);
        }
    }

    #[test]
    fn memories_are_pure_functions_of_their_arguments(
        n_f in 1usize..40,
        n_m in 1usize..8,
        seed in any::<u64>(),
    ) {
        let a = generate_memories(n_f, n_m, seed).unwrap();
        let b = generate_memories(n_f, n_m, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().all(|&x| x == 1.0 || x == -1.0));
    }

    #[test]
    fn softmax_is_a_distribution_for_all_finite_inputs(
        v in proptest::collection::vec(-500.0f64..500.0, 1..12),
        gamma in 0.1f64..4.0,
    ) {
        let p = softmax_activation(&Array1::from(v), gamma).unwrap();
        prop_assert!(p.iter().all(|&x| x >= 0.0 && x.is_finite()));
        prop_assert!((p.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_activation_stays_in_the_open_unit_interval(
        v in proptest::collection::vec(-100.0f64..100.0, 1..12),
        gamma in 0.1f64..4.0,
    ) {
        let u = tanh_activation(&Array1::from(v), gamma);
        prop_assert!(u.iter().all(|&x| (-1.0..=1.0).contains(&x)));
    }

    #[test]
    fn extracted_sequences_never_repeat_adjacent_indices(
        rows in proptest::collection::vec(
            proptest::collection::vec(-1.0f64..1.2, 3),
            20..120,
        ),
    ) {
        let traj = Trajectory {
            times: (0..rows.len()).map(|k| k as f64 * 0.5).collect(),
            states: Vec::new(),
            overlaps: rows.into_iter().map(Array1::from).collect(),
            energies: None,
        };
        let crit = RetrievalCriterion {
            max_time: 1e9,
            ..Default::default()
        };
        let seq = extract_sequence(&traj, &crit).unwrap();
        for w in seq.windows(2) {
            prop_assert_ne!(w[0], w[1]);
        }
    }

    #[test]
    fn every_rotation_of_a_cycle_counts_as_a_traversal(
        k in 2usize..7,
        start in 0usize..7,
    ) {
        let cycle: Vec<usize> = (0..k).collect();
        let start = start % k;
        let rotated: Vec<usize> = (0..k).map(|i| (start + i) % k).collect();
        prop_assert!(contains_cycle_traversal(&rotated, &cycle));
        if k > 2 {
            let mut broken = rotated.clone();
            broken.swap(0, 1);
            prop_assert!(!contains_cycle_traversal(&broken, &cycle));
        }
    }

    #[test]
    fn lagrangian_gradient_is_the_activation(
        v in proptest::collection::vec(-3.0f64..3.0, 2..6),
        gamma in 0.5f64..2.0,
        kind_idx in 0usize..3,
    ) {
        let kind = [ActivationKind::Identity, ActivationKind::Tanh, ActivationKind::Softmax][kind_idx];
        let act = Activation::new(kind, gamma);
        let v = Array1::from(v);
        let s = act.eval(&v).unwrap();
        let h = 1e-6;
        for i in 0..v.len() {
            let mut vp = v.clone();
            let mut vm = v.clone();
            vp[i] += h;
            vm[i] -= h;
            let g = (act.lagrangian(&vp).unwrap() - act.lagrangian(&vm).unwrap()) / (2.0 * h);
            prop_assert!((g - s[i]).abs() < 1e-5, "kind {kind:?} grad {g} vs {}", s[i]);
        }
    }
}
