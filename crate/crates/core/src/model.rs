//! Model configuration, synapse matrices, memory generation, and episode
//! graph construction.
//!
//! The network has a feature layer of `n_f` neurons and a hidden layer of
//! `n_h` neurons. Inter-layer synapses `xi` (one stored pattern per column)
//! carry strength `alpha_s`; directed intra-hidden synapses `phi` carry the
//! delayed feature signal with strength `alpha_c` and encode which memory
//! follows which inside an episode.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::Activation;
use crate::error::{invalid, Result};

/// Layer nonlinearity selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivationKind {
    Identity,
    Tanh,
    Softmax,
}

/// Model family. `Lisem` and `Dsem` are the two diabatic reductions
/// (hidden layer eliminated algebraically); `FullGsemm` integrates the
/// hidden layer explicitly and lets the caller choose both activations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    FullGsemm {
        sigma_f: ActivationKind,
        sigma_h: ActivationKind,
    },
    Lisem,
    Dsem,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::FullGsemm { .. } => "gsemm",
            Variant::Lisem => "lisem",
            Variant::Dsem => "dsem",
        }
    }
}

/// All scalar parameters of a model instance.
///
/// Timescales share the unit of the integration step. The delay timescale
/// `tau_d` must dominate the fast layers for the slowly-moving energy
/// surface picture to hold.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub variant: Variant,
    pub n_f: usize,
    pub n_h: usize,
    pub alpha_s: f64,
    pub alpha_c: f64,
    pub gamma: f64,
    pub tau_f: f64,
    pub tau_h: f64,
    pub tau_d: f64,
}

impl ModelSpec {
    /// Parameter set used throughout the retrieval and capacity
    /// experiments: `alpha_s` 0.05 (LISEM) or 1.0 (DSEM), `alpha_c` 4.9,
    /// unit gain, `tau_f` 1, `tau_d` 100.
    pub fn canonical(variant: Variant, n_f: usize, n_h: usize) -> Self {
        let alpha_s = match variant {
            Variant::Lisem => 0.05,
            _ => 1.0,
        };
        ModelSpec {
            variant,
            n_f,
            n_h,
            alpha_s,
            alpha_c: 4.9,
            gamma: 1.0,
            tau_f: 1.0,
            tau_h: 0.1,
            tau_d: 100.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_f == 0 || self.n_h == 0 {
            return Err(invalid("n_f and n_h must be at least 1"));
        }
        if !(self.tau_f > 0.0 && self.tau_h > 0.0 && self.tau_d > 0.0) {
            return Err(invalid("all timescales must be positive"));
        }
        if !(self.alpha_s > 0.0) {
            return Err(invalid("alpha_s must be positive"));
        }
        if !self.alpha_c.is_finite() || !self.gamma.is_finite() {
            return Err(invalid("alpha_c and gamma must be finite"));
        }
        if self.tau_d <= self.tau_f || self.tau_d <= self.tau_h {
            return Err(invalid(
                "tau_d must exceed tau_f and tau_h (slow delay subsystem)",
            ));
        }
        Ok(())
    }

    pub fn sigma_f(&self) -> Activation {
        let kind = match self.variant {
            Variant::FullGsemm { sigma_f, .. } => sigma_f,
            Variant::Lisem => ActivationKind::Tanh,
            Variant::Dsem => ActivationKind::Identity,
        };
        Activation::new(kind, self.gamma)
    }

    pub fn sigma_h(&self) -> Activation {
        let kind = match self.variant {
            Variant::FullGsemm { sigma_h, .. } => sigma_h,
            Variant::Lisem => ActivationKind::Identity,
            Variant::Dsem => ActivationKind::Softmax,
        };
        Activation::new(kind, self.gamma)
    }

    /// True when the hidden layer is algebraic rather than integrated.
    pub fn is_diabatic(&self) -> bool {
        !matches!(self.variant, Variant::FullGsemm { .. })
    }

    /// Coefficient on `phi^T xi^T v_d` in the hidden drive.
    ///
    /// LISEM carries `alpha_c / (sqrt(alpha_s) n_f)`: raw pattern inner
    /// products are O(n_f), so the extra 1/n_f makes the delay pathway
    /// read normalized overlaps, the same convention that makes
    /// `alpha_s n_f` the associative gain. The sequence drive on the
    /// feature layer is then `(alpha_c / n_f) xi phi^T xi^T v_d`, and with
    /// the adjacency scaling of `phi` it competes with the associative
    /// hold at `alpha_c` against `alpha_s n_f` instead of overwhelming it
    /// by a factor of n_f. DSEM keeps the raw products: its softmax needs
    /// the O(n_f) separation between hidden drives.
    pub fn delay_coupling(&self) -> f64 {
        match self.variant {
            Variant::Lisem => self.alpha_c / (self.alpha_s.sqrt() * self.n_f as f64),
            _ => self.alpha_c,
        }
    }
}

/// The two learnable matrices: `xi` is `n_f x n_h` (column j = pattern j),
/// `phi` is `n_h x n_h` (entry (k, j) = strength from hidden k to hidden j).
#[derive(Debug, Clone)]
pub struct SynapseState {
    pub xi: Array2<f64>,
    pub phi: Array2<f64>,
}

impl SynapseState {
    pub fn new(xi: Array2<f64>, phi: Array2<f64>) -> Result<Self> {
        let n_h = xi.ncols();
        if phi.nrows() != n_h || phi.ncols() != n_h {
            return Err(invalid(format!(
                "phi must be {n_h}x{n_h} to match xi with {n_h} columns, got {}x{}",
                phi.nrows(),
                phi.ncols()
            )));
        }
        Ok(SynapseState { xi, phi })
    }

    /// Preload binary patterns as the columns of `xi` and derive `phi`
    /// from the episode graph. Every pattern entry must be +1 or -1.
    pub fn preloaded(
        memories: &Array2<f64>,
        graph: &EpisodeGraph,
        alpha_s: f64,
    ) -> Result<Self> {
        if memories.iter().any(|&x| x != 1.0 && x != -1.0) {
            return Err(invalid("preloaded memories must have entries in {+1, -1}"));
        }
        if graph.n_nodes() > memories.ncols() {
            return Err(invalid(format!(
                "episode graph references {} memories but only {} are provided",
                graph.n_nodes(),
                memories.ncols()
            )));
        }
        let phi = build_phi_sized(graph, memories.ncols(), alpha_s)?;
        SynapseState::new(memories.clone(), phi)
    }

    pub fn n_f(&self) -> usize {
        self.xi.nrows()
    }

    pub fn n_h(&self) -> usize {
        self.xi.ncols()
    }
}

/// Directed adjacency over memory indices: edge (k, j) means memory k
/// transitions to memory j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeGraph {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl EpisodeGraph {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Successor of node `i`, if any. Cycles give each node exactly one.
    pub fn successor(&self, i: usize) -> Option<usize> {
        self.edges.iter().find(|&&(k, _)| k == i).map(|&(_, j)| j)
    }
}

/// Turn index cycles into an episode graph: `[a, b, .., z]` contributes
/// edges a->b, .., z->a. Cycles must be disjoint and repetition-free;
/// self-loops (single-element cycles) are rejected.
pub fn build_episode_graph(cycles: &[Vec<usize>]) -> Result<EpisodeGraph> {
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    let mut n_nodes = 0usize;
    for cycle in cycles {
        let mut in_cycle = BTreeSet::new();
        for &idx in cycle {
            if !in_cycle.insert(idx) {
                return Err(invalid(format!("index {idx} repeated within a cycle")));
            }
            if !seen.insert(idx) {
                return Err(invalid(format!("index {idx} appears in two cycles")));
            }
            n_nodes = n_nodes.max(idx + 1);
        }
        if cycle.len() == 1 {
            return Err(invalid("single-element cycle would create a self-loop"));
        }
        for w in 0..cycle.len() {
            edges.push((cycle[w], cycle[(w + 1) % cycle.len()]));
        }
    }
    edges.sort_unstable();
    Ok(EpisodeGraph { n_nodes, edges })
}

/// Adjacency-derived delay synapses: `phi[k][j] = 1/sqrt(alpha_s)` on every
/// graph edge (k, j), zero elsewhere.
pub fn build_phi(graph: &EpisodeGraph, alpha_s: f64) -> Result<Array2<f64>> {
    build_phi_sized(graph, graph.n_nodes(), alpha_s)
}

fn build_phi_sized(graph: &EpisodeGraph, n: usize, alpha_s: f64) -> Result<Array2<f64>> {
    if !(alpha_s > 0.0) {
        return Err(invalid("alpha_s must be positive"));
    }
    let w = alpha_s.sqrt().recip();
    let mut phi = Array2::zeros((n, n));
    for &(k, j) in graph.edges() {
        phi[[k, j]] = w;
    }
    Ok(phi)
}

/// Fair-coin binary patterns, one per column, fully determined by the seed.
pub fn generate_memories(n_f: usize, n_memories: usize, seed: u64) -> Result<Array2<f64>> {
    if n_f == 0 || n_memories == 0 {
        return Err(invalid("memory dimensions must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Array2::from_shape_fn((n_f, n_memories), |_| {
        if rng.gen::<bool>() {
            1.0
        } else {
            -1.0
        }
    }))
}

/// The three dynamical state vectors: feature current `v_f`, hidden current
/// `v_h`, and the delayed feature trace `v_d`. For diabatic variants `v_h`
/// holds the derived hidden drive and is never integrated.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub v_f: Array1<f64>,
    pub v_h: Array1<f64>,
    pub v_d: Array1<f64>,
}

impl NetworkState {
    pub fn zeros(spec: &ModelSpec) -> Self {
        NetworkState {
            v_f: Array1::zeros(spec.n_f),
            v_h: Array1::zeros(spec.n_h),
            v_d: Array1::zeros(spec.n_f),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.v_f.iter().all(|x| x.is_finite())
            && self.v_h.iter().all(|x| x.is_finite())
            && self.v_d.iter().all(|x| x.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memories_are_binary_and_deterministic() {
        let a = generate_memories(4, 1, 11).unwrap();
        assert!(a.iter().all(|&x| x == 1.0 || x == -1.0));
        let b = generate_memories(37, 5, 123).unwrap();
        let c = generate_memories(37, 5, 123).unwrap();
        assert_eq!(b, c);
        assert_ne!(b, generate_memories(37, 5, 124).unwrap());
    }

    #[test]
    fn memories_mean_is_near_zero() {
        // Empirical fair-coin check on one seeded draw.
        let m = generate_memories(500, 7, 42).unwrap();
        let mean = m.sum() / m.len() as f64;
        assert!(mean > -0.1 && mean < 0.1, "mean = {mean}");
    }

    #[test]
    fn memories_reject_zero_dims() {
        assert!(generate_memories(0, 3, 1).is_err());
        assert!(generate_memories(3, 0, 1).is_err());
    }

    #[test]
    fn graph_from_single_cycle() {
        let g = build_episode_graph(&[vec![0, 1, 2]]).unwrap();
        assert_eq!(g.n_nodes(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(g.successor(1), Some(2));
        assert_eq!(g.successor(2), Some(0));
    }

    #[test]
    fn graph_two_cycles_has_seven_edges() {
        let g = build_episode_graph(&[vec![0, 1, 2], vec![3, 4, 5, 6]]).unwrap();
        assert_eq!(g.edges().len(), 7);
        assert_eq!(g.n_nodes(), 7);
        assert_eq!(g.successor(6), Some(3));
    }

    #[test]
    fn graph_empty_and_invalid_cycles() {
        let g = build_episode_graph(&[]).unwrap();
        assert_eq!(g.n_nodes(), 0);
        assert!(g.edges().is_empty());
        assert!(build_episode_graph(&[vec![0, 1, 0]]).is_err());
        assert!(build_episode_graph(&[vec![0, 1], vec![1, 2]]).is_err());
        assert!(build_episode_graph(&[vec![4]]).is_err());
    }

    #[test]
    fn phi_scaling() {
        let g = build_episode_graph(&[vec![0, 1]]).unwrap();
        let phi = build_phi(&g, 1.0).unwrap();
        assert_eq!(phi[[0, 1]], 1.0);
        assert_eq!(phi[[1, 0]], 1.0);
        assert_eq!(phi[[0, 0]], 0.0);

        let phi = build_phi(&g, 0.05).unwrap();
        assert!((phi[[0, 1]] - 4.47213595499958).abs() < 1e-12);

        let phi = build_phi(&g, 4.0).unwrap();
        assert_eq!(phi[[0, 1]], 0.5);

        assert!(build_phi(&g, 0.0).is_err());
        assert!(build_phi(&g, -1.0).is_err());
    }

    #[test]
    fn cycle_graphs_have_unique_successors() {
        let g = build_episode_graph(&[vec![0, 1, 2], vec![3, 4, 5, 6]]).unwrap();
        let phi = build_phi(&g, 0.05).unwrap();
        for k in 0..7 {
            let row_nonzero = (0..7).filter(|&j| phi[[k, j]] != 0.0).count();
            let col_nonzero = (0..7).filter(|&j| phi[[j, k]] != 0.0).count();
            assert_eq!(row_nonzero, 1);
            assert_eq!(col_nonzero, 1);
        }
    }

    #[test]
    fn spec_validation() {
        let mut spec = ModelSpec::canonical(Variant::Lisem, 10, 3);
        spec.validate().unwrap();
        assert!((spec.delay_coupling() - 4.9 / (0.05f64.sqrt() * 10.0)).abs() < 1e-12);

        spec.n_f = 0;
        assert!(spec.validate().is_err());
        spec.n_f = 10;
        spec.tau_d = 0.5;
        assert!(spec.validate().is_err());
        spec.tau_d = 100.0;
        spec.alpha_s = 0.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn preloaded_rejects_non_binary() {
        let g = build_episode_graph(&[vec![0, 1]]).unwrap();
        let mut m = generate_memories(6, 2, 3).unwrap();
        SynapseState::preloaded(&m, &g, 1.0).unwrap();
        m[[0, 0]] = 0.5;
        assert!(SynapseState::preloaded(&m, &g, 1.0).is_err());
    }
}
