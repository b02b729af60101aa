//! Energy-based online learning of the synapse matrices for DSEM.
//!
//! Both rules are differences of outer products between layer signals at a
//! target configuration and at the current configuration, i.e. Hebbian
//! terms; the delay-trace factor in the `phi` rule makes it sensitive to
//! temporal order. Each rule equals the energy-gradient combination
//! `-dE(target)/dW + beta_c dE(current)/dW` divided by its learning
//! timescale.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::derived_hidden;
use crate::energy::energy_dsem;
use crate::error::{invalid, Error, Result};
use crate::model::{ModelSpec, NetworkState, SynapseState, Variant};

/// Learning timescales and training-loop controls.
#[derive(Debug, Clone)]
pub struct LearningConfig {
    pub tau_l_xi: f64,
    pub tau_l_phi: f64,
    /// Weight on the current-configuration term of the rule.
    pub beta_c: f64,
    /// Driven integration steps per presented memory.
    pub steps_per_memory: usize,
    pub epochs: usize,
    /// Half-width of the uniform synapse initialization.
    pub init_range: f64,
    pub dt: f64,
    /// Sampling stride for the per-epoch energy trace.
    pub energy_record_every: usize,
}

impl LearningConfig {
    /// Hyperparameters of the cyclic four-memory training task.
    pub fn canonical() -> Self {
        LearningConfig {
            tau_l_xi: 6.2e5,
            tau_l_phi: 6.2e7,
            beta_c: 0.621,
            steps_per_memory: 4500,
            epochs: 100,
            init_range: 1.0,
            dt: 0.01,
            energy_record_every: 500,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_l_xi > 0.0 && self.tau_l_phi > 0.0) {
            return Err(invalid("learning timescales must be positive"));
        }
        if !(self.beta_c > 0.0 && self.beta_c <= 1.0) {
            return Err(invalid("beta_c must lie in (0, 1]"));
        }
        if self.steps_per_memory == 0 {
            return Err(invalid("steps_per_memory must be at least 1"));
        }
        if !(self.init_range >= 0.0) || !(self.dt > 0.0) || self.energy_record_every == 0 {
            return Err(invalid("bad init_range, dt, or energy_record_every"));
        }
        Ok(())
    }
}

/// Feature and hidden signals of one network configuration.
#[derive(Debug, Clone)]
pub struct Signals {
    pub v_f: Array1<f64>,
    pub v_h: Array1<f64>,
}

impl Signals {
    pub fn from_state(state: &NetworkState) -> Self {
        Signals {
            v_f: state.v_f.clone(),
            v_h: state.v_h.clone(),
        }
    }
}

/// Signals the network should produce next: the feature layer at the
/// upcoming memory and the hidden drive it implies at the present delay
/// trace.
pub fn target_signals(
    next_memory: &Array1<f64>,
    state: &NetworkState,
    syn: &SynapseState,
    spec: &ModelSpec,
) -> Result<Signals> {
    if next_memory.len() != spec.n_f {
        return Err(invalid("target memory length does not match n_f"));
    }
    Ok(Signals {
        v_f: next_memory.clone(),
        v_h: derived_hidden(next_memory, &state.v_d, syn, spec)?,
    })
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    let col = a.view().insert_axis(Axis(1));
    let row = b.view().insert_axis(Axis(0));
    col.dot(&row)
}

fn check_signal_shapes(current: &Signals, target: &Signals, v_d: &Array1<f64>, syn: &SynapseState) -> Result<()> {
    let (n_f, n_h) = (syn.n_f(), syn.n_h());
    if current.v_f.len() != n_f
        || target.v_f.len() != n_f
        || current.v_h.len() != n_h
        || target.v_h.len() != n_h
        || v_d.len() != n_f
    {
        return Err(invalid("signal shapes do not match synapse dimensions"));
    }
    Ok(())
}

/// Increment for `xi`, already divided by its learning timescale:
///
/// ```text
/// d_xi tau_xi = sqrt(alpha_s) [vf_t sh_t^T - beta_c vf_c sh_c^T]
///             + alpha_c v_d (sh_t - beta_c sh_c)^T phi^T
/// ```
pub fn xi_update(
    current: &Signals,
    target: &Signals,
    v_d: &Array1<f64>,
    syn: &SynapseState,
    spec: &ModelSpec,
    cfg: &LearningConfig,
) -> Result<Array2<f64>> {
    check_signal_shapes(current, target, v_d, syn)?;
    let sigma_h = spec.sigma_h();
    let sh_t = sigma_h.eval(&target.v_h)?;
    let sh_c = sigma_h.eval(&current.v_h)?;
    let hebb = outer(&target.v_f, &sh_t) - outer(&current.v_f, &sh_c) * cfg.beta_c;
    let diff = &sh_t - &(&sh_c * cfg.beta_c);
    let stdp = outer(v_d, &syn.phi.dot(&diff));
    Ok((hebb * spec.alpha_s.sqrt() + stdp * spec.alpha_c) / cfg.tau_l_xi)
}

/// Increment for `phi`, already divided by its learning timescale:
///
/// ```text
/// d_phi tau_phi = alpha_c xi^T v_d (sh_t - beta_c sh_c)^T
/// ```
pub fn phi_update(
    current: &Signals,
    target: &Signals,
    v_d: &Array1<f64>,
    syn: &SynapseState,
    spec: &ModelSpec,
    cfg: &LearningConfig,
) -> Result<Array2<f64>> {
    check_signal_shapes(current, target, v_d, syn)?;
    let sigma_h = spec.sigma_h();
    let sh_t = sigma_h.eval(&target.v_h)?;
    let sh_c = sigma_h.eval(&current.v_h)?;
    let diff = &sh_t - &(&sh_c * cfg.beta_c);
    Ok(outer(&syn.xi.t().dot(v_d), &diff) * (spec.alpha_c / cfg.tau_l_phi))
}

/// Synapse matrices and diagnostics recorded at the end of an epoch.
#[derive(Debug, Clone)]
pub struct TrainingSnapshot {
    pub epoch: usize,
    pub xi: Array2<f64>,
    pub phi: Array2<f64>,
    /// Energy of the driven state, sampled along the epoch.
    pub energy_trace: Vec<f64>,
    /// Energy the upcoming target memory would have at epoch end.
    pub e_target: f64,
    /// Energy of the driven state at epoch end.
    pub e_current: f64,
}

/// Drive the network with a cyclic episode and apply both synapse rules
/// after every integration step.
///
/// During each presentation the feature layer is clamped to the stimulus
/// while the delay trace integrates freely, so it carries the previous
/// memory and gives the `phi` rule its temporal order. Synapses start
/// uniform in `[-init_range, init_range]`; one rule increment (the
/// continuous rule divided by its learning timescale) is added per step.
pub fn train_online(
    episode: &[Array1<f64>],
    spec: &ModelSpec,
    cfg: &LearningConfig,
    seed: u64,
) -> Result<(SynapseState, Vec<TrainingSnapshot>)> {
    spec.validate()?;
    cfg.validate()?;
    if spec.variant != Variant::Dsem {
        return Err(invalid("online learning is defined for DSEM"));
    }
    if episode.is_empty() {
        return Err(invalid("episode must contain at least one memory"));
    }
    for m in episode {
        if m.len() != spec.n_f {
            return Err(invalid("episode memory length does not match n_f"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = cfg.init_range;
    let mut syn = SynapseState::new(
        Array2::from_shape_fn((spec.n_f, spec.n_h), |_| rng.gen_range(-r..=r)),
        Array2::from_shape_fn((spec.n_h, spec.n_h), |_| rng.gen_range(-r..=r)),
    )?;

    let mut v_d: Array1<f64> = Array1::zeros(spec.n_f);
    let mut snapshots = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut energy_trace = Vec::new();
        let mut global_step = 0usize;
        for m_idx in 0..episode.len() {
            let stimulus = &episode[m_idx];
            let next = &episode[(m_idx + 1) % episode.len()];
            for _ in 0..cfg.steps_per_memory {
                v_d = clamped_delay_step(stimulus, &v_d, spec.tau_d, cfg.dt);
                let state = NetworkState {
                    v_f: stimulus.clone(),
                    v_h: derived_hidden(stimulus, &v_d, &syn, spec)?,
                    v_d: v_d.clone(),
                };
                let current = Signals::from_state(&state);
                let target = target_signals(next, &state, &syn, spec)?;
                let d_xi = xi_update(&current, &target, &state.v_d, &syn, spec, cfg)?;
                let d_phi = phi_update(&current, &target, &state.v_d, &syn, spec, cfg)?;
                syn.xi = syn.xi + &d_xi;
                syn.phi = syn.phi + &d_phi;
                if global_step % cfg.energy_record_every == 0 {
                    energy_trace.push(energy_dsem(&state, &syn, spec)?);
                }
                global_step += 1;
            }
            if syn.xi.iter().any(|x| !x.is_finite()) || syn.phi.iter().any(|x| !x.is_finite()) {
                return Err(Error::TrainingFailure {
                    epoch,
                    reason: "synapse matrices stopped being finite".into(),
                });
            }
        }

        let last = &episode[episode.len() - 1];
        let driven = NetworkState {
            v_f: last.clone(),
            v_h: Array1::zeros(0),
            v_d: v_d.clone(),
        };
        let target_state = NetworkState {
            v_f: episode[0].clone(),
            v_h: Array1::zeros(0),
            v_d: v_d.clone(),
        };
        snapshots.push(TrainingSnapshot {
            epoch,
            xi: syn.xi.clone(),
            phi: syn.phi.clone(),
            energy_trace,
            e_target: energy_dsem(&target_state, &syn, spec)?,
            e_current: energy_dsem(&driven, &syn, spec)?,
        });
    }
    Ok((syn, snapshots))
}

/// One RK4 step of `tau_d dv_d/dt = v_f - v_d` with the feature layer
/// clamped.
fn clamped_delay_step(v_f: &Array1<f64>, v_d: &Array1<f64>, tau_d: f64, dt: f64) -> Array1<f64> {
    let f = |v: &Array1<f64>| (v_f - v) / tau_d;
    let k1 = f(v_d);
    let k2 = f(&(v_d + &(&k1 * (dt / 2.0))));
    let k3 = f(&(v_d + &(&k2 * (dt / 2.0))));
    let k4 = f(&(v_d + &(&k3 * dt)));
    v_d + &((k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}
