//! Fixed-step fourth-order Runge-Kutta integration, trajectory recording,
//! and cue-based initialization.

use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{derived_hidden, rhs, rhs_frozen_delay, StateDerivative};
use crate::energy::{energy_report, EnergyReport};
use crate::error::{invalid, Error, Result};
use crate::metrics::overlaps;
use crate::model::{ModelSpec, NetworkState, SynapseState};

/// Time-indexed record of a simulation. `states` may be left empty when a
/// run only needs overlap traces (capacity sweeps); `energies` is filled
/// on request.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<NetworkState>,
    pub overlaps: Vec<Array1<f64>>,
    pub energies: Option<Vec<EnergyReport>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Simulation controls. Snapshots are taken every `record_every` steps,
/// always including the initial and final states.
#[derive(Debug, Clone)]
pub struct SimOptions {
    pub duration: f64,
    pub dt: f64,
    pub record_every: usize,
    pub record_energy: bool,
    pub record_states: bool,
    /// Clamp the delay trace, freezing the energy surface.
    pub frozen_delay: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            duration: 300.0,
            dt: 0.01,
            record_every: 10,
            record_energy: false,
            record_states: true,
            frozen_delay: false,
        }
    }
}

fn apply(base: &NetworkState, k: &StateDerivative, c: f64) -> NetworkState {
    NetworkState {
        v_f: &base.v_f + &(&k.dv_f * c),
        v_h: if k.dv_h.is_empty() {
            base.v_h.clone()
        } else {
            &base.v_h + &(&k.dv_h * c)
        },
        v_d: &base.v_d + &(&k.dv_d * c),
    }
}

fn combine(base: &NetworkState, ks: &[StateDerivative; 4], dt: f64) -> NetworkState {
    let w = dt / 6.0;
    let mut out = base.clone();
    for (k, c) in ks.iter().zip([1.0, 2.0, 2.0, 1.0]) {
        out.v_f = out.v_f + &(&k.dv_f * (w * c));
        if !k.dv_h.is_empty() {
            out.v_h = out.v_h + &(&k.dv_h * (w * c));
        }
        out.v_d = out.v_d + &(&k.dv_d * (w * c));
    }
    out
}

/// One classical RK4 update applied jointly to all integrated components.
/// `t` is only used to label a blowup error.
pub fn rk4_step<F>(f: F, state: &NetworkState, t: f64, dt: f64) -> Result<NetworkState>
where
    F: Fn(&NetworkState) -> Result<StateDerivative>,
{
    if !(dt > 0.0) {
        return Err(invalid("dt must be positive"));
    }
    let k1 = f(state)?;
    let k2 = f(&apply(state, &k1, dt / 2.0))?;
    let k3 = f(&apply(state, &k2, dt / 2.0))?;
    let k4 = f(&apply(state, &k3, dt))?;
    let next = combine(state, &[k1, k2, k3, k4], dt);
    if !next.all_finite() {
        return Err(Error::NumericalBlowup { time: t });
    }
    Ok(next)
}

/// Integrate the variant's dynamics and record snapshots, overlap traces,
/// and (optionally) energy diagnostics. For diabatic variants the derived
/// hidden drive is recomputed and stored with each snapshot.
pub fn simulate(
    spec: &ModelSpec,
    syn: &SynapseState,
    init: &NetworkState,
    opts: &SimOptions,
) -> Result<Trajectory> {
    spec.validate()?;
    if !(opts.duration > 0.0) || !(opts.dt > 0.0) {
        return Err(invalid("duration and dt must be positive"));
    }
    if opts.record_every == 0 {
        return Err(invalid("record_every must be at least 1"));
    }
    let n_steps = (opts.duration / opts.dt).round().max(1.0) as usize;
    let deriv_fn = |s: &NetworkState| {
        if opts.frozen_delay {
            rhs_frozen_delay(s, syn, spec)
        } else {
            rhs(s, syn, spec)
        }
    };

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        overlaps: Vec::new(),
        energies: if opts.record_energy { Some(Vec::new()) } else { None },
    };
    let record = |state: &NetworkState, t: f64, traj: &mut Trajectory| -> Result<()> {
        let mut snap = state.clone();
        if spec.is_diabatic() {
            snap.v_h = derived_hidden(&snap.v_f, &snap.v_d, syn, spec)?;
        }
        traj.times.push(t);
        traj.overlaps.push(overlaps(&snap.v_f, &syn.xi, spec)?);
        if let Some(energies) = traj.energies.as_mut() {
            let d = deriv_fn(&snap)?;
            energies.push(energy_report(&snap, &d, syn, spec)?);
        }
        if opts.record_states {
            traj.states.push(snap);
        }
        Ok(())
    };

    let mut state = init.clone();
    record(&state, 0.0, &mut traj)?;
    for step in 1..=n_steps {
        let t = step as f64 * opts.dt;
        state = rk4_step(&deriv_fn, &state, t, opts.dt)?;
        if step % opts.record_every == 0 || step == n_steps {
            record(&state, t, &mut traj)?;
        }
    }
    Ok(traj)
}

/// Build an initial state from a (possibly corrupted) stored pattern:
/// `v_f` is the pattern with `floor(noise_fraction n_f)` uniformly chosen
/// entries sign-flipped, and `v_h` holds the derived hidden drive (zero
/// for the full model, which integrates it).
///
/// The delay trace starts at zero: a cue arrives with no history, so the
/// network first settles into the cued memory and transitions only once
/// the trace has charged up. Starting the trace already aligned with the
/// cue acts like a long-aged stimulus and kicks the state off the cued
/// memory immediately.
pub fn init_from_cue(
    memory: &Array1<f64>,
    noise_fraction: f64,
    seed: u64,
    spec: &ModelSpec,
    syn: &SynapseState,
) -> Result<NetworkState> {
    if !(0.0..0.5).contains(&noise_fraction) {
        return Err(invalid("noise_fraction must lie in [0, 0.5)"));
    }
    if memory.len() != spec.n_f {
        return Err(invalid(format!(
            "cue length {} does not match n_f = {}",
            memory.len(),
            spec.n_f
        )));
    }
    let mut v_f = memory.clone();
    let n_flips = (noise_fraction * spec.n_f as f64).floor() as usize;
    if n_flips > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for idx in rand::seq::index::sample(&mut rng, spec.n_f, n_flips) {
            v_f[idx] = -v_f[idx];
        }
    }
    let v_d = Array1::zeros(spec.n_f);
    let v_h = if spec.is_diabatic() {
        derived_hidden(&v_f, &v_d, syn, spec)?
    } else {
        Array1::zeros(spec.n_h)
    };
    Ok(NetworkState { v_f, v_h, v_d })
}
