//! Energy functions for all variants, the LISEM three-term decomposition,
//! the fast/slow energy-rate split, and instantaneous fixed-point search
//! on the frozen-delay surface.
//!
//! Sign conventions are pinned by gradient consistency with the dynamics:
//! for every variant, `-dE/dv_f = H(L_f) tau_f dv_f/dt`, so descent of the
//! fast subsystem is exact. The sequence and translation terms of the
//! LISEM decomposition therefore enter negatively (they are the expansion
//! of `-1/2 |v_h|^2` at the derived hidden state), which is also what
//! makes the successor memory a minimum rather than a maximum.

use ndarray::Array1;

use crate::dynamics::{derived_hidden, rhs_frozen_delay, Activation, StateDerivative};
use crate::error::{invalid, Error, Result};
use crate::model::{ModelSpec, NetworkState, SynapseState, Variant};

/// Default step size for the instantaneous fixed-point iteration.
pub const FIXED_POINT_STEP: f64 = 0.1;
/// Default residual tolerance (sup-norm of dv_f/dt).
pub const FIXED_POINT_TOL: f64 = 1e-6;
/// Default iteration budget.
pub const FIXED_POINT_MAX_ITERS: usize = 100_000;

/// Scalar potentials for the two layers, bundled with their gradients
/// (the activations) and Hessian quadratic forms.
#[derive(Debug, Clone, Copy)]
pub struct LagrangianPair {
    pub l_f: Activation,
    pub l_h: Activation,
}

impl LagrangianPair {
    pub fn for_spec(spec: &ModelSpec) -> Self {
        LagrangianPair {
            l_f: spec.sigma_f(),
            l_h: spec.sigma_h(),
        }
    }
}

/// Per-snapshot energy diagnostics. The decomposition components are only
/// defined for LISEM; `f_rate`/`g_rate` split dE/dt into the fast-subsystem
/// descent term and the delay-driven surface motion.
#[derive(Debug, Clone, Copy)]
pub struct EnergyReport {
    pub total: f64,
    pub e_assoc: Option<f64>,
    pub e_seq: Option<f64>,
    pub e_c: Option<f64>,
    pub f_rate: f64,
    pub g_rate: f64,
}

/// LISEM energy split into the static associative part, the delay-steered
/// sequence term, and the feature-independent translation term.
#[derive(Debug, Clone, Copy)]
pub struct LisemEnergy {
    pub e_assoc: f64,
    pub e_seq: f64,
    pub e_c: f64,
    pub total: f64,
}

fn check_shapes(state: &NetworkState, syn: &SynapseState, spec: &ModelSpec) -> Result<()> {
    if syn.n_f() != spec.n_f || syn.n_h() != spec.n_h {
        return Err(invalid("synapse shapes do not match spec"));
    }
    if state.v_f.len() != spec.n_f || state.v_d.len() != spec.n_f {
        return Err(invalid("state vector lengths do not match spec"));
    }
    Ok(())
}

/// Two-layer energy with an explicit hidden state and delay coupling `c`:
///
/// ```text
/// E = [v_f.sigma_f(v_f) - L_f] + [v_h.sigma_h(v_h) - L_h]
///     - sqrt(alpha_s) sigma_f(v_f)^T xi sigma_h(v_h)
///     - c v_d^T xi phi sigma_h(v_h)
/// ```
fn energy_master(
    v_f: &Array1<f64>,
    v_h: &Array1<f64>,
    v_d: &Array1<f64>,
    syn: &SynapseState,
    alpha_s: f64,
    coupling: f64,
    lag: &LagrangianPair,
) -> Result<f64> {
    let sf = lag.l_f.eval(v_f)?;
    let sh = lag.l_h.eval(v_h)?;
    let legendre_f = v_f.dot(&sf) - lag.l_f.lagrangian(v_f)?;
    let legendre_h = v_h.dot(&sh) - lag.l_h.lagrangian(v_h)?;
    let interaction = alpha_s.sqrt() * sf.dot(&syn.xi.dot(&sh));
    let delay = coupling * v_d.dot(&syn.xi.dot(&syn.phi.dot(&sh)));
    Ok(legendre_f + legendre_h - interaction - delay)
}

/// Energy of the full model at the given state, with the caller's choice
/// of layer potentials.
pub fn energy_gsemm(
    state: &NetworkState,
    syn: &SynapseState,
    spec: &ModelSpec,
    lag: &LagrangianPair,
) -> Result<f64> {
    check_shapes(state, syn, spec)?;
    if state.v_h.len() != spec.n_h {
        return Err(invalid("energy of the full model needs an explicit v_h"));
    }
    energy_master(
        &state.v_f,
        &state.v_h,
        &state.v_d,
        syn,
        spec.alpha_s,
        spec.alpha_c,
        lag,
    )
}

/// Three-term LISEM energy. The hidden state is eliminated; only `v_f`
/// and `v_d` enter.
pub fn energy_lisem(
    state: &NetworkState,
    syn: &SynapseState,
    spec: &ModelSpec,
) -> Result<LisemEnergy> {
    if spec.variant != Variant::Lisem {
        return Err(invalid("energy_lisem called with a non-LISEM spec"));
    }
    check_shapes(state, syn, spec)?;
    let g = spec.gamma;
    let u = state.v_f.mapv(|x| (g * x).tanh());
    let l_f = spec.sigma_f().lagrangian(&state.v_f)?;
    let xtu = syn.xi.t().dot(&u);
    let e_assoc = state.v_f.dot(&u) - l_f - 0.5 * spec.alpha_s * xtu.dot(&xtu);

    // Sequence and translation terms expand -1/2 |v_h|^2 at the derived
    // hidden state, so they share its delay coupling.
    let dc = spec.delay_coupling();
    let w = syn.phi.t().dot(&syn.xi.t().dot(&state.v_d));
    let e_seq = -spec.alpha_s.sqrt() * dc * u.dot(&syn.xi.dot(&w));
    let e_c = -(dc * dc / 2.0) * w.dot(&w);
    Ok(LisemEnergy {
        e_assoc,
        e_seq,
        e_c,
        total: e_assoc + e_seq + e_c,
    })
}

/// The same LISEM energy computed through the two-layer form at the
/// derived hidden state. Cross-check route for the decomposition.
pub fn energy_lisem_via_master(
    state: &NetworkState,
    syn: &SynapseState,
    spec: &ModelSpec,
) -> Result<f64> {
    if spec.variant != Variant::Lisem {
        return Err(invalid("energy_lisem_via_master called with a non-LISEM spec"));
    }
    check_shapes(state, syn, spec)?;
    let v_h = derived_hidden(&state.v_f, &state.v_d, syn, spec)?;
    energy_master(
        &state.v_f,
        &v_h,
        &state.v_d,
        syn,
        spec.alpha_s,
        spec.delay_coupling(),
        &LagrangianPair::for_spec(spec),
    )
}

/// DSEM energy at the derived hidden drive.
pub fn energy_dsem(state: &NetworkState, syn: &SynapseState, spec: &ModelSpec) -> Result<f64> {
    if spec.variant != Variant::Dsem {
        return Err(invalid("energy_dsem called with a non-DSEM spec"));
    }
    check_shapes(state, syn, spec)?;
    let h = derived_hidden(&state.v_f, &state.v_d, syn, spec)?;
    let sigma_h = spec.sigma_h();
    let p = sigma_h.eval(&h)?;
    let lse = sigma_h.lagrangian(&h)?;
    Ok(0.5 * state.v_f.dot(&state.v_f) + h.dot(&p)
        - lse
        - spec.alpha_s.sqrt() * state.v_f.dot(&syn.xi.dot(&p))
        - spec.alpha_c * state.v_d.dot(&syn.xi.dot(&syn.phi.dot(&p))))
}

/// Variant dispatch for the total energy. Diabatic variants recompute the
/// derived hidden state internally, so a stale `v_h` cannot skew the value.
pub fn energy_total(state: &NetworkState, syn: &SynapseState, spec: &ModelSpec) -> Result<f64> {
    match spec.variant {
        Variant::FullGsemm { .. } => {
            energy_gsemm(state, syn, spec, &LagrangianPair::for_spec(spec))
        }
        Variant::Lisem => Ok(energy_lisem(state, syn, spec)?.total),
        Variant::Dsem => energy_dsem(state, syn, spec),
    }
}

/// Split of dE/dt along a trajectory into the fast-subsystem term
///
/// ```text
/// F = -[tau_f (dv_f/dt)^T H(L_f) dv_f/dt + tau_h (dv_h/dt)^T H(L_h) dv_h/dt]
/// ```
///
/// (the hidden term is dropped for diabatic variants) and the delay term
/// `G = -c sigma_h(v_h)^T phi^T xi^T dv_d/dt` with the variant's delay
/// coupling `c` and its derived hidden state.
pub fn energy_rate_terms(
    state: &NetworkState,
    deriv: &StateDerivative,
    syn: &SynapseState,
    spec: &ModelSpec,
    lag: &LagrangianPair,
) -> Result<(f64, f64)> {
    check_shapes(state, syn, spec)?;
    let mut f_rate = -spec.tau_f * lag.l_f.hessian_quadratic(&state.v_f, &deriv.dv_f)?;
    if !spec.is_diabatic() {
        if deriv.dv_h.len() != spec.n_h || state.v_h.len() != spec.n_h {
            return Err(invalid("full-model rate needs explicit v_h and dv_h"));
        }
        f_rate -= spec.tau_h * lag.l_h.hessian_quadratic(&state.v_h, &deriv.dv_h)?;
    }

    let v_h = if spec.is_diabatic() {
        derived_hidden(&state.v_f, &state.v_d, syn, spec)?
    } else {
        state.v_h.clone()
    };
    let sh = lag.l_h.eval(&v_h)?;
    let g_rate = -spec.delay_coupling() * sh.dot(&syn.phi.t().dot(&syn.xi.t().dot(&deriv.dv_d)));
    Ok((f_rate, g_rate))
}

/// Total energy, LISEM components when applicable, and the rate split,
/// bundled for trajectory recording.
pub fn energy_report(
    state: &NetworkState,
    deriv: &StateDerivative,
    syn: &SynapseState,
    spec: &ModelSpec,
) -> Result<EnergyReport> {
    let lag = LagrangianPair::for_spec(spec);
    let (f_rate, g_rate) = energy_rate_terms(state, deriv, syn, spec, &lag)?;
    match spec.variant {
        Variant::Lisem => {
            let e = energy_lisem(state, syn, spec)?;
            Ok(EnergyReport {
                total: e.total,
                e_assoc: Some(e.e_assoc),
                e_seq: Some(e.e_seq),
                e_c: Some(e.e_c),
                f_rate,
                g_rate,
            })
        }
        _ => Ok(EnergyReport {
            total: energy_total(state, syn, spec)?,
            e_assoc: None,
            e_seq: None,
            e_c: None,
            f_rate,
            g_rate,
        }),
    }
}

/// A converged point of the fast subsystem on the frozen-delay surface.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub state: NetworkState,
    pub iterations: usize,
    pub residual: f64,
}

/// Relax the fast subsystem with the delay trace clamped to `frozen_v_d`:
/// `v_f <- v_f + step dv_f/dt` (plus the hidden update for the full model)
/// until the sup-norm of the derivative falls below `tol`.
pub fn find_instantaneous_fixed_point(
    start: &NetworkState,
    syn: &SynapseState,
    spec: &ModelSpec,
    frozen_v_d: &Array1<f64>,
    step: f64,
    tol: f64,
    max_iters: usize,
) -> Result<FixedPoint> {
    if !(step > 0.0) || !(tol > 0.0) {
        return Err(invalid("step and tol must be positive"));
    }
    if frozen_v_d.len() != spec.n_f {
        return Err(invalid("frozen_v_d length does not match n_f"));
    }
    let mut state = start.clone();
    state.v_d = frozen_v_d.clone();
    if spec.is_diabatic() {
        state.v_h = derived_hidden(&state.v_f, &state.v_d, syn, spec)?;
    }

    let mut residual = f64::INFINITY;
    for iterations in 0..=max_iters {
        let d = rhs_frozen_delay(&state, syn, spec)?;
        residual = d.dv_f.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        if !spec.is_diabatic() {
            residual = d.dv_h.iter().fold(residual, |a, &x| a.max(x.abs()));
        }
        if !residual.is_finite() {
            return Err(Error::ConvergenceFailure {
                residual,
                iterations,
            });
        }
        if residual < tol {
            if spec.is_diabatic() {
                state.v_h = derived_hidden(&state.v_f, &state.v_d, syn, spec)?;
            }
            return Ok(FixedPoint {
                state,
                iterations,
                residual,
            });
        }
        state.v_f = &state.v_f + &(&d.dv_f * step);
        if !spec.is_diabatic() {
            state.v_h = &state.v_h + &(&d.dv_h * step);
        }
    }
    Err(Error::ConvergenceFailure {
        residual,
        iterations: max_iters,
    })
}
