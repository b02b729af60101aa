//! Time-derivative functions for the three model variants, the layer
//! activations with their scalar potentials, and the reference quadrature
//! for the delay signal.
//!
//! Matrix conventions: with `xi` of shape `n_f x n_h` and `phi` of shape
//! `n_h x n_h`, the hidden drive from the delay pathway is
//! `phi^T xi^T v_d` and the feature drive is `xi sigma_h(v_h)`.

use ndarray::Array1;

use crate::error::{invalid, Result};
use crate::model::{ActivationKind, ModelSpec, NetworkState, SynapseState, Variant};

/// A layer activation paired with its scalar potential. The potential's
/// gradient is the activation itself, and its Hessian enters the energy
/// descent rate.
#[derive(Debug, Clone, Copy)]
pub struct Activation {
    pub kind: ActivationKind,
    pub gamma: f64,
}

impl Activation {
    pub fn new(kind: ActivationKind, gamma: f64) -> Self {
        Activation { kind, gamma }
    }

    pub fn eval(&self, v: &Array1<f64>) -> Result<Array1<f64>> {
        match self.kind {
            ActivationKind::Identity => Ok(v.clone()),
            ActivationKind::Tanh => Ok(tanh_activation(v, self.gamma)),
            ActivationKind::Softmax => softmax_activation(v, self.gamma),
        }
    }

    /// Potential value: `1/2 |v|^2` (identity), `sum log(cosh(g v))/g`
    /// (tanh), `logsumexp(g v)/g` (softmax).
    pub fn lagrangian(&self, v: &Array1<f64>) -> Result<f64> {
        match self.kind {
            ActivationKind::Identity => Ok(0.5 * v.dot(v)),
            ActivationKind::Tanh => {
                Ok(v.iter().map(|&x| ln_cosh(self.gamma * x) / self.gamma).sum())
            }
            ActivationKind::Softmax => {
                if v.is_empty() {
                    return Err(invalid("softmax potential of an empty vector"));
                }
                Ok(log_sum_exp_scaled(v, self.gamma) / self.gamma)
            }
        }
    }

    /// Quadratic form `w^T H(L)(v) w` of the potential's Hessian.
    ///
    /// Identity: `|w|^2`. Tanh: `g sum sech^2(g v_i) w_i^2`. Softmax:
    /// `g (sum p_i w_i^2 - (p.w)^2)`, nonnegative by Jensen.
    pub fn hessian_quadratic(&self, v: &Array1<f64>, w: &Array1<f64>) -> Result<f64> {
        match self.kind {
            ActivationKind::Identity => Ok(w.dot(w)),
            ActivationKind::Tanh => Ok(self.gamma
                * v.iter()
                    .zip(w.iter())
                    .map(|(&x, &wi)| {
                        let t = (self.gamma * x).tanh();
                        (1.0 - t * t) * wi * wi
                    })
                    .sum::<f64>()),
            ActivationKind::Softmax => {
                let p = softmax_activation(v, self.gamma)?;
                let pw = p.dot(w);
                let pww = p.iter().zip(w.iter()).map(|(&pi, &wi)| pi * wi * wi).sum::<f64>();
                Ok(self.gamma * (pww - pw * pw))
            }
        }
    }
}

/// Elementwise `tanh(gamma v)`.
pub fn tanh_activation(v: &Array1<f64>, gamma: f64) -> Array1<f64> {
    v.mapv(|x| (gamma * x).tanh())
}

/// `exp(gamma v_i) / sum_j exp(gamma v_j)`, computed with max subtraction
/// so large inputs cannot overflow.
pub fn softmax_activation(v: &Array1<f64>, gamma: f64) -> Result<Array1<f64>> {
    if v.is_empty() {
        return Err(invalid("softmax of an empty vector"));
    }
    let m = v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(gamma * b));
    let mut out = v.mapv(|x| (gamma * x - m).exp());
    let z = out.sum();
    out.mapv_inplace(|x| x / z);
    Ok(out)
}

/// `log sum_j exp(gamma v_j)` with max subtraction.
fn log_sum_exp_scaled(v: &Array1<f64>, gamma: f64) -> f64 {
    let m = v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(gamma * b));
    m + v.iter().map(|&x| (gamma * x - m).exp()).sum::<f64>().ln()
}

/// `log cosh x` without overflowing cosh for large |x|.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Time derivatives of the state. `dv_h` is empty for the diabatic
/// variants, whose hidden layer is algebraic.
#[derive(Debug, Clone)]
pub struct StateDerivative {
    pub dv_f: Array1<f64>,
    pub dv_h: Array1<f64>,
    pub dv_d: Array1<f64>,
}

fn check_shapes(state: &NetworkState, syn: &SynapseState, spec: &ModelSpec) -> Result<()> {
    if syn.n_f() != spec.n_f || syn.n_h() != spec.n_h {
        return Err(invalid(format!(
            "synapse shapes ({}, {}) do not match spec ({}, {})",
            syn.n_f(),
            syn.n_h(),
            spec.n_f,
            spec.n_h
        )));
    }
    if state.v_f.len() != spec.n_f || state.v_d.len() != spec.n_f {
        return Err(invalid(format!(
            "state vectors v_f/v_d must have length {}, got {}/{}",
            spec.n_f,
            state.v_f.len(),
            state.v_d.len()
        )));
    }
    let vh_ok = state.v_h.len() == spec.n_h || (spec.is_diabatic() && state.v_h.is_empty());
    if !vh_ok {
        return Err(invalid(format!(
            "v_h must have length {}, got {}",
            spec.n_h,
            state.v_h.len()
        )));
    }
    Ok(())
}

/// Algebraic hidden drive for the diabatic variants:
/// `sqrt(alpha_s) xi^T sigma_f(v_f) + c phi^T xi^T v_d` with the
/// variant's delay coupling `c`.
pub fn derived_hidden(
    v_f: &Array1<f64>,
    v_d: &Array1<f64>,
    syn: &SynapseState,
    spec: &ModelSpec,
) -> Result<Array1<f64>> {
    let sf = spec.sigma_f().eval(v_f)?;
    let feed = syn.xi.t().dot(&sf) * spec.alpha_s.sqrt();
    let delayed = syn.phi.t().dot(&syn.xi.t().dot(v_d)) * spec.delay_coupling();
    Ok(feed + delayed)
}

/// Full three-timescale dynamics with explicit hidden layer:
///
/// ```text
/// tau_f dv_f/dt = sqrt(alpha_s) xi sigma_h(v_h) - v_f
/// tau_h dv_h/dt = sqrt(alpha_s) xi^T sigma_f(v_f) + alpha_c phi^T xi^T v_d - v_h
/// tau_d dv_d/dt = sigma_f(v_f) - v_d
/// ```
pub fn gsemm_rhs(
    state: &NetworkState,
    syn: &SynapseState,
    spec: &ModelSpec,
    sigma_f: &Activation,
    sigma_h: &Activation,
) -> Result<StateDerivative> {
    check_shapes(state, syn, spec)?;
    if state.v_h.len() != spec.n_h {
        return Err(invalid("full dynamics need an explicit v_h"));
    }
    let sf = sigma_f.eval(&state.v_f)?;
    let sh = sigma_h.eval(&state.v_h)?;
    let root_as = spec.alpha_s.sqrt();

    let dv_f = (syn.xi.dot(&sh) * root_as - &state.v_f) / spec.tau_f;
    let hidden_drive = syn.xi.t().dot(&sf) * root_as
        + syn.phi.t().dot(&syn.xi.t().dot(&state.v_d)) * spec.alpha_c;
    let dv_h = (hidden_drive - &state.v_h) / spec.tau_h;
    let dv_d = (sf - &state.v_d) / spec.tau_d;
    Ok(StateDerivative { dv_f, dv_h, dv_d })
}

/// Diabatic tanh-feature / linear-hidden dynamics:
///
/// ```text
/// tau_f dv_f/dt = alpha_s xi xi^T tanh(g v_f)
///               + (alpha_c / n_f) xi phi^T xi^T v_d - v_f
/// tau_d dv_d/dt = tanh(g v_f) - v_d
/// ```
///
/// The sequence term reads the delay trace through normalized overlaps
/// (see [`ModelSpec::delay_coupling`]); it is exactly
/// `sqrt(alpha_s) xi v_h` at the derived hidden state.
pub fn lisem_rhs(
    state: &NetworkState,
    syn: &SynapseState,
    spec: &ModelSpec,
) -> Result<StateDerivative> {
    if spec.variant != Variant::Lisem {
        return Err(invalid("lisem_rhs called with a non-LISEM spec"));
    }
    check_shapes(state, syn, spec)?;
    let u = tanh_activation(&state.v_f, spec.gamma);
    let assoc = syn.xi.dot(&syn.xi.t().dot(&u)) * spec.alpha_s;
    let seq_gain = spec.alpha_s.sqrt() * spec.delay_coupling();
    let seq = syn.xi.dot(&syn.phi.t().dot(&syn.xi.t().dot(&state.v_d))) * seq_gain;
    let dv_f = (assoc + seq - &state.v_f) / spec.tau_f;
    let dv_d = (u - &state.v_d) / spec.tau_d;
    Ok(StateDerivative {
        dv_f,
        dv_h: Array1::zeros(0),
        dv_d,
    })
}

/// Diabatic identity-feature / softmax-hidden dynamics. The hidden drive
/// `h = sqrt(alpha_s) xi^T v_f + alpha_c phi^T xi^T v_d` is exposed as the
/// derived `v_h`:
///
/// ```text
/// tau_f dv_f/dt = sqrt(alpha_s) xi softmax_g(h) - v_f
/// tau_d dv_d/dt = v_f - v_d
/// ```
pub fn dsem_rhs(
    state: &NetworkState,
    syn: &SynapseState,
    spec: &ModelSpec,
) -> Result<StateDerivative> {
    if spec.variant != Variant::Dsem {
        return Err(invalid("dsem_rhs called with a non-DSEM spec"));
    }
    check_shapes(state, syn, spec)?;
    let h = derived_hidden(&state.v_f, &state.v_d, syn, spec)?;
    let p = softmax_activation(&h, spec.gamma)?;
    let dv_f = (syn.xi.dot(&p) * spec.alpha_s.sqrt() - &state.v_f) / spec.tau_f;
    let dv_d = (&state.v_f - &state.v_d) / spec.tau_d;
    Ok(StateDerivative {
        dv_f,
        dv_h: Array1::zeros(0),
        dv_d,
    })
}

/// Variant dispatch.
pub fn rhs(state: &NetworkState, syn: &SynapseState, spec: &ModelSpec) -> Result<StateDerivative> {
    match spec.variant {
        Variant::FullGsemm { .. } => gsemm_rhs(state, syn, spec, &spec.sigma_f(), &spec.sigma_h()),
        Variant::Lisem => lisem_rhs(state, syn, spec),
        Variant::Dsem => dsem_rhs(state, syn, spec),
    }
}

/// Same as [`rhs`] but with the delay trace clamped (`dv_d = 0`), which
/// freezes the energy surface.
pub fn rhs_frozen_delay(
    state: &NetworkState,
    syn: &SynapseState,
    spec: &ModelSpec,
) -> Result<StateDerivative> {
    let mut d = rhs(state, syn, spec)?;
    d.dv_d.fill(0.0);
    Ok(d)
}

/// Reference evaluation of the delay trace as an explicit exponential
/// convolution of the feature history,
/// `(1/tau_d) integral_0^inf hist(t - x) exp(-x/tau_d) dx`.
///
/// `history` holds uniform samples of `sigma_f(v_f)` at spacing `dt`
/// starting at time 0, and `t` must lie on that grid. The integral is
/// evaluated by the trapezoid rule with the kernel truncated at
/// `x = min(t, 20 tau_d)`: history before time 0 is taken to be zero,
/// matching a delay trace initialized at zero.
pub fn delay_convolution_reference(
    history: &[Array1<f64>],
    dt: f64,
    tau_d: f64,
    t: f64,
) -> Result<Array1<f64>> {
    if history.is_empty() {
        return Err(invalid("delay convolution needs a nonempty history"));
    }
    if !(tau_d > 0.0) || !(dt > 0.0) {
        return Err(invalid("tau_d and dt must be positive"));
    }
    let steps = (t / dt).round() as usize;
    if (t - steps as f64 * dt).abs() > 1e-9 * dt.max(1.0) || steps >= history.len() {
        return Err(invalid(format!(
            "t = {t} is not a sampled time within the history"
        )));
    }

    let n = history[0].len();
    let mut acc = Array1::zeros(n);
    let sampled_end = t.min(20.0 * tau_d);
    let last = (sampled_end / dt).floor() as usize;
    for k in 0..=last {
        let x = k as f64 * dt;
        let weight = (-x / tau_d).exp() / tau_d;
        let trap = if k == 0 || k == last { 0.5 } else { 1.0 };
        acc = acc + &history[steps - k] * (weight * trap * dt);
    }
    Ok(acc)
}
