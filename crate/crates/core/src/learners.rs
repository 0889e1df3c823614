//! The online learners inside the sequential tests.
//!
//! Two learners run per audit step. A one-dimensional Online Newton Step
//! tunes the betting fraction λ on the exp-concave losses
//! `ℓ_t(λ) = −log(1 + λ[v_t − τ])`, achieving logarithmic regret. A
//! kernelized online gradient ascent tunes the witness function f in the
//! RKHS unit ball on the linear losses `h_t(f) = ⟨f, K(X_t,·) − K(Y_t,·)⟩`,
//! achieving √t regret.
//!
//! The witness function itself cannot be stored, so [`OgaState`] maintains
//! the closed-form expansion
//!
//! ```text
//! f_{t+1} = Σ_{i≤t} (2[K(X_i,·) − K(Y_i,·)]/√M_i) · Π_{j=i..t} γ_j
//! ```
//!
//! through per-step scalars only: cumulative squared gradient norms `M_i`,
//! projection shrink factors `γ_i`, realized inner products `v_i`, and a
//! recursively maintained squared norm. Predictions reduce to cross-kernel
//! sums against the history.
//!
//! [`maximize_log_wealth`] supplies the inner 1-D concave maximization used
//! by the e-process engine.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::{cross_kernel_unchecked, rbf_unchecked, KernelConfig, Point};
use crate::math;

/// Online Newton Step restricted to an interval `[a, b]` containing 0.
///
/// Initialization follows `λ₁ = 0`, `β = ½·min{1/(4L(b−a)), 1}`,
/// `A₀ = 1/(β²(b−a)²)`; each step accumulates the squared gradient and moves
/// `λ` by `g/(β·A)` before clipping back to the interval.
#[derive(Debug, Clone)]
pub struct Ons1dState {
    lo: f64,
    hi: f64,
    lambda: f64,
    accum: f64,
    beta: f64,
    lipschitz: f64,
    steps: u64,
}

impl Ons1dState {
    pub fn init(lo: f64, hi: f64, lipschitz: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi && lo <= 0.0 && 0.0 <= hi) {
            return Err(Error::InvalidInterval { lo, hi });
        }
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::InvalidParameter {
                name: "lipschitz",
                value: lipschitz,
            });
        }
        let width = hi - lo;
        let beta = 0.5 * f64::min(1.0 / (4.0 * lipschitz * width), 1.0);
        let accum = 1.0 / (beta * beta * width * width);
        Ok(Ons1dState {
            lo,
            hi,
            lambda: 0.0,
            accum,
            beta,
            lipschitz,
            steps: 0,
        })
    }

    /// The current iterate; always inside `[a, b]`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn accumulator(&self) -> f64 {
        self.accum
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Consumes the realized gradient of the step-t loss at the current λ.
    pub fn step(&mut self, g: f64) -> Result<()> {
        if !g.is_finite() {
            return Err(Error::NonFinite("gradient"));
        }
        self.accum += g * g;
        self.lambda = (self.lambda - g / (self.beta * self.accum)).clamp(self.lo, self.hi);
        self.steps += 1;
        Ok(())
    }
}

/// Kernelized online gradient ascent over the RKHS unit ball, stored in
/// closed form (see module docs). Histories grow by one scalar row per step;
/// prediction is O(t) in the history length.
#[derive(Debug, Clone)]
pub struct OgaState {
    kernel: KernelConfig,
    dim: Option<usize>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Current expansion weight of `K(x_i,·) − K(y_i,·)` in f (absorbs the
    /// step size and every later shrink factor); 0 for zero-gradient steps.
    coeff: Vec<f64>,
    m: Vec<f64>,
    gamma: Vec<f64>,
    v: Vec<f64>,
    norm_sq_pre_projection: Vec<f64>,
    norm_sq: f64,
}

impl OgaState {
    /// Fresh learner at the zero function.
    pub fn new(kernel: KernelConfig) -> Self {
        OgaState {
            kernel,
            dim: None,
            xs: Vec::new(),
            ys: Vec::new(),
            coeff: Vec::new(),
            m: Vec::new(),
            gamma: Vec::new(),
            v: Vec::new(),
            norm_sq_pre_projection: Vec::new(),
            norm_sq: 0.0,
        }
    }

    pub fn kernel(&self) -> &KernelConfig {
        &self.kernel
    }

    /// Number of observed pairs.
    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Cumulative squared gradient norms `M_1..M_t`.
    pub fn cumulative_grad_norms(&self) -> &[f64] {
        &self.m
    }

    /// Shrink factors `γ_1..γ_t`, each in (0, 1].
    pub fn shrink_factors(&self) -> &[f64] {
        &self.gamma
    }

    /// Realized inner products `v_1..v_t`.
    pub fn realized_values(&self) -> &[f64] {
        &self.v
    }

    /// Pre-projection squared norms `‖f_i + η_i∇h_i‖²` per step.
    pub fn pre_projection_norms(&self) -> &[f64] {
        &self.norm_sq_pre_projection
    }

    /// `‖f_{t+1}‖²` maintained by the recursion; ≤ 1 up to rounding.
    pub fn witness_norm_sq(&self) -> f64 {
        self.norm_sq
    }

    fn check_pair(&self, x: &Point, y: &Point) -> Result<()> {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: y.dim(),
            });
        }
        if let Some(d) = self.dim {
            if x.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: x.dim(),
                });
            }
        }
        Ok(())
    }

    /// `v_t = ⟨f_t, K(x_t,·) − K(y_t,·)⟩`, evaluated against the stored
    /// history; 0 before the first update. Always in [−2, 2] since
    /// `‖f_t‖ ≤ 1` and the gradient norm is at most 2.
    pub fn predict(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_pair(x, y)?;
        let Some(d) = self.dim else {
            return Ok(0.0);
        };
        let bw = self.kernel.bandwidth();
        let mut acc = 0.0;
        for (i, &c) in self.coeff.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let xi = &self.xs[i * d..(i + 1) * d];
            let yi = &self.ys[i * d..(i + 1) * d];
            acc += c * cross_kernel_unchecked(xi, yi, x.coords(), y.coords(), bw);
        }
        Ok(acc)
    }

    /// Absorbs the step-t pair. `v` must be the value `predict` returned for
    /// the same pair against the current state; it feeds the norm recursion.
    ///
    /// A zero-gradient pair (x_t = y_t, or close enough that K rounds to 1)
    /// leaves f unchanged: the step size is 0/0 there, so the update is
    /// skipped and γ_t = 1.
    pub fn update(&mut self, x: Point, y: Point, v: f64) -> Result<()> {
        self.check_pair(&x, &y)?;
        if !v.is_finite() {
            return Err(Error::NonFinite("realized inner product"));
        }
        let bw = self.kernel.bandwidth();
        let k_xy = rbf_unchecked(x.coords(), y.coords(), bw);
        // ‖K(x,·)−K(y,·)‖² = K(x,x) − 2K(x,y) + K(y,y) = 2(1 − K(x,y)) here
        let grad_norm_sq = 2.0 * (1.0 - k_xy);
        let m_prev = self.m.last().copied().unwrap_or(0.0);

        let (m_t, gamma_t, coeff_t, pre_sq) = if grad_norm_sq <= 0.0 {
            (m_prev, 1.0, 0.0, self.norm_sq)
        } else {
            let m_t = m_prev + grad_norm_sq;
            let pre_sq =
                (self.norm_sq + 4.0 * v / math::sqrt(m_t) + 4.0 * grad_norm_sq / m_t).max(0.0);
            let gamma_t = if pre_sq > 1.0 {
                1.0 / math::sqrt(pre_sq)
            } else {
                1.0
            };
            let coeff_t = gamma_t * 2.0 / math::sqrt(m_t);
            (m_t, gamma_t, coeff_t, pre_sq)
        };

        if gamma_t < 1.0 {
            for c in self.coeff.iter_mut() {
                *c *= gamma_t;
            }
        }
        self.dim = Some(x.dim());
        self.xs.extend_from_slice(x.coords());
        self.ys.extend_from_slice(y.coords());
        self.coeff.push(coeff_t);
        self.m.push(m_t);
        self.gamma.push(gamma_t);
        self.v.push(v);
        self.norm_sq_pre_projection.push(pre_sq);
        self.norm_sq = gamma_t * gamma_t * pre_sq;
        Ok(())
    }
}

/// Realized e-values E_1..E_t; append-only, entries nonnegative.
#[derive(Debug, Clone, Default)]
pub struct EvalueHistory {
    values: Vec<f64>,
}

impl EvalueHistory {
    pub fn new() -> Self {
        EvalueHistory { values: Vec::new() }
    }

    pub fn push(&mut self, e: f64) -> Result<()> {
        if !(e.is_finite() && e >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "e-value",
                value: e,
            });
        }
        self.values.push(e);
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `Σ_i log(1 + β(E_i − 1))`: the log-wealth of the constant-β betting
/// sequence. Concave in β; −∞ (as a representable sentinel) when β = 1 and
/// some E_i = 0.
pub fn log_wealth_at_beta(history: &EvalueHistory, beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
        });
    }
    let mut acc = 0.0;
    for &e in history.values() {
        acc += math::ln_1p(beta * (e - 1.0));
    }
    Ok(acc)
}

fn log_wealth_derivative(values: &[f64], beta: f64) -> f64 {
    let mut acc = 0.0;
    for &e in values {
        acc += (e - 1.0) / (1.0 + beta * (e - 1.0));
    }
    acc
}

/// Maximizes `β ↦ Σ log(1 + β(E_i − 1))` over [0, 1].
///
/// Boundary optima are returned exactly; interior optima come from bisecting
/// the monotone derivative to an interval of width 1e−12. When some E_i = 0
/// the search is confined to [0, 1 − 1e−12] so the objective stays finite.
pub fn maximize_log_wealth(history: &EvalueHistory) -> Result<(f64, f64)> {
    if history.is_empty() {
        return Err(Error::EmptyInput("e-value history"));
    }
    let values = history.values();
    if log_wealth_derivative(values, 0.0) <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let has_zero = values.contains(&0.0);
    let upper = if has_zero { 1.0 - 1e-12 } else { 1.0 };
    if log_wealth_derivative(values, upper) >= 0.0 {
        return Ok((upper, log_wealth_at_beta(history, upper)?));
    }
    let mut lo = 0.0;
    let mut hi = upper;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if log_wealth_derivative(values, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = 0.5 * (lo + hi);
    Ok((beta, log_wealth_at_beta(history, beta)?))
}
