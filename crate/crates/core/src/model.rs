//! Model parameters, equilibria and right-hand sides.
//!
//! The reduced system tracks three densities:
//!
//! ```text
//! u' = r1 u (1 - a1 u) - b1 r1 u(t-s) v(t-s)
//! v' = r2 v (1 - a2 v) + b2 r2 w
//! w' = u v - (mu + r) w
//! ```
//!
//! where `w` replaces the exponentially weighted memory of the product `uv`.
//! The memory integral itself is available through [`distributed_w_oracle`]
//! and is used to cross-check the three-variable reduction.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Rate, capacity and delay constants of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Growth rate of `u`.
    pub r1: T,
    /// Growth rate of `v`.
    pub r2: T,
    /// Inverse carrying capacity of `u`.
    pub a1: T,
    /// Inverse carrying capacity of `v`.
    pub a2: T,
    /// Intervening rate of `v` on `u` (any sign).
    pub b1: T,
    /// Intervening rate of `u` on `v` (any sign).
    pub b2: T,
    /// Loss rate of the memory kernel.
    pub mu: T,
    /// Exponential kernel rate.
    pub r: T,
    /// Discrete delay in the `u` equation.
    pub s: T,
}

impl<T: Scalar> ModelParams<T> {
    /// Names accepted by [`ModelParams::get`] and [`ModelParams::set`].
    pub const FIELD_NAMES: [&'static str; 9] = ["r1", "r2", "a1", "a2", "b1", "b2", "mu", "r", "s"];

    /// Benchmark parameter set with the positive equilibrium `(1, 1, 1/6)` and
    /// a supercritical Hopf bifurcation near `s = 2.015`.
    pub fn benchmark() -> Self {
        Self {
            r1: T::lit(0.5),
            r2: T::lit(0.5),
            a1: T::lit(0.05),
            a2: T::lit(1.045),
            b1: T::lit(0.95),
            b2: T::lit(0.27),
            mu: T::lit(2.0),
            r: T::lit(4.0),
            s: T::lit(2.0),
        }
    }

    pub fn with_delay(mut self, s: T) -> Self {
        self.s = s;
        self
    }

    /// Total decay rate `mu + r` of the memory variable.
    #[inline]
    pub fn kappa(&self) -> T {
        self.mu + self.r
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r1", self.r1),
            ("r2", self.r2),
            ("a1", self.a1),
            ("a2", self.a2),
            ("r", self.r),
        ];
        for (name, value) in positive {
            if !value.is_finite() || value <= T::zero() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        for (name, value) in [("mu", self.mu), ("s", self.s)] {
            if !value.is_finite() || value < T::zero() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and >= 0, got {value}"),
                });
            }
        }
        for (name, value) in [("b1", self.b1), ("b2", self.b2)] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {value}"),
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<T> {
        Some(match name {
            "r1" => self.r1,
            "r2" => self.r2,
            "a1" => self.a1,
            "a2" => self.a2,
            "b1" => self.b1,
            "b2" => self.b2,
            "mu" => self.mu,
            "r" => self.r,
            "s" => self.s,
            _ => return None,
        })
    }

    /// Sets the field called `name`; returns `false` for unknown names.
    pub fn set(&mut self, name: &str, value: T) -> bool {
        let slot = match name {
            "r1" => &mut self.r1,
            "r2" => &mut self.r2,
            "a1" => &mut self.a1,
            "a2" => &mut self.a2,
            "b1" => &mut self.b1,
            "b2" => &mut self.b2,
            "mu" => &mut self.mu,
            "r" => &mut self.r,
            "s" => &mut self.s,
            _ => return false,
        };
        *slot = value;
        true
    }
}

/// Point of the reduced phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State<T> {
    pub u: T,
    pub v: T,
    pub w: T,
}

impl<T: Scalar> State<T> {
    #[inline]
    pub const fn new(u: T, v: T, w: T) -> Self {
        Self { u, v, w }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn to_array(self) -> [T; 3] {
        [self.u, self.v, self.w]
    }

    #[inline]
    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.w.is_finite()
    }

    /// Max-norm of the state.
    #[inline]
    pub fn max_abs(&self) -> T {
        self.u.abs().max(self.v.abs()).max(self.w.abs())
    }

    /// State whose memory variable sits on its slow manifold, `w = u v / (mu + r)`.
    pub fn consistent(u: T, v: T, params: &ModelParams<T>) -> Self {
        Self::new(u, v, u * v / params.kappa())
    }
}

impl<T: Scalar> Add for State<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.u + rhs.u, self.v + rhs.v, self.w + rhs.w)
    }
}

impl<T: Scalar> Sub for State<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.u - rhs.u, self.v - rhs.v, self.w - rhs.w)
    }
}

impl<T: Scalar> Mul<T> for State<T> {
    type Output = Self;
    #[inline]
    fn mul(self, k: T) -> Self {
        Self::new(self.u * k, self.v * k, self.w * k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquilibriumLabel {
    E0,
    E1,
    E2,
    EStar,
}

impl EquilibriumLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            EquilibriumLabel::E0 => "E0",
            EquilibriumLabel::E1 => "E1",
            EquilibriumLabel::E2 => "E2",
            EquilibriumLabel::EStar => "EStar",
        }
    }
}

impl fmt::Display for EquilibriumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Undetermined,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "Stable",
            Stability::Unstable => "Unstable",
            Stability::Undetermined => "Undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium<T> {
    pub label: EquilibriumLabel,
    /// Location of the equilibrium. For `EStar` with a vanishing denominator
    /// `a1 a2 (mu + r) + b1 b2` this is the zero state and `exists` is false.
    pub point: State<T>,
    pub exists: bool,
    pub local_stability: Stability,
}

/// Existence predicate for the positive equilibrium:
/// `b1 < a2` and `a1 a2 (mu + r) > max(-b1 b2, -a2 b2)`.
pub fn positive_equilibrium_exists<T: Scalar>(params: &ModelParams<T>) -> bool {
    let lhs = params.a1 * params.a2 * params.kappa();
    let bound = (-params.b1 * params.b2).max(-params.a2 * params.b2);
    params.b1 < params.a2 && lhs > bound
}

/// The four equilibria `E0, E1, E2, E*` in that order.
///
/// `E*` is always returned; its `exists` flag follows
/// [`positive_equilibrium_exists`]. Its stability is left `Undetermined`
/// here since it depends on the delay (see [`crate::stability`]).
pub fn equilibria<T: Scalar>(params: &ModelParams<T>) -> Vec<Equilibrium<T>> {
    let zero = T::zero();
    let one = T::one();
    let k = params.kappa();

    let e0 = Equilibrium {
        label: EquilibriumLabel::E0,
        point: State::zero(),
        exists: true,
        // characteristic roots r1, r2 > 0
        local_stability: Stability::Unstable,
    };

    let e1 = Equilibrium {
        label: EquilibriumLabel::E1,
        point: State::new(one / params.a1, zero, zero),
        exists: true,
        local_stability: if k + params.b2 / params.a1 > zero {
            Stability::Unstable
        } else {
            Stability::Undetermined
        },
    };

    let e2 = Equilibrium {
        label: EquilibriumLabel::E2,
        point: State::new(zero, one / params.a2, zero),
        exists: true,
        local_stability: if params.b1 > params.a2 {
            Stability::Stable
        } else if params.b1 < params.a2 {
            Stability::Unstable
        } else {
            Stability::Undetermined
        },
    };

    let denom = params.a1 * params.a2 * k + params.b1 * params.b2;
    let estar = if denom == zero {
        Equilibrium {
            label: EquilibriumLabel::EStar,
            point: State::zero(),
            exists: false,
            local_stability: Stability::Undetermined,
        }
    } else {
        let u = (params.a2 - params.b1) * k / denom;
        let v = (params.a1 * k + params.b2) / denom;
        Equilibrium {
            label: EquilibriumLabel::EStar,
            point: State::new(u, v, u * v / k),
            exists: positive_equilibrium_exists(params),
            local_stability: Stability::Undetermined,
        }
    };

    vec![e0, e1, e2, estar]
}

/// The positive equilibrium, or [`Error::MissingPositiveEquilibrium`].
pub fn positive_equilibrium<T: Scalar>(params: &ModelParams<T>) -> Result<Equilibrium<T>> {
    equilibria(params)
        .into_iter()
        .find(|e| e.label == EquilibriumLabel::EStar && e.exists)
        .ok_or(Error::MissingPositiveEquilibrium)
}

/// Right-hand side of the reduced system. Only the `u` equation reads the
/// delayed state.
#[inline]
pub fn reduced_rhs<T: Scalar>(current: &State<T>, delayed: &State<T>, params: &ModelParams<T>) -> State<T> {
    let one = T::one();
    let du = params.r1 * current.u * (one - params.a1 * current.u) - params.b1 * params.r1 * delayed.u * delayed.v;
    let dv = params.r2 * current.v * (one - params.a2 * current.v) + params.b2 * params.r2 * current.w;
    let dw = current.u * current.v - params.kappa() * current.w;
    State::new(du, dv, dw)
}

/// One `(t, u, v)` record of a past trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UvSample<T> {
    pub t: T,
    pub u: T,
    pub v: T,
}

/// Value of the memory integral together with the bound on the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryIntegral<T> {
    pub value: T,
    /// `exp(-(mu + r) T) sup|uv| / (mu + r)` for truncation horizon `T`.
    pub truncation_bound: T,
}

/// Evaluates `w(t) = ∫_0^T exp(-(mu + r) τ) u(t-τ) v(t-τ) dτ` by quadrature over
/// a recorded history ending at `t`.
///
/// `history` must be sorted by time; the last sample is the evaluation time
/// and the span `T` must be at least `30 / (mu + r)`. Samples need not be
/// uniformly spaced. On each interval the product `uv` is interpolated
/// linearly and integrated exactly against the exponential weight, so a
/// constant history reproduces `uv / (mu + r)` up to the truncation tail.
pub fn distributed_w_oracle<T: Scalar>(history: &[UvSample<T>], params: &ModelParams<T>) -> Result<MemoryIntegral<T>> {
    let k = params.kappa();
    let required = T::lit(30.0) / k;
    let (first, last) = match (history.first(), history.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => {
            return Err(Error::InsufficientHistory {
                required: required.as_f64(),
                available: 0.0,
            })
        }
    };
    let span = last.t - first.t;
    // allow rounding in the caller's grid arithmetic
    if span < required * (T::one() - T::lit(1e-9)) {
        return Err(Error::InsufficientHistory {
            required: required.as_f64(),
            available: span.as_f64(),
        });
    }
    if history.windows(2).any(|p| p[1].t < p[0].t) {
        return Err(Error::InvalidArgument("history samples must be sorted by time".into()));
    }

    let t = last.t;
    let lags = history.iter().rev().map(|p| (t - p.t, p.u * p.v));
    Ok(exponential_memory(k, lags))
}

/// Product-trapezoid quadrature of `∫ exp(-k τ) g(τ) dτ` from samples `(τ, g)`
/// with `τ` increasing from 0.
pub(crate) fn exponential_memory<T: Scalar>(k: T, mut lags: impl Iterator<Item = (T, T)>) -> MemoryIntegral<T> {
    let zero = T::zero();
    let Some((mut tau_a, mut g_a)) = lags.next() else {
        return MemoryIntegral {
            value: zero,
            truncation_bound: zero,
        };
    };
    let mut sum = zero;
    let mut sup = g_a.abs();
    for (tau_b, g_b) in lags {
        let len = tau_b - tau_a;
        if len > zero {
            let x = k * len;
            let decay = (-(k * tau_a)).exp();
            // ∫_0^L e^{-kσ} dσ and ∫_0^L e^{-kσ} σ dσ, written to avoid cancellation for small kL
            let m0 = -(-x).exp_m1() / k;
            let m1 = (-(-x).exp_m1() - x * (-x).exp()) / (k * k);
            sum = sum + decay * (g_a * m0 + (g_b - g_a) / len * m1);
        }
        sup = sup.max(g_b.abs());
        tau_a = tau_b;
        g_a = g_b;
    }
    MemoryIntegral {
        value: sum,
        truncation_bound: (-(k * tau_a)).exp() * sup / k,
    }
}
