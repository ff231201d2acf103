//! Method-of-steps simulation of the reduced system and limit-cycle metrics.
//!
//! The step is `h = s / N`, so every delayed lookup `t − s` at an RK4 stage
//! lands on a stored node or exactly halfway between two nodes. Half-node
//! values come from the cubic Hermite interpolant built from stored states and
//! derivatives, which keeps the scheme fourth order.

use std::io::{self, Write};

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::model::{reduced_rhs, ModelParams, State};
use crate::scalar::Scalar;

/// Abort when any component exceeds this magnitude.
pub const DIVERGENCE_BOUND: f64 = 1e6;
/// Max deviation from the equilibrium below which a run has converged.
pub const CONVERGENCE_TOL: f64 = 1e-3;
/// Minimum prominence of a detected peak.
pub const PEAK_PROMINENCE: f64 = 1e-6;
/// Default fraction of a run discarded as transient.
pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.5;
/// Number of periods a sustained oscillation must show.
pub const MIN_PERIODS: usize = 5;
/// Relative spread (standard deviation over mean) allowed between periods.
pub const PERIOD_SPREAD_TOL: f64 = 0.01;

/// How `w(0)` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum W0Policy<T> {
    /// `w(0) = u(0) v(0) / (mu + r)`.
    Consistent,
    Explicit(T),
}

#[derive(Debug, Clone, PartialEq)]
pub enum HistoryKind<T> {
    Constant(State<T>),
    /// `(t, state)` samples covering `[-s, 0]`, sorted by time. Linear
    /// interpolation in between; constant extension before the first sample.
    Sampled(Vec<(T, State<T>)>),
}

/// Initial function on `[-s, 0]`. Only `u` and `v` of the history are ever
/// read as delayed values; `w` matters at `t = 0` through [`W0Policy`].
#[derive(Debug, Clone, PartialEq)]
pub struct HistorySpec<T> {
    pub kind: HistoryKind<T>,
    pub w0_policy: W0Policy<T>,
}

impl<T: Scalar> HistorySpec<T> {
    /// Constant history at `(u0, v0)` with a consistent `w(0)`.
    pub fn constant(u0: T, v0: T) -> Self {
        Self {
            kind: HistoryKind::Constant(State::new(u0, v0, T::zero())),
            w0_policy: W0Policy::Consistent,
        }
    }

    /// Constant history sitting exactly at `point`.
    pub fn at_point(point: State<T>) -> Self {
        Self {
            kind: HistoryKind::Constant(point),
            w0_policy: W0Policy::Explicit(point.w),
        }
    }

    fn validate(&self, s: T) -> Result<()> {
        if let HistoryKind::Sampled(samples) = &self.kind {
            let tol = T::lit(1e-9) * T::one().max(s);
            let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
                return Err(Error::InvalidArgument("sampled history is empty".into()));
            };
            if first.0 > -s + tol || last.0.abs() > tol {
                return Err(Error::InvalidArgument(format!(
                    "sampled history covers [{}, {}] but [-{s}, 0] is required",
                    first.0, last.0
                )));
            }
            if samples.windows(2).any(|p| p[1].0 <= p[0].0) {
                return Err(Error::InvalidArgument(
                    "history samples must be strictly increasing in time".into(),
                ));
            }
            if samples.iter().any(|(t, x)| !t.is_finite() || !x.is_finite()) {
                return Err(Error::InvalidArgument("history samples must be finite".into()));
            }
        }
        Ok(())
    }

    /// History value at `t <= 0`.
    pub fn value_at(&self, t: T) -> State<T> {
        match &self.kind {
            HistoryKind::Constant(x) => *x,
            HistoryKind::Sampled(samples) => {
                let first = samples[0];
                if t <= first.0 {
                    return first.1;
                }
                let idx = samples.partition_point(|(ts, _)| *ts <= t);
                if idx >= samples.len() {
                    return samples[samples.len() - 1].1;
                }
                let (ta, xa) = samples[idx - 1];
                let (tb, xb) = samples[idx];
                let theta = (t - ta) / (tb - ta);
                xa + (xb - xa) * theta
            }
        }
    }

    /// State at `t = 0` with `w` set by the policy.
    pub fn initial_state(&self, params: &ModelParams<T>) -> State<T> {
        let x = self.value_at(T::zero());
        let w = match self.w0_policy {
            W0Policy::Consistent => x.u * x.v / params.kappa(),
            W0Policy::Explicit(w) => w,
        };
        State::new(x.u, x.v, w)
    }
}

/// Uniformly sampled solution on `[t0, t_end]` with cubic Hermite dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub t0: T,
    pub t_end: T,
    pub step: T,
    pub states: Vec<State<T>>,
    /// Right-hand side at each stored node; with `states` this is the dense
    /// output data.
    pub derivatives: Vec<State<T>>,
}

impl<T: Scalar> Trajectory<T> {
    /// Number of stored intervals.
    pub fn intervals(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    #[inline]
    pub fn time(&self, i: usize) -> T {
        self.t0 + self.step * T::from_usize_lossy(i)
    }

    pub fn last(&self) -> State<T> {
        *self.states.last().expect("trajectory has at least one node")
    }

    /// Dense evaluation; `None` outside `[t0, t_end]`.
    pub fn eval(&self, t: T) -> Option<State<T>> {
        let x = (t - self.t0) / self.step;
        if !(x >= T::zero()) || x > T::from_usize_lossy(self.intervals()) {
            return None;
        }
        let idx = x.floor().to_usize()?;
        let theta = x - x.floor();
        if theta == T::zero() || idx == self.intervals() {
            return Some(self.states[idx.min(self.intervals())]);
        }
        Some(hermite(
            &self.states[idx],
            &self.derivatives[idx],
            &self.states[idx + 1],
            &self.derivatives[idx + 1],
            self.step,
            theta,
        ))
    }

    /// Writes `t,u,v,w` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,u,v,w")?;
        for (i, x) in self.states.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", self.time(i), x.u, x.v, x.w)?;
        }
        Ok(())
    }
}

#[inline]
fn hermite<T: Scalar>(x0: &State<T>, f0: &State<T>, x1: &State<T>, f1: &State<T>, h: T, theta: T) -> State<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = two * t3 - three * t2 + one;
    let h10 = t3 - two * t2 + theta;
    let h01 = -two * t3 + three * t2;
    let h11 = t3 - t2;
    *x0 * h00 + *f0 * (h10 * h) + *x1 * h01 + *f1 * (h11 * h)
}

#[inline]
fn hermite_mid<T: Scalar>(x0: &State<T>, f0: &State<T>, x1: &State<T>, f1: &State<T>, h: T) -> State<T> {
    (*x0 + *x1) * T::lit(0.5) + (*f0 - *f1) * (h * T::lit(0.125))
}

struct StepPlan<T> {
    h: T,
    /// Delay in steps; zero means no delay.
    lag: usize,
    n: usize,
}

fn plan<T: Scalar>(params: &ModelParams<T>, t_end: T, steps_per_delay: usize) -> Result<StepPlan<T>> {
    params.validate()?;
    if steps_per_delay < 20 {
        return Err(Error::InvalidArgument(format!(
            "steps_per_delay must be at least 20, got {steps_per_delay}"
        )));
    }
    if !(t_end > T::zero()) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    let (h, lag) = if params.s > T::zero() {
        (params.s / T::from_usize_lossy(steps_per_delay), steps_per_delay)
    } else {
        (T::one() / T::from_usize_lossy(steps_per_delay), 0)
    };
    let n = (t_end / h)
        .round()
        .to_usize()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::InvalidArgument("t_end is shorter than one step".into()))?;
    Ok(StepPlan { h, lag, n })
}

fn diverged<T: Scalar>(x: &State<T>) -> bool {
    !x.is_finite() || x.max_abs() > T::lit(DIVERGENCE_BOUND)
}

/// Delayed `(u, v)` lookups at node `i − lag` plus `fraction` of a step.
struct DelayLookup<'a, T> {
    history: &'a HistorySpec<T>,
    h: T,
    lag: usize,
}

impl<T: Scalar> DelayLookup<'_, T> {
    /// Value at node offset `i - lag` (`half = false`) or halfway to the next
    /// node (`half = true`).
    fn at(&self, i: usize, half: bool, states: &[State<T>], derivs: &[State<T>]) -> State<T> {
        if i >= self.lag {
            let j = i - self.lag;
            if half {
                hermite_mid(&states[j], &derivs[j], &states[j + 1], &derivs[j + 1], self.h)
            } else {
                states[j]
            }
        } else {
            let back = T::from_usize_lossy(self.lag - i);
            let t = -back * self.h + if half { self.h * T::lit(0.5) } else { T::zero() };
            self.history.value_at(t)
        }
    }
}

/// Classic RK4 with step `s / steps_per_delay` over `[0, t_end]`.
///
/// `t_end` is rounded to the nearest whole number of steps. For `s = 0` the
/// system is integrated as an ODE with step `1 / steps_per_delay`.
pub fn simulate<T: Scalar>(
    params: &ModelParams<T>,
    history: &HistorySpec<T>,
    t_end: T,
    steps_per_delay: usize,
) -> Result<Trajectory<T>> {
    let StepPlan { h, lag, n } = plan(params, t_end, steps_per_delay)?;
    history.validate(params.s)?;
    let half = h * T::lit(0.5);
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);

    let mut states = Vec::with_capacity(n + 1);
    let mut derivs: Vec<State<T>> = Vec::with_capacity(n + 1);
    states.push(history.initial_state(params));
    let lookup = DelayLookup { history, h, lag };

    for i in 0..n {
        let x = states[i];
        let (d0, dm, d1) = if lag == 0 {
            (None, None, None)
        } else {
            (
                Some(lookup.at(i, false, &states, &derivs)),
                Some(lookup.at(i, true, &states, &derivs)),
                Some(lookup.at(i + 1, false, &states, &derivs)),
            )
        };
        let rhs = |y: &State<T>, d: Option<State<T>>| reduced_rhs(y, &d.unwrap_or(*y), params);

        let k1 = rhs(&x, d0);
        derivs.push(k1);
        let k2 = rhs(&(x + k1 * half), dm);
        let k3 = rhs(&(x + k2 * half), dm);
        let k4 = rhs(&(x + k3 * h), d1);
        let next = x + (k1 + k2 * two + k3 * two + k4) * sixth;
        if diverged(&next) {
            return Err(Error::Diverged {
                time: (h * T::from_usize_lossy(i + 1)).as_f64(),
            });
        }
        states.push(next);
    }
    let last = states[n];
    let d_last = if lag == 0 {
        last
    } else {
        lookup.at(n, false, &states, &derivs)
    };
    derivs.push(reduced_rhs(&last, &d_last, params));

    Ok(Trajectory {
        t0: T::zero(),
        t_end: h * T::from_usize_lossy(n),
        step: h,
        states,
        derivatives: derivs,
    })
}

/// Quadrature weights for `∫ e^{-kτ} g(τ) dτ` with `g` linear between the
/// given increasing lags; the rule of [`crate::model::distributed_w_oracle`].
pub(crate) fn product_trapezoid_weights<T: Scalar>(k: T, lags: &[T]) -> Vec<T> {
    let mut w = vec![T::zero(); lags.len()];
    for j in 1..lags.len() {
        let (ta, tb) = (lags[j - 1], lags[j]);
        let len = tb - ta;
        if len <= T::zero() {
            continue;
        }
        let x = k * len;
        let decay = (-(k * ta)).exp();
        let m0 = -(-x).exp_m1() / k;
        let m1 = (-(-x).exp_m1() - x * (-x).exp()) / (k * k);
        w[j - 1] = w[j - 1] + decay * (m0 - m1 / len);
        w[j] = w[j] + decay * m1 / len;
    }
    w
}

/// Integrates `(u, v)` with the memory term evaluated by quadrature over the
/// stored past instead of through the auxiliary `w` equation.
///
/// The memory at each RK4 stage is the exponentially weighted integral of
/// `uv` over a window of at least `30 / (mu + r)`: the stage value at lag
/// zero, then stored nodes, then the history function (extended as a
/// constant before its first sample). The stored `w` is that integral, so the
/// result is directly comparable with [`simulate`].
pub fn simulate_distributed<T: Scalar>(
    params: &ModelParams<T>,
    history: &HistorySpec<T>,
    t_end: T,
    steps_per_delay: usize,
) -> Result<Trajectory<T>> {
    let StepPlan { h, lag, n } = plan(params, t_end, steps_per_delay)?;
    history.validate(params.s)?;
    let k = params.kappa();
    let half = h * T::lit(0.5);
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);

    // nodes back from the stage time needed to span 30 / k
    let window = (T::lit(30.0) / k / h).ceil().to_usize().unwrap_or(0) + 1;
    let weights_for = |theta: T| {
        let mut lags = Vec::with_capacity(window + 1);
        lags.push(T::zero());
        for j in 0..window {
            lags.push(theta * h + h * T::from_usize_lossy(j));
        }
        if theta == T::zero() {
            lags.remove(0);
        }
        product_trapezoid_weights(k, &lags)
    };
    let w_node = weights_for(T::zero());
    let w_half = weights_for(T::lit(0.5));
    let w_full = weights_for(T::one());

    let lookup = DelayLookup { history, h, lag };
    let uv_at = |idx: isize, states: &[State<T>]| -> T {
        if idx >= 0 {
            let x = states[idx as usize];
            x.u * x.v
        } else {
            let x = history.value_at(h * T::lit(idx as f64));
            x.u * x.v
        }
    };
    // memory at time t_i + theta h given the stage product at lag zero
    let memory = |i: usize, stage_uv: Option<T>, weights: &[T], states: &[State<T>]| -> T {
        let mut acc = T::zero();
        let mut offset = 0;
        if let Some(g) = stage_uv {
            acc = weights[0] * g;
            offset = 1;
        }
        for (j, &wj) in weights[offset..].iter().enumerate() {
            acc = acc + wj * uv_at(i as isize - j as isize, states);
        }
        acc
    };
    let rhs = |x: &State<T>, d: &State<T>| {
        let mut dx = reduced_rhs(x, d, params);
        dx.w = x.u * x.v - k * x.w;
        dx
    };

    let x0 = history.value_at(T::zero());
    let mut states = vec![State::new(x0.u, x0.v, T::zero())];
    states[0].w = memory(0, None, &w_node, &states);
    let mut derivs: Vec<State<T>> = Vec::with_capacity(n + 1);

    for i in 0..n {
        let x = states[i];
        let (d0, dm, d1) = if lag == 0 {
            (None, None, None)
        } else {
            (
                Some(lookup.at(i, false, &states, &derivs)),
                Some(lookup.at(i, true, &states, &derivs)),
                Some(lookup.at(i + 1, false, &states, &derivs)),
            )
        };
        let stage = |y: State<T>, weights: &[T], states: &[State<T>]| {
            State::new(y.u, y.v, memory(i, Some(y.u * y.v), weights, states))
        };

        let k1 = rhs(&x, &d0.unwrap_or(x));
        derivs.push(k1);
        let y2 = stage(x + k1 * half, &w_half, &states);
        let k2 = rhs(&y2, &dm.unwrap_or(y2));
        let y3 = stage(x + k2 * half, &w_half, &states);
        let k3 = rhs(&y3, &dm.unwrap_or(y3));
        let y4 = stage(x + k3 * h, &w_full, &states);
        let k4 = rhs(&y4, &d1.unwrap_or(y4));
        let uv_next = x + (k1 + k2 * two + k3 * two + k4) * sixth;
        let next = State::new(uv_next.u, uv_next.v, T::zero());
        if diverged(&next) {
            return Err(Error::Diverged {
                time: (h * T::from_usize_lossy(i + 1)).as_f64(),
            });
        }
        states.push(next);
        let w = memory(i + 1, None, &w_node, &states);
        states[i + 1].w = w;
    }
    let last = states[n];
    let d_last = if lag == 0 {
        last
    } else {
        lookup.at(n, false, &states, &derivs)
    };
    derivs.push(rhs(&last, &d_last));

    Ok(Trajectory {
        t0: T::zero(),
        t_end: h * T::from_usize_lossy(n),
        step: h,
        states,
        derivatives: derivs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleClass {
    ConvergesToEquilibrium,
    SustainedOscillation,
    Diverges,
    Inconclusive,
}

impl CycleClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CycleClass::ConvergesToEquilibrium => "ConvergesToEquilibrium",
            CycleClass::SustainedOscillation => "SustainedOscillation",
            CycleClass::Diverges => "Diverges",
            CycleClass::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleMetrics<T> {
    pub classification: CycleClass,
    /// Half peak-to-peak of `(u, v, w)` over the retained window.
    pub amplitude: [T; 3],
    /// Mean spacing of the detected peaks of `u`.
    pub period: Option<T>,
    pub n_periods_measured: usize,
    /// Max-norm deviation from the equilibrium over the retained window.
    pub max_deviation: T,
}

/// Refined times of the prominent local maxima of `signal`, sampled every `h`
/// starting at `t0`.
pub fn peak_times<T: Scalar>(signal: &[T], t0: T, h: T, min_prominence: T) -> Vec<T> {
    let maxima: Vec<usize> = (1..signal.len().saturating_sub(1))
        .filter(|&i| signal[i - 1] < signal[i] && signal[i] >= signal[i + 1])
        .collect();
    if maxima.is_empty() {
        return Vec::new();
    }
    let trough = |a: usize, b: usize| signal[a..=b].iter().copied().fold(T::infinity(), T::min);
    let mut out = Vec::new();
    for (k, &i) in maxima.iter().enumerate() {
        let left = if k > 0 { trough(maxima[k - 1], i) } else { trough(0, i) };
        let right = if k + 1 < maxima.len() {
            trough(i, maxima[k + 1])
        } else {
            trough(i, signal.len() - 1)
        };
        if signal[i] - left.max(right) <= min_prominence {
            continue;
        }
        let (ym, y0, yp) = (signal[i - 1], signal[i], signal[i + 1]);
        let curvature = ym - T::lit(2.0) * y0 + yp;
        let shift = if curvature < T::zero() {
            T::lit(0.5) * (ym - yp) / curvature
        } else {
            T::zero()
        };
        out.push(t0 + h * (T::from_usize_lossy(i) + shift));
    }
    out
}

/// Classifies the long-time behavior of a trajectory relative to
/// `equilibrium` after discarding the leading `transient_fraction`.
pub fn cycle_metrics<T: Scalar>(
    traj: &Trajectory<T>,
    equilibrium: &State<T>,
    transient_fraction: T,
) -> Result<CycleMetrics<T>> {
    if !(transient_fraction > T::zero() && transient_fraction < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "transient_fraction must lie in (0, 1), got {transient_fraction}"
        )));
    }
    let zero = T::zero();
    let nan_metrics = |class| CycleMetrics {
        classification: class,
        amplitude: [T::nan(); 3],
        period: None,
        n_periods_measured: 0,
        max_deviation: T::infinity(),
    };
    if traj.states.iter().any(diverged) {
        return Ok(nan_metrics(CycleClass::Diverges));
    }
    let start = (transient_fraction * T::from_usize_lossy(traj.states.len()))
        .floor()
        .to_usize()
        .unwrap_or(0);
    let window = &traj.states[start.min(traj.states.len())..];
    if window.len() < 3 {
        return Ok(CycleMetrics {
            max_deviation: zero,
            ..nan_metrics(CycleClass::Inconclusive)
        });
    }

    let mut lo = window[0].to_array();
    let mut hi = lo;
    for x in window {
        for (c, v) in x.to_array().into_iter().enumerate() {
            lo[c] = lo[c].min(v);
            hi[c] = hi[c].max(v);
        }
    }
    let amplitude: [T; 3] = std::array::from_fn(|c| (hi[c] - lo[c]) * T::lit(0.5));
    let deviation: Vec<T> = window.iter().map(|x| (*x - *equilibrium).max_abs()).collect();
    let max_deviation = deviation.iter().copied().fold(zero, T::max);
    let mid = deviation.len() / 2;
    let early = deviation[..mid].iter().copied().fold(zero, T::max);
    let late = deviation[mid..].iter().copied().fold(zero, T::max);

    let u_dev: Vec<T> = window.iter().map(|x| x.u - equilibrium.u).collect();
    let t_start = traj.time(start);
    let peaks = peak_times(&u_dev, t_start, traj.step, T::lit(PEAK_PROMINENCE));
    let spacings: Vec<T> = peaks.windows(2).map(|p| p[1] - p[0]).collect();
    let period = if spacings.is_empty() {
        None
    } else {
        Some(spacings.iter().copied().fold(zero, |a, b| a + b) / T::from_usize_lossy(spacings.len()))
    };

    let converged = max_deviation < T::lit(CONVERGENCE_TOL) && late <= early;
    let classification = if converged {
        CycleClass::ConvergesToEquilibrium
    } else if let Some(mean) = period.filter(|_| spacings.len() >= MIN_PERIODS) {
        let var = spacings
            .iter()
            .map(|&p| (p - mean) * (p - mean))
            .fold(zero, |a, b| a + b)
            / T::from_usize_lossy(spacings.len());
        let regular = var.sqrt() < T::lit(PERIOD_SPREAD_TOL) * mean;
        // a decaying or still-growing envelope is not a limit cycle
        let steady = late >= T::lit(0.8) * early && late <= T::lit(1.25) * early;
        if regular && steady {
            CycleClass::SustainedOscillation
        } else {
            CycleClass::Inconclusive
        }
    } else {
        CycleClass::Inconclusive
    };

    Ok(CycleMetrics {
        classification,
        amplitude,
        period,
        n_periods_measured: spacings.len(),
        max_deviation,
    })
}

/// Period of the dominant spectral peak of `u` over the retained window
/// (Hann window, Gaussian interpolation of the peak bin).
pub fn fft_period<T: Scalar>(traj: &Trajectory<T>, transient_fraction: T) -> Option<T> {
    let start = (transient_fraction * T::from_usize_lossy(traj.states.len()))
        .floor()
        .to_usize()?;
    let window = traj.states.get(start..)?;
    let n = window.len();
    if n < 8 {
        return None;
    }
    let mean = window.iter().fold(T::zero(), |a, x| a + x.u) / T::from_usize_lossy(n);
    let denom = T::from_usize_lossy(n - 1);
    let mut buf: Vec<Complex<T>> = window
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let hann = T::lit(0.5) - T::lit(0.5) * (T::TAU() * T::from_usize_lossy(i) / denom).cos();
            Complex::new((x.u - mean) * hann, T::zero())
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mags: Vec<T> = buf[..n / 2].iter().map(|z| z.norm()).collect();
    let (k, _) = mags
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))?;
    if k == 0 || k + 1 >= mags.len() || mags[k] == T::zero() {
        return None;
    }
    let (a, b, c) = (mags[k - 1].ln(), mags[k].ln(), mags[k + 1].ln());
    let curvature = a - T::lit(2.0) * b + c;
    let shift = if curvature < T::zero() && curvature.is_finite() {
        T::lit(0.5) * (a - c) / curvature
    } else {
        T::zero()
    };
    let freq = (T::from_usize_lossy(k) + shift) / (T::from_usize_lossy(n) * traj.step);
    Some(T::one() / freq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{positive_equilibrium, UvSample};
    use approx::assert_abs_diff_eq;

    fn bench(s: f64) -> ModelParams<f64> {
        ModelParams::benchmark().with_delay(s)
    }

    #[test]
    fn equilibrium_is_invariant() {
        let p = bench(2.0);
        let e = positive_equilibrium(&p).unwrap().point;
        let traj = simulate(&p, &HistorySpec::at_point(e), 50.0, 40).unwrap();
        for x in &traj.states {
            assert!((*x - e).max_abs() < 1e-12);
        }
        let traj = simulate_distributed(&p, &HistorySpec::at_point(e), 20.0, 40).unwrap();
        for x in &traj.states {
            assert!((*x - e).max_abs() < 1e-12);
        }
    }

    #[test]
    fn node_count_and_dense_output() {
        let p = bench(2.02);
        let traj = simulate(&p, &HistorySpec::constant(1.01, 0.99), 100.0, 200).unwrap();
        let n = (100.0 / (2.02 / 200.0_f64)).round() as usize;
        assert_eq!(traj.intervals(), n);
        assert_eq!(traj.t_end, traj.step * n as f64);
        for i in [0, 1, 17, n / 2, n] {
            assert_eq!(traj.eval(traj.time(i)).unwrap(), traj.states[i]);
        }
        assert!(traj.eval(-1.0).is_none());
        assert!(traj.eval(traj.t_end + 1.0).is_none());
        let mid = traj.eval(traj.time(10) + 0.5 * traj.step).unwrap();
        assert!((mid - traj.states[10]).max_abs() < 1e-3);
    }

    #[test]
    fn sampled_history_matches_constant() {
        let p = bench(2.0);
        let samples: Vec<(f64, State<f64>)> = (0..=10)
            .map(|i| (-2.0 + 0.2 * i as f64, State::new(1.01, 0.99, 0.0)))
            .collect();
        let sampled = HistorySpec {
            kind: HistoryKind::Sampled(samples),
            w0_policy: W0Policy::Consistent,
        };
        let a = simulate(&p, &sampled, 30.0, 20).unwrap();
        let b = simulate(&p, &HistorySpec::constant(1.01, 0.99), 30.0, 20).unwrap();
        assert_eq!(a.states, b.states);
    }

    #[test]
    fn sampled_history_must_cover_delay() {
        let p = bench(2.0);
        let samples = vec![(-1.0, State::new(1.0, 1.0, 0.0)), (0.0, State::new(1.0, 1.0, 0.0))];
        let short = HistorySpec {
            kind: HistoryKind::Sampled(samples),
            w0_policy: W0Policy::Consistent,
        };
        assert!(matches!(simulate(&p, &short, 10.0, 20), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn argument_validation() {
        let p = bench(2.0);
        let hist = HistorySpec::constant(1.0, 1.0);
        assert!(simulate(&p, &hist, 10.0, 10).is_err());
        assert!(simulate(&p, &hist, -1.0, 40).is_err());
        let mut bad = p;
        bad.a1 = -0.1;
        assert!(matches!(
            simulate(&bad, &hist, 10.0, 40),
            Err(Error::InvalidParameter { name: "a1", .. })
        ));
    }

    #[test]
    fn divergence_reports_blowup_time() {
        let mut p = bench(2.0);
        p.b1 = -40.0;
        p.b2 = 10.0;
        match simulate(&p, &HistorySpec::constant(1.0, 1.0), 200.0, 20) {
            Err(Error::Diverged { time }) => assert!(time > 0.0 && time < 200.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn explicit_w0_is_honored() {
        let p = bench(2.0);
        let hist = HistorySpec {
            kind: HistoryKind::Constant(State::new(1.0, 1.0, 0.0)),
            w0_policy: W0Policy::Explicit(0.5),
        };
        let traj = simulate(&p, &hist, 1.0, 20).unwrap();
        assert_eq!(traj.states[0].w, 0.5);
        let consistent = simulate(&p, &HistorySpec::constant(1.2, 0.5), 1.0, 20).unwrap();
        assert_abs_diff_eq!(consistent.states[0].w, 1.2 * 0.5 / 6.0, epsilon = 1e-16);
    }

    #[test]
    fn zero_delay_uses_plain_stepping() {
        let p = bench(0.0);
        let e = positive_equilibrium(&p).unwrap().point;
        let traj = simulate(&p, &HistorySpec::constant(1.05, 0.95), 800.0, 20).unwrap();
        assert_abs_diff_eq!(traj.step, 0.05, epsilon = 1e-15);
        let dev = (traj.last() - e).max_abs();
        assert!(dev < 1e-6, "deviation {dev}");
    }

    #[test]
    fn weights_reproduce_oracle() {
        let p = bench(2.0);
        let k = p.kappa();
        let lags: Vec<f64> = (0..600)
            .map(|j| if j == 0 { 0.0 } else { 0.005 + 0.01 * (j - 1) as f64 })
            .collect();
        let g = |tau: f64| 1.0 + 0.3 * (0.7 * tau).sin();
        let weights = product_trapezoid_weights(k, &lags);
        let via_weights: f64 = weights.iter().zip(&lags).map(|(w, &t)| w * g(t)).sum();
        let hist: Vec<UvSample<f64>> = lags
            .iter()
            .rev()
            .map(|&t| UvSample { t: -t, u: g(t), v: 1.0 })
            .collect();
        let oracle = crate::model::distributed_w_oracle(&hist, &p).unwrap();
        assert_abs_diff_eq!(via_weights, oracle.value, epsilon = 1e-14);
    }

    #[test]
    fn csv_export() {
        let p = bench(2.0);
        let traj = simulate(&p, &HistorySpec::constant(1.01, 0.99), 1.0, 20).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,u,v,w"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), traj.states.len());
        let fields: Vec<f64> = rows[5].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(fields[1], traj.states[5].u);
        assert_eq!(fields[3], traj.states[5].w);
    }

    fn synthetic(f: impl Fn(f64) -> State<f64>, t_end: f64, h: f64) -> Trajectory<f64> {
        let n = (t_end / h) as usize;
        let states: Vec<State<f64>> = (0..=n).map(|i| f(i as f64 * h)).collect();
        Trajectory {
            t0: 0.0,
            t_end: n as f64 * h,
            step: h,
            derivatives: vec![State::zero(); states.len()],
            states,
        }
    }

    #[test]
    fn metrics_on_constant_trajectory() {
        let e = State::new(1.0, 1.0, 1.0 / 6.0);
        let traj = synthetic(|_| e, 100.0, 0.1);
        let m = cycle_metrics(&traj, &e, 0.5).unwrap();
        assert_eq!(m.classification, CycleClass::ConvergesToEquilibrium);
        assert_eq!(m.amplitude, [0.0; 3]);
    }

    #[test]
    fn metrics_on_sine() {
        let e = State::new(1.0, 1.0, 0.0);
        let traj = synthetic(
            |t| State::new(1.0 + 0.3 * (t / 5.0).sin(), 1.0 + 0.1 * (t / 5.0).cos(), 0.0),
            2000.0,
            0.01,
        );
        let m = cycle_metrics(&traj, &e, 0.5).unwrap();
        assert_eq!(m.classification, CycleClass::SustainedOscillation);
        let period = std::f64::consts::TAU * 5.0;
        assert_abs_diff_eq!(m.period.unwrap(), period, epsilon = 1e-3);
        assert_abs_diff_eq!(m.amplitude[0], 0.3, epsilon = 1e-6);
        assert_abs_diff_eq!(m.amplitude[1], 0.1, epsilon = 1e-6);
        let fft = fft_period(&traj, 0.5).unwrap();
        assert!((fft - period).abs() / period < 0.02);
    }

    #[test]
    fn metrics_on_linear_growth() {
        let e = State::zero();
        let traj = synthetic(|t| State::new(0.01 * t, 0.0, 0.0), 1000.0, 0.1);
        let m = cycle_metrics(&traj, &e, 0.5).unwrap();
        assert!(matches!(
            m.classification,
            CycleClass::Diverges | CycleClass::Inconclusive
        ));
        assert_eq!(m.n_periods_measured, 0);
    }

    #[test]
    fn metrics_on_decaying_oscillation() {
        let e = State::zero();
        let traj = synthetic(
            |t| State::new((-t / 300.0).exp() * (t / 3.0).sin(), 0.0, 0.0),
            1000.0,
            0.05,
        );
        let m = cycle_metrics(&traj, &e, 0.5).unwrap();
        assert_eq!(m.classification, CycleClass::Inconclusive);
    }

    #[test]
    fn metrics_reject_bad_fraction() {
        let e = State::zero();
        let traj = synthetic(|_| e, 10.0, 0.1);
        assert!(cycle_metrics(&traj, &e, 1.0).is_err());
        assert!(cycle_metrics(&traj, &e, 0.0).is_err());
    }

    #[test]
    fn peaks_ignore_ripple() {
        let sig: Vec<f64> = (0..1000).map(|i| 1e-9 * ((i % 3) as f64)).collect();
        assert!(peak_times(&sig, 0.0, 1.0, 1e-6).is_empty());
    }
}
