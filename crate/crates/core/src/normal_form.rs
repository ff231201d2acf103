//! Direction of the Hopf bifurcation by the method of multiple scales.
//!
//! With time rescaled so that the delay is one, the perturbation `X` from
//! `E*` obeys `X' = s A X + s As X(t-1) + s F(X, X(t-1))`. Near a critical
//! pair `(ω*, s*)` with `s = s* + δ` the first-order solution is
//! `X1 = c e^{iω*s*t} H + c.c.`, and the solvability condition at third order
//! gives the amplitude equation
//!
//! ```text
//! H' = δ Γ1 H − Γ2 H² H̄,     ρ' = δ χ1 ρ − χ2 ρ³   (H = ρ e^{iθ}).
//! ```
//!
//! Every vector below is obtained by solving its defining linear system.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat3, CVec3, RMat3};
use crate::model::{positive_equilibrium, Equilibrium, EquilibriumLabel, ModelParams};
use crate::scalar::Scalar;
use crate::stability;

/// Hadamard ratio below which a critical matrix counts as rank deficient.
pub const CRITICAL_RANK_TOL: f64 = 1e-6;
/// Hadamard ratio below which a second-order system counts as resonant.
pub const RESONANCE_TOL: f64 = 1e-8;
/// `|d (I + s As e^{-iωs}) c|` below which the left vector cannot be normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// `|χ1 χ2|` at or below which the direction is degenerate.
pub const DIRECTION_TOL: f64 = 1e-12;

/// Coefficients of the quadratic nonlinearity
/// `F = (uu·u² + delayed_uv·u(t-s)v(t-s), vv·v², uv·u v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticTable<T> {
    pub uu: T,
    pub delayed_uv: T,
    pub vv: T,
    pub uv: T,
}

/// Linear part split into instantaneous (`a`) and delayed (`a_s`) matrices,
/// plus the quadratic remainder, at the positive equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linearization<T> {
    pub a: RMat3<T>,
    pub a_s: RMat3<T>,
    pub quadratic: QuadraticTable<T>,
}

pub fn linearize<T: Scalar>(params: &ModelParams<T>, estar: &Equilibrium<T>) -> Result<Linearization<T>> {
    if estar.label != EquilibriumLabel::EStar {
        return Err(Error::NotPositiveEquilibrium(estar.label.as_str()));
    }
    if !estar.exists {
        return Err(Error::MissingPositiveEquilibrium);
    }
    let zero = T::zero();
    let one = T::one();
    let two = T::lit(2.0);
    let ModelParams {
        r1, r2, a1, a2, b1, b2, ..
    } = *params;
    let (u, v) = (estar.point.u, estar.point.v);

    Ok(Linearization {
        a: [
            [r1 * (one - two * a1 * u), zero, zero],
            [zero, r2 * (one - two * a2 * v), b2 * r2],
            [v, u, -params.kappa()],
        ],
        a_s: [
            [-b1 * r1 * v, -b1 * r1 * u, zero],
            [zero, zero, zero],
            [zero, zero, zero],
        ],
        quadratic: QuadraticTable {
            uu: -a1 * r1,
            delayed_uv: -b1 * r1,
            vv: -a2 * r2,
            uv: one,
        },
    })
}

fn cis<T: Scalar>(phase: T) -> Complex<T> {
    Complex::from_polar(T::one(), phase)
}

impl<T: Scalar> Linearization<T> {
    /// `s A + s As e^{-iωs} − iωs I`, whose null vectors define `c` and `d`.
    pub fn critical_matrix(&self, omega: T, s: T) -> CMat3<T> {
        self.shifted_matrix(Complex::new(T::zero(), omega), omega, s)
    }

    /// `s A + s As e^{-iνs} − σ s I` with `σ` the time-derivative eigenvalue
    /// and `ν` the frequency seen by the delayed term.
    fn shifted_matrix(&self, sigma: Complex<T>, nu: T, s: T) -> CMat3<T> {
        let a = linalg::complexify(&self.a);
        let a_s = linalg::complexify(&self.a_s);
        let sc = Complex::new(s, T::zero());
        let mut m = linalg::combine(&a, sc, &a_s, cis(-nu * s) * s);
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = row[i] - sigma * s;
        }
        m
    }

    /// `I + s As e^{-iωs}`.
    pub fn normalization_matrix(&self, omega: T, s: T) -> CMat3<T> {
        let a_s = linalg::complexify(&self.a_s);
        linalg::combine(
            &linalg::identity(),
            Complex::new(T::one(), T::zero()),
            &a_s,
            cis(-omega * s) * s,
        )
    }

    /// `A + As e^{-iωs}`.
    pub fn growth_matrix(&self, omega: T, s: T) -> CMat3<T> {
        let a = linalg::complexify(&self.a);
        let a_s = linalg::complexify(&self.a_s);
        linalg::combine(&a, Complex::new(T::one(), T::zero()), &a_s, cis(-omega * s))
    }

    /// Symmetric bilinear form with `F(x) = B(x, x)`; `xs`, `ys` are the
    /// delayed copies of `x`, `y`.
    pub fn bilinear(&self, x: &CVec3<T>, xs: &CVec3<T>, y: &CVec3<T>, ys: &CVec3<T>) -> CVec3<T> {
        let q = &self.quadratic;
        let half = T::lit(0.5);
        [
            x[0] * y[0] * q.uu + (xs[0] * ys[1] + xs[1] * ys[0]) * (q.delayed_uv * half),
            x[1] * y[1] * q.vv,
            (x[0] * y[1] + x[1] * y[0]) * (q.uv * half),
        ]
    }
}

/// Right null vector `c` of the critical matrix with `c[1] = 1`.
pub fn right_eigvec<T: Scalar>(lin: &Linearization<T>, omega: T, s: T) -> Result<CVec3<T>> {
    let m = lin.critical_matrix(omega, s);
    check_critical(&m, omega, s)?;
    let c = linalg::null_vector(&m);
    normalize_component(c, 1)
}

/// Left null vector `d` of the critical matrix scaled so that
/// `d (I + s As e^{-iωs}) c = 1`.
pub fn left_eigvec<T: Scalar>(lin: &Linearization<T>, omega: T, s: T, c: &CVec3<T>) -> Result<CVec3<T>> {
    let m = lin.critical_matrix(omega, s);
    check_critical(&m, omega, s)?;
    let d = linalg::null_vector(&linalg::transpose(&m));
    let d = normalize_component(d, 1)?;
    let scale = linalg::dot(&d, &linalg::mat_vec(&lin.normalization_matrix(omega, s), c));
    if scale.norm() < T::lit(NORMALIZATION_TOL) {
        return Err(Error::DegenerateNormalization(scale.norm().as_f64()));
    }
    Ok(d.map(|x| x / scale))
}

fn check_critical<T: Scalar>(m: &CMat3<T>, omega: T, s: T) -> Result<()> {
    let ratio = linalg::hadamard_ratio(m);
    if !(ratio < T::tol(CRITICAL_RANK_TOL)) {
        return Err(Error::NotCriticalPair {
            omega: omega.as_f64(),
            delay: s.as_f64(),
            residual: ratio.as_f64(),
        });
    }
    Ok(())
}

fn normalize_component<T: Scalar>(x: CVec3<T>, k: usize) -> Result<CVec3<T>> {
    let pivot = x[k];
    if pivot.norm() <= T::epsilon() * linalg::norm(&x) || pivot.norm() == T::zero() {
        return Err(Error::InvalidArgument(format!(
            "null vector has a vanishing component {k}; cannot normalize"
        )));
    }
    Ok(x.map(|z| z / pivot))
}

/// Second-order response vectors `(e, f)`: the `e^{2iω s t}` and mean parts
/// of `X2`, solving
///
/// ```text
/// (2iωs I − s A − s As e^{-2iωs}) e = s P2,     (−s A − s As) f = s P0.
/// ```
pub fn second_order<T: Scalar>(lin: &Linearization<T>, omega: T, s: T, c: &CVec3<T>) -> Result<(CVec3<T>, CVec3<T>)> {
    let (p2, p0) = quadratic_forcing(lin, omega, s, c);
    let sc = Complex::new(s, T::zero());

    let e_mat = lin
        .shifted_matrix(Complex::new(T::zero(), T::lit(2.0) * omega), T::lit(2.0) * omega, s)
        .map(|row| row.map(|x| -x));
    let e = solve_guarded(&e_mat, &p2.map(|x| x * sc), "e")?;

    let f_mat = lin
        .shifted_matrix(Complex::new(T::zero(), T::zero()), T::zero(), s)
        .map(|row| row.map(|x| -x));
    let f = solve_guarded(&f_mat, &p0.map(|x| x * sc), "f")?;

    Ok((e, f))
}

/// Fourier coefficients of the quadratic forcing on `X1`: the `H² e^{2iωst}`
/// part and the `H H̄` part.
pub fn quadratic_forcing<T: Scalar>(lin: &Linearization<T>, omega: T, s: T, c: &CVec3<T>) -> (CVec3<T>, CVec3<T>) {
    let lag = cis(-omega * s);
    let cs = c.map(|x| x * lag);
    let cb = linalg::conj(c);
    let cbs = linalg::conj(&cs);
    let p2 = lin.bilinear(c, &cs, c, &cs);
    let p0 = lin.bilinear(c, &cs, &cb, &cbs).map(|x| x * T::lit(2.0));
    (p2, p0)
}

fn solve_guarded<T: Scalar>(m: &CMat3<T>, rhs: &CVec3<T>, vector: &'static str) -> Result<CVec3<T>> {
    let ratio = linalg::hadamard_ratio(m);
    if !(ratio >= T::tol(RESONANCE_TOL)) {
        return Err(Error::Resonance {
            vector,
            conditioning: ratio.as_f64(),
        });
    }
    linalg::solve(m, rhs).ok_or(Error::Resonance {
        vector,
        conditioning: 0.0,
    })
}

/// Resonant third-order forcing `M`: the `H² H̄ e^{iωst}` part of `2 B(X1, X2)`.
pub fn cubic_forcing<T: Scalar>(
    lin: &Linearization<T>,
    omega: T,
    s: T,
    c: &CVec3<T>,
    e: &CVec3<T>,
    f: &CVec3<T>,
) -> CVec3<T> {
    let lag = cis(-omega * s);
    let lag2 = cis(-T::lit(2.0) * omega * s);
    let cs = c.map(|x| x * lag);
    let cb = linalg::conj(c);
    let cbs = linalg::conj(&cs);
    let es = e.map(|x| x * lag2);
    let with_f = lin.bilinear(c, &cs, f, f);
    let with_e = lin.bilinear(&cb, &cbs, e, &es);
    std::array::from_fn(|i| (with_f[i] + with_e[i]) * T::lit(2.0))
}

/// `Γ1 = d (A + As e^{-iωs}) c` and `Γ2 = −s d·M`, so that the amplitude
/// equation reads `H' = δ Γ1 H − Γ2 H² H̄`.
#[allow(clippy::too_many_arguments)]
pub fn gammas<T: Scalar>(
    lin: &Linearization<T>,
    c: &CVec3<T>,
    d: &CVec3<T>,
    e: &CVec3<T>,
    f: &CVec3<T>,
    omega: T,
    s: T,
) -> (Complex<T>, Complex<T>) {
    let gamma1 = linalg::dot(d, &linalg::mat_vec(&lin.growth_matrix(omega, s), c));
    let m = cubic_forcing(lin, omega, s, c, e, f);
    let gamma2 = -linalg::dot(d, &m) * s;
    (gamma1, gamma2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Supercritical,
    Subcritical,
    Degenerate,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Supercritical => "Supercritical",
            Direction::Subcritical => "Subcritical",
            Direction::Degenerate => "Degenerate",
        }
    }
}

/// Supercritical (stable cycle) when `χ1 χ2 > 0`, subcritical when `< 0`.
pub fn classify<T: Scalar>(chi1: T, chi2: T) -> Direction {
    let prod = chi1 * chi2;
    if prod.abs() <= T::lit(DIRECTION_TOL) {
        Direction::Degenerate
    } else if prod > T::zero() {
        Direction::Supercritical
    } else {
        Direction::Subcritical
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalForm<T> {
    pub omega_star: T,
    pub s_star: T,
    pub c_vec: CVec3<T>,
    pub d_vec: CVec3<T>,
    pub e_vec: CVec3<T>,
    pub f_vec: CVec3<T>,
    pub gamma1: Complex<T>,
    pub gamma2: Complex<T>,
    pub chi1: T,
    pub chi2: T,
    pub direction: Direction,
}

impl<T: Scalar> NormalForm<T> {
    /// Full pipeline at a given critical pair.
    pub fn at_critical_pair(params: &ModelParams<T>, estar: &Equilibrium<T>, omega: T, s: T) -> Result<Self> {
        let lin = linearize(params, estar)?;
        let c = right_eigvec(&lin, omega, s)?;
        let d = left_eigvec(&lin, omega, s, &c)?;
        let (e, f) = second_order(&lin, omega, s, &c)?;
        let (gamma1, gamma2) = gammas(&lin, &c, &d, &e, &f, omega, s);
        Ok(Self {
            omega_star: omega,
            s_star: s,
            c_vec: c,
            d_vec: d,
            e_vec: e,
            f_vec: f,
            gamma1,
            gamma2,
            chi1: gamma1.re,
            chi2: gamma2.re,
            direction: classify(gamma1.re, gamma2.re),
        })
    }

    /// Normal form at the first critical delay `s0`; `None` when there is no
    /// Hopf candidate.
    pub fn at_first_crossing(params: &ModelParams<T>) -> Result<Option<Self>> {
        let estar = positive_equilibrium(params)?;
        let Some(crit) = stability::s0(params)? else {
            return Ok(None);
        };
        Self::at_critical_pair(params, &estar, crit.candidate.omega, crit.s0).map(Some)
    }

    /// Steady amplitude `ρ = sqrt(δ χ1 / χ2)` of the polar amplitude equation,
    /// or zero when no nontrivial steady state exists for this `δ = s − s*`.
    pub fn predicted_amplitude(&self, delta: T) -> Result<T> {
        if self.direction == Direction::Degenerate {
            return Err(Error::DegenerateDirection);
        }
        let ratio = delta * self.chi1 / self.chi2;
        Ok(if ratio > T::zero() { ratio.sqrt() } else { T::zero() })
    }

    /// Half peak-to-peak oscillation of `(u, v, w)` about `E*`, `2 ρ |c_i|`.
    pub fn predicted_component_amplitudes(&self, delta: T) -> Result<[T; 3]> {
        let rho = self.predicted_amplitude(delta)?;
        Ok(self.c_vec.map(|c| T::lit(2.0) * rho * c.norm()))
    }
}

/// Free-function form of [`NormalForm::predicted_amplitude`].
pub fn predicted_amplitude<T: Scalar>(nf: &NormalForm<T>, delta: T) -> Result<T> {
    nf.predicted_amplitude(delta)
}

/// Residual norms of the right and left eigen-equations and the deviation of
/// the normalization from one.
pub fn eigen_residuals<T: Scalar>(lin: &Linearization<T>, omega: T, s: T, c: &CVec3<T>, d: &CVec3<T>) -> (T, T, T) {
    let m = lin.critical_matrix(omega, s);
    let right = linalg::norm(&linalg::mat_vec(&m, c));
    let left = linalg::norm(&linalg::vec_mat(d, &m));
    let norm = (linalg::dot(d, &linalg::mat_vec(&lin.normalization_matrix(omega, s), c)) - T::one()).norm();
    (right, left, norm)
}
