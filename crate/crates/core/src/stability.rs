//! Linear stability of the positive equilibrium and the critical delays at
//! which a pair of characteristic roots crosses the imaginary axis.
//!
//! At `E*` the characteristic equation reads
//!
//! ```text
//! λ³ + p2 λ² + p1 λ + p0 + (q2 λ² + q1 λ + q0) e^{-λ s} = 0.
//! ```
//!
//! Substituting `λ = iω` and eliminating the delay yields the cubic
//! `G(z) = z³ + m z² + n z + h` in `z = ω²`. Every positive root of `G`
//! gives a frequency and a ladder of delays spaced by `2π/ω`.

use num_complex::Complex;

use crate::cubic::MonicCubic;
use crate::error::{Error, Result};
use crate::model::{positive_equilibrium, Equilibrium, EquilibriumLabel, ModelParams, Stability};
use crate::scalar::Scalar;

/// Number of extra ladder rungs kept per candidate by [`s0`].
pub const DEFAULT_J_MAX: usize = 3;

/// Below this `|G'(z)|` the crossing is reported as [`TransversalitySign::Degenerate`].
pub const TRANSVERSALITY_TOL: f64 = 1e-9;

/// Determinant of the sine/cosine system below which a root of `G` is rejected.
pub const SPLIT_SYSTEM_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharCoeffs<T> {
    pub p0: T,
    pub p1: T,
    pub p2: T,
    pub q0: T,
    pub q1: T,
    pub q2: T,
}

/// Coefficients of the characteristic equation at the positive equilibrium.
pub fn char_coeffs<T: Scalar>(params: &ModelParams<T>, estar: &Equilibrium<T>) -> Result<CharCoeffs<T>> {
    if estar.label != EquilibriumLabel::EStar {
        return Err(Error::NotPositiveEquilibrium(estar.label.as_str()));
    }
    if !estar.exists {
        return Err(Error::MissingPositiveEquilibrium);
    }
    let two = T::lit(2.0);
    let ModelParams {
        r1, r2, a1, a2, b1, b2, ..
    } = *params;
    let k = params.kappa();
    let (u, v) = (estar.point.u, estar.point.v);

    // diagonal entries of the instantaneous Jacobian
    let a11 = r1 - two * a1 * r1 * u;
    let a22 = r2 - two * a2 * r2 * v;
    let q = b1 * r1 * v;

    Ok(CharCoeffs {
        p2: k - a22 - a11,
        p1: -a11 * (k - a22) - k * a22 - b2 * r2 * u,
        p0: a11 * (k * a22 + b2 * r2 * u),
        q2: q,
        q1: q * (k - a22),
        q0: -q * k * a22,
    })
}

impl<T: Scalar> CharCoeffs<T> {
    pub fn g_cubic(&self) -> GCubic<T> {
        let two = T::lit(2.0);
        GCubic {
            m: self.p2 * self.p2 - self.q2 * self.q2 - two * self.p1,
            n: self.p1 * self.p1 + two * self.q0 * self.q2 - self.q1 * self.q1 - two * self.p0 * self.p2,
            h: self.p0 * self.p0 - self.q0 * self.q0,
        }
    }

    /// Scale of the terms of the characteristic function at `|λ| = omega`.
    fn magnitude(&self, omega: T) -> T {
        let w = omega.abs();
        w * w * w
            + (self.p2.abs() + self.q2.abs()) * w * w
            + (self.p1.abs() + self.q1.abs()) * w
            + self.p0.abs()
            + self.q0.abs()
    }
}

/// Left-hand side of the characteristic equation at `(lambda, s)`.
pub fn char_value<T: Scalar>(lambda: Complex<T>, s: T, coeffs: &CharCoeffs<T>) -> Complex<T> {
    let c = coeffs;
    let poly = ((lambda + c.p2) * lambda + c.p1) * lambda + c.p0;
    let delayed = (lambda * c.q2 + c.q1) * lambda + c.q0;
    poly + delayed * (-lambda * s).exp()
}

/// Routh–Hurwitz conditions for the delay-free cubic
/// `λ³ + (p2+q2) λ² + (p1+q1) λ + (p0+q0)`.
pub fn h1_holds<T: Scalar>(coeffs: &CharCoeffs<T>) -> bool {
    let c0 = coeffs.p0 + coeffs.q0;
    c0 > T::zero() && (coeffs.p2 + coeffs.q2) * (coeffs.p1 + coeffs.q1) > c0
}

/// Residuals of the real and imaginary parts of the characteristic equation
/// at `λ = iω`, written as the sine/cosine pair
///
/// ```text
/// q1 ω sin ωs + (q0 − q2 ω²) cos ωs = p2 ω² − p0
/// q1 ω cos ωs − (q0 − q2 ω²) sin ωs = ω³ − p1 ω
/// ```
pub fn split_residuals<T: Scalar>(coeffs: &CharCoeffs<T>, omega: T, s: T) -> (T, T) {
    let c = coeffs;
    let (sin, cos) = (omega * s).sin_cos();
    let a = c.q0 - c.q2 * omega * omega;
    let b = c.q1 * omega;
    let re = b * sin + a * cos - (c.p2 * omega * omega - c.p0);
    let im = b * cos - a * sin - (omega * omega * omega - c.p1 * omega);
    (re, im)
}

/// `G(z) = z³ + m z² + n z + h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GCubic<T> {
    pub m: T,
    pub n: T,
    pub h: T,
}

impl<T: Scalar> GCubic<T> {
    pub fn as_cubic(&self) -> MonicCubic<T> {
        MonicCubic::new(self.m, self.n, self.h)
    }

    pub fn eval(&self, z: T) -> T {
        self.as_cubic().eval(z)
    }

    pub fn derivative(&self, z: T) -> T {
        self.as_cubic().derivative(z)
    }

    /// Positive real roots in ascending order.
    pub fn positive_roots(&self) -> Vec<T> {
        let tol = T::lit(1e-9);
        self.as_cubic().real_roots().into_iter().filter(|&z| z > tol).collect()
    }

    /// Sign of `G'(z)`, without checking that `z` is a root.
    pub fn crossing_sign(&self, z: T) -> TransversalitySign {
        let d = self.derivative(z);
        if d.abs() < T::lit(TRANSVERSALITY_TOL) {
            TransversalitySign::Degenerate
        } else if d > T::zero() {
            TransversalitySign::Positive
        } else {
            TransversalitySign::Negative
        }
    }

    /// Sign of `G'(z)` at a root `z`; the sign of `Re dλ/ds` at the crossing.
    pub fn transversality_sign(&self, z: T) -> Result<TransversalitySign> {
        let residual = self.eval(z).abs();
        let scale = T::one().max(self.as_cubic().magnitude(z));
        if !(residual <= T::tol(1e-8) * scale) {
            return Err(Error::NotARoot {
                z: z.as_f64(),
                residual: residual.as_f64(),
            });
        }
        Ok(self.crossing_sign(z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransversalitySign {
    Positive,
    Negative,
    Degenerate,
}

impl TransversalitySign {
    pub fn as_str(self) -> &'static str {
        match self {
            TransversalitySign::Positive => "Positive",
            TransversalitySign::Negative => "Negative",
            TransversalitySign::Degenerate => "Degenerate",
        }
    }
}

/// Sign of `G'(z)` for the cubic built from `coeffs`. Errors when `z` is not a
/// root of `G`.
pub fn transversality_sign<T: Scalar>(z: T, coeffs: &CharCoeffs<T>) -> Result<TransversalitySign> {
    coeffs.g_cubic().transversality_sign(z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopfCandidate<T> {
    /// Positive root of `G`.
    pub z: T,
    /// Crossing frequency `sqrt(z)`.
    pub omega: T,
    /// Critical delays `(θ + 2jπ) / ω` for `j = 0..=j_max`.
    pub delays: Vec<T>,
    pub transversality_sign: TransversalitySign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRoot<T> {
    pub z: T,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScan<T> {
    pub g: GCubic<T>,
    pub candidates: Vec<HopfCandidate<T>>,
    pub rejected: Vec<RejectedRoot<T>>,
}

/// Positive roots of `G` turned into frequencies and delay ladders, with the
/// roots that could not be turned into a delay listed separately.
pub fn find_hopf_candidates<T: Scalar>(coeffs: &CharCoeffs<T>, j_max: usize) -> CandidateScan<T> {
    let g = coeffs.g_cubic();
    let mut candidates = Vec::new();
    let mut rejected = Vec::new();
    let two_pi = T::TAU();

    for z in g.positive_roots() {
        let omega = z.sqrt();
        let a = coeffs.q0 - coeffs.q2 * z;
        let b = coeffs.q1 * omega;
        let det = a * a + b * b;
        if det < T::lit(SPLIT_SYSTEM_TOL) {
            rejected.push(RejectedRoot {
                z,
                reason: format!("sine/cosine system is singular (determinant {det:e}); delay undetermined"),
            });
            continue;
        }
        // [ b  a ] [sin]   [p2 ω² − p0]
        // [-a  b ] [cos] = [ω³ − p1 ω ]
        let rhs_re = coeffs.p2 * z - coeffs.p0;
        let rhs_im = z * omega - coeffs.p1 * omega;
        let sin = (b * rhs_re - a * rhs_im) / det;
        let cos = (a * rhs_re + b * rhs_im) / det;
        let mut theta = sin.atan2(cos);
        if theta < T::zero() {
            theta = theta + two_pi;
        }
        let delays: Vec<T> = (0..=j_max)
            .map(|j| (theta + two_pi * T::from_usize_lossy(j)) / omega)
            .collect();

        let scale = T::one().max(coeffs.magnitude(omega));
        let worst = delays
            .iter()
            .map(|&s| char_value(Complex::new(T::zero(), omega), s, coeffs).norm())
            .fold(T::zero(), T::max);
        if !(worst <= T::tol(1e-8) * scale) {
            rejected.push(RejectedRoot {
                z,
                reason: format!("characteristic residual {worst:e} at the recovered delays"),
            });
            continue;
        }

        candidates.push(HopfCandidate {
            z,
            omega,
            delays,
            transversality_sign: g.crossing_sign(z),
        });
    }

    CandidateScan {
        g,
        candidates,
        rejected,
    }
}

pub fn hopf_candidates<T: Scalar>(coeffs: &CharCoeffs<T>, j_max: usize) -> Vec<HopfCandidate<T>> {
    find_hopf_candidates(coeffs, j_max).candidates
}

/// First critical delay and the candidate it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalDelay<T> {
    pub s0: T,
    pub candidate: HopfCandidate<T>,
}

/// Smallest `s_k^(0)` over all candidates, or `None` when `G` has no usable
/// positive root. Errors when the positive equilibrium does not exist.
pub fn s0<T: Scalar>(params: &ModelParams<T>) -> Result<Option<CriticalDelay<T>>> {
    let estar = positive_equilibrium(params)?;
    let coeffs = char_coeffs(params, &estar)?;
    Ok(first_crossing(&hopf_candidates(&coeffs, DEFAULT_J_MAX)))
}

pub fn first_crossing<T: Scalar>(candidates: &[HopfCandidate<T>]) -> Option<CriticalDelay<T>> {
    candidates
        .iter()
        .filter(|c| !c.delays.is_empty())
        .min_by(|a, b| {
            a.delays[0]
                .partial_cmp(&b.delays[0])
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|c| CriticalDelay {
            s0: c.delays[0],
            candidate: c.clone(),
        })
}

/// Local stability of `E*` at the delay stored in `params`.
///
/// Stable for `s < s0` when the delay-free cubic is Routh–Hurwitz stable;
/// unstable when `p0 + q0 < 0` (a positive real root for every delay) or
/// between `s0` and the next critical delay when the first crossing is
/// rightward. Everything else is `Undetermined`.
pub fn positive_equilibrium_stability<T: Scalar>(params: &ModelParams<T>) -> Result<Stability> {
    let estar = positive_equilibrium(params)?;
    let coeffs = char_coeffs(params, &estar)?;
    if coeffs.p0 + coeffs.q0 < T::zero() {
        return Ok(Stability::Unstable);
    }
    if !h1_holds(&coeffs) {
        return Ok(Stability::Undetermined);
    }
    let candidates = hopf_candidates(&coeffs, DEFAULT_J_MAX);
    let Some(first) = first_crossing(&candidates) else {
        return Ok(Stability::Stable);
    };
    let s = params.s;
    if s < first.s0 {
        return Ok(Stability::Stable);
    }
    let next = candidates
        .iter()
        .flat_map(|c| c.delays.iter().copied())
        .filter(|&d| d > first.s0)
        .fold(T::infinity(), T::min);
    if s > first.s0 && s < next && first.candidate.transversality_sign == TransversalitySign::Positive {
        Ok(Stability::Unstable)
    } else {
        Ok(Stability::Undetermined)
    }
}
