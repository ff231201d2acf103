//! Closed-form roots of a real monic cubic.

use num_complex::Complex;

use crate::scalar::Scalar;

/// `z^3 + b z^2 + c z + d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonicCubic<T> {
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Scalar> MonicCubic<T> {
    pub fn new(b: T, c: T, d: T) -> Self {
        Self { b, c, d }
    }

    #[inline]
    pub fn eval(&self, z: T) -> T {
        ((z + self.b) * z + self.c) * z + self.d
    }

    #[inline]
    pub fn derivative(&self, z: T) -> T {
        (T::lit(3.0) * z + T::lit(2.0) * self.b) * z + self.c
    }

    /// Sum of the magnitudes of the terms of the polynomial at `z`; the scale
    /// against which a residual should be judged.
    pub fn magnitude(&self, z: T) -> T {
        let a = z.abs();
        a * a * a + self.b.abs() * a * a + self.c.abs() * a + self.d.abs()
    }

    fn eval_complex(&self, z: Complex<T>) -> Complex<T> {
        ((z + self.b) * z + self.c) * z + self.d
    }

    fn derivative_complex(&self, z: Complex<T>) -> Complex<T> {
        (z * T::lit(3.0) + self.b * T::lit(2.0)) * z + self.c
    }

    /// All three roots, real ones first in ascending order when there are
    /// three, otherwise the real root followed by the conjugate pair.
    ///
    /// Trigonometric form for three real roots, Cardano otherwise, then one
    /// Newton step per root.
    pub fn roots(&self) -> [Complex<T>; 3] {
        let zero = T::zero();
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let shift = self.b / three;
        let p = self.c - self.b * self.b / three;
        let q = two * self.b * self.b * self.b / T::lit(27.0) - self.b * self.c / three + self.d;
        let half_q = q / two;
        let third_p = p / three;
        let disc = half_q * half_q + third_p * third_p * third_p;

        let raw: [Complex<T>; 3] = if disc < zero {
            let rho = (-third_p).sqrt();
            let cos_arg = (-half_q / (rho * rho * rho)).max(-T::one()).min(T::one());
            let phi = cos_arg.acos();
            let tau = two * T::PI();
            let mut r = [zero; 3];
            for (k, slot) in r.iter_mut().enumerate() {
                *slot = two * rho * ((phi - tau * T::from_usize_lossy(k)) / three).cos() - shift;
            }
            r.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            r.map(|x| Complex::new(x, zero))
        } else {
            let sq = disc.sqrt();
            let a = -half_q.signum() * (half_q.abs() + sq).cbrt();
            let b = if a == zero { zero } else { -third_p / a };
            let real = a + b - shift;
            let re = -(a + b) / two - shift;
            let im = three.sqrt() / two * (a - b);
            [Complex::new(real, zero), Complex::new(re, im), Complex::new(re, -im)]
        };

        raw.map(|z| {
            let dz = self.derivative_complex(z);
            if dz.norm() == zero {
                return z;
            }
            let step = self.eval_complex(z) / dz;
            let polished = z - step;
            if polished.re.is_finite() && polished.im.is_finite() {
                if z.im == zero {
                    Complex::new(polished.re, zero)
                } else {
                    polished
                }
            } else {
                z
            }
        })
    }

    /// Real roots in ascending order (relative imaginary part below `1e-9`).
    pub fn real_roots(&self) -> Vec<T> {
        let tol = T::lit(1e-9);
        let mut out: Vec<T> = self
            .roots()
            .into_iter()
            .filter(|z| z.im.abs() <= tol * T::one().max(z.re.abs()))
            .map(|z| z.re)
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_roots(a: f64, b: f64, c: f64) -> MonicCubic<f64> {
        MonicCubic::new(-(a + b + c), a * b + b * c + c * a, -a * b * c)
    }

    #[test]
    fn three_real_roots() {
        let g = from_roots(-36.0, -0.3, 0.04);
        let r = g.real_roots();
        assert_eq!(r.len(), 3);
        for (x, y) in r.iter().zip([-36.0, -0.3, 0.04]) {
            assert!((x - y).abs() < 1e-12 * (1.0 + y.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn one_real_root_with_complex_pair() {
        // (z - 2)(z^2 + 1)
        let g = MonicCubic::<f64>::new(-2.0, 1.0, -2.0);
        let r = g.roots();
        assert!((r[0] - Complex::new(2.0, 0.0)).norm() < 1e-14);
        assert!((r[1].im.abs() - 1.0).abs() < 1e-14);
        assert_eq!(g.real_roots(), vec![2.0]);
    }

    #[test]
    fn double_root() {
        let g = from_roots(1.0, 1.0, -3.0);
        let r = g.real_roots();
        assert!(r.iter().any(|x| (x - 1.0).abs() < 1e-7));
        assert!(r.iter().any(|x| (x + 3.0).abs() < 1e-12));
    }

    #[test]
    fn zero_root() {
        // z^3 - z
        let r = MonicCubic::<f64>::new(0.0, -1.0, 0.0).real_roots();
        assert_eq!(r.len(), 3);
        assert!((r[0] + 1.0).abs() < 1e-15 && r[1].abs() < 1e-15 && (r[2] - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn roots_satisfy_polynomial(b in -50.0f64..50.0, c in -50.0f64..50.0, d in -50.0f64..50.0) {
            let g = MonicCubic::new(b, c, d);
            for z in g.roots() {
                let res = g.eval_complex(z).norm();
                let scale = z.norm().powi(3) + b.abs() * z.norm_sqr() + c.abs() * z.norm() + d.abs();
                prop_assert!(res <= 1e-12 * scale.max(1e-300), "root {z} residual {res}");
            }
        }

        #[test]
        fn real_roots_are_recovered(a in -20.0f64..20.0, b in -20.0f64..20.0, c in -20.0f64..20.0) {
            let g = from_roots(a, b, c);
            let found = g.real_roots();
            for t in [a, b, c] {
                // near-double roots are only determined to sqrt(eps)
                let sep = [a, b, c].iter().filter(|&&x| x != t).map(|x| (x - t).abs()).fold(f64::INFINITY, f64::min);
                if sep > 1e-3 {
                    prop_assert!(found.iter().any(|x| (x - t).abs() < 1e-7 * (1.0 + t.abs())), "missing {t} in {found:?}");
                }
            }
        }
    }
}
