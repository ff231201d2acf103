//! Dense 3×3 complex linear algebra used by the normal-form computation.

use num_complex::Complex;

use crate::scalar::Scalar;

pub type CVec3<T> = [Complex<T>; 3];
pub type CMat3<T> = [[Complex<T>; 3]; 3];
pub type RMat3<T> = [[T; 3]; 3];

pub fn complexify<T: Scalar>(m: &RMat3<T>) -> CMat3<T> {
    m.map(|row| row.map(|x| Complex::new(x, T::zero())))
}

pub fn identity<T: Scalar>() -> CMat3<T> {
    let mut m = [[Complex::new(T::zero(), T::zero()); 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex::new(T::one(), T::zero());
    }
    m
}

/// `a * alpha + b * beta` entrywise.
pub fn combine<T: Scalar>(a: &CMat3<T>, alpha: Complex<T>, b: &CMat3<T>, beta: Complex<T>) -> CMat3<T> {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][j] * alpha + b[i][j] * beta;
        }
    }
    out
}

pub fn mat_vec<T: Scalar>(m: &CMat3<T>, x: &CVec3<T>) -> CVec3<T> {
    let mut y = [Complex::new(T::zero(), T::zero()); 3];
    for (yi, row) in y.iter_mut().zip(m) {
        *yi = row[0] * x[0] + row[1] * x[1] + row[2] * x[2];
    }
    y
}

/// Row vector times matrix, `x m`.
pub fn vec_mat<T: Scalar>(x: &CVec3<T>, m: &CMat3<T>) -> CVec3<T> {
    let mut y = [Complex::new(T::zero(), T::zero()); 3];
    for (j, yj) in y.iter_mut().enumerate() {
        *yj = x[0] * m[0][j] + x[1] * m[1][j] + x[2] * m[2][j];
    }
    y
}

/// Bilinear (non-conjugating) dot product.
pub fn dot<T: Scalar>(x: &CVec3<T>, y: &CVec3<T>) -> Complex<T> {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

pub fn norm<T: Scalar>(x: &CVec3<T>) -> T {
    (x[0].norm_sqr() + x[1].norm_sqr() + x[2].norm_sqr()).sqrt()
}

pub fn conj<T: Scalar>(x: &CVec3<T>) -> CVec3<T> {
    x.map(|z| z.conj())
}

pub fn transpose<T: Scalar>(m: &CMat3<T>) -> CMat3<T> {
    let mut t = *m;
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

/// Bilinear cross product; orthogonal (without conjugation) to both inputs.
pub fn cross<T: Scalar>(a: &CVec3<T>, b: &CVec3<T>) -> CVec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn det<T: Scalar>(m: &CMat3<T>) -> Complex<T> {
    dot(&m[0], &cross(&m[1], &m[2]))
}

/// `|det m| / (|row0| |row1| |row2|)`: 1 for orthogonal rows, 0 for a
/// singular matrix (Hadamard ratio).
pub fn hadamard_ratio<T: Scalar>(m: &CMat3<T>) -> T {
    let denom = norm(&m[0]) * norm(&m[1]) * norm(&m[2]);
    if denom == T::zero() {
        return T::zero();
    }
    det(m).norm() / denom
}

/// Right null vector of a (numerically) rank-two matrix, taken as the largest
/// cross product of two rows.
pub fn null_vector<T: Scalar>(m: &CMat3<T>) -> CVec3<T> {
    let candidates = [cross(&m[0], &m[1]), cross(&m[1], &m[2]), cross(&m[2], &m[0])];
    let mut best = candidates[0];
    let mut best_norm = norm(&best);
    for c in &candidates[1..] {
        let n = norm(c);
        if n > best_norm {
            best = *c;
            best_norm = n;
        }
    }
    best
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` for an exactly singular pivot.
pub fn solve<T: Scalar>(m: &CMat3<T>, b: &CVec3<T>) -> Option<CVec3<T>> {
    let mut a = *m;
    let mut rhs = *b;
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            a[i][col]
                .norm()
                .partial_cmp(&a[j][col].norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].norm() == T::zero() {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, src) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst = *dst - factor * *src;
            }
            rhs[row] = rhs[row] - factor * rhs[col];
        }
    }
    let mut x = [Complex::new(T::zero(), T::zero()); 3];
    for row in (0..3).rev() {
        let mut acc = rhs[row];
        for k in row + 1..3 {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}
