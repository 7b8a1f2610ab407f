//! Small dense complex linear algebra helpers.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub const I: C64 = Complex { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Pauli matrices σ¹, σ², σ³.
pub fn pauli(k: usize) -> CMatrix {
    let z = c(0.0);
    let o = c(1.0);
    match k {
        1 => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMatrix::from_row_slice(2, 2, &[z, -I, I, z]),
        3 => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("pauli index must be 1, 2 or 3"),
    }
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Deviation from Hermiticity, `max |m - m†|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Only the Hermitian part `(m + m†)/2` is used.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let sym = (m + m.adjoint()) * c(0.5);
    let mut values: Vec<f64> = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn largest_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .last()
        .copied()
        .unwrap_or(f64::NEG_INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        for k in 1..=3 {
            let s = pauli(k);
            assert!(max_abs_diff(&(&s * &s), &identity(2)) == 0.0);
            assert!(hermitian_deviation(&s) == 0.0);
        }
        // σ¹σ² = iσ³
        let prod = pauli(1) * pauli(2);
        assert_eq!(max_abs_diff(&prod, &(pauli(3) * I)), 0.0);
    }

    #[test]
    fn eigenvalues_of_pauli_combination() {
        // 3σ¹ + 4σ³ has eigenvalues ±5.
        let m = pauli(1) * c(3.0) + pauli(3) * c(4.0);
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] + 5.0).abs() < 1e-12);
        assert!((ev[1] - 5.0).abs() < 1e-12);
        assert!((largest_eigenvalue(&m) - 5.0).abs() < 1e-12);
    }
}
