//! Small dense helpers shared by the Floquet and Liouvillian code.
//!
//! Density matrices are vectorized row-major: `vec(ρ)[4a + b] = ρ^{ab}`.

use nalgebra::{SMatrix, SVector, SymmetricEigen};
use num_complex::Complex64;

use crate::model::Op4;

/// Superoperator acting on row-major vectorized 4×4 matrices.
pub type Superop = SMatrix<Complex64, 16, 16>;
/// Row-major vectorized 4×4 matrix.
pub type VecOp = SVector<Complex64, 16>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn vec_index(a: usize, b: usize) -> usize {
    4 * a + b
}

pub fn vectorize(m: &Op4) -> VecOp {
    VecOp::from_fn(|i, _| m[(i / 4, i % 4)])
}

pub fn unvectorize(v: &VecOp) -> Op4 {
    Op4::from_fn(|a, b| v[vec_index(a, b)])
}

/// Matrix of `ρ ↦ A ρ B`.
pub fn sandwich(a: &Op4, b: &Op4) -> Superop {
    Superop::from_fn(|r, c| a[(r / 4, c / 4)] * b[(c % 4, r % 4)])
}

/// Matrix of `ρ ↦ A ρ`.
pub fn left_mul(a: &Op4) -> Superop {
    sandwich(a, &Op4::identity())
}

/// Matrix of `ρ ↦ ρ B`.
pub fn right_mul(b: &Op4) -> Superop {
    sandwich(&Op4::identity(), b)
}

/// Accumulates `A ⊗ Bᵀ` (the matrix of `ρ ↦ A ρ B`) scaled by `scale` into `out`.
pub fn add_sandwich(out: &mut Superop, a: &Op4, b: &Op4, scale: Complex64) {
    for ar in 0..4 {
        for ac in 0..4 {
            let x = a[(ar, ac)];
            if x == ZERO {
                continue;
            }
            let x = x * scale;
            for bc in 0..4 {
                for br in 0..4 {
                    let y = b[(br, bc)];
                    if y != ZERO {
                        out[(4 * ar + bc, 4 * ac + br)] += x * y;
                    }
                }
            }
        }
    }
}

/// Given the matrix of a map `X`, returns the matrix of `ρ ↦ (X[ρ†])†`.
pub fn adjoint_partner(x: &Superop) -> Superop {
    Superop::from_fn(|r, c| {
        let (a, b) = (r / 4, r % 4);
        let (cc, d) = (c / 4, c % 4);
        x[(vec_index(b, a), vec_index(d, cc))].conj()
    })
}

/// Row functional `vec(ρ) ↦ Tr ρ`.
pub fn trace_row() -> SMatrix<Complex64, 1, 16> {
    SMatrix::<Complex64, 1, 16>::from_fn(|_, c| if c / 4 == c % 4 { ONE } else { ZERO })
}

/// `exp(−i H dt)` for Hermitian `H`, via its eigendecomposition.
pub fn expm_hermitian(h: &Op4, dt: f64) -> Op4 {
    let eig = SymmetricEigen::new(*h);
    let v = eig.eigenvectors;
    let phases = Op4::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * dt)));
    v * phases * v.adjoint()
}

pub fn max_abs<const R: usize, const C: usize>(m: &SMatrix<Complex64, R, C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Deviation from unitarity, `max |U†U − I|`.
pub fn unitarity_defect(u: &Op4) -> f64 {
    max_abs(&(u.adjoint() * u - Op4::identity()))
}

pub fn hermiticity_defect(m: &Op4) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &Op4) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h).eigenvalues.min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_op(rng: &mut ChaCha8Rng) -> Op4 {
        Op4::from_fn(|_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn sandwich_matches_direct_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (a, b, rho) = (random_op(&mut rng), random_op(&mut rng), random_op(&mut rng));
        let direct = vectorize(&(a * rho * b));
        let via = sandwich(&a, &b) * vectorize(&rho);
        assert!((direct - via).norm() < 1e-13);
        let mut acc = Superop::zeros();
        add_sandwich(&mut acc, &a, &b, Complex64::new(0.0, 2.0));
        assert!((acc - sandwich(&a, &b) * Complex64::new(0.0, 2.0)).norm() < 1e-13);
        assert_eq!(unvectorize(&vectorize(&rho)), rho);
    }

    #[test]
    fn adjoint_partner_is_the_hermitian_conjugate_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (a, b, rho) = (random_op(&mut rng), random_op(&mut rng), random_op(&mut rng));
        let x = sandwich(&a, &b);
        // (A ρ† B)† = B† ρ A†
        let expected = vectorize(&(b.adjoint() * rho * a.adjoint()));
        assert!((adjoint_partner(&x) * vectorize(&rho) - expected).norm() < 1e-13);
    }

    #[test]
    fn hermitian_exponential_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_op(&mut rng);
        let h = m + m.adjoint();
        let u = expm_hermitian(&h, 0.37);
        assert!(unitarity_defect(&u) < 1e-14);
        let series = (h * Complex64::new(0.0, -0.37)).exp();
        assert!(max_abs(&(u - series)) < 1e-12);
    }
}
