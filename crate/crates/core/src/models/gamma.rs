use num_complex::Complex;

use crate::real::Real;

/// Dense square matrix, row-major.
pub type Matrix<T> = Vec<Complex<T>>;

/// Mutually anticommuting Hermitian matrices spanning `H = Σ h_i γ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaBasis<T> {
    pub dim: usize,
    pub matrices: Vec<Matrix<T>>,
}

fn pauli<T: Real>() -> [[Complex<T>; 4]; 4] {
    let o = Complex::new(T::zero(), T::zero());
    let r = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    [[r, o, o, r], [o, r, r, o], [o, -i, i, o], [r, o, o, -r]]
}

/// Kronecker product of two 2×2 matrices, index `2 i_a + i_b`.
fn kron2<T: Real>(a: &[Complex<T>; 4], b: &[Complex<T>; 4]) -> Matrix<T> {
    let mut m = vec![Complex::new(T::zero(), T::zero()); 16];
    for ar in 0..2 {
        for ac in 0..2 {
            for br in 0..2 {
                for bc in 0..2 {
                    m[(2 * ar + br) * 4 + 2 * ac + bc] = a[ar * 2 + ac] * b[br * 2 + bc];
                }
            }
        }
    }
    m
}

impl<T: Real> GammaBasis<T> {
    /// `(σ_x, σ_y, σ_z)`.
    pub fn two_band() -> Self {
        let p = pauli::<T>();
        GammaBasis { dim: 2, matrices: vec![p[1].to_vec(), p[2].to_vec(), p[3].to_vec()] }
    }

    /// `γ0 = σ_z⊗τ_x`, `γ1 = σ_x⊗1`, `γ2 = σ_y⊗1`, `γ3 = σ_z⊗τ_z`.
    pub fn four_band() -> Self {
        let p = pauli::<T>();
        GammaBasis {
            dim: 4,
            matrices: vec![kron2(&p[3], &p[1]), kron2(&p[1], &p[0]), kron2(&p[2], &p[0]), kron2(&p[3], &p[3])],
        }
    }

    /// `Σ h_i γ_i`.
    pub fn hamiltonian(&self, h: &[T]) -> Matrix<T> {
        let n = self.dim * self.dim;
        let mut out = vec![Complex::new(T::zero(), T::zero()); n];
        for (g, &hi) in self.matrices.iter().zip(h) {
            for (o, &x) in out.iter_mut().zip(g) {
                *o = *o + x * hi;
            }
        }
        out
    }

    /// `⟨ψ|γ_i|ψ⟩` for every basis matrix.
    pub fn expectations(&self, psi: &[Complex<T>]) -> Vec<T> {
        self.matrices.iter().map(|g| expectation(g, psi, self.dim)).collect()
    }
}

pub(crate) fn expectation<T: Real>(m: &[Complex<T>], psi: &[Complex<T>], dim: usize) -> T {
    let mut acc = Complex::new(T::zero(), T::zero());
    for r in 0..dim {
        let mut row = Complex::new(T::zero(), T::zero());
        for c in 0..dim {
            row = row + m[r * dim + c] * psi[c];
        }
        acc = acc + psi[r].conj() * row;
    }
    acc.re
}

#[cfg(test)]
pub(crate) fn matmul<T: Real>(a: &[Complex<T>], b: &[Complex<T>], dim: usize) -> Matrix<T> {
    let mut out = vec![Complex::new(T::zero(), T::zero()); dim * dim];
    for r in 0..dim {
        for k in 0..dim {
            let x = a[r * dim + k];
            for c in 0..dim {
                out[r * dim + c] = out[r * dim + c] + x * b[k * dim + c];
            }
        }
    }
    out
}
