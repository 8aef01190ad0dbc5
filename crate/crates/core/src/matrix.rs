//! Small dense complex matrices for gate unitaries.

use std::ops::Mul;

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Matrix { dim, data: rows.into_iter().flatten().collect() }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix { dim, data: vec![ZERO; dim * dim] };
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    /// Number of qubits the matrix acts on.
    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        Matrix { dim: d, data: (0..d * d).map(|k| self.get(k % d, k / d).conj()).collect() }
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        Matrix { dim: d, data: (0..d * d).map(|k| self.get(k % d, k / d)).collect() }
    }

    pub fn kron(&self, other: &Matrix) -> Self {
        let (a, b) = (self.dim, other.dim);
        let d = a * b;
        let mut data = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                data[r * d + c] = self.get(r / b, c / b) * other.get(r % b, c % b);
            }
        }
        Matrix { dim: d, data }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Matrix { dim: self.dim, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (&self.adjoint() * self).approx_eq(&Matrix::identity(self.dim), tol)
    }

    pub fn approx_eq(&self, other: &Matrix, tol: f64) -> bool {
        self.dim == other.dim && self.data.iter().zip(&other.data).all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Equal up to a global phase.
    pub fn approx_eq_up_to_phase(&self, other: &Matrix, tol: f64) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let Some(k) = (0..self.data.len()).max_by(|&i, &j| other.data[i].norm().total_cmp(&other.data[j].norm())) else {
            return true;
        };
        if other.data[k].norm() < tol {
            return self.approx_eq(other, tol);
        }
        let phase = self.data[k] / other.data[k];
        if (phase.norm() - 1.0).abs() > tol {
            return false;
        }
        self.approx_eq(&other.scale(phase), tol)
    }

    pub fn x() -> Self {
        Matrix::from_rows(vec![vec![ZERO, ONE], vec![ONE, ZERO]])
    }

    pub fn y() -> Self {
        Matrix::from_rows(vec![vec![ZERO, -I], vec![I, ZERO]])
    }

    pub fn z() -> Self {
        Matrix::from_rows(vec![vec![ONE, ZERO], vec![ZERO, -ONE]])
    }

    pub fn h() -> Self {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Matrix::from_rows(vec![vec![s, s], vec![s, -s]])
    }

    pub fn s() -> Self {
        Matrix::from_rows(vec![vec![ONE, ZERO], vec![ZERO, I]])
    }

    /// `exp(-iφX/2)`.
    pub fn ux(phi: f64) -> Self {
        let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
        Matrix::from_rows(vec![
            vec![Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            vec![Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ])
    }

    /// `exp(-iθZ/2)`.
    pub fn uz(theta: f64) -> Self {
        Matrix::from_rows(vec![
            vec![Complex64::from_polar(1.0, -theta / 2.0), ZERO],
            vec![ZERO, Complex64::from_polar(1.0, theta / 2.0)],
        ])
    }

    /// CNOT with the first qubit as control.
    pub fn cnot() -> Self {
        let mut m = Matrix::identity(4);
        m.data[2 * 4 + 2] = ZERO;
        m.data[3 * 4 + 3] = ZERO;
        m.data[2 * 4 + 3] = ONE;
        m.data[3 * 4 + 2] = ONE;
        m
    }

    pub fn cz() -> Self {
        let mut m = Matrix::identity(4);
        m.data[15] = -ONE;
        m
    }

    /// Pauli string `Z^z X^x` on one qubit.
    pub fn pauli_power(z: u8, x: u8) -> Self {
        let mut m = Matrix::identity(2);
        if x & 1 == 1 {
            m = &m * &Matrix::x();
        }
        if z & 1 == 1 {
            m = &Matrix::z() * &m;
        }
        m
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let d = self.dim;
        let mut data = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    data[r * d + c] += a * rhs.data[k * d + c];
                }
            }
        }
        Matrix { dim: d, data }
    }
}
