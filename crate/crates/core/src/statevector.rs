//! Dense statevector simulator.
//!
//! Qubit `0` is the most significant bit of the basis index. Measurement
//! outcome `0` is the `+1` eigenvalue of the measured observable. The number
//! of qubits is capped (14 by default, `MBQC_MAX_QUBITS` overrides).

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{check_qubit, Error, Result};
use crate::matrix::Matrix;
use crate::pauli::{Pauli, PauliString};
use crate::policy::{BellBits, OutcomePolicy};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const DEFAULT_CAP: usize = 14;
const NORM_TOL: f64 = 1e-9;

/// Largest register the simulator accepts.
pub fn max_qubits() -> usize {
    std::env::var("MBQC_MAX_QUBITS").ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_CAP)
}

fn check_cap(n: usize) -> Result<()> {
    let cap = max_qubits();
    if n > cap {
        Err(Error::CapExceeded { requested: n, cap })
    } else {
        Ok(())
    }
}

/// Single-qubit measurement basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    X,
    Y,
    Z,
    /// Eigenbasis of `cos ω X + sin ω Y`: `(|0⟩ ± e^{iω}|1⟩)/√2`.
    Equatorial(f64),
}

impl Basis {
    /// The eigenvectors for outcomes 0 and 1.
    fn vectors(self) -> [[Complex64; 2]; 2] {
        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let eq = |w: f64| {
            let e = Complex64::from_polar(FRAC_1_SQRT_2, w);
            [[r, e], [r, -e]]
        };
        match self {
            Basis::Z => [[Complex64::new(1.0, 0.0), ZERO], [ZERO, Complex64::new(1.0, 0.0)]],
            Basis::X => eq(0.0),
            Basis::Y => eq(std::f64::consts::FRAC_PI_2),
            Basis::Equatorial(w) => eq(w),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Result<Self> {
        check_cap(n)?;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn plus(n: usize) -> Result<Self> {
        check_cap(n)?;
        let a = Complex64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
        Ok(StateVector { n, amps: vec![a; 1 << n] })
    }

    /// Computational basis state; `index` uses qubit 0 as the high bit.
    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(n)?;
        if index >= s.amps.len() {
            return Err(Error::QubitOutOfRange { index, n: s.amps.len() });
        }
        s.amps[0] = ZERO;
        s.amps[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::Dimension { expected: amps.len().next_power_of_two(), got: amps.len() });
        }
        let n = amps.len().trailing_zeros() as usize;
        check_cap(n)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(StateVector { n, amps })
    }

    /// Single-qubit state `a|0⟩ + b|1⟩`, normalised.
    pub fn qubit(a: Complex64, b: Complex64) -> Result<Self> {
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if norm < NORM_TOL {
            return Err(Error::NotNormalized(0.0));
        }
        Self::from_amplitudes(vec![a / norm, b / norm])
    }

    /// `|Φ_0⟩ = (|00⟩ + |11⟩)/√2`.
    pub fn bell() -> Self {
        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        StateVector { n: 2, amps: vec![r, ZERO, ZERO, r] }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `self ⊗ other`, with `other`'s qubits appended.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        check_cap(self.n + other.n)?;
        let amps = self.amps.iter().flat_map(|a| other.amps.iter().map(move |b| a * b)).collect();
        Ok(StateVector { n: self.n + other.n, amps })
    }

    fn bit(&self, idx: usize, q: usize) -> usize {
        (idx >> (self.n - 1 - q)) & 1
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    /// Apply a `2^k × 2^k` unitary to `qubits` (first listed qubit is the
    /// high bit of the matrix index).
    pub fn apply_matrix(&mut self, qubits: &[usize], m: &Matrix) -> Result<()> {
        for (i, &q) in qubits.iter().enumerate() {
            check_qubit(q, self.n)?;
            if qubits[..i].contains(&q) {
                return Err(Error::CoincidentQubits(q));
            }
        }
        let k = qubits.len();
        if m.dim() != 1 << k {
            return Err(Error::Dimension { expected: 1 << k, got: m.dim() });
        }
        let masks: Vec<usize> = qubits.iter().map(|&q| self.mask(q)).collect();
        let all: usize = masks.iter().sum();
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|sub| {
                (0..k).filter(|&i| (sub >> (k - 1 - i)) & 1 == 1).map(|i| masks[i]).sum()
            })
            .collect();
        let mut local = vec![ZERO; 1 << k];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (s, off) in offsets.iter().enumerate() {
                local[s] = self.amps[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (c, v) in local.iter().enumerate() {
                    acc += m.get(r, c) * v;
                }
                self.amps[base | off] = acc;
            }
        }
        Ok(())
    }

    pub fn apply_1q(&mut self, q: usize, m: &Matrix) -> Result<()> {
        self.apply_matrix(&[q], m)
    }

    pub fn h(&mut self, q: usize) -> Result<()> {
        self.apply_1q(q, &Matrix::h())
    }

    pub fn s(&mut self, q: usize) -> Result<()> {
        self.apply_1q(q, &Matrix::s())
    }

    pub fn x(&mut self, q: usize) -> Result<()> {
        self.apply_1q(q, &Matrix::x())
    }

    pub fn z(&mut self, q: usize) -> Result<()> {
        self.apply_1q(q, &Matrix::z())
    }

    pub fn ux(&mut self, q: usize, phi: f64) -> Result<()> {
        self.apply_1q(q, &Matrix::ux(phi))
    }

    pub fn uz(&mut self, q: usize, theta: f64) -> Result<()> {
        self.apply_1q(q, &Matrix::uz(theta))
    }

    pub fn cnot(&mut self, c: usize, t: usize) -> Result<()> {
        self.apply_matrix(&[c, t], &Matrix::cnot())
    }

    pub fn cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.apply_matrix(&[a, b], &Matrix::cz())
    }

    /// Multiply by the Pauli operator, phase included.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.amps = self.pauli_image(p)?;
        Ok(())
    }

    fn pauli_image(&self, p: &PauliString) -> Result<Vec<Complex64>> {
        if p.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: p.len() });
        }
        let mut xmask = 0;
        let mut zmask = 0;
        let mut ys = 0u32;
        for q in 0..self.n {
            let m = self.mask(q);
            match p.get(q) {
                Pauli::I => {}
                Pauli::X => xmask |= m,
                Pauli::Z => zmask |= m,
                Pauli::Y => {
                    xmask |= m;
                    zmask |= m;
                    ys += 1;
                }
            }
        }
        // Y = iXZ, so each Y contributes a factor i on top of the XZ action.
        let lead = Complex64::i().powu(p.phase() as u32 + ys);
        let mut out = vec![ZERO; self.amps.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            let sign = if (idx & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[idx ^ xmask] = a * lead * sign;
        }
        Ok(out)
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n, got: other.n });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `⟨ψ|P|ψ⟩` for a Hermitian Pauli.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        let img = self.pauli_image(p)?;
        Ok(self.amps.iter().zip(&img).map(|(a, b)| a.conj() * b).sum::<Complex64>().re)
    }

    /// Probability of outcome 0 when measuring `q` in `basis`.
    pub fn prob_zero(&self, q: usize, basis: Basis) -> Result<f64> {
        check_qubit(q, self.n)?;
        let [b0, _] = basis.vectors();
        let m = self.mask(q);
        let mut p = 0.0;
        for idx in 0..self.amps.len() {
            if idx & m == 0 {
                let c = b0[0].conj() * self.amps[idx] + b0[1].conj() * self.amps[idx | m];
                p += c.norm_sqr();
            }
        }
        Ok(p)
    }

    /// Amplitudes of the remaining qubits after projecting `q` onto the
    /// basis vector for `outcome`, unnormalised.
    fn project_out(&self, q: usize, basis: Basis, outcome: u8) -> Vec<Complex64> {
        let b = basis.vectors()[outcome as usize];
        let m = self.mask(q);
        let low = m - 1;
        (0..self.amps.len() / 2)
            .map(|r| {
                let idx = ((r & !low) << 1) | (r & low);
                b[0].conj() * self.amps[idx] + b[1].conj() * self.amps[idx | m]
            })
            .collect()
    }

    fn draw(&self, q: usize, basis: Basis, policy: &mut OutcomePolicy) -> Result<u8> {
        let p0 = self.prob_zero(q, basis)?;
        policy.draw(p0.clamp(0.0, 1.0))
    }

    /// Measure `q` and remove it from the register.
    pub fn measure_discard(&mut self, q: usize, basis: Basis, policy: &mut OutcomePolicy) -> Result<u8> {
        let bit = self.draw(q, basis, policy)?;
        self.project_discard(q, basis, bit)?;
        Ok(bit)
    }

    /// Project `q` onto the basis vector for `bit`, remove it, renormalise and
    /// return the probability of that branch.
    pub fn project_discard(&mut self, q: usize, basis: Basis, bit: u8) -> Result<f64> {
        check_qubit(q, self.n)?;
        if bit > 1 {
            return Err(Error::ZeroProbabilityBranch { bit });
        }
        let mut rest = self.project_out(q, basis, bit);
        let p = rest.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if p < crate::policy::DETERMINISTIC_EPS {
            return Err(Error::ZeroProbabilityBranch { bit });
        }
        let norm = p.sqrt();
        rest.iter_mut().for_each(|a| *a /= norm);
        self.n -= 1;
        self.amps = rest;
        Ok(p)
    }

    /// Measure `q`, leaving it in the observed eigenstate.
    pub fn measure(&mut self, q: usize, basis: Basis, policy: &mut OutcomePolicy) -> Result<u8> {
        let bit = self.draw(q, basis, policy)?;
        let b = basis.vectors()[bit as usize];
        let mut rest = self.clone();
        rest.measure_discard_forced(q, basis, bit)?;
        let post = StateVector { n: 1, amps: b.to_vec() };
        let mut out = rest.tensor(&post)?;
        out.move_qubit(out.n - 1, q)?;
        *self = out;
        Ok(bit)
    }

    fn measure_discard_forced(&mut self, q: usize, basis: Basis, bit: u8) -> Result<()> {
        self.project_discard(q, basis, bit).map(|_| ())
    }

    /// Measure a Hermitian Pauli product (phase `+1`) by projection.
    pub fn measure_pauli(&mut self, obs: &PauliString, policy: &mut OutcomePolicy) -> Result<u8> {
        if obs.phase() != 0 {
            return Err(Error::NonHermitianObservable(obs.to_string()));
        }
        let img = self.pauli_image(obs)?;
        let ev = self.amps.iter().zip(&img).map(|(a, b)| a.conj() * b).sum::<Complex64>().re;
        let bit = policy.draw(((1.0 + ev) / 2.0).clamp(0.0, 1.0))?;
        let s = if bit == 0 { 1.0 } else { -1.0 };
        let mut proj: Vec<Complex64> = self.amps.iter().zip(&img).map(|(a, b)| (a + b * s) * 0.5).collect();
        let norm = proj.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-15 {
            return Err(Error::ZeroProbabilityBranch { bit });
        }
        proj.iter_mut().for_each(|a| *a /= norm);
        self.amps = proj;
        Ok(bit)
    }

    /// Bell measurement on `(q1, q2)`: optionally rotate `q1` by `pre`, then
    /// measure `XX` (bit `j1`) and `ZZ` (bit `j2`). Both qubits are kept.
    pub fn bell_measure(
        &mut self,
        q1: usize,
        q2: usize,
        pre: Option<&Matrix>,
        policy: &mut OutcomePolicy,
    ) -> Result<BellBits> {
        check_qubit(q1, self.n)?;
        check_qubit(q2, self.n)?;
        if q1 == q2 {
            return Err(Error::CoincidentQubits(q1));
        }
        if let Some(u) = pre {
            self.apply_1q(q1, u)?;
        }
        let j1 = self.measure_pauli(&PauliString::on(self.n, &[q1, q2], Pauli::X), policy)?;
        let j2 = self.measure_pauli(&PauliString::on(self.n, &[q1, q2], Pauli::Z), policy)?;
        Ok(BellBits { j1, j2 })
    }

    /// Bell measurement that discards both measured qubits afterwards.
    pub fn bell_measure_discard(
        &mut self,
        q1: usize,
        q2: usize,
        pre: Option<&Matrix>,
        policy: &mut OutcomePolicy,
    ) -> Result<BellBits> {
        let bits = self.bell_measure(q1, q2, pre, policy)?;
        // both qubits are now in the known state (Z^{j1} X^{j2} ⊗ I)|Φ_0⟩;
        // measuring q1 and q2 in Z is deterministic once q1 is fixed, so
        // project q1 onto whichever outcome has weight and then q2.
        let (hi, lo) = if q1 > q2 { (q1, q2) } else { (q2, q1) };
        for q in [hi, lo] {
            let p0 = self.prob_zero(q, Basis::Z)?;
            let bit = u8::from(p0 < 0.5);
            self.measure_discard_forced(q, Basis::Z, bit)?;
        }
        Ok(bits)
    }

    /// Move qubit `from` to position `to`, shifting the others.
    pub fn move_qubit(&mut self, from: usize, to: usize) -> Result<()> {
        check_qubit(from, self.n)?;
        check_qubit(to, self.n)?;
        let mut order: Vec<usize> = (0..self.n).filter(|&q| q != from).collect();
        order.insert(to, from);
        self.permute(&order)
    }

    /// Reorder qubits: new qubit `i` is old qubit `order[i]`.
    pub fn permute(&mut self, order: &[usize]) -> Result<()> {
        if order.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: order.len() });
        }
        let mut seen = vec![false; self.n];
        for &q in order {
            check_qubit(q, self.n)?;
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::CoincidentQubits(q));
            }
        }
        let mut out = vec![ZERO; self.amps.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            let mut new = 0;
            for (i, &old) in order.iter().enumerate() {
                new |= self.bit(idx, old) << (self.n - 1 - i);
            }
            out[new] = *a;
        }
        self.amps = out;
        Ok(())
    }
}

/// `|⟨a|b⟩|` for normalised states.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm())
}

impl fmt::Display for StateVector {
    /// One `(index, re, im)` line per non-negligible amplitude.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() > 1e-12 {
                writeln!(f, "({i}, {:.12}, {:.12})", a.re, a.im)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bell_state_measurements() {
        let mut s = StateVector::bell();
        let mut pol = OutcomePolicy::force([]);
        let bits = s.bell_measure(0, 1, None, &mut pol).unwrap();
        assert_eq!(bits, BellBits { j1: 0, j2: 0 });
        // (Z ⊗ I)Φ0 has XX = -1, ZZ = +1
        let mut s = StateVector::bell();
        s.z(0).unwrap();
        let bits = s.bell_measure(0, 1, None, &mut pol).unwrap();
        assert_eq!((bits.j1, bits.j2, bits.index()), (1, 0, 3));
    }

    #[test]
    fn equatorial_measurement_of_plus() {
        let s = StateVector::plus(1).unwrap();
        assert!((s.prob_zero(0, Basis::X).unwrap() - 1.0).abs() < 1e-12);
        assert!((s.prob_zero(0, Basis::Y).unwrap() - 0.5).abs() < 1e-12);
        let w = 0.7;
        let p = s.prob_zero(0, Basis::Equatorial(w)).unwrap();
        assert!((p - (1.0 + w.cos()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn measure_keeps_eigenstate() {
        let mut s = StateVector::plus(2).unwrap();
        let bit = s.measure(1, Basis::Z, &mut OutcomePolicy::force([1])).unwrap();
        assert_eq!(bit, 1);
        let expect = StateVector::plus(1).unwrap().tensor(&StateVector::basis_state(1, 1).unwrap()).unwrap();
        assert!((fidelity(&s, &expect).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn discard_and_permute() {
        let a = StateVector::qubit(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let mut s = StateVector::zero(1).unwrap().tensor(&a).unwrap();
        s.measure_discard(0, Basis::Z, &mut OutcomePolicy::force([])).unwrap();
        assert!((fidelity(&s, &a).unwrap() - 1.0).abs() < 1e-12);
        let mut t = a.tensor(&StateVector::zero(1).unwrap()).unwrap();
        t.move_qubit(0, 1).unwrap();
        let expect = StateVector::zero(1).unwrap().tensor(&a).unwrap();
        assert!((fidelity(&t, &expect).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_action_includes_y_phase() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_pauli(&"Y".parse().unwrap()).unwrap();
        assert!((s.amplitudes()[1] - c(0.0, 1.0)).norm() < 1e-12);
        let s = StateVector::bell();
        assert!((s.expectation(&"YY".parse().unwrap()).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(StateVector::from_amplitudes(vec![c(1.0, 0.0); 3]), Err(Error::Dimension { .. })));
        assert!(matches!(StateVector::from_amplitudes(vec![c(1.0, 0.0); 2]), Err(Error::NotNormalized(_))));
        assert!(matches!(StateVector::zero(40), Err(Error::CapExceeded { .. })));
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(s.cnot(1, 1), Err(Error::CoincidentQubits(1))));
        assert!(matches!(s.h(2), Err(Error::QubitOutOfRange { .. })));
        assert!(matches!(
            s.measure(0, Basis::Z, &mut OutcomePolicy::force([1])),
            Ok(0)
        ));
    }
}
