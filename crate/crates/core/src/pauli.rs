//! Phased Pauli strings and their conjugation by Clifford gates.
//!
//! A [`PauliString`] is `i^k · P_0 ⊗ … ⊗ P_{n-1}` with each `P_q` one of the
//! Hermitian letters `I, X, Y, Z` and `Y = iXZ`. Letters are stored in the
//! symplectic `(x, z)` encoding so that commutation checks and products are
//! bitwise.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_qubit, Error, Result};

/// A single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | '_' | '.' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Exponent of `i` picked up when multiplying the letters `(x1,z1)·(x2,z2)`.
fn product_phase(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x1, z1, x2, z2) = (x1 as i32, z1 as i32, x2 as i32, z2 as i32);
    match (x1, z1) {
        (0, 0) => 0,
        (1, 1) => z2 - x2,
        (1, 0) => z2 * (2 * x2 - 1),
        _ => x2 * (1 - 2 * z2),
    }
}

/// `i^phase · ⊗_q P_q`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    x: Vec<bool>,
    z: Vec<bool>,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { x: vec![false; n], z: vec![false; n], phase: 0 }
    }

    pub fn from_letters(letters: &[Pauli]) -> Self {
        let (x, z) = letters.iter().map(|p| p.bits()).unzip();
        PauliString { x, z, phase: 0 }
    }

    /// A single letter `p` on qubit `q` of an `n`-qubit register.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(q, p);
        s
    }

    /// Product of `p` on each of `qubits`.
    pub fn on(n: usize, qubits: &[usize], p: Pauli) -> Self {
        let mut s = Self::identity(n);
        for &q in qubits {
            s.set(q, p);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x[q], self.z[q])
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x[q] = x;
        self.z[q] = z;
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.len()).map(|q| self.get(q)).collect()
    }

    pub fn x_bits(&self) -> &[bool] {
        &self.x
    }

    pub fn z_bits(&self) -> &[bool] {
        &self.z
    }

    /// Power of `i` in front of the letters, in `0..4`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    pub fn negated(mut self) -> Self {
        self.phase = (self.phase + 2) % 4;
        self
    }

    /// `+1` or `-1` when the phase is real.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).filter(|(x, z)| **x || **z).count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&q| self.x[q] || self.z[q]).collect()
    }

    /// Same letters, ignoring phase.
    pub fn same_letters(&self, other: &PauliString) -> bool {
        self.x == other.x && self.z == other.z
    }

    fn check_len(&self, other: &PauliString) -> Result<()> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(Error::Dimension { expected: self.len(), got: other.len() })
        }
    }

    /// The exact product `self · other`.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        self.check_len(other)?;
        let mut out = self.clone();
        out.mul_assign_unchecked(other);
        Ok(out)
    }

    pub(crate) fn mul_assign_unchecked(&mut self, other: &PauliString) {
        let mut e = self.phase as i32 + other.phase as i32;
        for q in 0..self.x.len() {
            e += product_phase(self.x[q], self.z[q], other.x[q], other.z[q]);
            self.x[q] ^= other.x[q];
            self.z[q] ^= other.z[q];
        }
        self.phase = e.rem_euclid(4) as u8;
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        let mut odd = false;
        for q in 0..self.x.len() {
            odd ^= (self.x[q] & other.z[q]) ^ (self.z[q] & other.x[q]);
        }
        !odd
    }

    /// Restrict to the qubits in `keep`, in that order. The phase is kept.
    pub fn restrict(&self, keep: &[usize]) -> PauliString {
        PauliString {
            x: keep.iter().map(|&q| self.x[q]).collect(),
            z: keep.iter().map(|&q| self.z[q]).collect(),
            phase: self.phase,
        }
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PauliString) -> PauliString {
        let mut x = self.x.clone();
        x.extend_from_slice(&other.x);
        let mut z = self.z.clone();
        z.extend_from_slice(&other.z);
        PauliString { x, z, phase: (self.phase + other.phase) % 4 }
    }

    /// Letters only, without a sign, e.g. `XZXI`.
    pub fn letter_string(&self) -> String {
        (0..self.len()).map(|q| self.get(q).as_char()).collect()
    }

    /// Conjugate in place: `self ← g · self · g†`.
    pub fn conjugate_in_place(&mut self, gate: &CliffordGate) -> Result<()> {
        gate.check(self.len())?;
        let flip = |p: &mut u8| *p = (*p + 2) % 4;
        match *gate {
            CliffordGate::H(q) => {
                if self.x[q] && self.z[q] {
                    flip(&mut self.phase);
                }
                std::mem::swap(&mut self.x[q], &mut self.z[q]);
            }
            CliffordGate::S(q) => {
                if self.x[q] && self.z[q] {
                    flip(&mut self.phase);
                }
                self.z[q] ^= self.x[q];
            }
            CliffordGate::X(q) => {
                if self.z[q] {
                    flip(&mut self.phase);
                }
            }
            CliffordGate::Z(q) => {
                if self.x[q] {
                    flip(&mut self.phase);
                }
            }
            CliffordGate::Cnot(c, t) => {
                if self.x[c] && self.z[t] && !(self.x[t] ^ self.z[c]) {
                    flip(&mut self.phase);
                }
                self.x[t] ^= self.x[c];
                self.z[c] ^= self.z[t];
            }
            CliffordGate::Cz(a, b) => {
                self.conjugate_in_place(&CliffordGate::H(b))?;
                self.conjugate_in_place(&CliffordGate::Cnot(a, b))?;
                self.conjugate_in_place(&CliffordGate::H(b))?;
            }
        }
        Ok(())
    }

    pub fn conjugate_by(&self, gate: &CliffordGate) -> Result<PauliString> {
        let mut out = self.clone();
        out.conjugate_in_place(gate)?;
        Ok(out)
    }
}

/// Product with exact phase. Fails on length mismatch.
pub fn pauli_multiply(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    a.multiply(b)
}

pub fn pauli_commutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    a.commutes(b)
}

/// `g · p · g†`.
pub fn conjugate_by_clifford(p: &PauliString, g: &CliffordGate) -> Result<PauliString> {
    p.conjugate_by(g)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{}{}", sign, self.letter_string())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-').or_else(|| s.strip_prefix('−')) {
            (2, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else {
            (0, s)
        };
        let letters = rest
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::Parse(format!("bad Pauli letter {c:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString::from_letters(&letters).with_phase(phase))
    }
}

/// Clifford gates understood by both simulation engines. Qubits are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    X(usize),
    Z(usize),
    /// `Cnot(control, target)`.
    Cnot(usize, usize),
    Cz(usize, usize),
}

impl CliffordGate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            CliffordGate::H(q) | CliffordGate::S(q) | CliffordGate::X(q) | CliffordGate::Z(q) => vec![q],
            CliffordGate::Cnot(a, b) | CliffordGate::Cz(a, b) => vec![a, b],
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            check_qubit(q, n)?;
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::CoincidentQubits(qs[0]));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn products() {
        assert_eq!(p("X").multiply(&p("Z")).unwrap(), p("-iY"));
        assert_eq!(p("XX").multiply(&p("ZZ")).unwrap(), p("-YY"));
        assert_eq!(p("X").multiply(&p("X")).unwrap(), p("I"));
        assert_eq!(p("Z").multiply(&p("X")).unwrap(), p("iY"));
        assert_eq!(p("Y").multiply(&p("Z")).unwrap(), p("iX"));
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(p("X").multiply(&p("XX")), Err(Error::Dimension { .. })));
        assert!(p("XZ").commutes(&p("X")).is_err());
    }

    #[test]
    fn commutation() {
        assert!(!p("ZZI").commutes(&p("IXZ")).unwrap());
        assert!(p("ZXII").commutes(&p("IIXZ")).unwrap());
        assert!(p("XYZ").commutes(&p("XYZ")).unwrap());
    }

    #[test]
    fn conjugation() {
        assert_eq!(p("XI").conjugate_by(&CliffordGate::Cz(0, 1)).unwrap(), p("XZ"));
        assert_eq!(p("X").conjugate_by(&CliffordGate::H(0)).unwrap(), p("Z"));
        assert_eq!(p("Y").conjugate_by(&CliffordGate::H(0)).unwrap(), p("-Y"));
        assert_eq!(p("X").conjugate_by(&CliffordGate::S(0)).unwrap(), p("Y"));
        assert_eq!(p("Y").conjugate_by(&CliffordGate::S(0)).unwrap(), p("-X"));
        assert_eq!(p("XI").conjugate_by(&CliffordGate::Cnot(0, 1)).unwrap(), p("XX"));
        assert_eq!(p("IZ").conjugate_by(&CliffordGate::Cnot(0, 1)).unwrap(), p("ZZ"));
        assert!(matches!(
            p("XI").conjugate_by(&CliffordGate::Cnot(0, 2)),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(matches!(p("XI").conjugate_by(&CliffordGate::Cz(1, 1)), Err(Error::CoincidentQubits(1))));
    }

    #[test]
    fn parse_and_display() {
        for s in ["+XZXI", "-IIZI", "+iY", "-iXZ"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert!("XQ".parse::<PauliString>().is_err());
    }
}
