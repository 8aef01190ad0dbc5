//! How random measurement outcomes are chosen.
//!
//! Only measurements whose outcome is genuinely random consume from a policy;
//! deterministic outcomes (one branch with probability below
//! [`DETERMINISTIC_EPS`]) are reported without touching it. A forced list is
//! therefore exactly as long as the number of random outcomes it drives.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Branch probabilities below this are treated as zero.
pub const DETERMINISTIC_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Mode {
    Sample(Box<ChaCha8Rng>),
    Force(VecDeque<u8>),
}

#[derive(Debug, Clone)]
pub struct OutcomePolicy {
    mode: Mode,
    consumed: Vec<u8>,
}

impl OutcomePolicy {
    pub fn sample(seed: u64) -> Self {
        OutcomePolicy { mode: Mode::Sample(Box::new(ChaCha8Rng::seed_from_u64(seed))), consumed: Vec::new() }
    }

    pub fn force<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        OutcomePolicy { mode: Mode::Force(bits.into_iter().collect()), consumed: Vec::new() }
    }

    /// Forced outcomes for consecutive Bell measurements, each given as the
    /// Bell index `j` in `0..4`.
    pub fn force_bell<I: IntoIterator<Item = u8>>(indices: I) -> Self {
        Self::force(indices.into_iter().flat_map(|j| {
            let b = BellBits::from_index(j);
            [b.j1, b.j2]
        }))
    }

    pub fn is_forced(&self) -> bool {
        matches!(self.mode, Mode::Force(_))
    }

    /// Random outcomes consumed so far.
    pub fn consumed(&self) -> &[u8] {
        &self.consumed
    }

    /// Forced outcomes not yet consumed (always 0 in sampling mode).
    pub fn remaining(&self) -> usize {
        match &self.mode {
            Mode::Force(q) => q.len(),
            Mode::Sample(_) => 0,
        }
    }

    /// Choose an outcome given the probability of outcome 0.
    pub fn draw(&mut self, p0: f64) -> Result<u8> {
        let p1 = 1.0 - p0;
        if p1 < DETERMINISTIC_EPS {
            return Ok(0);
        }
        if p0 < DETERMINISTIC_EPS {
            return Ok(1);
        }
        let bit = match &mut self.mode {
            Mode::Sample(rng) => u8::from(rng.gen::<f64>() >= p0),
            Mode::Force(q) => {
                let bit = q.pop_front().ok_or(Error::ForcedOutcomesExhausted { consumed: self.consumed.len() })?;
                if bit > 1 {
                    return Err(Error::ZeroProbabilityBranch { bit });
                }
                bit
            }
        };
        self.consumed.push(bit);
        Ok(bit)
    }

    /// Draw for a stabilizer measurement whose random branches are equiprobable.
    pub(crate) fn draw_fair(&mut self) -> Result<u8> {
        self.draw(0.5)
    }
}

/// Run `run` once per outcome branch. Branches are discovered by forcing
/// ever longer outcome prefixes until the run stops asking for more; the
/// result lists each complete forced sequence with its value.
pub fn enumerate_branches<T>(mut run: impl FnMut(&mut OutcomePolicy) -> Result<T>) -> Result<Vec<(Vec<u8>, T)>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<u8>> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        let mut policy = OutcomePolicy::force(prefix.iter().copied());
        match run(&mut policy) {
            Ok(v) => out.push((prefix, v)),
            Err(Error::ForcedOutcomesExhausted { .. }) => {
                for bit in [1, 0] {
                    let mut next = prefix.clone();
                    next.push(bit);
                    stack.push(next);
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Raw Bell-measurement bits: `j1` is the `XX` outcome and `j2` the `ZZ`
/// outcome. The Bell index is `j = 2·j1 + (j1 ⊕ j2)` and
/// `|Φ_j⟩ = (Z^{j1} X^{j2} ⊗ I)|Φ_0⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct BellBits {
    pub j1: u8,
    pub j2: u8,
}

impl BellBits {
    pub fn index(self) -> u8 {
        2 * self.j1 + (self.j1 ^ self.j2)
    }

    pub fn from_index(j: u8) -> Self {
        let j1 = (j >> 1) & 1;
        let low = j & 1;
        BellBits { j1, j2: j1 ^ low }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_index_binary_form() {
        assert_eq!(BellBits { j1: 0, j2: 0 }.index(), 0);
        assert_eq!(BellBits { j1: 0, j2: 1 }.index(), 1);
        assert_eq!(BellBits { j1: 1, j2: 1 }.index(), 2);
        assert_eq!(BellBits { j1: 1, j2: 0 }.index(), 3);
        for j in 0..4 {
            assert_eq!(BellBits::from_index(j).index(), j);
        }
    }

    #[test]
    fn deterministic_draws_do_not_consume() {
        let mut p = OutcomePolicy::force([1]);
        assert_eq!(p.draw(1.0).unwrap(), 0);
        assert_eq!(p.draw(0.0).unwrap(), 1);
        assert_eq!(p.remaining(), 1);
        assert_eq!(p.draw(0.5).unwrap(), 1);
        assert!(matches!(p.draw(0.5), Err(Error::ForcedOutcomesExhausted { consumed: 1 })));
    }

    #[test]
    fn enumerates_all_branches() {
        let branches = enumerate_branches(|p| {
            let a = p.draw(0.5)?;
            let b = if a == 1 { p.draw(0.5)? } else { p.draw(1.0)? };
            Ok((a, b))
        })
        .unwrap();
        let seqs: Vec<Vec<u8>> = branches.iter().map(|(s, _)| s.clone()).collect();
        assert_eq!(seqs, vec![vec![0], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn sampling_is_reproducible() {
        let mut a = OutcomePolicy::sample(7);
        let mut b = OutcomePolicy::sample(7);
        let xs: Vec<u8> = (0..32).map(|_| a.draw(0.5).unwrap()).collect();
        let ys: Vec<u8> = (0..32).map(|_| b.draw(0.5).unwrap()).collect();
        assert_eq!(xs, ys);
        assert!(xs.contains(&0) && xs.contains(&1));
    }
}
