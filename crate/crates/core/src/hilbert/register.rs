use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ordered list of photon labels. Position `k` is tensor slot `k`; the first
/// label owns the most significant bit of a basis index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitRegister {
    labels: Vec<usize>,
}

impl QubitRegister {
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::InvalidRegister(format!("duplicate label {a}")));
            }
        }
        Ok(QubitRegister { labels })
    }

    /// Photons `first..first + n`.
    pub fn sequential(first: usize, n: usize) -> Self {
        QubitRegister {
            labels: (first..first + n).collect(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn position(&self, label: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Positions of `labels`, in the order given.
    pub fn positions_of(&self, labels: &[usize]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for &l in labels {
            let p = self
                .position(l)
                .ok_or_else(|| Error::InvalidRegister(format!("photon {l} is not in register {:?}", self.labels)))?;
            if out.contains(&p) {
                return Err(Error::InvalidRegister(format!("photon {l} listed twice")));
            }
            out.push(p);
        }
        Ok(out)
    }

    pub fn concat(&self, other: &QubitRegister) -> Result<Self> {
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Self::new(labels)
    }

    pub(crate) fn select(&self, positions: &[usize]) -> Self {
        QubitRegister {
            labels: positions.iter().map(|&p| self.labels[p]).collect(),
        }
    }
}

/// Maps a local index over `positions` onto bits of an `n`-qubit basis index.
/// The first entry of `positions` receives the most significant local bit.
pub(crate) fn scatter(local: usize, positions: &[usize], n: usize) -> usize {
    let k = positions.len();
    let mut idx = 0;
    for (m, &q) in positions.iter().enumerate() {
        if (local >> (k - 1 - m)) & 1 == 1 {
            idx |= 1 << (n - 1 - q);
        }
    }
    idx
}

/// Inverse of [`scatter`]: reads the bits at `positions` out of `idx`.
#[cfg(test)]
pub(crate) fn gather(idx: usize, positions: &[usize], n: usize) -> usize {
    positions
        .iter()
        .fold(0, |acc, &q| (acc << 1) | ((idx >> (n - 1 - q)) & 1))
}

/// Positions `0..n` not contained in `positions`, ascending.
pub(crate) fn complement(positions: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|p| !positions.contains(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_labels() {
        assert!(QubitRegister::new(vec![1, 2, 1]).is_err());
        assert!(QubitRegister::new(vec![1, 6]).is_ok());
    }

    #[test]
    fn scatter_gather_round_trip() {
        let positions = [3, 0];
        for local in 0..4 {
            let idx = scatter(local, &positions, 4);
            assert_eq!(gather(idx, &positions, 4), local);
        }
        // local bit 1 (MSB) goes to position 3 => value 1; local bit 0 to position 0 => 8
        assert_eq!(scatter(0b10, &positions, 4), 1);
        assert_eq!(scatter(0b01, &positions, 4), 8);
    }
}
