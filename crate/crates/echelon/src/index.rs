//! Mixed Fourier/Taylor lattices and the multi-indices that live on them.
//!
//! A signature `(m, p)` describes series on `ℤ^m × ℕ^p`: the first `m` slots
//! are Fourier indices (arbitrary sign), the last `p` are Taylor exponents
//! (non-negative). Total degree weighs Fourier slots by absolute value, so a
//! mixed monomial `z^i ξ^β` has degree `σ(i) + |β|`.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Lattice signature: `fourier` slots over ℤ followed by `taylor` slots over ℕ.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Signature {
    pub fourier: usize,
    pub taylor: usize,
}

impl Signature {
    pub fn new(fourier: usize, taylor: usize) -> Self {
        Signature { fourier, taylor }
    }

    /// Pure Taylor lattice ℕ^p.
    pub fn taylor(p: usize) -> Self {
        Signature { fourier: 0, taylor: p }
    }

    /// Pure Fourier lattice ℤ^m.
    pub fn fourier(m: usize) -> Self {
        Signature { fourier: m, taylor: 0 }
    }

    pub fn len(&self) -> usize {
        self.fourier + self.taylor
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A point of the mixed lattice. Entries `0..m` are Fourier, `m..m+p` Taylor.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn new(entries: Vec<i64>) -> Self {
        MultiIndex(entries)
    }

    /// The zero index (constant term) for a signature.
    pub fn zero(sig: Signature) -> Self {
        MultiIndex(vec![0; sig.len()])
    }

    /// Unit index along one axis.
    pub fn unit(sig: Signature, axis: usize) -> Self {
        let mut v = vec![0; sig.len()];
        v[axis] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks shape against the signature: length and Taylor non-negativity.
    pub fn respects(&self, sig: Signature) -> bool {
        self.0.len() == sig.len() && self.0[sig.fourier..].iter().all(|&e| e >= 0)
    }

    /// σ of the Fourier part: Σ|i_k| over the first `m` slots.
    pub fn fourier_sigma(&self, sig: Signature) -> u64 {
        self.0[..sig.fourier].iter().map(|e| e.unsigned_abs()).sum()
    }

    /// Σ of the Taylor exponents.
    pub fn taylor_degree(&self, sig: Signature) -> u64 {
        self.0[sig.fourier..].iter().map(|&e| e as u64).sum()
    }

    /// Total degree: Fourier σ plus Taylor degree.
    pub fn total_degree(&self, sig: Signature) -> u64 {
        self.fourier_sigma(sig) + self.taylor_degree(sig)
    }

    /// Entrywise sum (monomial product).
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// True when every Fourier entry is zero (an angle-independent monomial).
    pub fn fourier_is_zero(&self, sig: Signature) -> bool {
        self.0[..sig.fourier].iter().all(|&e| e == 0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Enumerates all `i ∈ ℤ^n` with `1 ≤ σ(i) ≤ cutoff`, in a deterministic order.
pub fn enumerate_fourier(n: usize, cutoff: u64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut current = vec![0i64; n];
    fn rec(slot: usize, n: usize, budget: i64, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if slot == n {
            if current.iter().any(|&e| e != 0) {
                out.push(current.clone());
            }
            return;
        }
        for e in -budget..=budget {
            current[slot] = e;
            rec(slot + 1, n, budget - e.abs(), current, out);
        }
        current[slot] = 0;
    }
    rec(0, n, cutoff as i64, &mut current, &mut out);
    out
}

/// Enumerates all `j ∈ ℕ^n` with `lo ≤ Σ j_k ≤ hi`, in a deterministic order.
pub fn enumerate_taylor(n: usize, lo: u64, hi: u64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut current = vec![0i64; n];
    fn rec(slot: usize, n: usize, budget: i64, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if slot == n {
            out.push(current.clone());
            return;
        }
        for e in 0..=budget {
            current[slot] = e;
            rec(slot + 1, n, budget - e, current, out);
        }
        current[slot] = 0;
    }
    rec(0, n, hi as i64, &mut current, &mut out);
    out.retain(|j| {
        let d: i64 = j.iter().sum();
        d >= lo as i64
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees_on_mixed_lattice() {
        let sig = Signature::new(2, 1);
        let i = MultiIndex::new(vec![1, -2, 3]);
        assert!(i.respects(sig));
        assert_eq!(i.fourier_sigma(sig), 3);
        assert_eq!(i.taylor_degree(sig), 3);
        assert_eq!(i.total_degree(sig), 6);
    }

    #[test]
    fn negative_taylor_rejected() {
        let sig = Signature::taylor(2);
        assert!(!MultiIndex::new(vec![1, -1]).respects(sig));
    }

    #[test]
    fn fourier_enumeration_count() {
        // σ(i) ≤ K over ℤ²: |{σ ≤ K}| = 2K² + 2K + 1 including 0.
        let k = 5u64;
        let pts = enumerate_fourier(2, k);
        assert_eq!(pts.len() as u64, 2 * k * k + 2 * k);
        assert!(pts.iter().all(|p| {
            let s: u64 = p.iter().map(|e| e.unsigned_abs()).sum();
            s >= 1 && s <= k
        }));
    }
}
