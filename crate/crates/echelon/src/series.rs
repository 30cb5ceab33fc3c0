//! Sparse truncated series over mixed Fourier/Taylor lattices.
//!
//! All arithmetic is jet arithmetic: exact modulo total degree above the
//! order cap. Coefficients are stored in a `BTreeMap` so iteration order, and
//! therefore every derived artifact, is deterministic.

use crate::coeff::Coeff;
use crate::error::Error;
use crate::index::{MultiIndex, Signature};
use std::collections::BTreeMap;

/// Relative threshold under which float coefficients are treated as zero by
/// order computations. Exact mode ignores it.
pub const ZERO_TOL_REL: f64 = 1e-13;

#[derive(Clone, PartialEq, Debug)]
pub struct TruncatedSeries<C: Coeff> {
    sig: Signature,
    cap: u64,
    coeffs: BTreeMap<MultiIndex, C>,
}

impl<C: Coeff> TruncatedSeries<C> {
    /// The zero series.
    pub fn zero(sig: Signature, cap: u64) -> Self {
        TruncatedSeries { sig, cap, coeffs: BTreeMap::new() }
    }

    /// The constant-one series.
    pub fn one(sig: Signature, cap: u64) -> Self {
        let mut s = Self::zero(sig, cap);
        s.set(MultiIndex::zero(sig), C::one());
        s
    }

    /// A single monomial `c · e_idx`.
    pub fn monomial(sig: Signature, cap: u64, idx: MultiIndex, c: C) -> Self {
        let mut s = Self::zero(sig, cap);
        s.set(idx, c);
        s
    }

    /// The coordinate germ on a Taylor axis (absolute axis position).
    pub fn coordinate(sig: Signature, cap: u64, axis: usize) -> Self {
        Self::monomial(sig, cap, MultiIndex::unit(sig, axis), C::one())
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, idx: &MultiIndex) -> C {
        self.coeffs.get(idx).cloned().unwrap_or_else(C::zero)
    }

    /// Inserts or removes a coefficient, enforcing the cap and the
    /// no-stored-zeros invariant.
    pub fn set(&mut self, idx: MultiIndex, c: C) {
        debug_assert!(idx.respects(self.sig), "index does not respect signature");
        if idx.total_degree(self.sig) > self.cap || c.is_zero() {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, c);
        }
    }

    pub fn add_to(&mut self, idx: MultiIndex, c: C) {
        if idx.total_degree(self.sig) > self.cap {
            return;
        }
        let cur = self.coeff(&idx);
        self.set(idx, cur + c);
    }

    fn check_sig(&self, other: &Self) -> Result<(), Error> {
        if self.sig != other.sig {
            return Err(Error::SignatureMismatch { left: self.sig, right: other.sig });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        self.check_sig(other)?;
        let cap = self.cap.min(other.cap);
        let mut out = Self::zero(self.sig, cap);
        for (i, c) in &self.coeffs {
            out.add_to(i.clone(), c.clone());
        }
        for (i, c) in &other.coeffs {
            out.add_to(i.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, k: &C) -> Self {
        let mut out = Self::zero(self.sig, self.cap);
        if k.is_zero() {
            return out;
        }
        for (i, c) in &self.coeffs {
            out.set(i.clone(), c.clone() * k.clone());
        }
        out
    }

    /// Convolution product; indices above the cap are discarded.
    pub fn mul(&self, other: &Self) -> Result<Self, Error> {
        self.check_sig(other)?;
        let cap = self.cap.min(other.cap);
        let mut out = Self::zero(self.sig, cap);
        for (i, a) in &self.coeffs {
            let di = i.total_degree(self.sig);
            if di > cap {
                continue;
            }
            for (j, b) in &other.coeffs {
                // Degree bound before the add: Fourier slots may cancel, so
                // this only prunes pure-Taylor overflow.
                if di + j.taylor_degree(self.sig) > cap && self.sig.fourier == 0 {
                    continue;
                }
                out.add_to(i.add(j), a.clone() * b.clone());
            }
        }
        Ok(out)
    }

    /// Coefficientwise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self, Error> {
        self.check_sig(other)?;
        let cap = self.cap.min(other.cap);
        let mut out = Self::zero(self.sig, cap);
        for (i, a) in &self.coeffs {
            let b = other.coeff(i);
            if !b.is_zero() {
                out.set(i.clone(), a.clone() * b);
            }
        }
        Ok(out)
    }

    /// Formal partial derivative along a Taylor axis, or the angular
    /// derivation `z_j ∂_{z_j}` (coefficient × index) along a Fourier axis.
    pub fn derive(&self, axis: usize) -> Self {
        let mut out = Self::zero(self.sig, self.cap);
        let m = self.sig.fourier;
        for (i, c) in &self.coeffs {
            let e = i.0[axis];
            if axis < m {
                if e != 0 {
                    out.add_to(i.clone(), c.clone() * C::from_int(e));
                }
            } else if e > 0 {
                let mut j = i.clone();
                j.0[axis] = e - 1;
                out.add_to(j, c.clone() * C::from_int(e));
            }
        }
        out
    }

    /// Multiplies by the coordinate monomial on a Taylor axis.
    pub fn shift_up(&self, axis: usize) -> Self {
        debug_assert!(axis >= self.sig.fourier);
        let mut out = Self::zero(self.sig, self.cap);
        for (i, c) in &self.coeffs {
            let mut j = i.clone();
            j.0[axis] += 1;
            out.add_to(j, c.clone());
        }
        out
    }

    /// Minimal total degree among stored coefficients; `None` for the zero
    /// series (the ∞ sentinel). Float mode applies the relative zero
    /// tolerance so roundoff dust cannot lower the order.
    pub fn filtration_order(&self) -> Option<u64> {
        self.filtration_order_tol(ZERO_TOL_REL)
    }

    pub fn filtration_order_tol(&self, rel_tol: f64) -> Option<u64> {
        let floor = if C::EXACT {
            0.0
        } else {
            let max = self
                .coeffs
                .values()
                .map(|c| c.magnitude())
                .fold(0.0_f64, f64::max);
            max * rel_tol
        };
        self.coeffs
            .iter()
            .filter(|(_, c)| C::EXACT && !c.is_zero() || !C::EXACT && c.magnitude() > floor)
            .map(|(i, _)| i.total_degree(self.sig))
            .min()
    }

    /// Minimal degree along a single Taylor axis (e.g. the t-order of a
    /// deformation jet). `None` for zero.
    pub fn axis_order(&self, axis: usize, rel_tol: f64) -> Option<u64> {
        let floor = if C::EXACT {
            0.0
        } else {
            let max = self
                .coeffs
                .values()
                .map(|c| c.magnitude())
                .fold(0.0_f64, f64::max);
            max * rel_tol
        };
        self.coeffs
            .iter()
            .filter(|(_, c)| C::EXACT && !c.is_zero() || !C::EXACT && c.magnitude() > floor)
            .map(|(i, _)| i.0[axis].unsigned_abs())
            .min()
    }

    /// Keeps only terms whose total degree lies in `[lo, hi]`.
    pub fn degree_slice(&self, lo: u64, hi: u64) -> Self {
        let mut out = Self::zero(self.sig, self.cap);
        for (i, c) in &self.coeffs {
            let d = i.total_degree(self.sig);
            if d >= lo && d <= hi {
                out.set(i.clone(), c.clone());
            }
        }
        out
    }

    /// Keeps only terms selected by the predicate.
    pub fn filter(&self, mut pred: impl FnMut(&MultiIndex) -> bool) -> Self {
        let mut out = Self::zero(self.sig, self.cap);
        for (i, c) in &self.coeffs {
            if pred(i) {
                out.set(i.clone(), c.clone());
            }
        }
        out
    }

    /// Applies a diagonal rule coefficientwise. Terms mapped to zero vanish.
    pub fn map_diag(&self, mut rule: impl FnMut(&MultiIndex) -> C) -> Self {
        let mut out = Self::zero(self.sig, self.cap);
        for (i, c) in &self.coeffs {
            out.set(i.clone(), c.clone() * rule(i));
        }
        out
    }

    /// Re-truncates to a lower cap.
    pub fn with_cap(&self, cap: u64) -> Self {
        let mut out = Self::zero(self.sig, cap);
        for (i, c) in &self.coeffs {
            out.set(i.clone(), c.clone());
        }
        out
    }

    /// Drops float coefficients below `rel_tol` times the largest magnitude.
    pub fn clean(&self, rel_tol: f64) -> Self {
        if C::EXACT {
            return self.clone();
        }
        let max = self
            .coeffs
            .values()
            .map(|c| c.magnitude())
            .fold(0.0_f64, f64::max);
        let floor = max * rel_tol;
        self.filter_by_coeff(floor)
    }

    fn filter_by_coeff(&self, floor: f64) -> Self {
        let mut out = Self::zero(self.sig, self.cap);
        for (i, c) in &self.coeffs {
            if c.magnitude() > floor {
                out.set(i.clone(), c.clone());
            }
        }
        out
    }

    /// Largest coefficient magnitude (0 for the zero series).
    pub fn max_coeff(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.magnitude())
            .fold(0.0_f64, f64::max)
    }

    /// Substitutes the map tuple into `self`: returns `self(φ_1, …, φ_q)`.
    ///
    /// Only defined on pure Taylor lattices. The maps must share a signature
    /// and there must be one per slot of `self`. Constant terms of the maps
    /// are allowed but the usual use is tangent-to-identity tuples.
    pub fn compose(&self, maps: &[TruncatedSeries<C>]) -> Result<Self, Error> {
        if self.sig.fourier != 0 {
            return Err(Error::TaylorOnly("compose"));
        }
        if maps.len() != self.sig.taylor {
            return Err(Error::ArityMismatch { expected: self.sig.taylor, got: maps.len() });
        }
        let tsig = maps[0].sig;
        let cap = maps.iter().map(|m| m.cap).min().unwrap_or(self.cap).min(self.cap);
        let mut out = TruncatedSeries::zero(tsig, cap);
        // Horner-free monomial walk: powers are cached per axis.
        let mut pow_cache: Vec<Vec<TruncatedSeries<C>>> =
            maps.iter().map(|m| vec![TruncatedSeries::one(tsig, cap), m.with_cap(cap)]).collect();
        for (i, c) in &self.coeffs {
            let mut term = TruncatedSeries::monomial(tsig, cap, MultiIndex::zero(tsig), c.clone());
            for (axis, &e) in i.0.iter().enumerate() {
                let e = e as usize;
                while pow_cache[axis].len() <= e {
                    let last = pow_cache[axis].last().unwrap().clone();
                    let next = last.mul(&pow_cache[axis][1])?;
                    pow_cache[axis].push(next);
                }
                if e > 0 {
                    term = term.mul(&pow_cache[axis][e])?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }
}

/// Composes two tangent-to-identity map tuples: `(g ∘ f)_i = g_i(f)`.
pub fn compose_maps<C: Coeff>(
    g: &[TruncatedSeries<C>],
    f: &[TruncatedSeries<C>],
) -> Result<Vec<TruncatedSeries<C>>, Error> {
    g.iter().map(|gi| gi.compose(f)).collect()
}

/// Inverts a tangent-to-identity map tuple on a Taylor lattice.
///
/// The inverse is built degree by degree from `φ ∘ ψ = id`, which is
/// triangular because `φ = id + (degree ≥ 2)`.
pub fn invert_map<C: Coeff>(phi: &[TruncatedSeries<C>]) -> Result<Vec<TruncatedSeries<C>>, Error> {
    if phi.is_empty() {
        return Ok(Vec::new());
    }
    let sig = phi[0].sig;
    let cap = phi[0].cap;
    let n = sig.taylor;
    if phi.len() != n || sig.fourier != 0 {
        return Err(Error::TaylorOnly("invert_map"));
    }
    for (axis, component) in phi.iter().enumerate() {
        let lin = component.degree_slice(0, 1);
        let expected = TruncatedSeries::coordinate(sig, cap, axis);
        if lin != expected {
            return Err(Error::NotTangentToIdentity);
        }
    }
    let mut psi: Vec<TruncatedSeries<C>> =
        (0..n).map(|axis| TruncatedSeries::coordinate(sig, cap, axis)).collect();
    for d in 2..=cap {
        // Error at degree d depends only on ψ below degree d.
        for axis in 0..n {
            let err = phi[axis].compose(&psi)?;
            let err_d = err
                .sub(&TruncatedSeries::coordinate(sig, cap, axis))?
                .degree_slice(d, d);
            psi[axis] = psi[axis].sub(&err_d)?;
        }
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    type S = TruncatedSeries<Complex64>;

    fn z(cap: u64) -> S {
        S::coordinate(Signature::taylor(1), cap, 0)
    }

    #[test]
    fn product_of_coordinates() {
        let f = z(8);
        let sq = f.mul(&f).unwrap();
        assert_eq!(sq.coeff(&MultiIndex::new(vec![2])), Complex64::new(1.0, 0.0));
        assert_eq!(sq.num_terms(), 1);
    }

    #[test]
    fn cap_discards_products() {
        // (1+z)(1−z) at cap 1 → 1, the z² term is cut.
        let sig = Signature::taylor(1);
        let one = S::one(sig, 1);
        let f = one.add(&z(1)).unwrap();
        let g = one.sub(&z(1)).unwrap();
        let p = f.mul(&g).unwrap();
        assert_eq!(p, S::one(sig, 1));
    }

    #[test]
    fn mul_by_zero() {
        let f = z(4);
        let zero = S::zero(Signature::taylor(1), 4);
        assert!(f.mul(&zero).unwrap().is_zero());
    }

    #[test]
    fn derive_taylor_and_fourier() {
        // ∂(z³) = 3z²
        let sig = Signature::taylor(1);
        let f = S::monomial(sig, 8, MultiIndex::new(vec![3]), Complex64::new(1.0, 0.0));
        let df = f.derive(0);
        assert_eq!(df.coeff(&MultiIndex::new(vec![2])), Complex64::new(3.0, 0.0));
        // angular derivation of e_{(2)} → 2 e_{(2)}
        let fsig = Signature::fourier(1);
        let e2 = TruncatedSeries::<Complex64>::monomial(
            fsig,
            8,
            MultiIndex::new(vec![2]),
            Complex64::new(1.0, 0.0),
        );
        let de2 = e2.derive(0);
        assert_eq!(de2.coeff(&MultiIndex::new(vec![2])), Complex64::new(2.0, 0.0));
        // constants die in both cases
        assert!(S::one(sig, 8).derive(0).is_zero());
    }

    #[test]
    fn filtration_orders() {
        let sig = Signature::taylor(1);
        let f = S::monomial(sig, 8, MultiIndex::new(vec![2]), Complex64::new(1.0, 0.0))
            .add(&S::monomial(sig, 8, MultiIndex::new(vec![5]), Complex64::new(1.0, 0.0)))
            .unwrap();
        assert_eq!(f.filtration_order(), Some(2));
        assert_eq!(S::zero(sig, 8).filtration_order(), None);
    }

    #[test]
    fn compose_and_invert_roundtrip() {
        // φ(x) = x + x², ψ = φ^{-1}; φ∘ψ = id mod cap.
        let sig = Signature::taylor(1);
        let cap = 10;
        let phi = vec![z(cap).add(&z(cap).mul(&z(cap)).unwrap()).unwrap()];
        let psi = invert_map(&phi).unwrap();
        let id = phi[0].compose(&psi).unwrap();
        assert_eq!(id, S::coordinate(sig, cap, 0));
    }
}
