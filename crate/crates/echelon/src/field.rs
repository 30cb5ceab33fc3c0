//! Vector fields with truncated-series coefficients: derivations of the jet
//! algebra, their Lie brackets, and Lie-series exponentials acting on germs
//! and (adjointly) on fields.

use crate::coeff::Coeff;
use crate::error::Error;
use crate::index::Signature;
use crate::scale::ScaleFamily;
use crate::series::TruncatedSeries;

/// Σ components[i] ∂_i on a pure Taylor lattice.
#[derive(Clone, PartialEq, Debug)]
pub struct VectorField<C: Coeff> {
    pub components: Vec<TruncatedSeries<C>>,
}

impl<C: Coeff> VectorField<C> {
    pub fn zero(sig: Signature, cap: u64) -> Self {
        VectorField {
            components: (0..sig.len()).map(|_| TruncatedSeries::zero(sig, cap)).collect(),
        }
    }

    pub fn signature(&self) -> Signature {
        self.components[0].signature()
    }

    pub fn cap(&self) -> u64 {
        self.components[0].cap()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_, _>>()?;
        Ok(VectorField { components })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        VectorField { components: self.components.iter().map(|c| c.neg()).collect() }
    }

    pub fn scale_by(&self, k: &C) -> Self {
        VectorField { components: self.components.iter().map(|c| c.scale(k)).collect() }
    }

    /// The derivation applied to a germ: Σ c_i ∂_i f.
    pub fn apply(&self, f: &TruncatedSeries<C>) -> Result<TruncatedSeries<C>, Error> {
        let mut out = TruncatedSeries::zero(f.signature(), f.cap());
        for (axis, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out = out.add(&c.mul(&f.derive(axis))?)?;
        }
        Ok(out)
    }

    /// Lie bracket of fields: [v,w]_i = v(w_i) − w(v_i).
    pub fn bracket(&self, other: &Self) -> Result<Self, Error> {
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(vi, wi)| self.apply(wi).and_then(|a| Ok(a.sub(&other.apply(vi)?)?)))
            .collect::<Result<Vec<_>, Error>>()?;
        Ok(VectorField { components })
    }

    /// Minimal coefficient filtration order across components (the order of
    /// the field in the filtered Lie algebra); `None` for the zero field.
    pub fn order(&self) -> Option<u64> {
        self.components.iter().filter_map(|c| c.filtration_order()).min()
    }

    /// Certified 1-bound at scale s: Σ_i |c_i|_s (Cauchy estimate per axis).
    pub fn bound_at(&self, scale: &ScaleFamily, s: f64) -> Result<f64, Error> {
        let mut total = 0.0;
        for c in &self.components {
            total += scale.norm_at(c, s)?;
        }
        Ok(total)
    }

    /// Keeps coefficient terms with total degree in [lo, hi].
    pub fn degree_slice(&self, lo: u64, hi: u64) -> Self {
        VectorField { components: self.components.iter().map(|c| c.degree_slice(lo, hi)).collect() }
    }

    /// Re-truncates every component to a new cap.
    pub fn with_cap(&self, cap: u64) -> Self {
        VectorField { components: self.components.iter().map(|c| c.with_cap(cap)).collect() }
    }

    pub fn max_coeff(&self) -> f64 {
        self.components.iter().map(|c| c.max_coeff()).fold(0.0, f64::max)
    }
}

const EXP_BUDGET_FACTOR: u64 = 4;

/// Lie-series action of the flow automorphism on a germ:
/// f ↦ Σ_k (±v)^k f / k!. Generators are expected to raise order, making the
/// sum finite on the jet; the budget guards against misuse.
pub fn lie_exp_germ<C: Coeff>(
    v: &VectorField<C>,
    f: &TruncatedSeries<C>,
    negate: bool,
) -> Result<TruncatedSeries<C>, Error> {
    let budget = EXP_BUDGET_FACTOR * (f.cap() + 2);
    let mut acc = f.clone();
    let mut term = f.clone();
    for k in 1..=budget {
        term = v.apply(&term)?;
        if negate {
            term = term.neg();
        }
        term = term.scale(&C::inv_int(k as i64));
        if term.is_zero() {
            return Ok(acc);
        }
        acc = acc.add(&term)?;
        if !C::EXACT && term.max_coeff() <= 1e-17 * acc.max_coeff().max(1.0) {
            return Ok(acc);
        }
    }
    Err(Error::NotExponentiable { bound: v.max_coeff(), s: 0.0 })
}

/// Adjoint action of the flow automorphism on a field:
/// x ↦ Σ_k ad_{±u}^k x / k!  with ad_u = [u, ·].
pub fn lie_exp_ad<C: Coeff>(
    u: &VectorField<C>,
    x: &VectorField<C>,
    negate: bool,
) -> Result<VectorField<C>, Error> {
    let budget = EXP_BUDGET_FACTOR * (x.cap() + 2);
    let mut acc = x.clone();
    let mut term = x.clone();
    for k in 1..=budget {
        term = u.bracket(&term)?;
        if negate {
            term = term.neg();
        }
        term = term.scale_by(&C::inv_int(k as i64));
        if term.is_zero() {
            return Ok(acc);
        }
        acc = acc.add(&term)?;
        if !C::EXACT && term.max_coeff() <= 1e-17 * acc.max_coeff().max(1.0) {
            return Ok(acc);
        }
    }
    Err(Error::NotExponentiable { bound: u.max_coeff(), s: 0.0 })
}

/// Image of the coordinate tuple under the composed flow automorphisms
/// Ψ_{-u_0}, …, Ψ_{-u_{N-1}} applied in iteration order: the map carrying the
/// normal form onto the input object (for the adjoint problems) or the input
/// onto the normal form (for right-composition problems).
pub fn transform_map<C: Coeff>(
    gens: &[VectorField<C>],
    sig: Signature,
    cap: u64,
) -> Result<Vec<TruncatedSeries<C>>, Error> {
    let mut tuple: Vec<TruncatedSeries<C>> =
        (0..sig.len()).map(|axis| TruncatedSeries::coordinate(sig, cap, axis)).collect();
    for u in gens {
        for g in tuple.iter_mut() {
            *g = lie_exp_germ(u, g, true)?;
        }
    }
    Ok(tuple)
}

/// Image of the coordinate tuple under the inverse composition (positive
/// exponents, reverse order).
pub fn transform_map_inverse<C: Coeff>(
    gens: &[VectorField<C>],
    sig: Signature,
    cap: u64,
) -> Result<Vec<TruncatedSeries<C>>, Error> {
    let mut tuple: Vec<TruncatedSeries<C>> =
        (0..sig.len()).map(|axis| TruncatedSeries::coordinate(sig, cap, axis)).collect();
    for u in gens.iter().rev() {
        for g in tuple.iter_mut() {
            *g = lie_exp_germ(u, g, false)?;
        }
    }
    Ok(tuple)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::MultiIndex;
    use num_complex::Complex64;

    type S = TruncatedSeries<Complex64>;

    fn sig1() -> Signature {
        Signature::taylor(1)
    }

    fn mono(exp: i64, c: f64, cap: u64) -> S {
        S::monomial(sig1(), cap, MultiIndex::new(vec![exp]), Complex64::new(c, 0.0))
    }

    #[test]
    fn bracket_of_one_dim_fields() {
        // [z²∂, z∂] = −z²∂
        let cap = 8;
        let v = VectorField { components: vec![mono(2, 1.0, cap)] };
        let w = VectorField { components: vec![mono(1, 1.0, cap)] };
        let b = v.bracket(&w).unwrap();
        assert_eq!(b.components[0], mono(2, -1.0, cap));
    }

    #[test]
    fn flow_of_quadratic_field_is_geometric() {
        // Ψ_{z²∂}(z) = z + z² + z³ + …
        let cap = 6;
        let v = VectorField { components: vec![mono(2, 1.0, cap)] };
        let img = lie_exp_germ(&v, &mono(1, 1.0, cap), false).unwrap();
        for d in 1..=cap {
            let c = img.coeff(&MultiIndex::new(vec![d as i64]));
            assert!((c.re - 1.0).abs() < 1e-12, "degree {d}: {c}");
        }
    }
}
