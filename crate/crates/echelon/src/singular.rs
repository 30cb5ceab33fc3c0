//! Singular KAM step at a Morse critical point: H = Σ λ_i q_i p_i on ℂ^{2n}
//! with the standard bracket {q_i, p_j} = δ_ij, perturbed inside the cube of
//! the maximal ideal. Monomials q^j p^{j'} are eigenvectors of {·, H} with
//! eigenvalue (λ, j−j'); resonant terms (j = j') are functions of the
//! products q_i p_i and land in the square of that ideal, so they form the
//! transversal and the conjugated Hamiltonian equals H modulo I².

use crate::coeff::Coeff;
use crate::dioph::{min_small_divisor, DiophantineCert, Frequency};
use crate::error::Error;
use crate::index::{MultiIndex, Signature};
use crate::iterate::{transversal_iterate, IterationTrace, ScaledAction, Schedule};
use crate::scale::ScaleFamily;
use crate::series::TruncatedSeries;

/// {f, h} = Σ_i (∂_{q_i} f ∂_{p_i} h − ∂_{p_i} f ∂_{q_i} h) on a 2n-slot
/// Taylor lattice with q_i on axis i and p_i on axis n+i.
pub fn qp_bracket<C: Coeff>(
    n: usize,
    f: &TruncatedSeries<C>,
    h: &TruncatedSeries<C>,
) -> Result<TruncatedSeries<C>, Error> {
    let mut out = TruncatedSeries::zero(f.signature(), f.cap());
    for i in 0..n {
        out = out.add(&f.derive(i).mul(&h.derive(n + i))?)?;
        out = out.sub(&f.derive(n + i).mul(&h.derive(i))?)?;
    }
    Ok(out)
}

/// Σ_i min(j_i, j'_i): the I-adic order of q^j p^{j'} in the ideal generated
/// by the products q_i p_i.
pub fn ideal_order(n: usize, idx: &MultiIndex) -> u64 {
    (0..n).map(|i| idx.0[i].min(idx.0[n + i]) as u64).sum()
}

pub struct SingularKam<C: Coeff> {
    n: usize,
    lambda: Vec<C>,
    base: TruncatedSeries<C>,
    sig: Signature,
    cap: u64,
    scale: ScaleFamily,
    res_tol: f64,
    pub cert: DiophantineCert,
}

impl<C: Coeff> SingularKam<C> {
    /// Splits H into Σ λ_i q_i p_i and the remainder, requiring the
    /// remainder to vanish to third order and the frequency to clear the
    /// divisor scan up to the cap.
    pub fn new(
        h: &TruncatedSeries<C>,
        scale_max: f64,
        res_tol: f64,
    ) -> Result<(Self, TruncatedSeries<C>), Error> {
        let sig = h.signature();
        if sig.fourier != 0 || sig.taylor % 2 != 0 {
            return Err(Error::Precondition(
                "singular step needs a (q_1..q_n, p_1..p_n) Taylor lattice".into(),
            ));
        }
        let n = sig.taylor / 2;
        let cap = h.cap();
        let quad = h.degree_slice(0, 2);
        let mut lambda = vec![C::zero(); n];
        let mut base = TruncatedSeries::zero(sig, cap);
        for (idx, c) in quad.terms() {
            let mut qp_pair = None;
            for i in 0..n {
                if idx.0[i] == 1 && idx.0[n + i] == 1 {
                    qp_pair = Some(i);
                }
            }
            match qp_pair {
                Some(i) if idx.total_degree(sig) == 2 => {
                    lambda[i] = c.clone();
                    base.set(idx.clone(), c.clone());
                }
                _ => {
                    return Err(Error::Precondition(
                        "quadratic part must be a combination of the products q_i p_i".into(),
                    ))
                }
            }
        }
        if lambda.iter().all(|l| l.is_zero()) {
            return Err(Error::Precondition("quadratic part vanishes".into()));
        }
        let b = h.sub(&base)?;
        if b.filtration_order().map_or(false, |o| o < 3) {
            return Err(Error::Precondition(
                "perturbation must lie in the cube of the maximal ideal".into(),
            ));
        }
        let lambda_f = Frequency(lambda.iter().map(|l| l.to_c64()).collect());
        let cert = min_small_divisor(&lambda_f, 0, cap.max(1));
        if !cert.pass || cert.c <= res_tol {
            return Err(Error::Resonance {
                witness: cert.witness.clone(),
                value: cert.divisor_at_witness,
            });
        }
        let scale = ScaleFamily::majorant(scale_max);
        Ok((SingularKam { n, lambda, base, sig, cap, scale, res_tol, cert }, b))
    }

    pub fn base_hamiltonian(&self) -> &TruncatedSeries<C> {
        &self.base
    }

    /// Eigenvalue (λ, j−j') of {·, H} on q^j p^{j'}.
    fn eigenvalue(&self, idx: &MultiIndex) -> C {
        let mut d = C::zero();
        for i in 0..self.n {
            d = d + self.lambda[i].clone() * C::from_int(idx.0[i] - idx.0[self.n + i]);
        }
        d
    }
}

impl<C: Coeff> ScaledAction<C> for SingularKam<C> {
    type Point = TruncatedSeries<C>;
    type Gen = TruncatedSeries<C>;

    fn signature(&self) -> Signature {
        self.sig
    }

    fn scale(&self) -> &ScaleFamily {
        &self.scale
    }

    fn base(&self) -> Self::Point {
        self.base.clone()
    }

    fn point_add(&self, a: &Self::Point, b: &Self::Point) -> Self::Point {
        a.add(b).expect("matching signatures")
    }

    fn point_sub(&self, a: &Self::Point, b: &Self::Point) -> Self::Point {
        a.sub(b).expect("matching signatures")
    }

    fn point_is_zero(&self, x: &Self::Point) -> bool {
        x.is_zero()
    }

    fn point_norm(&self, x: &Self::Point, s: f64) -> Result<f64, Error> {
        self.scale.norm_at(x, s)
    }

    fn point_order(&self, x: &Self::Point) -> Option<u64> {
        x.filtration_order()
    }

    fn point_slice(&self, x: &Self::Point, lo: u64, hi: u64) -> Self::Point {
        x.degree_slice(lo, hi)
    }

    fn point_max_coeff(&self, x: &Self::Point) -> f64 {
        x.max_coeff()
    }

    fn point_zero(&self) -> Self::Point {
        TruncatedSeries::zero(self.sig, self.cap)
    }

    fn gen_add(&self, a: &Self::Gen, b: &Self::Gen) -> Self::Gen {
        a.add(b).expect("matching signatures")
    }

    /// Certified 1-bound of {h, ·}: Σ_i |∂_{q_i}h|_s + |∂_{p_i}h|_s.
    fn gen_bound(&self, u: &Self::Gen, s: f64) -> Result<f64, Error> {
        let mut total = 0.0;
        for axis in 0..2 * self.n {
            total += self.scale.norm_at(&u.derive(axis), s)?;
        }
        Ok(total)
    }

    fn act(&self, u: &Self::Gen, x: &Self::Point) -> Result<Self::Point, Error> {
        qp_bracket(self.n, u, x)
    }

    fn apply_exp(
        &self,
        u: &Self::Gen,
        negate: bool,
        x: &Self::Point,
    ) -> Result<Self::Point, Error> {
        let budget = 4 * (x.cap() + 2);
        let mut acc = x.clone();
        let mut term = x.clone();
        for k in 1..=budget {
            term = qp_bracket(self.n, u, &term)?;
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
        Err(Error::NotExponentiable { bound: u.max_coeff(), s: 0.0 })
    }

    /// Divides non-resonant monomials by (λ, j−j'); resonant terms stay in
    /// the residual and are routed to the transversal by the engine.
    fn solve(&self, _base: &Self::Point, r: &Self::Point) -> Result<Self::Gen, Error> {
        let mut out = TruncatedSeries::zero(self.sig, self.cap);
        for (idx, c) in r.terms() {
            let resonant = (0..self.n).all(|i| idx.0[i] == idx.0[self.n + i]);
            if resonant {
                continue;
            }
            let d = self.eigenvalue(idx);
            if d.magnitude() <= self.res_tol {
                return Err(Error::Resonance { witness: idx.clone(), value: d.magnitude() });
            }
            out.set(idx.clone(), c.clone() / d);
        }
        Ok(out)
    }

    /// The transversal: resonant monomials q^j p^j. All of them are of
    /// I-adic order ≥ 2 once the perturbation starts in degree 3.
    fn f_split(&self, x: &Self::Point) -> (Self::Point, Self::Point) {
        let f = x.filter(|idx| (0..self.n).all(|i| idx.0[i] == idx.0[self.n + i]));
        let rest = x.sub(&f).expect("matching signatures");
        (f, rest)
    }

    fn has_transversal(&self) -> bool {
        true
    }

    fn inverse_bound(&self) -> f64 {
        1.0 / self.cert.c
    }
}

pub struct SingularResult<C: Coeff> {
    pub gens: Vec<TruncatedSeries<C>>,
    pub alpha_total: TruncatedSeries<C>,
    pub trace: IterationTrace,
    pub residual: TruncatedSeries<C>,
    pub base: TruncatedSeries<C>,
    /// Images of q_1…q_n, p_1…p_n under the composed symplectic jet.
    pub transform: Vec<TruncatedSeries<C>>,
}

/// Conjugates H = Σλ_i q_i p_i + R, R ∈ M³, to H modulo I².
pub fn singular_kam_step<C: Coeff>(
    h: &TruncatedSeries<C>,
    steps: usize,
    schedule: Schedule,
    scale_max: f64,
    res_tol: f64,
) -> Result<SingularResult<C>, Error> {
    let (problem, b) = SingularKam::new(h, scale_max, res_tol)?;
    let run = transversal_iterate(&problem, &b, steps, schedule)?;
    let sig = problem.sig;
    let cap = problem.cap;
    let mut transform = Vec::new();
    for axis in 0..sig.len() {
        let mut img = TruncatedSeries::monomial(sig, cap, MultiIndex::unit(sig, axis), C::one());
        for u in &run.gens {
            img = problem.apply_exp(u, true, &img)?;
        }
        transform.push(img);
    }
    Ok(SingularResult {
        alpha_total: run.alpha_total.expect("transversal run returns alpha"),
        gens: run.gens,
        trace: run.trace,
        residual: run.final_residual,
        base: problem.base,
        transform,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    type S = TruncatedSeries<Complex64>;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn qp_bracket_canonical_pairs() {
        // n=1: {q, p} = 1, {p, q} = −1.
        let sig = Signature::taylor(2);
        let q = S::coordinate(sig, 6, 0);
        let p = S::coordinate(sig, 6, 1);
        let one = qp_bracket(1, &q, &p).unwrap();
        assert_eq!(one, S::one(sig, 6));
        assert_eq!(qp_bracket(1, &p, &q).unwrap(), S::one(sig, 6).neg());
    }

    #[test]
    fn eigenvalue_of_monomials() {
        // n=1, λ: {q³, λqp} = 3λ q³ (j−j' = 3 on q³).
        let sig = Signature::taylor(2);
        let mut h = S::zero(sig, 8);
        h.set(MultiIndex::new(vec![1, 1]), c(0.7));
        let mut m = S::zero(sig, 8);
        m.set(MultiIndex::new(vec![3, 0]), c(1.0));
        let br = qp_bracket(1, &m, &h).unwrap();
        assert!((br.coeff(&MultiIndex::new(vec![3, 0])) - c(2.1)).norm() < 1e-14);
    }

    #[test]
    fn ideal_order_counts_paired_powers() {
        let sig = Signature::taylor(4);
        let idx = MultiIndex::new(vec![2, 1, 1, 2]);
        // pairs: min(2,1) + min(1,2) = 2
        assert_eq!(ideal_order(2, &idx), 2);
        let _ = sig;
    }

    #[test]
    fn step_on_cubic_perturbation() {
        // n=1, H = qp + q³: one step matches the direct homological solve
        // and the final residual sits in I².
        let sig = Signature::taylor(2);
        let cap = 8;
        let mut h = S::zero(sig, cap);
        h.set(MultiIndex::new(vec![1, 1]), c(1.0));
        h.set(MultiIndex::new(vec![3, 0]), c(1.0));
        let res = singular_kam_step(
            &h,
            4,
            Schedule::Thirds { s: 0.2, k: 0, l: 0 },
            1.0,
            1e-12,
        )
        .unwrap();
        // first correction: q³/(λ,(3,0)−(0,0)) = q³/3
        let g0 = &res.gens[0];
        assert!((g0.coeff(&MultiIndex::new(vec![3, 0])) - c(1.0 / 3.0)).norm() < 1e-13);
        // residual ∈ I² at termination
        for (idx, _) in res.residual.terms() {
            assert!(ideal_order(1, idx) >= 2, "non-I² residual term {idx:?}");
        }
        // alpha_total ∈ I² too (resonant monomials of degree ≥ 4)
        for (idx, _) in res.alpha_total.terms() {
            assert!(ideal_order(1, idx) >= 2);
        }
    }
}
