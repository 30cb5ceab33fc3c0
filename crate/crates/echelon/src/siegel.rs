//! Siegel linearization of a holomorphic vector field with diagonal linear
//! part: the adjoint action of coordinate changes, with the homological
//! equation solved by division by the divisors λ_i − (j,λ).

use crate::coeff::Coeff;
use crate::error::Error;
use crate::field::{transform_map, transform_map_inverse, VectorField};
use crate::index::MultiIndex;
use crate::index::Signature;
use crate::iterate::{
    kolmogorov_iterate, picard_iterate, IterationTrace, ScaledAction, Schedule, StepPrecision,
    Strategy,
};
use crate::scale::ScaleFamily;
use crate::series::TruncatedSeries;

/// Siegel linearization: base point the diagonal linear field, adjoint group
/// action, corrections divided by the divisors λ_i − (j,λ).
pub struct SiegelProblem<C: Coeff> {
    lambda: Vec<C>,
    linear: VectorField<C>,
    sig: Signature,
    cap: u64,
    scale: ScaleFamily,
    res_tol: f64,
    max_inv_divisor: f64,
}

impl<C: Coeff> SiegelProblem<C> {
    /// Splits a field into its diagonal linear part and the remainder.
    /// Errors when the linear part is not diagonal, when the perturbation
    /// has order < 2, or when a divisor within the cap is resonant.
    pub fn new(
        v: &VectorField<C>,
        scale: ScaleFamily,
        res_tol: f64,
    ) -> Result<(Self, VectorField<C>), Error> {
        let sig = v.signature();
        let cap = v.cap();
        if sig.fourier != 0 {
            return Err(Error::TaylorOnly("siegel linearization"));
        }
        let n = sig.taylor;
        let mut lambda = vec![C::zero(); n];
        for (axis, comp) in v.components.iter().enumerate() {
            let lin = comp.degree_slice(0, 1);
            for (idx, c) in lin.terms() {
                if idx.0[axis] == 1 && idx.total_degree(sig) == 1 {
                    lambda[axis] = c.clone();
                } else {
                    return Err(Error::Precondition(
                        "linear part must be diagonal in the given coordinates".into(),
                    ));
                }
            }
        }
        if lambda.iter().all(|l| l.is_zero()) {
            return Err(Error::Precondition("linear part vanishes".into()));
        }
        let linear = VectorField {
            components: (0..n)
                .map(|axis| {
                    TruncatedSeries::monomial(
                        sig,
                        cap,
                        MultiIndex::unit(sig, axis),
                        lambda[axis].clone(),
                    )
                })
                .collect(),
        };
        let b = v.sub(&linear)?;
        if b.order().map_or(false, |o| o < 2) {
            return Err(Error::Precondition("perturbation must have order at least 2".into()));
        }
        // Certify every divisor used at this cap.
        let mut max_inv_divisor = 0.0_f64;
        for j in crate::index::enumerate_taylor(n, 2, cap) {
            for i in 0..n {
                let d = divisor(&lambda, &j, i);
                let mag = d.magnitude();
                if mag <= res_tol {
                    return Err(Error::Resonance { witness: MultiIndex::new(j), value: mag });
                }
                max_inv_divisor = max_inv_divisor.max(1.0 / mag);
            }
        }
        Ok((
            SiegelProblem { lambda, linear, sig, cap, scale, res_tol, max_inv_divisor },
            b,
        ))
    }

    pub fn frequency_f64(&self) -> crate::dioph::Frequency {
        crate::dioph::Frequency(self.lambda.iter().map(|l| l.to_c64()).collect())
    }
}

/// λ_i − (j,λ): the eigenvalue of w ↦ [w, Σλ_k z_k ∂_k] on z^j ∂_i.
fn divisor<C: Coeff>(lambda: &[C], j: &[i64], component: usize) -> C {
    let mut jl = C::zero();
    for (k, l) in lambda.iter().enumerate() {
        jl = jl + l.clone() * C::from_int(j[k]);
    }
    lambda[component].clone() - jl
}

impl<C: Coeff> ScaledAction<C> for SiegelProblem<C> {
    type Point = VectorField<C>;
    type Gen = VectorField<C>;

    fn signature(&self) -> Signature {
        self.sig
    }

    fn scale(&self) -> &ScaleFamily {
        &self.scale
    }

    fn base(&self) -> Self::Point {
        self.linear.clone()
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
        x.bound_at(&self.scale, s)
    }

    fn point_order(&self, x: &Self::Point) -> Option<u64> {
        x.order()
    }

    fn point_slice(&self, x: &Self::Point, lo: u64, hi: u64) -> Self::Point {
        x.degree_slice(lo, hi)
    }

    fn point_max_coeff(&self, x: &Self::Point) -> f64 {
        x.max_coeff()
    }

    fn point_zero(&self) -> Self::Point {
        VectorField::zero(self.sig, self.cap)
    }

    fn gen_add(&self, a: &Self::Gen, b: &Self::Gen) -> Self::Gen {
        a.add(b).expect("matching signatures")
    }

    fn gen_bound(&self, u: &Self::Gen, s: f64) -> Result<f64, Error> {
        u.bound_at(&self.scale, s)
    }

    fn act(&self, u: &Self::Gen, x: &Self::Point) -> Result<Self::Point, Error> {
        u.bracket(x)
    }

    fn apply_exp(
        &self,
        u: &Self::Gen,
        negate: bool,
        x: &Self::Point,
    ) -> Result<Self::Point, Error> {
        crate::field::lie_exp_ad(u, x, negate)
    }

    /// Solves [u, a] = r coefficientwise: u on z^j∂_i is r_{ij}/(λ_i − (j,λ)).
    fn solve(&self, _base: &Self::Point, r: &Self::Point) -> Result<Self::Gen, Error> {
        let mut comps = Vec::with_capacity(r.components.len());
        for (i, rc) in r.components.iter().enumerate() {
            let mut out = TruncatedSeries::zero(self.sig, self.cap);
            for (idx, c) in rc.terms() {
                let d = divisor(&self.lambda, &idx.0, i);
                if d.magnitude() <= self.res_tol {
                    return Err(Error::Resonance { witness: idx.clone(), value: d.magnitude() });
                }
                out.set(idx.clone(), c.clone() / d);
            }
            comps.push(out);
        }
        Ok(VectorField { components: comps })
    }

    /// Triangular solve of [u, x] = r at a shifted point x = a + w: the
    /// diagonal part comes from a, contributions of w are pushed to higher
    /// coefficient degrees and absorbed degree by degree.
    fn solve_rebased(&self, at: &Self::Point, r: &Self::Point) -> Result<Self::Gen, Error> {
        let mut u = VectorField::zero(self.sig, self.cap);
        for d in 0..=self.cap {
            let res = r.sub(&u.bracket(at)?)?;
            let res_d = res.degree_slice(d, d);
            if res_d.is_zero() {
                continue;
            }
            let du = self.solve(&self.linear, &res_d)?;
            u = u.add(&du)?;
        }
        let check = r.sub(&u.bracket(at)?)?;
        let floor = 1e-12 * r.max_coeff().max(at.max_coeff()).max(f64::MIN_POSITIVE);
        let closed = if C::EXACT { check.is_zero() } else { check.max_coeff() <= floor };
        if !closed {
            return Err(Error::Precondition(
                "re-based inverse did not close within the jet".into(),
            ));
        }
        Ok(u)
    }

    fn supports_rebase(&self) -> bool {
        true
    }

    fn inverse_bound(&self) -> f64 {
        self.max_inv_divisor
    }
}

/// Result of a Siegel linearization.
pub struct SiegelResult<C: Coeff> {
    /// φ with Dφ·v_lin = v∘φ: the map carrying the linear model to v.
    pub conjugacy: Vec<TruncatedSeries<C>>,
    pub conjugacy_inverse: Vec<TruncatedSeries<C>>,
    pub trace: IterationTrace,
    pub residual: VectorField<C>,
    pub linear: VectorField<C>,
}

pub fn siegel_linearize<C: Coeff>(
    v: &VectorField<C>,
    steps: usize,
    schedule: Schedule,
    strategy: Strategy,
    res_tol: f64,
) -> Result<SiegelResult<C>, Error> {
    let (problem, b) = SiegelProblem::new(v, crate::scale::default_germ_scale(), res_tol)?;
    let run = match strategy {
        Strategy::Kolmogorov => {
            kolmogorov_iterate(&problem, &b, steps, schedule, StepPrecision::Quadratic)?
        }
        Strategy::Newton => crate::iterate::newton_iterate(
            &problem,
            &b,
            steps,
            schedule,
            StepPrecision::Quadratic,
        )?,
        Strategy::Picard => picard_iterate(&problem, &b, steps, schedule)?,
        Strategy::Transversal => {
            return Err(Error::Unsupported("siegel linearization has no transversal"))
        }
    };
    let conjugacy = transform_map(&run.gens, problem.sig, problem.cap)?;
    let conjugacy_inverse = transform_map_inverse(&run.gens, problem.sig, problem.cap)?;
    Ok(SiegelResult {
        conjugacy,
        conjugacy_inverse,
        trace: run.trace,
        residual: run.final_residual,
        linear: problem.linear.clone(),
    })
}

/// Defect of the conjugacy equation Dφ·v_lin − v∘φ, as a field whose norm
/// measures how far φ is from intertwining the two flows.
pub fn conjugacy_defect<C: Coeff>(
    v: &VectorField<C>,
    linear: &VectorField<C>,
    phi: &[TruncatedSeries<C>],
) -> Result<VectorField<C>, Error> {
    let mut comps = Vec::with_capacity(phi.len());
    for (i, phi_i) in phi.iter().enumerate() {
        // (Dφ·v_lin)_i = Σ_j ∂_j φ_i · v_lin,j
        let mut lhs = TruncatedSeries::zero(phi_i.signature(), phi_i.cap());
        for (j, vj) in linear.components.iter().enumerate() {
            lhs = lhs.add(&phi_i.derive(j).mul(vj)?)?;
        }
        let rhs = v.components[i].compose(phi)?;
        comps.push(lhs.sub(&rhs)?);
    }
    Ok(VectorField { components: comps })
}
