//! Reduction of a function germ with nondegenerate quadratic part to that
//! quadratic part, driven by the iteration engines. The homological inverse
//! divides by the Jacobian ideal of the quadratic form, which is spanned by
//! the independent linear forms ∂_i Q.

use crate::coeff::Coeff;
use crate::error::Error;
use crate::field::{lie_exp_germ, transform_map, VectorField};
use crate::index::Signature;
use crate::iterate::{
    kolmogorov_iterate, picard_iterate, IterationTrace, ScaledAction, Schedule, StepPrecision,
    Strategy,
};
use crate::scale::ScaleFamily;
use crate::series::TruncatedSeries;

/// Inverts a small matrix over the coefficient field by Gauss-Jordan
/// elimination with first-nonzero pivoting (magnitude pivoting in float
/// mode). Returns `None` on a singular matrix.
fn invert_matrix<C: Coeff>(m: &[Vec<C>]) -> Option<Vec<Vec<C>>> {
    let n = m.len();
    let mut a: Vec<Vec<C>> = m.to_vec();
    let mut inv: Vec<Vec<C>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { C::one() } else { C::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&x, &y| {
                a[x][col]
                    .magnitude()
                    .partial_cmp(&a[y][col].magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = a[col][j].clone() / p.clone();
            inv[col][j] = inv[col][j].clone() / p.clone();
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                a[r][j] = a[r][j].clone() - f.clone() * a[col][j].clone();
                inv[r][j] = inv[r][j].clone() - f.clone() * inv[col][j].clone();
            }
        }
    }
    Some(inv)
}

/// The Morse problem: base point Q (the quadratic part), group the
/// right-composition automorphisms, generators order-two vector fields.
pub struct MorseProblem<C: Coeff> {
    quadratic: TruncatedSeries<C>,
    hess_inv: Vec<Vec<C>>,
    hess_inv_max: f64,
    sig: Signature,
    cap: u64,
    scale: ScaleFamily,
}

impl<C: Coeff> MorseProblem<C> {
    /// Splits `f` into its quadratic part and the remainder; errors when the
    /// jet has constant or linear terms or a degenerate quadratic part.
    pub fn new(
        f: &TruncatedSeries<C>,
        scale: ScaleFamily,
    ) -> Result<(Self, TruncatedSeries<C>), Error> {
        let sig = f.signature();
        if sig.fourier != 0 {
            return Err(Error::TaylorOnly("morse reduction"));
        }
        if !f.degree_slice(0, 1).is_zero() {
            return Err(Error::Precondition(
                "germ must vanish to second order at the origin".into(),
            ));
        }
        let quadratic = f.degree_slice(2, 2);
        let n = sig.taylor;
        // H_ij with ∂_i Q = Σ_j H_ij x_j.
        let mut hess = vec![vec![C::zero(); n]; n];
        for (idx, c) in quadratic.terms() {
            let support: Vec<usize> =
                (0..n).filter(|&k| idx.0[k] > 0).collect();
            match support.as_slice() {
                [i] => hess[*i][*i] = hess[*i][*i].clone() + c.clone() + c.clone(),
                [i, j] => {
                    hess[*i][*j] = hess[*i][*j].clone() + c.clone();
                    hess[*j][*i] = hess[*j][*i].clone() + c.clone();
                }
                _ => unreachable!("degree-2 monomial touches at most two axes"),
            }
        }
        let hess_inv = invert_matrix(&hess).ok_or(Error::DegenerateQuadraticPart)?;
        let hess_inv_max = hess_inv
            .iter()
            .flatten()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max);
        let b = f.sub(&quadratic)?;
        Ok((
            MorseProblem { quadratic, hess_inv, hess_inv_max, sig, cap: f.cap(), scale },
            b,
        ))
    }
}

impl<C: Coeff> ScaledAction<C> for MorseProblem<C> {
    type Point = TruncatedSeries<C>;
    type Gen = VectorField<C>;

    fn signature(&self) -> Signature {
        self.sig
    }

    fn scale(&self) -> &ScaleFamily {
        &self.scale
    }

    fn base(&self) -> Self::Point {
        self.quadratic.clone()
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

    fn gen_bound(&self, u: &Self::Gen, s: f64) -> Result<f64, Error> {
        u.bound_at(&self.scale, s)
    }

    fn act(&self, u: &Self::Gen, x: &Self::Point) -> Result<Self::Point, Error> {
        u.apply(x)
    }

    fn apply_exp(
        &self,
        u: &Self::Gen,
        negate: bool,
        x: &Self::Point,
    ) -> Result<Self::Point, Error> {
        lie_exp_germ(u, x, negate)
    }

    /// Solves u(Q) = r exactly: every monomial x^α of r is split as
    /// x^{α−e_k}·x_k on its first supported axis and x_k is expressed in the
    /// basis ∂_j Q through the inverse Hessian.
    fn solve(&self, _base: &Self::Point, r: &Self::Point) -> Result<Self::Gen, Error> {
        if r.filtration_order().map_or(false, |o| o < 3) {
            return Err(Error::Precondition(
                "residual must lie in the cube of the maximal ideal".into(),
            ));
        }
        let n = self.sig.taylor;
        let mut comps: Vec<TruncatedSeries<C>> =
            (0..n).map(|_| TruncatedSeries::zero(self.sig, self.cap)).collect();
        for (idx, c) in r.terms() {
            let k = (0..n)
                .find(|&k| idx.0[k] > 0)
                .expect("order ≥ 3 monomial has a supported axis");
            let mut rest = idx.clone();
            rest.0[k] -= 1;
            for (j, comp) in comps.iter_mut().enumerate() {
                let w = self.hess_inv[k][j].clone();
                if !w.is_zero() {
                    comp.add_to(rest.clone(), c.clone() * w);
                }
            }
        }
        Ok(VectorField { components: comps })
    }

    fn inverse_bound(&self) -> f64 {
        self.hess_inv_max
    }
}

/// Result of a Morse reduction.
pub struct MorseResult<C: Coeff> {
    /// φ with Q ∘ φ = f modulo the cap.
    pub change: Vec<TruncatedSeries<C>>,
    /// ψ = φ^{-1}, the substitution applied by the group element: f ∘ ψ = Q.
    pub change_inverse: Vec<TruncatedSeries<C>>,
    pub trace: IterationTrace,
    pub residual: TruncatedSeries<C>,
    pub quadratic: TruncatedSeries<C>,
}

/// Brings `f` to its quadratic part modulo degree > cap.
pub fn morse_reduce<C: Coeff>(
    f: &TruncatedSeries<C>,
    steps: usize,
    schedule: Schedule,
    strategy: Strategy,
) -> Result<MorseResult<C>, Error> {
    let (problem, b) = MorseProblem::new(f, crate::scale::default_germ_scale())?;
    let run = match strategy {
        Strategy::Kolmogorov => {
            kolmogorov_iterate(&problem, &b, steps, schedule, StepPrecision::Quadratic)?
        }
        Strategy::Picard => picard_iterate(&problem, &b, steps, schedule)?,
        Strategy::Newton | Strategy::Transversal => {
            return Err(Error::Unsupported(
                "morse reduction runs with the kolmogorov or picard strategy",
            ))
        }
    };
    let sig = f.signature();
    let cap = f.cap();
    let change_inverse = transform_map(&run.gens, sig, cap)?;
    let change = crate::series::invert_map(&change_inverse)?;
    Ok(MorseResult {
        change,
        change_inverse,
        trace: run.trace,
        residual: run.final_residual,
        quadratic: problem.quadratic.clone(),
    })
}
