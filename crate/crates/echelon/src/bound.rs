//! Linear operators on truncated series with (k,τ,N) boundedness
//! certificates.
//!
//! A profile (k, τ, N) asserts `|u x|_s ≤ N σ^{-k} |x|_{s+σ}` for all
//! `s ∈ (0,τ)`, `σ ∈ (0,τ−s]`. Profiles compose: `u∘v` is (k+k')-bounded
//! with constant `2^{k+k'} N N'`, and an n-fold product of 1-bounded
//! operators picks up `n^n ≤ 3^n n!`. Condition (E), `3N¹_s(u) < s` for all
//! `s ≤ τ`, guarantees the Lie-series exponential converges on the scale; at
//! fixed jet order the exponential of an order-raising derivation is a finite
//! sum regardless.

use crate::coeff::Coeff;
use crate::dioph::{sigma, Frequency};
use crate::error::Error;
use crate::index::{MultiIndex, Signature};
use crate::scale::ScaleFamily;
use crate::series::TruncatedSeries;
use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

/// Diagonal weight rules: operators acting by `e_i ↦ α_i e_i`.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub enum DiagRule {
    Identity,
    /// The derivation Σ λ_j z_j ∂_{z_j}: eigenvalue (λ, i) on the Fourier
    /// part of the index.
    Angular { lambda: Frequency },
    /// Eigenvalue σ(i)^τ on the Fourier part (kills the mean for τ ≥ 1).
    SigmaPow { tau: u32 },
    /// The operator Id + Σ (z_j∂_{z_j})^τ read with absolute values:
    /// eigenvalue 1 + Σ|i_j|^τ, which dominates σ(i)^τ up to a dimension
    /// constant n^{τ-1}.
    LOperator { tau: u32 },
    /// Hadamard multiplication by Σ_{i≠0} (λ,i)^{-1} e_i, carrying the
    /// certificate data it was built under.
    SmallDivisorInverse { lambda: Frequency, tau: u32, c_cert: f64 },
}

impl DiagRule {
    pub fn eigenvalue(&self, idx: &MultiIndex, sig: Signature) -> num_complex::Complex64 {
        use num_complex::Complex64;
        let fpart = &idx.0[..sig.fourier];
        match self {
            DiagRule::Identity => Complex64::new(1.0, 0.0),
            DiagRule::Angular { lambda } => lambda.dot(fpart),
            DiagRule::SigmaPow { tau } => {
                Complex64::new((sigma(fpart) as f64).powi(*tau as i32), 0.0)
            }
            DiagRule::LOperator { tau } => {
                let s: f64 = fpart
                    .iter()
                    .map(|&e| (e.unsigned_abs() as f64).powi(*tau as i32))
                    .sum();
                Complex64::new(1.0 + s, 0.0)
            }
            DiagRule::SmallDivisorInverse { lambda, .. } => {
                if fpart.iter().all(|&e| e == 0) {
                    Complex64::new(0.0, 0.0)
                } else {
                    lambda.dot(fpart).inv()
                }
            }
        }
    }
}

/// How the exponential terminates when its generator does not raise order.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ExpPolicy {
    /// Accept non-order-raising generators (divergent at germ level, finite
    /// on the jet).
    pub domain_override: bool,
    /// Relative tail tolerance for float-mode termination.
    pub tail_tol: f64,
    pub max_terms: usize,
}

impl Default for ExpPolicy {
    fn default() -> Self {
        ExpPolicy { domain_override: false, tail_tol: 1e-16, max_terms: 256 }
    }
}

/// Linear, signature-preserving operator on truncated series.
#[derive(Clone, PartialEq, Debug)]
pub enum SeriesOperator<C: Coeff> {
    /// Σ_axes c_axis · ∂_axis, where Fourier axes use the angular derivation.
    Derivation { coeffs: Vec<TruncatedSeries<C>> },
    /// Convolution with a fixed series.
    Multiplier { f: TruncatedSeries<C> },
    /// Coefficientwise product with a fixed series.
    Hadamard { g: TruncatedSeries<C> },
    Diag { rule: DiagRule },
    /// Composition; `factors[0]` acts last (outermost).
    Composite { factors: Vec<SeriesOperator<C>> },
    /// Σ_{j≤J} (±u)^j / j! with J chosen per application.
    LieExp { gen: Box<SeriesOperator<C>>, negate: bool, policy: ExpPolicy },
    Zero,
}

impl<C: Coeff> SeriesOperator<C> {
    pub fn derivation(coeffs: Vec<TruncatedSeries<C>>) -> Self {
        SeriesOperator::Derivation { coeffs }
    }

    pub fn apply(&self, x: &TruncatedSeries<C>) -> Result<TruncatedSeries<C>, Error> {
        match self {
            SeriesOperator::Derivation { coeffs } => {
                let mut out = TruncatedSeries::zero(x.signature(), x.cap());
                for (axis, c) in coeffs.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    out = out.add(&c.mul(&x.derive(axis))?)?;
                }
                Ok(out)
            }
            SeriesOperator::Multiplier { f } => f.mul(x),
            SeriesOperator::Hadamard { g } => x.hadamard(g),
            SeriesOperator::Diag { rule } => {
                let sig = x.signature();
                Ok(x.map_diag(|i| {
                    let v = rule.eigenvalue(i, sig);
                    C::from_f64(v.re, v.im)
                }))
            }
            SeriesOperator::Composite { factors } => {
                let mut y = x.clone();
                for f in factors.iter().rev() {
                    y = f.apply(&y)?;
                }
                Ok(y)
            }
            SeriesOperator::LieExp { gen, negate, policy } => {
                exp_apply(gen, *negate, *policy, x)
            }
            SeriesOperator::Zero => Ok(TruncatedSeries::zero(x.signature(), x.cap())),
        }
    }

    /// Structural check that the operator raises filtration order, which
    /// makes its Lie exponential a finite sum on any jet.
    pub fn raises_order(&self, sig: Signature) -> bool {
        match self {
            SeriesOperator::Derivation { coeffs } => {
                coeffs.iter().enumerate().all(|(axis, c)| {
                    let need = if axis < sig.fourier { 1 } else { 2 };
                    c.filtration_order().map_or(true, |o| o >= need)
                })
            }
            SeriesOperator::Multiplier { f } => {
                f.filtration_order().map_or(true, |o| o >= 1)
            }
            SeriesOperator::Zero => true,
            SeriesOperator::Composite { factors } => {
                factors.iter().any(|f| f.raises_order(sig))
            }
            _ => false,
        }
    }
}

fn exp_apply<C: Coeff>(
    gen: &SeriesOperator<C>,
    negate: bool,
    policy: ExpPolicy,
    x: &TruncatedSeries<C>,
) -> Result<TruncatedSeries<C>, Error> {
    let mut acc = x.clone();
    let mut term = x.clone();
    for j in 1..=policy.max_terms {
        term = gen.apply(&term)?;
        if negate {
            term = term.neg();
        }
        term = term.scale(&C::inv_int(j as i64));
        if term.is_zero() {
            return Ok(acc);
        }
        acc = acc.add(&term)?;
        if !C::EXACT && term.max_coeff() <= policy.tail_tol * acc.max_coeff().max(1.0) {
            return Ok(acc);
        }
    }
    Ok(acc)
}

/// Builds the exponential, refusing non-order-raising generators unless the
/// caller overrides. Divergent cases like `exp(∂_z)` stay representable but
/// never evaluate silently.
pub fn exp_operator<C: Coeff>(
    u: SeriesOperator<C>,
    sig: Signature,
    scale: &ScaleFamily,
    policy: ExpPolicy,
) -> Result<SeriesOperator<C>, Error> {
    if !u.raises_order(sig) && !policy.domain_override {
        // Condition (E) rescues bounded generators; check it on a scale grid.
        let tau = scale.scale_max();
        let ok = condition_e_grid(&u, scale, sig, tau, 16)?;
        if !ok {
            let s = tau * 0.5;
            let b = certified_bound_at(&u, scale, sig, s).unwrap_or(f64::INFINITY);
            return Err(Error::NotExponentiable { bound: b, s });
        }
    }
    Ok(SeriesOperator::LieExp { gen: Box::new(u), negate: false, policy })
}

pub fn exp_neg_operator<C: Coeff>(
    u: SeriesOperator<C>,
    sig: Signature,
    scale: &ScaleFamily,
    policy: ExpPolicy,
) -> Result<SeriesOperator<C>, Error> {
    let e = exp_operator(u, sig, scale, policy)?;
    match e {
        SeriesOperator::LieExp { gen, policy, .. } => {
            Ok(SeriesOperator::LieExp { gen, negate: true, policy })
        }
        _ => unreachable!(),
    }
}

/// Certificate that `|u x|_s ≤ N σ^{-k} |x|_{s+σ}` on (0, τ).
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct BoundProfile {
    pub k: u32,
    pub tau: f64,
    pub n: f64,
    /// True when N comes from an analytic rule (Cauchy estimate, diagonal
    /// weight comparison); false for empirical lower estimates.
    pub certified: bool,
}

impl BoundProfile {
    pub fn new(k: u32, tau: f64, n: f64, certified: bool) -> Self {
        BoundProfile { k, tau, n, certified }
    }
}

/// Scale-pointwise certified bound N^1_s(u) (or N^0_s for diagonal kinds).
///
/// For a derivation Σ c_i ∂_i the Cauchy estimate gives
/// `|u x|_s ≤ (Σ|c_i|_s) σ^{-1} |x|_{s+σ}`; the angular derivation obeys the
/// same bound because `σ(i) e^{σ(i)s} ≤ (eσ)^{-1} e^{σ(i)(s+σ)}`.
/// Returns `None` when no analytic rule applies.
pub fn certified_bound_at<C: Coeff>(
    u: &SeriesOperator<C>,
    scale: &ScaleFamily,
    _sig: Signature,
    s: f64,
) -> Option<f64> {
    match u {
        SeriesOperator::Derivation { coeffs } => {
            let mut total = 0.0;
            for c in coeffs {
                if c.is_zero() {
                    continue;
                }
                total += scale.norm_at(c, s).ok()?;
            }
            Some(total)
        }
        SeriesOperator::Multiplier { f } => scale.norm_at(f, s).ok(),
        SeriesOperator::Hadamard { g } => {
            Some(g.terms().map(|(_, c)| c.magnitude()).fold(0.0, f64::max))
        }
        SeriesOperator::Diag { rule } => match rule {
            DiagRule::Identity => Some(1.0),
            DiagRule::SmallDivisorInverse { tau, c_cert, .. } => {
                let t = *tau as f64;
                let factor = if *tau == 0 { 1.0 } else { (t / std::f64::consts::E).powf(t) };
                Some(factor / c_cert)
            }
            _ => None,
        },
        SeriesOperator::Zero => Some(0.0),
        _ => None,
    }
}

/// The loss order k that goes with `certified_bound_at`.
pub fn certified_k<C: Coeff>(u: &SeriesOperator<C>) -> Option<u32> {
    match u {
        SeriesOperator::Derivation { .. } => Some(1),
        SeriesOperator::Multiplier { .. } | SeriesOperator::Hadamard { .. } => Some(0),
        SeriesOperator::Diag { rule } => match rule {
            DiagRule::Identity => Some(0),
            DiagRule::SmallDivisorInverse { tau, .. } => Some(*tau),
            _ => None,
        },
        SeriesOperator::Zero => Some(0),
        _ => None,
    }
}

/// Empirical or analytic estimate of N^k_τ(u).
///
/// When the descriptor admits an analytic rule the returned profile is
/// certified (an upper bound); otherwise N is the measured supremum over the
/// probe set and grid, a lower estimate, and flagged as such.
pub fn estimate_bound<C: Coeff>(
    u: &SeriesOperator<C>,
    sig: Signature,
    k: u32,
    tau: f64,
    scale: &ScaleFamily,
    probes: &[TruncatedSeries<C>],
    grid: usize,
) -> Result<BoundProfile, Error> {
    let s_max = scale.scale_max();
    let tau = tau.min(s_max * (1.0 - 1e-12));
    if certified_k(u) == Some(k) {
        if let Some(n) = certified_bound_at(u, scale, sig, tau) {
            return Ok(BoundProfile::new(k, tau, n, true));
        }
    }
    if probes.iter().all(|p| p.is_zero()) {
        return Err(Error::EmptyProbeSet);
    }
    let mut n_emp: f64 = 0.0;
    for x in probes {
        if x.is_zero() {
            continue;
        }
        let ux = u.apply(x)?;
        for a in 1..=grid {
            for b in 1..=grid {
                let s = tau * a as f64 / (grid as f64 + 1.0) / 2.0;
                let sg = tau * b as f64 / (grid as f64 + 1.0) / 2.0;
                if s + sg >= tau {
                    continue;
                }
                let denom = scale.norm_at(x, s + sg)?;
                if denom == 0.0 {
                    continue;
                }
                let num = scale.norm_at(&ux, s)?;
                n_emp = n_emp.max(num * sg.powi(k as i32) / denom);
            }
        }
    }
    Ok(BoundProfile::new(k, tau, n_emp, false))
}

/// N^{k+k'}_τ(uv) ≤ 2^{k+k'} N N', with τ the smaller interval.
pub fn compose_bound(p: BoundProfile, q: BoundProfile) -> BoundProfile {
    let k = p.k + q.k;
    BoundProfile {
        k,
        tau: p.tau.min(q.tau),
        n: 2f64.powi(k as i32) * p.n * q.n,
        certified: p.certified && q.certified,
    }
}

/// n-fold product: loss Σk_i, constant n^{Σk_i} Π N_i.
pub fn n_fold_bound(profiles: &[BoundProfile]) -> BoundProfile {
    let k: u32 = profiles.iter().map(|p| p.k).sum();
    let tau = profiles.iter().map(|p| p.tau).fold(f64::INFINITY, f64::min);
    let n = (profiles.len() as f64).powi(k as i32)
        * profiles.iter().map(|p| p.n).product::<f64>();
    BoundProfile { k, tau, n, certified: profiles.iter().all(|p| p.certified) }
}

/// Condition (E) at a single scale: 3 N¹_s(u) < s, strict.
pub fn check_condition_e(n1_at_s: f64, s: f64) -> bool {
    3.0 * n1_at_s < s
}

/// Condition (E) sampled on a grid of scales in (0, τ].
pub fn condition_e_grid<C: Coeff>(
    u: &SeriesOperator<C>,
    scale: &ScaleFamily,
    sig: Signature,
    tau: f64,
    grid: usize,
) -> Result<bool, Error> {
    let tau = tau.min(scale.scale_max() * (1.0 - 1e-12));
    for a in 1..=grid {
        let s = tau * a as f64 / grid as f64;
        let s = s.min(scale.scale_max() * (1.0 - 1e-12));
        let n1 = match certified_bound_at(u, scale, sig, s) {
            Some(n) => n,
            None => return Ok(false),
        };
        if !check_condition_e(n1, s) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Self-test of the constant chain 3^n n! ≥ n^n used by the n-fold product
/// estimate. Exact big-integer arithmetic.
pub fn gamma_inequality_check(n: u32) -> bool {
    assert!(n >= 1);
    let mut fact = BigUint::one();
    for i in 1..=n {
        fact *= BigUint::from(i);
    }
    let lhs = BigUint::from(3u32).pow(n) * fact;
    let rhs = BigUint::from(n).pow(n);
    lhs >= rhs
}

/// Verdict of an infinite-product convergence certificate.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub enum Verdict {
    Converged { tail_bound: f64 },
    Diverged { reason: String, at: Option<usize> },
    Undetermined,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ProductRow {
    pub n: usize,
    pub n1: f64,
    pub partial_sum: f64,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ConvergenceCert {
    pub s: f64,
    pub rows: Vec<ProductRow>,
    pub verdict: Verdict,
}

/// Summability rule applied to the sequence N¹_s(u_n)/s.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum TailRule {
    /// Converged when consecutive nonzero terms decay by at least `rho`.
    GeometricRatio { rho: f64 },
}

impl Default for TailRule {
    fn default() -> Self {
        TailRule::GeometricRatio { rho: 0.9 }
    }
}

/// Partial products g_n = e^{u_n}···e^{u_0} with inverse h_n = e^{-u_0}···e^{-u_n}.
///
/// Every factor must carry condition (E) at the working scale; a violation
/// yields a `Diverged` verdict tagged with the offending index, and the jet
/// operators are still returned (the jet is finite either way).
pub fn infinite_product<C: Coeff>(
    us: &[SeriesOperator<C>],
    sig: Signature,
    scale: &ScaleFamily,
    s: f64,
    rule: TailRule,
) -> Result<(SeriesOperator<C>, SeriesOperator<C>, ConvergenceCert), Error> {
    scale.check_s(s)?;
    let policy = ExpPolicy { domain_override: true, ..ExpPolicy::default() };
    let mut rows = Vec::new();
    let mut partial = 0.0;
    let mut failed_at = None;
    for (n, u) in us.iter().enumerate() {
        let n1 = certified_bound_at(u, scale, sig, s)
            .ok_or(Error::Unsupported("infinite products need analytically bounded factors"))?;
        partial += n1 / s;
        rows.push(ProductRow { n, n1, partial_sum: partial });
        if !check_condition_e(n1, s) && failed_at.is_none() {
            failed_at = Some(n);
        }
    }
    let verdict = if let Some(at) = failed_at {
        Verdict::Diverged { reason: "condition (E) violated".into(), at: Some(at) }
    } else {
        let terms: Vec<f64> = rows.iter().map(|r| r.n1 / s).filter(|&t| t > 0.0).collect();
        match rule {
            TailRule::GeometricRatio { rho } => {
                if terms.is_empty() {
                    Verdict::Converged { tail_bound: 0.0 }
                } else if terms.windows(2).all(|w| w[1] <= rho * w[0]) {
                    let last = *terms.last().unwrap();
                    Verdict::Converged { tail_bound: last * rho / (1.0 - rho) }
                } else {
                    Verdict::Undetermined
                }
            }
        }
    };
    // g = e^{u_n} ∘ ... ∘ e^{u_0}: factors[0] outermost.
    let g_factors: Vec<SeriesOperator<C>> = us
        .iter()
        .rev()
        .map(|u| SeriesOperator::LieExp { gen: Box::new(u.clone()), negate: false, policy })
        .collect();
    let h_factors: Vec<SeriesOperator<C>> = us
        .iter()
        .map(|u| SeriesOperator::LieExp { gen: Box::new(u.clone()), negate: true, policy })
        .collect();
    Ok((
        SeriesOperator::Composite { factors: g_factors },
        SeriesOperator::Composite { factors: h_factors },
        ConvergenceCert { s, rows, verdict },
    ))
}

/// Exact jet operator norm for ℓ¹-weighted scales: the maximum over basis
/// monomials of degree ≤ cap of `|u e_α|_{s_to} / w(α, s_from)`.
pub fn jet_operator_norm<C: Coeff>(
    u: &SeriesOperator<C>,
    sig: Signature,
    cap: u64,
    scale: &ScaleFamily,
    s_from: f64,
    s_to: f64,
) -> Result<f64, Error> {
    let mut worst: f64 = 0.0;
    let mut fouriers = vec![vec![0i64; sig.fourier]];
    fouriers.extend(crate::index::enumerate_fourier(sig.fourier, cap));
    let mut basis = Vec::new();
    for i in fouriers {
        let budget = cap - sigma(&i);
        for t in crate::index::enumerate_taylor(sig.taylor, 0, budget) {
            let mut v = i.clone();
            v.extend_from_slice(&t);
            basis.push(MultiIndex::new(v));
        }
    }
    for idx in basis {
        let e = TruncatedSeries::monomial(sig, cap, idx.clone(), C::one());
        let ue = u.apply(&e)?;
        let w = scale.monomial_weight(&idx, sig, s_from);
        worst = worst.max(scale.norm_at(&ue, s_to)? / w);
    }
    Ok(worst)
}
