//! Normal-form iteration engines.
//!
//! The group-action data is abstracted behind [`ScaledAction`]; the engines
//! run the Kolmogorov scheme (compose a fresh exponential each step, with
//! corrections from the inverse of the infinitesimal action at the base
//! point), the Newton scheme (inverse re-based at the current point), the
//! Picard scheme (inverse frozen at the base, single accumulated group
//! element), and the transversal variant where the base point itself moves
//! inside an affine transversal.
//!
//! The jet computation never needs the analytic smallness constants; they are
//! estimated along the run and recorded in the trace so every step can be
//! compared against the remainder bounds `36C σ^{-2} N²` and `6C|α| σ^{-1} N`.

use crate::coeff::Coeff;
use crate::error::Error;
use crate::index::Signature;
use crate::scale::ScaleFamily;
use serde::{Deserialize, Serialize};

/// Scale bookkeeping for a run: σ_0 … σ_{n} and the induced s_n.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub enum Schedule {
    /// σ_n = s/2^{n-k+1} for n ≥ k+1 (zero before), s_{n+1} = s_n − 2σ_n,
    /// s_0 = 2s. The drops sum to s, so s_n decreases from 2s towards s.
    Halving { s: f64, k: u32 },
    /// σ_n = s/3^{n-k-l} for n ≥ k+l+1 (zero before), s_{n+1} = s_n − 3σ_n,
    /// s_0 = 5s/2. The drops sum to 3s/2, so s_n decreases towards s.
    Thirds { s: f64, k: u32, l: u32 },
    /// Caller-supplied σ_n with s_{n+1} = s_n − step·σ_n.
    Custom { s0: f64, step: f64, sigmas: Vec<f64> },
}

impl Schedule {
    pub fn sigma(&self, n: usize) -> f64 {
        match self {
            Schedule::Halving { s, k } => {
                let k = *k as usize;
                if n <= k {
                    0.0
                } else {
                    s / 2f64.powi((n - k + 1) as i32)
                }
            }
            Schedule::Thirds { s, k, l } => {
                let kl = (*k + *l) as usize;
                if n <= kl {
                    0.0
                } else {
                    s / 3f64.powi((n - kl) as i32)
                }
            }
            Schedule::Custom { sigmas, .. } => sigmas.get(n).copied().unwrap_or(0.0),
        }
    }

    pub fn s_at(&self, n: usize) -> f64 {
        let (mut s, step) = match self {
            Schedule::Halving { s, .. } => (2.0 * s, 2.0),
            Schedule::Thirds { s, .. } => (2.5 * s, 3.0),
            Schedule::Custom { s0, step, .. } => (*s0, *step),
        };
        for m in 0..n {
            s -= step * self.sigma(m);
        }
        s
    }

    pub fn base_scale(&self) -> f64 {
        match self {
            Schedule::Halving { s, .. } | Schedule::Thirds { s, .. } => *s,
            Schedule::Custom { s0, .. } => *s0,
        }
    }
}

/// Remainder bound of the plain iteration lemma: `36C (τ−s)^{-2} N²`,
/// applicable when `3N/(τ−s) ≤ 1/2`.
pub fn residual_bound(c: f64, tau: f64, s: f64, n1: f64) -> Option<f64> {
    let gap = tau - s;
    if gap <= 0.0 || 3.0 * n1 / gap > 0.5 {
        return None;
    }
    Some(36.0 * c / (gap * gap) * n1 * n1)
}

/// Remainder bound of the transversal companion lemma:
/// `6C |α|_τ (τ−s)^{-1} N`, under the same hypothesis.
pub fn residual_bound_transversal(c: f64, tau: f64, s: f64, alpha_norm: f64, n1: f64) -> Option<f64> {
    let gap = tau - s;
    if gap <= 0.0 || 3.0 * n1 / gap > 0.5 {
        return None;
    }
    Some(6.0 * c * alpha_norm / gap * n1)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Strategy {
    Kolmogorov,
    Newton,
    Picard,
    Transversal,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Kolmogorov => "kolmogorov",
            Strategy::Newton => "newton",
            Strategy::Picard => "picard",
            Strategy::Transversal => "transversal",
        }
    }
}

/// How much of the step equation a single exponential absorbs.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum StepPrecision {
    /// One homological solve per step.
    Single,
    /// The step generator is refined until the new residual order exceeds
    /// twice the entering order, realizing the full quadratic contraction of
    /// the induction (entering orders then follow 2^{n+2}−1 on order-2
    /// problems).
    Quadratic,
}

/// Lemma-compliance annotation for one step.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct LemmaRecord {
    /// 3N/σ ≤ 1/2 held, so the bounds apply.
    pub hypothesis_ok: bool,
    pub measured_a: f64,
    pub bound_a: f64,
    pub measured_b: Option<f64>,
    pub bound_b: Option<f64>,
}

/// One row of an iteration trace; `n` indexes the residual entering the step.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct StepRecord {
    pub n: usize,
    pub s_n: f64,
    pub sigma_n: f64,
    pub residual_norm: f64,
    pub u_bound: f64,
    pub residual_order: Option<u64>,
    pub t_order: Option<u64>,
    pub alpha_norm: Option<f64>,
    pub lemma: Option<LemmaRecord>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct IterationTrace {
    pub strategy: Strategy,
    pub precision: StepPrecision,
    pub schedule: Schedule,
    pub rows: Vec<StepRecord>,
    /// Empirical scaled-action constant: the largest ratio
    /// |uᵐ·a|_{s−σ} σᵐ / (3ᵐ m! N¹ᵐ) observed along the run.
    pub c_estimate: f64,
    /// m = min(1, 1/(36·C·N(j))) from the estimated C and the certified
    /// inverse bound, with the §4 variant when a transversal is present.
    pub smallness_m: f64,
    /// Whether the entry condition N¹(u_{k+1}) ≤ 2^{-3(k+2)} m (s/8)^{k+2}
    /// held; reported, not enforced.
    pub entry_condition: Option<bool>,
    pub early_stop: Option<usize>,
    pub final_residual_norm: f64,
    pub final_residual_order: Option<u64>,
    pub final_t_order: Option<u64>,
}

impl IterationTrace {
    /// The CSV layout consumed downstream:
    /// `n, s_n, sigma_n, residual_norm, u_bound, residual_order`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,s_n,sigma_n,residual_norm,u_bound,residual_order\n");
        for r in &self.rows {
            let ord = r
                .residual_order
                .map(|o| o.to_string())
                .unwrap_or_else(|| "inf".into());
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n, r.s_n, r.sigma_n, r.residual_norm, r.u_bound, ord
            ));
        }
        out
    }
}

/// Group-action data consumed by the engines.
///
/// `solve(base, r)` returns a generator with `act(u, base) ≡ r` modulo the
/// transversal (exactly, at jet level, for plain problems). `f_split`
/// separates the transversal component of a residual; plain problems return
/// it as zero.
pub trait ScaledAction<C: Coeff> {
    type Point: Clone + PartialEq + std::fmt::Debug;
    type Gen: Clone;

    fn signature(&self) -> Signature;
    fn scale(&self) -> &ScaleFamily;
    fn base(&self) -> Self::Point;

    fn point_add(&self, a: &Self::Point, b: &Self::Point) -> Self::Point;
    fn point_sub(&self, a: &Self::Point, b: &Self::Point) -> Self::Point;
    fn point_is_zero(&self, x: &Self::Point) -> bool;
    fn point_norm(&self, x: &Self::Point, s: f64) -> Result<f64, Error>;
    fn point_order(&self, x: &Self::Point) -> Option<u64>;
    fn point_slice(&self, x: &Self::Point, lo: u64, hi: u64) -> Self::Point;
    fn point_t_order(&self, _x: &Self::Point) -> Option<u64> {
        None
    }
    fn point_zero(&self) -> Self::Point;
    /// Largest coefficient magnitude, for float-dust thresholds.
    fn point_max_coeff(&self, x: &Self::Point) -> f64;

    /// Treats roundoff dust as zero in float mode; exact mode requires true
    /// zero. `reference` is a fixed magnitude scale for the whole run.
    fn point_negligible(&self, x: &Self::Point, reference: f64) -> bool {
        if self.point_is_zero(x) {
            return true;
        }
        !C::EXACT && self.point_max_coeff(x) <= 1e-13 * reference.max(f64::MIN_POSITIVE)
    }

    fn gen_add(&self, a: &Self::Gen, b: &Self::Gen) -> Self::Gen;
    fn gen_bound(&self, u: &Self::Gen, s: f64) -> Result<f64, Error>;

    fn act(&self, u: &Self::Gen, x: &Self::Point) -> Result<Self::Point, Error>;
    fn apply_exp(&self, u: &Self::Gen, negate: bool, x: &Self::Point)
        -> Result<Self::Point, Error>;

    fn solve(&self, base: &Self::Point, residual: &Self::Point) -> Result<Self::Gen, Error>;

    fn solve_rebased(&self, _at: &Self::Point, _r: &Self::Point) -> Result<Self::Gen, Error> {
        Err(Error::Unsupported(
            "re-based inverse is only available on diagonal problems",
        ))
    }
    fn supports_rebase(&self) -> bool {
        false
    }

    /// (transversal component, remainder).
    fn f_split(&self, x: &Self::Point) -> (Self::Point, Self::Point) {
        (self.point_zero(), x.clone())
    }
    fn has_transversal(&self) -> bool {
        false
    }

    /// Certified bound for the homological inverse, used only for the
    /// smallness-m annotation.
    fn inverse_bound(&self) -> f64 {
        1.0
    }
}

/// Result of a run: composed generators in application order, the trace, the
/// final residual, and the accumulated transversal component when present.
pub struct RunResult<P, G> {
    pub gens: Vec<G>,
    pub trace: IterationTrace,
    pub final_residual: P,
    pub alpha_total: Option<P>,
}

const MAX_REFINE: usize = 512;

/// Accumulates the scaled-action constant estimate: feeds the powers
/// u^m·x (norms measured at s−σ) against 3^m m! N¹(u)^m σ^{-m}.
struct ConstantProbe {
    c: f64,
}

impl ConstantProbe {
    fn new() -> Self {
        ConstantProbe { c: 0.0 }
    }

    fn feed<C: Coeff, A: ScaledAction<C>>(
        &mut self,
        p: &A,
        u: &A::Gen,
        x: &A::Point,
        n1: f64,
        s_eval: f64,
        sigma: f64,
        rel_norm: Option<f64>,
    ) -> Result<(), Error> {
        if sigma <= 0.0 || n1 <= 0.0 {
            return Ok(());
        }
        let mut power = x.clone();
        let mut fact = 1.0_f64;
        let mut coef = 1.0_f64;
        for m in 1..=24 {
            power = p.act(u, &power)?;
            if p.point_is_zero(&power) {
                break;
            }
            fact *= m as f64;
            coef *= 3.0 * n1 / sigma;
            let denom = fact * coef * rel_norm.unwrap_or(1.0);
            if denom == 0.0 || !denom.is_finite() {
                break;
            }
            let norm = p.point_norm(&power, s_eval)?;
            self.c = self.c.max(norm / denom);
        }
        Ok(())
    }
}

/// Refines a step generator until the full step residual vanishes below
/// `target` (total degree), realizing a quadratically accurate step.
fn refine_generator<C: Coeff, A: ScaledAction<C>>(
    p: &A,
    base: &A::Point,
    moved: &A::Point,
    mut u: A::Gen,
    target: u64,
    reference: f64,
) -> Result<A::Gen, Error> {
    let mut last_order: Option<u64> = None;
    for _ in 0..MAX_REFINE {
        let image = p.apply_exp(&u, true, moved)?;
        let r = p.point_sub(&image, base);
        let low = p.point_slice(&r, 0, target.saturating_sub(1));
        if p.point_negligible(&low, reference) {
            return Ok(u);
        }
        let ord = p.point_order(&low);
        if ord == last_order && ord.is_some() {
            return Err(Error::Precondition(
                "step refinement stalled; inverse does not close the residual".into(),
            ));
        }
        last_order = ord;
        let du = p.solve(base, &low)?;
        u = p.gen_add(&u, &du);
    }
    Err(Error::Precondition("step refinement exceeded iteration budget".into()))
}

fn finalize_trace<C: Coeff, A: ScaledAction<C>>(
    p: &A,
    trace: &mut IterationTrace,
    probe: &ConstantProbe,
    pending: Vec<PendingLemma>,
) {
    trace.c_estimate = probe.c;
    let nj = p.inverse_bound();
    trace.smallness_m = if p.has_transversal() {
        1.0_f64
            .min(1.0 / (36.0 * probe.c * nj))
            .min(1.0 / (8.0 * 243.0 * probe.c))
            .min(1.0 / (2.0 * nj))
    } else {
        1.0_f64.min(1.0 / (36.0 * probe.c * nj))
    };
    for pl in pending {
        if let Some(row) = trace.rows.get_mut(pl.row) {
            let hypothesis_ok = pl.sigma > 0.0 && 3.0 * pl.n1 / pl.sigma <= 0.5;
            let bound_a = 36.0 * trace.c_estimate / (pl.sigma * pl.sigma) * pl.n1 * pl.n1;
            let (measured_b, bound_b) = match pl.measured_b {
                Some(mb) => (
                    Some(mb),
                    Some(6.0 * trace.c_estimate * pl.alpha_norm / pl.sigma * pl.n1),
                ),
                None => (None, None),
            };
            row.lemma = Some(LemmaRecord {
                hypothesis_ok,
                measured_a: pl.measured_a,
                bound_a,
                measured_b,
                bound_b,
            });
        }
    }
    // Entry condition (*): compare N¹(u_{k+1}) with 2^{-3(k+2)} m (s/8)^{k+2}.
    if let Schedule::Halving { s, k } = trace.schedule {
        let idx = k as usize + 1;
        if let Some(row) = trace.rows.get(idx) {
            let kk = (k + 2) as i32;
            let rhs = 2f64.powi(-3 * kk) * trace.smallness_m * (s / 8.0).powi(kk);
            trace.entry_condition = Some(row.u_bound <= rhs);
        }
    }
}

struct PendingLemma {
    row: usize,
    sigma: f64,
    n1: f64,
    measured_a: f64,
    measured_b: Option<f64>,
    alpha_norm: f64,
}

/// Kolmogorov iteration: b_{n+1} = e^{-u_n}(a + b_n) − a, u_n from the
/// inverse at a. With `Quadratic` precision each step absorbs the residual
/// below twice its entering order.
pub fn kolmogorov_iterate<C: Coeff, A: ScaledAction<C>>(
    p: &A,
    b: &A::Point,
    steps: usize,
    schedule: Schedule,
    precision: StepPrecision,
) -> Result<RunResult<A::Point, A::Gen>, Error> {
    run_plain(p, b, steps, schedule, precision, Strategy::Kolmogorov)
}

/// Newton iteration: as Kolmogorov but the step equation is solved against
/// the current point. Refuses unless the problem supports exact re-basing.
pub fn newton_iterate<C: Coeff, A: ScaledAction<C>>(
    p: &A,
    b: &A::Point,
    steps: usize,
    schedule: Schedule,
    precision: StepPrecision,
) -> Result<RunResult<A::Point, A::Gen>, Error> {
    if !p.supports_rebase() {
        return Err(Error::Unsupported(
            "re-based inverse is only available on diagonal problems",
        ));
    }
    run_plain(p, b, steps, schedule, precision, Strategy::Newton)
}

fn run_plain<C: Coeff, A: ScaledAction<C>>(
    p: &A,
    b: &A::Point,
    steps: usize,
    schedule: Schedule,
    precision: StepPrecision,
    strategy: Strategy,
) -> Result<RunResult<A::Point, A::Gen>, Error> {
    validate_schedule(p, &schedule, steps)?;
    let a = p.base();
    let reference = p.point_max_coeff(&a).max(p.point_max_coeff(b)).max(1e-30);
    let mut b_n = b.clone();
    let mut gens = Vec::new();
    let mut trace = empty_trace(strategy, precision, schedule.clone());
    let mut probe = ConstantProbe::new();
    let mut pending = Vec::new();
    let mut early_stop = None;

    for n in 0..steps {
        let s_n = trace.schedule.s_at(n);
        let sigma_n = trace.schedule.sigma(n);
        if p.point_negligible(&b_n, reference) {
            early_stop = Some(n);
            trace.rows.push(StepRecord {
                n,
                s_n,
                sigma_n,
                residual_norm: 0.0,
                u_bound: 0.0,
                residual_order: None,
                t_order: None,
                alpha_norm: None,
                lemma: None,
            });
            break;
        }
        let moved = p.point_add(&a, &b_n);
        let u0 = match strategy {
            Strategy::Newton => p.solve_rebased(&moved, &b_n)?,
            _ => p.solve(&a, &b_n)?,
        };
        let u_n = match precision {
            StepPrecision::Single => u0,
            StepPrecision::Quadratic => {
                let ord = p.point_order(&b_n).unwrap_or(0);
                refine_generator(p, &a, &moved, u0, 2 * ord + 1, reference)?
            }
        };
        let n1 = p.gen_bound(&u_n, s_n)?;
        trace.rows.push(StepRecord {
            n,
            s_n,
            sigma_n,
            residual_norm: p.point_norm(&b_n, s_n)?,
            u_bound: n1,
            residual_order: p.point_order(&b_n),
            t_order: p.point_t_order(&b_n),
            alpha_norm: None,
            lemma: None,
        });
        let next = p.point_sub(&p.apply_exp(&u_n, true, &moved)?, &a);
        if sigma_n > 0.0 {
            let s_eval = s_n - sigma_n;
            probe.feed(p, &u_n, &a, n1, s_eval, sigma_n, None)?;
            // A-part of the remainder lemma: (e^{-u}(Id+u) − Id)·a.
            let a_plus_ua = p.point_add(&a, &p.act(&u_n, &a)?);
            let a_part = p.point_sub(&p.apply_exp(&u_n, true, &a_plus_ua)?, &a);
            pending.push(PendingLemma {
                row: n,
                sigma: sigma_n,
                n1,
                measured_a: p.point_norm(&a_part, s_eval)?,
                measured_b: None,
                alpha_norm: 0.0,
            });
        }
        gens.push(u_n);
        b_n = next;
    }

    trace.early_stop = early_stop;
    trace.final_residual_norm = p.point_norm(&b_n, trace.schedule.base_scale())?;
    let settled = p.point_negligible(&b_n, reference);
    trace.final_residual_order = if settled { None } else { p.point_order(&b_n) };
    trace.final_t_order = if settled { None } else { p.point_t_order(&b_n) };
    finalize_trace(p, &mut trace, &probe, pending);
    Ok(RunResult { gens, trace, final_residual: b_n, alpha_total: None })
}

/// Picard iteration: one group element, corrections from the frozen inverse
/// at the base, re-exponentiated each step. Linear order growth.
pub fn picard_iterate<C: Coeff, A: ScaledAction<C>>(
    p: &A,
    b: &A::Point,
    steps: usize,
    schedule: Schedule,
) -> Result<RunResult<A::Point, A::Gen>, Error> {
    validate_schedule(p, &schedule, steps)?;
    let a = p.base();
    let reference = p.point_max_coeff(&a).max(p.point_max_coeff(b)).max(1e-30);
    let moved = p.point_add(&a, b);
    let mut total: Option<A::Gen> = None;
    let mut trace = empty_trace(Strategy::Picard, StepPrecision::Single, schedule);
    let mut probe = ConstantProbe::new();
    let mut early_stop = None;
    let mut b_n = b.clone();

    for n in 0..steps {
        let s_n = trace.schedule.s_at(n);
        let sigma_n = trace.schedule.sigma(n);
        if p.point_negligible(&b_n, reference) {
            early_stop = Some(n);
            trace.rows.push(StepRecord {
                n,
                s_n,
                sigma_n,
                residual_norm: 0.0,
                u_bound: 0.0,
                residual_order: None,
                t_order: None,
                alpha_norm: None,
                lemma: None,
            });
            break;
        }
        let du = p.solve(&a, &b_n)?;
        let u = match &total {
            None => du,
            Some(t) => p.gen_add(t, &du),
        };
        let n1 = p.gen_bound(&u, s_n)?;
        trace.rows.push(StepRecord {
            n,
            s_n,
            sigma_n,
            residual_norm: p.point_norm(&b_n, s_n)?,
            u_bound: n1,
            residual_order: p.point_order(&b_n),
            t_order: p.point_t_order(&b_n),
            alpha_norm: None,
            lemma: None,
        });
        if sigma_n > 0.0 {
            probe.feed(p, &u, &a, n1, s_n - sigma_n, sigma_n, None)?;
        }
        b_n = p.point_sub(&p.apply_exp(&u, true, &moved)?, &a);
        total = Some(u);
    }

    trace.early_stop = early_stop;
    trace.final_residual_norm = p.point_norm(&b_n, trace.schedule.base_scale())?;
    let settled = p.point_negligible(&b_n, reference);
    trace.final_residual_order = if settled { None } else { p.point_order(&b_n) };
    trace.final_t_order = if settled { None } else { p.point_t_order(&b_n) };
    finalize_trace(p, &mut trace, &probe, Vec::new());
    let gens = total.into_iter().collect();
    Ok(RunResult { gens, trace, final_residual: b_n, alpha_total: None })
}

/// Transversal iteration (the moving-base variant):
/// α_n = b_n − u_n·a_n, a_{n+1} = a_n + α_n,
/// b_{n+1} = e^{-u_n}(a_n + b_n) − a_{n+1}, u_{n+1} from the inverse at the
/// shifted base. Returns the accumulated transversal component.
pub fn transversal_iterate<C: Coeff, A: ScaledAction<C>>(
    p: &A,
    b: &A::Point,
    steps: usize,
    schedule: Schedule,
) -> Result<RunResult<A::Point, A::Gen>, Error> {
    if !p.has_transversal() {
        return Err(Error::Unsupported("problem has no transversal projector"));
    }
    validate_schedule(p, &schedule, steps)?;
    let mut a_n = p.base();
    let reference = p.point_max_coeff(&a_n).max(p.point_max_coeff(b)).max(1e-30);
    let mut b_n = b.clone();
    let mut alpha_total = p.point_zero();
    let mut gens = Vec::new();
    let mut trace = empty_trace(Strategy::Transversal, StepPrecision::Single, schedule);
    let mut probe = ConstantProbe::new();
    let mut pending = Vec::new();
    let mut early_stop = None;

    for n in 0..steps {
        let s_n = trace.schedule.s_at(n);
        let sigma_n = trace.schedule.sigma(n);
        let (f_part, rest) = p.f_split(&b_n);
        if p.point_negligible(&rest, reference) {
            // Residual already inside the transversal: absorb and stop.
            alpha_total = p.point_add(&alpha_total, &f_part);
            b_n = p.point_zero();
            early_stop = Some(n);
            trace.rows.push(StepRecord {
                n,
                s_n,
                sigma_n,
                residual_norm: 0.0,
                u_bound: 0.0,
                residual_order: None,
                t_order: None,
                alpha_norm: Some(p.point_norm(&f_part, s_n)?),
                lemma: None,
            });
            break;
        }
        let u_n = p.solve(&a_n, &b_n)?;
        let alpha_n = p.point_sub(&b_n, &p.act(&u_n, &a_n)?);
        let n1 = p.gen_bound(&u_n, s_n)?;
        let alpha_norm = p.point_norm(&alpha_n, s_n)?;
        trace.rows.push(StepRecord {
            n,
            s_n,
            sigma_n,
            residual_norm: p.point_norm(&b_n, s_n)?,
            u_bound: n1,
            residual_order: p.point_order(&b_n),
            t_order: p.point_t_order(&b_n),
            alpha_norm: Some(alpha_norm),
            lemma: None,
        });
        let moved = p.point_add(&a_n, &b_n);
        let a_next = p.point_add(&a_n, &alpha_n);
        let b_next = p.point_sub(&p.apply_exp(&u_n, true, &moved)?, &a_next);
        if sigma_n > 0.0 {
            let s_eval = s_n - sigma_n;
            probe.feed(p, &u_n, &a_n, n1, s_eval, sigma_n, None)?;
            if alpha_norm > 0.0 {
                probe.feed(p, &u_n, &alpha_n, n1, s_eval, sigma_n, Some(alpha_norm))?;
            }
            let a_plus_ua = p.point_add(&a_n, &p.act(&u_n, &a_n)?);
            let a_part = p.point_sub(&p.apply_exp(&u_n, true, &a_plus_ua)?, &a_n);
            let b_part = p.point_sub(&p.apply_exp(&u_n, true, &alpha_n)?, &alpha_n);
            pending.push(PendingLemma {
                row: n,
                sigma: sigma_n,
                n1,
                measured_a: p.point_norm(&a_part, s_eval)?,
                measured_b: Some(p.point_norm(&b_part, s_eval)?),
                alpha_norm,
            });
        }
        alpha_total = p.point_add(&alpha_total, &alpha_n);
        gens.push(u_n);
        a_n = a_next;
        b_n = b_next;
    }

    trace.early_stop = early_stop;
    trace.final_residual_norm = p.point_norm(&b_n, trace.schedule.base_scale())?;
    let settled = p.point_negligible(&b_n, reference);
    trace.final_residual_order = if settled { None } else { p.point_order(&b_n) };
    trace.final_t_order = if settled { None } else { p.point_t_order(&b_n) };
    finalize_trace(p, &mut trace, &probe, pending);
    Ok(RunResult { gens, trace, final_residual: b_n, alpha_total: Some(alpha_total) })
}

fn empty_trace(strategy: Strategy, precision: StepPrecision, schedule: Schedule) -> IterationTrace {
    IterationTrace {
        strategy,
        precision,
        schedule,
        rows: Vec::new(),
        c_estimate: 0.0,
        smallness_m: 1.0,
        entry_condition: None,
        early_stop: None,
        final_residual_norm: 0.0,
        final_residual_order: None,
        final_t_order: None,
    }
}

fn validate_schedule<C: Coeff, A: ScaledAction<C>>(
    p: &A,
    schedule: &Schedule,
    steps: usize,
) -> Result<(), Error> {
    let s_max = p.scale().scale_max();
    for n in 0..=steps {
        let s = schedule.s_at(n);
        if s <= 0.0 {
            return Err(Error::Precondition(format!("schedule scale s_{n} = {s} not positive")));
        }
        if s >= s_max {
            return Err(Error::Precondition(format!(
                "schedule scale s_{n} = {s} exceeds the scale interval (0,{s_max})"
            )));
        }
    }
    Ok(())
}
