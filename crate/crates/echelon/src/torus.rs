//! Hamiltonian jets on the complexified cotangent bundle of the torus with a
//! formal deformation parameter.
//!
//! Coordinates: n multiplicative angle variables (Fourier slots, z = e^{iθ}),
//! n action variables ξ (Taylor slots) and one deformation slot t. The
//! symplectic pairing is normalized so the angular derivation z_j∂_{z_j} is
//! Fourier-diagonal with eigenvalue i_j; with this convention
//! {e_i, λ·ξ} = (λ,i)·e_i, which fixes the sign of every homological formula
//! in this module (the one place the unit convention is chosen).

use crate::coeff::Coeff;
use crate::dioph::{min_small_divisor, DiophantineCert, Frequency};
use crate::error::Error;
use crate::index::{MultiIndex, Signature};
use crate::iterate::{transversal_iterate, IterationTrace, ScaledAction, Schedule};
use crate::scale::ScaleFamily;
use crate::series::TruncatedSeries;
use num_complex::Complex64;

/// A truncated Hamiltonian with separate caps per variable group.
#[derive(Clone, PartialEq, Debug)]
pub struct Hamiltonian<C: Coeff> {
    pub series: TruncatedSeries<C>,
    pub angles: usize,
    pub fourier_cap: u64,
    pub xi_cap: u64,
    pub t_cap: u64,
}

impl<C: Coeff> Hamiltonian<C> {
    pub fn signature(angles: usize) -> Signature {
        Signature::new(angles, angles + 1)
    }

    pub fn total_cap(fourier_cap: u64, xi_cap: u64, t_cap: u64) -> u64 {
        fourier_cap + xi_cap + t_cap
    }

    pub fn zero(angles: usize, fourier_cap: u64, xi_cap: u64, t_cap: u64) -> Self {
        let sig = Self::signature(angles);
        let cap = Self::total_cap(fourier_cap, xi_cap, t_cap);
        Hamiltonian {
            series: TruncatedSeries::zero(sig, cap),
            angles,
            fourier_cap,
            xi_cap,
            t_cap,
        }
    }

    pub fn from_series(
        series: TruncatedSeries<C>,
        fourier_cap: u64,
        xi_cap: u64,
        t_cap: u64,
    ) -> Result<Self, Error> {
        let sig = series.signature();
        if sig.taylor != sig.fourier + 1 {
            return Err(Error::Precondition(
                "hamiltonian signature must be (n angles, n actions, 1 deformation slot)".into(),
            ));
        }
        let mut h = Hamiltonian {
            series,
            angles: sig.fourier,
            fourier_cap,
            xi_cap,
            t_cap,
        };
        h.series = h.truncated(&h.series);
        Ok(h)
    }

    fn sig(&self) -> Signature {
        Self::signature(self.angles)
    }

    pub fn t_axis(&self) -> usize {
        2 * self.angles
    }

    pub fn xi_degree(&self, idx: &MultiIndex) -> u64 {
        idx.0[self.angles..2 * self.angles]
            .iter()
            .map(|&e| e as u64)
            .sum()
    }

    pub fn t_degree(&self, idx: &MultiIndex) -> u64 {
        idx.0[self.t_axis()] as u64
    }

    /// Enforces the per-group caps.
    fn truncated(&self, s: &TruncatedSeries<C>) -> TruncatedSeries<C> {
        let sig = self.sig();
        s.filter(|idx| {
            idx.fourier_sigma(sig) <= self.fourier_cap
                && self.xi_degree(idx) <= self.xi_cap
                && self.t_degree(idx) <= self.t_cap
        })
    }

    fn wrap(&self, s: TruncatedSeries<C>) -> Self {
        Hamiltonian { series: self.truncated(&s), ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.series.is_zero()
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        Ok(self.wrap(self.series.add(&other.series)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        Ok(self.wrap(self.series.sub(&other.series)?))
    }

    pub fn neg(&self) -> Self {
        self.wrap(self.series.neg())
    }

    pub fn scale_by(&self, k: &C) -> Self {
        self.wrap(self.series.scale(k))
    }

    /// {f, h} = Σ_j (D_{θ_j} f · ∂_{ξ_j} h − ∂_{ξ_j} f · D_{θ_j} h) with
    /// D_{θ_j} the angular derivation on Fourier slot j. The deformation slot
    /// is inert, so the bracket is t-linear.
    pub fn poisson(&self, other: &Self) -> Result<Self, Error> {
        let n = self.angles;
        let mut out = TruncatedSeries::zero(self.sig(), self.series.cap());
        for j in 0..n {
            let df_theta = self.series.derive(j);
            let dh_xi = other.series.derive(n + j);
            let df_xi = self.series.derive(n + j);
            let dh_theta = other.series.derive(j);
            out = out.add(&df_theta.mul(&dh_xi)?)?;
            out = out.sub(&df_xi.mul(&dh_theta)?)?;
        }
        Ok(self.wrap(out))
    }

    /// Projection onto the angle-independent part (Fourier mode 0).
    pub fn average(&self) -> Self {
        let sig = self.sig();
        self.wrap(self.series.filter(|idx| idx.fourier_is_zero(sig)))
    }

    /// Multiplication by the deformation parameter.
    pub fn mul_t(&self) -> Self {
        self.wrap(self.series.shift_up(self.t_axis()))
    }

    /// Minimal t-degree of a nonzero coefficient; `None` for zero.
    pub fn t_order(&self) -> Option<u64> {
        self.series.axis_order(self.t_axis(), crate::series::ZERO_TOL_REL)
    }

    /// Keeps terms with ξ-degree in [lo, hi].
    pub fn xi_slice(&self, lo: u64, hi: u64) -> Self {
        self.wrap(self.series.filter(|idx| {
            let d = self.xi_degree(idx);
            d >= lo && d <= hi
        }))
    }

    /// Keeps terms whose Fourier part vanishes (or does not).
    pub fn fourier_zero_part(&self, keep_zero: bool) -> Self {
        let sig = self.sig();
        self.wrap(self.series.filter(|idx| idx.fourier_is_zero(sig) == keep_zero))
    }

    /// Real-analytic symmetry: coefficients at opposite Fourier indices are
    /// conjugate. Returns the largest violation.
    pub fn reality_defect(&self) -> f64 {
        let n = self.angles;
        let mut worst = 0.0_f64;
        for (idx, c) in self.series.terms() {
            let mut mirror = idx.clone();
            for k in 0..n {
                mirror.0[k] = -mirror.0[k];
            }
            let other = self.series.coeff(&mirror);
            let d = (c.to_c64() - other.to_c64().conj()).norm();
            worst = worst.max(d);
        }
        worst
    }

    /// Hadamard division by the small divisors: the Fourier-i coefficient is
    /// divided by (λ,i); the mean slot is annihilated.
    pub fn star_divisor_inverse(&self, lambda: &[C]) -> Self {
        let sig = self.sig();
        let n = self.angles;
        self.wrap(self.series.map_diag(|idx| {
            if idx.fourier_is_zero(sig) {
                return C::zero();
            }
            let mut d = C::zero();
            for k in 0..n {
                d = d + lambda[k].clone() * C::from_int(idx.0[k]);
            }
            C::one() / d
        }))
    }
}

/// Frequency and ξ-Hessian determinant of an averaged Hamiltonian:
/// H₀ = λ·ξ + Σ a_ij ξ_i ξ_j mod (I³ + t·…); the stored coefficient of
/// ξ_i ξ_j (i≠j) is a_ij + a_ji, so the symmetric matrix uses half of it.
pub fn isochronic_check<C: Coeff>(h0: &Hamiltonian<C>) -> (Frequency, Complex64) {
    let n = h0.angles;
    let sig = h0.sig();
    let mut lambda = vec![Complex64::new(0.0, 0.0); n];
    let mut a = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (idx, c) in h0.series.terms() {
        if !idx.fourier_is_zero(sig) || h0.t_degree(idx) != 0 {
            continue;
        }
        let xi: Vec<u64> = idx.0[n..2 * n].iter().map(|&e| e as u64).collect();
        let total: u64 = xi.iter().sum();
        if total == 1 {
            let j = xi.iter().position(|&e| e == 1).unwrap();
            lambda[j] = c.to_c64();
        } else if total == 2 {
            let support: Vec<usize> = (0..n).filter(|&k| xi[k] > 0).collect();
            match support.as_slice() {
                [i] => a[*i][*i] = c.to_c64(),
                [i, j] => {
                    let half = c.to_c64() * 0.5;
                    a[*i][*j] = half;
                    a[*j][*i] = half;
                }
                _ => unreachable!(),
            }
        }
    }
    (Frequency(lambda), complex_det(&a))
}

fn complex_det(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = match (col..n).max_by(|&x, &y| {
            a[x][col].norm().partial_cmp(&a[y][col].norm()).unwrap()
        }) {
            Some(p) if a[p][col].norm() > 0.0 => p,
            _ => return Complex64::new(0.0, 0.0),
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        det *= a[col][col];
        let p = a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / p;
            for j in col..n {
                let sub = f * a[col][j];
                a[r][j] -= sub;
            }
        }
    }
    det
}

/// The correction solving {h, λ·ξ + α} ≡ m + n modulo I² and the
/// transversal: first slot m⋆g, second slot (n − {m⋆g, α})⋆g.
pub fn homological_correction<C: Coeff>(
    lambda: &[C],
    alpha_i2: &Hamiltonian<C>,
    m_part: &Hamiltonian<C>,
    n_part: &Hamiltonian<C>,
) -> Result<Hamiltonian<C>, Error> {
    let first = m_part.star_divisor_inverse(lambda);
    let cross = first.poisson(alpha_i2)?.xi_slice(1, 1);
    let second = n_part.sub(&cross)?.star_divisor_inverse(lambda);
    first.add(&second)
}

/// The torus problem: base point λ·ξ, Poisson action, transversal
/// F = I² ⊕ ℂ{t} (angle-free action-free terms and everything of ξ-degree
/// at least two).
pub struct TorusKam<C: Coeff> {
    lambda: Vec<C>,
    base: Hamiltonian<C>,
    scale: ScaleFamily,
    pub cert: DiophantineCert,
    drift_tol: f64,
}

impl<C: Coeff> TorusKam<C> {
    pub fn new(
        lambda: Vec<C>,
        fourier_cap: u64,
        xi_cap: u64,
        t_cap: u64,
        tau: u32,
        scale_max: f64,
    ) -> Result<Self, Error> {
        let n = lambda.len();
        let lambda_f = Frequency(lambda.iter().map(|l| l.to_c64()).collect());
        let cert = min_small_divisor(&lambda_f, tau, fourier_cap.max(1));
        if !cert.pass {
            return Err(Error::Resonance { witness: cert.witness.clone(), value: 0.0 });
        }
        let mut base = Hamiltonian::zero(n, fourier_cap, xi_cap.max(2), t_cap);
        let sig = base.sig();
        for (j, l) in lambda.iter().enumerate() {
            base.series.set(MultiIndex::unit(sig, n + j), l.clone());
        }
        // Mixed scale: strip weights on angles, s per ξ-degree, s² per
        // t-degree (the deformation axiom holds by construction).
        let mut exps = vec![1u32; n + 1];
        exps[n] = 2;
        let scale = ScaleFamily::mixed(scale_max, exps);
        Ok(TorusKam { lambda, base, scale, cert, drift_tol: 1e-12 })
    }

    pub fn base_hamiltonian(&self) -> &Hamiltonian<C> {
        &self.base
    }

    fn drift_part(&self, x: &Hamiltonian<C>) -> Hamiltonian<C> {
        x.fourier_zero_part(true).xi_slice(1, 1)
    }
}

impl<C: Coeff> ScaledAction<C> for TorusKam<C> {
    type Point = Hamiltonian<C>;
    type Gen = Hamiltonian<C>;

    fn signature(&self) -> Signature {
        self.base.sig()
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
        self.scale.norm_at(&x.series, s)
    }

    fn point_order(&self, x: &Self::Point) -> Option<u64> {
        x.series.filtration_order()
    }

    fn point_t_order(&self, x: &Self::Point) -> Option<u64> {
        x.t_order()
    }

    fn point_slice(&self, x: &Self::Point, lo: u64, hi: u64) -> Self::Point {
        Hamiltonian { series: x.series.degree_slice(lo, hi), ..x.clone() }
    }

    fn point_max_coeff(&self, x: &Self::Point) -> f64 {
        x.series.max_coeff()
    }

    fn point_zero(&self) -> Self::Point {
        Hamiltonian {
            series: TruncatedSeries::zero(self.base.sig(), self.base.series.cap()),
            ..self.base.clone()
        }
    }

    fn gen_add(&self, a: &Self::Gen, b: &Self::Gen) -> Self::Gen {
        a.add(b).expect("matching signatures")
    }

    /// Certified 1-bound of {h, ·}: Σ_j |D_{θ_j}h|_s + |∂_{ξ_j}h|_s.
    fn gen_bound(&self, u: &Self::Gen, s: f64) -> Result<f64, Error> {
        let n = u.angles;
        let mut total = 0.0;
        for j in 0..n {
            total += self.scale.norm_at(&u.series.derive(j), s)?;
            total += self.scale.norm_at(&u.series.derive(n + j), s)?;
        }
        Ok(total)
    }

    fn act(&self, u: &Self::Gen, x: &Self::Point) -> Result<Self::Point, Error> {
        u.poisson(x)
    }

    fn apply_exp(
        &self,
        u: &Self::Gen,
        negate: bool,
        x: &Self::Point,
    ) -> Result<Self::Point, Error> {
        let budget = 4 * (x.series.cap() + 2);
        let mut acc = x.clone();
        let mut term = x.clone();
        for k in 1..=budget {
            term = u.poisson(&term)?;
            if negate {
                term = term.neg();
            }
            term = term.scale_by(&C::inv_int(k as i64));
            if term.is_zero() {
                return Ok(acc);
            }
            acc = acc.add(&term)?;
            if !C::EXACT
                && term.series.max_coeff() <= 1e-17 * acc.series.max_coeff().max(1.0)
            {
                return Ok(acc);
            }
        }
        Err(Error::NotExponentiable { bound: u.series.max_coeff(), s: 0.0 })
    }

    /// Two-slot homological inverse modulo I² at the shifted base; errors on
    /// angle-free action-linear residuals (frequency drift), which are
    /// neither correctable nor inside the transversal.
    fn solve(&self, base: &Self::Point, r: &Self::Point) -> Result<Self::Gen, Error> {
        let drift = self.drift_part(r);
        if !drift.is_zero() {
            let floor = if C::EXACT { 0.0 } else { self.drift_tol * r.series.max_coeff() };
            if let Some((idx, c)) = drift
                .series
                .terms()
                .find(|(_, c)| c.magnitude() > floor)
                .map(|(i, c)| (i.clone(), c.magnitude()))
            {
                return Err(Error::FrequencyDrift { witness: idx, value: c });
            }
        }
        let correctable = r.fourier_zero_part(false);
        let m_part = correctable.xi_slice(0, 0);
        let n_part = correctable.xi_slice(1, 1);
        let alpha_i2 = base.xi_slice(2, u64::MAX);
        homological_correction(&self.lambda, &alpha_i2, &m_part, &n_part)
    }

    /// F = ℂ{t} ⊕ I²: angle-free ξ-degree-0 terms plus everything of
    /// ξ-degree ≥ 2.
    fn f_split(&self, x: &Self::Point) -> (Self::Point, Self::Point) {
        let sig = self.base.sig();
        let f = x.wrap(x.series.filter(|idx| {
            let xd = x.xi_degree(idx);
            (idx.fourier_is_zero(sig) && xd == 0) || xd >= 2
        }));
        let rest = x.sub(&f).expect("matching signatures");
        (f, rest)
    }

    fn has_transversal(&self) -> bool {
        true
    }

    fn inverse_bound(&self) -> f64 {
        let t = self.cert.tau as f64;
        let factor = if self.cert.tau == 0 {
            1.0
        } else {
            (t / std::f64::consts::E).powf(t)
        };
        factor / self.cert.c
    }
}

/// Result of a torus KAM run.
pub struct KamResult<C: Coeff> {
    pub gens: Vec<Hamiltonian<C>>,
    pub alpha_total: Hamiltonian<C>,
    pub trace: IterationTrace,
    pub residual: Hamiltonian<C>,
    pub base: Hamiltonian<C>,
    /// Images of the coordinate monomials (z_1…z_n, ξ_1…ξ_n, t) under the
    /// composed transformation.
    pub transform: Vec<TruncatedSeries<C>>,
}

/// Runs the transversal iteration on H = λ·ξ + tR. The frequency is read off
/// the angle-free action-linear t⁰ part; any t-dependence there is rejected
/// as frequency drift.
pub fn kam_transversal_step<C: Coeff>(
    h: &Hamiltonian<C>,
    tau: u32,
    steps: usize,
    schedule: Schedule,
    scale_max: f64,
) -> Result<KamResult<C>, Error> {
    let n = h.angles;
    let sig = h.sig();
    let mut lambda = vec![C::zero(); n];
    for j in 0..n {
        lambda[j] = h.series.coeff(&MultiIndex::unit(sig, n + j));
    }
    if lambda.iter().all(|l| l.is_zero()) {
        return Err(Error::Precondition("angle-free action-linear part vanishes".into()));
    }
    let problem = TorusKam::new(lambda, h.fourier_cap, h.xi_cap, h.t_cap, tau, scale_max)?;
    let b = h.sub(problem.base_hamiltonian())?;
    if b.t_order().map_or(false, |o| o < 1) {
        return Err(Error::Precondition(
            "perturbation must vanish at t = 0 (H = λ·ξ + tR)".into(),
        ));
    }
    let run = transversal_iterate(&problem, &b, steps, schedule)?;
    let transform = transform_images(&problem, &run.gens)?;
    Ok(KamResult {
        alpha_total: run.alpha_total.expect("transversal run returns alpha"),
        gens: run.gens,
        trace: run.trace,
        residual: run.final_residual,
        base: problem.base_hamiltonian().clone(),
        transform,
    })
}

fn transform_images<C: Coeff>(
    problem: &TorusKam<C>,
    gens: &[Hamiltonian<C>],
) -> Result<Vec<TruncatedSeries<C>>, Error> {
    let base = problem.base_hamiltonian();
    let sig = base.sig();
    let mut images = Vec::new();
    for axis in 0..sig.len() {
        let mono =
            TruncatedSeries::monomial(sig, base.series.cap(), MultiIndex::unit(sig, axis), C::one());
        let mut img = Hamiltonian { series: mono, ..base.clone() };
        for u in gens {
            img = problem.apply_exp(u, true, &img)?;
        }
        images.push(img.series);
    }
    Ok(images)
}

#[cfg(test)]
mod tests {
    use super::*;

    type H = Hamiltonian<Complex64>;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ham1(fc: u64, xc: u64, tc: u64) -> H {
        Hamiltonian::zero(1, fc, xc, tc)
    }

    #[test]
    fn bracket_eigenfunction_property() {
        // {e_i, λ·ξ} = (λ,i) e_i with the chosen unit convention.
        let mut f = ham1(4, 2, 2);
        f.series.set(MultiIndex::new(vec![0, 1, 0]), c(1.5)); // 1.5 ξ
        let mut e2 = ham1(4, 2, 2);
        e2.series.set(MultiIndex::new(vec![2, 0, 0]), c(1.0));
        let br = e2.poisson(&f).unwrap();
        assert_eq!(br.series.coeff(&MultiIndex::new(vec![2, 0, 0])), c(3.0));
    }

    #[test]
    fn bracket_antisymmetry_and_xi_kernel() {
        let mut f = ham1(3, 2, 1);
        f.series.set(MultiIndex::new(vec![1, 1, 0]), c(0.7));
        f.series.set(MultiIndex::new(vec![-2, 0, 1]), c(0.3));
        let mut h = ham1(3, 2, 1);
        h.series.set(MultiIndex::new(vec![2, 0, 0]), c(1.1));
        h.series.set(MultiIndex::new(vec![0, 1, 0]), c(-0.4));
        let a = f.poisson(&h).unwrap();
        let b = h.poisson(&f).unwrap();
        assert_eq!(a.series, b.neg().series);
        // {ξ, anything independent of the angle} = 0
        let mut xi = ham1(3, 2, 1);
        xi.series.set(MultiIndex::new(vec![0, 1, 0]), c(1.0));
        let mut g = ham1(3, 2, 1);
        g.series.set(MultiIndex::new(vec![0, 2, 1]), c(2.0));
        assert!(xi.poisson(&g).unwrap().is_zero());
    }

    #[test]
    fn average_is_projector() {
        let mut f = ham1(4, 2, 1);
        f.series.set(MultiIndex::new(vec![0, 1, 0]), c(1.0));
        f.series.set(MultiIndex::new(vec![1, 0, 0]), c(0.5));
        let avg = f.average();
        assert_eq!(avg.series.coeff(&MultiIndex::new(vec![0, 1, 0])), c(1.0));
        assert_eq!(avg.series.coeff(&MultiIndex::new(vec![1, 0, 0])), c(0.0));
        assert_eq!(avg.average().series, avg.series);
        // averaging commutes with t-multiplication
        assert_eq!(f.mul_t().average().series, f.average().mul_t().series);
    }

    #[test]
    fn deformation_axiom_exact() {
        // Mixed scale with t-exponent 2: |t f|_s = s² |f|_s exactly.
        let mut f = ham1(3, 2, 3);
        f.series.set(MultiIndex::new(vec![2, 1, 1]), c(0.8));
        f.series.set(MultiIndex::new(vec![0, 0, 0]), c(1.0));
        let exps = vec![1, 2];
        let scale = ScaleFamily::mixed(1.0, exps);
        let s = 0.6;
        let a = scale.norm_at(&f.series, s).unwrap();
        let b = scale.norm_at(&f.mul_t().series, s).unwrap();
        assert!((b - s * s * a).abs() < 1e-13 * a);
    }

    #[test]
    fn isochronic_determinant() {
        // H0 = λ·ξ + ½Σξ_i²: a_ii = 1/2, det = 2^{-n}.
        let n = 2;
        let mut h = Hamiltonian::<Complex64>::zero(n, 2, 2, 1);
        let sig = h.sig();
        h.series.set(MultiIndex::unit(sig, n), c(1.0));
        h.series.set(MultiIndex::unit(sig, n + 1), c(0.5));
        h.series.set(MultiIndex::new(vec![0, 0, 2, 0, 0]), c(0.5));
        h.series.set(MultiIndex::new(vec![0, 0, 0, 2, 0]), c(0.5));
        let (freq, det) = isochronic_check(&h);
        assert_eq!(freq.0[0], c(1.0));
        assert_eq!(freq.0[1], c(0.5));
        assert!((det - c(0.25)).norm() < 1e-15);
        // no quadratic part → degenerate
        let mut lin = Hamiltonian::<Complex64>::zero(n, 2, 2, 1);
        lin.series.set(MultiIndex::unit(sig, n), c(1.0));
        let (_, det0) = isochronic_check(&lin);
        assert_eq!(det0, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn homological_inverse_bracket_back() {
        // residual = pure mode e_{(1,0)}, α = 0, λ = (1,φ):
        // h = e_{(1,0)}/(λ,(1,0)) = e_{(1,0)} and {h, λ·ξ} = residual.
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let n = 2;
        let problem =
            TorusKam::<Complex64>::new(vec![c(1.0), c(phi)], 6, 2, 4, 1, 4.0).unwrap();
        let mut r = Hamiltonian::zero(n, 6, 2, 4);
        r.series.set(MultiIndex::new(vec![1, 0, 0, 0, 0]), c(1.0));
        let h = problem.solve(&problem.base(), &r).unwrap();
        assert_eq!(h.series.coeff(&MultiIndex::new(vec![1, 0, 0, 0, 0])), c(1.0));
        let back = h.poisson(problem.base_hamiltonian()).unwrap();
        assert!((back.series.coeff(&MultiIndex::new(vec![1, 0, 0, 0, 0])) - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn second_slot_correction_mod_i2() {
        // α ≠ 0: the n-part picks up the −{m⋆g, α}⋆g term and the
        // bracket-back identity holds modulo I².
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let n = 2;
        let problem =
            TorusKam::<Complex64>::new(vec![c(1.0), c(phi)], 6, 3, 4, 1, 4.0).unwrap();
        let mut alpha = problem.point_zero();
        alpha.series.set(MultiIndex::new(vec![0, 0, 2, 0, 0]), c(0.3));
        let base = problem.point_add(&problem.base(), &alpha);
        let mut r = problem.point_zero();
        r.series.set(MultiIndex::new(vec![1, 0, 0, 0, 0]), c(1.0));
        r.series.set(MultiIndex::new(vec![1, -1, 0, 1, 0]), c(0.5));
        let h = problem.solve(&base, &r).unwrap();
        let back = h.poisson(&base).unwrap().xi_slice(0, 1);
        let defect = back.sub(&r).unwrap();
        assert!(
            defect.series.max_coeff() < 1e-13,
            "defect {:e}",
            defect.series.max_coeff()
        );
    }

    #[test]
    fn drift_is_rejected() {
        let problem = TorusKam::<Complex64>::new(vec![c(1.0)], 4, 2, 4, 1, 4.0).unwrap();
        let mut r = problem.point_zero();
        r.series.set(MultiIndex::new(vec![0, 1, 1]), c(0.1)); // t·ξ drift
        match problem.solve(&problem.base(), &r) {
            Err(Error::FrequencyDrift { .. }) => {}
            other => panic!("expected drift rejection, got {other:?}"),
        }
    }
}
