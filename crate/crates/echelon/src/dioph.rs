//! Diophantine arithmetic: σ-norms, (C,τ)-certificates by exhaustive lattice
//! scan, Siegel divisor tables with resonance detection, and the small-divisor
//! inverse series used by Hadamard multipliers.
//!
//! Certificates are cutoff-bounded: a finite scan cannot decide true
//! diophantine-ness, but the iteration engines only consume divisors up to
//! their jet order, so a cutoff equal to the order cap certifies every
//! constant actually used.

use crate::error::Error;
use crate::index::{enumerate_fourier, enumerate_taylor, MultiIndex, Signature};
use crate::series::TruncatedSeries;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A frequency vector λ ∈ ℂⁿ (real vectors use zero imaginary parts).
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Frequency(pub Vec<Complex64>);

impl Frequency {
    pub fn real(entries: &[f64]) -> Self {
        Frequency(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// (λ, i) = Σ λ_k i_k.
    pub fn dot(&self, i: &[i64]) -> Complex64 {
        self.0
            .iter()
            .zip(i)
            .map(|(l, &e)| l * e as f64)
            .sum()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Frequency(self.0.iter().map(|l| l * c).collect())
    }
}

/// σ(i) = Σ|i_k|.
pub fn sigma(i: &[i64]) -> u64 {
    i.iter().map(|e| e.unsigned_abs()).sum()
}

/// Cutoff-bounded (C,τ) certificate.
///
/// `c` is the minimum of |(λ,i)|·σ(i)^τ over scanned indices with a nonzero
/// divisor; `pass` is false exactly when some scanned divisor vanishes
/// (resonance). On pass the witness attains the minimum; on fail it is the
/// smallest-σ resonant index. Witnesses are sign-normalized so the first
/// nonzero entry is positive ((λ,i) and (λ,−i) carry the same information).
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct DiophantineCert {
    pub c: f64,
    pub tau: u32,
    pub cutoff: u64,
    pub witness: MultiIndex,
    pub divisor_at_witness: f64,
    pub pass: bool,
}

fn canonical_sign(mut i: Vec<i64>) -> Vec<i64> {
    if let Some(first) = i.iter().find(|&&e| e != 0) {
        if *first < 0 {
            for e in &mut i {
                *e = -*e;
            }
        }
    }
    i
}

/// Exhaustive scan of 0 < σ(i) ≤ cutoff minimizing |(λ,i)|·σ(i)^τ.
pub fn min_small_divisor(lambda: &Frequency, tau: u32, cutoff: u64) -> DiophantineCert {
    assert!(cutoff >= 1, "cutoff must be at least 1");
    assert!(lambda.0.iter().any(|l| l.norm() != 0.0), "frequency must not vanish");
    let n = lambda.dim();
    let mut best: Option<(f64, Vec<i64>, f64)> = None;
    let mut resonant: Option<Vec<i64>> = None;
    for i in enumerate_fourier(n, cutoff) {
        let d = lambda.dot(&i).norm();
        if d == 0.0 {
            let cand = canonical_sign(i);
            let better = resonant
                .as_ref()
                .map_or(true, |r| (sigma(&cand), cand.clone()) < (sigma(r), r.clone()));
            if better {
                resonant = Some(cand);
            }
            continue;
        }
        let value = d * (sigma(&i) as f64).powi(tau as i32);
        if best.as_ref().map_or(true, |(v, _, _)| value < *v) {
            best = Some((value, canonical_sign(i), d));
        }
    }
    let (c, min_witness, div_min) =
        best.map_or((f64::INFINITY, vec![0; n], f64::INFINITY), |(v, w, d)| (v, w, d));
    match resonant {
        Some(w) => DiophantineCert {
            c,
            tau,
            cutoff,
            witness: MultiIndex::new(w),
            divisor_at_witness: 0.0,
            pass: false,
        },
        None => DiophantineCert {
            c,
            tau,
            cutoff,
            witness: MultiIndex::new(min_witness),
            divisor_at_witness: div_min,
            pass: true,
        },
    }
}

/// Exact-rational certificate for real rational frequencies.
#[derive(Clone, PartialEq, Debug)]
pub struct ExactDiophantineCert {
    pub c: BigRational,
    pub tau: u32,
    pub cutoff: u64,
    pub witness: MultiIndex,
    pub divisor_at_witness: BigRational,
    pub pass: bool,
}

pub fn min_small_divisor_exact(
    lambda: &[BigRational],
    tau: u32,
    cutoff: u64,
) -> ExactDiophantineCert {
    assert!(cutoff >= 1, "cutoff must be at least 1");
    assert!(lambda.iter().any(|l| !l.is_zero()), "frequency must not vanish");
    let n = lambda.len();
    let mut best: Option<(BigRational, Vec<i64>, BigRational)> = None;
    let mut resonant: Option<Vec<i64>> = None;
    for i in enumerate_fourier(n, cutoff) {
        let d: BigRational = lambda
            .iter()
            .zip(&i)
            .map(|(l, &e)| l * BigRational::from_integer(e.into()))
            .sum::<BigRational>()
            .abs();
        if d.is_zero() {
            let cand = canonical_sign(i);
            let better = resonant
                .as_ref()
                .map_or(true, |r| (sigma(&cand), cand.clone()) < (sigma(r), r.clone()));
            if better {
                resonant = Some(cand);
            }
            continue;
        }
        let mut value = d.clone();
        let sig = BigRational::from_integer((sigma(&i) as i64).into());
        for _ in 0..tau {
            value *= sig.clone();
        }
        if best.as_ref().map_or(true, |(v, _, _)| value < *v) {
            best = Some((value, canonical_sign(i), d));
        }
    }
    let (c, min_witness, div_min) = best
        .map(|(v, w, d)| (v, w, d))
        .unwrap_or_else(|| (BigRational::zero(), vec![0; n], BigRational::zero()));
    match resonant {
        Some(w) => ExactDiophantineCert {
            c,
            tau,
            cutoff,
            witness: MultiIndex::new(w),
            divisor_at_witness: BigRational::zero(),
            pass: false,
        },
        None => ExactDiophantineCert {
            c,
            tau,
            cutoff,
            witness: MultiIndex::new(min_witness),
            divisor_at_witness: div_min,
            pass: true,
        },
    }
}

impl ExactDiophantineCert {
    pub fn to_float(&self) -> DiophantineCert {
        DiophantineCert {
            c: self.c.to_f64().unwrap_or(f64::NAN),
            tau: self.tau,
            cutoff: self.cutoff,
            witness: self.witness.clone(),
            divisor_at_witness: self.divisor_at_witness.to_f64().unwrap_or(f64::NAN),
            pass: self.pass,
        }
    }
}

/// One entry of the Siegel divisor table: the quantity (j,λ) − λ_i indexed by
/// a Taylor exponent j with σ(j) ≥ 2 and a component index i.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SiegelDivisor {
    pub j: Vec<i64>,
    pub component: usize,
    pub value_re: f64,
    pub value_im: f64,
    pub magnitude: f64,
    pub resonant: bool,
}

/// Default resonance tolerance: 1e-12 relative to the largest |λ_k|.
pub fn default_res_tol(lambda: &Frequency) -> f64 {
    1e-12 * lambda.0.iter().map(|l| l.norm()).fold(0.0_f64, f64::max)
}

/// All divisors (j,λ) − λ_i with 2 ≤ σ(j) ≤ cutoff, flagged when their
/// magnitude falls below `res_tol`.
pub fn siegel_divisors(lambda: &Frequency, cutoff: u64, res_tol: f64) -> Vec<SiegelDivisor> {
    let n = lambda.dim();
    let mut rows = Vec::new();
    for j in enumerate_taylor(n, 2, cutoff) {
        let jl = lambda.dot(&j);
        for (component, li) in lambda.0.iter().enumerate() {
            let v = jl - li;
            let magnitude = v.norm();
            rows.push(SiegelDivisor {
                j: j.clone(),
                component,
                value_re: v.re,
                value_im: v.im,
                magnitude,
                resonant: magnitude <= res_tol,
            });
        }
    }
    rows
}

/// The function g = Σ_{0<σ(i)≤cutoff} (λ,i)^{-1} e_i on the Fourier lattice.
/// The mean slot is excluded by construction. Errors on resonance with the
/// witness index.
pub fn small_divisor_series(lambda: &Frequency, cutoff: u64) -> Result<TruncatedSeries<Complex64>, Error> {
    let n = lambda.dim();
    let sig = Signature::fourier(n);
    let mut g = TruncatedSeries::zero(sig, cutoff);
    for i in enumerate_fourier(n, cutoff) {
        let d = lambda.dot(&i);
        if d.norm() == 0.0 {
            return Err(Error::Resonance { witness: MultiIndex::new(i), value: 0.0 });
        }
        g.set(MultiIndex::new(i), d.inv());
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn sigma_definition() {
        assert_eq!(sigma(&[1, -2, 3]), 6);
        assert_eq!(sigma(&[0, 0, 0]), 0);
        assert_eq!(sigma(&[5, 0]), 5);
    }

    #[test]
    fn resonant_pair_fails_with_witness() {
        let cert = min_small_divisor(&Frequency::real(&[1.0, 1.0]), 1, 5);
        assert!(!cert.pass);
        assert_eq!(cert.witness.0, vec![1, -1]);
        assert_eq!(cert.divisor_at_witness, 0.0);
    }

    #[test]
    fn integer_lattice_tau_zero() {
        // (1,2) resonates at (2,−1); the best constant over nonzero divisors
        // is still reported and equals 1 on the integer lattice.
        let cert = min_small_divisor(&Frequency::real(&[1.0, 2.0]), 0, 10);
        assert!(!cert.pass);
        assert_eq!(cert.c, 1.0);
        assert_eq!(cert.witness.0, vec![2, -1]);
    }

    #[test]
    fn exact_matches_float_on_rationals() {
        let lam = [rat(1, 1), rat(22, 7)];
        let exact = min_small_divisor_exact(&lam, 1, 12);
        let float = min_small_divisor(&Frequency::real(&[1.0, 22.0 / 7.0]), 1, 12);
        assert!(exact.pass && float.pass);
        assert!((exact.to_float().c - float.c).abs() < 1e-12);
        assert_eq!(exact.witness, float.witness);
    }

    #[test]
    fn siegel_table_detects_resonance() {
        // λ=(1,−1): j=(2,1), i=0 gives (j,λ)−λ_0 = 2−1−1 = 0.
        let lam = Frequency::real(&[1.0, -1.0]);
        let rows = siegel_divisors(&lam, 3, default_res_tol(&lam));
        let hit = rows
            .iter()
            .find(|r| r.j == vec![2, 1] && r.component == 0)
            .unwrap();
        assert!(hit.resonant);
        let ok = rows
            .iter()
            .find(|r| r.j == vec![1, 1] && r.component == 0)
            .unwrap();
        assert!(!ok.resonant && (ok.magnitude - 1.0).abs() < 1e-15);
    }

    #[test]
    fn poincare_domain_one_dim_never_resonant() {
        let lam = Frequency::real(&[1.0]);
        let rows = siegel_divisors(&lam, 9, default_res_tol(&lam));
        assert!(rows.iter().all(|r| !r.resonant));
        // divisors are j−1 for j ≥ 2
        for r in &rows {
            assert!((r.value_re - (r.j[0] as f64 - 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn divisor_series_values() {
        // λ=(1,√2): coefficient at (1,−1) is 1/(1−√2) ≈ −2.41421356.
        let lam = Frequency::real(&[1.0, 2.0_f64.sqrt()]);
        let g = small_divisor_series(&lam, 4).unwrap();
        let c = g.coeff(&MultiIndex::new(vec![1, -1]));
        assert!((c.re - 1.0 / (1.0 - 2.0_f64.sqrt())).abs() < 1e-12);
        assert_eq!(g.coeff(&MultiIndex::new(vec![0, 0])), Complex64::new(0.0, 0.0));
        assert_eq!(g.coeff(&MultiIndex::new(vec![1, 0])), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn divisor_series_rejects_resonance() {
        let lam = Frequency::real(&[1.0, 1.0]);
        match small_divisor_series(&lam, 3) {
            Err(Error::Resonance { witness, .. }) => {
                assert_eq!(witness.0[0] + witness.0[1], 0)
            }
            other => panic!("expected resonance, got {other:?}"),
        }
    }
}
