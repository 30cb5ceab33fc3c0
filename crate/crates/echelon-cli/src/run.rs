//! Command handlers: each returns the artifact directory it wrote.

use crate::{
    artifact_dir, halving, load_field, load_hamiltonian, load_series, parse_error, parse_lambda,
    parse_lambda_exact, parse_strategy, thirds, write_artifact, write_text, C64, CEx,
    DiophantineArgs, DivisorsArgs, KamArgs, LinearizeArgs, MeasureDemoArgs, MorseArgs,
    ProductDemoArgs, SingularArgs,
};
use echelon::io::SeriesLiteral;
use echelon::iterate::IterationTrace;
use echelon::{
    infinite_product, kam_transversal_step, min_small_divisor, min_small_divisor_exact,
    morse_reduce, siegel_divisors, siegel_linearize, singular_kam_step, Coeff, Error, Frequency,
    MultiIndex, ScaleFamily, SeriesOperator, Signature, TailRule, TruncatedSeries, Verdict,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Serialize)]
struct MapResult {
    conjugacy: Vec<SeriesLiteral>,
    inverse: Vec<SeriesLiteral>,
    residual_order: Option<u64>,
    residual_norm: f64,
}

fn write_trace(dir: &Path, trace: &IterationTrace) -> Result<(), Error> {
    write_text(dir, "trace.csv", &trace.to_csv())?;
    write_artifact(dir, "trace.json", trace)
}

pub fn linearize(a: &LinearizeArgs, out_root: &Path) -> Result<PathBuf, Error> {
    let strategy = parse_strategy(&a.strategy)?;
    let parts = vec![
        format!("{}", a.field.display()),
        a.cutoff.to_string(),
        a.steps.to_string(),
        a.strategy.clone(),
        a.exact.to_string(),
        a.scale.to_string(),
    ];
    let dir = artifact_dir(out_root, "linearize", &parts)?;
    if a.exact {
        let field = load_field::<CEx>(&a.field)?.with_cap(a.cutoff);
        let res = siegel_linearize(&field, a.steps, halving(a.scale), strategy, a.res_tol)?;
        emit_map(&dir, res.conjugacy, res.conjugacy_inverse, &res.trace)?;
    } else {
        let field = load_field::<C64>(&a.field)?.with_cap(a.cutoff);
        let res = siegel_linearize(&field, a.steps, halving(a.scale), strategy, a.res_tol)?;
        emit_map(&dir, res.conjugacy, res.conjugacy_inverse, &res.trace)?;
    }
    Ok(dir)
}

fn emit_map<C: Coeff>(
    dir: &Path,
    conjugacy: Vec<TruncatedSeries<C>>,
    inverse: Vec<TruncatedSeries<C>>,
    trace: &IterationTrace,
) -> Result<(), Error> {
    let result = MapResult {
        conjugacy: conjugacy.iter().map(SeriesLiteral::from_series).collect(),
        inverse: inverse.iter().map(SeriesLiteral::from_series).collect(),
        residual_order: trace.final_residual_order,
        residual_norm: trace.final_residual_norm,
    };
    write_artifact(dir, "result.json", &result)?;
    write_trace(dir, trace)
}

pub fn morse(a: &MorseArgs, out_root: &Path) -> Result<PathBuf, Error> {
    let strategy = parse_strategy(&a.strategy)?;
    let parts = vec![
        format!("{}", a.function.display()),
        a.steps.to_string(),
        a.strategy.clone(),
        a.exact.to_string(),
        a.scale.to_string(),
    ];
    let dir = artifact_dir(out_root, "morse", &parts)?;
    if a.exact {
        let f = load_series::<CEx>(&a.function)?;
        let res = morse_reduce(&f, a.steps, halving(a.scale), strategy)?;
        emit_map(&dir, res.change, res.change_inverse, &res.trace)?;
    } else {
        let f = load_series::<C64>(&a.function)?;
        let res = morse_reduce(&f, a.steps, halving(a.scale), strategy)?;
        emit_map(&dir, res.change, res.change_inverse, &res.trace)?;
    }
    Ok(dir)
}

#[derive(Serialize)]
struct KamOutput {
    alpha_total: SeriesLiteral,
    transform: Vec<SeriesLiteral>,
    final_t_order: Option<u64>,
    residual_norm: f64,
    reality_defect_alpha: Option<f64>,
}

pub fn kam_step(a: &KamArgs, out_root: &Path) -> Result<PathBuf, Error> {
    let parts = vec![
        format!("{}", a.ham.display()),
        format!("{:?}", a.cutoff),
        format!("{:?}", a.t_order),
        a.steps.to_string(),
        a.real.to_string(),
        a.tau.to_string(),
        a.scale.to_string(),
    ];
    let dir = artifact_dir(out_root, "kam-step", &parts)?;
    let mut h = load_hamiltonian::<C64>(&a.ham)?;
    if let Some(fc) = a.cutoff {
        h = echelon::Hamiltonian::from_series(h.series.clone(), fc, h.xi_cap, h.t_cap)?;
    }
    if let Some(tc) = a.t_order {
        h = echelon::Hamiltonian::from_series(h.series.clone(), h.fourier_cap, h.xi_cap, tc)?;
    }
    if a.real {
        let defect = h.reality_defect();
        if defect > 1e-10 * h.series.max_coeff().max(1.0) {
            return Err(Error::Precondition(format!(
                "input violates reality symmetry by {defect:e}"
            )));
        }
    }
    let res = kam_transversal_step(&h, a.tau, a.steps, thirds(a.scale), 1.0)?;
    let out = KamOutput {
        alpha_total: SeriesLiteral::from_series(&res.alpha_total.series),
        transform: res.transform.iter().map(SeriesLiteral::from_series).collect(),
        final_t_order: res.trace.final_t_order,
        residual_norm: res.trace.final_residual_norm,
        reality_defect_alpha: a.real.then(|| res.alpha_total.reality_defect()),
    };
    write_artifact(&dir, "result.json", &out)?;
    write_trace(&dir, &res.trace)?;
    Ok(dir)
}

#[derive(Serialize)]
struct SingularOutput {
    alpha_total: SeriesLiteral,
    transform: Vec<SeriesLiteral>,
    residual_in_i2: bool,
    residual_norm: f64,
}

pub fn singular(a: &SingularArgs, out_root: &Path) -> Result<PathBuf, Error> {
    let parts = vec![
        format!("{}", a.ham.display()),
        a.steps.to_string(),
        a.scale.to_string(),
    ];
    let dir = artifact_dir(out_root, "singular-kam", &parts)?;
    let h = load_series::<C64>(&a.ham)?;
    let n = h.signature().taylor / 2;
    let res = singular_kam_step(&h, a.steps, thirds(a.scale), 1.0, a.res_tol)?;
    let residual_in_i2 = res
        .residual
        .terms()
        .all(|(idx, _)| echelon::singular::ideal_order(n, idx) >= 2);
    let out = SingularOutput {
        alpha_total: SeriesLiteral::from_series(&res.alpha_total),
        transform: res.transform.iter().map(SeriesLiteral::from_series).collect(),
        residual_in_i2,
        residual_norm: res.trace.final_residual_norm,
    };
    write_artifact(&dir, "result.json", &out)?;
    write_trace(&dir, &res.trace)?;
    Ok(dir)
}

pub fn diophantine(a: &DiophantineArgs, out_root: &Path) -> Result<PathBuf, Error> {
    let parts = vec![
        a.lambda.clone(),
        a.tau.to_string(),
        a.cutoff.to_string(),
        a.exact.to_string(),
    ];
    let dir = artifact_dir(out_root, "diophantine", &parts)?;
    let cert = if a.exact {
        let lam = parse_lambda_exact(&a.lambda)?;
        min_small_divisor_exact(&lam, a.tau, a.cutoff).to_float()
    } else {
        let lam = parse_lambda(&a.lambda)?;
        min_small_divisor(&lam, a.tau, a.cutoff)
    };
    write_artifact(&dir, "cert.json", &cert)?;
    if !cert.pass {
        return Err(Error::Resonance { witness: cert.witness.clone(), value: 0.0 });
    }
    Ok(dir)
}

pub fn divisors(a: &DivisorsArgs, out_root: &Path) -> Result<PathBuf, Error> {
    if !a.siegel {
        return Err(parse_error("only --siegel tables are available"));
    }
    let lam = parse_lambda(&a.lambda)?;
    let parts = vec![a.lambda.clone(), a.cutoff.to_string(), format!("{:?}", a.res_tol)];
    let dir = artifact_dir(out_root, "divisors", &parts)?;
    let tol = a.res_tol.unwrap_or_else(|| echelon::dioph::default_res_tol(&lam));
    let rows = siegel_divisors(&lam, a.cutoff, tol);
    let mut csv = String::from("j,i,re,im,magnitude,resonant\n");
    for r in &rows {
        let j = r.j.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ");
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            j, r.component, r.value_re, r.value_im, r.magnitude, r.resonant
        ));
    }
    write_text(&dir, "divisors.csv", &csv)?;
    write_artifact(&dir, "divisors.json", &rows)?;
    Ok(dir)
}

#[derive(Serialize)]
struct ProductDemoOutput {
    geometric_verdict: String,
    geometric_rows: Vec<echelon::bound::ProductRow>,
    geometric_identity_defect: f64,
    harmonic_verdict: String,
    harmonic_rows: Vec<echelon::bound::ProductRow>,
}

fn verdict_name(v: &Verdict) -> String {
    match v {
        Verdict::Converged { .. } => "converged".into(),
        Verdict::Diverged { at, .. } => format!("diverged@{at:?}"),
        Verdict::Undetermined => "undetermined".into(),
    }
}

pub fn product_demo(a: &ProductDemoArgs, out_root: &Path) -> Result<PathBuf, Error> {
    let parts = vec![a.scale.to_string(), a.terms.to_string()];
    let dir = artifact_dir(out_root, "product-demo", &parts)?;
    let sig = Signature::taylor(1);
    let cap = 10;
    let fam = ScaleFamily::majorant(1.0);
    let s = a.scale;
    let z2 = |amp: f64| {
        TruncatedSeries::<C64>::monomial(
            sig,
            cap,
            MultiIndex::new(vec![2]),
            num_complex::Complex64::new(amp, 0.0),
        )
    };
    // N¹_s(amp·z²∂) = amp·s², so amp = 4^{-(n+2)}/s gives N¹/s = 4^{-(n+2)}.
    let geometric: Vec<_> = (0..a.terms)
        .map(|n| SeriesOperator::Derivation {
            coeffs: vec![z2(0.25f64.powi(n as i32 + 2) / s)],
        })
        .collect();
    let (g, h, cert_g) = infinite_product(&geometric, sig, &fam, s, TailRule::default())?;
    let probe = z2(1.0);
    let round = h.apply(&g.apply(&probe)?)?;
    let defect = round.sub(&probe)?.max_coeff();
    // Harmonic counter-sequence: N¹_s/s = 1/(n+1) violates condition (E) for
    // the first terms and is not summable afterwards.
    let harmonic: Vec<_> = (0..a.terms)
        .map(|n| SeriesOperator::Derivation {
            coeffs: vec![z2(1.0 / ((n as f64 + 1.0) * s))],
        })
        .collect();
    let (_, _, cert_h) = infinite_product(&harmonic, sig, &fam, s, TailRule::default())?;
    let out = ProductDemoOutput {
        geometric_verdict: verdict_name(&cert_g.verdict),
        geometric_rows: cert_g.rows,
        geometric_identity_defect: defect,
        harmonic_verdict: verdict_name(&cert_h.verdict),
        harmonic_rows: cert_h.rows,
    };
    write_artifact(&dir, "result.json", &out)?;
    let mut csv = String::from("sequence,n,n1,partial_sum\n");
    for r in &out.geometric_rows {
        csv.push_str(&format!("geometric,{},{},{}\n", r.n, r.n1, r.partial_sum));
    }
    for r in &out.harmonic_rows {
        csv.push_str(&format!("harmonic,{},{},{}\n", r.n, r.n1, r.partial_sum));
    }
    write_text(&dir, "certificates.csv", &csv)?;
    if matches!(cert_g.verdict, Verdict::Converged { .. }) {
        Ok(dir)
    } else {
        Err(Error::Precondition("geometric sequence failed to certify".into()))
    }
}

#[derive(Serialize)]
struct MeasureRow {
    c: f64,
    fraction: f64,
}

#[derive(Serialize)]
struct MeasureOutput {
    tau: u32,
    cutoff: u64,
    samples: usize,
    seed: u64,
    rows: Vec<MeasureRow>,
}

/// Monte-Carlo fraction of λ ∈ [0,1]² that are (C,τ)-diophantine up to the
/// cutoff, per constant C. Qualitative: the fraction increases as C
/// decreases, approaching full measure for τ > n−1.
pub fn measure_demo(a: &MeasureDemoArgs, out_root: &Path) -> Result<PathBuf, Error> {
    let cs: Result<Vec<f64>, _> =
        a.c_grid.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let cs = cs.map_err(parse_error)?;
    if a.tau + 1 <= 2 {
        return Err(Error::Precondition(
            "measure demo needs tau > n − 1 = 1 for the full-measure regime".into(),
        ));
    }
    let parts = vec![
        a.tau.to_string(),
        a.c_grid.clone(),
        a.samples.to_string(),
        a.seed.to_string(),
        a.cutoff.to_string(),
    ];
    let dir = artifact_dir(out_root, "measure-demo", &parts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut best_cs = Vec::with_capacity(a.samples);
    for _ in 0..a.samples {
        let l1: f64 = rng.gen();
        let l2: f64 = rng.gen();
        let cert = min_small_divisor(&Frequency::real(&[l1, l2]), a.tau, a.cutoff);
        best_cs.push(if cert.pass { cert.c } else { 0.0 });
    }
    let rows: Vec<MeasureRow> = cs
        .iter()
        .map(|&c| MeasureRow {
            c,
            fraction: best_cs.iter().filter(|&&b| b >= c).count() as f64 / a.samples as f64,
        })
        .collect();
    let out = MeasureOutput {
        tau: a.tau,
        cutoff: a.cutoff,
        samples: a.samples,
        seed: a.seed,
        rows,
    };
    write_artifact(&dir, "result.json", &out)?;
    let mut csv = String::from("c,fraction\n");
    for r in &out.rows {
        csv.push_str(&format!("{},{}\n", r.c, r.fraction));
    }
    write_text(&dir, "fractions.csv", &csv)?;
    Ok(dir)
}
