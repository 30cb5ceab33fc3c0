//! Engine-level checks on the worked problems: order growth per strategy,
//! conjugacy correctness, and trace bookkeeping.

use echelon::coeff::{ratio, ExactC};
use echelon::field::VectorField;
use echelon::index::{MultiIndex, Signature};
use echelon::iterate::{Schedule, Strategy};
use echelon::morse::morse_reduce;
use echelon::series::TruncatedSeries;
use echelon::siegel::{conjugacy_defect, siegel_linearize};
use num_complex::Complex64;

type S = TruncatedSeries<Complex64>;
type E = TruncatedSeries<ExactC>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn x2_plus_x3_exact(cap: u64) -> E {
    let sig = Signature::taylor(1);
    let mut f = E::zero(sig, cap);
    f.set(MultiIndex::new(vec![2]), ratio(1, 1));
    f.set(MultiIndex::new(vec![3]), ratio(1, 1));
    f
}

fn default_sched() -> Schedule {
    Schedule::Halving { s: 0.3, k: 0 }
}

#[test]
fn morse_kolmogorov_orders_double() {
    let f = x2_plus_x3_exact(32);
    let res = morse_reduce(&f, 3, default_sched(), Strategy::Kolmogorov).unwrap();
    let orders: Vec<Option<u64>> =
        res.trace.rows.iter().map(|r| r.residual_order).collect();
    assert_eq!(orders, vec![Some(3), Some(7), Some(15)]);
    assert!(res.trace.final_residual_order.map_or(true, |o| o >= 31));
}

#[test]
fn morse_picard_orders_affine() {
    let f = x2_plus_x3_exact(16);
    let res = morse_reduce(&f, 4, default_sched(), Strategy::Picard).unwrap();
    let orders: Vec<Option<u64>> =
        res.trace.rows.iter().map(|r| r.residual_order).collect();
    assert_eq!(orders, vec![Some(3), Some(4), Some(5), Some(6)]);
}

#[test]
fn morse_change_matches_sqrt_jet() {
    // Q∘φ = f with φ = x√(1+x) = x + x²/2 − x³/8 + x⁴/16 − …
    let f = x2_plus_x3_exact(10);
    let res = morse_reduce(&f, 4, default_sched(), Strategy::Kolmogorov).unwrap();
    assert!(res.residual.is_zero());
    let phi = &res.change[0];
    assert_eq!(phi.coeff(&MultiIndex::new(vec![1])), ratio(1, 1));
    assert_eq!(phi.coeff(&MultiIndex::new(vec![2])), ratio(1, 2));
    assert_eq!(phi.coeff(&MultiIndex::new(vec![3])), ratio(-1, 8));
    assert_eq!(phi.coeff(&MultiIndex::new(vec![4])), ratio(1, 16));
    // and Q∘φ really is f
    let q_of_phi = res.quadratic.compose(&res.change).unwrap();
    assert_eq!(q_of_phi, f);
}

#[test]
fn siegel_one_dim_geometric_conjugacy() {
    // v = z∂ + z²∂ is carried by φ(z) = z/(1−z) onto its linear part.
    let sig = Signature::taylor(1);
    let cap = 8;
    let mk = |e: i64| S::monomial(sig, cap, MultiIndex::new(vec![e]), c(1.0));
    let v = VectorField { components: vec![mk(1).add(&mk(2)).unwrap()] };
    let res =
        siegel_linearize(&v, 4, default_sched(), Strategy::Kolmogorov, 1e-12).unwrap();
    assert!(res.residual.is_zero());
    for d in 1..=cap {
        let got = res.conjugacy[0].coeff(&MultiIndex::new(vec![d as i64]));
        assert!((got - c(1.0)).norm() < 1e-12, "degree {d}: {got}");
    }
    let defect = conjugacy_defect(&v, &res.linear, &res.conjugacy).unwrap();
    assert!(defect.max_coeff() < 1e-12);
}

#[test]
fn siegel_newton_matches_kolmogorov() {
    let sig = Signature::taylor(1);
    let cap = 10;
    let mk = |e: i64, a: f64| S::monomial(sig, cap, MultiIndex::new(vec![e]), c(a));
    let v = VectorField { components: vec![mk(1, 1.0).add(&mk(2, 0.5)).unwrap().add(&mk(3, -0.25)).unwrap()] };
    let kol = siegel_linearize(&v, 4, default_sched(), Strategy::Kolmogorov, 1e-12).unwrap();
    let newt = siegel_linearize(&v, 4, default_sched(), Strategy::Newton, 1e-12).unwrap();
    // Both strategies contract quadratically: entering orders obey
    // ord_{n+1} ≥ 2·ord_n + 1 until the jet is exhausted.
    for trace in [&kol.trace, &newt.trace] {
        let orders: Vec<u64> =
            trace.rows.iter().filter_map(|r| r.residual_order).collect();
        for w in orders.windows(2) {
            assert!(w[1] >= 2 * w[0] + 1, "orders {orders:?}");
        }
    }
    // And they produce the same normalized conjugacy.
    for (a, b) in kol.conjugacy[0].terms().zip(newt.conjugacy[0].terms()) {
        assert_eq!(a.0, b.0);
        assert!((a.1 - b.1).norm() < 1e-10);
    }
}

#[test]
fn lemma_rows_hold_on_morse_run() {
    let sig = Signature::taylor(1);
    let cap = 24;
    let mut f = S::zero(sig, cap);
    f.set(MultiIndex::new(vec![2]), c(1.0));
    f.set(MultiIndex::new(vec![3]), c(0.4));
    f.set(MultiIndex::new(vec![4]), c(-0.2));
    let res = morse_reduce(&f, 4, default_sched(), Strategy::Kolmogorov).unwrap();
    let mut applicable = 0;
    for row in &res.trace.rows {
        if let Some(l) = &row.lemma {
            if l.hypothesis_ok {
                applicable += 1;
                assert!(
                    l.measured_a <= l.bound_a * (1.0 + 1e-9),
                    "step {}: measured {} > bound {}",
                    row.n,
                    l.measured_a,
                    l.bound_a
                );
            }
        }
    }
    assert!(applicable > 0, "no lemma-applicable steps in the run");
}
