//! Structured-text formats: series literals, operator descriptors,
//! Hamiltonian files, and the export shapes for certificates and traces.
//!
//! The series literal is
//! `{"signature":[m,p], "cap":D, "coeffs":[{"idx":[..],"re":..,"im":..}]}`;
//! emitted literals re-parse to equal values.

use crate::bound::{DiagRule, SeriesOperator};
use crate::coeff::Coeff;
use crate::error::Error;
use crate::index::{MultiIndex, Signature};
use crate::series::TruncatedSeries;
use crate::torus::Hamiltonian;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoeffLiteral {
    pub idx: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesLiteral {
    pub signature: [usize; 2],
    pub cap: u64,
    pub coeffs: Vec<CoeffLiteral>,
}

impl SeriesLiteral {
    pub fn from_series<C: Coeff>(s: &TruncatedSeries<C>) -> Self {
        let sig = s.signature();
        SeriesLiteral {
            signature: [sig.fourier, sig.taylor],
            cap: s.cap(),
            coeffs: s
                .terms()
                .map(|(i, c)| {
                    let v = c.to_c64();
                    CoeffLiteral { idx: i.0.clone(), re: v.re, im: v.im }
                })
                .collect(),
        }
    }

    pub fn to_series<C: Coeff>(&self) -> Result<TruncatedSeries<C>, Error> {
        let sig = Signature::new(self.signature[0], self.signature[1]);
        let mut out = TruncatedSeries::zero(sig, self.cap);
        for c in &self.coeffs {
            let idx = MultiIndex::new(c.idx.clone());
            if !idx.respects(sig) {
                return Err(Error::Precondition(format!(
                    "index {:?} does not fit signature ({},{})",
                    c.idx, sig.fourier, sig.taylor
                )));
            }
            out.add_to(idx, C::from_f64(c.re, c.im));
        }
        Ok(out)
    }
}

/// Operator descriptors:
/// `{"type":"derivation","coeffs":[series,…]}`,
/// `{"type":"hadamard","g":series}`, `{"type":"diag","rule":…}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum OperatorLiteral {
    Derivation { coeffs: Vec<SeriesLiteral> },
    Multiplier { f: SeriesLiteral },
    Hadamard { g: SeriesLiteral },
    Diag { rule: DiagRule },
}

impl OperatorLiteral {
    pub fn to_operator<C: Coeff>(&self) -> Result<SeriesOperator<C>, Error> {
        Ok(match self {
            OperatorLiteral::Derivation { coeffs } => SeriesOperator::Derivation {
                coeffs: coeffs.iter().map(|c| c.to_series()).collect::<Result<_, _>>()?,
            },
            OperatorLiteral::Multiplier { f } => {
                SeriesOperator::Multiplier { f: f.to_series()? }
            }
            OperatorLiteral::Hadamard { g } => SeriesOperator::Hadamard { g: g.to_series()? },
            OperatorLiteral::Diag { rule } => SeriesOperator::Diag { rule: rule.clone() },
        })
    }
}

/// Vector field file: one coefficient series per coordinate axis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldLiteral {
    pub components: Vec<SeriesLiteral>,
}

impl FieldLiteral {
    pub fn from_field<C: Coeff>(f: &crate::field::VectorField<C>) -> Self {
        FieldLiteral {
            components: f.components.iter().map(SeriesLiteral::from_series).collect(),
        }
    }

    pub fn to_field<C: Coeff>(&self) -> Result<crate::field::VectorField<C>, Error> {
        if self.components.is_empty() {
            return Err(Error::Precondition("field needs at least one component".into()));
        }
        Ok(crate::field::VectorField {
            components: self
                .components
                .iter()
                .map(|c| c.to_series())
                .collect::<Result<_, _>>()?,
        })
    }
}

/// Hamiltonian file: a series literal with named slot counts and per-group
/// caps. `actions` must equal `angles` and `t` must be 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonianLiteral {
    pub angles: usize,
    pub actions: usize,
    pub t: usize,
    pub fourier_cap: u64,
    pub xi_cap: u64,
    pub t_cap: u64,
    pub coeffs: Vec<CoeffLiteral>,
}

impl HamiltonianLiteral {
    pub fn from_hamiltonian<C: Coeff>(h: &Hamiltonian<C>) -> Self {
        HamiltonianLiteral {
            angles: h.angles,
            actions: h.angles,
            t: 1,
            fourier_cap: h.fourier_cap,
            xi_cap: h.xi_cap,
            t_cap: h.t_cap,
            coeffs: SeriesLiteral::from_series(&h.series).coeffs,
        }
    }

    pub fn to_hamiltonian<C: Coeff>(&self) -> Result<Hamiltonian<C>, Error> {
        if self.actions != self.angles || self.t != 1 {
            return Err(Error::Precondition(
                "hamiltonian slots must be {angles:n, actions:n, t:1}".into(),
            ));
        }
        let lit = SeriesLiteral {
            signature: [self.angles, self.angles + 1],
            cap: Hamiltonian::<C>::total_cap(self.fourier_cap, self.xi_cap, self.t_cap),
            coeffs: self.coeffs.clone(),
        };
        Hamiltonian::from_series(lit.to_series()?, self.fourier_cap, self.xi_cap, self.t_cap)
    }
}

/// Error envelope emitted by the command line.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorEnvelope {
    pub kind: String,
    pub message: String,
}

impl ErrorEnvelope {
    pub fn from_error(e: &Error) -> Self {
        ErrorEnvelope { kind: e.kind().into(), message: e.to_string() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn series_literal_round_trip() {
        let sig = Signature::new(1, 1);
        let mut s = TruncatedSeries::<Complex64>::zero(sig, 6);
        s.set(MultiIndex::new(vec![-2, 1]), Complex64::new(0.1, -0.7));
        s.set(MultiIndex::new(vec![0, 3]), Complex64::new(2.5, 0.0));
        let text = serde_json::to_string(&SeriesLiteral::from_series(&s)).unwrap();
        let back: SeriesLiteral = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_series::<Complex64>().unwrap(), s);
    }

    #[test]
    fn literal_rejects_bad_index() {
        let lit = SeriesLiteral {
            signature: [0, 1],
            cap: 4,
            coeffs: vec![CoeffLiteral { idx: vec![-1], re: 1.0, im: 0.0 }],
        };
        assert!(lit.to_series::<Complex64>().is_err());
    }

    #[test]
    fn operator_descriptor_parses() {
        let text = r#"{"type":"diag","rule":{"SigmaPow":{"tau":2}}}"#;
        let lit: OperatorLiteral = serde_json::from_str(text).unwrap();
        let op = lit.to_operator::<Complex64>().unwrap();
        match op {
            SeriesOperator::Diag { rule: DiagRule::SigmaPow { tau: 2 } } => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
