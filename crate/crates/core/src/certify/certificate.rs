//! Classification verdicts and their self-checking payloads.
//!
//! Conventions: `NotWitness.value` and `NonDecomposable.trace_value` are
//! measured against the unnormalized witness `Σ a_m ρ_m - d|ψ_00⟩⟨ψ_00|`;
//! `Decomposable` payloads decompose the unit-trace witness.

use serde::{Deserialize, Serialize};

use super::decompose::{verify_decomposition, Decomposition, DecompositionMethod, PSD_FLOOR};
use crate::error::{Error, Result};
use crate::tensor::{min_eigval, pt_left, DenseOperator, StateVector};
use crate::witness::{choi_witness, ChoiParams};
use crate::ChoiType;

/// A certificate is only issued when its expectation is at most this.
pub const VIOLATION_THRESHOLD: f64 = -1e-9;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Lowest product-state expectation the see-saw reached.
    pub seesaw_min: Option<f64>,
    /// Why no decomposition was produced.
    pub decomposition: Option<String>,
    /// Smallest `lower(μ) - t(μ)` over the probe grid; negative would have
    /// produced a certificate.
    pub best_gap: Option<f64>,
    pub best_mu: Option<Vec<f64>>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Certificate {
    NotWitness {
        value: f64,
        alpha: StateVector,
        beta: StateVector,
    },
    Decomposable {
        lambda: f64,
        p_tilde: DenseOperator,
        q_tilde: DenseOperator,
        method: DecompositionMethod,
    },
    NonDecomposable {
        mu: Vec<f64>,
        p: f64,
        state: DenseOperator,
        trace_value: f64,
    },
    Unknown {
        diagnostics: Diagnostics,
    },
}

impl Certificate {
    pub fn verdict(&self) -> &'static str {
        match self {
            Certificate::NotWitness { .. } => "NotWitness",
            Certificate::Decomposable { .. } => "Decomposable",
            Certificate::NonDecomposable { .. } => "NonDecomposable",
            Certificate::Unknown { .. } => "Unknown",
        }
    }

    pub fn from_decomposition(dec: Decomposition) -> Self {
        Certificate::Decomposable {
            lambda: dec.lambda,
            p_tilde: dec.p_tilde,
            q_tilde: dec.q_tilde,
            method: dec.method,
        }
    }

    /// How far the certificate clears its own threshold: `-value` for
    /// product violations, `-trace_value` for PPT detections, the smaller
    /// payload eigenvalue for decompositions, and `-best_gap` for `Unknown`.
    pub fn margin(&self) -> Result<f64> {
        Ok(match self {
            Certificate::NotWitness { value, .. } => -value,
            Certificate::NonDecomposable { trace_value, .. } => -trace_value,
            Certificate::Decomposable { p_tilde, q_tilde, .. } => {
                min_eigval(p_tilde)?.min(min_eigval(q_tilde)?)
            }
            Certificate::Unknown { diagnostics } => diagnostics.best_gap.map_or(f64::NAN, |g| -g),
        })
    }

    pub fn summary(&self) -> String {
        match self {
            Certificate::NotWitness { value, .. } => format!("product value {value:.6e}"),
            Certificate::Decomposable { lambda, method, .. } => {
                format!("lambda {lambda:.6} via {}", method.as_str())
            }
            Certificate::NonDecomposable { mu, p, trace_value, .. } => {
                let mu: Vec<String> = mu.iter().map(|m| format!("{m:.4}")).collect();
                format!("p {p:.6} mu [{}] trace {trace_value:.6e}", mu.join(" "))
            }
            Certificate::Unknown { diagnostics } => match diagnostics.best_gap {
                Some(g) => format!("best gap {g:.6e}"),
                None => diagnostics.note.clone().unwrap_or_else(|| "no probe".into()),
            },
        }
    }
}

/// Parameters plus verdict, as written by `qw classify`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub d: usize,
    pub a: Vec<f64>,
    #[serde(rename = "type")]
    pub kind: ChoiType,
    #[serde(flatten)]
    pub certificate: Certificate,
}

impl CertificateDocument {
    pub fn new(params: &ChoiParams, certificate: Certificate) -> Self {
        Self {
            d: params.d,
            a: params.a.clone(),
            kind: params.kind,
            certificate,
        }
    }

    pub fn params(&self) -> Result<ChoiParams> {
        ChoiParams::new(self.d, self.a.clone(), self.kind, false)
    }

    pub fn verify(&self) -> Result<()> {
        verify_certificate(&self.params()?, &self.certificate)
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::PsdViolation(msg()))
    }
}

/// Re-derives every payload invariant from the parameters alone.
pub fn verify_certificate(params: &ChoiParams, cert: &Certificate) -> Result<()> {
    let d = params.d;
    let unnormalized = params.with_normalized(false)?;
    match cert {
        Certificate::NotWitness { value, alpha, beta } => {
            check(alpha.dim() == d && beta.dim() == d, || {
                format!("product factors must have dimension {d}")
            })?;
            check(alpha.is_normalized() && beta.is_normalized(), || {
                "product factors are not unit vectors".into()
            })?;
            let w = choi_witness(&unnormalized)?;
            let actual = w.expectation(&alpha.kron(beta));
            check((actual - value).abs() <= 1e-9, || {
                format!("recorded value {value} but state gives {actual}")
            })?;
            check(actual <= VIOLATION_THRESHOLD, || {
                format!("product expectation {actual} is not negative")
            })
        }
        Certificate::Decomposable {
            lambda,
            p_tilde,
            q_tilde,
            method,
        } => {
            let w = choi_witness(&params.with_normalized(true)?)?;
            let dec = Decomposition {
                lambda: *lambda,
                p_tilde: p_tilde.clone(),
                q_tilde: q_tilde.clone(),
                method: *method,
            };
            verify_decomposition(&w, &dec, d)
        }
        Certificate::NonDecomposable {
            state, trace_value, ..
        } => {
            check(state.dim() == d * d, || format!("state must be {0}x{0}", d * d))?;
            check((state.trace().re - 1.0).abs() <= 1e-9, || "state is not unit trace".into())?;
            let min_state = min_eigval(state)?;
            check(min_state >= -PSD_FLOOR, || {
                format!("state has eigenvalue {min_state:.3e}")
            })?;
            let min_pt = min_eigval(&pt_left(state, d)?)?;
            check(min_pt >= -PSD_FLOOR, || {
                format!("partial transpose has eigenvalue {min_pt:.3e}")
            })?;
            let w = choi_witness(&unnormalized)?;
            let actual = w.trace_product(state).re;
            check((actual - trace_value).abs() <= 1e-9, || {
                format!("recorded trace {trace_value} but state gives {actual}")
            })?;
            check(actual <= VIOLATION_THRESHOLD, || {
                format!("trace {actual} is not negative")
            })
        }
        Certificate::Unknown { .. } => Ok(()),
    }
}
