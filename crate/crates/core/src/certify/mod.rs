//! Witness classification: product violations, decompositions, and PPT
//! detections, each returned as a [`Certificate`] that re-verifies itself.

pub mod certificate;
pub mod decompose;
pub mod seesaw;

use rayon::prelude::*;

pub use certificate::{verify_certificate, Certificate, CertificateDocument, Diagnostics, VIOLATION_THRESHOLD};
pub use decompose::{
    decomposability_inequality, explicit_decomposition, lambda_window, Decomposition, DecompositionMethod,
};
pub use seesaw::{seesaw_min_product, seesaw_trace, SeesawConfig, SeesawResult};

use crate::error::{Error, Result};
use crate::states::{ppt_state, ppt_threshold_numeric, PptFamilyParams};
use crate::witness::{choi_witness, necessary_ew_check, ChoiParams};
use crate::ChoiType;

/// Bisection tolerance used for `t(μ)` on the probe grid.
const THRESHOLD_TOL: f64 = 1e-12;

/// Divisions per simplex axis used when none is given.
pub fn default_grid(d: usize) -> usize {
    match d {
        0..=3 => 50,
        4 => 12,
        5 => 8,
        6 => 6,
        _ => 4,
    }
}

/// All `μ = k/n` with `k` a composition of `n` into `parts` nonnegative
/// parts, in lexicographic order of `k`.
pub fn simplex_grid(parts: usize, n: usize) -> Vec<Vec<f64>> {
    fn rec(parts: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(parts - 1, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut raw = Vec::new();
    rec(parts, n, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|ks| {
            let mut mu: Vec<f64> = ks.iter().map(|&k| k as f64 / n as f64).collect();
            // Keep Σμ = 1 exact in floating point.
            let rest: f64 = mu[..parts - 1].iter().sum();
            mu[parts - 1] = 1.0 - rest;
            mu
        })
        .collect()
}

struct Probe {
    mu: Vec<f64>,
    gap: f64,
    candidate: Option<(f64, f64)>,
}

fn probe(params: &ChoiParams, mu: Vec<f64>) -> Result<Probe> {
    let d = params.d;
    let df = d as f64;
    let t = ppt_threshold_numeric(d, &mu, params.kind, THRESHOLD_TOL)?.p;
    let s: f64 = params.a[1..].iter().zip(&mu).map(|(a, m)| a * m).sum();
    let den = df + s - params.a[0];
    if !(den > 0.0) {
        return Ok(Probe {
            mu,
            gap: f64::INFINITY,
            candidate: None,
        });
    }
    let lower = s / den;
    let gap = lower - t;
    let candidate = (gap < 0.0).then(|| {
        let p = 0.5 * (lower + t);
        // Tr[W ρ] = (1 - p) Σ a_i μ_i + p (a_0 - d)
        (p, (1.0 - p) * s + p * (params.a[0] - df))
    });
    Ok(Probe { mu, gap, candidate })
}

/// Searches the PPT probe family for a state the witness detects.
///
/// For each grid `μ`, `t(μ)` is the bisection PPT threshold and
/// `lower(μ) = Σ a_i μ_i / (d + Σ a_i μ_i - a_0)` the smallest `p` with a
/// negative expectation. Qualifying points (`lower < t`) are tried in order
/// of most negative predicted trace at `p = (lower + t)/2`; the first that
/// verifies is returned.
pub fn nd_certify(params: &ChoiParams, grid: usize, cfg: &SeesawConfig) -> Result<Certificate> {
    let params = params.with_normalized(false)?;
    let d = params.d;
    if !necessary_ew_check(&params) {
        let w = choi_witness(&params)?;
        let best = seesaw_min_product(&w, d, cfg)?;
        if best.value <= VIOLATION_THRESHOLD {
            return Ok(Certificate::NotWitness {
                value: best.value,
                alpha: best.alpha,
                beta: best.beta,
            });
        }
        return Ok(Certificate::Unknown {
            diagnostics: Diagnostics {
                seesaw_min: Some(best.value),
                note: Some("sum(a) < d but no product violation found".into()),
                ..Diagnostics::default()
            },
        });
    }
    if params.kind == ChoiType::Second && d != 3 {
        return Ok(Certificate::Unknown {
            diagnostics: Diagnostics {
                note: Some(format!("second-type probe family is defined for d=3 only, got d={d}")),
                ..Diagnostics::default()
            },
        });
    }
    if grid == 0 {
        return Err(Error::InvalidParameters("grid resolution must be positive".into()));
    }

    let probes: Vec<Probe> = simplex_grid(d - 1, grid)
        .into_par_iter()
        .map(|mu| probe(&params, mu))
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..probes.len()).filter(|&i| probes[i].candidate.is_some()).collect();
    order.sort_by(|&i, &j| {
        let ti = probes[i].candidate.unwrap().1;
        let tj = probes[j].candidate.unwrap().1;
        ti.total_cmp(&tj).then(i.cmp(&j))
    });
    let w = choi_witness(&params)?;
    for i in order {
        let (p, _) = probes[i].candidate.unwrap();
        let family = PptFamilyParams::new(d, p, probes[i].mu.clone(), params.kind)?;
        let state = ppt_state(&family);
        let trace_value = w.trace_product(&state).re;
        let cert = Certificate::NonDecomposable {
            mu: probes[i].mu.clone(),
            p,
            state,
            trace_value,
        };
        if verify_certificate(&params, &cert).is_ok() {
            return Ok(cert);
        }
    }

    let best = probes
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.gap.total_cmp(&b.gap).then(i.cmp(j)))
        .map(|(_, p)| p);
    Ok(Certificate::Unknown {
        diagnostics: Diagnostics {
            best_gap: best.map(|p| p.gap).filter(|g| g.is_finite()),
            best_mu: best.map(|p| p.mu.clone()),
            ..Diagnostics::default()
        },
    })
}

/// See-saw, then decomposition, then PPT probe search. Every certificate
/// returned has passed [`verify_certificate`].
pub fn classify(params: &ChoiParams, cfg: &SeesawConfig, grid: usize) -> Result<Certificate> {
    let params = params.with_normalized(false)?;
    let d = params.d;
    let w = choi_witness(&params)?;
    let product = seesaw_min_product(&w, d, cfg)?;
    if product.value <= VIOLATION_THRESHOLD {
        let cert = Certificate::NotWitness {
            value: product.value,
            alpha: product.alpha,
            beta: product.beta,
        };
        verify_certificate(&params, &cert)?;
        return Ok(cert);
    }

    let decomposition_note = if params.sum() > 1.0 {
        match explicit_decomposition(&params) {
            Ok(dec) => {
                let cert = Certificate::from_decomposition(dec);
                verify_certificate(&params, &cert)?;
                return Ok(cert);
            }
            Err(Error::EmptyWindow(msg)) => msg,
            Err(e) => return Err(e),
        }
    } else {
        format!("sum(a) = {} <= 1", params.sum())
    };

    let cert = nd_certify(&params, grid, cfg)?;
    verify_certificate(&params, &cert)?;
    Ok(match cert {
        Certificate::Unknown { mut diagnostics } => {
            diagnostics.seesaw_min = Some(product.value);
            diagnostics.decomposition = Some(decomposition_note);
            Certificate::Unknown { diagnostics }
        }
        other => other,
    })
}
