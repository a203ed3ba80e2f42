//! Alternating minimization of `⟨α ⊗ β|W|α ⊗ β⟩` over product states.
//!
//! Each half-step fixes one factor and replaces the other by the lowest
//! eigenvector of the conditional `d × d` operator, so the value never
//! increases within a restart. The result is an upper bound on the true
//! product minimum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{random_unit_vector, shard_rng};
use crate::tensor::{herm_eigh, DenseOperator, StateVector, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeesawConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub conv_tol: f64,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 200,
            conv_tol: 1e-10,
            seed: 0,
        }
    }
}

impl SeesawConfig {
    pub fn new(restarts: usize, max_iters: usize, conv_tol: f64, seed: u64) -> Result<Self> {
        if restarts == 0 || max_iters == 0 || !(conv_tol > 0.0) {
            return Err(Error::InvalidParameters(
                "see-saw restarts, iterations and tolerance must be positive".into(),
            ));
        }
        Ok(Self {
            restarts,
            max_iters,
            conv_tol,
            seed,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeesawResult {
    pub value: f64,
    pub alpha: StateVector,
    pub beta: StateVector,
}

fn check_input(w: &DenseOperator, d: usize) -> Result<()> {
    if w.dim() != d * d {
        return Err(Error::Dimension(format!(
            "operator of dim {} is not {d} x {d}",
            w.dim()
        )));
    }
    if !w.is_hermitian() {
        return Err(Error::Hermiticity {
            defect: w.hermiticity_defect(),
            allowed: crate::tensor::HERMITIAN_RTOL * w.frobenius_norm().max(1.0),
        });
    }
    Ok(())
}

/// `M_B(α)[i][j] = Σ_{a,b} conj(α_a) α_b W[(a,i),(b,j)]`.
fn condition_on_left(w: &DenseOperator, d: usize, alpha: &StateVector) -> DenseOperator {
    let al = alpha.amplitudes();
    DenseOperator::from_fn(d, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..d {
            for b in 0..d {
                acc += al[a].conj() * al[b] * w.get(a * d + i, b * d + j);
            }
        }
        acc
    })
}

/// `M_A(β)[a][b] = Σ_{i,j} conj(β_i) β_j W[(a,i),(b,j)]`.
fn condition_on_right(w: &DenseOperator, d: usize, beta: &StateVector) -> DenseOperator {
    let be = beta.amplitudes();
    DenseOperator::from_fn(d, |a, b| {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += be[i].conj() * be[j] * w.get(a * d + i, b * d + j);
            }
        }
        acc
    })
}

fn lowest(m: &DenseOperator) -> (f64, StateVector) {
    // M is Hermitian by construction; symmetrize against rounding.
    let h = (&(m + &m.adjoint())).scale_real(0.5);
    herm_eigh(&h)
        .expect("conditional operator is Hermitian")
        .swap_remove(0)
}

/// Values after each half-step of one restart, starting from `alpha`.
pub fn seesaw_trace(
    w: &DenseOperator,
    d: usize,
    alpha: StateVector,
    cfg: &SeesawConfig,
) -> Result<(Vec<f64>, SeesawResult)> {
    check_input(w, d)?;
    let mut alpha = alpha.normalized()?;
    let (mut value, mut beta) = lowest(&condition_on_left(w, d, &alpha));
    let mut trace = vec![value];
    for _ in 0..cfg.max_iters {
        let (va, a) = lowest(&condition_on_right(w, d, &beta));
        alpha = a;
        let (vb, b) = lowest(&condition_on_left(w, d, &alpha));
        beta = b;
        trace.push(va);
        trace.push(vb);
        let done = (value - vb).abs() <= cfg.conv_tol;
        value = vb;
        if done {
            break;
        }
    }
    Ok((trace, SeesawResult { value, alpha, beta }))
}

/// Best product value over `cfg.restarts` random starts. Restart `i` draws
/// its start from `shard_rng(cfg.seed, i)`; ties go to the lowest index.
pub fn seesaw_min_product(w: &DenseOperator, d: usize, cfg: &SeesawConfig) -> Result<SeesawResult> {
    check_input(w, d)?;
    let runs: Vec<SeesawResult> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = shard_rng(cfg.seed, i as u64);
            let start = random_unit_vector(d, &mut rng);
            seesaw_trace(w, d, start, cfg).map(|(_, r)| r)
        })
        .collect::<Result<_>>()?;
    let mut best = runs
        .into_iter()
        .reduce(|best, r| if r.value < best.value { r } else { best })
        .expect("at least one restart");
    // Report the exact expectation of the returned state.
    best.value = w.expectation(&best.alpha.kron(&best.beta));
    Ok(best)
}
