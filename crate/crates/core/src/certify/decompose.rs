//! Decompositions `W = λ Q̃^{T_A} + (1 - λ) P̃` of the normalized Choi
//! witness, with `P̃, Q̃ ≥ 0` of unit trace.
//!
//! Three constructions are tried in order:
//!
//! 1. `a_0 ≥ d`: every Bell coefficient is nonnegative, so `P̃ = W`, `λ = 0`.
//! 2. Reduction window: `Q̃ ∝ I - F` (`F` the swap) has `Q̃^{T_A} ∝ W_red`,
//!    and `P̃ = W - λ W_red/(d(d-1))` stays Bell-diagonal. Its coefficients
//!    are nonnegative for `(d - a_0)/(Σa - 1) ≤ λ ≤ (d-1) a_min/(Σa - 1)`.
//! 3. Symmetric decomposition: any decomposition can be averaged over the
//!    symmetry group of the witness, which leaves `Q` supported on the pairs
//!    `{|ij⟩, |ji⟩}` with couplings `-z_m`, and `P` on `span{|ii⟩}` as a
//!    circulant. A small LP over `z` decides feasibility; for `d = 3` it is
//!    exactly `a_1 a_2 ≥ ((3 - a_0)/2)²` with `a_0 ≥ 1`.
//!
//! Second-type witnesses are handled through `W' = K W K†`, `K = F† ⊗ F`
//! (`F` the Fourier matrix), mapping `P ↦ K P K†` and
//! `Q ↦ (F ⊗ F) Q (F ⊗ F)†`.

use serde::{Deserialize, Serialize};

use crate::basis::{bell_projector_pt, dft, second_type_rotation};
use crate::error::{Error, Result};
use crate::lp::{simplex_solve, Constraint, LinearProgram, Relation};
use crate::tensor::{kron, min_eigval, pt_left, DenseOperator, C64};
use crate::witness::{choi_witness, reduction_witness, ChoiParams};
use crate::ChoiType;

/// Entrywise tolerance on `min eig ≥ -PSD_FLOOR` for decomposition payloads.
pub const PSD_FLOOR: f64 = 1e-9;
/// Relative Frobenius tolerance on the reconstruction.
pub const RECONSTRUCTION_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionMethod {
    PsdWitness,
    ReductionWindow,
    Symmetric,
}

impl DecompositionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecompositionMethod::PsdWitness => "psd-witness",
            DecompositionMethod::ReductionWindow => "reduction-window",
            DecompositionMethod::Symmetric => "symmetric",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub lambda: f64,
    pub p_tilde: DenseOperator,
    pub q_tilde: DenseOperator,
    pub method: DecompositionMethod,
}

/// `a_1 a_2 ⋯ a_{d-1} ≥ ((d - a_0)/(d - 1))^{d-1}`, trivially true for
/// `a_0 ≥ d`.
pub fn decomposability_inequality(params: &ChoiParams) -> bool {
    let df = params.d as f64;
    let a0 = params.a[0];
    if a0 >= df {
        return true;
    }
    let product: f64 = params.a[1..].iter().product();
    product >= ((df - a0) / (df - 1.0)).powi(params.d as i32 - 1)
}

/// `[(d - a_0)/(Σa - 1), (d - 1) a_min/(Σa - 1)]`, if nonempty.
pub fn lambda_window(params: &ChoiParams) -> Result<(f64, f64)> {
    let excess = params.sum() - 1.0;
    if !(excess > 0.0) {
        return Err(Error::Normalization(format!(
            "decomposition needs sum(a) > 1, got {}",
            params.sum()
        )));
    }
    let df = params.d as f64;
    let lo = (df - params.a[0]) / excess;
    let hi = (df - 1.0) * params.a_min() / excess;
    if lo > hi + 1e-15 {
        return Err(Error::EmptyWindow(format!(
            "lambda lower bound {lo} exceeds upper bound {hi}"
        )));
    }
    Ok((lo, hi.max(lo)))
}

/// `(I - d·(|ψ_00⟩⟨ψ_00|)^{T_A}) / (d(d-1))`: unit trace, PSD, and its
/// partial transpose is `W_red/(d(d-1))` for either witness type.
pub fn reduction_q_tilde(d: usize) -> Result<DenseOperator> {
    let df = d as f64;
    let q = &DenseOperator::identity(d * d) - &bell_projector_pt(d)?.scale_real(df);
    Ok(q.scale_real(1.0 / (df * (df - 1.0))))
}

fn unit_trace_or_zero(m: DenseOperator, weight: f64) -> DenseOperator {
    if weight > 1e-12 {
        m.scale_real(1.0 / weight)
    } else {
        DenseOperator::zeros(m.dim())
    }
}

fn normalized_witness(params: &ChoiParams) -> Result<DenseOperator> {
    choi_witness(&params.with_normalized(true)?)
}

fn window_decomposition(params: &ChoiParams) -> Result<Decomposition> {
    let d = params.d;
    let df = d as f64;
    let (lo, hi) = lambda_window(params)?;
    let lambda = 0.5 * (lo + hi);
    let w = normalized_witness(params)?;
    let red = reduction_witness(d)?.scale_real(1.0 / (df * (df - 1.0)));
    let p_raw = &w - &red.scale_real(lambda);
    Ok(Decomposition {
        lambda,
        p_tilde: unit_trace_or_zero(p_raw, 1.0 - lambda),
        q_tilde: reduction_q_tilde(d)?,
        method: DecompositionMethod::ReductionWindow,
    })
}

/// Maximizes the smallest circulant eigenvalue `t` over admissible `z`.
/// Returns `(t, z)` with `z[m]` for `m = 0..d` (`z[0] = 0`, `z[m] = z[d-m]`).
fn symmetric_lp(params: &ChoiParams) -> Result<(f64, Vec<f64>)> {
    let d = params.d;
    let df = d as f64;
    let a = &params.a;
    let half = d / 2;
    // Variables: z_1..z_half, then t.
    let nz = half;
    let caps: Vec<f64> = (1..=half).map(|m| (a[m] * a[d - m]).sqrt()).collect();
    let mut lp = LinearProgram::new({
        let mut c = vec![0.0; nz + 1];
        c[nz] = -1.0;
        c
    });
    let t_floor = -(df + caps.iter().sum::<f64>() * 2.0 + a[0].abs() + 1.0);
    lp.bounds = caps
        .iter()
        .map(|&c| (-c, c))
        .chain(std::iter::once((t_floor, f64::INFINITY)))
        .collect();
    for k in 0..d {
        // λ_k = a_0 - d δ_{k0} + Σ_{m≥1} z_m cos(2πkm/d) ≥ t
        let mut coeffs = vec![0.0; nz + 1];
        for m in 1..d {
            let pair = m.min(d - m) - 1;
            coeffs[pair] += (2.0 * std::f64::consts::PI * (k * m) as f64 / df).cos();
        }
        coeffs[nz] = -1.0;
        let rhs = if k == 0 { df - a[0] } else { -a[0] };
        lp.push(Constraint::new(coeffs, Relation::Ge, rhs));
    }
    let sol = simplex_solve(&lp)?;
    let t = sol.x[nz];
    let mut z = vec![0.0; d];
    for m in 1..d {
        z[m] = sol.x[m.min(d - m) - 1];
    }
    Ok((t, z))
}

/// `(P, Q)` of the unnormalized first-type witness for given couplings `z`.
fn symmetric_parts(params: &ChoiParams, z: &[f64]) -> (DenseOperator, DenseOperator) {
    let d = params.d;
    let a = &params.a;
    let mut q = DenseOperator::zeros(d * d);
    let mut p = DenseOperator::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            let m = (j + d - i) % d;
            if i != j {
                q.set(i * d + j, i * d + j, C64::new(a[m], 0.0));
                q.set(i * d + j, j * d + i, C64::new(-z[m], 0.0));
                p.set(i * d + i, j * d + j, C64::new(-1.0 + z[m], 0.0));
            } else {
                p.set(i * d + i, i * d + i, C64::new(a[0] - 1.0, 0.0));
            }
        }
    }
    (p, q)
}

fn symmetric_decomposition(params: &ChoiParams) -> Result<Decomposition> {
    let d = params.d;
    let scale = params.with_normalized(true)?.normalization()?;
    if params.a[0] < 1.0 {
        return Err(Error::EmptyWindow(format!(
            "a_0 = {} < 1 leaves the diagonal block with negative trace",
            params.a[0]
        )));
    }
    let (t, z) = symmetric_lp(params)?;
    if t < -1e-12 {
        return Err(Error::EmptyWindow(format!(
            "symmetric decomposition infeasible: best circulant eigenvalue {t:.3e}"
        )));
    }
    let (mut p, mut q) = symmetric_parts(params, &z);
    if params.kind == ChoiType::Second {
        p = p.conjugate_by(&second_type_rotation(d));
        let f = dft(d);
        q = q.conjugate_by(&kron(&f, &f));
    }
    let p = p.scale_real(scale);
    let q = q.scale_real(scale);
    let lambda = q.trace().re;
    let weight_p = p.trace().re;
    Ok(Decomposition {
        lambda,
        q_tilde: unit_trace_or_zero(q, lambda),
        p_tilde: unit_trace_or_zero(p, weight_p),
        method: DecompositionMethod::Symmetric,
    })
}

/// Reconstruction defect `‖W - λ Q̃^{T_A} - (1-λ) P̃‖_F` and the smallest
/// eigenvalues of `P̃` and `Q̃`.
pub fn decomposition_residuals(w: &DenseOperator, dec: &Decomposition, d: usize) -> Result<(f64, f64, f64)> {
    let rebuilt = &pt_left(&dec.q_tilde, d)?.scale_real(dec.lambda) + &dec.p_tilde.scale_real(1.0 - dec.lambda);
    let defect = (w - &rebuilt).frobenius_norm();
    Ok((defect, min_eigval(&dec.p_tilde)?, min_eigval(&dec.q_tilde)?))
}

/// Checks the payload against the normalized witness.
pub fn verify_decomposition(w: &DenseOperator, dec: &Decomposition, d: usize) -> Result<()> {
    if !(-1e-12..=1.0 + 1e-12).contains(&dec.lambda) {
        return Err(Error::PsdViolation(format!("lambda = {} outside [0, 1]", dec.lambda)));
    }
    if dec.p_tilde.dim() != d * d || dec.q_tilde.dim() != d * d {
        return Err(Error::Dimension(format!("payload operators must be {0}x{0}", d * d)));
    }
    let (defect, min_p, min_q) = decomposition_residuals(w, dec, d)?;
    if min_p < -PSD_FLOOR || min_q < -PSD_FLOOR {
        return Err(Error::PsdViolation(format!(
            "payload eigenvalues below floor: P {min_p:.3e}, Q {min_q:.3e}"
        )));
    }
    let allowed = RECONSTRUCTION_RTOL * w.frobenius_norm();
    if defect > allowed {
        return Err(Error::PsdViolation(format!(
            "reconstruction defect {defect:.3e} exceeds {allowed:.3e}"
        )));
    }
    Ok(())
}

/// Builds and verifies a decomposition of the normalized witness.
///
/// Does not require [`decomposability_inequality`]: the symmetric fallback
/// succeeds on points that inequality rejects for `d ≥ 4`. Fails with
/// [`Error::EmptyWindow`] when no construction applies.
pub fn explicit_decomposition(params: &ChoiParams) -> Result<Decomposition> {
    let d = params.d;
    let w = normalized_witness(params)?;
    let dec = if params.a[0] >= d as f64 {
        Decomposition {
            lambda: 0.0,
            p_tilde: w.clone(),
            q_tilde: DenseOperator::zeros(d * d),
            method: DecompositionMethod::PsdWitness,
        }
    } else {
        match window_decomposition(params) {
            Ok(dec) => dec,
            Err(Error::EmptyWindow(_)) => symmetric_decomposition(params)?,
            Err(e) => return Err(e),
        }
    };
    verify_decomposition(&w, &dec, d)?;
    Ok(dec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::is_psd;

    fn choi(a: &[f64], kind: ChoiType) -> ChoiParams {
        ChoiParams::new(a.len(), a.to_vec(), kind, false).unwrap()
    }

    #[test]
    fn inequality_examples() {
        assert!(decomposability_inequality(&choi(&[2.0, 1.0, 1.0], ChoiType::First)));
        assert!(!decomposability_inequality(&choi(&[1.0, 1.0, 0.0], ChoiType::First)));
        assert!(decomposability_inequality(&choi(&[3.5, 0.0, 0.0], ChoiType::First)));
        // bc ≥ (3 - a)²/4 at d = 3
        for (a, b, c) in [(1.0, 1.0, 1.0), (1.5, 0.75, 0.75), (1.0, 2.0, 0.5)] {
            let lhs = decomposability_inequality(&choi(&[a, b, c], ChoiType::First));
            assert_eq!(lhs, b * c >= (3.0 - a) * (3.0 - a) / 4.0);
        }
    }

    #[test]
    fn window_examples() {
        let (lo, hi) = lambda_window(&choi(&[1.0, 1.0, 1.0], ChoiType::First)).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        let (lo, hi) = lambda_window(&choi(&[2.0, 1.0, 1.0], ChoiType::First)).unwrap();
        assert!((lo - 1.0 / 3.0).abs() < 1e-15 && (hi - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            lambda_window(&choi(&[1.0, 2.0, 0.5], ChoiType::First)),
            Err(Error::EmptyWindow(_))
        ));
    }

    #[test]
    fn reduction_q_is_psd_with_reduction_transpose() {
        for d in 2..6 {
            let q = reduction_q_tilde(d).unwrap();
            assert!(is_psd(&q, &Default::default()).unwrap());
            assert!((q.trace().re - 1.0).abs() < 1e-12);
            let df = d as f64;
            let red = reduction_witness(d).unwrap().scale_real(1.0 / (df * (df - 1.0)));
            assert!(pt_left(&q, d).unwrap().max_abs_diff(&red) < 1e-12);
        }
    }

    #[test]
    fn reduction_witness_decomposes_with_unit_lambda() {
        let dec = explicit_decomposition(&choi(&[1.0, 1.0, 1.0], ChoiType::First)).unwrap();
        assert_eq!(dec.method, DecompositionMethod::ReductionWindow);
        assert!((dec.lambda - 1.0).abs() < 1e-15);
        assert!(dec.p_tilde.frobenius_norm() < 1e-12);
    }

    #[test]
    fn midpoint_lambda() {
        let dec = explicit_decomposition(&choi(&[2.0, 1.0, 1.0], ChoiType::First)).unwrap();
        assert_eq!(dec.method, DecompositionMethod::ReductionWindow);
        assert!((dec.lambda - 0.5).abs() < 1e-15);
    }

    #[test]
    fn positive_witness_is_its_own_decomposition() {
        let dec = explicit_decomposition(&choi(&[3.0, 0.0, 0.2], ChoiType::First)).unwrap();
        assert_eq!(dec.method, DecompositionMethod::PsdWitness);
        assert_eq!(dec.lambda, 0.0);
    }

    #[test]
    fn symmetric_fallback_matches_inequality_at_d3() {
        for (a, b, c) in [(1.0, 2.0, 0.5), (1.5, 1.8, 0.35), (1.2, 0.9, 2.0), (1.0, 0.25, 2.0)] {
            for kind in [ChoiType::First, ChoiType::Second] {
                let p = choi(&[a, b, c], kind);
                let holds = decomposability_inequality(&p);
                let dec = explicit_decomposition(&p);
                assert_eq!(dec.is_ok(), holds, "{a},{b},{c} {kind}: {dec:?}");
                if let Ok(dec) = dec {
                    assert!(matches!(
                        dec.method,
                        DecompositionMethod::Symmetric | DecompositionMethod::ReductionWindow
                    ));
                }
            }
        }
    }

    #[test]
    fn symmetric_fallback_beyond_inequality_at_d4() {
        let p = choi(&[2.0, 0.0, 2.0, 0.0], ChoiType::First);
        assert!(!decomposability_inequality(&p));
        let dec = explicit_decomposition(&p).unwrap();
        assert_eq!(dec.method, DecompositionMethod::Symmetric);
    }

    #[test]
    fn non_decomposable_point_fails() {
        assert!(matches!(
            explicit_decomposition(&choi(&[1.0, 1.0, 0.0], ChoiType::First)),
            Err(Error::EmptyWindow(_))
        ));
        assert!(matches!(
            explicit_decomposition(&choi(&[0.5, 2.0, 2.0], ChoiType::First)),
            Err(Error::EmptyWindow(_))
        ));
    }
}
