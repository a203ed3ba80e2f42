//! Bell-diagonal separable families and the PPT probe states built from them.
//!
//! Separable states are kept at trace `d`, as sums of `d` Bell projectors.
//! The PPT families divide by `d` explicitly and have unit trace.

use serde::{Deserialize, Serialize};

use crate::basis::{bell_diagonal, check_dim, max_entangled_projector};
use crate::error::{Error, Result};
use crate::tensor::{is_psd, kron, min_eigval, pt_left, DenseOperator, Tolerance};
use crate::ChoiType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeparableKind {
    /// `ρ_m = Σ_k |ψ_{km}⟩⟨ψ_{km}| = Σ_l |l, l+m⟩⟨l, l+m|`.
    Set1,
    /// `ρ'_m = Σ_k |ψ_{mk}⟩⟨ψ_{mk}|`.
    Set2,
    /// `ρ''_n = Σ_k |ψ_{nk mod d, k}⟩⟨ψ_{nk mod d, k}|`.
    Set3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeparableFamily {
    pub d: usize,
    pub kind: SeparableKind,
    pub index: usize,
}

impl SeparableFamily {
    pub fn new(d: usize, kind: SeparableKind, index: usize) -> Result<Self> {
        check_dim(d)?;
        if index >= d {
            return Err(Error::InvalidParameters(format!(
                "family index {index} out of range for d={d}"
            )));
        }
        Ok(Self { d, kind, index })
    }

    /// Bell-basis coefficients `c[k][m]` of the family member.
    pub fn bell_coefficients(&self) -> Vec<Vec<f64>> {
        let d = self.d;
        let mut c = vec![vec![0.0; d]; d];
        for j in 0..d {
            match self.kind {
                SeparableKind::Set1 => c[j][self.index] += 1.0,
                SeparableKind::Set2 => c[self.index][j] += 1.0,
                // Repeated projectors (gcd(n, d) > 1) are summed, not merged.
                SeparableKind::Set3 => c[(self.index * j) % d][j] += 1.0,
            }
        }
        c
    }
}

pub fn separable_state(f: &SeparableFamily) -> DenseOperator {
    match f.kind {
        SeparableKind::Set1 => {
            let d = f.d;
            let mut diag = vec![0.0; d * d];
            for l in 0..d {
                diag[l * d + (l + f.index) % d] = 1.0;
            }
            DenseOperator::from_real_diag(&diag)
        }
        SeparableKind::Set2 | SeparableKind::Set3 => bell_diagonal(f.d, &f.bell_coefficients()),
    }
}

/// First-type `ρ_m`.
pub fn rho_first(d: usize, m: usize) -> DenseOperator {
    separable_state(&SeparableFamily {
        d,
        kind: SeparableKind::Set1,
        index: m,
    })
}

/// Second-type `ρ'_m`.
pub fn rho_second(d: usize, m: usize) -> DenseOperator {
    separable_state(&SeparableFamily {
        d,
        kind: SeparableKind::Set2,
        index: m,
    })
}

fn is_unitary(u: &DenseOperator) -> bool {
    u.matmul(&u.adjoint())
        .max_abs_diff(&DenseOperator::identity(u.dim()))
        <= 1e-10
}

/// `(U ⊗ V) ρ (U ⊗ V)†` applied to a family member.
pub fn local_orbit(
    f: &SeparableFamily,
    left_op: &DenseOperator,
    right_op: &DenseOperator,
) -> Result<DenseOperator> {
    conjugate_local(&separable_state(f), f.d, left_op, right_op)
}

/// `(U ⊗ V) ρ (U ⊗ V)†` for any `d ⊗ d` operator.
pub fn conjugate_local(
    rho: &DenseOperator,
    d: usize,
    left_op: &DenseOperator,
    right_op: &DenseOperator,
) -> Result<DenseOperator> {
    if left_op.dim() != d || right_op.dim() != d || rho.dim() != d * d {
        return Err(Error::Dimension(format!(
            "local unitaries must be {d}x{d} acting on a {}x{} operator",
            d * d,
            d * d
        )));
    }
    if !is_unitary(left_op) || !is_unitary(right_op) {
        return Err(Error::InvalidParameters("local operators must be unitary".into()));
    }
    Ok(rho.conjugate_by(&kron(left_op, right_op)))
}

/// Parameters of `p |ψ_00⟩⟨ψ_00| + ((1-p)/d) Σ_i μ_i ρ_i` (first type) or the
/// same with `ρ'_i` (second type, `d = 3` only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PptFamilyParams {
    pub d: usize,
    pub p: f64,
    pub mu: Vec<f64>,
    pub kind: ChoiType,
}

impl PptFamilyParams {
    pub fn new(d: usize, p: f64, mu: Vec<f64>, kind: ChoiType) -> Result<Self> {
        check_dim(d)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameters(format!("p must lie in [0,1], got {p}")));
        }
        validate_weights(d, &mu)?;
        if kind == ChoiType::Second && d != 3 {
            return Err(Error::UnsupportedDimension(format!(
                "second-type PPT family is defined for d=3 only, got d={d}"
            )));
        }
        Ok(Self { d, p, mu, kind })
    }
}

/// `μ` must have `d - 1` nonnegative entries summing to 1 within `1e-12`.
pub fn validate_weights(d: usize, mu: &[f64]) -> Result<()> {
    if mu.len() != d - 1 {
        return Err(Error::InvalidParameters(format!(
            "expected {} weights for d={d}, got {}",
            d - 1,
            mu.len()
        )));
    }
    if mu.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
        return Err(Error::InvalidParameters("weights must be nonnegative".into()));
    }
    let total: f64 = mu.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameters(format!(
            "weights must sum to 1, got {total}"
        )));
    }
    Ok(())
}

pub fn ppt_state(params: &PptFamilyParams) -> DenseOperator {
    let d = params.d;
    let separable = match params.kind {
        ChoiType::First => SeparableKind::Set1,
        ChoiType::Second => SeparableKind::Set2,
    };
    let mut mix = DenseOperator::zeros(d * d);
    for (i, &w) in params.mu.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let rho = separable_state(&SeparableFamily {
            d,
            kind: separable,
            index: i + 1,
        });
        mix = &mix + &rho.scale_real(w);
    }
    &max_entangled_projector(d).scale_real(params.p) + &mix.scale_real((1.0 - params.p) / d as f64)
}

fn all_equal(mu: &[f64]) -> bool {
    mu.iter().all(|&m| (m - mu[0]).abs() <= 1e-12)
}

/// Largest `p` keeping the probe state PPT, from the closed forms:
///
/// * first type, `d = 3`: `√(μ1 μ2) / (1 + √(μ1 μ2))`
/// * first type, equal weights: `1/d`
/// * second type, `d = 3`: the published rational-radical expression (see
///   [`second_type_printed_threshold`]); it is exact at `μ = (1/2, 1/2)`
///
/// First-type thresholds for `d > 3` with unequal weights have no unambiguous
/// closed form and report [`Error::AnalyticUnavailable`]; use
/// [`ppt_threshold_numeric`].
pub fn ppt_threshold_analytic(d: usize, mu: &[f64], kind: ChoiType) -> Result<f64> {
    check_dim(d)?;
    validate_weights(d, mu)?;
    match kind {
        ChoiType::First => {
            if d == 3 {
                let g = (mu[0] * mu[1]).sqrt();
                Ok(g / (1.0 + g))
            } else if all_equal(mu) {
                Ok(1.0 / d as f64)
            } else {
                Err(Error::AnalyticUnavailable(format!(
                    "first-type threshold for d={d} with unequal weights"
                )))
            }
        }
        ChoiType::Second => {
            if d != 3 {
                return Err(Error::UnsupportedDimension(format!(
                    "second-type PPT family is defined for d=3 only, got d={d}"
                )));
            }
            Ok(second_type_printed_threshold(mu[0], mu[1]))
        }
    }
}

/// The published `d = 3` second-type bound, evaluated literally.
///
/// Disagrees with bisection for unequal weights (e.g. `0.3110` vs `2/7` at
/// `μ = (0.8, 0.2)`); [`threshold_report`] records the difference.
pub fn second_type_printed_threshold(mu1: f64, mu2: f64) -> f64 {
    let num = 2.0 * mu1 * mu1 - 2.0 + 2.0 * mu2 * mu2 - 2.0 * mu1 * mu2
        + 3.0 * mu2
        + 3.0 * mu1
        + 3.0 * (4.0 + 6.0 * mu1 * mu2 - 3.0 * mu1 * mu1 - 3.0 * mu2 * mu2).sqrt();
    let den = 2.0 * (8.0 + mu2 * mu2 - mu1 * mu2 + mu1 * mu1 + 3.0 * mu1 + 3.0 * mu2);
    num / den
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub p: f64,
    /// False when the state stays PPT on all of `[0, 1]`; `p` is then 1.
    pub bracketed: bool,
    /// Minimum PT eigenvalue is nonincreasing across the final bracket.
    pub monotone: bool,
    pub steps: usize,
}

pub const BISECTION_STEPS: usize = 60;

fn min_pt_eigval(d: usize, p: f64, mu: &[f64], kind: ChoiType) -> Result<(f64, bool)> {
    let params = PptFamilyParams::new(d, p, mu.to_vec(), kind)?;
    let pt = pt_left(&ppt_state(&params), d)?;
    Ok((min_eigval(&pt)?, is_psd(&pt, &Tolerance::default())?))
}

/// Bisection on `p ↦ min eig(PT(ρ_PPT(p)))`. At least [`BISECTION_STEPS`]
/// halvings are taken, more if `tol` asks for a narrower bracket.
pub fn ppt_threshold_numeric(d: usize, mu: &[f64], kind: ChoiType, tol: f64) -> Result<ThresholdEstimate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameters(format!("tolerance must be positive, got {tol}")));
    }
    let (_, ppt_at_one) = min_pt_eigval(d, 1.0, mu, kind)?;
    if ppt_at_one {
        return Ok(ThresholdEstimate {
            p: 1.0,
            bracketed: false,
            monotone: true,
            steps: 0,
        });
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut steps = 0;
    while steps < BISECTION_STEPS || (hi - lo > tol && steps < 200) {
        let mid = 0.5 * (lo + hi);
        if min_pt_eigval(d, mid, mu, kind)?.1 {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    let (at_lo, _) = min_pt_eigval(d, lo, mu, kind)?;
    let (at_hi, _) = min_pt_eigval(d, hi, mu, kind)?;
    let monotone = at_lo >= at_hi - 1e-12;
    debug_assert!(monotone, "PT minimum eigenvalue increased across the bracket");
    Ok(ThresholdEstimate {
        p: lo.clamp(0.0, 1.0),
        bracketed: true,
        monotone,
        steps,
    })
}

/// One candidate evaluation of a closed-form threshold next to bisection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReading {
    pub reading: String,
    pub value: f64,
    pub numeric: f64,
    pub discrepancy: f64,
}

fn ratio(x: f64) -> f64 {
    x / (1.0 + x)
}

/// Compares the candidate readings of the published thresholds against
/// bisection.
///
/// First type: the bound `max{min{μ_i/(1+μ_i), √(μ_k μ_j)/(1+√(μ_k μ_j))}}`
/// over `k ≠ i ≠ j` leaves the quantifiers open; three readings are
/// evaluated:
/// * `conjugate-pairs`: min over `s` of `g(√(μ_s μ_{d-s}))`, where `g(x) = x/(1+x)`
/// * `min-all`: min over every `i` and every pair `k ≠ j`
/// * `max-min`: max over distinct `(i, j, k)` of the inner min
///
/// Second type (`d = 3`): the printed expression.
pub fn threshold_report(d: usize, mu: &[f64], kind: ChoiType, tol: f64) -> Result<Vec<ThresholdReading>> {
    validate_weights(d, mu)?;
    let numeric = ppt_threshold_numeric(d, mu, kind, tol)?.p;
    let mut readings = Vec::new();
    let mut push = |name: &str, value: f64| {
        readings.push(ThresholdReading {
            reading: name.to_string(),
            value,
            numeric,
            discrepancy: (value - numeric).abs(),
        })
    };
    match kind {
        ChoiType::First => {
            // mu[s - 1] holds μ_s.
            let w = |s: usize| mu[s - 1];
            let conj = (1..d)
                .map(|s| ratio((w(s) * w(d - s)).sqrt()))
                .fold(f64::INFINITY, f64::min);
            push("conjugate-pairs", conj);

            let singles = (1..d).map(|i| ratio(w(i))).fold(f64::INFINITY, f64::min);
            let pairs = (1..d)
                .flat_map(|k| (1..d).filter(move |&j| j != k).map(move |j| (k, j)))
                .map(|(k, j)| ratio((w(k) * w(j)).sqrt()))
                .fold(f64::INFINITY, f64::min);
            push("min-all", singles.min(pairs));

            let mut best = f64::NEG_INFINITY;
            for i in 1..d {
                for j in 1..d {
                    for k in 1..d {
                        if i != j && j != k && i != k {
                            best = best.max(ratio(w(i)).min(ratio((w(k) * w(j)).sqrt())));
                        }
                    }
                }
            }
            if best.is_finite() {
                push("max-min", best);
            }
        }
        ChoiType::Second => {
            if d != 3 {
                return Err(Error::UnsupportedDimension(format!(
                    "second-type PPT family is defined for d=3 only, got d={d}"
                )));
            }
            push("printed", second_type_printed_threshold(mu[0], mu[1]));
        }
    }
    Ok(readings)
}
