//! Product-state Bell overlaps and the critical-parameter linear program.
//!
//! For a product state `γ = α ⊗ β`, `P_{km} = |⟨γ|ψ_{km}⟩|²` lies in
//! `[0, 1/d]` and sums to 1. The Choi witness only sees the aggregate
//! `𝒫`: column sums (first type) or row sums (second type), with the
//! `(0,0)` cell dropped from `𝒫_1`. Minimizing the aggregated overlap over
//! the relaxation of all such distributions gives `C_γ,min`, and with it the
//! critical mixing parameter `r_c`.

pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::basis::{bell_basis, check_dim, PhaseRoot};
use crate::error::{Error, Result};
use crate::tensor::{StateVector, C64};
use crate::witness::ChoiParams;
use crate::ChoiType;

pub use simplex::{lexicographic_argmin, simplex_solve, Constraint, LinearProgram, LpSolution, Relation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregatedDistribution {
    pub d: usize,
    /// `(𝒫_1, …, 𝒫_d)`.
    pub p: Vec<f64>,
}

impl AggregatedDistribution {
    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `P[k][m] = |⟨α ⊗ β|ψ_{km}⟩|²`.
pub fn product_distribution(alpha: &StateVector, beta: &StateVector, d: usize) -> Result<Vec<Vec<f64>>> {
    check_dim(d)?;
    if alpha.dim() != d || beta.dim() != d {
        return Err(Error::Dimension(format!(
            "product factors must have dimension {d}, got {} and {}",
            alpha.dim(),
            beta.dim()
        )));
    }
    if !alpha.is_normalized() || !beta.is_normalized() {
        return Err(Error::Normalization("product factors must be unit vectors".into()));
    }
    let gamma = alpha.kron(beta);
    let basis = bell_basis(d);
    Ok((0..d)
        .map(|k| (0..d).map(|m| gamma.inner(&basis[k * d + m]).norm_sqr()).collect())
        .collect())
}

pub fn aggregate(p: &[Vec<f64>], kind: ChoiType) -> AggregatedDistribution {
    let d = p.len();
    let mut out = vec![0.0; d];
    for (k, row) in p.iter().enumerate() {
        for (m, &v) in row.iter().enumerate() {
            if k == 0 && m == 0 {
                continue;
            }
            match kind {
                ChoiType::First => out[m] += v,
                ChoiType::Second => out[k] += v,
            }
        }
    }
    AggregatedDistribution { d, p: out }
}

/// An extreme point of the aggregated region with a product state realizing it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremePoint {
    pub point: AggregatedDistribution,
    pub alpha: StateVector,
    pub beta: StateVector,
}

fn phase_vector(d: usize, step: i64) -> StateVector {
    let w = PhaseRoot::new(d);
    let norm = 1.0 / (d as f64).sqrt();
    StateVector::new((0..d).map(|l| w.pow(step * l as i64) * norm).collect())
        .expect("phase vector is normalized")
}

/// `(1, ω, ω², …)/√d` when `d ≥ 3`. For qubits `ω² = 1` collapses that
/// state onto `|ψ_00⟩`, so half-steps `e^{iπl/d}` are used instead.
fn uniform_phase(d: usize) -> StateVector {
    if d == 2 {
        let norm = 1.0 / (d as f64).sqrt();
        StateVector::new(
            (0..d)
                .map(|l| C64::from_polar(norm, std::f64::consts::PI * l as f64 / d as f64))
                .collect(),
        )
        .expect("phase vector is normalized")
    } else {
        phase_vector(d, 1)
    }
}

/// The extreme points `(1/d, …, 1/d)`, `e_i` for `i = 2..d`, and
/// `((d-1)/d) e_1`, each paired with a product state that produces it.
pub fn extreme_points(d: usize, kind: ChoiType) -> Result<Vec<ExtremePoint>> {
    check_dim(d)?;
    let df = d as f64;
    let uniform_real = phase_vector(d, 0);
    let ket = |i: usize| StateVector::basis(d, i);
    let make = |p: Vec<f64>, alpha: StateVector, beta: StateVector| ExtremePoint {
        point: AggregatedDistribution { d, p },
        alpha,
        beta,
    };

    let mut points = Vec::with_capacity(d + 1);
    let flat = vec![1.0 / df; d];
    let mut corner = vec![0.0; d];
    corner[0] = (df - 1.0) / df;
    match kind {
        ChoiType::First => {
            points.push(make(flat, uniform_phase(d), uniform_phase(d)));
            for i in 2..=d {
                let mut e = vec![0.0; d];
                e[i - 1] = 1.0;
                points.push(make(e, ket(0), ket(i - 1)));
            }
            points.push(make(corner, ket(0), ket(0)));
        }
        ChoiType::Second => {
            points.push(make(flat, ket(0), ket(1)));
            for i in 2..=d {
                let mut e = vec![0.0; d];
                e[i - 1] = 1.0;
                points.push(make(e, phase_vector(d, i as i64 - 1), uniform_real.clone()));
            }
            points.push(make(corner, uniform_real.clone(), uniform_real));
        }
    }
    Ok(points)
}

/// Relaxation of the aggregated region obtained from `0 ≤ P_{km} ≤ 1/d`,
/// `Σ P = 1`:
///
/// `0 ≤ 𝒫_1 ≤ (d-1)/d`, `0 ≤ 𝒫_i ≤ 1`, `(d-1)/d ≤ Σ 𝒫 ≤ 1`.
///
/// The aggregation map sends the box onto exactly this set, and it is the
/// same for both witness types. The objective is left at zero.
pub fn feasible_polytope(d: usize) -> Result<LinearProgram> {
    check_dim(d)?;
    let df = d as f64;
    let mut lp = LinearProgram::new(vec![0.0; d]);
    lp.bounds = (0..d)
        .map(|i| (0.0, if i == 0 { (df - 1.0) / df } else { 1.0 }))
        .collect();
    lp.push(Constraint::new(vec![1.0; d], Relation::Ge, (df - 1.0) / df));
    lp.push(Constraint::new(vec![1.0; d], Relation::Le, 1.0));
    Ok(lp)
}

/// The facet-plane reading `d𝒫_1 + (d-1)𝒫_i + (d-2)Σ_{j≠i, j≥2} 𝒫_j ≥ d-1`
/// for `i = 2..d`, with `𝒫 ≥ 0`, `Σ𝒫 ≤ 1`.
///
/// Kept for comparison only: it cuts off realizable points such as
/// `e_2` at `d = 3`, and its optimum over the Choi objective differs from
/// the closed form (e.g. `1/9` vs `2/27` at `a = (2,1,1)`).
pub fn hyperplane_polytope(d: usize) -> Result<LinearProgram> {
    check_dim(d)?;
    let df = d as f64;
    let mut lp = LinearProgram::new(vec![0.0; d]);
    lp.push(Constraint::new(vec![1.0; d], Relation::Le, 1.0));
    for i in 1..d {
        let coeffs = (0..d)
            .map(|j| match j {
                0 => df,
                j if j == i => df - 1.0,
                _ => df - 2.0,
            })
            .collect();
        lp.push(Constraint::new(coeffs, Relation::Ge, df - 1.0));
    }
    Ok(lp)
}

/// `D = (d² - 1) + (1 - d) a_0 + a_1 + … + a_{d-1}`.
fn choi_denominator(params: &ChoiParams) -> Result<f64> {
    let df = params.d as f64;
    let den = df * df - 1.0 - df * params.a[0] + params.sum();
    if den.abs() < 1e-14 {
        return Err(Error::DegenerateParameters(format!(
            "denominator (d²-1) + (1-d)a_0 + a_1 + ... vanishes for a = {:?}",
            params.a
        )));
    }
    Ok(den)
}

/// Coefficients of `Σ q_{km} P_{km}` in terms of the aggregate:
/// `(1, (a_1 + d - a_0)/d, …, (a_{d-1} + d - a_0)/d) / D`.
pub fn choi_objective(params: &ChoiParams) -> Result<Vec<f64>> {
    let den = choi_denominator(params)?;
    let df = params.d as f64;
    let a0 = params.a[0];
    Ok((0..params.d)
        .map(|i| if i == 0 { 1.0 } else { (params.a[i] + df - a0) / df } / den)
        .collect())
}

/// `((d-1)/d)(1 + (a_min - a_0)/d) / D`.
pub fn c_gamma_min_analytic(params: &ChoiParams) -> Result<f64> {
    let den = choi_denominator(params)?;
    let df = params.d as f64;
    Ok((df - 1.0) / df * (1.0 + (params.a_min() - params.a[0]) / df) / den)
}

/// `C_γ,min` by simplex over [`feasible_polytope`], with the
/// lexicographically smallest optimal aggregate.
pub fn c_gamma_min_lp(params: &ChoiParams) -> Result<(f64, AggregatedDistribution)> {
    let lp = feasible_polytope(params.d)?.with_objective(choi_objective(params)?)?;
    let sol = lexicographic_argmin(&lp)?;
    Ok((
        sol.value,
        AggregatedDistribution {
            d: params.d,
            p: sol.x,
        },
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalResult {
    pub c_gamma_min: f64,
    pub r_c: f64,
    pub argmin: AggregatedDistribution,
    /// `-d(d - a_0)/(Σa - 1)` when `Σa > 1`.
    pub witness_r: Option<f64>,
    /// `witness_r ≥ r_c`: sufficient for positivity on product states.
    pub satisfies_bound: Option<bool>,
}

/// `r_c = -d² C / (1 - d² C)`; needs `0 ≤ d² C < 1`.
pub fn r_from_c(d: usize, c: f64) -> Result<f64> {
    let dd = (d * d) as f64;
    if !(c >= 0.0) || dd * c >= 1.0 {
        return Err(Error::DegenerateParameters(format!(
            "C_gamma_min = {c} outside [0, 1/d²)"
        )));
    }
    // `+ 0.0` maps -0 to 0.
    Ok(dd * c / (dd * c - 1.0) + 0.0)
}

pub fn r_critical(params: &ChoiParams) -> Result<CriticalResult> {
    let (c, argmin) = c_gamma_min_lp(params)?;
    let r_c = r_from_c(params.d, c)?;
    let witness_r = params.witness_r().ok();
    Ok(CriticalResult {
        c_gamma_min: c,
        r_c,
        argmin,
        witness_r,
        satisfies_bound: witness_r.map(|r| r >= r_c - 1e-12),
    })
}
