//! Generalized Choi maps and their Bell-diagonal witnesses.
//!
//! `W = Σ_m a_m ρ_m - d |ψ_00⟩⟨ψ_00|` (first type) or the same with `ρ'_m`
//! (second type). The normalized form carries the prefactor `1/(d(Σa - 1))`
//! and has unit trace.

use serde::{Deserialize, Serialize};

use crate::basis::{bell_basis, bell_diagonal, check_dim};
use crate::error::{Error, Result};
use crate::tensor::{DenseOperator, C64};
use crate::ChoiType;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiParams {
    pub d: usize,
    pub a: Vec<f64>,
    #[serde(rename = "type")]
    pub kind: ChoiType,
    pub normalized: bool,
}

impl ChoiParams {
    pub fn new(d: usize, a: Vec<f64>, kind: ChoiType, normalized: bool) -> Result<Self> {
        check_dim(d)?;
        if a.len() != d {
            return Err(Error::InvalidParameters(format!(
                "expected {d} coefficients, got {}",
                a.len()
            )));
        }
        if a.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidParameters(
                "coefficients must be finite and nonnegative".into(),
            ));
        }
        let params = Self {
            d,
            a,
            kind,
            normalized,
        };
        if normalized {
            params.normalization()?;
        }
        Ok(params)
    }

    pub fn first(a: &[f64]) -> Result<Self> {
        Self::new(a.len(), a.to_vec(), ChoiType::First, false)
    }

    pub fn with_kind(&self, kind: ChoiType) -> Self {
        Self { kind, ..self.clone() }
    }

    pub fn with_normalized(&self, normalized: bool) -> Result<Self> {
        Self::new(self.d, self.a.clone(), self.kind, normalized)
    }

    pub fn sum(&self) -> f64 {
        self.a.iter().sum()
    }

    pub fn a_min(&self) -> f64 {
        self.a.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `1/(d(Σa - 1))`.
    pub fn normalization(&self) -> Result<f64> {
        let excess = self.sum() - 1.0;
        if !(excess > 0.0) {
            return Err(Error::Normalization(format!(
                "normalized witness needs sum(a) > 1, got {}",
                self.sum()
            )));
        }
        Ok(1.0 / (self.d as f64 * excess))
    }

    /// Mixing parameter of the normalized witness, `-d(d - a_0)/(Σa - 1)`.
    pub fn witness_r(&self) -> Result<f64> {
        let excess = self.sum() - 1.0;
        if !(excess > 0.0) {
            return Err(Error::Normalization(format!(
                "r is undefined for sum(a) = {}",
                self.sum()
            )));
        }
        let d = self.d as f64;
        Ok(d * (self.a[0] - d) / excess + 0.0)
    }

    fn scale(&self) -> Result<f64> {
        if self.normalized {
            self.normalization()
        } else {
            Ok(1.0)
        }
    }

    /// Bell-basis coefficients `c[k][m]` of the unnormalized witness.
    pub fn bell_coefficients(&self) -> Vec<Vec<f64>> {
        let d = self.d;
        let mut c = vec![vec![0.0; d]; d];
        for k in 0..d {
            for m in 0..d {
                match self.kind {
                    ChoiType::First => c[k][m] = self.a[m],
                    ChoiType::Second => c[k][m] = self.a[k],
                }
            }
        }
        c[0][0] -= d as f64;
        c
    }
}

/// `φ(ρ) = D(ρ) - ρ`, `D(ρ)_mm = Σ_j a_{(j-m) mod d} ρ_jj`.
pub fn choi_map_apply(params: &ChoiParams, rho: &DenseOperator) -> Result<DenseOperator> {
    if params.kind != ChoiType::First {
        return Err(Error::InvalidParameters(
            "only the first-type Choi map is available as a map".into(),
        ));
    }
    let d = params.d;
    if rho.dim() != d {
        return Err(Error::Dimension(format!(
            "Choi map acts on {d}x{d} matrices, got {}x{}",
            rho.dim(),
            rho.dim()
        )));
    }
    let mut out = -rho;
    for m in 0..d {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..d {
            acc += rho.get(j, j) * params.a[(j + d - m) % d];
        }
        out.add_at(m, m, acc);
    }
    Ok(out)
}

/// `(φ ⊗ id)(Σ_ij |ii⟩⟨jj|)`, divided by `d(Σa - 1)` when normalized.
pub fn jamiolkowski_witness(params: &ChoiParams) -> Result<DenseOperator> {
    if params.kind != ChoiType::First {
        return Err(Error::InvalidParameters(
            "the Jamiolkowski construction needs the first-type map".into(),
        ));
    }
    let d = params.d;
    let mut out = DenseOperator::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut unit = DenseOperator::zeros(d);
            unit.set(i, j, C64::new(1.0, 0.0));
            let image = choi_map_apply(params, &unit)?;
            for x in 0..d {
                for y in 0..d {
                    let v = image.get(x, y);
                    if v != C64::new(0.0, 0.0) {
                        out.add_at(x * d + i, y * d + j, v);
                    }
                }
            }
        }
    }
    Ok(out.scale_real(params.scale()?))
}

pub fn choi_witness(params: &ChoiParams) -> Result<DenseOperator> {
    let scale = params.scale()?;
    if params.kind == ChoiType::First {
        // Σ a_m ρ_m is diagonal and d|ψ_00⟩⟨ψ_00| = Σ_ij |ii⟩⟨jj|, so the
        // computational-basis form is exact.
        let d = params.d;
        let mut w = DenseOperator::zeros(d * d);
        for i in 0..d {
            for j in 0..d {
                w.add_at(i * d + j, i * d + j, C64::new(params.a[(j + d - i) % d] * scale, 0.0));
                w.add_at(i * d + i, j * d + j, C64::new(-scale, 0.0));
            }
        }
        return Ok(w);
    }
    let coeffs: Vec<Vec<f64>> = params
        .bell_coefficients()
        .into_iter()
        .map(|row| row.into_iter().map(|c| c * scale).collect())
        .collect();
    Ok(bell_diagonal(params.d, &coeffs))
}

/// `Σ_i ρ_i - d |ψ_00⟩⟨ψ_00|`.
pub fn reduction_witness(d: usize) -> Result<DenseOperator> {
    choi_witness(&ChoiParams::new(d, vec![1.0; d], ChoiType::First, false)?)
}

/// `r I/d² + (1 - r) Σ q_{km} |ψ_{km}⟩⟨ψ_{km}|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BdewParams {
    pub d: usize,
    pub r: f64,
    /// `q[k][m]`, nonnegative, summing to 1.
    pub q: Vec<Vec<f64>>,
}

impl BdewParams {
    pub fn new(d: usize, r: f64, q: Vec<Vec<f64>>) -> Result<Self> {
        check_dim(d)?;
        if q.len() != d || q.iter().any(|row| row.len() != d) {
            return Err(Error::Dimension(format!("q must be {d}x{d}")));
        }
        if !(r <= 0.0) {
            return Err(Error::InvalidParameters(format!("r must be <= 0, got {r}")));
        }
        if q.iter().flatten().any(|&x| !(x >= -1e-15)) {
            return Err(Error::InvalidParameters("q must be nonnegative".into()));
        }
        let total: f64 = q.iter().flatten().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Normalization(format!("q must sum to 1, got {total}")));
        }
        Ok(Self { d, r, q })
    }
}

pub fn bdew_assemble(params: &BdewParams) -> DenseOperator {
    let d = params.d;
    let floor = params.r / (d * d) as f64;
    let coeffs: Vec<Vec<f64>> = params
        .q
        .iter()
        .map(|row| row.iter().map(|&q| floor + (1.0 - params.r) * q).collect())
        .collect();
    bell_diagonal(d, &coeffs)
}

/// Closed-form `(r, q)` of the normalized Choi witness. Requires `a_0 <= d`,
/// otherwise `r > 0` and the witness is not in the family.
pub fn bdew_of_choi(params: &ChoiParams) -> Result<BdewParams> {
    let d = params.d;
    let df = d as f64;
    let a0 = params.a[0];
    if a0 > df {
        return Err(Error::InvalidParameters(format!(
            "a_0 = {a0} exceeds d = {d}; the witness is positive"
        )));
    }
    let r = params.witness_r()?;
    let big_d = df * df - 1.0 - df * a0 + params.sum();
    let mut q = vec![vec![0.0; d]; d];
    for (k, row) in q.iter_mut().enumerate() {
        for (m, cell) in row.iter_mut().enumerate() {
            // First type indexes the shift, second type the phase.
            let (outer, inner) = match params.kind {
                ChoiType::First => (m, k),
                ChoiType::Second => (k, m),
            };
            *cell = match (outer, inner) {
                (0, 0) => 0.0,
                (0, _) => 1.0 / big_d,
                (o, _) => (params.a[o] + df - a0) / (df * big_d),
            };
        }
    }
    BdewParams::new(d, r, q)
}

/// Σa ≥ d. When it fails, the real uniform product state
/// `(1, …, 1)/√d ⊗ (1, …, 1)/√d` has `⟨W⟩ = Σa/d - 1 < 0`.
pub fn necessary_ew_check(params: &ChoiParams) -> bool {
    params.sum() >= params.d as f64
}

/// `c[k][m] = ⟨ψ_{km}|W|ψ_{km}⟩`.
pub fn bell_diagonal_coeffs(w: &DenseOperator, d: usize) -> Result<Vec<Vec<f64>>> {
    if w.dim() != d * d {
        return Err(Error::Dimension(format!(
            "operator of dim {} is not {d} x {d}",
            w.dim()
        )));
    }
    let basis = bell_basis(d);
    Ok((0..d)
        .map(|k| (0..d).map(|m| w.expectation(&basis[k * d + m])).collect())
        .collect())
}

/// Largest `|⟨ψ_x|W|ψ_y⟩|` over distinct Bell states.
pub fn bell_offdiag_max(w: &DenseOperator, d: usize) -> Result<f64> {
    if w.dim() != d * d {
        return Err(Error::Dimension(format!(
            "operator of dim {} is not {d} x {d}",
            w.dim()
        )));
    }
    let basis = bell_basis(d);
    let images: Vec<_> = basis.iter().map(|b| w.apply(b)).collect();
    let mut worst = 0.0_f64;
    for (x, bx) in basis.iter().enumerate() {
        for (y, wy) in images.iter().enumerate() {
            if x != y {
                worst = worst.max(bx.inner(wy).norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{max_entangled_projector, second_type_rotation};
    use crate::states::{rho_first, rho_second};
    use crate::tensor::{herm_eigvals, StateVector};

    fn params(a: &[f64], kind: ChoiType, normalized: bool) -> ChoiParams {
        ChoiParams::new(a.len(), a.to_vec(), kind, normalized).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ChoiParams::new(3, vec![1.0, 1.0], ChoiType::First, false).is_err());
        assert!(ChoiParams::new(3, vec![1.0, -1.0, 1.0], ChoiType::First, false).is_err());
        assert!(matches!(
            ChoiParams::new(3, vec![0.5, 0.5, 0.0], ChoiType::First, true),
            Err(Error::Normalization(_))
        ));
        assert!(ChoiParams::new(3, vec![0.5, 0.5, 0.0], ChoiType::First, false).is_ok());
        assert_eq!(params(&[2.0, 0.0, 1.0], ChoiType::First, false).a_min(), 0.0);
    }

    #[test]
    fn map_examples() {
        let p = params(&[2.0, 0.0, 1.0], ChoiType::First, false);
        let out = choi_map_apply(&p, &DenseOperator::from_real_diag(&[1.0, 0.0, 0.0])).unwrap();
        assert!(out.max_abs_diff(&DenseOperator::from_real_diag(&[1.0, 1.0, 0.0])) < 1e-15);

        let zero = DenseOperator::zeros(3);
        assert_eq!(choi_map_apply(&p, &zero).unwrap().max_abs_diff(&zero), 0.0);

        let ones = params(&[1.0; 4], ChoiType::First, false);
        let rho = DenseOperator::from_fn(4, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        let expected = &DenseOperator::identity(4).scale(rho.trace()) - &rho;
        assert!(choi_map_apply(&ones, &rho).unwrap().max_abs_diff(&expected) < 1e-14);

        assert!(matches!(
            choi_map_apply(&p, &DenseOperator::zeros(2)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn jamiolkowski_reduction() {
        let p = params(&[1.0; 3], ChoiType::First, true);
        let w = jamiolkowski_witness(&p).unwrap();
        let direct = &(0..3).map(|m| rho_first(3, m)).sum::<DenseOperator>()
            - &max_entangled_projector(3).scale_real(3.0);
        assert!(w.max_abs_diff(&direct.scale_real(1.0 / 6.0)) < 1e-12);
        assert!(w.max_abs_diff(&choi_witness(&p).unwrap()) < 1e-12);
    }

    #[test]
    fn witness_spectra() {
        let w = choi_witness(&params(&[1.0; 3], ChoiType::First, false)).unwrap();
        assert!((herm_eigvals(&w).unwrap()[0] + 2.0).abs() < 1e-12);

        let w = choi_witness(&params(&[1.0, 1.0, 0.0], ChoiType::First, false)).unwrap();
        let eig = herm_eigvals(&w).unwrap();
        let expected = [-2.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        for (got, want) in eig.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{eig:?}");
        }
        let ket00 = StateVector::basis(9, 0);
        assert!(w.expectation(&ket00).abs() < 1e-15);
    }

    #[test]
    fn reduction_matches_all_ones() {
        for d in 2..7 {
            let red = reduction_witness(d).unwrap();
            let ones = choi_witness(&params(&vec![1.0; d], ChoiType::First, false)).unwrap();
            assert_eq!(red.max_abs_diff(&ones), 0.0);
            assert!((herm_eigvals(&red).unwrap()[0] - (1.0 - d as f64)).abs() < 1e-12);
            assert!(red.trace_product(&rho_first(d, 0)).norm() < 1e-12);
        }
        let red = reduction_witness(3).unwrap();
        assert!((red.trace_product(&max_entangled_projector(3)).re + 2.0).abs() < 1e-12);
    }

    #[test]
    fn second_type_is_built_from_second_set() {
        let a = [1.5, 0.25, 2.0];
        let w = choi_witness(&params(&a, ChoiType::Second, false)).unwrap();
        let mut direct = max_entangled_projector(3).scale_real(-3.0);
        for (m, &am) in a.iter().enumerate() {
            direct = &direct + &rho_second(3, m).scale_real(am);
        }
        assert!(w.max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn second_type_is_a_local_rotation_of_first() {
        for d in 2..6 {
            let a: Vec<f64> = (0..d).map(|i| 0.3 + 0.7 * i as f64).collect();
            let w1 = choi_witness(&params(&a, ChoiType::First, false)).unwrap();
            let w2 = choi_witness(&params(&a, ChoiType::Second, false)).unwrap();
            let rotated = w1.conjugate_by(&second_type_rotation(d));
            assert!(rotated.max_abs_diff(&w2) < 1e-12, "d={d}");
        }
    }

    #[test]
    fn bdew_examples() {
        let d = 3;
        let uniform = BdewParams::new(d, 0.0, vec![vec![1.0 / 9.0; 3]; 3]).unwrap();
        assert!(bdew_assemble(&uniform)
            .max_abs_diff(&DenseOperator::identity(9).scale_real(1.0 / 9.0))
            < 1e-12);

        let mut q = vec![vec![0.0; 3]; 3];
        q[0][0] = 1.0;
        let conc = BdewParams::new(d, 0.0, q).unwrap();
        assert!(bdew_assemble(&conc).max_abs_diff(&max_entangled_projector(3)) < 1e-12);

        assert!(BdewParams::new(d, 0.5, vec![vec![1.0 / 9.0; 3]; 3]).is_err());
        assert!(BdewParams::new(d, -1.0, vec![vec![0.1; 3]; 3]).is_err());
    }

    #[test]
    fn choi_as_bdew() {
        for (a, kind) in [
            (vec![1.0, 1.0, 1.0], ChoiType::First),
            (vec![2.0, 1.0, 1.0], ChoiType::First),
            (vec![1.2, 0.3, 2.5, 0.9], ChoiType::First),
            (vec![2.0, 0.5, 1.0], ChoiType::Second),
        ] {
            let p = params(&a, kind, true);
            let b = bdew_of_choi(&p).unwrap();
            assert!(bdew_assemble(&b).max_abs_diff(&choi_witness(&p).unwrap()) < 1e-12);
        }
        let b = bdew_of_choi(&params(&[1.0; 3], ChoiType::First, true)).unwrap();
        assert!((b.r + 3.0).abs() < 1e-15);
        assert!(bdew_of_choi(&params(&[4.0, 0.0, 0.0], ChoiType::First, true)).is_err());
    }

    #[test]
    fn necessary_check_examples() {
        assert!(necessary_ew_check(&params(&[1.0; 3], ChoiType::First, false)));
        assert!(!necessary_ew_check(&params(&[0.5; 3], ChoiType::First, false)));
        assert!(necessary_ew_check(&params(&[4.0, 0.0, 0.0, 0.0], ChoiType::First, false)));

        // The real uniform product state gives ⟨W⟩ = Σa/d - 1.
        let w = choi_witness(&params(&[0.5; 3], ChoiType::First, false)).unwrap();
        let flat = StateVector::from_real(&[1.0 / 3f64.sqrt(); 3]).unwrap();
        assert!((w.expectation(&flat.kron(&flat)) + 0.5).abs() < 1e-12);

        // Equal phases on both sides cancel the ψ_00 overlap; conjugate
        // phases reproduce the real uniform value.
        let omega = crate::basis::PhaseRoot::new(3);
        let alpha = StateVector::new((0..3).map(|l| omega.pow(l) / 3f64.sqrt()).collect()).unwrap();
        let alpha_bar = StateVector::new(alpha.amplitudes().iter().map(|z| z.conj()).collect()).unwrap();
        assert!((w.expectation(&alpha.kron(&alpha)) - 0.5).abs() < 1e-12);
        assert!((w.expectation(&alpha.kron(&alpha_bar)) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn coefficient_projection() {
        let c = bell_diagonal_coeffs(&DenseOperator::identity(9), 3).unwrap();
        assert!(c.iter().flatten().all(|&x| (x - 1.0).abs() < 1e-12));

        let c = bell_diagonal_coeffs(&reduction_witness(3).unwrap(), 3).unwrap();
        for k in 0..3 {
            for m in 0..3 {
                let want = if k == 0 && m == 0 { -2.0 } else { 1.0 };
                assert!((c[k][m] - want).abs() < 1e-12);
            }
        }

        let coeffs = vec![vec![0.1, -0.4, 2.0], vec![0.0, 3.0, 1.5], vec![-1.0, 0.25, 0.7]];
        let back = bell_diagonal_coeffs(&bell_diagonal(3, &coeffs), 3).unwrap();
        for (row, want) in back.iter().zip(&coeffs) {
            for (x, y) in row.iter().zip(want) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn recovered_r_matches_closed_form() {
        let p = params(&[1.5, 0.7, 2.0], ChoiType::First, true);
        let c = bell_diagonal_coeffs(&choi_witness(&p).unwrap(), 3).unwrap();
        // c_00 = r/d² because q_00 = 0.
        assert!((9.0 * c[0][0] - p.witness_r().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn first_type_matches_bell_sum() {
        for a in [vec![1.0, 1.0], vec![2.0, 0.0, 1.0], vec![0.3, 1.1, 2.4, 0.7, 1.9]] {
            let p = params(&a, ChoiType::First, true);
            let scale = p.normalization().unwrap();
            let coeffs: Vec<Vec<f64>> = p
                .bell_coefficients()
                .into_iter()
                .map(|row| row.into_iter().map(|c| c * scale).collect())
                .collect();
            let via_bell = bell_diagonal(p.d, &coeffs);
            assert!(choi_witness(&p).unwrap().max_abs_diff(&via_bell) < 1e-12);
        }
    }

    #[test]
    fn witnesses_are_bell_diagonal() {
        let w = choi_witness(&params(&[1.5, 0.7, 2.0, 0.1], ChoiType::Second, false)).unwrap();
        assert!(bell_offdiag_max(&w, 4).unwrap() < 1e-12);
    }
}
