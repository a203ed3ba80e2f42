//! Generalized shift/clock operators and the `d ⊗ d` Bell basis.
//!
//! Bell states follow `|ψ_{km}⟩ = (Ω^k ⊗ I)(I ⊗ S^m)|ψ_{00}⟩`, i.e.
//! `|ψ_{km}⟩ = d^{-1/2} Σ_l ω^{kl} |l⟩ ⊗ |l+m⟩`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{DenseOperator, StateVector, C64, ONE, ZERO};

/// Powers of `ω = exp(2πi/d)`, tabulated once so that `ω^n` is looked up by
/// `n mod d` instead of accumulated by repeated multiplication.
#[derive(Clone, Debug)]
pub struct PhaseRoot {
    d: usize,
    powers: Vec<C64>,
}

impl PhaseRoot {
    pub fn new(d: usize) -> Self {
        let powers = (0..d)
            .map(|n| C64::from_polar(1.0, 2.0 * PI * n as f64 / d as f64))
            .collect();
        Self { d, powers }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn value(&self) -> C64 {
        self.powers[1 % self.d]
    }

    /// `ω^n` for any integer `n`.
    pub fn pow(&self, n: i64) -> C64 {
        self.powers[n.rem_euclid(self.d as i64) as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellIndex {
    pub d: usize,
    /// Phase index.
    pub k: usize,
    /// Shift index.
    pub m: usize,
}

impl BellIndex {
    pub fn new(d: usize, k: usize, m: usize) -> Result<Self> {
        check_dim(d)?;
        if k >= d || m >= d {
            return Err(Error::InvalidParameters(format!(
                "Bell index ({k},{m}) out of range for d={d}"
            )));
        }
        Ok(Self { d, k, m })
    }

    /// Index with both components reduced mod `d`.
    pub fn wrapping(d: usize, k: i64, m: i64) -> Self {
        let di = d as i64;
        Self {
            d,
            k: k.rem_euclid(di) as usize,
            m: m.rem_euclid(di) as usize,
        }
    }

    pub fn all(d: usize) -> impl Iterator<Item = BellIndex> {
        (0..d).flat_map(move |k| (0..d).map(move |m| BellIndex { d, k, m }))
    }
}

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::UnsupportedDimension(format!("d must be >= 2, got {d}")));
    }
    Ok(())
}

/// `S^m |l⟩ = |l + m mod d⟩`.
pub fn shift(d: usize, m: i64) -> DenseOperator {
    let m = m.rem_euclid(d as i64) as usize;
    DenseOperator::from_fn(d, |i, j| if i == (j + m) % d { ONE } else { ZERO })
}

/// `Ω^k |l⟩ = ω^{kl} |l⟩`.
pub fn modulation(d: usize, k: i64) -> DenseOperator {
    let w = PhaseRoot::new(d);
    DenseOperator::from_fn(d, |i, j| if i == j { w.pow(k * i as i64) } else { ZERO })
}

pub fn bell_state(idx: BellIndex) -> StateVector {
    bell_state_with(&PhaseRoot::new(idx.d), idx)
}

fn bell_state_with(w: &PhaseRoot, idx: BellIndex) -> StateVector {
    let d = idx.d;
    let norm = 1.0 / (d as f64).sqrt();
    let mut v = StateVector::zeros(d * d);
    let amps = v.amplitudes_mut();
    for l in 0..d {
        amps[l * d + (l + idx.m) % d] = w.pow((idx.k * l) as i64) * norm;
    }
    v
}

/// All `d²` Bell states, indexed by `k * d + m`.
pub fn bell_basis(d: usize) -> Vec<StateVector> {
    let w = PhaseRoot::new(d);
    BellIndex::all(d).map(|idx| bell_state_with(&w, idx)).collect()
}

pub fn bell_projector(idx: BellIndex) -> DenseOperator {
    DenseOperator::projector(&bell_state(idx))
}

/// `|ψ_{00}⟩⟨ψ_{00}|` on `d ⊗ d`.
pub fn max_entangled_projector(d: usize) -> DenseOperator {
    bell_projector(BellIndex { d, k: 0, m: 0 })
}

/// Bell-diagonal operator `Σ c_{km} |ψ_{km}⟩⟨ψ_{km}|`, with `coeffs[k][m]`.
pub fn bell_diagonal(d: usize, coeffs: &[Vec<f64>]) -> DenseOperator {
    let basis = bell_basis(d);
    let mut out = DenseOperator::zeros(d * d);
    for k in 0..d {
        for m in 0..d {
            let c = coeffs[k][m];
            if c == 0.0 {
                continue;
            }
            let v = &basis[k * d + m];
            let amps = v.amplitudes();
            for (i, a) in amps.iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                for (j, b) in amps.iter().enumerate() {
                    out.add_at(i, j, a * b.conj() * c);
                }
            }
        }
    }
    out
}

/// Closed form of `(|ψ_{00}⟩⟨ψ_{00}|)^{T_A}` as a Bell-basis sum:
/// `(1/d) Σ_{m,l} ω^{ml} |ψ_{m,l}⟩⟨ψ_{m,d-l}|`.
pub fn bell_projector_pt(d: usize) -> Result<DenseOperator> {
    check_dim(d)?;
    let w = PhaseRoot::new(d);
    let basis = bell_basis(d);
    let mut out = DenseOperator::zeros(d * d);
    for m in 0..d {
        for l in 0..d {
            let phase = w.pow((m * l) as i64) / d as f64;
            let ket = &basis[m * d + l];
            let bra = &basis[m * d + (d - l) % d];
            out = &out + &DenseOperator::outer(ket, bra).scale(phase);
        }
    }
    Ok(out)
}

/// Discrete Fourier transform `F_{ij} = ω^{ij} / √d`.
pub fn dft(d: usize) -> DenseOperator {
    let w = PhaseRoot::new(d);
    let norm = 1.0 / (d as f64).sqrt();
    DenseOperator::from_fn(d, |i, j| w.pow((i * j) as i64) * norm)
}

/// Local unitary `F† ⊗ F` carrying first-type Bell-diagonal separable sets
/// onto second-type ones: `(F† ⊗ F) ρ_m (F† ⊗ F)† = ρ'_m`.
pub fn second_type_rotation(d: usize) -> DenseOperator {
    let f = dft(d);
    crate::tensor::kron(&f.adjoint(), &f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{herm_eigvals, kron, pt_left};

    #[test]
    fn phase_root_cycles() {
        for d in 2..8 {
            let w = PhaseRoot::new(d);
            let mut acc = ONE;
            for _ in 0..d {
                acc *= w.value();
            }
            assert!((acc - ONE).norm() < 1e-14);
            assert_eq!(w.pow(-1), w.pow(d as i64 - 1));
        }
    }

    #[test]
    fn shift_examples() {
        let s = shift(3, 1);
        assert_eq!(s.apply(&StateVector::basis(3, 2)), StateVector::basis(3, 0));
        assert_eq!(shift(5, 0), DenseOperator::identity(5));
        let s2 = shift(4, 2);
        assert_eq!(s2.matmul(&s2), DenseOperator::identity(4));
        assert_eq!(shift(3, -1), shift(3, 2));
    }

    #[test]
    fn modulation_examples() {
        assert_eq!(modulation(4, 0), DenseOperator::identity(4));
        assert!(modulation(2, 1).max_abs_diff(&DenseOperator::from_real_diag(&[1.0, -1.0])) < 1e-15);
        let z = modulation(3, 1);
        assert!(z.matmul(&z).matmul(&z).max_abs_diff(&DenseOperator::identity(3)) < 1e-14);
    }

    #[test]
    fn bell_state_examples() {
        let s = 0.5f64.sqrt();
        let phi = bell_state(BellIndex::new(2, 0, 0).unwrap());
        assert!(phi.max_abs_diff(&StateVector::from_real(&[s, 0.0, 0.0, s]).unwrap()) < 1e-15);

        // (1/√3)(|0,2⟩ + ω|1,0⟩ + ω²|2,1⟩)
        let w = PhaseRoot::new(3);
        let v = bell_state(BellIndex::new(3, 1, 2).unwrap());
        let mut expected = StateVector::zeros(9);
        let r = 1.0 / 3f64.sqrt();
        expected.amplitudes_mut()[2] = C64::new(r, 0.0);
        expected.amplitudes_mut()[3] = w.pow(1) * r;
        expected.amplitudes_mut()[7] = w.pow(2) * r;
        assert!(v.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn bell_states_follow_weyl_convention() {
        for d in 2..6 {
            let phi = bell_state(BellIndex::new(d, 0, 0).unwrap());
            for idx in BellIndex::all(d) {
                let u = kron(&modulation(d, idx.k as i64), &DenseOperator::identity(d))
                    .matmul(&kron(&DenseOperator::identity(d), &shift(d, idx.m as i64)));
                assert!(u.apply(&phi).max_abs_diff(&bell_state(idx)) < 1e-13);
            }
        }
    }

    #[test]
    fn bell_index_validation() {
        assert!(BellIndex::new(3, 3, 0).is_err());
        assert!(BellIndex::new(1, 0, 0).is_err());
        assert_eq!(BellIndex::wrapping(3, -1, 4), BellIndex { d: 3, k: 2, m: 1 });
    }

    #[test]
    fn projector_pt_matches_swap_for_qubits() {
        let pt = bell_projector_pt(2).unwrap();
        let swap = DenseOperator::from_fn(4, |i, j| {
            let (a, b) = (i / 2, i % 2);
            if j == b * 2 + a {
                C64::new(0.5, 0.0)
            } else {
                ZERO
            }
        });
        assert!(pt.max_abs_diff(&swap) < 1e-15);
        let eig = herm_eigvals(&pt).unwrap();
        assert!((eig[0] + 0.5).abs() < 1e-12 && eig[1..].iter().all(|x| (x - 0.5).abs() < 1e-12));
    }

    #[test]
    fn projector_pt_matches_direct_transpose() {
        for d in 2..=7 {
            let closed = bell_projector_pt(d).unwrap();
            let direct = pt_left(&max_entangled_projector(d), d).unwrap();
            assert!(closed.max_abs_diff(&direct) <= 1e-12, "d={d}");
            assert!((closed.trace() - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn bell_diagonal_reproduces_projector() {
        let d = 3;
        let mut c = vec![vec![0.0; d]; d];
        c[1][2] = 1.0;
        let op = bell_diagonal(d, &c);
        assert!(op.max_abs_diff(&bell_projector(BellIndex::new(3, 1, 2).unwrap())) < 1e-15);
    }
}
