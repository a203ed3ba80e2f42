//! Bell-diagonal entanglement witnesses for `d ⊗ d` qudit systems.
//!
//! The crate builds generalized Choi witnesses (first and second type), the
//! Bell-diagonal separable states and PPT probe families used to test them,
//! the linear program that fixes the critical mixing parameter `r_c`, and a
//! classifier that emits self-verifying certificates:
//!
//! * [`tensor`] - dense complex operators, partial transpose, Hermitian spectra
//! * [`basis`] - shift/clock operators and the Bell basis
//! * [`states`] - separable families, local orbits, PPT probe states
//! * [`witness`] - Choi maps, Jamiolkowski witnesses, Bell-diagonal witness form
//! * [`lp`] - product-state overlap distributions and the critical-parameter LP
//! * [`certify`] - see-saw product minimization, decompositions, certificates
//! * [`io`] - matrix and certificate file formats used by the `qw` binary

use serde::{Deserialize, Serialize};

pub mod basis;
pub mod certify;
pub mod error;
pub mod io;
pub mod lp;
pub mod sampling;
pub mod states;
pub mod tensor;
pub mod witness;

pub use error::{Error, Result};
pub use tensor::{DenseOperator, StateVector, Tolerance, C64};

/// Which Bell-diagonal separable set a witness or PPT family is built from:
/// `First` uses `ρ_m = Σ_k |ψ_{km}⟩⟨ψ_{km}|`, `Second` uses
/// `ρ'_m = Σ_k |ψ_{mk}⟩⟨ψ_{mk}|`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChoiType {
    #[default]
    First,
    Second,
}

impl std::fmt::Display for ChoiType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChoiType::First => "first",
            ChoiType::Second => "second",
        })
    }
}
