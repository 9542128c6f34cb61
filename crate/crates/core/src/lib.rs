//! Massless Dirac fermions in graphene under crossed electric and magnetic
//! fields.
//!
//! The crate covers the whole analytic chain: classical drift orbits, the
//! Dirac–Weyl eigensystem and its similarity matrix, the two-index ladder
//! algebra, coherent states built as eigenstates of a matrix annihilation
//! operator, and the observables derived from them (densities, currents,
//! quadrature variances, mean energy and drift velocity).
//!
//! Every closed-form series is paired with an independent route (quadrature on
//! a real-space grid or contraction in the ladder-coefficient basis) so the two
//! can be compared at run time; see [`verify`].
//!
//! Units are natural throughout: ħ = v_F = c = e = 1, so l_B² = 1/B and
//! ω_B = 2B.

pub mod classical;
pub mod coherent;
pub mod eigensystem;
pub mod error;
pub mod ladder;
pub mod numerics;
pub mod observables;
pub mod verify;

pub use num_complex::Complex64 as C64;

pub use classical::ClassicalConfig;
pub use coherent::{CoherentProfiles, CoherentSpec};
pub use eigensystem::{Band, FieldConfig, Mat2, Spinor2, Valley};
pub use error::{Error, Result};
pub use ladder::{KetSum, LadderKet, SpinorExpansion, SpinorKets};
pub use numerics::{GridProfile, QuadratureKind, QuadratureRule, TruncationPolicy, UniformGrid};
pub use observables::{DensityPair, HurResult, SeriesForm};
