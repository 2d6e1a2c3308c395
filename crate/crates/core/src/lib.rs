//! Growth of monodromy matrices of 2×2 canonical systems `y' = zJH(t)y`:
//! exact and refined propagation, upper and lower growth bounds, zero
//! counting, regularly varying comparison functions and example families.
//!
//! The matrix and polynomial layers are generic over [`scalar::Real`]; the
//! numerical pipeline runs in `f64`, with aliases below.

pub mod curves;
pub mod error;
pub mod families;
pub mod fit;
pub mod hamiltonian;
pub mod lower_bounds;
pub mod mat2;
pub mod monodromy;
pub mod poly;
pub mod quad;
pub mod regvar;
pub mod scalar;
pub mod spectrum;
pub mod upper_bounds;

pub use num_complex::Complex64;

pub use curves::{compute_curves, curve_rows, CurveKind, CurveRow, CurveSetup, GrowthCurve, RadiusGrid};
pub use error::{Error, Result};
pub use hamiltonian::{AngleProfile, ConstantSpec, DiagonalSpec, HamburgerSpec, HamiltonianSpec};
pub use monodromy::{max_modulus, monodromy_at, Monodromy, MonodromyOptions, Propagator};
pub use regvar::{Modulus, RegVarFn};
pub use upper_bounds::{BoundData, BoundValue, Strategy};

/// Real 2×2 matrix.
pub type Mat2f = mat2::Mat2<f64>;
/// Complex 2×2 matrix.
pub type Mat2c = mat2::Mat2<Complex64>;
/// Complex matrix with a separate log scale.
pub type ScaledMat2c = mat2::ScaledMat2<Complex64>;
/// Real polynomial.
pub type Polyf = poly::Poly<f64>;
