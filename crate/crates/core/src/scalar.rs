use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type underlying every complex operator in the crate.
///
/// Implemented for `f32` and `f64`. The complex entries are
/// `nalgebra::Complex<T>`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
    /// Lift an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion for reporting and serialization.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon.
    fn eps() -> Self {
        Self::default_epsilon()
    }

    /// `max(x, k * eps)`, so absolute tolerances chosen for `f64` stay
    /// meaningful when the crate is instantiated at lower precision.
    fn floor_tol(x: f64, k: f64) -> Self {
        let t = Self::lit(x);
        let floor = Self::eps() * Self::lit(k);
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl<T> Real for T where
    T: RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
}

/// Default tolerance for operator inequalities (1e-9 at double precision).
pub fn default_tol<T: Real>() -> T {
    T::floor_tol(1e-9, 1e4)
}

/// Default absolute gap under which eigenvalues are treated as degenerate.
pub fn default_degeneracy_tol<T: Real>() -> T {
    T::floor_tol(1e-9, 1e4)
}

/// Relative tolerance used when validating Hermiticity of inputs.
pub fn hermiticity_tol<T: Real>() -> T {
    T::floor_tol(1e-10, 64.0)
}
