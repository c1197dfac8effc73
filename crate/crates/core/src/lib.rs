//! Upper bounds for `B_h[g]`-sets: closed-form constants, certified minima of
//! cosine polynomials, the min-max linear programs behind the refined bounds,
//! and exact computations on finite sets.

pub mod bounds;
pub mod error;
pub mod lp;
pub mod psi;
pub mod sets;
pub mod trigcert;

pub use bounds::{B3Params, B3Refinement, BhgInstance, BoundMethod, BoundReport, SincRoot};
pub use error::{Error, Result};
pub use psi::{FunctionFamily, MassConstraint, PsiEstimate, ValueMatrix};
pub use sets::{BhgVerdict, IntSet, MassProfile, RepProfile, WindowCheck};
pub use trigcert::{CertifiedMin, CosinePoly, Interval};
