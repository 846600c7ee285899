//! Exact symbolic calculus for differential forms on coordinate charts:
//! tangent-valued forms, the Frölicher–Nijenhuis bracket, connections as
//! idempotent projections, the graded derivations they induce, and
//! randomized exact verification of the operator identities relating them.
//!
//! Everything is computed over arbitrary-precision rationals; an identity
//! "holds" only when its residual has every coefficient literally zero.
//!
//! ```
//! use gradform::{Chart, Connection, Poly};
//! use gradform::form::fn_bracket;
//!
//! let chart = Chart::new(["x", "y", "z"]).unwrap();
//! let conn = Connection::curved_rank1(&chart).unwrap();
//!
//! // R = dx∧dy ⊗ ∂z, and [phi, phi] = 2(R + Rbar)
//! let r = conn.curvature();
//! assert_eq!(r.component(&[0, 1], 2), Poly::one(&chart));
//! assert!(conn.cocurvature().is_zero());
//! let bracket = fn_bracket(conn.phi(), conn.phi()).unwrap();
//! assert_eq!(bracket, r.scale(&gradform::poly::rat_int(2)));
//! ```

pub mod bundle;
pub mod chart;
pub mod cli;
pub mod connection;
pub mod error;
pub mod form;
pub mod gen;
pub mod io;
pub mod operator;
pub mod poly;
pub mod suite;

pub use chart::Chart;
pub use connection::{Connection, HorizMode};
pub use error::{Error, Result};
pub use form::{ScalarForm, VectorForm};
pub use poly::{Poly, Rat};
