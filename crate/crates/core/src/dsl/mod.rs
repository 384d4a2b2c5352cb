//! Expression language and surface charts.
//!
//! Parametrizations are entered as text expressions in `u1`, `u2` (and `u3`
//! for field components), parsed once into an AST, and evaluated either as
//! plain floats or as truncated-Taylor jets carrying every mixed partial
//! derivative through total order 3.

pub mod chart;
pub mod expr;
pub mod jet;

pub use chart::{builtin_chart, AxisSpec, SurfaceChart, BUILTIN_NAMES};
pub use expr::{BinOp, Expr, Func, Var, VarValues};
pub use jet::{Jet, JetError};
