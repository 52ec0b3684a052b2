//! Extended-precision verification and certification of elementary bounds
//! for `t ln t` and `ln(1 + x)`.

pub mod bounds;
pub mod certifier;
pub mod cli;
pub mod error;
pub mod eval;
pub mod expr;
pub mod fd;
pub mod grid;
pub mod jet;
pub mod real;
pub mod report;
pub mod sandwich;
pub mod selftest;

pub use error::{Error, Result};
pub use expr::{parse, Expr, Var};
pub use jet::{jet, Jet};
pub use real::{Precision, Real};
