//! Toolkit for two-component reaction-diffusion systems
//!
//! ```text
//! U_t = [D1(U) U_x]_x + F(U, V)
//! V_t = [D2(V) V_x]_x + G(U, V)
//! ```
//!
//! that admit conditional symmetries of the first type. The crate bundles:
//!
//! - [`expr`]: a small expression parser and evaluatable function descriptors
//!   with analytic or finite-difference derivatives,
//! - [`kirchhoff`]: the substitution `u = ∫ D1(U) dU` linking the divergence
//!   form above to the transformed form `u_xx = d1(u) u_t + C1(u, v)`,
//! - [`catalog`]: the 21-entry table of systems and operators, instantiable
//!   with user-supplied kinetics and certified numerically,
//! - [`detsys`]: residual evaluation of the determining-equation systems that
//!   define invariance (the machine-checkable content of the catalog),
//! - [`reduction`]: ansatz construction, reduction to ODE profiles, numeric
//!   integration, and lifting profiles back to certified PDE solutions,
//! - [`linfam`]: closed-form solution families of the linear reduced system,
//!   classified by the roots of its characteristic quartic, plus the
//!   power-diffusivity application with its zero-flux boundary-value checks,
//! - [`pdesolve`]: an independent method-of-lines finite-difference solver
//!   used as the external oracle for every closed form,
//! - [`cli`]: config ingestion and the subcommand dispatch used by the
//!   `rdsym` binary.
//!
//! Every runnable capability has an example under `examples/`; start with
//! `cargo run --example catalog_tour`.

pub mod catalog;
pub mod cli;
pub mod detsys;
pub mod expr;
pub mod kirchhoff;
pub mod linfam;
pub mod pdesolve;
pub mod reduction;

pub use expr::{parse_expr, EvalError, FunctionDescriptor, ParseError};
pub use kirchhoff::{RDSystem, SystemForm};
pub use catalog::SymmetryOperator;
pub use detsys::{ResidualReport, SampleDomain};
