//! Combinatorial invariants of unimodal interval maps, computed with
//! certified ball arithmetic.
//!
//! The crate works with the symmetric-power family `f(x) = a (1 - |2x-1|^ell)`
//! and produces exact combinatorial data about its critical orbit:
//!
//! * kneading data — closest precritical points, cutting times `S_k`, the
//!   kneading map `Q`, and a parameter search that realizes a target
//!   combinatorics by certified bisection ([`kneading`]);
//! * nice intervals, first entry/return maps, pull-back chains, children with
//!   transition times, principal nests and central cascades ([`nice`]);
//! * complexity counting — nice covers, the component count `q(n)`, the word
//!   complexity `p(n)`, essential orders `M_n` and growth classification
//!   ([`complexity`]);
//! * the abstract adding machine and the cyclic-cover harness that witnesses
//!   adding-machine dynamics on the critical omega-limit set ([`odometer`]).
//!
//! Every comparison is certified: it either resolves or the computation is
//! retried at doubled precision, up to a configurable cap. Counts returned by
//! this crate are exact for the given parameter, never floating-point guesses.

pub use astro_float;

pub mod arith;
pub mod complexity;
pub mod error;
pub mod kneading;
pub mod map;
pub mod nice;
pub mod odometer;

pub use arith::{Ball, Interval, Prec};
pub use error::{Error, Result};
pub use map::{CriticalOrder, MapSpec, Orbit, Side};
