//! Exact computations with generalised (dual) arcs in finite projective
//! spaces PG(n, q).
//!
//! The crate builds the Veronesean families of subspaces whose pairwise and
//! higher intersections (or spans) follow binomial dimension laws, verifies
//! and dualizes them, repairs deficient order-1 families, and runs two
//! subspace-based secret-sharing schemes on top of them, with exact rational
//! attack probabilities and seeded Monte Carlo estimates.
//!
//! Modules, bottom up:
//!
//! * [`gf`]: runtime GF(p^e) arithmetic, q <= 2^20.
//! * [`linalg`]: projective subspaces as canonical row-echelon matrices;
//!   meets, spans, perps, point enumeration, superspace counting/sampling.
//! * [`veronese`]: the degree-d Veronesean maps and the dual-arc / arc
//!   families they generate, plus the nucleus computation.
//! * [`arcs`]: family-level verification, dualization, pair-span
//!   classification, contact points and the extension search.
//! * [`sharing`]: the two secret-sharing schemes, share dealing and
//!   reconstruction, exact and simulated attack probabilities.
//!
//! With the default `parallel` feature the heavy loops (family construction,
//! subset verification, Monte Carlo trials) run on rayon; disabling the
//! feature yields the same results sequentially.

pub mod arcs;
mod error;
pub mod exec;
pub mod gf;
pub mod linalg;
pub mod sharing;
pub mod veronese;

pub use error::Error;
