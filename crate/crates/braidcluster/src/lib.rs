//! Exact combinatorial and symbolic engine for cluster seeds attached to
//! double braid words.
//!
//! Given a permutation `u` and a double braid word `β` (a word in the letters
//! `±1..±(n-1)`) dominating `u`, this crate constructs:
//!
//! * the rightmost `u`-subexpression of `β` and its solid/hollow crossings
//!   ([`braid`]),
//! * the 3D plabic graph whose strands thread the stacked permutation
//!   diagrams, with bridge edges at solid crossings ([`graph3d`]),
//! * relative cycles on the associated surface and their intersection form
//!   ([`cycles`]),
//! * the ice quiver, by two independent algorithms, together with mutation,
//!   sink-recurrence certificates, and lattice-rank tests ([`quiver`]),
//! * local word moves and their effect on the quiver ([`moves`]),
//! * the exact torus chart: matrices of integer Laurent polynomials, grid and
//!   chamber minors, and the cluster variables ([`minors`]),
//! * finite-field point counts and link-polynomial cross-checks ([`count`]).
//!
//! All arithmetic is exact (integers and integer Laurent polynomials); there
//! is no floating point anywhere in the crate.

pub mod braid;
pub mod count;
pub mod cycles;
pub mod graph3d;
pub mod minors;
pub mod moves;
pub mod perm;
pub mod quiver;
