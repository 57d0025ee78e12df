//! Exact and analytic computations with classical modular forms.
//!
//! The crate computes with the spaces M_k(Gamma_0(N), chi):
//!
//! * dimensions, bases and Hecke operators for the full, cuspidal, old, new and
//!   Eisenstein subspaces, for integral weight k >= 2 (exactly, over cyclotomic
//!   fields), for weight 1 (by Hecke stability) and for half-integral weight
//!   (by theta quotients);
//! * the trace form and its Fourier coefficients via the Eichler–Selberg trace
//!   formula, which drives all cuspidal dimension and basis computations;
//! * eigenforms: splitting the new space into Galois orbits, coefficient fields
//!   as relative extensions of Q(chi), and complex embeddings;
//! * q-expansions of f|_k gamma around every cusp, with coefficients recognized
//!   exactly in a cyclotomic field;
//! * the analytic layer: evaluation of forms in the upper half-plane, Petersson
//!   scalar products, completed L-functions Lambda(f,s), their special values,
//!   periods and zeros on the critical line.
//!
//! Everything exact is built on `num` bigints/rationals; the analytic layer uses
//! MPFR/MPC via `rug` at user-chosen precision.  The `mf` binary exposes the same
//! operations as a command-line tool with text and JSON output.

pub mod arith;
pub mod bigfloat;
pub mod cyclotomic;
pub mod dirichlet;
pub mod poly;
pub mod linalg;
pub mod relext;
pub mod qseries;
pub mod eisenstein;
pub mod trace;
pub mod spaces;
pub mod hecke;
pub mod cuspexp;
pub mod special_weights;
pub mod analytic;
pub mod cli;

mod book;
