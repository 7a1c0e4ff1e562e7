//! Exact-arithmetic toolkit for F-zips with additional structure on mod-p
//! de Rham data carrying Pappas-Rapoport splitting filtrations.
//!
//! The crate builds synthetic truncated Dieudonné data over finite fields,
//! refines them by splitting filtrations over k[ε]/(εᵉ), semi-simplifies the
//! result into graded F-zips, classifies those into Ekedahl-Oort types over
//! the relevant Weyl-group posets, and cross-checks everything against
//! brute-force orbit and point-counting oracles. All arithmetic is exact.

pub mod ffalg;
pub mod epsmod;
pub mod coxeter;
pub mod dieudonne;
pub mod zipify;
pub mod zipclass;
pub mod affine;
pub mod seed;
pub mod cli;
