//! Partial metric spaces, weak contractions on ordered sets, and a
//! certifier/solver for their fixed points.

#![allow(clippy::needless_range_loop)]

pub mod certify;
pub mod cli;
pub mod expr;
pub mod gallery;
pub mod model;
pub mod solve;
