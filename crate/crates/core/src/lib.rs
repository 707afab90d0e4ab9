//! Exact finite geometry over GF(2^h): ovals and hyperovals, collineation
//! groups, the magic action on o-permutations, generalized fans and posies,
//! spreads of Tits quadrangles T2(O), q-clans, flocks and herds, and the
//! classification pipeline built on top of them.

pub mod classify;
pub mod collineation;
pub mod error;
pub mod exact_cover;
pub mod ext2;
pub mod fans;
pub mod flocks;
pub mod gfield;
pub mod magic;
pub mod ovals;
pub mod poly;
pub mod projspace;
pub mod serial;
pub mod titsgq;

pub use error::{Error, Result};
pub use gfield::{Fe, Field, FieldElement};
