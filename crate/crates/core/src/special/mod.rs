//! Special functions used by the closed-form Landau–Zener solution.

pub mod dd;
pub mod gamma;
pub mod kummer;

pub use gamma::{gamma, ln_gamma, recip_gamma};
pub use kummer::{kummer_m, KummerError};
