#![no_std]

extern crate alloc;

pub mod arith;
pub mod catalog;
pub mod cert;
pub mod construct;
pub mod cyclo;
pub mod ecq;
pub mod error;
pub mod kummer;
pub mod localfield;
pub mod sieve;

pub use error::{Error, Result};
