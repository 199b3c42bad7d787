//! Fast single-snapshot 2D harmonic recovery for sparse planar arrays.
//!
//! A sparse array is a random subset of a half-wavelength uniform
//! rectangular array (URA). With uniform harmonic grids the Gram matrix
//! `D_sᴴ D_s` of the row-subsampled Kronecker dictionary is
//! block-circulant with circulant blocks (BCCB), so every Gram-vector
//! product inside ISTA, FISTA and ADMM can be done with a pair of 2D FFTs
//! instead of a dense `L × L` multiply.
//!
//! Module map:
//!
//! - [`array`]: geometry, steering vectors, snapshot synthesis.
//! - [`dictionary`]: uniform grids, subdictionaries, the subsampled dictionary and its dense Gram.
//! - [`bccb`]: the BCCB operator (first column, eigenvalues, fast matvec, algebra).
//! - [`solvers`]: ISTA / FISTA / ADMM with interchangeable dense and FFT backends.
//! - [`experiment`]: seeded runtime / accuracy sweeps comparing the two backends.

pub mod array;
pub mod bccb;
pub mod dense;
pub mod dictionary;
mod error;
pub mod experiment;
pub mod fft2;
pub mod solvers;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Default cap on any single dense allocation: 8 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 8 << 30;

/// Byte budget for dense allocations (dictionary rows, Gram matrices).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryBudget(pub u64);

impl Default for MemoryBudget {
    fn default() -> Self {
        MemoryBudget(DEFAULT_MEMORY_BUDGET)
    }
}

impl MemoryBudget {
    pub fn unlimited() -> Self {
        MemoryBudget(u64::MAX)
    }

    /// Bytes needed for `entries` double-precision complex numbers.
    pub fn complex_bytes(entries: u64) -> u64 {
        entries.saturating_mul(std::mem::size_of::<Complex64>() as u64)
    }

    pub fn admits(&self, bytes: u64) -> bool {
        bytes <= self.0
    }

    pub fn check(&self, bytes: u64) -> Result<()> {
        if self.admits(bytes) {
            Ok(())
        } else {
            Err(Error::ResourceExceeded {
                required: bytes,
                budget: self.0,
            })
        }
    }
}
