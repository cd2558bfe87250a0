//! Residual Wyner-Ziv coding for the quadratic-Gaussian problem with
//! arbitrarily distributed side information.
//!
//! The encoder dithers and folds the scaled source modulo `A`, quantizes it
//! with a channel-optimised LDPC code, quantizes the residue with an LDGM
//! code and sends the LDGM information bits. The decoder rebuilds the LDGM
//! codeword, folds away the side information and channel-decodes the LDPC
//! codeword from what is left.

pub mod bp;
pub mod codec;
pub mod design;
pub mod error;
pub mod graph;
pub mod lattice;
pub mod rbp;
pub mod sim;
pub mod source;

pub use error::{Error, Result};
