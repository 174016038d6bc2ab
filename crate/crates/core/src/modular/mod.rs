//! Prime fields, Chinese remaindering, rational reconstruction and nullspaces mod p.

mod crt;
mod linalg;
mod prime;

pub use crt::{crt_combine, rational_reconstruct, rational_reconstruct_balanced, CrtAccumulator};
pub use linalg::{
    echelon, nullspace_mod, nullspace_mod_with, nullspace_residues, rank_mod, Echelon,
    ResidueVector,
};
pub use prime::{is_prime_u64, nth_prime, PrimeContext, PrimeField, MODULUS_LIMIT};
