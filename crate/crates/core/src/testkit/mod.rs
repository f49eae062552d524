//! Random instance generators and independent oracles for property suites.
//!
//! The oracles here deliberately avoid the production code paths they are
//! compared against: they resolve wiring by name at every step, enumerate
//! candidate assignments with plain odometers, and solve LTI loops with
//! nalgebra's LU decomposition.

pub mod gen;
pub mod oracle;
pub mod uav;

pub use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as Rng;

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
