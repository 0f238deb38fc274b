//! Classification accuracy of the hyperdimensional pipeline across encoding
//! dimension and activation precision, on the bundled synthetic task.
//!
//! Optional first argument: RNG seed (default 7). The seed drives both the
//! task sampling and the encoding matrices, so a fixed seed reproduces the
//! grid exactly.

use optcore::cli::{DEFAULT_SWEEP_DIMS, DEFAULT_SWEEP_SEED, SWEEP_PRECISIONS};
use optcore::hdc::{sweep_accuracy, SyntheticTask};

fn main() -> optcore::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse::<u64>().expect("seed must be a non-negative integer"))
        .unwrap_or(DEFAULT_SWEEP_SEED);

    let task = SyntheticTask::reference();
    let grid = sweep_accuracy(&task, &DEFAULT_SWEEP_DIMS, &SWEEP_PRECISIONS, seed)?;
    print!("{}", grid.to_csv());
    Ok(())
}
