//! Project a feature vector into hyperdimensional space through the same
//! integer arm path the simulator schedules, then sanity-check the result
//! against a plain matrix-vector product.

use optcore::hdc::{cosine_similarity, encode, generate_encoding, matvec_oracle, Hypervector};

fn main() -> optcore::Result<()> {
    let n = 32;
    let d = 1024;
    let matrix = generate_encoding(n, d, 42, 4)?;

    let features: Vec<i64> = (0..n as i64).map(|i| (i * 3) % 16 - 7).collect();
    let hv = encode(&features, &matrix)?;

    let oracle = matvec_oracle(&features, &matrix)?;
    assert_eq!(hv.values, oracle, "arm-path encoding must match the matvec");

    let shifted: Vec<i64> = features.iter().map(|&f| (f + 1).min(8)).collect();
    let hv_shifted = encode(&shifted, &matrix)?;

    let unrelated: Vec<i64> = (0..n as i64).map(|i| ((i * 7) % 16) - 8).collect();
    let hv_unrelated = encode(&unrelated, &matrix)?;

    println!("encoded {n} features into D = {d} (value_bits = 4, seed = 42)");
    println!("first 8 components: {:?}", &hv.values[..8]);
    println!();
    println!(
        "cos(x, x)         = {:+.4}",
        cosine_similarity(&hv, &hv)?
    );
    println!(
        "cos(x, x+1)       = {:+.4}  (small perturbation stays close)",
        cosine_similarity(&hv, &hv_shifted)?
    );
    println!(
        "cos(x, unrelated) = {:+.4}",
        cosine_similarity(&hv, &hv_unrelated)?
    );

    let bin: Hypervector = hv.binarized();
    let agree = bin
        .values
        .iter()
        .zip(&hv.values)
        .filter(|(&b, &v)| (v >= 0) == (b == 1))
        .count();
    println!();
    println!(
        "binarized hypervector agrees with component signs on {agree}/{d} entries"
    );
    Ok(())
}
