//! Wireless readout cost: raw image frame versus compact hypervector payloads.

use optcore::cost::default_calibration;
use optcore::link::comparison_table;

fn main() -> optcore::Result<()> {
    let cal = default_calibration()?;
    let dims = [512usize, 1024, 2048, 8192];
    let table = comparison_table(&dims, 4, &cal)?;

    println!("payload        elems    bytes   energy_mJ   image/this");
    for row in &table.rows {
        println!(
            "{:<12} {:>8} {:>8} {:>11.4} {:>12.1}",
            row.payload, row.vector_size, row.payload_bytes, row.energy_mj, row.ratio_vs_image
        );
    }
    println!();
    println!(
        "sending a 1024-d, 4-bit hypervector instead of the raw frame cuts link\n\
         energy by the payload ratio ({}x), independent of the per-byte cost",
        (table.rows[0].payload_bytes / table.rows[2].payload_bytes)
    );
    Ok(())
}
