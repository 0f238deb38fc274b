//! Walks one activation through the functional datapath: flash quantizer,
//! light driver, a programmed arm's dot product, electronic accumulation,
//! and the requantize step that feeds the next layer.

use optcore::photonics::{
    accumulate, arm_mac, cbc_quantize, default_requant_scale, ldu_intensity, relu_requantize,
};

fn main() -> anyhow::Result<()> {
    let v_min = 0.0;
    let v_max = 1.0;
    for v in [0.03, 0.27, 0.5, 0.92] {
        let code = cbc_quantize(v, v_min, v_max)?;
        println!(
            "analog {v:.2} V -> thermometer {} -> code {:2} -> intensity {:2}",
            code.thermometer.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>(),
            code.code,
            ldu_intensity(&code)
        );
    }

    // One 3x3 kernel patch on one arm: signed 4-bit weights, 4-bit codes.
    let weights = [3i64, -7, 5, 0, 2, -1, 4, -6, 1];
    let activations = [12i64, 0, 15, 7, 3, 9, 1, 11, 5];
    let partial = arm_mac(&weights, &activations, 4, 4)?;
    println!("\narm dot product: {partial}");

    // Cross-channel partials from three arms meet in the accumulation unit.
    let partials = [partial, -14, 37];
    let sum = accumulate(&partials)?;
    let (num, den) = default_requant_scale(sum.abs().max(1));
    let next = relu_requantize(sum, num, den, 4)?;
    println!("accumulated {sum}, requantized to next-layer code {next} (scale {num}/{den})");
    Ok(())
}
