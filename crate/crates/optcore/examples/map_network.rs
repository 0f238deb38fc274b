//! Shows how each layer lands on the array: arms per stride op, stride ops
//! per cycle, idle MRs, and the resulting cycle counts.

use optcore::mapper::plan_network;
use optcore::model::{resnet18_preset, PrecisionConfig};

fn main() -> anyhow::Result<()> {
    let net = resnet18_preset(PrecisionConfig::new(3, 4), 1024);
    let plans = plan_network(&net, &net.geometry)?;

    println!(
        "{:<28} {:>5} {:>7} {:>9} {:>12} {:>8}",
        "layer", "arms", "strides", "idle/bank", "stride ops", "cycles"
    );
    for (layer, plan) in net.layers.iter().zip(&plans) {
        println!(
            "{:<28} {:>5} {:>7} {:>9} {:>12} {:>8}",
            layer.label(plan.layer_ref),
            plan.arms_per_stride,
            plan.strides_per_cycle,
            plan.idle_mrs_per_bank,
            plan.stride_ops_total,
            plan.cycles
        );
    }
    let total_cycles: u64 = plans.iter().map(|p| p.cycles).sum();
    let peak = plans.iter().map(|p| p.active_mrs_per_cycle).max().unwrap_or(0);
    println!(
        "\ntotal {} cycles; peak {} active MRs/cycle (array capacity {})",
        total_cycles,
        peak,
        net.geometry.total_mrs()
    );
    Ok(())
}
