//! End-to-end simulation of the reference workload under both tuning
//! disciplines, printing the headline totals the cost model is fitted to.

use optcore::cost::{default_calibration, summarize};
use optcore::mapper::plan_network;
use optcore::model::{resnet18_preset, PrecisionConfig};
use optcore::scheduler::TuningMode;

fn main() -> anyhow::Result<()> {
    let net = resnet18_preset(PrecisionConfig::new(3, 4), 1024);
    let plans = plan_network(&net, &net.geometry)?;
    let cal = default_calibration()?;

    println!(
        "{}: {} layers, {} MACs",
        net.name,
        net.layers.len(),
        net.total_macs()
    );
    for mode in [TuningMode::Nru, TuningMode::Ru] {
        let report = summarize(&net, &plans, mode, &cal)?;
        println!(
            "\nmode {}: energy {:.4} J, time {:.4} s, {:.1} GOPS/W",
            mode,
            report.totals.energy.total,
            report.totals.latency.total,
            report.gops_per_watt
        );
        println!(
            "  symbolic share: {:.1}% of energy, {:.1}% of time",
            report.shares.symbolic_energy_pct, report.shares.symbolic_time_pct
        );
        println!(
            "  tuning {:.4} s, streaming {:.4} s, conversion {:.4} s",
            report.totals.latency.tuning_time,
            report.totals.latency.stream_time,
            report.totals.latency.conversion_time
        );
    }
    Ok(())
}
