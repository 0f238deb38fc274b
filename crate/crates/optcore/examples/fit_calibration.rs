//! Fit the default per-event calibration from whole-network anchors and show
//! how well the fitted table reproduces them.

use optcore::cost::{fit_default_calibration, summarize, CalibrationAnchors};
use optcore::mapper::plan_network;
use optcore::model::{resnet18_preset, OCBGeometry, PrecisionConfig};
use optcore::scheduler::TuningMode;

fn main() -> optcore::Result<()> {
    let anchors = CalibrationAnchors::reference();
    let cal = fit_default_calibration(&anchors)?;

    println!("fitted per-event calibration:");
    println!("  e_tune              = {:.6e} J", cal.e_tune);
    println!("  e_dac               = {:.6e} J", cal.e_dac);
    println!("  e_adc               = {:.6e} J", cal.e_adc);
    println!("  e_laser             = {:.6e} J", cal.e_laser);
    println!("  e_pd                = {:.6e} J", cal.e_pd);
    println!("  e_nwm               = {:.6e} J", cal.e_nwm);
    println!("  e_hemw              = {:.6e} J", cal.e_hemw);
    println!("  e_buf               = {:.6e} J", cal.e_buf);
    println!("  e_accum             = {:.6e} J", cal.e_accum);
    println!("  t_tune              = {:.6e} s", cal.t_tune);
    println!("  t_stream            = {:.6e} s", cal.t_stream);
    println!("  t_adc               = {:.6e} s", cal.t_adc);
    println!("  ble_energy_per_byte = {:.6e} J/B", cal.ble_energy_per_byte);
    println!();

    let net = resnet18_preset(PrecisionConfig::new(3, 4), 1024);
    let plans = plan_network(&net, &OCBGeometry::default())?;
    let nru = summarize(&net, &plans, TuningMode::Nru, &cal)?;
    let ru = summarize(&net, &plans, TuningMode::Ru, &cal)?;

    let rel = |got: f64, want: f64| (got - want) / want * 100.0;
    println!("anchor reproduction on the preset network:");
    println!(
        "  per-frame energy, tuning-dominated mode: {:.4} J  (anchor {:.4} J, {:+.2}%)",
        nru.totals.energy.total,
        anchors.nru_energy_j,
        rel(nru.totals.energy.total, anchors.nru_energy_j)
    );
    println!(
        "  per-frame energy, residency mode:        {:.4e} J  (anchor {:.4e} J, {:+.2}%)",
        ru.totals.energy.total,
        anchors.ru_energy_j,
        rel(ru.totals.energy.total, anchors.ru_energy_j)
    );
    println!(
        "  per-frame latency, tuning-dominated:     {:.4} s  (anchor {:.4} s, {:+.2}%)",
        nru.totals.latency.total,
        anchors.nru_time_s,
        rel(nru.totals.latency.total, anchors.nru_time_s)
    );
    println!(
        "  per-frame latency, residency mode:       {:.4e} s  (anchor {:.4e} s, {:+.2}%)",
        ru.totals.latency.total,
        anchors.ru_time_s,
        rel(ru.totals.latency.total, anchors.ru_time_s)
    );
    let enc_nru = nru.layers.last().expect("preset has layers");
    let enc_ru = ru.layers.last().expect("preset has layers");
    println!(
        "  encoder energy ratio between modes:       {:.1}  (anchor {:.1})",
        enc_nru.energy.total / enc_ru.energy.total,
        anchors.symbolic_energy_ratio
    );
    Ok(())
}
