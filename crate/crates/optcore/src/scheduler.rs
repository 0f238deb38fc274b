//! Expands a [`MappingPlan`] into per-layer hardware event tallies under the
//! two weight-tuning disciplines.
//!
//! NRU retunes active MRs every stride op, so its weight-side traffic scales
//! with compute. RU loads each weight value once per residency round and
//! streams activations past it, so its weight-side traffic scales with the
//! weight count. Activation-side counts (laser, photodetector, ADC, buffer,
//! accumulation) are identical across the two modes.
//!
//! Neural weights live in NWM and program array-parallel: one tuning batch
//! per array load. Encoder weights live in HEMW, whose programming is
//! serial: one batch per weight event. `tuning_batches` carries that
//! distinction to the latency model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::mapper::{MappingPlan, PlanKind};

/// Weight-tuning discipline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TuningMode {
    Nru,
    Ru,
}

impl fmt::Display for TuningMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TuningMode::Nru => "nru",
            TuningMode::Ru => "ru",
        })
    }
}

impl FromStr for TuningMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "nru" => Ok(TuningMode::Nru),
            "ru" => Ok(TuningMode::Ru),
            other => Err(Error::InvalidArgument(format!(
                "unknown tuning mode {other:?}, expected nru or ru"
            ))),
        }
    }
}

/// Where the photodetector outputs get digitized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdcPolicy {
    /// One conversion per accumulation-group output (default: the
    /// cross-channel sum is digitized once).
    #[default]
    PerGroup,
    /// One conversion per photodetector read.
    PerArm,
}

/// Knobs for event expansion.
///
/// Stream depths amortize RU weight traffic across consecutive input frames
/// that reuse the same resident weights: depth 1 charges each frame the full
/// working set, depth `d` charges 1/d of it (rounded up).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleOptions {
    pub adc_policy: AdcPolicy,
    pub nwm_stream_depth: u64,
    pub hemw_stream_depth: u64,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self {
            adc_policy: AdcPolicy::PerGroup,
            nwm_stream_depth: 1,
            hemw_stream_depth: 1,
        }
    }
}

impl ScheduleOptions {
    /// Steady-state streaming operating point: neural weights amortized over
    /// a 5-frame window, the encoder matrix over a 1024-frame window.
    pub fn steady_stream() -> Self {
        Self {
            adc_policy: AdcPolicy::PerGroup,
            nwm_stream_depth: 5,
            hemw_stream_depth: 1024,
        }
    }

    fn depth_for(&self, kind: PlanKind) -> u64 {
        match kind {
            PlanKind::Encoder => self.hemw_stream_depth.max(1),
            _ => self.nwm_stream_depth.max(1),
        }
    }
}

/// Per-layer hardware event tallies.
///
/// `tuning_batches` counts array-load latencies (parallel NWM programming
/// retunes the whole array in one batch; serial HEMW programming takes one
/// batch per weight event). `streaming_cycles` is the activation-streaming
/// portion of `cycles`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventCounts {
    pub tuning_events: u64,
    pub dac_conversions: u64,
    pub adc_conversions: u64,
    pub laser_symbols: u64,
    pub pd_reads: u64,
    pub nwm_reads: u64,
    pub hemw_reads: u64,
    pub buffer_accesses: u64,
    pub accum_ops: u64,
    pub cycles: u64,
    pub tuning_batches: u64,
    pub streaming_cycles: u64,
}

impl EventCounts {
    pub fn add(&mut self, other: &EventCounts) {
        self.tuning_events += other.tuning_events;
        self.dac_conversions += other.dac_conversions;
        self.adc_conversions += other.adc_conversions;
        self.laser_symbols += other.laser_symbols;
        self.pd_reads += other.pd_reads;
        self.nwm_reads += other.nwm_reads;
        self.hemw_reads += other.hemw_reads;
        self.buffer_accesses += other.buffer_accesses;
        self.accum_ops += other.accum_ops;
        self.cycles += other.cycles;
        self.tuning_batches += other.tuning_batches;
        self.streaming_cycles += other.streaming_cycles;
    }

    pub fn sum<'a>(counts: impl IntoIterator<Item = &'a EventCounts>) -> EventCounts {
        let mut total = EventCounts::default();
        for c in counts {
            total.add(c);
        }
        total
    }
}

fn activation_side(plan: &MappingPlan, opts: &ScheduleOptions) -> EventCounts {
    let laser = plan.stride_ops_total * plan.slots_per_stride_op as u64;
    let pd = plan.stride_ops_total * plan.arms_per_stride as u64;
    let outputs = plan.outputs();
    let adc = match opts.adc_policy {
        AdcPolicy::PerGroup => outputs,
        AdcPolicy::PerArm => pd,
    };
    EventCounts {
        laser_symbols: laser,
        pd_reads: pd,
        adc_conversions: adc,
        accum_ops: pd - outputs,
        buffer_accesses: plan.macs_total + outputs,
        ..EventCounts::default()
    }
}

fn route_weight_reads(counts: &mut EventCounts, kind: PlanKind, reads: u64) {
    match kind {
        PlanKind::Encoder => counts.hemw_reads = reads,
        _ => counts.nwm_reads = reads,
    }
}

/// NRU: every stride op reprograms the MR slots it occupies, so weight-side
/// events equal stride ops times the slots each one uses (idle conv slots
/// are never programmed; FC/encoder arms are programmed full, pads included).
pub fn schedule_nru(plan: &MappingPlan) -> EventCounts {
    schedule_nru_with(plan, &ScheduleOptions::default())
}

pub fn schedule_nru_with(plan: &MappingPlan, opts: &ScheduleOptions) -> EventCounts {
    let mut counts = activation_side(plan, opts);
    let tuning = plan.stride_ops_total * plan.slots_per_stride_op as u64;
    counts.tuning_events = tuning;
    counts.dac_conversions = tuning;
    route_weight_reads(&mut counts, plan.kind, tuning);
    counts.cycles = plan.cycles;
    counts.streaming_cycles = plan.cycles;
    counts.tuning_batches = match plan.kind {
        PlanKind::Encoder => tuning,
        _ => plan.cycles,
    };
    counts
}

/// RU residency rounds: how many array loads the weight working set needs.
pub fn residency_rounds(plan: &MappingPlan) -> u64 {
    plan.weight_values_total.div_ceil(plan.array_capacity as u64)
}

/// RU: each weight value is tuned once per frame window (working sets are
/// partitioned across residency rounds, never revisited), and stream depth
/// spreads that cost over the frames sharing the residency.
pub fn schedule_ru(plan: &MappingPlan) -> EventCounts {
    schedule_ru_with(plan, &ScheduleOptions::default())
}

pub fn schedule_ru_with(plan: &MappingPlan, opts: &ScheduleOptions) -> EventCounts {
    let mut counts = activation_side(plan, opts);
    let depth = opts.depth_for(plan.kind);
    let tuning = plan.weight_values_total.div_ceil(depth);
    counts.tuning_events = tuning;
    counts.dac_conversions = tuning;
    route_weight_reads(&mut counts, plan.kind, tuning);
    let rounds = residency_rounds(plan);
    counts.cycles = rounds + plan.cycles;
    counts.streaming_cycles = plan.cycles;
    counts.tuning_batches = match plan.kind {
        PlanKind::Encoder => tuning,
        _ => rounds.div_ceil(depth),
    };
    counts
}

/// Per-layer event tallies for a whole network, order preserved.
pub fn schedule_network(plans: &[MappingPlan], mode: TuningMode) -> Vec<EventCounts> {
    schedule_network_with(plans, mode, &ScheduleOptions::default())
}

pub fn schedule_network_with(
    plans: &[MappingPlan],
    mode: TuningMode,
    opts: &ScheduleOptions,
) -> Vec<EventCounts> {
    plans
        .iter()
        .map(|plan| match mode {
            TuningMode::Nru => schedule_nru_with(plan, opts),
            TuningMode::Ru => schedule_ru_with(plan, opts),
        })
        .collect()
}

/// Brute-force enumeration oracle: walks the layer cycle by cycle (and, for
/// RU, residency round by residency round), tallying events as they happen
/// instead of using the closed forms above. Intended for plans with modest
/// cycle counts.
pub fn cycle_walk_oracle(
    plan: &MappingPlan,
    mode: TuningMode,
    opts: &ScheduleOptions,
) -> EventCounts {
    let mut counts = EventCounts::default();
    let mut remaining = plan.stride_ops_total;
    let mut walked_pd = 0u64;
    while remaining > 0 {
        let active = remaining.min(plan.strides_per_cycle);
        remaining -= active;
        counts.cycles += 1;
        counts.streaming_cycles += 1;
        counts.laser_symbols += active * plan.slots_per_stride_op as u64;
        walked_pd += active * plan.arms_per_stride as u64;
        if mode == TuningMode::Nru {
            counts.tuning_events += active * plan.slots_per_stride_op as u64;
            counts.tuning_batches += match plan.kind {
                PlanKind::Encoder => active * plan.slots_per_stride_op as u64,
                _ => 1,
            };
        }
    }
    counts.pd_reads = walked_pd;
    let outputs = walked_pd / plan.accumulation_fanin;
    counts.adc_conversions = match opts.adc_policy {
        AdcPolicy::PerGroup => outputs,
        AdcPolicy::PerArm => walked_pd,
    };
    counts.accum_ops = walked_pd - outputs;
    // One buffer read per MAC consumed plus one write per walked output.
    counts.buffer_accesses = plan.macs_total + outputs;

    if mode == TuningMode::Ru {
        let depth = opts.depth_for(plan.kind);
        let mut weights_left = plan.weight_values_total;
        let mut rounds = 0u64;
        while weights_left > 0 {
            let loaded = weights_left.min(plan.array_capacity as u64);
            weights_left -= loaded;
            rounds += 1;
        }
        counts.cycles += rounds;
        let mut tuning = 0u64;
        let mut charged = 0u64;
        while charged < plan.weight_values_total {
            let step = depth.min(plan.weight_values_total - charged);
            charged += step;
            tuning += 1;
        }
        counts.tuning_events = tuning;
        counts.tuning_batches = match plan.kind {
            PlanKind::Encoder => tuning,
            _ => {
                let mut batches = 0u64;
                let mut r = rounds;
                while r > 0 {
                    r -= r.min(depth);
                    batches += 1;
                }
                batches
            }
        };
    }
    counts.dac_conversions = counts.tuning_events;
    match plan.kind {
        PlanKind::Encoder => counts.hemw_reads = counts.tuning_events,
        _ => counts.nwm_reads = counts.tuning_events,
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapper::{map_conv, map_encoder, map_fc, plan_network};
    use crate::model::{resnet18_preset, LayerSpec, OCBGeometry, PrecisionConfig};

    fn conv_plan() -> MappingPlan {
        let layer = LayerSpec::Conv {
            kernel_size: 3,
            in_channels: 64,
            out_channels: 64,
            out_height: 56,
            out_width: 56,
            stride_step: 1,
        };
        map_conv(&layer, 0, &OCBGeometry::default()).unwrap()
    }

    fn fc_plan(inf: usize, outf: usize) -> MappingPlan {
        map_fc(
            &LayerSpec::FullyConnected {
                in_features: inf,
                out_features: outf,
            },
            0,
            &OCBGeometry::default(),
        )
        .unwrap()
    }

    #[test]
    fn nru_conv_counts() {
        let counts = schedule_nru(&conv_plan());
        assert_eq!(counts.tuning_events, 115_605_504);
        assert_eq!(counts.dac_conversions, 115_605_504);
        assert_eq!(counts.nwm_reads, 115_605_504);
        assert_eq!(counts.laser_symbols, 115_605_504);
        assert_eq!(counts.hemw_reads, 0);
        assert_eq!(counts.pd_reads, 12_845_056);
        assert_eq!(counts.adc_conversions, 200_704);
        assert_eq!(counts.accum_ops, 12_845_056 - 200_704);
        assert_eq!(counts.buffer_accesses, 115_605_504 + 200_704);
        assert_eq!(counts.cycles, 22_301);
        assert_eq!(counts.tuning_batches, 22_301);
    }

    #[test]
    fn ru_conv_counts() {
        let plan = conv_plan();
        let counts = schedule_ru(&plan);
        assert_eq!(residency_rounds(&plan), 8);
        assert_eq!(counts.tuning_events, 36_864);
        assert_eq!(counts.cycles, 8 + 22_301);
        assert_eq!(counts.streaming_cycles, 22_301);
        assert_eq!(counts.tuning_batches, 8);
        let nru = schedule_nru(&plan);
        assert_eq!(nru.tuning_events / counts.tuning_events, 3136);
        assert_eq!(3136, 56 * 56);
    }

    #[test]
    fn tiny_fc_modes_agree() {
        let plan = fc_plan(9, 1);
        let nru = schedule_nru(&plan);
        let ru = schedule_ru(&plan);
        assert_eq!(nru.tuning_events, 9);
        assert_eq!(nru.pd_reads, 1);
        assert_eq!(nru.adc_conversions, 1);
        assert_eq!(nru.accum_ops, 0);
        assert_eq!(ru.tuning_events, 9);
    }

    #[test]
    fn padded_fc_ru_strictly_cheaper_even_in_one_cycle() {
        let plan = fc_plan(10, 1);
        assert_eq!(plan.cycles, 1);
        assert_eq!(schedule_nru(&plan).tuning_events, 18);
        assert_eq!(schedule_ru(&plan).tuning_events, 10);
    }

    #[test]
    fn encoder_counts_both_modes() {
        let plan = map_encoder(512, 1024, 0, &OCBGeometry::default());
        let nru = schedule_nru(&plan);
        assert_eq!(nru.tuning_events, 525_312);
        assert_eq!(nru.hemw_reads, 525_312);
        assert_eq!(nru.nwm_reads, 0);
        assert_eq!(nru.tuning_batches, 525_312);
        assert_eq!(nru.pd_reads, 58_368);
        assert_eq!(nru.adc_conversions, 1024);

        let ru = schedule_ru(&plan);
        assert_eq!(ru.tuning_events, 524_288);
        assert_eq!(ru.tuning_batches, 524_288);
        assert_eq!(residency_rounds(&plan), 102);
        assert_eq!(ru.cycles, 102 + 102);

        let steady = schedule_ru_with(&plan, &ScheduleOptions::steady_stream());
        assert_eq!(steady.tuning_events, 512);
        assert_eq!(steady.tuning_batches, 512);
        assert_eq!(steady.hemw_reads, 512);
    }

    #[test]
    fn activation_side_is_mode_invariant() {
        let net = resnet18_preset(PrecisionConfig::new(3, 4), 1024);
        let plans = plan_network(&net, &net.geometry).unwrap();
        for plan in &plans {
            let nru = schedule_nru(plan);
            let ru = schedule_ru(plan);
            assert_eq!(nru.laser_symbols, ru.laser_symbols);
            assert_eq!(nru.pd_reads, ru.pd_reads);
            assert_eq!(nru.adc_conversions, ru.adc_conversions);
            assert_eq!(nru.buffer_accesses, ru.buffer_accesses);
            assert_eq!(nru.accum_ops, ru.accum_ops);
            assert!(ru.tuning_events <= nru.tuning_events);
        }
    }

    #[test]
    fn preset_totals() {
        let net = resnet18_preset(PrecisionConfig::new(3, 4), 1024);
        let plans = plan_network(&net, &net.geometry).unwrap();
        let nru = schedule_network(&plans, TuningMode::Nru);
        let neural = EventCounts::sum(&nru[..20]);
        assert_eq!(neural.tuning_events, 1_813_561_344);
        assert_eq!(neural.adc_conversions, 2_483_712);
        assert_eq!(neural.pd_reads, 219_971_584);
        assert_eq!(neural.accum_ops, 217_487_872);
        assert_eq!(neural.buffer_accesses, 1_816_045_056);
        assert_eq!(neural.tuning_batches, 381_907);
        assert_eq!(EventCounts::sum(&nru).tuning_batches, 907_219);

        let steady = ScheduleOptions::steady_stream();
        let ru = schedule_network_with(&plans, TuningMode::Ru, &steady);
        let ru_neural = EventCounts::sum(&ru[..20]);
        assert_eq!(ru_neural.tuning_events, 2_233_392);
        assert_eq!(ru_neural.tuning_batches, 442);
        assert_eq!(ru[20].tuning_events, 512);
    }

    #[test]
    fn per_arm_adc_policy() {
        let opts = ScheduleOptions {
            adc_policy: AdcPolicy::PerArm,
            ..ScheduleOptions::default()
        };
        let counts = schedule_nru_with(&conv_plan(), &opts);
        assert_eq!(counts.adc_conversions, counts.pd_reads);
    }

    #[test]
    fn empty_network_schedules_empty() {
        assert!(schedule_network(&[], TuningMode::Nru).is_empty());
    }

    #[test]
    fn encoder_has_largest_ru_weight_traffic_per_mac() {
        let net = resnet18_preset(PrecisionConfig::new(3, 4), 1024);
        let plans = plan_network(&net, &net.geometry).unwrap();
        let ratios: Vec<f64> = plans
            .iter()
            .map(|p| {
                let c = schedule_ru(p);
                (c.tuning_events + c.dac_conversions) as f64 / p.macs_total as f64
            })
            .collect();
        let encoder_ratio = ratios[20];
        for r in &ratios[..20] {
            assert!(encoder_ratio > *r);
        }
    }

    #[test]
    fn walk_oracle_matches_closed_forms() {
        let geom = OCBGeometry::default();
        let mut plans = vec![
            fc_plan(9, 1),
            fc_plan(10, 1),
            fc_plan(512, 1000),
            map_encoder(512, 1024, 0, &geom),
            map_encoder(128, 64, 0, &geom),
        ];
        for k in [1usize, 3, 5, 7] {
            let layer = LayerSpec::Conv {
                kernel_size: k,
                in_channels: 16,
                out_channels: 8,
                out_height: 14,
                out_width: 14,
                stride_step: 1,
            };
            plans.push(map_conv(&layer, 0, &geom).unwrap());
        }
        for opts in [ScheduleOptions::default(), ScheduleOptions::steady_stream()] {
            for plan in &plans {
                assert!(plan.cycles <= 10_000);
                assert_eq!(
                    cycle_walk_oracle(plan, TuningMode::Nru, &opts),
                    schedule_nru_with(plan, &opts),
                );
                assert_eq!(
                    cycle_walk_oracle(plan, TuningMode::Ru, &opts),
                    schedule_ru_with(plan, &opts),
                );
            }
        }
    }

    #[test]
    fn deterministic() {
        let plan = conv_plan();
        assert_eq!(schedule_nru(&plan), schedule_nru(&plan));
        assert_eq!(schedule_ru(&plan), schedule_ru(&plan));
    }
}
