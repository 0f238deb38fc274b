//! Layer-to-array placement. Each layer becomes a [`MappingPlan`]: how many
//! arms one stride op occupies, how many stride ops fit per cycle, idle MR
//! counts, and the cycle total.
//!
//! Placement rules per kernel: a 3x3 kernel fills one 9-MR arm (6 stride ops
//! per bank), a 5x5 kernel spans 3 arms with 2 slots idle per stride op
//! (2 per bank), a 7x7 kernel spans 6 arms, a whole bank, with 5 slots idle.
//! 1x1 downsample convs use the 3x3 rule with 8 of 9 slots idle. Fully
//! connected and encoder layers split each output over `ceil(in/9)` arm
//! segments, zero-padding the last one, and all 576 arms work independently.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{LayerSpec, NetworkSpec, OCBGeometry};

/// Which scheduling family a plan belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanKind {
    Conv,
    FullyConnected,
    Encoder,
}

/// One layer's placement on the array.
///
/// `stride_ops_total` counts dot-product groups: one input-channel kernel
/// patch for convs, one 9-wide segment of one output neuron for FC/encoder
/// layers. Cross-arm and cross-channel partials meet in the accumulation
/// unit (`accumulation_fanin` partials per output value).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MappingPlan {
    pub layer_ref: usize,
    pub arms_per_stride: usize,
    pub strides_per_bank: usize,
    pub idle_mrs_per_bank: usize,
    pub stride_ops_total: u64,
    pub strides_per_cycle: u64,
    pub cycles: u64,
    pub active_mrs_per_cycle: u64,
    pub active_arms_per_cycle: u64,
    pub macs_total: u64,
    pub weight_values_total: u64,
    pub accumulation_fanin: u64,
    /// Encoder plans only: matrix-residency iterations (= cycles).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
    #[serde(skip)]
    pub kind: PlanKind,
    /// MR slots programmed per stride op (kernel area for convs, the full
    /// padded arm for FC/encoder segments).
    #[serde(skip)]
    pub slots_per_stride_op: usize,
    /// Total MRs in the array the plan was made for; bounds one residency
    /// round's weight working set.
    #[serde(skip)]
    pub array_capacity: usize,
}

impl MappingPlan {
    /// Output values the layer produces (accumulation-group results).
    pub fn outputs(&self) -> u64 {
        self.stride_ops_total * self.arms_per_stride as u64 / self.accumulation_fanin
    }
}

/// Places a convolution. One stride op is one input-channel kernel patch;
/// the `in_channels` partials per output position are summed electronically.
pub fn map_conv(layer: &LayerSpec, layer_ref: usize, geom: &OCBGeometry) -> Result<MappingPlan> {
    let LayerSpec::Conv {
        kernel_size,
        in_channels,
        out_channels,
        out_height,
        out_width,
        ..
    } = *layer
    else {
        return Err(Error::InvalidArgument("map_conv needs a conv layer".into()));
    };
    if !matches!(kernel_size, 1 | 3 | 5 | 7) {
        return Err(Error::KernelSize(kernel_size));
    }
    let kernel_area = kernel_size * kernel_size;
    let arms_per_stride = kernel_area.div_ceil(geom.mrs_per_arm);
    let strides_per_bank = geom.arms_per_bank / arms_per_stride;
    if strides_per_bank == 0 {
        return Err(Error::Validation(format!(
            "kernel {kernel_size}x{kernel_size} needs {arms_per_stride} arms but a bank has {}",
            geom.arms_per_bank
        )));
    }
    let leftover_arms = geom.arms_per_bank - strides_per_bank * arms_per_stride;
    let idle_mrs_per_bank = strides_per_bank * (arms_per_stride * geom.mrs_per_arm - kernel_area)
        + leftover_arms * geom.mrs_per_arm;
    let stride_ops_total =
        out_channels as u64 * out_height as u64 * out_width as u64 * in_channels as u64;
    let strides_per_cycle = (geom.banks * strides_per_bank) as u64;
    let full = stride_ops_total.min(strides_per_cycle);
    let plan = MappingPlan {
        layer_ref,
        arms_per_stride,
        strides_per_bank,
        idle_mrs_per_bank,
        stride_ops_total,
        strides_per_cycle,
        cycles: stride_ops_total.div_ceil(strides_per_cycle),
        active_mrs_per_cycle: full * kernel_area as u64,
        active_arms_per_cycle: full * arms_per_stride as u64,
        macs_total: stride_ops_total * kernel_area as u64,
        weight_values_total: (kernel_area * in_channels * out_channels) as u64,
        accumulation_fanin: (arms_per_stride * in_channels) as u64,
        iterations: None,
        kind: PlanKind::Conv,
        slots_per_stride_op: kernel_area,
        array_capacity: geom.total_mrs(),
    };
    debug_assert!(plan.active_mrs_per_cycle <= geom.total_mrs() as u64);
    Ok(plan)
}

fn map_segmented(
    in_features: usize,
    out_features: usize,
    layer_ref: usize,
    geom: &OCBGeometry,
    kind: PlanKind,
) -> MappingPlan {
    let segments = in_features.div_ceil(geom.mrs_per_arm) as u64;
    let stride_ops_total = out_features as u64 * segments;
    let strides_per_cycle = geom.total_arms() as u64;
    let full = stride_ops_total.min(strides_per_cycle);
    let cycles = stride_ops_total.div_ceil(strides_per_cycle);
    MappingPlan {
        layer_ref,
        arms_per_stride: 1,
        strides_per_bank: geom.arms_per_bank,
        idle_mrs_per_bank: 0,
        stride_ops_total,
        strides_per_cycle,
        cycles,
        active_mrs_per_cycle: full * geom.mrs_per_arm as u64,
        active_arms_per_cycle: full,
        macs_total: in_features as u64 * out_features as u64,
        weight_values_total: in_features as u64 * out_features as u64,
        accumulation_fanin: segments,
        iterations: if kind == PlanKind::Encoder {
            Some(cycles)
        } else {
            None
        },
        kind,
        slots_per_stride_op: geom.mrs_per_arm,
        array_capacity: geom.total_mrs(),
    }
}

/// Places a fully-connected layer: `ceil(in/9)` arm segments per output
/// neuron, accumulated electronically.
pub fn map_fc(layer: &LayerSpec, layer_ref: usize, geom: &OCBGeometry) -> Result<MappingPlan> {
    let LayerSpec::FullyConnected {
        in_features,
        out_features,
    } = *layer
    else {
        return Err(Error::InvalidArgument(
            "map_fc needs a fully-connected layer".into(),
        ));
    };
    Ok(map_segmented(
        in_features,
        out_features,
        layer_ref,
        geom,
        PlanKind::FullyConnected,
    ))
}

/// Places the hypervector encoder: the FC rule over the N x D matrix, with
/// the matrix resident in HEMW and refreshed every iteration.
pub fn map_encoder(n: usize, d: usize, layer_ref: usize, geom: &OCBGeometry) -> MappingPlan {
    map_segmented(n, d, layer_ref, geom, PlanKind::Encoder)
}

/// Plans every layer in order. Layers are never co-scheduled; the array runs
/// one layer at a time.
pub fn plan_network(net: &NetworkSpec, geom: &OCBGeometry) -> Result<Vec<MappingPlan>> {
    net.layers
        .iter()
        .enumerate()
        .map(|(i, layer)| match layer {
            LayerSpec::Conv { .. } => map_conv(layer, i, geom),
            LayerSpec::FullyConnected { .. } => map_fc(layer, i, geom),
            LayerSpec::Encoder {
                in_features,
                dimension,
            } => Ok(map_encoder(*in_features, *dimension, i, geom)),
        })
        .collect()
}
