//! Workload and geometry descriptions: precision configs, layer shapes,
//! networks, the optical core's structural constants, and memory capacities.
//!
//! Everything here is a plain value type with serde round-tripping; the
//! network config file format is exactly these structs as JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weight/activation bit widths, written `[W:A]` on the command line.
///
/// Hardware-faithful configurations are `activation_bits = 4` (the flash
/// quantizer output width) with `weight_bits` in {2, 3, 4}. Wider values are
/// accepted for algorithm-side sweeps only and must set `study_only`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    pub weight_bits: u32,
    pub activation_bits: u32,
    #[serde(default)]
    pub study_only: bool,
}

impl PrecisionConfig {
    pub fn new(weight_bits: u32, activation_bits: u32) -> Self {
        let mut cfg = Self {
            weight_bits,
            activation_bits,
            study_only: false,
        };
        cfg.study_only = !cfg.hardware_faithful();
        cfg
    }

    /// True for configurations the device can actually run.
    pub fn hardware_faithful(&self) -> bool {
        self.activation_bits == 4 && matches!(self.weight_bits, 2 | 3 | 4)
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.weight_bits, 2 | 3 | 4 | 8 | 32) {
            return Err(Error::Validation(format!(
                "weight_bits {} not in {{2, 3, 4, 8, 32}}",
                self.weight_bits
            )));
        }
        if !matches!(self.activation_bits, 4 | 8 | 32) {
            return Err(Error::Validation(format!(
                "activation_bits {} not in {{4, 8, 32}}",
                self.activation_bits
            )));
        }
        if !self.hardware_faithful() && !self.study_only {
            return Err(Error::Validation(format!(
                "precision [{}:{}] is not hardware-faithful; set study_only",
                self.weight_bits, self.activation_bits
            )));
        }
        Ok(())
    }

    /// Parses the `W:A` notation, e.g. `3:4`.
    pub fn parse(s: &str) -> Result<Self> {
        let (w, a) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("precision `{s}` is not W:A")))?;
        let weight_bits = w
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad weight bits in `{s}`")))?;
        let activation_bits = a
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad activation bits in `{s}`")))?;
        let cfg = Self::new(weight_bits, activation_bits);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One layer of a workload.
///
/// Convolutions carry their *output* spatial extent explicitly so the
/// simulator never has to guess padding conventions. `kernel_size` 1 covers
/// residual downsample convolutions; it is placed with the 3x3 rule and the
/// unused MR slots idle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum LayerSpec {
    Conv {
        kernel_size: usize,
        in_channels: usize,
        out_channels: usize,
        out_height: usize,
        out_width: usize,
        stride_step: usize,
    },
    FullyConnected {
        in_features: usize,
        out_features: usize,
    },
    Encoder {
        in_features: usize,
        dimension: usize,
    },
}

impl LayerSpec {
    pub fn is_encoder(&self) -> bool {
        matches!(self, LayerSpec::Encoder { .. })
    }

    /// Number of stored weight values.
    pub fn weight_values(&self) -> u64 {
        match *self {
            LayerSpec::Conv {
                kernel_size,
                in_channels,
                out_channels,
                ..
            } => (kernel_size * kernel_size * in_channels * out_channels) as u64,
            LayerSpec::FullyConnected {
                in_features,
                out_features,
            } => (in_features * out_features) as u64,
            LayerSpec::Encoder {
                in_features,
                dimension,
            } => (in_features * dimension) as u64,
        }
    }

    /// Exact multiply-accumulate count of the layer.
    pub fn macs(&self) -> u64 {
        match *self {
            LayerSpec::Conv {
                out_height,
                out_width,
                ..
            } => self.weight_values() * (out_height * out_width) as u64,
            _ => self.weight_values(),
        }
    }

    /// Number of output values the layer produces.
    pub fn outputs(&self) -> u64 {
        match *self {
            LayerSpec::Conv {
                out_channels,
                out_height,
                out_width,
                ..
            } => (out_channels * out_height * out_width) as u64,
            LayerSpec::FullyConnected { out_features, .. } => out_features as u64,
            LayerSpec::Encoder { dimension, .. } => dimension as u64,
        }
    }

    /// Weight storage footprint at the given bit width, in bytes (rounded up).
    pub fn weight_bytes(&self, weight_bits: u32) -> u64 {
        (self.weight_values() * weight_bits as u64).div_ceil(8)
    }

    /// Short stable label used in reports.
    pub fn label(&self, index: usize) -> String {
        match *self {
            LayerSpec::Conv {
                kernel_size,
                in_channels,
                out_channels,
                out_height,
                out_width,
                ..
            } => format!(
                "{index:02}-conv{kernel_size}x{kernel_size}-{in_channels}to{out_channels}-{out_height}x{out_width}"
            ),
            LayerSpec::FullyConnected {
                in_features,
                out_features,
            } => format!("{index:02}-fc-{in_features}to{out_features}"),
            LayerSpec::Encoder {
                in_features,
                dimension,
            } => format!("{index:02}-encoder-{in_features}to{dimension}"),
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        match *self {
            LayerSpec::Conv {
                kernel_size,
                in_channels,
                out_channels,
                out_height,
                out_width,
                stride_step,
            } => {
                if !matches!(kernel_size, 1 | 3 | 5 | 7) {
                    return Err(Error::KernelSize(kernel_size));
                }
                if in_channels == 0
                    || out_channels == 0
                    || out_height == 0
                    || out_width == 0
                    || stride_step == 0
                {
                    return Err(Error::Validation(format!(
                        "layer {index}: conv dimensions must be >= 1"
                    )));
                }
            }
            LayerSpec::FullyConnected {
                in_features,
                out_features,
            } => {
                if in_features == 0 || out_features == 0 {
                    return Err(Error::Validation(format!(
                        "layer {index}: fc dimensions must be >= 1"
                    )));
                }
            }
            LayerSpec::Encoder {
                in_features,
                dimension,
            } => {
                if in_features == 0 || dimension == 0 {
                    return Err(Error::Validation(format!(
                        "layer {index}: encoder dimensions must be >= 1"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Structural constants of the optical core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OCBGeometry {
    pub banks: usize,
    pub bank_rows: usize,
    pub bank_cols: usize,
    pub arms_per_bank: usize,
    pub mrs_per_arm: usize,
    pub wavelength_channels: usize,
}

impl Default for OCBGeometry {
    fn default() -> Self {
        Self {
            banks: 96,
            bank_rows: 12,
            bank_cols: 8,
            arms_per_bank: 6,
            mrs_per_arm: 9,
            wavelength_channels: 9,
        }
    }
}

impl OCBGeometry {
    pub fn total_arms(&self) -> usize {
        self.banks * self.arms_per_bank
    }

    pub fn total_mrs(&self) -> usize {
        self.total_arms() * self.mrs_per_arm
    }

    /// Peak multiply-accumulates per cycle (every MR busy).
    pub fn peak_macs_per_cycle(&self) -> usize {
        self.total_mrs()
    }

    pub fn validate(&self) -> Result<()> {
        if self.banks == 0 || self.arms_per_bank == 0 || self.mrs_per_arm == 0 {
            return Err(Error::Validation("geometry counts must be >= 1".into()));
        }
        if self.banks != self.bank_rows * self.bank_cols {
            return Err(Error::Validation(format!(
                "banks {} != bank_rows {} x bank_cols {}",
                self.banks, self.bank_rows, self.bank_cols
            )));
        }
        Ok(())
    }
}

/// On-chip memory capacities in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemorySpec {
    pub nwm_bytes: u64,
    pub hemw_bytes: u64,
    pub activation_buffer_bytes: u64,
}

impl Default for MemorySpec {
    fn default() -> Self {
        Self {
            // 5.5 MiB weight memory; sized against the largest single layer.
            nwm_bytes: 5_767_168,
            // 256 KiB encoding-matrix memory: exactly a 512x1024 matrix at 4 bits.
            hemw_bytes: 262_144,
            // 512 KiB activation buffer.
            activation_buffer_bytes: 524_288,
        }
    }
}

/// A full workload: ordered layers plus precision, geometry, and memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub name: String,
    pub precision: PrecisionConfig,
    pub layers: Vec<LayerSpec>,
    #[serde(default)]
    pub geometry: OCBGeometry,
    #[serde(default)]
    pub memory: MemorySpec,
}

impl NetworkSpec {
    /// Loads and validates a network config file (JSON).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let net: NetworkSpec = serde_json::from_str(&text).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        net.validate()?;
        Ok(net)
    }

    /// Checks precision, geometry, per-layer shapes, layer chaining, and
    /// encoder placement.
    ///
    /// Chaining accepts, besides the plain `input == predecessor output`
    /// rule, two topology idioms that need no explicit graph syntax: a conv
    /// may instead consume its predecessor's *input* (a parallel residual
    /// branch), and a fully-connected or encoder layer may consume the
    /// predecessor's channel count alone (an implied global pooling).
    pub fn validate(&self) -> Result<()> {
        self.precision.validate()?;
        self.geometry.validate()?;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.validate(i)?;
            if layer.is_encoder() && i + 1 != self.layers.len() {
                return Err(Error::Validation(format!(
                    "layer {i}: encoder must be the last layer"
                )));
            }
            if i == 0 {
                continue;
            }
            let prev = &self.layers[i - 1];
            let accepted: Vec<u64> = match (layer, prev) {
                (
                    LayerSpec::Conv { .. },
                    LayerSpec::Conv {
                        in_channels,
                        out_channels,
                        ..
                    },
                ) => vec![*out_channels as u64, *in_channels as u64],
                (LayerSpec::Conv { .. }, LayerSpec::FullyConnected { out_features, .. }) => {
                    vec![*out_features as u64]
                }
                (
                    LayerSpec::FullyConnected { .. } | LayerSpec::Encoder { .. },
                    LayerSpec::Conv {
                        out_channels,
                        out_height,
                        out_width,
                        ..
                    },
                ) => vec![
                    (*out_channels * *out_height * *out_width) as u64,
                    *out_channels as u64,
                ],
                (
                    LayerSpec::FullyConnected { .. } | LayerSpec::Encoder { .. },
                    LayerSpec::FullyConnected { out_features, .. },
                ) => vec![*out_features as u64],
                (_, LayerSpec::Encoder { .. }) => {
                    return Err(Error::Validation(format!(
                        "layer {i}: encoder must be the last layer"
                    )));
                }
            };
            let input = match *layer {
                LayerSpec::Conv { in_channels, .. } => in_channels as u64,
                LayerSpec::FullyConnected { in_features, .. } => in_features as u64,
                LayerSpec::Encoder { in_features, .. } => in_features as u64,
            };
            if !accepted.contains(&input) {
                return Err(Error::Validation(format!(
                    "layer {i}: input size {input} matches none of the predecessor's \
                     output sizes {accepted:?}"
                )));
            }
        }
        Ok(())
    }

    /// Sum of exact MAC counts over all layers.
    pub fn total_macs(&self) -> u64 {
        self.layers.iter().map(LayerSpec::macs).sum()
    }

    /// Sum of stored weight values over all layers.
    pub fn total_weight_values(&self) -> u64 {
        self.layers.iter().map(LayerSpec::weight_values).sum()
    }
}

/// Checks that every layer's weights fit the memory that backs it: the
/// largest conv/FC layer against `nwm_bytes`, the encoder matrix against
/// `hemw_bytes`. Returns human-readable diagnostics; empty means ok.
pub fn validate_memory(net: &NetworkSpec, mem: &MemorySpec) -> Vec<String> {
    let bits = net.precision.weight_bits;
    let mut diagnostics = Vec::new();
    for (i, layer) in net.layers.iter().enumerate() {
        let bytes = layer.weight_bytes(bits);
        let (capacity, store) = if layer.is_encoder() {
            (mem.hemw_bytes, "HEMW")
        } else {
            (mem.nwm_bytes, "NWM")
        };
        if bytes > capacity {
            diagnostics.push(format!(
                "{}: {} weight bytes exceed {} capacity {} at {} bits",
                layer.label(i),
                bytes,
                store,
                capacity,
                bits
            ));
        }
    }
    diagnostics
}

fn conv(
    kernel_size: usize,
    in_channels: usize,
    out_channels: usize,
    out_hw: usize,
    stride_step: usize,
) -> LayerSpec {
    LayerSpec::Conv {
        kernel_size,
        in_channels,
        out_channels,
        out_height: out_hw,
        out_width: out_hw,
        stride_step,
    }
}

/// The built-in ResNet-18 workload at 224x224 input with the classifier
/// replaced by a hypervector encoder over the 512-wide pooled features.
///
/// 21 layers: the 7x7 stem, four stages of 3x3 basic blocks with 1x1
/// downsample convs opening stages 2-4 (listed before the parallel main
/// branch), and the terminal `Encoder(512, encoder_dim)`.
pub fn resnet18_preset(precision: PrecisionConfig, encoder_dim: usize) -> NetworkSpec {
    assert!(encoder_dim >= 1, "encoder dimension must be >= 1");
    let mut layers = vec![conv(7, 3, 64, 112, 2)];
    for _ in 0..4 {
        layers.push(conv(3, 64, 64, 56, 1));
    }
    for (cin, cout, hw) in [(64, 128, 28), (128, 256, 14), (256, 512, 7)] {
        layers.push(conv(1, cin, cout, hw, 2));
        layers.push(conv(3, cin, cout, hw, 2));
        for _ in 0..3 {
            layers.push(conv(3, cout, cout, hw, 1));
        }
    }
    layers.push(LayerSpec::Encoder {
        in_features: 512,
        dimension: encoder_dim,
    });
    let net = NetworkSpec {
        name: "resnet18".into(),
        precision,
        layers,
        geometry: OCBGeometry::default(),
        memory: MemorySpec::default(),
    };
    debug_assert!(net.validate().is_ok());
    net
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p34() -> PrecisionConfig {
        PrecisionConfig::new(3, 4)
    }

    #[test]
    fn default_geometry_totals() {
        let g = OCBGeometry::default();
        assert_eq!(g.total_mrs(), 5184);
        assert_eq!(g.total_arms(), 576);
        assert_eq!(g.peak_macs_per_cycle(), 5184);
        g.validate().unwrap();
    }

    #[test]
    fn precision_parsing_and_flags() {
        let p = PrecisionConfig::parse("3:4").unwrap();
        assert_eq!((p.weight_bits, p.activation_bits), (3, 4));
        assert!(!p.study_only);
        let p = PrecisionConfig::parse("32:32").unwrap();
        assert!(p.study_only);
        assert!(PrecisionConfig::parse("5:4").is_err());
        assert!(PrecisionConfig::parse("4").is_err());
        // A study-range precision without the flag must not validate.
        let manual = PrecisionConfig {
            weight_bits: 8,
            activation_bits: 8,
            study_only: false,
        };
        assert!(manual.validate().is_err());
    }

    #[test]
    fn smallest_legal_network() {
        let net = NetworkSpec {
            name: "tiny".into(),
            precision: p34(),
            layers: vec![conv(3, 1, 1, 4, 1)],
            geometry: OCBGeometry::default(),
            memory: MemorySpec::default(),
        };
        net.validate().unwrap();
        assert_eq!(net.layers.len(), 1);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let net = NetworkSpec {
            name: "bad".into(),
            precision: p34(),
            layers: vec![
                conv(3, 1, 4, 8, 1),
                LayerSpec::FullyConnected {
                    in_features: 100,
                    out_features: 10,
                },
            ],
            geometry: OCBGeometry::default(),
            memory: MemorySpec::default(),
        };
        let err = net.validate().unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn fc_accepts_flattened_conv_output() {
        let net = NetworkSpec {
            name: "flat".into(),
            precision: p34(),
            layers: vec![
                conv(3, 1, 4, 8, 1),
                LayerSpec::FullyConnected {
                    in_features: 4 * 8 * 8,
                    out_features: 10,
                },
            ],
            geometry: OCBGeometry::default(),
            memory: MemorySpec::default(),
        };
        net.validate().unwrap();
    }

    #[test]
    fn encoder_must_be_last() {
        let net = NetworkSpec {
            name: "bad".into(),
            precision: p34(),
            layers: vec![
                LayerSpec::Encoder {
                    in_features: 9,
                    dimension: 16,
                },
                LayerSpec::FullyConnected {
                    in_features: 16,
                    out_features: 4,
                },
            ],
            geometry: OCBGeometry::default(),
            memory: MemorySpec::default(),
        };
        assert!(net.validate().is_err());
    }

    #[test]
    fn illegal_kernel_rejected() {
        let net = NetworkSpec {
            name: "bad".into(),
            precision: p34(),
            layers: vec![conv(2, 1, 1, 4, 1)],
            geometry: OCBGeometry::default(),
            memory: MemorySpec::default(),
        };
        assert!(matches!(net.validate(), Err(Error::KernelSize(2))));
    }

    #[test]
    fn preset_has_21_layers_and_pinned_counts() {
        let net = resnet18_preset(p34(), 1024);
        net.validate().unwrap();
        assert_eq!(net.layers.len(), 21);
        assert!(net.layers[20].is_encoder());
        assert_eq!(net.layers[20].weight_values(), 524_288);
        // Exact MAC totals: 1,813,561,344 neural + 524,288 encoder.
        let neural: u64 = net.layers[..20].iter().map(LayerSpec::macs).sum();
        assert_eq!(neural, 1_813_561_344);
        assert_eq!(net.total_macs(), 1_814_085_632);
        assert_eq!(
            net.layers[..20]
                .iter()
                .map(LayerSpec::weight_values)
                .sum::<u64>(),
            11_166_912
        );
    }

    #[test]
    fn preset_topology_does_not_depend_on_precision() {
        let a = resnet18_preset(p34(), 1024);
        let b = resnet18_preset(PrecisionConfig::new(4, 4), 1024);
        assert_eq!(a.layers, b.layers);
        assert_eq!(b.precision.weight_bits, 4);
    }

    #[test]
    fn preset_fits_default_memory_up_to_4_bits() {
        for bits in [2, 3, 4] {
            let net = resnet18_preset(PrecisionConfig::new(bits, 4), 1024);
            assert!(validate_memory(&net, &net.memory).is_empty(), "bits {bits}");
        }
        // Whole-network storage at 4 bits also fits the 5.5 MiB weight memory.
        let net = resnet18_preset(PrecisionConfig::new(4, 4), 1024);
        let total_bytes: u64 = net.layers[..20].iter().map(|l| l.weight_bytes(4)).sum();
        assert_eq!(total_bytes, 5_583_456);
        assert!(total_bytes <= net.memory.nwm_bytes);
    }

    #[test]
    fn memory_diagnostics_name_the_layer() {
        let net = NetworkSpec {
            name: "fat-fc".into(),
            precision: PrecisionConfig::new(32, 32),
            layers: vec![LayerSpec::FullyConnected {
                in_features: 1000,
                out_features: 1000,
            }],
            geometry: OCBGeometry::default(),
            memory: MemorySpec {
                nwm_bytes: 1024,
                ..MemorySpec::default()
            },
        };
        net.validate().unwrap();
        let diags = validate_memory(&net, &net.memory);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].contains("00-fc-1000to1000"), "{}", diags[0]);
        // 10x10 at 32 bits is 400 bytes and fits a 1 KiB store.
        let small = NetworkSpec {
            layers: vec![LayerSpec::FullyConnected {
                in_features: 10,
                out_features: 10,
            }],
            ..net
        };
        assert!(validate_memory(&small, &small.memory).is_empty());
    }

    #[test]
    fn empty_network_is_vacuously_fine() {
        let net = NetworkSpec {
            name: "empty".into(),
            precision: p34(),
            layers: vec![],
            geometry: OCBGeometry::default(),
            memory: MemorySpec::default(),
        };
        net.validate().unwrap();
        assert!(validate_memory(&net, &net.memory).is_empty());
    }

    #[test]
    fn network_round_trips_through_json() {
        let net = resnet18_preset(p34(), 1024);
        let text = serde_json::to_string_pretty(&net).unwrap();
        let back: NetworkSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(net, back);
    }
}
