//! Wireless uplink cost of shipping raw images vs encoded hypervectors.
//!
//! The per-byte energy default is 7680 mJ / 65536 B = 0.1171875 mJ/B, read
//! off the published comparison table itself (the cited "15mW/1Mb" BLE
//! efficiency is dimensionally ambiguous, so the table is the source of
//! truth). 0.1171875 mJ is a dyadic rational (15/128), so the table's
//! energies reproduce exactly in binary floating point.

use serde::{Deserialize, Serialize};

use crate::cost::DeviceCalibration;
use crate::error::{Error, Result};

/// One payload and the per-byte cost applied to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferSpec {
    pub payload_bytes: u64,
    /// Joules per byte.
    pub energy_per_byte: f64,
}

impl TransferSpec {
    pub fn energy_mj(&self) -> f64 {
        (self.energy_per_byte * 1000.0) * self.payload_bytes as f64
    }
}

/// Transmission energy in millijoules: payload x per-byte cost.
pub fn transfer_energy(payload_bytes: u64, cal: &DeviceCalibration) -> f64 {
    TransferSpec {
        payload_bytes,
        energy_per_byte: cal.ble_energy_per_byte,
    }
    .energy_mj()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferComparison {
    pub image_mj: f64,
    pub hv_mj: f64,
    /// image energy / hv energy. The per-byte cost cancels, so this is
    /// computed as the payload ratio directly and is exactly independent of
    /// the calibration.
    pub ratio: f64,
}

pub fn compare_payloads(
    image_bytes: u64,
    hv_bytes: u64,
    cal: &DeviceCalibration,
) -> Result<TransferComparison> {
    if hv_bytes == 0 {
        return Err(Error::Validation(
            "hypervector payload must be non-empty".into(),
        ));
    }
    Ok(TransferComparison {
        image_mj: transfer_energy(image_bytes, cal),
        hv_mj: transfer_energy(hv_bytes, cal),
        ratio: image_bytes as f64 / hv_bytes as f64,
    })
}

/// Bytes needed to ship a D-dimensional hypervector at the given
/// per-element width (D=1024 at 4 bits -> 512 B).
pub fn hv_payload_bytes(dim: usize, bits_per_element: u32) -> u64 {
    (dim as u64 * bits_per_element as u64).div_ceil(8)
}

pub const IMAGE_VECTOR_SIZE: usize = 16_384;
pub const IMAGE_PAYLOAD_BYTES: u64 = 65_536;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferRow {
    pub payload: String,
    pub vector_size: usize,
    pub payload_bytes: u64,
    pub energy_mj: f64,
    pub ratio_vs_image: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferTable {
    pub energy_per_byte_j: f64,
    pub rows: Vec<TransferRow>,
}

impl TransferTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("payload,vector_size,payload_bytes,energy_mj,ratio_vs_image\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.payload, row.vector_size, row.payload_bytes, row.energy_mj, row.ratio_vs_image
            ));
        }
        out
    }
}

/// Raw-image row followed by one hypervector row per dimension.
pub fn comparison_table(
    dims: &[usize],
    bits_per_element: u32,
    cal: &DeviceCalibration,
) -> Result<TransferTable> {
    if dims.is_empty() {
        return Err(Error::Empty("dims"));
    }
    let mut rows = vec![TransferRow {
        payload: "image".into(),
        vector_size: IMAGE_VECTOR_SIZE,
        payload_bytes: IMAGE_PAYLOAD_BYTES,
        energy_mj: transfer_energy(IMAGE_PAYLOAD_BYTES, cal),
        ratio_vs_image: 1.0,
    }];
    for &dim in dims {
        let bytes = hv_payload_bytes(dim, bits_per_element);
        let cmp = compare_payloads(IMAGE_PAYLOAD_BYTES, bytes, cal)?;
        rows.push(TransferRow {
            payload: "hypervector".into(),
            vector_size: dim,
            payload_bytes: bytes,
            energy_mj: cmp.hv_mj,
            ratio_vs_image: cmp.ratio,
        });
    }
    Ok(TransferTable {
        energy_per_byte_j: cal.ble_energy_per_byte,
        rows,
    })
}
