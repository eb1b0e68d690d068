//! Multi-channel feature grids and their binary file format.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::FeatureError;

/// Grid side length in pixels.
pub const GRID: usize = 96;
/// Side length of the content region the normalized trajectory maps to.
pub const CONTENT: usize = 48;
/// Offset of the content region inside the grid (centered).
pub const CONTENT_OFFSET: usize = 24;

const MAGIC: &[u8; 4] = b"FTNS";

/// A stack of `channels` real-valued 96×96 maps, row-major per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    channels: usize,
    data: Vec<f32>,
}

impl FeatureTensor {
    pub fn zeros(channels: usize) -> Self {
        FeatureTensor { channels, data: vec![0.0; channels * GRID * GRID] }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, channel: usize, y: usize, x: usize) -> f32 {
        self.data[(channel * GRID + y) * GRID + x]
    }

    pub fn channel(&self, channel: usize) -> &[f32] {
        &self.data[channel * GRID * GRID..(channel + 1) * GRID * GRID]
    }

    pub fn channel_mut(&mut self, channel: usize) -> &mut [f32] {
        &mut self.data[channel * GRID * GRID..(channel + 1) * GRID * GRID]
    }

    /// Concatenates channel groups in the given order.
    pub fn stack(parts: &[FeatureTensor]) -> Self {
        let channels = parts.iter().map(|p| p.channels).sum();
        let mut data = Vec::with_capacity(channels * GRID * GRID);
        for p in parts {
            data.extend_from_slice(&p.data);
        }
        FeatureTensor { channels, data }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Sum of all values in one channel.
    pub fn channel_mass(&self, channel: usize) -> f64 {
        self.channel(channel).iter().map(|&v| v as f64).sum()
    }

    /// Binary layout: `FTNS`, u32 channels, u32 height, u32 width (all
    /// little-endian), then `channels·96·96` little-endian f32 values.
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.channels as u32).to_le_bytes())?;
        w.write_all(&(GRID as u32).to_le_bytes())?;
        w.write_all(&(GRID as u32).to_le_bytes())?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> Result<(), FeatureError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, FeatureError> {
        let bad = |msg: &str| FeatureError::TensorFormat(msg.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let channels = u32::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let height = u32::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let width = u32::from_le_bytes(word) as usize;
        if height != GRID || width != GRID {
            return Err(bad(&format!("expected {GRID}x{GRID} grid, got {height}x{width}")));
        }
        let mut data = vec![0.0f32; channels * GRID * GRID];
        let mut buf = [0u8; 4];
        for v in &mut data {
            r.read_exact(&mut buf)?;
            *v = f32::from_le_bytes(buf);
        }
        Ok(FeatureTensor { channels, data })
    }

    pub fn read_file(path: &Path) -> Result<Self, FeatureError> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrips_through_bytes() {
        let mut t = FeatureTensor::zeros(3);
        t.channel_mut(1)[5 * GRID + 7] = 0.25;
        t.channel_mut(2)[0] = -1.5;
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 3 * GRID * GRID * 4);
        let back = FeatureTensor::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn rejects_bad_magic() {
        let err = FeatureTensor::read_from(&mut &b"XXXX\x01\x00\x00\x00"[..]).unwrap_err();
        assert!(matches!(err, FeatureError::TensorFormat(_)));
    }
}
