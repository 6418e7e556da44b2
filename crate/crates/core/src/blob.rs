//! Flat binary parameter blobs.
//!
//! Layout, all little-endian:
//!
//! ```text
//! u32 ndims | u32 dims[ndims] | u32 nvalues | f32 values[nvalues]
//! ```
//!
//! Used for convolution fixtures ([`crate::conv::ConvSpec`]) and trained
//! denoiser parameters.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub dims: Vec<u32>,
    pub values: Vec<f32>,
}

impl Blob {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 4 * (self.dims.len() + self.values.len()));
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for d in &self.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        out.extend_from_slice(&(self.values.len() as u32).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cursor = Cursor { bytes, pos: 0 };
        let ndims = cursor.u32()? as usize;
        if ndims > bytes.len() / 4 {
            return Err(Error::decode("blob", "dimension count exceeds input"));
        }
        let dims = (0..ndims).map(|_| cursor.u32()).collect::<Result<Vec<_>>>()?;
        let nvalues = cursor.u32()? as usize;
        if cursor.remaining() != nvalues * 4 {
            return Err(Error::decode("blob", "value count does not match payload size"));
        }
        let values = (0..nvalues)
            .map(|_| cursor.u32().map(f32::from_bits))
            .collect::<Result<Vec<_>>>()?;
        Ok(Blob { dims, values })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn u32(&mut self) -> Result<u32> {
        let b = self
            .bytes
            .get(self.pos..self.pos + 4)
            .ok_or_else(|| Error::decode("blob", "truncated"))?;
        self.pos += 4;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn layout_is_little_endian() {
        let b = Blob {
            dims: vec![2],
            values: vec![1.0],
        };
        assert_eq!(b.to_bytes(), vec![1, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0x80, 0x3f]);
    }

    #[test]
    fn truncated_input_rejected() {
        let bytes = Blob {
            dims: vec![3, 4],
            values: vec![0.5; 3],
        }
        .to_bytes();
        assert!(Blob::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(Blob::from_bytes(&bytes).is_ok());
    }
}
