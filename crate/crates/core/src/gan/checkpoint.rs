//! Binary checkpoint format.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "GMC1"                      magic, 4 bytes
//! version                     u32
//! for generator, then discriminator:
//!   layer count               u32
//!   per layer:
//!     rows, cols              u32, u32   (rows = output width)
//!     activation tag          u8         (0 relu, 1 sigmoid, 2 tanh, 3 identity)
//!     weights                 rows*cols f64, row-major
//!     biases                  rows f64
//! scale                       f64
//! crc32                       u32 over every preceding byte
//! ```

use std::path::Path;

use ndarray::{Array1, Array2};

use super::mlp::{Activation, Dense, MlpParams};
use super::model::GanModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 4] = b"GMC1";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<S: Scalar>(model: &GanModel<S>) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    for net in [model.generator(), model.discriminator()] {
        buf.extend_from_slice(&(net.layers().len() as u32).to_le_bytes());
        for layer in net.layers() {
            buf.extend_from_slice(&(layer.output_dim() as u32).to_le_bytes());
            buf.extend_from_slice(&(layer.input_dim() as u32).to_le_bytes());
            buf.push(layer.activation.tag());
            for &w in layer.weights.iter() {
                buf.extend_from_slice(&w.as_f64().to_le_bytes());
            }
            for &b in layer.bias.iter() {
                buf.extend_from_slice(&b.as_f64().to_le_bytes());
            }
        }
    }
    buf.extend_from_slice(&model.scale().as_f64().to_le_bytes());
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

pub fn read_checkpoint<S: Scalar>(bytes: &[u8]) -> Result<GanModel<S>> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        return Err(Error::NotCheckpoint);
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = r.u32()?;
    if version > CHECKPOINT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: CHECKPOINT_VERSION,
        });
    }
    let generator = r.net()?;
    let discriminator = r.net()?;
    let scale = r.f64()?;
    let body_end = r.pos;
    let stored = r.u32()?;
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }
    if r.pos != bytes.len() {
        return Err(Error::InvalidConfig("trailing bytes after checkpoint".into()));
    }
    GanModel::new(generator, discriminator, S::lit(scale))
}

pub fn save_checkpoint<S: Scalar>(model: &GanModel<S>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_checkpoint(model)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_checkpoint<S: Scalar>(path: impl AsRef<Path>) -> Result<GanModel<S>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_checkpoint(&bytes)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::TruncatedCheckpoint)?;
        let out = self.bytes.get(self.pos..end).ok_or(Error::TruncatedCheckpoint)?;
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn floats<S: Scalar>(&mut self, n: usize) -> Result<Vec<S>> {
        let raw = self.take(n.checked_mul(8).ok_or(Error::TruncatedCheckpoint)?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| S::lit(f64::from_le_bytes(c.try_into().unwrap())))
            .collect())
    }

    fn net<S: Scalar>(&mut self) -> Result<MlpParams<S>> {
        let count = self.u32()? as usize;
        let mut layers = Vec::with_capacity(count.min(64));
        for _ in 0..count {
            let rows = self.u32()? as usize;
            let cols = self.u32()? as usize;
            let tag = self.u8()?;
            let activation = Activation::from_tag(tag)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown activation tag {tag}")))?;
            let weights = self.floats(rows.checked_mul(cols).ok_or(Error::TruncatedCheckpoint)?)?;
            let bias = self.floats(rows)?;
            layers.push(Dense {
                weights: Array2::from_shape_vec((rows, cols), weights).expect("sized read"),
                bias: Array1::from_vec(bias),
                activation,
            });
        }
        MlpParams::new(layers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gan::train::GanConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> GanModel<f64> {
        let mut cfg = GanConfig::<f64>::new(6);
        cfg.noise_dim = 3;
        cfg.generator_hidden = vec![5];
        cfg.discriminator_hidden = vec![4];
        let (g, d) = cfg.init_networks(&mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        GanModel::new(g, d, 123.5).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = model();
        let back: GanModel<f64> = read_checkpoint(&write_checkpoint(&m)).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.sample(10, 4).unwrap(), m.sample(10, 4).unwrap());
    }

    #[test]
    fn f32_models_round_trip() {
        let mut cfg = GanConfig::<f32>::new(4);
        cfg.noise_dim = 2;
        cfg.generator_hidden = vec![3];
        cfg.discriminator_hidden = vec![3];
        let (g, d) = cfg.init_networks(&mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let m = GanModel::new(g, d, 7.25f32).unwrap();
        let back: GanModel<f32> = read_checkpoint(&write_checkpoint(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn corrupted_magic_is_not_a_checkpoint() {
        let mut bytes = write_checkpoint(&model());
        bytes[0] = b'X';
        assert!(matches!(read_checkpoint::<f64>(&bytes), Err(Error::NotCheckpoint)));
        assert!(matches!(read_checkpoint::<f64>(b"GM"), Err(Error::NotCheckpoint)));
    }

    #[test]
    fn newer_version_names_both_versions() {
        let mut bytes = write_checkpoint(&model());
        bytes[4..8].copy_from_slice(&7u32.to_le_bytes());
        let err = read_checkpoint::<f64>(&bytes).unwrap_err();
        assert!(matches!(err, Error::UnsupportedVersion { found: 7, supported: 1 }));
        let msg = err.to_string();
        assert!(msg.contains('7') && msg.contains('1'), "{msg}");
    }

    #[test]
    fn truncation_and_bit_flips_are_detected() {
        let bytes = write_checkpoint(&model());
        assert!(matches!(
            read_checkpoint::<f64>(&bytes[..bytes.len() - 3]),
            Err(Error::TruncatedCheckpoint)
        ));
        assert!(matches!(read_checkpoint::<f64>(&bytes[..40]), Err(Error::TruncatedCheckpoint)));
        let mut flipped = bytes.clone();
        flipped[30] ^= 0x01;
        assert!(matches!(read_checkpoint::<f64>(&flipped), Err(Error::ChecksumMismatch { .. })));
    }

    #[test]
    fn header_layout() {
        let bytes = write_checkpoint(&model());
        assert_eq!(&bytes[..4], b"GMC1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        // generator has two layers; first is 5 x 3 relu
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 3);
        assert_eq!(bytes[20], 0);
        let n = bytes.len();
        let crc = u32::from_le_bytes(bytes[n - 4..].try_into().unwrap());
        assert_eq!(crc, crc32fast::hash(&bytes[..n - 4]));
        assert_eq!(f64::from_le_bytes(bytes[n - 12..n - 4].try_into().unwrap()), 123.5);
    }
}
