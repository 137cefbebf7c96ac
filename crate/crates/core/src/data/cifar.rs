use std::path::Path;

use super::{DataKind, Dataset};
use crate::error::{invalid, Error, Result};
use crate::numeric::Matrix;

/// Pixels per image: three 32×32 planes.
pub const CIFAR_IMAGE: usize = 3 * 32 * 32;
/// Coarse label byte, fine label byte, pixels.
pub const CIFAR_RECORD: usize = 2 + CIFAR_IMAGE;

const FINE_CLASSES: usize = 100;

/// Parses one CIFAR-100 binary file. The coarse label is read and dropped;
/// the fine label is the class, and pixels are scaled to `[0, 1]`.
pub fn parse_records(bytes: &[u8]) -> Result<Dataset> {
    if bytes.is_empty() {
        return Err(Error::Parse {
            offset: 0,
            reason: "empty input".into(),
        });
    }
    let whole = bytes.len() / CIFAR_RECORD * CIFAR_RECORD;
    if whole != bytes.len() {
        return Err(Error::Parse {
            offset: whole,
            reason: format!(
                "trailing {} bytes do not form a {CIFAR_RECORD}-byte record",
                bytes.len() - whole
            ),
        });
    }
    let n = bytes.len() / CIFAR_RECORD;
    let mut labels = Vec::with_capacity(n);
    let mut pixels = Vec::with_capacity(n * CIFAR_IMAGE);
    for (i, record) in bytes.chunks_exact(CIFAR_RECORD).enumerate() {
        let fine = record[1] as usize;
        if fine >= FINE_CLASSES {
            return Err(Error::Parse {
                offset: i * CIFAR_RECORD + 1,
                reason: format!("fine label {fine} is not below {FINE_CLASSES}"),
            });
        }
        labels.push(fine);
        pixels.extend(record[2..].iter().map(|&b| f64::from(b) / 255.0));
    }
    Dataset::new(Matrix::from_vec(n, CIFAR_IMAGE, pixels)?, labels, FINE_CLASSES, DataKind::CIFAR)
}

/// Parses the train and test files.
pub fn parse_cifar100(train_bytes: &[u8], test_bytes: &[u8]) -> Result<(Dataset, Dataset)> {
    Ok((parse_records(train_bytes)?, parse_records(test_bytes)?))
}

pub fn parse_cifar100_file(path: &Path) -> Result<Dataset> {
    let bytes = std::fs::read(path)?;
    parse_records(&bytes)
}

/// Serializes an image dataset back to the binary layout. Features are
/// rounded to the nearest of the 256 levels; `coarse` supplies the coarse
/// label per record (zero when absent).
pub fn encode_cifar100(ds: &Dataset, coarse: Option<&[u8]>) -> Result<Vec<u8>> {
    if ds.kind() != DataKind::CIFAR || ds.num_classes() > 256 {
        return Err(invalid("only 3x32x32 image datasets can be encoded"));
    }
    if let Some(c) = coarse {
        if c.len() != ds.len() {
            return Err(invalid(format!("{} coarse labels for {} records", c.len(), ds.len())));
        }
    }
    let mut out = Vec::with_capacity(ds.len() * CIFAR_RECORD);
    for (i, &label) in ds.labels().iter().enumerate() {
        out.push(coarse.map_or(0, |c| c[i]));
        out.push(label as u8);
        out.extend(
            ds.features()
                .row(i)
                .iter()
                .map(|&x| (x * 255.0).round().clamp(0.0, 255.0) as u8),
        );
    }
    Ok(out)
}
