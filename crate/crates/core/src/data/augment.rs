use super::DataKind;
use crate::error::{invalid, Result};
use crate::numeric::Rng;

/// Zero padding added on each side before cropping.
pub const PAD: usize = 4;

/// One draw of the train-time augmentation.
///
/// `(dx, dy)` is the top-left corner of the crop inside the padded image,
/// each in `0..=2·PAD`; `(PAD, PAD)` is the centered, identity crop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropWindow {
    pub flip: bool,
    pub dx: usize,
    pub dy: usize,
}

impl CropWindow {
    pub const IDENTITY: CropWindow = CropWindow {
        flip: false,
        dx: PAD,
        dy: PAD,
    };

    pub fn sample(rng: &mut Rng) -> Self {
        let flip = rng.coin();
        let dx = rng.below(2 * PAD + 1);
        let dy = rng.below(2 * PAD + 1);
        Self { flip, dx, dy }
    }
}

fn image_dims(row: &[f64], kind: DataKind) -> Result<(usize, usize, usize)> {
    match kind {
        DataKind::Image {
            channels,
            height,
            width,
        } if channels * height * width == row.len() => Ok((channels, height, width)),
        DataKind::Image { .. } => Err(invalid("row length does not match the image shape")),
        DataKind::Flat => Err(invalid("augmentation applies only to image data")),
    }
}

/// Mirrors every plane left-to-right.
pub fn flip_horizontal(row: &[f64], kind: DataKind) -> Result<Vec<f64>> {
    let (_, _, width) = image_dims(row, kind)?;
    Ok(row
        .chunks_exact(width)
        .flat_map(|line| line.iter().rev().copied())
        .collect())
}

/// Optional flip, then a crop of the zero-padded image at `window`.
pub fn augment_with(row: &[f64], kind: DataKind, window: CropWindow) -> Result<Vec<f64>> {
    let (channels, height, width) = image_dims(row, kind)?;
    if window.dx > 2 * PAD || window.dy > 2 * PAD {
        return Err(invalid(format!(
            "crop offset ({}, {}) outside 0..={}",
            window.dx,
            window.dy,
            2 * PAD
        )));
    }
    let flipped;
    let src = if window.flip {
        flipped = flip_horizontal(row, kind)?;
        &flipped[..]
    } else {
        row
    };
    let mut out = vec![0.0; row.len()];
    let plane = height * width;
    for ch in 0..channels {
        for y in 0..height {
            // Source coordinate = output coordinate + offset - PAD.
            let Some(sy) = (y + window.dy).checked_sub(PAD).filter(|&v| v < height) else {
                continue;
            };
            for x in 0..width {
                if let Some(sx) = (x + window.dx).checked_sub(PAD).filter(|&v| v < width) {
                    out[ch * plane + y * width + x] = src[ch * plane + sy * width + sx];
                }
            }
        }
    }
    Ok(out)
}

/// Random flip (p = 0.5) followed by a random pad-4 crop.
pub fn augment(row: &[f64], kind: DataKind, rng: &mut Rng) -> Result<Vec<f64>> {
    // Validate before consuming randomness.
    image_dims(row, kind)?;
    augment_with(row, kind, CropWindow::sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    const KIND: DataKind = DataKind::CIFAR;

    fn random_image(rng: &mut Rng) -> Vec<f64> {
        (0..3072).map(|_| rng.uniform(0.0, 1.0).unwrap()).collect()
    }

    #[test]
    fn identity_window() {
        let img = random_image(&mut Rng::new(1));
        assert_eq!(augment_with(&img, KIND, CropWindow::IDENTITY).unwrap(), img);
    }

    #[test]
    fn double_flip_is_identity() {
        let img = random_image(&mut Rng::new(2));
        let once = flip_horizontal(&img, KIND).unwrap();
        assert_ne!(once, img);
        assert_eq!(flip_horizontal(&once, KIND).unwrap(), img);
    }

    #[test]
    fn corner_crop_shifts_content() {
        // Single lit pixel at (channel 1, y 10, x 20).
        let mut img = vec![0.0; 3072];
        img[1024 + 10 * 32 + 20] = 1.0;
        let out = augment_with(&img, KIND, CropWindow { flip: false, dx: 0, dy: 0 }).unwrap();
        let lit: Vec<usize> = out.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, _)| i).collect();
        assert_eq!(lit, vec![1024 + 14 * 32 + 24]);
        // Content near the far edge is pushed out and replaced by zero fill.
        let mut edge = vec![0.0; 3072];
        edge[31 * 32 + 31] = 1.0;
        let out = augment_with(&edge, KIND, CropWindow { flip: false, dx: 0, dy: 0 }).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
        assert!(out[..4 * 32].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn flip_then_crop() {
        let mut img = vec![0.0; 3072];
        img[5 * 32 + 2] = 1.0;
        let out = augment_with(&img, KIND, CropWindow { flip: true, dx: 8, dy: 4 }).unwrap();
        // Flip moves x=2 to x=29, crop offset dx=8 shifts it left by 4.
        assert_eq!(out[5 * 32 + 25], 1.0);
        assert_eq!(out.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn preserves_length_and_range() {
        let mut rng = Rng::new(3);
        for _ in 0..50 {
            let img = random_image(&mut rng);
            let out = augment(&img, KIND, &mut rng).unwrap();
            assert_eq!(out.len(), 3072);
            assert!(out.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn flat_data_is_rejected() {
        assert!(augment(&[0.0; 3072], DataKind::Flat, &mut Rng::new(0)).is_err());
        assert!(augment_with(&[0.0; 10], KIND, CropWindow::IDENTITY).is_err());
        assert!(augment_with(&[0.0; 3072], KIND, CropWindow { flip: false, dx: 9, dy: 0 }).is_err());
    }
}
