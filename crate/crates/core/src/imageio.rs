//! Grayscale raster loading, tiling, and DFT window selection.

use std::path::Path;

use image::DynamicImage;

use crate::error::{Error, Result};

/// Real-valued grayscale raster, row-major, nominal intensity range [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> GrayImage {
        assert_eq!(width * height, data.len());
        GrayImage {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> GrayImage {
        GrayImage::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Save as a 16-bit grayscale PNG, clamping to [0, 1].
    pub fn save_png16(&self, path: &Path) -> Result<()> {
        let mut buf = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::new(
            self.width as u32,
            self.height as u32,
        );
        for (x, y, px) in buf.enumerate_pixels_mut() {
            let v = self.get(x as usize, y as usize).clamp(0.0, 1.0);
            px.0 = [(v * 65535.0).round() as u16];
        }
        buf.save(path)?;
        Ok(())
    }
}

const LUMA_R: f64 = 0.2126;
const LUMA_G: f64 = 0.7152;
const LUMA_B: f64 = 0.0722;

/// Load an 8- or 16-bit PNG/TIFF as a grayscale raster scaled to [0, 1].
/// RGB input collapses to luminance 0.2126 R + 0.7152 G + 0.0722 B.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let img = image::open(path)?;
    let (width, height) = (img.width() as usize, img.height() as usize);
    let data = match img {
        DynamicImage::ImageLuma8(buf) => buf.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(buf) => buf.pixels().map(|p| p.0[0] as f64 / 65535.0).collect(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageLumaA16(buf) => {
            buf.pixels().map(|p| p.0[0] as f64 / 65535.0).collect()
        }
        DynamicImage::ImageRgb8(buf) => buf
            .pixels()
            .map(|p| luma(p.0[0] as f64, p.0[1] as f64, p.0[2] as f64) / 255.0)
            .collect(),
        DynamicImage::ImageRgba8(buf) => buf
            .pixels()
            .map(|p| luma(p.0[0] as f64, p.0[1] as f64, p.0[2] as f64) / 255.0)
            .collect(),
        DynamicImage::ImageRgb16(buf) => buf
            .pixels()
            .map(|p| luma(p.0[0] as f64, p.0[1] as f64, p.0[2] as f64) / 65535.0)
            .collect(),
        DynamicImage::ImageRgba16(buf) => buf
            .pixels()
            .map(|p| luma(p.0[0] as f64, p.0[1] as f64, p.0[2] as f64) / 65535.0)
            .collect(),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "unsupported pixel layout {:?}",
                other.color()
            )))
        }
    };
    Ok(GrayImage::new(width, height, data))
}

fn luma(r: f64, g: f64, b: f64) -> f64 {
    LUMA_R * r + LUMA_G * g + LUMA_B * b
}

/// Exact periodic repetition: output is (nx·width) x (ny·height) with
/// `out(x, y) = img(x mod width, y mod height)`.
pub fn tile_image(img: &GrayImage, nx: usize, ny: usize) -> Result<GrayImage> {
    let width = img
        .width
        .checked_mul(nx)
        .ok_or(Error::DimensionOverflow(img.width, nx))?;
    let height = img
        .height
        .checked_mul(ny)
        .ok_or(Error::DimensionOverflow(img.height, ny))?;
    width
        .checked_mul(height)
        .filter(|n| *n <= (1 << 34))
        .ok_or(Error::DimensionOverflow(width, height))?;
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        let src_row = &img.data[(y % img.height) * img.width..][..img.width];
        for x in 0..width {
            data.push(src_row[x % img.width]);
        }
    }
    Ok(GrayImage::new(width, height, data))
}

/// DFT window shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionShape {
    Square,
    Circle,
}

impl SelectionShape {
    pub fn from_name(s: &str) -> Option<SelectionShape> {
        match s {
            "square" => Some(SelectionShape::Square),
            "circle" => Some(SelectionShape::Circle),
            _ => None,
        }
    }
}

/// Cut a square `size` x `size` window centered at `center` out of `img`.
///
/// `size` must be a power of two. For a circular selection, pixels outside
/// the inscribed circle are replaced by the mean intensity of the pixels
/// inside it, which avoids the step edge a zero fill would introduce.
pub fn select_region(
    img: &GrayImage,
    shape: SelectionShape,
    size: usize,
    center: (usize, usize),
) -> Result<GrayImage> {
    if size == 0 || !size.is_power_of_two() {
        return Err(Error::NonPowerOfTwoSize(size));
    }
    let (cx, cy) = center;
    let half = size / 2;
    let oob = Error::SelectionOutOfBounds {
        size,
        cx,
        cy,
        width: img.width,
        height: img.height,
    };
    if cx < half || cy < half || cx + half > img.width || cy + half > img.height {
        return Err(oob);
    }
    let (x0, y0) = (cx - half, cy - half);
    let mut data = Vec::with_capacity(size * size);
    for y in 0..size {
        let row = &img.data[(y0 + y) * img.width..][..img.width];
        data.extend_from_slice(&row[x0..x0 + size]);
    }
    let mut out = GrayImage::new(size, size, data);
    if shape == SelectionShape::Circle {
        apply_circular_mask(&mut out);
    }
    Ok(out)
}

/// Pixel membership test for the inscribed circle of a `size` square:
/// distance from the geometric center, radius `size / 2`.
pub fn inside_inscribed_circle(x: usize, y: usize, size: usize) -> bool {
    let c = (size as f64 - 1.0) / 2.0;
    let r = size as f64 / 2.0;
    let (dx, dy) = (x as f64 - c, y as f64 - c);
    dx * dx + dy * dy <= r * r
}

fn apply_circular_mask(img: &mut GrayImage) {
    let size = img.width;
    let mut sum = 0.0;
    let mut count = 0usize;
    for y in 0..size {
        for x in 0..size {
            if inside_inscribed_circle(x, y, size) {
                sum += img.get(x, y);
                count += 1;
            }
        }
    }
    let mean = if count > 0 { sum / count as f64 } else { 0.0 };
    for y in 0..size {
        for x in 0..size {
            if !inside_inscribed_circle(x, y, size) {
                img.set(x, y, mean);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn save_png8(path: &Path, width: u32, height: u32, px: impl Fn(u32, u32) -> [u8; 3]) {
        let buf = image::ImageBuffer::from_fn(width, height, |x, y| image::Rgb(px(x, y)));
        buf.save(path).unwrap();
    }

    #[test]
    fn loads_black_and_white_png() {
        let dir = tempfile::tempdir().unwrap();
        let black = dir.path().join("black.png");
        let white = dir.path().join("white.png");
        image::ImageBuffer::from_pixel(4, 4, image::Luma([0u8]))
            .save(&black)
            .unwrap();
        image::ImageBuffer::from_pixel(4, 4, image::Luma([255u8]))
            .save(&white)
            .unwrap();
        let b = load_image(&black).unwrap();
        let w = load_image(&white).unwrap();
        assert!(b.data.iter().all(|&v| v == 0.0));
        assert!(w.data.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn rgb_red_collapses_to_luminance() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("red.png");
        save_png8(&path, 2, 2, |_, _| [255, 0, 0]);
        let img = load_image(&path).unwrap();
        for &v in &img.data {
            assert_abs_diff_eq!(v, 0.2126, epsilon = 1e-12);
        }
    }

    #[test]
    fn sixteen_bit_png_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g16.png");
        let img = GrayImage::new(4, 2, (0..8).map(|i| i as f64 / 7.0).collect());
        img.save_png16(&path).unwrap();
        let back = load_image(&path).unwrap();
        for (a, b) in img.data.iter().zip(&back.data) {
            assert_abs_diff_eq!(a, b, epsilon = 1.0 / 65535.0);
        }
    }

    #[test]
    fn tile_once_is_identity() {
        let img = GrayImage::new(3, 2, vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(tile_image(&img, 1, 1).unwrap(), img);
    }

    #[test]
    fn tile_2x2_is_modular_repetition() {
        let img = GrayImage::new(3, 2, (0..6).map(|i| i as f64).collect());
        let tiled = tile_image(&img, 2, 2).unwrap();
        assert_eq!(tiled.width, 6);
        assert_eq!(tiled.height, 4);
        for y in 0..4 {
            for x in 0..6 {
                assert_eq!(tiled.get(x, y), img.get(x % 3, y % 2));
            }
        }
    }

    #[test]
    fn square_selection_from_large_image() {
        let w = 2970;
        let h = 2048;
        let img = GrayImage::new(w, h, (0..w * h).map(|i| (i % 251) as f64 / 250.0).collect());
        let sel = select_region(&img, SelectionShape::Square, 1024, (w / 2, h / 2)).unwrap();
        assert_eq!((sel.width, sel.height), (1024, 1024));
        assert_eq!(sel.get(0, 0), img.get(w / 2 - 512, h / 2 - 512));
        assert_eq!(sel.get(1023, 1023), img.get(w / 2 + 511, h / 2 + 511));
    }

    #[test]
    fn selection_rejects_non_power_of_two_and_out_of_bounds() {
        let img = GrayImage::filled(64, 64, 0.5);
        assert!(matches!(
            select_region(&img, SelectionShape::Square, 48, (32, 32)),
            Err(Error::NonPowerOfTwoSize(48))
        ));
        assert!(matches!(
            select_region(&img, SelectionShape::Square, 64, (16, 32)),
            Err(Error::SelectionOutOfBounds { .. })
        ));
    }

    #[test]
    fn circular_mask_is_identity_on_constant_image() {
        let img = GrayImage::filled(128, 128, 0.37);
        let sel = select_region(&img, SelectionShape::Circle, 64, (64, 64)).unwrap();
        assert!(sel.data.iter().all(|&v| v == 0.37));
    }

    #[test]
    fn circular_mask_keeps_interior_pixels() {
        let size = 128;
        let img = GrayImage::new(
            size,
            size,
            (0..size * size).map(|i| (i % 97) as f64 / 96.0).collect(),
        );
        let sel = select_region(
            &img,
            SelectionShape::Circle,
            size,
            (size / 2, size / 2),
        )
        .unwrap();
        for y in 0..size {
            for x in 0..size {
                if inside_inscribed_circle(x, y, size) {
                    assert_eq!(sel.get(x, y), img.get(x, y));
                }
            }
        }
    }

    #[test]
    fn circle_area_is_quarter_pi_of_square() {
        let size = 256;
        let count = (0..size * size)
            .filter(|i| inside_inscribed_circle(i % size, i / size, size))
            .count() as f64;
        let expected = std::f64::consts::PI / 4.0 * (size * size) as f64;
        // One-pixel ring tolerance around the circumference.
        assert!(
            (count - expected).abs() <= std::f64::consts::PI * size as f64,
            "count {count} vs {expected}"
        );
    }

    #[test]
    fn tile_then_full_selection_is_identity_on_content() {
        let img = GrayImage::new(16, 16, (0..256).map(|i| (i % 13) as f64 / 12.0).collect());
        let tiled = tile_image(&img, 4, 4).unwrap();
        let sel = select_region(&tiled, SelectionShape::Square, 64, (32, 32)).unwrap();
        assert_eq!(sel, tiled);
    }
}
