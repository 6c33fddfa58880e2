//! Banded colour images of horizontal slices, written as binary PPM.

use std::path::Path;

use crate::fields::{Grid, ScalarField};
use crate::{Error, Result};

/// The `x3 = index` plane of a 3D field as a 2D field over `(x1, x2)`.
pub fn horizontal_slice(field: &ScalarField, index: usize) -> Result<ScalarField> {
    let grid = field.grid();
    if grid.dim() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "slices need a 3D field, got {}D",
            grid.dim()
        )));
    }
    let n3 = grid.dims()[2];
    if index >= n3 {
        return Err(Error::SliceOutOfRange { index, len: n3 });
    }
    let values = field
        .values()
        .iter()
        .skip(index)
        .step_by(n3)
        .copied()
        .collect();
    ScalarField::new(grid.leading(2)?, values)
}

/// Four symmetric thresholds at ±0.2 and ±0.6 of the largest magnitude,
/// giving five bands; empty (one band) for a zero field.
pub fn default_levels(field: &ScalarField) -> Vec<f64> {
    let m = field.max_abs();
    if m == 0.0 {
        return Vec::new();
    }
    vec![-0.6 * m, -0.2 * m, 0.2 * m, 0.6 * m]
}

/// Blue through white to red over `bands` colours.
fn palette(band: usize, bands: usize) -> [u8; 3] {
    if bands <= 1 {
        return [255, 255, 255];
    }
    let s = 2.0 * band as f64 / (bands - 1) as f64 - 1.0;
    let fade = |v: f64| (255.0 * (1.0 - v.abs())).round() as u8;
    if s < 0.0 {
        [fade(s), fade(s), 255]
    } else {
        [255, fade(s), fade(s)]
    }
}

/// P6 image of a 2D field with `x1` to the right and `x2` upwards; each
/// pixel is coloured by how many of the sorted `levels` lie at or below it.
pub fn render_ppm(slice: &ScalarField, levels: &[f64]) -> Result<Vec<u8>> {
    let grid: &Grid = slice.grid();
    if grid.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "images need a 2D field, got {}D",
            grid.dim()
        )));
    }
    let mut levels = levels.to_vec();
    if levels.iter().any(|l| !l.is_finite()) {
        return Err(Error::Config("levels must be finite".into()));
    }
    levels.sort_by(f64::total_cmp);
    let (w, h) = (grid.dims()[0], grid.dims()[1]);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(3 * w * h);
    for row in (0..h).rev() {
        for col in 0..w {
            let v = slice.get(&[col, row]);
            let band = levels.iter().filter(|&&l| l <= v).count();
            out.extend(palette(band, levels.len() + 1));
        }
    }
    Ok(out)
}

pub fn write_ppm(path: &Path, slice: &ScalarField, levels: &[f64]) -> Result<()> {
    std::fs::write(path, render_ppm(slice, levels)?).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slices_pick_the_plane() {
        let g = Grid::periodic(&[8, 8, 8]).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0] + 10.0 * x[2]).unwrap();
        let s = horizontal_slice(&f, 3).unwrap();
        assert_eq!(s.get(&[2, 5]), f.get(&[2, 5, 3]));
        assert!(matches!(
            horizontal_slice(&f, 8),
            Err(Error::SliceOutOfRange { index: 8, len: 8 })
        ));
    }

    #[test]
    fn constant_field_is_one_colour() {
        let g = Grid::periodic(&[8, 8]).unwrap();
        let f = ScalarField::constant(&g, 0.0);
        let img = render_ppm(&f, &default_levels(&f)).unwrap();
        let header = b"P6\n8 8\n255\n".len();
        assert_eq!(img.len(), header + 3 * 64);
        assert!(img[header..].chunks(3).all(|p| p == [255, 255, 255]));
    }

    #[test]
    fn bands_span_the_palette() {
        let g = Grid::periodic(&[16, 8]).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].sin()).unwrap();
        let img = render_ppm(&f, &default_levels(&f)).unwrap();
        let header = b"P6\n16 8\n255\n".len();
        let colours: std::collections::BTreeSet<&[u8]> = img[header..].chunks(3).collect();
        assert_eq!(colours.len(), 5);
        assert!(colours.contains(&[0u8, 0, 255][..]) && colours.contains(&[255u8, 0, 0][..]));
    }
}
