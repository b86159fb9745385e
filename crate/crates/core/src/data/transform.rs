//! Geometric transforms on row-major grayscale images.

use crate::error::{Error, Result};

/// Largest translation accepted by [`translate_image`], in pixels.
pub const MAX_SHIFT: i64 = 6;

fn check(img: &[f64], height: usize, width: usize) -> Result<()> {
    if img.len() != height * width {
        return Err(Error::Shape(format!(
            "image has {} pixels, expected {height}x{width}",
            img.len()
        )));
    }
    Ok(())
}

fn bilinear(img: &[f64], height: usize, width: usize, r: f64, c: f64) -> f64 {
    let (r0, c0) = (r.floor(), c.floor());
    let (fr, fc) = (r - r0, c - c0);
    let at = |rr: f64, cc: f64| -> f64 {
        if rr < 0.0 || cc < 0.0 || rr >= height as f64 || cc >= width as f64 {
            0.0
        } else {
            img[rr as usize * width + cc as usize]
        }
    };
    (1.0 - fr) * ((1.0 - fc) * at(r0, c0) + fc * at(r0, c0 + 1.0))
        + fr * ((1.0 - fc) * at(r0 + 1.0, c0) + fc * at(r0 + 1.0, c0 + 1.0))
}

/// Counter-clockwise rotation about the canvas centre.
///
/// Multiples of 90 degrees are exact pixel permutations (quarter turns need
/// a square canvas). Other angles sample the source by inverse mapping with
/// bilinear interpolation and zero fill.
pub fn rotate_image(
    img: &[f64],
    height: usize,
    width: usize,
    angle_degrees: f64,
) -> Result<Vec<f64>> {
    check(img, height, width)?;
    if !angle_degrees.is_finite() {
        return Err(Error::InvalidArgument(
            "rotation angle must be finite".into(),
        ));
    }
    let angle = angle_degrees.rem_euclid(360.0);
    let quarter = [0.0, 90.0, 180.0, 270.0].iter().position(|&q| q == angle);
    if let Some(q) = quarter {
        if q % 2 == 1 && height != width {
            return Err(Error::InvalidArgument(format!(
                "quarter-turn rotation needs a square canvas, got {height}x{width}"
            )));
        }
        let n = height;
        let mut out = vec![0.0; img.len()];
        for r in 0..height {
            for c in 0..width {
                // Source pixel of output (r, c).
                let (sr, sc) = match q {
                    0 => (r, c),
                    1 => (c, n - 1 - r),
                    2 => (height - 1 - r, width - 1 - c),
                    _ => (n - 1 - c, r),
                };
                out[r * width + c] = img[sr * width + sc];
            }
        }
        return Ok(out);
    }
    let theta = angle.to_radians();
    let (s, co) = theta.sin_cos();
    let cy = (height as f64 - 1.0) / 2.0;
    let cx = (width as f64 - 1.0) / 2.0;
    let mut out = vec![0.0; img.len()];
    for r in 0..height {
        for c in 0..width {
            // y axis points up.
            let (x, y) = (c as f64 - cx, cy - r as f64);
            let xs = co * x + s * y;
            let ys = -s * x + co * y;
            out[r * width + c] = bilinear(img, height, width, cy - ys, xs + cx);
        }
    }
    Ok(out)
}

/// Integer shift by `dx` columns (right positive) and `dy` rows (down
/// positive) with zero fill; content leaving the canvas is dropped.
pub fn translate_image(
    img: &[f64],
    height: usize,
    width: usize,
    dx: i64,
    dy: i64,
) -> Result<Vec<f64>> {
    check(img, height, width)?;
    if dx.abs() > MAX_SHIFT || dy.abs() > MAX_SHIFT {
        return Err(Error::InvalidArgument(format!(
            "shift ({dx}, {dy}) exceeds the {MAX_SHIFT}-pixel bound"
        )));
    }
    let mut out = vec![0.0; img.len()];
    for r in 0..height as i64 {
        for c in 0..width as i64 {
            let (nr, nc) = (r + dy, c + dx);
            if nr >= 0 && nc >= 0 && nr < height as i64 && nc < width as i64 {
                out[nr as usize * width + nc as usize] = img[r as usize * width + c as usize];
            }
        }
    }
    Ok(out)
}

/// Bilinear resampling to `new_h x new_w`, pixel centres aligned.
pub fn resize_bilinear(
    img: &[f64],
    height: usize,
    width: usize,
    new_h: usize,
    new_w: usize,
) -> Result<Vec<f64>> {
    check(img, height, width)?;
    let sy = height as f64 / new_h as f64;
    let sx = width as f64 / new_w as f64;
    let mut out = Vec::with_capacity(new_h * new_w);
    for r in 0..new_h {
        let src_r = ((r as f64 + 0.5) * sy - 0.5).clamp(0.0, height as f64 - 1.0);
        for c in 0..new_w {
            let src_c = ((c as f64 + 0.5) * sx - 0.5).clamp(0.0, width as f64 - 1.0);
            out.push(bilinear(img, height, width, src_r, src_c));
        }
    }
    Ok(out)
}

/// Places the image in the middle of a larger zero canvas.
pub fn pad_center(
    img: &[f64],
    height: usize,
    width: usize,
    new_h: usize,
    new_w: usize,
) -> Result<Vec<f64>> {
    check(img, height, width)?;
    if new_h < height || new_w < width {
        return Err(Error::InvalidArgument(format!(
            "cannot pad {height}x{width} into {new_h}x{new_w}"
        )));
    }
    let (top, left) = ((new_h - height) / 2, (new_w - width) / 2);
    let mut out = vec![0.0; new_h * new_w];
    for r in 0..height {
        out[(r + top) * new_w + left..(r + top) * new_w + left + width]
            .copy_from_slice(&img[r * width..(r + 1) * width]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{AutomorphismKind, GridAutomorphism};
    use crate::rng::SplitMix64;

    fn random_image(seed: u64, n: usize) -> Vec<f64> {
        let mut r = SplitMix64::new(seed);
        (0..n).map(|_| r.next_f64()).collect()
    }

    #[test]
    fn zero_angle_is_identity() {
        let img = random_image(1, 49);
        assert_eq!(rotate_image(&img, 7, 7, 0.0).unwrap(), img);
        assert_eq!(rotate_image(&img, 7, 7, 360.0).unwrap(), img);
    }

    #[test]
    fn quarter_turn_two_by_two() {
        // [[a,b],[c,d]] -> [[b,d],[a,c]]
        let out = rotate_image(&[1.0, 2.0, 3.0, 4.0], 2, 2, 90.0).unwrap();
        assert_eq!(out, vec![2.0, 4.0, 1.0, 3.0]);
    }

    #[test]
    fn quarter_turns_compose() {
        let img = random_image(2, 36);
        let r90 = rotate_image(&img, 6, 6, 90.0).unwrap();
        let r180 = rotate_image(&img, 6, 6, 180.0).unwrap();
        assert_eq!(rotate_image(&r90, 6, 6, 90.0).unwrap(), r180);
        let mut z = img.clone();
        for _ in 0..4 {
            z = rotate_image(&z, 6, 6, 90.0).unwrap();
        }
        assert_eq!(z, img);
        assert!(rotate_image(&img[..30], 5, 6, 90.0).is_err());
        assert!(rotate_image(&img[..30], 5, 6, 180.0).is_ok());
    }

    #[test]
    fn quarter_turns_match_automorphisms() {
        let img = random_image(3, 81);
        for (angle, kind) in [
            (90.0, AutomorphismKind::Rot270),
            (180.0, AutomorphismKind::Rot180),
            (270.0, AutomorphismKind::Rot90),
        ] {
            let p = GridAutomorphism::new(kind, 9, 9).unwrap();
            assert_eq!(
                rotate_image(&img, 9, 9, angle).unwrap(),
                p.apply(&img).unwrap()
            );
        }
    }

    #[test]
    fn interpolated_rotation_near_quarter_turn_agrees() {
        // 90 + tiny angle goes through the bilinear path.
        let img = random_image(4, 25);
        let exact = rotate_image(&img, 5, 5, 90.0).unwrap();
        let approx = rotate_image(&img, 5, 5, 90.0 + 1e-9).unwrap();
        for (a, b) in exact.iter().zip(&approx) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn bilinear_rotation_stays_in_range() {
        let img = random_image(5, 28 * 28);
        for angle in [13.0, 45.0, 137.5, 301.0] {
            let out = rotate_image(&img, 28, 28, angle).unwrap();
            assert!(out.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn translation() {
        let mut img = vec![0.0; 100];
        for r in 3..7 {
            for c in 4..6 {
                img[r * 10 + c] = 0.1 * (r + c) as f64;
            }
        }
        assert_eq!(translate_image(&img, 10, 10, 0, 0).unwrap(), img);
        let moved = translate_image(&img, 10, 10, 3, -2).unwrap();
        assert_eq!(moved[10 + 7], img[3 * 10 + 4]);
        assert_eq!(translate_image(&moved, 10, 10, -3, 2).unwrap(), img);
        let total: f64 = img.iter().sum();
        assert!((moved.iter().sum::<f64>() - total).abs() < 1e-12);
        assert!(translate_image(&img, 10, 10, 7, 0).is_err());
    }

    #[test]
    fn resize_and_pad() {
        let img = vec![0.5; 28 * 28];
        let small = resize_bilinear(&img, 28, 28, 26, 26).unwrap();
        assert_eq!(small.len(), 676);
        assert!(small.iter().all(|&v| (v - 0.5).abs() < 1e-12));
        let big = pad_center(&img, 28, 28, 34, 34).unwrap();
        assert_eq!(big.len(), 34 * 34);
        assert_eq!(big[3 * 34 + 3], 0.5);
        assert_eq!(big[2 * 34 + 3], 0.0);
        assert!((big.iter().sum::<f64>() - img.iter().sum::<f64>()).abs() < 1e-9);
    }
}
