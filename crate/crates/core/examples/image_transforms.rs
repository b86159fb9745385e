//! Rotation, translation, resizing and padding of a small synthetic digit,
//! printed as ASCII art.

use tigranet::data::{pad_center, resize_bilinear, rotate_image, translate_image};

fn show(title: &str, img: &[f64], h: usize, w: usize) {
    println!("{title} ({h}x{w})");
    for r in 0..h {
        let line: String = img[r * w..(r + 1) * w]
            .iter()
            .map(|&v| match v {
                v if v > 0.66 => '#',
                v if v > 0.33 => '+',
                v if v > 0.05 => '.',
                _ => ' ',
            })
            .collect();
        println!("  |{line}|");
    }
}

fn main() -> tigranet::Result<()> {
    let n = 12;
    let mut seven = vec![0.0; n * n];
    for c in 3..9 {
        seven[2 * n + c] = 1.0;
    }
    for (i, r) in (3..10).enumerate() {
        seven[r * n + 8 - i.min(4)] = 1.0;
    }
    show("original", &seven, n, n);
    show(
        "rotate 90 (exact)",
        &rotate_image(&seven, n, n, 90.0)?,
        n,
        n,
    );
    show(
        "rotate 30 (bilinear)",
        &rotate_image(&seven, n, n, 30.0)?,
        n,
        n,
    );
    show(
        "translate (+2, -1)",
        &translate_image(&seven, n, n, 2, -1)?,
        n,
        n,
    );
    show("resize to 9x9", &resize_bilinear(&seven, n, n, 9, 9)?, 9, 9);
    show("pad to 16x16", &pad_center(&seven, n, n, 16, 16)?, 16, 16);
    Ok(())
}
