//! Flood-fill component oracle and random mask generators.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use changekit::mask::{ChangeCategory, Connectivity, LabelMask};

/// Recursive flood fill labelling every component of `category`. Returns
/// the component pixel sets, each sorted by (y, x), in discovery order.
pub fn flood_fill_components(
    mask: &LabelMask,
    category: ChangeCategory,
    connectivity: Connectivity,
) -> Vec<Vec<(u32, u32)>> {
    let (w, h) = (mask.width(), mask.height());
    let code = category.code();
    let mut seen = vec![false; (w * h) as usize];
    let mut components = Vec::new();

    fn fill(
        x: i64,
        y: i64,
        mask: &LabelMask,
        code: u8,
        connectivity: Connectivity,
        seen: &mut [bool],
        out: &mut Vec<(u32, u32)>,
    ) {
        if x < 0 || y < 0 || x >= mask.width() as i64 || y >= mask.height() as i64 {
            return;
        }
        let (ux, uy) = (x as u32, y as u32);
        let idx = (uy * mask.width() + ux) as usize;
        if seen[idx] || mask.label(ux, uy) != code {
            return;
        }
        seen[idx] = true;
        out.push((ux, uy));
        fill(x - 1, y, mask, code, connectivity, seen, out);
        fill(x + 1, y, mask, code, connectivity, seen, out);
        fill(x, y - 1, mask, code, connectivity, seen, out);
        fill(x, y + 1, mask, code, connectivity, seen, out);
        if connectivity == Connectivity::Eight {
            fill(x - 1, y - 1, mask, code, connectivity, seen, out);
            fill(x + 1, y - 1, mask, code, connectivity, seen, out);
            fill(x - 1, y + 1, mask, code, connectivity, seen, out);
            fill(x + 1, y + 1, mask, code, connectivity, seen, out);
        }
    }

    for y in 0..h {
        for x in 0..w {
            if !seen[(y * w + x) as usize] && mask.label(x, y) == code {
                let mut component = Vec::new();
                fill(x as i64, y as i64, mask, code, connectivity, &mut seen, &mut component);
                component.sort_unstable_by_key(|&(px, py)| (py, px));
                components.push(component);
            }
        }
    }
    components
}

/// Independent data-free mean of a pixel set.
pub fn centroid_oracle(pixels: &[(u32, u32)]) -> (f64, f64) {
    let n = pixels.len() as f64;
    let sx: f64 = pixels.iter().map(|&(x, _)| x as f64).sum();
    let sy: f64 = pixels.iter().map(|&(_, y)| y as f64).sum();
    (sx / n, sy / n)
}

/// Random mask with iid labels; `change_prob` is the chance a pixel is
/// changed at all (split evenly between the two categories).
pub fn random_mask(rng: &mut ChaCha8Rng, width: u32, height: u32, change_prob: f64) -> LabelMask {
    let labels = (0..(width * height))
        .map(|_| {
            if rng.gen_bool(change_prob) {
                if rng.gen_bool(0.5) {
                    1
                } else {
                    2
                }
            } else {
                0
            }
        })
        .collect();
    LabelMask::from_labels(width, height, labels).expect("generated labels are valid")
}

/// Mask with a few random rectangles per category; always contains at
/// least one changed pixel.
pub fn blob_mask(rng: &mut ChaCha8Rng, width: u32, height: u32) -> LabelMask {
    let mut mask = LabelMask::new(width, height).expect("positive dims");
    let blobs = rng.gen_range(1..=4);
    for _ in 0..blobs {
        let code = if rng.gen_bool(0.5) { 1 } else { 2 };
        let w = rng.gen_range(1..=width / 4);
        let h = rng.gen_range(1..=height / 4);
        let x0 = rng.gen_range(0..width - w);
        let y0 = rng.gen_range(0..height - h);
        mask.fill_rect(x0, y0, x0 + w - 1, y0 + h - 1, code)
            .expect("rectangle in bounds");
    }
    mask
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
