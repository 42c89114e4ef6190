//! Side-by-side channel montage of a stored frame.

use image::{Rgb, RgbImage};

use crate::dataset::FrameRecord;

/// Distinct color per label, black for 0.
pub fn label_color(id: u16) -> Rgb<u8> {
    if id == 0 {
        return Rgb([0, 0, 0]);
    }
    // Golden-ratio hue walk.
    let h = (id as f64 * 0.618_033_988_75).fract() * 6.0;
    let x = 1.0 - (h % 2.0 - 1.0).abs();
    let (r, g, b) = match h as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    Rgb([r, g, b].map(|c: f64| (55.0 + 200.0 * c) as u8))
}

/// 3×2 grid: rgb, class, instance / depth, normals, object coordinates.
pub fn montage(record: &FrameRecord) -> RgbImage {
    let (w, h) = (record.width(), record.height());
    let n = (w * h) as usize;
    let depth = record.depth();
    let hits: Vec<f32> = depth.iter().copied().filter(|&d| d > 0.0).collect();
    let (dmin, dmax) = hits
        .iter()
        .fold((f32::INFINITY, 0.0f32), |(a, b), &d| (a.min(d), b.max(d)));
    let mut lo = [f32::INFINITY; 3];
    let mut hi = [f32::NEG_INFINITY; 3];
    for (c, &i) in record.obj_coords.iter().zip(&record.instance_map) {
        if i > 0 {
            for k in 0..3 {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
    }
    let tiles: [Box<dyn Fn(usize) -> Rgb<u8>>; 6] = [
        Box::new(|i| *record.rgb.get_pixel(i as u32 % w, i as u32 / w)),
        Box::new(|i| label_color(record.class_map[i])),
        Box::new(|i| label_color(record.instance_map[i])),
        Box::new(|i| {
            let d = depth[i];
            if d <= 0.0 {
                return Rgb([0, 0, 0]);
            }
            let t = if dmax > dmin {
                (d - dmin) / (dmax - dmin)
            } else {
                0.0
            };
            let v = (255.0 - 200.0 * t) as u8;
            Rgb([v, v, v])
        }),
        Box::new(|i| {
            let nrm = record.normals[i];
            if nrm == [0.0; 3] {
                return Rgb([0, 0, 0]);
            }
            Rgb(nrm.map(|c| ((c * 0.5 + 0.5) * 255.0).clamp(0.0, 255.0) as u8))
        }),
        Box::new(|i| {
            if record.instance_map[i] == 0 {
                return Rgb([0, 0, 0]);
            }
            let c = record.obj_coords[i];
            Rgb([0, 1, 2].map(|k| {
                let span = hi[k] - lo[k];
                if span > 0.0 {
                    ((c[k] - lo[k]) / span * 255.0) as u8
                } else {
                    128
                }
            }))
        }),
    ];
    let mut out = RgbImage::new(3 * w, 2 * h);
    for (t, tile) in tiles.iter().enumerate() {
        let (ox, oy) = ((t as u32 % 3) * w, (t as u32 / 3) * h);
        for i in 0..n {
            out.put_pixel(ox + i as u32 % w, oy + i as u32 / w, tile(i));
        }
    }
    out
}
