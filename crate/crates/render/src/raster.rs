//! Tile-parallel visibility-buffer rasterization.
//!
//! Every covered pixel records the nearest item, triangle and perspective-correct
//! barycentric coordinates with respect to the original (unclipped) triangle. Shading
//! reads only this buffer, so each geometry channel comes from the same fragment.

use nalgebra::Point3;
use rayon::prelude::*;

use crate::camera::PinholeCamera;

pub const TILE: u32 = 32;
pub const NO_ITEM: u32 = u32::MAX;

/// Triangles of one item, with vertices already in the camera frame.
pub struct ItemGeometry<'a> {
    pub vertices: Vec<Point3<f64>>,
    pub faces: &'a [[u32; 3]],
}

#[derive(Clone, Debug)]
pub struct VisibilityBuffer {
    pub width: u32,
    pub height: u32,
    pub depth: Vec<f64>,
    pub item: Vec<u32>,
    pub tri: Vec<u32>,
    pub bary: Vec<[f64; 3]>,
}

impl VisibilityBuffer {
    fn empty(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            depth: vec![f64::INFINITY; n],
            item: vec![NO_ITEM; n],
            tri: vec![0; n],
            bary: vec![[0.0; 3]; n],
        }
    }
}

#[derive(Clone, Copy)]
struct ClipVertex {
    p: Point3<f64>,
    bary: [f64; 3],
}

/// Canonically ordered edge so that the two triangles sharing it evaluate exactly
/// opposite values.
#[derive(Clone, Copy)]
struct Edge {
    a: [f64; 2],
    b: [f64; 2],
    sign: f64,
    owns_zero: bool,
}

impl Edge {
    fn new(a: [f64; 2], b: [f64; 2]) -> Self {
        let dx = b[0] - a[0];
        let dy = b[1] - a[1];
        let owns_zero = dy < 0.0 || (dy == 0.0 && dx > 0.0);
        if (a[0], a[1]) <= (b[0], b[1]) {
            Self {
                a,
                b,
                sign: 1.0,
                owns_zero,
            }
        } else {
            Self {
                a: b,
                b: a,
                sign: -1.0,
                owns_zero,
            }
        }
    }

    #[inline]
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.sign
            * ((self.b[0] - self.a[0]) * (y - self.a[1])
                - (self.b[1] - self.a[1]) * (x - self.a[0]))
    }

    #[inline]
    fn covers(&self, e: f64) -> bool {
        e > 0.0 || (e == 0.0 && self.owns_zero)
    }
}

struct ScreenTri {
    // Edge k is opposite vertex k.
    edges: [Edge; 3],
    inv_area: f64,
    inv_z: [f64; 3],
    bary: [[f64; 3]; 3],
    item: u32,
    tri: u32,
    lo: [u32; 2],
    hi: [u32; 2],
}

fn clip_near(tri: [ClipVertex; 3], near: f64) -> Vec<ClipVertex> {
    let mut out = Vec::with_capacity(4);
    for k in 0..3 {
        let a = tri[k];
        let b = tri[(k + 1) % 3];
        let (ina, inb) = (a.p.z >= near, b.p.z >= near);
        if ina {
            out.push(a);
        }
        if ina != inb {
            // Interpolate from the inside vertex so both neighbours compute the same point.
            let (i, o) = if ina { (a, b) } else { (b, a) };
            let t = (near - i.p.z) / (o.p.z - i.p.z);
            let p = i.p + (o.p - i.p) * t;
            let bary = [0, 1, 2].map(|c| i.bary[c] + (o.bary[c] - i.bary[c]) * t);
            out.push(ClipVertex {
                p: Point3::new(p.x, p.y, near),
                bary,
            });
        }
    }
    out
}

fn setup(
    camera: &PinholeCamera,
    item: u32,
    tri: u32,
    v: [ClipVertex; 3],
    out: &mut Vec<ScreenTri>,
) {
    let s = v.map(|c| {
        [
            camera.fx * c.p.x / c.p.z + camera.cx,
            camera.fy * c.p.y / c.p.z + camera.cy,
        ]
    });
    let area =
        (s[1][0] - s[0][0]) * (s[2][1] - s[0][1]) - (s[1][1] - s[0][1]) * (s[2][0] - s[0][0]);
    if !area.is_finite() || area.abs() < 1e-12 {
        return;
    }
    let order = if area > 0.0 { [0, 1, 2] } else { [0, 2, 1] };
    let s = order.map(|k| s[k]);
    let v = order.map(|k| v[k]);
    let min_x = s[0][0].min(s[1][0]).min(s[2][0]);
    let max_x = s[0][0].max(s[1][0]).max(s[2][0]);
    let min_y = s[0][1].min(s[1][1]).min(s[2][1]);
    let max_y = s[0][1].max(s[1][1]).max(s[2][1]);
    // Pixel centres at i + 0.5.
    let x0 = (min_x - 0.5).ceil().max(0.0);
    let x1 = (max_x - 0.5).floor().min(camera.width as f64 - 1.0);
    let y0 = (min_y - 0.5).ceil().max(0.0);
    let y1 = (max_y - 0.5).floor().min(camera.height as f64 - 1.0);
    if x0 > x1 || y0 > y1 {
        return;
    }
    out.push(ScreenTri {
        edges: [
            Edge::new(s[1], s[2]),
            Edge::new(s[2], s[0]),
            Edge::new(s[0], s[1]),
        ],
        inv_area: 1.0 / area.abs(),
        inv_z: v.map(|c| 1.0 / c.p.z),
        bary: v.map(|c| c.bary),
        item,
        tri,
        lo: [x0 as u32, y0 as u32],
        hi: [x1 as u32, y1 as u32],
    });
}

fn triangles(items: &[ItemGeometry], camera: &PinholeCamera) -> Vec<ScreenTri> {
    let mut out = Vec::new();
    for (item, geom) in items.iter().enumerate() {
        for (t, f) in geom.faces.iter().enumerate() {
            let corners = [0, 1, 2].map(|k| {
                let mut bary = [0.0; 3];
                bary[k] = 1.0;
                ClipVertex {
                    p: geom.vertices[f[k] as usize],
                    bary,
                }
            });
            if corners.iter().all(|c| c.p.z > camera.far)
                || corners.iter().all(|c| c.p.z < camera.near)
            {
                continue;
            }
            if corners.iter().all(|c| c.p.z >= camera.near) {
                setup(camera, item as u32, t as u32, corners, &mut out);
                continue;
            }
            let poly = clip_near(corners, camera.near);
            for k in 1..poly.len().saturating_sub(1) {
                setup(
                    camera,
                    item as u32,
                    t as u32,
                    [poly[0], poly[k], poly[k + 1]],
                    &mut out,
                );
            }
        }
    }
    out
}

struct Tile {
    x0: u32,
    y0: u32,
    w: u32,
    h: u32,
    depth: Vec<f64>,
    item: Vec<u32>,
    tri: Vec<u32>,
    bary: Vec<[f64; 3]>,
}

fn raster_tile(tris: &[ScreenTri], list: &[u32], camera: &PinholeCamera, x0: u32, y0: u32) -> Tile {
    let w = TILE.min(camera.width - x0);
    let h = TILE.min(camera.height - y0);
    let n = (w * h) as usize;
    let mut tile = Tile {
        x0,
        y0,
        w,
        h,
        depth: vec![f64::INFINITY; n],
        item: vec![NO_ITEM; n],
        tri: vec![0; n],
        bary: vec![[0.0; 3]; n],
    };
    for &ti in list {
        let t = &tris[ti as usize];
        let xa = t.lo[0].max(x0);
        let xb = t.hi[0].min(x0 + w - 1);
        let ya = t.lo[1].max(y0);
        let yb = t.hi[1].min(y0 + h - 1);
        for y in ya..=yb {
            let py = y as f64 + 0.5;
            for x in xa..=xb {
                let px = x as f64 + 0.5;
                let e = [
                    t.edges[0].eval(px, py),
                    t.edges[1].eval(px, py),
                    t.edges[2].eval(px, py),
                ];
                if !(t.edges[0].covers(e[0]) && t.edges[1].covers(e[1]) && t.edges[2].covers(e[2]))
                {
                    continue;
                }
                let l = e.map(|v| v * t.inv_area);
                let inv_z = l[0] * t.inv_z[0] + l[1] * t.inv_z[1] + l[2] * t.inv_z[2];
                let z = 1.0 / inv_z;
                if !(z >= camera.near && z <= camera.far) {
                    continue;
                }
                let idx = ((y - y0) * w + (x - x0)) as usize;
                if z >= tile.depth[idx] {
                    continue;
                }
                let wk = [
                    l[0] * t.inv_z[0] * z,
                    l[1] * t.inv_z[1] * z,
                    l[2] * t.inv_z[2] * z,
                ];
                let mut b = [0.0; 3];
                for (k, wv) in wk.iter().enumerate() {
                    for c in 0..3 {
                        b[c] += wv * t.bary[k][c];
                    }
                }
                tile.depth[idx] = z;
                tile.item[idx] = t.item;
                tile.tri[idx] = t.tri;
                tile.bary[idx] = b;
            }
        }
    }
    tile
}

pub fn rasterize(items: &[ItemGeometry], camera: &PinholeCamera) -> VisibilityBuffer {
    let (width, height) = (camera.width, camera.height);
    let tris = triangles(items, camera);
    let tiles_x = width.div_ceil(TILE);
    let tiles_y = height.div_ceil(TILE);
    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); (tiles_x * tiles_y) as usize];
    for (i, t) in tris.iter().enumerate() {
        for ty in t.lo[1] / TILE..=t.hi[1] / TILE {
            for tx in t.lo[0] / TILE..=t.hi[0] / TILE {
                bins[(ty * tiles_x + tx) as usize].push(i as u32);
            }
        }
    }
    let tiles: Vec<Tile> = bins
        .par_iter()
        .enumerate()
        .map(|(k, list)| {
            let k = k as u32;
            raster_tile(
                &tris,
                list,
                camera,
                (k % tiles_x) * TILE,
                (k / tiles_x) * TILE,
            )
        })
        .collect();
    let mut buf = VisibilityBuffer::empty(width, height);
    for t in tiles {
        for y in 0..t.h {
            let src = (y * t.w) as usize..((y + 1) * t.w) as usize;
            let dst0 = ((t.y0 + y) * width + t.x0) as usize;
            let dst = dst0..dst0 + t.w as usize;
            buf.depth[dst.clone()].copy_from_slice(&t.depth[src.clone()]);
            buf.item[dst.clone()].copy_from_slice(&t.item[src.clone()]);
            buf.tri[dst.clone()].copy_from_slice(&t.tri[src.clone()]);
            buf.bary[dst].copy_from_slice(&t.bary[src]);
        }
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    fn camera() -> PinholeCamera {
        PinholeCamera {
            fx: 100.0,
            fy: 100.0,
            cx: 32.0,
            cy: 24.0,
            width: 64,
            height: 48,
            near: 0.1,
            far: 10.0,
        }
    }

    #[test]
    fn shared_edges_leave_no_gaps_or_overlaps() {
        // A fan of thin triangles around a centre inside the view.
        let n = 37;
        let mut vertices = vec![Point3::new(0.013, -0.007, 2.0)];
        for k in 0..n {
            let a = k as f64 / n as f64 * std::f64::consts::TAU;
            vertices.push(Point3::new(
                0.5 * a.cos(),
                0.4 * a.sin(),
                2.0 + 0.3 * a.sin(),
            ));
        }
        let faces: Vec<[u32; 3]> = (0..n).map(|k| [0, 1 + k, 1 + (k + 1) % n]).collect();
        let cam = camera();
        let items = [ItemGeometry {
            vertices,
            faces: &faces,
        }];
        let tris = triangles(&items, &cam);
        let mut count = vec![0u32; cam.pixel_count()];
        for t in &tris {
            for y in t.lo[1]..=t.hi[1] {
                for x in t.lo[0]..=t.hi[0] {
                    let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
                    if t.edges.iter().all(|e| e.covers(e.eval(px, py))) {
                        count[(y * cam.width + x) as usize] += 1;
                    }
                }
            }
        }
        // Every pixel centre well inside the polygon is covered exactly once.
        let buf = rasterize(&items, &cam);
        for y in 0..cam.height {
            for x in 0..cam.width {
                let i = (y * cam.width + x) as usize;
                assert!(count[i] <= 1);
                assert_eq!(count[i] == 1, buf.item[i] == 0);
            }
        }
        let (cx, cy) = (32usize, 24usize);
        assert_eq!(count[cy * 64 + cx], 1);
    }

    #[test]
    fn near_clipping_keeps_the_visible_part() {
        let cam = camera();
        let vertices = vec![
            Point3::new(-1.0, -1.0, 0.05),
            Point3::new(1.0, -1.0, 0.05),
            Point3::new(0.0, 1.0, 3.0),
        ];
        let faces = [[0u32, 1, 2]];
        let buf = rasterize(
            &[ItemGeometry {
                vertices,
                faces: &faces,
            }],
            &cam,
        );
        let hits: Vec<f64> = buf
            .depth
            .iter()
            .copied()
            .filter(|d| d.is_finite())
            .collect();
        assert!(!hits.is_empty());
        assert!(hits.iter().all(|&d| d >= cam.near && d <= 3.0));
    }
}
