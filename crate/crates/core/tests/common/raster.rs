//! Grid-sampling estimate of oriented-box IoU, independent of the polygon
//! clipper. Sample points sit at cell centres of an `n x n` grid over the
//! joint bounding box; each row is resolved as an x-interval per box.

#![allow(dead_code)]

/// (cx, cy, w, h, theta)
pub type Obb = (f64, f64, f64, f64, f64);

fn half_extent(b: &Obb) -> (f64, f64) {
    let (_, _, w, h, t) = *b;
    let (s, c) = t.sin_cos();
    (
        0.5 * (w * c.abs() + h * s.abs()),
        0.5 * (w * s.abs() + h * c.abs()),
    )
}

/// x-interval of points on the horizontal line `y` inside `b`.
fn row_interval(b: &Obb, y: f64) -> Option<(f64, f64)> {
    let (cx, cy, w, h, t) = *b;
    let (s, c) = t.sin_cos();
    let dy = y - cy;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    // |(x-cx)*c + dy*s| <= w/2 and |-(x-cx)*s + dy*c| <= h/2
    for (a, k, half) in [(c, dy * s, w / 2.0), (-s, dy * c, h / 2.0)] {
        if a.abs() < 1e-15 {
            if k.abs() > half {
                return None;
            }
            continue;
        }
        let (x1, x2) = ((-half - k) / a, (half - k) / a);
        lo = lo.max(x1.min(x2));
        hi = hi.min(x1.max(x2));
    }
    (lo <= hi).then_some((lo + cx, hi + cx))
}

/// Number of sample columns `x0 + (j + 0.5) * dx`, `0 <= j < n`, in `[lo, hi]`.
fn columns(lo: f64, hi: f64, x0: f64, dx: f64, n: usize) -> u64 {
    let first = ((lo - x0) / dx - 0.5).ceil().max(0.0);
    let last = ((hi - x0) / dx - 0.5).floor().min(n as f64 - 1.0);
    if last < first {
        0
    } else {
        (last - first) as u64 + 1
    }
}

pub fn raster_iou(a: &Obb, b: &Obb, n: usize) -> f64 {
    let (ax, ay) = half_extent(a);
    let (bx, by) = half_extent(b);
    let x0 = (a.0 - ax).min(b.0 - bx);
    let x1 = (a.0 + ax).max(b.0 + bx);
    let y0 = (a.1 - ay).min(b.1 - by);
    let y1 = (a.1 + ay).max(b.1 + by);
    let (dx, dy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
    let (mut in_a, mut in_b, mut both) = (0u64, 0u64, 0u64);
    for k in 0..n {
        let y = y0 + (k as f64 + 0.5) * dy;
        let ra = row_interval(a, y);
        let rb = row_interval(b, y);
        if let Some((l, h)) = ra {
            in_a += columns(l, h, x0, dx, n);
        }
        if let Some((l, h)) = rb {
            in_b += columns(l, h, x0, dx, n);
        }
        if let (Some((la, ha)), Some((lb, hb))) = (ra, rb) {
            both += columns(la.max(lb), ha.min(hb), x0, dx, n);
        }
    }
    let union = in_a + in_b - both;
    if union == 0 {
        0.0
    } else {
        both as f64 / union as f64
    }
}

/// Direct per-point membership test, used to cross-check `raster_iou`.
pub fn naive_iou(a: &Obb, b: &Obb, n: usize) -> f64 {
    let inside = |o: &Obb, x: f64, y: f64| {
        let (s, c) = o.4.sin_cos();
        let (px, py) = (x - o.0, y - o.1);
        (px * c + py * s).abs() <= o.2 / 2.0 && (-px * s + py * c).abs() <= o.3 / 2.0
    };
    let (ax, ay) = half_extent(a);
    let (bx, by) = half_extent(b);
    let x0 = (a.0 - ax).min(b.0 - bx);
    let x1 = (a.0 + ax).max(b.0 + bx);
    let y0 = (a.1 - ay).min(b.1 - by);
    let y1 = (a.1 + ay).max(b.1 + by);
    let (dx, dy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
    let (mut inter, mut union) = (0u64, 0u64);
    for k in 0..n {
        let y = y0 + (k as f64 + 0.5) * dy;
        for j in 0..n {
            let x = x0 + (j as f64 + 0.5) * dx;
            let (ia, ib) = (inside(a, x, y), inside(b, x, y));
            inter += u64::from(ia && ib);
            union += u64::from(ia || ib);
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}
