//! Gauss–Legendre rules on intervals, boxes and triangles.

/// Five-point Gauss–Legendre nodes and weights on `[-1, 1]`.
pub const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Points and weights of the 5-point rule mapped to `[lo, hi]`.
pub fn interval(lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> {
    let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
    GL5.iter().map(move |&(x, w)| (mid + half * x, half * w))
}

/// Tensor-product integral of `f` over the box `ranges`.
pub fn integrate_box(ranges: &[(f64, f64)], f: &mut impl FnMut(&[f64]) -> f64) -> f64 {
    let mut point = vec![0.0; ranges.len()];
    recurse(ranges, 0, &mut point, 1.0, f)
}

fn recurse(
    ranges: &[(f64, f64)],
    axis: usize,
    point: &mut Vec<f64>,
    weight: f64,
    f: &mut impl FnMut(&[f64]) -> f64,
) -> f64 {
    if axis == ranges.len() {
        return weight * f(point);
    }
    let (lo, hi) = ranges[axis];
    let mut sum = 0.0;
    for (x, w) in interval(lo, hi) {
        point[axis] = x;
        sum += recurse(ranges, axis + 1, point, weight * w, f);
    }
    sum
}

/// Signed integral of `f dx∧dy` over the oriented triangle `(p0, p1, p2)`,
/// through the collapsed-square (Duffy) map.
pub fn integrate_triangle(p: [[f64; 2]; 3], f: &mut impl FnMut(&[f64]) -> f64) -> f64 {
    let e1 = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
    let e2 = [p[2][0] - p[1][0], p[2][1] - p[1][1]];
    let det = e1[0] * e2[1] - e1[1] * e2[0];
    let mut sum = 0.0;
    for (s, ws) in interval(0.0, 1.0) {
        for (t, wt) in interval(0.0, 1.0) {
            let x = p[0][0] + s * e1[0] + s * t * e2[0];
            let y = p[0][1] + s * e1[1] + s * t * e2[1];
            sum += ws * wt * s * f(&[x, y]);
        }
    }
    sum * det
}
