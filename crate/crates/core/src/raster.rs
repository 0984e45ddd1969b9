//! Grid traversal of line segments (Amanatides & Woo voxel walk).

/// Integer cell index of a point on a grid anchored at `origin`.
pub fn cell_of(origin: [f64; 2], cell_size: f64, p: [f64; 2]) -> (i64, i64) {
    (
        ((p[0] - origin[0]) / cell_size).floor() as i64,
        ((p[1] - origin[1]) / cell_size).floor() as i64,
    )
}

/// Calls `visit` for every cell the segment `a → b` passes through, in order,
/// starting with the cell of `a`.
pub fn walk_segment(origin: [f64; 2], cell_size: f64, a: [f64; 2], b: [f64; 2], mut visit: impl FnMut(i64, i64)) {
    let ax = (a[0] - origin[0]) / cell_size;
    let ay = (a[1] - origin[1]) / cell_size;
    let bx = (b[0] - origin[0]) / cell_size;
    let by = (b[1] - origin[1]) / cell_size;
    let (mut i, mut j) = (ax.floor() as i64, ay.floor() as i64);
    let (ei, ej) = (bx.floor() as i64, by.floor() as i64);
    let (dx, dy) = (bx - ax, by - ay);

    let axis = |d: f64, start: f64, idx: i64| -> (i64, f64, f64) {
        if d > 0.0 {
            (1, ((idx + 1) as f64 - start) / d, 1.0 / d)
        } else if d < 0.0 {
            (-1, (idx as f64 - start) / d, -1.0 / d)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        }
    };
    let (step_i, mut t_max_x, t_delta_x) = axis(dx, ax, i);
    let (step_j, mut t_max_y, t_delta_y) = axis(dy, ay, j);

    visit(i, j);
    let steps = (ei - i).abs() + (ej - j).abs();
    for _ in 0..steps {
        if t_max_x < t_max_y {
            i += step_i;
            t_max_x += t_delta_x;
        } else {
            j += step_j;
            t_max_y += t_delta_y;
        }
        visit(i, j);
        if i == ei && j == ej {
            break;
        }
    }
}
