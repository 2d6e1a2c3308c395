//! Adaptive Simpson quadrature for small vector-valued integrands.

const MAX_DEPTH: u32 = 48;

fn add<const K: usize>(a: [f64; K], b: [f64; K]) -> [f64; K] {
    std::array::from_fn(|i| a[i] + b[i])
}

fn simpson<const K: usize>(fa: [f64; K], fm: [f64; K], fb: [f64; K], h: f64) -> [f64; K] {
    std::array::from_fn(|i| h / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]))
}

#[allow(clippy::too_many_arguments)]
fn recurse<const K: usize, F: Fn(f64) -> [f64; K]>(
    f: &F,
    a: f64,
    b: f64,
    fa: [f64; K],
    fm: [f64; K],
    fb: [f64; K],
    whole: [f64; K],
    tol: f64,
    depth: u32,
) -> [f64; K] {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let both = add(left, right);
    let err = (0..K).map(|i| (both[i] - whole[i]).abs()).fold(0.0, f64::max);
    if depth >= MAX_DEPTH || err <= 15.0 * tol || (b - a) < 1e-15 * (a.abs() + b.abs()) {
        return std::array::from_fn(|i| both[i] + (both[i] - whole[i]) / 15.0);
    }
    add(
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1),
        recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1),
    )
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol` (per component),
/// starting from `panels` equal panels.
pub fn integrate_vec<const K: usize, F: Fn(f64) -> [f64; K]>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    panels: usize,
) -> [f64; K] {
    if b <= a {
        return [0.0; K];
    }
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = [0.0; K];
    let mut fa = f(a);
    for k in 0..panels {
        let lo = a + h * k as f64;
        let hi = if k + 1 == panels { b } else { lo + h };
        let fm = f(0.5 * (lo + hi));
        let fb = f(hi);
        let whole = simpson(fa, fm, fb, hi - lo);
        let part = recurse(&f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 0);
        total = add(total, part);
        fa = fb;
    }
    total
}

/// Scalar convenience wrapper.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    integrate_vec(|t| [f(t)], a, b, tol, 8)[0]
}
