//! Quadrature kernels: Gauss-Legendre rules, tensor-product integration over
//! rectangles and discs, and an adaptive Simpson scheme for piecewise-smooth
//! integrands (the spectral-flow integrals have jump discontinuities where
//! eigenvalues cross the interval boundary, so the scheme carries a minimum
//! subdivision depth and a hard depth cap instead of trusting the smooth
//! error model).

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_with_derivative(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|&x| mid + half * x).collect(),
        ws.iter().map(|&w| w * half).collect(),
    )
}

/// Tensor-product integral of `f` over the rectangle `[a0,b0] x [a1,b1]`.
pub fn integrate_rect_2d(f: impl Fn(f64, f64) -> f64, a: [f64; 2], b: [f64; 2], n: usize) -> f64 {
    let (xs, wx) = gauss_legendre_on(n, a[0], b[0]);
    let (ys, wy) = gauss_legendre_on(n, a[1], b[1]);
    let mut sum = 0.0;
    for (x, wxi) in xs.iter().zip(&wx) {
        for (y, wyi) in ys.iter().zip(&wy) {
            sum += wxi * wyi * f(*x, *y);
        }
    }
    sum
}

/// Same as [`integrate_rect_2d`] but refined by doubling the order until two
/// successive values agree within `tol` (absolute). Returns the refined value.
pub fn integrate_rect_2d_adaptive(
    f: impl Fn(f64, f64) -> f64,
    a: [f64; 2],
    b: [f64; 2],
    tol: f64,
) -> f64 {
    let mut n = 16;
    let mut prev = integrate_rect_2d(&f, a, b, n);
    loop {
        n *= 2;
        let next = integrate_rect_2d(&f, a, b, n);
        if (next - prev).abs() <= tol || n >= 512 {
            return next;
        }
        prev = next;
    }
}

/// Integral of `f` over the disc of radius `r` centered at the origin, in
/// polar coordinates with Gauss-Legendre in the radius and a trapezoidal rule
/// in the angle (spectrally accurate for periodic integrands).
pub fn integrate_disc(f: impl Fn(f64, f64) -> f64, r: f64, n_r: usize, n_theta: usize) -> f64 {
    let (rs, wr) = gauss_legendre_on(n_r, 0.0, r);
    let dtheta = std::f64::consts::TAU / n_theta as f64;
    let mut sum = 0.0;
    for (ri, wri) in rs.iter().zip(&wr) {
        let mut ring = 0.0;
        for k in 0..n_theta {
            let theta = k as f64 * dtheta;
            ring += f(ri * theta.cos(), ri * theta.sin());
        }
        sum += wri * ri * ring * dtheta;
    }
    sum
}

/// Adaptive Simpson integration for piecewise-smooth integrands.
///
/// Returns `(value, error_estimate)`. `min_depth` forces subdivision past
/// accidental agreement at jump discontinuities; `max_depth` caps recursion,
/// at which point the remaining error of a width-w cell is O(w) and enters
/// the returned estimate.
pub fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    min_depth: u32,
    max_depth: u32,
) -> (f64, f64) {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 0, min_depth, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    min_depth: u32,
    max_depth: u32,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= max_depth {
        return (left + right, delta.abs());
    }
    if depth >= min_depth && delta.abs() <= 15.0 * tol {
        return (left + right + delta / 15.0, delta.abs() / 15.0);
    }
    let (lv, le) = simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1, min_depth, max_depth);
    let (rv, re) = simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1, min_depth, max_depth);
    (lv + rv, le + re)
}
