//! Small numerical kernels shared by the solvers: finite differences on
//! uniform grids, cumulative trapezoid sums, local cubic interpolation,
//! adaptive Simpson quadrature and a monotone (Fritsch–Carlson) cubic.

/// Evaluate uniformly spaced samples at `x` by 4-point Lagrange interpolation
/// on the stencil nearest to `x`. Falls back to linear interpolation for
/// fewer than four samples.
pub fn cubic_eval(samples: &[f64], spacing: f64, x: f64) -> f64 {
    let n = samples.len();
    match n {
        0 => f64::NAN,
        1 => samples[0],
        2 | 3 => {
            let s = (x / spacing).clamp(0.0, (n - 1) as f64);
            let k = (s.floor() as usize).min(n - 2);
            let t = s - k as f64;
            samples[k] * (1.0 - t) + samples[k + 1] * t
        }
        _ => {
            let s = x / spacing;
            let k = s.floor() as isize;
            let start = (k - 1).clamp(0, n as isize - 4) as usize;
            let t = s - start as f64;
            // nodes at 0, 1, 2, 3 relative to `start`
            let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
            let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
            let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
            let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
            l0 * samples[start]
                + l1 * samples[start + 1]
                + l2 * samples[start + 2]
                + l3 * samples[start + 3]
        }
    }
}

/// Fourth-order first derivative of uniformly spaced samples: centered
/// five-point stencil in the interior, one-sided five-point stencils at the
/// first and last two nodes. Needs at least five samples; shorter inputs get
/// the second-order scheme.
pub fn derivative_4th(samples: &[f64], spacing: f64) -> Vec<f64> {
    let n = samples.len();
    if n < 5 {
        return derivative_2nd(samples, spacing);
    }
    let f = samples;
    let c = 1.0 / (12.0 * spacing);
    let mut d = vec![0.0; n];
    d[0] = c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    d[1] = c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    for i in 2..n - 2 {
        d[i] = c * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
    }
    let m = n - 1;
    d[m] = -c * (-25.0 * f[m] + 48.0 * f[m - 1] - 36.0 * f[m - 2] + 16.0 * f[m - 3] - 3.0 * f[m - 4]);
    d[m - 1] = -c * (-3.0 * f[m] - 10.0 * f[m - 1] + 18.0 * f[m - 2] - 6.0 * f[m - 3] + f[m - 4]);
    d
}

/// Second-order first derivative: centered in the interior, one-sided
/// three-point at the ends.
pub fn derivative_2nd(samples: &[f64], spacing: f64) -> Vec<f64> {
    let n = samples.len();
    let mut d = vec![0.0; n];
    derivative_2nd_into(samples.iter().copied(), n, spacing, &mut d);
    d
}

/// Second-order derivative of a strided sequence written into `out`.
pub fn derivative_2nd_into<I>(values: I, n: usize, spacing: f64, out: &mut [f64])
where
    I: IntoIterator<Item = f64>,
{
    let f: Vec<f64> = values.into_iter().take(n).collect();
    match n {
        0 => {}
        1 => out[0] = 0.0,
        2 => {
            let s = (f[1] - f[0]) / spacing;
            out[0] = s;
            out[1] = s;
        }
        _ => {
            let inv = 0.5 / spacing;
            out[0] = inv * (-3.0 * f[0] + 4.0 * f[1] - f[2]);
            for i in 1..n - 1 {
                out[i] = inv * (f[i + 1] - f[i - 1]);
            }
            out[n - 1] = inv * (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]);
        }
    }
}

/// Running composite-trapezoid integral; element k holds ∫ from node 0 to node k.
pub fn cumulative_trapezoid(values: &[f64], spacing: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * spacing * (w[0] + w[1]);
        out.push(acc);
    }
    out.truncate(values.len());
    out
}

/// Adaptive Simpson quadrature to relative tolerance `rel_tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Piecewise cubic Hermite interpolant with Fritsch–Carlson monotone slopes.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `x` must be strictly increasing with at least two points.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Option<Self> {
        let n = x.len();
        if n < 2 || y.len() != n || x.windows(2).any(|w| !(w[1] > w[0])) {
            return None;
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let secant: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut m = vec![0.0; n];
        if n == 2 {
            m[0] = secant[0];
            m[1] = secant[0];
        } else {
            for k in 1..n - 1 {
                let (s0, s1) = (secant[k - 1], secant[k]);
                m[k] = if s0 * s1 <= 0.0 {
                    0.0
                } else {
                    // weighted harmonic mean (Fritsch–Butland form)
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    (w1 + w2) / (w1 / s0 + w2 / s1)
                };
            }
            m[0] = end_slope(h[0], h[1], secant[0], secant[1]);
            m[n - 1] = end_slope(h[n - 2], h[n - 3], secant[n - 2], secant[n - 3]);
        }
        Some(Self { x, y, slopes: m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn interval(&self, x: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&k| k <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        }
    }

    /// Value, first and second derivative at `x`.
    pub fn eval_all(&self, x: f64) -> (f64, f64, f64) {
        let k = self.interval(x);
        let h = self.x[k + 1] - self.x[k];
        let t = (x - self.x[k]) / h;
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let d = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        let dd = ((12.0 * t - 6.0) * y0
            + (6.0 * t - 4.0) * m0
            + (-12.0 * t + 6.0) * y1
            + (6.0 * t - 2.0) * m1)
            / (h * h);
        (v, d, dd)
    }
}

// Three-point end slope, limited to preserve monotonicity.
fn end_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if m.signum() != s0.signum() {
        0.0
    } else if s0.signum() != s1.signum() && m.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        m
    }
}

/// Sup-norm of a slice, ignoring nothing (NaN propagates as NaN).
pub fn sup_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0_f64, |acc, v| {
        if v.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(v.abs())
        }
    })
}
