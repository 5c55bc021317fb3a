//! Exact window integrals of exponential sums.
//!
//! Sine and constant pulses are sums of `c·e^{iμt}` on a window, so every
//! Magnus integral reduces to one- and two-dimensional integrals of
//! exponentials. Those are evaluated through divided differences of `exp`
//! (Hermite–Genocchi), which stay accurate when rates nearly coincide.

use num_complex::Complex64;

const SERIES_RADIUS: f64 = 0.5;

/// `(e^z − 1)/z`, i.e. the divided difference `exp[0, z]`.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        // Σ z^k/(k+1)!
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..12 {
            term *= z / (k as f64 + 1.0);
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `exp[a, b]`.
pub fn exp_dd2(a: Complex64, b: Complex64) -> Complex64 {
    a.exp() * phi1(b - a)
}

/// `exp[z0, z1, z2]` for arbitrary, possibly coincident, points.
pub fn exp_dd3(z0: Complex64, z1: Complex64, z2: Complex64) -> Complex64 {
    let pts = [z0, z1, z2];
    // outer pair = farthest pair
    let pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
    let (a, b, c) = pairs
        .iter()
        .copied()
        .max_by(|x, y| (pts[x.0] - pts[x.1]).norm().partial_cmp(&(pts[y.0] - pts[y.1]).norm()).expect("finite"))
        .expect("three pairs");
    let (za, zb, zc) = (pts[a], pts[b], pts[c]);
    let spread = (za - zb).norm();
    if spread >= SERIES_RADIUS {
        return (exp_dd2(zc, zb) - exp_dd2(za, zc)) / (zb - za);
    }
    // Σ_{n≥2} h_{n−2}(x)/n! around the centroid
    let m = (za + zb + zc) / 3.0;
    let (x0, x1, x2) = (za - m, zb - m, zc - m);
    let mut h12 = Complex64::new(1.0, 0.0); // h_k(x1, x2)
    let mut h012 = Complex64::new(1.0, 0.0); // h_k(x0, x1, x2)
    let mut x2k = Complex64::new(1.0, 0.0);
    let mut fact = 2.0;
    let mut sum = h012 / fact;
    // |x| < 0.5 here, so 24 terms are far below f64 resolution
    for k in 1..24 {
        x2k *= x2;
        h12 = x2k + x1 * h12;
        h012 = h12 + x0 * h012;
        fact *= (k + 2) as f64;
        sum += h012 / fact;
    }
    m.exp() * sum
}

/// `∫_{x0}^{x1} e^{p t} dt` (zero when the interval is empty).
pub fn exp_integral(p: Complex64, x0: f64, x1: f64) -> Complex64 {
    if x1 <= x0 {
        return Complex64::new(0.0, 0.0);
    }
    let l = x1 - x0;
    (p * x0).exp() * l * phi1(p * l)
}

/// `∫_{x0}^{x1} dt ∫_{x0}^{t} ds e^{p t + q s}`.
pub fn exp_simplex(p: Complex64, q: Complex64, x0: f64, x1: f64) -> Complex64 {
    if x1 <= x0 {
        return Complex64::new(0.0, 0.0);
    }
    let l = x1 - x0;
    let zero = Complex64::new(0.0, 0.0);
    ((p + q) * x0).exp() * l * l * exp_dd3(zero, p * l, (p + q) * l)
}

/// Half-open time window `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

/// `∫_{t∈w1} ∫_{s∈w2, s<t} e^{p t + q s} ds dt`.
pub fn ordered_rectangle(p: Complex64, q: Complex64, w1: Window, w2: Window) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    // t inside both windows: inner integral runs from w2.start to t
    let lo = w1.start.max(w2.start);
    let hi = w1.end.min(w2.end);
    if hi > lo {
        total += exp_integral(q, w2.start, lo) * exp_integral(p, lo, hi) + exp_simplex(p, q, lo, hi);
    }
    // t beyond w2: inner integral covers all of w2
    let lo = w1.start.max(w2.end);
    if w1.end > lo {
        total += exp_integral(p, lo, w1.end) * exp_integral(q, w2.start, w2.end);
    }
    total
}

/// Sum of exponentials `Σ_k c_k e^{i μ_k t}` restricted to a window.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSum {
    pub window: Window,
    pub terms: Vec<(Complex64, f64)>,
}

impl ExpSum {
    /// `∫ f(t) e^{iωt} dt` over the window.
    pub fn fourier(&self, omega: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(c, mu)| c * exp_integral(Complex64::new(0.0, mu + omega), self.window.start, self.window.end))
            .sum()
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        if t < self.window.start || t > self.window.end {
            return Complex64::new(0.0, 0.0);
        }
        self.terms.iter().map(|&(c, mu)| c * Complex64::new(0.0, mu * t).exp()).sum()
    }
}

/// `∫∫ f(t) g(s) sin(ω|t − s|) dt ds` for two exponential sums.
pub fn sine_kernel_double(f: &ExpSum, g: &ExpSum, omega: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let mut total = Complex64::new(0.0, 0.0);
    for &(c, mu) in &f.terms {
        for &(d, kappa) in &g.terms {
            let mut acc = Complex64::new(0.0, 0.0);
            for sigma in [1.0, -1.0] {
                let w = sigma * omega;
                // t > s: e^{iw(t−s)}
                let a = ordered_rectangle(i * (mu + w), i * (kappa - w), f.window, g.window);
                // s > t: e^{iw(s−t)}
                let b = ordered_rectangle(i * (kappa + w), i * (mu - w), g.window, f.window);
                acc += sigma * (a + b);
            }
            total += c * d * acc / (2.0 * i);
        }
    }
    total
}
