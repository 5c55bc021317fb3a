//! Fixed-step classical Runge–Kutta for complex linear systems.

use num_complex::Complex64;

/// Advances `y' = f(t, y)` by one RK4 step of size `h`.
///
/// `f` writes the derivative into its third argument.
pub fn rk4_step<F>(f: &mut F, t: f64, y: &mut [Complex64], h: f64, work: &mut Rk4Workspace)
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let n = y.len();
    work.resize(n);
    let Rk4Workspace { k1, k2, k3, k4, tmp } = work;
    f(t, y, k1);
    for i in 0..n {
        tmp[i] = y[i] + k1[i] * (0.5 * h);
    }
    f(t + 0.5 * h, tmp, k2);
    for i in 0..n {
        tmp[i] = y[i] + k2[i] * (0.5 * h);
    }
    f(t + 0.5 * h, tmp, k3);
    for i in 0..n {
        tmp[i] = y[i] + k3[i] * h;
    }
    f(t + h, tmp, k4);
    for i in 0..n {
        y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
    }
}

#[derive(Debug, Default, Clone)]
pub struct Rk4Workspace {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4Workspace {
    fn resize(&mut self, n: usize) {
        if self.k1.len() != n {
            let z = Complex64::new(0.0, 0.0);
            for v in [&mut self.k1, &mut self.k2, &mut self.k3, &mut self.k4, &mut self.tmp] {
                v.clear();
                v.resize(n, z);
            }
        }
    }
}

/// Integrates from `t0` to `t1` in `steps` equal steps, calling `observe`
/// after every step (and once at `t0`).
pub fn integrate<F, O>(mut f: F, y: &mut [Complex64], t0: f64, t1: f64, steps: usize, mut observe: O)
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
    O: FnMut(f64, &[Complex64]),
{
    let mut work = Rk4Workspace::default();
    let h = (t1 - t0) / steps.max(1) as f64;
    observe(t0, y);
    for k in 0..steps.max(1) {
        let t = t0 + k as f64 * h;
        rk4_step(&mut f, t, y, h, &mut work);
        observe(t + h, y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_phase_is_fourth_order() {
        let run = |steps: usize| {
            let mut y = vec![Complex64::new(1.0, 0.0)];
            integrate(
                |_, y, d| d[0] = Complex64::new(0.0, -2.0) * y[0],
                &mut y,
                0.0,
                3.0,
                steps,
                |_, _| {},
            );
            (y[0] - Complex64::new(0.0, -6.0).exp()).norm()
        };
        let (e1, e2) = (run(100), run(200));
        assert!(e1 < 1e-5);
        assert!((e1 / e2 - 16.0).abs() < 1.0, "{}", e1 / e2);
    }
}
