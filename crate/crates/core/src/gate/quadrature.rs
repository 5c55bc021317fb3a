//! Adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// `breaks` are interior points where `f` may have kinks; they seed the
/// initial partition.
pub fn integrate<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Complex64 {
    if !(b > a) {
        return Complex64::new(0.0, 0.0);
    }
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    pts.dedup();

    let mut stack: Vec<(f64, f64, usize)> = pts.windows(2).map(|w| (w[0], w[1], 0)).collect();
    let total_len = b - a;
    let mut sum = Complex64::new(0.0, 0.0);
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = kronrod(&mut f, lo, hi);
        let budget = tol * (hi - lo) / total_len;
        if err <= budget.max(1e-300) || depth >= 40 || hi - lo < 1e-14 * total_len {
            sum += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    sum
}
