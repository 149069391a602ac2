//! Adaptive quadrature: Simpson (endpoint-inclusive) and Gauss–Kronrod 7/15
//! (open, safe for integrable endpoint singularities).

const MAX_DEPTH: u32 = 60;

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -adaptive_simpson(f, b, a, tol);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 0)
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
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol || !(m > a && b > m) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1)
}

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
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// `(K15, |K15 - G7|, K15 of |f|)` on one panel.
fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for idx in 0..7 {
        let dx = r * XGK[idx];
        let (lo, hi) = (f(c - dx), f(c + dx));
        k += WGK[idx] * (lo + hi);
        abs += WGK[idx] * (lo.abs() + hi.abs());
        if idx % 2 == 1 {
            g += WG[idx / 2] * (lo + hi);
        }
    }
    (k * r, (k - g).abs() * r, abs * r)
}

/// Adaptive Gauss–Kronrod on `[a, b]` to absolute tolerance `tol`, or to
/// rounding level where `tol` is below it. Never
/// evaluates `f` at the interval ends.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -gk_step(f, b, a, tol, 0);
    }
    gk_step(f, a, b, tol, 0)
}

fn gk_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err, abs) = kronrod(f, a, b);
    let m = 0.5 * (a + b);
    // Below the rounding floor of the panel the estimate carries no signal.
    if err <= tol.max(50.0 * f64::EPSILON * abs) || depth >= MAX_DEPTH || !(m > a && b > m) {
        return val;
    }
    gk_step(f, a, m, tol / 2.0, depth + 1) + gk_step(f, m, b, tol / 2.0, depth + 1)
}

/// Gauss–Kronrod over `[a, b]` split at the given interior breakpoints.
pub fn gauss_kronrod_split<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&p| p > a && p < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(f64::total_cmp);
    let pieces = (pts.len() - 1) as f64;
    pts.windows(2)
        .map(|w| gauss_kronrod(f, w[0], w[1], tol / pieces))
        .sum()
}
