//! Gauss-Kronrod quadrature.

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

/// One 15-point Kronrod panel; returns (estimate, |K15 - G7|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let (k, e, _) = gk15_abs(f, a, b);
    (k, e)
}

/// As `gk15`, plus the Kronrod estimate of `int |f|`.
fn gk15_abs<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut abs = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (fl, fr) = (f(c - dx), f(c + dx));
        let s = fl + fr;
        k += WGK[j] * s;
        abs += WGK[j] * (fl.abs() + fr.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs(), abs * h.abs())
}

/// Nodes and weights of the 15-point Kronrod rule mapped to `[a, b]`.
pub fn kronrod_panel(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (0..15).map(move |k| {
        if k < 7 {
            (c - h * XGK[k], h * WGK[k])
        } else if k == 7 {
            (c, h * WGK[7])
        } else {
            let j = 14 - k;
            (c + h * XGK[j], h * WGK[j])
        }
    })
}

/// Composite 15-point rule on `panels` equal panels of `[a, b]`.
pub fn composite_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| kronrod_panel(a + p as f64 * h, a + (p + 1) as f64 * h))
        .collect()
}

/// Panels whose error estimate is at this multiple of `eps * int |f|` are
/// accepted: their error is roundoff in `f`, bisection cannot reduce it.
const ROUNDOFF_FLOOR: f64 = 50.0 * f64::EPSILON;
/// Bisections per call before the remaining panels are taken as they are.
const MAX_SPLITS: usize = 20_000;

/// Adaptive bisection on Kronrod panels.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, err, abs) = gk15_abs(&mut f, a, b);
    let mut total = 0.0;
    let mut stack = vec![(a, b, whole, err, abs, 0u32)];
    let budget = abs_tol.max(rel_tol * whole.abs());
    let width = (b - a).abs();
    let mut splits = 0;
    while let Some((lo, hi, est, e, abs, depth)) = stack.pop() {
        let share = budget * ((hi - lo).abs() / width);
        if e <= share.max(1e-300) || e <= ROUNDOFF_FLOOR * abs || depth >= 40 || splits >= MAX_SPLITS {
            total += est;
            continue;
        }
        splits += 1;
        let mid = 0.5 * (lo + hi);
        let (l, el, al) = gk15_abs(&mut f, lo, mid);
        let (r, er, ar) = gk15_abs(&mut f, mid, hi);
        stack.push((mid, hi, r, er, ar, depth + 1));
        stack.push((lo, mid, l, el, al, depth + 1));
    }
    total
}

/// `integrate` on each piece of `[a, b]` cut at the interior `breaks`.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> f64 {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
    cuts.push(b);
    cuts.windows(2).map(|w| integrate(&mut f, w[0], w[1], abs_tol, rel_tol)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_exponential() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-14, 1e-14);
        assert!((v - 0.0).abs() < 1e-13);
        let v = integrate(f64::exp, 0.0, 1.0, 1e-15, 1e-15);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn oscillatory() {
        let v = integrate(|x| (50.0 * x).cos(), 0.0, 3.0, 1e-14, 1e-14);
        assert!((v - (150f64).sin() / 50.0).abs() < 1e-13);
    }

    #[test]
    fn composite_weights_sum() {
        let s: f64 = composite_nodes(-1.0, 2.0, 7).iter().map(|p| p.1).sum();
        assert!((s - 3.0).abs() < 1e-14);
    }
}
