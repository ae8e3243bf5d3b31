//! Adaptive Gauss–Kronrod integration and a Fourier-integral driver for
//! slowly decaying oscillatory integrands on the half line.

use crate::error::{Error, Result};

// 15-point Kronrod abscissae on [0, 1] (the rule is symmetric); odd indices
// are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_64, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Tolerances for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-14, rel: 1e-11, max_intervals: 4000 }
    }
}

/// Integral estimate together with a (conservative) absolute error bound.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<const M: usize> {
    pub value: [f64; M],
    pub error: [f64; M],
    pub evaluations: usize,
}

/// Applies the G7/K15 pair on `[a, b]`; the error is `|K15 - G7|`.
pub fn gauss_kronrod<const M: usize, F>(f: &mut F, a: f64, b: f64) -> ([f64; M], [f64; M])
where
    F: FnMut(f64) -> [f64; M],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = [0.0; M];
    let mut gauss = [0.0; M];
    for m in 0..M {
        kronrod[m] = WGK[7] * fc[m];
        gauss[m] = WG[3] * fc[m];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let lo = f(center - dx);
        let hi = f(center + dx);
        for m in 0..M {
            let s = lo[m] + hi[m];
            kronrod[m] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[m] += WG[j / 2] * s;
            }
        }
    }
    let mut value = [0.0; M];
    let mut error = [0.0; M];
    for m in 0..M {
        value[m] = kronrod[m] * half;
        error[m] = ((kronrod[m] - gauss[m]) * half).abs();
    }
    (value, error)
}

struct Segment<const M: usize> {
    a: f64,
    b: f64,
    value: [f64; M],
    error: [f64; M],
}

impl<const M: usize> Segment<M> {
    fn worst(&self) -> f64 {
        self.error.iter().cloned().fold(0.0, f64::max)
    }
}

/// Globally adaptive bisection (QAG-style) for a vector-valued integrand.
/// Every component must satisfy `err <= max(abs, rel * |value|)`.
pub fn adaptive<const M: usize, F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate<M>>
where
    F: FnMut(f64) -> [f64; M],
{
    if a == b {
        return Ok(Estimate { value: [0.0; M], error: [0.0; M], evaluations: 0 });
    }
    let (value, error) = gauss_kronrod(&mut f, a, b);
    let mut segments = vec![Segment { a, b, value, error }];
    let mut evaluations = 15;

    loop {
        let mut total = [0.0; M];
        let mut total_err = [0.0; M];
        for s in &segments {
            for m in 0..M {
                total[m] += s.value[m];
                total_err[m] += s.error[m];
            }
        }
        let converged = (0..M).all(|m| total_err[m] <= tol.abs.max(tol.rel * total[m].abs()));
        if converged {
            return Ok(Estimate { value: total, error: total_err, evaluations });
        }
        if segments.len() >= tol.max_intervals {
            return Err(Error::Quadrature { value: total[0], error: total_err[0] });
        }

        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.worst().total_cmp(&y.1.worst()))
            .expect("at least one segment");
        let seg = segments.swap_remove(idx);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval collapsed to adjacent floats; nothing left to refine.
            return Err(Error::Quadrature { value: total[0], error: total_err[0] });
        }
        let (lv, le) = gauss_kronrod(&mut f, seg.a, mid);
        let (rv, re) = gauss_kronrod(&mut f, mid, seg.b);
        evaluations += 30;
        segments.push(Segment { a: seg.a, b: mid, value: lv, error: le });
        segments.push(Segment { a: mid, b: seg.b, value: rv, error: re });
    }
}

/// Scalar convenience wrapper around [`adaptive`].
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let est = adaptive(|x| [f(x)], a, b, tol)?;
    Ok((est.value[0], est.error[0]))
}

/// Which trigonometric weight multiplies the amplitude in [`fourier_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Sin,
    Cos,
}

impl Trig {
    fn eval(self, x: f64) -> f64 {
        match self {
            Trig::Sin => x.sin(),
            Trig::Cos => x.cos(),
        }
    }
}

/// Options for [`fourier_integral`].
#[derive(Debug, Clone, Copy)]
pub struct FourierOptions {
    /// Relative accuracy requested for the extrapolated result.
    pub rel: f64,
    /// Frequency beyond which the amplitude is assumed to be in its smooth,
    /// monotone asymptotic regime; cycles are summed at least this far.
    pub structure_scale: f64,
    pub max_cycles: usize,
}

impl Default for FourierOptions {
    fn default() -> Self {
        Self { rel: 1e-11, structure_scale: 20.0, max_cycles: 20_000 }
    }
}

/// `∫_0^∞ amplitude(ω) · trig(ω t) dω` for `t > 0`.
///
/// The half line is cut into half periods `[kπ/t, (k+1)π/t]`; each piece is
/// integrated adaptively and the partial sums (an eventually alternating
/// sequence) are accelerated with Wynn's epsilon algorithm.
pub fn fourier_integral<F>(amplitude: F, t: f64, trig: Trig, opts: FourierOptions) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    if !(t > 0.0) {
        return Err(Error::Domain(format!("fourier_integral needs t > 0, got {t}")));
    }
    let period = std::f64::consts::PI / t;
    let min_cycles = ((opts.structure_scale / period).ceil() as usize).max(8) + 8;
    let piece_tol = Tolerance { abs: 0.0, rel: 1e-13, max_intervals: 2000 };

    let mut partial = Vec::with_capacity(64);
    let mut sum = 0.0;
    let mut scale: f64 = 0.0;
    let mut previous: Option<f64> = None;
    let mut streak = 0;

    for k in 0..opts.max_cycles {
        let a = k as f64 * period;
        let b = a + period;
        let tol = Tolerance { abs: 1e-15 * scale.max(f64::MIN_POSITIVE), ..piece_tol };
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let (piece, _) = integrate(|u| amplitude(a + u) * trig.eval(u * t), 0.0, b - a, tol)?;
        let piece = sign * piece;
        sum += piece;
        scale = scale.max(sum.abs()).max(piece.abs());
        partial.push(sum);

        if k + 1 < min_cycles {
            continue;
        }
        let estimate = wynn_epsilon(&partial);
        if let Some(prev) = previous {
            let change = (estimate - prev).abs();
            if change <= opts.rel * estimate.abs().max(1e-300) || change <= 100.0 * f64::EPSILON * scale {
                streak += 1;
                if streak >= 3 {
                    return Ok((estimate, change));
                }
            } else {
                streak = 0;
            }
        }
        previous = Some(estimate);
    }
    let estimate = wynn_epsilon(&partial);
    Err(Error::Quadrature { value: estimate, error: (estimate - previous.unwrap_or(0.0)).abs() })
}

/// Wynn's epsilon extrapolation of the limit of a sequence of partial sums.
/// Only the most recent 40 entries are used to limit round-off growth.
pub fn wynn_epsilon(seq: &[f64]) -> f64 {
    let window = &seq[seq.len().saturating_sub(40)..];
    let n = window.len();
    if n < 3 {
        return *window.last().unwrap_or(&0.0);
    }
    // prev = column k-1, cur = column k; column 0 is the sequence itself.
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = window.to_vec();
    let mut best = cur[n - 1];
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == 0.0 || !diff.is_finite() {
                return best;
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            if let Some(&v) = cur.last() {
                if v.is_finite() {
                    best = v;
                } else {
                    return best;
                }
            }
        }
    }
    best
}

/// Fixed-order Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration
/// on the Legendre recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
