//! The F-functions of the Drude kernels and the Matsubara series built on them.
//!
//! Everything here is dimensionless: times are `t_s = ω_c t`, inverse
//! temperatures `β_s = βħω_c`, and the Matsubara frequencies are
//! `ν_n = 2πn/β_s`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::ThermalParams;

/// Half-width of the window around `β_s = 2πk` where the cot pole and the
/// `n = k` series term are combined analytically.
pub const REMOVABLE_WINDOW: f64 = 1e-4;
const REMOVABLE_PROBE: f64 = 1e-3;

/// Which of the four F-functions (and its matching series weight `ν^{-p}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FKind {
    F0,
    F1,
    F2,
    F1Tilde,
}

impl FKind {
    pub const ALL: [FKind; 4] = [FKind::F0, FKind::F1, FKind::F2, FKind::F1Tilde];

    /// Power of `ν_n` dividing the series term.
    fn power(self) -> i32 {
        match self {
            FKind::F0 => 0,
            FKind::F1 | FKind::F1Tilde => 1,
            FKind::F2 => 2,
        }
    }

    /// Value at `x >= 0`.
    pub fn eval(self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        if x < 1.0 {
            return self.series(x);
        }
        let e = (-x).exp();
        match self {
            FKind::F0 => -(-x).exp_m1(),
            FKind::F1 => 1.0 - (1.0 + x) * e,
            FKind::F2 => 1.0 - (1.0 + x + 0.5 * x * x) * e,
            FKind::F1Tilde => 1.0 - (1.0 + x - 0.5 * x * x) * e,
        }
    }

    /// `e^{-x} Σ_{k>n} x^k/k!`, free of the cancellation in `1 - P(x)e^{-x}`.
    fn series(self, x: f64) -> f64 {
        let first = match self {
            FKind::F0 => 1,
            FKind::F1 | FKind::F1Tilde => 2,
            FKind::F2 => 3,
        };
        let mut term = 1.0;
        for k in 1..=first {
            term *= x / k as f64;
        }
        let mut sum: f64 = 0.0;
        let mut k = first;
        while term > 1e-18 * sum.max(f64::MIN_POSITIVE) && k < first + 40 {
            sum += term;
            k += 1;
            term *= x / k as f64;
        }
        if self == FKind::F1Tilde {
            // F̃_1 = F_1 + (x²/2) e^{-x}
            sum += 0.5 * x * x;
        }
        sum * (-x).exp()
    }

    /// Derivative with respect to the argument.
    pub fn derivative(self, x: f64) -> f64 {
        let e = (-x).exp();
        match self {
            FKind::F0 => e,
            FKind::F1 => x * e,
            FKind::F2 => 0.5 * x * x * e,
            FKind::F1Tilde => (2.0 * x - 0.5 * x * x) * e,
        }
    }

    /// `1 - F(x)` bound used to decide when the transient part is negligible.
    fn transient_bound(x: f64) -> f64 {
        (1.0 + x + 0.5 * x * x) * (-x).exp()
    }
}

pub fn f0(t_s: f64) -> f64 {
    FKind::F0.eval(t_s)
}
pub fn f1(t_s: f64) -> f64 {
    FKind::F1.eval(t_s)
}
pub fn f2(t_s: f64) -> f64 {
    FKind::F2.eval(t_s)
}
pub fn f1_tilde(t_s: f64) -> f64 {
    FKind::F1Tilde.eval(t_s)
}

/// The four G-functions at one `(β_s, t_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GValues {
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
    pub g1_tilde: f64,
}

impl GValues {
    pub fn get(&self, kind: FKind) -> f64 {
        match kind {
            FKind::F0 => self.g0,
            FKind::F1 => self.g1,
            FKind::F2 => self.g2,
            FKind::F1Tilde => self.g1_tilde,
        }
    }

    fn set(&mut self, kind: FKind, v: f64) {
        match kind {
            FKind::F0 => self.g0 = v,
            FKind::F1 => self.g1 = v,
            FKind::F2 => self.g2 = v,
            FKind::F1Tilde => self.g1_tilde = v,
        }
    }
}

/// `cot(β_s/2)`, or `None` if `β_s` is inside the removable window of a pole,
/// together with the pole index `k`.
fn pole_index(beta_s: f64) -> Option<u64> {
    let k = (beta_s / (2.0 * PI)).round();
    if k >= 1.0 && (beta_s - 2.0 * PI * k).abs() < REMOVABLE_WINDOW {
        Some(k as u64)
    } else {
        None
    }
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

/// Smallest series index past which the power-law tail may be expanded in
/// `ν^{-2}` (ν_{n+1} ≥ 4) and handed to Euler–Maclaurin.
fn min_terms(beta_s: f64) -> usize {
    ((2.0 * beta_s / PI).ceil() as usize).max(16)
}

/// The pair `cot(β/2) g(1) + (4/β) g(ν_k)/(ν_k² - 1)` near `β = 2πk`, where both
/// pieces have simple poles that cancel. `g` is evaluated at `ν`, `g_1` and
/// `dg_1` are `g(1)` and `g'(1)`.
fn removable_pair<G>(beta_s: f64, k: u64, g: G, g_1: f64, dg_1: f64) -> f64
where
    G: Fn(f64) -> f64,
{
    let two_pi_k = 2.0 * PI * k as f64;
    let limit = (dg_1 - 0.5 * g_1) / (PI * k as f64);
    let direct = |b: f64| {
        let nu = two_pi_k / b;
        cot(0.5 * b) * g_1 + 4.0 / b * g(nu) / (nu * nu - 1.0)
    };
    let slope = (direct(two_pi_k + REMOVABLE_PROBE) - direct(two_pi_k - REMOVABLE_PROBE)) / (2.0 * REMOVABLE_PROBE);
    limit + slope * (beta_s - two_pi_k)
}

/// Hurwitz zeta `ζ(s, a) = Σ_{n≥0} (n+a)^{-s}` for integer `s ≥ 2`, `a ≥ 1`,
/// by Euler–Maclaurin after 16 explicit terms.
pub fn hurwitz_zeta(s: i32, a: f64) -> f64 {
    // B_{2j}/(2j)!
    const B: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
        -3617.0 / 10_670_622_842_880_000.0,
    ];
    let sf = s as f64;
    let mut sum = 0.0;
    for n in 0..16 {
        sum += (a + n as f64).powi(-s);
    }
    let b = a + 16.0;
    sum += b.powf(1.0 - sf) / (sf - 1.0) + 0.5 * b.powi(-s);
    // rising factorial s(s+1)...(s+2j-2) times b^{-s-2j+1}
    let mut rising = sf;
    let mut power = b.powi(-s - 1);
    for (j, bj) in B.iter().enumerate() {
        let term = bj * rising * power;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        let m = 2 * j as i32 + 1;
        rising *= (sf + m as f64) * (sf + m as f64 + 1.0);
        power /= b * b;
    }
    sum
}

/// `Σ_{n>N} 1/(ν_n^p (ν_n² - 1))` with `ν_n = c n`, via the expansion
/// `1/(ν²-1) = Σ_j ν^{-2-2j}` (valid because `ν_{N+1} ≥ 4`).
fn power_tail(c: f64, p: i32, n_last: usize) -> f64 {
    let a = (n_last + 1) as f64;
    let nu_first = c * a;
    let mut total = 0.0;
    for j in 0..60 {
        let s = p + 2 + 2 * j;
        let term = c.powi(-s) * hurwitz_zeta(s, a);
        total += term;
        if term.abs() < 1e-18 * total.abs() || nu_first.powi(-2 * j) < 1e-18 {
            break;
        }
    }
    total
}

/// `G_0, G_1, G_2, G̃_1` at `(β_s, t_s)`.
///
/// The series is split as `F(ν t) = 1 - [1 - F(ν t)]`: the transient bracket
/// decays like `e^{-ν t}` and is summed until it drops below
/// `thermal.matsubara_tol`; the remaining power-law part is added exactly.
pub fn g_values(beta_s: f64, t_s: f64, thermal: &ThermalParams) -> Result<GValues> {
    check_beta(beta_s)?;
    if !(t_s >= 0.0) {
        return Err(Error::Domain(format!("t_s must be >= 0, got {t_s}")));
    }
    if t_s == 0.0 {
        return Ok(GValues::default());
    }
    if t_s.is_infinite() {
        return g_steady(beta_s, thermal);
    }
    let c = 2.0 * PI / beta_s;
    let pole = pole_index(beta_s);
    let n_min = min_terms(beta_s);

    let mut sums = [0.0f64; 4];
    let mut n = 0usize;
    loop {
        n += 1;
        if n > thermal.matsubara_max_terms {
            let x = c * n as f64 * t_s;
            return Err(Error::Truncation { terms: n - 1, remainder: FKind::transient_bound(x) });
        }
        let nu = c * n as f64;
        let x = nu * t_s;
        if Some(n as u64) != pole {
            let denom = nu * nu - 1.0;
            for (slot, kind) in sums.iter_mut().zip(FKind::ALL) {
                *slot += kind.eval(x) / (nu.powi(kind.power()) * denom);
            }
        }
        if n >= n_min && FKind::transient_bound(x) < thermal.matsubara_tol {
            break;
        }
    }
    let tails = [power_tail(c, 0, n), power_tail(c, 1, n), power_tail(c, 2, n)];

    let mut out = GValues::default();
    for (i, kind) in FKind::ALL.into_iter().enumerate() {
        let tail = tails[kind.power() as usize];
        let series = 4.0 / beta_s * (sums[i] + tail);
        let head = match pole {
            None => cot(0.5 * beta_s) * kind.eval(t_s),
            Some(k) => {
                let p = kind.power();
                let g = |nu: f64| kind.eval(nu * t_s) / nu.powi(p);
                let g_1 = kind.eval(t_s);
                let dg_1 = t_s * kind.derivative(t_s) - p as f64 * g_1;
                removable_pair(beta_s, k, g, g_1, dg_1)
            }
        };
        out.set(kind, head + series);
    }
    Ok(out)
}

/// `t_s → ∞` limits of the G-functions (every F → 1). `G_0(∞) = 2/β_s`.
pub fn g_steady(beta_s: f64, _thermal: &ThermalParams) -> Result<GValues> {
    check_beta(beta_s)?;
    let c = 2.0 * PI / beta_s;
    let pole = pole_index(beta_s);
    let n_last = min_terms(beta_s);
    let mut sums = [0.0f64; 3];
    for n in 1..=n_last {
        if Some(n as u64) == pole {
            continue;
        }
        let nu = c * n as f64;
        for (p, slot) in sums.iter_mut().enumerate() {
            *slot += 1.0 / (nu.powi(p as i32) * (nu * nu - 1.0));
        }
    }
    for (p, slot) in sums.iter_mut().enumerate() {
        *slot += power_tail(c, p as i32, n_last);
    }
    let head = |p: i32| match pole {
        None => cot(0.5 * beta_s),
        Some(k) => removable_pair(beta_s, k, |nu: f64| nu.powi(-p), 1.0, -p as f64),
    };
    let g = |p: i32| head(p) + 4.0 / beta_s * sums[p as usize];
    Ok(GValues { g0: g(0), g1: g(1), g2: g(2), g1_tilde: g(1) })
}

/// Matsubara form of `η̃_{e,R}(t_s)/γ_s` for the Drude density:
/// `cot(β_s/2) e^{-t_s} + (4/β_s) Σ ν_n e^{-ν_n t_s}/(ν_n² - 1)`.
pub fn eta_r_series(beta_s: f64, t_s: f64, thermal: &ThermalParams) -> Result<f64> {
    check_beta(beta_s)?;
    if t_s == 0.0 {
        return Err(Error::Divergent { quantity: "eta_R", t_s });
    }
    if !(t_s > 0.0) {
        return Err(Error::Domain(format!("t_s must be >= 0, got {t_s}")));
    }
    let c = 2.0 * PI / beta_s;
    let pole = pole_index(beta_s);
    let n_min = min_terms(beta_s);
    let mut sum = 0.0;
    let mut n = 0usize;
    loop {
        n += 1;
        if n > thermal.matsubara_max_terms {
            return Err(Error::Truncation { terms: n - 1, remainder: (-c * n as f64 * t_s).exp() });
        }
        let nu = c * n as f64;
        let e = (-nu * t_s).exp();
        if Some(n as u64) != pole {
            sum += nu * e / (nu * nu - 1.0);
        }
        // terms decay geometrically with ratio e^{-c t}
        let remainder = e / (-(-c * t_s).exp_m1());
        if n >= n_min && remainder < thermal.matsubara_tol * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    let head = match pole {
        None => cot(0.5 * beta_s) * (-t_s).exp(),
        Some(k) => {
            let g = |nu: f64| nu * (-nu * t_s).exp();
            let e = (-t_s).exp();
            removable_pair(beta_s, k, g, e, (1.0 - t_s) * e)
        }
    };
    Ok(head + 4.0 / beta_s * sum)
}

fn check_beta(beta_s: f64) -> Result<()> {
    if !(beta_s > 0.0) || !beta_s.is_finite() {
        return Err(Error::invalid("beta_s", format!("must be positive and finite, got {beta_s}")));
    }
    Ok(())
}
