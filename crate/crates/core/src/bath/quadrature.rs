//! Globally adaptive Gauss–Kronrod (7/15) quadrature and a principal-value
//! integrator built on it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the embedded Gauss points.
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

/// Result of a converged integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel {
    piece: usize,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(usize, f64) -> f64>(f: &F, piece: usize, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(piece, center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(piece, center - dx);
        let f2 = f(piece, center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kron += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kron * half;
    let abs = abs * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kron - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs);
    }
    Panel { piece, a, b, value, error, abs }
}

/// Integrates a family of integrands `f(piece, x)` over `pieces[piece] = (a, b)` and
/// returns the sum. Subdivision is global: the panel with the largest error estimate
/// anywhere is bisected until the total error is below `rel_tol·|total|`.
pub fn integrate_pieces<F: Fn(usize, f64) -> f64>(
    f: F,
    pieces: &[(f64, f64)],
    rel_tol: f64,
    max_evaluations: usize,
) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for (i, &(a, b)) in pieces.iter().enumerate() {
        if b > a {
            heap.push(kronrod(&f, i, a, b));
            evaluations += 15;
        }
    }
    loop {
        let (value, error, abs) = heap
            .iter()
            .fold((0.0, 0.0, 0.0), |(v, e, s), p| (v + p.value, e + p.error, s + p.abs));
        let target = (rel_tol * value.abs()).max(64.0 * f64::EPSILON * abs);
        if error <= target || heap.is_empty() {
            return Ok(Estimate { value, error, evaluations });
        }
        if !value.is_finite() || evaluations + 30 > max_evaluations {
            return Err(Error::Quadrature { estimate: value, error, evaluations });
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval exhausted at machine resolution.
            return Err(Error::Quadrature { estimate: value, error, evaluations });
        }
        heap.push(kronrod(&f, worst.piece, worst.a, mid));
        heap.push(kronrod(&f, worst.piece, mid, worst.b));
        evaluations += 30;
    }
}

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, max_evaluations: usize) -> Result<Estimate> {
    integrate_pieces(|_, x| f(x), &[(a, b)], rel_tol, max_evaluations)
}

/// Cauchy principal value of `∫ f(ω)/(ω₀ − ω) dω` over the real line for integrands
/// that decay on the scale `scale` (Gaussian-type decay assumed beyond ten scales).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalValue {
    pub scale: f64,
    pub rel_tol: f64,
    pub max_evaluations: usize,
}

impl PrincipalValue {
    pub const DEFAULT_MAX_EVALUATIONS: usize = 200_000;

    pub fn new(scale: f64, rel_tol: f64) -> Self {
        Self { scale, rel_tol, max_evaluations: Self::DEFAULT_MAX_EVALUATIONS }
    }

    /// Outer cutoff Ω = max(10·scale, |ω₀| + 10·scale).
    pub fn cutoff(&self, omega0: f64) -> f64 {
        (10.0 * self.scale).max(omega0.abs() + 10.0 * self.scale)
    }

    /// The pole is removed by subtracting f(ω₀) on the symmetric window
    /// `[ω₀ − L, ω₀ + L]`, written in folded form
    /// `∫₀ᴸ (f(ω₀ − t) − f(ω₀ + t))/t dt`; the remainder up to `±Ω` is regular.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, omega0: f64) -> Result<Estimate> {
        if !omega0.is_finite() {
            return Err(Error::InvalidArgument(format!("pole position must be finite, got {omega0}")));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.rel_tol)));
        }
        let big = self.cutoff(omega0);
        let half_width = (omega0 + big).min(big - omega0);
        let pieces = [
            (0.0, half_width),
            (-big, omega0 - half_width),
            (omega0 + half_width, big),
        ];
        integrate_pieces(
            |piece, x| match piece {
                0 => (f(omega0 - x) - f(omega0 + x)) / x,
                _ => f(x) / (omega0 - x),
            },
            &pieces,
            self.rel_tol,
            self.max_evaluations,
        )
    }
}
