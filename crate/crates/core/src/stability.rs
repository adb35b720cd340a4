//! Linear stability of the stationary states `x = kπ/B`.
//!
//! Linearising the full system about `(kπ/B, 0, 0, 0)` gives the trivial
//! eigenvalue `−1` and the monic cubic
//! `λ³ + (σ+1)λ² + σ(1 − r − (−1)^k AB)λ − (−1)^k ABσ`.
//! Trough equilibria (odd `k`) lose stability through a complex pair at
//! `r_c = 1 + ABσ/(σ+1)` with onset frequency `ω² = ABσ/(σ+1)`.

use std::f64::consts::E;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{equilibrium_position, Parity, Params};

/// Real parts within this distance of zero are reported as marginal.
pub const VERDICT_TOLERANCE: f64 = 1e-10;
/// Discriminants within this distance of zero are treated as repeated roots.
pub const DISCRIMINANT_TOLERANCE: f64 = 1e-12;

/// Monic cubic `λ³ + a1 λ² + a2 λ + a3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl CubicCoeffs {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Result<Self> {
        if a1.is_finite() && a2.is_finite() && a3.is_finite() {
            Ok(CubicCoeffs { a1, a2, a3 })
        } else {
            Err(Error::InvalidArgument("cubic coefficients must be finite".into()))
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        ((z + self.a1) * z + self.a2) * z + self.a3
    }

    fn eval_derivative(&self, z: Complex64) -> Complex64 {
        (z * 3.0 + 2.0 * self.a1) * z + self.a2
    }
}

pub fn characteristic_cubic(p: &Params, parity: Parity) -> CubicCoeffs {
    let s = parity.sign();
    let ab = p.a() * p.b();
    CubicCoeffs {
        a1: p.sigma() + 1.0,
        a2: p.sigma() * (1.0 - p.r() - s * ab),
        a3: -s * ab * p.sigma(),
    }
}

pub fn discriminant(c: &CubicCoeffs) -> f64 {
    let (a1, a2, a3) = (c.a1, c.a2, c.a3);
    a1 * a1 * a2 * a2 - 4.0 * a2.powi(3) - 4.0 * a1.powi(3) * a3 - 27.0 * a3 * a3
        + 18.0 * a1 * a2 * a3
}

fn newton_polish(c: &CubicCoeffs, z: Complex64) -> Complex64 {
    let mut best = z;
    let mut best_res = c.eval(z).norm();
    let mut cur = z;
    for _ in 0..4 {
        let d = c.eval_derivative(cur);
        if d.norm() == 0.0 {
            break;
        }
        cur -= c.eval(cur) / d;
        let res = c.eval(cur).norm();
        if res < best_res {
            best = cur;
            best_res = res;
        } else {
            break;
        }
    }
    best
}

/// Roots of `λ² + e λ + f`; `force_real` clamps a slightly negative
/// discriminant produced by rounding.
fn quadratic_roots(e: f64, f: f64, force_real: bool) -> [Complex64; 2] {
    let mut disc = e * e - 4.0 * f;
    if force_real && disc < 0.0 {
        disc = 0.0;
    }
    if disc >= 0.0 {
        let q = -0.5 * (e + disc.sqrt().copysign(e));
        if q == 0.0 {
            [Complex64::new(0.0, 0.0); 2]
        } else {
            [Complex64::new(q, 0.0), Complex64::new(f / q, 0.0)]
        }
    } else {
        let re = -0.5 * e;
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

/// The three roots of a monic cubic, complex roots as exact conjugate pairs.
///
/// One real root comes from the trigonometric (three real roots) or Cardano
/// (one real root) closed form and is Newton-polished; the remaining pair
/// comes from the deflated quadratic.
pub fn cubic_roots(c: &CubicCoeffs) -> [Complex64; 3] {
    let (a, b, cc) = (c.a1, c.a2, c.a3);
    let shift = a / 3.0;
    let p = b - a * shift;
    let q = 2.0 * shift.powi(3) - shift * b + cc;
    let d = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let three_real = d <= 0.0;

    let t = if three_real {
        if p == 0.0 {
            0.0
        } else {
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            m * (arg.acos() / 3.0).cos()
        }
    } else {
        let u = (-q / 2.0 - d.sqrt().copysign(q)).cbrt();
        if u == 0.0 {
            0.0
        } else {
            u - p / (3.0 * u)
        }
    };
    let real = newton_polish(c, Complex64::new(t - shift, 0.0)).re;

    let e = a + real;
    let candidates = {
        let mut v = vec![quadratic_roots(e, b + e * real, three_real)];
        if real != 0.0 {
            v.push(quadratic_roots(e, -cc / real, three_real));
        }
        v
    };
    let residual = |pair: &[Complex64; 2]| {
        pair.iter()
            .map(|z| c.eval(*z).norm() / z.norm().powi(3).max(1.0))
            .fold(0.0, f64::max)
    };
    let mut pair = *candidates
        .iter()
        .min_by(|x, y| residual(x).total_cmp(&residual(y)))
        .unwrap();

    if pair[0].im != 0.0 {
        let z = newton_polish(c, pair[0]);
        if z.im != 0.0 {
            pair = [z, z.conj()];
        }
    } else {
        pair = [
            Complex64::new(newton_polish(c, pair[0]).re, 0.0),
            Complex64::new(newton_polish(c, pair[1]).re, 0.0),
        ];
    }
    [Complex64::new(real, 0.0), pair[0], pair[1]]
}

/// What Descartes' rule of signs predicts for the positive real roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescartesPrediction {
    ExactlyOnePositive,
    NoPositive,
    TwoOrZeroPositive,
}

fn sign_changes(coeffs: &[f64]) -> usize {
    let signs: Vec<bool> = coeffs.iter().filter(|&&v| v != 0.0).map(|&v| v > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

pub fn descartes_classify(p: &Params, parity: Parity) -> Result<DescartesPrediction> {
    if p.a() == 0.0 {
        return Err(Error::RuleNotApplicable(
            "constant term vanishes when A = 0",
        ));
    }
    let c = characteristic_cubic(p, parity);
    Ok(match sign_changes(&[1.0, c.a1, c.a2, c.a3]) {
        0 => DescartesPrediction::NoPositive,
        1 => DescartesPrediction::ExactlyOnePositive,
        _ => DescartesPrediction::TwoOrZeroPositive,
    })
}

pub fn r_critical(p: &Params) -> f64 {
    1.0 + p.a() * p.b() * p.sigma() / (p.sigma() + 1.0)
}

pub fn omega_onset(p: &Params) -> f64 {
    (p.a() * p.b() * p.sigma() / (p.sigma() + 1.0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    PositiveRealRoot,
    ComplexPairPositiveRealPart,
    AllNegative,
    ComplexPairNegativeRealPart,
    /// Repeated roots, or a real part at the zero boundary.
    Marginal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub k: i64,
    pub x_eq: f64,
    pub parity: Parity,
    pub cubic: CubicCoeffs,
    pub discriminant: f64,
    /// The trivial `−1` first, then the three cubic roots.
    pub eigenvalues: [Complex64; 4],
    pub verdict: Verdict,
    pub mechanism: Mechanism,
    /// `A = 0`: the zero root from translation invariance is excluded from the verdict.
    pub neutral_free_space: bool,
}

impl EquilibriumReport {
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn stability_report(p: &Params, k: i64) -> EquilibriumReport {
    let parity = Parity::of(k);
    let cubic = characteristic_cubic(p, parity);
    let delta = discriminant(&cubic);
    let mut roots = cubic_roots(&cubic);
    let neutral_free_space = p.a() == 0.0;

    let mut considered: Vec<Complex64> = roots.to_vec();
    if neutral_free_space {
        // a3 = 0 exactly: one root is analytically zero.
        let (idx, _) = roots
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
            .unwrap();
        roots[idx] = Complex64::new(0.0, 0.0);
        considered.remove(idx);
    }
    considered.push(Complex64::new(-1.0, 0.0));

    let lead = *considered
        .iter()
        .max_by(|x, y| x.re.total_cmp(&y.re))
        .unwrap();
    let verdict = if lead.re.abs() <= VERDICT_TOLERANCE {
        Verdict::Marginal
    } else if lead.re > 0.0 {
        Verdict::Unstable
    } else {
        Verdict::Stable
    };
    let any_complex = considered.iter().any(|z| z.im != 0.0);
    let mechanism = if delta.abs() <= DISCRIMINANT_TOLERANCE || verdict == Verdict::Marginal {
        Mechanism::Marginal
    } else if verdict == Verdict::Unstable {
        if lead.im == 0.0 {
            Mechanism::PositiveRealRoot
        } else {
            Mechanism::ComplexPairPositiveRealPart
        }
    } else if any_complex {
        Mechanism::ComplexPairNegativeRealPart
    } else {
        Mechanism::AllNegative
    };

    EquilibriumReport {
        k,
        x_eq: equilibrium_position(p, k),
        parity,
        cubic,
        discriminant: delta,
        eigenvalues: [Complex64::new(-1.0, 0.0), roots[0], roots[1], roots[2]],
        verdict,
        mechanism,
        neutral_free_space,
    }
}

/// Eigenvalues of the low-memory system about `kπ/B`.
pub fn lowmem_eigenvalues(p: &Params, parity: Parity) -> [Complex64; 2] {
    let half = 0.5 * p.sigma() * (p.r() / E - 1.0);
    let radicand = half * half + parity.sign() * p.a() * p.b() * p.sigma();
    let root = Complex64::new(radicand, 0.0).sqrt();
    [half + root, half - root]
}

/// `(σ, r_c(σ))` sampled uniformly over `sigma_range` at fixed `A`, `B`.
pub fn boundary_curve(
    template: &Params,
    sigma_range: (f64, f64),
    n_points: usize,
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = sigma_range;
    if !(lo > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidArgument(
            "sigma range must be positive and ordered".into(),
        ));
    }
    if n_points < 2 {
        return Err(Error::InvalidArgument("n_points must be >= 2".into()));
    }
    (0..n_points)
        .map(|i| {
            let sigma = lo + (hi - lo) * i as f64 / (n_points - 1) as f64;
            let p = template.with_sigma(sigma)?;
            Ok((sigma, r_critical(&p)))
        })
        .collect()
}
