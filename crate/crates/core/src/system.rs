//! Problem instances.
//!
//! Two families are supported:
//!
//! * [`SeparableSystem`]: `eps x'' + x' + eps g(x) = eps f(omega t)` with `g`
//!   given by Taylor data and `f` a real Fourier series;
//! * [`GeneralSystem`]: `eps x'' + x' + eps h(x, omega t) = 0` with
//!   `h(x, psi) = sum_{nu,p} a_{nu,p} (x - c)^p exp(i nu . psi)`.
//!
//! Both are reduced to a [`CentredSystem`] expanded about a certified simple
//! zero `c0`, which is what the solvers consume.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::diophantine;
use crate::error::{Error, Result};
use crate::fourier::{FourierSeries, MultiIndex};

/// Roots with `|g'(c0)|` at or below this are not simple.
pub const SIMPLE_ZERO_CUTOFF: f64 = 1e-9;
/// Required `|g(c0) - f0|` at a certified root.
pub const ROOT_RESIDUAL: f64 = 1e-13;

const SCAN_CELLS: usize = 2000;

/// Polynomial `sum_p coeffs[p] (x - center)^p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorPoly {
    pub center: f64,
    pub coeffs: Vec<f64>,
}

impl TaylorPoly {
    pub fn new(center: f64, coeffs: Vec<f64>) -> Self {
        TaylorPoly { center, coeffs }
    }

    /// From sparse `(p, a_p)` pairs; repeated powers are summed.
    pub fn from_pairs(center: f64, pairs: &[(usize, f64)]) -> Self {
        let deg = pairs.iter().map(|&(p, _)| p).max().unwrap_or(0);
        let mut coeffs = vec![0.0; deg + 1];
        for &(p, a) in pairs {
            coeffs[p] += a;
        }
        TaylorPoly { center, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&a| a != 0.0)
            .unwrap_or(0)
    }

    pub fn coeff(&self, p: usize) -> f64 {
        self.coeffs.get(p).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let y = x - self.center;
        self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * y + a)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let y = x - self.center;
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (p, &a)| acc * y + p as f64 * a)
    }

    /// Exact re-expansion about `c`: `b_q = sum_{p >= q} binom(p, q) a_p (c - center)^(p - q)`.
    pub fn recentre(&self, c: f64) -> TaylorPoly {
        TaylorPoly {
            center: c,
            coeffs: shift_coefficients(&self.coeffs, c - self.center),
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn shift_coefficients<T>(coeffs: &[T], shift: f64) -> Vec<T>
where
    T: Copy + Default + std::ops::AddAssign + std::ops::Mul<f64, Output = T>,
{
    let n = coeffs.len();
    let mut out = vec![T::default(); n];
    for (q, slot) in out.iter_mut().enumerate() {
        for (p, &a) in coeffs.iter().enumerate().skip(q) {
            *slot += a * (binomial(p, q) * shift.powi((p - q) as i32));
        }
    }
    out
}

/// A zero of `g(x) - f0` together with `a = g'(c0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootInfo {
    pub c0: f64,
    pub a: f64,
    pub simple: bool,
}

/// Every zero of `g(x) - f0` in `[lo, hi]` located by a sign-change scan,
/// bisection and a Newton polish. Zeros without a sign change are missed.
pub fn find_c0(g: &TaylorPoly, f0: f64, interval: (f64, f64)) -> Vec<RootInfo> {
    let (lo, hi) = interval;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Vec::new();
    }
    let r = |x: f64| g.eval(x) - f0;
    let h = (hi - lo) / SCAN_CELLS as f64;
    let grid: Vec<f64> = (0..=SCAN_CELLS).map(|i| lo + i as f64 * h).collect();
    let vals: Vec<f64> = grid.iter().map(|&x| r(x)).collect();

    let mut roots: Vec<f64> = Vec::new();
    for i in 0..SCAN_CELLS {
        let (x0, x1) = (grid[i], grid[i + 1]);
        let (v0, v1) = (vals[i], vals[i + 1]);
        if v0 == 0.0 {
            roots.push(x0);
            continue;
        }
        if i + 1 == SCAN_CELLS && v1 == 0.0 {
            roots.push(x1);
            continue;
        }
        if v0 * v1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, v0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = r(m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            let mut x = 0.5 * (a + b);
            for _ in 0..8 {
                let d = g.derivative(x);
                if d == 0.0 {
                    break;
                }
                let next = x - r(x) / d;
                if !(next >= x0 && next <= x1) || r(next).abs() >= r(x).abs() {
                    break;
                }
                x = next;
            }
            roots.push(x);
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    roots
        .into_iter()
        .map(|c0| {
            let a = g.derivative(c0);
            RootInfo {
                c0,
                a,
                simple: a.abs() > SIMPLE_ZERO_CUTOFF && r(c0).abs() <= ROOT_RESIDUAL,
            }
        })
        .collect()
}

/// Separable form: `g` as Taylor data, `f` a real forcing series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableSystem {
    pub g: TaylorPoly,
    pub forcing: FourierSeries,
}

impl SeparableSystem {
    pub fn new(g: TaylorPoly, forcing: FourierSeries) -> Result<Self> {
        if !forcing.is_real_valued() {
            return Err(Error::Symmetry("forcing must be real valued".into()));
        }
        Ok(SeparableSystem { g, forcing })
    }

    pub fn dim(&self) -> usize {
        self.forcing.dim()
    }

    /// Average `f_0` of the forcing.
    pub fn f0(&self) -> f64 {
        self.forcing.zero_mode().re
    }

    pub fn find_c0(&self, interval: (f64, f64)) -> Vec<RootInfo> {
        find_c0(&self.g, self.f0(), interval)
    }

    /// Re-expands `g` about `c0` after certifying that `c0` is a simple zero of `g - f0`.
    pub fn recentre(&self, c0: f64) -> Result<CentredSystem> {
        let f0 = self.f0();
        let residual = (self.g.eval(c0) - f0).abs();
        if residual > ROOT_RESIDUAL * f0.abs().max(1.0) {
            return Err(Error::Hypothesis(format!(
                "g({c0}) - f0 = {residual:e} is not zero"
            )));
        }
        let centred = self.g.recentre(c0);
        let a = centred.coeff(1);
        if a.abs() <= SIMPLE_ZERO_CUTOFF {
            return Err(Error::Hypothesis(format!(
                "zero at {c0} is not simple: g'(c0) = {a:e}"
            )));
        }
        let mut taylor = centred.coeffs;
        taylor.resize(taylor.len().max(2), 0.0);
        // g(c0) = f0 by the hypothesis; store it exactly.
        taylor[0] = f0;
        Ok(CentredSystem {
            c0,
            a,
            dim: self.dim(),
            model: Model::Separable {
                taylor,
                forcing: self.forcing.clone(),
            },
        })
    }
}

/// General form: coefficient grid `a_{nu,p}` of `h` about `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralSystem {
    pub dim: usize,
    pub center: f64,
    /// `(nu, p) -> a_{nu,p}`.
    pub grid: BTreeMap<(MultiIndex, usize), Complex64>,
}

impl GeneralSystem {
    pub fn new<I>(dim: usize, center: f64, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, usize, Complex64)>,
    {
        let mut grid = BTreeMap::new();
        for (nu, p, a) in entries {
            if nu.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: nu.dim(),
                });
            }
            *grid.entry((nu, p)).or_insert_with(Complex64::default) += a;
        }
        let sys = GeneralSystem { dim, center, grid };
        let defect = sys
            .grid
            .iter()
            .map(|((nu, p), a)| (a - sys.coeff(&nu.neg(), *p).conj()).norm())
            .fold(0.0, f64::max);
        if defect > 1e-14 {
            return Err(Error::Symmetry(format!(
                "coefficient grid is not real: defect {defect:e}"
            )));
        }
        Ok(sys)
    }

    pub fn coeff(&self, nu: &MultiIndex, p: usize) -> Complex64 {
        self.grid
            .get(&(nu.clone(), p))
            .copied()
            .unwrap_or_default()
    }

    pub fn max_degree(&self) -> usize {
        self.grid.keys().map(|(_, p)| *p).max().unwrap_or(0)
    }

    /// The averaged force `h_0(x)`.
    pub fn h0(&self) -> TaylorPoly {
        let zero = MultiIndex::zero(self.dim);
        let coeffs = (0..=self.max_degree())
            .map(|p| self.coeff(&zero, p).re)
            .collect();
        TaylorPoly::new(self.center, coeffs)
    }

    pub fn find_c0(&self, interval: (f64, f64)) -> Vec<RootInfo> {
        find_c0(&self.h0(), 0.0, interval)
    }

    /// Re-expands every `h_nu` about `c0` after certifying the simple zero of `h_0`.
    pub fn recentre(&self, c0: f64) -> Result<CentredSystem> {
        let h0 = self.h0();
        let residual = h0.eval(c0).abs();
        if residual > ROOT_RESIDUAL {
            return Err(Error::Hypothesis(format!(
                "h_0({c0}) = {residual:e} is not zero"
            )));
        }
        let deg = self.max_degree().max(1);
        let mut by_mode: BTreeMap<MultiIndex, Vec<Complex64>> = BTreeMap::new();
        for ((nu, p), a) in &self.grid {
            by_mode
                .entry(nu.clone())
                .or_insert_with(|| vec![Complex64::default(); deg + 1])[*p] += a;
        }
        let shift = c0 - self.center;
        let mut alphas = vec![FourierSeries::new(self.dim); deg + 1];
        let zero = MultiIndex::zero(self.dim);
        for (nu, coeffs) in by_mode {
            let shifted = shift_coefficients(&coeffs, shift);
            for (p, b) in shifted.into_iter().enumerate() {
                if b != Complex64::default() {
                    alphas[p].insert(nu.clone(), b)?;
                }
            }
        }
        // h_0(c0) = 0 by the hypothesis.
        alphas[0].remove(&zero);
        let a = alphas[1].get(&zero).re;
        if a.abs() <= SIMPLE_ZERO_CUTOFF {
            return Err(Error::Hypothesis(format!(
                "zero at {c0} is not simple: h_0'(c0) = {a:e}"
            )));
        }
        let alphas = alphas
            .into_iter()
            .map(|s| s.mark_real(1e-12))
            .collect::<Result<Vec<_>>>()?;
        Ok(CentredSystem {
            c0,
            a,
            dim: self.dim,
            model: Model::General { alphas },
        })
    }
}

/// The nonlinearity expanded about a certified simple zero `c0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    /// `taylor[p] = a_p`, with `taylor[0] = g(c0) = f0` and `taylor[1] = a`.
    Separable {
        taylor: Vec<f64>,
        forcing: FourierSeries,
    },
    /// `alphas[p](psi) = sum_nu a_{nu,p} exp(i nu . psi)`; `alphas[0]` carries
    /// `h_nu(c0)` with empty zero mode, `alphas[1]` has zero mode `a`.
    General { alphas: Vec<FourierSeries> },
}

/// Pieces of the nonlinear field at `X = zeta + u`:
/// the range equation reads `D u_nu + eps (source + linear + higher)_nu = 0`.
#[derive(Debug, Clone)]
pub struct FieldParts {
    /// `-(f - f0)` for separable systems, `sum_{nu != 0} h_nu(c0) e^{i nu psi}` for general systems.
    pub source: FourierSeries,
    /// `alpha_1' X` with the zero mode of `alpha_1` removed (empty for separable systems).
    pub linear: FourierSeries,
    /// `sum_{p >= 2} alpha_p X^p` (separable: `G(c0 + X)`).
    pub higher: FourierSeries,
}

impl FieldParts {
    pub fn total(&self) -> Result<FourierSeries> {
        self.source.add(&self.linear)?.add(&self.higher)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentredSystem {
    pub c0: f64,
    pub a: f64,
    pub dim: usize,
    pub model: Model,
}

impl CentredSystem {
    pub fn theorem(&self) -> u8 {
        match self.model {
            Model::Separable { .. } => 1,
            Model::General { .. } => 2,
        }
    }

    /// Degrees `p >= 2` carrying a nonzero coefficient.
    pub fn nonlinear_degrees(&self) -> Vec<usize> {
        match &self.model {
            Model::Separable { taylor, .. } => (2..taylor.len())
                .filter(|&p| taylor[p] != 0.0)
                .collect(),
            Model::General { alphas } => (2..alphas.len())
                .filter(|&p| alphas[p].iter().any(|(_, c)| *c != Complex64::default()))
                .collect(),
        }
    }

    pub fn max_nonlinear_degree(&self) -> usize {
        self.nonlinear_degrees().last().copied().unwrap_or(1)
    }

    /// `a_p` of a separable system (zero beyond the stored degree).
    pub fn taylor_coeff(&self, p: usize) -> f64 {
        match &self.model {
            Model::Separable { taylor, .. } => taylor.get(p).copied().unwrap_or(0.0),
            Model::General { alphas } => alphas
                .get(p)
                .map(|s| s.zero_mode().re)
                .unwrap_or(0.0),
        }
    }

    /// `alpha_p` as a series; for separable systems the constant `a_p`.
    pub fn alpha(&self, p: usize) -> FourierSeries {
        match &self.model {
            Model::Separable { taylor, .. } => match taylor.get(p) {
                Some(&a) if a != 0.0 => FourierSeries::constant(self.dim, Complex64::new(a, 0.0)),
                _ => FourierSeries::new(self.dim),
            },
            Model::General { alphas } => alphas
                .get(p)
                .cloned()
                .unwrap_or_else(|| FourierSeries::new(self.dim)),
        }
    }

    /// `alpha_1` with its zero mode `a` removed.
    pub fn alpha1_oscillating(&self) -> FourierSeries {
        match &self.model {
            Model::Separable { .. } => FourierSeries::new(self.dim),
            Model::General { alphas } => alphas[1].without_zero_mode(),
        }
    }

    /// The order-one source: `eps f_nu` for separable systems, `-eps h_nu(c0)` for general systems,
    /// returned without the `eps` factor and without the zero mode.
    pub fn first_order_source(&self) -> FourierSeries {
        match &self.model {
            Model::Separable { forcing, .. } => forcing.without_zero_mode(),
            Model::General { alphas } => alphas[0].without_zero_mode().scale(-1.0),
        }
    }

    /// General view of the same system (`h = g - f`).
    pub fn to_general(&self) -> Result<CentredSystem> {
        match &self.model {
            Model::General { .. } => Ok(self.clone()),
            Model::Separable { taylor, forcing } => {
                let mut alphas = Vec::with_capacity(taylor.len());
                alphas.push(forcing.without_zero_mode().scale(-1.0));
                for &ap in &taylor[1..] {
                    if ap != 0.0 {
                        alphas.push(FourierSeries::constant(self.dim, Complex64::new(ap, 0.0)));
                    } else {
                        alphas.push(FourierSeries::new(self.dim));
                    }
                }
                Ok(CentredSystem {
                    c0: self.c0,
                    a: self.a,
                    dim: self.dim,
                    model: Model::General { alphas },
                })
            }
        }
    }

    /// Nonlinear field at `x` (a series whose zero mode is `zeta`), every
    /// product truncated to `|nu|_1 <= cutoff`.
    pub fn field_parts(&self, x: &FourierSeries, cutoff: u32) -> Result<FieldParts> {
        let degrees = self.nonlinear_degrees();
        let mut higher = FourierSeries::new(self.dim);
        if let Some(&max_p) = degrees.last() {
            let mut pow = x.truncate(cutoff);
            for p in 2..=max_p {
                pow = pow.convolve_truncated(x, cutoff)?;
                if !degrees.contains(&p) {
                    continue;
                }
                let term = match &self.model {
                    Model::Separable { taylor, .. } => pow.scale(taylor[p]),
                    Model::General { alphas } => alphas[p].convolve_truncated(&pow, cutoff)?,
                };
                higher = higher.add(&term)?;
            }
        }
        let (source, linear) = match &self.model {
            Model::Separable { forcing, .. } => (
                forcing.without_zero_mode().scale(-1.0).truncate(cutoff),
                FourierSeries::new(self.dim),
            ),
            Model::General { alphas } => (
                alphas[0].truncate(cutoff),
                alphas[1]
                    .without_zero_mode()
                    .convolve_truncated(x, cutoff)?,
            ),
        };
        Ok(FieldParts {
            source,
            linear,
            higher,
        })
    }

    /// `h(x, psi)` in original coordinates (separable: `g(x) - f(psi)`).
    pub fn force(&self, x: f64, psi: &[f64]) -> Result<f64> {
        let y = x - self.c0;
        match &self.model {
            Model::Separable { taylor, forcing } => {
                let g = taylor.iter().rev().fold(0.0, |acc, &a| acc * y + a);
                Ok(g - forcing.evaluate_real(psi)?)
            }
            Model::General { alphas } => {
                let mut acc = 0.0;
                for alpha in alphas.iter().rev() {
                    acc = acc * y + alpha.evaluate_real(psi)?;
                }
                Ok(acc)
            }
        }
    }
}

/// Certified analyticity constants: `|f_nu| <= phi e^{-xi |nu|}`,
/// `|a_p| <= gamma rho^{-p}` (resp. `|a_{nu,p}| <= gamma rho^{-p} e^{-xi |nu|}`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticityEnvelope {
    pub xi: f64,
    pub rho: f64,
    /// Zero for general systems, which carry no separate forcing.
    pub phi: f64,
    pub gamma: f64,
}

/// Weighted l1 majorants for `phi` and `gamma`.
pub fn certify_envelope(system: &CentredSystem, xi: f64, rho: f64) -> Result<AnalyticityEnvelope> {
    if !(xi > 0.0 && rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "xi and rho must be positive (xi = {xi}, rho = {rho})"
        )));
    }
    Ok(envelope_unchecked(system, xi, rho))
}

fn envelope_unchecked(system: &CentredSystem, xi: f64, rho: f64) -> AnalyticityEnvelope {
    match &system.model {
        Model::Separable { taylor, forcing } => {
            let phi = forcing.weighted_norm(xi);
            let gamma = taylor
                .iter()
                .enumerate()
                .skip(1)
                .map(|(p, a)| a.abs() * rho.powi(p as i32))
                .fold(0.0, f64::max);
            AnalyticityEnvelope {
                xi,
                rho,
                phi,
                gamma,
            }
        }
        Model::General { alphas } => {
            let gamma = alphas
                .iter()
                .enumerate()
                .map(|(p, s)| s.weighted_norm(xi) * rho.powi(p as i32))
                .fold(0.0, f64::max);
            AnalyticityEnvelope {
                xi,
                rho,
                phi: 0.0,
                gamma,
            }
        }
    }
}

/// Same as [`certify_envelope`] but also accepts `xi = 0` (plain l1 sums).
pub fn envelope_at(system: &CentredSystem, xi: f64, rho: f64) -> Result<AnalyticityEnvelope> {
    if !(xi >= 0.0 && rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need xi >= 0 and rho > 0 (xi = {xi}, rho = {rho})"
        )));
    }
    Ok(envelope_unchecked(system, xi, rho))
}

/// Checks the decay inequalities for every stored coefficient.
pub fn envelope_holds(system: &CentredSystem, env: &AnalyticityEnvelope) -> bool {
    let decay = |nu: &MultiIndex| (-env.xi * f64::from(nu.norm())).exp();
    match &system.model {
        Model::Separable { taylor, forcing } => {
            forcing.iter().all(|(nu, c)| c.norm() <= env.phi * decay(nu))
                && taylor
                    .iter()
                    .enumerate()
                    .skip(1)
                    .all(|(p, a)| a.abs() <= env.gamma * env.rho.powi(-(p as i32)))
        }
        Model::General { alphas } => alphas.iter().enumerate().all(|(p, s)| {
            s.iter()
                .all(|(nu, c)| c.norm() <= env.gamma * env.rho.powi(-(p as i32)) * decay(nu))
        }),
    }
}

/// Outcome of an exhaustive small-divisor scan over `0 < |nu|_1 <= radius`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonResonance {
    pub min: f64,
    pub argmin: MultiIndex,
    pub resonant: bool,
}

/// `min |omega . nu|` over `0 < |nu|_1 <= n`. A value at or below
/// `1e-15 |omega|_1 n` flags rational dependence up to `n`.
pub fn check_nonresonance(omega: &[f64], n: u32) -> Result<NonResonance> {
    if omega.is_empty() || n == 0 {
        return Err(Error::InvalidArgument(
            "need d >= 1 and N >= 1 for a resonance scan".into(),
        ));
    }
    let (min, argmin) = diophantine::min_small_divisor(omega, u64::from(n));
    let scale: f64 = omega.iter().map(|w| w.abs()).sum();
    Ok(NonResonance {
        min,
        argmin,
        resonant: min <= 1e-15 * scale * f64::from(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> f64 {
        (1.0 + 5f64.sqrt()) / 2.0
    }

    #[test]
    fn find_c0_examples() {
        let id = TaylorPoly::new(0.0, vec![0.0, 1.0]);
        let roots = find_c0(&id, 0.0, (-1.0, 1.0));
        assert_eq!(roots.len(), 1);
        assert!(roots[0].c0.abs() <= 1e-13);
        assert_eq!(roots[0].a, 1.0);
        assert!(roots[0].simple);

        let quad = TaylorPoly::new(0.0, vec![-1.0, 0.0, 1.0]);
        let roots = find_c0(&quad, 0.0, (-2.0, 2.0));
        assert_eq!(roots.len(), 2);
        assert!((roots[0].c0 + 1.0).abs() <= 1e-13 && (roots[0].a + 2.0).abs() < 1e-12);
        assert!((roots[1].c0 - 1.0).abs() <= 1e-13 && (roots[1].a - 2.0).abs() < 1e-12);

        let cube = TaylorPoly::new(0.0, vec![0.0, 0.0, 0.0, 1.0]);
        let roots = find_c0(&cube, 0.0, (-1.0, 1.0));
        assert_eq!(roots.len(), 1);
        assert!(!roots[0].simple);

        let even = TaylorPoly::new(0.0, vec![1.0, 0.0, 1.0]);
        assert!(find_c0(&even, 0.0, (-2.0, 2.0)).is_empty());
    }

    #[test]
    fn find_c0_matches_finite_difference() {
        let g = TaylorPoly::new(0.3, vec![0.2, -1.0, 0.5, 0.7]);
        for root in find_c0(&g, 0.1, (-3.0, 3.0)) {
            assert!((g.eval(root.c0) - 0.1).abs() <= ROOT_RESIDUAL);
            let h = 1e-5;
            let fd = (g.eval(root.c0 + h) - g.eval(root.c0 - h)) / (2.0 * h);
            assert!((fd - root.a).abs() <= 1e-6);
        }
    }

    #[test]
    fn recentre_examples() {
        let f = FourierSeries::new(1);
        let lin = SeparableSystem::new(TaylorPoly::new(0.0, vec![0.0, 1.0]), f.clone()).unwrap();
        let c = lin.recentre(0.0).unwrap();
        assert_eq!(c.a, 1.0);
        assert!(c.nonlinear_degrees().is_empty());

        let cubic =
            SeparableSystem::new(TaylorPoly::new(0.0, vec![0.0, 1.0, 0.0, 1.0]), f.clone()).unwrap();
        let c = cubic.recentre(0.0).unwrap();
        assert_eq!(c.a, 1.0);
        assert_eq!(c.taylor_coeff(3), 1.0);
        assert_eq!(c.nonlinear_degrees(), vec![3]);

        let quad = SeparableSystem::new(TaylorPoly::new(0.0, vec![-1.0, 0.0, 1.0]), f).unwrap();
        let c = quad.recentre(1.0).unwrap();
        assert_eq!(c.a, 2.0);
        assert_eq!(c.taylor_coeff(2), 1.0);
        assert!(quad.recentre(0.5).is_err());
    }

    #[test]
    fn recentre_reproduces_function() {
        let g = TaylorPoly::new(-0.4, vec![0.3, 1.1, -0.6, 0.25, 0.05]);
        let h = g.recentre(0.9);
        for i in 0..20 {
            let x = -2.0 + 0.2 * i as f64;
            assert!((g.eval(x) - h.eval(x)).abs() <= 1e-12 * (1.0 + g.eval(x).abs()));
        }
    }

    #[test]
    fn general_recentre_shifts_every_mode() {
        // h = (x - 1)((1 + cos psi) ) about center 0 -> c0 = 1.
        let one: MultiIndex = [1].into();
        let sys = GeneralSystem::new(
            1,
            0.0,
            [
                (MultiIndex::zero(1), 0, Complex64::new(-1.0, 0.0)),
                (MultiIndex::zero(1), 1, Complex64::new(1.0, 0.0)),
                (one.clone(), 1, Complex64::new(0.5, 0.0)),
                (one.neg(), 1, Complex64::new(0.5, 0.0)),
            ],
        )
        .unwrap();
        let roots = sys.find_c0((-3.0, 3.0));
        assert_eq!(roots.len(), 1);
        let c = sys.recentre(roots[0].c0).unwrap();
        assert_eq!(c.a, 1.0);
        let Model::General { alphas } = &c.model else { panic!() };
        // h_{+-1}(c0) = 0.5 * c0 = 0.5
        assert!((alphas[0].get(&one) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!(alphas[0].zero_mode() == Complex64::default());
    }

    #[test]
    fn general_rejects_complex_grid() {
        let r = GeneralSystem::new(1, 0.0, [([1].into(), 0, Complex64::new(1.0, 0.0))]);
        assert!(matches!(r, Err(Error::Symmetry(_))));
    }

    #[test]
    fn envelope_examples() {
        let f = FourierSeries::cosine([1, 0].into(), 1.0);
        let sys = SeparableSystem::new(TaylorPoly::new(0.0, vec![0.0, 1.0, 0.0, 1.0]), f)
            .unwrap()
            .recentre(0.0)
            .unwrap();
        let env = envelope_at(&sys, 0.0, 0.5).unwrap();
        assert_eq!(env.phi, 1.0);
        assert_eq!(env.gamma, 0.5);
        let env = certify_envelope(&sys, 2f64.ln(), 0.5).unwrap();
        assert!((env.phi - 2.0).abs() < 1e-15);
        assert!(envelope_holds(&sys, &env));
        assert!(certify_envelope(&sys, 0.0, 0.5).is_err());
    }

    #[test]
    fn nonresonance_examples() {
        // (2, -1) has l1 norm 3, so the relation first shows up at N = 3.
        assert!(!check_nonresonance(&[1.0, 2.0], 2).unwrap().resonant);
        let r = check_nonresonance(&[1.0, 2.0], 3).unwrap();
        assert!(r.resonant);
        assert_eq!(r.min, 0.0);
        assert_eq!(r.argmin, [2, -1].into());

        let r = check_nonresonance(&[1.0, golden()], 2).unwrap();
        assert!(!r.resonant);
        assert!((r.min - 0.618_033_988_749_895).abs() < 1e-12);
        assert_eq!(r.argmin, [1, -1].into());

        let r = check_nonresonance(&[1.0], 5).unwrap();
        assert_eq!(r.min, 1.0);
        assert_eq!(r.argmin, [1].into());
    }

    #[test]
    fn force_matches_definition() {
        let f = FourierSeries::cosine([1, 0].into(), 0.8);
        let sys = SeparableSystem::new(TaylorPoly::new(0.0, vec![0.0, 1.0, 0.0, 1.0]), f)
            .unwrap()
            .recentre(0.0)
            .unwrap();
        let psi = [0.4, 1.0];
        let x: f64 = 0.3;
        let expect = x + x.powi(3) - 0.8 * 0.4f64.cos();
        assert!((sys.force(x, &psi).unwrap() - expect).abs() < 1e-15);
        let gen = sys.to_general().unwrap();
        assert!((gen.force(x, &psi).unwrap() - expect).abs() < 1e-15);
    }
}
