//! Finitely supported Fourier series on the d-torus.
//!
//! A [`FourierSeries`] maps integer mode vectors to complex coefficients and
//! represents `sum_nu c_nu exp(i nu . psi)`. Supports are exact: a product of
//! two series carries every mode of the Minkowski sum of their supports, and
//! nothing is ever dropped by magnitude. Every accumulation runs in
//! lexicographic mode order so results are bit-reproducible.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boxes larger than this fall back to sparse accumulation in `convolve`.
const DENSE_BOX_LIMIT: usize = 1 << 22;

/// Integer mode vector `nu` in `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i32>);

impl MultiIndex {
    pub fn new(entries: Vec<i32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// The `i`-th unit vector scaled by `sign`.
    pub fn unit(dim: usize, i: usize, sign: i32) -> Self {
        let mut v = vec![0; dim];
        v[i] = sign;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i32] {
        &self.0
    }

    /// l1 norm `sum |nu_i|`.
    pub fn norm(&self) -> u32 {
        self.0.iter().map(|x| x.unsigned_abs()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn neg(&self) -> Self {
        MultiIndex(self.0.iter().map(|x| -x).collect())
    }

    pub fn add(&self, other: &MultiIndex) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &MultiIndex) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i32) -> Self {
        MultiIndex(self.0.iter().map(|x| k * x).collect())
    }

    /// `omega . nu`.
    pub fn dot(&self, omega: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(omega)
            .map(|(&n, &w)| f64::from(n) * w)
            .sum()
    }
}

impl From<Vec<i32>> for MultiIndex {
    fn from(v: Vec<i32>) -> Self {
        MultiIndex(v)
    }
}

impl<const D: usize> From<[i32; D]> for MultiIndex {
    fn from(v: [i32; D]) -> Self {
        MultiIndex(v.to_vec())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Every mode of `Z^d` with `0 < |nu|_1 <= radius`, in lexicographic order.
pub fn l1_ball(dim: usize, radius: u32) -> Vec<MultiIndex> {
    fn rec(dim: usize, left: i32, prefix: &mut Vec<i32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() == dim {
            out.push(MultiIndex(prefix.clone()));
            return;
        }
        for x in -left..=left {
            prefix.push(x);
            rec(dim, left - x.abs(), prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, radius as i32, &mut Vec::with_capacity(dim), &mut out);
    out.retain(|nu| !nu.is_zero());
    out
}

/// A truncated Fourier series with exact support.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries {
    dim: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
    real_valued: bool,
}

impl FourierSeries {
    /// The empty (zero) series.
    pub fn new(dim: usize) -> Self {
        FourierSeries {
            dim,
            coeffs: BTreeMap::new(),
            real_valued: true,
        }
    }

    /// `{0 -> c}`.
    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut s = FourierSeries::new(dim);
        s.real_valued = c.im == 0.0;
        s.coeffs.insert(MultiIndex::zero(dim), c);
        s
    }

    /// A single mode `{nu -> c}`. Not flagged real unless `nu = 0` and `c` is real.
    pub fn delta(nu: MultiIndex, c: Complex64) -> Self {
        let dim = nu.dim();
        let real = nu.is_zero() && c.im == 0.0;
        let mut coeffs = BTreeMap::new();
        coeffs.insert(nu, c);
        FourierSeries {
            dim,
            coeffs,
            real_valued: real,
        }
    }

    /// Builds a series from `(nu, c)` pairs; repeated modes are summed.
    /// The real flag is set when the data is conjugate symmetric to 1e-14.
    pub fn from_modes<I>(dim: usize, modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut s = FourierSeries::new(dim);
        s.real_valued = false;
        for (nu, c) in modes {
            s.add_to(nu, c)?;
        }
        s.real_valued = s.conjugate_symmetry_defect() <= 1e-14;
        Ok(s)
    }

    /// `0.5 * amp` at `+-nu`: the series of `amp cos(nu . psi)`.
    pub fn cosine(nu: MultiIndex, amp: f64) -> Self {
        let dim = nu.dim();
        let mut s = FourierSeries::new(dim);
        s.coeffs.insert(nu.neg(), Complex64::new(0.5 * amp, 0.0));
        s.coeffs.insert(nu, Complex64::new(0.5 * amp, 0.0));
        s
    }

    /// `amp sin(nu . psi)`: `-i amp/2` at `nu`, `+i amp/2` at `-nu`.
    pub fn sine(nu: MultiIndex, amp: f64) -> Self {
        let dim = nu.dim();
        let mut s = FourierSeries::new(dim);
        s.coeffs.insert(nu.neg(), Complex64::new(0.0, 0.5 * amp));
        s.coeffs.insert(nu, Complex64::new(0.0, -0.5 * amp));
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    /// Coefficient at `nu`; absent modes are zero.
    pub fn get(&self, nu: &MultiIndex) -> Complex64 {
        self.coeffs.get(nu).copied().unwrap_or_default()
    }

    pub fn contains(&self, nu: &MultiIndex) -> bool {
        self.coeffs.contains_key(nu)
    }

    /// Stored modes in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn modes(&self) -> impl Iterator<Item = &MultiIndex> {
        self.coeffs.keys()
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    /// Overwrites the coefficient at `nu`. Clears the real flag.
    pub fn insert(&mut self, nu: MultiIndex, c: Complex64) -> Result<()> {
        self.check_dim(nu.dim())?;
        self.real_valued = false;
        self.coeffs.insert(nu, c);
        Ok(())
    }

    /// Adds `c` to the coefficient at `nu`. Clears the real flag.
    pub fn add_to(&mut self, nu: MultiIndex, c: Complex64) -> Result<()> {
        self.check_dim(nu.dim())?;
        self.real_valued = false;
        *self.coeffs.entry(nu).or_default() += c;
        Ok(())
    }

    pub fn remove(&mut self, nu: &MultiIndex) -> Option<Complex64> {
        self.coeffs.remove(nu)
    }

    /// `max_nu |c_nu - conj(c_{-nu})|` over the stored support.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(nu, c)| (c - self.get(&nu.neg()).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Sets the real flag after checking conjugate symmetry to `tol`.
    pub fn mark_real(mut self, tol: f64) -> Result<Self> {
        let defect = self.conjugate_symmetry_defect();
        if defect > tol {
            return Err(Error::Symmetry(format!(
                "conjugate symmetry defect {defect:e} exceeds {tol:e}"
            )));
        }
        self.real_valued = true;
        Ok(self)
    }

    /// `sum_nu c_nu exp(i nu . psi)`, summed in lexicographic order.
    pub fn evaluate(&self, psi: &[f64]) -> Result<Complex64> {
        self.check_dim(psi.len())?;
        let mut acc = Complex64::default();
        for (nu, c) in &self.coeffs {
            acc += c * Complex64::from_polar(1.0, nu.dot(psi));
        }
        Ok(acc)
    }

    /// Real part of [`evaluate`](Self::evaluate); meaningful for real series.
    pub fn evaluate_real(&self, psi: &[f64]) -> Result<f64> {
        Ok(self.evaluate(psi)?.re)
    }

    /// Cauchy product: `out(nu) = sum_{nu1 + nu2 = nu} a(nu1) b(nu2)`.
    pub fn convolve(&self, other: &FourierSeries) -> Result<FourierSeries> {
        self.convolve_impl(other, None)
    }

    /// Cauchy product restricted to output modes with `|nu|_1 <= cutoff`.
    pub fn convolve_truncated(&self, other: &FourierSeries, cutoff: u32) -> Result<FourierSeries> {
        self.convolve_impl(other, Some(cutoff))
    }

    fn convolve_impl(&self, other: &FourierSeries, cutoff: Option<u32>) -> Result<FourierSeries> {
        self.check_dim(other.dim)?;
        let dim = self.dim;
        let real = self.real_valued && other.real_valued;
        if self.is_empty() || other.is_empty() {
            let mut out = FourierSeries::new(dim);
            out.real_valued = real;
            return Ok(out);
        }
        let (lo_a, hi_a) = self.bounding_box();
        let (lo_b, hi_b) = other.bounding_box();
        let lo: Vec<i32> = lo_a.iter().zip(&lo_b).map(|(x, y)| x + y).collect();
        let extent: Vec<usize> = (0..dim)
            .map(|i| (hi_a[i] + hi_b[i] - lo[i] + 1) as usize)
            .collect();
        let total = extent
            .iter()
            .try_fold(1usize, |acc, &e| acc.checked_mul(e))
            .unwrap_or(usize::MAX);

        let coeffs = if total <= DENSE_BOX_LIMIT {
            // Row-major strides: flat index order is lexicographic order.
            let mut stride = vec![1usize; dim];
            for i in (0..dim.saturating_sub(1)).rev() {
                stride[i] = stride[i + 1] * extent[i + 1];
            }
            let offsets = |s: &FourierSeries, base: &[i32]| -> Vec<(usize, Complex64)> {
                s.coeffs
                    .iter()
                    .map(|(nu, &c)| {
                        let off = nu
                            .0
                            .iter()
                            .zip(base)
                            .zip(&stride)
                            .map(|((&x, &b), &st)| (x - b) as usize * st)
                            .sum();
                        (off, c)
                    })
                    .collect()
            };
            let a = offsets(self, &lo_a);
            let b = offsets(other, &lo_b);
            let decode = |mut idx: usize| -> Vec<i32> {
                let mut v = vec![0; dim];
                for i in 0..dim {
                    v[i] = (idx / stride[i]) as i32 + lo[i];
                    idx %= stride[i];
                }
                v
            };
            let allowed: Option<Vec<bool>> = cutoff.map(|n| {
                (0..total)
                    .map(|idx| decode(idx).iter().map(|x| x.unsigned_abs()).sum::<u32>() <= n)
                    .collect()
            });
            let mut buf = vec![Complex64::default(); total];
            let mut touched = vec![false; total];
            for &(oa, ca) in &a {
                for &(ob, cb) in &b {
                    let idx = oa + ob;
                    if let Some(mask) = &allowed {
                        if !mask[idx] {
                            continue;
                        }
                    }
                    buf[idx] += ca * cb;
                    touched[idx] = true;
                }
            }
            touched
                .iter()
                .enumerate()
                .filter(|(_, &t)| t)
                .map(|(idx, _)| (MultiIndex(decode(idx)), buf[idx]))
                .collect()
        } else {
            let mut acc: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
            for (na, ca) in &self.coeffs {
                for (nb, cb) in &other.coeffs {
                    let nu = na.add(nb);
                    if cutoff.is_some_and(|n| nu.norm() > n) {
                        continue;
                    }
                    *acc.entry(nu).or_default() += ca * cb;
                }
            }
            acc
        };
        Ok(FourierSeries {
            dim,
            coeffs,
            real_valued: real,
        })
    }

    fn bounding_box(&self) -> (Vec<i32>, Vec<i32>) {
        let mut lo = vec![i32::MAX; self.dim];
        let mut hi = vec![i32::MIN; self.dim];
        for nu in self.coeffs.keys() {
            for (i, &x) in nu.0.iter().enumerate() {
                lo[i] = lo[i].min(x);
                hi[i] = hi[i].max(x);
            }
        }
        (lo, hi)
    }

    /// `p`-fold Cauchy power; `p = 0` is rejected.
    pub fn power(&self, p: u32) -> Result<FourierSeries> {
        self.power_impl(p, None)
    }

    /// Cauchy power with every intermediate product truncated to `cutoff`.
    pub fn power_truncated(&self, p: u32, cutoff: u32) -> Result<FourierSeries> {
        self.power_impl(p, Some(cutoff))
    }

    fn power_impl(&self, p: u32, cutoff: Option<u32>) -> Result<FourierSeries> {
        if p == 0 {
            return Err(Error::InvalidArgument(
                "power exponent must be at least 1".into(),
            ));
        }
        let mut out = match cutoff {
            Some(n) => self.truncate(n),
            None => self.clone(),
        };
        for _ in 1..p {
            out = out.convolve_impl(self, cutoff)?;
        }
        Ok(out)
    }

    /// Drops modes with `|nu|_1 > n`; surviving coefficients are untouched.
    pub fn truncate(&self, n: u32) -> FourierSeries {
        FourierSeries {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(nu, _)| nu.norm() <= n)
                .map(|(nu, c)| (nu.clone(), *c))
                .collect(),
            real_valued: self.real_valued,
        }
    }

    /// Drops coefficients with `|c| < threshold`. Never applied implicitly.
    pub fn prune(&self, threshold: f64) -> FourierSeries {
        FourierSeries {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(_, c)| c.norm() >= threshold)
                .map(|(nu, c)| (nu.clone(), *c))
                .collect(),
            real_valued: self.real_valued,
        }
    }

    /// `sum_nu |c_nu| exp(xi |nu|)`, a majorant of the sup on the strip of half-width `xi`.
    pub fn weighted_norm(&self, xi: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(nu, c)| c.norm() * (xi * f64::from(nu.norm())).exp())
            .sum()
    }

    /// Largest `|c_nu|`.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest l1 norm in the support (0 for the empty series).
    pub fn max_mode_norm(&self) -> u32 {
        self.coeffs.keys().map(|nu| nu.norm()).max().unwrap_or(0)
    }

    /// Coefficient of the zero mode.
    pub fn zero_mode(&self) -> Complex64 {
        self.get(&MultiIndex::zero(self.dim))
    }

    /// The series without its zero mode.
    pub fn without_zero_mode(&self) -> FourierSeries {
        let mut out = self.clone();
        out.coeffs.remove(&MultiIndex::zero(self.dim));
        out
    }

    /// Sets a real zero mode; the real flag is unaffected.
    pub fn set_zero_mode(&mut self, c: f64) {
        self.coeffs
            .insert(MultiIndex::zero(self.dim), Complex64::new(c, 0.0));
    }

    /// Applies `f` to every stored coefficient. The real flag survives only if
    /// the result is still conjugate symmetric to 1e-14 relative.
    pub fn map_coeffs<F>(&self, mut f: F) -> FourierSeries
    where
        F: FnMut(&MultiIndex, Complex64) -> Complex64,
    {
        let mut out = FourierSeries {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|(nu, c)| (nu.clone(), f(nu, *c))).collect(),
            real_valued: false,
        };
        if self.real_valued {
            let tol = 1e-14 * out.max_abs().max(1.0);
            out.real_valued = out.conjugate_symmetry_defect() <= tol;
        }
        out
    }

    pub fn scale(&self, k: f64) -> FourierSeries {
        FourierSeries {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|(nu, c)| (nu.clone(), c * k)).collect(),
            real_valued: self.real_valued,
        }
    }

    /// Termwise sum; the support is the union of supports.
    pub fn add(&self, other: &FourierSeries) -> Result<FourierSeries> {
        self.check_dim(other.dim)?;
        let mut out = self.clone();
        for (nu, c) in &other.coeffs {
            *out.coeffs.entry(nu.clone()).or_default() += c;
        }
        out.real_valued = self.real_valued && other.real_valued;
        Ok(out)
    }

    /// `self + k * other`.
    pub fn add_scaled(&self, other: &FourierSeries, k: f64) -> Result<FourierSeries> {
        self.add(&other.scale(k))
    }

    /// `max_nu |a_nu - b_nu|` over the union of supports.
    pub fn max_abs_diff(&self, other: &FourierSeries) -> f64 {
        let a = self
            .coeffs
            .iter()
            .map(|(nu, c)| (c - other.get(nu)).norm());
        let b = other
            .coeffs
            .iter()
            .filter(|(nu, _)| !self.coeffs.contains_key(*nu))
            .map(|(_, c)| c.norm());
        a.chain(b).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SeriesJson::from(self)).expect("series serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let wire: SeriesJson = serde_json::from_value(value.clone())?;
        FourierSeries::try_from(wire)
    }
}

/// Wire form `{"d": int, "modes": [{"nu": [...], "re": f, "im": f}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesJson {
    pub d: usize,
    pub modes: Vec<ModeJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeJson {
    pub nu: Vec<i32>,
    pub re: f64,
    pub im: f64,
}

impl From<&FourierSeries> for SeriesJson {
    fn from(s: &FourierSeries) -> Self {
        SeriesJson {
            d: s.dim,
            modes: s
                .coeffs
                .iter()
                .map(|(nu, c)| ModeJson {
                    nu: nu.0.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

impl TryFrom<SeriesJson> for FourierSeries {
    type Error = Error;

    fn try_from(wire: SeriesJson) -> Result<Self> {
        if wire.d == 0 {
            return Err(Error::InvalidArgument("series dimension must be >= 1".into()));
        }
        FourierSeries::from_modes(
            wire.d,
            wire.modes
                .into_iter()
                .map(|m| (MultiIndex(m.nu), Complex64::new(m.re, m.im))),
        )
    }
}

impl Serialize for FourierSeries {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FourierSeries {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = SeriesJson::deserialize(deserializer)?;
        FourierSeries::try_from(wire).map_err(serde::de::Error::custom)
    }
}
