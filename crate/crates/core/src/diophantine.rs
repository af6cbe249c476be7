//! Frequency-vector arithmetic: small divisors `alpha_n`, their scaled
//! logarithms `eps_n`, Bryuno partial sums, and the constructive admissible
//! `eps_bar` / `zeta_bar` of the convergence argument.
//!
//! All mode norms are l1. The scans are exhaustive: for each prefix
//! `(nu_1, ..., nu_{d-1})` the best last coordinate is found exactly, since
//! `|c + omega_d x|` is convex in `x` and its integer minimum sits at the
//! floor or ceiling of `-c / omega_d` (clamped to the admissible range).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::MultiIndex;
use crate::system::AnalyticityEnvelope;

/// Default l1 enumeration radius limit for dimension `d`.
pub fn default_radius_limit(dim: usize) -> u64 {
    match dim {
        0 | 1 => 1 << 62,
        2 => 4096,
        3 => 64,
        _ => 16,
    }
}

/// `min |omega . nu|` over `0 < |nu|_1 <= radius` with its argmin.
///
/// Of each pair `+-nu` only the representative whose first nonzero entry is
/// positive is visited; ties go to the lexicographically smallest such
/// representative.
pub fn min_small_divisor(omega: &[f64], radius: u64) -> (f64, MultiIndex) {
    let dim = omega.len();
    let mut best = (f64::INFINITY, vec![0i64; dim]);
    if dim == 0 || radius == 0 {
        return (best.0, MultiIndex::zero(dim));
    }
    let mut prefix = Vec::with_capacity(dim);
    scan(omega, radius as i64, 0.0, true, &mut prefix, &mut best);
    let entries = best
        .1
        .iter()
        .map(|&x| i32::try_from(x).unwrap_or(if x < 0 { i32::MIN } else { i32::MAX }))
        .collect();
    (best.0, MultiIndex::new(entries))
}

fn scan(
    omega: &[f64],
    budget: i64,
    dot: f64,
    all_zero: bool,
    prefix: &mut Vec<i64>,
    best: &mut (f64, Vec<i64>),
) {
    let level = prefix.len();
    let dim = omega.len();
    if level + 1 == dim {
        let w = omega[level];
        let (lo, hi) = if all_zero { (1, budget) } else { (-budget, budget) };
        if lo > hi {
            return;
        }
        let mut cands = vec![lo, hi];
        if w != 0.0 {
            let x = -dot / w;
            if x.is_finite() {
                for c in [x.floor(), x.ceil()] {
                    let c = c.clamp(lo as f64, hi as f64) as i64;
                    cands.push(c);
                }
            }
        }
        cands.sort_unstable();
        cands.dedup();
        let mut local: Option<(f64, i64)> = None;
        for x in cands {
            let v = (dot + w * x as f64).abs();
            if local.is_none_or(|(bv, _)| v < bv) {
                local = Some((v, x));
            }
        }
        if let Some((v, x)) = local {
            if v < best.0 {
                let mut nu = prefix.clone();
                nu.push(x);
                *best = (v, nu);
            }
        }
        return;
    }
    let start = if all_zero { 0 } else { -budget };
    for x in start..=budget {
        prefix.push(x);
        scan(
            omega,
            budget - x.abs(),
            dot + omega[level] * x as f64,
            all_zero && x == 0,
            prefix,
            best,
        );
        prefix.pop();
    }
}

fn check_radius(dim: usize, radius: u64, limit: u64) -> Result<()> {
    if radius > limit {
        return Err(Error::GuardExceeded {
            radius,
            limit,
            dim,
        });
    }
    Ok(())
}

/// `alpha_n(omega) = min { |omega . nu| : 0 < |nu|_1 <= 2^n }`.
pub fn alpha_n(omega: &[f64], n: u32, radius_limit: u64) -> Result<(f64, MultiIndex)> {
    if n > 62 {
        return Err(Error::GuardExceeded {
            radius: u64::MAX,
            limit: radius_limit,
            dim: omega.len(),
        });
    }
    let radius = 1u64 << n;
    check_radius(omega.len(), radius, radius_limit)?;
    let (min, argmin) = min_small_divisor(omega, radius);
    if min == 0.0 {
        return Err(Error::Resonance {
            nu: argmin,
            value: 0.0,
        });
    }
    Ok((min, argmin))
}

/// `r_N = min { |omega . nu| : 0 < |nu|_1 <= N }`.
pub fn r_n(omega: &[f64], n: u64, radius_limit: u64) -> Result<f64> {
    check_radius(omega.len(), n, radius_limit)?;
    Ok(min_small_divisor(omega, n).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrequencyClass {
    /// `d = 1`: a single frequency; `alpha_n = |omega|` for every `n`.
    Periodic,
    /// `log(1/alpha_n)` grows at most linearly in `n`.
    DiophantineLike,
    /// Faster growth but `eps_n` keeps decreasing.
    BryunoLike,
    /// `eps_n` increases somewhere past `n = 1`.
    LiouvilleSuspect,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiophantineProfile {
    pub omega: Vec<f64>,
    pub n_max: u32,
    pub alpha: Vec<f64>,
    pub argmin: Vec<MultiIndex>,
    pub eps: Vec<f64>,
    /// Running sums `sum_{m <= n} eps_m`.
    pub bryuno_partial: Vec<f64>,
    pub r_table: BTreeMap<u64, f64>,
    pub class: FrequencyClass,
}

impl DiophantineProfile {
    pub fn bryuno_sum(&self) -> f64 {
        self.bryuno_partial.last().copied().unwrap_or(0.0)
    }

    /// CSV with header `n,alpha_n,eps_n,bryuno_partial`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,alpha_n,eps_n,bryuno_partial\n");
        for n in 0..self.alpha.len() {
            out.push_str(&format!(
                "{},{:e},{:e},{:e}\n",
                n, self.alpha[n], self.eps[n], self.bryuno_partial[n]
            ));
        }
        out
    }
}

/// Builds the profile as far as the guards allow. The second value carries
/// the error that stopped the scan early, if any.
pub fn profile_partial(
    omega: &[f64],
    n_max: u32,
    n_list: &[u64],
    radius_limit: u64,
) -> (DiophantineProfile, Option<Error>) {
    let dim = omega.len();
    let mut prof = DiophantineProfile {
        omega: omega.to_vec(),
        n_max,
        alpha: Vec::new(),
        argmin: Vec::new(),
        eps: Vec::new(),
        bryuno_partial: Vec::new(),
        r_table: BTreeMap::new(),
        class: FrequencyClass::Periodic,
    };
    let last = if dim == 1 { 0 } else { n_max };
    let mut stop = None;
    let mut sum = 0.0;
    for n in 0..=last {
        match alpha_n(omega, n, radius_limit) {
            Ok((alpha, nu)) => {
                let eps = (1.0 / alpha).ln() / (1u64 << n) as f64;
                sum += eps;
                prof.alpha.push(alpha);
                prof.argmin.push(nu);
                prof.eps.push(eps);
                prof.bryuno_partial.push(sum);
            }
            Err(e) => {
                stop = Some(e);
                break;
            }
        }
    }
    if stop.is_none() {
        for &n in n_list {
            match r_n(omega, n, radius_limit) {
                Ok(r) => {
                    prof.r_table.insert(n, r);
                }
                Err(e) => {
                    stop = Some(e);
                    break;
                }
            }
        }
    }
    prof.class = classify(dim, &prof.alpha, &prof.eps);
    (prof, stop)
}

/// Fails on the first guard or resonance error.
pub fn profile(omega: &[f64], n_max: u32, n_list: &[u64], radius_limit: u64) -> Result<DiophantineProfile> {
    match profile_partial(omega, n_max, n_list, radius_limit) {
        (p, None) => Ok(p),
        (_, Some(e)) => Err(e),
    }
}

fn classify(dim: usize, alpha: &[f64], eps: &[f64]) -> FrequencyClass {
    if dim <= 1 {
        return FrequencyClass::Periodic;
    }
    let logs: Vec<f64> = alpha.iter().map(|a| (1.0 / a).ln()).collect();
    // Local exponent: growth of log(1/alpha_n) per dyadic step, in units of log 2.
    let slope = logs
        .windows(2)
        .skip(1)
        .map(|w| (w[1] - w[0]) / std::f64::consts::LN_2)
        .fold(0.0, f64::max);
    if slope <= 2.0 * dim as f64 {
        return FrequencyClass::DiophantineLike;
    }
    let rising = eps
        .windows(2)
        .skip(1)
        .any(|w| w[1] > w[0] * (1.0 + 1e-9));
    if rising {
        FrequencyClass::LiouvilleSuspect
    } else {
        FrequencyClass::BryunoLike
    }
}

/// Constructive admissibility constants.
#[derive(Debug, Clone, Serialize)]
pub struct EpsilonBounds {
    pub theorem: u8,
    /// `g'(c0)` (resp. `a_{0,1}`).
    pub a: f64,
    pub a_fraction: f64,
    /// The free constant `A = a_fraction * C0`.
    #[serde(rename = "A")]
    pub big_a: f64,
    pub n0: u32,
    pub delta: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub alpha_n0: f64,
    pub eps_bar: f64,
    pub zeta_bar: f64,
    /// `max(delta, 2 |eps_bar a| / alpha_n0)`; general systems only.
    pub beta: Option<f64>,
    /// `alpha_n0` came from a smaller ball than `2^n0` (an upper bound only).
    pub guard_limited: bool,
}

impl EpsilonBounds {
    /// Each defining inequality, re-evaluated as written, with its outcome.
    pub fn inequalities(&self) -> Vec<(&'static str, bool)> {
        let c = self.c0;
        let big_a = self.big_a;
        let a = self.a.abs();
        match self.theorem {
            1 => vec![
                ("C0^2 delta / |a| <= A^2", c * c * self.delta / a <= big_a * big_a),
                (
                    "C0^2 eps_bar / alpha_n0 <= A^2",
                    c * c * self.eps_bar / self.alpha_n0 <= big_a * big_a,
                ),
                ("C0^2 zeta_bar < A^2", c * c * self.zeta_bar < big_a * big_a),
            ],
            _ => {
                let beta = self.beta.unwrap_or(f64::INFINITY);
                let a4 = big_a.powi(4);
                let c4 = c.powi(4);
                vec![
                    (
                        "beta = max(delta, 2 |eps_bar a| / alpha_n0)",
                        beta == self.delta.max(2.0 * self.eps_bar * a / self.alpha_n0),
                    ),
                    (
                        "C0^4 max(zeta_bar, delta/|a|, eps_bar/alpha_n0, beta) < A^4",
                        c4 * self
                            .zeta_bar
                            .max(self.delta / a)
                            .max(self.eps_bar / self.alpha_n0)
                            .max(beta)
                            < a4,
                    ),
                ]
            }
        }
    }

    pub fn all_hold(&self) -> bool {
        self.inequalities().iter().all(|(_, ok)| *ok)
    }
}

/// Guards for [`estimate_epsilon_bar`].
#[derive(Debug, Clone, Copy)]
pub struct BoundsGuard {
    pub radius_limit: u64,
    /// Largest `n0` for which `alpha_n0` is enumerated.
    pub max_n0: u32,
}

impl BoundsGuard {
    pub fn for_dim(dim: usize) -> Self {
        let radius_limit = default_radius_limit(dim);
        BoundsGuard {
            radius_limit,
            max_n0: 63 - radius_limit.leading_zeros(),
        }
    }
}

/// The explicit `eps_bar`, `zeta_bar` choices of the convergence argument.
///
/// Separable systems: `C0 = max(Gamma/|a|, Phi, 1) / rho`; `n0` is the smallest
/// integer with `C0^2 delta(n0) / |a| <= A^2`; then `eps_bar = A^2 alpha_n0 / C0^2`
/// and `zeta_bar = A^2 / (2 C0^2)`.
///
/// General systems: `C0 = max(Gamma/|a|, 1) / rho`; `n0` smallest with
/// `C0^4 max(delta/|a|, delta) < A^4`; `eps_bar` is half the supremum of the
/// values satisfying `C0^4 max(eps/alpha_n0, 2|eps a|/alpha_n0) < A^4`,
/// located by bisection; `zeta_bar = A^4 / (2 C0^4)`.
pub fn estimate_epsilon_bar(
    env: &AnalyticityEnvelope,
    a: f64,
    omega: &[f64],
    a_fraction: f64,
    theorem: u8,
    guard: BoundsGuard,
) -> Result<EpsilonBounds> {
    if !(a_fraction > 0.0 && a_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "A fraction must lie in (0, 1), got {a_fraction}"
        )));
    }
    if a == 0.0 {
        return Err(Error::Hypothesis("a = 0".into()));
    }
    if !(env.xi > 0.0 && env.rho > 0.0) {
        return Err(Error::InvalidArgument("envelope needs xi, rho > 0".into()));
    }
    let abs_a = a.abs();
    let c0 = match theorem {
        1 => (env.gamma / abs_a).max(env.phi).max(1.0) / env.rho,
        2 => (env.gamma / abs_a).max(1.0) / env.rho,
        t => return Err(Error::InvalidArgument(format!("unknown theorem {t}"))),
    };
    let big_a = a_fraction * c0;
    let delta_of = |n: u32| (-env.xi * (1u64 << n) as f64 / 4.0).exp();
    let n0_ok = |n: u32| {
        let delta = delta_of(n);
        match theorem {
            1 => c0 * c0 * delta / abs_a <= big_a * big_a,
            _ => c0.powi(4) * (delta / abs_a).max(delta) < big_a.powi(4),
        }
    };
    let n0 = (0..=62)
        .find(|&n| n0_ok(n))
        .ok_or_else(|| Error::InvalidArgument("no admissible n0 below 63".into()))?;
    let delta = delta_of(n0);

    let dim = omega.len();
    let reachable = n0 <= guard.max_n0 && (1u64 << n0) <= guard.radius_limit;
    let (alpha_n0, guard_limited) = if reachable {
        (alpha_n(omega, n0, guard.radius_limit)?.0, false)
    } else {
        let radius = (1u64 << guard.max_n0.min(62)).min(guard.radius_limit);
        let (min, nu) = min_small_divisor(omega, radius);
        if min == 0.0 {
            return Err(Error::Resonance { nu, value: 0.0 });
        }
        let _ = dim;
        (min, true)
    };

    let mut bounds = EpsilonBounds {
        theorem,
        a,
        a_fraction,
        big_a,
        n0,
        delta,
        c0,
        alpha_n0,
        eps_bar: 0.0,
        zeta_bar: 0.0,
        beta: None,
        guard_limited,
    };
    match theorem {
        1 => {
            bounds.eps_bar = big_a * big_a * alpha_n0 / (c0 * c0);
            bounds.zeta_bar = big_a * big_a / (2.0 * c0 * c0);
        }
        _ => {
            let a4 = big_a.powi(4);
            let c4 = c0.powi(4);
            let feasible = |eps: f64| c4 * (eps / alpha_n0).max(2.0 * eps * abs_a / alpha_n0) < a4;
            let (mut lo, mut hi) = (0.0, a4 * alpha_n0 / c4);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if feasible(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            bounds.eps_bar = 0.5 * lo;
            bounds.zeta_bar = a4 / (2.0 * c4);
            bounds.beta = Some(delta.max(2.0 * bounds.eps_bar * abs_a / alpha_n0));
        }
    }
    // Pull eps_bar down by ulps if rounding broke its own inequality.
    for _ in 0..64 {
        if bounds.all_hold() {
            break;
        }
        bounds.eps_bar *= 1.0 - f64::EPSILON;
        if let Some(beta) = bounds.beta.as_mut() {
            *beta = delta.max(2.0 * bounds.eps_bar * abs_a / alpha_n0);
        }
    }
    Ok(bounds)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PHI: f64 = 1.618_033_988_749_895;

    /// Plain scan over the whole ball, no half-space or convexity shortcuts.
    fn brute(omega: &[f64], radius: u32) -> f64 {
        crate::fourier::l1_ball(omega.len(), radius)
            .iter()
            .map(|nu| nu.dot(omega).abs())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn alpha_golden() {
        let (a1, nu1) = alpha_n(&[1.0, PHI], 1, 4096).unwrap();
        assert!((a1 - 0.618_03).abs() < 1e-5);
        assert_eq!(nu1, [1, -1].into());
        let (a2, nu2) = alpha_n(&[1.0, PHI], 2, 4096).unwrap();
        assert!((a2 - 0.381_97).abs() < 1e-5);
        assert_eq!(nu2, [2, -1].into());
        assert!((a1 - brute(&[1.0, PHI], 2)).abs() == 0.0);
        assert!((a2 - brute(&[1.0, PHI], 4)).abs() == 0.0);
    }

    #[test]
    fn alpha_matches_brute_force() {
        let omegas: [&[f64]; 4] = [
            &[1.0, PHI],
            &[1.0, 0.210_001],
            &[0.3, -1.7, 2.2],
            &[1.0, std::f64::consts::SQRT_2, std::f64::consts::E],
        ];
        for omega in omegas {
            for r in 1..=12u32 {
                let (m, nu) = min_small_divisor(omega, u64::from(r));
                assert_eq!(m, brute(omega, r), "omega {omega:?} r {r}");
                assert_eq!(nu.dot(omega).abs(), m);
                assert!(nu.norm() <= r);
            }
        }
    }

    #[test]
    fn alpha_single_frequency() {
        for n in 0..10 {
            assert_eq!(alpha_n(&[1.0], n, u64::MAX).unwrap().0, 1.0);
        }
    }

    #[test]
    fn alpha_resonance_and_guard() {
        assert!(matches!(
            alpha_n(&[1.0, 2.0], 2, 4096),
            Err(Error::Resonance { .. })
        ));
        assert!(matches!(
            alpha_n(&[1.0, PHI], 13, 4096),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn profile_golden_monotone_and_consistent() {
        let p = profile(&[1.0, PHI], 8, &[4, 8, 16, 10], 4096).unwrap();
        assert!(p.alpha.windows(2).all(|w| w[1] <= w[0]));
        for (n, &a) in p.alpha.iter().enumerate() {
            assert!((p.eps[n] - (1.0 / a).ln() / (1u64 << n) as f64).abs() < 1e-15);
        }
        for n in [2u32, 3, 4] {
            assert_eq!(p.r_table[&(1u64 << n)], p.alpha[n as usize]);
        }
        assert!(p.eps[8] < p.eps[4]);
        assert_eq!(p.class, FrequencyClass::DiophantineLike);
        let csv = p.to_csv();
        assert!(csv.starts_with("n,alpha_n,eps_n,bryuno_partial\n"));
        assert_eq!(csv.lines().count(), 10);
    }

    #[test]
    fn profile_single_frequency_is_one_row() {
        let p = profile(&[0.5], 6, &[], u64::MAX).unwrap();
        assert_eq!(p.alpha.len(), 1);
        assert!((p.eps[0] - 2f64.ln()).abs() < 1e-15);
        assert_eq!(p.class, FrequencyClass::Periodic);
    }

    #[test]
    fn profile_partial_stops_at_resonance() {
        let (p, err) = profile_partial(&[1.0, 2.0], 4, &[], 4096);
        assert_eq!(p.alpha.len(), 2);
        assert!(matches!(err, Some(Error::Resonance { .. })));
    }

    fn env(phi: f64, gamma: f64) -> AnalyticityEnvelope {
        AnalyticityEnvelope {
            xi: 1.0,
            rho: 1.0,
            phi,
            gamma,
        }
    }

    #[test]
    fn bounds_separable_formulas() {
        let b = estimate_epsilon_bar(&env(2.0, 1.0), 1.0, &[1.0, PHI], 0.5, 1, BoundsGuard::for_dim(2)).unwrap();
        assert_eq!(b.c0, 2.0);
        assert_eq!(b.big_a, 1.0);
        // delta(n0) <= |a| / 4 first at 2^n0 >= 4 ln 4 = 5.5.
        assert_eq!(b.n0, 3);
        assert!((b.eps_bar - b.alpha_n0 / 4.0).abs() < 1e-16);
        assert!((b.zeta_bar - 0.125).abs() < 1e-16);
        assert!(b.all_hold());

        // With A proportional to C0, eps_bar depends on the envelope only through n0.
        let b2 = estimate_epsilon_bar(&env(4.0, 1.0), 1.0, &[1.0, PHI], 0.5, 1, BoundsGuard::for_dim(2)).unwrap();
        assert_eq!(b2.c0, 4.0);
        assert_eq!(b2.n0, b.n0);
        assert!((b2.eps_bar - b.eps_bar).abs() < 1e-16);
    }

    #[test]
    fn bounds_scale_with_a_squared_at_fixed_n0() {
        // |a| large enough that n0 = 0 for both fractions.
        let b1 = estimate_epsilon_bar(&env(1.0, 1.0), 100.0, &[1.0, PHI], 0.4, 1, BoundsGuard::for_dim(2)).unwrap();
        let b2 = estimate_epsilon_bar(&env(1.0, 1.0), 100.0, &[1.0, PHI], 0.8, 1, BoundsGuard::for_dim(2)).unwrap();
        assert_eq!(b1.n0, b2.n0);
        assert!((b2.eps_bar / b1.eps_bar - 4.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_general_satisfy_strict_inequality() {
        let b = estimate_epsilon_bar(&env(0.0, 3.0), 1.0, &[1.0, PHI], 0.5, 2, BoundsGuard::for_dim(2)).unwrap();
        assert!(b.beta.is_some());
        assert!(b.all_hold());
        assert!(b.eps_bar > 0.0 && b.zeta_bar > 0.0);
    }

    #[test]
    fn bounds_guard_limited() {
        let guard = BoundsGuard {
            radius_limit: 4096,
            max_n0: 2,
        };
        let b = estimate_epsilon_bar(&env(1.0, 1.0), 1.0, &[1.0, PHI], 0.5, 1, guard).unwrap();
        assert!(b.guard_limited);
        assert_eq!(b.alpha_n0, alpha_n(&[1.0, PHI], 2, 4096).unwrap().0);
    }

    #[test]
    fn closer_to_resonance_needs_smaller_eps() {
        let liouville = [1.0, 0.1 + 0.1 + 0.01 + 1e-6 + 1e-24];
        let g = estimate_epsilon_bar(&env(2.0, 1.0), 1.0, &[1.0, PHI], 0.5, 1, BoundsGuard::for_dim(2)).unwrap();
        let l = estimate_epsilon_bar(&env(2.0, 1.0), 1.0, &liouville, 0.5, 1, BoundsGuard::for_dim(2)).unwrap();
        assert!(l.eps_bar < g.eps_bar);
    }
}
