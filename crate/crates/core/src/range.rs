//! Order-by-order solution of the range equation.
//!
//! With `x = c0 + zeta + u` and `u = sum_k mu^k u^(k)`, the nonzero modes obey
//! `D(eps, omega . nu) u_nu + eps [field]_nu = 0`. Collecting powers of `mu`:
//!
//! * `u^(1)_nu = eps f_nu / D` (resp. `-eps h_nu(c0) / D`), `u^(1)_0 = zeta`;
//! * `u^(k)_nu = -eps / D * sum_{p >= 2} a_p P_p^(k-1)_nu` for separable systems;
//! * `u^(k)_nu = -eps / D * [alpha_1' u^(k-1) + sum_{p >= 2} alpha_p P_p^(k-1)]_nu`
//!   in general, where `alpha_1'` is `alpha_1` without its zero mode.
//!
//! `P_p^(m)` is the order-`m` part of `u^p`, kept in a cache and built as
//! `P_p^(m) = sum_j u^(j) * P_{p-1}^(m-j)`. All products are truncated to
//! `|nu|_1 <= N`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{l1_ball, FourierSeries, MultiIndex};
use crate::system::CentredSystem;

/// Below this `|D|` a division is refused.
pub const MIN_DENOMINATOR: f64 = 1e-300;

/// `D(eps, s) = -eps s^2 + i s + eps a`.
pub fn denominator(eps: f64, s: f64, a: f64) -> Complex64 {
    Complex64::new(-eps * s * s + eps * a, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Propagator {
    pub eps: f64,
    pub a: f64,
}

impl Propagator {
    pub fn new(eps: f64, a: f64) -> Self {
        Propagator { eps, a }
    }

    pub fn denominator(&self, s: f64) -> Complex64 {
        denominator(self.eps, s, self.a)
    }

    /// `1 / D(eps, s)`; errors when `|D|` underflows.
    pub fn apply(&self, s: f64) -> Result<Complex64> {
        let d = self.denominator(s);
        if d.norm() < MIN_DENOMINATOR {
            return Err(Error::Resonance {
                nu: MultiIndex::zero(1),
                value: s,
            });
        }
        Ok(d.inv())
    }

    /// Whether `eps^2 <= 1 / (2 |a|)`, where `|D| >= max(|a eps|, |s|)` holds.
    pub fn bound_applies(&self) -> bool {
        self.eps * self.eps <= 1.0 / (2.0 * self.a.abs())
    }

    pub fn lower_bound(&self, s: f64) -> f64 {
        (self.a * self.eps).abs().max(s.abs())
    }
}

/// The coefficients `u^(1), ..., u^(K)` at fixed `(eps, zeta)`.
#[derive(Debug, Clone, Serialize)]
pub struct OrderLadder {
    pub epsilon: f64,
    pub zeta: f64,
    pub cutoff: u32,
    pub orders: Vec<FourierSeries>,
    /// Plain l1 norm of each order.
    pub norms: Vec<f64>,
    #[serde(skip)]
    powers: Vec<Vec<FourierSeries>>,
}

impl OrderLadder {
    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// `u^(k)`, one-based.
    pub fn order(&self, k: usize) -> &FourierSeries {
        &self.orders[k - 1]
    }

    /// `sum_k mu^k u^(k)`, each mode summed in increasing `k`.
    pub fn assemble(&self, mu: f64) -> FourierSeries {
        let dim = self.orders.first().map_or(0, FourierSeries::dim);
        let mut out = FourierSeries::new(dim);
        if mu == 0.0 {
            return out;
        }
        for (i, u) in self.orders.iter().enumerate() {
            if u.is_empty() {
                continue;
            }
            out = out
                .add(&u.scale(mu.powi(i as i32 + 1)))
                .expect("orders share a dimension");
        }
        out
    }

    /// Per-order growth ratios of `||u^(k)||_{xi}` and their tail median.
    ///
    /// Orders with zero norm are skipped; a ratio between orders `k < k'` is
    /// normalised to one step as `(n_k' / n_k)^{1/(k'-k)}`. The estimate is the
    /// median of the last `ceil(M/3)` of the `M` ratios.
    pub fn convergence_ratio(&self, xi: f64) -> Result<(Vec<f64>, f64)> {
        if self.orders.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "need at least 3 orders, have {}",
                self.orders.len()
            )));
        }
        let nonzero: Vec<(usize, f64)> = self
            .orders
            .iter()
            .enumerate()
            .map(|(k, u)| (k, u.weighted_norm(xi)))
            .filter(|&(_, n)| n > 0.0)
            .collect();
        let ratios: Vec<f64> = nonzero
            .windows(2)
            .map(|w| (w[1].1 / w[0].1).powf(1.0 / (w[1].0 - w[0].0) as f64))
            .collect();
        if ratios.is_empty() {
            return Ok((ratios, 0.0));
        }
        let take = ratios.len().div_ceil(3);
        let mut tail = ratios[ratios.len() - take..].to_vec();
        tail.sort_by(f64::total_cmp);
        let mid = tail.len() / 2;
        let median = if tail.len() % 2 == 1 {
            tail[mid]
        } else {
            0.5 * (tail[mid - 1] + tail[mid])
        };
        Ok((ratios, median))
    }

    /// Order-`m` part of `u^p`; `m` and `p` are one-based.
    pub fn power_product(&self, p: usize, m: usize) -> Option<&FourierSeries> {
        if p == 1 {
            return self.orders.get(m.wrapping_sub(1));
        }
        self.powers.get(p).and_then(|row| row.get(m))
    }
}

/// Builds order ladders for one system at fixed `(omega, eps, N)`.
#[derive(Debug, Clone)]
pub struct RangeSolver {
    system: CentredSystem,
    omega: Vec<f64>,
    epsilon: f64,
    cutoff: u32,
    inv_d: BTreeMap<MultiIndex, Complex64>,
    max_degree: usize,
}

impl RangeSolver {
    /// Precomputes `1 / D(eps, omega . nu)` on `0 < |nu|_1 <= N`.
    pub fn new(system: &CentredSystem, omega: &[f64], epsilon: f64, cutoff: u32) -> Result<Self> {
        if omega.len() != system.dim {
            return Err(Error::DimensionMismatch {
                expected: system.dim,
                found: omega.len(),
            });
        }
        if epsilon == 0.0 || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "eps must be finite and nonzero, got {epsilon}"
            )));
        }
        let prop = Propagator::new(epsilon, system.a);
        let mut inv_d = BTreeMap::new();
        for nu in l1_ball(system.dim, cutoff) {
            let s = nu.dot(omega);
            let d = prop.denominator(s);
            if d.norm() < MIN_DENOMINATOR {
                return Err(Error::Resonance {
                    nu,
                    value: d.norm(),
                });
            }
            inv_d.insert(nu, d.inv());
        }
        Ok(RangeSolver {
            system: system.clone(),
            omega: omega.to_vec(),
            epsilon,
            cutoff,
            inv_d,
            max_degree: system.max_nonlinear_degree(),
        })
    }

    pub fn system(&self) -> &CentredSystem {
        &self.system
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// `-eps / D(omega . nu)` applied to every nonzero mode of `rhs`; the zero
    /// mode and modes beyond `N` are dropped.
    fn propagate(&self, rhs: &FourierSeries, factor: f64) -> FourierSeries {
        let zero = MultiIndex::zero(self.system.dim);
        rhs.truncate(self.cutoff)
            .without_zero_mode()
            .map_coeffs(|nu, c| {
                debug_assert!(*nu != zero);
                c * self.inv_d[nu] * factor
            })
    }

    /// `u^(1)`: the propagated source plus the zero mode `zeta`.
    pub fn first_order(&self, zeta: f64) -> FourierSeries {
        let mut u = self.propagate(&self.system.first_order_source(), self.epsilon);
        if zeta != 0.0 {
            u.set_zero_mode(zeta);
        }
        u
    }

    /// Separable recursion for `u^(k)`, `k >= 2`.
    pub fn next_order_separable(&self, ladder: &OrderLadder, k: usize) -> Result<FourierSeries> {
        self.check_order(ladder, k)?;
        let mut rhs = FourierSeries::new(self.system.dim);
        for p in 2..=self.max_degree.min(k - 1) {
            let ap = self.system.taylor_coeff(p);
            if ap == 0.0 {
                continue;
            }
            if let Some(prod) = ladder.power_product(p, k - 1) {
                if !prod.is_empty() {
                    rhs = rhs.add(&prod.scale(ap))?;
                }
            }
        }
        Ok(self.propagate(&rhs, -self.epsilon))
    }

    /// General recursion for `u^(k)`, `k >= 2`, including the linear
    /// oscillating coefficient `alpha_1'`.
    pub fn next_order_general(&self, ladder: &OrderLadder, k: usize) -> Result<FourierSeries> {
        self.check_order(ladder, k)?;
        let n = self.cutoff;
        let prev = ladder.order(k - 1);
        let mut rhs = FourierSeries::new(self.system.dim);
        let alpha1 = self.system.alpha1_oscillating();
        if !alpha1.is_empty() && !prev.is_empty() {
            rhs = rhs.add(&alpha1.convolve_truncated(prev, n)?)?;
        }
        for p in 2..=self.max_degree.min(k - 1) {
            let alpha = self.system.alpha(p);
            if alpha.is_empty() {
                continue;
            }
            if let Some(prod) = ladder.power_product(p, k - 1) {
                if !prod.is_empty() {
                    rhs = rhs.add(&alpha.convolve_truncated(prod, n)?)?;
                }
            }
        }
        Ok(self.propagate(&rhs, -self.epsilon))
    }

    /// Dispatches on the system family.
    pub fn next_order(&self, ladder: &OrderLadder, k: usize) -> Result<FourierSeries> {
        match self.system.theorem() {
            1 => self.next_order_separable(ladder, k),
            _ => self.next_order_general(ladder, k),
        }
    }

    fn check_order(&self, ladder: &OrderLadder, k: usize) -> Result<()> {
        if k < 2 || ladder.len() < k - 1 {
            return Err(Error::InvalidArgument(format!(
                "order {k} needs orders 1..{} (have {})",
                k.saturating_sub(1),
                ladder.len()
            )));
        }
        Ok(())
    }

    /// A ladder holding only `u^(1)`.
    pub fn start(&self, zeta: f64) -> Result<OrderLadder> {
        let mut ladder = OrderLadder {
            epsilon: self.epsilon,
            zeta,
            cutoff: self.cutoff,
            orders: Vec::new(),
            norms: Vec::new(),
            powers: vec![Vec::new(); self.max_degree + 1],
        };
        self.push(&mut ladder, self.first_order(zeta))?;
        Ok(ladder)
    }

    /// Appends `u^(k)` and extends the power cache to order `k`.
    fn push(&self, ladder: &mut OrderLadder, u: FourierSeries) -> Result<()> {
        ladder.norms.push(u.weighted_norm(0.0));
        ladder.orders.push(u);
        let k = ladder.orders.len();
        let dim = self.system.dim;
        for p in 2..=self.max_degree {
            let row_len = ladder.powers[p].len();
            if row_len == 0 {
                // index 0 unused; orders below p vanish
                ladder.powers[p].push(FourierSeries::new(dim));
            }
            let mut acc = FourierSeries::new(dim);
            if k >= p {
                for j in 1..=k + 1 - p {
                    let a = &ladder.orders[j - 1];
                    let b = if p == 2 {
                        &ladder.orders[k - j - 1]
                    } else {
                        &ladder.powers[p - 1][k - j]
                    };
                    if a.is_empty() || b.is_empty() {
                        continue;
                    }
                    acc = acc.add(&a.convolve_truncated(b, self.cutoff)?)?;
                }
            }
            ladder.powers[p].push(acc);
        }
        Ok(())
    }

    /// Extends `ladder` to `k_max` orders.
    pub fn extend(&self, ladder: &mut OrderLadder, k_max: usize) -> Result<()> {
        while ladder.len() < k_max {
            let k = ladder.len() + 1;
            let u = self.next_order(ladder, k)?;
            self.push(ladder, u)?;
        }
        Ok(())
    }

    /// `u^(1), ..., u^(K)` at `zeta`.
    pub fn build_ladder(&self, zeta: f64, k_max: usize) -> Result<OrderLadder> {
        if k_max == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        let mut ladder = self.start(zeta)?;
        self.extend(&mut ladder, k_max)?;
        Ok(ladder)
    }

    /// `max |D u_nu + eps field(zeta + u)_nu|` over `0 < |nu|_1 <= radius`,
    /// where `x` carries `zeta` as its zero mode.
    pub fn range_residual(&self, x: &FourierSeries, radius: u32) -> Result<f64> {
        let parts = self.system.field_parts(x, self.cutoff)?;
        let total = parts.total()?;
        let prop = Propagator::new(self.epsilon, self.system.a);
        let mut worst = 0.0f64;
        for nu in self.inv_d.keys().filter(|nu| nu.norm() <= radius) {
            let d = prop.denominator(nu.dot(&self.omega));
            let r = d * x.get(nu) + total.get(nu) * self.epsilon;
            worst = worst.max(r.norm());
        }
        Ok(worst)
    }
}
