//! The zero-mode (bifurcation) equation and the assembled response.
//!
//! For fixed `eps` the range solver gives `u(zeta)`. The remaining scalar
//! equation is
//!
//! * separable: `H(zeta) = a zeta + [G(c0 + zeta + u)]_0`;
//! * general: `H(zeta) = a zeta + [alpha_1' X]_0 + sum_{p >= 2} [alpha_p X^p]_0`
//!   with `X = zeta + u`.
//!
//! The second form follows from taking the zero mode of the whole equation.
//! A variant that weights `a zeta` and the `p >= 2` terms by `eps` but not the
//! `alpha_1'` term can be selected with [`BifurcationConfig::literal_weighting`];
//! it exists for comparison only.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::range::{OrderLadder, RangeSolver};
use crate::system::CentredSystem;

/// Imaginary part of the zero mode tolerated before it is discarded.
pub const ZERO_MODE_IMAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct BifurcationConfig {
    /// Number of orders `K`.
    pub orders: usize,
    /// Mode cutoff `N` (l1).
    pub cutoff: u32,
    /// Search bracket for `zeta`; defaults to `[-rho/4, rho/4]`.
    pub bracket: Option<(f64, f64)>,
    pub rho: f64,
    /// Sample points used to locate the unique sign change.
    pub samples: usize,
    pub max_iterations: usize,
    pub literal_weighting: bool,
    /// Re-solve at `eps/2` and `eps/4` and record the norms.
    pub continuity_probe: bool,
    /// If set, solving above this `eps` adds a warning.
    pub eps_bar: Option<f64>,
}

impl Default for BifurcationConfig {
    fn default() -> Self {
        BifurcationConfig {
            orders: 16,
            cutoff: 16,
            bracket: None,
            rho: 1.0,
            samples: 9,
            max_iterations: 200,
            literal_weighting: false,
            continuity_probe: true,
            eps_bar: None,
        }
    }
}

impl BifurcationConfig {
    pub fn with_truncation(orders: usize, cutoff: u32) -> Self {
        BifurcationConfig {
            orders,
            cutoff,
            ..Default::default()
        }
    }

    pub fn bracket(&self) -> (f64, f64) {
        self.bracket
            .unwrap_or((-self.rho / 4.0, self.rho / 4.0))
    }
}

/// `H` at one `zeta`, with the data it was built from.
#[derive(Debug, Clone)]
pub struct HEvaluation {
    pub zeta: f64,
    pub value: f64,
    /// `zeta + u` at `mu = 1`.
    pub x: FourierSeries,
    pub ladder: Option<OrderLadder>,
    pub ratios: Vec<f64>,
    pub ratio_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct BifurcationProblem {
    system: CentredSystem,
    omega: Vec<f64>,
    epsilon: f64,
    config: BifurcationConfig,
    solver: Option<RangeSolver>,
}

impl BifurcationProblem {
    pub fn new(system: &CentredSystem, omega: &[f64], epsilon: f64, config: BifurcationConfig) -> Result<Self> {
        if system.a == 0.0 {
            return Err(Error::Hypothesis("a = 0".into()));
        }
        if config.orders == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        let solver = if epsilon == 0.0 {
            if omega.len() != system.dim {
                return Err(Error::DimensionMismatch {
                    expected: system.dim,
                    found: omega.len(),
                });
            }
            None
        } else {
            Some(RangeSolver::new(system, omega, epsilon, config.cutoff)?)
        };
        Ok(BifurcationProblem {
            system: system.clone(),
            omega: omega.to_vec(),
            epsilon,
            config,
            solver,
        })
    }

    pub fn system(&self) -> &CentredSystem {
        &self.system
    }

    pub fn config(&self) -> &BifurcationConfig {
        &self.config
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn tolerance(&self) -> f64 {
        1e-12 * self.system.a.abs().max(1.0)
    }

    /// Builds the ladder at `zeta` and evaluates `H`.
    pub fn evaluate(&self, zeta: f64) -> Result<HEvaluation> {
        let (x, ladder, ratios, estimate) = match &self.solver {
            None => (
                FourierSeries::constant(self.system.dim, zeta.into()),
                None,
                Vec::new(),
                0.0,
            ),
            Some(solver) => {
                let ladder = solver.build_ladder(zeta, self.config.orders)?;
                let (ratios, estimate) = if ladder.len() >= 3 {
                    ladder.convergence_ratio(0.0)?
                } else {
                    (Vec::new(), 0.0)
                };
                if estimate.is_nan() || estimate >= 1.0 {
                    return Err(Error::Divergence(format!(
                        "order ladder ratio estimate {estimate:.3} >= 1 at eps = {}, zeta = {zeta}; reduce eps",
                        self.epsilon
                    )));
                }
                let mut x = ladder.assemble(1.0);
                if zeta == 0.0 {
                    x.set_zero_mode(0.0);
                }
                (x, Some(ladder), ratios, estimate)
            }
        };
        let parts = self.system.field_parts(&x, self.config.cutoff)?;
        let linear = parts.linear.zero_mode();
        let higher = parts.higher.zero_mode();
        let imag = linear.im + higher.im;
        if imag.abs() > ZERO_MODE_IMAG_TOL {
            return Err(Error::Symmetry(format!(
                "zero mode of the nonlinearity has imaginary part {imag:e}"
            )));
        }
        let a = self.system.a;
        let value = if self.config.literal_weighting && self.system.theorem() == 2 {
            self.epsilon * a * zeta + linear.re + self.epsilon * higher.re
        } else {
            a * zeta + linear.re + higher.re
        };
        if !value.is_finite() {
            return Err(Error::Divergence(format!("H({zeta}) is not finite")));
        }
        Ok(HEvaluation {
            zeta,
            value,
            x,
            ladder,
            ratios,
            ratio_estimate: estimate,
        })
    }

    /// `H(zeta, eps)`.
    pub fn h(&self, zeta: f64) -> Result<f64> {
        Ok(self.evaluate(zeta)?.value)
    }

    /// Root of `H` by a safeguarded secant iteration inside a bracket whose
    /// unique sign change is located by sampling.
    pub fn solve_zeta(&self) -> Result<f64> {
        Ok(self.solve_zeta_eval()?.zeta)
    }

    fn solve_zeta_eval(&self) -> Result<HEvaluation> {
        let tol = self.tolerance();
        let at_zero = self.evaluate(0.0)?;
        if at_zero.value.abs() <= tol {
            return Ok(at_zero);
        }
        let (lo, hi) = self.config.bracket();
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidArgument(format!("empty bracket [{lo}, {hi}]")));
        }
        let n = self.config.samples.max(2);
        let mut grid: Vec<(f64, f64)> = Vec::with_capacity(n + 1);
        for i in 0..n {
            let z = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            grid.push((z, self.h(z)?));
        }
        if lo < 0.0 && hi > 0.0 {
            grid.push((0.0, at_zero.value));
            grid.sort_by(|p, q| p.0.total_cmp(&q.0));
        }
        if let Some(&(z, _)) = grid.iter().find(|(_, h)| h.abs() <= tol) {
            return self.evaluate(z);
        }
        let changes: Vec<usize> = grid
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0].1.signum() != w[1].1.signum())
            .map(|(i, _)| i)
            .collect();
        let i = match changes.len() {
            0 => return Err(Error::RootNotFound { lo, hi }),
            1 => changes[0],
            count => return Err(Error::NonUniqueRoot { lo, hi, count }),
        };
        let (mut a, mut fa) = grid[i];
        let (mut b, mut fb) = grid[i + 1];
        // Illinois-modified regula falsi with bisection fallback.
        let mut side = 0i8;
        for _ in 0..self.config.max_iterations {
            let mut z = b - fb * (b - a) / (fb - fa);
            if !(z > a && z < b) || !z.is_finite() {
                z = 0.5 * (a + b);
            }
            let eval = self.evaluate(z)?;
            let fz = eval.value;
            if fz.abs() <= tol {
                return Ok(eval);
            }
            if fz.signum() == fb.signum() {
                b = z;
                fb = fz;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            } else {
                a = z;
                fa = fz;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            }
            if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
                break;
            }
        }
        Err(Error::Divergence(format!(
            "bifurcation residual did not reach {tol:e} in [{a}, {b}]"
        )))
    }

    /// `zeta(eps)`, the final ladder and both residuals.
    pub fn solve_response(&self) -> Result<ResponseSolution> {
        let eval = self.solve_zeta_eval()?;
        let cutoff = self.config.cutoff;
        let residual_range = match &self.solver {
            Some(solver) => solver.range_residual(&eval.x, cutoff)?,
            None => 0.0,
        };
        let mut warnings = Vec::new();
        if let Some(bar) = self.config.eps_bar {
            if self.epsilon.abs() > bar {
                warnings.push(format!(
                    "eps = {} exceeds the constructive bound eps_bar = {bar:e}",
                    self.epsilon
                ));
            }
        }
        let continuity = if self.config.continuity_probe && self.epsilon != 0.0 {
            Some(self.continuity_probe(&eval)?)
        } else {
            None
        };
        if let Some(c) = &continuity {
            if !c.decreasing {
                warnings.push("response norm did not decrease along eps, eps/2, eps/4".into());
            }
        }
        let order_norms = eval
            .ladder
            .as_ref()
            .map(|l| l.norms.clone())
            .unwrap_or_default();
        Ok(ResponseSolution {
            c0: self.system.c0,
            zeta: eval.zeta,
            epsilon: self.epsilon,
            omega: self.omega.clone(),
            residuals: Residuals {
                range: residual_range,
                bifurcation: eval.value.abs(),
            },
            u: eval.x,
            ladder_meta: LadderMeta {
                orders: self.config.orders,
                cutoff,
                ratios: eval.ratios,
                ratio_estimate: eval.ratio_estimate,
                order_norms,
            },
            continuity,
            warnings,
        })
    }

    fn continuity_probe(&self, eval: &HEvaluation) -> Result<ContinuityProbe> {
        let mut epsilons = vec![self.epsilon];
        let mut norms = vec![response_norm(&eval.x)];
        for div in [2.0, 4.0] {
            let mut config = self.config.clone();
            config.continuity_probe = false;
            let eps = self.epsilon / div;
            let sub = BifurcationProblem::new(&self.system, &self.omega, eps, config)?;
            let e = sub.solve_zeta_eval()?;
            epsilons.push(eps);
            norms.push(response_norm(&e.x));
        }
        let decreasing = norms.windows(2).all(|w| w[1] < w[0] || w[0] == 0.0 && w[1] == 0.0);
        Ok(ContinuityProbe {
            epsilons,
            norms,
            decreasing,
        })
    }
}

/// `|zeta| + sup_{nu != 0} |u_nu|`.
pub fn response_norm(x: &FourierSeries) -> f64 {
    x.zero_mode().norm() + x.without_zero_mode().max_abs()
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    /// `max |D u_nu + eps field_nu|` over `0 < |nu|_1 <= N`.
    pub range: f64,
    /// `|H(zeta, eps)|`.
    pub bifurcation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderMeta {
    #[serde(rename = "K")]
    pub orders: usize,
    #[serde(rename = "N")]
    pub cutoff: u32,
    pub ratios: Vec<f64>,
    pub ratio_estimate: f64,
    pub order_norms: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityProbe {
    pub epsilons: Vec<f64>,
    /// [`response_norm`] at each `eps`.
    pub norms: Vec<f64>,
    pub decreasing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResponseSolution {
    pub c0: f64,
    pub zeta: f64,
    pub epsilon: f64,
    pub omega: Vec<f64>,
    pub residuals: Residuals,
    /// `zeta + u`; the zero mode is `zeta`.
    pub u: FourierSeries,
    pub ladder_meta: LadderMeta,
    pub continuity: Option<ContinuityProbe>,
    pub warnings: Vec<String>,
}

impl ResponseSolution {
    /// `x(t) = c0 + zeta + u(omega t)`.
    pub fn x_at(&self, t: f64) -> f64 {
        let psi: Vec<f64> = self.omega.iter().map(|w| w * t).collect();
        self.c0 + self.u.evaluate_real(&psi).expect("dimension checked at construction")
    }

    /// `dx/dt` at `t`.
    pub fn v_at(&self, t: f64) -> f64 {
        let psi: Vec<f64> = self.omega.iter().map(|w| w * t).collect();
        self.u
            .iter()
            .map(|(nu, c)| {
                let s = nu.dot(&self.omega);
                (c * num_complex::Complex64::new(0.0, s) * num_complex::Complex64::from_polar(1.0, nu.dot(&psi))).re
            })
            .sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("solution serializes")
    }
}
