//! Independent checks of a response solution.
//!
//! * [`direct_solve`]: damped Picard iteration on the truncated Fourier system
//!   (all nonzero modes plus the zero-mode equation), no series involved.
//! * [`integrate`]: the ODE `x' = y`, `y' = -y/eps - h(x, omega t)` with an
//!   adaptive Dormand-Prince 5(4) pair.
//! * [`compare`]: integrates from several initial conditions and measures the
//!   distance to the response after a transient.

use serde::Serialize;

use crate::bifurcation::ResponseSolution;
use crate::error::{Error, Result};
use crate::fourier::{l1_ball, FourierSeries, MultiIndex};
use crate::range::denominator;
use crate::system::CentredSystem;

/// Smallest `eps` accepted by the explicit integrator.
pub const MIN_INTEGRATION_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct DirectConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// `1` is plain Picard; smaller values under-relax.
    pub damping: f64,
}

impl Default for DirectConfig {
    fn default() -> Self {
        DirectConfig {
            tolerance: 1e-12,
            max_iterations: 10_000,
            damping: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointResult {
    /// `zeta + u`; the zero mode is `zeta`.
    pub u_direct: FourierSeries,
    pub zeta_direct: f64,
    pub iterations: usize,
    pub final_residual: f64,
}

/// Residual of the truncated system at `x`: the worst of
/// `|D u_nu + eps field_nu|` over `0 < |nu|_1 <= N` and
/// `|a zeta + [field]_0|`; also returns the Picard update.
fn residual_and_update(
    system: &CentredSystem,
    eps: f64,
    cutoff: u32,
    modes: &[(MultiIndex, num_complex::Complex64)],
    x: &FourierSeries,
) -> Result<(f64, FourierSeries)> {
    let parts = system.field_parts(x, cutoff)?;
    let total = parts.total()?;
    let zeta = x.zero_mode().re;
    let zero_eq = system.a * zeta + parts.linear.zero_mode().re + parts.higher.zero_mode().re;
    let mut worst = zero_eq.abs();
    let mut next = Vec::with_capacity(modes.len() + 1);
    for (nu, d) in modes {
        let t = total.get(nu);
        worst = worst.max((d * x.get(nu) + t * eps).norm());
        let u = -t * eps / d;
        if u.norm() != 0.0 {
            next.push((nu.clone(), u));
        }
    }
    let new_zeta = zeta - zero_eq / system.a;
    next.push((MultiIndex::zero(system.dim), new_zeta.into()));
    Ok((worst, FourierSeries::from_modes(system.dim, next)?))
}

/// Solves the truncated range and zero-mode equations jointly by
/// `u_nu <- -eps field_nu / D`, `zeta <- zeta - (a zeta + [field]_0) / a`.
pub fn direct_solve(
    system: &CentredSystem,
    omega: &[f64],
    eps: f64,
    cutoff: u32,
    seed: Option<&FourierSeries>,
    config: &DirectConfig,
) -> Result<FixedPointResult> {
    if omega.len() != system.dim {
        return Err(Error::DimensionMismatch {
            expected: system.dim,
            found: omega.len(),
        });
    }
    if !(config.damping > 0.0 && config.damping <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must lie in (0, 1], got {}",
            config.damping
        )));
    }
    let modes: Vec<(MultiIndex, num_complex::Complex64)> = l1_ball(system.dim, cutoff)
        .into_iter()
        .map(|nu| {
            let d = denominator(eps, nu.dot(omega), system.a);
            (nu, d)
        })
        .collect();
    if let Some((nu, d)) = modes.iter().find(|(_, d)| d.norm() < crate::range::MIN_DENOMINATOR) {
        return Err(Error::Resonance {
            nu: nu.clone(),
            value: d.norm(),
        });
    }
    let mut x = match seed {
        Some(s) => s.truncate(cutoff),
        None => FourierSeries::constant(system.dim, 0.0.into()),
    };
    let mut iterations = 0;
    loop {
        let (res, update) = residual_and_update(system, eps, cutoff, &modes, &x)?;
        if !res.is_finite() || res > 1e12 {
            return Err(Error::Divergence(format!(
                "direct solve blew up after {iterations} iterations (residual {res:e})"
            )));
        }
        if res <= config.tolerance {
            let zeta = x.zero_mode().re;
            return Ok(FixedPointResult {
                u_direct: x,
                zeta_direct: zeta,
                iterations,
                final_residual: res,
            });
        }
        if iterations >= config.max_iterations {
            return Err(Error::Divergence(format!(
                "direct solve did not converge in {iterations} iterations (residual {res:e})"
            )));
        }
        x = if config.damping == 1.0 {
            update
        } else {
            x.scale(1.0 - config.damping).add(&update.scale(config.damping))?
        };
        iterations += 1;
    }
}

/// Sampled trajectory of `(x, y = x')`.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub steps: usize,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive DOPRI5 for a two-dimensional system, reporting the state at each
/// of the increasing `times` (the first entry is the start time). Steps are
/// shortened to land exactly on output times. The error norm is
/// `max_i |err_i| / (tol (1 + max(|y_i|, |y_new_i|)))`.
pub fn dopri5<F>(mut f: F, y0: [f64; 2], times: &[f64], tol: f64, h0: f64) -> Result<(Vec<[f64; 2]>, usize)>
where
    F: FnMut(f64, [f64; 2]) -> Result<[f64; 2]>,
{
    if times.is_empty() {
        return Ok((Vec::new(), 0));
    }
    let mut out = Vec::with_capacity(times.len());
    out.push(y0);
    let mut t = times[0];
    let mut y = y0;
    let mut h = h0;
    let mut steps = 0usize;
    let mut k = [[0.0; 2]; 7];
    k[0] = f(t, y)?;
    for &target in &times[1..] {
        while t < target {
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            if step < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Integration(format!(
                    "step size underflow at t = {t}; the problem is too stiff, increase eps or shorten the horizon"
                )));
            }
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    ys[0] += step * A[s][j] * kj[0];
                    ys[1] += step * A[s][j] * kj[1];
                }
                k[s] = f(t + C[s] * step, ys)?;
            }
            let mut y5 = y;
            let mut err = 0.0f64;
            for i in 0..2 {
                let mut d5 = 0.0;
                let mut d4 = 0.0;
                for s in 0..7 {
                    d5 += B5[s] * k[s][i];
                    d4 += B4[s] * k[s][i];
                }
                y5[i] += step * d5;
                let scale = tol * (1.0 + y[i].abs().max(y5[i].abs()));
                err = err.max((step * (d5 - d4)).abs() / scale);
            }
            if !err.is_finite() {
                return Err(Error::Integration(format!("non-finite state at t = {t}")));
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y5;
                // FSAL: the seventh stage is f at the new point.
                k[0] = k[6];
                steps += 1;
                if !last || step >= h {
                    h = step * factor;
                }
            } else {
                h = step * factor.min(1.0);
            }
        }
        out.push(y);
    }
    Ok((out, steps))
}

/// Integrates `eps x'' + x' + eps h(x, omega t) = 0` from `(x0, v0)` at
/// `t = 0` to `t_end`, sampling every `dt_out`.
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    system: &CentredSystem,
    omega: &[f64],
    eps: f64,
    x0: f64,
    v0: f64,
    t_end: f64,
    dt_out: f64,
    tol: f64,
) -> Result<Trajectory> {
    if eps < MIN_INTEGRATION_EPS {
        return Err(Error::InvalidArgument(format!(
            "eps = {eps} is below the explicit-integration guard {MIN_INTEGRATION_EPS}"
        )));
    }
    if tol < 1e-12 {
        return Err(Error::InvalidArgument(format!("tol = {tol:e} is below 1e-12")));
    }
    if !(dt_out > 0.0 && t_end >= 0.0) {
        return Err(Error::InvalidArgument("need dt_out > 0 and t_end >= 0".into()));
    }
    let n = (t_end / dt_out).ceil() as usize;
    let times: Vec<f64> = (0..=n).map(|i| (i as f64 * dt_out).min(t_end)).collect();
    let mut psi = vec![0.0; omega.len()];
    let rhs = |t: f64, s: [f64; 2]| -> Result<[f64; 2]> {
        for (p, w) in psi.iter_mut().zip(omega) {
            *p = w * t;
        }
        let h = system.force(s[0], &psi)?;
        Ok([s[1], -s[1] / eps - h])
    };
    let (states, steps) = dopri5(rhs, [x0, v0], &times, tol, eps.min(0.01))?;
    Ok(Trajectory {
        t: times,
        x: states.iter().map(|s| s[0]).collect(),
        y: states.iter().map(|s| s[1]).collect(),
        steps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryComparison {
    pub transient_time: f64,
    pub window: f64,
    pub initial_conditions: Vec<(f64, f64)>,
    /// `sup_{t in [T0, T0 + T1]} |x(t) - x_response(t)|` per initial condition.
    pub sup_errors: Vec<f64>,
    pub sup_error: f64,
    /// Largest `|x_i - x_j|` at `T0 + T1` over pairs of initial conditions.
    pub pairwise_final: f64,
    /// Whether attraction was assessed (requires `a > 0`).
    pub attraction_checked: bool,
    pub notices: Vec<String>,
    #[serde(skip)]
    pub trajectories: Vec<Trajectory>,
}

/// Default transient `20 / (a eps)`.
pub fn default_transient(a: f64, eps: f64) -> f64 {
    20.0 / (a.abs() * eps)
}

#[derive(Debug, Clone, Copy)]
pub struct CompareOptions {
    pub transient: f64,
    pub window: f64,
    pub dt_out: f64,
    pub tol: f64,
}

/// Integrates from each initial condition and measures the distance to the
/// response on `[T0, T0 + T1]`.
pub fn compare(
    solution: &ResponseSolution,
    system: &CentredSystem,
    ics: &[(f64, f64)],
    opts: CompareOptions,
) -> Result<TrajectoryComparison> {
    let t_end = opts.transient + opts.window;
    let mut sup_errors = Vec::with_capacity(ics.len());
    let mut trajectories = Vec::with_capacity(ics.len());
    for &(x0, v0) in ics {
        let traj = integrate(
            system,
            &solution.omega,
            solution.epsilon,
            x0,
            v0,
            t_end,
            opts.dt_out,
            opts.tol,
        )?;
        let mut sup = 0.0f64;
        for (t, x) in traj.t.iter().zip(&traj.x) {
            if *t >= opts.transient {
                sup = sup.max((x - solution.x_at(*t)).abs());
            }
        }
        sup_errors.push(sup);
        trajectories.push(traj);
    }
    let mut pairwise = 0.0f64;
    for i in 0..trajectories.len() {
        for j in i + 1..trajectories.len() {
            let xi = trajectories[i].x.last().copied().unwrap_or(0.0);
            let xj = trajectories[j].x.last().copied().unwrap_or(0.0);
            pairwise = pairwise.max((xi - xj).abs());
        }
    }
    let attraction_checked = system.a > 0.0;
    let mut notices = Vec::new();
    if !attraction_checked {
        notices.push(format!(
            "a = {} <= 0: the response is not attracting, attraction check skipped",
            system.a
        ));
    }
    Ok(TrajectoryComparison {
        transient_time: opts.transient,
        window: opts.window,
        initial_conditions: ics.to_vec(),
        sup_error: sup_errors.iter().copied().fold(0.0, f64::max),
        sup_errors,
        pairwise_final: pairwise,
        attraction_checked,
        notices,
        trajectories,
    })
}

/// CSV with header `t,x,y,x_response,abs_error`.
pub fn trajectory_csv(traj: &Trajectory, solution: &ResponseSolution) -> String {
    let mut out = String::from("t,x,y,x_response,abs_error\n");
    for i in 0..traj.t.len() {
        let xr = solution.x_at(traj.t[i]);
        out.push_str(&format!(
            "{},{:e},{:e},{:e},{:e}\n",
            traj.t[i],
            traj.x[i],
            traj.y[i],
            xr,
            (traj.x[i] - xr).abs()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifurcation::{BifurcationConfig, BifurcationProblem};
    use crate::system::{SeparableSystem, TaylorPoly};
    use num_complex::Complex64;

    const PHI: f64 = 1.618_033_988_749_895;

    fn system(coeffs: Vec<f64>, forcing: FourierSeries) -> CentredSystem {
        let g = TaylorPoly::new(0.0, coeffs);
        let f0 = forcing.zero_mode().re;
        let sys = SeparableSystem::new(g, forcing).unwrap();
        let c0 = sys.find_c0((-5.0 + f0, 5.0 + f0))[0].c0;
        sys.recentre(c0).unwrap()
    }

    fn golden_forcing() -> FourierSeries {
        FourierSeries::cosine([1, 0].into(), 1.0)
            .add(&FourierSeries::cosine([0, 1].into(), 1.0))
            .unwrap()
    }

    #[test]
    fn linear_direct_solve_takes_one_iteration() {
        let sys = system(vec![0.0, 1.0], golden_forcing());
        let eps = 0.1;
        let r = direct_solve(&sys, &[1.0, PHI], eps, 6, None, &DirectConfig::default()).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.zeta_direct, 0.0);
        let nu = MultiIndex::from([0, 1]);
        let expect = Complex64::new(0.5 * eps, 0.0) / denominator(eps, PHI, 1.0);
        assert!((r.u_direct.get(&nu) - expect).norm() < 1e-16);
    }

    #[test]
    fn direct_solve_matches_series_for_cubic() {
        let sys = system(vec![0.0, 1.0, 0.0, 1.0], golden_forcing());
        let eps = 0.05;
        let mut cfg = BifurcationConfig::with_truncation(20, 12);
        cfg.continuity_probe = false;
        let sol = BifurcationProblem::new(&sys, &[1.0, PHI], eps, cfg)
            .unwrap()
            .solve_response()
            .unwrap();
        let r = direct_solve(&sys, &[1.0, PHI], eps, 12, None, &DirectConfig::default()).unwrap();
        assert!(r.u_direct.max_abs_diff(&sol.u) < 1e-10);
        assert!((r.zeta_direct - sol.zeta).abs() < 1e-10);
    }

    #[test]
    fn direct_solve_reports_divergence() {
        let sys = system(vec![0.0, 1.0, 0.0, 50.0], golden_forcing().scale(20.0));
        let r = direct_solve(&sys, &[1.0, PHI], 0.9, 6, None, &DirectConfig::default());
        assert!(matches!(r, Err(Error::Divergence(_))));
    }

    #[test]
    fn direct_divergence_matches_ladder() {
        let sys = system(vec![0.0, 1.0, 0.0, 2.0], golden_forcing().scale(4.0));
        for eps in [0.05, 0.1, 0.2, 0.3, 0.5] {
            let mut cfg = BifurcationConfig::with_truncation(16, 12);
            cfg.continuity_probe = false;
            let series = BifurcationProblem::new(&sys, &[1.0, PHI], eps, cfg).unwrap().solve_response();
            let direct = direct_solve(&sys, &[1.0, PHI], eps, 12, None, &DirectConfig::default());
            match (&series, &direct) {
                (Ok(_), Ok(_)) => assert!(eps <= 0.1),
                (Err(Error::Divergence(_)), Err(Error::Divergence(_))) => assert!(eps >= 0.2),
                _ => panic!("series and direct solve disagree at eps = {eps}"),
            }
        }
    }

    #[test]
    fn free_linear_decay() {
        let sys = system(vec![0.0, 1.0], FourierSeries::new(2));
        let eps = 0.05;
        let t_end = 20.0 / eps;
        let tr = integrate(&sys, &[1.0, PHI], eps, 0.1, 0.0, t_end, 1.0, 1e-10).unwrap();
        assert!(tr.x.last().unwrap().abs() <= 1e-3);
        // Exact: slow root of eps l^2 + l + eps = 0 dominates.
        let disc = (1.0 - 4.0 * eps * eps).sqrt();
        let (l1, l2) = ((-1.0 + disc) / (2.0 * eps), (-1.0 - disc) / (2.0 * eps));
        let c1 = 0.1 * l2 / (l2 - l1);
        let c2 = 0.1 - c1;
        for (t, x) in tr.t.iter().zip(&tr.x).step_by(37) {
            let exact = c1 * (l1 * t).exp() + c2 * (l2 * t).exp();
            assert!((x - exact).abs() < 1e-8, "t {t}");
        }
    }

    #[test]
    fn constant_forcing_settles_at_constant() {
        let f = FourierSeries::constant(2, Complex64::new(0.7, 0.0));
        let sys = system(vec![0.0, 1.0], f);
        let tr = integrate(&sys, &[1.0, PHI], 0.1, 0.0, 0.0, 300.0, 10.0, 1e-10).unwrap();
        assert!((tr.x.last().unwrap() - 0.7).abs() < 1e-9);
    }

    #[test]
    fn linear_forced_trajectory_converges_to_response() {
        let sys = system(vec![0.0, 1.0], golden_forcing());
        let eps = 0.05;
        let mut cfg = BifurcationConfig::with_truncation(4, 4);
        cfg.continuity_probe = false;
        let sol = BifurcationProblem::new(&sys, &[1.0, PHI], eps, cfg)
            .unwrap()
            .solve_response()
            .unwrap();
        let opts = CompareOptions {
            transient: default_transient(1.0, eps),
            window: 50.0,
            dt_out: 0.25,
            tol: 1e-10,
        };
        let cmp = compare(&sol, &sys, &[(0.0, 0.0), (0.1, 0.0), (-0.05, 0.1)], opts).unwrap();
        assert!(cmp.sup_error <= 1e-6, "{}", cmp.sup_error);
        assert!(cmp.attraction_checked);
        let csv = trajectory_csv(&cmp.trajectories[0], &sol);
        assert!(csv.starts_with("t,x,y,x_response,abs_error\n"));
    }

    #[test]
    fn single_mode_linear_error_within_tol() {
        let sys = system(vec![0.0, 1.0], FourierSeries::cosine([0, 1].into(), 1.0));
        let eps = 0.1;
        let mut cfg = BifurcationConfig::with_truncation(2, 2);
        cfg.continuity_probe = false;
        let sol = BifurcationProblem::new(&sys, &[1.0, PHI], eps, cfg)
            .unwrap()
            .solve_response()
            .unwrap();
        let tol = 1e-10;
        let opts = CompareOptions {
            transient: 10.0 / eps,
            window: 20.0,
            dt_out: 0.1,
            tol,
        };
        let cmp = compare(&sol, &sys, &[(sol.x_at(0.0), sol.v_at(0.0))], opts).unwrap();
        assert!(cmp.sup_error <= 10.0 * tol, "{}", cmp.sup_error);
    }

    #[test]
    fn halving_tol_does_not_worsen_error() {
        let sys = system(vec![0.0, 1.0, 0.0, 1.0], golden_forcing());
        let eps = 0.05;
        let mut cfg = BifurcationConfig::with_truncation(16, 16);
        cfg.continuity_probe = false;
        let sol = BifurcationProblem::new(&sys, &[1.0, PHI], eps, cfg)
            .unwrap()
            .solve_response()
            .unwrap();
        let err = |tol: f64| {
            let opts = CompareOptions {
                transient: default_transient(1.0, eps),
                window: 30.0,
                dt_out: 0.1,
                tol,
            };
            compare(&sol, &sys, &[(0.05, 0.0)], opts).unwrap().sup_error
        };
        for tol in [1e-6, 1e-8] {
            assert!(err(tol / 2.0) <= 2.0 * err(tol));
        }
    }

    #[test]
    fn repelling_zero_skips_attraction() {
        let sys = SeparableSystem::new(TaylorPoly::new(0.0, vec![0.0, -1.0, 0.0, 1.0]), golden_forcing())
            .unwrap()
            .recentre(0.0)
            .unwrap();
        assert_eq!(sys.a, -1.0);
        let eps = 0.05;
        let mut cfg = BifurcationConfig::with_truncation(16, 16);
        cfg.continuity_probe = false;
        let sol = BifurcationProblem::new(&sys, &[1.0, PHI], eps, cfg)
            .unwrap()
            .solve_response()
            .unwrap();
        assert!(sol.residuals.range < 1e-10);
        let opts = CompareOptions {
            transient: 1.0,
            window: 1.0,
            dt_out: 0.1,
            tol: 1e-8,
        };
        let cmp = compare(&sol, &sys, &[(sol.c0, 0.0)], opts).unwrap();
        assert!(!cmp.attraction_checked);
        assert_eq!(cmp.notices.len(), 1);
    }

    #[test]
    fn stiffness_guard() {
        let sys = system(vec![0.0, 1.0], golden_forcing());
        assert!(integrate(&sys, &[1.0, PHI], 1e-4, 0.0, 0.0, 1.0, 0.1, 1e-10).is_err());
    }
}
