use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use qpresponse::bifurcation::{response_norm, BifurcationConfig, BifurcationProblem, ResponseSolution};
use qpresponse::diophantine::{default_radius_limit, estimate_epsilon_bar, profile_partial, BoundsGuard, EpsilonBounds};
use qpresponse::problem::Problem;
use qpresponse::range::RangeSolver;
use qpresponse::system::{certify_envelope, check_nonresonance};
use qpresponse::trees::{tree_value, verify_counting, TreeContext, TreeEnumerator};
use qpresponse::validation::{
    compare, default_transient, direct_solve, trajectory_csv, CompareOptions, DirectConfig, MIN_INTEGRATION_EPS,
};
use qpresponse::{Error, MultiIndex};

use crate::config::RunConfig;
use crate::exit::{code_for, CliError, CHECK_FAILED, SUCCESS};

pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub out: &'a Path,
    pub literal: bool,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn bifurcation_config(ctx: &Context, eps_bar: Option<f64>) -> BifurcationConfig {
    let p = &ctx.config.problem;
    let s = &ctx.config.solve;
    BifurcationConfig {
        orders: p.truncation.orders,
        cutoff: p.truncation.cutoff,
        bracket: s.bracket,
        rho: p.rho,
        samples: s.samples,
        max_iterations: s.max_iterations,
        literal_weighting: ctx.literal,
        continuity_probe: s.continuity_probe,
        eps_bar,
    }
}

/// Refuses to divide by a vanishing small divisor inside the cutoff.
fn require_nonresonant(problem: &Problem) -> Result<(), CliError> {
    let nr = check_nonresonance(&problem.spec.omega, problem.spec.truncation.cutoff)?;
    if nr.resonant {
        return Err(Error::Resonance {
            nu: nr.argmin,
            value: nr.min,
        }
        .into());
    }
    Ok(())
}

/// Advisory constructive bounds; `None` when the guards refuse.
fn advisory_bounds(problem: &Problem, a_fraction: f64) -> Option<EpsilonBounds> {
    let env = certify_envelope(&problem.system, problem.spec.xi, problem.spec.rho).ok()?;
    estimate_epsilon_bar(
        &env,
        problem.system.a,
        &problem.spec.omega,
        a_fraction,
        problem.system.theorem(),
        BoundsGuard::for_dim(problem.system.dim),
    )
    .ok()
}

fn solve_problem(ctx: &Context, problem: &Problem) -> Result<(ResponseSolution, Option<EpsilonBounds>), CliError> {
    require_nonresonant(problem)?;
    let bounds = advisory_bounds(problem, ctx.config.solve.a_fraction);
    let cfg = bifurcation_config(ctx, bounds.as_ref().map(|b| b.eps_bar));
    let sol = BifurcationProblem::new(&problem.system, &problem.spec.omega, problem.spec.epsilon, cfg)?
        .solve_response()?;
    Ok((sol, bounds))
}

pub fn solve(ctx: &Context) -> Result<i32, CliError> {
    let problem = ctx.config.problem.build()?;
    let (sol, bounds) = solve_problem(ctx, &problem)?;
    write_json(&ctx.out.join("solution.json"), &sol)?;
    let summary = json!({
        "c0": sol.c0,
        "a": problem.system.a,
        "theorem": problem.system.theorem(),
        "zeta": sol.zeta,
        "epsilon": sol.epsilon,
        "residuals": sol.residuals,
        "ratio_estimate": sol.ladder_meta.ratio_estimate,
        "response_norm": response_norm(&sol.u),
        "bounds": bounds,
        "warnings": sol.warnings,
    });
    write_json(&ctx.out.join("summary.json"), &summary)?;
    println!(
        "zeta = {:e}, range residual = {:e}, bifurcation residual = {:e}, ratio = {:.4}",
        sol.zeta, sol.residuals.range, sol.residuals.bifurcation, sol.ladder_meta.ratio_estimate
    );
    for w in &sol.warnings {
        eprintln!("warning: {w}");
    }
    Ok(SUCCESS)
}

pub fn diagnose(ctx: &Context) -> Result<i32, CliError> {
    let spec = &ctx.config.problem;
    let opts = &ctx.config.diagnose;
    let limit = opts.radius_limit.unwrap_or_else(|| default_radius_limit(spec.dimension));
    let guard_n = 63 - limit.leading_zeros();
    let n_max = opts.n_max.unwrap_or(guard_n.min(8));
    let (profile, stop) = profile_partial(&spec.omega, n_max, &opts.n_list, limit);
    fs::write(ctx.out.join("profile.csv"), profile.to_csv())?;

    let mut block = json!({ "profile": profile });
    let mut code = SUCCESS;
    if let Some(e) = &stop {
        block["error"] = json!(e.to_string());
        code = code_for(e);
        eprintln!("error: {e} (partial profile written)");
    } else {
        match spec.build() {
            Ok(problem) => {
                let env = certify_envelope(&problem.system, spec.xi, spec.rho)?;
                let guard = BoundsGuard {
                    radius_limit: limit,
                    max_n0: guard_n,
                };
                match estimate_epsilon_bar(
                    &env,
                    problem.system.a,
                    &spec.omega,
                    opts.a_fraction,
                    problem.system.theorem(),
                    guard,
                ) {
                    Ok(b) => {
                        block["inequalities"] = json!(b
                            .inequalities()
                            .into_iter()
                            .map(|(s, ok)| json!({"inequality": s, "holds": ok}))
                            .collect::<Vec<_>>());
                        block["bounds"] = json!(b);
                        block["envelope"] = json!(env);
                    }
                    Err(e) => {
                        block["error"] = json!(e.to_string());
                        code = code_for(&e);
                        eprintln!("error: {e}");
                    }
                }
            }
            Err(e) => {
                block["error"] = json!(e.to_string());
                code = code_for(&e);
                eprintln!("error: {e}");
            }
        }
    }
    write_json(&ctx.out.join("diagnose.json"), &block)?;
    print!("{}", profile.to_csv());
    Ok(code)
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    epsilon: f64,
    zeta: f64,
    u_norm: f64,
    ratio_estimate: f64,
    range_residual: f64,
    bifurcation_residual: f64,
    converged: bool,
    error: Option<String>,
}

pub const SWEEP_HEADER: &str = "epsilon,zeta,u_norm,ratio_estimate,range_residual,bifurcation_residual,converged\n";

pub fn sweep(ctx: &Context, threads: usize) -> Result<i32, CliError> {
    let problem = ctx.config.problem.build()?;
    require_nonresonant(&problem)?;
    let mut cfg = bifurcation_config(ctx, None);
    cfg.continuity_probe = false;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::usage(format!("cannot start thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        ctx.config
            .sweep
            .epsilons
            .par_iter()
            .map(|&eps| {
                let run = BifurcationProblem::new(&problem.system, &problem.spec.omega, eps, cfg.clone())
                    .and_then(|p| p.solve_response());
                match run {
                    Ok(s) => SweepRow {
                        epsilon: eps,
                        zeta: s.zeta,
                        u_norm: response_norm(&s.u),
                        ratio_estimate: s.ladder_meta.ratio_estimate,
                        range_residual: s.residuals.range,
                        bifurcation_residual: s.residuals.bifurcation,
                        converged: s.ladder_meta.ratio_estimate < 1.0,
                        error: None,
                    },
                    Err(e) => SweepRow {
                        epsilon: eps,
                        zeta: f64::NAN,
                        u_norm: f64::NAN,
                        ratio_estimate: f64::NAN,
                        range_residual: f64::NAN,
                        bifurcation_residual: f64::NAN,
                        converged: false,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    let mut csv = String::from(SWEEP_HEADER);
    for r in &rows {
        csv.push_str(&format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{}\n",
            r.epsilon, r.zeta, r.u_norm, r.ratio_estimate, r.range_residual, r.bifurcation_residual, r.converged
        ));
    }
    fs::write(ctx.out.join("sweep.csv"), &csv)?;
    let errors: Vec<_> = rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| json!({"epsilon": r.epsilon, "error": e})))
        .collect();
    write_json(&ctx.out.join("sweep_errors.json"), &errors)?;
    print!("{csv}");
    Ok(SUCCESS)
}

#[derive(Debug, Clone, Serialize)]
struct Check {
    name: String,
    passed: bool,
    skipped: bool,
    value: f64,
    tolerance: f64,
    detail: String,
}

impl Check {
    fn new(name: &str, value: f64, tolerance: f64, detail: String) -> Self {
        Check {
            name: name.into(),
            passed: value <= tolerance,
            skipped: false,
            value,
            tolerance,
            detail,
        }
    }

    fn skipped(name: &str, detail: String) -> Self {
        Check {
            name: name.into(),
            passed: true,
            skipped: true,
            value: 0.0,
            tolerance: 0.0,
            detail,
        }
    }

    fn failed(name: &str, detail: String) -> Self {
        Check {
            name: name.into(),
            passed: false,
            skipped: false,
            value: f64::INFINITY,
            tolerance: 0.0,
            detail,
        }
    }
}

pub fn verify(ctx: &Context) -> Result<i32, CliError> {
    let opts = &ctx.config.verify;
    let problem = ctx.config.problem.build()?;
    let spec = &problem.spec;
    let sys = &problem.system;
    let omega = &spec.omega;
    let eps = spec.epsilon;
    let cutoff = spec.truncation.cutoff;
    let (mut sol, _) = solve_problem(ctx, &problem)?;

    if let Some(mode) = &opts.corrupt_mode {
        let nu = MultiIndex::new(mode.clone());
        let delta = Complex64::new(opts.corrupt_by, 0.0);
        let mut u = sol.u.clone();
        if nu.is_zero() {
            u.add_to(nu, delta)?;
        } else {
            u.add_to(nu.neg(), delta)?;
            u.add_to(nu, delta)?;
        }
        sol.u = u;
        eprintln!("fault injection: {} added at {:?}", opts.corrupt_by, mode);
    }

    let mut checks = Vec::new();
    let solver = if eps != 0.0 {
        Some(RangeSolver::new(sys, omega, eps, cutoff)?)
    } else {
        None
    };

    match &solver {
        Some(solver) => {
            let r = solver.range_residual(&sol.u, cutoff)?;
            checks.push(Check::new("range_residual", r, opts.range_tolerance, String::new()));
        }
        None => checks.push(Check::skipped("range_residual", "eps = 0".into())),
    }
    let h_tol = 1e-12 * sys.a.abs().max(1.0);
    checks.push(Check::new(
        "bifurcation_residual",
        sol.residuals.bifurcation,
        h_tol,
        String::new(),
    ));

    if let Some(solver) = &solver {
        let k_max = opts.tree_order.min(spec.truncation.orders);
        let ladder = solver.build_ladder(sol.zeta, k_max)?;
        let tctx = TreeContext::from_system(sys, omega, eps, sol.zeta, cutoff)?;
        let mut en = TreeEnumerator::new(tctx.clone());
        let (mut worst, mut counted, mut bad) = (0.0f64, 0usize, Vec::new());
        for k in 1..=k_max {
            let level = en.level(k)?;
            let series = ladder.order(k);
            let scale = series.max_abs().max(f64::MIN_POSITIVE);
            let mut modes: Vec<MultiIndex> = level.keys().cloned().collect();
            modes.extend(series.modes().cloned());
            for nu in modes {
                let sum: Complex64 = level
                    .get(&nu)
                    .map(|ts| ts.iter().map(|t| tree_value(t, &tctx)).sum())
                    .unwrap_or_default();
                worst = worst.max((sum - series.get(&nu)).norm() / scale);
            }
            for tree in level.values().flatten() {
                counted += 1;
                let rep = verify_counting(tree, sys.theorem());
                if !rep.all_pass() && bad.len() < 5 {
                    bad.push(tree.canonical_json());
                }
            }
        }
        checks.push(Check::new(
            "tree_oracle",
            worst,
            opts.tree_tolerance,
            format!("orders 1..={k_max}, relative to each order's largest coefficient"),
        ));
        let failures = bad.len() as f64;
        checks.push(Check::new(
            "counting_relations",
            failures,
            0.0,
            format!("{counted} trees; failing examples {bad:?}"),
        ));
    } else {
        checks.push(Check::skipped("tree_oracle", "eps = 0".into()));
        checks.push(Check::skipped("counting_relations", "eps = 0".into()));
    }

    if eps != 0.0 {
        match direct_solve(sys, omega, eps, cutoff, None, &DirectConfig::default()) {
            Ok(d) => checks.push(Check::new(
                "direct_solve",
                sol.u.max_abs_diff(&d.u_direct),
                opts.direct_tolerance,
                format!("{} Picard iterations", d.iterations),
            )),
            Err(e) => checks.push(Check::failed("direct_solve", e.to_string())),
        }
    } else {
        checks.push(Check::skipped("direct_solve", "eps = 0".into()));
    }

    let ode = &opts.ode;
    let mut notices = Vec::new();
    if !ode.enabled {
        checks.push(Check::skipped("ode_comparison", "disabled in config".into()));
    } else if sys.a <= 0.0 {
        let msg = format!("a = {} <= 0: response not attracting, ODE attraction check skipped", sys.a);
        eprintln!("notice: {msg}");
        notices.push(msg.clone());
        checks.push(Check::skipped("ode_comparison", msg));
    } else if eps < MIN_INTEGRATION_EPS {
        let msg = format!("eps = {eps} is below the integration guard {MIN_INTEGRATION_EPS}");
        eprintln!("notice: {msg}");
        notices.push(msg.clone());
        checks.push(Check::skipped("ode_comparison", msg));
    } else {
        let ics: Vec<(f64, f64)> = ode.offsets.iter().map(|&(dx, dv)| (sys.c0 + dx, dv)).collect();
        let cmp_opts = CompareOptions {
            transient: ode.transient.unwrap_or_else(|| default_transient(sys.a, eps)),
            window: ode.window,
            dt_out: ode.dt_out,
            tol: ode.tol,
        };
        match compare(&sol, sys, &ics, cmp_opts) {
            Ok(cmp) => {
                checks.push(Check::new(
                    "ode_comparison",
                    cmp.sup_error,
                    ode.sup_tolerance,
                    format!("sup errors {:?}", cmp.sup_errors),
                ));
                checks.push(Check::new(
                    "ode_attraction",
                    cmp.pairwise_final,
                    ode.pairwise_tolerance,
                    "largest pairwise distance at the end of the window".into(),
                ));
                if let Some(t) = cmp.trajectories.first() {
                    fs::write(ctx.out.join("trajectory.csv"), trajectory_csv(t, &sol))?;
                }
            }
            Err(e) => checks.push(Check::failed("ode_comparison", e.to_string())),
        }
    }

    let all_pass = checks.iter().all(|c| c.passed);
    write_json(
        &ctx.out.join("verify.json"),
        &json!({"passed": all_pass, "checks": checks, "notices": notices}),
    )?;
    for c in &checks {
        let status = match (c.skipped, c.passed) {
            (true, _) => "SKIP",
            (false, true) => "PASS",
            (false, false) => "FAIL",
        };
        println!("{status} {} value={:e} tolerance={:e} {}", c.name, c.value, c.tolerance, c.detail);
    }
    if all_pass {
        Ok(SUCCESS)
    } else {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        eprintln!("verification failed: {}", failed.join(", "));
        Ok(CHECK_FAILED)
    }
}
