//! Subcommand implementations: each maps onto the library pipelines and
//! emits a JSON report plus optional CSV artifacts.

use crate::config::RunConfig;
use crate::report::{fmt_f64, json_f64, report, report_with_tolerances, Csv};
use crate::scaling::Scaling;
use crate::CliError;
use serde_json::{json, Value};
use vorwave::dispersion::{find_roots, DispersionProfile};
use vorwave::numerics::root::bisect;
use vorwave::oracle;
use vorwave::stream::{
    build_stream_solution, classify_counter_currents, critical_values, depth_sequences, s_grid,
    solve_bernoulli_for_s_on, Branch, FlowSign, StreamSolution,
};
use vorwave::vorticity::VorticitySpec;
use vorwave::wave::{
    first_order_field, fit_inverse_s_with_curvature, solve_kernel, trace_tau_curve,
};

#[derive(Debug)]
pub struct CommandOutput {
    pub report: Value,
    pub csvs: Vec<Csv>,
    pub exit_code: i32,
}

fn spec_of(cfg: &RunConfig) -> Result<VorticitySpec, CliError> {
    VorticitySpec::new(cfg.vorticity.clone()).map_err(CliError::Core)
}

fn need_branch(cfg: &RunConfig) -> Result<Branch, CliError> {
    cfg.branch
        .ok_or_else(|| CliError::Config("`branch`: section required for this command".into()))
}

/// Resolves the shear parameter from `params.s`, or from a target depth
/// `params.h` by inverting the branch depth function.
fn resolve_s(cfg: &RunConfig, spec: &VorticitySpec, branch: Branch) -> Result<f64, CliError> {
    match (cfg.params.s, cfg.params.h) {
        (Some(s), None) => Ok(s),
        (None, Some(h)) => {
            let grid = s_grid(spec.s0(), cfg.scan.s_offset_min, cfg.scan.s_span, cfg.scan.s_seeds);
            let depth = |s: f64| -> f64 {
                depth_sequences(spec, s, branch.j)
                    .ok()
                    .and_then(|c| c.depth(branch))
                    .unwrap_or(f64::NAN)
            };
            let mut prev: Option<(f64, f64)> = None;
            for &s in &grid {
                let d = depth(s) - h;
                if let Some((ps, pd)) = prev {
                    if pd.is_finite() && d.is_finite() && pd.signum() != d.signum() {
                        let root = bisect(|s| depth(s) - h, ps, s, 1e-13 * s.max(1.0))
                            .map_err(CliError::Core)?;
                        return Ok(root);
                    }
                }
                prev = Some((s, d));
            }
            Err(CliError::Config(format!(
                "`params.h`: no s with depth {h} on branch {branch} within the scan range"
            )))
        }
        (Some(_), Some(_)) => {
            Err(CliError::Config("`params`: give either `s` or `h`, not both".into()))
        }
        (None, None) => Err(CliError::Config("`params`: one of `s` or `h` is required".into())),
    }
}

fn stream_flags(spec: &VorticitySpec, stream: &StreamSolution) -> Value {
    let catalog = depth_sequences(spec, stream.s, stream.branch.j).ok();
    json!({
        "extrapolated_vorticity": spec.extrapolation_seen(),
        "tau_plus_by_cap": catalog.as_ref().map(|c| c.plus_by_cap),
        "tau_minus_by_cap": catalog.as_ref().map(|c| c.minus_by_cap),
        "degenerate_depth_coincidence": catalog.as_ref().map(|c| c.degenerate_coincidence),
    })
}

fn profile_flags(spec: &VorticitySpec, stream: &StreamSolution, profile: &DispersionProfile, requested_cap: f64) -> Value {
    let mut base = stream_flags(spec, stream);
    let obj = base.as_object_mut().unwrap();
    obj.insert("tau_cap_extended".into(), json!(profile.tau_cap > requested_cap * (1.0 + 1e-12)));
    obj.insert("degenerate_sigma_zero".into(), json!(profile.sigma_zero.is_none()));
    obj.insert(
        "prediction_checked".into(),
        json!(profile.predicted_roots.is_some()),
    );
    obj.insert(
        "harmonic_violations".into(),
        json!(profile.harmonic_violations.len()),
    );
    base
}

pub fn scan_streams(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let spec = spec_of(cfg)?;
    let r = cfg
        .params
        .r
        .ok_or_else(|| CliError::Config("`params.r`: required by scan-streams".into()))?;
    let grid = s_grid(spec.s0(), cfg.scan.s_offset_min, cfg.scan.s_span, cfg.scan.s_seeds);
    let mut csv = Csv::new("streams.csv", vec!["s", "branch", "h", "kappa", "r", "layers"]);
    let mut rows = Vec::new();
    let mut coincidences = 0usize;
    for sign in [FlowSign::Plus, FlowSign::Minus] {
        for j in 0..=cfg.scan.j_max {
            let branch = Branch::new(j, sign);
            let roots = solve_bernoulli_for_s_on(&spec, branch, r, &grid).map_err(CliError::Core)?;
            for s in roots {
                // Skip the odd twin of a degenerate tau_+ = 1 coincidence.
                let catalog = depth_sequences(&spec, s, j).map_err(CliError::Core)?;
                if catalog.degenerate_coincidence && j % 2 == 1 {
                    coincidences += 1;
                    continue;
                }
                let stream = build_stream_solution(&spec, s, branch).map_err(CliError::Core)?;
                let layers = classify_counter_currents(&stream).map_err(CliError::Core)?.layers;
                csv.push(vec![
                    fmt_f64(stream.s),
                    branch.to_string(),
                    fmt_f64(stream.h),
                    fmt_f64(stream.kappa),
                    fmt_f64(stream.r),
                    layers.to_string(),
                ]);
                rows.push(json!({
                    "s": stream.s,
                    "branch": branch.to_string(),
                    "h": stream.h,
                    "kappa": stream.kappa,
                    "r": stream.r,
                    "layers": layers,
                }));
            }
        }
    }
    let flags = json!({
        "extrapolated_vorticity": spec.extrapolation_seen(),
        "deduplicated_coincident_branches": coincidences,
    });
    let results = json!({ "r": r, "streams": rows });
    Ok(CommandOutput {
        report: report_with_tolerances("scan-streams", &cfg.echo, flags, results, Some((cfg.tolerances.ode, cfg.tolerances.quad, cfg.tolerances.root))),
        csvs: vec![csv],
        exit_code: 0,
    })
}

pub fn critical(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let spec = spec_of(cfg)?;
    let cv = critical_values(&spec).map_err(CliError::Core)?;
    let mut results = json!({
        "s0": spec.s0(),
        "s_c": cv.s_c,
        "r_c": cv.r_c,
        "r0": json_f64(cv.r0),
        "r0_finite": cv.r0.is_finite(),
    });
    if let Some(dim) = &cfg.dimensional {
        let sc = Scaling::new(dim.q, dim.g)?;
        let obj = results.as_object_mut().unwrap();
        obj.insert("R_c_dimensional".into(), json!(sc.head_to_dimensional(cv.r_c)));
        obj.insert("critical_head_unit".into(), json!(sc.critical_head()));
        if let Some(r_head) = dim.r_head {
            obj.insert("r_from_R".into(), json!(sc.head_to_nondimensional(r_head)));
        }
    }
    let flags = json!({ "extrapolated_vorticity": spec.extrapolation_seen() });
    Ok(CommandOutput {
        report: report_with_tolerances("critical", &cfg.echo, flags, results, Some((cfg.tolerances.ode, cfg.tolerances.quad, cfg.tolerances.root))),
        csvs: vec![],
        exit_code: 0,
    })
}

fn build_profile(
    cfg: &RunConfig,
) -> Result<(VorticitySpec, StreamSolution, DispersionProfile, f64), CliError> {
    let spec = spec_of(cfg)?;
    let branch = need_branch(cfg)?;
    let s = resolve_s(cfg, &spec, branch)?;
    let stream = build_stream_solution(&spec, s, branch).map_err(CliError::Core)?;
    let cap = cfg.scan.tau_cap_factor / stream.h;
    let profile = find_roots(&stream, cap).map_err(CliError::Core)?;
    Ok((spec, stream, profile, cap))
}

pub fn dispersion(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let (spec, stream, profile, cap) = build_profile(cfg)?;
    let mut csv = Csv::new("dispersion.csv", vec!["tau", "sigma", "interval"]);
    for s in &profile.sigma_samples {
        csv.push(vec![fmt_f64(s.tau), fmt_f64(s.sigma), s.interval.to_string()]);
    }
    let results = json!({
        "s": stream.s,
        "branch": stream.branch.to_string(),
        "h": stream.h,
        "kappa": stream.kappa,
        "r": stream.r,
        "sigma_zero": profile.sigma_zero.map(json_f64),
        "cond_rh": profile.cond_rh,
        "poles": profile.poles.iter().map(|p| json!({
            "tau_star": p.tau_star,
            "gamma_star_prime_h": p.gamma_star_prime_h,
            "residue": p.residue,
        })).collect::<Vec<_>>(),
        "root_count": profile.roots.len(),
        "tau_cap": profile.tau_cap,
    });
    let flags = profile_flags(&spec, &stream, &profile, cap);
    Ok(CommandOutput {
        report: report_with_tolerances("dispersion", &cfg.echo, flags, results, Some((cfg.tolerances.ode, cfg.tolerances.quad, cfg.tolerances.root))),
        csvs: vec![csv],
        exit_code: 0,
    })
}

pub fn roots(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let (spec, stream, profile, cap) = build_profile(cfg)?;
    let layers = classify_counter_currents(&stream).map_err(CliError::Core)?.layers;
    let cond = match profile.cond_rh {
        Some(true) => "true",
        Some(false) => "false",
        None => "undefined",
    };
    let mut csv = Csv::new(
        "roots.csv",
        vec!["tau0", "lambda0", "residual", "interval", "condRh", "branch", "s", "r", "layers"],
    );
    let mut rows = Vec::new();
    for root in &profile.roots {
        let lambda0 = 2.0 * std::f64::consts::PI / root.tau0;
        csv.push(vec![
            fmt_f64(root.tau0),
            fmt_f64(lambda0),
            fmt_f64(root.residual),
            root.interval.to_string(),
            cond.to_string(),
            stream.branch.to_string(),
            fmt_f64(stream.s),
            fmt_f64(stream.r),
            layers.to_string(),
        ]);
        let mut row = json!({
            "tau0": root.tau0,
            "lambda0": lambda0,
            "residual": root.residual,
            "interval": root.interval,
            "cond_rh": profile.cond_rh,
            "branch": stream.branch.to_string(),
            "s": stream.s,
            "r": stream.r,
            "layers": layers,
        });
        if let Some(dim) = &cfg.dimensional {
            let sc = Scaling::new(dim.q, dim.g)?;
            row.as_object_mut()
                .unwrap()
                .insert("lambda0_dimensional".into(), json!(sc.length_to_dimensional(lambda0)));
        }
        rows.push(row);
    }
    let results = json!({
        "s": stream.s,
        "h": stream.h,
        "branch": stream.branch.to_string(),
        "predicted_roots": profile.predicted_roots,
        "roots": rows,
    });
    let flags = profile_flags(&spec, &stream, &profile, cap);
    Ok(CommandOutput {
        report: report_with_tolerances("roots", &cfg.echo, flags, results, Some((cfg.tolerances.ode, cfg.tolerances.quad, cfg.tolerances.root))),
        csvs: vec![csv],
        exit_code: 0,
    })
}

pub fn kernel(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let (spec, stream, profile, cap) = build_profile(cfg)?;
    let tau0 = match cfg.params.tau {
        Some(t) => t,
        None => {
            profile
                .roots
                .first()
                .ok_or_else(|| {
                    CliError::Core(vorwave::Error::Search(
                        "no dispersion root to solve the kernel at; give params.tau".into(),
                    ))
                })?
                .tau0
        }
    };
    let kernel = solve_kernel(&stream, tau0).map_err(CliError::Core)?;
    let mut csv = Csv::new("kernel.csv", vec!["z", "w", "w_z"]);
    for &(z, w, wz) in &kernel.samples {
        csv.push(vec![fmt_f64(z), fmt_f64(w), fmt_f64(wz)]);
    }
    let results = json!({
        "tau0": tau0,
        "lambda0": 2.0 * std::f64::consts::PI / tau0,
        "boundary_residual": kernel.boundary_residual,
        "w_z_h": kernel.w_z_h,
        "target_w_z_h": stream.kappa / stream.h - 1.0 / stream.kappa,
    });
    let flags = profile_flags(&spec, &stream, &profile, cap);
    Ok(CommandOutput {
        report: report_with_tolerances("kernel", &cfg.echo, flags, results, Some((cfg.tolerances.ode, cfg.tolerances.quad, cfg.tolerances.root))),
        csvs: vec![csv],
        exit_code: 0,
    })
}

pub fn field(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let (spec, stream, profile, cap) = build_profile(cfg)?;
    let root = profile.roots.first().ok_or_else(|| {
        CliError::Core(vorwave::Error::Search("no dispersion root to build a wave field".into()))
    })?;
    let amplitude = cfg.params.amplitude.unwrap_or(1e-3);
    let (nx, ny) = (cfg.params.nx.unwrap_or(65), cfg.params.ny.unwrap_or(33));
    let kernel = solve_kernel(&stream, root.tau0).map_err(CliError::Core)?;
    let field = first_order_field(&stream, &kernel, amplitude, nx, ny).map_err(CliError::Core)?;
    let mut csv = Csv::new("field.csv", vec!["x", "y", "psi"]);
    for (i, &x) in field.xs.iter().enumerate() {
        for (y, psi) in field.ys[i].iter().zip(&field.psi[i]) {
            csv.push(vec![fmt_f64(x), fmt_f64(*y), fmt_f64(*psi)]);
        }
    }
    let mut profile_csv = Csv::new("profile.csv", vec!["x", "xi"]);
    for (x, xi) in field.xs.iter().zip(&field.surface) {
        profile_csv.push(vec![fmt_f64(*x), fmt_f64(*xi)]);
    }
    let results = json!({
        "tau0": root.tau0,
        "lambda0": 2.0 * std::f64::consts::PI / root.tau0,
        "amplitude": amplitude,
        "max_bernoulli_defect": field.max_bernoulli_defect,
        "has_interior_critical_layer": field.has_interior_critical_layer,
        "kernel_boundary_residual": kernel.boundary_residual,
    });
    let flags = profile_flags(&spec, &stream, &profile, cap);
    Ok(CommandOutput {
        report: report_with_tolerances("field", &cfg.echo, flags, results, Some((cfg.tolerances.ode, cfg.tolerances.quad, cfg.tolerances.root))),
        csvs: vec![csv, profile_csv],
        exit_code: 0,
    })
}

pub fn branch_tau(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let spec = spec_of(cfg)?;
    let branch = need_branch(cfg)?;
    let s0 = spec.s0();
    let s_min = cfg.params.s_min.unwrap_or(s0 + 0.05 * s0.max(1.0));
    let s_max = cfg.params.s_max.unwrap_or(s0 + 5.0);
    if s_min <= s0 {
        return Err(CliError::Config(format!(
            "`params.s_min`: must exceed s0 = {s0}, got {s_min}"
        )));
    }
    let n = cfg.params.n_points.unwrap_or(60).max(2);
    let grid: Vec<f64> =
        (0..n).map(|i| s_min + (s_max - s_min) * i as f64 / (n - 1) as f64).collect();
    let curve = trace_tau_curve(&spec, branch, &grid).map_err(CliError::Core)?;
    let mut csv = Csv::new("curve.csv", vec!["s", "tau", "tau_dot_sign"]);
    for p in &curve.points {
        csv.push(vec![fmt_f64(p.s), fmt_f64(p.tau), p.tau_dot_sign.to_string()]);
    }
    // Fit the large-s tail against level + coeff / s.
    let tail: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.s >= s_min + 0.5 * (s_max - s_min))
        .map(|p| (p.s, p.tau))
        .collect();
    let fit = if tail.len() >= 4 {
        let (level, coeff, _) = fit_inverse_s_with_curvature(&tail);
        Some((level, coeff))
    } else {
        None
    };
    let results = json!({
        "branch": branch.to_string(),
        "points": curve.points.len(),
        "stationary": curve.stationary.iter().map(|st| json!({
            "s": st.s,
            "tau": st.tau,
            "sigma_star_dot": st.sigma_star_dot,
        })).collect::<Vec<_>>(),
        "asymptote_fit": fit.map(|(level, coeff)| json!({"level": level, "coeff": coeff})),
    });
    let flags = json!({ "extrapolated_vorticity": spec.extrapolation_seen() });
    Ok(CommandOutput {
        report: report_with_tolerances("branch-tau", &cfg.echo, flags, results, Some((cfg.tolerances.ode, cfg.tolerances.quad, cfg.tolerances.root))),
        csvs: vec![csv],
        exit_code: 0,
    })
}

/// Differential self-check of the pipeline against the closed-form oracles.
pub fn oracle_check(
    family: &str,
    b: Option<f64>,
    echo: &std::collections::BTreeMap<String, std::collections::BTreeMap<String, String>>,
) -> Result<CommandOutput, CliError> {
    let mut checks: Vec<(String, f64, f64)> = Vec::new(); // (name, deviation, tolerance)
    match family {
        "irrotational" => {
            let spec = VorticitySpec::zero();
            for &h in &[1.1f64, 1.2, 1.5, 3.0] {
                let stream = build_stream_solution(&spec, 1.0 / h, Branch::new(0, FlowSign::Plus))
                    .map_err(CliError::Core)?;
                let profile = find_roots(&stream, 50.0 / h).map_err(CliError::Core)?;
                let oracle_root = oracle::irrotational_oracle(h).expect("subcritical root");
                let dev = if profile.roots.len() == 1 {
                    (profile.roots[0].tau0 - oracle_root).abs()
                } else {
                    f64::INFINITY
                };
                checks.push((format!("root@h={h}"), dev, 1e-7));
            }
            for &h in &[0.5f64, 0.9] {
                let stream = build_stream_solution(&spec, 1.0 / h, Branch::new(0, FlowSign::Plus))
                    .map_err(CliError::Core)?;
                let profile = find_roots(&stream, 50.0 / h).map_err(CliError::Core)?;
                let dev = profile.roots.len() as f64;
                checks.push((format!("rootless@h={h}"), dev, 0.5));
            }
        }
        "constant" => {
            let b = b.ok_or_else(|| CliError::Config("`--b`: required for family constant".into()))?;
            let spec = VorticitySpec::constant(b).map_err(CliError::Core)?;
            let s0 = (2.0 * b).sqrt();
            for &ds in &[0.2f64, 1.0] {
                let s = s0 + ds;
                let o = oracle::constant_vorticity_oracle(b, s).map_err(CliError::Core)?;
                let cat = depth_sequences(&spec, s, 1).map_err(CliError::Core)?;
                checks.push((format!("h0@s={s}"), (cat.depths_plus[0] - o.h0).abs(), 1e-8));
                checks.push((format!("h1@s={s}"), (cat.depths_plus[1] - o.h1).abs(), 1e-8));
                let stream = build_stream_solution(&spec, s, Branch::new(1, FlowSign::Plus))
                    .map_err(CliError::Core)?;
                let profile = find_roots(&stream, 50.0 / stream.h).map_err(CliError::Core)?;
                let oracle_root =
                    oracle::constant_dispersion_root(b, s, o.h1).map_err(CliError::Core)?;
                let dev = if profile.roots.len() == 1 {
                    (profile.roots[0].tau0 - oracle_root).abs()
                } else {
                    f64::INFINITY
                };
                checks.push((format!("root@s={s}"), dev, 1e-7));
                // Sigma samples against the closed form.
                let mut worst = 0.0f64;
                for i in 1..=100 {
                    let tau = 6.0 * i as f64 / 100.0 / stream.h;
                    let sigma =
                        vorwave::dispersion::sigma_eval(&stream, tau).map_err(CliError::Core)?;
                    let closed = oracle::constant_sigma_closed(b, s, stream.h, tau);
                    worst = worst.max((sigma - closed).abs() / closed.abs().max(1.0));
                }
                checks.push((format!("sigma@s={s}"), worst, 1e-6));
            }
            let cv = critical_values(&spec).map_err(CliError::Core)?;
            let o = oracle::constant_vorticity_oracle(b, s0 + 1.0).map_err(CliError::Core)?;
            checks.push(("s_c".into(), (cv.s_c - o.s_c).abs(), 5e-6));
            checks.push(("r0".into(), (cv.r0 - o.r0_limit).abs(), 1e-6));
        }
        "linear" => {
            let b = b.ok_or_else(|| CliError::Config("`--b`: required for family linear".into()))?;
            let spec = VorticitySpec::linear(b).map_err(CliError::Core)?;
            let s = b.sqrt() + 0.9;
            for (j, sign, plus) in
                [(0u32, FlowSign::Plus, true), (1, FlowSign::Plus, true), (0, FlowSign::Minus, false)]
            {
                let o = oracle::linear_vorticity_oracle(b, s, j, plus).map_err(CliError::Core)?;
                let branch = Branch::new(j, sign);
                let cat = depth_sequences(&spec, s, j).map_err(CliError::Core)?;
                let h = cat.depth(branch).unwrap_or(f64::NAN);
                checks.push((format!("h@{branch}"), (h - o.h).abs(), 1e-8));
                let stream =
                    build_stream_solution(&spec, s, branch).map_err(CliError::Core)?;
                let eigen =
                    vorwave::dispersion::dirichlet_eigenvalues(&stream).map_err(CliError::Core)?;
                let dev = if eigen.len() == o.eigenvalues.len() {
                    eigen
                        .iter()
                        .zip(&o.eigenvalues)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                } else {
                    f64::INFINITY
                };
                checks.push((format!("eigenvalues@{branch}"), dev, 1e-8));
                let profile = find_roots(&stream, 50.0 / stream.h).map_err(CliError::Core)?;
                let mut worst = 0.0f64;
                for root in &profile.roots {
                    let d = 1e-6;
                    let slope = (o.dispersion_lhs(root.tau0 + d) - o.dispersion_lhs(root.tau0 - d))
                        / (2.0 * d);
                    worst = worst.max((o.dispersion_lhs(root.tau0) / slope).abs());
                }
                checks.push((format!("roots@{branch}"), worst, 1e-7));
            }
            let cv = critical_values(&spec).map_err(CliError::Core)?;
            checks.push((
                "s_c".into(),
                (cv.s_c - oracle::linear_s_c(b).map_err(CliError::Core)?).abs(),
                5e-6,
            ));
            checks.push(("r0".into(), (cv.r0 - oracle::linear_r0(b)).abs(), 1e-6));
        }
        other => {
            return Err(CliError::Config(format!(
                "`--family`: expected irrotational|constant|linear, got `{other}`"
            )));
        }
    }

    let pass = checks.iter().all(|(_, dev, tol)| dev <= tol);
    let results = json!({
        "family": family,
        "b": b,
        "pass": pass,
        "checks": checks.iter().map(|(name, dev, tol)| json!({
            "name": name,
            "deviation": json_f64(*dev),
            "tolerance": tol,
            "pass": dev <= tol,
        })).collect::<Vec<_>>(),
        "max_deviation": json_f64(
            checks.iter().map(|c| c.1).fold(0.0, f64::max)
        ),
    });
    Ok(CommandOutput {
        report: report("oracle-check", echo, json!({}), results),
        csvs: vec![],
        exit_code: if pass { 0 } else { 4 },
    })
}
