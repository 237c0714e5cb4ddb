//! Acceptance suite: one test per criterion, each printing a pass line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Every tolerance is pinned in code; a criterion passes only at its stated
//! accuracy.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use vorwave::dispersion::{
    asymptotic_slope_check, dirichlet_eigenvalues, find_roots, pole_residue_check,
    sigma0_quadrature, sigma_eval, sigma_zero_analytic, sigma_zero_limit,
};
use vorwave::oracle;
use vorwave::stream::{
    bernoulli_r, build_stream_solution, critical_values, depth_sequences, Branch, FlowSign,
    StreamSolution,
};
use vorwave::vorticity::{VorticityDescriptor, VorticitySpec};
use vorwave::wave::{
    fit_inverse_s_with_curvature, fit_power_law, solve_kernel, solve_sigma_star_root,
    trace_tau_curve,
};
use vorwave_cli::scaling::Scaling;

fn cap(h: f64) -> f64 {
    50.0 / h
}

fn irrotational_stream(h: f64) -> StreamSolution {
    build_stream_solution(&VorticitySpec::zero(), 1.0 / h, Branch::new(0, FlowSign::Plus)).unwrap()
}

/// Streams whose roots feed criteria 6 and 7.
fn criteria_streams() -> Vec<StreamSolution> {
    let mut streams = Vec::new();
    for &h in &[1.1f64, 1.2, 1.5, 3.0] {
        streams.push(irrotational_stream(h));
    }
    for &b in &[0.5f64, 2.0] {
        let spec = VorticitySpec::constant(b).unwrap();
        let cv = critical_values(&spec).unwrap();
        let s0 = spec.s0();
        streams.push(
            build_stream_solution(&spec, s0 + 0.5 * (cv.s_c - s0), Branch::new(0, FlowSign::Plus))
                .unwrap(),
        );
        streams.push(build_stream_solution(&spec, s0 + 0.7, Branch::new(1, FlowSign::Plus)).unwrap());
    }
    for &b in &[0.5f64, 1.0, 2.0] {
        let spec = VorticitySpec::linear(b).unwrap();
        let cv = critical_values(&spec).unwrap();
        let s0 = spec.s0();
        let s_sub = s0 + 0.5 * (cv.s_c - s0);
        streams.push(build_stream_solution(&spec, s_sub, Branch::new(0, FlowSign::Plus)).unwrap());
        streams.push(build_stream_solution(&spec, s0 + 0.8, Branch::new(1, FlowSign::Plus)).unwrap());
        streams.push(build_stream_solution(&spec, s_sub, Branch::new(0, FlowSign::Minus)).unwrap());
        streams.push(build_stream_solution(&spec, s0 + 0.8, Branch::new(1, FlowSign::Minus)).unwrap());
        streams.push(build_stream_solution(&spec, cv.s_c + 0.4, Branch::new(0, FlowSign::Minus)).unwrap());
    }
    streams
}

#[test]
fn acceptance_01_irrotational_reduction() {
    for &h in &[1.1f64, 1.2, 1.5, 3.0] {
        let stream = irrotational_stream(h);
        let profile = find_roots(&stream, cap(h)).unwrap();
        assert_eq!(profile.roots.len(), 1, "h = {h}");
        let reference = oracle::irrotational_oracle(h).unwrap();
        let err = (profile.roots[0].tau0 - reference).abs();
        assert!(err <= 1e-7, "h = {h}: |dtau| = {err}");
    }
    for &h in &[0.5f64, 0.9] {
        let stream = irrotational_stream(h);
        let profile = find_roots(&stream, cap(h)).unwrap();
        assert!(profile.roots.is_empty(), "supercritical h = {h} must report zero roots");
    }
    println!("[PASS] criterion 1: irrotational dispersion matches tau coth(h tau) = h^2 to 1e-7");
}

#[test]
fn acceptance_02_constant_vorticity() {
    for &b in &[0.5f64, 2.0] {
        let spec = VorticitySpec::constant(b).unwrap();
        let s0 = spec.s0();
        let cv = critical_values(&spec).unwrap();

        // sigma against the closed form at 100 samples, both branches.
        for branch in [Branch::new(0, FlowSign::Plus), Branch::new(1, FlowSign::Plus)] {
            let s = s0 + 0.5;
            let stream = build_stream_solution(&spec, s, branch).unwrap();
            for i in 1..=100 {
                let tau = 6.0 * i as f64 / 100.0 / stream.h;
                let sigma = sigma_eval(&stream, tau).unwrap();
                let closed = oracle::constant_sigma_closed(b, s, stream.h, tau);
                let rel = (sigma - closed).abs() / closed.abs().max(1.0);
                assert!(rel <= 1e-6, "b={b} {branch} tau={tau}: rel {rel}");
            }
        }

        // Exactly one root on (0,+) below s_c.
        for &frac in &[0.25, 0.5, 0.8] {
            let s = s0 + frac * (cv.s_c - s0);
            let stream = build_stream_solution(&spec, s, Branch::new(0, FlowSign::Plus)).unwrap();
            let profile = find_roots(&stream, cap(stream.h)).unwrap();
            assert_eq!(profile.roots.len(), 1, "b={b}, subcritical s={s}");
        }
        // Exactly one root on (1,+) for every s > s0.
        for &ds in &[0.05, 0.5, 2.0, 10.0] {
            let stream =
                build_stream_solution(&spec, s0 + ds, Branch::new(1, FlowSign::Plus)).unwrap();
            let profile = find_roots(&stream, cap(stream.h)).unwrap();
            assert_eq!(profile.roots.len(), 1, "b={b}, (1,+) s=s0+{ds}");
        }
        // Zero roots on (0,+) past s_c.
        for &ds in &[0.1, 1.0, 5.0] {
            let stream =
                build_stream_solution(&spec, cv.s_c + ds, Branch::new(0, FlowSign::Plus)).unwrap();
            let profile = find_roots(&stream, cap(stream.h)).unwrap();
            assert!(profile.roots.is_empty(), "b={b}, supercritical s=s_c+{ds}");
        }
    }
    println!("[PASS] criterion 2: constant-vorticity sigma matches the closed form to 1e-6 and root counts follow the branch law");
}

#[test]
fn acceptance_03_linear_vorticity() {
    for &b in &[0.5f64, 1.0, 2.0] {
        let spec = VorticitySpec::linear(b).unwrap();
        let s0 = spec.s0();
        let cv = critical_values(&spec).unwrap();
        let s_sub = s0 + 0.5 * (cv.s_c - s0);
        let s_any = s0 + 0.8;

        // Eigenvalues tau_*^2 = b - (pi k / h)^2 to 1e-8 on the minus depths.
        for (s, j, plus) in [(s_sub, 0u32, false), (s_any, 1, false)] {
            let o = oracle::linear_vorticity_oracle(b, s, j, plus).unwrap();
            let branch = Branch::new(j, FlowSign::Minus);
            let stream = build_stream_solution(&spec, s, branch).unwrap();
            let eigen = dirichlet_eigenvalues(&stream).unwrap();
            assert_eq!(eigen.len(), o.eigenvalues.len(), "b={b} {branch}");
            for (got, want) in eigen.iter().zip(&o.eigenvalues) {
                let err = (got * got - want * want).abs();
                assert!(err <= 1e-8, "b={b} {branch}: eigenvalue error {err}");
            }
        }

        // Root counts per the pole/condition law.
        let count = |s: f64, branch: Branch| -> usize {
            let stream = build_stream_solution(&spec, s, branch).unwrap();
            find_roots(&stream, cap(stream.h)).unwrap().roots.len()
        };
        assert_eq!(count(s_sub, Branch::new(0, FlowSign::Plus)), 1, "b={b} h0+ subcritical");
        assert_eq!(count(s_any, Branch::new(1, FlowSign::Plus)), 1, "b={b} h1+");
        assert_eq!(count(s_sub, Branch::new(0, FlowSign::Minus)), 2, "b={b} h0- subcritical");
        assert_eq!(count(s_any, Branch::new(1, FlowSign::Minus)), 2, "b={b} h1-");
        assert_eq!(count(cv.s_c + 0.4, Branch::new(0, FlowSign::Minus)), 1, "b={b} h0- supercritical");
    }
    println!("[PASS] criterion 3: linear-vorticity eigenvalues match b - (pi k/h)^2 to 1e-8 and root counts follow the pole-count law");
}

#[test]
fn acceptance_04_sigma_zero_double_entry() {
    let mut rng = StdRng::seed_from_u64(2026);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 20 && attempts < 500 {
        attempts += 1;
        let spec = match rng.gen_range(0..4) {
            0 => VorticitySpec::zero(),
            1 => VorticitySpec::constant(rng.gen_range(0.3..2.5)).unwrap(),
            2 => VorticitySpec::linear(rng.gen_range(0.3..2.5)).unwrap(),
            _ => VorticitySpec::new(VorticityDescriptor::Polynomial {
                coeffs: vec![
                    rng.gen_range(-0.5..0.5),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-0.8..0.8),
                ],
            })
            .unwrap(),
        };
        let s = spec.s0() + rng.gen_range(0.1..2.0);
        let Ok(catalog) = depth_sequences(&spec, s, 2) else { continue };
        let mut branches = Vec::new();
        for j in 0..catalog.depths_plus.len().min(3) {
            branches.push(Branch::new(j as u32, FlowSign::Plus));
        }
        for j in 0..catalog.depths_minus.len().min(3) {
            branches.push(Branch::new(j as u32, FlowSign::Minus));
        }
        if branches.is_empty() {
            continue;
        }
        let branch = branches[rng.gen_range(0..branches.len())];
        let Ok(stream) = build_stream_solution(&spec, s, branch) else { continue };
        if stream.kappa.abs() < 1e-3 || stream.h > 9.0 {
            continue;
        }
        let Ok(analytic) = sigma_zero_analytic(&stream) else { continue };
        let Ok(limit) = sigma_zero_limit(&stream, 1e-3) else { continue };
        let err = (analytic - limit).abs() / analytic.abs().max(1.0);
        assert!(err <= 1e-6, "stream s={s} branch {branch}: sigma(0) mismatch {err}");
        checked += 1;
    }
    assert_eq!(checked, 20, "needed 20 admissible random streams, got {checked}");
    println!("[PASS] criterion 4: analytic sigma(0) matches the shooting limit to 1e-6 on 20 random streams");
}

#[test]
fn acceptance_05_large_tau_slope() {
    let streams = vec![
        irrotational_stream(1.2),
        build_stream_solution(
            &VorticitySpec::constant(2.0).unwrap(),
            3.0,
            Branch::new(1, FlowSign::Plus),
        )
        .unwrap(),
        build_stream_solution(
            &VorticitySpec::linear(1.0).unwrap(),
            2.0,
            Branch::new(0, FlowSign::Minus),
        )
        .unwrap(),
    ];
    for stream in &streams {
        let h = stream.h;
        let taus: Vec<f64> = (0..=32).map(|i| (20.0 + 60.0 * i as f64 / 32.0) / h).collect();
        let report = asymptotic_slope_check(stream, &taus).unwrap();
        assert!(
            report.stable(),
            "fitted C unstable under doubling: {:?} (h = {h})",
            report
        );
        // The bound itself with the fitted C.
        let c = report.c_low.max(report.c_high);
        for &tau in &taus {
            let sigma = sigma_eval(stream, tau).unwrap();
            assert!((sigma / tau - stream.kappa).abs() <= 1.0000001 * c / tau);
        }
    }
    println!("[PASS] criterion 5: |sigma/tau - kappa| <= C/tau with C stable under doubling on [20/h, 80/h]");
}

#[test]
fn acceptance_06_pole_residues() {
    let mut poles_checked = 0;
    for &b in &[0.5f64, 1.0, 2.0] {
        let spec = VorticitySpec::linear(b).unwrap();
        let cv = critical_values(&spec).unwrap();
        let s0 = spec.s0();
        for (s, branch) in [
            (s0 + 0.5 * (cv.s_c - s0), Branch::new(0, FlowSign::Minus)),
            (s0 + 0.8, Branch::new(1, FlowSign::Minus)),
        ] {
            let stream = build_stream_solution(&spec, s, branch).unwrap();
            for tau_star in dirichlet_eigenvalues(&stream).unwrap() {
                let report = pole_residue_check(&stream, tau_star).unwrap();
                assert!(
                    report.rel_err <= 1e-4,
                    "b={b} {branch}: residue error {}",
                    report.rel_err
                );
                poles_checked += 1;
            }
        }
    }
    assert!(poles_checked >= 6, "expected at least one pole per minus branch");
    println!("[PASS] criterion 6: extrapolated (tau - tau_*) sigma matches -kappa gamma_*'(h)^2/(2 tau_*) to 1e-4 on {poles_checked} poles");
}

#[test]
fn acceptance_07_kernel_consistency() {
    let mut roots_checked = 0;
    for stream in criteria_streams() {
        let profile = find_roots(&stream, cap(stream.h)).unwrap();
        for root in &profile.roots {
            let kernel = solve_kernel(&stream, root.tau0).unwrap();
            assert!(
                kernel.boundary_residual <= 1e-6,
                "residual {} at root {}",
                kernel.boundary_residual,
                root.tau0
            );
            roots_checked += 1;
        }
        // Ten non-root tau per stream: the boundary defect equals |sigma|
        // and W_z(h) = -sigma_0(tau).
        let upper = profile
            .poles
            .first()
            .map_or(3.0 / stream.h, |p| 0.9 * p.tau_star);
        let mut checked = 0;
        let mut k = 0;
        while checked < 10 && k < 40 {
            k += 1;
            let tau = upper * (0.08 + 0.9 * k as f64 / 40.0);
            let Ok(sigma) = sigma_eval(&stream, tau) else { continue };
            let Ok(kernel) = solve_kernel(&stream, tau) else { continue };
            assert!(
                (kernel.boundary_residual - sigma.abs()).abs() <= 1e-6,
                "defect {} vs |sigma| {}",
                kernel.boundary_residual,
                sigma.abs()
            );
            let sigma0 = sigma0_quadrature(&stream, tau).unwrap();
            assert!(
                (kernel.w_z_h + sigma0).abs() <= 1e-6,
                "W_z(h) {} vs -sigma_0 {}",
                kernel.w_z_h,
                -sigma0
            );
            checked += 1;
        }
        assert_eq!(checked, 10);
    }
    assert!(roots_checked >= 20);
    println!("[PASS] criterion 7: kernel boundary residual <= 1e-6 at {roots_checked} roots; W_z(h) = -sigma_0 at 10 non-root tau per stream");
}

#[test]
fn acceptance_08_tau_curve_laws() {
    let b = 1.0;
    let spec = VorticitySpec::linear(b).unwrap();
    let branch = Branch::new(0, FlowSign::Minus);

    // Blow-up tau(s) ~ (s^2 - b)^{-1} toward s0.
    let mut blowup = Vec::new();
    for i in 0..=8 {
        let zeta = 1e-4 * (1e-2f64 / 1e-4).powf(i as f64 / 8.0);
        let s = (b + zeta).sqrt();
        let tau = solve_sigma_star_root(&spec, branch, s, None).unwrap();
        blowup.push((zeta, tau));
    }
    let (exponent, _) = fit_power_law(&blowup);
    assert!(
        (exponent + 1.0).abs() <= 0.05,
        "blow-up exponent {exponent} not within -1 +/- 0.05"
    );

    // Large-s asymptote tau = sqrt(3b)/2 + a/s over s in [20, 100].
    let mut tail = Vec::new();
    let mut seed = None;
    for i in 0..=16 {
        let s = 20.0 + 80.0 * i as f64 / 16.0;
        let tau = solve_sigma_star_root(&spec, branch, s, seed).unwrap();
        seed = Some(tau);
        tail.push((s, tau));
    }
    let (level, coeff, _) = fit_inverse_s_with_curvature(&tail);
    let (level_ref, coeff_ref) = oracle::asymptote_oracle(b);
    assert!(
        (level - level_ref).abs() <= 0.01 * level_ref,
        "asymptote level {level} vs {level_ref}"
    );
    assert!(
        (coeff - coeff_ref).abs() <= 0.05 * coeff_ref.abs(),
        "asymptote coefficient {coeff} vs {coeff_ref}"
    );

    // Interior stationary point where transversality fails.
    let s_values: Vec<f64> = (0..=40).map(|i| 1.05 + 3.0 * i as f64 / 40.0).collect();
    let curve = trace_tau_curve(&spec, branch, &s_values).unwrap();
    assert!(!curve.stationary.is_empty(), "no stationary point located");
    let stat = &curve.stationary[0];
    assert!(
        stat.sigma_star_dot.abs() <= 1e-5,
        "sigma*_dot = {} at the stationary point",
        stat.sigma_star_dot
    );
    println!(
        "[PASS] criterion 8: blow-up exponent {exponent:.3}, asymptote ({level:.4}, {coeff:.4}), stationary point at s = {:.4} with |sigma*_dot| = {:.2e}",
        stat.s,
        stat.sigma_star_dot.abs()
    );
}

#[test]
fn acceptance_09_figure_topology() {
    // Figure 1: constant vorticity.
    for &b in &[0.5f64, 2.0] {
        let spec = VorticitySpec::constant(b).unwrap();
        let s0 = spec.s0();
        let r = |s: f64, j: u32| bernoulli_r(&spec, s, Branch::new(j, FlowSign::Plus)).unwrap();
        for i in 1..=20 {
            let s = s0 + 5.0 * i as f64 / 20.0;
            assert!(r(s, 0) < r(s, 1), "R_0 < R_1 at b={b}, s={s}");
            // R_1 strictly increasing.
            let d = 1e-5;
            assert!((r(s + d, 1) - r(s - d, 1)) / (2.0 * d) > 0.0);
        }
        // Shared value r0 at s0.
        let r0 = 2.0 / 3.0 * (2.0f64 / b).sqrt();
        assert!((r(s0, 0) - r0).abs() <= 1e-8);
        assert!((r(s0, 1) - r0).abs() <= 1e-8);
        // Common vertical tangent: slopes diverge with opposite signs.
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..4 {
            let off = 1e-2 * 4f64.powi(-k);
            let d = off / 10.0;
            let s = s0 + off;
            let m0 = (r(s + d, 0) - r(s - d, 0)) / (2.0 * d);
            let m1 = (r(s + d, 1) - r(s - d, 1)) / (2.0 * d);
            assert!(m0 < 0.0 && m1 > 0.0, "b={b}: tangent signs at offset {off}");
            if let Some((p0, p1)) = prev {
                assert!(m0 < p0 && m1 > p1, "b={b}: slopes must steepen toward s0");
            }
            prev = Some((m0, m1));
        }
    }

    // Figure 2: linear vorticity; the pattern repeats shifted along r.
    for &b in &[0.5f64, 2.0] {
        let spec = VorticitySpec::linear(b).unwrap();
        let s0 = spec.s0();
        let cv = critical_values(&spec).unwrap();
        let shift = 2.0 * std::f64::consts::PI / (3.0 * b.sqrt());
        let r = |s: f64, j: u32, sign: FlowSign| bernoulli_r(&spec, s, Branch::new(j, sign)).unwrap();
        for i in 1..=10 {
            let s = s0 + 2.0 * i as f64 / 10.0;
            for j in 0..2u32 {
                assert!(
                    (r(s, j, FlowSign::Minus) - r(s, j, FlowSign::Plus) - shift).abs() <= 1e-8,
                    "minus-branch shift at b={b}, s={s}, j={j}"
                );
                assert!(
                    (r(s, j + 2, FlowSign::Plus) - r(s, j, FlowSign::Plus) - 2.0 * shift).abs()
                        <= 1e-8,
                    "period-2 shift at b={b}, s={s}, j={j}"
                );
                assert!(r(s, j, FlowSign::Plus) < r(s, j + 1, FlowSign::Plus));
            }
            // Odd curves increase; even curves dip below then rise.
            let d = 1e-5;
            assert!((r(s + d, 1, FlowSign::Plus) - r(s - d, 1, FlowSign::Plus)) / (2.0 * d) > 0.0);
        }
        let d = 1e-5;
        let s_in = s0 + 0.5 * (cv.s_c - s0);
        assert!((r(s_in + d, 0, FlowSign::Plus) - r(s_in - d, 0, FlowSign::Plus)) / (2.0 * d) < 0.0);
        let s_out = cv.s_c + 1.0;
        assert!((r(s_out + d, 0, FlowSign::Plus) - r(s_out - d, 0, FlowSign::Plus)) / (2.0 * d) > 0.0);
    }
    println!("[PASS] criterion 9: Figure 1/2 orderings, monotonicity, vertical tangents and 2 pi j/(3 sqrt b) shifts hold");
}

#[test]
fn acceptance_10_scaling_round_trip() {
    let mut rng = StdRng::seed_from_u64(99);
    for _ in 0..20 {
        let q: f64 = rng.gen_range(0.1..10.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let g: f64 = rng.gen_range(0.5..20.0);
        let r_dim: f64 = rng.gen_range(0.1..100.0);
        let sc = Scaling::new(q, g).unwrap();
        let r = sc.head_to_nondimensional(r_dim);
        assert!((sc.head_to_dimensional(r) - r_dim).abs() <= 1e-12 * r_dim);
        let lam: f64 = rng.gen_range(0.1..50.0);
        assert!(
            (sc.length_to_nondimensional(sc.length_to_dimensional(lam)) - lam).abs()
                <= 1e-12 * lam
        );
        let ups: f64 = rng.gen_range(-5.0..5.0);
        assert!(
            (sc.vorticity_to_dimensional(sc.vorticity_to_nondimensional(ups)) - ups).abs()
                <= 1e-12 * ups.abs().max(1e-6)
        );
        // Dimensional bifurcation wavelength is (Q^2/g)^{1/3} Lambda_0.
        let unit = (q * q / g).cbrt();
        assert!((sc.length_to_dimensional(lam) - unit * lam).abs() <= 1e-12 * unit * lam);
    }
    // And through an actual pipeline root: h = 1.2 subcritical stream.
    let stream = irrotational_stream(1.2);
    let profile = find_roots(&stream, cap(1.2)).unwrap();
    let lambda0 = 2.0 * std::f64::consts::PI / profile.roots[0].tau0;
    let sc = Scaling::new(8.0, 1.0).unwrap();
    assert!((sc.length_to_dimensional(lambda0) - 4.0 * lambda0).abs() <= 1e-12 * lambda0);
    println!("[PASS] criterion 10: scaling round trips to 1e-12 and the dimensional wavelength is (Q^2/g)^(1/3) Lambda_0");
}
