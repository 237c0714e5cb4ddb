//! Linearized bifurcation machinery: the kernel `W(z)` of the linearized
//! operator, the leading-order Stokes-wave field, the fixed-wavelength
//! dispersion function `sigma*(tau; s)` and its transversality diagnostic
//! along root curves `tau(s)`.

use crate::dispersion::{dirichlet_eigenvalues, shoot_gamma};
use crate::error::{Error, Result};
use crate::numerics::ode::{integrate, OdeOptions};
use crate::numerics::root::{bisect, golden_min};
use crate::numerics::tol;
use crate::stream::{build_stream_solution, Branch, StreamSolution};
use crate::vorticity::VorticitySpec;

/// Kernel of the linearized problem at a dispersion root `tau0`:
/// `-W'' + [tau0^2 - omega'(u)] W = [z u_z tau0^2 + 2 omega(u)] / h`,
/// `W(0) = W(h) = 0`, solved by superposition of a particular and the
/// homogeneous shooting solution.
#[derive(Debug, Clone)]
pub struct KernelSolution {
    pub tau0: f64,
    /// `(z, W, W_z)` on the integration nodes.
    pub samples: Vec<(f64, f64, f64)>,
    pub w_z_h: f64,
    /// `|W_z(h) - (kappa/h - 1/kappa)|`; vanishes iff `tau0` is a root.
    pub boundary_residual: f64,
}

impl KernelSolution {
    /// Piecewise-linear evaluation of `(W, W_z)`.
    pub fn eval(&self, z: f64) -> (f64, f64) {
        let n = self.samples.len();
        if z <= self.samples[0].0 {
            return (self.samples[0].1, self.samples[0].2);
        }
        if z >= self.samples[n - 1].0 {
            return (self.samples[n - 1].1, self.samples[n - 1].2);
        }
        let idx = self.samples.partition_point(|p| p.0 <= z).min(n - 1);
        let (z0, w0, d0) = self.samples[idx - 1];
        let (z1, w1, d1) = self.samples[idx];
        let th = (z - z0) / (z1 - z0);
        (w0 + (w1 - w0) * th, d0 + (d1 - d0) * th)
    }
}

pub fn solve_kernel(stream: &StreamSolution, tau0: f64) -> Result<KernelSolution> {
    let hom = shoot_gamma(stream, tau0)?;
    if hom.near_pole() {
        return Err(Error::PoleProximity { tau: tau0 });
    }
    // Superposition of two growing solutions cancels catastrophically once
    // exp(tau h) overwhelms the working precision; switch to the scaled
    // Green's-function form well before that.
    if tau0.abs() * stream.h > 12.0 {
        return solve_kernel_scaled(stream, tau0);
    }
    let spec = stream.spec.clone();
    let sign = stream.branch.sign.factor();
    let (s, h, t2) = (stream.s, stream.h, tau0 * tau0);
    let t = tol::ode();
    let opts = OdeOptions { rtol: t, atol: t / 100.0, max_step: h / 256.0, ..Default::default() };
    // States: U, U', Wp, Wp', v, v' with Wp(0) = Wp'(0) = 0 particular.
    let sol = integrate(
        |y, st: &[f64; 6]| {
            let op = spec.omega_prime(st[0]);
            let load = (st[1] * y * t2 + 2.0 * spec.omega(st[0])) / h;
            [
                st[1],
                -spec.omega(st[0]),
                st[3],
                (t2 - op) * st[2] - load,
                st[5],
                (t2 - op) * st[4],
            ]
        },
        0.0,
        h,
        [0.0, sign * s, 0.0, 0.0, 0.0, 1.0],
        &opts,
    )?;
    let end = sol.last();
    let (wp_h, v_h) = (end.y[2], end.y[4]);
    if v_h.abs() < 1e-12 {
        return Err(Error::PoleProximity { tau: tau0 });
    }
    let c = -wp_h / v_h;
    let samples: Vec<(f64, f64, f64)> = sol
        .samples
        .iter()
        .map(|p| (p.t, p.y[2] + c * p.y[4], p.y[3] + c * p.y[5]))
        .collect();
    let w_z_h = end.y[3] + c * end.y[5];
    let target = stream.kappa / h - 1.0 / stream.kappa;
    Ok(KernelSolution {
        tau0,
        samples,
        w_z_h,
        boundary_residual: (w_z_h - target).abs(),
    })
}

/// Green's-function form of the kernel BVP in exponentially scaled
/// variables: with `v_L`, `v_R` the homogeneous solutions vanishing at 0
/// and `h` (normalized by `v_L'(0) = 1`, `v_R'(h) = -1`),
///
/// `W(z) = [v_R(z) int_0^z v_L f + v_L(z) int_z^h v_R f] / v_L(h)`.
///
/// Every carried quantity is damped by `exp(-tau Y)` from its own end, so
/// no exponentially growing mode is ever formed.
fn solve_kernel_scaled(stream: &StreamSolution, tau0: f64) -> Result<KernelSolution> {
    let spec = stream.spec.clone();
    let sign = stream.branch.sign.factor();
    let (s, h) = (stream.s, stream.h);
    let tau = tau0.abs();
    let t2 = tau0 * tau0;
    let t = tol::ode();
    let opts = OdeOptions {
        rtol: t,
        atol: t / 100.0,
        max_step: h / 256.0,
        max_steps: 4_000_000,
    };

    // Forward pass: U, U', a_L = v_L e^{-tau Y}, c_L = v_L' e^{-tau Y},
    // J_L = e^{-tau Y} int_0^Y v_L f.
    let spec_f = spec.clone();
    let forward = integrate(
        move |y, st: &[f64; 5]| {
            let op = spec_f.omega_prime(st[0]);
            let f = (st[1] * y * t2 + 2.0 * spec_f.omega(st[0])) / h;
            [
                st[1],
                -spec_f.omega(st[0]),
                st[3] - tau * st[2],
                (t2 - op) * st[2] - tau * st[3],
                st[2] * f - tau * st[4],
            ]
        },
        0.0,
        h,
        [0.0, sign * s, 0.0, 1.0, 0.0],
        &opts,
    )?;
    let a_l_h = forward.last().y[2];
    if a_l_h.abs() < 1e-14 {
        return Err(Error::PoleProximity { tau: tau0 });
    }

    // Backward pass in t = h - z: U, U', a_R = v_R e^{-tau t},
    // b_R = (dv_R/dz) e^{-tau t}, J_R = e^{-tau t} int_z^h v_R f.
    let u_h = stream.u(h);
    let up_h = stream.u_prime(h);
    let spec_b = spec.clone();
    let backward = integrate(
        move |tt, st: &[f64; 5]| {
            let z = h - tt;
            let op = spec_b.omega_prime(st[0]);
            let f = (st[1] * z * t2 + 2.0 * spec_b.omega(st[0])) / h;
            [
                -st[1],
                spec_b.omega(st[0]),
                -st[3] - tau * st[2],
                -(t2 - op) * st[2] - tau * st[3],
                st[2] * f - tau * st[4],
            ]
        },
        0.0,
        h,
        [u_h, up_h, 0.0, -1.0, 0.0],
        &opts,
    )?;

    let mut samples = Vec::with_capacity(forward.samples.len());
    for p in &forward.samples {
        let z = p.t;
        let tt = h - z;
        let (a_l, c_l, j_l) = (p.y[2], p.y[3], p.y[4]);
        let a_r = backward.eval(tt, 2);
        let b_r = backward.eval(tt, 3);
        let j_r = backward.eval(tt, 4);
        let w = (a_r * j_l + a_l * j_r) / a_l_h;
        let w_z = (b_r * j_l + c_l * j_r) / a_l_h;
        samples.push((z, w, w_z));
    }
    let w_z_h = {
        let end = forward.last();
        // At z = h: a_R = 0, b_R = -1, J_R = 0.
        (-end.y[4]) / a_l_h
    };
    if let Some(last) = samples.last_mut() {
        last.1 = 0.0;
        last.2 = w_z_h;
    }
    let target = stream.kappa / h - 1.0 / stream.kappa;
    Ok(KernelSolution {
        tau0,
        samples,
        w_z_h,
        boundary_residual: (w_z_h - target).abs(),
    })
}

/// Leading-order Stokes-wave field on a sampling grid.
#[derive(Debug, Clone)]
pub struct FieldData {
    pub xs: Vec<f64>,
    /// Free surface `xi(X) = h + t cos(tau0 X)`.
    pub surface: Vec<f64>,
    /// `psi[i][j]` at `(xs[i], ys[i][j])`.
    pub ys: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
    /// Max over the surface of `|grad Psi|^2 + 2 xi - 3r`.
    pub max_bernoulli_defect: f64,
    /// A vertical line along which `Psi_Y` changes sign (closed-streamline
    /// level set).
    pub has_interior_critical_layer: bool,
}

/// Evaluates `xi(X) = h + t cos(tau0 X)` and
/// `Psi(X, Y) = U(Y h / xi) + t W(Y h / xi) cos(tau0 X)` on an
/// `nx x ny` grid over one period; the field is even and periodic in `X`
/// by construction, which is asserted per emission.
pub fn first_order_field(
    stream: &StreamSolution,
    kernel: &KernelSolution,
    t: f64,
    nx: usize,
    ny: usize,
) -> Result<FieldData> {
    let h = stream.h;
    if t.abs() > 0.05 * h {
        return Err(Error::Amplitude { t, h });
    }
    let tau0 = kernel.tau0;
    let lambda0 = 2.0 * std::f64::consts::PI / tau0;
    let psi_at = |x: f64, y: f64| {
        let xi = h + t * (tau0 * x).cos();
        let z = y * h / xi;
        stream.u(z) + t * kernel.eval(z).0 * (tau0 * x).cos()
    };

    let mut xs = Vec::with_capacity(nx);
    let mut surface = Vec::with_capacity(nx);
    let mut ys = Vec::with_capacity(nx);
    let mut psi = Vec::with_capacity(nx);
    let mut max_defect = 0.0f64;
    let mut critical_layer = false;
    for i in 0..nx {
        let x = -lambda0 / 2.0 + lambda0 * i as f64 / (nx - 1) as f64;
        let xi = h + t * (tau0 * x).cos();
        let cosx = (tau0 * x).cos();
        let sinx = (tau0 * x).sin();
        let mut col_y = Vec::with_capacity(ny);
        let mut col_psi = Vec::with_capacity(ny);
        let mut prev_psi_y_sign = 0i8;
        for j in 0..ny {
            let y = xi * j as f64 / (ny - 1) as f64;
            let z = y * h / xi;
            col_y.push(y);
            col_psi.push(psi_at(x, y));
            let (_, w_z) = kernel.eval(z);
            let psi_y = (stream.u_prime(z) + t * w_z * cosx) * h / xi;
            let sign = if psi_y > 1e-12 {
                1
            } else if psi_y < -1e-12 {
                -1
            } else {
                0
            };
            if sign != 0 {
                if prev_psi_y_sign != 0 && sign != prev_psi_y_sign {
                    critical_layer = true;
                }
                prev_psi_y_sign = sign;
            }
        }
        // Surface defect: at z = h the kernel vanishes, so the gradient
        // reduces to the scaled surface slope terms.
        let grad_scale = stream.kappa + t * kernel.w_z_h * cosx;
        let xi_x = -t * tau0 * sinx;
        let psi_x_surf = grad_scale * (-h * xi_x / xi);
        let psi_y_surf = grad_scale * h / xi;
        let defect = (psi_x_surf * psi_x_surf + psi_y_surf * psi_y_surf + 2.0 * xi
            - 3.0 * stream.r)
            .abs();
        max_defect = max_defect.max(defect);

        xs.push(x);
        surface.push(xi);
        ys.push(col_y);
        psi.push(col_psi);
    }

    // Evenness and periodicity asserts, per emission.
    for &x in xs.iter().take(nx / 2) {
        let y = 0.4 * h;
        let even = (psi_at(x, y) - psi_at(-x, y)).abs();
        let periodic = (psi_at(x, y) - psi_at(x + lambda0, y)).abs();
        if even > 1e-12 || periodic > 1e-10 {
            return Err(Error::Consistency(format!(
                "field symmetry violated at X = {x}: even defect {even}, periodic defect {periodic}"
            )));
        }
    }

    Ok(FieldData {
        xs,
        surface,
        ys,
        psi,
        max_bernoulli_defect: max_defect,
        has_interior_critical_layer: critical_layer,
    })
}

/// Full bifurcation data at one root: wavelength, kernel, and (optionally)
/// the leading-order wave field.
#[derive(Debug, Clone)]
pub struct BifurcationReport {
    pub tau0: f64,
    pub lambda0: f64,
    pub kernel: KernelSolution,
    pub amplitude: f64,
    pub field: Option<FieldData>,
}

pub fn bifurcation_report(
    stream: &StreamSolution,
    tau0: f64,
    amplitude: f64,
    grid: Option<(usize, usize)>,
) -> Result<BifurcationReport> {
    let kernel = solve_kernel(stream, tau0)?;
    let field = match grid {
        Some((nx, ny)) => Some(first_order_field(stream, &kernel, amplitude, nx, ny)?),
        None => None,
    };
    Ok(BifurcationReport {
        tau0,
        lambda0: 2.0 * std::f64::consts::PI / tau0,
        kernel,
        amplitude,
        field,
    })
}

/// `sigma*(tau; s)`: the dispersion function of the stream solution at `s`
/// on the given branch, with `kappa(s) = sign(U'(h)) sqrt(3 r(s) - 2 h(s))`.
pub fn sigma_star_eval(
    spec: &VorticitySpec,
    s: f64,
    branch: Branch,
    tau: f64,
) -> Result<f64> {
    let stream = build_stream_solution(spec, s, branch)?;
    sigma_star_on(&stream, tau)
}

/// Same as [`sigma_star_eval`] on a prebuilt stream solution.
pub fn sigma_star_on(stream: &StreamSolution, tau: f64) -> Result<f64> {
    let shot = shoot_gamma(stream, tau)?;
    if shot.near_pole() {
        return Err(Error::PoleProximity { tau });
    }
    let kappa_sq = 3.0 * stream.r - 2.0 * stream.h;
    if kappa_sq <= 0.0 {
        return Err(Error::Degenerate(format!("3r - 2h = {kappa_sq} <= 0")));
    }
    let kappa = kappa_sq.sqrt() * stream.kappa.signum();
    Ok(kappa * shot.ratio - 1.0 / kappa + stream.spec.omega(1.0))
}

/// Transversality quantity `d sigma*(tau; s) / ds` by Richardson-extrapolated
/// central differences at fixed `tau`.
pub fn sigma_star_s_derivative(
    spec: &VorticitySpec,
    s: f64,
    branch: Branch,
    tau: f64,
) -> Result<f64> {
    let delta = 1e-5 * s.max(1.0);
    let poles_below = |ss: f64| -> Result<usize> {
        let stream = build_stream_solution(spec, ss, branch)?;
        Ok(dirichlet_eigenvalues(&stream)?.iter().filter(|&&p| p < tau).count())
    };
    if poles_below(s - delta)? != poles_below(s + delta)? {
        return Err(Error::Numeric(format!(
            "a Dirichlet eigenvalue crosses tau = {tau} between s - delta and s + delta"
        )));
    }
    let diff = |d: f64| -> Result<f64> {
        let up = sigma_star_eval(spec, s + d, branch, tau)?;
        let dn = sigma_star_eval(spec, s - d, branch, tau)?;
        Ok((up - dn) / (2.0 * d))
    };
    let d1 = diff(delta)?;
    let d2 = diff(delta / 2.0)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Root of `sigma*(tau; s) = 0` on the interval above the top Dirichlet
/// eigenvalue, optionally seeded by a previous root.
pub fn solve_sigma_star_root(
    spec: &VorticitySpec,
    branch: Branch,
    s: f64,
    seed: Option<f64>,
) -> Result<f64> {
    let stream = build_stream_solution(spec, s, branch)?;
    let poles = dirichlet_eigenvalues(&stream)?;
    let top = poles.last().copied().unwrap_or(0.0);
    let kappa_sign = stream.kappa.signum();
    let f = |tau: f64| sigma_star_on(&stream, tau);

    // Lower end of the bracket: walk down toward the pole until the sign
    // opposite to kappa appears.
    let mut lo = match seed {
        Some(t) if t > top => (top + 0.25 * (t - top)).max(top * (1.0 + 1e-9)),
        _ => top + 0.05 * (1.0 / stream.h).max(top.max(1e-3)),
    };
    let mut f_lo = f(lo)?;
    let mut guard = 0;
    while f_lo * kappa_sign > 0.0 {
        lo = top + (lo - top) * 0.25;
        f_lo = match f(lo) {
            Ok(v) => v,
            Err(Error::PoleProximity { .. }) => {
                return Err(Error::Continuation {
                    s,
                    trace: format!("root merged into the pole at tau = {top}"),
                })
            }
            Err(e) => return Err(e),
        };
        guard += 1;
        if guard > 60 {
            return Err(Error::Continuation {
                s,
                trace: format!("no sign change above the pole at tau = {top}"),
            });
        }
    }
    // Upper end: expand until sigma* has the sign of kappa.
    let mut hi = match seed {
        Some(t) if t > lo => t.max(lo * 1.5),
        _ => (lo * 2.0).max(top + 1.0 / stream.h),
    };
    let mut f_hi = f(hi)?;
    guard = 0;
    while f_hi * kappa_sign < 0.0 {
        hi = top + (hi - top) * 2.0;
        f_hi = f(hi)?;
        guard += 1;
        if guard > 60 {
            return Err(Error::Continuation {
                s,
                trace: format!("sigma* keeps the sign of -kappa out to tau = {hi}"),
            });
        }
    }
    bisect(|tau| f(tau).unwrap_or(f64::NAN), lo, hi, tol::root() * hi.max(1.0))
}

/// One point of a traced root curve.
#[derive(Debug, Clone, Copy)]
pub struct TauCurvePoint {
    pub s: f64,
    pub tau: f64,
    /// Sign of the finite-difference `d tau / ds` at this point.
    pub tau_dot_sign: i8,
}

/// A refined stationary point of `tau(s)`, where the fixed-wavelength
/// transversality quantity vanishes.
#[derive(Debug, Clone, Copy)]
pub struct StationaryPoint {
    pub s: f64,
    pub tau: f64,
    pub sigma_star_dot: f64,
}

#[derive(Debug, Clone)]
pub struct TauCurve {
    pub points: Vec<TauCurvePoint>,
    pub stationary: Vec<StationaryPoint>,
}

/// Continuation of `sigma*(tau; s) = 0` over the given ascending `s` grid,
/// seeding each bracket from the previous root and halving the step when a
/// bracket is lost.  Sign changes of the finite-difference slope are
/// refined into stationary points.
pub fn trace_tau_curve(spec: &VorticitySpec, branch: Branch, s_values: &[f64]) -> Result<TauCurve> {
    if s_values.len() < 2 {
        return Err(Error::Domain("tau-curve trace needs at least two s values".into()));
    }
    let mut taus = Vec::with_capacity(s_values.len());
    let mut seed = None;
    for (i, &s) in s_values.iter().enumerate() {
        let tau = match solve_sigma_star_root(spec, branch, s, seed) {
            Ok(t) => t,
            Err(e @ Error::Continuation { .. }) if seed.is_some() && i > 0 => {
                // Step halving: approach the failing point through midpoints.
                let mut lo_s = s_values[i - 1];
                let mut tau_seed = seed.unwrap();
                let mut ok = false;
                let mut result = f64::NAN;
                for _ in 0..12 {
                    let mid = 0.5 * (lo_s + s);
                    if let Ok(t) = solve_sigma_star_root(spec, branch, mid, Some(tau_seed)) {
                        lo_s = mid;
                        tau_seed = t;
                    }
                    if let Ok(t) = solve_sigma_star_root(spec, branch, s, Some(tau_seed)) {
                        result = t;
                        ok = true;
                        break;
                    }
                }
                if !ok {
                    return Err(e);
                }
                result
            }
            Err(e) => return Err(e),
        };
        taus.push(tau);
        seed = Some(tau);
    }

    let n = taus.len();
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let slope = if i + 1 < n {
            taus[i + 1] - taus[i]
        } else {
            taus[i] - taus[i - 1]
        };
        let sign = if slope > 0.0 { 1 } else if slope < 0.0 { -1 } else { 0 };
        points.push(TauCurvePoint { s: s_values[i], tau: taus[i], tau_dot_sign: sign });
    }

    let mut stationary = Vec::new();
    for i in 1..n {
        let (p, q) = (points[i - 1], points[i]);
        if p.tau_dot_sign != 0 && q.tau_dot_sign != 0 && p.tau_dot_sign != q.tau_dot_sign && i + 1 < n
        {
            let (s_min, tau_min) = refine_stationary(spec, branch, p.s, s_values[i + 1], q.tau)?;
            let dot = sigma_star_s_derivative(spec, s_min, branch, tau_min)?;
            stationary.push(StationaryPoint { s: s_min, tau: tau_min, sigma_star_dot: dot });
        }
    }
    Ok(TauCurve { points, stationary })
}

fn refine_stationary(
    spec: &VorticitySpec,
    branch: Branch,
    s_lo: f64,
    s_hi: f64,
    seed: f64,
) -> Result<(f64, f64)> {
    let tau_of = |s: f64| solve_sigma_star_root(spec, branch, s, Some(seed)).unwrap_or(f64::NAN);
    let (s_min, tau_min) = golden_min(tau_of, s_lo, s_hi, 1e-8 * s_hi.max(1.0));
    if !tau_min.is_finite() {
        return Err(Error::Continuation {
            s: s_min,
            trace: "root lost while refining the stationary point".into(),
        });
    }
    Ok((s_min, tau_min))
}

/// Least-squares fit of `tau(s) = level + coeff / s + curv / s^2`; the
/// quadratic nuisance term absorbs the next asymptotic order so that
/// `(level, coeff)` estimate the leading constants without bias from the
/// lower end of the fit window.
pub fn fit_inverse_s_with_curvature(points: &[(f64, f64)]) -> (f64, f64, f64) {
    // Normal equations for the 3-parameter model in x = 1/s.
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for &(s, tau) in points {
        let x = 1.0 / s;
        let basis = [1.0, x, x * x];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
            rhs[i] += basis[i] * tau;
        }
    }
    // Gaussian elimination with partial pivoting on the 3x3 system.
    let mut aug = [[0.0f64; 4]; 3];
    for i in 0..3 {
        aug[i][..3].copy_from_slice(&m[i]);
        aug[i][3] = rhs[i];
    }
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&a, &b| aug[a][col].abs().partial_cmp(&aug[b][col].abs()).unwrap())
            .unwrap();
        aug.swap(col, pivot);
        for row in col + 1..3 {
            let w = aug[row][col] / aug[col][col];
            let pivot_row = aug[col];
            for (k, cell) in aug[row].iter_mut().enumerate().skip(col) {
                *cell -= w * pivot_row[k];
            }
        }
    }
    let mut sol = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = aug[row][3];
        for k in row + 1..3 {
            acc -= aug[row][k] * sol[k];
        }
        sol[row] = acc / aug[row][row];
    }
    (sol[0], sol[1], sol[2])
}

/// Least-squares fit of `tau(s) = level + coeff / s`.
pub fn fit_inverse_s(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(s, tau) in points {
        let x = 1.0 / s;
        sx += x;
        sy += tau;
        sxx += x * x;
        sxy += x * tau;
    }
    let denom = n * sxx - sx * sx;
    let coeff = (n * sxy - sx * sy) / denom;
    let level = (sy - coeff * sx) / n;
    (level, coeff)
}

/// Least-squares fit of `y = c x^p` through `log y = log c + p log x`;
/// returns `(p, c)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let p = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let c = ((sy - p * sx) / n).exp();
    (p, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{default_tau_cap, find_roots, sigma0_quadrature, sigma_eval};
    use crate::stream::FlowSign;
    use std::f64::consts::PI;

    fn irrotational_stream(h: f64) -> StreamSolution {
        build_stream_solution(&VorticitySpec::zero(), 1.0 / h, Branch::new(0, FlowSign::Plus))
            .unwrap()
    }

    #[test]
    fn kernel_irrotational_closed_form() {
        let h = 1.2;
        let stream = irrotational_stream(h);
        let profile = find_roots(&stream, default_tau_cap(h)).unwrap();
        let tau0 = profile.roots[0].tau0;
        let kernel = solve_kernel(&stream, tau0).unwrap();
        assert!(kernel.boundary_residual <= 1e-6, "residual {}", kernel.boundary_residual);
        // Dirichlet ends: W(0) = 0 and |W(h)| <= 1e-9.
        assert_eq!(kernel.samples.first().unwrap().1, 0.0);
        assert!(kernel.samples.last().unwrap().1.abs() <= 1e-9);
        // W = z/h^2 - sinh(tau0 z) / (h sinh(tau0 h)).
        for &(z, w, _) in kernel.samples.iter().step_by(7) {
            let expected = z / (h * h) - (tau0 * z).sinh() / (h * (tau0 * h).sinh());
            assert!((w - expected).abs() < 1e-8, "W({z}) = {w} vs {expected}");
        }
    }

    #[test]
    fn kernel_constant_vorticity_residual() {
        let spec = VorticitySpec::constant(2.0).unwrap();
        let stream = build_stream_solution(&spec, 3.0, Branch::new(1, FlowSign::Plus)).unwrap();
        let profile = find_roots(&stream, default_tau_cap(stream.h)).unwrap();
        let kernel = solve_kernel(&stream, profile.roots[0].tau0).unwrap();
        assert!(kernel.boundary_residual <= 1e-6);
    }

    #[test]
    fn kernel_scaled_path_matches_closed_form() {
        // h = 3, tau = 5: tau h = 15 goes through the Green's-function path.
        let h = 3.0;
        let stream = irrotational_stream(h);
        let tau = 5.0;
        let kernel = solve_kernel(&stream, tau).unwrap();
        let a = -1.0 / (h * (tau * h).sinh());
        for &(z, w, w_z) in kernel.samples.iter().step_by(11) {
            let expected = z / (h * h) + a * (tau * z).sinh();
            let expected_z = 1.0 / (h * h) + a * tau * (tau * z).cosh();
            assert!((w - expected).abs() < 1e-9, "W({z}) = {w} vs {expected}");
            assert!((w_z - expected_z).abs() < 1e-8, "W_z({z}) = {w_z} vs {expected_z}");
        }
        // Both paths satisfy the sigma identity on either side of the switch.
        for &tau in &[3.9f64, 4.1] {
            let kernel = solve_kernel(&stream, tau).unwrap();
            let sigma = sigma_eval(&stream, tau).unwrap();
            assert!((kernel.boundary_residual - sigma.abs()).abs() < 1e-7);
        }
    }

    #[test]
    fn kernel_nonroot_residual_equals_sigma() {
        let h = 1.2;
        let stream = irrotational_stream(h);
        for &tau in &[0.7f64, 2.0, 3.3] {
            let kernel = solve_kernel(&stream, tau).unwrap();
            let sigma = sigma_eval(&stream, tau).unwrap();
            assert!(
                (kernel.boundary_residual - sigma.abs()).abs() < 1e-7,
                "residual {} vs |sigma| {}",
                kernel.boundary_residual,
                sigma.abs()
            );
            // And W_z(h) = -sigma_0(tau) against the quadrature route.
            let sigma0 = sigma0_quadrature(&stream, tau).unwrap();
            assert!((kernel.w_z_h + sigma0).abs() < 1e-7);
        }
    }

    #[test]
    fn field_unperturbed_and_quadratic_defect() {
        let h = 1.2;
        let stream = irrotational_stream(h);
        let profile = find_roots(&stream, default_tau_cap(h)).unwrap();
        let kernel = solve_kernel(&stream, profile.roots[0].tau0).unwrap();
        let flat = first_order_field(&stream, &kernel, 0.0, 33, 17).unwrap();
        assert!(flat.max_bernoulli_defect <= 1e-8);

        let d1 = first_order_field(&stream, &kernel, 1e-3, 65, 17).unwrap().max_bernoulli_defect;
        let d2 = first_order_field(&stream, &kernel, 5e-4, 65, 17).unwrap().max_bernoulli_defect;
        let ratio = d1 / d2;
        assert!((2.5..6.0).contains(&ratio), "defect ratio {ratio} not O(t^2)");
    }

    #[test]
    fn field_rejects_large_amplitude() {
        let stream = irrotational_stream(1.2);
        let profile = find_roots(&stream, default_tau_cap(1.2)).unwrap();
        let kernel = solve_kernel(&stream, profile.roots[0].tau0).unwrap();
        assert!(matches!(
            first_order_field(&stream, &kernel, 0.5, 9, 9),
            Err(Error::Amplitude { .. })
        ));
    }

    #[test]
    fn field_detects_critical_layer_on_counter_current_branch() {
        let spec = VorticitySpec::constant(2.0).unwrap();
        let stream = build_stream_solution(&spec, 3.0, Branch::new(1, FlowSign::Plus)).unwrap();
        let profile = find_roots(&stream, default_tau_cap(stream.h)).unwrap();
        let kernel = solve_kernel(&stream, profile.roots[0].tau0).unwrap();
        let field = first_order_field(&stream, &kernel, 1e-3, 33, 65).unwrap();
        assert!(field.has_interior_critical_layer);

        let uni = irrotational_stream(1.2);
        let profile = find_roots(&uni, default_tau_cap(1.2)).unwrap();
        let kernel = solve_kernel(&uni, profile.roots[0].tau0).unwrap();
        let field = first_order_field(&uni, &kernel, 1e-3, 33, 65).unwrap();
        assert!(!field.has_interior_critical_layer);
    }

    #[test]
    fn sigma_star_coincides_with_sigma_at_base_point() {
        let spec = VorticitySpec::linear(1.0).unwrap();
        let branch = Branch::new(0, FlowSign::Minus);
        let stream = build_stream_solution(&spec, 2.0, branch).unwrap();
        for &tau in &[0.9f64, 1.7] {
            let a = sigma_star_eval(&spec, 2.0, branch, tau).unwrap();
            let b = sigma_eval(&stream, tau).unwrap();
            assert!((a - b).abs() < 1e-10, "sigma* {a} vs sigma {b}");
        }
    }

    #[test]
    fn sigma_star_derivative_closed_form_irrotational() {
        // h(s) = 1/s, kappa = s: sigma*(tau; s) = s tau coth(tau/s) - 1/s.
        let spec = VorticitySpec::zero();
        let branch = Branch::new(0, FlowSign::Plus);
        let (s, tau) = (0.9f64, 1.3f64);
        let got = sigma_star_s_derivative(&spec, s, branch, tau).unwrap();
        let c = (tau / s).tanh().recip();
        let expected = tau * c - tau * tau * (1.0 - c * c) / s + 1.0 / (s * s);
        assert!((got - expected).abs() < 1e-6 * expected.abs().max(1.0), "{got} vs {expected}");
    }

    #[test]
    fn chain_rule_along_root_curve() {
        // tau_dot sigma*_tau + sigma*_dot = 0 along the traced curve.
        let spec = VorticitySpec::linear(1.0).unwrap();
        let branch = Branch::new(0, FlowSign::Minus);
        let s = 2.0;
        let tau = solve_sigma_star_root(&spec, branch, s, None).unwrap();
        let ds = 1e-4;
        let tau_up = solve_sigma_star_root(&spec, branch, s + ds, Some(tau)).unwrap();
        let tau_dn = solve_sigma_star_root(&spec, branch, s - ds, Some(tau)).unwrap();
        let tau_dot = (tau_up - tau_dn) / (2.0 * ds);
        let dt = 1e-6;
        let stream = build_stream_solution(&spec, s, branch).unwrap();
        let sig_tau = (sigma_star_on(&stream, tau + dt).unwrap()
            - sigma_star_on(&stream, tau - dt).unwrap())
            / (2.0 * dt);
        let sig_dot = sigma_star_s_derivative(&spec, s, branch, tau).unwrap();
        let defect = (tau_dot * sig_tau + sig_dot).abs();
        assert!(
            defect <= 1e-5 * sig_dot.abs().max(tau_dot.abs() * sig_tau.abs()).max(1e-8),
            "chain rule defect {defect}"
        );
    }

    #[test]
    fn trace_finds_interior_minimum_for_linear_minus_branch() {
        let spec = VorticitySpec::linear(1.0).unwrap();
        let branch = Branch::new(0, FlowSign::Minus);
        let s_values: Vec<f64> = (0..=40).map(|i| 1.05 + 3.0 * i as f64 / 40.0).collect();
        let curve = trace_tau_curve(&spec, branch, &s_values).unwrap();
        assert_eq!(curve.points.len(), s_values.len());
        assert!(!curve.stationary.is_empty(), "expected a stationary point of tau(s)");
        let stat = curve.stationary[0];
        assert!(stat.sigma_star_dot.abs() <= 1e-5, "sigma*_dot = {}", stat.sigma_star_dot);
        // The curve decreases toward the minimum and rises toward sqrt(3)/2.
        assert!(curve.points.first().unwrap().tau > stat.tau);
    }

    #[test]
    fn fit_helpers_recover_parameters() {
        let pts: Vec<(f64, f64)> = (20..=60).map(|i| {
            let s = i as f64;
            (s, 0.8660 - 0.2757 / s)
        })
        .collect();
        let (level, coeff) = fit_inverse_s(&pts);
        assert!((level - 0.8660).abs() < 1e-12);
        assert!((coeff + 0.2757).abs() < 1e-10);

        let pl: Vec<(f64, f64)> = (1..=20).map(|i| {
            let x = i as f64 * 0.01;
            (x, 3.0 / x)
        })
        .collect();
        let (p, c) = fit_power_law(&pl);
        assert!((p + 1.0).abs() < 1e-10);
        assert!((c - 3.0).abs() < 1e-9);
    }

    #[test]
    fn bifurcation_report_assembles() {
        let stream = irrotational_stream(1.2);
        let profile = find_roots(&stream, default_tau_cap(1.2)).unwrap();
        let report =
            bifurcation_report(&stream, profile.roots[0].tau0, 1e-3, Some((17, 9))).unwrap();
        assert!((report.lambda0 - 2.0 * PI / report.tau0).abs() < 1e-14);
        assert!(report.field.is_some());
        assert!(report.kernel.boundary_residual <= 1e-6);
    }
}
