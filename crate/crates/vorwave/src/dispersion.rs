//! The dispersion function `sigma(tau) = kappa gamma'(h, tau) - 1/kappa
//! + omega(1)` of a stream solution, its poles (Dirichlet eigenvalues of
//! `d^2/dY^2 + omega'(U)`), and its simple positive roots.
//!
//! On every interval where `sigma` is defined it is strictly monotone with
//! the sign of `kappa = U'(h)`, so each continuity interval carries at most
//! one root and plain bisection is safe.  With `k` poles the equation has
//! `k` roots, plus one more below the first pole exactly when
//! `R'(s) / h'(s) > 0`.

use crate::error::{Error, Result};
use crate::numerics::ode::{integrate, OdeOptions};
use crate::numerics::root::bisect;
use crate::numerics::shoot::{shoot, ShootOutcome};
use crate::numerics::tol;
use crate::stream::{h_derivative, StreamSolution};

/// Relative pole guard: `|v(h)| < GUARD * max |v|` refuses a sigma
/// evaluation.
const POLE_GUARD: f64 = 1e-10;
fn shoot_tol() -> f64 {
    (tol::ode() * 10.0).max(1e-12)
}

/// Result of shooting `v'' = [tau^2 - omega'(U)] v`, `v(0) = 0`, `v'(0) = 1`.
#[derive(Debug, Clone, Copy)]
pub struct GammaShot {
    /// `gamma'(h, tau) = v'(h) / v(h)`.
    pub ratio: f64,
    /// Scaled terminal values and magnitude bookkeeping.
    pub outcome: ShootOutcome,
}

impl GammaShot {
    pub fn near_pole(&self) -> bool {
        self.outcome.near_pole(POLE_GUARD)
    }

    pub fn v_h_sign(&self) -> i8 {
        if self.outcome.v_end > 0.0 {
            1
        } else if self.outcome.v_end < 0.0 {
            -1
        } else {
            0
        }
    }
}

/// Shoots the gamma problem for one `tau` (even in `tau`: only `tau^2`
/// enters).
pub fn shoot_gamma(stream: &StreamSolution, tau: f64) -> Result<GammaShot> {
    shoot_gamma_counting(stream, tau, false)
}

fn shoot_gamma_counting(stream: &StreamSolution, tau: f64, count_zeros: bool) -> Result<GammaShot> {
    let t2 = tau * tau;
    let q = |y: f64| t2 - stream.omega_prime_at(y);
    let outcome = shoot(&q, stream.h, shoot_tol(), count_zeros)?;
    Ok(GammaShot { ratio: outcome.ratio, outcome })
}

/// `sigma(tau) = kappa v'(h)/v(h) - 1/kappa + omega(1)`.
pub fn sigma_eval(stream: &StreamSolution, tau: f64) -> Result<f64> {
    let shot = shoot_gamma(stream, tau)?;
    if shot.near_pole() {
        return Err(Error::PoleProximity { tau });
    }
    Ok(stream.kappa * shot.ratio - 1.0 / stream.kappa + stream.spec.omega(1.0))
}

/// `sigma(0)` from the analytic identity
/// `sigma(0) = -(3/(2 kappa)) R'(s) / h'(s) = -(1/kappa) [1 + s / h'(s)]`
/// with `R'(s) = (2/3)(s + h'(s))`; both forms are evaluated and must agree
/// to 1e-8.  The derivative `h'(s)` comes from the variational equation;
/// its independent finite-difference validation is the stream-module
/// invariant, and [`find_roots`] additionally cross-checks this value
/// against the shooting limit `tau -> 0`.
pub fn sigma_zero_analytic(stream: &StreamSolution) -> Result<f64> {
    let hdot = h_derivative(stream)?;
    if hdot.abs() < 1e-10 {
        return Err(Error::Degenerate(format!(
            "dh/ds = {hdot} at s = {}: zero is a Dirichlet eigenvalue",
            stream.s
        )));
    }
    let r_prime = 2.0 / 3.0 * (stream.s + hdot);
    let form_ratio = -(1.5 / stream.kappa) * (r_prime / hdot);
    let form_direct = -(1.0 / stream.kappa) * (1.0 + stream.s / hdot);
    if (form_ratio - form_direct).abs() > 1e-8 * form_direct.abs().max(1.0) {
        return Err(Error::Consistency(format!(
            "sigma(0) forms disagree: {form_ratio} vs {form_direct}"
        )));
    }
    Ok(form_direct)
}

/// Shooting limit of `sigma` as `tau -> 0+`: samples at `probe` and
/// `probe / 2` extrapolated in `tau^2` (sigma is even, so the leading
/// finite-`tau` defect is quadratic).
pub fn sigma_zero_limit(stream: &StreamSolution, probe: f64) -> Result<f64> {
    let s1 = sigma_eval(stream, probe)?;
    let s2 = sigma_eval(stream, probe / 2.0)?;
    Ok((4.0 * s2 - s1) / 3.0)
}

/// All `tau_* > 0` with `v(h; tau_*) = 0`, ascending, bisected to 1e-10 and
/// cross-checked against the Sturm oscillation count at `tau = 0+`.
pub fn dirichlet_eigenvalues(stream: &StreamSolution) -> Result<Vec<f64>> {
    let mut wmax = f64::NEG_INFINITY;
    for (y, _, _) in stream.trajectory().samples() {
        if y > stream.h {
            break;
        }
        wmax = wmax.max(stream.omega_prime_at(y));
    }
    wmax = wmax.max(stream.omega_prime_at(stream.h));

    // Degeneracy guard (zero as an eigenvalue) where the state is
    // computable; the oscillation count itself is robust regardless.
    match shoot_gamma(stream, 1e-9) {
        Ok(shot) if shot.near_pole() => {
            return Err(Error::Degenerate(
                "zero is (numerically) a Dirichlet eigenvalue; dh/ds = 0 regime".into(),
            ));
        }
        Ok(_) | Err(Error::Numeric(_)) => {}
        Err(e) => return Err(e),
    }
    let expected = count_zeros_at(stream, 1e-9)?;

    if wmax <= 0.0 {
        if expected != 0 {
            return Err(Error::EigenvalueCensus(format!(
                "omega'(U) <= 0 but the tau = 0 shot oscillates {expected} times"
            )));
        }
        return Ok(Vec::new());
    }

    let tau_top = wmax.sqrt();
    let mut cells = 512usize;
    for _ in 0..2 {
        // A conditioning-limited scan falls through to the count bisection.
        match scan_eigenvalues(stream, tau_top, cells) {
            Ok(eigen) if eigen.len() == expected => return Ok(eigen),
            Ok(_) | Err(Error::Numeric(_)) => {}
            Err(e) => return Err(e),
        }
        cells *= 4;
    }
    // Sign scanning can miss tightly clustered eigenvalues; the interior
    // zero count of the shot is a nonincreasing integer function of tau
    // that drops by one exactly at each eigenvalue, so bisecting its level
    // sets recovers every one of them.
    let eigen = oscillation_bisection(stream, tau_top, expected)?;
    if eigen.len() == expected {
        return Ok(eigen);
    }
    Err(Error::EigenvalueCensus(format!(
        "oscillation count {expected} vs {} recovered eigenvalues",
        eigen.len()
    )))
}

fn count_zeros_at(stream: &StreamSolution, tau: f64) -> Result<usize> {
    let t2 = tau * tau;
    let q = |y: f64| t2 - stream.omega_prime_at(y);
    crate::numerics::shoot::shoot_count(&q, stream.h)
}

fn oscillation_bisection(
    stream: &StreamSolution,
    tau_top: f64,
    expected: usize,
) -> Result<Vec<f64>> {
    let count_at = |tau: f64| -> Result<usize> { count_zeros_at(stream, tau) };
    let lo0 = 1e-9;
    let hi0 = tau_top * (1.0 + 1e-9) + 1e-12;
    if count_at(hi0)? != 0 {
        return Err(Error::EigenvalueCensus(format!(
            "zeros persist above the spectral bound tau = {hi0}"
        )));
    }
    let mut out = Vec::with_capacity(expected);
    for level in 1..=expected {
        // Largest tau with count >= level.
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if count_at(mid)? >= level {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-10 {
                break;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    // Near-degenerate pairs may coincide at the bisection width; they are
    // still distinct (simple) eigenvalues and are all reported.
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

fn scan_eigenvalues(stream: &StreamSolution, tau_top: f64, cells: usize) -> Result<Vec<f64>> {
    // Uniform in tau^2, which matches the spectral spacing.
    let f = |tau: f64| -> Result<f64> {
        let shot = shoot_gamma(stream, tau)?;
        Ok(shot.outcome.v_end.signum() * shot.outcome.log_abs_end().exp().max(1e-300))
    };
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=cells {
        let tau = tau_top * ((i as f64 / cells as f64).sqrt()).max(1e-7);
        let val = f(tau)?;
        if let Some((ptau, pval)) = prev {
            if pval == 0.0 || (val != 0.0 && pval.signum() != val.signum()) {
                let root = bisect(
                    |t| f(t).unwrap_or(f64::NAN),
                    ptau,
                    tau,
                    1e-10,
                )?;
                out.push(root);
            }
        }
        prev = Some((tau, val));
    }
    Ok(out)
}

/// Normalized eigenfunction data at a pole: `gamma_*'(h)` for the
/// eigenfunction with unit L2 norm, and the residue
/// `-kappa [gamma_*'(h)]^2 / (2 tau_*)` of `sigma` at `tau_*`.
#[derive(Debug, Clone, Copy)]
pub struct PoleData {
    pub tau_star: f64,
    pub gamma_star_prime_h: f64,
    pub residue: f64,
}

pub fn pole_data(stream: &StreamSolution, tau_star: f64) -> Result<PoleData> {
    let ints = gamma_raw_integrals(stream, tau_star)?;
    let norm = ints.int_v_sq.sqrt();
    let gamma_star_prime_h = ints.v_prime_h / norm;
    let residue = -stream.kappa * gamma_star_prime_h * gamma_star_prime_h / (2.0 * tau_star);
    Ok(PoleData { tau_star, gamma_star_prime_h, residue })
}

/// Raw shooting integrals used by the quadrature cross-checks.
#[derive(Debug, Clone, Copy)]
pub struct RawGammaIntegrals {
    pub v_h: f64,
    pub v_prime_h: f64,
    /// `int_0^h v^2`.
    pub int_v_sq: f64,
    /// `int_0^h v [tau^2 z u_z + 2 omega(u)]`.
    pub int_v_load: f64,
}

fn gamma_raw_integrals(stream: &StreamSolution, tau: f64) -> Result<RawGammaIntegrals> {
    if tau.abs() * stream.h > 200.0 {
        return Err(Error::Numeric(format!(
            "quadrature cross-check limited to tau h <= 200 (got {})",
            tau.abs() * stream.h
        )));
    }
    let spec = stream.spec.clone();
    let sign = stream.branch.sign.factor();
    let (s, t2) = (stream.s, tau * tau);
    let t = tol::ode();
    let opts = OdeOptions { rtol: t, atol: t / 100.0, ..Default::default() };
    let sol = integrate(
        |y, st: &[f64; 6]| {
            let omega_prime = spec.omega_prime(st[0]);
            [
                st[1],
                -spec.omega(st[0]),
                st[3],
                (t2 - omega_prime) * st[2],
                st[2] * st[2],
                st[2] * (t2 * y * st[1] + 2.0 * spec.omega(st[0])),
            ]
        },
        0.0,
        stream.h,
        [0.0, sign * s, 0.0, 1.0, 0.0, 0.0],
        &opts,
    )?;
    let end = sol.last();
    Ok(RawGammaIntegrals {
        v_h: end.y[2],
        v_prime_h: end.y[3],
        int_v_sq: end.y[4],
        int_v_load: end.y[5],
    })
}

/// `sigma_0(tau) = h^{-1} int_0^h gamma(z, tau) [tau^2 z u_z + 2 omega(u)] dz`
/// by quadrature; the integral form of the dispersion function satisfying
/// `sigma = sigma_0 + kappa/h - 1/kappa`.
pub fn sigma0_quadrature(stream: &StreamSolution, tau: f64) -> Result<f64> {
    let ints = gamma_raw_integrals(stream, tau)?;
    Ok(ints.int_v_load / (stream.h * ints.v_h))
}

/// `int_0^h gamma^2 dz`, for the identity
/// `sigma_tau(tau) = 2 tau kappa int gamma^2`.
pub fn gamma_sq_integral(stream: &StreamSolution, tau: f64) -> Result<f64> {
    let ints = gamma_raw_integrals(stream, tau)?;
    Ok(ints.int_v_sq / (ints.v_h * ints.v_h))
}

/// One sampled sigma value inside a continuity interval.
#[derive(Debug, Clone, Copy)]
pub struct SigmaSample {
    pub tau: f64,
    pub sigma: f64,
    pub interval: usize,
}

/// A bracketed simple root of the dispersion equation.
#[derive(Debug, Clone, Copy)]
pub struct RootRecord {
    pub tau0: f64,
    pub bracket: (f64, f64),
    /// `|sigma(tau0)|` at the accepted root.
    pub residual: f64,
    /// Sign of `sigma_tau` at the root (equals the sign of `kappa`).
    pub slope_sign: i8,
    /// Continuity interval index (0 = below the first pole).
    pub interval: usize,
}

/// The dispersion profile of one stream solution.
#[derive(Debug, Clone)]
pub struct DispersionProfile {
    pub stream: StreamSolution,
    pub poles: Vec<PoleData>,
    pub sigma_samples: Vec<SigmaSample>,
    pub roots: Vec<RootRecord>,
    /// Scan bound actually used (auto-extended until the asymptotic sign
    /// appears).
    pub tau_cap: f64,
    /// `sigma(0)`; `None` in the degenerate `dh/ds = 0` regime.
    pub sigma_zero: Option<f64>,
    /// `R'(s)/h'(s) > 0`, from the sign of `sigma(0)`.
    pub cond_rh: Option<bool>,
    pub predicted_roots: Option<usize>,
    /// Pairs `(i, k)` where root `i` has the harmonic `k tau0_i` equal to
    /// another root: the bifurcation kernel is not one-dimensional at
    /// such roots, so they are flagged rather than used.
    pub harmonic_violations: Vec<(usize, u32)>,
}

/// Default scan bound, well beyond every pole of the worked examples.
pub fn default_tau_cap(h: f64) -> f64 {
    50.0 / h
}

/// Samples per continuity interval used by [`find_roots`].
const SAMPLES_PER_INTERVAL: usize = 64;

/// Locates and classifies all positive roots up to `tau_cap`, enforcing the
/// monotonicity of `sigma` on every continuity interval and the root-count
/// law (`k` poles give `k` roots, `k + 1` under the Bernoulli-slope
/// condition).
pub fn find_roots(stream: &StreamSolution, tau_cap: f64) -> Result<DispersionProfile> {
    if stream.kappa.abs() < 1e-10 {
        return Err(Error::Degenerate(format!("kappa = {} vanishes", stream.kappa)));
    }
    let kappa_sign = if stream.kappa > 0.0 { 1i8 } else { -1i8 };
    let eigen = dirichlet_eigenvalues(stream)?;
    let mut poles = Vec::with_capacity(eigen.len());
    for &t in &eigen {
        poles.push(pole_data(stream, t)?);
    }

    let sigma_zero = match sigma_zero_analytic(stream) {
        Ok(v) => Some(v),
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };
    if let Some(s0v) = sigma_zero {
        // Double-entry bookkeeping near tau = 0: analytic formula against
        // the shooting limit.
        let probe_tau = match eigen.first() {
            Some(&p) => (1e-3f64).min(p / 4.0),
            None => 1e-3,
        };
        let probed = sigma_zero_limit(stream, probe_tau)?;
        if (probed - s0v).abs() > 1e-6 * s0v.abs().max(1.0) {
            return Err(Error::Consistency(format!(
                "sigma(0) = {s0v} but the shooting limit gives {probed}: variational route disagrees"
            )));
        }
    }

    // Auto-extend the cap until sigma shows its asymptotic sign.
    let mut cap = tau_cap.max(eigen.last().map_or(0.0, |&p| 2.0 * p));
    let mut sign_at_cap = sigma_sign_eval(stream, cap)?;
    let mut extensions = 0;
    while sign_at_cap != kappa_sign && extensions < 20 {
        cap *= 2.0;
        sign_at_cap = sigma_sign_eval(stream, cap)?;
        extensions += 1;
    }
    if sign_at_cap != kappa_sign {
        return Err(Error::Numeric(format!(
            "sigma never reaches its asymptotic sign below tau = {cap}"
        )));
    }

    let mut boundaries = vec![0.0];
    boundaries.extend(eigen.iter().copied());
    boundaries.push(cap);

    let mut samples = Vec::new();
    let mut roots = Vec::new();

    for i in 0..boundaries.len() - 1 {
        let (a, b) = (boundaries[i], boundaries[i + 1]);
        let width = b - a;
        // Interior sample points with a margin away from the poles.
        let mut interval_samples = Vec::with_capacity(SAMPLES_PER_INTERVAL);
        for k in 0..SAMPLES_PER_INTERVAL {
            let tau = a + width * (0.02 + 0.96 * k as f64 / (SAMPLES_PER_INTERVAL - 1) as f64);
            match sigma_eval(stream, tau) {
                Ok(sig) => interval_samples.push((tau, sig)),
                Err(Error::PoleProximity { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        if interval_samples.len() < 2 {
            return Err(Error::Numeric(format!(
                "interval ({a}, {b}) too thin to sample the dispersion function"
            )));
        }
        // Strict monotonicity with the sign of kappa on every interval
        // where sigma is defined.
        for w in interval_samples.windows(2) {
            if (w[1].1 - w[0].1) * kappa_sign as f64 <= 0.0 {
                return Err(Error::Classification(format!(
                    "sigma not monotone on ({a}, {b}): sigma({}) = {}, sigma({}) = {}",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }

        // End signs: poles contribute -/+ sign(kappa) (left/right side of
        // the interval), tau = 0 contributes sign(sigma(0)), the cap its
        // sampled sign.
        let left_sign: i8 = if i == 0 {
            match sigma_zero {
                Some(v) if v > 0.0 => 1,
                Some(v) if v < 0.0 => -1,
                Some(_) => 0,
                None => -kappa_sign, // zero eigenvalue acts as a pole below
            }
        } else {
            -kappa_sign
        };
        let right_sign: i8 = if i + 2 < boundaries.len() { kappa_sign } else { sign_at_cap };

        let mut chain: Vec<(f64, f64, i8)> = Vec::with_capacity(interval_samples.len() + 2);
        chain.push((a, f64::NAN, left_sign));
        for &(tau, sig) in &interval_samples {
            chain.push((tau, sig, if sig > 0.0 { 1 } else if sig < 0.0 { -1 } else { 0 }));
        }
        chain.push((b, f64::NAN, right_sign));

        let mut crossings = Vec::new();
        for w in chain.windows(2) {
            if w[0].2 != 0 && w[1].2 != 0 && w[0].2 != w[1].2 {
                crossings.push((w[0].0, w[1].0));
            }
        }
        if crossings.len() > 1 {
            return Err(Error::Classification(format!(
                "{} sign changes on the monotone interval ({a}, {b})",
                crossings.len()
            )));
        }
        if let Some(&(mut lo, mut hi)) = crossings.first() {
            // A crossing adjacent to an interval end needs a finite sigma
            // value on that side before bisection.
            if lo == a && i > 0 {
                lo = shrink_to_sign(stream, a, hi, -kappa_sign)?;
            } else if lo == a {
                // First interval: sample just above zero.
                lo = shrink_to_sign(stream, a, hi, left_sign)?;
            }
            if hi == b && i + 2 < boundaries.len() {
                hi = shrink_to_sign(stream, b, lo, kappa_sign)?;
            } else if hi == b {
                hi = b; // cap was evaluated directly
            }
            let tau0 = bisect(
                |t| sigma_eval(stream, t).unwrap_or(f64::NAN),
                lo,
                hi,
                tol::root() * b.max(1.0),
            )?;
            let residual = sigma_eval(stream, tau0)?.abs();
            roots.push(RootRecord {
                tau0,
                bracket: (lo, hi),
                residual,
                slope_sign: kappa_sign,
                interval: i,
            });
        }
        samples.extend(interval_samples.into_iter().map(|(tau, sigma)| SigmaSample {
            tau,
            sigma,
            interval: i,
        }));
    }

    let cond_rh = sigma_zero.map(|v| v * stream.kappa < 0.0);
    let predicted_roots = cond_rh.map(|c| eigen.len() + usize::from(c));
    if let Some(pred) = predicted_roots {
        if pred != roots.len() {
            return Err(Error::Classification(format!(
                "found {} roots but the pole/condition count law predicts {pred} \
                 (poles: {:?}, sigma(0) = {:?}, kappa = {}, s = {}, branch {})",
                roots.len(),
                eigen,
                sigma_zero,
                stream.kappa,
                stream.s,
                stream.branch
            )));
        }
    }

    // Harmonic census: a root whose integer multiple is again a root.
    let mut harmonic_violations = Vec::new();
    for (i, low) in roots.iter().enumerate() {
        for high in &roots[i + 1..] {
            let ratio = high.tau0 / low.tau0;
            let k = ratio.round();
            if k >= 2.0 && (ratio - k).abs() <= 1e-8 * ratio {
                harmonic_violations.push((i, k as u32));
            }
        }
    }

    Ok(DispersionProfile {
        stream: stream.clone(),
        poles,
        sigma_samples: samples,
        roots,
        tau_cap: cap,
        sigma_zero,
        cond_rh,
        predicted_roots,
        harmonic_violations,
    })
}

fn sigma_sign_eval(stream: &StreamSolution, tau: f64) -> Result<i8> {
    let v = sigma_eval(stream, tau)?;
    Ok(if v > 0.0 { 1 } else { -1 })
}

/// Walks from the endpoint `from` toward `toward` in geometrically shrinking
/// steps until `sigma` is evaluable with the expected sign.
fn shrink_to_sign(
    stream: &StreamSolution,
    from: f64,
    toward: f64,
    expected: i8,
) -> Result<f64> {
    let mut frac = 0.25f64;
    for _ in 0..40 {
        let tau = from + (toward - from) * frac;
        match sigma_eval(stream, tau) {
            Ok(v) => {
                let sign: i8 = if v > 0.0 { 1 } else { -1 };
                if sign == expected {
                    return Ok(tau);
                }
                frac *= 0.25;
            }
            Err(Error::PoleProximity { .. }) => {
                return Err(Error::Numeric(format!(
                    "root indistinguishable from the pole at tau = {from}"
                )));
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Numeric(format!(
        "sigma never shows sign {expected} approaching tau = {from}"
    )))
}

/// Fitted constants of the large-`tau` law `|sigma(tau)/tau - kappa| <= C / tau`.
#[derive(Debug, Clone, Copy)]
pub struct SlopeReport {
    /// `max tau |sigma/tau - kappa|` over the lower half of the window.
    pub c_low: f64,
    /// Same over the upper half.
    pub c_high: f64,
}

impl SlopeReport {
    pub fn stable(&self) -> bool {
        let floor = 1e-9;
        let (lo, hi) = (self.c_low.max(floor), self.c_high.max(floor));
        hi / lo < 1.5 && lo / hi < 1.5
    }
}

/// Verifies `sigma(tau) = |tau| kappa + O(1)` on the given (ascending) large
/// `tau` samples; report-only.
pub fn asymptotic_slope_check(stream: &StreamSolution, tau_list: &[f64]) -> Result<SlopeReport> {
    let mut defects = Vec::with_capacity(tau_list.len());
    for &tau in tau_list {
        let sigma = sigma_eval(stream, tau)?;
        defects.push((tau, (sigma / tau - stream.kappa).abs()));
    }
    let mid = defects.len() / 2;
    let c_of = |part: &[(f64, f64)]| part.iter().map(|&(t, d)| t * d).fold(0.0, f64::max);
    Ok(SlopeReport { c_low: c_of(&defects[..mid]), c_high: c_of(&defects[mid..]) })
}

/// Residue check at a pole: Richardson-extrapolated `(tau - tau_*) sigma`
/// against `-kappa [gamma_*'(h)]^2 / (2 tau_*)`; relative agreement 1e-4.
#[derive(Debug, Clone, Copy)]
pub struct ResidueReport {
    pub tau_star: f64,
    pub analytic: f64,
    pub extrapolated: f64,
    pub rel_err: f64,
}

pub fn pole_residue_check(stream: &StreamSolution, tau_star: f64) -> Result<ResidueReport> {
    let analytic = pole_data(stream, tau_star)?.residue;
    let eigen = dirichlet_eigenvalues(stream)?;
    let mut gap = tau_star;
    for &other in &eigen {
        if (other - tau_star).abs() > 1e-8 {
            gap = gap.min((other - tau_star).abs());
        }
    }
    let delta = 0.5 * gap;
    let mut averaged = Vec::new();
    for k in 2..=5 {
        let eps = delta * 10f64.powi(-k);
        let up = (sigma_eval(stream, tau_star + eps)?) * eps;
        let dn = (sigma_eval(stream, tau_star - eps)?) * (-eps);
        averaged.push(0.5 * (up + dn));
    }
    // (tau - tau_*) sigma = residue + O(eps^2) after two-sided averaging;
    // one 100:1 Richardson step removes the quadratic term.
    let n = averaged.len();
    let extrapolated = (100.0 * averaged[n - 1] - averaged[n - 2]) / 99.0;
    let rel_err = (extrapolated - analytic).abs() / analytic.abs().max(1e-300);
    if rel_err > 1e-4 {
        return Err(Error::Numeric(format!(
            "residue mismatch at tau_* = {tau_star}: analytic {analytic}, extrapolated {extrapolated}"
        )));
    }
    Ok(ResidueReport { tau_star, analytic, extrapolated, rel_err })
}

/// `R'(s) / h'(s) > 0`, with the analytic `R'(s) = (2/3)(s + h'(s))`.
pub fn cond_rh_test(stream: &StreamSolution) -> Result<bool> {
    let hdot = h_derivative(stream)?;
    if hdot.abs() < 1e-10 {
        return Err(Error::Degenerate(format!("dh/ds = {hdot}: condition undefined")));
    }
    let r_prime = 2.0 / 3.0 * (stream.s + hdot);
    Ok(r_prime / hdot > 0.0)
}
