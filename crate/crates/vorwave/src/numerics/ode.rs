//! Adaptive Dormand-Prince 5(4) integration with dense output.

use crate::error::{Error, Result};

/// Options controlling an adaptive integration run.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step size, used to force dense sampling.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-12, max_step: f64::INFINITY, max_steps: 1_000_000 }
    }
}

/// One accepted step: abscissa, state and state derivative.
#[derive(Debug, Clone, Copy)]
pub struct OdeSample<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

/// Dense solution of an initial value problem on `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    pub samples: Vec<OdeSample<N>>,
}

impl<const N: usize> OdeSolution<N> {
    pub fn last(&self) -> &OdeSample<N> {
        self.samples.last().expect("solution has at least the initial sample")
    }

    /// Cubic Hermite evaluation of component `k` at `t`.
    pub fn eval(&self, t: f64, k: usize) -> f64 {
        let (lo, hi, theta) = self.locate(t);
        let dt = hi.t - lo.t;
        if dt == 0.0 {
            return lo.y[k];
        }
        let (y0, y1, d0, d1) = (lo.y[k], hi.y[k], lo.dy[k] * dt, hi.dy[k] * dt);
        let t2 = theta * theta;
        let t3 = t2 * theta;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * (t3 - 2.0 * t2 + theta)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * (t3 - t2)
    }

    /// Derivative of component `k` at `t` from the same Hermite cubic.
    pub fn eval_derivative(&self, t: f64, k: usize) -> f64 {
        let (lo, hi, theta) = self.locate(t);
        let dt = hi.t - lo.t;
        if dt == 0.0 {
            return lo.dy[k];
        }
        let (y0, y1, d0, d1) = (lo.y[k], hi.y[k], lo.dy[k] * dt, hi.dy[k] * dt);
        let t2 = theta * theta;
        (y0 * (6.0 * t2 - 6.0 * theta)
            + d0 * (3.0 * t2 - 4.0 * theta + 1.0)
            + y1 * (6.0 * theta - 6.0 * t2)
            + d1 * (3.0 * t2 - 2.0 * theta))
            / dt
    }

    fn locate(&self, t: f64) -> (&OdeSample<N>, &OdeSample<N>, f64) {
        let s = &self.samples;
        let n = s.len();
        if n == 1 || t <= s[0].t {
            return (&s[0], &s[0], 0.0);
        }
        if t >= s[n - 1].t {
            return (&s[n - 1], &s[n - 1], 0.0);
        }
        let idx = s.partition_point(|p| p.t <= t).min(n - 1);
        let lo = &s[idx - 1];
        let hi = &s[idx];
        let theta = (t - lo.t) / (hi.t - lo.t);
        (lo, hi, theta)
    }
}

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] =
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const A7: [f64; 6] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1` (with `t1 > t0`),
/// recording every accepted step.
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    t1: f64,
    y0: [f64; N],
    opts: &OdeOptions,
) -> Result<OdeSolution<N>> {
    let span = t1 - t0;
    if span.is_nan() || span <= 0.0 {
        return Err(Error::Numeric(format!("empty or reversed integration span [{t0}, {t1}]")));
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut samples = Vec::with_capacity(128);
    samples.push(OdeSample { t, y, dy: k1 });

    let mut h = (span / 100.0).min(opts.max_step);
    let h_floor = span * 1e-15;
    let mut steps = 0usize;

    while t < t1 {
        let remaining = t1 - t;
        if remaining <= span * 1e-14 {
            break;
        }
        if steps >= opts.max_steps {
            return Err(Error::Integration {
                last_y: t,
                message: format!("step budget {} exhausted", opts.max_steps),
            });
        }
        steps += 1;
        h = h.min(remaining).min(opts.max_step);
        if h < h_floor && h < remaining {
            return Err(Error::Integration {
                last_y: t,
                message: "step size underflow".to_string(),
            });
        }

        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        k[1] = f(t + C[0] * h, &advance(&y, h, &[(A2[0], &k[0])]));
        k[2] = f(t + C[1] * h, &advance(&y, h, &[(A3[0], &k[0]), (A3[1], &k[1])]));
        k[3] = f(t + C[2] * h, &advance(&y, h, &[(A4[0], &k[0]), (A4[1], &k[1]), (A4[2], &k[2])]));
        k[4] = f(
            t + C[3] * h,
            &advance(&y, h, &[(A5[0], &k[0]), (A5[1], &k[1]), (A5[2], &k[2]), (A5[3], &k[3])]),
        );
        k[5] = f(
            t + C[4] * h,
            &advance(
                &y,
                h,
                &[(A6[0], &k[0]), (A6[1], &k[1]), (A6[2], &k[2]), (A6[3], &k[3]), (A6[4], &k[4])],
            ),
        );
        let y_new = advance(
            &y,
            h,
            &[
                (A7[0], &k[0]),
                (A7[2], &k[2]),
                (A7[3], &k[3]),
                (A7[4], &k[4]),
                (A7[5], &k[5]),
            ],
        );
        k[6] = f(t + h, &y_new);

        let mut err_norm = 0.0f64;
        for i in 0..N {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err_norm += (e / scale) * (e / scale);
        }
        err_norm = (err_norm / N as f64).sqrt();

        if err_norm <= 1.0 || h <= h_floor * 2.0 {
            t += h;
            y = y_new;
            k1 = k[6];
            samples.push(OdeSample { t, y, dy: k1 });
        }
        let factor = if err_norm > 0.0 { 0.9 * err_norm.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
    }

    Ok(OdeSolution { samples })
}

fn advance<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for &(w, k) in terms {
        for i in 0..N {
            out[i] += h * w * k[i];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let sol =
            integrate(|_, y: &[f64; 1]| [y[0]], 0.0, 1.0, [1.0], &OdeOptions::default()).unwrap();
        assert!((sol.last().y[0] - 1f64.exp()).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let sol = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            20.0,
            [0.0, 1.0],
            &OdeOptions::default(),
        )
        .unwrap();
        for s in &sol.samples {
            let energy = s.y[0] * s.y[0] + s.y[1] * s.y[1];
            assert!((energy - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn hermite_dense_output_matches_sine() {
        let opts = OdeOptions { max_step: 0.01, ..OdeOptions::default() };
        let sol = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, 3.0, [0.0, 1.0], &opts).unwrap();
        for i in 0..=300 {
            let t = 3.0 * i as f64 / 300.0;
            assert!((sol.eval(t, 0) - t.sin()).abs() < 1e-9);
            assert!((sol.eval_derivative(t, 0) - t.cos()).abs() < 1e-7);
        }
    }
}
