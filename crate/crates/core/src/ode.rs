//! Adaptive Dormand-Prince 5(4) integration for second-order radial ODEs,
//! with a fourth-order continuous extension used for dense output and for
//! locating sign changes of the solution.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1905.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 20_000_000;
const EVENT_SCAN: usize = 8;

type State = [f64; 2];

/// One accepted step with the data needed for dense evaluation on it.
#[derive(Debug, Clone)]
struct Segment {
    t0: f64,
    h: f64,
    // contd5 coefficients per component
    rcont: [[f64; 5]; 2],
}

impl Segment {
    fn eval(&self, t: f64) -> State {
        let theta = (t - self.t0) / self.h;
        let mut out = [0.0; 2];
        for c in 0..2 {
            let r = &self.rcont[c];
            out[c] = r[0] + theta * (r[1] + (1.0 - theta) * (r[2] + theta * (r[3] + (1.0 - theta) * r[4])));
        }
        out
    }
}

/// Dense trajectory of a second-order ODE written as `y = (u, u')`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t_start: f64,
    pub t_end: f64,
    segments: Vec<Segment>,
    /// Zeros of `u` strictly inside `(t_start, t_end)`, ascending.
    pub zeros: Vec<f64>,
    pub max_abs_u: f64,
    pub end_state: State,
}

impl Trajectory {
    /// Dense evaluation of `(u, u')` at `t` in `[t_start, t_end]`.
    pub fn eval(&self, t: f64) -> State {
        if t <= self.t_start {
            return self.segments[0].eval(self.t_start);
        }
        if t >= self.t_end {
            return self.end_state;
        }
        // last segment starting at or before t
        let i = self.segments.partition_point(|s| s.t0 <= t);
        self.segments[i.saturating_sub(1)].eval(t)
    }

    /// Sample `(u, u')` on `n + 1` uniform nodes spanning the trajectory.
    pub fn sample_uniform(&self, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut ts = Vec::with_capacity(n + 1);
        let mut us = Vec::with_capacity(n + 1);
        let mut vs = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let t = self.t_start + (self.t_end - self.t_start) * k as f64 / n as f64;
            let y = self.eval(t);
            ts.push(t);
            us.push(y[0]);
            vs.push(y[1]);
        }
        (ts, us, vs)
    }
}

/// Integrate `y' = f(t, y)` for a 2-component state from `t0` to `t1` with
/// mixed error control `atol + rtol * |y|`, recording dense output and the
/// zeros of the first component.
pub fn integrate<F>(
    f: F,
    t0: f64,
    t1: f64,
    y0: State,
    rtol: f64,
    atol: f64,
) -> Result<Trajectory>
where
    F: Fn(f64, &State) -> State,
{
    let span = t1 - t0;
    assert!(span > 0.0);
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);

    // initial step from the scale of f
    let sc0 = atol + rtol * y0[0].abs().max(y0[1].abs());
    let d1 = (k1[0].abs().max(k1[1].abs()) / sc0).max(1e-10);
    let mut h = (0.01 / d1).min(span / 10.0).max(span * 1e-10);

    let mut segments = Vec::new();
    let mut zeros = Vec::new();
    let mut max_abs_u = y0[0].abs();
    let mut steps = 0usize;

    while t < t1 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::Integrator {
                radius: t,
                reason: format!("step budget {MAX_STEPS} exhausted"),
            });
        }
        if h < 1e-14 * span {
            return Err(Error::Integrator {
                radius: t,
                reason: "step size underflow".into(),
            });
        }
        if t + h > t1 {
            h = t1 - t;
        }

        let add = |y: &State, c: &[(f64, &State)]| -> State {
            let mut out = *y;
            for &(a, k) in c {
                out[0] += h * a * k[0];
                out[1] += h * a * k[1];
            }
            out
        };
        let k2 = f(t + h / 5.0, &add(&y, &[(A21, &k1)]));
        let k3 = f(t + 3.0 * h / 10.0, &add(&y, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + 4.0 * h / 5.0, &add(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + 8.0 * h / 9.0,
            &add(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &add(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y1 = add(
            &y,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = f(t + h, &y1);

        let mut err: f64 = 0.0;
        for c in 0..2 {
            let e = h
                * (E1 * k1[c] + E3 * k3[c] + E4 * k4[c] + E5 * k5[c] + E6 * k6[c] + E7 * k7[c]);
            let sc = atol + rtol * y[c].abs().max(y1[c].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / 2.0).sqrt();

        if err <= 1.0 {
            // build dense coefficients
            let mut rcont = [[0.0; 5]; 2];
            for c in 0..2 {
                let ydiff = y1[c] - y[c];
                let bspl = h * k1[c] - ydiff;
                rcont[c][0] = y[c];
                rcont[c][1] = ydiff;
                rcont[c][2] = bspl;
                rcont[c][3] = ydiff - h * k7[c] - bspl;
                rcont[c][4] = h
                    * (D1 * k1[c] + D3 * k3[c] + D4 * k4[c] + D5 * k5[c] + D6 * k6[c]
                        + D7 * k7[c]);
            }
            let seg = Segment { t0: t, h, rcont };

            // locate zeros of u inside this step by scanning the interpolant
            let mut prev_t = t;
            let mut prev_u = y[0];
            for s in 1..=EVENT_SCAN {
                let ts = if s == EVENT_SCAN {
                    t + h
                } else {
                    t + h * s as f64 / EVENT_SCAN as f64
                };
                let us = if s == EVENT_SCAN { y1[0] } else { seg.eval(ts)[0] };
                if prev_u != 0.0 && us != 0.0 && prev_u.signum() != us.signum() {
                    // bisect the interpolant
                    let (mut lo, mut hi) = (prev_t, ts);
                    let mut flo = prev_u;
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        let fm = seg.eval(mid)[0];
                        if fm == 0.0 {
                            lo = mid;
                            hi = mid;
                            break;
                        }
                        if flo.signum() == fm.signum() {
                            lo = mid;
                            flo = fm;
                        } else {
                            hi = mid;
                        }
                    }
                    zeros.push(0.5 * (lo + hi));
                }
                if us != 0.0 {
                    prev_u = us;
                    prev_t = ts;
                }
            }

            max_abs_u = max_abs_u.max(y1[0].abs());
            // also account for interior extrema via scan samples
            for s in 1..EVENT_SCAN {
                let ts = t + h * s as f64 / EVENT_SCAN as f64;
                max_abs_u = max_abs_u.max(seg.eval(ts)[0].abs());
            }

            segments.push(seg);
            t += h;
            y = y1;
            k1 = k7; // first-same-as-last
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            h *= fac;
        } else {
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
        }
    }

    // keep only zeros strictly inside the open interval
    let eps = 1e-12 * span;
    zeros.retain(|&z| z > t0 + eps && z < t1 - eps);
    zeros.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * span);

    Ok(Trajectory {
        t_start: t0,
        t_end: t1,
        segments,
        zeros,
        max_abs_u,
        end_state: y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_harmonic_oscillator() {
        // u'' = -u with u(0) = 0, u'(0) = 1 -> sin(t)
        let f = |_t: f64, y: &State| [y[1], -y[0]];
        let traj = integrate(f, 0.0, 10.0, [0.0, 1.0], 1e-12, 1e-12).unwrap();
        for &t in &[0.5, 1.0, 2.5, 7.3, 10.0] {
            let y = traj.eval(t);
            assert!((y[0] - t.sin()).abs() < 1e-9, "u({t})");
            assert!((y[1] - t.cos()).abs() < 1e-9, "u'({t})");
        }
        // zeros at pi, 2pi, 3pi inside (0, 10)
        assert_eq!(traj.zeros.len(), 3);
        for (k, &z) in traj.zeros.iter().enumerate() {
            let expect = std::f64::consts::PI * (k + 1) as f64;
            assert!((z - expect).abs() < 1e-9, "zero {k}: {z}");
        }
    }

    #[test]
    fn dense_output_matches_exponential() {
        let f = |_t: f64, y: &State| [y[0], y[1]];
        let traj = integrate(f, 0.0, 3.0, [1.0, 1.0], 1e-12, 1e-12).unwrap();
        let (_, us, _) = traj.sample_uniform(64);
        for (k, &u) in us.iter().enumerate() {
            let t = 3.0 * k as f64 / 64.0;
            assert!((u - t.exp()).abs() / t.exp() < 1e-10);
        }
    }

    #[test]
    fn tightening_tolerance_converges() {
        let f = |t: f64, y: &State| [y[1], -y[0] / (1.0 + t * t)];
        let loose = integrate(f, 0.0, 5.0, [0.0, 1.0], 1e-8, 1e-8).unwrap();
        let tight = integrate(f, 0.0, 5.0, [0.0, 1.0], 1e-12, 1e-12).unwrap();
        assert!((loose.end_state[0] - tight.end_state[0]).abs() < 1e-7);
    }
}
