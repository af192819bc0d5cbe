//! Radial nodal solutions of `-Delta u = |u|^{p-1} u` on an annulus with zero
//! boundary data, computed by shooting from the inner radius.
//!
//! For every `p > 1` and zone count `m >= 1` there is a unique radial solution
//! with exactly `m` nodal zones whose first zone is positive; the solver
//! brackets its initial slope by a geometric sweep and refines by bisection on
//! the interior zero count.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{integrate, Trajectory};

/// The domain `{ a < |x| < b }` in dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
    pub dim: u32,
}

impl Annulus {
    pub fn new(inner: f64, outer: f64, dim: u32) -> Result<Self> {
        if !(inner.is_finite() && outer.is_finite()) || inner <= 0.0 || outer <= inner {
            return Err(Error::Domain(format!(
                "annulus radii must satisfy 0 < a < b, got a = {inner}, b = {outer}"
            )));
        }
        if dim < 2 {
            return Err(Error::Domain(format!("dimension must be >= 2, got {dim}")));
        }
        Ok(Annulus { inner, outer, dim })
    }

    pub fn width(&self) -> f64 {
        self.outer - self.inner
    }
}

/// Surface area of the unit sphere in `R^dim`.
pub fn sphere_area(dim: u32) -> f64 {
    // 2 pi^{N/2} / Gamma(N/2), with Gamma at integer and half-integer points
    let n = dim as i64;
    let pi = std::f64::consts::PI;
    let gamma_half = if n % 2 == 0 {
        // Gamma(k) = (k-1)!
        (1..n / 2).map(|i| i as f64).product::<f64>().max(1.0)
    } else {
        // Gamma(k + 1/2) = (2k)! sqrt(pi) / (4^k k!)
        let k = (n - 1) / 2;
        let mut acc = pi.sqrt();
        for i in 1..=k {
            acc *= (i as f64) - 0.5;
        }
        acc
    };
    2.0 * pi.powf(n as f64 / 2.0) / gamma_half
}

/// Solver options for the radial problem.
#[derive(Debug, Clone, Serialize)]
pub struct RadialConfig {
    /// Number of uniform output intervals (samples = grid_size + 1).
    pub grid_size: usize,
    /// Boundary tolerance, relative to `max |u|`.
    pub boundary_tol: f64,
    /// Relative tolerance of the adaptive integrator.
    pub integrator_rtol: f64,
    /// First slope of the geometric sweep.
    pub slope_start: f64,
    /// Sweep extent: slopes up to `slope_start * 2^max_doublings`.
    pub max_doublings: u32,
    pub max_bisections: u32,
}

impl Default for RadialConfig {
    fn default() -> Self {
        RadialConfig {
            grid_size: 2048,
            boundary_tol: 1e-10,
            integrator_rtol: 1e-12,
            slope_start: 1e-3,
            // Slopes grow like lambda^{1/(p-1)} as p -> 1, far beyond 2^60;
            // 2^240 covers every p representable for the tested zone counts.
            max_doublings: 240,
            max_bisections: 200,
        }
    }
}

/// Outcome of a single shot: trajectory samples, zero count and endpoint.
#[derive(Debug, Clone)]
pub struct ShotOutcome {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    pub interior_zeros: usize,
    pub endpoint: f64,
    pub max_abs: f64,
}

/// A converged radial nodal solution on a uniform grid.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub annulus: Annulus,
    pub p: f64,
    pub zones: usize,
    /// Shooting derivative `u'(a)`; positive iff the first zone is positive.
    pub slope: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    pub boundary_tol: f64,
    pub integrator_rtol: f64,
}

/// Serializable scalar header of a profile (the arrays go to CSV).
#[derive(Debug, Clone, Serialize)]
pub struct ProfileHeader {
    pub a: f64,
    pub b: f64,
    pub dim: u32,
    pub p: f64,
    pub m: usize,
    pub slope: f64,
    pub grid_size: usize,
    pub boundary_tol: f64,
    pub integrator_rtol: f64,
}

impl RadialProfile {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn header(&self) -> ProfileHeader {
        ProfileHeader {
            a: self.annulus.inner,
            b: self.annulus.outer,
            dim: self.annulus.dim,
            p: self.p,
            m: self.zones,
            slope: self.slope,
            grid_size: self.radii.len() - 1,
            boundary_tol: self.boundary_tol,
            integrator_rtol: self.integrator_rtol,
        }
    }

    /// CSV table with columns `r,u`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,u\n");
        for (r, u) in self.radii.iter().zip(&self.values) {
            out.push_str(&format!("{r},{u}\n"));
        }
        out
    }

    /// Re-shoot the stored slope onto a grid with `grid_size` intervals.
    pub fn resample(&self, grid_size: usize) -> Result<RadialProfile> {
        let traj = shoot_trajectory(
            &self.annulus,
            self.p,
            self.slope,
            self.integrator_rtol,
        )?;
        Ok(profile_from_trajectory(
            &traj, &self.annulus, self.p, self.zones, self.slope, grid_size,
            self.boundary_tol, self.integrator_rtol,
        ))
    }
}

fn shoot_trajectory(annulus: &Annulus, p: f64, slope: f64, rtol: f64) -> Result<Trajectory> {
    let coeff = (annulus.dim - 1) as f64;
    let rhs = move |r: f64, y: &[f64; 2]| -> [f64; 2] {
        let u = y[0];
        [y[1], -coeff / r * y[1] - u.abs().powf(p - 1.0) * u]
    };
    let scale = slope.abs().max(1.0) * annulus.width();
    integrate(
        rhs,
        annulus.inner,
        annulus.outer,
        [0.0, slope],
        rtol,
        rtol * scale,
    )
}

fn profile_from_trajectory(
    traj: &Trajectory,
    annulus: &Annulus,
    p: f64,
    zones: usize,
    slope: f64,
    grid_size: usize,
    boundary_tol: f64,
    integrator_rtol: f64,
) -> RadialProfile {
    let (radii, values, derivs) = traj.sample_uniform(grid_size);
    RadialProfile {
        annulus: *annulus,
        p,
        zones,
        slope,
        radii,
        values,
        derivs,
        boundary_tol,
        integrator_rtol,
    }
}

/// Integrate the radial equation from `u(a) = 0`, `u'(a) = slope` and report
/// the trajectory on a uniform output grid, the count of interior zeros and
/// the endpoint value `u(b)`.
pub fn shoot(annulus: &Annulus, p: f64, slope: f64, grid_size: usize) -> Result<ShotOutcome> {
    shoot_with_rtol(annulus, p, slope, grid_size, RadialConfig::default().integrator_rtol)
}

/// [`shoot`] with an explicit integrator tolerance.
pub fn shoot_with_rtol(
    annulus: &Annulus,
    p: f64,
    slope: f64,
    grid_size: usize,
    rtol: f64,
) -> Result<ShotOutcome> {
    if p <= 1.0 {
        return Err(Error::Domain(format!("exponent must exceed 1, got {p}")));
    }
    if slope <= 0.0 || !slope.is_finite() {
        return Err(Error::Domain(format!("slope must be positive, got {slope}")));
    }
    let traj = shoot_trajectory(annulus, p, slope, rtol)?;
    let (radii, values, derivs) = traj.sample_uniform(grid_size);
    Ok(ShotOutcome {
        radii,
        values,
        derivs,
        interior_zeros: traj.zeros.len(),
        endpoint: traj.end_state[0],
        max_abs: traj.max_abs_u,
    })
}

/// Compute the unique radial solution with `m` nodal zones, positive first
/// zone.
pub fn solve_radial(
    annulus: &Annulus,
    p: f64,
    zones: usize,
    config: &RadialConfig,
) -> Result<RadialProfile> {
    let traj = solve_radial_trajectory(annulus, p, zones, config)?;
    let profile = profile_from_trajectory(
        &traj.1, annulus, p, zones, traj.0, config.grid_size,
        config.boundary_tol, config.integrator_rtol,
    );
    debug_assert!(profile.values[0] == 0.0);
    Ok(profile)
}

/// As [`solve_radial`] but with the opposite sign normalization (negative
/// first zone). The equation is odd, so this is exactly the negated profile.
pub fn solve_radial_negative(
    annulus: &Annulus,
    p: f64,
    zones: usize,
    config: &RadialConfig,
) -> Result<RadialProfile> {
    let mut profile = solve_radial(annulus, p, zones, config)?;
    profile.slope = -profile.slope;
    for v in &mut profile.values {
        *v = -*v;
    }
    for v in &mut profile.derivs {
        *v = -*v;
    }
    Ok(profile)
}

fn solve_radial_trajectory(
    annulus: &Annulus,
    p: f64,
    zones: usize,
    config: &RadialConfig,
) -> Result<(f64, Trajectory)> {
    if p <= 1.0 {
        return Err(Error::Domain(format!("exponent must exceed 1, got {p}")));
    }
    if zones == 0 {
        return Err(Error::Domain("zone count must be >= 1".into()));
    }
    let rtol = config.integrator_rtol;
    let count = |traj: &Trajectory| traj.zeros.len();

    // Geometric sweep for a slope bracket: lo has < m transitions, hi has >= m.
    let mut lo = config.slope_start;
    let mut lo_traj = shoot_trajectory(annulus, p, lo, rtol)?;
    let mut lo_zeros = count(&lo_traj);
    let (mut hi, mut hi_zeros);
    if lo_zeros >= zones {
        // sweep downward instead
        let mut k = 0;
        loop {
            k += 1;
            if k > config.max_doublings {
                return Err(Error::SlopeSearch {
                    target_zones: zones,
                    slope_min: lo,
                    slope_max: config.slope_start,
                    zeros_min: lo_zeros,
                    zeros_max: lo_zeros,
                });
            }
            let d = config.slope_start / (2.0f64).powi(k);
            let traj = shoot_trajectory(annulus, p, d, rtol)?;
            let z = count(&traj);
            if z < zones {
                hi = lo;
                hi_zeros = lo_zeros;
                lo = d;
                lo_zeros = z;
                lo_traj = traj;
                break;
            }
            lo = d;
            lo_zeros = z;
            lo_traj = traj;
        }
    } else {
        let mut k = 0;
        loop {
            k += 1;
            if k > config.max_doublings {
                return Err(Error::SlopeSearch {
                    target_zones: zones,
                    slope_min: config.slope_start,
                    slope_max: lo,
                    zeros_min: count(&shoot_trajectory(annulus, p, config.slope_start, rtol)?),
                    zeros_max: lo_zeros,
                });
            }
            let d = config.slope_start * (2.0f64).powi(k);
            let traj = shoot_trajectory(annulus, p, d, rtol)?;
            let z = count(&traj);
            if z >= zones {
                hi = d;
                hi_zeros = z;
                break;
            }
            lo = d;
            lo_zeros = z;
            lo_traj = traj;
        }
    }
    let _ = (lo_zeros, hi_zeros);

    // Bisection on the zero-count transition, geometric midpoints.
    let tol = config.boundary_tol;
    let accept = |traj: &Trajectory| -> bool {
        count(traj) == zones - 1 && traj.end_state[0].abs() <= tol * traj.max_abs_u
    };
    if accept(&lo_traj) {
        return Ok((lo, lo_traj));
    }
    for _ in 0..config.max_bisections {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break; // slope interval exhausted at f64 resolution
        }
        let traj = shoot_trajectory(annulus, p, mid, rtol)?;
        let z = count(&traj);
        if z < zones {
            lo = mid;
            if accept(&traj) {
                return Ok((mid, traj));
            }
            lo_traj = traj;
        } else {
            hi = mid;
            if accept(&traj) {
                return Ok((mid, traj));
            }
        }
    }
    Err(Error::Convergence {
        what: format!("radial shooting bisection (m = {zones}, p = {p})"),
        iterations: config.max_bisections as usize,
        residual: lo_traj.end_state[0].abs() / lo_traj.max_abs_u,
    })
}

/// Count maximal constant-sign zones of sampled values, treating samples
/// below `threshold * max|u|` as zero. Noise below the threshold can neither
/// create nor destroy a zone.
pub fn count_sign_zones(values: &[f64], relative_threshold: f64) -> Result<usize> {
    let max_abs = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max_abs == 0.0 {
        return Err(Error::DegenerateProfile);
    }
    let floor = relative_threshold * max_abs;
    let mut zones = 0usize;
    let mut last_sign = 0i8;
    for &v in values {
        if v.abs() <= floor {
            continue;
        }
        let s = if v > 0.0 { 1i8 } else { -1i8 };
        if s != last_sign {
            zones += 1;
            last_sign = s;
        }
    }
    if zones == 0 {
        return Err(Error::DegenerateProfile);
    }
    Ok(zones)
}

/// Nodal zone count of a profile.
pub fn nodal_zones(profile: &RadialProfile) -> Result<usize> {
    count_sign_zones(&profile.values, profile.boundary_tol)
}

/// Dirichlet and potential integrals of a profile:
/// `(int |grad u|^2, int |u|^{p+1})` over the annulus, by trapezoidal
/// quadrature with the volume weight `r^{N-1}` and the sphere area factor.
pub fn energy_parts(profile: &RadialProfile) -> (f64, f64) {
    let n = profile.annulus.dim;
    let area = sphere_area(n);
    let h = profile.radii[1] - profile.radii[0];
    let mut grad = 0.0;
    let mut pot = 0.0;
    let last = profile.radii.len() - 1;
    for (k, &r) in profile.radii.iter().enumerate() {
        let w = if k == 0 || k == last { 0.5 } else { 1.0 };
        let weight = w * h * r.powi(n as i32 - 1);
        let du = profile.derivs[k];
        let u = profile.values[k];
        grad += weight * du * du;
        pot += weight * u.abs().powf(profile.p + 1.0);
    }
    (area * grad, area * pot)
}

/// Value of the variational functional
/// `F(u) = 1/2 int |grad u|^2 - 1/(p+1) int |u|^{p+1}`.
pub fn energy(profile: &RadialProfile) -> f64 {
    let (grad, pot) = energy_parts(profile);
    0.5 * grad - pot / (profile.p + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annulus2() -> Annulus {
        Annulus::new(1.0, 2.0, 2).unwrap()
    }

    #[test]
    fn annulus_validation() {
        assert!(Annulus::new(0.0, 2.0, 2).is_err());
        assert!(Annulus::new(2.0, 1.0, 2).is_err());
        assert!(Annulus::new(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn sphere_areas() {
        let pi = std::f64::consts::PI;
        assert!((sphere_area(2) - 2.0 * pi).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * pi).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * pi * pi).abs() < 1e-13);
    }

    #[test]
    fn tiny_slope_degenerates() {
        let a = annulus2();
        let shot = shoot(&a, 3.0, 1e-8, 64).unwrap();
        assert!(shot.max_abs < 1e-7);
        assert_eq!(shot.interior_zeros, 0);
        assert!(shot.endpoint.abs() < 1e-7);
    }

    #[test]
    fn shoot_rejects_bad_input() {
        let a = annulus2();
        assert!(shoot(&a, 3.0, 0.0, 64).is_err());
        assert!(shoot(&a, 3.0, -1.0, 64).is_err());
        assert!(shoot(&a, 0.5, 1.0, 64).is_err());
    }

    #[test]
    fn zero_count_nondecreasing_on_bracket() {
        // brute-force slope sweep across the first two transitions
        let a = annulus2();
        let mut last = 0;
        for k in 0..40 {
            let d = 0.5 * (1.6f64).powi(k);
            let z = shoot(&a, 3.0, d, 64).unwrap().interior_zeros;
            assert!(z >= last, "zero count dropped at slope {d}");
            last = z;
            if z >= 3 {
                break;
            }
        }
        assert!(last >= 3);
    }

    #[test]
    fn shoot_self_convergence() {
        let a = annulus2();
        let d = 7.25;
        let coarse = shoot_with_rtol(&a, 3.0, d, 64, 1e-10).unwrap();
        let fine = shoot_with_rtol(&a, 3.0, d, 64, 5e-11).unwrap();
        assert!((coarse.endpoint - fine.endpoint).abs() < 10.0 * 1e-10 * coarse.max_abs);
    }

    #[test]
    fn first_zone_profile() {
        let a = annulus2();
        let prof = solve_radial(&a, 3.0, 1, &RadialConfig::default()).unwrap();
        assert!(prof.slope > 0.0);
        assert_eq!(nodal_zones(&prof).unwrap(), 1);
        assert!(prof.values[1] > 0.0);
        assert!(prof.values[prof.values.len() - 1].abs() <= prof.boundary_tol * prof.max_abs());
        // interior positivity
        let interior_min = prof.values[8..prof.values.len() - 8]
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        assert!(interior_min > 0.0);
    }

    #[test]
    fn two_zone_profile_ordering() {
        let a = Annulus::new(1.0, 2.0, 3).unwrap();
        let prof = solve_radial(&a, 2.0, 2, &RadialConfig::default()).unwrap();
        assert_eq!(nodal_zones(&prof).unwrap(), 2);
        // positive then negative
        let first_neg = prof.values.iter().position(|&v| v < -1e-6 * prof.max_abs()).unwrap();
        assert!(prof.values[..first_neg]
            .iter()
            .all(|&v| v >= -prof.boundary_tol * prof.max_abs()));
    }

    #[test]
    fn slope_matches_tighter_oracle_to_six_digits() {
        let a = annulus2();
        let cfg = RadialConfig::default();
        let mut tight = cfg.clone();
        tight.integrator_rtol = cfg.integrator_rtol / 100.0;
        let p1 = solve_radial(&a, 3.0, 1, &cfg).unwrap();
        let p2 = solve_radial(&a, 3.0, 1, &tight).unwrap();
        let rel = (p1.slope - p2.slope).abs() / p2.slope.abs();
        assert!(rel < 1e-6, "slope relative difference {rel:e}");
        let rel_end =
            (p1.derivs.last().unwrap() - p2.derivs.last().unwrap()).abs() / p2.derivs.last().unwrap().abs();
        assert!(rel_end < 1e-6, "endpoint slope relative difference {rel_end:e}");
    }

    #[test]
    fn negation_gives_opposite_family() {
        let a = annulus2();
        let cfg = RadialConfig::default();
        let plus = solve_radial(&a, 3.0, 2, &cfg).unwrap();
        let minus = solve_radial_negative(&a, 3.0, 2, &cfg).unwrap();
        for (u, v) in plus.values.iter().zip(&minus.values) {
            assert_eq!(*u, -*v);
        }
    }

    #[test]
    fn energy_identity_and_value() {
        let a = annulus2();
        let prof = solve_radial(&a, 3.0, 1, &RadialConfig::default()).unwrap();
        let (grad, pot) = energy_parts(&prof);
        assert!((grad - pot).abs() / pot < 1e-4, "identity violation {}", (grad - pot).abs() / pot);
        let f = energy(&prof);
        let expect = (0.5 - 1.0 / (prof.p + 1.0)) * pot;
        assert!((f - expect).abs() / expect.abs() < 1e-3);
    }

    #[test]
    fn energy_second_order_refinement() {
        let a = annulus2();
        let mut cfg = RadialConfig::default();
        cfg.grid_size = 128;
        let coarse = energy(&solve_radial(&a, 3.0, 1, &cfg).unwrap());
        cfg.grid_size = 256;
        let mid = energy(&solve_radial(&a, 3.0, 1, &cfg).unwrap());
        cfg.grid_size = 512;
        let fine = energy(&solve_radial(&a, 3.0, 1, &cfg).unwrap());
        let ratio = (coarse - mid) / (mid - fine);
        assert!((2.5..6.0).contains(&ratio), "refinement ratio {ratio}");
    }

    #[test]
    fn ode_residual_second_order() {
        let a = annulus2();
        let mut cfg = RadialConfig::default();
        let mut errs = Vec::new();
        for &k in &[256usize, 512, 1024] {
            cfg.grid_size = k;
            let prof = solve_radial(&a, 3.0, 2, &cfg).unwrap();
            let h = prof.radii[1] - prof.radii[0];
            let mut worst = 0.0f64;
            for i in 1..prof.values.len() - 1 {
                let d2 = (prof.values[i + 1] - 2.0 * prof.values[i] + prof.values[i - 1]) / (h * h);
                let d1 = (prof.values[i + 1] - prof.values[i - 1]) / (2.0 * h);
                let u = prof.values[i];
                let res = -d2 - d1 / prof.radii[i] - u.abs().powf(prof.p - 1.0) * u;
                worst = worst.max(res.abs());
            }
            errs.push(worst / prof.max_abs());
        }
        let r1 = errs[0] / errs[1];
        let r2 = errs[1] / errs[2];
        assert!((3.0..5.0).contains(&r1), "ratio {r1}");
        assert!((3.0..5.0).contains(&r2), "ratio {r2}");
    }

    #[test]
    fn zone_counter_rejects_zero_profile() {
        assert!(count_sign_zones(&[0.0; 32], 1e-10).is_err());
    }

    #[test]
    fn determinism() {
        let a = annulus2();
        let cfg = RadialConfig::default();
        let p1 = solve_radial(&a, 5.0, 2, &cfg).unwrap();
        let p2 = solve_radial(&a, 5.0, 2, &cfg).unwrap();
        assert_eq!(p1.slope.to_bits(), p2.slope.to_bits());
        for (x, y) in p1.values.iter().zip(&p2.values) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
