//! Angular eigenvalue combinatorics and spherical-harmonic evaluation.
//!
//! The angular part of the Laplacian on the unit sphere in dimension `N` has
//! eigenvalues `lambda_j = j (N - 2 + j)`. This module provides the exact
//! multiplicity of each eigenvalue, both in the full space and restricted to
//! the symmetry class of functions that are even and `2*pi/n`-periodic in the
//! azimuthal angle, together with the Gegenbauer/Legendre machinery needed to
//! evaluate the eigenfunctions themselves.
//!
//! All multiplicity arithmetic is exact integer arithmetic: the downstream
//! parity decisions must never depend on floating-point rounding.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Floor on `sin(theta)` for points entering the residual norm; keeps the
/// measurement away from the coordinate singularity so the reported residual
/// converges at second order under refinement.
const SIN_FLOOR: f64 = 0.1;

/// Binomial coefficient with the usual out-of-range convention `C(n,k) = 0`
/// for `k < 0`, `k > n` or `n < 0`.
pub fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn check_dim(dim: u32) -> Result<()> {
    if dim < 2 {
        return Err(Error::Domain(format!("dimension must be >= 2, got {dim}")));
    }
    Ok(())
}

/// Eigenvalue `lambda_j = j (N - 2 + j)` of the angular Laplacian on the unit
/// sphere in dimension `dim`, exact.
pub fn lb_eigenvalue(j: u32, dim: u32) -> Result<u64> {
    check_dim(dim)?;
    let j = j as u64;
    Ok(j * (dim as u64 - 2 + j))
}

/// Multiplicity of `lambda_j` in the full space, via the binomial difference
/// `C(N+j-1, N-1) - C(N+j-3, N-1)`.
pub fn mult_full(j: u32, dim: u32) -> Result<u64> {
    check_dim(dim)?;
    let n = dim as i64;
    let j = j as i64;
    let value = binomial(n + j - 1, n - 1) - binomial(n + j - 3, n - 1);
    Ok(value as u64)
}

/// Multiplicity of `lambda_j` via the closed factorial form
/// `(N + 2j - 2) (N + j - 3)! / ((N - 2)! j!)`.
///
/// Defined whenever `N + j >= 3`; the excluded case `(N, j) = (2, 0)` is a
/// single constant and is returned as 1 to match the binomial route.
pub fn mult_full_factorial(j: u32, dim: u32) -> Result<u64> {
    check_dim(dim)?;
    if dim == 2 && j == 0 {
        return Ok(1);
    }
    let n = dim as u128;
    let j = j as u128;
    let factorial = |m: u128| -> u128 { (1..=m).product::<u128>().max(1) };
    let num = (n + 2 * j - 2) * factorial(n + j - 3);
    let den = factorial(n - 2) * factorial(j);
    Ok((num / den) as u64)
}

/// Multiplicity of `lambda_j` restricted to the symmetry class of functions
/// even and `2*pi/n`-periodic in the azimuthal angle.
///
/// Only defined for `j <= n`: the parity analysis this feeds never inspects
/// larger modes, and the counting rules below are not claimed beyond that.
pub fn mult_sym(j: u32, sym_order: u32, dim: u32) -> Result<u64> {
    check_dim(dim)?;
    if sym_order < 1 {
        return Err(Error::Domain(format!(
            "symmetry order must be >= 1, got {sym_order}"
        )));
    }
    if j > sym_order {
        return Err(Error::Domain(format!(
            "mult_sym is only defined for j <= n, got j = {j}, n = {sym_order}"
        )));
    }
    if j == 0 {
        return Ok(1);
    }
    let n = dim as i64;
    Ok(match dim {
        2 => {
            if j == sym_order {
                1
            } else {
                0
            }
        }
        3 => {
            if j == sym_order {
                2
            } else {
                1
            }
        }
        _ => {
            let base = binomial(n + j as i64 - 3, n - 3) as u64;
            if j == sym_order {
                1 + base
            } else {
                base
            }
        }
    })
}

/// One angular eigenvalue with its multiplicities: the full-space count and
/// the per-symmetry-order counts for `n` up to `n_max`.
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicMode {
    pub dim: u32,
    pub j: u32,
    pub lambda: u64,
    pub mult_full: u64,
    /// Symmetric multiplicities for each admissible order `n >= max(1, j)`.
    pub mult_sym: BTreeMap<u32, u64>,
}

impl HarmonicMode {
    pub fn new(dim: u32, j: u32, n_max: u32) -> Result<Self> {
        let lambda = lb_eigenvalue(j, dim)?;
        let full = mult_full(j, dim)?;
        let mut sym = BTreeMap::new();
        for n in j.max(1)..=n_max {
            let s = mult_sym(j, n, dim)?;
            debug_assert!(s <= full);
            debug_assert!(j >= n || (full - s) % 2 == 0);
            sym.insert(n, s);
        }
        Ok(HarmonicMode {
            dim,
            j,
            lambda,
            mult_full: full,
            mult_sym: sym,
        })
    }
}

/// Gegenbauer-family polynomial `G_i^0(omega, k)` defined by the generating
/// function `(1 - 2 x omega + x^2)^{-(1+k)/2}`, i.e. the ultraspherical
/// polynomial with parameter `alpha = (1+k)/2`, evaluated by the three-term
/// recurrence.
fn gegenbauer_base(degree: u32, alpha: f64, omega: f64) -> f64 {
    if degree == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut curr = 2.0 * alpha * omega;
    for i in 2..=degree as u64 {
        let i = i as f64;
        let next = (2.0 * omega * (i + alpha - 1.0) * curr - (i + 2.0 * alpha - 2.0) * prev) / i;
        prev = curr;
        curr = next;
    }
    curr
}

/// Associated Gegenbauer value
/// `G_i^l(omega, k) = (1 - omega^2)^{l/2} d^l/d omega^l G_i^0(omega, k)`.
///
/// The derivative is taken analytically through the identity
/// `d/d omega C_i^alpha = 2 alpha C_{i-1}^{alpha+1}`, so no numerical
/// differentiation is involved. For `k = 0` this is the associated Legendre
/// function without the Condon-Shortley phase.
pub fn gegenbauer(degree: u32, order: u32, family: f64, omega: f64) -> Result<f64> {
    if order > degree {
        return Err(Error::Domain(format!(
            "order {order} exceeds degree {degree}"
        )));
    }
    if family < 0.0 {
        return Err(Error::Domain(format!(
            "family parameter must be >= 0, got {family}"
        )));
    }
    if !(-1.0..=1.0).contains(&omega) {
        return Err(Error::Domain(format!("omega must be in [-1, 1], got {omega}")));
    }
    let alpha = (1.0 + family) / 2.0;
    // 2^l * rising factorial (alpha)_l from l-fold differentiation.
    let mut factor = 1.0;
    for s in 0..order {
        factor *= 2.0 * (alpha + s as f64);
    }
    let envelope = (1.0 - omega * omega).powf(order as f64 / 2.0);
    Ok(envelope * factor * gegenbauer_base(degree - order, alpha + order as f64, omega))
}

/// One term of a spherical-harmonic expansion: an index chain
/// `l = i_0 <= i_1 <= ... <= i_{N-2} = j` with a cosine and a sine amplitude
/// for the azimuthal factor `cos(l phi)` / `sin(l phi)`.
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicCoeff {
    pub chain: Vec<u32>,
    pub cos_amp: f64,
    pub sin_amp: f64,
}

impl HarmonicCoeff {
    pub fn cosine(chain: Vec<u32>, amp: f64) -> Self {
        HarmonicCoeff {
            chain,
            cos_amp: amp,
            sin_amp: 0.0,
        }
    }
}

/// All admissible index chains for mode `j` in dimension `dim`, in
/// lexicographic order. Each chain has length `dim - 1` and ends at `j`.
pub fn harmonic_chains(dim: u32, j: u32) -> Vec<Vec<u32>> {
    fn fill(chain: &mut Vec<u32>, pos: usize, lower: u32, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == chain.len() {
            if lower <= chain[pos] {
                out.push(chain.clone());
            }
            return;
        }
        let upper = *chain.last().unwrap();
        for v in lower..=upper {
            chain[pos] = v;
            fill(chain, pos + 1, v, out);
        }
    }
    let len = (dim - 1) as usize;
    let mut out = Vec::new();
    let mut chain = vec![0u32; len];
    chain[len - 1] = j;
    if len == 1 {
        out.push(chain);
    } else {
        fill(&mut chain, 0, 0, &mut out);
    }
    out
}

/// Tensor grid of angular coordinates: `phi` uniform on `[0, 2*pi)` and each
/// polar angle uniform on the open interval `(0, pi)`.
#[derive(Debug, Clone, Serialize)]
pub struct AngularGrid {
    pub dim: u32,
    pub phi: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
}

impl AngularGrid {
    pub fn uniform(dim: u32, n_phi: usize, n_theta: usize) -> Result<Self> {
        check_dim(dim)?;
        if n_phi < 8 || (dim > 2 && n_theta < 8) {
            return Err(Error::Config(format!(
                "angular grid too coarse: need >= 8 points per dimension, got phi = {n_phi}, theta = {n_theta}"
            )));
        }
        let phi = (0..n_phi)
            .map(|t| 2.0 * std::f64::consts::PI * t as f64 / n_phi as f64)
            .collect();
        let h = std::f64::consts::PI / (n_theta + 1) as f64;
        let axis: Vec<f64> = (1..=n_theta).map(|s| h * s as f64).collect();
        let theta = vec![axis; (dim - 2) as usize];
        Ok(AngularGrid { dim, phi, theta })
    }

    fn point_count(&self) -> usize {
        self.phi.len() * self.theta.iter().map(Vec::len).product::<usize>()
    }
}

/// A scalar field sampled on an [`AngularGrid`], phi-major layout.
#[derive(Debug, Clone)]
pub struct AngularField {
    pub grid: AngularGrid,
    pub values: Vec<f64>,
}

impl AngularField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

fn validate_coeffs(dim: u32, j: u32, coeffs: &[HarmonicCoeff]) -> Result<()> {
    if coeffs.is_empty() {
        return Err(Error::Shape("empty coefficient table".into()));
    }
    for c in coeffs {
        if c.chain.len() != (dim - 1) as usize {
            return Err(Error::Shape(format!(
                "chain length {} does not match dimension {dim}",
                c.chain.len()
            )));
        }
        if *c.chain.last().unwrap() != j {
            return Err(Error::Shape(format!(
                "chain {:?} does not end at mode {j}",
                c.chain
            )));
        }
        if c.chain.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Shape(format!("chain {:?} is not nondecreasing", c.chain)));
        }
        if c.chain[0] == 0 && c.sin_amp != 0.0 {
            return Err(Error::Shape(
                "sine amplitude on an azimuth-independent term".into(),
            ));
        }
    }
    Ok(())
}

/// True iff a coefficient table describes a function in the symmetry class of
/// order `n`: every sine amplitude vanishes and every azimuthal index is a
/// multiple of `n`. Decided exactly from the coefficient pattern.
pub fn in_symmetry_class(coeffs: &[HarmonicCoeff], sym_order: u32) -> bool {
    coeffs
        .iter()
        .all(|c| c.sin_amp == 0.0 && c.chain[0] % sym_order == 0)
}

/// Sample the spherical harmonic of mode `j` described by `coeffs` on `grid`.
pub fn assemble_harmonic(
    dim: u32,
    j: u32,
    coeffs: &[HarmonicCoeff],
    grid: &AngularGrid,
) -> Result<AngularField> {
    check_dim(dim)?;
    if grid.dim != dim {
        return Err(Error::Shape(format!(
            "grid dimension {} does not match {dim}",
            grid.dim
        )));
    }
    validate_coeffs(dim, j, coeffs)?;

    let n_axes = (dim - 2) as usize;
    // Per-axis tables: g[axis][theta_index][(degree, order)] for the chain
    // links that actually occur. Axis k uses family parameter k.
    let mut needed: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n_axes];
    for c in coeffs {
        for (k, w) in c.chain.windows(2).enumerate() {
            if !needed[k].contains(&(w[1], w[0])) {
                needed[k].push((w[1], w[0]));
            }
        }
    }
    let mut tables: Vec<BTreeMap<(u32, u32), Vec<f64>>> = Vec::with_capacity(n_axes);
    for (k, axis_needed) in needed.iter().enumerate() {
        let mut table = BTreeMap::new();
        for &(deg, ord) in axis_needed {
            let vals: Result<Vec<f64>> = grid.theta[k]
                .iter()
                .map(|&t| gegenbauer(deg, ord, k as f64, t.cos()))
                .collect();
            table.insert((deg, ord), vals?);
        }
        tables.push(table);
    }

    let theta_sizes: Vec<usize> = grid.theta.iter().map(Vec::len).collect();
    let block: usize = theta_sizes.iter().product();
    let mut values = vec![0.0; grid.point_count()];
    let mut idx = vec![0usize; n_axes];
    for (t, &phi) in grid.phi.iter().enumerate() {
        for b in 0..block.max(1) {
            // decode multi-index
            let mut rem = b;
            for k in (0..n_axes).rev() {
                idx[k] = rem % theta_sizes[k];
                rem /= theta_sizes[k];
            }
            let mut acc = 0.0;
            for c in coeffs {
                let ell = c.chain[0] as f64;
                let mut term = c.cos_amp * (ell * phi).cos() + c.sin_amp * (ell * phi).sin();
                for (k, w) in c.chain.windows(2).enumerate() {
                    term *= tables[k][&(w[1], w[0])][idx[k]];
                }
                acc += term;
            }
            values[t * block.max(1) + b] = acc;
        }
    }
    Ok(AngularField {
        grid: grid.clone(),
        values,
    })
}

/// Tolerance against which assembled fields are judged by [`lb_residual`]:
/// the second-order stencil error scales like `(1 + lambda_j) h^2` on the
/// measured region (empirical constant).
pub fn grid_tolerance(grid: &AngularGrid, j: u32) -> f64 {
    let lambda = j as f64 * (grid.dim as f64 - 2.0 + j as f64);
    let h_phi = 2.0 * std::f64::consts::PI / grid.phi.len() as f64;
    let h_theta = grid
        .theta
        .iter()
        .map(|ax| std::f64::consts::PI / (ax.len() + 1) as f64)
        .fold(0.0, f64::max);
    2.0 * (1.0 + lambda) * h_phi.max(h_theta).powi(2)
}

/// Relative sup-norm residual of the angular eigenvalue equation,
/// `||Lap_sphere Y + lambda_j Y||_inf / ||Y||_inf`, measured with centered
/// differences on the interior of the grid (polar bands excluded).
pub fn lb_residual(field: &AngularField, j: u32, dim: u32) -> Result<f64> {
    check_dim(dim)?;
    let grid = &field.grid;
    if grid.dim != dim {
        return Err(Error::Shape("field/grid dimension mismatch".into()));
    }
    let n_phi = grid.phi.len();
    if n_phi < 8 || grid.theta.iter().any(|ax| ax.len() < 8) {
        return Err(Error::Config(
            "grid too coarse for the residual stencil (< 8 points per dimension)".into(),
        ));
    }
    let lambda = lb_eigenvalue(j, dim)? as f64;
    let max_abs = field.max_abs();
    if max_abs == 0.0 {
        return Err(Error::DegenerateProfile);
    }

    let n_axes = (dim - 2) as usize;
    let theta_sizes: Vec<usize> = grid.theta.iter().map(Vec::len).collect();
    let block: usize = theta_sizes.iter().product::<usize>().max(1);
    let h_phi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let at = |t: usize, b: usize| field.values[t * block + b];

    let mut worst = 0.0_f64;
    let mut idx = vec![0usize; n_axes];
    for t in 0..n_phi {
        let tp = (t + 1) % n_phi;
        let tm = (t + n_phi - 1) % n_phi;
        'points: for b in 0..block {
            let mut rem = b;
            for k in (0..n_axes).rev() {
                idx[k] = rem % theta_sizes[k];
                rem /= theta_sizes[k];
            }
            // need full stencils and distance from the poles
            let mut sins = Vec::with_capacity(n_axes);
            for k in 0..n_axes {
                if idx[k] == 0 || idx[k] + 1 == theta_sizes[k] {
                    continue 'points;
                }
                let s = grid.theta[k][idx[k]].sin();
                if s < SIN_FLOOR {
                    continue 'points;
                }
                sins.push(s);
            }
            // c_0 = prod 1/sin^2 theta_k
            let c0: f64 = sins.iter().map(|s| 1.0 / (s * s)).product();
            let d2phi = (at(tp, b) - 2.0 * at(t, b) + at(tm, b)) / (h_phi * h_phi);
            let mut lap = c0 * d2phi;
            for k in 0..n_axes {
                let axis = &grid.theta[k];
                let h = std::f64::consts::PI / (axis.len() + 1) as f64;
                let th = axis[idx[k]];
                let stride: usize = theta_sizes[k + 1..].iter().product();
                let bp = b + stride;
                let bm = b - stride;
                let sp = (th + h / 2.0).sin().powi(k as i32 + 1);
                let sm = (th - h / 2.0).sin().powi(k as i32 + 1);
                let flux =
                    (sp * (at(t, bp) - at(t, b)) - sm * (at(t, b) - at(t, bm))) / (h * h);
                // c_k = 1/sin^k theta_k * prod_{h>k} 1/sin^2 theta_h
                let mut ck = 1.0 / th.sin().powi(k as i32);
                for s in &sins[k + 1..] {
                    ck /= s * s;
                }
                lap += ck * flux;
            }
            let res = (lap + lambda * at(t, b)).abs();
            worst = worst.max(res);
        }
    }
    Ok(worst / max_abs)
}
