//! Rational approximation of the m-function remainder
//! `g(λ) = m(λ) ± √⁺(−λ)` in the variable `k = √⁺(−λ)`:
//!
//! ```text
//! g ≈ P(k)/Q(k) = Σₙ αₙ / (k + βₙ),   deg P + 1 = deg Q = d.
//! ```
//!
//! The fit minimizes a weighted discrete L² error along the contour
//! `λ = −f + iσ`. Each Sanathanan–Koerner sweep solves a linear problem in a
//! polynomial basis orthonormalized by an Arnoldi process on the sample
//! points, so no monomial Vandermonde matrix is ever formed.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mfunction::{m_contour, uniform_f_grid, ContourSample, RiccatiConfig, Side};
use crate::potential::Potential;
use crate::special::{principal_sqrt_neg, C64};

/// A sample `(k, g(k))` of the remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPoint {
    pub k: C64,
    pub g: C64,
}

/// Pole–residue approximation of one boundary's m-function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalDtN {
    pub side: Side,
    pub degree: usize,
    pub residues: Vec<C64>,
    pub poles: Vec<C64>,
    pub fit_error: f64,
    pub tolerance: f64,
    pub contour_sigma: f64,
    pub f_cutoff: f64,
    /// `fit_error ≤ tolerance` was reached.
    pub converged: bool,
    /// Poles with `Re β < 0`.
    pub unstable_poles: usize,
    /// Non-real poles without a conjugate partner.
    pub unpaired_poles: usize,
    /// `min (±Im m̃)` along the fitted contour; negative means the
    /// approximant is not Herglotz there.
    pub herglotz_min_im: f64,
}

impl RationalDtN {
    /// The free-space condition `∓√⁺(−λ)` with no poles.
    pub fn free(side: Side) -> Self {
        RationalDtN {
            side,
            degree: 0,
            residues: Vec::new(),
            poles: Vec::new(),
            fit_error: 0.0,
            tolerance: 0.0,
            contour_sigma: 1.0,
            f_cutoff: 0.0,
            converged: true,
            unstable_poles: 0,
            unpaired_poles: 0,
            herglotz_min_im: 0.0,
        }
    }

    /// Builds an approximant from explicit poles and residues.
    pub fn from_poles(side: Side, poles: Vec<C64>, residues: Vec<C64>) -> Result<Self> {
        if poles.len() != residues.len() {
            return Err(Error::invalid(
                "residues",
                format!("{} residues for {} poles", residues.len(), poles.len()),
            ));
        }
        let unstable_poles = poles.iter().filter(|b| b.re < 0.0).count();
        Ok(RationalDtN {
            degree: poles.len(),
            residues,
            poles,
            unstable_poles,
            ..Self::free(side)
        })
    }

    /// `Σ αₙ/(k + βₙ)`.
    pub fn remainder(&self, k: C64) -> Result<C64> {
        let mut sum = C64::new(0.0, 0.0);
        for (a, b) in self.residues.iter().zip(&self.poles) {
            let den = k + b;
            if den.norm() <= f64::MIN_POSITIVE {
                return Err(Error::Domain(format!("k = {k} hits the pole at −{b}")));
            }
            sum += a / den;
        }
        Ok(sum)
    }

    /// Recomputes the pole-location flags.
    fn refresh_flags(&mut self) {
        self.degree = self.poles.len();
        self.unstable_poles = self.poles.iter().filter(|b| b.re < 0.0).count();
    }
}

/// `m̃(λ) = ∓√⁺(−λ) + Σ αₙ/(√⁺(−λ) + βₙ)`.
pub fn eval_approx_m(r: &RationalDtN, lambda: C64) -> Result<C64> {
    if !(lambda.im > 0.0) {
        return Err(Error::Domain(format!("lambda = {lambda} is not in the upper half-plane")));
    }
    let k = principal_sqrt_neg(lambda);
    Ok(r.side.free_m(lambda) + r.remainder(k)?)
}

/// Remainder samples: `g = m + k` on the right, `g = m − k` on the left, so
/// that `g → 0` as `|λ| → ∞` on both sides.
pub fn g_values(samples: &[ContourSample]) -> Vec<FitPoint> {
    samples
        .iter()
        .map(|s| FitPoint {
            k: s.k,
            g: s.m_value + s.side.sign() * s.k,
        })
        .collect()
}

/// Quadrature measure used for the discrete fit error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourMeasure {
    /// `|d√⁺(−λ)|`
    Dk,
    /// `|dλ|`
    Dlambda,
}

/// Trapezoid weights of the chosen measure along an ordered contour.
pub fn contour_weights(samples: &[ContourSample], measure: ContourMeasure) -> Vec<f64> {
    let coord: Vec<C64> = match measure {
        ContourMeasure::Dk => samples.iter().map(|s| s.k).collect(),
        ContourMeasure::Dlambda => samples.iter().map(|s| s.lambda).collect(),
    };
    trapezoid_weights(&coord)
}

fn trapezoid_weights(coord: &[C64]) -> Vec<f64> {
    let n = coord.len();
    if n < 2 {
        return vec![1.0; n];
    }
    (0..n)
        .map(|j| {
            let left = if j > 0 { (coord[j] - coord[j - 1]).norm() } else { 0.0 };
            let right = if j + 1 < n { (coord[j + 1] - coord[j]).norm() } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Discrete fit error `(Σ wⱼ |r(kⱼ) − gⱼ|²)^{1/2}`.
pub fn discrete_error(points: &[FitPoint], weights: &[f64], r: impl Fn(C64) -> C64) -> f64 {
    points
        .iter()
        .zip(weights)
        .map(|(p, w)| w * (r(p.k) - p.g).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative change of the fit error that ends the iteration.
    pub tolerance: f64,
    /// Also fit the mirrored samples `(k̄, ḡ)`, which forces real polynomial
    /// coefficients and hence conjugate-paired poles.
    pub symmetric: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 20,
            tolerance: 1e-10,
            symmetric: false,
        }
    }
}

/// Result of a fixed-degree fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFit {
    pub poles: Vec<C64>,
    pub residues: Vec<C64>,
    pub fit_error: f64,
    pub iterations: usize,
    /// False when the iteration hit `max_iterations` before settling.
    pub settled: bool,
}

/// Polynomial basis orthonormal for a weighted discrete inner product,
/// with its Hessenberg recurrence `z qⱼ = Σ_{i≤j+1} H_{ij} qᵢ`.
struct ArnoldiBasis {
    /// Weighted values `rⱼ qᵢ(zⱼ)`, one column per degree.
    columns: DMatrix<C64>,
    hess: DMatrix<C64>,
    q0: C64,
}

impl ArnoldiBasis {
    fn new(z: &[C64], weights: &[f64], degree: usize) -> Result<Self> {
        let n = z.len();
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        let mut columns = DMatrix::<C64>::zeros(n, degree + 1);
        let mut hess = DMatrix::<C64>::zeros(degree + 1, degree.max(1));
        for j in 0..n {
            columns[(j, 0)] = C64::new(weights[j] / norm, 0.0);
        }
        for col in 0..degree {
            let mut v: DVector<C64> =
                DVector::from_iterator(n, (0..n).map(|j| z[j] * columns[(j, col)]));
            for _ in 0..2 {
                for i in 0..=col {
                    let qi = columns.column(i);
                    let h = qi.dotc(&v);
                    hess[(i, col)] += h;
                    v.axpy(-h, &qi, C64::new(1.0, 0.0));
                }
            }
            let h = v.norm();
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::RankDeficient { ratio: 0.0 });
            }
            hess[(col + 1, col)] = C64::new(h, 0.0);
            columns.set_column(col + 1, &(v / C64::new(h, 0.0)));
        }
        Ok(ArnoldiBasis {
            columns,
            hess,
            q0: C64::new(1.0 / norm, 0.0),
        })
    }

    /// `(qᵢ(z), qᵢ′(z))` for `i = 0..=degree`.
    fn eval(&self, z: C64, degree: usize) -> (Vec<C64>, Vec<C64>) {
        let mut q = vec![self.q0];
        let mut dq = vec![C64::new(0.0, 0.0)];
        for j in 0..degree {
            let mut v = z * q[j];
            let mut dv = q[j] + z * dq[j];
            for i in 0..=j {
                v -= self.hess[(i, j)] * q[i];
                dv -= self.hess[(i, j)] * dq[i];
            }
            let h = self.hess[(j + 1, j)];
            q.push(v / h);
            dq.push(dv / h);
        }
        (q, dq)
    }
}

/// Least-squares solve via SVD; `None` when the matrix is numerically zero.
fn lstsq(a: DMatrix<C64>, b: &DVector<C64>) -> Result<DVector<C64>> {
    if a.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::RankDeficient { ratio: f64::NAN });
    }
    let svd = a.try_svd(true, true, f64::EPSILON, 1000).ok_or(Error::Eigen)?;
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || !smax.is_finite() {
        return Err(Error::RankDeficient { ratio: 0.0 });
    }
    svd.solve(b, smax * 1e-14)
        .map_err(|_| Error::RankDeficient { ratio: svd.singular_values.min() / smax })
}

/// Eigenvalues of a small complex matrix after diagonal balancing.
fn eigenvalues(mut c: DMatrix<C64>) -> Result<Vec<C64>> {
    let n = c.nrows();
    if c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Eigen);
    }
    // Parlett–Reinsch balancing with powers of two.
    for _ in 0..100 {
        let mut done = true;
        for i in 0..n {
            let row: f64 = (0..n).filter(|&j| j != i).map(|j| c[(i, j)].norm()).sum();
            let col: f64 = (0..n).filter(|&j| j != i).map(|j| c[(j, i)].norm()).sum();
            if row == 0.0 || col == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let s = row + col;
            let (mut r, mut cl) = (row, col);
            while cl < r / 2.0 {
                cl *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while cl > r * 2.0 {
                cl /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if (r + cl) < 0.95 * s {
                done = false;
                for j in 0..n {
                    c[(i, j)] /= f;
                    c[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
    let schur = c.try_schur(f64::EPSILON, 10_000).ok_or(Error::Eigen)?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// Converts the numerator/denominator (in the Arnoldi basis, scaled
/// variable `z = k/scale`) into poles `β` and residues `α` of
/// `Σ α/(k + β)`.
fn pole_residue_from_basis(
    basis: &ArnoldiBasis,
    p_coef: &[C64],
    q_coef: &[C64],
    scale: f64,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let d = q_coef.len() - 1;
    if d == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let h = &basis.hess;
    let lead = q_coef[d];
    let mut c = DMatrix::<C64>::zeros(d, d);
    for j in 0..d {
        for i in 0..d.min(j + 2) {
            c[(j, i)] = h[(i, j)];
        }
    }
    for i in 0..d {
        c[(d - 1, i)] -= h[(d, d - 1)] * q_coef[i] / lead;
    }
    let mut roots = eigenvalues(c)?;
    // Newton polish on Q
    for z in roots.iter_mut() {
        for _ in 0..3 {
            let (q, dq) = basis.eval(*z, d);
            let qv: C64 = q.iter().zip(q_coef).map(|(a, b)| a * b).sum();
            let dqv: C64 = dq.iter().zip(q_coef).map(|(a, b)| a * b).sum();
            if dqv.norm() == 0.0 {
                break;
            }
            let step = qv / dqv;
            if !(step.norm() < 1e-6 * z.norm().max(1.0)) {
                break;
            }
            *z -= step;
        }
    }
    let rscale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut min_sep = f64::INFINITY;
    for a in 0..d {
        for b in a + 1..d {
            min_sep = min_sep.min((roots[a] - roots[b]).norm());
        }
    }
    if min_sep <= 1e-10 * rscale {
        return Err(Error::MultipleRoots {
            separation: min_sep * scale,
        });
    }
    let mut poles = Vec::with_capacity(d);
    let mut residues = Vec::with_capacity(d);
    for &z in &roots {
        let (q, dq) = basis.eval(z, d);
        let pv: C64 = q.iter().zip(p_coef).map(|(a, b)| a * b).sum();
        let dqv: C64 = dq.iter().zip(q_coef).map(|(a, b)| a * b).sum();
        poles.push(-z * scale);
        residues.push(pv / dqv * scale);
    }
    Ok((poles, residues))
}

/// Best residues for fixed poles (linear least squares).
fn refit_residues(points: &[FitPoint], weights: &[f64], poles: &[C64], symmetric: bool) -> Result<Vec<C64>> {
    let mut rows: Vec<(C64, C64, f64)> = points.iter().zip(weights).map(|(p, &w)| (p.k, p.g, w)).collect();
    if symmetric {
        rows.extend(points.iter().zip(weights).map(|(p, &w)| (p.k.conj(), p.g.conj(), w)));
    }
    let n = rows.len();
    let d = poles.len();
    let a = DMatrix::from_fn(n, d, |j, i| {
        let (k, _, w) = rows[j];
        C64::new(w.sqrt(), 0.0) / (k + poles[i])
    });
    let b = DVector::from_iterator(n, rows.iter().map(|&(_, g, w)| g * w.sqrt()));
    Ok(lstsq(a, &b)?.iter().copied().collect())
}

fn pole_residue_error(points: &[FitPoint], weights: &[f64], poles: &[C64], residues: &[C64]) -> f64 {
    discrete_error(points, weights, |k| {
        poles.iter().zip(residues).map(|(b, a)| a / (k + b)).sum()
    })
}

/// Fixed-degree fit `g ≈ P/Q`, `deg Q = d`, by Sanathanan–Koerner iteration.
pub fn fit_rational(points: &[FitPoint], degree: usize, weights: &[f64], opts: &FitOptions) -> Result<RationalFit> {
    if weights.len() != points.len() {
        return Err(Error::invalid("weights", "one weight per point is required"));
    }
    if points.len() < 2 * degree + 2 {
        return Err(Error::invalid(
            "points",
            format!("{} points cannot determine a degree-{degree} fit", points.len()),
        ));
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::invalid("weights", "must be positive"));
    }
    if degree == 0 {
        return Ok(RationalFit {
            poles: Vec::new(),
            residues: Vec::new(),
            fit_error: discrete_error(points, weights, |_| C64::new(0.0, 0.0)),
            iterations: 0,
            settled: true,
        });
    }

    let mut ks: Vec<C64> = points.iter().map(|p| p.k).collect();
    let mut gs: Vec<C64> = points.iter().map(|p| p.g).collect();
    let mut ws: Vec<f64> = weights.to_vec();
    if opts.symmetric {
        ks.extend(points.iter().map(|p| p.k.conj()));
        gs.extend(points.iter().map(|p| p.g.conj()));
        ws.extend_from_slice(weights);
    }
    let n = ks.len();
    let scale = ks.iter().map(|k| k.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let z: Vec<C64> = ks.iter().map(|k| k / scale).collect();

    let mut q_prev = vec![C64::new(1.0, 0.0); n];
    let mut best: Option<RationalFit> = None;
    let mut last_err = f64::INFINITY;
    let mut settled = false;
    let mut iterations = 0;
    for it in 0..opts.max_iterations.max(1) {
        iterations = it + 1;
        let r: Vec<f64> = ws.iter().zip(&q_prev).map(|(w, q)| w.sqrt() / q.norm()).collect();
        if r.iter().any(|v| !v.is_finite()) {
            break;
        }
        let basis = ArnoldiBasis::new(&z, &r, degree)?;
        let phi = &basis.columns;
        let phi_p = phi.columns(0, degree);
        let g = DVector::from_column_slice(&gs);

        // residual (I − Φ_P Φ_P^H) G (Φ_Q b + φ_d), minimized over b
        let project = |v: DVector<C64>| {
            let c = phi_p.ad_mul(&v);
            v - &phi_p * c
        };
        let mut a = DMatrix::<C64>::zeros(n, degree);
        for i in 0..degree {
            let col = phi.column(i).component_mul(&g);
            a.set_column(i, &project(col));
        }
        let rhs = -project(phi.column(degree).component_mul(&g));
        let b = lstsq(a, &rhs)?;
        let mut q_coef: Vec<C64> = b.iter().copied().collect();
        q_coef.push(C64::new(1.0, 0.0));
        let qv: DVector<C64> = phi * DVector::from_column_slice(&q_coef);
        let p_coef: Vec<C64> = phi_p.ad_mul(&qv.component_mul(&g)).iter().copied().collect();

        let (poles, residues) = match pole_residue_from_basis(&basis, &p_coef, &q_coef, scale) {
            Ok(pr) => pr,
            Err(e) => match best {
                Some(b) => return Ok(RationalFit { settled: false, ..b }),
                None => return Err(e),
            },
        };
        let residues = refit_residues(points, weights, &poles, opts.symmetric).unwrap_or(residues);
        let err = pole_residue_error(points, weights, &poles, &residues);

        if best.as_ref().is_none_or(|b| err < b.fit_error) {
            best = Some(RationalFit {
                poles,
                residues,
                fit_error: err,
                iterations,
                settled: false,
            });
        }
        // unweighted denominator values for the next sweep, normalized
        let new_q: Vec<C64> = (0..n).map(|j| qv[j] / r[j]).collect();
        let rms = (new_q.iter().map(|q| q.norm_sqr()).sum::<f64>() / n as f64).sqrt();
        if !(rms > 0.0) || !rms.is_finite() {
            break;
        }
        q_prev = new_q.iter().map(|q| q / rms).collect();
        if (last_err - err).abs() <= opts.tolerance * err.max(f64::MIN_POSITIVE) {
            settled = true;
            break;
        }
        last_err = err;
    }
    let mut fit = best.ok_or(Error::RankDeficient { ratio: f64::NAN })?;
    fit.iterations = iterations;
    fit.settled = settled;
    if !settled {
        log::warn!(
            "rational fit of degree {degree} did not settle in {} sweeps (error {:e})",
            opts.max_iterations,
            fit.fit_error
        );
    }
    Ok(fit)
}

/// Pole–residue form of `P/Q` with `Q` monic, both given by monomial
/// coefficients in ascending order.
pub fn pole_residue(p: &[C64], q: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    let d = q.len().saturating_sub(1);
    if d == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    if p.len() > d {
        return Err(Error::invalid("P", "numerator degree must be below the denominator's"));
    }
    let lead = q[d];
    if lead.norm() == 0.0 {
        return Err(Error::invalid("Q", "leading coefficient is zero"));
    }
    // companion matrix of the monic Q
    let mut c = DMatrix::<C64>::zeros(d, d);
    for i in 1..d {
        c[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..d {
        c[(i, d - 1)] = -q[i] / lead;
    }
    let roots = eigenvalues(c)?;
    let rscale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for a in 0..d {
        for b in a + 1..d {
            let sep = (roots[a] - roots[b]).norm();
            if sep <= 1e-10 * rscale {
                return Err(Error::MultipleRoots { separation: sep });
            }
        }
    }
    let horner = |c: &[C64], z: C64| c.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * z + a);
    let dq: Vec<C64> = (1..=d).map(|i| q[i] * i as f64).collect();
    let residues = roots.iter().map(|&z| horner(p, z) / horner(&dq, z)).collect();
    Ok((roots.iter().map(|z| -z).collect(), residues))
}

/// Pairs each non-real pole with its closest conjugate and symmetrizes the
/// pair; near-real poles are snapped to the real axis.
pub fn enforce_conjugate_pairs(r: &RationalDtN) -> RationalDtN {
    const REAL_TOL: f64 = 1e-8;
    const PAIR_TOL: f64 = 1e-6;
    let d = r.poles.len();
    let mut poles = r.poles.clone();
    let mut residues = r.residues.clone();
    let mut done = vec![false; d];
    let mut unpaired = 0;
    for i in 0..d {
        if done[i] {
            continue;
        }
        let b = poles[i];
        let tol = b.norm().max(1.0);
        if b.im.abs() <= REAL_TOL * tol {
            poles[i].im = 0.0;
            // a real pole of a real-coefficient fit carries a real residue
            if residues[i].im.abs() <= PAIR_TOL * residues[i].norm().max(1.0) {
                residues[i].im = 0.0;
            }
            done[i] = true;
            continue;
        }
        let partner = (0..d)
            .filter(|&j| j != i && !done[j])
            .min_by(|&x, &y| {
                let dx = (poles[x] - b.conj()).norm();
                let dy = (poles[y] - b.conj()).norm();
                dx.partial_cmp(&dy).unwrap()
            });
        match partner {
            Some(j) if (poles[j] - b.conj()).norm() <= PAIR_TOL * tol => {
                let beta = 0.5 * (b + poles[j].conj());
                let alpha = 0.5 * (residues[i] + residues[j].conj());
                poles[i] = beta;
                poles[j] = beta.conj();
                residues[i] = alpha;
                residues[j] = alpha.conj();
                done[i] = true;
                done[j] = true;
            }
            _ => {
                unpaired += 1;
                done[i] = true;
            }
        }
    }
    let mut out = RationalDtN {
        poles,
        residues,
        unpaired_poles: unpaired,
        ..r.clone()
    };
    out.refresh_flags();
    out
}

/// Contour and tolerance settings for fitting a boundary's m-function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub eps0: f64,
    pub d_max: usize,
    pub contour_points: usize,
    pub contour_sigma: f64,
    pub f_cutoff: f64,
    pub measure: ContourMeasure,
    pub symmetric: bool,
    pub max_iterations: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            eps0: 1e-8,
            d_max: 40,
            contour_points: 513,
            contour_sigma: 1.0,
            f_cutoff: 256.0,
            measure: ContourMeasure::Dk,
            symmetric: false,
            max_iterations: 20,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 > 0.0) {
            return Err(Error::invalid("eps0", "must be > 0"));
        }
        if !(self.contour_sigma > 0.0) {
            return Err(Error::invalid("contour_sigma", "must be > 0"));
        }
        if !(self.f_cutoff > 0.0) {
            return Err(Error::invalid("f_cutoff", "must be > 0"));
        }
        if self.contour_points < 2 * self.d_max + 2 {
            return Err(Error::invalid(
                "contour_points",
                format!("need at least {} points for d_max = {}", 2 * self.d_max + 2, self.d_max),
            ));
        }
        Ok(())
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            max_iterations: self.max_iterations,
            symmetric: self.symmetric,
            ..FitOptions::default()
        }
    }
}

/// Raises the degree until the fit error drops to `eps0`.
///
/// Returns the first degree that succeeds, or the best attempt with
/// `converged = false` when none up to `d_max` does.
pub fn auto_degree(
    samples: &[ContourSample],
    measure: ContourMeasure,
    eps0: f64,
    d_max: usize,
    opts: &FitOptions,
) -> Result<RationalDtN> {
    if !(eps0 > 0.0) {
        return Err(Error::invalid("eps0", "must be > 0"));
    }
    let side = samples.first().map(|s| s.side).ok_or_else(|| Error::invalid("samples", "empty contour"))?;
    if samples.iter().any(|s| s.side != side) {
        return Err(Error::invalid("samples", "mixed boundary sides"));
    }
    let points = g_values(samples);
    let weights = contour_weights(samples, measure);
    let sigma = samples[0].lambda.im;
    let f_cutoff = samples.iter().map(|s| s.lambda.re.abs()).fold(0.0, f64::max);
    let lambdas: Vec<C64> = samples.iter().map(|s| s.lambda).collect();

    let mut best: Option<RationalDtN> = None;
    let d_top = d_max.min(points.len().saturating_sub(2) / 2);
    for d in 0..=d_top {
        let fit = match fit_rational(&points, d, &weights, opts) {
            Ok(f) => f,
            Err(e) => {
                log::debug!("degree {d} fit failed: {e}");
                continue;
            }
        };
        let raw = RationalDtN {
            side,
            degree: d,
            residues: fit.residues,
            poles: fit.poles,
            fit_error: fit.fit_error,
            tolerance: eps0,
            contour_sigma: sigma,
            f_cutoff,
            converged: false,
            unstable_poles: 0,
            unpaired_poles: 0,
            herglotz_min_im: 0.0,
        };
        let mut cand = enforce_conjugate_pairs(&raw);
        cand.fit_error = pole_residue_error(&points, &weights, &cand.poles, &cand.residues);
        if cand.fit_error > raw.fit_error * (1.0 + 1e-6) + 1e-300 {
            // pairing hurt the fit; keep the unsymmetrized poles
            cand = RationalDtN {
                unpaired_poles: cand.unpaired_poles,
                ..raw
            };
            cand.refresh_flags();
        }
        cand.herglotz_min_im = herglotz_min(&cand, &lambdas);
        if cand.fit_error <= eps0 {
            cand.converged = true;
            if cand.unstable_poles > 0 {
                log::warn!("{} fit has {} poles with Re β < 0", side.name(), cand.unstable_poles);
            }
            return Ok(cand);
        }
        if best.as_ref().is_none_or(|b| cand.fit_error < b.fit_error) {
            best = Some(cand);
        }
    }
    let best = best.ok_or_else(|| Error::invalid("samples", "no degree could be fitted"))?;
    log::warn!(
        "{} fit reached error {:e} > tolerance {eps0:e} with d_max = {d_max}",
        side.name(),
        best.fit_error
    );
    Ok(best)
}

fn herglotz_min(r: &RationalDtN, lambdas: &[C64]) -> f64 {
    lambdas
        .iter()
        .filter_map(|&l| eval_approx_m(r, l).ok())
        .map(|m| r.side.sign() * m.im)
        .fold(f64::INFINITY, f64::min)
}

/// Samples the m-function of `potential` at `x_b` and fits it.
pub fn fit_boundary(
    potential: &Potential,
    x_b: f64,
    side: Side,
    fit: &FitConfig,
    riccati: &RiccatiConfig,
) -> Result<RationalDtN> {
    fit.validate()?;
    let f = uniform_f_grid(fit.f_cutoff, fit.contour_points);
    let samples = m_contour(potential, x_b, side, fit.contour_sigma, &f, riccati)?;
    let mut r = auto_degree(&samples, fit.measure, fit.eps0, fit.d_max, &fit.fit_options())?;
    r.f_cutoff = fit.f_cutoff;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mfunction::m_bargmann;

    fn contour(sigma: f64, fc: f64, n: usize) -> Vec<C64> {
        uniform_f_grid(fc, n).iter().map(|&f| C64::new(-f, sigma)).collect()
    }

    fn synthetic(side: Side, lambdas: &[C64], poles: &[C64], residues: &[C64]) -> Vec<ContourSample> {
        lambdas
            .iter()
            .map(|&lambda| {
                let k = principal_sqrt_neg(lambda);
                let g: C64 = poles.iter().zip(residues).map(|(b, a)| a / (k + b)).sum();
                ContourSample {
                    lambda,
                    k,
                    m_value: side.free_m(lambda) + g,
                    side,
                }
            })
            .collect()
    }

    #[test]
    fn single_pole_recovered() {
        let s = synthetic(Side::Right, &contour(1.0, 256.0, 201), &[C64::new(1.0, 0.0)], &[C64::new(1.0, 0.0)]);
        let pts = g_values(&s);
        let w = contour_weights(&s, ContourMeasure::Dk);
        let fit = fit_rational(&pts, 1, &w, &FitOptions::default()).unwrap();
        assert!((fit.poles[0] - 1.0).norm() < 1e-10);
        assert!((fit.residues[0] - 1.0).norm() < 1e-10);
        assert!(fit.fit_error <= 1e-10);
    }

    #[test]
    fn bargmann_pole_recovered() {
        for (beta, gamma) in [(1.0, 0.0), (1.0, 2.0), (2.0, 0.5)] {
            let lambdas = contour(1.0, 256.0, 513);
            let s: Vec<ContourSample> = lambdas
                .iter()
                .map(|&lambda| ContourSample {
                    lambda,
                    k: principal_sqrt_neg(lambda),
                    m_value: m_bargmann(beta, gamma, lambda),
                    side: Side::Right,
                })
                .collect();
            let pts = g_values(&s);
            for (p, l) in pts.iter().zip(&lambdas) {
                let k = principal_sqrt_neg(*l);
                assert!((p.g + (gamma * gamma - beta * beta) / (k + gamma)).norm() <= 1e-12);
            }
            let w = contour_weights(&s, ContourMeasure::Dk);
            let fit = fit_rational(&pts, 1, &w, &FitOptions::default()).unwrap();
            assert!((fit.residues[0] - (beta * beta - gamma * gamma)).norm() <= 1e-8, "{fit:?}");
            assert!((fit.poles[0] - gamma).norm() <= 1e-8);
        }
    }

    #[test]
    fn zero_remainder_needs_no_poles() {
        let s = synthetic(Side::Left, &contour(1.0, 64.0, 101), &[], &[]);
        let pts = g_values(&s);
        assert!(pts.iter().all(|p| p.g.norm() == 0.0));
        let w = contour_weights(&s, ContourMeasure::Dk);
        let fit = fit_rational(&pts, 0, &w, &FitOptions::default()).unwrap();
        assert!(fit.poles.is_empty());
        assert_eq!(fit.fit_error, 0.0);
        let r = auto_degree(&s, ContourMeasure::Dk, 1e-8, 10, &FitOptions::default()).unwrap();
        assert_eq!(r.degree, 0);
        assert!(r.converged);
    }

    #[test]
    fn too_few_points_rejected() {
        let s = synthetic(Side::Right, &contour(1.0, 10.0, 5), &[C64::new(1.0, 0.0)], &[C64::new(1.0, 0.0)]);
        let pts = g_values(&s);
        let w = vec![1.0; 5];
        assert!(fit_rational(&pts, 2, &w, &FitOptions::default()).is_err());
    }

    #[test]
    fn pole_residue_examples() {
        let one = C64::new(1.0, 0.0);
        let (b, a) = pole_residue(&[one], &[one, one]).unwrap();
        assert!((b[0] - 1.0).norm() < 1e-14 && (a[0] - 1.0).norm() < 1e-14);

        let (b, a) = pole_residue(&[C64::new(0.0, 0.0), C64::new(2.0, 0.0)], &[C64::new(2.0, 0.0), C64::new(3.0, 0.0), one]).unwrap();
        let mut pairs: Vec<(f64, f64)> = b.iter().zip(&a).map(|(b, a)| (b.re, a.re)).collect();
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        assert!((pairs[0].0 - 1.0).abs() < 1e-12 && (pairs[0].1 + 2.0).abs() < 1e-12);
        assert!((pairs[1].0 - 2.0).abs() < 1e-12 && (pairs[1].1 - 4.0).abs() < 1e-12);
        // P(0)/Q(0) = 0
        let at0: f64 = pairs.iter().map(|(b, a)| a / b).sum();
        assert!(at0.abs() < 1e-12);

        let (b, a) = pole_residue(&[], &[one]).unwrap();
        assert!(b.is_empty() && a.is_empty());

        // (k+1)² has a double root
        assert!(matches!(
            pole_residue(&[one], &[one, C64::new(2.0, 0.0), one]),
            Err(Error::MultipleRoots { .. })
        ));
    }

    #[test]
    fn approx_m_examples() {
        let lam = C64::new(0.0, 1.0);
        let e = C64::new(std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2);
        let free = RationalDtN::free(Side::Right);
        assert!((eval_approx_m(&free, lam).unwrap() + e).norm() < 1e-15);
        let one = RationalDtN::from_poles(Side::Right, vec![C64::new(1.0, 0.0)], vec![C64::new(1.0, 0.0)]).unwrap();
        let expect = -e + 1.0 / (e + 1.0);
        assert!((eval_approx_m(&one, lam).unwrap() - expect).norm() < 1e-15);
        let left = RationalDtN::free(Side::Left);
        assert!((eval_approx_m(&left, lam).unwrap() - e).norm() < 1e-15);
        assert!(eval_approx_m(&free, C64::new(1.0, -1.0)).is_err());
        // k = e^{-iπ/4} hits the pole at β = −k
        let hit = RationalDtN::from_poles(Side::Right, vec![-e], vec![C64::new(1.0, 0.0)]).unwrap();
        assert!(matches!(eval_approx_m(&hit, lam), Err(Error::Domain(_))));
    }

    #[test]
    fn conjugate_pairing() {
        let one = C64::new(1.0, 0.0);
        let r = RationalDtN::from_poles(
            Side::Right,
            vec![C64::new(1.0, 1.0), C64::new(1.0, -1.0 + 1e-9)],
            vec![C64::new(2.0, 0.5), C64::new(2.0, -0.5)],
        )
        .unwrap();
        let p = enforce_conjugate_pairs(&r);
        assert_eq!(p.poles[0], p.poles[1].conj());
        assert_eq!(p.residues[0], p.residues[1].conj());
        assert_eq!(p.unpaired_poles, 0);

        let real = RationalDtN::from_poles(Side::Right, vec![one, C64::new(3.0, 0.0)], vec![one, -one]).unwrap();
        assert_eq!(enforce_conjugate_pairs(&real), real);

        let lonely = RationalDtN::from_poles(Side::Right, vec![C64::new(1.0, 1.0)], vec![one]).unwrap();
        let p = enforce_conjugate_pairs(&lonely);
        assert_eq!(p.unpaired_poles, 1);
        assert_eq!(p.poles, lonely.poles);
    }

    #[test]
    fn approximant_tends_to_free_condition() {
        let r = RationalDtN::from_poles(Side::Left, vec![C64::new(2.0, 1.0), C64::new(2.0, -1.0)], vec![C64::new(1.0, 3.0), C64::new(1.0, -3.0)]).unwrap();
        let mut last = f64::INFINITY;
        for f in [-1e2, -1e4, -1e6, -1e8] {
            let lam = C64::new(-f, 1.0);
            let diff = (eval_approx_m(&r, lam).unwrap() - Side::Left.free_m(lam)).norm();
            assert!(diff < last);
            last = diff;
        }
        assert!(last < 1e-3);
    }

    fn coulomb_samples(n: usize) -> Vec<ContourSample> {
        let v = Potential::CoulombLike;
        let f = uniform_f_grid(256.0, n);
        m_contour(&v, 5.0, Side::Right, 1.0, &f, &RiccatiConfig::default()).unwrap()
    }

    #[test]
    fn degree_is_monotone_on_fixed_points() {
        let s = coulomb_samples(201);
        let pts = g_values(&s);
        let w = contour_weights(&s, ContourMeasure::Dk);
        let mut last = f64::INFINITY;
        for d in 0..=6 {
            let fit = fit_rational(&pts, d, &w, &FitOptions::default()).unwrap();
            assert!(fit.fit_error <= last + 1e-12, "d = {d}: {} > {last}", fit.fit_error);
            last = fit.fit_error;
        }
    }

    #[test]
    fn converged_fit_is_a_local_minimum() {
        use rand::{Rng, SeedableRng};
        let s = coulomb_samples(201);
        let pts = g_values(&s);
        let w = contour_weights(&s, ContourMeasure::Dk);
        let r = auto_degree(&s, ContourMeasure::Dk, 1e-8, 12, &FitOptions::default()).unwrap();
        assert!(r.converged && r.degree > 0);
        let eps = discrete_error(&pts, &w, |k| r.remainder(k).unwrap());
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..40 {
            let mut q = r.clone();
            let n = rng.gen_range(0..q.degree);
            let scale = if rng.gen_bool(0.5) { 1.01 } else { 0.99 };
            if rng.gen_bool(0.5) {
                q.residues[n] *= scale;
            } else {
                q.poles[n] *= scale;
            }
            assert!(discrete_error(&pts, &w, |k| q.remainder(k).unwrap()) >= eps);
        }
    }

    #[test]
    fn symmetric_coulomb_fit_pairs_poles() {
        let s = coulomb_samples(201);
        let opts = FitOptions { symmetric: true, ..FitOptions::default() };
        let r = auto_degree(&s, ContourMeasure::Dk, 1e-8, 12, &opts).unwrap();
        assert!(r.converged);
        assert!((2..=6).contains(&r.degree), "degree {}", r.degree);
        assert_eq!(r.unpaired_poles, 0);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(25))]
        #[test]
        fn three_poles_recovered(
            b in proptest::collection::vec((0.1f64..4.0, -3.0f64..3.0), 3),
            a in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3),
        ) {
            let poles: Vec<C64> = b.iter().map(|&(re, im)| C64::new(re, im)).collect();
            let residues: Vec<C64> = a.iter().map(|&(re, im)| C64::new(re, im)).collect();
            for i in 0..3 {
                proptest::prop_assume!(residues[i].norm() > 0.1);
                for j in 0..i {
                    proptest::prop_assume!((poles[i] - poles[j]).norm() > 0.1);
                }
            }
            let s = synthetic(Side::Right, &contour(1.0, 256.0, 200), &poles, &residues);
            let pts = g_values(&s);
            let w = contour_weights(&s, ContourMeasure::Dk);
            let fit = fit_rational(&pts, 3, &w, &FitOptions::default()).unwrap();
            for (p, r) in poles.iter().zip(&residues) {
                let n = (0..3)
                    .min_by(|&i, &j| (fit.poles[i] - p).norm().partial_cmp(&(fit.poles[j] - p).norm()).unwrap())
                    .unwrap();
                proptest::prop_assert!((fit.poles[n] - p).norm() <= 1e-6, "{fit:?}");
                proptest::prop_assert!((fit.residues[n] - r).norm() <= 1e-6, "{fit:?}");
            }
        }
    }
}
