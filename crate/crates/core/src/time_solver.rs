//! Time-domain method: Crank–Nicolson finite elements on the interior with
//! pole–residue absorbing boundary conditions.
//!
//! At each boundary the Laplace-domain condition
//! `û_x = m̃(is) û`, `m̃ = ∓√⁺(−is) + Σ αₙ/(√⁺(−is) + βₙ)`, becomes
//!
//! ```text
//! u_x = ∓e^{−iπ/4} D^{1/2} u + Σ αₙ wₙ,    e^{−iπ/4} D^{1/2} wₙ + βₙ wₙ = u,
//! ```
//!
//! with `D^{1/2}` discretized by the coefficients of `√((1−z)/(1+z))` and its
//! history compressed by a sum of exponentials.

use serde::{Deserialize, Serialize};

use crate::banded::{BandLu, BandMatrix};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, WaveField};
use crate::mfunction::Side;
use crate::potential::Potential;
use crate::quadrature::gauss_legendre;
use crate::rational::RationalDtN;
use crate::special::{C64, E_MINUS_I_PI_4};

/// `βₖ = (2k)!/(4ᵏ (k!)²)` for `k = 0..=K`.
pub fn beta_coeffs(k_max: usize) -> Vec<f64> {
    let mut b = Vec::with_capacity(k_max + 1);
    b.push(1.0);
    for k in 1..=k_max {
        let prev = b[k - 1];
        b.push(prev * (2 * k - 1) as f64 / (2 * k) as f64);
    }
    b
}

/// Coefficients `αₘ` of `√((1−z)/(1+z)) = Σ αₘ zᵐ` for `m = 0..=n`.
pub fn half_derivative_coeffs(n: usize) -> Vec<f64> {
    let beta = beta_coeffs(n / 2);
    (0..=n)
        .map(|m| if m % 2 == 0 { beta[m / 2] } else { -beta[m / 2] })
        .collect()
}

/// `√(2/dt) Σ αₘ v_{n−m}` for the last entry of `history`.
pub fn half_derivative_direct(history: &[C64], dt: f64) -> Result<C64> {
    if history.is_empty() {
        return Err(Error::invalid("history", "empty"));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    let n = history.len() - 1;
    let alpha = half_derivative_coeffs(n);
    let sum: C64 = alpha.iter().zip(history.iter().rev()).map(|(a, v)| v * a).sum();
    Ok(sum * (2.0 / dt).sqrt())
}

/// `βₖ ≈ Σⱼ wⱼ e^{−sⱼ k}` for `0 ≤ k ≤ max_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumOfExponentials {
    pub weights: Vec<f64>,
    pub rates: Vec<f64>,
    pub max_k: usize,
    /// `max_k |βₖ − Σ wⱼ e^{−sⱼ k}|` from a full scan.
    pub certified_error: f64,
    pub target_eps: f64,
}

impl SumOfExponentials {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn certified(&self) -> bool {
        self.certified_error <= self.target_eps
    }

    pub fn eval(&self, k: usize) -> f64 {
        self.weights
            .iter()
            .zip(&self.rates)
            .map(|(w, s)| w * (-s * k as f64).exp())
            .sum()
    }

    fn scan(&self) -> f64 {
        self.scan_until(f64::INFINITY)
    }

    /// Full scan, or a lower bound above `limit` as soon as one is found.
    fn scan_until(&self, limit: f64) -> f64 {
        let beta = beta_coeffs(self.max_k);
        // powers by repeated multiplication keep the scan O(K·L)
        let decay: Vec<f64> = self.rates.iter().map(|s| (-s).exp()).collect();
        let mut term = self.weights.clone();
        let mut worst: f64 = 0.0;
        for b in beta {
            let approx: f64 = term.iter().sum();
            worst = worst.max((b - approx).abs());
            if worst > limit {
                return worst;
            }
            for (t, d) in term.iter_mut().zip(&decay) {
                *t *= d;
            }
        }
        worst
    }
}

/// Quadrature of `βₖ = (1/π) ∫₀^∞ e^{−sk} e^{−s/2} (1 − e^{−s})^{−1/2} ds`
/// (the substitution `cos²θ = e^{−s}`) on geometric panels.
fn soe_candidate(k_max: usize, target_eps: f64, points_per_panel: usize, ratio: f64) -> SumOfExponentials {
    let s_min = 0.5 / k_max as f64;
    // truncation: (1/π)∫_{s_max}^∞ ≈ (2/π) e^{−s_max/2}
    let s_max = (2.0 * (2.0 / (std::f64::consts::PI * target_eps * 0.1)).ln()).max(40.0);
    let (xg, wg) = gauss_legendre(points_per_panel);
    let mut weights = Vec::new();
    let mut rates = Vec::new();
    let density = |s: f64| (-0.5 * s).exp() / (-(-s).exp_m1()).sqrt() / std::f64::consts::PI;

    // [0, s_min] with s = t², which removes the s^{−1/2} endpoint singularity
    let t_end = s_min.sqrt();
    for (x, w) in xg.iter().zip(&wg) {
        let t = 0.5 * t_end * (x + 1.0);
        let s = t * t;
        weights.push(0.5 * t_end * w * 2.0 * t * density(s));
        rates.push(s);
    }
    let mut a = s_min;
    while a < s_max {
        let b = (ratio * a).min(s_max);
        for (x, w) in xg.iter().zip(&wg) {
            let s = 0.5 * (a + b) + 0.5 * (b - a) * x;
            weights.push(0.5 * (b - a) * w * density(s));
            rates.push(s);
        }
        a = b;
    }
    SumOfExponentials {
        weights,
        rates,
        max_k: k_max,
        certified_error: f64::INFINITY,
        target_eps,
    }
}

/// Trapezoid rule for the same integral in `u = ln s`, where the integrand
/// decays like `e^{u/2}` on the left and doubly exponentially on the right.
fn soe_log_trapezoid(k_max: usize, target_eps: f64, h: f64) -> SumOfExponentials {
    let pi = std::f64::consts::PI;
    let u_min = 2.0 * (pi * target_eps * 0.25 / 2.0).ln();
    let u_max = (2.0 * (2.0 / (pi * target_eps * 0.25)).ln()).max(40.0).ln();
    let n = ((u_max - u_min) / h).ceil() as usize;
    let mut weights = Vec::with_capacity(n + 1);
    let mut rates = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let s = (u_min + i as f64 * h).exp();
        weights.push(h * s * (-0.5 * s).exp() / (-(-s).exp_m1()).sqrt() / pi);
        rates.push(s);
    }
    SumOfExponentials {
        weights,
        rates,
        max_k: k_max,
        certified_error: f64::INFINITY,
        target_eps,
    }
}

/// Certified sum-of-exponentials fit of `βₖ`, `0 ≤ k ≤ K`.
///
/// The returned fit may miss `target_eps` when the panel refinement budget
/// runs out; check [`SumOfExponentials::certified`].
pub fn soe_fit(k_max: usize, target_eps: f64) -> Result<SumOfExponentials> {
    if k_max < 1 {
        return Err(Error::invalid("K", "must be ≥ 1"));
    }
    if !(target_eps > 0.0) {
        return Err(Error::invalid("target_eps", "must be > 0"));
    }
    if k_max == 1 {
        // w e^{−s k} through (0, 1) and (1, 1/2)
        let mut soe = SumOfExponentials {
            weights: vec![1.0],
            rates: vec![std::f64::consts::LN_2],
            max_k: 1,
            certified_error: f64::INFINITY,
            target_eps,
        };
        soe.certified_error = soe.scan();
        return Ok(soe);
    }
    // cheapest candidates first; the scan decides
    let s_min = 0.5 / k_max as f64;
    let s_max = (2.0 * (2.0 / (std::f64::consts::PI * target_eps * 0.1)).ln()).max(40.0);
    // (terms, points per panel or 0 for log-trapezoid, ratio or step)
    let mut plans: Vec<(usize, usize, f64)> = Vec::new();
    for ratio in [2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0] {
        let panels = 1 + ((s_max / s_min).ln() / f64::ln(ratio)).ceil() as usize;
        for q in 3..=48 {
            plans.push((panels * q, q, ratio));
        }
    }
    for i in 0..80 {
        let h = 1.5 * 0.965f64.powi(i);
        let probe = soe_log_trapezoid(k_max, target_eps, h);
        plans.push((probe.len(), 0, h));
    }
    plans.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let build = |q: usize, param: f64| {
        if q == 0 {
            soe_log_trapezoid(k_max, target_eps, param)
        } else {
            soe_candidate(k_max, target_eps, q, param)
        }
    };
    for &(_, q, param) in &plans {
        let mut cand = build(q, param);
        cand.certified_error = cand.scan_until(target_eps);
        if cand.certified() {
            return Ok(cand);
        }
    }
    // budget exhausted: report the most refined candidate of each family
    let mut best: Option<SumOfExponentials> = None;
    for cand in [build(48, 2.0), build(0, 1.5 * 0.965f64.powi(79))] {
        let mut cand = cand;
        cand.certified_error = cand.scan();
        if best.as_ref().is_none_or(|b| cand.certified_error < b.certified_error) {
            best = Some(cand);
        }
    }
    let best = best.expect("two candidates");
    log::warn!(
        "sum of exponentials for K = {k_max} reached {:e} > {target_eps:e}",
        best.certified_error
    );
    Ok(best)
}

/// Fast evaluation of the half-derivative history of one scalar stream.
///
/// After `n` samples have been pushed, [`history`](Self::history) is
/// `Σ_{m≥1} αₘ v_{n−m}`, the part of `D^{1/2}v(tₙ)/√(2/dt)` that does not
/// involve the new sample `vₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionState {
    decay: Vec<f64>,
    weights: Vec<f64>,
    /// `Σ_{k≥1} e^{−sⱼk} v_{n−1−2k}` per exponential
    acc_last: Vec<C64>,
    /// `Σ_{k≥1} e^{−sⱼk} v_{n−2−2k}` per exponential
    acc_prev: Vec<C64>,
    v_last: C64,
    v_prev: C64,
    count: usize,
}

impl ConvolutionState {
    pub fn new(soe: &SumOfExponentials) -> Self {
        let l = soe.len();
        ConvolutionState {
            decay: soe.rates.iter().map(|s| (-s).exp()).collect(),
            weights: soe.weights.clone(),
            acc_last: vec![C64::new(0.0, 0.0); l],
            acc_prev: vec![C64::new(0.0, 0.0); l],
            v_last: C64::new(0.0, 0.0),
            v_prev: C64::new(0.0, 0.0),
            count: 0,
        }
    }

    /// Number of samples pushed so far.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Per-exponential accumulator for the next sample index.
    fn next_acc(&self, j: usize) -> C64 {
        if self.count < 2 {
            C64::new(0.0, 0.0)
        } else {
            (self.v_prev + self.acc_prev[j]) * self.decay[j]
        }
    }

    pub fn history(&self) -> C64 {
        if self.count == 0 {
            return C64::new(0.0, 0.0);
        }
        let mut even = C64::new(0.0, 0.0);
        let mut odd = C64::new(0.0, 0.0);
        for j in 0..self.weights.len() {
            even += self.next_acc(j) * self.weights[j];
            odd += self.acc_last[j] * self.weights[j];
        }
        even - odd - self.v_last
    }

    pub fn push(&mut self, v: C64) {
        for j in 0..self.weights.len() {
            let next = self.next_acc(j);
            self.acc_prev[j] = self.acc_last[j];
            self.acc_last[j] = next;
        }
        self.v_prev = self.v_last;
        self.v_last = v;
        self.count += 1;
    }

    /// `√(2/dt)(vₙ + history)`, then records `vₙ`.
    pub fn fast_half_derivative(&mut self, v_new: C64, dt: f64) -> C64 {
        let value = (v_new + self.history()) * (2.0 / dt).sqrt();
        self.push(v_new);
        value
    }
}

/// Time level at which the boundary flux enters the Crank–Nicolson step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTiming {
    /// Trapezoidal average of the old and new fluxes, like the interior.
    #[default]
    Averaged,
    /// New time level only.
    Implicit,
}

impl BoundaryTiming {
    fn theta(self) -> f64 {
        match self {
            BoundaryTiming::Averaged => 0.5,
            BoundaryTiming::Implicit => 1.0,
        }
    }
}

/// Boundary state of one absorbing condition.
#[derive(Debug, Clone)]
pub struct AbcState {
    rational: RationalDtN,
    c0: f64,
    u_conv: ConvolutionState,
    w: Vec<C64>,
    w_conv: Vec<ConvolutionState>,
    denom: Vec<C64>,
    robin: C64,
    flux: C64,
}

impl AbcState {
    pub fn new(rational: RationalDtN, dt: f64, soe: &SumOfExponentials) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        let c0 = (2.0 / dt).sqrt();
        let ec0 = E_MINUS_I_PI_4 * c0;
        let denom: Vec<C64> = rational.poles.iter().map(|b| ec0 + b).collect();
        if let Some(b) = rational.poles.iter().zip(&denom).find(|(_, d)| d.norm() < 1e-12 * c0) {
            return Err(Error::Domain(format!(
                "pole {} cancels e^(-iπ/4)·√(2/dt) for dt = {dt}",
                b.0
            )));
        }
        let sign = rational.side.sign();
        let robin = -ec0 * sign
            + rational
                .residues
                .iter()
                .zip(&denom)
                .map(|(a, d)| a / d)
                .sum::<C64>();
        let d = rational.poles.len();
        Ok(AbcState {
            rational,
            c0,
            u_conv: ConvolutionState::new(soe),
            w: vec![C64::new(0.0, 0.0); d],
            w_conv: vec![ConvolutionState::new(soe); d],
            denom,
            robin,
            flux: C64::new(0.0, 0.0),
        })
    }

    pub fn side(&self) -> Side {
        self.rational.side
    }

    /// Auxiliary variables `wₙ` at the current level.
    pub fn aux(&self) -> &[C64] {
        &self.w
    }

    /// Coefficient `R` of the new boundary value in `u_x = R u + F`.
    pub fn robin(&self) -> C64 {
        self.robin
    }

    /// History part `F` of the next flux.
    pub fn forcing(&self) -> C64 {
        let e = E_MINUS_I_PI_4;
        let sign = self.rational.side.sign();
        let mut f = -e * self.c0 * sign * self.u_conv.history();
        for ((a, d), wc) in self.rational.residues.iter().zip(&self.denom).zip(&self.w_conv) {
            f -= a * e * self.c0 * wc.history() / d;
        }
        f
    }

    /// `u_x` at the last recorded level.
    pub fn flux(&self) -> C64 {
        self.flux
    }

    /// Records the boundary value of a new level.
    pub fn advance(&mut self, u: C64) {
        let e = E_MINUS_I_PI_4;
        self.flux = self.robin * u + self.forcing();
        for n in 0..self.w.len() {
            let w = (u - e * self.c0 * self.w_conv[n].history()) / self.denom[n];
            self.w[n] = w;
            self.w_conv[n].push(w);
        }
        self.u_conv.push(u);
    }
}

/// Condition imposed at one end of the interval.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    Absorbing(RationalDtN),
    /// Homogeneous Dirichlet.
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub boundary_timing: BoundaryTiming,
    pub soe_eps: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            dt: 1e-4,
            t_end: 1.0,
            snapshot_times: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            boundary_timing: BoundaryTiming::Averaged,
            soe_eps: 1e-12,
        }
    }
}

impl TimeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::invalid("t_end", "must be > 0"));
        }
        if !(self.soe_eps > 0.0) {
            return Err(Error::invalid("soe_eps", "must be > 0"));
        }
        for &t in &self.snapshot_times {
            if !(t >= 0.0 && t <= self.t_end * (1.0 + 1e-12)) {
                return Err(Error::invalid("snapshot_times", format!("{t} outside [0, t_end]")));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }

    fn snapshot_steps(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.snapshot_times.iter().map(|t| (t / self.dt).round() as usize).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// Crank–Nicolson integrator with a factored step matrix.
#[derive(Debug)]
pub struct CnStepper {
    mesh: Mesh,
    lu: BandLu,
    explicit: BandMatrix,
    left: Option<AbcState>,
    right: Option<AbcState>,
    theta: f64,
    dt: f64,
    u: Vec<C64>,
    step: usize,
}

impl CnStepper {
    pub fn new(
        mesh: &Mesh,
        potential: &Potential,
        u0: &WaveField,
        left: BoundaryCondition,
        right: BoundaryCondition,
        dt: f64,
        timing: BoundaryTiming,
        soe: &SumOfExponentials,
    ) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        u0.check_mesh(mesh)?;
        let n = mesh.n_nodes();
        let last = n - 1;
        let mass = mesh.mass_matrix();
        let ham = mesh.hamiltonian(potential);
        let im_dt = C64::new(0.0, 1.0 / dt);
        let half = C64::new(0.5, 0.0);
        let mut implicit = mass.combine(im_dt, &ham, -half);
        let mut explicit = mass.combine(im_dt, &ham, half);
        let theta = timing.theta();

        let make = |bc: BoundaryCondition, side: Side| -> Result<Option<AbcState>> {
            match bc {
                BoundaryCondition::Dirichlet => Ok(None),
                BoundaryCondition::Absorbing(r) => {
                    if r.side != side {
                        return Err(Error::invalid(
                            "boundary",
                            format!("{} approximant used on the {} side", r.side.name(), side.name()),
                        ));
                    }
                    AbcState::new(r, dt, soe).map(Some)
                }
            }
        };
        let mut left = make(left, Side::Left)?;
        let mut right = make(right, Side::Right)?;
        let mut u = u0.values.clone();
        match &mut left {
            Some(s) => {
                implicit.add(0, 0, -s.robin() * theta);
                s.advance(u[0]);
            }
            None => {
                implicit.set_identity_row(0);
                explicit.set_identity_row(0);
                u[0] = C64::new(0.0, 0.0);
            }
        }
        match &mut right {
            Some(s) => {
                implicit.add(last, last, s.robin() * theta);
                s.advance(u[last]);
            }
            None => {
                implicit.set_identity_row(last);
                explicit.set_identity_row(last);
                u[last] = C64::new(0.0, 0.0);
            }
        }
        let lu = implicit.factor()?;
        Ok(CnStepper {
            mesh: mesh.clone(),
            lu,
            explicit,
            left,
            right,
            theta,
            dt,
            u,
            step: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn values(&self) -> &[C64] {
        &self.u
    }

    pub fn field(&self) -> WaveField {
        WaveField::new(self.time(), self.u.clone())
    }

    pub fn left(&self) -> Option<&AbcState> {
        self.left.as_ref()
    }

    pub fn right(&self) -> Option<&AbcState> {
        self.right.as_ref()
    }

    pub fn norm(&self) -> f64 {
        self.mesh.l2_norm(&self.u)
    }

    /// Advances one step.
    pub fn step(&mut self) -> Result<()> {
        let last = self.u.len() - 1;
        let mut rhs = self.explicit.matvec(&self.u);
        let th = self.theta;
        match &self.left {
            Some(s) => rhs[0] += s.forcing() * th + s.flux() * (1.0 - th),
            None => rhs[0] = C64::new(0.0, 0.0),
        }
        match &self.right {
            Some(s) => rhs[last] -= s.forcing() * th + s.flux() * (1.0 - th),
            None => rhs[last] = C64::new(0.0, 0.0),
        }
        self.lu.solve_in_place(&mut rhs);
        if rhs.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::TimeStep {
                step: self.step + 1,
                source: Box::new(Error::Domain("non-finite solution".into())),
            });
        }
        if let Some(s) = &mut self.left {
            s.advance(rhs[0]);
        }
        if let Some(s) = &mut self.right {
            s.advance(rhs[last]);
        }
        self.u = rhs;
        self.step += 1;
        Ok(())
    }
}

/// Boundary values at one time level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub time: f64,
    pub left: C64,
    pub right: C64,
}

#[derive(Debug, Clone)]
pub struct TimeRun {
    pub snapshots: Vec<WaveField>,
    pub boundary_trace: Vec<BoundarySample>,
    /// `max ‖uⁿ‖/‖u⁰‖` over all steps.
    pub max_norm_ratio: f64,
    pub norm_growth_flagged: bool,
    pub soe_terms: usize,
    pub soe_error: f64,
}

/// Steps from `u0` to `cfg.t_end`, recording snapshots and boundary traces.
pub fn run_time_method(
    cfg: &TimeConfig,
    mesh: &Mesh,
    potential: &Potential,
    u0: &WaveField,
    left: BoundaryCondition,
    right: BoundaryCondition,
) -> Result<TimeRun> {
    cfg.validate()?;
    u0.check_mesh(mesh)?;
    let n_steps = cfg.n_steps();
    let soe = soe_fit(n_steps / 2 + 1, cfg.soe_eps)?;
    for (x, v) in [(mesh.x_minus(), u0.values[0]), (mesh.x_plus(), *u0.values.last().unwrap())] {
        if v.norm() > 1e-4 {
            log::warn!("initial value {:.3e} at boundary x = {x} is not small", v.norm());
        }
    }
    let mut stepper = CnStepper::new(mesh, potential, u0, left, right, cfg.dt, cfg.boundary_timing, &soe)?;
    let norm0 = stepper.norm();
    let snaps = cfg.snapshot_steps();
    let mut snapshots = Vec::with_capacity(snaps.len());
    let mut trace = Vec::with_capacity(n_steps + 1);
    let mut max_ratio: f64 = 1.0;
    let record = |s: &CnStepper, trace: &mut Vec<BoundarySample>| {
        let v = s.values();
        trace.push(BoundarySample {
            time: s.time(),
            left: v[0],
            right: v[v.len() - 1],
        });
    };
    record(&stepper, &mut trace);
    let mut next = 0;
    while next < snaps.len() && snaps[next] == 0 {
        snapshots.push(stepper.field());
        next += 1;
    }
    for _ in 0..n_steps {
        stepper.step()?;
        record(&stepper, &mut trace);
        if norm0 > 0.0 {
            max_ratio = max_ratio.max(stepper.norm() / norm0);
        }
        while next < snaps.len() && snaps[next] == stepper.step_index() {
            snapshots.push(stepper.field());
            next += 1;
        }
    }
    let flagged = max_ratio > 1.01;
    if flagged {
        log::warn!("norm grew to {max_ratio:.4} times its initial value");
    }
    Ok(TimeRun {
        snapshots,
        boundary_trace: trace,
        max_norm_ratio: max_ratio,
        norm_growth_flagged: flagged,
        soe_terms: soe.len(),
        soe_error: soe.certified_error,
    })
}
