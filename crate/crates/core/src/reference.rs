//! Oracles: the closed-form free-particle solution, a large-domain
//! Dirichlet reference solver, and relative L² errors on the interior.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, WaveField};
use crate::potential::Potential;
use crate::special::C64;
use crate::time_solver::{soe_fit, BoundaryCondition, BoundaryTiming, CnStepper};

/// Free evolution of the Gaussian beam `e^{−x²+4ix}`:
/// `√(i/(i−4t)) · exp((−ix² − 4x + 16t)/(i − 4t))`.
pub fn exact_free(x: f64, t: f64) -> C64 {
    let i = C64::new(0.0, 1.0);
    let den = C64::new(-4.0 * t, 1.0);
    (i / den).sqrt() * ((-i * x * x - 4.0 * x + 16.0 * t) / den).exp()
}

/// Relative errors at a sequence of times.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    pub rel_l2: Vec<f64>,
}

impl ErrorSeries {
    pub fn push(&mut self, t: f64, err: f64) {
        self.times.push(t);
        self.rel_l2.push(err);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.rel_l2.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,rel_l2_error\n");
        for (t, e) in self.times.iter().zip(&self.rel_l2) {
            s.push_str(&format!("{t:.16e},{e:.16e}\n"));
        }
        s
    }
}

/// `‖u − u_ref‖ / ‖u_ref‖` over the mesh interval.
pub fn relative_l2_error(u: &WaveField, u_ref: &WaveField, mesh: &Mesh) -> Result<f64> {
    u.check_mesh(mesh)?;
    u_ref.check_mesh(mesh)?;
    let den = mesh.l2_norm(&u_ref.values);
    if !(den > 0.0) {
        return Err(Error::Domain("reference field has zero norm".into()));
    }
    let diff: Vec<C64> = u.values.iter().zip(&u_ref.values).map(|(a, b)| a - b).collect();
    Ok(mesh.l2_norm(&diff) / den)
}

/// `‖u − f‖ / ‖f‖` with `f` evaluated at the quadrature points.
pub fn relative_l2_error_to(u: &WaveField, mesh: &Mesh, f: impl Fn(f64) -> C64 + Copy) -> Result<f64> {
    u.check_mesh(mesh)?;
    let den = mesh.l2_norm_of(f);
    if !(den > 0.0) {
        return Err(Error::Domain("reference function has zero norm".into()));
    }
    Ok(mesh.l2_distance_to(&u.values, f) / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceConfig {
    /// The reference interval is `[−half_width, half_width]`.
    pub half_width: f64,
    /// Reference element width = interior element width / refinement.
    pub refinement: usize,
    pub containment_tol: f64,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            half_width: 50.0,
            refinement: 1,
            containment_tol: 1e-8,
        }
    }
}

impl ReferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0) {
            return Err(Error::invalid("half_width", "must be > 0"));
        }
        if self.refinement == 0 {
            return Err(Error::invalid("refinement", "must be ≥ 1"));
        }
        if !(self.containment_tol > 0.0) {
            return Err(Error::invalid("containment_tol", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    /// Snapshots restricted to the interior mesh.
    pub snapshots: Vec<WaveField>,
    /// Containment held at every step.
    pub trusted: bool,
    /// `max |u(±0.9 L, t)|` over all steps.
    pub containment_max: f64,
    /// `max |‖uⁿ‖/‖u⁰‖ − 1|` on the large domain.
    pub norm_drift: f64,
    pub reference_mesh: Mesh,
}

/// Crank–Nicolson on `[−L, L]` with homogeneous Dirichlet ends, sampled
/// back onto `interior` at the requested times.
pub fn reference_solution(
    potential: &Potential,
    interior: &Mesh,
    u0: impl Fn(f64) -> C64,
    cfg: &ReferenceConfig,
    dt: f64,
    times: &[f64],
) -> Result<ReferenceSolution> {
    cfg.validate()?;
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    let l = cfg.half_width;
    if !(l > interior.x_minus().abs() && l > interior.x_plus().abs()) {
        return Err(Error::invalid("half_width", "reference interval must contain the interior"));
    }
    let h = interior.element_width() / cfg.refinement as f64;
    let n_el = ((2.0 * l) / h).round().max(1.0) as usize;
    let mesh = Mesh::new(-l, l, n_el, interior.order())?;
    let start = WaveField::from_fn(&mesh, 0.0, &u0);
    let soe = soe_fit(1, 1.0)?;
    let mut stepper = CnStepper::new(
        &mesh,
        potential,
        &start,
        BoundaryCondition::Dirichlet,
        BoundaryCondition::Dirichlet,
        dt,
        BoundaryTiming::Averaged,
        &soe,
    )?;
    let norm0 = stepper.norm();
    let probe = |s: &CnStepper| {
        let v = s.values();
        mesh.evaluate(v, -0.9 * l).norm().max(mesh.evaluate(v, 0.9 * l).norm())
    };
    let mut containment = probe(&stepper);
    let mut drift: f64 = 0.0;
    let mut steps: Vec<(usize, usize)> = times
        .iter()
        .enumerate()
        .map(|(i, t)| ((t / dt).round() as usize, i))
        .collect();
    steps.sort_unstable();
    let mut out: Vec<Option<WaveField>> = vec![None; times.len()];
    let restrict = |s: &CnStepper| {
        let v = s.values();
        WaveField::new(
            s.time(),
            interior.nodes().iter().map(|&x| mesh.evaluate(v, x)).collect(),
        )
    };
    let last = steps.last().map(|s| s.0).unwrap_or(0);
    let mut next = 0;
    while next < steps.len() && steps[next].0 == 0 {
        out[steps[next].1] = Some(restrict(&stepper));
        next += 1;
    }
    for _ in 0..last {
        stepper.step()?;
        containment = containment.max(probe(&stepper));
        if norm0 > 0.0 {
            drift = drift.max((stepper.norm() / norm0 - 1.0).abs());
        }
        while next < steps.len() && steps[next].0 == stepper.step_index() {
            out[steps[next].1] = Some(restrict(&stepper));
            next += 1;
        }
    }
    let trusted = containment < cfg.containment_tol;
    if !trusted {
        log::warn!("reference wave reached ±0.9·L (|u| = {containment:e}); results untrusted");
    }
    Ok(ReferenceSolution {
        snapshots: out.into_iter().map(|s| s.expect("every time is reached")).collect(),
        trusted,
        containment_max: containment,
        norm_drift: drift,
        reference_mesh: mesh,
    })
}
