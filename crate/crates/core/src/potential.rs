//! Real potentials `V(x)` accepted by the solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real-valued potential on the whole line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    /// `V ≡ v0`; `{"type": "free"}` reads as `v0 = 0`.
    #[serde(alias = "free")]
    Constant {
        #[serde(default)]
        v0: f64,
    },
    /// `V = x²`.
    Harmonic,
    /// Reflectionless two-parameter family with a closed-form m-function at 0.
    Bargmann { beta: f64, gamma: f64 },
    /// `V = 1/√(1+x²)`.
    CoulombLike,
    /// `V = height·exp(−width_coeff·(x − center)²)`.
    GaussianBarrier {
        height: f64,
        width_coeff: f64,
        center: f64,
    },
    /// Piecewise-linear table, extended by its end values.
    Tabulated { x_nodes: Vec<f64>, values: Vec<f64> },
}

impl Potential {
    pub fn free() -> Self {
        Potential::Constant { v0: 0.0 }
    }

    pub fn bargmann(beta: f64, gamma: f64) -> Result<Self> {
        let p = Potential::Bargmann { beta, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn tabulated(x_nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let p = Potential::Tabulated { x_nodes, values };
        p.validate()?;
        Ok(p)
    }

    /// `30·exp(−36(x−8)²)`, centred just outside `[−5, 5]`.
    pub fn default_barrier() -> Self {
        Potential::GaussianBarrier {
            height: 30.0,
            width_coeff: 36.0,
            center: 8.0,
        }
    }

    /// Samples `other` on `x_nodes` into a table.
    pub fn sampled(other: &Potential, x_nodes: Vec<f64>) -> Result<Self> {
        let values = x_nodes.iter().map(|&x| other.eval(x)).collect();
        Self::tabulated(x_nodes, values)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Potential::Constant { v0 } if !v0.is_finite() => {
                Err(Error::invalid("v0", "must be finite"))
            }
            Potential::Bargmann { beta, gamma } => {
                if !(beta.is_finite() && *beta > 0.0) {
                    return Err(Error::invalid("beta", format!("must be > 0, got {beta}")));
                }
                if !(gamma.is_finite() && *gamma >= 0.0) {
                    return Err(Error::invalid("gamma", format!("must be >= 0, got {gamma}")));
                }
                Ok(())
            }
            Potential::GaussianBarrier {
                height,
                width_coeff,
                center,
            } => {
                if !(height.is_finite() && center.is_finite()) {
                    return Err(Error::invalid("height", "barrier parameters must be finite"));
                }
                if !(width_coeff.is_finite() && *width_coeff > 0.0) {
                    return Err(Error::invalid("width_coeff", "must be > 0"));
                }
                Ok(())
            }
            Potential::Tabulated { x_nodes, values } => {
                if x_nodes.is_empty() {
                    return Err(Error::invalid("x_nodes", "table is empty"));
                }
                if x_nodes.len() != values.len() {
                    return Err(Error::invalid(
                        "values",
                        format!("{} values for {} nodes", values.len(), x_nodes.len()),
                    ));
                }
                if x_nodes.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::invalid("x_nodes", "must be strictly increasing"));
                }
                if values.iter().chain(x_nodes).any(|v| !v.is_finite()) {
                    return Err(Error::invalid("values", "must be finite"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Evaluates `V(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Constant { v0 } => *v0,
            Potential::Harmonic => x * x,
            Potential::Bargmann { beta, gamma } => bargmann_value(*beta, *gamma, x),
            Potential::CoulombLike => 1.0 / (1.0 + x * x).sqrt(),
            Potential::GaussianBarrier {
                height,
                width_coeff,
                center,
            } => {
                let d = x - center;
                height * (-width_coeff * d * d).exp()
            }
            Potential::Tabulated { x_nodes, values } => interpolate(x_nodes, values, x),
        }
    }

    /// True when `V` is identically constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Potential::Constant { v0 } => Some(*v0),
            _ => None,
        }
    }
}

fn bargmann_value(beta: f64, gamma: f64, x: f64) -> f64 {
    let c = (beta - gamma) / (beta + gamma);
    if c == 0.0 {
        return 0.0;
    }
    // −8β² c e^{−2βx} / (1 + c e^{−2βx})², rewritten for x < 0 to avoid overflow
    if x >= 0.0 {
        let e = (-2.0 * beta * x).exp();
        let den = 1.0 + c * e;
        -8.0 * beta * beta * c * e / (den * den)
    } else {
        let e = (2.0 * beta * x).exp();
        let den = e + c;
        -8.0 * beta * beta * c * e / (den * den)
    }
}

fn interpolate(xs: &[f64], vs: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return vs[0];
    }
    if x >= xs[n - 1] {
        return vs[n - 1];
    }
    let i = xs.partition_point(|&xi| xi <= x) - 1;
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    vs[i] + t * (vs[i + 1] - vs[i])
}
