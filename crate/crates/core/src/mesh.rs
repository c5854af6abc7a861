//! Lagrange finite elements on Gauss–Lobatto nodes over `[x_minus, x_plus]`.

use serde::{Deserialize, Serialize};

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quadrature::{gauss_legendre, gauss_lobatto};
use crate::special::C64;

/// Uniform 1D mesh of `n_elements` Lagrange elements of order `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    x_minus: f64,
    x_plus: f64,
    n_elements: usize,
    order: usize,
    nodes: Vec<f64>,
    reference: ReferenceElement,
}

/// Basis data on the reference element `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceElement {
    pub lobatto: Vec<f64>,
    pub quad_points: Vec<f64>,
    pub quad_weights: Vec<f64>,
    /// `phi[q][a]`: basis function `a` at quadrature point `q`.
    pub phi: Vec<Vec<f64>>,
    /// Derivatives with respect to the reference coordinate.
    pub dphi: Vec<Vec<f64>>,
}

fn lagrange(nodes: &[f64], a: usize, x: f64) -> (f64, f64) {
    let mut value = 1.0;
    let mut deriv = 0.0;
    for (b, &xb) in nodes.iter().enumerate() {
        if b == a {
            continue;
        }
        let den = nodes[a] - xb;
        deriv = deriv * (x - xb) / den + value / den;
        value *= (x - xb) / den;
    }
    (value, deriv)
}

impl ReferenceElement {
    pub fn new(order: usize) -> Self {
        let (lobatto, _) = gauss_lobatto(order + 1);
        let (quad_points, quad_weights) = gauss_legendre(order + 1);
        let mut phi = Vec::with_capacity(quad_points.len());
        let mut dphi = Vec::with_capacity(quad_points.len());
        for &q in &quad_points {
            let (v, d): (Vec<f64>, Vec<f64>) =
                (0..=order).map(|a| lagrange(&lobatto, a, q)).unzip();
            phi.push(v);
            dphi.push(d);
        }
        ReferenceElement {
            lobatto,
            quad_points,
            quad_weights,
            phi,
            dphi,
        }
    }

    /// Basis values at an arbitrary reference coordinate.
    pub fn basis_at(&self, xi: f64) -> Vec<f64> {
        (0..self.lobatto.len())
            .map(|a| lagrange(&self.lobatto, a, xi).0)
            .collect()
    }
}

impl Mesh {
    pub fn new(x_minus: f64, x_plus: f64, n_elements: usize, order: usize) -> Result<Self> {
        if !(x_minus.is_finite() && x_plus.is_finite() && x_minus < x_plus) {
            return Err(Error::invalid(
                "domain",
                format!("need x_minus < x_plus, got [{x_minus}, {x_plus}]"),
            ));
        }
        if n_elements == 0 {
            return Err(Error::invalid("elements", "must be positive"));
        }
        if order == 0 {
            return Err(Error::invalid("order", "must be at least 1"));
        }
        let reference = ReferenceElement::new(order);
        let h = (x_plus - x_minus) / n_elements as f64;
        let mut nodes = Vec::with_capacity(n_elements * order + 1);
        for e in 0..n_elements {
            let left = x_minus + h * e as f64;
            for &xi in &reference.lobatto[..order] {
                nodes.push(left + 0.5 * (xi + 1.0) * h);
            }
        }
        nodes.push(x_plus);
        Ok(Mesh {
            x_minus,
            x_plus,
            n_elements,
            order,
            nodes,
            reference,
        })
    }

    pub fn x_minus(&self) -> f64 {
        self.x_minus
    }

    pub fn x_plus(&self) -> f64 {
        self.x_plus
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_width(&self) -> f64 {
        (self.x_plus - self.x_minus) / self.n_elements as f64
    }

    pub fn reference(&self) -> &ReferenceElement {
        &self.reference
    }

    fn element_left(&self, e: usize) -> f64 {
        self.x_minus + self.element_width() * e as f64
    }

    /// Physical quadrature points of element `e`.
    pub fn quad_points(&self, e: usize) -> impl Iterator<Item = f64> + '_ {
        let left = self.element_left(e);
        let h = self.element_width();
        self.reference
            .quad_points
            .iter()
            .map(move |&xi| left + 0.5 * (xi + 1.0) * h)
    }

    fn empty_matrix(&self) -> BandMatrix {
        BandMatrix::zeros(self.n_nodes(), self.order, self.order)
    }

    fn assemble(&self, mut local: impl FnMut(usize, usize, usize, f64) -> f64) -> BandMatrix {
        let p = self.order;
        let r = &self.reference;
        let mut m = self.empty_matrix();
        for e in 0..self.n_elements {
            let xs: Vec<f64> = self.quad_points(e).collect();
            for a in 0..=p {
                for b in 0..=p {
                    let mut v = 0.0;
                    for q in 0..r.quad_points.len() {
                        v += local(q, a, b, xs[q]);
                    }
                    m.add(e * p + a, e * p + b, C64::new(v, 0.0));
                }
            }
        }
        m
    }

    /// Mass matrix `∫ φ_a φ_b`.
    pub fn mass_matrix(&self) -> BandMatrix {
        let r = &self.reference;
        let jac = 0.5 * self.element_width();
        self.assemble(|q, a, b, _| r.quad_weights[q] * r.phi[q][a] * r.phi[q][b] * jac)
    }

    /// Stiffness matrix `∫ φ_a′ φ_b′`.
    pub fn stiffness_matrix(&self) -> BandMatrix {
        let r = &self.reference;
        let inv = 2.0 / self.element_width();
        self.assemble(|q, a, b, _| r.quad_weights[q] * r.dphi[q][a] * r.dphi[q][b] * inv)
    }

    /// Potential matrix `∫ V φ_a φ_b`.
    pub fn potential_matrix(&self, potential: &Potential) -> BandMatrix {
        let r = &self.reference;
        let jac = 0.5 * self.element_width();
        self.assemble(|q, a, b, x| {
            r.quad_weights[q] * potential.eval(x) * r.phi[q][a] * r.phi[q][b] * jac
        })
    }

    /// Hamiltonian matrix `K + M_V` of the weak form of `−∂ₓ² + V`.
    pub fn hamiltonian(&self, potential: &Potential) -> BandMatrix {
        let one = C64::new(1.0, 0.0);
        self.stiffness_matrix()
            .combine(one, &self.potential_matrix(potential), one)
    }

    /// Values of the finite-element function at the quadrature points of
    /// element `e`.
    pub fn field_at_quad(&self, values: &[C64], e: usize) -> Vec<C64> {
        let p = self.order;
        let local = &values[e * p..=e * p + p];
        self.reference
            .phi
            .iter()
            .map(|row| row.iter().zip(local).map(|(f, u)| u * f).sum())
            .collect()
    }

    /// Evaluates the finite-element interpolant at `x` (clamped to the mesh).
    pub fn evaluate(&self, values: &[C64], x: f64) -> C64 {
        let h = self.element_width();
        let x = x.clamp(self.x_minus, self.x_plus);
        let e = (((x - self.x_minus) / h).floor() as usize).min(self.n_elements - 1);
        let xi = 2.0 * (x - self.element_left(e)) / h - 1.0;
        let basis = self.reference.basis_at(xi);
        let p = self.order;
        basis
            .iter()
            .zip(&values[e * p..=e * p + p])
            .map(|(b, u)| u * b)
            .sum()
    }

    /// Squared L² norm via element-wise Gauss quadrature.
    pub fn l2_norm_sqr(&self, values: &[C64]) -> f64 {
        let jac = 0.5 * self.element_width();
        (0..self.n_elements)
            .map(|e| {
                self.field_at_quad(values, e)
                    .iter()
                    .zip(&self.reference.quad_weights)
                    .map(|(u, w)| w * u.norm_sqr() * jac)
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn l2_norm(&self, values: &[C64]) -> f64 {
        self.l2_norm_sqr(values).sqrt()
    }

    /// `‖u_h − f‖_{L²}` with `f` sampled at the quadrature points.
    pub fn l2_distance_to(&self, values: &[C64], f: impl Fn(f64) -> C64) -> f64 {
        let jac = 0.5 * self.element_width();
        (0..self.n_elements)
            .map(|e| {
                let uq = self.field_at_quad(values, e);
                self.quad_points(e)
                    .zip(uq)
                    .zip(&self.reference.quad_weights)
                    .map(|((x, u), w)| w * (u - f(x)).norm_sqr() * jac)
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// L² norm of a function sampled at the quadrature points.
    pub fn l2_norm_of(&self, f: impl Fn(f64) -> C64) -> f64 {
        let jac = 0.5 * self.element_width();
        (0..self.n_elements)
            .map(|e| {
                self.quad_points(e)
                    .zip(&self.reference.quad_weights)
                    .map(|(x, w)| w * f(x).norm_sqr() * jac)
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Complex nodal values of the wave function at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveField {
    pub time: f64,
    pub values: Vec<C64>,
}

impl WaveField {
    pub fn new(time: f64, values: Vec<C64>) -> Self {
        WaveField { time, values }
    }

    pub fn zeros(mesh: &Mesh, time: f64) -> Self {
        WaveField::new(time, vec![C64::new(0.0, 0.0); mesh.n_nodes()])
    }

    /// Nodal interpolant of `f`.
    pub fn from_fn(mesh: &Mesh, time: f64, f: impl Fn(f64) -> C64) -> Self {
        WaveField::new(time, mesh.nodes().iter().map(|&x| f(x)).collect())
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.values.len() != mesh.n_nodes() {
            return Err(Error::invalid(
                "field",
                format!("{} values for {} mesh nodes", self.values.len(), mesh.n_nodes()),
            ));
        }
        Ok(())
    }

    pub fn scaled(&self, a: C64) -> WaveField {
        WaveField::new(self.time, self.values.iter().map(|v| a * v).collect())
    }
}

/// The Gaussian beam `e^{−x²+4ix}` used as initial data in all experiments.
pub fn gaussian_beam(x: f64) -> C64 {
    C64::new(-x * x, 4.0 * x).exp()
}
