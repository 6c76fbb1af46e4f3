//! Uniform tensor grids, finite-difference stencils and trapezoid weights.
//!
//! Nodes are numbered row-major: axis 0 varies slowest.

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct UniformGrid {
    min: Vec<f64>,
    max: Vec<f64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
}

/// Three-point first-derivative stencil: `Σ coeffs[k] · f(nodes[k])`.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub nodes: [usize; 3],
    pub coeffs: [f64; 3],
}

impl UniformGrid {
    pub fn new(min: Vec<f64>, max: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        if min.len() != shape.len() || max.len() != shape.len() || shape.is_empty() {
            return Err(Error::Shape(format!(
                "grid needs matching min/max/shape lengths, got {}/{}/{}",
                min.len(),
                max.len(),
                shape.len()
            )));
        }
        for (a, &s) in shape.iter().enumerate() {
            if s < MIN_NODES {
                return Err(Error::DegenerateGrid(format!(
                    "axis {} has {s} nodes, at least {MIN_NODES} required",
                    a + 1
                )));
            }
            if !(min[a] < max[a]) {
                return Err(Error::DegenerateGrid(format!(
                    "axis {} has min {} not below max {}",
                    a + 1,
                    min[a],
                    max[a]
                )));
            }
        }
        let mut strides = vec![1; shape.len()];
        for a in (0..shape.len() - 1).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        Ok(UniformGrid {
            min,
            max,
            shape,
            strides,
        })
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.max[axis] - self.min[axis]) / (self.shape[axis] - 1) as f64
    }

    pub fn index_along(&self, node: usize, axis: usize) -> usize {
        (node / self.strides[axis]) % self.shape[axis]
    }

    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        if k == self.shape[axis] - 1 {
            self.max[axis]
        } else {
            self.min[axis] + k as f64 * self.spacing(axis)
        }
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.coord(a, self.index_along(node, a)))
            .collect()
    }

    pub fn is_interior(&self, node: usize) -> bool {
        (0..self.dim()).all(|a| {
            let k = self.index_along(node, a);
            k > 0 && k + 1 < self.shape[a]
        })
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        !self.is_interior(node)
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&n| self.is_interior(n)).collect()
    }

    /// Composite trapezoid weight of a node (product of per-axis weights).
    pub fn weight(&self, node: usize) -> f64 {
        (0..self.dim())
            .map(|a| {
                let k = self.index_along(node, a);
                let h = self.spacing(a);
                if k == 0 || k + 1 == self.shape[a] {
                    0.5 * h
                } else {
                    h
                }
            })
            .product()
    }

    /// Second-order first-derivative stencil along `axis`; one-sided at the faces.
    pub fn first_derivative(&self, node: usize, axis: usize) -> Stencil {
        let k = self.index_along(node, axis);
        let s = self.strides[axis];
        let inv = 1.0 / (2.0 * self.spacing(axis));
        let last = self.shape[axis] - 1;
        if k == 0 {
            Stencil {
                nodes: [node, node + s, node + 2 * s],
                coeffs: [-3.0 * inv, 4.0 * inv, -inv],
            }
        } else if k == last {
            Stencil {
                nodes: [node, node - s, node - 2 * s],
                coeffs: [3.0 * inv, -4.0 * inv, inv],
            }
        } else {
            Stencil {
                nodes: [node - s, node, node + s],
                coeffs: [-inv, 0.0, inv],
            }
        }
    }

    /// Central second difference `∂²/∂t^a∂t^b` at an interior node, as (node, coeff) pairs.
    pub fn second_derivative(&self, node: usize, a: usize, b: usize) -> Vec<(usize, f64)> {
        debug_assert!(self.is_interior(node));
        let (sa, ha) = (self.strides[a], self.spacing(a));
        if a == b {
            let c = 1.0 / (ha * ha);
            vec![(node - sa, c), (node, -2.0 * c), (node + sa, c)]
        } else {
            let (sb, hb) = (self.strides[b], self.spacing(b));
            let c = 1.0 / (4.0 * ha * hb);
            vec![
                (node + sa + sb, c),
                (node + sa - sb, -c),
                (node - sa + sb, -c),
                (node - sa - sb, c),
            ]
        }
    }

    /// Node-offset reach of every pair of first-derivative stencils touching one node.
    pub fn coupling_reach(&self) -> usize {
        let mut s: Vec<usize> = self.strides.clone();
        s.sort_unstable_by(|a, b| b.cmp(a));
        match s.len() {
            1 => 2 * s[0],
            _ => 2 * (s[0] + s[1]),
        }
    }
}
