//! Shared refined time mesh: output nodes ∪ driver breakpoints, each knot
//! interval split into equal sub-steps, with the driver densities tabulated
//! per sub-interval.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::drivers::{DriverFamily, TimeGrid};
use crate::Result;

pub(crate) struct Mesh {
    pub nodes: Vec<f64>,
    /// `x₀(t) − x₀(0)` at every node.
    pub x0: Vec<f64>,
    /// `x₀′` on every sub-interval.
    pub x0_slope: Vec<f64>,
    /// `xₙ′` on every sub-interval, `slopes[n - 1][j]`.
    pub slopes: Vec<Vec<Complex64>>,
    /// Mesh index of every node of the output grid.
    pub output: Vec<usize>,
}

impl Mesh {
    pub fn build(family: &DriverFamily, grid: &TimeGrid, refinement: usize) -> Result<Mesh> {
        let knots = grid.union(&family.breakpoints())?;
        let fine = knots.refined(refinement);
        let nodes = fine.points().to_vec();
        let output = grid
            .points()
            .iter()
            .map(|&t| fine.node_index(t).expect("grid nodes are mesh knots"))
            .collect();
        let mids: Vec<f64> = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let x0 = nodes.iter().map(|&t| family.x0_shifted(t)).collect();
        let x0_slope = mids.iter().map(|&m| family.x0().slope_at(m).re).collect();
        let slopes = family
            .xs()
            .iter()
            .map(|p| mids.iter().map(|&m| p.slope_at(m)).collect())
            .collect();
        Ok(Mesh {
            nodes,
            x0,
            x0_slope,
            slopes,
            output,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn step(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }

    /// Density of `xₙ` on sub-interval `j`; zero beyond the truncation.
    pub fn slope(&self, n: usize, j: usize) -> Complex64 {
        self.slopes
            .get(n - 1)
            .map_or(Complex64::new(0.0, 0.0), |s| s[j])
    }

    pub fn is_zero_path(&self, n: usize) -> bool {
        self.slopes
            .get(n - 1)
            .is_none_or(|s| s.iter().all(|v| v.re == 0.0 && v.im == 0.0))
    }
}
