use crate::error::{Error, Result};

/// Uniform partition of the beam interval (-1/2, 1/2).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n_cells: usize,
    h: f64,
    nodes: Vec<f64>,
    centers: Vec<f64>,
}

pub const LEFT_END: f64 = -0.5;
pub const RIGHT_END: f64 = 0.5;

impl Grid {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 cells, got {n_cells}"
            )));
        }
        let h = 1.0 / n_cells as f64;
        let mut nodes: Vec<f64> = (0..=n_cells).map(|j| LEFT_END + j as f64 * h).collect();
        nodes[n_cells] = RIGHT_END;
        let centers = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(Grid {
            n_cells,
            h,
            nodes,
            centers,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }
}

pub fn build_grid(n_cells: usize) -> Result<Grid> {
    Grid::new(n_cells)
}
