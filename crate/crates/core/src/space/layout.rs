use std::fmt;
use std::sync::Arc;

use super::grid::Grid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn position(self) -> f64 {
        match self {
            Side::Left => super::grid::LEFT_END,
            Side::Right => super::grid::RIGHT_END,
        }
    }
}

/// Where the entries of a block live.
///
/// The node variants differ in which endpoint values are unknowns: removed
/// endpoints are pinned to zero, which is how the Dirichlet-type domain
/// constraints of the derivative operators are represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceTag {
    NodeAll,
    /// Node 0 removed.
    NodeFreeLeft,
    /// Nodes 0 and N removed.
    NodeInterior,
    Center,
    /// One scalar attached to an endpoint.
    Trace(Side),
}

impl SpaceTag {
    pub fn len(self, n_cells: usize) -> usize {
        match self {
            SpaceTag::NodeAll => n_cells + 1,
            SpaceTag::NodeFreeLeft | SpaceTag::Center => n_cells,
            SpaceTag::NodeInterior => n_cells - 1,
            SpaceTag::Trace(_) => 1,
        }
    }

    pub fn is_node(self) -> bool {
        matches!(
            self,
            SpaceTag::NodeAll | SpaceTag::NodeFreeLeft | SpaceTag::NodeInterior
        )
    }

    /// Index of the first grid node carried by a node tag.
    pub fn first_node(self) -> usize {
        match self {
            SpaceTag::NodeAll => 0,
            _ => 1,
        }
    }

    /// Coordinates of the block's entries.
    pub fn points(self, grid: &Grid) -> Vec<f64> {
        let n = grid.n_cells();
        match self {
            SpaceTag::NodeAll => grid.nodes().to_vec(),
            SpaceTag::NodeFreeLeft => grid.nodes()[1..].to_vec(),
            SpaceTag::NodeInterior => grid.nodes()[1..n].to_vec(),
            SpaceTag::Center => grid.centers().to_vec(),
            SpaceTag::Trace(side) => vec![side.position()],
        }
    }

    /// Diagonal quadrature weights: `h` at centers and interior nodes, `h/2`
    /// at retained endpoint nodes, 1 for a trace.
    pub fn weights(self, grid: &Grid) -> Vec<f64> {
        let h = grid.h();
        let n = grid.n_cells();
        match self {
            SpaceTag::Center => vec![h; n],
            SpaceTag::Trace(_) => vec![1.0],
            SpaceTag::NodeAll => {
                let mut w = vec![h; n + 1];
                w[0] = 0.5 * h;
                w[n] = 0.5 * h;
                w
            }
            SpaceTag::NodeFreeLeft => {
                let mut w = vec![h; n];
                w[n - 1] = 0.5 * h;
                w
            }
            SpaceTag::NodeInterior => vec![h; n - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    pub tag: SpaceTag,
    pub offset: usize,
    pub len: usize,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// Ordered named blocks flattened into one vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateLayout {
    grid: Grid,
    blocks: Vec<Block>,
    dim: usize,
}

impl StateLayout {
    pub fn new(grid: &Grid, spec: &[(&str, SpaceTag)]) -> Result<Self> {
        let mut blocks: Vec<Block> = Vec::with_capacity(spec.len());
        let mut offset = 0;
        for (name, tag) in spec {
            if blocks.iter().any(|b| b.name == *name) {
                return Err(Error::Parameter(format!("duplicate block name {name}")));
            }
            let len = tag.len(grid.n_cells());
            blocks.push(Block {
                name: name.to_string(),
                tag: *tag,
                offset,
                len,
            });
            offset += len;
        }
        Ok(StateLayout {
            grid: grid.clone(),
            blocks,
            dim: offset,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn block_index(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.name == name)
    }

    pub fn require(&self, name: &str) -> Result<&Block> {
        self.block(name)
            .ok_or_else(|| Error::Parameter(format!("layout has no block {name}")))
    }

    pub fn trace_blocks(&self) -> impl Iterator<Item = &Block> {
        self.blocks
            .iter()
            .filter(|b| matches!(b.tag, SpaceTag::Trace(_)))
    }

    /// Coordinate of every entry, in layout order.
    pub fn positions(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| b.tag.points(&self.grid))
            .collect()
    }

    /// Block index of every entry.
    pub fn block_of_entries(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(k, b)| std::iter::repeat_n(k, b.len))
            .collect()
    }

    pub fn weights(&self) -> WeightMatrix {
        WeightMatrix {
            diag: self
                .blocks
                .iter()
                .flat_map(|b| b.tag.weights(&self.grid))
                .collect(),
        }
    }
}

/// Diagonal weights of the discrete inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    diag: Vec<f64>,
}

impl WeightMatrix {
    pub fn from_diag(diag: Vec<f64>) -> Result<Self> {
        if let Some(w) = diag.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::Numeric(format!("weight {w} is not positive")));
        }
        Ok(WeightMatrix { diag })
    }

    pub fn identity(n: usize) -> Self {
        WeightMatrix { diag: vec![1.0; n] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// `Σ W_i u_i v_i` on raw slices.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        if u.len() != self.diag.len() {
            return Err(Error::dim(self.diag.len(), u.len()));
        }
        if v.len() != self.diag.len() {
            return Err(Error::dim(self.diag.len(), v.len()));
        }
        Ok(self
            .diag
            .iter()
            .zip(u.iter().zip(v))
            .map(|(w, (a, b))| w * a * b)
            .sum())
    }

    pub fn norm_sq(&self, u: &[f64]) -> Result<f64> {
        self.inner(u, u)
    }
}

/// A state on a shared layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: Arc<StateLayout>,
    values: Vec<f64>,
}

impl StateVector {
    pub fn zeros(layout: &Arc<StateLayout>) -> Self {
        StateVector {
            layout: Arc::clone(layout),
            values: vec![0.0; layout.dim()],
        }
    }

    pub fn from_values(layout: &Arc<StateLayout>, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.dim() {
            return Err(Error::dim(layout.dim(), values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("state has non-finite entries".into()));
        }
        Ok(StateVector {
            layout: Arc::clone(layout),
            values,
        })
    }

    /// Fills every block from a per-block function of position.
    pub fn from_fn(layout: &Arc<StateLayout>, f: impl Fn(&Block, f64) -> f64) -> Result<Self> {
        let grid = layout.grid();
        let values = layout
            .blocks()
            .iter()
            .flat_map(|b| b.tag.points(grid).into_iter().map(|x| f(b, x)).collect::<Vec<_>>())
            .collect();
        Self::from_values(layout, values)
    }

    pub fn layout(&self) -> &Arc<StateLayout> {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn block(&self, name: &str) -> Result<&[f64]> {
        let b = self.layout.require(name)?;
        Ok(&self.values[b.range()])
    }

    pub fn block_mut(&mut self, name: &str) -> Result<&mut [f64]> {
        let r = self.layout.require(name)?.range();
        Ok(&mut self.values[r])
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        StateVector {
            layout: Arc::clone(&self.layout),
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.layout.blocks() {
            writeln!(f, "{}: {:?}", b.name, &self.values[b.range()])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::grid::build_grid;

    #[test]
    fn tag_lengths() {
        let n = 6;
        assert_eq!(SpaceTag::NodeAll.len(n), 7);
        assert_eq!(SpaceTag::NodeFreeLeft.len(n), 6);
        assert_eq!(SpaceTag::NodeInterior.len(n), 5);
        assert_eq!(SpaceTag::Center.len(n), 6);
        assert_eq!(SpaceTag::Trace(Side::Right).len(n), 1);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        let g = build_grid(10).unwrap();
        let sum = |t: SpaceTag| t.weights(&g).iter().sum::<f64>();
        assert!((sum(SpaceTag::Center) - 1.0).abs() < 1e-15);
        assert!((sum(SpaceTag::NodeAll) - 1.0).abs() < 1e-15);
        assert!((sum(SpaceTag::NodeFreeLeft) - 0.95).abs() < 1e-15);
        assert!((sum(SpaceTag::NodeInterior) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn offsets_are_contiguous() {
        let g = build_grid(4).unwrap();
        let l = StateLayout::new(
            &g,
            &[
                ("v1", SpaceTag::NodeFreeLeft),
                ("eta", SpaceTag::Center),
                ("tau_plus", SpaceTag::Trace(Side::Right)),
                ("s", SpaceTag::NodeInterior),
            ],
        )
        .unwrap();
        let offs: Vec<_> = l.blocks().iter().map(|b| (b.offset, b.len)).collect();
        assert_eq!(offs, vec![(0, 4), (4, 4), (8, 1), (9, 3)]);
        assert_eq!(l.dim(), 12);
        assert_eq!(l.positions().len(), 12);
        assert_eq!(l.positions()[8], 0.5);
    }

    #[test]
    fn duplicate_names_rejected() {
        let g = build_grid(4).unwrap();
        let r = StateLayout::new(&g, &[("a", SpaceTag::Center), ("a", SpaceTag::NodeAll)]);
        assert!(r.is_err());
    }

    #[test]
    fn state_rejects_bad_length_and_nan() {
        let g = build_grid(3).unwrap();
        let l = Arc::new(StateLayout::new(&g, &[("a", SpaceTag::Center)]).unwrap());
        assert!(StateVector::from_values(&l, vec![0.0; 2]).is_err());
        assert!(StateVector::from_values(&l, vec![0.0, f64::NAN, 1.0]).is_err());
    }
}
