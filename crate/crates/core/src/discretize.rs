//! Difference operators, trace-augmented operators and the skew-adjoint
//! spatial operators of the beam systems.
//!
//! Fields carrying boundary values live on nodes; their conjugates live on
//! cell centers. Every adjoint block is produced by [`adjoint_wrt`], so
//! skew-adjointness of the assembled operator holds by construction.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::space::{Grid, Side, SpaceTag, StateLayout, WeightMatrix};

pub const V1: &str = "v1";
pub const ETA: &str = "eta";
pub const S: &str = "s";
pub const V2: &str = "v2";
pub const TAU_PLUS: &str = "tau_plus";
pub const TAU_MINUS: &str = "tau_minus";
pub const TAU0_MINUS: &str = "tau0_minus";
pub const TAU0_PLUS: &str = "tau0_plus";
pub const TAU1_MINUS: &str = "tau1_minus";
pub const TAU1_PLUS: &str = "tau1_plus";

/// Forward difference from a node block to the center block.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDerivative {
    pub domain: SpaceTag,
    pub matrix: SparseMatrix,
}

/// Difference rows followed by endpoint selector rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceAugmentedOp {
    pub domain: SpaceTag,
    /// Tags of the range pieces: `Center` then one `Trace` per selector row.
    pub range: Vec<SpaceTag>,
    pub matrix: SparseMatrix,
}

impl TraceAugmentedOp {
    pub fn trace_sides(&self) -> Vec<Side> {
        self.range
            .iter()
            .filter_map(|t| match t {
                SpaceTag::Trace(s) => Some(*s),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkewOperator {
    pub matrix: SparseMatrix,
    pub weights: WeightMatrix,
}

impl SkewOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `(Du)_i = (u_{i+1} - u_i) / h`; nodes removed by `tag` contribute zero.
pub fn build_derivative(grid: &Grid, tag: SpaceTag) -> Result<DiscreteDerivative> {
    if !tag.is_node() {
        return Err(Error::InvalidDomain(format!(
            "derivative acts on node blocks, got {tag:?}"
        )));
    }
    let n = grid.n_cells();
    let inv_h = 1.0 / grid.h();
    let first = tag.first_node();
    let len = tag.len(n);
    let column = |node: usize| -> Option<usize> {
        (node >= first && node - first < len).then(|| node - first)
    };
    let mut t = Vec::with_capacity(2 * n);
    for i in 0..n {
        if let Some(c) = column(i + 1) {
            t.push((i, c, inv_h));
        }
        if let Some(c) = column(i) {
            t.push((i, c, -inv_h));
        }
    }
    Ok(DiscreteDerivative {
        domain: tag,
        matrix: SparseMatrix::from_triplets(n, len, &t),
    })
}

fn augment(grid: &Grid, tag: SpaceTag, sides: &[Side]) -> Result<TraceAugmentedOp> {
    let d = build_derivative(grid, tag)?;
    let n = grid.n_cells();
    let len = tag.len(n);
    let mut b = TripletBuilder::new(n + sides.len(), len);
    b.add_block(0, 0, &d.matrix, 1.0);
    let mut range = vec![SpaceTag::Center];
    for (k, side) in sides.iter().enumerate() {
        let node = match side {
            Side::Left => 0,
            Side::Right => n,
        };
        let col = node
            .checked_sub(tag.first_node())
            .filter(|c| *c < len)
            .ok_or_else(|| Error::InvalidDomain(format!("{tag:?} has no value at {side:?}")))?;
        b.push(n + k, col, 1.0);
        range.push(SpaceTag::Trace(*side));
    }
    Ok(TraceAugmentedOp {
        domain: tag,
        range,
        matrix: b.build(),
    })
}

/// Derivative on functions vanishing at the left end, plus the right trace.
pub fn build_b(grid: &Grid) -> TraceAugmentedOp {
    augment(grid, SpaceTag::NodeFreeLeft, &[Side::Right]).expect("valid tags")
}

/// Unconstrained derivative plus left and right traces.
pub fn build_b_tilde(grid: &Grid) -> TraceAugmentedOp {
    augment(grid, SpaceTag::NodeAll, &[Side::Left, Side::Right]).expect("valid tags")
}

/// `W_dom⁻¹ Opᵀ W_ran`: the adjoint of `op` between the weighted spaces.
pub fn adjoint_wrt(op: &SparseMatrix, w_dom: &WeightMatrix, w_ran: &WeightMatrix) -> Result<SparseMatrix> {
    if w_dom.len() != op.ncols() {
        return Err(Error::dim(op.ncols(), w_dom.len()));
    }
    if w_ran.len() != op.nrows() {
        return Err(Error::dim(op.nrows(), w_ran.len()));
    }
    let inv: Vec<f64> = w_dom.diag().iter().map(|w| 1.0 / w).collect();
    Ok(op.transpose().scale(&inv, w_ran.diag()))
}

fn weights_of(grid: &Grid, tags: &[SpaceTag]) -> WeightMatrix {
    WeightMatrix::from_diag(tags.iter().flat_map(|t| t.weights(grid)).collect())
        .expect("tag weights are positive")
}

/// Places `coupling` (field → conjugate blocks) in the conjugate rows and
/// `-adjoint(coupling)` in the field row.
fn place_skew_pair(
    builder: &mut TripletBuilder,
    layout: &StateLayout,
    field: &str,
    conjugate: &[&str],
    coupling: &SparseMatrix,
) -> Result<()> {
    let f = layout.require(field)?;
    let first = layout.require(conjugate[0])?;
    let mut end = first.offset;
    let mut tags = Vec::new();
    for name in conjugate {
        let b = layout.require(name)?;
        if b.offset != end {
            return Err(Error::Parameter(format!("conjugate blocks of {field} are not contiguous")));
        }
        end += b.len;
        tags.push(b.tag);
    }
    if coupling.nrows() != end - first.offset || coupling.ncols() != f.len {
        return Err(Error::dim(end - first.offset, coupling.nrows()));
    }
    let grid = layout.grid();
    let adj = adjoint_wrt(coupling, &weights_of(grid, &[f.tag]), &weights_of(grid, &tags))?;
    builder.add_block(first.offset, f.offset, coupling, 1.0);
    builder.add_block(f.offset, first.offset, &adj, -1.0);
    Ok(())
}

/// Layout of the damped beam: `(v1, (eta, tau_plus), s, v2)`.
pub fn timoshenko_layout(grid: &Grid) -> Arc<StateLayout> {
    Arc::new(
        StateLayout::new(
            grid,
            &[
                (V1, SpaceTag::NodeFreeLeft),
                (ETA, SpaceTag::Center),
                (TAU_PLUS, SpaceTag::Trace(Side::Right)),
                (S, SpaceTag::NodeInterior),
                (V2, SpaceTag::Center),
            ],
        )
        .expect("fixed layout"),
    )
}

/// Layout with dynamic conditions in all unknowns at both ends.
pub fn full_dynamic_layout(grid: &Grid) -> Arc<StateLayout> {
    Arc::new(
        StateLayout::new(
            grid,
            &[
                (V1, SpaceTag::NodeAll),
                (ETA, SpaceTag::Center),
                (TAU0_MINUS, SpaceTag::Trace(Side::Left)),
                (TAU0_PLUS, SpaceTag::Trace(Side::Right)),
                (S, SpaceTag::NodeAll),
                (V2, SpaceTag::Center),
                (TAU1_MINUS, SpaceTag::Trace(Side::Left)),
                (TAU1_PLUS, SpaceTag::Trace(Side::Right)),
            ],
        )
        .expect("fixed layout"),
    )
}

/// Layout of the single block system `(v1, (eta, tau_minus, tau_plus))`.
pub fn two_trace_layout(grid: &Grid) -> Arc<StateLayout> {
    Arc::new(
        StateLayout::new(
            grid,
            &[
                (V1, SpaceTag::NodeAll),
                (ETA, SpaceTag::Center),
                (TAU_MINUS, SpaceTag::Trace(Side::Left)),
                (TAU_PLUS, SpaceTag::Trace(Side::Right)),
            ],
        )
        .expect("fixed layout"),
    )
}

fn skew(layout: &StateLayout, builder: TripletBuilder) -> SkewOperator {
    SkewOperator {
        matrix: builder.build(),
        weights: layout.weights(),
    }
}

/// `A = [[0, B*, 0, 0], [-B, 0, 0, 0], [0, 0, 0, -∂], [0, 0, -∂̊, 0]]` on
/// [`timoshenko_layout`].
pub fn assemble_a_timoshenko(grid: &Grid) -> (Arc<StateLayout>, SkewOperator) {
    let layout = timoshenko_layout(grid);
    let n = layout.dim();
    let mut builder = TripletBuilder::new(n, n);
    let b = build_b(grid).matrix.scaled(-1.0);
    place_skew_pair(&mut builder, &layout, V1, &[ETA, TAU_PLUS], &b).expect("layout blocks");
    let d_int = build_derivative(grid, SpaceTag::NodeInterior)
        .expect("node tag")
        .matrix
        .scaled(-1.0);
    place_skew_pair(&mut builder, &layout, S, &[V2], &d_int).expect("layout blocks");
    let a = skew(&layout, builder);
    (layout, a)
}

/// `Ã` with `B̃` in both diagonal block pairs, on [`full_dynamic_layout`].
pub fn assemble_a_tilde(grid: &Grid) -> (Arc<StateLayout>, SkewOperator) {
    let layout = full_dynamic_layout(grid);
    let n = layout.dim();
    let mut builder = TripletBuilder::new(n, n);
    let bt = build_b_tilde(grid).matrix.scaled(-1.0);
    place_skew_pair(&mut builder, &layout, V1, &[ETA, TAU0_MINUS, TAU0_PLUS], &bt).expect("layout blocks");
    place_skew_pair(&mut builder, &layout, S, &[V2, TAU1_MINUS, TAU1_PLUS], &bt).expect("layout blocks");
    let a = skew(&layout, builder);
    (layout, a)
}

/// `[[0, B̃*], [-B̃, 0]]` on [`two_trace_layout`].
pub fn assemble_a_two_trace(grid: &Grid) -> (Arc<StateLayout>, SkewOperator) {
    let layout = two_trace_layout(grid);
    let n = layout.dim();
    let mut builder = TripletBuilder::new(n, n);
    let bt = build_b_tilde(grid).matrix.scaled(-1.0);
    place_skew_pair(&mut builder, &layout, V1, &[ETA, TAU_MINUS, TAU_PLUS], &bt).expect("layout blocks");
    let a = skew(&layout, builder);
    (layout, a)
}

/// `max |(W A + Aᵀ W)_ij|`.
pub fn skew_defect(a: &SkewOperator) -> f64 {
    let ones = vec![1.0; a.matrix.ncols()];
    let wa = a.matrix.scale(a.weights.diag(), &ones);
    wa.add_scaled(&wa.transpose(), 1.0).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_grid;

    #[test]
    fn derivative_examples() {
        let g = build_grid(2).unwrap();
        let d = build_derivative(&g, SpaceTag::NodeAll).unwrap();
        assert_eq!(d.matrix.mul_vec(&[0.0, 1.0, 0.0]), vec![2.0, -2.0]);
        let d = build_derivative(&g, SpaceTag::NodeFreeLeft).unwrap();
        assert_eq!(d.matrix.mul_vec(&[1.0, 0.0]), vec![2.0, -2.0]);
        let g = build_grid(7).unwrap();
        let d = build_derivative(&g, SpaceTag::NodeAll).unwrap();
        assert!(d.matrix.mul_vec(&[3.5; 8]).iter().all(|v| *v == 0.0));
        assert!(matches!(
            build_derivative(&g, SpaceTag::Center),
            Err(Error::InvalidDomain(_))
        ));
    }

    #[test]
    fn derivative_rows_have_at_most_two_entries() {
        let g = build_grid(5).unwrap();
        for tag in [SpaceTag::NodeAll, SpaceTag::NodeFreeLeft, SpaceTag::NodeInterior] {
            let d = build_derivative(&g, tag).unwrap();
            for i in 0..5 {
                let row: Vec<_> = d.matrix.row(i).collect();
                assert!(row.len() <= 2);
                assert!(row.iter().all(|(_, v)| v.abs() == 5.0));
            }
        }
    }

    #[test]
    fn b_examples() {
        let g = build_grid(2).unwrap();
        let b = build_b(&g);
        let (a, c) = (0.3, -1.7);
        assert_eq!(b.matrix.mul_vec(&[a, c]), vec![2.0 * a, 2.0 * (c - a), c]);
        assert_eq!(b.matrix.mul_vec(&[0.0, 0.0]), vec![0.0; 3]);
        assert_eq!(b.trace_sides(), vec![Side::Right]);
        let last = b.matrix.mul_vec(&[0.0, 1.0]);
        assert_eq!(last[2], 1.0);
    }

    #[test]
    fn b_tilde_examples() {
        let g = build_grid(2).unwrap();
        let bt = build_b_tilde(&g);
        let (a, b, c) = (1.0, -2.0, 0.5);
        assert_eq!(
            bt.matrix.mul_vec(&[a, b, c]),
            vec![2.0 * (b - a), 2.0 * (c - b), a, c]
        );
        assert_eq!(bt.matrix.mul_vec(&[1.0, 1.0, 1.0]), vec![0.0, 0.0, 1.0, 1.0]);
        assert_eq!(bt.trace_sides(), vec![Side::Left, Side::Right]);
    }

    #[test]
    fn adjoint_of_negative_interior_derivative_n3() {
        let g = build_grid(3).unwrap();
        let d = build_derivative(&g, SpaceTag::NodeInterior).unwrap().matrix;
        let w_int = weights_of(&g, &[SpaceTag::NodeInterior]);
        let w_c = weights_of(&g, &[SpaceTag::Center]);
        let adj = adjoint_wrt(&d.scaled(-1.0), &w_int, &w_c).unwrap();
        let expected = [vec![-3.0, 3.0, 0.0], vec![0.0, -3.0, 3.0]];
        for (row, exp) in adj.to_dense().iter().zip(&expected) {
            for (a, e) in row.iter().zip(exp) {
                assert!((a - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn adjoint_is_an_involution() {
        let g = build_grid(6).unwrap();
        let b = build_b(&g);
        let w_dom = weights_of(&g, &[b.domain]);
        let w_ran = weights_of(&g, &b.range);
        let adj = adjoint_wrt(&b.matrix, &w_dom, &w_ran).unwrap();
        let back = adjoint_wrt(&adj, &w_ran, &w_dom).unwrap();
        let diff = back.add_scaled(&b.matrix, -1.0).max_abs();
        assert!(diff <= 1e-15 * b.matrix.max_abs());
    }

    #[test]
    fn timoshenko_operator_structure() {
        let g = build_grid(8).unwrap();
        let (layout, a) = assemble_a_timoshenko(&g);
        assert!(skew_defect(&a) <= 1e-13 / g.h());
        let mut u = vec![0.0; layout.dim()];
        assert!(a.matrix.mul_vec(&u).iter().all(|v| *v == 0.0));
        let tau = layout.block(TAU_PLUS).unwrap().offset;
        u[tau] = 1.0;
        let out = a.matrix.mul_vec(&u);
        let v1 = layout.block(V1).unwrap();
        for (i, v) in out.iter().enumerate() {
            if i == v1.offset + v1.len - 1 {
                assert!(*v != 0.0);
            } else {
                assert_eq!(*v, 0.0, "entry {i}");
            }
        }
    }

    #[test]
    fn a_tilde_structure() {
        let g = build_grid(8).unwrap();
        let (layout, a) = assemble_a_tilde(&g);
        assert!(skew_defect(&a) <= 1e-13 / g.h());
        let group1: Vec<usize> = [V1, ETA, TAU0_MINUS, TAU0_PLUS]
            .iter()
            .flat_map(|b| layout.block(b).unwrap().range())
            .collect();
        let group2: Vec<usize> = [S, V2, TAU1_MINUS, TAU1_PLUS]
            .iter()
            .flat_map(|b| layout.block(b).unwrap().range())
            .collect();
        assert_eq!(a.matrix.select(&group1, &group2).nnz(), 0);
        assert_eq!(a.matrix.select(&group2, &group1).nnz(), 0);
        assert!(a.matrix.mul_vec(&vec![0.0; layout.dim()]).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn skew_defect_detects_non_skew() {
        let g = build_grid(4).unwrap();
        let layout = timoshenko_layout(&g);
        let w = layout.weights();
        let zero = SkewOperator {
            matrix: SparseMatrix::zeros(layout.dim(), layout.dim()),
            weights: w.clone(),
        };
        assert_eq!(skew_defect(&zero), 0.0);
        let id = SkewOperator {
            matrix: SparseMatrix::identity(layout.dim()),
            weights: w.clone(),
        };
        let max_w = w.diag().iter().copied().fold(0.0, f64::max);
        assert_eq!(skew_defect(&id), 2.0 * max_w);
    }

    #[test]
    fn summation_by_parts_reproduces_boundary_terms() {
        // ⟨Du, v⟩ against ∫u'v = [uv] - ∫uv' with smooth u, v.
        let u = |x: f64| (1.3 * x).sin() + x * x;
        let v = |x: f64| (2.0 * x).cos();
        let uv_dv = |x: f64| u(x) * (-2.0 * (2.0 * x).sin());
        let exact = {
            // Gauss–Legendre, 5 points on 200 panels.
            let nodes = [0.0, 0.538469310105683, -0.538469310105683, 0.906179845938664, -0.906179845938664];
            let weights = [0.568888888888889, 0.478628670499366, 0.478628670499366, 0.236926885056189, 0.236926885056189];
            let panels = 200;
            let mut s = 0.0;
            for p in 0..panels {
                let a = -0.5 + p as f64 / panels as f64;
                let half = 0.5 / panels as f64;
                for (xi, wi) in nodes.iter().zip(weights) {
                    s += wi * half * uv_dv(a + half + half * xi);
                }
            }
            u(0.5) * v(0.5) - u(-0.5) * v(-0.5) - s
        };
        let mut errors = Vec::new();
        for n in [16, 32, 64] {
            let g = build_grid(n).unwrap();
            let d = build_derivative(&g, SpaceTag::NodeAll).unwrap().matrix;
            let un: Vec<f64> = g.nodes().iter().map(|x| u(*x)).collect();
            let vc: Vec<f64> = g.centers().iter().map(|x| v(*x)).collect();
            let w_c = weights_of(&g, &[SpaceTag::Center]);
            let w_n = weights_of(&g, &[SpaceTag::NodeAll]);
            let du = d.mul_vec(&un);
            let lhs = w_c.inner(&du, &vc).unwrap();
            let adj = adjoint_wrt(&d, &w_n, &w_c).unwrap();
            let rhs = w_n.inner(&un, &adj.mul_vec(&vc)).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
            errors.push((lhs - exact).abs());
        }
        for pair in errors.windows(2) {
            assert!(pair[0] / pair[1] > 3.5, "{errors:?}");
        }
    }
}
