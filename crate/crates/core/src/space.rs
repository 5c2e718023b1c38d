//! Finite weighted point spaces and the vector-lattice structure on them.
//!
//! A [`GroundSpace`] is an ordered list of points with strictly positive
//! rational weights, carved into blocks (the cells of the coarsest
//! conditioning partition). Functions on the space form a vector lattice
//! under pointwise operations, and pointwise multiplication with the
//! constant-one function as unit makes them an f-algebra. Events act on
//! functions as band projections, i.e. multiplication by indicators.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::Rat;

/// Weighted point set partitioned into blocks. Point order is fixed at
/// construction and every value vector in the crate uses it. Blocks keep
/// their input order; members within a block are stored in point order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundSpace {
    ids: Vec<String>,
    weights: Vec<Rat>,
    index: BTreeMap<String, usize>,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
    block_masses: Vec<Rat>,
}

impl GroundSpace {
    /// Validate and build a space. Weights must be strictly positive, ids
    /// unique, and `blocks` a partition of the ids.
    pub fn new(points: Vec<(String, Rat)>, blocks: Vec<Vec<String>>) -> Result<GroundSpace> {
        let mut ids = Vec::with_capacity(points.len());
        let mut weights = Vec::with_capacity(points.len());
        let mut index = BTreeMap::new();
        for (id, weight) in points {
            if index.contains_key(&id) {
                return Err(Error::DuplicatePointId { id });
            }
            if !weight.is_positive() {
                return Err(Error::NonpositiveWeight {
                    id,
                    weight: weight.to_string(),
                });
            }
            index.insert(id.clone(), ids.len());
            ids.push(id);
            weights.push(weight);
        }
        let block_cells = resolve_cells(&index, &blocks, "blocks")?;
        let block_of = validate_partition(ids.len(), &block_cells, |id| &ids[id])
            .map_err(|detail| Error::BlocksNotPartition { detail })?;
        let mut blocks: Vec<Vec<usize>> = block_cells;
        for block in &mut blocks {
            block.sort_unstable();
        }
        let block_masses = blocks
            .iter()
            .map(|members| members.iter().map(|&p| weights[p].clone()).sum())
            .collect();
        Ok(GroundSpace {
            ids,
            weights,
            index,
            blocks,
            block_of,
            block_masses,
        })
    }

    pub fn point_count(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, point: usize) -> &str {
        &self.ids[point]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn weight(&self, point: usize) -> &Rat {
        &self.weights[point]
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Blocks in input order, members in point order.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, point: usize) -> usize {
        self.block_of[point]
    }

    pub fn block_members(&self, block: usize) -> Result<&[usize]> {
        self.blocks
            .get(block)
            .map(Vec::as_slice)
            .ok_or(Error::InvalidBlock {
                index: block,
                count: self.blocks.len(),
            })
    }

    pub fn block_mass(&self, block: usize) -> Result<&Rat> {
        self.block_masses.get(block).ok_or(Error::InvalidBlock {
            index: block,
            count: self.blocks.len(),
        })
    }
}

pub(crate) fn same_space(a: &Arc<GroundSpace>, b: &Arc<GroundSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn check_same_space(a: &Arc<GroundSpace>, b: &Arc<GroundSpace>) -> Result<()> {
    if same_space(a, b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

fn resolve_cells(
    index: &BTreeMap<String, usize>,
    cells: &[Vec<String>],
    context: &str,
) -> Result<Vec<Vec<usize>>> {
    cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            cell.iter()
                .map(|id| {
                    index.get(id).copied().ok_or_else(|| Error::UnknownPointId {
                        id: id.clone(),
                        context: format!("{context}[{i}]"),
                    })
                })
                .collect()
        })
        .collect()
}

/// Check that `cells` covers every point exactly once with no empty cell;
/// returns the point-to-cell map.
fn validate_partition<'a>(
    point_count: usize,
    cells: &[Vec<usize>],
    id_of: impl Fn(usize) -> &'a str,
) -> std::result::Result<Vec<usize>, String> {
    let mut owner = vec![usize::MAX; point_count];
    for (c, cell) in cells.iter().enumerate() {
        if cell.is_empty() {
            return Err(format!("cell {c} is empty"));
        }
        for &p in cell {
            if owner[p] != usize::MAX {
                return Err(format!("point {:?} appears in two cells", id_of(p)));
            }
            owner[p] = c;
        }
    }
    if let Some(p) = owner.iter().position(|&c| c == usize::MAX) {
        return Err(format!("point {:?} is not covered", id_of(p)));
    }
    Ok(owner)
}

/// Finite surrogate for a conditioning sub-σ-algebra: a partition of the
/// point set. Cells are canonicalized (members ascending, cells ordered by
/// smallest member) so equality and refinement antisymmetry are decidable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    space: Arc<GroundSpace>,
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
}

impl Partition {
    pub fn new(
        space: &Arc<GroundSpace>,
        cells: Vec<Vec<String>>,
        require_block_refinement: bool,
    ) -> Result<Partition> {
        let index_cells = resolve_cells(&space.index, &cells, "cells")?;
        Partition::from_index_cells(space, index_cells, require_block_refinement)
    }

    pub fn from_index_cells(
        space: &Arc<GroundSpace>,
        mut cells: Vec<Vec<usize>>,
        require_block_refinement: bool,
    ) -> Result<Partition> {
        let cell_of = validate_partition(space.point_count(), &cells, |p| space.id(p))
            .map_err(|detail| Error::NotAPartition { detail })?;
        for cell in &mut cells {
            cell.sort_unstable();
        }
        cells.sort_by_key(|cell| cell[0]);
        let mut cell_of = cell_of;
        for (c, cell) in cells.iter().enumerate() {
            for &p in cell {
                cell_of[p] = c;
            }
        }
        let partition = Partition {
            space: Arc::clone(space),
            cells,
            cell_of,
        };
        if require_block_refinement {
            if let Some(cell) = partition
                .cells
                .iter()
                .find(|cell| cell.iter().any(|&p| space.block_of(p) != space.block_of(cell[0])))
            {
                let ids: Vec<&str> = cell.iter().map(|&p| space.id(p)).collect();
                return Err(Error::RefinementViolation {
                    detail: format!("cell {ids:?} straddles blocks"),
                });
            }
        }
        Ok(partition)
    }

    /// Finest partition: one cell per point.
    pub fn discrete(space: &Arc<GroundSpace>) -> Partition {
        let cells = (0..space.point_count()).map(|p| vec![p]).collect();
        Partition::from_index_cells(space, cells, false).expect("singletons always partition")
    }

    /// Coarsest partition: a single cell.
    pub fn single_cell(space: &Arc<GroundSpace>) -> Partition {
        let cells = vec![(0..space.point_count()).collect()];
        Partition::from_index_cells(space, cells, false).expect("one full cell always partitions")
    }

    /// The space's block structure as a partition.
    pub fn blocks(space: &Arc<GroundSpace>) -> Partition {
        Partition::from_index_cells(space, space.blocks().to_vec(), false)
            .expect("blocks are validated at space construction")
    }

    pub fn space(&self) -> &Arc<GroundSpace> {
        &self.space
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_of(&self, point: usize) -> usize {
        self.cell_of[point]
    }

    pub fn cell_members(&self, cell: usize) -> &[usize] {
        &self.cells[cell]
    }

    pub fn cell_ids(&self, cell: usize) -> Vec<String> {
        self.cells[cell]
            .iter()
            .map(|&p| self.space.id(p).to_owned())
            .collect()
    }

    /// True iff every cell of `self` lies inside some cell of `other`.
    pub fn refines(&self, other: &Partition) -> Result<bool> {
        check_same_space(&self.space, &other.space)?;
        Ok(self
            .cells
            .iter()
            .all(|cell| cell.iter().all(|&p| other.cell_of(p) == other.cell_of(cell[0]))))
    }

    /// True iff every cell lies inside one block.
    pub fn refines_blocks(&self) -> bool {
        self.cells.iter().all(|cell| {
            cell.iter()
                .all(|&p| self.space.block_of(p) == self.space.block_of(cell[0]))
        })
    }

    /// Ordinals of the cells contained in `block`, in canonical cell order.
    /// Meaningful for partitions that refine the blocks.
    pub fn cells_in_block(&self, block: usize) -> Result<Vec<usize>> {
        if block >= self.space.block_count() {
            return Err(Error::InvalidBlock {
                index: block,
                count: self.space.block_count(),
            });
        }
        Ok((0..self.cells.len())
            .filter(|&c| self.space.block_of(self.cells[c][0]) == block)
            .collect())
    }
}

/// Pointwise lattice and f-algebra operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeOp {
    Sup,
    Inf,
    Plus,
    Minus,
    Times,
}

/// A rational-valued function on the points of a space, in point order.
/// These are the lattice elements everything else acts on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeFunction {
    space: Arc<GroundSpace>,
    values: Vec<Rat>,
}

impl LatticeFunction {
    pub fn new(space: &Arc<GroundSpace>, values: Vec<Rat>) -> Result<LatticeFunction> {
        if values.len() != space.point_count() {
            return Err(Error::LengthMismatch {
                expected: space.point_count(),
                got: values.len(),
            });
        }
        Ok(LatticeFunction {
            space: Arc::clone(space),
            values,
        })
    }

    pub fn constant(space: &Arc<GroundSpace>, value: Rat) -> LatticeFunction {
        LatticeFunction {
            space: Arc::clone(space),
            values: vec![value; space.point_count()],
        }
    }

    /// The weak order unit e: constant one.
    pub fn unit(space: &Arc<GroundSpace>) -> LatticeFunction {
        LatticeFunction::constant(space, Rat::one())
    }

    pub fn zero(space: &Arc<GroundSpace>) -> LatticeFunction {
        LatticeFunction::constant(space, Rat::zero())
    }

    pub fn space(&self) -> &Arc<GroundSpace> {
        &self.space
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn value(&self, point: usize) -> &Rat {
        &self.values[point]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Rat::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| !v.is_negative())
    }

    fn zip(&self, other: &LatticeFunction, op: impl Fn(&Rat, &Rat) -> Rat) -> Result<LatticeFunction> {
        check_same_space(&self.space, &other.space)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| op(a, b))
            .collect();
        Ok(LatticeFunction {
            space: Arc::clone(&self.space),
            values,
        })
    }

    /// Pointwise combination; `Times` is the f-algebra product with
    /// [`LatticeFunction::unit`] as algebraic unit.
    pub fn combine(&self, other: &LatticeFunction, op: LatticeOp) -> Result<LatticeFunction> {
        match op {
            LatticeOp::Sup => self.sup(other),
            LatticeOp::Inf => self.inf(other),
            LatticeOp::Plus => self.add(other),
            LatticeOp::Minus => self.sub(other),
            LatticeOp::Times => self.mul(other),
        }
    }

    pub fn sup(&self, other: &LatticeFunction) -> Result<LatticeFunction> {
        self.zip(other, |a, b| if a >= b { a.clone() } else { b.clone() })
    }

    pub fn inf(&self, other: &LatticeFunction) -> Result<LatticeFunction> {
        self.zip(other, |a, b| if a <= b { a.clone() } else { b.clone() })
    }

    pub fn add(&self, other: &LatticeFunction) -> Result<LatticeFunction> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &LatticeFunction) -> Result<LatticeFunction> {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &LatticeFunction) -> Result<LatticeFunction> {
        self.zip(other, |a, b| a * b)
    }

    pub fn neg(&self) -> LatticeFunction {
        self.map(|v| -v)
    }

    pub fn scale(&self, factor: &Rat) -> LatticeFunction {
        self.map(|v| v * factor)
    }

    pub fn abs(&self) -> LatticeFunction {
        self.map(Rat::abs)
    }

    pub fn positive_part(&self) -> LatticeFunction {
        self.map(|v| if v.is_positive() { v.clone() } else { Rat::zero() })
    }

    pub fn negative_part(&self) -> LatticeFunction {
        self.map(|v| if v.is_negative() { -v } else { Rat::zero() })
    }

    /// `(f⁺, f⁻, |f|)` with `f = f⁺ − f⁻`, `|f| = f⁺ + f⁻`, `f⁺ ∧ f⁻ = 0`.
    pub fn decompose(&self) -> (LatticeFunction, LatticeFunction, LatticeFunction) {
        (self.positive_part(), self.negative_part(), self.abs())
    }

    fn map(&self, op: impl Fn(&Rat) -> Rat) -> LatticeFunction {
        LatticeFunction {
            space: Arc::clone(&self.space),
            values: self.values.iter().map(op).collect(),
        }
    }

    /// Pointwise order: `self ≤ other` everywhere.
    pub fn le(&self, other: &LatticeFunction) -> Result<bool> {
        check_same_space(&self.space, &other.space)?;
        Ok(self.values.iter().zip(&other.values).all(|(a, b)| a <= b))
    }
}

/// A set of points. Acts on functions as the band projection
/// `f ↦ 𝟙_A · f`. Membership in the events of a partition `U` means the
/// set is a union of `U`-cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventSet {
    space: Arc<GroundSpace>,
    members: BTreeSet<usize>,
}

impl EventSet {
    pub fn new(space: &Arc<GroundSpace>, ids: &[String]) -> Result<EventSet> {
        let members = ids
            .iter()
            .map(|id| {
                space.index_of(id).ok_or_else(|| Error::UnknownPointId {
                    id: id.clone(),
                    context: "event".to_owned(),
                })
            })
            .collect::<Result<BTreeSet<usize>>>()?;
        Ok(EventSet {
            space: Arc::clone(space),
            members,
        })
    }

    pub fn from_indices(space: &Arc<GroundSpace>, members: impl IntoIterator<Item = usize>) -> EventSet {
        let members: BTreeSet<usize> = members.into_iter().collect();
        debug_assert!(members.iter().all(|&p| p < space.point_count()));
        EventSet {
            space: Arc::clone(space),
            members,
        }
    }

    pub fn empty(space: &Arc<GroundSpace>) -> EventSet {
        EventSet::from_indices(space, std::iter::empty())
    }

    pub fn full(space: &Arc<GroundSpace>) -> EventSet {
        EventSet::from_indices(space, 0..space.point_count())
    }

    pub fn space(&self) -> &Arc<GroundSpace> {
        &self.space
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, point: usize) -> bool {
        self.members.contains(&point)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn mass(&self) -> Rat {
        self.members.iter().map(|&p| self.space.weight(p).clone()).sum()
    }

    pub fn complement(&self) -> EventSet {
        EventSet::from_indices(
            &self.space,
            (0..self.space.point_count()).filter(|p| !self.members.contains(p)),
        )
    }

    /// Member ids sorted lexicographically, the form witnesses are
    /// reported in.
    pub fn sorted_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.members.iter().map(|&p| self.space.id(p).to_owned()).collect();
        ids.sort();
        ids
    }

    /// The indicator function 𝟙_A, i.e. the band projection applied to e.
    pub fn indicator(&self) -> LatticeFunction {
        let values = (0..self.space.point_count())
            .map(|p| if self.members.contains(&p) { Rat::one() } else { Rat::zero() })
            .collect();
        LatticeFunction {
            space: Arc::clone(&self.space),
            values,
        }
    }

    /// Band projection: `(Pf)(ω) = f(ω)` on the set, `0` elsewhere.
    pub fn band_apply(&self, f: &LatticeFunction) -> Result<LatticeFunction> {
        check_same_space(&self.space, &f.space)?;
        let values = f
            .values
            .iter()
            .enumerate()
            .map(|(p, v)| if self.members.contains(&p) { v.clone() } else { Rat::zero() })
            .collect();
        Ok(LatticeFunction {
            space: Arc::clone(&self.space),
            values,
        })
    }

    /// True iff the set is a union of cells of `partition`.
    pub fn is_measurable(&self, partition: &Partition) -> Result<bool> {
        check_same_space(&self.space, &partition.space)?;
        Ok(partition.cells().iter().all(|cell| {
            let inside = cell.iter().filter(|p| self.members.contains(p)).count();
            inside == 0 || inside == cell.len()
        }))
    }
}

/// All events measurable for `partition` inside one block: the `2^k`
/// unions of the `k` cells the block contains, in increasing order of the
/// cell-inclusion bitmask (∅ first, the whole block last).
pub fn enumerate_events(partition: &Partition, block: usize) -> Result<EventEnumeration> {
    if !partition.refines_blocks() {
        return Err(Error::RefinementViolation {
            detail: "event enumeration requires a partition that refines the blocks".to_owned(),
        });
    }
    let cells = partition.cells_in_block(block)?;
    if cells.len() > 62 {
        return Err(Error::TooManyCells {
            cells: cells.len(),
            limit: 62,
        });
    }
    let count = 1u64 << cells.len() as u32;
    Ok(EventEnumeration {
        partition: partition.clone(),
        cells,
        next_mask: 0,
        count,
    })
}

#[derive(Debug)]
pub struct EventEnumeration {
    partition: Partition,
    cells: Vec<usize>,
    next_mask: u64,
    count: u64,
}

impl EventEnumeration {
    /// Cell ordinals (into the partition) covered by the enumeration.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn event_for_mask(&self, mask: u64) -> EventSet {
        let members = self
            .cells
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> *i as u32 & 1 == 1)
            .flat_map(|(_, &c)| self.partition.cell_members(c).iter().copied())
            .collect::<Vec<usize>>();
        EventSet::from_indices(&self.partition.space, members)
    }
}

impl Iterator for EventEnumeration {
    type Item = EventSet;

    fn next(&mut self) -> Option<EventSet> {
        if self.next_mask >= self.count {
            return None;
        }
        let event = self.event_for_mask(self.next_mask);
        self.next_mask += 1;
        Some(event)
    }
}
