//! Strong (α) and uniform (φ) mixing coefficients between conditioning
//! partitions, conditioned on the block structure.
//!
//! The strong coefficient is the supremum of `|T(𝟙_A·𝟙_B) − T𝟙_A·T𝟙_B|`
//! over events A measurable for U and B measurable for V; the uniform
//! coefficient is the supremum of `‖U𝟙_B − T𝟙_B‖∞` over B. Both factor
//! over blocks, so each block is maximized separately over the events it
//! contains and the results are assembled into a block-constant function.
//!
//! Two independent algorithms compute α: [`alpha_brute`] enumerates all
//! event pairs, while [`alpha_fast`] enumerates only the B side and
//! resolves the A side analytically through the band where
//! `U(𝟙_B − T𝟙_B)` is positive. They must agree exactly, and the test
//! suites hold them to that.

use std::sync::Arc;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cond::{is_compatible, CondExpectation};
use crate::error::{Error, Result};
use crate::norms::{norm, NormKind, RangeElement};
use crate::rat::Rat;
use crate::space::{check_same_space, EventSet, GroundSpace, LatticeFunction, Partition};

/// How a report was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Full enumeration of the defining supremum.
    Brute,
    /// B-side enumeration with the analytic positive-band maximizer.
    Fast,
    /// Blockwise probability-space formula under the normalized measure.
    Classical,
    /// Blockwise conditional-probability formula under the normalized
    /// measure.
    Conditioned,
}

/// Optimizing events for one block: the B-side event, plus the A-side
/// event when the algorithm produces one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockWitness {
    pub block: usize,
    pub q: EventSet,
    pub p: Option<EventSet>,
}

/// A computed coefficient with its provenance: the block-constant value,
/// one witness per block, the algorithm used, and how many candidates
/// were enumerated.
#[derive(Debug, Clone)]
pub struct MixingReport {
    pub coefficient: RangeElement,
    pub witnesses: Vec<BlockWitness>,
    pub method: Method,
    pub enumeration_count: u64,
}

impl MixingReport {
    /// Coefficient value per block, in input block order.
    pub fn block_values(&self) -> Vec<Rat> {
        let space = self.coefficient.owner().space();
        space
            .blocks()
            .iter()
            .map(|members| self.coefficient.value().value(members[0]).clone())
            .collect()
    }
}

fn require_mixing_inputs(
    t: &CondExpectation,
    u: &CondExpectation,
    v: &CondExpectation,
) -> Result<()> {
    if !is_compatible(u, t)? || !is_compatible(v, t)? {
        return Err(Error::Incompatible);
    }
    if !t.conditions_on_blocks() {
        return Err(Error::ConditionerNotBlocks);
    }
    Ok(())
}

/// Per-block mass tables for one (A-side, B-side) pair of partitions.
struct BlockTables {
    mass: Rat,
    a_cells: Vec<usize>,
    b_cells: Vec<usize>,
    a_masses: Vec<Rat>,
    b_masses: Vec<Rat>,
    /// `inter[i][j]` = mass of (i-th A-cell ∩ j-th B-cell).
    inter: Vec<Vec<Rat>>,
}

impl BlockTables {
    fn build(
        space: &Arc<GroundSpace>,
        a: &Partition,
        b: &Partition,
        block: usize,
    ) -> Result<BlockTables> {
        let members = space.block_members(block)?;
        let a_cells = a.cells_in_block(block)?;
        let b_cells = b.cells_in_block(block)?;
        let a_local: std::collections::BTreeMap<usize, usize> =
            a_cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let b_local: std::collections::BTreeMap<usize, usize> =
            b_cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut a_masses = vec![Rat::zero(); a_cells.len()];
        let mut b_masses = vec![Rat::zero(); b_cells.len()];
        let mut inter = vec![vec![Rat::zero(); b_cells.len()]; a_cells.len()];
        for &p in members {
            let i = a_local[&a.cell_of(p)];
            let j = b_local[&b.cell_of(p)];
            let w = space.weight(p);
            a_masses[i] += w;
            b_masses[j] += w;
            inter[i][j] += w;
        }
        Ok(BlockTables {
            mass: space.block_mass(block)?.clone(),
            a_cells,
            b_cells,
            a_masses,
            b_masses,
            inter,
        })
    }

    /// Divide every mass by the block mass, turning the tables into the
    /// normalized probability measure of the block.
    fn normalized(mut self) -> BlockTables {
        let mass = self.mass.clone();
        for m in self.a_masses.iter_mut().chain(self.b_masses.iter_mut()) {
            *m /= &mass;
        }
        for row in &mut self.inter {
            for m in row {
                *m /= &mass;
            }
        }
        self.mass = Rat::from_integer(1.into());
        self
    }

    fn guard_width(&self) -> Result<()> {
        // the subset-sum tables hold 2^k exact rationals per side
        const LIMIT: usize = 20;
        for len in [self.a_cells.len(), self.b_cells.len()] {
            if len > LIMIT {
                return Err(Error::TooManyCells { cells: len, limit: LIMIT });
            }
        }
        Ok(())
    }

    /// Masses of all unions of A-cells, indexed by inclusion bitmask.
    fn a_mask_masses(&self) -> Vec<Rat> {
        mask_masses(&self.a_masses)
    }

    fn b_mask_masses(&self) -> Vec<Rat> {
        mask_masses(&self.b_masses)
    }

    /// Mass of (A-cells in `a_mask`) ∩ (B-cells in `b_mask`).
    fn inter_mass(&self, a_mask: u64, b_mask: u64) -> Rat {
        let mut total = Rat::zero();
        for i in bits(a_mask) {
            for j in bits(b_mask) {
                total += &self.inter[i][j];
            }
        }
        total
    }

    /// Per A-cell mass of the intersection with the B-event `b_mask`.
    fn b_event_by_a_cell(&self, b_mask: u64) -> Vec<Rat> {
        (0..self.a_cells.len())
            .map(|i| bits(b_mask).map(|j| self.inter[i][j].clone()).sum())
            .collect()
    }
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

/// Subset-sum table over all `2^k` bitmasks.
fn mask_masses(masses: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); 1 << masses.len() as u32];
    for mask in 1..out.len() {
        let low = mask.trailing_zeros() as usize;
        out[mask] = out[mask & (mask - 1)].clone() + &masses[low];
    }
    out
}

fn event_for(partition: &Partition, cells: &[usize], mask: u64) -> EventSet {
    let members: Vec<usize> = bits(mask)
        .flat_map(|i| partition.cell_members(cells[i]).iter().copied())
        .collect();
    EventSet::from_indices(partition.space(), members)
}

fn assemble_coefficient(
    t: &CondExpectation,
    block_values: Vec<Rat>,
) -> Result<RangeElement> {
    let space = t.space();
    let values = (0..space.point_count())
        .map(|p| block_values[space.block_of(p)].clone())
        .collect();
    RangeElement::new(t.clone(), LatticeFunction::new(space, values)?)
}

/// Strong mixing coefficient by full enumeration: every (A, B) event pair
/// per block, lexicographically first maximizer kept as the witness.
pub fn alpha_brute(
    t: &CondExpectation,
    u: &CondExpectation,
    v: &CondExpectation,
) -> Result<MixingReport> {
    require_mixing_inputs(t, u, v)?;
    let space = t.space();
    let mut block_values = Vec::with_capacity(space.block_count());
    let mut witnesses = Vec::with_capacity(space.block_count());
    let mut enumerated = 0u64;
    for block in 0..space.block_count() {
        let tables = BlockTables::build(space, u.partition(), v.partition(), block)?;
        tables.guard_width()?;
        let a_mass = tables.a_mask_masses();
        let b_mass = tables.b_mask_masses();
        // maximize |μ(A∩B)·M − μ(A)·μ(B)|; the fixed denominator M² is
        // divided out once at the end
        let mut best = Rat::zero();
        let mut best_pair = (0u64, 0u64);
        for a_mask in 0..a_mass.len() as u64 {
            // row of intersection masses for this A-event, per B-cell
            let row: Vec<Rat> = (0..tables.b_cells.len())
                .map(|j| bits(a_mask).map(|i| tables.inter[i][j].clone()).sum())
                .collect();
            let mut inter_by_b = vec![Rat::zero(); b_mass.len()];
            for b_mask in 1..b_mass.len() {
                let low = b_mask.trailing_zeros() as usize;
                inter_by_b[b_mask] = inter_by_b[b_mask & (b_mask - 1)].clone() + &row[low];
            }
            for b_mask in 0..b_mass.len() as u64 {
                let scaled = (&inter_by_b[b_mask as usize] * &tables.mass
                    - &a_mass[a_mask as usize] * &b_mass[b_mask as usize])
                    .abs();
                enumerated += 1;
                if scaled > best {
                    best = scaled;
                    best_pair = (a_mask, b_mask);
                }
            }
        }
        block_values.push(best / (&tables.mass * &tables.mass));
        witnesses.push(BlockWitness {
            block,
            q: event_for(v.partition(), &tables.b_cells, best_pair.1),
            p: Some(event_for(u.partition(), &tables.a_cells, best_pair.0)),
        });
    }
    Ok(MixingReport {
        coefficient: assemble_coefficient(t, block_values)?,
        witnesses,
        method: Method::Brute,
        enumeration_count: enumerated,
    })
}

/// Per-block scan over B-side events. For each event B (by bitmask) the
/// visitor receives the deviation vector `d` over A-cells, where
/// `d_i = μ(A_i∩B)/μ(A_i) − μ(B)/M` is the value of `U𝟙_B − T𝟙_B` on the
/// i-th A-cell.
fn scan_b_events(
    tables: &BlockTables,
    mut visit: impl FnMut(u64, &[Rat]),
) -> u64 {
    let b_mass = tables.b_mask_masses();
    let mut count = 0u64;
    for b_mask in 0..b_mass.len() as u64 {
        let by_cell = tables.b_event_by_a_cell(b_mask);
        let t_value = &b_mass[b_mask as usize] / &tables.mass;
        let d: Vec<Rat> = by_cell
            .iter()
            .zip(&tables.a_masses)
            .map(|(m, a)| m / a - &t_value)
            .collect();
        visit(b_mask, &d);
        count += 1;
    }
    count
}

/// Strong mixing coefficient with the A side resolved analytically: for a
/// fixed B the supremum over A is attained on the band where
/// `U(𝟙_B − T𝟙_B)` is positive (and its negative counterpart), so only B
/// is enumerated. Exactly equals [`alpha_brute`].
pub fn alpha_fast(
    t: &CondExpectation,
    u: &CondExpectation,
    v: &CondExpectation,
) -> Result<MixingReport> {
    require_mixing_inputs(t, u, v)?;
    let space = t.space();
    let mut block_values = Vec::with_capacity(space.block_count());
    let mut witnesses = Vec::with_capacity(space.block_count());
    let mut enumerated = 0u64;
    for block in 0..space.block_count() {
        let tables = BlockTables::build(space, u.partition(), v.partition(), block)?;
        tables.guard_width()?;
        let mut best = Rat::zero();
        let mut best_q = 0u64;
        let mut best_band = 0u64;
        enumerated += scan_b_events(&tables, |b_mask, d| {
            // T[d⁺] ∨ T[d⁻] on the block
            let mut plus = Rat::zero();
            let mut minus = Rat::zero();
            let mut band = 0u64;
            for (i, di) in d.iter().enumerate() {
                if di.is_positive() {
                    plus += di * &tables.a_masses[i];
                    band |= 1 << i as u32;
                } else if di.is_negative() {
                    minus -= di * &tables.a_masses[i];
                }
            }
            let candidate = plus.max(minus) / &tables.mass;
            if candidate > best {
                best = candidate;
                best_q = b_mask;
                best_band = band;
            }
        });
        block_values.push(best);
        witnesses.push(BlockWitness {
            block,
            q: event_for(v.partition(), &tables.b_cells, best_q),
            p: Some(event_for(u.partition(), &tables.a_cells, best_band)),
        });
    }
    Ok(MixingReport {
        coefficient: assemble_coefficient(t, block_values)?,
        witnesses,
        method: Method::Fast,
        enumeration_count: enumerated,
    })
}

/// The band where `U(𝟙_B − T𝟙_B)` is strictly positive. Always a union of
/// U-cells; plugging it into the bilinear form attains the positive part
/// of the supremum over the A side.
pub fn positive_band(
    t: &CondExpectation,
    u: &CondExpectation,
    q: &EventSet,
) -> Result<EventSet> {
    if !is_compatible(u, t)? {
        return Err(Error::Incompatible);
    }
    check_same_space(t.space(), q.space())?;
    let indicator = q.indicator();
    let deviation = u.apply(&indicator)?.sub(&t.apply(&indicator)?)?;
    Ok(EventSet::from_indices(
        t.space(),
        (0..t.space().point_count()).filter(|&p| deviation.value(p).is_positive()),
    ))
}

/// Supremum over B-events of `‖U𝟙_B − T𝟙_B‖` in the given norm, as a
/// block-constant function, with the first maximizing B per block.
pub fn sup_norm_gap(
    t: &CondExpectation,
    u: &CondExpectation,
    v: &CondExpectation,
    kind: NormKind,
) -> Result<(RangeElement, Vec<BlockWitness>, u64)> {
    require_mixing_inputs(t, u, v)?;
    let space = t.space();
    let mut block_values = Vec::with_capacity(space.block_count());
    let mut witnesses = Vec::with_capacity(space.block_count());
    let mut enumerated = 0u64;
    for block in 0..space.block_count() {
        let tables = BlockTables::build(space, u.partition(), v.partition(), block)?;
        tables.guard_width()?;
        let mut best = Rat::zero();
        let mut best_q = 0u64;
        enumerated += scan_b_events(&tables, |b_mask, d| {
            let candidate = match kind {
                NormKind::L1 => {
                    let total: Rat = d
                        .iter()
                        .zip(&tables.a_masses)
                        .map(|(di, m)| di.abs() * m)
                        .sum();
                    total / &tables.mass
                }
                NormKind::LInf => d.iter().map(Rat::abs).max().unwrap_or_else(Rat::zero),
            };
            if candidate > best {
                best = candidate;
                best_q = b_mask;
            }
        });
        block_values.push(best);
        witnesses.push(BlockWitness {
            block,
            q: event_for(v.partition(), &tables.b_cells, best_q),
            p: None,
        });
    }
    Ok((assemble_coefficient(t, block_values)?, witnesses, enumerated))
}

/// Uniform mixing coefficient: supremum over B of `‖U𝟙_B − T𝟙_B‖∞`.
pub fn phi(
    t: &CondExpectation,
    u: &CondExpectation,
    v: &CondExpectation,
) -> Result<MixingReport> {
    let (coefficient, witnesses, enumeration_count) = sup_norm_gap(t, u, v, NormKind::LInf)?;
    Ok(MixingReport {
        coefficient,
        witnesses,
        method: Method::Brute,
        enumeration_count,
    })
}

/// Strong mixing coefficient of one block treated as a probability space
/// under its normalized measure: `sup |μ_i(A∩B) − μ_i(A)μ_i(B)|`.
pub fn classical_alpha(
    space: &Arc<GroundSpace>,
    block: usize,
    c: &Partition,
    d: &Partition,
) -> Result<Rat> {
    classical_tables(space, block, c, d).map(|tables| {
        let a_mass = tables.a_mask_masses();
        let b_mass = tables.b_mask_masses();
        let mut best = Rat::zero();
        for a_mask in 0..a_mass.len() as u64 {
            for b_mask in 0..b_mass.len() as u64 {
                let value = (tables.inter_mass(a_mask, b_mask)
                    - &a_mass[a_mask as usize] * &b_mass[b_mask as usize])
                    .abs();
                if value > best {
                    best = value;
                }
            }
        }
        best
    })
}

/// Which formula computes the classical uniform coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiRoute {
    /// `sup |μ_i(B|A) − μ_i(B)|` over A with positive mass.
    ConditionalProb,
    /// `sup_B` of the essential supremum of `|E[𝟙_B|C] − μ_i(B)|`.
    LinfNorm,
}

/// Uniform mixing coefficient of one block under its normalized measure.
/// Both routes return the same value; the route only selects the
/// computation path.
pub fn classical_phi(
    space: &Arc<GroundSpace>,
    block: usize,
    c: &Partition,
    d: &Partition,
    route: PhiRoute,
) -> Result<Rat> {
    let tables = classical_tables(space, block, c, d)?;
    let b_mass = tables.b_mask_masses();
    let mut best = Rat::zero();
    match route {
        PhiRoute::ConditionalProb => {
            let a_mass = tables.a_mask_masses();
            // A = ∅ is excluded: conditioning needs μ_i(A) > 0
            for a_mask in 1..a_mass.len() as u64 {
                for b_mask in 0..b_mass.len() as u64 {
                    let conditional =
                        tables.inter_mass(a_mask, b_mask) / &a_mass[a_mask as usize];
                    let value = (conditional - &b_mass[b_mask as usize]).abs();
                    if value > best {
                        best = value;
                    }
                }
            }
        }
        PhiRoute::LinfNorm => {
            for b_mask in 0..b_mass.len() as u64 {
                let by_cell = tables.b_event_by_a_cell(b_mask);
                for (i, m) in by_cell.iter().enumerate() {
                    let value = (m / &tables.a_masses[i] - &b_mass[b_mask as usize]).abs();
                    if value > best {
                        best = value;
                    }
                }
            }
        }
    }
    Ok(best)
}

fn classical_tables(
    space: &Arc<GroundSpace>,
    block: usize,
    c: &Partition,
    d: &Partition,
) -> Result<BlockTables> {
    check_same_space(space, c.space())?;
    check_same_space(space, d.space())?;
    for (name, partition) in [("first", c), ("second", d)] {
        if !partition.refines_blocks() {
            return Err(Error::RefinementViolation {
                detail: format!("{name} partition must refine the blocks"),
            });
        }
    }
    let tables = BlockTables::build(space, c, d, block)?;
    tables.guard_width()?;
    Ok(tables.normalized())
}

/// `|T(𝟙_A·𝟙_B) − T𝟙_A·T𝟙_B|` computed through operator applications —
/// the defining expression, used to re-check witnesses independently of
/// the mass-table inner loops.
pub fn alpha_expression(
    t: &CondExpectation,
    a: &EventSet,
    b: &EventSet,
) -> Result<LatticeFunction> {
    let pa = a.indicator();
    let pb = b.indicator();
    let joint = t.apply(&pa.mul(&pb)?)?;
    let product = t.apply(&pa)?.mul(&t.apply(&pb)?)?;
    Ok(joint.sub(&product)?.abs())
}

/// `‖U𝟙_B − T𝟙_B‖` in the given norm, through operator applications.
pub fn norm_gap_expression(
    t: &CondExpectation,
    u: &CondExpectation,
    b: &EventSet,
    kind: NormKind,
) -> Result<RangeElement> {
    let indicator = b.indicator();
    let gap = u.apply(&indicator)?.sub(&t.apply(&indicator)?)?;
    norm(t, &gap, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rat::{int, rat};

    fn s1_ops() -> (CondExpectation, CondExpectation, CondExpectation) {
        let s = fixtures::uniform4();
        let t = CondExpectation::over_blocks(&s);
        let u = CondExpectation::new(fixtures::uniform4_halves(&s));
        (t, u.clone(), u)
    }

    #[test]
    fn alpha_brute_uniform_fixture() {
        let (t, u, v) = s1_ops();
        let report = alpha_brute(&t, &u, &v).unwrap();
        assert_eq!(report.block_values(), vec![rat(1, 4)]);
        assert_eq!(report.enumeration_count, 16);
        let w = &report.witnesses[0];
        assert_eq!(w.q.sorted_ids(), vec!["a", "b"]);
        assert_eq!(w.p.as_ref().unwrap().sorted_ids(), vec!["a", "b"]);
    }

    #[test]
    fn alpha_vanishes_for_independent_partitions() {
        let s = fixtures::uniform4();
        let t = CondExpectation::over_blocks(&s);
        let u = CondExpectation::new(fixtures::uniform4_halves(&s));
        let v = CondExpectation::new(fixtures::uniform4_crossing(&s));
        assert!(alpha_brute(&t, &u, &v).unwrap().coefficient.is_zero());
        assert!(alpha_fast(&t, &u, &v).unwrap().coefficient.is_zero());
        assert!(phi(&t, &u, &v).unwrap().coefficient.is_zero());
    }

    #[test]
    fn alpha_two_block_fixture() {
        let s2 = fixtures::two_blocks();
        let t = CondExpectation::over_blocks(&s2);
        let w = CondExpectation::new(fixtures::two_blocks_split(&s2));
        let report = alpha_brute(&t, &w, &w).unwrap();
        assert_eq!(report.block_values(), vec![rat(1, 4), rat(3, 16)]);
        let fast = alpha_fast(&t, &w, &w).unwrap();
        assert_eq!(fast.block_values(), vec![rat(1, 4), rat(3, 16)]);
        assert!(fast.enumeration_count < report.enumeration_count);
    }

    #[test]
    fn fast_route_matches_hand_computation() {
        // B = {a,b}: U(𝟙_B − T𝟙_B) = (1/2,1/2,−1/2,−1/2), T of its
        // positive part is 1/4
        let (t, u, v) = s1_ops();
        let report = alpha_fast(&t, &u, &v).unwrap();
        assert_eq!(report.block_values(), vec![rat(1, 4)]);
        assert_eq!(report.enumeration_count, 4);
        let w = &report.witnesses[0];
        assert_eq!(w.q.sorted_ids(), vec!["a", "b"]);
        assert_eq!(w.p.as_ref().unwrap().sorted_ids(), vec!["a", "b"]);
    }

    #[test]
    fn trivial_b_side_gives_zero() {
        let s2 = fixtures::two_blocks();
        let t = CondExpectation::over_blocks(&s2);
        let u = CondExpectation::new(fixtures::two_blocks_split(&s2));
        let v = t.clone(); // one cell per block: only trivial events
        assert!(alpha_fast(&t, &u, &v).unwrap().coefficient.is_zero());
        assert!(alpha_brute(&t, &u, &v).unwrap().coefficient.is_zero());
    }

    #[test]
    fn positive_band_examples() {
        let s = fixtures::uniform4();
        let t = CondExpectation::over_blocks(&s);
        let u = CondExpectation::new(fixtures::uniform4_halves(&s));
        let q = EventSet::new(&s, &["a".into(), "b".into()]).unwrap();
        assert_eq!(positive_band(&t, &u, &q).unwrap().sorted_ids(), vec!["a", "b"]);
        assert!(positive_band(&t, &u, &EventSet::full(&s)).unwrap().is_empty());
        assert!(positive_band(&t, &u, &EventSet::empty(&s)).unwrap().is_empty());
    }

    #[test]
    fn phi_fixtures() {
        let (t, u, v) = s1_ops();
        let report = phi(&t, &u, &v).unwrap();
        assert_eq!(report.block_values(), vec![rat(1, 2)]);
        assert_eq!(report.witnesses[0].q.sorted_ids(), vec!["a", "b"]);

        let s2 = fixtures::two_blocks();
        let t2 = CondExpectation::over_blocks(&s2);
        let w = CondExpectation::new(fixtures::two_blocks_split(&s2));
        let report = phi(&t2, &w, &w).unwrap();
        assert_eq!(report.block_values(), vec![rat(1, 2), rat(3, 4)]);
        assert_eq!(report.witnesses[1].q.sorted_ids(), vec!["e"]);
    }

    #[test]
    fn classical_fixtures() {
        let s = fixtures::uniform4();
        let halves = fixtures::uniform4_halves(&s);
        let crossing = fixtures::uniform4_crossing(&s);
        assert_eq!(classical_alpha(&s, 0, &halves, &halves).unwrap(), rat(1, 4));
        assert_eq!(classical_alpha(&s, 0, &halves, &crossing).unwrap(), int(0));

        let s2 = fixtures::two_blocks();
        let split = fixtures::two_blocks_split(&s2);
        assert_eq!(classical_alpha(&s2, 1, &split, &split).unwrap(), rat(3, 16));

        for route in [PhiRoute::ConditionalProb, PhiRoute::LinfNorm] {
            assert_eq!(classical_phi(&s, 0, &halves, &halves, route).unwrap(), rat(1, 2));
            assert_eq!(classical_phi(&s, 0, &halves, &crossing, route).unwrap(), int(0));
            assert_eq!(classical_phi(&s2, 1, &split, &split, route).unwrap(), rat(3, 4));
        }
    }

    #[test]
    fn classical_rejects_bad_block() {
        let s = fixtures::uniform4();
        let halves = fixtures::uniform4_halves(&s);
        assert!(matches!(
            classical_alpha(&s, 5, &halves, &halves).unwrap_err(),
            Error::InvalidBlock { .. }
        ));
    }

    #[test]
    fn mixing_requires_blocks_conditioner() {
        let s = fixtures::uniform4();
        let halves = CondExpectation::new(fixtures::uniform4_halves(&s));
        let discrete = CondExpectation::discrete(&s);
        assert!(matches!(
            alpha_brute(&halves, &discrete, &discrete).unwrap_err(),
            Error::ConditionerNotBlocks
        ));
    }

    #[test]
    fn mixing_requires_compatibility() {
        let s2 = fixtures::two_blocks();
        let t = CondExpectation::over_blocks(&s2);
        let straddling = CondExpectation::new(
            Partition::new(
                &s2,
                vec![
                    vec!["a".into(), "e".into()],
                    vec!["b".into(), "c".into(), "d".into(), "f".into()],
                ],
                false,
            )
            .unwrap(),
        );
        assert!(matches!(
            alpha_brute(&t, &straddling, &straddling).unwrap_err(),
            Error::Incompatible
        ));
    }

    #[test]
    fn witnesses_reproduce_the_coefficient() {
        let s2 = fixtures::two_blocks();
        let t = CondExpectation::over_blocks(&s2);
        let w = CondExpectation::new(fixtures::two_blocks_split(&s2));
        for report in [alpha_brute(&t, &w, &w).unwrap(), alpha_fast(&t, &w, &w).unwrap()] {
            let values = report.block_values();
            for witness in &report.witnesses {
                let expr = alpha_expression(
                    &t,
                    witness.p.as_ref().unwrap(),
                    &witness.q,
                )
                .unwrap();
                let member = s2.block_members(witness.block).unwrap()[0];
                assert_eq!(expr.value(member), &values[witness.block]);
            }
        }
        let report = phi(&t, &w, &w).unwrap();
        let values = report.block_values();
        for witness in &report.witnesses {
            let gap = norm_gap_expression(&t, &w, &witness.q, NormKind::LInf).unwrap();
            let member = s2.block_members(witness.block).unwrap()[0];
            assert_eq!(gap.value().value(member), &values[witness.block]);
        }
    }
}
