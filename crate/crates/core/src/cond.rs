//! Conditional expectation operators determined by partitions.
//!
//! The operator attached to a partition replaces a function on each cell
//! by its weighted average over that cell. It is a positive linear
//! projection fixing the constant-one function, and its range is exactly
//! the functions constant on the cells.

use std::sync::Arc;

use num::Zero;

use crate::error::{Error, Result};
use crate::rat::Rat;
use crate::space::{check_same_space, GroundSpace, LatticeFunction, Partition};

/// Cellwise weighted-averaging operator. Represented by its partition plus
/// cached cell masses; never materialized as a matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondExpectation {
    partition: Partition,
    cell_masses: Vec<Rat>,
}

impl CondExpectation {
    pub fn new(partition: Partition) -> CondExpectation {
        let space = partition.space();
        let cell_masses: Vec<Rat> = partition
            .cells()
            .iter()
            .map(|cell| cell.iter().map(|&p| space.weight(p).clone()).sum())
            .collect();
        // cells are nonempty and weights strictly positive
        debug_assert!(cell_masses.iter().all(|m| !m.is_zero()));
        CondExpectation {
            partition,
            cell_masses,
        }
    }

    /// The operator averaging over the space's blocks.
    pub fn over_blocks(space: &Arc<GroundSpace>) -> CondExpectation {
        CondExpectation::new(Partition::blocks(space))
    }

    /// The identity projection (singleton cells).
    pub fn discrete(space: &Arc<GroundSpace>) -> CondExpectation {
        CondExpectation::new(Partition::discrete(space))
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn space(&self) -> &Arc<GroundSpace> {
        self.partition.space()
    }

    pub fn cell_masses(&self) -> &[Rat] {
        &self.cell_masses
    }

    /// Whether this operator conditions exactly on the space blocks.
    pub fn conditions_on_blocks(&self) -> bool {
        self.partition == Partition::blocks(self.space())
    }

    /// Apply the operator: on each cell, the weighted average
    /// `Σ f(ω)μ({ω}) / μ(cell)`, assigned to every point of the cell.
    pub fn apply(&self, f: &LatticeFunction) -> Result<LatticeFunction> {
        check_same_space(self.space(), f.space())?;
        let space = self.space();
        let mut cell_values = Vec::with_capacity(self.partition.cell_count());
        for (cell, mass) in self.partition.cells().iter().zip(&self.cell_masses) {
            let total: Rat = cell.iter().map(|&p| f.value(p) * space.weight(p)).sum();
            cell_values.push(total / mass);
        }
        let values = (0..space.point_count())
            .map(|p| cell_values[self.partition.cell_of(p)].clone())
            .collect();
        LatticeFunction::new(space, values)
    }

    /// True iff `f` lies in the operator's range, i.e. is constant on
    /// every cell.
    pub fn in_range(&self, f: &LatticeFunction) -> Result<bool> {
        check_same_space(self.space(), f.space())?;
        Ok(self.partition.cells().iter().all(|cell| {
            let first = f.value(cell[0]);
            cell.iter().all(|&p| f.value(p) == first)
        }))
    }

    /// Averaging identity `T(f·g) = f·T(g)` for `f` in the range of `T`.
    /// Returns whether it holds exactly; `f` outside the range is a
    /// precondition violation, reported distinctly.
    pub fn averaging_check(&self, f: &LatticeFunction, g: &LatticeFunction) -> Result<bool> {
        if !self.in_range(f)? {
            return Err(Error::NotInRange {
                what: "averaging identity needs its fixed factor in the operator range".to_owned(),
            });
        }
        let lhs = self.apply(&f.mul(g)?)?;
        let rhs = f.mul(&self.apply(g)?)?;
        Ok(lhs == rhs)
    }
}

/// Is `u` compatible with `t`, i.e. does conditioning by `u` refine
/// conditioning by `t` (so that `tu = t = ut`)?
///
/// Both criteria are computed: the combinatorial one (u's partition
/// refines t's) and the algebraic one (both operator compositions equal
/// `t` on the indicators of the common refinement of the two partitions,
/// which span enough of the space by linearity). They must agree; a
/// disagreement is a library defect surfaced as its own error.
pub fn is_compatible(u: &CondExpectation, t: &CondExpectation) -> Result<bool> {
    check_same_space(u.space(), t.space())?;
    let refinement = u.partition().refines(t.partition())?;

    let space = u.space();
    let mut algebraic = true;
    'cells: for u_cell in u.partition().cells() {
        // split the u-cell by t-cells to get the common-refinement cells
        let mut by_t_cell: Vec<Vec<usize>> = vec![Vec::new(); t.partition().cell_count()];
        for &p in u_cell {
            by_t_cell[t.partition().cell_of(p)].push(p);
        }
        for meet_cell in by_t_cell.into_iter().filter(|m| !m.is_empty()) {
            let indicator = crate::space::EventSet::from_indices(space, meet_cell).indicator();
            let t_f = t.apply(&indicator)?;
            if t.apply(&u.apply(&indicator)?)? != t_f || u.apply(&t_f)? != t_f {
                algebraic = false;
                break 'cells;
            }
        }
    }

    if algebraic != refinement {
        return Err(Error::CompatibilityCriteriaDisagree {
            algebraic,
            refinement,
        });
    }
    Ok(refinement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rat::{int, rat};
    use crate::space::EventSet;

    fn f(space: &Arc<GroundSpace>, vals: &[i64]) -> LatticeFunction {
        LatticeFunction::new(space, vals.iter().map(|&v| int(v)).collect()).unwrap()
    }

    #[test]
    fn averages_with_weights() {
        let s2 = fixtures::two_blocks();
        let t = CondExpectation::over_blocks(&s2);
        let g = f(&s2, &[0, 0, 0, 0, 4, 0]);
        let tg = t.apply(&g).unwrap();
        // block Ω₂ has weights (1,3): (1·4 + 3·0)/4 = 1 on both e and f
        assert_eq!(tg.value(4), &int(1));
        assert_eq!(tg.value(5), &int(1));
        assert_eq!(tg.value(0), &int(0));
    }

    #[test]
    fn discrete_operator_is_identity() {
        let s = fixtures::uniform4();
        let t = CondExpectation::discrete(&s);
        let g = f(&s, &[1, -7, 3, 0]);
        assert_eq!(t.apply(&g).unwrap(), g);
    }

    #[test]
    fn one_cell_operator_takes_the_mean() {
        let s = fixtures::uniform4();
        let t = CondExpectation::over_blocks(&s);
        let g = f(&s, &[1, 3, 2, 6]);
        assert_eq!(t.apply(&g).unwrap(), LatticeFunction::constant(&s, int(3)));
    }

    #[test]
    fn projection_and_unit() {
        let s2 = fixtures::two_blocks();
        let t = CondExpectation::new(fixtures::two_blocks_split(&s2));
        let g = f(&s2, &[5, -1, 2, 2, 7, 0]);
        let once = t.apply(&g).unwrap();
        assert_eq!(t.apply(&once).unwrap(), once);
        let e = LatticeFunction::unit(&s2);
        assert_eq!(t.apply(&e).unwrap(), e);
    }

    #[test]
    fn compatibility_examples() {
        let s = fixtures::uniform4();
        let t = CondExpectation::new(fixtures::uniform4_halves(&s));
        let discrete = CondExpectation::discrete(&s);
        assert!(is_compatible(&discrete, &t).unwrap());
        assert!(is_compatible(&t, &t).unwrap());

        let crossing = CondExpectation::new(fixtures::uniform4_crossing(&s));
        assert!(!is_compatible(&crossing, &t).unwrap());
    }

    #[test]
    fn range_membership() {
        let s = fixtures::uniform4();
        let t = CondExpectation::new(fixtures::uniform4_halves(&s));
        assert!(t.in_range(&LatticeFunction::unit(&s)).unwrap());
        assert!(t.in_range(&f(&s, &[2, 2, -7, -7])).unwrap());
        assert!(!t.in_range(&f(&s, &[1, 2, 2, 2])).unwrap());
    }

    #[test]
    fn averaging_identity() {
        let s = fixtures::uniform4();
        let t = CondExpectation::new(fixtures::uniform4_halves(&s));
        let e = LatticeFunction::unit(&s);
        let g = f(&s, &[1, 0, 0, 1]);
        assert!(t.averaging_check(&e, &g).unwrap());

        let fixed = f(&s, &[2, 2, 3, 3]);
        assert!(t.averaging_check(&fixed, &g).unwrap());
        // both sides by hand: T(fg) = (2,2,3,3)·(1,0,0,1) averaged = (1,1,3/2,3/2)
        let lhs = t.apply(&fixed.mul(&g).unwrap()).unwrap();
        let expected = LatticeFunction::new(
            &s,
            vec![int(1), int(1), rat(3, 2), rat(3, 2)],
        )
        .unwrap();
        assert_eq!(lhs, expected);

        let not_fixed = f(&s, &[1, 2, 3, 4]);
        assert!(matches!(
            t.averaging_check(&not_fixed, &g).unwrap_err(),
            Error::NotInRange { .. }
        ));
    }

    #[test]
    fn composition_detects_incompatibility_on_indicators() {
        // compose on the indicator of {a}: TU f ≠ T f for crossing partitions
        let s = fixtures::uniform4();
        let t = CondExpectation::new(fixtures::uniform4_halves(&s));
        let u = CondExpectation::new(fixtures::uniform4_crossing(&s));
        let ind_a = EventSet::new(&s, &["a".into()]).unwrap().indicator();
        let tu = t.apply(&u.apply(&ind_a).unwrap()).unwrap();
        let tf = t.apply(&ind_a).unwrap();
        assert_ne!(tu, tf);
    }
}
