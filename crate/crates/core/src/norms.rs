//! Lattice-valued norms attached to a conditional expectation operator.
//!
//! For an operator `T` the L¹-type norm of `f` is `T|f|` and the L∞-type
//! norm is the least cellwise-constant upper bound of `|f|` (the cellwise
//! maximum, since all weights are positive). Both take values in the range
//! of `T`, never in the scalars, and all comparisons between them are
//! cellwise.

use crate::cond::{is_compatible, CondExpectation};
use crate::error::{Error, Result};
use crate::rat::Rat;
use crate::space::LatticeFunction;

/// Which of the two norms to use where both apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L1,
    LInf,
}

/// A function constant on the cells of its owning operator's partition —
/// an element of the operator's range. Norm values and mixing
/// coefficients are always carried in this form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeElement {
    owner: CondExpectation,
    value: LatticeFunction,
}

impl RangeElement {
    pub fn new(owner: CondExpectation, value: LatticeFunction) -> Result<RangeElement> {
        if !owner.in_range(&value)? {
            return Err(Error::NotInRange {
                what: "range element must be constant on the owner's cells".to_owned(),
            });
        }
        Ok(RangeElement { owner, value })
    }

    /// Build from one value per cell, in the owner's cell order.
    pub fn from_cell_values(owner: CondExpectation, cell_values: Vec<Rat>) -> Result<RangeElement> {
        if cell_values.len() != owner.partition().cell_count() {
            return Err(Error::LengthMismatch {
                expected: owner.partition().cell_count(),
                got: cell_values.len(),
            });
        }
        let space = owner.space();
        let values = (0..space.point_count())
            .map(|p| cell_values[owner.partition().cell_of(p)].clone())
            .collect();
        let value = LatticeFunction::new(space, values)?;
        Ok(RangeElement { owner, value })
    }

    pub fn zero(owner: CondExpectation) -> RangeElement {
        let value = LatticeFunction::zero(owner.space());
        RangeElement { owner, value }
    }

    pub fn owner(&self) -> &CondExpectation {
        &self.owner
    }

    pub fn value(&self) -> &LatticeFunction {
        &self.value
    }

    /// One value per cell, in the owner's cell order.
    pub fn cell_values(&self) -> Vec<Rat> {
        self.owner
            .partition()
            .cells()
            .iter()
            .map(|cell| self.value.value(cell[0]).clone())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.value.is_nonnegative()
    }

    fn check_owner(&self, other: &RangeElement) -> Result<()> {
        if self.owner == other.owner {
            Ok(())
        } else {
            Err(Error::OwnerMismatch)
        }
    }

    /// Cellwise order, the lattice order restricted to the owner's range.
    pub fn le(&self, other: &RangeElement) -> Result<bool> {
        self.check_owner(other)?;
        self.value.le(&other.value)
    }

    pub fn add(&self, other: &RangeElement) -> Result<RangeElement> {
        self.check_owner(other)?;
        Ok(RangeElement {
            owner: self.owner.clone(),
            value: self.value.add(&other.value)?,
        })
    }

    /// f-algebra product; stays in the owner's range.
    pub fn mul(&self, other: &RangeElement) -> Result<RangeElement> {
        self.check_owner(other)?;
        Ok(RangeElement {
            owner: self.owner.clone(),
            value: self.value.mul(&other.value)?,
        })
    }

    pub fn sup(&self, other: &RangeElement) -> Result<RangeElement> {
        self.check_owner(other)?;
        Ok(RangeElement {
            owner: self.owner.clone(),
            value: self.value.sup(&other.value)?,
        })
    }

    pub fn scale(&self, factor: &Rat) -> RangeElement {
        RangeElement {
            owner: self.owner.clone(),
            value: self.value.scale(factor),
        }
    }
}

/// `T|f|`: the L¹-type norm.
pub fn l1_norm(t: &CondExpectation, f: &LatticeFunction) -> Result<RangeElement> {
    let value = t.apply(&f.abs())?;
    Ok(RangeElement {
        owner: t.clone(),
        value,
    })
}

/// Least upper bound of `|f|` among nonnegative range elements: the
/// cellwise maximum of `|f|`.
pub fn linf_norm(t: &CondExpectation, f: &LatticeFunction) -> Result<RangeElement> {
    crate::space::check_same_space(t.space(), f.space())?;
    let abs = f.abs();
    let cell_values = t
        .partition()
        .cells()
        .iter()
        .map(|cell| cell.iter().map(|&p| abs.value(p).clone()).max().expect("cells are nonempty"))
        .collect();
    RangeElement::from_cell_values(t.clone(), cell_values)
}

pub fn norm(t: &CondExpectation, f: &LatticeFunction, kind: NormKind) -> Result<RangeElement> {
    match kind {
        NormKind::L1 => l1_norm(t, f),
        NormKind::LInf => linf_norm(t, f),
    }
}

/// Two range elements and whether `lhs ≤ rhs` holds cellwise.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub lhs: RangeElement,
    pub rhs: RangeElement,
    pub holds: bool,
}

impl BoundCheck {
    fn new(lhs: RangeElement, rhs: RangeElement) -> Result<BoundCheck> {
        let holds = lhs.le(&rhs)?;
        Ok(BoundCheck { lhs, rhs, holds })
    }
}

/// Product bound `‖g·f‖₁ ≤ ‖g‖∞ · ‖f‖₁`, both sides computed
/// independently. `holds` is true on every valid input.
pub fn holder_bound(
    t: &CondExpectation,
    f: &LatticeFunction,
    g: &LatticeFunction,
) -> Result<BoundCheck> {
    let lhs = l1_norm(t, &g.mul(f)?)?;
    let rhs = linf_norm(t, g)?.mul(&l1_norm(t, f)?)?;
    BoundCheck::new(lhs, rhs)
}

/// `‖g‖₁ ≤ ‖g‖∞` cellwise.
pub fn norm_comparison(t: &CondExpectation, g: &LatticeFunction) -> Result<bool> {
    l1_norm(t, g)?.le(&linf_norm(t, g)?)
}

/// Contraction of either norm under a compatible projection:
/// `‖Sf‖ ≤ ‖f‖`. Incompatibility of `s` with `t` is reported before any
/// computation.
pub fn jensen_check(
    t: &CondExpectation,
    s: &CondExpectation,
    f: &LatticeFunction,
    kind: NormKind,
) -> Result<BoundCheck> {
    if !is_compatible(s, t)? {
        return Err(Error::Incompatible);
    }
    let lhs = norm(t, &s.apply(f)?, kind)?;
    let rhs = norm(t, f, kind)?;
    BoundCheck::new(lhs, rhs)
}
