//! Inequality verifier: every bound the library claims, re-checked over
//! concrete instances, with a re-runnable witness extracted from any
//! violation.
//!
//! Violations are reported, never thrown — a failed check is the
//! harness's most important output, since it would indicate a defect in
//! the library. Errors are reserved for invalid inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cond::{is_compatible, CondExpectation};
use crate::doc::SpaceDoc;
use crate::error::{Error, Result};
use crate::mixing::{self, MixingReport};
use crate::norms::{self, l1_norm, linf_norm, norm, NormKind, RangeElement};
use crate::rat::{int, Rat};
use crate::space::{GroundSpace, LatticeFunction, Partition};

/// Parameters of a seeded random instance. The instance is a pure
/// function of this value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub seed: u64,
    pub point_count: usize,
    pub block_count: usize,
    /// Bounds the cell count per block for both conditioning partitions.
    pub max_cells_per_block: usize,
    /// Weights are drawn as p/q with p, q uniform in 1..=bound.
    pub weight_denominator_bound: u32,
    /// Sample function values are integers in -bound..=bound.
    pub function_value_bound: i64,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |detail: &str| Error::BudgetInfeasible {
            detail: detail.to_owned(),
        };
        if self.point_count == 0 {
            return Err(fail("point_count must be at least 1"));
        }
        if self.block_count == 0 {
            return Err(fail("block_count must be at least 1"));
        }
        if self.point_count < self.block_count {
            return Err(fail("needs at least one point per block"));
        }
        if self.max_cells_per_block == 0 {
            return Err(fail("max_cells_per_block must be at least 1"));
        }
        if self.max_cells_per_block > self.point_count {
            return Err(fail("more cells requested than points"));
        }
        // keeps exact brute-force enumeration (4^cells pairs per block)
        // tractable per instance
        if self.max_cells_per_block > 12 {
            return Err(fail("cell budget above the per-block enumeration cap (12)"));
        }
        if self.weight_denominator_bound == 0 {
            return Err(fail("weight_denominator_bound must be at least 1"));
        }
        if self.function_value_bound < 0 {
            return Err(fail("function_value_bound must be nonnegative"));
        }
        Ok(())
    }
}

/// Identifier of one verified statement.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum CheckId {
    L1NormAxioms,
    LinfNormAxioms,
    HolderBound,
    NormComparison,
    JensenContraction,
    AlphaNormBounds,
    AlphaLePhi,
    StrongMixingBound,
    ComposedMixingBound,
    UniformMixingBound,
    BlockwiseFactorization,
    AlphaOracleEquivalence,
    PhiRouteEquivalence,
    CompatibilityEquivalence,
}

impl CheckId {
    pub const ALL: [CheckId; 14] = [
        CheckId::L1NormAxioms,
        CheckId::LinfNormAxioms,
        CheckId::HolderBound,
        CheckId::NormComparison,
        CheckId::JensenContraction,
        CheckId::AlphaNormBounds,
        CheckId::AlphaLePhi,
        CheckId::StrongMixingBound,
        CheckId::ComposedMixingBound,
        CheckId::UniformMixingBound,
        CheckId::BlockwiseFactorization,
        CheckId::AlphaOracleEquivalence,
        CheckId::PhiRouteEquivalence,
        CheckId::CompatibilityEquivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::L1NormAxioms => "l1-norm-axioms",
            CheckId::LinfNormAxioms => "linf-norm-axioms",
            CheckId::HolderBound => "holder-bound",
            CheckId::NormComparison => "norm-comparison",
            CheckId::JensenContraction => "jensen-contraction",
            CheckId::AlphaNormBounds => "alpha-norm-bounds",
            CheckId::AlphaLePhi => "alpha-le-phi",
            CheckId::StrongMixingBound => "strong-mixing-bound",
            CheckId::ComposedMixingBound => "composed-mixing-bound",
            CheckId::UniformMixingBound => "uniform-mixing-bound",
            CheckId::BlockwiseFactorization => "blockwise-factorization",
            CheckId::AlphaOracleEquivalence => "alpha-oracle-equivalence",
            CheckId::PhiRouteEquivalence => "phi-route-equivalence",
            CheckId::CompatibilityEquivalence => "compatibility-equivalence",
        }
    }

    pub fn from_name(name: &str) -> Result<CheckId> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::UnknownCheck {
                name: name.to_owned(),
            })
    }

    /// The statement the check verifies, in plain notation.
    pub fn describe(self) -> &'static str {
        match self {
            CheckId::L1NormAxioms => {
                "the map f -> T|f| is a lattice-valued norm: T|f| = 0 iff f = 0; \
                 T|g f| = |g| T|f| for g constant on T-cells; T|f+h| <= T|f| + T|h| cellwise"
            }
            CheckId::LinfNormAxioms => {
                "the map f -> cellwise max of |f| is a lattice-valued norm \
                 (zero law, homogeneity over T-cell-constant factors, triangle inequality)"
            }
            CheckId::HolderBound => "||g f||_1 <= ||g||_inf * ||f||_1 cellwise",
            CheckId::NormComparison => "||g||_1 <= ||g||_inf cellwise",
            CheckId::JensenContraction => {
                "||S f||_p <= ||f||_p for p in {1, inf} and any projection S \
                 compatible with T (S in {U, V, T})"
            }
            CheckId::AlphaNormBounds => {
                "alpha(U,V) <= sup_B ||U 1_B - T 1_B||_1 <= 2 alpha(U,V), \
                 supremum over V-measurable events B"
            }
            CheckId::AlphaLePhi => "alpha(U,V) <= phi(U,V) cellwise",
            CheckId::StrongMixingBound => {
                "||U f - T f||_1 <= 4 alpha(U,V) ||f||_inf for f constant on V-cells"
            }
            CheckId::ComposedMixingBound => {
                "||U V g - T g||_1 <= 4 alpha(U,V) ||g||_inf for arbitrary g"
            }
            CheckId::UniformMixingBound => {
                "||U f - T f||_1 <= ||U f - T f||_inf <= 2 phi(U,V) ||f||_inf \
                 for f constant on V-cells"
            }
            CheckId::BlockwiseFactorization => {
                "the conditional coefficients restricted to a block equal the \
                 classical coefficients of that block under its normalized measure"
            }
            CheckId::AlphaOracleEquivalence => {
                "the pair-enumeration and positive-band algorithms for alpha \
                 agree exactly"
            }
            CheckId::PhiRouteEquivalence => {
                "the conditional-probability and sup-norm formulas for the \
                 classical uniform coefficient agree exactly"
            }
            CheckId::CompatibilityEquivalence => {
                "the operator-composition criterion for compatibility agrees \
                 with the partition-refinement criterion"
            }
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Harness self-test hook: shifts every alpha coefficient used by the
/// checks, so the suite can prove it detects violations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Perturbation {
    alpha_offset: Option<Rat>,
}

impl Perturbation {
    pub fn none() -> Perturbation {
        Perturbation::default()
    }

    pub fn alpha_plus_one() -> Perturbation {
        Perturbation {
            alpha_offset: Some(int(1)),
        }
    }

    pub fn is_none(&self) -> bool {
        self.alpha_offset.is_none()
    }

    fn apply_to_alpha(&self, report: &mut MixingReport) -> Result<()> {
        if let Some(offset) = &self.alpha_offset {
            let shifted: Vec<Rat> = report
                .coefficient
                .cell_values()
                .into_iter()
                .map(|v| v + offset)
                .collect();
            report.coefficient =
                RangeElement::from_cell_values(report.coefficient.owner().clone(), shifted)?;
        }
        Ok(())
    }
}

/// Complete, re-runnable description of a failed comparison: the instance
/// snapshot plus where it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: CheckId,
    pub instance_index: u64,
    pub space: SpaceDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<String>,
    pub lhs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mid: Option<Vec<String>>,
    pub rhs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Outcome of one check on one instance. `witness` is present exactly
/// when the check failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: CheckId,
    pub holds: bool,
    pub lhs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mid: Option<Vec<String>>,
    pub rhs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Box<Violation>>,
}

/// A concrete instance the checks run on: the operator triple plus named
/// sample functions, with its serialized snapshot.
#[derive(Debug, Clone)]
pub struct CheckInstance {
    pub space: Arc<GroundSpace>,
    pub t: CondExpectation,
    pub u: CondExpectation,
    pub v: CondExpectation,
    /// Sample functions, sorted by name.
    pub functions: Vec<(String, LatticeFunction)>,
    pub doc: SpaceDoc,
}

/// Reserved name for the constant-one sample function every instance
/// carries.
pub const UNIT_NAME: &str = "__unit";

impl CheckInstance {
    /// Build an instance from partitions and named functions. The
    /// conditioning operator is always the block average. A constant-one
    /// function is added under [`UNIT_NAME`] when absent.
    pub fn assemble(
        space: &Arc<GroundSpace>,
        u: Partition,
        v: Partition,
        mut functions: Vec<(String, LatticeFunction)>,
    ) -> Result<CheckInstance> {
        if !functions.iter().any(|(name, _)| name == UNIT_NAME) {
            functions.push((UNIT_NAME.to_owned(), LatticeFunction::unit(space)));
        }
        functions.sort_by(|a, b| a.0.cmp(&b.0));
        let t = CondExpectation::over_blocks(space);
        let u = CondExpectation::new(u);
        let v = CondExpectation::new(v);
        let doc = SpaceDoc::from_parts(
            space,
            &[("U", u.partition()), ("V", v.partition())],
            &functions
                .iter()
                .map(|(name, f)| (name.as_str(), f))
                .collect::<Vec<_>>(),
        );
        Ok(CheckInstance {
            space: Arc::clone(space),
            t,
            u,
            v,
            functions,
            doc,
        })
    }

    /// Rebuild an instance from its snapshot (partitions `"U"` and `"V"`
    /// plus every named function).
    pub fn from_doc(doc: &SpaceDoc) -> Result<CheckInstance> {
        let space = doc.build_space()?;
        let u = doc.partition(&space, "U", true)?;
        let v = doc.partition(&space, "V", true)?;
        let functions = doc
            .function_names()
            .map(|name| Ok((name.to_owned(), doc.function(&space, name)?)))
            .collect::<Result<Vec<_>>>()?;
        CheckInstance::assemble(&space, u, v, functions)
    }

    fn v_measurable(&self) -> Result<Vec<&(String, LatticeFunction)>> {
        self.functions
            .iter()
            .map(|entry| Ok((self.v.in_range(&entry.1)?, entry)))
            .collect::<Result<Vec<_>>>()
            .map(|v| v.into_iter().filter(|(ok, _)| *ok).map(|(_, e)| e).collect())
    }

    fn t_range(&self) -> Result<Vec<&(String, LatticeFunction)>> {
        self.functions
            .iter()
            .map(|entry| Ok((self.t.in_range(&entry.1)?, entry)))
            .collect::<Result<Vec<_>>>()
            .map(|v| v.into_iter().filter(|(ok, _)| *ok).map(|(_, e)| e).collect())
    }
}

/// Deterministic instance generation: same spec, same instance, byte for
/// byte.
pub fn random_instance(spec: &InstanceSpec) -> Result<CheckInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // block sizes: a random composition of point_count into block_count
    // positive parts
    let mut cuts: Vec<usize> = (1..spec.point_count).collect();
    cuts.shuffle(&mut rng);
    cuts.truncate(spec.block_count - 1);
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(spec.block_count);
    let mut prev = 0;
    for &cut in &cuts {
        sizes.push(cut - prev);
        prev = cut;
    }
    sizes.push(spec.point_count - prev);

    let bound = spec.weight_denominator_bound;
    let points: Vec<(String, Rat)> = (0..spec.point_count)
        .map(|i| {
            let numer = rng.gen_range(1..=bound) as i64;
            let denom = rng.gen_range(1..=bound) as i64;
            (format!("p{i}"), crate::rat::rat(numer, denom))
        })
        .collect();
    let mut blocks = Vec::with_capacity(spec.block_count);
    let mut start = 0;
    for &size in &sizes {
        blocks.push((start..start + size).map(|i| format!("p{i}")).collect::<Vec<_>>());
        start += size;
    }
    let space = Arc::new(GroundSpace::new(points, blocks)?);

    let u = random_refinement(&mut rng, &space, spec.max_cells_per_block)?;
    let v = random_refinement(&mut rng, &space, spec.max_cells_per_block)?;

    let value_bound = spec.function_value_bound;
    let draw = |rng: &mut ChaCha8Rng| int(rng.gen_range(-value_bound..=value_bound));

    let mut functions: Vec<(String, LatticeFunction)> = Vec::new();
    // functions constant on V-cells
    for name in ["f0", "f1"] {
        let mut values = vec![Rat::zero(); space.point_count()];
        for cell in v.cells() {
            let value = draw(&mut rng);
            for &p in cell {
                values[p] = value.clone();
            }
        }
        functions.push((name.to_owned(), LatticeFunction::new(&space, values)?));
    }
    // unrestricted functions
    for name in ["g0", "g1"] {
        let values = (0..space.point_count()).map(|_| draw(&mut rng)).collect();
        functions.push((name.to_owned(), LatticeFunction::new(&space, values)?));
    }
    // a function constant on blocks, for the homogeneity axiom
    {
        let mut values = vec![Rat::zero(); space.point_count()];
        for members in space.blocks() {
            let value = draw(&mut rng);
            for &p in members {
                values[p] = value.clone();
            }
        }
        functions.push(("r0".to_owned(), LatticeFunction::new(&space, values)?));
    }

    CheckInstance::assemble(&space, u, v, functions)
}

/// Random partition refining the blocks, with at most `max_cells` cells
/// per block.
fn random_refinement(
    rng: &mut ChaCha8Rng,
    space: &Arc<GroundSpace>,
    max_cells: usize,
) -> Result<Partition> {
    let mut cells: Vec<Vec<usize>> = Vec::new();
    for members in space.blocks() {
        let k = rng.gen_range(1..=max_cells.min(members.len()));
        let mut shuffled = members.clone();
        shuffled.shuffle(rng);
        let mut block_cells: Vec<Vec<usize>> = shuffled[..k].iter().map(|&p| vec![p]).collect();
        for &p in &shuffled[k..] {
            let c = rng.gen_range(0..k);
            block_cells[c].push(p);
        }
        cells.extend(block_cells);
    }
    Partition::from_index_cells(space, cells, true)
}

// ---------------------------------------------------------------------
// check machinery
// ---------------------------------------------------------------------

fn strings(values: &[Rat]) -> Vec<String> {
    values.iter().map(Rat::to_string).collect()
}

/// Value of a block-constant range element on each block, in input block
/// order.
fn block_values(re: &RangeElement) -> Vec<Rat> {
    let space = re.owner().space();
    space
        .blocks()
        .iter()
        .map(|members| re.value().value(members[0]).clone())
        .collect()
}

fn first_le_failure(lhs: &[Rat], rhs: &[Rat]) -> Option<usize> {
    lhs.iter().zip(rhs).position(|(a, b)| a > b)
}

struct Outcome {
    holds: bool,
    lhs: Vec<String>,
    mid: Option<Vec<String>>,
    rhs: Vec<String>,
    block: Option<usize>,
    events: Vec<Vec<String>>,
    functions: Vec<String>,
    note: Option<String>,
}

impl Outcome {
    fn pass(lhs: Vec<String>, mid: Option<Vec<String>>, rhs: Vec<String>) -> Outcome {
        Outcome {
            holds: true,
            lhs,
            mid,
            rhs,
            block: None,
            events: Vec::new(),
            functions: Vec::new(),
            note: None,
        }
    }

    fn fail(lhs: Vec<String>, mid: Option<Vec<String>>, rhs: Vec<String>) -> Outcome {
        Outcome {
            holds: false,
            ..Outcome::pass(lhs, mid, rhs)
        }
    }

    fn block(mut self, block: Option<usize>) -> Outcome {
        self.block = block;
        self
    }

    fn events(mut self, events: Vec<Vec<String>>) -> Outcome {
        self.events = events;
        self
    }

    fn functions(mut self, functions: Vec<String>) -> Outcome {
        self.functions = functions;
        self
    }

    fn note(mut self, note: impl Into<String>) -> Outcome {
        self.note = Some(note.into());
        self
    }

    fn into_result(self, check: CheckId, inst: &CheckInstance, instance_index: u64) -> CheckResult {
        let witness = (!self.holds).then(|| {
            Box::new(Violation {
                check,
                instance_index,
                space: inst.doc.clone(),
                block: self.block,
                events: self.events.clone(),
                functions: self.functions.clone(),
                lhs: self.lhs.clone(),
                mid: self.mid.clone(),
                rhs: self.rhs.clone(),
                note: self.note.clone(),
            })
        });
        CheckResult {
            check,
            holds: self.holds,
            lhs: self.lhs,
            mid: self.mid,
            rhs: self.rhs,
            witness,
        }
    }
}

/// Mixing reports shared across the checks of one instance, with the
/// perturbation hook already applied to the alpha coefficients.
struct MixingData {
    brute: MixingReport,
    fast: MixingReport,
    phi: MixingReport,
}

impl MixingData {
    fn compute(inst: &CheckInstance, perturb: &Perturbation) -> Result<MixingData> {
        let mut brute = mixing::alpha_brute(&inst.t, &inst.u, &inst.v)?;
        let mut fast = mixing::alpha_fast(&inst.t, &inst.u, &inst.v)?;
        perturb.apply_to_alpha(&mut brute)?;
        perturb.apply_to_alpha(&mut fast)?;
        let phi = mixing::phi(&inst.t, &inst.u, &inst.v)?;
        Ok(MixingData { brute, fast, phi })
    }

    fn max_enumeration(&self) -> u64 {
        self.brute
            .enumeration_count
            .max(self.fast.enumeration_count)
            .max(self.phi.enumeration_count)
    }
}

fn witness_events(report: &MixingReport, block: usize) -> Vec<Vec<String>> {
    let w = &report.witnesses[block];
    let mut events = Vec::new();
    if let Some(p) = &w.p {
        events.push(p.sorted_ids());
    }
    events.push(w.q.sorted_ids());
    events
}

fn check_norm_axioms(inst: &CheckInstance, kind: NormKind) -> Result<Outcome> {
    let t = &inst.t;
    let mut last = (vec!["0".to_owned()], vec!["0".to_owned()]);

    // (a) zero law and nonnegativity
    for (name, f) in &inst.functions {
        let n = norm(t, f, kind)?;
        if n.is_zero() != f.is_zero() || !n.is_nonnegative() {
            return Ok(Outcome::fail(
                strings(&block_values(&n)),
                None,
                vec!["0".to_owned()],
            )
            .functions(vec![name.clone()])
            .note("zero law: norm must vanish exactly on the zero function"));
        }
        last = (strings(&block_values(&n)), vec!["0".to_owned()]);
    }

    // (b) homogeneity over factors in the conditioner's range
    for (g_name, g) in inst.t_range()? {
        let abs_g = RangeElement::new(t.clone(), g.abs())?;
        for (f_name, f) in &inst.functions {
            let lhs = norm(t, &g.mul(f)?, kind)?;
            let rhs = abs_g.mul(&norm(t, f, kind)?)?;
            if lhs != rhs {
                return Ok(Outcome::fail(
                    strings(&block_values(&lhs)),
                    None,
                    strings(&block_values(&rhs)),
                )
                .functions(vec![g_name.clone(), f_name.clone()])
                .note("homogeneity over range factors"));
            }
            last = (strings(&block_values(&lhs)), strings(&block_values(&rhs)));
        }
    }

    // (c) triangle inequality over consecutive sample pairs
    if inst.functions.len() >= 2 {
        for i in 0..inst.functions.len() {
            let (f_name, f) = &inst.functions[i];
            let (h_name, h) = &inst.functions[(i + 1) % inst.functions.len()];
            let lhs = norm(t, &f.add(h)?, kind)?;
            let rhs = norm(t, f, kind)?.add(&norm(t, h, kind)?)?;
            if !lhs.le(&rhs)? {
                let lv = block_values(&lhs);
                let rv = block_values(&rhs);
                let block = first_le_failure(&lv, &rv);
                return Ok(Outcome::fail(strings(&lv), None, strings(&rv))
                    .block(block)
                    .functions(vec![f_name.clone(), h_name.clone()])
                    .note("triangle inequality"));
            }
            last = (strings(&block_values(&lhs)), strings(&block_values(&rhs)));
        }
    }

    Ok(Outcome::pass(last.0, None, last.1))
}

fn check_holder(inst: &CheckInstance) -> Result<Outcome> {
    let mut last = (vec!["0".to_owned()], vec!["0".to_owned()]);
    for (f_name, f) in &inst.functions {
        for (g_name, g) in &inst.functions {
            let bound = norms::holder_bound(&inst.t, f, g)?;
            let lv = block_values(&bound.lhs);
            let rv = block_values(&bound.rhs);
            if !bound.holds {
                let block = first_le_failure(&lv, &rv);
                return Ok(Outcome::fail(strings(&lv), None, strings(&rv))
                    .block(block)
                    .functions(vec![g_name.clone(), f_name.clone()]));
            }
            last = (strings(&lv), strings(&rv));
        }
    }
    Ok(Outcome::pass(last.0, None, last.1))
}

fn check_norm_comparison(inst: &CheckInstance) -> Result<Outcome> {
    let mut last = (vec!["0".to_owned()], vec!["0".to_owned()]);
    for (name, g) in &inst.functions {
        let lhs = l1_norm(&inst.t, g)?;
        let rhs = linf_norm(&inst.t, g)?;
        let lv = block_values(&lhs);
        let rv = block_values(&rhs);
        if !norms::norm_comparison(&inst.t, g)? {
            let block = first_le_failure(&lv, &rv);
            return Ok(Outcome::fail(strings(&lv), None, strings(&rv))
                .block(block)
                .functions(vec![name.clone()]));
        }
        last = (strings(&lv), strings(&rv));
    }
    Ok(Outcome::pass(last.0, None, last.1))
}

fn check_jensen(inst: &CheckInstance) -> Result<Outcome> {
    let mut last = (vec!["0".to_owned()], vec!["0".to_owned()]);
    let projections = [("U", &inst.u), ("V", &inst.v), ("T", &inst.t)];
    for (s_name, s) in projections {
        for kind in [NormKind::L1, NormKind::LInf] {
            for (f_name, f) in &inst.functions {
                let bound = norms::jensen_check(&inst.t, s, f, kind)?;
                let lv = block_values(&bound.lhs);
                let rv = block_values(&bound.rhs);
                if !bound.holds {
                    let block = first_le_failure(&lv, &rv);
                    let p = match kind {
                        NormKind::L1 => "1",
                        NormKind::LInf => "inf",
                    };
                    return Ok(Outcome::fail(strings(&lv), None, strings(&rv))
                        .block(block)
                        .functions(vec![f_name.clone()])
                        .note(format!("S = {s_name}, p = {p}")));
                }
                last = (strings(&lv), strings(&rv));
            }
        }
    }
    Ok(Outcome::pass(last.0, None, last.1))
}

fn check_alpha_bounds(inst: &CheckInstance, data: &MixingData) -> Result<Outcome> {
    let (mid, mid_witnesses, _) =
        mixing::sup_norm_gap(&inst.t, &inst.u, &inst.v, NormKind::L1)?;
    let alpha = &data.brute.coefficient;
    let doubled = alpha.scale(&int(2));
    let av = block_values(alpha);
    let mv = block_values(&mid);
    let dv = block_values(&doubled);
    let lower = first_le_failure(&av, &mv);
    let upper = first_le_failure(&mv, &dv);
    if lower.is_none() && upper.is_none() {
        return Ok(Outcome::pass(strings(&av), Some(strings(&mv)), strings(&dv)));
    }
    let block = lower.or(upper).expect("one side failed");
    let mut events = witness_events(&data.brute, block);
    events.push(mid_witnesses[block].q.sorted_ids());
    Ok(Outcome::fail(strings(&av), Some(strings(&mv)), strings(&dv))
        .block(Some(block))
        .events(events))
}

fn check_alpha_le_phi(_inst: &CheckInstance, data: &MixingData) -> Result<Outcome> {
    let av = block_values(&data.brute.coefficient);
    let pv = block_values(&data.phi.coefficient);
    match first_le_failure(&av, &pv) {
        None => Ok(Outcome::pass(strings(&av), None, strings(&pv))),
        Some(block) => {
            let mut events = witness_events(&data.brute, block);
            events.extend(witness_events(&data.phi, block));
            Ok(Outcome::fail(strings(&av), None, strings(&pv))
                .block(Some(block))
                .events(events))
        }
    }
}

fn check_strong_bound(inst: &CheckInstance, data: &MixingData) -> Result<Outcome> {
    let four_alpha = data.brute.coefficient.scale(&int(4));
    let mut last = (vec!["0".to_owned()], vec!["0".to_owned()]);
    for (name, f) in inst.v_measurable()? {
        let gap = inst.u.apply(f)?.sub(&inst.t.apply(f)?)?;
        let lhs = l1_norm(&inst.t, &gap)?;
        let rhs = four_alpha.mul(&linf_norm(&inst.t, f)?)?;
        let lv = block_values(&lhs);
        let rv = block_values(&rhs);
        if let Some(block) = first_le_failure(&lv, &rv) {
            return Ok(Outcome::fail(strings(&lv), None, strings(&rv))
                .block(Some(block))
                .events(witness_events(&data.brute, block))
                .functions(vec![name.clone()]));
        }
        last = (strings(&lv), strings(&rv));
    }
    Ok(Outcome::pass(last.0, None, last.1))
}

fn check_composed_bound(inst: &CheckInstance, data: &MixingData) -> Result<Outcome> {
    let four_alpha = data.brute.coefficient.scale(&int(4));
    let mut last = (vec!["0".to_owned()], vec!["0".to_owned()]);
    for (name, g) in &inst.functions {
        let composed = inst.u.apply(&inst.v.apply(g)?)?;
        let lhs = l1_norm(&inst.t, &composed.sub(&inst.t.apply(g)?)?)?;
        let rhs = four_alpha.mul(&linf_norm(&inst.t, g)?)?;
        let lv = block_values(&lhs);
        let rv = block_values(&rhs);
        if let Some(block) = first_le_failure(&lv, &rv) {
            return Ok(Outcome::fail(strings(&lv), None, strings(&rv))
                .block(Some(block))
                .events(witness_events(&data.brute, block))
                .functions(vec![name.clone()]));
        }
        last = (strings(&lv), strings(&rv));
    }
    Ok(Outcome::pass(last.0, None, last.1))
}

fn check_uniform_bound(inst: &CheckInstance, data: &MixingData) -> Result<Outcome> {
    let two_phi = data.phi.coefficient.scale(&int(2));
    let mut last = (
        vec!["0".to_owned()],
        Some(vec!["0".to_owned()]),
        vec!["0".to_owned()],
    );
    for (name, f) in inst.v_measurable()? {
        let gap = inst.u.apply(f)?.sub(&inst.t.apply(f)?)?;
        let lhs = l1_norm(&inst.t, &gap)?;
        let mid = linf_norm(&inst.t, &gap)?;
        let rhs = two_phi.mul(&linf_norm(&inst.t, f)?)?;
        let lv = block_values(&lhs);
        let mv = block_values(&mid);
        let rv = block_values(&rhs);
        let lower = first_le_failure(&lv, &mv);
        let upper = first_le_failure(&mv, &rv);
        if let Some(block) = lower.or(upper) {
            return Ok(Outcome::fail(strings(&lv), Some(strings(&mv)), strings(&rv))
                .block(Some(block))
                .events(witness_events(&data.phi, block))
                .functions(vec![name.clone()]));
        }
        last = (strings(&lv), Some(strings(&mv)), strings(&rv));
    }
    Ok(Outcome::pass(last.0, last.1, last.2))
}

fn check_factorization(inst: &CheckInstance, data: &MixingData) -> Result<Outcome> {
    let space = &inst.space;
    let alpha = block_values(&data.brute.coefficient);
    let phi = block_values(&data.phi.coefficient);
    let mut conditional = Vec::new();
    let mut classical = Vec::new();
    for (block, value) in alpha.iter().enumerate() {
        conditional.push(value.clone());
        classical.push(mixing::classical_alpha(
            space,
            block,
            inst.u.partition(),
            inst.v.partition(),
        )?);
    }
    for route in [mixing::PhiRoute::LinfNorm, mixing::PhiRoute::ConditionalProb] {
        for (block, value) in phi.iter().enumerate() {
            conditional.push(value.clone());
            classical.push(mixing::classical_phi(
                space,
                block,
                inst.u.partition(),
                inst.v.partition(),
                route,
            )?);
        }
    }
    if conditional == classical {
        Ok(Outcome::pass(strings(&conditional), None, strings(&classical)))
    } else {
        let index = conditional
            .iter()
            .zip(&classical)
            .position(|(a, b)| a != b)
            .expect("vectors differ");
        Ok(Outcome::fail(strings(&conditional), None, strings(&classical))
            .block(Some(index % space.block_count()))
            .note("conditional vs classical blockwise coefficients (alpha, then phi by both routes)"))
    }
}

fn check_oracle_equivalence(_inst: &CheckInstance, data: &MixingData) -> Result<Outcome> {
    let bv = block_values(&data.brute.coefficient);
    let fv = block_values(&data.fast.coefficient);
    if bv == fv {
        return Ok(Outcome::pass(strings(&bv), None, strings(&fv)));
    }
    let block = bv
        .iter()
        .zip(&fv)
        .position(|(a, b)| a != b)
        .expect("vectors differ");
    let mut events = witness_events(&data.brute, block);
    events.extend(witness_events(&data.fast, block));
    Ok(Outcome::fail(strings(&bv), None, strings(&fv))
        .block(Some(block))
        .events(events)
        .note(format!(
            "pair enumeration ({} candidates) vs positive-band route ({} candidates)",
            data.brute.enumeration_count, data.fast.enumeration_count
        )))
}

fn check_phi_routes(inst: &CheckInstance) -> Result<Outcome> {
    let space = &inst.space;
    let mut by_conditional = Vec::new();
    let mut by_norm = Vec::new();
    for block in 0..space.block_count() {
        by_conditional.push(mixing::classical_phi(
            space,
            block,
            inst.u.partition(),
            inst.v.partition(),
            mixing::PhiRoute::ConditionalProb,
        )?);
        by_norm.push(mixing::classical_phi(
            space,
            block,
            inst.u.partition(),
            inst.v.partition(),
            mixing::PhiRoute::LinfNorm,
        )?);
    }
    if by_conditional == by_norm {
        Ok(Outcome::pass(strings(&by_conditional), None, strings(&by_norm)))
    } else {
        let block = by_conditional
            .iter()
            .zip(&by_norm)
            .position(|(a, b)| a != b)
            .expect("vectors differ");
        Ok(Outcome::fail(strings(&by_conditional), None, strings(&by_norm)).block(Some(block)))
    }
}

fn check_compatibility_equivalence(inst: &CheckInstance) -> Result<Outcome> {
    let pairs: [(&str, &CondExpectation, &CondExpectation); 4] = [
        ("U with T", &inst.u, &inst.t),
        ("V with T", &inst.v, &inst.t),
        ("U with V", &inst.u, &inst.v),
        ("V with U", &inst.v, &inst.u),
    ];
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    let mut failed: Option<&str> = None;
    for (label, a, b) in pairs {
        match is_compatible(a, b) {
            Ok(agreed) => {
                lhs.push(agreed.to_string());
                rhs.push(agreed.to_string());
            }
            Err(Error::CompatibilityCriteriaDisagree {
                algebraic,
                refinement,
            }) => {
                lhs.push(algebraic.to_string());
                rhs.push(refinement.to_string());
                failed.get_or_insert(label);
            }
            Err(other) => return Err(other),
        }
    }
    match failed {
        None => Ok(Outcome::pass(lhs, None, rhs)),
        Some(label) => Ok(Outcome::fail(lhs, None, rhs)
            .note(format!("criteria disagree for {label}"))),
    }
}

const MIXING_CHECKS: [CheckId; 6] = [
    CheckId::AlphaNormBounds,
    CheckId::AlphaLePhi,
    CheckId::StrongMixingBound,
    CheckId::ComposedMixingBound,
    CheckId::UniformMixingBound,
    CheckId::BlockwiseFactorization,
];

/// Run the selected checks on one instance, in [`CheckId::ALL`] order.
/// Returns the results and the largest enumeration count touched.
pub fn run_checks(
    inst: &CheckInstance,
    instance_index: u64,
    filter: &BTreeSet<CheckId>,
    perturb: &Perturbation,
) -> Result<(Vec<CheckResult>, u64)> {
    let needs_mixing = filter
        .iter()
        .any(|c| MIXING_CHECKS.contains(c) || *c == CheckId::AlphaOracleEquivalence);
    let data = if needs_mixing {
        Some(MixingData::compute(inst, perturb)?)
    } else {
        None
    };
    let mut results = Vec::new();
    for check in CheckId::ALL {
        if !filter.contains(&check) {
            continue;
        }
        let outcome = match check {
            CheckId::L1NormAxioms => check_norm_axioms(inst, NormKind::L1)?,
            CheckId::LinfNormAxioms => check_norm_axioms(inst, NormKind::LInf)?,
            CheckId::HolderBound => check_holder(inst)?,
            CheckId::NormComparison => check_norm_comparison(inst)?,
            CheckId::JensenContraction => check_jensen(inst)?,
            CheckId::AlphaNormBounds => {
                check_alpha_bounds(inst, data.as_ref().expect("mixing data present"))?
            }
            CheckId::AlphaLePhi => {
                check_alpha_le_phi(inst, data.as_ref().expect("mixing data present"))?
            }
            CheckId::StrongMixingBound => {
                check_strong_bound(inst, data.as_ref().expect("mixing data present"))?
            }
            CheckId::ComposedMixingBound => {
                check_composed_bound(inst, data.as_ref().expect("mixing data present"))?
            }
            CheckId::UniformMixingBound => {
                check_uniform_bound(inst, data.as_ref().expect("mixing data present"))?
            }
            CheckId::BlockwiseFactorization => {
                check_factorization(inst, data.as_ref().expect("mixing data present"))?
            }
            CheckId::AlphaOracleEquivalence => {
                check_oracle_equivalence(inst, data.as_ref().expect("mixing data present"))?
            }
            CheckId::PhiRouteEquivalence => check_phi_routes(inst)?,
            CheckId::CompatibilityEquivalence => check_compatibility_equivalence(inst)?,
        };
        results.push(outcome.into_result(check, inst, instance_index));
    }
    let max_enumeration = data.map(|d| d.max_enumeration()).unwrap_or(0);
    Ok((results, max_enumeration))
}

// ---------------------------------------------------------------------
// standalone single checks
// ---------------------------------------------------------------------

fn single_instance(
    t: &CondExpectation,
    u: &CondExpectation,
    v: &CondExpectation,
    function: Option<(&str, &LatticeFunction)>,
) -> Result<CheckInstance> {
    if !is_compatible(u, t)? || !is_compatible(v, t)? {
        return Err(Error::Incompatible);
    }
    if !t.conditions_on_blocks() {
        return Err(Error::ConditionerNotBlocks);
    }
    let functions = function
        .map(|(name, f)| vec![(name.to_owned(), f.clone())])
        .unwrap_or_default();
    CheckInstance::assemble(
        t.space(),
        u.partition().clone(),
        v.partition().clone(),
        functions,
    )
}

fn single_check(inst: &CheckInstance, check: CheckId) -> Result<CheckResult> {
    let filter = BTreeSet::from([check]);
    let (results, _) = run_checks(inst, 0, &filter, &Perturbation::none())?;
    Ok(results.into_iter().next().expect("one check selected"))
}

/// Two-sided bound of alpha by the supremum of L¹ gaps.
pub fn verify_alpha_bounds(
    t: &CondExpectation,
    u: &CondExpectation,
    v: &CondExpectation,
) -> Result<CheckResult> {
    single_check(&single_instance(t, u, v, None)?, CheckId::AlphaNormBounds)
}

/// Alpha never exceeds phi.
pub fn verify_alpha_le_phi(
    t: &CondExpectation,
    u: &CondExpectation,
    v: &CondExpectation,
) -> Result<CheckResult> {
    single_check(&single_instance(t, u, v, None)?, CheckId::AlphaLePhi)
}

/// `‖Uf − Tf‖₁ ≤ 4α‖f‖∞` for `f` constant on V-cells.
pub fn verify_strong_inequality(
    t: &CondExpectation,
    u: &CondExpectation,
    v: &CondExpectation,
    f: &LatticeFunction,
) -> Result<CheckResult> {
    if !v.in_range(f)? {
        return Err(Error::NotInRange {
            what: "the strong mixing bound needs f constant on V-cells".to_owned(),
        });
    }
    single_check(
        &single_instance(t, u, v, Some(("f", f)))?,
        CheckId::StrongMixingBound,
    )
}

/// `‖UVg − Tg‖₁ ≤ 4α‖g‖∞` for arbitrary `g`.
pub fn verify_composed_inequality(
    t: &CondExpectation,
    u: &CondExpectation,
    v: &CondExpectation,
    g: &LatticeFunction,
) -> Result<CheckResult> {
    single_check(
        &single_instance(t, u, v, Some(("g", g)))?,
        CheckId::ComposedMixingBound,
    )
}

/// `‖Uf − Tf‖₁ ≤ ‖Uf − Tf‖∞ ≤ 2φ‖f‖∞` for `f` constant on V-cells.
pub fn verify_phi_inequality(
    t: &CondExpectation,
    u: &CondExpectation,
    v: &CondExpectation,
    f: &LatticeFunction,
) -> Result<CheckResult> {
    if !v.in_range(f)? {
        return Err(Error::NotInRange {
            what: "the uniform mixing bound needs f constant on V-cells".to_owned(),
        });
    }
    single_check(
        &single_instance(t, u, v, Some(("f", f)))?,
        CheckId::UniformMixingBound,
    )
}

/// Blockwise factorization into classical coefficients.
pub fn verify_factorization(
    t: &CondExpectation,
    u: &CondExpectation,
    v: &CondExpectation,
) -> Result<CheckResult> {
    single_check(
        &single_instance(t, u, v, None)?,
        CheckId::BlockwiseFactorization,
    )
}

// ---------------------------------------------------------------------
// suite
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckTally {
    pub run: u64,
    pub failed: u64,
}

/// Aggregate of a suite run. Contains no wall-clock data, so identical
/// seeds serialize to identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub instances: u64,
    pub checks_run: u64,
    pub violations: u64,
    pub per_check: BTreeMap<String, CheckTally>,
    pub max_enumeration_count: u64,
    pub distinct_instances: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<Violation>,
}

impl SuiteReport {
    pub fn all_hold(&self) -> bool {
        self.violations == 0
    }
}

/// Every selected check on every instance. Instances are independent and
/// run in parallel; aggregation is ordered by instance index, so the
/// report is deterministic.
pub fn run_suite(
    specs: &[InstanceSpec],
    filter: &BTreeSet<CheckId>,
    perturb: &Perturbation,
) -> Result<SuiteReport> {
    let outcomes = specs
        .par_iter()
        .enumerate()
        .map(|(index, spec)| {
            let inst = random_instance(spec)?;
            let digest = inst.doc.canonical_json();
            let (results, max_enumeration) =
                run_checks(&inst, index as u64, filter, perturb)?;
            Ok((digest, results, max_enumeration))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = SuiteReport {
        instances: specs.len() as u64,
        checks_run: 0,
        violations: 0,
        per_check: BTreeMap::new(),
        max_enumeration_count: 0,
        distinct_instances: 0,
        first_violation: None,
    };
    let mut digests = BTreeSet::new();
    for (digest, results, max_enumeration) in outcomes {
        digests.insert(digest);
        report.max_enumeration_count = report.max_enumeration_count.max(max_enumeration);
        for result in results {
            report.checks_run += 1;
            let tally = report
                .per_check
                .entry(result.check.name().to_owned())
                .or_default();
            tally.run += 1;
            if !result.holds {
                tally.failed += 1;
                report.violations += 1;
                if report.first_violation.is_none() {
                    report.first_violation = result.witness.map(|w| *w);
                }
            }
        }
    }
    report.distinct_instances = digests.len() as u64;
    Ok(report)
}

/// Re-run the single check a violation came from, on the instance
/// serialized inside it. With the same perturbation the failure must
/// reproduce.
pub fn replay(violation: &Violation, perturb: &Perturbation) -> Result<CheckResult> {
    let inst = CheckInstance::from_doc(&violation.space)?;
    let filter = BTreeSet::from([violation.check]);
    let (results, _) = run_checks(&inst, violation.instance_index, &filter, perturb)?;
    Ok(results.into_iter().next().expect("one check selected"))
}

/// All set partitions of `{0, …, n−1}` as cell-assignment vectors in
/// restricted growth form (assignment `a[i]` is the cell of point `i`).
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn extend(assign: &mut Vec<usize>, used: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if assign.len() == n {
            out.push(assign.clone());
            return;
        }
        for cell in 0..=used {
            assign.push(cell);
            extend(assign, used.max(cell + 1), n, out);
            assign.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    extend(&mut Vec::with_capacity(n), 0, n, &mut out);
    out
}
