//! Mixing-coefficient properties over seeded random instances: exact
//! agreement of the two alpha algorithms, symmetry, monotonicity under
//! coarsening, blockwise factorization, and witness integrity.

use proptest::prelude::*;

use rieszmix::cond::CondExpectation;
use rieszmix::mixing::{
    alpha_brute, alpha_expression, alpha_fast, classical_alpha, classical_phi, norm_gap_expression,
    phi, positive_band, MixingReport, PhiRoute,
};
use rieszmix::norms::NormKind;
use rieszmix::space::Partition;
use rieszmix::verify::{random_instance, CheckInstance, InstanceSpec};

fn spec(seed: u64) -> InstanceSpec {
    InstanceSpec {
        seed,
        point_count: 4 + (seed % 9) as usize,
        block_count: 1 + (seed % 3) as usize,
        max_cells_per_block: 1 + (seed % 4) as usize,
        weight_denominator_bound: 6,
        function_value_bound: 5,
    }
}

fn instance(seed: u64) -> CheckInstance {
    random_instance(&spec(seed)).expect("spec is feasible")
}

/// Merge the first two cells that share a block, producing a strict
/// coarsening when one exists.
fn coarsen(partition: &Partition) -> Option<Partition> {
    let space = partition.space();
    let cells = partition.cells();
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            if space.block_of(cells[i][0]) == space.block_of(cells[j][0]) {
                let mut merged: Vec<Vec<usize>> = Vec::new();
                let mut fused = cells[i].clone();
                fused.extend(cells[j].iter().copied());
                merged.push(fused);
                for (k, cell) in cells.iter().enumerate() {
                    if k != i && k != j {
                        merged.push(cell.clone());
                    }
                }
                return Some(Partition::from_index_cells(space, merged, true).unwrap());
            }
        }
    }
    None
}

fn witness_checks(report: &MixingReport, inst: &CheckInstance, b_side: &CondExpectation) {
    assert!(report.coefficient.is_nonnegative());
    let values = report.block_values();
    for witness in &report.witnesses {
        assert!(witness.q.is_measurable(b_side.partition()).unwrap());
        assert!(witness
            .q
            .members()
            .iter()
            .all(|&p| inst.space.block_of(p) == witness.block));
        if let Some(p) = &witness.p {
            assert!(p.is_measurable(inst.u.partition()).unwrap());
            assert!(p
                .members()
                .iter()
                .all(|&point| inst.space.block_of(point) == witness.block));
        }
        let member = inst.space.block_members(witness.block).unwrap()[0];
        match &witness.p {
            Some(p) => {
                let expr = alpha_expression(&inst.t, p, &witness.q).unwrap();
                assert_eq!(expr.value(member), &values[witness.block]);
            }
            None => {
                let gap =
                    norm_gap_expression(&inst.t, &inst.u, &witness.q, NormKind::LInf).unwrap();
                assert_eq!(gap.value().value(member), &values[witness.block]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn the_two_alpha_algorithms_agree_exactly(seed in 0u64..1_000_000) {
        let inst = instance(seed);
        let brute = alpha_brute(&inst.t, &inst.u, &inst.v).unwrap();
        let fast = alpha_fast(&inst.t, &inst.u, &inst.v).unwrap();
        prop_assert_eq!(brute.coefficient.value(), fast.coefficient.value());
        prop_assert!(fast.enumeration_count <= brute.enumeration_count);
    }

    #[test]
    fn alpha_is_symmetric_in_its_partitions(seed in 0u64..1_000_000) {
        let inst = instance(seed);
        let forward = alpha_brute(&inst.t, &inst.u, &inst.v).unwrap();
        let backward = alpha_brute(&inst.t, &inst.v, &inst.u).unwrap();
        prop_assert_eq!(forward.coefficient.value(), backward.coefficient.value());
    }

    #[test]
    fn coarsening_never_increases_the_coefficients(seed in 0u64..1_000_000) {
        let inst = instance(seed);
        let alpha = alpha_brute(&inst.t, &inst.u, &inst.v).unwrap();
        let uniform = phi(&inst.t, &inst.u, &inst.v).unwrap();
        for side in [true, false] {
            let target = if side { &inst.u } else { &inst.v };
            if let Some(coarser) = coarsen(target.partition()) {
                let coarser = CondExpectation::new(coarser);
                let (cu, cv) = if side { (&coarser, &inst.v) } else { (&inst.u, &coarser) };
                let alpha_c = alpha_brute(&inst.t, cu, cv).unwrap();
                let phi_c = phi(&inst.t, cu, cv).unwrap();
                prop_assert!(alpha_c.coefficient.le(&alpha.coefficient).unwrap());
                prop_assert!(phi_c.coefficient.le(&uniform.coefficient).unwrap());
            }
        }
    }

    #[test]
    fn coefficients_vanish_on_trivial_blocks(seed in 0u64..1_000_000) {
        let inst = instance(seed);
        // replace V by the block partition: only trivial events per block
        let trivial = CondExpectation::over_blocks(&inst.space);
        prop_assert!(alpha_brute(&inst.t, &inst.u, &trivial).unwrap().coefficient.is_zero());
        prop_assert!(phi(&inst.t, &inst.u, &trivial).unwrap().coefficient.is_zero());
    }

    #[test]
    fn blockwise_factorization_is_exact(seed in 0u64..1_000_000) {
        let inst = instance(seed);
        let alpha = alpha_brute(&inst.t, &inst.u, &inst.v).unwrap().block_values();
        let uniform = phi(&inst.t, &inst.u, &inst.v).unwrap().block_values();
        for block in 0..inst.space.block_count() {
            let classical =
                classical_alpha(&inst.space, block, inst.u.partition(), inst.v.partition())
                    .unwrap();
            prop_assert_eq!(&alpha[block], &classical);
            for route in [PhiRoute::ConditionalProb, PhiRoute::LinfNorm] {
                let classical = classical_phi(
                    &inst.space,
                    block,
                    inst.u.partition(),
                    inst.v.partition(),
                    route,
                )
                .unwrap();
                prop_assert_eq!(&uniform[block], &classical);
            }
        }
    }

    #[test]
    fn classical_phi_routes_agree(seed in 0u64..1_000_000) {
        let inst = instance(seed);
        for block in 0..inst.space.block_count() {
            let by_conditional = classical_phi(
                &inst.space,
                block,
                inst.u.partition(),
                inst.v.partition(),
                PhiRoute::ConditionalProb,
            )
            .unwrap();
            let by_norm = classical_phi(
                &inst.space,
                block,
                inst.u.partition(),
                inst.v.partition(),
                PhiRoute::LinfNorm,
            )
            .unwrap();
            prop_assert_eq!(by_conditional, by_norm);
        }
    }

    #[test]
    fn witnesses_are_measurable_and_reproduce_their_blocks(seed in 0u64..1_000_000) {
        let inst = instance(seed);
        witness_checks(&alpha_brute(&inst.t, &inst.u, &inst.v).unwrap(), &inst, &inst.v);
        witness_checks(&alpha_fast(&inst.t, &inst.u, &inst.v).unwrap(), &inst, &inst.v);
        witness_checks(&phi(&inst.t, &inst.u, &inst.v).unwrap(), &inst, &inst.v);
    }

    #[test]
    fn positive_band_attains_the_one_sided_supremum(seed in 0u64..1_000_000) {
        // for each V-event B, the positive band P maximizes the signed
        // bilinear form over A-side events
        let inst = instance(seed);
        for block in 0..inst.space.block_count() {
            for q in rieszmix::space::enumerate_events(inst.v.partition(), block).unwrap() {
                let band = positive_band(&inst.t, &inst.u, &q).unwrap();
                let band_value = signed_alpha_value(&inst, &band, &q, block);
                for p in rieszmix::space::enumerate_events(inst.u.partition(), block).unwrap() {
                    prop_assert!(signed_alpha_value(&inst, &p, &q, block) <= band_value);
                }
            }
        }
    }
}

fn signed_alpha_value(
    inst: &CheckInstance,
    p: &rieszmix::space::EventSet,
    q: &rieszmix::space::EventSet,
    block: usize,
) -> rieszmix::Rat {
    let pa = p.indicator();
    let qb = q.indicator();
    let joint = inst.t.apply(&pa.mul(&qb).unwrap()).unwrap();
    let product = inst
        .t
        .apply(&pa)
        .unwrap()
        .mul(&inst.t.apply(&qb).unwrap())
        .unwrap();
    let member = inst.space.block_members(block).unwrap()[0];
    joint.sub(&product).unwrap().value(member).clone()
}
