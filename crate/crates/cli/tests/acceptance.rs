//! Acceptance suite. Each test covers one criterion, asserts exact
//! rational equalities (no tolerances), and prints a PASS/FAIL line:
//!
//! ```text
//! cargo test -p rieszmix-cli --test acceptance -- --nocapture
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rieszmix::cond::{is_compatible, CondExpectation};
use rieszmix::fixtures;
use rieszmix::mixing::{alpha_brute, alpha_fast, classical_phi, phi, sup_norm_gap, PhiRoute};
use rieszmix::norms::NormKind;
use rieszmix::rat::rat;
use rieszmix::space::{GroundSpace, Partition};
use rieszmix::verify::{
    random_instance, replay, run_suite, set_partitions, verify_alpha_bounds, verify_factorization,
    CheckId, InstanceSpec, Perturbation, Violation,
};

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Criteria run one at a time so each is timed against its budget
/// without contention from its siblings.
static SERIAL: std::sync::Mutex<()> = std::sync::Mutex::new(());

fn criterion(name: &str, budget: Duration, run: impl FnOnce() -> Result<(), String>) {
    let _exclusive = SERIAL.lock().unwrap_or_else(|poisoned| poisoned.into_inner());
    let started = Instant::now();
    let outcome = run();
    let elapsed = started.elapsed();
    match outcome {
        Ok(()) if elapsed <= budget => {
            println!("acceptance {name}: PASS ({elapsed:.2?})");
        }
        Ok(()) => {
            println!(
                "acceptance {name}: FAIL — exceeded the {budget:?} budget (took {elapsed:.2?})"
            );
            panic!("{name} exceeded its runtime budget");
        }
        Err(message) => {
            println!("acceptance {name}: FAIL — {message}");
            panic!("{name}: {message}");
        }
    }
}

fn all_checks() -> BTreeSet<CheckId> {
    CheckId::ALL.into_iter().collect()
}

fn suite_spec(seed: u64) -> InstanceSpec {
    InstanceSpec {
        seed,
        point_count: 4 + (seed % 9) as usize, // 4..=12
        block_count: 1 + (seed % 3) as usize, // 1..=3
        max_cells_per_block: 1 + (seed % 4) as usize, // 1..=4
        weight_denominator_bound: 6,
        function_value_bound: 5,
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rieszmix"))
}

#[test]
fn criterion_1_uniform_fixture_values_and_tight_chain() {
    criterion("1 (uniform fixture: alpha, phi, norm-gap chain)", Duration::from_secs(1), || {
        let space = fixtures::uniform4();
        let t = CondExpectation::over_blocks(&space);
        let u = CondExpectation::new(fixtures::uniform4_halves(&space));

        let alpha = alpha_brute(&t, &u, &u).map_err(|e| e.to_string())?;
        ensure!(alpha.block_values() == vec![rat(1, 4)], "alpha must be 1/4");

        let uniform = phi(&t, &u, &u).map_err(|e| e.to_string())?;
        ensure!(uniform.block_values() == vec![rat(1, 2)], "phi must be 1/2");

        let (gap, _, _) =
            sup_norm_gap(&t, &u, &u, NormKind::L1).map_err(|e| e.to_string())?;
        ensure!(
            gap.cell_values() == vec![rat(1, 2)],
            "sup of L1 gaps must be 1/2"
        );

        let chain = verify_alpha_bounds(&t, &u, &u).map_err(|e| e.to_string())?;
        ensure!(chain.holds, "the two-sided bound must hold");
        ensure!(
            chain.lhs == vec!["1/4"] && chain.mid == Some(vec!["1/2".to_owned()])
                && chain.rhs == vec!["1/2"],
            "chain must be 1/4 <= 1/2 <= 1/2, got {:?} {:?} {:?}",
            chain.lhs,
            chain.mid,
            chain.rhs
        );
        ensure!(
            chain.mid.as_deref() == Some(&chain.rhs[..]),
            "the right bound must be tight on this fixture"
        );
        Ok(())
    });
}

#[test]
fn criterion_2_two_block_fixture_and_factorization() {
    criterion("2 (two-block fixture: blockwise values, factorization)", Duration::from_secs(1), || {
        let space = fixtures::two_blocks();
        let t = CondExpectation::over_blocks(&space);
        let w = CondExpectation::new(fixtures::two_blocks_split(&space));

        let alpha = alpha_brute(&t, &w, &w).map_err(|e| e.to_string())?;
        ensure!(
            alpha.block_values() == vec![rat(1, 4), rat(3, 16)],
            "alpha must be (1/4, 3/16), got {:?}",
            alpha.block_values()
        );

        let uniform = phi(&t, &w, &w).map_err(|e| e.to_string())?;
        ensure!(
            uniform.block_values() == vec![rat(1, 2), rat(3, 4)],
            "phi must be (1/2, 3/4), got {:?}",
            uniform.block_values()
        );

        let factorization = verify_factorization(&t, &w, &w).map_err(|e| e.to_string())?;
        ensure!(factorization.holds, "blockwise factorization must be exact");
        Ok(())
    });
}

#[test]
fn criterion_3_oracle_equivalence_over_500_instances() {
    criterion("3 (alpha fast = brute on 500 seeded instances)", Duration::from_secs(60), || {
        let mut mismatches = 0usize;
        for seed in 0..500u64 {
            let inst = random_instance(&suite_spec(seed)).map_err(|e| e.to_string())?;
            let brute = alpha_brute(&inst.t, &inst.u, &inst.v).map_err(|e| e.to_string())?;
            let fast = alpha_fast(&inst.t, &inst.u, &inst.v).map_err(|e| e.to_string())?;
            if brute.coefficient.value() != fast.coefficient.value() {
                mismatches += 1;
            }
        }
        ensure!(mismatches == 0, "{mismatches} mismatches out of 500");
        Ok(())
    });
}

#[test]
fn criterion_4_inequality_suite_over_1000_instances() {
    criterion("4 (inequality suite: 1000 instances, zero violations)", Duration::from_secs(300), || {
        let specs: Vec<InstanceSpec> = (0..1000).map(suite_spec).collect();
        let report = run_suite(&specs, &all_checks(), &Perturbation::none())
            .map_err(|e| e.to_string())?;
        ensure!(report.instances == 1000, "must run 1000 instances");
        ensure!(
            report.distinct_instances >= 995,
            "seeded instances must be distinct, got {}",
            report.distinct_instances
        );
        ensure!(
            report.violations == 0,
            "expected zero violations, found {}: first = {:?}",
            report.violations,
            report.first_violation
        );
        for check in CheckId::ALL {
            let tally = report
                .per_check
                .get(check.name())
                .ok_or_else(|| format!("check {check} never ran"))?;
            ensure!(tally.run == 1000, "check {check} ran {} times", tally.run);
            ensure!(tally.failed == 0, "check {check} failed {} times", tally.failed);
        }
        Ok(())
    });
}

#[test]
fn criterion_5_phi_route_agreement_on_single_block_instances() {
    criterion("5 (classical phi routes agree on 500 instances)", Duration::from_secs(30), || {
        for seed in 0..500u64 {
            let spec = InstanceSpec {
                seed,
                point_count: 4 + (seed % 9) as usize,
                block_count: 1,
                max_cells_per_block: 1 + (seed % 4) as usize,
                weight_denominator_bound: 6,
                function_value_bound: 5,
            };
            let inst = random_instance(&spec).map_err(|e| e.to_string())?;
            let by_conditional = classical_phi(
                &inst.space,
                0,
                inst.u.partition(),
                inst.v.partition(),
                PhiRoute::ConditionalProb,
            )
            .map_err(|e| e.to_string())?;
            let by_norm = classical_phi(
                &inst.space,
                0,
                inst.u.partition(),
                inst.v.partition(),
                PhiRoute::LinfNorm,
            )
            .map_err(|e| e.to_string())?;
            ensure!(
                by_conditional == by_norm,
                "routes differ at seed {seed}: {by_conditional} vs {by_norm}"
            );
        }
        Ok(())
    });
}

#[test]
fn criterion_6_compatibility_criteria_agree_exhaustively() {
    criterion("6 (compatibility criteria agree on all pairs, <= 5 points)", Duration::from_secs(30), || {
        for n in 1..=5usize {
            let points = (0..n)
                .map(|i| (format!("q{i}"), rat(i as i64 + 1, 2)))
                .collect();
            let blocks = vec![(0..n).map(|i| format!("q{i}")).collect()];
            let space = std::sync::Arc::new(
                GroundSpace::new(points, blocks).map_err(|e| e.to_string())?,
            );
            let operators: Vec<CondExpectation> = set_partitions(n)
                .into_iter()
                .map(|assign| {
                    let mut cells: std::collections::BTreeMap<usize, Vec<usize>> =
                        Default::default();
                    for (p, c) in assign.into_iter().enumerate() {
                        cells.entry(c).or_default().push(p);
                    }
                    Partition::from_index_cells(&space, cells.into_values().collect(), false)
                        .map(CondExpectation::new)
                        .map_err(|e| e.to_string())
                })
                .collect::<Result<_, String>>()?;
            for a in &operators {
                for b in &operators {
                    // a disagreement between the two criteria surfaces as
                    // an error from is_compatible
                    let verdict = is_compatible(a, b).map_err(|e| {
                        format!("criteria disagreement on {n} points: {e}")
                    })?;
                    let refinement =
                        a.partition().refines(b.partition()).map_err(|e| e.to_string())?;
                    ensure!(verdict == refinement, "verdict differs from refinement");
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_7_harness_self_test_via_the_perturbation_hook() {
    criterion("7 (perturbation hook: exit 1 with reproducible witness)", Duration::from_secs(5), || {
        let s1 = fixture("s1.json");
        let base = ["verify", "--space", s1.to_str().unwrap(), "--u", "C1", "--v", "C1"];

        let clean = binary().args(base).output().map_err(|e| e.to_string())?;
        ensure!(
            clean.status.code() == Some(0),
            "clean verify must exit 0, got {:?}",
            clean.status.code()
        );

        let perturbed = binary()
            .args(base)
            .arg("--perturb-alpha")
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(
            perturbed.status.code() == Some(1),
            "perturbed verify must exit 1, got {:?}",
            perturbed.status.code()
        );

        let report: serde_json::Value =
            serde_json::from_slice(&perturbed.stdout).map_err(|e| e.to_string())?;
        let witness_value = report["checks"]
            .as_array()
            .into_iter()
            .flatten()
            .find(|c| c["holds"] == false)
            .and_then(|c| c.get("witness"))
            .cloned()
            .ok_or("perturbed run must emit a witness")?;
        let witness: Violation =
            serde_json::from_value(witness_value).map_err(|e| e.to_string())?;

        let replayed =
            replay(&witness, &Perturbation::alpha_plus_one()).map_err(|e| e.to_string())?;
        ensure!(!replayed.holds, "replaying the witness must reproduce the failure");
        let unperturbed = replay(&witness, &Perturbation::none()).map_err(|e| e.to_string())?;
        ensure!(unperturbed.holds, "without the hook the check must pass again");
        Ok(())
    });
}

#[test]
fn criterion_8_determinism_of_gen_and_suite() {
    criterion("8 (byte-identical gen output and suite reports)", Duration::from_secs(10), || {
        let dir = std::env::temp_dir().join(format!("rieszmix-acceptance-{}", std::process::id()));
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        let mut bytes = Vec::new();
        for name in ["one.json", "two.json"] {
            let path = dir.join(name);
            let out = binary()
                .args([
                    "gen", "--seed", "21", "--points", "9", "--blocks", "3", "--max-cells", "3",
                    "--out",
                ])
                .arg(&path)
                .output()
                .map_err(|e| e.to_string())?;
            ensure!(out.status.code() == Some(0), "gen must succeed");
            bytes.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        ensure!(bytes[0] == bytes[1], "gen outputs must be byte-identical");

        let specs: Vec<InstanceSpec> = (0..20).map(suite_spec).collect();
        let first = run_suite(&specs, &all_checks(), &Perturbation::none())
            .map_err(|e| e.to_string())?;
        let second = run_suite(&specs, &all_checks(), &Perturbation::none())
            .map_err(|e| e.to_string())?;
        let first_json = serde_json::to_string(&first).map_err(|e| e.to_string())?;
        let second_json = serde_json::to_string(&second).map_err(|e| e.to_string())?;
        ensure!(first_json == second_json, "suite reports must serialize identically");
        Ok(())
    });
}
