//! Small hand-checked spaces used across the test suites and docs.

use std::sync::Arc;

use crate::rat::{int, rat};
use crate::space::{GroundSpace, Partition};

/// Four points `a,b,c,d`, weight 1/4 each, one block: the uniform
/// probability space on four outcomes.
pub fn uniform4() -> Arc<GroundSpace> {
    let points = ["a", "b", "c", "d"]
        .into_iter()
        .map(|id| (id.to_owned(), rat(1, 4)))
        .collect();
    let blocks = vec![vec!["a".into(), "b".into(), "c".into(), "d".into()]];
    Arc::new(GroundSpace::new(points, blocks).expect("fixture is valid"))
}

/// `{{a,b},{c,d}}` on [`uniform4`].
pub fn uniform4_halves(space: &Arc<GroundSpace>) -> Partition {
    Partition::new(
        space,
        vec![vec!["a".into(), "b".into()], vec!["c".into(), "d".into()]],
        true,
    )
    .expect("fixture is valid")
}

/// `{{a,c},{b,d}}` on [`uniform4`]; independent of [`uniform4_halves`]
/// under the uniform measure.
pub fn uniform4_crossing(space: &Arc<GroundSpace>) -> Partition {
    Partition::new(
        space,
        vec![vec!["a".into(), "c".into()], vec!["b".into(), "d".into()]],
        true,
    )
    .expect("fixture is valid")
}

/// Two blocks: `Ω₁ = {a,b,c,d}` with weight 1 each and `Ω₂ = {e,f}` with
/// weights 1 and 3. Total mass 8, block masses 4 and 4.
pub fn two_blocks() -> Arc<GroundSpace> {
    let points = vec![
        ("a".to_owned(), int(1)),
        ("b".to_owned(), int(1)),
        ("c".to_owned(), int(1)),
        ("d".to_owned(), int(1)),
        ("e".to_owned(), int(1)),
        ("f".to_owned(), int(3)),
    ];
    let blocks = vec![
        vec!["a".into(), "b".into(), "c".into(), "d".into()],
        vec!["e".into(), "f".into()],
    ];
    Arc::new(GroundSpace::new(points, blocks).expect("fixture is valid"))
}

/// `{{a,b},{c,d},{e},{f}}` on [`two_blocks`]; refines the blocks.
pub fn two_blocks_split(space: &Arc<GroundSpace>) -> Partition {
    Partition::new(
        space,
        vec![
            vec!["a".into(), "b".into()],
            vec!["c".into(), "d".into()],
            vec!["e".into()],
            vec!["f".into()],
        ],
        true,
    )
    .expect("fixture is valid")
}
