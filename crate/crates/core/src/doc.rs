//! Serializable description of a space with named partitions and
//! functions. This is both the input file schema of the CLI and the
//! instance snapshot embedded in violation witnesses, so a witness always
//! carries everything needed to rebuild and re-run the failing check.
//!
//! Rationals travel as `"p/q"` (or integer) strings in lowest terms with
//! positive denominator. Unknown fields are rejected.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::parse_rat;
use crate::space::{GroundSpace, LatticeFunction, Partition};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub id: String,
    pub weight: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub points: Vec<PointDoc>,
    pub blocks: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub partitions: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, BTreeMap<String, String>>,
}

impl SpaceDoc {
    /// Validate and build the ground space. Partition and function
    /// definitions are resolved separately so errors carry their names.
    pub fn build_space(&self) -> Result<Arc<GroundSpace>> {
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let weight = parse_rat(&p.weight, &format!("points[{i}].weight"))?;
                Ok((p.id.clone(), weight))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(GroundSpace::new(points, self.blocks.clone())?))
    }

    pub fn partition_names(&self) -> impl Iterator<Item = &str> {
        self.partitions.keys().map(String::as_str)
    }

    pub fn partition(
        &self,
        space: &Arc<GroundSpace>,
        name: &str,
        require_block_refinement: bool,
    ) -> Result<Partition> {
        let cells = self
            .partitions
            .get(name)
            .ok_or_else(|| Error::UnknownPartition {
                name: name.to_owned(),
            })?;
        Partition::new(space, cells.clone(), require_block_refinement)
    }

    pub fn function_names(&self) -> impl Iterator<Item = &str> {
        self.functions.keys().map(String::as_str)
    }

    /// A named function must give exactly one value per point.
    pub fn function(&self, space: &Arc<GroundSpace>, name: &str) -> Result<LatticeFunction> {
        let table = self
            .functions
            .get(name)
            .ok_or_else(|| Error::UnknownFunction {
                name: name.to_owned(),
            })?;
        for id in table.keys() {
            if space.index_of(id).is_none() {
                return Err(Error::UnknownPointId {
                    id: id.clone(),
                    context: format!("functions[{name:?}]"),
                });
            }
        }
        let values = space
            .ids()
            .iter()
            .map(|id| {
                let text = table.get(id).ok_or_else(|| Error::InvalidFunction {
                    name: name.to_owned(),
                    detail: format!("missing value for point {id:?}"),
                })?;
                parse_rat(text, &format!("functions[{name:?}][{id:?}]"))
            })
            .collect::<Result<Vec<_>>>()?;
        LatticeFunction::new(space, values)
    }

    /// Snapshot a space with named partitions and functions.
    pub fn from_parts(
        space: &GroundSpace,
        partitions: &[(&str, &Partition)],
        functions: &[(&str, &LatticeFunction)],
    ) -> SpaceDoc {
        let points = space
            .ids()
            .iter()
            .enumerate()
            .map(|(p, id)| PointDoc {
                id: id.clone(),
                weight: space.weight(p).to_string(),
            })
            .collect();
        let blocks = space
            .blocks()
            .iter()
            .map(|members| members.iter().map(|&p| space.id(p).to_owned()).collect())
            .collect();
        let partitions = partitions
            .iter()
            .map(|(name, partition)| {
                let cells = (0..partition.cell_count())
                    .map(|c| partition.cell_ids(c))
                    .collect();
                (name.to_string(), cells)
            })
            .collect();
        let functions = functions
            .iter()
            .map(|(name, f)| {
                let table = space
                    .ids()
                    .iter()
                    .enumerate()
                    .map(|(p, id)| (id.clone(), f.value(p).to_string()))
                    .collect();
                (name.to_string(), table)
            })
            .collect();
        SpaceDoc {
            points,
            blocks,
            partitions,
            functions,
        }
    }

    /// Compact single-line JSON, used for instance digests.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("doc serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rat::rat;

    #[test]
    fn round_trips_a_fixture() {
        let space = fixtures::two_blocks();
        let split = fixtures::two_blocks_split(&space);
        let f = LatticeFunction::constant(&space, rat(2, 3));
        let doc = SpaceDoc::from_parts(&space, &[("CD", &split)], &[("f", &f)]);

        let rebuilt_space = doc.build_space().unwrap();
        assert_eq!(*rebuilt_space, *space);
        let rebuilt_split = doc.partition(&rebuilt_space, "CD", true).unwrap();
        assert_eq!(rebuilt_split.cells(), split.cells());
        let rebuilt_f = doc.function(&rebuilt_space, "f").unwrap();
        assert_eq!(rebuilt_f.values(), f.values());

        // second serialization pass is stable
        let doc2 = SpaceDoc::from_parts(&rebuilt_space, &[("CD", &rebuilt_split)], &[("f", &rebuilt_f)]);
        assert_eq!(doc.canonical_json(), doc2.canonical_json());
    }

    #[test]
    fn names_the_broken_field() {
        let doc = SpaceDoc {
            points: vec![PointDoc {
                id: "a".into(),
                weight: "1/0".into(),
            }],
            blocks: vec![vec!["a".into()]],
            partitions: BTreeMap::new(),
            functions: BTreeMap::new(),
        };
        match doc.build_space().unwrap_err() {
            Error::InvalidRational { context, .. } => assert_eq!(context, "points[0].weight"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_names_are_rejected() {
        let space = fixtures::uniform4();
        let doc = SpaceDoc::from_parts(&space, &[], &[]);
        assert!(matches!(
            doc.partition(&space, "nope", false).unwrap_err(),
            Error::UnknownPartition { .. }
        ));
        assert!(matches!(
            doc.function(&space, "nope").unwrap_err(),
            Error::UnknownFunction { .. }
        ));
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = r#"{"points": [], "blocks": [], "extra": 1}"#;
        assert!(serde_json::from_str::<SpaceDoc>(text).is_err());
    }
}
