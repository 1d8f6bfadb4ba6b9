//! JSON ingestion and emission of operator tuples.
//!
//! ```json
//! {"blocks": [{"weight": 0.5, "dim": 2, "operators": [[[[0,0],[1,0]], [[1,0],[0,0]]]]}]}
//! ```
//! Each matrix is a `dim × dim` array of `[re, im]` pairs; every block
//! lists the same number of operators in the same order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Block, CMatrix, FiniteAlgebra, HermitianOperator, OperatorTuple};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TupleFile {
    pub blocks: Vec<BlockFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BlockFile {
    pub weight: f64,
    pub dim: usize,
    pub operators: Vec<Vec<Vec<[f64; 2]>>>,
}

impl TupleFile {
    pub fn into_tuple(self) -> Result<OperatorTuple> {
        if self.blocks.is_empty() {
            return Err(Error::InvalidAlgebra("no blocks".into()));
        }
        let n = self.blocks[0].operators.len();
        let mut algebra_blocks = Vec::with_capacity(self.blocks.len());
        let mut per_op: Vec<Vec<CMatrix>> = vec![Vec::new(); n];
        for (j, b) in self.blocks.iter().enumerate() {
            if b.operators.len() != n {
                return Err(Error::Parse(format!(
                    "blocks[{j}].operators has {} entries, blocks[0] has {n}",
                    b.operators.len()
                )));
            }
            algebra_blocks.push(Block { dim: b.dim, weight: b.weight });
            for (i, m) in b.operators.iter().enumerate() {
                per_op[i].push(matrix(m, b.dim, j, i)?);
            }
        }
        let algebra = FiniteAlgebra::new(algebra_blocks)?;
        let operators = per_op
            .into_iter()
            .enumerate()
            .map(|(i, blocks)| {
                HermitianOperator::new(blocks).map_err(|e| match e {
                    Error::NotHermitian { block, deviation, .. } => Error::NotHermitian {
                        operator: i,
                        block,
                        deviation,
                    },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        OperatorTuple::new(algebra, operators)
    }

    pub fn from_tuple(tuple: &OperatorTuple) -> Self {
        let blocks = tuple
            .algebra()
            .blocks()
            .iter()
            .enumerate()
            .map(|(j, b)| BlockFile {
                weight: b.weight,
                dim: b.dim,
                operators: tuple
                    .operators()
                    .iter()
                    .map(|op| {
                        let m = &op.blocks()[j];
                        (0..b.dim)
                            .map(|r| (0..b.dim).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        TupleFile { blocks }
    }
}

fn matrix(rows: &[Vec<[f64; 2]>], dim: usize, block: usize, op: usize) -> Result<CMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Parse(format!(
            "blocks[{block}].operators[{op}] is not a {dim}x{dim} matrix"
        )));
    }
    if rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Parse(format!("blocks[{block}].operators[{op}] has a non-finite entry")));
    }
    Ok(CMatrix::from_fn(dim, dim, |r, c| Complex64::new(rows[r][c][0], rows[r][c][1])))
}

/// Parses a tuple; syntax and schema errors carry line and column.
pub fn parse_tuple(text: &str) -> Result<OperatorTuple> {
    let file: TupleFile = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    file.into_tuple()
}

/// Shortest round-trip representation of every number.
pub fn tuple_to_json(tuple: &OperatorTuple) -> String {
    let mut s = serde_json::to_string_pretty(&TupleFile::from_tuple(tuple)).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn round_trip_fixtures() {
        for name in fixtures::NAMES {
            let t = fixtures::by_name(name).unwrap();
            let text = tuple_to_json(&t);
            let back = parse_tuple(&text).unwrap();
            assert_eq!(back, t, "{name}");
            assert_eq!(tuple_to_json(&back), text);
        }
    }

    #[test]
    fn pauli_literal() {
        let text = r#"{"blocks":[{"weight":0.5,"dim":2,"operators":[
            [[[0,0],[1,0]],[[1,0],[0,0]]],
            [[[1,0],[0,0]],[[0,0],[-1,0]]]]}]}"#;
        assert_eq!(parse_tuple(text).unwrap(), fixtures::pauli());
    }

    #[test]
    fn unknown_field_is_rejected_with_position() {
        let text = "{\"blocks\": [],\n \"extra\": 1}";
        match parse_tuple(text) {
            Err(Error::Parse(msg)) => assert!(msg.starts_with("line 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_shape_and_counts() {
        let bad_dim = r#"{"blocks":[{"weight":1,"dim":2,"operators":[[[[0,0]]]]}]}"#;
        assert!(matches!(parse_tuple(bad_dim), Err(Error::Parse(_))));
        let bad_n = r#"{"blocks":[{"weight":0.5,"dim":1,"operators":[[[[0,0]]]]},
                                  {"weight":0.5,"dim":1,"operators":[]}]}"#;
        assert!(matches!(parse_tuple(bad_n), Err(Error::Parse(_))));
        let bad_weight = r#"{"blocks":[{"weight":0.3,"dim":1,"operators":[[[[0,0]]]]}]}"#;
        assert!(matches!(parse_tuple(bad_weight), Err(Error::InvalidAlgebra(_))));
    }

    #[test]
    fn non_hermitian_names_the_operator() {
        let text = r#"{"blocks":[{"weight":0.5,"dim":2,"operators":[
            [[[0,0],[1,0]],[[1,0],[0,0]]],
            [[[0,0],[1,0]],[[0,0],[0,0]]]]}]}"#;
        match parse_tuple(text) {
            Err(Error::NotHermitian { operator, block, .. }) => assert_eq!((operator, block), (1, 0)),
            other => panic!("{other:?}"),
        }
    }
}
