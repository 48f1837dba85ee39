//! Multi-hot encoding of an atomic task over the catalog's atoms.
//!
//! Layout: four blocks of `K + 1` slots (cond-positive, cond-negative,
//! goal-positive, goal-negative; slot `K` is `end`) followed by one flag
//! set when the condition is `true` and the goal is not.

use sattl::{AtomicTask, Literal, Sign};
use thiserror::Error;

use gridworld::ObjectCatalog;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("atom {0:?} is not in the catalog")]
pub struct UnknownAtom(pub String);

pub fn instr_width(catalog: &ObjectCatalog) -> usize {
    4 * (catalog.len() + 1) + 1
}

/// Sorted indices of the ones.
pub fn encode_instruction(catalog: &ObjectCatalog, task: &AtomicTask) -> Result<Vec<u32>, UnknownAtom> {
    let block = catalog.len() + 1;
    let mut out = Vec::new();
    let mut put = |lit: &Literal, base: usize| -> Result<(), UnknownAtom> {
        for e in lit.entries() {
            let slot = if e.atom.is_end() {
                catalog.len()
            } else {
                catalog.id_of(&e.atom).ok_or_else(|| UnknownAtom(e.atom.to_string()))?.index()
            };
            let b = base + if e.sign == Sign::Negative { block } else { 0 };
            out.push((b + slot) as u32);
        }
        Ok(())
    };
    put(&task.cond, 0)?;
    put(&task.goal, 2 * block)?;
    if task.cond.is_true() && !task.goal.is_true() {
        out.push((4 * block) as u32);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gridworld::{build_catalog, Mode};
    use sattl::parse_task;

    #[test]
    fn blocks_and_flag() {
        let c = build_catalog(1, Mode::Minecraft);
        let k = c.len() as u32;
        let v = encode_instruction(&c, &parse_task("- obj3 U (+ obj5 | + end)").unwrap()).unwrap();
        assert_eq!(v, vec![(k + 1) + 3, 2 * (k + 1) + 5, 2 * (k + 1) + k]);
        let v = encode_instruction(&c, &parse_task("true U + obj0").unwrap()).unwrap();
        assert_eq!(v, vec![2 * (k + 1), 4 * (k + 1)]);
        assert_eq!(instr_width(&c), 4 * (c.len() + 1) + 1);
    }

    #[test]
    fn only_true_until_true_is_zero() {
        let c = build_catalog(1, Mode::MiniGrid);
        assert!(encode_instruction(&c, &parse_task("true U true").unwrap()).unwrap().is_empty());
        assert!(!encode_instruction(&c, &parse_task("+ red_key U true").unwrap()).unwrap().is_empty());
    }

    #[test]
    fn unknown_atom() {
        let c = build_catalog(1, Mode::MiniGrid);
        assert_eq!(
            encode_instruction(&c, &parse_task("true U + axe").unwrap()),
            Err(UnknownAtom("axe".into()))
        );
    }
}
