//! Discovery of the navigation chains a postcondition needs captured at
//! method entry.
//!
//! An `@pre` marker anywhere on a navigation spine makes the whole maximal
//! chain an entry-time value: in `self.v@pre.size()` the size is taken
//! before the call, not just the reference to `v`.

use crate::ast::Expr;

#[derive(Debug, Clone, PartialEq)]
pub struct PreChain {
    pub slot: usize,
    pub expr: Expr,
}

/// Returns the capture chains of `post` in left-to-right order. Structurally
/// equal chains share one slot.
pub fn extract_pre_chains(post: &Expr) -> Vec<PreChain> {
    let mut chains = Vec::new();
    collect(post, &mut chains);
    chains
}

fn collect(e: &Expr, chains: &mut Vec<PreChain>) {
    if e.spine_has_at_pre() {
        if slot_of(chains, e).is_none() {
            chains.push(PreChain {
                slot: chains.len(),
                expr: e.clone(),
            });
        }
        return;
    }
    for child in e.children() {
        collect(child, chains);
    }
}

/// Slot holding the entry-time value of `chain`, if it was extracted.
pub fn slot_of(chains: &[PreChain], chain: &Expr) -> Option<usize> {
    chains.iter().find(|c| c.expr == *chain).map(|c| c.slot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::format_expr;
    use crate::parser::parse_expression;

    fn chains(src: &str) -> Vec<String> {
        extract_pre_chains(&parse_expression(src).unwrap())
            .iter()
            .map(|c| format_expr(&c.expr))
            .collect()
    }

    #[test]
    fn size_growth_captures_whole_chain() {
        assert_eq!(chains("size() = v@pre.size() + 1"), vec!["v@pre.size()"]);
    }

    #[test]
    fn unchanged_sequence() {
        assert_eq!(chains("self.v = self.v@pre"), vec!["self.v@pre"]);
    }

    #[test]
    fn no_markers() {
        assert!(chains("result = 0").is_empty());
    }

    #[test]
    fn duplicates_share_a_slot_and_order_is_left_to_right() {
        let e = parse_expression("a@pre + b@pre.size() = a@pre * 2").unwrap();
        let cs = extract_pre_chains(&e);
        assert_eq!(cs.len(), 2);
        assert_eq!(format_expr(&cs[0].expr), "a@pre");
        assert_eq!(cs[1].slot, 1);
    }

    #[test]
    fn markers_inside_arguments_form_their_own_chain() {
        assert_eq!(chains("self.v.get(n@pre) = 0"), vec!["n@pre"]);
        assert_eq!(
            chains("self.v@pre.get(n@pre) = 0"),
            vec!["self.v@pre.get(n@pre)"]
        );
    }

    #[test]
    fn collection_ops_extend_the_chain() {
        assert_eq!(
            chains("self.v@pre->size() + 1 = self.v->size()"),
            vec!["self.v@pre->size()"]
        );
    }
}
