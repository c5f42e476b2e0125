//! Constraint lookup table keyed by declared context, and the per-method
//! combination of inherited clauses.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use mdwp::{ClassMirror, LinkError};
use ocl::{extract_pre_chains, Clause, ClauseKind, ConstraintFile, PreChain};

use crate::target::Target;

/// A clause together with what evaluating it needs from its declaration.
#[derive(Debug, Clone, PartialEq)]
pub struct TableClause {
    /// Class or interface named in the context.
    pub declaring: String,
    pub clause: Clause,
    /// Parameter names from the context head, bound positionally.
    pub params: Vec<String>,
    /// `@pre` chains (posts only).
    pub chains: Vec<PreChain>,
}

#[derive(Debug, Clone, Default)]
pub struct MethodClauses {
    pub pre: Vec<Arc<TableClause>>,
    pub post: Vec<Arc<TableClause>>,
}

/// Pre clauses contributed by one declaring type.
#[derive(Debug, Clone, PartialEq)]
pub struct PreGroup {
    pub declaring: String,
    pub clauses: Vec<Arc<TableClause>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EffectiveConstraints {
    /// All AND-ed, root-most class first, then interfaces.
    pub invariants: Vec<Arc<TableClause>>,
    /// OR-ed across groups, AND-ed within one.
    pub pre_groups: Vec<PreGroup>,
    /// All AND-ed.
    pub posts: Vec<Arc<TableClause>>,
}

impl EffectiveConstraints {
    pub fn is_empty(&self) -> bool {
        self.invariants.is_empty() && self.pre_groups.is_empty() && self.posts.is_empty()
    }
}

#[derive(Debug, Default)]
pub struct ConstraintTable {
    pub class_invariants: HashMap<String, Vec<Arc<TableClause>>>,
    pub method_clauses: HashMap<(String, String), MethodClauses>,
    /// Every class and interface in the VM catalog.
    pub class_graph: HashMap<String, ClassMirror>,
    memo: HashMap<(String, String), Arc<EffectiveConstraints>>,
}

/// Indexes the file against the VM's catalog. Contexts that name unknown
/// classes or methods, or disagree on parameter count, are reported and left
/// out. Repeated contexts merge in source order.
pub fn build_constraint_table(
    file: &ConstraintFile,
    target: &mut dyn Target,
) -> Result<(ConstraintTable, Vec<String>), LinkError> {
    let mut graph = HashMap::new();
    for name in target.list_classes()? {
        let c = target.class(&name)?;
        graph.insert(name, c);
    }
    Ok(build_with_catalog(file, graph))
}

/// Same as [`build_constraint_table`] over an already fetched catalog.
pub fn build_with_catalog(
    file: &ConstraintFile,
    graph: HashMap<String, ClassMirror>,
) -> (ConstraintTable, Vec<String>) {
    let mut table = ConstraintTable {
        class_graph: graph,
        ..Default::default()
    };
    let mut warnings = Vec::new();
    for decl in &file.decls {
        let Some(class) = table.class_graph.get(&decl.class_name) else {
            warnings.push(format!(
                "{}: unknown context class {}",
                decl.span, decl.class_name
            ));
            continue;
        };
        if let Some(sig) = &decl.method {
            let Some(m) = class.method(&sig.name) else {
                warnings.push(format!("{}: unknown method {}", decl.span, decl.key()));
                continue;
            };
            if m.params.len() != sig.params.len() {
                warnings.push(format!(
                    "{}: {} declares {} parameters but the method takes {}",
                    decl.span,
                    decl.key(),
                    sig.params.len(),
                    m.params.len()
                ));
                continue;
            }
        }
        let params: Vec<String> = decl.param_names().map(String::from).collect();
        for clause in &decl.clauses {
            let chains = match clause.kind {
                ClauseKind::Post => extract_pre_chains(&clause.expr),
                _ => Vec::new(),
            };
            let entry = Arc::new(TableClause {
                declaring: decl.class_name.clone(),
                clause: clause.clone(),
                params: params.clone(),
                chains,
            });
            match (&decl.method, clause.kind) {
                (None, _) => table
                    .class_invariants
                    .entry(decl.class_name.clone())
                    .or_default()
                    .push(entry),
                (Some(sig), kind) => {
                    let slot = table
                        .method_clauses
                        .entry((decl.class_name.clone(), sig.name.clone()))
                        .or_default();
                    match kind {
                        ClauseKind::Pre => slot.pre.push(entry),
                        ClauseKind::Post => slot.post.push(entry),
                        // Validation keeps invariants out of method contexts.
                        ClauseKind::Inv => {}
                    }
                }
            }
        }
    }
    (table, warnings)
}

impl ConstraintTable {
    /// Types whose clauses apply to instances of `class`: its ancestors from
    /// the root down, then every interface reachable from them.
    pub fn declaring_types(&self, class: &str) -> Vec<String> {
        let mut chain = Vec::new();
        let mut cur = Some(class.to_string());
        while let Some(name) = cur {
            if chain.contains(&name) {
                break;
            }
            cur = self.class_graph.get(&name).and_then(|c| c.base.clone());
            chain.push(name);
        }
        chain.reverse();
        let mut out = chain.clone();
        for c in &chain {
            let direct = self
                .class_graph
                .get(c)
                .map(|m| m.interfaces.clone())
                .unwrap_or_default();
            for i in direct {
                self.push_interface(&i, &mut out);
            }
        }
        out
    }

    fn push_interface(&self, name: &str, out: &mut Vec<String>) {
        if out.iter().any(|n| n == name) {
            return;
        }
        out.push(name.to_string());
        if let Some(m) = self.class_graph.get(name) {
            for parent in &m.interfaces {
                self.push_interface(parent, out);
            }
        }
    }

    /// Combined clauses for `method` on instances of `class`, memoized.
    pub fn effective_constraints(
        &mut self,
        class: &str,
        method: &str,
    ) -> Arc<EffectiveConstraints> {
        let key = (class.to_string(), method.to_string());
        if let Some(e) = self.memo.get(&key) {
            return e.clone();
        }
        let e = Arc::new(self.compute_effective(class, method));
        self.memo.insert(key, e.clone());
        e
    }

    pub fn compute_effective(&self, class: &str, method: &str) -> EffectiveConstraints {
        let mut out = EffectiveConstraints::default();
        for t in self.declaring_types(class) {
            if let Some(invs) = self.class_invariants.get(&t) {
                out.invariants.extend(invs.iter().cloned());
            }
            if let Some(mc) = self.method_clauses.get(&(t.clone(), method.to_string())) {
                if !mc.pre.is_empty() {
                    out.pre_groups.push(PreGroup {
                        declaring: t.clone(),
                        clauses: mc.pre.clone(),
                    });
                }
                out.posts.extend(mc.post.iter().cloned());
            }
        }
        out
    }

    fn has_clauses(&self, t: &str) -> bool {
        self.class_invariants.contains_key(t) || self.method_clauses.keys().any(|(c, _)| c == t)
    }

    /// Concrete classes with any applicable clause: the event policy.
    pub fn constrained_classes(&self) -> Vec<String> {
        let set: BTreeSet<String> = self
            .class_graph
            .values()
            .filter(|c| !c.is_interface)
            .filter(|c| {
                self.declaring_types(&c.name)
                    .iter()
                    .any(|t| self.has_clauses(t))
            })
            .map(|c| c.name.clone())
            .collect();
        set.into_iter().collect()
    }

    pub fn invariant_count(&self) -> usize {
        self.class_invariants.values().map(Vec::len).sum()
    }

    /// Distinct (class, method) contexts carrying pre or post clauses.
    pub fn method_count(&self) -> usize {
        self.method_clauses.len()
    }
}
