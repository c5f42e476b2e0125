use ocl::*;
use proptest::prelude::*;

const CORPUS: &[&str] = &[
    "size() >= 0",
    "self.size() >= 0",
    "size() <= capacity()",
    "size() < capacity()",
    "size() = self.v@pre.size() + 1",
    "self.v.last() = obj",
    "result = self.v.last()",
    "not empty()",
    "result = self.v@pre.last()",
    "size() = self.v@pre.size() - 1",
    "self.v = self.v@pre",
    "result = (self.v.size() = 0)",
    "result = self.v.size()",
    "result = self.cap",
    "self.v->forAll(x | x >= 0) and self.v->exists(y | y = 2)",
    "self.v->includes(obj) implies self.v->notEmpty()",
    "self.v->at(1) + 2 * 3 / 4.5 - -1 <> 0",
    "'a\\'b' + 'c' = 'a\\'bc' xor false",
    "(a or b) and (c implies d)",
    "a implies b implies c",
    "size@pre() + n@pre = (1 + 2) * 3",
    "self.items@pre->isEmpty() or self.items->size() > 0",
];

#[test]
fn corpus_round_trips() {
    for src in CORPUS {
        let e = parse_expression(src).unwrap_or_else(|err| panic!("{src}: {err}"));
        let printed = format_expr(&e);
        let again = parse_expression(&printed).unwrap_or_else(|err| panic!("{printed}: {err}"));
        assert_eq!(again, e, "{src} -> {printed}");
    }
}

#[test]
fn parsing_is_deterministic() {
    for src in CORPUS {
        assert_eq!(tokenize(src).unwrap(), tokenize(src).unwrap());
        assert_eq!(
            parse_expression(src).unwrap(),
            parse_expression(src).unwrap()
        );
    }
}

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0i64..1000).prop_map(ExprKind::Int),
        (0u32..10_000).prop_map(|v| ExprKind::Real(v as f64 / 8.0)),
        "[a-z' \\\\]{0,4}".prop_map(ExprKind::Str),
        any::<bool>().prop_map(ExprKind::Bool),
        Just(ExprKind::SelfRef),
        Just(ExprKind::ResultRef),
        prop::sample::select(vec!["a", "obj", "n", "x"]).prop_map(|s| ExprKind::Ident(s.into())),
    ]
    .prop_map(Expr::synth)
}

const BINOPS: [BinaryOp; 14] = [
    BinaryOp::And,
    BinaryOp::Or,
    BinaryOp::Xor,
    BinaryOp::Implies,
    BinaryOp::Eq,
    BinaryOp::Ne,
    BinaryOp::Lt,
    BinaryOp::Le,
    BinaryOp::Gt,
    BinaryOp::Ge,
    BinaryOp::Add,
    BinaryOp::Sub,
    BinaryOp::Mul,
    BinaryOp::Div,
];

fn member() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["v", "size", "last", "cap"]).prop_map(String::from)
}

fn expr_tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 48, 3, |inner| {
        prop_oneof![
            (
                prop::sample::select(BINOPS.to_vec()),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, l, r)| Expr::synth(ExprKind::Binary {
                    op,
                    left: b(l),
                    right: b(r)
                })),
            (any::<bool>(), inner.clone()).prop_map(|(not, e)| Expr::synth(ExprKind::Unary {
                op: if not { UnaryOp::Not } else { UnaryOp::Negate },
                operand: b(e)
            })),
            (
                prop::option::of(inner.clone()),
                member(),
                prop::collection::vec(inner.clone(), 0..3)
            )
                .prop_map(|(r, m, args)| Expr::synth(ExprKind::Call {
                    receiver: r.map(b),
                    method: m,
                    args
                })),
            (inner.clone(), member()).prop_map(|(r, f)| Expr::synth(ExprKind::Field {
                receiver: b(r),
                field: f
            })),
            inner.clone().prop_map(|e| {
                let wrappable = matches!(
                    e.kind,
                    ExprKind::Ident(_) | ExprKind::Field { .. } | ExprKind::Call { .. }
                );
                if wrappable && !e.contains_at_pre() {
                    Expr::synth(ExprKind::AtPre(b(e)))
                } else {
                    e
                }
            }),
            (
                inner.clone(),
                prop::sample::select(CollectionOp::ALL.to_vec()),
                inner.clone()
            )
                .prop_map(|(r, op, arg)| {
                    let (binder, args) = match op {
                        CollectionOp::ForAll | CollectionOp::Exists => {
                            (Some("x".to_string()), vec![arg])
                        }
                        CollectionOp::Includes | CollectionOp::At => (None, vec![arg]),
                        _ => (None, vec![]),
                    };
                    Expr::synth(ExprKind::Collection {
                        receiver: b(r),
                        op,
                        binder,
                        args,
                    })
                }),
        ]
    })
}

/// Node paths (child indices from the root) of every node.
fn paths(e: &Expr) -> Vec<(Vec<usize>, &Expr)> {
    let mut out = Vec::new();
    fn go<'a>(e: &'a Expr, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Expr)>) {
        out.push((path.clone(), e));
        for (i, c) in e.children().into_iter().enumerate() {
            path.push(i);
            go(c, path, out);
            path.pop();
        }
    }
    go(e, &mut Vec::new(), &mut out);
    out
}

fn node_at<'a>(root: &'a Expr, path: &[usize]) -> &'a Expr {
    path.iter().fold(root, |e, &i| e.children()[i])
}

/// True when child index `i` of `parent` is its navigation receiver.
fn is_receiver_slot(parent: &Expr, i: usize) -> bool {
    match &parent.kind {
        ExprKind::Call { receiver, .. } => receiver.is_some() && i == 0,
        ExprKind::Field { .. } | ExprKind::AtPre(_) | ExprKind::Collection { .. } => i == 0,
        _ => false,
    }
}

/// Independent chain oracle: climb from each marker through receiver slots,
/// then keep only the outermost tops.
fn oracle_chain_paths(root: &Expr) -> Vec<Vec<usize>> {
    let mut tops: Vec<Vec<usize>> = Vec::new();
    for (path, node) in paths(root) {
        if !matches!(node.kind, ExprKind::AtPre(_)) {
            continue;
        }
        let mut top = path.clone();
        while let Some((&last, parent_path)) = top.split_last() {
            let parent = node_at(root, parent_path);
            if is_receiver_slot(parent, last) {
                top = parent_path.to_vec();
            } else {
                break;
            }
        }
        if !tops.contains(&top) {
            tops.push(top);
        }
    }
    let outer: Vec<Vec<usize>> = tops
        .iter()
        .filter(|t| !tops.iter().any(|o| o.len() < t.len() && t.starts_with(o)))
        .cloned()
        .collect();
    let mut outer = outer;
    outer.sort();
    outer
}

fn free_idents(e: &Expr, bound: &mut Vec<String>, out: &mut Vec<String>) {
    match &e.kind {
        ExprKind::Ident(n) => {
            if !bound.contains(n) {
                out.push(n.clone());
            }
        }
        ExprKind::Collection {
            receiver,
            binder,
            args,
            ..
        } => {
            free_idents(receiver, bound, out);
            if let Some(bn) = binder {
                bound.push(bn.clone());
            }
            for a in args {
                free_idents(a, bound, out);
            }
            if binder.is_some() {
                bound.pop();
            }
        }
        _ => {
            for c in e.children() {
                free_idents(c, bound, out);
            }
        }
    }
}

/// Binders in scope at `path`.
fn binders_at(root: &Expr, path: &[usize]) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..path.len() {
        let parent = node_at(root, &path[..i]);
        if let ExprKind::Collection {
            binder: Some(bn), ..
        } = &parent.kind
        {
            if path[i] > 0 {
                out.push(bn.clone());
            }
        }
    }
    out
}

fn oracle_accepts(kind: ClauseKind, method_ctx: bool, params: &[&str], e: &Expr) -> bool {
    let ctx_ok = match kind {
        ClauseKind::Inv => !method_ctx,
        _ => method_ctx,
    };
    let all = paths(e);
    let has_result = all
        .iter()
        .any(|(_, n)| matches!(n.kind, ExprKind::ResultRef));
    let has_at_pre = all
        .iter()
        .any(|(_, n)| matches!(n.kind, ExprKind::AtPre(_)));
    let mut free = Vec::new();
    free_idents(e, &mut Vec::new(), &mut free);
    let names_ok = free.iter().all(|n| params.contains(&n.as_str()));
    match kind {
        ClauseKind::Inv | ClauseKind::Pre => ctx_ok && !has_result && !has_at_pre && names_ok,
        ClauseKind::Post => {
            let chains_ok = oracle_chain_paths(e).iter().all(|p| {
                let chain = node_at(e, p);
                let outer = binders_at(e, p);
                let mut inner_free = Vec::new();
                free_idents(chain, &mut Vec::new(), &mut inner_free);
                !chain.contains_result() && !inner_free.iter().any(|n| outer.contains(n))
            });
            ctx_ok && names_ok && chains_ok
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn format_then_parse_is_identity(e in expr_tree()) {
        let printed = format_expr(&e);
        let parsed = parse_expression(&printed)
            .map_err(|err| TestCaseError::fail(format!("{printed}: {err}")))?;
        prop_assert_eq!(&parsed, &e, "printed as {}", printed);
        prop_assert_eq!(format_expr(&parsed), printed);
    }

    #[test]
    fn every_marker_lies_in_exactly_one_chain(e in expr_tree()) {
        let chains = extract_pre_chains(&e);
        let oracle = oracle_chain_paths(&e);
        let mut expected: Vec<Expr> = Vec::new();
        for p in &oracle {
            let n = node_at(&e, p).clone();
            if !expected.contains(&n) {
                expected.push(n);
            }
        }
        let got: Vec<Expr> = chains.iter().map(|c| c.expr.clone()).collect();
        prop_assert_eq!(got, expected);
        for c in &chains {
            prop_assert!(c.expr.contains_at_pre());
        }
        for (path, node) in paths(&e) {
            if matches!(node.kind, ExprKind::AtPre(_)) {
                let owners = oracle.iter().filter(|o| path.starts_with(o)).count();
                prop_assert_eq!(owners, 1);
            }
        }
        for (i, c) in chains.iter().enumerate() {
            prop_assert_eq!(c.slot, i);
        }
    }

    #[test]
    fn clause_gates_match_rules(
        e in expr_tree(),
        kind in prop::sample::select(vec![ClauseKind::Inv, ClauseKind::Pre, ClauseKind::Post]),
        method_ctx in any::<bool>(),
        with_params in any::<bool>(),
    ) {
        let params: Vec<&str> = if method_ctx && with_params { vec!["obj", "n"] } else { vec![] };
        let ctx = ContextDecl {
            class_name: "C".into(),
            method: method_ctx.then(|| MethodSig {
                name: "m".into(),
                params: params
                    .iter()
                    .map(|p| Param { name: p.to_string(), type_name: "Integer".into() })
                    .collect(),
                return_type: None,
            }),
            clauses: vec![],
            span: SourceSpan::default(),
        };
        let clause = Clause { kind, label: None, expr: e.clone(), origin: SourceSpan::default() };
        let accepted = validate_clause(&clause, &ctx).is_empty();
        prop_assert_eq!(accepted, oracle_accepts(kind, method_ctx, &params, &e));
    }
}
