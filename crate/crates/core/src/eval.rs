//! Mirror-backed evaluation of constraint expressions with dynamic type
//! checks.

use mdwp::{ErrorCode as WireCode, LinkError, ObjectMirror, ValueMirror};
use ocl::{slot_of, BinaryOp, CollectionOp, Expr, ExprKind, PreChain, UnaryOp};

use crate::target::Target;
use crate::verdict::{ErrorCode, Verdict};

/// An evaluation that could not produce a value.
#[derive(Debug)]
pub enum Fault {
    /// The constraint is broken or undefined here; becomes an ERROR record.
    Eval { code: ErrorCode, detail: String },
    /// The session failed; the audit cannot go on.
    Link(LinkError),
}

impl Fault {
    fn new(code: ErrorCode, detail: impl Into<String>) -> Self {
        Fault::Eval {
            code,
            detail: detail.into(),
        }
    }
}

fn mismatch(detail: impl Into<String>) -> Fault {
    Fault::new(ErrorCode::TypeMismatch, detail)
}

/// Maps VM refusals onto evaluation errors; anything that points at a broken
/// session stays a link failure.
impl From<LinkError> for Fault {
    fn from(e: LinkError) -> Self {
        let code = match e.code() {
            Some(WireCode::Purity) => ErrorCode::PurityViolation,
            Some(WireCode::TargetException) => ErrorCode::TargetException,
            Some(
                WireCode::UnknownField
                | WireCode::UnknownMethod
                | WireCode::UnknownClass
                | WireCode::UnknownObject,
            ) => ErrorCode::UnknownIdentifier,
            Some(WireCode::Arity) => ErrorCode::TypeMismatch,
            _ => return Fault::Link(e),
        };
        let detail = match e {
            LinkError::Remote { msg, .. } => msg,
            other => other.to_string(),
        };
        Fault::Eval { code, detail }
    }
}

pub type EvalResult<T> = Result<T, Fault>;

/// A value captured at method entry for one `@pre` chain, or the reason the
/// capture failed.
pub type Captured = Result<ValueMirror, String>;

/// How `@pre` is treated during an evaluation.
#[derive(Debug, Clone, Copy)]
pub enum AtPre<'a> {
    /// Not allowed (invariants and preconditions).
    Forbidden,
    /// Marker is transparent: used when computing captures at entry.
    Live,
    /// Chains are read from values captured at entry, indexed by slot.
    Captured {
        chains: &'a [PreChain],
        values: &'a [Captured],
    },
}

#[derive(Debug, Clone)]
pub struct EvalEnv<'a> {
    pub self_value: Option<ValueMirror>,
    pub params: Vec<(String, ValueMirror)>,
    pub result: Option<ValueMirror>,
    pub at_pre: AtPre<'a>,
}

impl EvalEnv<'_> {
    pub fn new(self_value: Option<ValueMirror>) -> Self {
        EvalEnv {
            self_value,
            params: Vec::new(),
            result: None,
            at_pre: AtPre::Forbidden,
        }
    }
}

/// Evaluates `e` to a value.
pub fn evaluate(target: &mut dyn Target, env: &EvalEnv<'_>, e: &Expr) -> EvalResult<ValueMirror> {
    Evaluator {
        target,
        env,
        binders: Vec::new(),
    }
    .eval(e)
}

/// Evaluates a clause body, which must produce a Boolean.
pub fn evaluate_clause(target: &mut dyn Target, env: &EvalEnv<'_>, e: &Expr) -> EvalResult<bool> {
    match evaluate(target, env, e)? {
        ValueMirror::Bool(b) => Ok(b),
        other => Err(mismatch(format!(
            "constraint evaluates to {}, not Boolean",
            other.type_name()
        ))),
    }
}

/// Evaluates a clause and turns the outcome into a verdict. Link failures
/// are passed through.
pub fn judge(target: &mut dyn Target, env: &EvalEnv<'_>, e: &Expr) -> Result<Verdict, LinkError> {
    match evaluate_clause(target, env, e) {
        Ok(b) => Ok(Verdict::from_bool(b)),
        Err(Fault::Eval { code, detail }) => Ok(Verdict::error(code, detail)),
        Err(Fault::Link(e)) => Err(e),
    }
}

/// Evaluates an `@pre` chain at method entry. Sequences are copied so later
/// mutation does not show through.
pub fn capture(
    target: &mut dyn Target,
    env: &EvalEnv<'_>,
    chain: &Expr,
) -> Result<Captured, LinkError> {
    let live = EvalEnv {
        at_pre: AtPre::Live,
        ..env.clone()
    };
    let mut ev = Evaluator {
        target,
        env: &live,
        binders: Vec::new(),
    };
    let r = ev.eval(chain).and_then(|v| match v {
        ValueMirror::Seq(s) => Ok(ValueMirror::Snapshot(ev.target.seq_snapshot(&s)?)),
        other => Ok(other),
    });
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(Fault::Eval { code, detail }) => Ok(Err(format!("{code}: {detail}"))),
        Err(Fault::Link(e)) => Err(e),
    }
}

struct Evaluator<'t, 'e> {
    target: &'t mut dyn Target,
    env: &'e EvalEnv<'e>,
    /// Quantifier variables, innermost last.
    binders: Vec<(String, ValueMirror)>,
}

impl Evaluator<'_, '_> {
    fn eval(&mut self, e: &Expr) -> EvalResult<ValueMirror> {
        if let AtPre::Captured { chains, values } = self.env.at_pre {
            if e.spine_has_at_pre() {
                return match slot_of(chains, e).and_then(|s| values.get(s)) {
                    Some(Ok(v)) => Ok(v.clone()),
                    Some(Err(why)) => Err(Fault::new(
                        ErrorCode::CaptureMissing,
                        format!("entry capture of {e} failed: {why}"),
                    )),
                    None => Err(Fault::new(
                        ErrorCode::CaptureMissing,
                        format!("no entry value for {e}"),
                    )),
                };
            }
        }
        match &e.kind {
            ExprKind::Int(i) => Ok(ValueMirror::Int(*i)),
            ExprKind::Real(r) => Ok(ValueMirror::Real(*r)),
            ExprKind::Str(s) => Ok(ValueMirror::Str(s.clone())),
            ExprKind::Bool(b) => Ok(ValueMirror::Bool(*b)),
            ExprKind::SelfRef => self.self_value(),
            ExprKind::ResultRef => self.env.result.clone().ok_or_else(|| {
                Fault::new(ErrorCode::UnknownIdentifier, "result is only bound at exit")
            }),
            ExprKind::Ident(name) => self.lookup(name),
            ExprKind::Call {
                receiver,
                method,
                args,
            } => {
                let recv = match receiver {
                    Some(r) => self.eval(r)?,
                    None => self.self_value()?,
                };
                let args = args
                    .iter()
                    .map(|a| self.eval(a))
                    .collect::<EvalResult<Vec<_>>>()?;
                self.call(recv, method, args)
            }
            ExprKind::Field { receiver, field } => match self.eval(receiver)? {
                ValueMirror::Ref(obj) => Ok(self.target.get_field(&obj, field)?),
                other => Err(mismatch(format!(
                    "field {field} read from {}",
                    other.type_name()
                ))),
            },
            ExprKind::AtPre(inner) => match self.env.at_pre {
                AtPre::Live => self.eval(inner),
                AtPre::Forbidden => Err(Fault::new(
                    ErrorCode::CaptureMissing,
                    "@pre is only available in postconditions",
                )),
                AtPre::Captured { .. } => Err(Fault::new(
                    ErrorCode::CaptureMissing,
                    format!("no entry value for {e}"),
                )),
            },
            ExprKind::Unary { op, operand } => {
                let v = self.eval(operand)?;
                match (op, v) {
                    (UnaryOp::Not, ValueMirror::Bool(b)) => Ok(ValueMirror::Bool(!b)),
                    (UnaryOp::Negate, ValueMirror::Int(i)) => i
                        .checked_neg()
                        .map(ValueMirror::Int)
                        .ok_or_else(|| mismatch("integer overflow")),
                    (UnaryOp::Negate, ValueMirror::Real(r)) => Ok(ValueMirror::Real(-r)),
                    (UnaryOp::Not, v) => Err(mismatch(format!("not applied to {}", v.type_name()))),
                    (UnaryOp::Negate, v) => Err(mismatch(format!("negation of {}", v.type_name()))),
                }
            }
            ExprKind::Binary { op, left, right } => self.binary(*op, left, right),
            ExprKind::Collection {
                receiver,
                op,
                binder,
                args,
            } => {
                let recv = self.eval(receiver)?;
                let items = self.elements(&recv, op.name())?;
                self.collection(*op, items, binder.as_deref(), args)
            }
        }
    }

    fn self_value(&self) -> EvalResult<ValueMirror> {
        self.env
            .self_value
            .clone()
            .ok_or_else(|| Fault::new(ErrorCode::UnknownIdentifier, "self is not bound"))
    }

    fn lookup(&self, name: &str) -> EvalResult<ValueMirror> {
        self.binders
            .iter()
            .rev()
            .chain(self.env.params.iter())
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Fault::new(ErrorCode::UnknownIdentifier, format!("unknown name {name}")))
    }

    fn call(
        &mut self,
        recv: ValueMirror,
        method: &str,
        args: Vec<ValueMirror>,
    ) -> EvalResult<ValueMirror> {
        match recv {
            ValueMirror::Ref(obj) => self.invoke(&obj, method, args),
            ValueMirror::Seq(_) | ValueMirror::Snapshot(_) => {
                let items = self.elements(&recv, method)?;
                seq_method(&items, method, &args)
            }
            other => Err(mismatch(format!(
                "method {method} called on {}",
                other.type_name()
            ))),
        }
    }

    fn invoke(
        &mut self,
        obj: &ObjectMirror,
        name: &str,
        args: Vec<ValueMirror>,
    ) -> EvalResult<ValueMirror> {
        let class = self.target.class(&obj.class)?;
        let Some(m) = class.method(name) else {
            return Err(Fault::new(
                ErrorCode::UnknownIdentifier,
                format!("{} has no method {name}", obj.class),
            ));
        };
        if !m.pure {
            return Err(Fault::new(
                ErrorCode::PurityViolation,
                format!("{}::{name} is not pure", m.declaring),
            ));
        }
        if m.params.len() != args.len() {
            return Err(mismatch(format!(
                "{name} takes {} arguments, got {}",
                m.params.len(),
                args.len()
            )));
        }
        if args.iter().any(|a| matches!(a, ValueMirror::Snapshot(_))) {
            return Err(mismatch(format!(
                "an entry-time sequence copy cannot be passed to {name}"
            )));
        }
        Ok(self.target.invoke_pure(obj, m, &args)?)
    }

    /// Elements of a sequence value, fetched from the VM if live.
    fn elements(&mut self, v: &ValueMirror, what: &str) -> EvalResult<Vec<ValueMirror>> {
        match v {
            ValueMirror::Seq(s) => Ok(self.target.seq_snapshot(s)?),
            ValueMirror::Snapshot(items) => Ok(items.clone()),
            other => Err(mismatch(format!(
                "{what} needs a Sequence, got {}",
                other.type_name()
            ))),
        }
    }

    fn bool_of(&mut self, e: &Expr, op: BinaryOp) -> EvalResult<bool> {
        match self.eval(e)? {
            ValueMirror::Bool(b) => Ok(b),
            other => Err(mismatch(format!(
                "{} operand is {}, not Boolean",
                op.symbol(),
                other.type_name()
            ))),
        }
    }

    fn binary(&mut self, op: BinaryOp, left: &Expr, right: &Expr) -> EvalResult<ValueMirror> {
        let b = ValueMirror::Bool;
        match op {
            BinaryOp::And => Ok(b(self.bool_of(left, op)? && self.bool_of(right, op)?)),
            BinaryOp::Or => Ok(b(self.bool_of(left, op)? || self.bool_of(right, op)?)),
            BinaryOp::Implies => Ok(b(!self.bool_of(left, op)? || self.bool_of(right, op)?)),
            BinaryOp::Xor => {
                let l = self.bool_of(left, op)?;
                Ok(b(l != self.bool_of(right, op)?))
            }
            _ => {
                let l = self.eval(left)?;
                let r = self.eval(right)?;
                match op {
                    BinaryOp::Eq => Ok(b(self.equal(&l, &r)?)),
                    BinaryOp::Ne => Ok(b(!self.equal(&l, &r)?)),
                    BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                        compare(op, &l, &r).map(b)
                    }
                    _ => arithmetic(op, &l, &r),
                }
            }
        }
    }

    /// `=` semantics: numbers across Int/Real, values for Bool and String,
    /// identity for objects, element-wise for sequences. Null equals only
    /// null.
    fn equal(&mut self, l: &ValueMirror, r: &ValueMirror) -> EvalResult<bool> {
        use ValueMirror as V;
        Ok(match (l, r) {
            (V::Null, other) | (other, V::Null) => matches!(other, V::Null),
            (V::Int(a), V::Int(b)) => a == b,
            (V::Int(_) | V::Real(_), V::Int(_) | V::Real(_)) => as_real(l) == as_real(r),
            (V::Bool(a), V::Bool(b)) => a == b,
            (V::Str(a), V::Str(b)) => a == b,
            (V::Ref(a), V::Ref(b)) => a.id == b.id,
            (V::Seq(a), V::Seq(b)) if a.id == b.id => true,
            (V::Seq(_) | V::Snapshot(_), V::Seq(_) | V::Snapshot(_)) => {
                let a = self.elements(l, "=")?;
                let b = self.elements(r, "=")?;
                if a.len() != b.len() {
                    return Ok(false);
                }
                for (x, y) in a.iter().zip(&b) {
                    if !self.equal(x, y)? {
                        return Ok(false);
                    }
                }
                true
            }
            _ => {
                return Err(mismatch(format!(
                    "cannot compare {} with {}",
                    l.type_name(),
                    r.type_name()
                )))
            }
        })
    }

    fn collection(
        &mut self,
        op: CollectionOp,
        items: Vec<ValueMirror>,
        binder: Option<&str>,
        args: &[Expr],
    ) -> EvalResult<ValueMirror> {
        match op {
            CollectionOp::Size => Ok(ValueMirror::Int(items.len() as i64)),
            CollectionOp::IsEmpty => Ok(ValueMirror::Bool(items.is_empty())),
            CollectionOp::NotEmpty => Ok(ValueMirror::Bool(!items.is_empty())),
            CollectionOp::Includes => {
                let needle = self.eval(&args[0])?;
                for item in &items {
                    if self.equal(item, &needle)? {
                        return Ok(ValueMirror::Bool(true));
                    }
                }
                Ok(ValueMirror::Bool(false))
            }
            CollectionOp::At => match self.eval(&args[0])? {
                ValueMirror::Int(i) if i >= 1 && (i as usize) <= items.len() => {
                    Ok(items[i as usize - 1].clone())
                }
                ValueMirror::Int(i) => {
                    Err(mismatch(format!("index {i} outside 1..{}", items.len())))
                }
                other => Err(mismatch(format!("at index is {}", other.type_name()))),
            },
            CollectionOp::ForAll | CollectionOp::Exists => {
                let name = binder.unwrap_or_default().to_string();
                let want = op == CollectionOp::Exists;
                for item in items {
                    self.binders.push((name.clone(), item));
                    let r = self.eval(&args[0]);
                    self.binders.pop();
                    match r? {
                        ValueMirror::Bool(b) if b == want => return Ok(ValueMirror::Bool(want)),
                        ValueMirror::Bool(_) => {}
                        other => {
                            return Err(mismatch(format!(
                                "{} body is {}, not Boolean",
                                op.name(),
                                other.type_name()
                            )))
                        }
                    }
                }
                Ok(ValueMirror::Bool(!want))
            }
        }
    }
}

fn as_real(v: &ValueMirror) -> f64 {
    match v {
        ValueMirror::Int(i) => *i as f64,
        ValueMirror::Real(r) => *r,
        _ => f64::NAN,
    }
}

fn is_number(v: &ValueMirror) -> bool {
    matches!(v, ValueMirror::Int(_) | ValueMirror::Real(_))
}

fn compare(op: BinaryOp, l: &ValueMirror, r: &ValueMirror) -> EvalResult<bool> {
    let ord = match (l, r) {
        (ValueMirror::Int(a), ValueMirror::Int(b)) => a.partial_cmp(b),
        _ if is_number(l) && is_number(r) => as_real(l).partial_cmp(&as_real(r)),
        _ => {
            return Err(mismatch(format!(
                "{} between {} and {}",
                op.symbol(),
                l.type_name(),
                r.type_name()
            )))
        }
    };
    let Some(ord) = ord else {
        return Ok(false);
    };
    Ok(match op {
        BinaryOp::Lt => ord.is_lt(),
        BinaryOp::Le => ord.is_le(),
        BinaryOp::Gt => ord.is_gt(),
        _ => ord.is_ge(),
    })
}

fn arithmetic(op: BinaryOp, l: &ValueMirror, r: &ValueMirror) -> EvalResult<ValueMirror> {
    use ValueMirror as V;
    if let (BinaryOp::Add, V::Str(a), V::Str(b)) = (op, l, r) {
        return Ok(V::Str(format!("{a}{b}")));
    }
    if !is_number(l) || !is_number(r) {
        return Err(mismatch(format!(
            "{} between {} and {}",
            op.symbol(),
            l.type_name(),
            r.type_name()
        )));
    }
    if op == BinaryOp::Div {
        let d = as_real(r);
        if d == 0.0 {
            return Err(mismatch("division by zero"));
        }
        return Ok(V::Real(as_real(l) / d));
    }
    if let (V::Int(a), V::Int(b)) = (l, r) {
        let v = match op {
            BinaryOp::Add => a.checked_add(*b),
            BinaryOp::Sub => a.checked_sub(*b),
            _ => a.checked_mul(*b),
        };
        return v.map(V::Int).ok_or_else(|| mismatch("integer overflow"));
    }
    let (a, b) = (as_real(l), as_real(r));
    Ok(V::Real(match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        _ => a * b,
    }))
}

/// The target's read-only sequence methods, applied to a copy of the
/// elements. Indexing is 0-based as in the target language.
fn seq_method(
    items: &[ValueMirror],
    method: &str,
    args: &[ValueMirror],
) -> EvalResult<ValueMirror> {
    match (method, args) {
        ("size", []) => Ok(ValueMirror::Int(items.len() as i64)),
        ("last", []) => items
            .last()
            .cloned()
            .ok_or_else(|| Fault::new(ErrorCode::TargetException, "last on empty sequence")),
        ("get", [ValueMirror::Int(i)]) => usize::try_from(*i)
            .ok()
            .and_then(|i| items.get(i))
            .cloned()
            .ok_or_else(|| {
                Fault::new(
                    ErrorCode::TargetException,
                    format!(
                        "index {i} out of range for sequence of size {}",
                        items.len()
                    ),
                )
            }),
        ("size" | "last" | "get", _) => {
            Err(mismatch(format!("bad arguments to sequence {method}")))
        }
        _ => Err(Fault::new(
            ErrorCode::UnknownIdentifier,
            format!("sequences have no method {method}"),
        )),
    }
}
