//! Tree-walking interpreter.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use crate::agent::Agent;
use crate::ast::*;
use crate::error::RuntimeError;
use crate::purity::{SEQ_MUTATORS, SEQ_READERS};
use crate::value::{Heap, HeapEntry, Object, Value};

/// Activations deeper than this abort the program.
pub const MAX_DEPTH: usize = 200;

pub const MAIN_CLASS: &str = "Main";
pub const MAIN_METHOD: &str = "main";

const RUN_STACK_BYTES: usize = 256 << 20;

type RResult<T> = Result<T, RuntimeError>;

/// One activation record.
#[derive(Debug, Clone)]
pub struct Frame {
    pub frame_id: u64,
    /// Class whose body is executing (the declaring class).
    pub class: String,
    pub method: String,
    pub receiver: Option<Value>,
    pub args: Vec<Value>,
    pub caller: (String, String, u32),
    locals: HashMap<String, Value>,
}

enum Flow {
    Normal,
    Return(Value),
}

pub struct Vm {
    program: Arc<Program>,
    heap: Heap,
    out: Box<dyn Write + Send>,
    frames: Vec<Frame>,
    next_frame_id: u64,
    /// Non-zero while an agent-initiated pure invocation runs; side effects
    /// are refused as a second line of defence behind the static check.
    pure_depth: u32,
    agent: Option<Agent>,
}

impl Vm {
    pub fn new(program: Program) -> Self {
        Vm {
            program: Arc::new(program),
            heap: Heap::default(),
            out: Box::new(std::io::stdout()),
            frames: Vec::new(),
            next_frame_id: 0,
            pure_depth: 0,
            agent: None,
        }
    }

    pub fn set_output(&mut self, out: Box<dyn Write + Send>) {
        self.out = out;
    }

    pub fn attach(&mut self, agent: Agent) {
        self.agent = Some(agent);
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn heap(&self) -> &Heap {
        &self.heap
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    /// Runs `main`. With an agent attached this announces VmStart first
    /// (holding if the agent was told to suspend) and VmDeath at the end.
    /// The heap survives the run for inspection.
    pub fn run_main(&mut self) -> RResult<()> {
        // Nested calls recurse on the host stack; MAX_DEPTH frames need more
        // than a default thread provides in debug builds.
        std::thread::scope(|scope| {
            std::thread::Builder::new()
                .name("minivm-main".into())
                .stack_size(RUN_STACK_BYTES)
                .spawn_scoped(scope, || self.run_main_here())
                .expect("spawn interpreter thread")
                .join()
                .unwrap_or_else(|p| std::panic::resume_unwind(p))
        })
    }

    fn run_main_here(&mut self) -> RResult<()> {
        self.with_agent(|a, vm| a.start(vm));
        let frame_id = self.fresh_frame_id();
        self.frames.push(Frame {
            frame_id,
            class: MAIN_CLASS.into(),
            method: MAIN_METHOD.into(),
            receiver: None,
            args: Vec::new(),
            caller: (String::new(), String::new(), 0),
            locals: HashMap::new(),
        });
        let program = self.program.clone();
        let result = self.exec_block(&program.main).map(|_| ());
        self.frames.clear();
        let _ = self.out.flush();
        let (status, error) = match &result {
            Ok(()) => (0, None),
            Err(e) => (4, Some(e.to_string())),
        };
        self.with_agent(|a, vm| a.finish(vm, status, error));
        result
    }

    fn with_agent(&mut self, f: impl FnOnce(&mut Agent, &mut Vm)) {
        if let Some(mut agent) = self.agent.take() {
            f(&mut agent, self);
            if agent.is_attached() {
                self.agent = Some(agent);
            }
        }
    }

    fn fresh_frame_id(&mut self) -> u64 {
        self.next_frame_id += 1;
        self.next_frame_id
    }

    /// Calls `method` on a receiver by dynamic dispatch. With
    /// `suppress_events` no entry/exit events are produced for this call or
    /// anything it calls. Private methods are reachable (debugger privilege).
    pub fn dispatch_invoke(
        &mut self,
        receiver: &Value,
        method: &str,
        args: Vec<Value>,
        suppress_events: bool,
    ) -> RResult<Value> {
        let parked = if suppress_events {
            self.agent.take()
        } else {
            None
        };
        let r = match receiver {
            Value::Ref { id, .. } => {
                let class = self.class_of(*id, 0)?;
                self.call(*id, &class, method, args, 0, None)
            }
            Value::Seq(id) => self.seq_call(*id, method, args, 0),
            other => Err(RuntimeError::new(
                format!("cannot call {method} on {}", other.type_name()),
                0,
            )),
        };
        if parked.is_some() {
            self.agent = parked;
        }
        r
    }

    /// Agent entry point: runs a pure method with events suppressed and
    /// side effects refused.
    pub fn invoke_pure(
        &mut self,
        receiver: &Value,
        method: &str,
        args: Vec<Value>,
    ) -> RResult<Value> {
        self.pure_depth += 1;
        let r = self.dispatch_invoke(receiver, method, args, true);
        self.pure_depth -= 1;
        r
    }

    pub fn heap_digest(&self) -> u64 {
        self.heap.digest()
    }

    fn class_of(&self, id: u64, line: u32) -> RResult<String> {
        match self.heap.object(id) {
            Some(o) => Ok(o.class.clone()),
            None => Err(RuntimeError::new(format!("no object with id {id}"), line)),
        }
    }

    fn frame(&self) -> &Frame {
        self.frames.last().expect("an activation is running")
    }

    fn frame_mut(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("an activation is running")
    }

    fn guard_pure(&self, what: &str, line: u32) -> RResult<()> {
        if self.pure_depth > 0 {
            Err(RuntimeError::new(
                format!("{what} during a pure invocation"),
                line,
            ))
        } else {
            Ok(())
        }
    }

    /// `from` is the declaring class of the calling code, or `None` for the
    /// debugger, which may call private methods.
    fn call(
        &mut self,
        recv_id: u64,
        recv_class: &str,
        method: &str,
        args: Vec<Value>,
        line: u32,
        from: Option<&str>,
    ) -> RResult<Value> {
        let program = self.program.clone();
        let Some(resolved) = program.resolve(recv_class, method) else {
            return Err(RuntimeError::new(
                format!("unknown method {recv_class}.{method}"),
                line,
            ));
        };
        let def = resolved.def;
        if def.visibility == Visibility::Private && from.is_some_and(|f| f != resolved.declaring) {
            return Err(RuntimeError::new(
                format!("method {method} of {} is private", resolved.declaring),
                line,
            ));
        }
        if def.params.len() != args.len() {
            return Err(RuntimeError::new(
                format!(
                    "arity mismatch: {}.{method} expects {} arguments, got {}",
                    resolved.declaring,
                    def.params.len(),
                    args.len()
                ),
                line,
            ));
        }
        if !def.pure {
            self.guard_pure(&format!("call of non-pure {method}"), line)?;
        }
        if self.frames.len() >= MAX_DEPTH {
            return Err(RuntimeError::new("stack overflow", line));
        }
        let caller = match self.frames.last() {
            Some(f) => (f.class.clone(), f.method.clone(), line),
            None => ("<debugger>".into(), "invoke".into(), 0),
        };
        let receiver = Value::Ref {
            id: recv_id,
            class: recv_class.into(),
        };
        let frame = Frame {
            frame_id: self.fresh_frame_id(),
            class: resolved.declaring.into(),
            method: method.into(),
            receiver: Some(receiver),
            locals: def
                .params
                .iter()
                .cloned()
                .zip(args.iter().cloned())
                .collect(),
            args,
            caller,
        };
        self.frames.push(frame);
        self.with_agent(|a, vm| a.method_entry(vm, recv_class));
        let result = match self.exec_block(&def.body) {
            Ok(Flow::Return(v)) => Ok(v),
            Ok(Flow::Normal) => Ok(Value::Null),
            Err(e) => Err(e),
        };
        if let Ok(v) = &result {
            self.with_agent(|a, vm| a.method_exit(vm, recv_class, v));
        }
        self.frames.pop();
        result
    }

    /// Current activation and receiver class, for the agent's event builders.
    pub fn current(&self) -> Option<&Frame> {
        self.frames.last()
    }

    fn exec_block(&mut self, stmts: &[Stmt]) -> RResult<Flow> {
        for s in stmts {
            if let Flow::Return(v) = self.exec(s)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn exec(&mut self, s: &Stmt) -> RResult<Flow> {
        match &s.kind {
            StmtKind::VarDecl { name, init } => {
                let v = self.eval(init)?;
                self.frame_mut().locals.insert(name.clone(), v);
            }
            StmtKind::Assign { name, value } => {
                let v = self.eval(value)?;
                if let Some(slot) = self.frame_mut().locals.get_mut(name) {
                    *slot = v;
                } else {
                    let Some(Value::Ref { id, .. }) = self.frame().receiver.clone() else {
                        return Err(RuntimeError::new(
                            format!("unknown variable {name}"),
                            s.line,
                        ));
                    };
                    self.set_field(id, name, v, s.line)?;
                }
            }
            StmtKind::FieldAssign {
                target,
                field,
                value,
            } => {
                let t = self.eval(target)?;
                let v = self.eval(value)?;
                match t {
                    Value::Ref { id, .. } => self.set_field(id, field, v, s.line)?,
                    Value::Null => {
                        return Err(RuntimeError::new(
                            format!("null receiver for field {field}"),
                            s.line,
                        ))
                    }
                    other => {
                        return Err(RuntimeError::new(
                            format!("{} has no field {field}", other.type_name()),
                            s.line,
                        ))
                    }
                }
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                return if self.condition(cond)? {
                    self.exec_block(then_body)
                } else {
                    self.exec_block(else_body)
                };
            }
            StmtKind::While { cond, body } => {
                while self.condition(cond)? {
                    if let Flow::Return(v) = self.exec_block(body)? {
                        return Ok(Flow::Return(v));
                    }
                    self.with_agent(|a, vm| a.poll(vm));
                }
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e)?,
                    None => Value::Null,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Expr(e) => {
                self.eval(e)?;
            }
        }
        Ok(Flow::Normal)
    }

    fn condition(&mut self, e: &Expr) -> RResult<bool> {
        match self.eval(e)? {
            Value::Bool(b) => Ok(b),
            other => Err(RuntimeError::new(
                format!("condition must be Bool, got {}", other.type_name()),
                e.line,
            )),
        }
    }

    /// Field declaration visible from `class`, with its declaring class.
    fn field_owner(&self, class: &str, field: &str) -> Option<(Visibility, String)> {
        self.program
            .all_fields(class)
            .into_iter()
            .find(|(f, _)| f.name == field)
            .map(|(f, owner)| (f.visibility, owner.to_string()))
    }

    fn check_field_access(&self, class: &str, field: &str, line: u32) -> RResult<()> {
        match self.field_owner(class, field) {
            None => Err(RuntimeError::new(
                format!("{class} has no field {field}"),
                line,
            )),
            Some((Visibility::Private, owner)) if owner != self.frame().class => Err(
                RuntimeError::new(format!("field {field} of {owner} is private"), line),
            ),
            Some(_) => Ok(()),
        }
    }

    fn get_field(&self, id: u64, field: &str, line: u32) -> RResult<Value> {
        let class = self.class_of(id, line)?;
        self.check_field_access(&class, field, line)?;
        Ok(self
            .heap
            .object(id)
            .and_then(|o| o.field(field))
            .cloned()
            .unwrap_or(Value::Null))
    }

    fn set_field(&mut self, id: u64, field: &str, v: Value, line: u32) -> RResult<()> {
        self.guard_pure("field assignment", line)?;
        let class = self.class_of(id, line)?;
        self.check_field_access(&class, field, line)?;
        if let Some(HeapEntry::Object(o)) = self.heap.get_mut(id) {
            if let Some(slot) = o.field_mut(field) {
                *slot = v;
            }
        }
        Ok(())
    }

    fn eval_args(&mut self, args: &[Expr]) -> RResult<Vec<Value>> {
        args.iter().map(|a| self.eval(a)).collect()
    }

    fn eval(&mut self, e: &Expr) -> RResult<Value> {
        let line = e.line;
        Ok(match &e.kind {
            ExprKind::Int(i) => Value::Int(*i),
            ExprKind::Real(r) => Value::Real(*r),
            ExprKind::Str(s) => Value::Str(s.clone()),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Null => Value::Null,
            ExprKind::SelfRef => match &self.frame().receiver {
                Some(r) => r.clone(),
                None => return Err(RuntimeError::new("`self` outside a method", line)),
            },
            ExprKind::Name(name) => {
                if let Some(v) = self.frame().locals.get(name) {
                    v.clone()
                } else if let Some(Value::Ref { id, class }) = &self.frame().receiver {
                    if self.field_owner(class, name).is_none() {
                        return Err(RuntimeError::new(format!("unknown variable {name}"), line));
                    }
                    self.get_field(*id, name, line)?
                } else {
                    return Err(RuntimeError::new(format!("unknown variable {name}"), line));
                }
            }
            ExprKind::Field { receiver, field } => match self.eval(receiver)? {
                Value::Ref { id, .. } => self.get_field(id, field, line)?,
                Value::Null => {
                    return Err(RuntimeError::new(
                        format!("null receiver for field {field}"),
                        line,
                    ))
                }
                other => {
                    return Err(RuntimeError::new(
                        format!("{} has no field {field}", other.type_name()),
                        line,
                    ))
                }
            },
            ExprKind::Call { method, args } => {
                let args = self.eval_args(args)?;
                return self.builtin_or_self_call(method, args, line);
            }
            ExprKind::MethodCall {
                receiver,
                method,
                args,
            } => {
                let recv = self.eval(receiver)?;
                let args = self.eval_args(args)?;
                match recv {
                    Value::Ref { id, class } => {
                        let from = self.frame().class.clone();
                        self.call(id, &class, method, args, line, Some(&from))?
                    }
                    Value::Seq(id) => self.seq_call(id, method, args, line)?,
                    Value::Null => {
                        return Err(RuntimeError::new(
                            format!("null receiver for {method}"),
                            line,
                        ))
                    }
                    other => {
                        return Err(RuntimeError::new(
                            format!("cannot call {method} on {}", other.type_name()),
                            line,
                        ))
                    }
                }
            }
            ExprKind::New { class, args } => {
                let args = self.eval_args(args)?;
                self.instantiate(class, args, line)?
            }
            ExprKind::Unary { op, operand } => {
                let v = self.eval(operand)?;
                match (op, v) {
                    (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
                    (UnOp::Neg, Value::Int(i)) => Value::Int(
                        i.checked_neg()
                            .ok_or_else(|| RuntimeError::new("integer overflow", line))?,
                    ),
                    (UnOp::Neg, Value::Real(r)) => Value::Real(-r),
                    (op, v) => {
                        return Err(RuntimeError::new(
                            format!(
                                "operator {} cannot apply to {}",
                                if *op == UnOp::Not { "!" } else { "-" },
                                v.type_name()
                            ),
                            line,
                        ))
                    }
                }
            }
            ExprKind::Binary { op, left, right } => return self.binary(*op, left, right, line),
        })
    }

    fn builtin_or_self_call(
        &mut self,
        method: &str,
        args: Vec<Value>,
        line: u32,
    ) -> RResult<Value> {
        let want = |n: usize| -> RResult<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(RuntimeError::new(
                    format!(
                        "arity mismatch: {method} expects {n} arguments, got {}",
                        args.len()
                    ),
                    line,
                ))
            }
        };
        match method {
            "seq" => {
                want(0)?;
                self.guard_pure("allocation", line)?;
                Ok(Value::Seq(self.heap.alloc(HeapEntry::Seq(Vec::new()))))
            }
            "print" => {
                want(1)?;
                self.guard_pure("print", line)?;
                let text = self.heap.display(&args[0]);
                writeln!(self.out, "{text}")
                    .map_err(|e| RuntimeError::new(format!("output failed: {e}"), line))?;
                Ok(Value::Null)
            }
            "abort" => {
                want(1)?;
                Err(RuntimeError::new(
                    format!("abort: {}", self.heap.display(&args[0])),
                    line,
                ))
            }
            _ => match self.frame().receiver.clone() {
                Some(Value::Ref { id, class }) => {
                    let from = self.frame().class.clone();
                    self.call(id, &class, method, args, line, Some(&from))
                }
                _ => Err(RuntimeError::new(
                    format!("unknown function {method}"),
                    line,
                )),
            },
        }
    }

    fn instantiate(&mut self, class: &str, args: Vec<Value>, line: u32) -> RResult<Value> {
        self.guard_pure("allocation", line)?;
        let program = self.program.clone();
        if program.class(class).is_none() {
            return Err(RuntimeError::new(
                if program.interface(class).is_some() {
                    format!("cannot instantiate interface {class}")
                } else {
                    format!("unknown class {class}")
                },
                line,
            ));
        }
        let fields = program
            .all_fields(class)
            .into_iter()
            .map(|(f, _)| (f.name.clone(), Value::Null))
            .collect();
        let id = self.heap.alloc(HeapEntry::Object(Object {
            class: class.into(),
            fields,
        }));
        if program.resolve(class, "init").is_some() {
            let from = self.frames.last().map(|f| f.class.clone());
            self.call(id, class, "init", args, line, from.as_deref())?;
        } else if !args.is_empty() {
            return Err(RuntimeError::new(
                format!(
                    "arity mismatch: {class} has no init but got {} arguments",
                    args.len()
                ),
                line,
            ));
        }
        Ok(Value::Ref {
            id,
            class: class.into(),
        })
    }

    /// Built-in sequence methods.
    pub(crate) fn seq_call(
        &mut self,
        id: u64,
        method: &str,
        args: Vec<Value>,
        line: u32,
    ) -> RResult<Value> {
        if SEQ_MUTATORS.contains(&method) {
            self.guard_pure(&format!("sequence {method}"), line)?;
        }
        let arity = match method {
            "add" | "get" => 1,
            "set" => 2,
            "removeLast" | "last" | "size" => 0,
            _ => {
                return Err(RuntimeError::new(
                    format!("unknown sequence method {method}"),
                    line,
                ))
            }
        };
        debug_assert!(SEQ_MUTATORS.contains(&method) || SEQ_READERS.contains(&method));
        if args.len() != arity {
            return Err(RuntimeError::new(
                format!(
                    "arity mismatch: {method} expects {arity} arguments, got {}",
                    args.len()
                ),
                line,
            ));
        }
        let index = |v: &Value, len: usize| -> RResult<usize> {
            match v {
                Value::Int(i) if *i >= 0 && (*i as usize) < len => Ok(*i as usize),
                Value::Int(i) => Err(RuntimeError::new(
                    format!("index {i} out of range for sequence of size {len}"),
                    line,
                )),
                other => Err(RuntimeError::new(
                    format!("sequence index must be Int, got {}", other.type_name()),
                    line,
                )),
            }
        };
        let Some(HeapEntry::Seq(items)) = self.heap.get_mut(id) else {
            return Err(RuntimeError::new(format!("no sequence with id {id}"), line));
        };
        let mut args = args.into_iter();
        Ok(match method {
            "add" => {
                items.push(args.next().unwrap());
                Value::Null
            }
            "removeLast" => items
                .pop()
                .ok_or_else(|| RuntimeError::new("removeLast on empty sequence", line))?,
            "last" => items
                .last()
                .cloned()
                .ok_or_else(|| RuntimeError::new("last on empty sequence", line))?,
            "size" => Value::Int(items.len() as i64),
            "get" => {
                let i = index(&args.next().unwrap(), items.len())?;
                items[i].clone()
            }
            _ => {
                let i = index(&args.next().unwrap(), items.len())?;
                items[i] = args.next().unwrap();
                Value::Null
            }
        })
    }

    fn binary(&mut self, op: BinOp, left: &Expr, right: &Expr, line: u32) -> RResult<Value> {
        if matches!(op, BinOp::And | BinOp::Or) {
            let sym = if op == BinOp::And { "&&" } else { "||" };
            let l = self.bool_operand(left, sym)?;
            if (op == BinOp::And) != l {
                return Ok(Value::Bool(l));
            }
            return Ok(Value::Bool(self.bool_operand(right, sym)?));
        }
        let l = self.eval(left)?;
        let r = self.eval(right)?;
        let mismatch = |sym: &str, l: &Value, r: &Value| {
            RuntimeError::new(
                format!(
                    "operator {sym} cannot apply to {} and {}",
                    l.type_name(),
                    r.type_name()
                ),
                line,
            )
        };
        let overflow = || RuntimeError::new("integer overflow", line);
        Ok(match op {
            BinOp::Eq => Value::Bool(values_equal(&l, &r)),
            BinOp::Ne => Value::Bool(!values_equal(&l, &r)),
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                let ord = match (&l, &r) {
                    (Value::Int(a), Value::Int(b)) => a.partial_cmp(b),
                    (Value::Str(a), Value::Str(b)) => a.partial_cmp(b),
                    _ => match (as_real(&l), as_real(&r)) {
                        (Some(a), Some(b)) => a.partial_cmp(&b),
                        _ => return Err(mismatch(binop_symbol(op), &l, &r)),
                    },
                };
                let Some(ord) = ord else {
                    return Ok(Value::Bool(false));
                };
                Value::Bool(match op {
                    BinOp::Lt => ord.is_lt(),
                    BinOp::Le => ord.is_le(),
                    BinOp::Gt => ord.is_gt(),
                    _ => ord.is_ge(),
                })
            }
            BinOp::Add if matches!(l, Value::Str(_)) || matches!(r, Value::Str(_)) => Value::Str(
                format!("{}{}", self.heap.display(&l), self.heap.display(&r)),
            ),
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => match (&l, &r) {
                (Value::Int(a), Value::Int(b)) => Value::Int(match op {
                    BinOp::Add => a.checked_add(*b).ok_or_else(overflow)?,
                    BinOp::Sub => a.checked_sub(*b).ok_or_else(overflow)?,
                    BinOp::Mul => a.checked_mul(*b).ok_or_else(overflow)?,
                    _ if *b == 0 => return Err(RuntimeError::new("division by zero", line)),
                    BinOp::Div => a.checked_div(*b).ok_or_else(overflow)?,
                    _ => a.checked_rem(*b).ok_or_else(overflow)?,
                }),
                _ if op == BinOp::Rem => return Err(mismatch("%", &l, &r)),
                _ => match (as_real(&l), as_real(&r)) {
                    (Some(a), Some(b)) => Value::Real(match op {
                        BinOp::Add => a + b,
                        BinOp::Sub => a - b,
                        BinOp::Mul => a * b,
                        _ => a / b,
                    }),
                    _ => return Err(mismatch(binop_symbol(op), &l, &r)),
                },
            },
            BinOp::And | BinOp::Or => unreachable!("handled above"),
        })
    }

    fn bool_operand(&mut self, e: &Expr, sym: &str) -> RResult<bool> {
        match self.eval(e)? {
            Value::Bool(b) => Ok(b),
            other => Err(RuntimeError::new(
                format!("operator {sym} expects Bool, got {}", other.type_name()),
                e.line,
            )),
        }
    }
}

fn as_real(v: &Value) -> Option<f64> {
    match v {
        Value::Int(i) => Some(*i as f64),
        Value::Real(r) => Some(*r),
        _ => None,
    }
}

/// `==` in MiniObj: numeric across Int/Real, by value for Bool/Str, by
/// identity for objects and sequences, false across other kinds.
pub fn values_equal(l: &Value, r: &Value) -> bool {
    match (l, r) {
        (Value::Int(a), Value::Int(b)) => a == b,
        (Value::Ref { id: a, .. }, Value::Ref { id: b, .. }) => a == b,
        (Value::Seq(a), Value::Seq(b)) => a == b,
        (Value::Bool(a), Value::Bool(b)) => a == b,
        (Value::Str(a), Value::Str(b)) => a == b,
        (Value::Null, Value::Null) => true,
        _ => match (as_real(l), as_real(r)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        },
    }
}

fn binop_symbol(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::Rem => "%",
        BinOp::Eq => "==",
        BinOp::Ne => "!=",
        BinOp::Lt => "<",
        BinOp::Le => "<=",
        BinOp::Gt => ">",
        BinOp::Ge => ">=",
        BinOp::And => "&&",
        BinOp::Or => "||",
    }
}
