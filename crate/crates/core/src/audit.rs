//! Entry/exit event processing and the audit event loop.

use std::collections::HashMap;
use std::io::{self, Write};
use std::sync::Arc;

use mdwp::{Event, LinkError, MethodEvent, MethodMirror, Session, ValueMirror, WireValue};
use ocl::{format_expr, BinaryOp, ClauseKind, Expr, ExprKind};

use crate::eval::{capture, judge, AtPre, Captured, EvalEnv};
use crate::report::{AuditRecord, AuditSummary, Phase, ReportWriter};
use crate::table::{ConstraintTable, TableClause};
use crate::target::Target;
use crate::verdict::{combine_pre, BlameTag, ErrorCode, Outcome, Party, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum AuditError {
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error("cannot write report: {0}")]
    Report(#[from] io::Error),
}

/// Which clause kinds are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kinds {
    pub inv: bool,
    pub pre: bool,
    pub post: bool,
}

impl Kinds {
    pub const ALL: Kinds = Kinds {
        inv: true,
        pre: true,
        post: true,
    };

    /// Parses a comma-separated subset of `inv,pre,post`.
    pub fn parse(s: &str) -> Result<Kinds, String> {
        let mut k = Kinds {
            inv: false,
            pre: false,
            post: false,
        };
        for part in s.split(',').map(str::trim) {
            match part {
                "inv" => k.inv = true,
                "pre" => k.pre = true,
                "post" => k.post = true,
                other => return Err(format!("unknown clause kind '{other}'")),
            }
        }
        Ok(k)
    }

    pub fn allows(self, kind: ClauseKind) -> bool {
        match kind {
            ClauseKind::Inv => self.inv,
            ClauseKind::Pre => self.pre,
            ClauseKind::Post => self.post,
        }
    }
}

impl Default for Kinds {
    fn default() -> Self {
        Kinds::ALL
    }
}

#[derive(Debug, Clone, Default)]
pub struct AuditOptions {
    /// Disconnect after the first FAIL.
    pub fail_fast: bool,
    pub kinds: Kinds,
    /// Compare heap digests around every evaluation.
    pub verify_purity: bool,
}

/// What entry processing leaves for the matching exit.
#[derive(Debug, Default)]
struct FrameState {
    /// Per effective post clause, values indexed by chain slot.
    captures: Vec<Vec<Captured>>,
    pre_verdict: Option<Outcome>,
}

/// Event at hand plus what was resolved about it.
struct Site<'a> {
    ev: &'a MethodEvent,
    method: MethodMirror,
    self_value: Option<ValueMirror>,
    args: Vec<ValueMirror>,
}

impl Site<'_> {
    fn env<'c>(&self, clause: &TableClause, at_pre: AtPre<'c>) -> EvalEnv<'c> {
        EvalEnv {
            self_value: self.self_value.clone(),
            params: clause
                .params
                .iter()
                .cloned()
                .zip(self.args.iter().cloned())
                .collect(),
            result: None,
            at_pre,
        }
    }

    fn blame(&self, kind: ClauseKind) -> BlameTag {
        match kind {
            ClauseKind::Pre => BlameTag {
                party: Party::Client,
                class: self.ev.caller_class.clone(),
                method: self.ev.caller_method.clone(),
                line: Some(self.ev.caller_line),
            },
            ClauseKind::Inv | ClauseKind::Post => BlameTag {
                party: Party::Server,
                class: self.method.declaring.clone(),
                method: self.ev.method.clone(),
                line: None,
            },
        }
    }
}

/// Public non-constructor methods see invariants on both sides; a
/// constructor only on exit, once the object exists.
fn invariants_on_entry(m: &MethodMirror) -> bool {
    m.visibility == mdwp::Visibility::Public && !m.is_constructor()
}

fn invariants_on_exit(m: &MethodMirror) -> bool {
    invariants_on_entry(m) || m.is_constructor()
}

pub struct Auditor<W: Write> {
    table: ConstraintTable,
    report: ReportWriter<W>,
    options: AuditOptions,
    frames: HashMap<u64, FrameState>,
    stop: bool,
}

impl<W: Write> Auditor<W> {
    pub fn new(table: ConstraintTable, report: ReportWriter<W>, options: AuditOptions) -> Self {
        Auditor {
            table,
            report,
            options,
            frames: HashMap::new(),
            stop: false,
        }
    }

    pub fn table(&self) -> &ConstraintTable {
        &self.table
    }

    /// Set once a FAIL was recorded under fail-fast.
    pub fn should_stop(&self) -> bool {
        self.stop
    }

    pub fn summary_mut(&mut self) -> &mut AuditSummary {
        self.report.summary_mut()
    }

    /// Frames whose entry was seen but whose exit was not.
    pub fn open_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn finish(self) -> io::Result<(AuditSummary, W)> {
        self.report.finish()
    }

    fn site<'a>(
        &self,
        target: &mut dyn Target,
        ev: &'a MethodEvent,
    ) -> Result<Option<Site<'a>>, LinkError> {
        let class = target.class(&ev.class)?;
        let Some(method) = class.method(&ev.method).cloned() else {
            return Ok(None);
        };
        let self_value = ev.this_id.map(|id| {
            target.mirror(WireValue::Ref {
                id,
                class: ev.class.clone(),
            })
        });
        let args = ev.args.iter().map(|a| target.mirror(a.clone())).collect();
        Ok(Some(Site {
            ev,
            method,
            self_value,
            args,
        }))
    }

    /// Checks invariants and the effective precondition, then captures the
    /// `@pre` values the postconditions will need.
    pub fn on_method_entry(
        &mut self,
        target: &mut dyn Target,
        ev: &MethodEvent,
    ) -> Result<(), AuditError> {
        let eff = self.table.effective_constraints(&ev.class, &ev.method);
        if eff.is_empty() {
            return Ok(());
        }
        let Some(site) = self.site(target, ev)? else {
            return Ok(());
        };
        let kinds = self.options.kinds;
        if kinds.inv && invariants_on_entry(&site.method) {
            for c in &eff.invariants {
                self.check(
                    target,
                    &site,
                    Phase::Entry,
                    c,
                    site.env(c, AtPre::Forbidden),
                    false,
                    None,
                )?;
            }
        }
        let mut state = FrameState::default();
        if kinds.pre && !eff.pre_groups.is_empty() {
            let multi = eff.pre_groups.len() > 1;
            let mut outcomes = Vec::new();
            let mut first_error = None;
            for g in &eff.pre_groups {
                let mut group = Vec::new();
                for c in &g.clauses {
                    let env = site.env(c, AtPre::Forbidden);
                    let (o, code) = self.check(target, &site, Phase::Entry, c, env, multi, None)?;
                    first_error = first_error.or(code);
                    group.push(o);
                }
                outcomes.push(group);
            }
            let combined = combine_pre(&outcomes);
            if multi {
                let expr = combined_pre_expr(
                    &eff.pre_groups
                        .iter()
                        .map(|g| &g.clauses[..])
                        .collect::<Vec<_>>(),
                );
                let held: Vec<&str> = eff
                    .pre_groups
                    .iter()
                    .zip(&outcomes)
                    .filter(|(_, o)| combine_pre(std::slice::from_ref(o)) == Outcome::Pass)
                    .map(|(g, _)| g.declaring.as_str())
                    .collect();
                let detail = if held.is_empty() {
                    String::new()
                } else {
                    format!("satisfied by {}", held.join(", "))
                };
                let verdict = Verdict {
                    outcome: combined,
                    error_code: if combined == Outcome::Error {
                        first_error
                    } else {
                        None
                    },
                    detail: if combined == Outcome::Error {
                        "no group holds and some could not be evaluated".into()
                    } else {
                        detail
                    },
                };
                let record = self.base_record(
                    &site,
                    Phase::Entry,
                    ClauseKind::Pre,
                    Some("effective".into()),
                    expr,
                    verdict,
                    false,
                    None,
                );
                self.emit(record)?;
            }
            state.pre_verdict = Some(combined);
        }
        if kinds.post {
            for c in &eff.posts {
                let env = site.env(c, AtPre::Live);
                let mut slots = Vec::with_capacity(c.chains.len());
                for chain in &c.chains {
                    let (v, clean) = self.bracket(target, |t| capture(t, &env, &chain.expr))?;
                    slots.push(if clean {
                        v
                    } else {
                        Err("heap changed while capturing".into())
                    });
                }
                state.captures.push(slots);
            }
            self.frames.insert(ev.frame_id, state);
        }
        Ok(())
    }

    /// Checks postconditions against entry captures and the return value,
    /// then invariants.
    pub fn on_method_exit(
        &mut self,
        target: &mut dyn Target,
        ev: &MethodEvent,
    ) -> Result<(), AuditError> {
        let state = self.frames.remove(&ev.frame_id).unwrap_or_default();
        let eff = self.table.effective_constraints(&ev.class, &ev.method);
        if eff.is_empty() {
            return Ok(());
        }
        let Some(site) = self.site(target, ev)? else {
            return Ok(());
        };
        let result = ev
            .return_value
            .clone()
            .map(|v| target.mirror(v))
            .unwrap_or(ValueMirror::Null);
        if self.options.kinds.post {
            for (i, c) in eff.posts.iter().enumerate() {
                let values = state.captures.get(i).map(Vec::as_slice).unwrap_or(&[]);
                let mut env = site.env(
                    c,
                    AtPre::Captured {
                        chains: &c.chains,
                        values,
                    },
                );
                env.result = Some(result.clone());
                self.check(target, &site, Phase::Exit, c, env, false, state.pre_verdict)?;
            }
        }
        if self.options.kinds.inv && invariants_on_exit(&site.method) {
            for c in &eff.invariants {
                self.check(
                    target,
                    &site,
                    Phase::Exit,
                    c,
                    site.env(c, AtPre::Forbidden),
                    false,
                    None,
                )?;
            }
        }
        Ok(())
    }

    /// Runs `f`, comparing heap digests around it when purity verification
    /// is on. The flag is false if the heap changed.
    fn bracket<T>(
        &mut self,
        target: &mut dyn Target,
        f: impl FnOnce(&mut dyn Target) -> Result<T, LinkError>,
    ) -> Result<(T, bool), LinkError> {
        if !self.options.verify_purity {
            return Ok((f(target)?, true));
        }
        let before = target.heap_digest()?;
        let v = f(target)?;
        let clean = target.heap_digest()? == before;
        if !clean {
            self.report.summary_mut().digest_mismatches += 1;
        }
        Ok((v, clean))
    }

    #[allow(clippy::too_many_arguments)]
    fn check(
        &mut self,
        target: &mut dyn Target,
        site: &Site<'_>,
        phase: Phase,
        c: &TableClause,
        env: EvalEnv<'_>,
        member: bool,
        pre_verdict: Option<Outcome>,
    ) -> Result<(Outcome, Option<ErrorCode>), AuditError> {
        let (verdict, clean) = self.bracket(target, |t| judge(t, &env, &c.clause.expr))?;
        let verdict = if clean {
            verdict
        } else {
            Verdict::error(ErrorCode::PurityViolation, "heap changed during evaluation")
        };
        let outcome = (verdict.outcome, verdict.error_code);
        let record = self.base_record(
            site,
            phase,
            c.clause.kind,
            c.clause.label.clone(),
            format_expr(&c.clause.expr),
            verdict,
            member,
            pre_verdict,
        );
        self.emit(record)?;
        Ok(outcome)
    }

    #[allow(clippy::too_many_arguments)]
    fn base_record(
        &self,
        site: &Site<'_>,
        phase: Phase,
        kind: ClauseKind,
        label: Option<String>,
        expr: String,
        verdict: Verdict,
        member: bool,
        pre_verdict: Option<Outcome>,
    ) -> AuditRecord {
        AuditRecord {
            seq: 0,
            phase,
            context: format!("{}::{}", site.ev.class, site.ev.method),
            kind: kind.keyword().into(),
            label,
            expr,
            blame: (verdict.outcome == Outcome::Fail).then(|| site.blame(kind)),
            verdict: verdict.outcome,
            error_code: verdict.error_code,
            detail: verdict.detail,
            object_id: site.ev.this_id,
            frame_id: site.ev.frame_id,
            member,
            pre_verdict,
        }
    }

    fn emit(&mut self, record: AuditRecord) -> io::Result<()> {
        let r = self.report.record(record)?;
        if self.options.fail_fast && !r.member && r.verdict == Outcome::Fail {
            self.stop = true;
        }
        Ok(())
    }
}

/// `(g1a and g1b) or (g2a)`, printed with minimal parentheses.
fn combined_pre_expr(groups: &[&[Arc<TableClause>]]) -> String {
    let fold = |op: BinaryOp, items: Vec<Expr>| {
        items
            .into_iter()
            .reduce(|l, r| {
                Expr::synth(ExprKind::Binary {
                    op,
                    left: Box::new(l),
                    right: Box::new(r),
                })
            })
            .unwrap_or_else(|| Expr::synth(ExprKind::Bool(true)))
    };
    let disjuncts = groups
        .iter()
        .map(|g| {
            fold(
                BinaryOp::And,
                g.iter().map(|c| c.clause.expr.clone()).collect(),
            )
        })
        .collect();
    format_expr(&fold(BinaryOp::Or, disjuncts))
}

/// Drives a suspended session to the end: installs the event policy,
/// resumes, and checks every entry and exit until the VM dies, the session
/// fails or fail-fast stops it. The summary line is written last.
pub fn run_audit<W: Write>(
    session: &mut Session,
    table: ConstraintTable,
    report: ReportWriter<W>,
    options: AuditOptions,
) -> Result<(AuditSummary, W), AuditError> {
    let kinds = options.kinds;
    let classes = table.constrained_classes();
    let mut auditor = Auditor::new(table, report, options);
    let outcome = drive(session, &mut auditor, classes, kinds);
    match outcome {
        Ok(()) => {}
        Err(AuditError::Link(e)) => {
            let s = auditor.summary_mut();
            s.incomplete = true;
            s.vm_error.get_or_insert_with(|| e.to_string());
        }
        Err(e) => return Err(e),
    }
    Ok(auditor.finish()?)
}

fn drive<W: Write>(
    session: &mut Session,
    auditor: &mut Auditor<W>,
    classes: Vec<String>,
    kinds: Kinds,
) -> Result<(), AuditError> {
    session.set_event_policy(classes, true, kinds.post || kinds.inv)?;
    session.resume_all()?;
    while let Some(set) = session.next_event_set()? {
        for event in &set.events {
            match event {
                Event::VmStart => {}
                Event::MethodEntry(m) => auditor.on_method_entry(session, m)?,
                Event::MethodExit(m) => auditor.on_method_exit(session, m)?,
                Event::VmDeath {
                    exit_status, error, ..
                } => {
                    let s = auditor.summary_mut();
                    s.exit_status = Some(*exit_status);
                    s.vm_error = error.clone();
                }
            }
            if auditor.should_stop() {
                break;
            }
        }
        if auditor.should_stop() {
            auditor.summary_mut().stopped_early = true;
            session.disconnect()?;
            return Ok(());
        }
        if session.is_suspended() {
            session.resume_all()?;
        }
    }
    Ok(())
}

/// Process exit code for a finished audit: 1 if the audit could not
/// complete, else 2 for any FAIL, 3 for any ERROR, 0 when clean.
pub fn exit_code(s: &AuditSummary) -> i32 {
    if s.incomplete {
        1
    } else if s.fail > 0 {
        2
    } else if s.error > 0 {
        3
    } else {
        0
    }
}
