//! Forward interval analysis of MiniC functions.

use std::collections::BTreeMap;

use asef_core::HardwareTarget;

use crate::ast::*;
use crate::finding::{Finding, Kind, Verdict};
use crate::interval::Interval;
use crate::resolve::{Resolution, VarId};

/// Loop-head updates joined plainly before widening kicks in.
pub const WIDENING_DELAY: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarState {
    Uninitialized,
    Value(Interval),
    /// Initialized on some paths; the interval covers those.
    MaybeUninit(Interval),
}

impl VarState {
    pub fn interval(&self) -> Interval {
        match self {
            VarState::Uninitialized => Interval::BOTTOM,
            VarState::Value(i) | VarState::MaybeUninit(i) => *i,
        }
    }

    fn with_interval(&self, i: Interval) -> VarState {
        match self {
            VarState::Uninitialized => VarState::Uninitialized,
            VarState::Value(_) => VarState::Value(i),
            VarState::MaybeUninit(_) => VarState::MaybeUninit(i),
        }
    }

    fn join(&self, other: &VarState) -> VarState {
        use VarState::*;
        match (self, other) {
            (Uninitialized, Uninitialized) => Uninitialized,
            (Value(a), Value(b)) => Value(a.join(b)),
            (a, b) => MaybeUninit(a.interval().join(&b.interval())),
        }
    }

    fn le(&self, other: &VarState) -> bool {
        use VarState::*;
        match (self, other) {
            (Uninitialized, Uninitialized | MaybeUninit(_)) => true,
            (Value(a), Value(b) | MaybeUninit(b)) | (MaybeUninit(a), MaybeUninit(b)) => a.is_subset_of(b),
            _ => false,
        }
    }
}

/// Variable states of one program point; `None` is the unreachable state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractState {
    vars: Option<Vec<VarState>>,
}

impl AbstractState {
    pub fn initial(n: usize) -> Self {
        AbstractState {
            vars: Some(vec![VarState::Uninitialized; n]),
        }
    }

    pub fn bottom() -> Self {
        AbstractState { vars: None }
    }

    pub fn is_bottom(&self) -> bool {
        self.vars.is_none()
    }

    pub fn get(&self, v: VarId) -> Option<VarState> {
        self.vars.as_ref().map(|vs| vs[v])
    }

    pub fn set(&mut self, v: VarId, s: VarState) {
        if let Some(vs) = &mut self.vars {
            vs[v] = s;
        }
    }

    /// Narrows `v` to `i`; an empty result makes the state unreachable.
    fn restrict(mut self, v: VarId, i: Interval) -> Self {
        if let Some(vs) = &mut self.vars {
            let cur = vs[v];
            let met = cur.interval().meet(&i);
            if met.is_bottom() {
                return Self::bottom();
            }
            vs[v] = cur.with_interval(met);
        }
        self
    }

    pub fn join(&self, other: &AbstractState) -> AbstractState {
        match (&self.vars, &other.vars) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            (Some(a), Some(b)) => AbstractState {
                vars: Some(a.iter().zip(b).map(|(x, y)| x.join(y)).collect()),
            },
        }
    }

    pub fn le(&self, other: &AbstractState) -> bool {
        match (&self.vars, &other.vars) {
            (None, _) => true,
            (_, None) => false,
            (Some(a), Some(b)) => a.iter().zip(b).all(|(x, y)| x.le(y)),
        }
    }

    fn widen(&self, next: &AbstractState, types: &[IntType]) -> AbstractState {
        match (&self.vars, &next.vars) {
            (None, _) => next.clone(),
            (_, None) => self.clone(),
            (Some(a), Some(b)) => AbstractState {
                vars: Some(
                    a.iter()
                        .zip(b)
                        .zip(types)
                        .map(|((x, y), ty)| {
                            let j = x.join(y);
                            j.with_interval(x.interval().widen(&y.interval(), ty.min(), ty.max()))
                        })
                        .collect(),
                ),
            },
        }
    }
}

/// Result of analyzing one function.
#[derive(Debug, Clone)]
pub struct FunctionAnalysis {
    pub function: String,
    /// Every check site reached, including proven-safe ones.
    pub findings: Vec<Finding>,
    /// Statement transfer-function applications, loop iterations included.
    pub state_updates: usize,
    pub resolution: Resolution,
}

pub struct Analyzer<'a> {
    res: &'a Resolution,
    function: &'a str,
    int_bits: u32,
    types: Vec<IntType>,
    collect: bool,
    findings: BTreeMap<(Pos, Kind), (Verdict, String)>,
    updates: usize,
}

fn type_range(ty: IntType) -> Interval {
    Interval::new(ty.min(), ty.max())
}

fn width_range(bits: u32) -> Interval {
    Interval::new(signed_min(bits), signed_max(bits))
}

impl<'a> Analyzer<'a> {
    pub fn new(res: &'a Resolution, function: &'a str, hw: &HardwareTarget) -> Self {
        Analyzer {
            res,
            function,
            int_bits: hw.int_size_bits,
            types: res.vars.iter().map(|v| v.ty).collect(),
            collect: true,
            findings: BTreeMap::new(),
            updates: 0,
        }
    }

    pub fn findings(&self) -> Vec<Finding> {
        self.findings
            .iter()
            .map(|(&(pos, kind), (verdict, message))| Finding {
                function: self.function.to_string(),
                kind,
                pos,
                verdict: *verdict,
                message: message.clone(),
            })
            .collect()
    }

    fn report(&mut self, pos: Pos, kind: Kind, verdict: Verdict, message: impl FnOnce() -> String) {
        if !self.collect {
            return;
        }
        self.findings
            .entry((pos, kind))
            .and_modify(|(v, m)| {
                let joined = v.join(verdict);
                if joined != *v {
                    *v = joined;
                    *m = format!("{} (differs across contexts)", kind.native_name());
                }
            })
            .or_insert_with(|| (verdict, message()));
    }

    fn quiet<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        let saved = std::mem::replace(&mut self.collect, false);
        let out = f(self);
        self.collect = saved;
        out
    }

    fn width(&self, e: &Expr) -> u32 {
        self.res.width(e, self.int_bits)
    }

    /// Range check of a mathematically exact result against its width;
    /// out-of-range results may wrap to anything in the width.
    fn overflow(&mut self, pos: Pos, exact: Interval, bits: u32, what: &str) -> Interval {
        if exact.is_bottom() {
            return exact;
        }
        let range = width_range(bits);
        let inside = exact.is_subset_of(&range);
        let verdict = Verdict::classify(inside, exact.is_disjoint(&range));
        self.report(pos, Kind::SignedOverflow, verdict, || match verdict {
            Verdict::ProvenSafe => format!("{what} stays within int{bits}"),
            Verdict::ProvenUnsafe => format!("{what} always overflows int{bits}: {exact}"),
            _ => format!("{what} may overflow int{bits}: {exact}"),
        });
        if inside {
            exact
        } else {
            range
        }
    }

    /// Store of `value` into a variable of type `ty`.
    fn convert(&mut self, pos: Pos, name: &str, value: Interval, ty: IntType) -> Interval {
        let range = type_range(ty);
        let inside = value.is_subset_of(&range);
        let verdict = Verdict::classify(inside, value.is_disjoint(&range));
        self.report(pos, Kind::ConvOverflow, verdict, || match verdict {
            Verdict::ProvenSafe => format!("value stored in `{name}` fits {}", ty.name()),
            Verdict::ProvenUnsafe => format!("value {value} never fits {} `{name}`", ty.name()),
            _ => format!("value {value} may not fit {} `{name}`", ty.name()),
        });
        if inside {
            value
        } else {
            range
        }
    }

    /// Interval of `e` in `s`, recording check findings for every operator.
    pub fn eval(&mut self, e: &Expr, s: &AbstractState) -> Interval {
        if s.is_bottom() {
            return Interval::BOTTOM;
        }
        match &e.kind {
            ExprKind::Lit(v) => Interval::singleton(*v as i128),
            ExprKind::Var(name) => {
                let Some(v) = self.res.use_of(e.pos) else {
                    return Interval::BOTTOM;
                };
                let state = s.get(v).expect("reachable state");
                let verdict = match state {
                    VarState::Value(_) => Verdict::ProvenSafe,
                    VarState::MaybeUninit(_) => Verdict::Undecided,
                    VarState::Uninitialized => Verdict::ProvenUnsafe,
                };
                self.report(e.pos, Kind::UninitRead, verdict, || match verdict {
                    Verdict::ProvenSafe => format!("`{name}` is initialized"),
                    Verdict::Undecided => format!("`{name}` may be read before initialization"),
                    _ => format!("`{name}` is read before initialization"),
                });
                state.interval()
            }
            ExprKind::Unary(UnOp::Neg, x) => {
                let a = self.eval(x, s);
                let bits = self.width(e);
                self.overflow(e.pos, a.neg(), bits, "negation")
            }
            ExprKind::Unary(UnOp::Not, x) => {
                self.eval(x, s);
                self.truth_value(e, s)
            }
            ExprKind::Binary(op @ (BinOp::And | BinOp::Or), l, r) => {
                self.eval(l, s);
                let rhs_state = self.quiet(|a| a.refine(l, *op == BinOp::And, s.clone()));
                self.eval(r, &rhs_state);
                self.truth_value(e, s)
            }
            ExprKind::Binary(op, l, r) if op.is_comparison() => {
                self.eval(l, s);
                self.eval(r, s);
                self.truth_value(e, s)
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.eval(l, s);
                let b = self.eval(r, s);
                if a.is_bottom() || b.is_bottom() {
                    return Interval::BOTTOM;
                }
                let bits = self.width(e);
                self.arith(e.pos, *op, a, b, bits)
            }
        }
    }

    fn arith(&mut self, pos: Pos, op: BinOp, a: Interval, b: Interval, bits: u32) -> Interval {
        match op {
            BinOp::Add => self.overflow(pos, a.add(&b), bits, "addition"),
            BinOp::Sub => self.overflow(pos, a.sub(&b), bits, "subtraction"),
            BinOp::Mul => self.overflow(pos, a.mul(&b), bits, "multiplication"),
            BinOp::Div | BinOp::Rem => {
                let zero = Interval::singleton(0);
                let verdict = Verdict::classify(!b.contains(0), b == zero);
                self.report(pos, Kind::DivZero, verdict, || match verdict {
                    Verdict::ProvenSafe => "divisor is never zero".into(),
                    Verdict::ProvenUnsafe => "division by zero".into(),
                    _ => format!("divisor {b} may be zero"),
                });
                if op == BinOp::Div {
                    self.overflow(pos, a.div(&b), bits, "division")
                } else {
                    // MIN % -1 overflows in C as MIN / -1 does.
                    let min = signed_min(bits);
                    let q = Interval::singleton(min).meet(&a);
                    let hazard = !q.is_bottom() && b.contains(-1);
                    let certain = a == Interval::singleton(min) && b == Interval::singleton(-1);
                    let verdict = Verdict::classify(!hazard, certain);
                    self.report(pos, Kind::SignedOverflow, verdict, || match verdict {
                        Verdict::ProvenSafe => format!("remainder stays within int{bits}"),
                        _ => format!("remainder of int{bits} minimum by -1 overflows"),
                    });
                    a.rem(&b).meet(&width_range(bits))
                }
            }
            BinOp::Shl | BinOp::Shr => {
                let w = bits as i128;
                let neg = Verdict::classify(b.lo().is_some_and(|lo| lo >= 0), b.hi().is_some_and(|hi| hi < 0));
                self.report(pos, Kind::ShiftNegative, neg, || match neg {
                    Verdict::ProvenSafe => "shift amount is non-negative".into(),
                    _ => format!("shift amount {b} may be negative"),
                });
                let big = Verdict::classify(b.hi().is_some_and(|hi| hi < w), b.lo().is_some_and(|lo| lo >= w));
                self.report(pos, Kind::ShiftAmount, big, || match big {
                    Verdict::ProvenSafe => format!("shift amount is below {bits}"),
                    _ => format!("shift amount {b} may reach {bits}"),
                });
                let valid = b.meet(&Interval::new(0, w - 1));
                if op == BinOp::Shl {
                    self.overflow(pos, a.shl(&valid), bits, "left shift")
                } else {
                    a.shr(&valid)
                }
            }
            _ => unreachable!("logical and comparison operators are handled by eval"),
        }
    }

    /// `{0}`, `{1}` or `[0, 1]` depending on which outcomes of `e` are possible.
    fn truth_value(&mut self, e: &Expr, s: &AbstractState) -> Interval {
        let can_hold = !self.quiet(|a| a.refine(e, true, s.clone())).is_bottom();
        let can_fail = !self.quiet(|a| a.refine(e, false, s.clone())).is_bottom();
        match (can_fail, can_hold) {
            (false, false) => Interval::BOTTOM,
            (true, false) => Interval::singleton(0),
            (false, true) => Interval::singleton(1),
            (true, true) => Interval::new(0, 1),
        }
    }

    fn pure_eval(&mut self, e: &Expr, s: &AbstractState) -> Interval {
        self.quiet(|a| a.eval(e, s))
    }

    /// The part of `s` in which `e` evaluates to `truth`.
    pub fn refine(&mut self, e: &Expr, truth: bool, s: AbstractState) -> AbstractState {
        if s.is_bottom() {
            return s;
        }
        match &e.kind {
            ExprKind::Unary(UnOp::Not, x) => self.refine(x, !truth, s),
            ExprKind::Binary(BinOp::And, l, r) => {
                if truth {
                    let s1 = self.refine(l, true, s);
                    self.refine(r, true, s1)
                } else {
                    let lf = self.refine(l, false, s.clone());
                    let lt = self.refine(l, true, s);
                    lf.join(&self.refine(r, false, lt))
                }
            }
            ExprKind::Binary(BinOp::Or, l, r) => {
                if truth {
                    let lt = self.refine(l, true, s.clone());
                    let lf = self.refine(l, false, s);
                    lt.join(&self.refine(r, true, lf))
                } else {
                    let s1 = self.refine(l, false, s);
                    self.refine(r, false, s1)
                }
            }
            ExprKind::Binary(op, l, r) if op.is_comparison() => {
                let op = if truth { *op } else { op.negated().expect("comparison") };
                let (li, ri) = (self.pure_eval(l, &s), self.pure_eval(r, &s));
                self.refine_cmp(op, Some(l), li, Some(r), ri, s)
            }
            _ => {
                let v = self.pure_eval(e, &s);
                let op = if truth { BinOp::Ne } else { BinOp::Eq };
                self.refine_cmp(op, Some(e), v, None, Interval::singleton(0), s)
            }
        }
    }

    fn refine_cmp(
        &mut self,
        op: BinOp,
        l: Option<&Expr>,
        li: Interval,
        r: Option<&Expr>,
        ri: Interval,
        s: AbstractState,
    ) -> AbstractState {
        let (Some((llo, lhi)), Some((rlo, rhi))) = (li.bounds(), ri.bounds()) else {
            return AbstractState::bottom();
        };
        let below = |v: i128| Interval::new(i128::MIN, v);
        let above = |v: i128| Interval::new(v, i128::MAX);
        let shave = |i: Interval, c: Option<i128>| match (i.bounds(), c) {
            (Some((lo, hi)), Some(c)) if lo == c => Interval::new(lo + 1, hi),
            (Some((lo, hi)), Some(c)) if hi == c => Interval::new(lo, hi - 1),
            _ => i,
        };
        let (lt, rt) = match op {
            BinOp::Lt => (li.meet(&below(rhi.saturating_sub(1))), ri.meet(&above(llo.saturating_add(1)))),
            BinOp::Le => (li.meet(&below(rhi)), ri.meet(&above(llo))),
            BinOp::Gt => (li.meet(&above(rlo.saturating_add(1))), ri.meet(&below(lhi.saturating_sub(1)))),
            BinOp::Ge => (li.meet(&above(rlo)), ri.meet(&below(lhi))),
            BinOp::Eq => (li.meet(&ri), li.meet(&ri)),
            BinOp::Ne => (shave(li, ri.as_singleton()), shave(ri, li.as_singleton())),
            _ => unreachable!("comparison operator"),
        };
        if lt.is_bottom() || rt.is_bottom() {
            return AbstractState::bottom();
        }
        let s = match l {
            Some(l) => self.backward(l, lt, s),
            None => s,
        };
        match r {
            Some(r) => self.backward(r, rt, s),
            None => s,
        }
    }

    /// Narrows the variables of `e` so that `e` lies in `target`. Goes
    /// through negation, `+` and `-` only where no wrap-around is possible.
    fn backward(&mut self, e: &Expr, target: Interval, s: AbstractState) -> AbstractState {
        if s.is_bottom() {
            return s;
        }
        let cur = self.pure_eval(e, &s);
        let t = cur.meet(&target);
        if t.is_bottom() {
            return AbstractState::bottom();
        }
        let range = width_range(self.width(e));
        match &e.kind {
            ExprKind::Var(_) => match self.res.use_of(e.pos) {
                Some(v) => s.restrict(v, t),
                None => s,
            },
            ExprKind::Unary(UnOp::Neg, x) => {
                let xi = self.pure_eval(x, &s);
                if xi.neg().is_subset_of(&range) {
                    self.backward(x, t.neg(), s)
                } else {
                    s
                }
            }
            ExprKind::Binary(op @ (BinOp::Add | BinOp::Sub), l, r) => {
                let (li, ri) = (self.pure_eval(l, &s), self.pure_eval(r, &s));
                let exact = if *op == BinOp::Add { li.add(&ri) } else { li.sub(&ri) };
                if !exact.is_subset_of(&range) {
                    return s;
                }
                let lt = if *op == BinOp::Add { t.sub(&ri) } else { t.add(&ri) };
                let s = self.backward(l, lt, s);
                let li = self.pure_eval(l, &s);
                let rt = if *op == BinOp::Add { t.sub(&li) } else { li.sub(&t) };
                self.backward(r, rt, s)
            }
            _ => s,
        }
    }

    fn exec_block(&mut self, block: &[Stmt], s: AbstractState) -> AbstractState {
        block.iter().fold(s, |s, stmt| self.exec(stmt, s))
    }

    fn exec_scoped(&mut self, block: &[Stmt], s: AbstractState) -> AbstractState {
        let mut out = self.exec_block(block, s);
        for v in self.res.declared_in(block) {
            out.set(v, VarState::Uninitialized);
        }
        out
    }

    fn assign(&mut self, stmt: &Stmt, v: VarId, value: Interval, mut s: AbstractState) -> AbstractState {
        if value.is_bottom() {
            return AbstractState::bottom();
        }
        let info = &self.res.vars[v];
        let (name, ty) = (info.name.clone(), info.ty);
        let stored = self.convert(stmt.pos, &name, value, ty);
        s.set(v, VarState::Value(stored));
        s
    }

    fn havoc(&mut self, v: VarId, args: &[Expr], mut s: AbstractState) -> AbstractState {
        for a in args {
            if self.eval(a, &s).is_bottom() {
                return AbstractState::bottom();
            }
        }
        s.set(v, VarState::Value(type_range(self.res.vars[v].ty)));
        s
    }

    fn exec(&mut self, stmt: &Stmt, s: AbstractState) -> AbstractState {
        if s.is_bottom() {
            return s;
        }
        self.updates += 1;
        match &stmt.kind {
            StmtKind::Decl { init, .. } => {
                let v = self.res.decl_of(stmt.pos);
                match init {
                    None => {
                        let mut s = s;
                        s.set(v, VarState::Uninitialized);
                        s
                    }
                    Some(Init::Expr(e)) => {
                        let value = self.eval(e, &s);
                        self.assign(stmt, v, value, s)
                    }
                    Some(Init::Extern(call)) => self.havoc(v, &call.args, s),
                }
            }
            StmtKind::Assign { value, .. } => {
                let i = self.eval(value, &s);
                match self.res.use_of(stmt.pos) {
                    Some(v) => self.assign(stmt, v, i, s),
                    None => AbstractState::bottom(),
                }
            }
            StmtKind::ExternAssign { call, .. } => match self.res.use_of(stmt.pos) {
                Some(v) => self.havoc(v, &call.args, s),
                None => AbstractState::bottom(),
            },
            StmtKind::Call(call) => {
                for a in &call.args {
                    if self.eval(a, &s).is_bottom() {
                        return AbstractState::bottom();
                    }
                }
                s
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                if self.eval(cond, &s).is_bottom() {
                    return AbstractState::bottom();
                }
                let st = self.quiet(|a| a.refine(cond, true, s.clone()));
                let sf = self.quiet(|a| a.refine(cond, false, s));
                let a = self.exec_scoped(then_branch, st);
                let b = self.exec_scoped(else_branch, sf);
                a.join(&b)
            }
            StmtKind::While { cond, body } => self.exec_while(cond, body, s),
            StmtKind::Assert(e) => {
                if self.eval(e, &s).is_bottom() {
                    return AbstractState::bottom();
                }
                let holds = self.quiet(|a| a.refine(e, true, s.clone()));
                let fails = self.quiet(|a| a.refine(e, false, s));
                let verdict = Verdict::classify(fails.is_bottom(), holds.is_bottom());
                self.report(stmt.pos, Kind::Assert, verdict, || match verdict {
                    Verdict::ProvenSafe => format!("assertion `{e}` holds"),
                    Verdict::ProvenUnsafe => format!("assertion `{e}` always fails"),
                    _ => format!("assertion `{e}` may fail"),
                });
                holds
            }
        }
    }

    fn exec_while(&mut self, cond: &Expr, body: &[Stmt], entry: AbstractState) -> AbstractState {
        let mut head = entry.clone();
        let saved = std::mem::replace(&mut self.collect, false);
        for k in 1.. {
            let inside = self.refine(cond, true, head.clone());
            let out = self.exec_scoped(body, inside);
            let mut next = entry.join(&out);
            if k > WIDENING_DELAY {
                next = head.widen(&next, &self.types);
            }
            if next.le(&head) {
                break;
            }
            head = next;
        }
        self.collect = saved;
        self.eval(cond, &head);
        let inside = self.quiet(|a| a.refine(cond, true, head.clone()));
        self.exec_scoped(body, inside);
        self.quiet(|a| a.refine(cond, false, head))
    }
}

pub fn analyze_function(f: &Function, hw: &HardwareTarget) -> FunctionAnalysis {
    let res = Resolution::build(f);
    let (findings, updates) = {
        let mut a = Analyzer::new(&res, &f.name, hw);
        a.exec_block(&f.body, AbstractState::initial(res.vars.len()));
        (a.findings(), a.updates)
    };
    let mut findings = findings;
    for p in &res.problems {
        findings.push(Finding {
            function: f.name.clone(),
            kind: Kind::UninitRead,
            pos: p.pos,
            verdict: Verdict::SyntacticViolation,
            message: p.message.clone(),
        });
    }
    findings.sort_by_key(|f| (f.pos, f.kind));
    FunctionAnalysis {
        function: f.name.clone(),
        findings,
        state_updates: updates,
        resolution: res,
    }
}

/// All findings of all functions (proven-safe ones included), ordered by
/// position then kind.
pub fn analyze(p: &Program, hw: &HardwareTarget) -> Vec<Finding> {
    let mut out: Vec<Finding> = p.functions.iter().flat_map(|f| analyze_function(f, hw).findings).collect();
    out.sort_by(|a, b| (a.pos, a.kind).cmp(&(b.pos, b.kind)));
    out
}

/// Evaluates `e` in `s` and returns its interval with the findings it raises.
pub fn eval_expr(
    e: &Expr,
    s: &AbstractState,
    res: &Resolution,
    hw: &HardwareTarget,
) -> (Interval, Vec<Finding>) {
    let mut a = Analyzer::new(res, "", hw);
    let i = a.eval(e, s);
    (i, a.findings())
}
