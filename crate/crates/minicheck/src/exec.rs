//! Concrete execution with C-like wrapping semantics.
//!
//! Signed overflow and narrowing stores wrap and execution continues;
//! division by zero, invalid shift amounts, reads of uninitialized or
//! undeclared variables and failed assertions stop the run.

use crate::ast::*;
use crate::finding::Kind;
use crate::resolve::{Resolution, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    pub kind: Kind,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Finished,
    Trapped(Event),
    OutOfSteps,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    /// Every bad event in order; a trapping event is the last one.
    pub events: Vec<Event>,
    pub outcome: Outcome,
    pub steps: usize,
}

impl Execution {
    pub fn hit(&self, kind: Kind, pos: Pos) -> bool {
        self.events.iter().any(|e| e.kind == kind && e.pos == pos)
    }
}

enum Stop {
    Trap(Event),
    Steps,
}

struct Machine<'a, H> {
    res: &'a Resolution,
    int_bits: u32,
    env: Vec<Option<i128>>,
    havoc: H,
    events: Vec<Event>,
    steps: usize,
    budget: usize,
}

impl<H: FnMut(VarId, Pos) -> i64> Machine<'_, H> {
    fn tick(&mut self) -> Result<(), Stop> {
        if self.steps >= self.budget {
            return Err(Stop::Steps);
        }
        self.steps += 1;
        Ok(())
    }

    fn note(&mut self, kind: Kind, pos: Pos) {
        self.events.push(Event { kind, pos });
    }

    fn trap(&mut self, kind: Kind, pos: Pos) -> Stop {
        let e = Event { kind, pos };
        self.events.push(e);
        Stop::Trap(e)
    }

    fn fit(&mut self, v: i128, bits: u32, pos: Pos) -> i128 {
        if v < signed_min(bits) || v > signed_max(bits) {
            self.note(Kind::SignedOverflow, pos);
            wrap(v, bits)
        } else {
            v
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<i128, Stop> {
        match &e.kind {
            ExprKind::Lit(v) => Ok(*v as i128),
            ExprKind::Var(_) => match self.res.use_of(e.pos) {
                None => Err(self.trap(Kind::UninitRead, e.pos)),
                Some(v) => match self.env[v] {
                    Some(x) => Ok(x),
                    None => Err(self.trap(Kind::UninitRead, e.pos)),
                },
            },
            ExprKind::Unary(UnOp::Neg, x) => {
                let a = self.eval(x)?;
                let bits = self.res.width(e, self.int_bits);
                Ok(self.fit(-a, bits, e.pos))
            }
            ExprKind::Unary(UnOp::Not, x) => Ok((self.eval(x)? == 0) as i128),
            ExprKind::Binary(BinOp::And, l, r) => Ok((self.eval(l)? != 0 && self.eval(r)? != 0) as i128),
            ExprKind::Binary(BinOp::Or, l, r) => Ok((self.eval(l)? != 0 || self.eval(r)? != 0) as i128),
            ExprKind::Binary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                let bits = self.res.width(e, self.int_bits);
                let p = e.pos;
                Ok(match op {
                    BinOp::Add => self.fit(a + b, bits, p),
                    BinOp::Sub => self.fit(a - b, bits, p),
                    BinOp::Mul => self.fit(a * b, bits, p),
                    BinOp::Div | BinOp::Rem if b == 0 => return Err(self.trap(Kind::DivZero, p)),
                    BinOp::Div => self.fit(a / b, bits, p),
                    BinOp::Rem => {
                        if a == signed_min(bits) && b == -1 {
                            self.note(Kind::SignedOverflow, p);
                        }
                        a % b
                    }
                    BinOp::Shl | BinOp::Shr if b < 0 => return Err(self.trap(Kind::ShiftNegative, p)),
                    BinOp::Shl | BinOp::Shr if b >= bits as i128 => return Err(self.trap(Kind::ShiftAmount, p)),
                    BinOp::Shl => self.fit(a << b, bits, p),
                    BinOp::Shr => a >> b,
                    BinOp::Lt => (a < b) as i128,
                    BinOp::Le => (a <= b) as i128,
                    BinOp::Gt => (a > b) as i128,
                    BinOp::Ge => (a >= b) as i128,
                    BinOp::Eq => (a == b) as i128,
                    BinOp::Ne => (a != b) as i128,
                    BinOp::And | BinOp::Or => unreachable!("short-circuit operators handled above"),
                })
            }
        }
    }

    fn store(&mut self, v: VarId, value: i128, pos: Pos) {
        let ty = self.res.vars[v].ty;
        let stored = if value < ty.min() || value > ty.max() {
            self.note(Kind::ConvOverflow, pos);
            wrap(value, ty.bits())
        } else {
            value
        };
        self.env[v] = Some(stored);
    }

    fn havoc(&mut self, v: VarId, pos: Pos, args: &[Expr]) -> Result<(), Stop> {
        for a in args {
            self.eval(a)?;
        }
        let ty = self.res.vars[v].ty;
        let raw = (self.havoc)(v, pos) as i128;
        self.env[v] = Some(raw.clamp(ty.min(), ty.max()));
        Ok(())
    }

    fn block(&mut self, block: &[Stmt]) -> Result<(), Stop> {
        for s in block {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), Stop> {
        self.tick()?;
        match &s.kind {
            StmtKind::Decl { init, .. } => {
                let v = self.res.decl_of(s.pos);
                match init {
                    None => self.env[v] = None,
                    Some(Init::Expr(e)) => {
                        let x = self.eval(e)?;
                        self.store(v, x, s.pos);
                    }
                    Some(Init::Extern(c)) => self.havoc(v, s.pos, &c.args)?,
                }
            }
            StmtKind::Assign { value, .. } => {
                let x = self.eval(value)?;
                match self.res.use_of(s.pos) {
                    Some(v) => self.store(v, x, s.pos),
                    None => return Err(self.trap(Kind::UninitRead, s.pos)),
                }
            }
            StmtKind::ExternAssign { call, .. } => match self.res.use_of(s.pos) {
                Some(v) => self.havoc(v, s.pos, &call.args)?,
                None => return Err(self.trap(Kind::UninitRead, s.pos)),
            },
            StmtKind::Call(c) => {
                for a in &c.args {
                    self.eval(a)?;
                }
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                if self.eval(cond)? != 0 {
                    self.block(then_branch)?;
                } else {
                    self.block(else_branch)?;
                }
            }
            StmtKind::While { cond, body } => {
                while self.eval(cond)? != 0 {
                    self.block(body)?;
                    self.tick()?;
                }
            }
            StmtKind::Assert(e) => {
                if self.eval(e)? == 0 {
                    return Err(self.trap(Kind::Assert, s.pos));
                }
            }
        }
        Ok(())
    }
}

/// Runs `f` for at most `budget` steps. `havoc` supplies the value of each
/// external call for the receiving variable; values outside the variable's
/// type are clamped into it.
pub fn execute(
    f: &Function,
    res: &Resolution,
    int_bits: u32,
    budget: usize,
    havoc: impl FnMut(VarId, Pos) -> i64,
) -> Execution {
    let mut m = Machine {
        res,
        int_bits,
        env: vec![None; res.vars.len()],
        havoc,
        events: Vec::new(),
        steps: 0,
        budget,
    };
    let outcome = match m.block(&f.body) {
        Ok(()) => Outcome::Finished,
        Err(Stop::Trap(e)) => Outcome::Trapped(e),
        Err(Stop::Steps) => Outcome::OutOfSteps,
    };
    Execution {
        events: m.events,
        outcome,
        steps: m.steps,
    }
}
