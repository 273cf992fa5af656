//! Reference interpreter over the AST, written against names and scopes
//! rather than the analyzer's resolution tables.

#![allow(dead_code)]

pub mod oracles;

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use minicheck::ast::{BinOp, ExprKind, Function, Init, IntType, Pos, Stmt, StmtKind, UnOp};
use minicheck::ast::Expr;
use minicheck::Kind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bad {
    pub kind: Kind,
    pub pos: Pos,
}

#[derive(Debug, Default)]
pub struct Run {
    pub bad: Vec<Bad>,
    pub trapped: bool,
    pub out_of_steps: bool,
}

impl Run {
    pub fn hit(&self, kind: Kind, pos: Pos) -> bool {
        self.bad.iter().any(|b| b.kind == kind && b.pos == pos)
    }
}

enum Stop {
    Trap,
    Steps,
}

#[derive(Clone, Copy)]
struct Slot {
    ty: IntType,
    value: Option<i128>,
}

struct Interp<'h> {
    int_bits: u32,
    scopes: Vec<HashMap<String, Slot>>,
    havoc: &'h mut dyn FnMut(&str, IntType) -> i64,
    run: Run,
    steps: usize,
    budget: usize,
}

fn range(bits: u32) -> (i128, i128) {
    (-(1i128 << (bits - 1)), (1i128 << (bits - 1)) - 1)
}

fn wrap_to(v: i128, bits: u32) -> i128 {
    let m = 1i128 << bits;
    let r = v.rem_euclid(m);
    if r >= m / 2 {
        r - m
    } else {
        r
    }
}

impl Interp<'_> {
    fn lookup(&self, name: &str) -> Option<&Slot> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn lookup_mut(&mut self, name: &str) -> Option<&mut Slot> {
        self.scopes.iter_mut().rev().find_map(|s| s.get_mut(name))
    }

    fn bad(&mut self, kind: Kind, pos: Pos) {
        self.run.bad.push(Bad { kind, pos });
    }

    fn trap(&mut self, kind: Kind, pos: Pos) -> Stop {
        self.bad(kind, pos);
        self.run.trapped = true;
        Stop::Trap
    }

    fn step(&mut self) -> Result<(), Stop> {
        if self.steps == self.budget {
            self.run.out_of_steps = true;
            return Err(Stop::Steps);
        }
        self.steps += 1;
        Ok(())
    }

    /// Width after the usual conversions: at least `int`, wider variables
    /// and oversized literals widen it.
    fn width(&self, e: &Expr) -> u32 {
        let int = self.int_bits;
        match &e.kind {
            ExprKind::Lit(v) => {
                if *v as i128 <= range(int).1 {
                    int
                } else {
                    int.max(64)
                }
            }
            ExprKind::Var(n) => self.lookup(n).map_or(int, |s| s.ty.bits().max(int)),
            ExprKind::Unary(UnOp::Neg, x) => self.width(x),
            ExprKind::Unary(UnOp::Not, _) => int,
            ExprKind::Binary(op, l, r) => match op {
                BinOp::Shl | BinOp::Shr => self.width(l),
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => self.width(l).max(self.width(r)),
                _ => int,
            },
        }
    }

    fn arith(&mut self, v: i128, bits: u32, pos: Pos) -> i128 {
        let (lo, hi) = range(bits);
        if v < lo || v > hi {
            self.bad(Kind::SignedOverflow, pos);
            wrap_to(v, bits)
        } else {
            v
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<i128, Stop> {
        let p = e.pos;
        match &e.kind {
            ExprKind::Lit(v) => Ok(*v as i128),
            ExprKind::Var(n) => match self.lookup(n).and_then(|s| s.value) {
                Some(v) => Ok(v),
                None => Err(self.trap(Kind::UninitRead, p)),
            },
            ExprKind::Unary(UnOp::Neg, x) => {
                let v = self.eval(x)?;
                let w = self.width(e);
                Ok(self.arith(-v, w, p))
            }
            ExprKind::Unary(UnOp::Not, x) => Ok(i128::from(self.eval(x)? == 0)),
            ExprKind::Binary(BinOp::And, l, r) => {
                if self.eval(l)? == 0 {
                    return Ok(0);
                }
                Ok(i128::from(self.eval(r)? != 0))
            }
            ExprKind::Binary(BinOp::Or, l, r) => {
                if self.eval(l)? != 0 {
                    return Ok(1);
                }
                Ok(i128::from(self.eval(r)? != 0))
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                let w = self.width(e);
                let v = match op {
                    BinOp::Add => self.arith(a + b, w, p),
                    BinOp::Sub => self.arith(a - b, w, p),
                    BinOp::Mul => self.arith(a * b, w, p),
                    BinOp::Div | BinOp::Rem if b == 0 => return Err(self.trap(Kind::DivZero, p)),
                    BinOp::Div => self.arith(a / b, w, p),
                    BinOp::Rem => {
                        // the quotient MIN / -1 is not representable
                        if b == -1 && a == range(w).0 {
                            self.bad(Kind::SignedOverflow, p);
                        }
                        a % b
                    }
                    BinOp::Shl | BinOp::Shr if b < 0 => return Err(self.trap(Kind::ShiftNegative, p)),
                    BinOp::Shl | BinOp::Shr if b >= w as i128 => return Err(self.trap(Kind::ShiftAmount, p)),
                    BinOp::Shl => self.arith(a * (1i128 << b), w, p),
                    BinOp::Shr => a.div_euclid(1i128 << b),
                    BinOp::Lt => i128::from(a < b),
                    BinOp::Le => i128::from(a <= b),
                    BinOp::Gt => i128::from(a > b),
                    BinOp::Ge => i128::from(a >= b),
                    BinOp::Eq => i128::from(a == b),
                    BinOp::Ne => i128::from(a != b),
                    BinOp::And | BinOp::Or => unreachable!(),
                };
                Ok(v)
            }
        }
    }

    fn store(&mut self, name: &str, v: i128, pos: Pos) -> Result<(), Stop> {
        let Some(ty) = self.lookup(name).map(|s| s.ty) else {
            return Err(self.trap(Kind::UninitRead, pos));
        };
        let v = if v < ty.min() || v > ty.max() {
            self.bad(Kind::ConvOverflow, pos);
            wrap_to(v, ty.bits())
        } else {
            v
        };
        self.lookup_mut(name).unwrap().value = Some(v);
        Ok(())
    }

    fn external(&mut self, ty: IntType, args: &[Expr], name: &str) -> Result<i128, Stop> {
        for a in args {
            self.eval(a)?;
        }
        Ok(((self.havoc)(name, ty) as i128).clamp(ty.min(), ty.max()))
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<(), Stop> {
        self.scopes.push(HashMap::new());
        let r = stmts.iter().try_for_each(|s| self.stmt(s));
        self.scopes.pop();
        r
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), Stop> {
        self.step()?;
        match &s.kind {
            StmtKind::Decl { ty, name, init } => {
                let value = match init {
                    None => None,
                    Some(Init::Expr(e)) => {
                        let v = self.eval(e)?;
                        if v < ty.min() || v > ty.max() {
                            self.bad(Kind::ConvOverflow, s.pos);
                        }
                        Some(wrap_to(v, ty.bits()))
                    }
                    Some(Init::Extern(c)) => Some(self.external(*ty, &c.args, name)?),
                };
                let scope = self.scopes.last_mut().unwrap();
                scope.insert(name.clone(), Slot { ty: *ty, value });
                Ok(())
            }
            StmtKind::Assign { name, value } => {
                let v = self.eval(value)?;
                self.store(name, v, s.pos)
            }
            StmtKind::ExternAssign { name, call } => {
                let Some(ty) = self.lookup(name).map(|x| x.ty) else {
                    return Err(self.trap(Kind::UninitRead, s.pos));
                };
                let v = self.external(ty, &call.args, name)?;
                self.lookup_mut(name).unwrap().value = Some(v);
                Ok(())
            }
            StmtKind::Call(c) => c.args.iter().try_for_each(|a| self.eval(a).map(drop)),
            StmtKind::If { cond, then_branch, else_branch } => {
                if self.eval(cond)? != 0 {
                    self.block(then_branch)
                } else {
                    self.block(else_branch)
                }
            }
            StmtKind::While { cond, body } => {
                while self.eval(cond)? != 0 {
                    self.block(body)?;
                    self.step()?;
                }
                Ok(())
            }
            StmtKind::Assert(e) => {
                if self.eval(e)? == 0 {
                    Err(self.trap(Kind::Assert, s.pos))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Runs `f`; `havoc(variable, type)` answers every external call.
pub fn run(f: &Function, int_bits: u32, budget: usize, havoc: &mut dyn FnMut(&str, IntType) -> i64) -> Run {
    let mut it = Interp {
        int_bits,
        scopes: Vec::new(),
        havoc,
        run: Run::default(),
        steps: 0,
        budget,
    };
    let _ = it.block(&f.body);
    it.run
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../minicheck/tests/fixtures")
}

pub fn lamp_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/lamp")
}

/// Every MiniC program used by the tests, as `(name, source)`.
pub fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "mc"))
        .collect();
    paths.push(lamp_dir().join("src/lamp.mc"));
    paths.push(lamp_dir().join("fixed/src/lamp.mc"));
    paths.sort();
    for p in paths {
        out.push((p.display().to_string(), std::fs::read_to_string(&p).unwrap()));
    }
    out
}
