//! Syntax tree of MiniC programs.

use std::fmt;

/// Source position: 1-based line, 0-based column (in characters).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl Pos {
    pub fn new(line: u32, column: u32) -> Self {
        Pos { line, column }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntType {
    Int8,
    Int16,
    Int32,
}

impl IntType {
    pub const ALL: [IntType; 3] = [IntType::Int8, IntType::Int16, IntType::Int32];

    pub fn bits(self) -> u32 {
        match self {
            IntType::Int8 => 8,
            IntType::Int16 => 16,
            IntType::Int32 => 32,
        }
    }

    pub fn min(self) -> i128 {
        signed_min(self.bits())
    }

    pub fn max(self) -> i128 {
        signed_max(self.bits())
    }

    pub fn name(self) -> &'static str {
        match self {
            IntType::Int8 => "int8",
            IntType::Int16 => "int16",
            IntType::Int32 => "int32",
        }
    }

    pub fn from_name(s: &str) -> Option<IntType> {
        IntType::ALL.into_iter().find(|t| t.name() == s)
    }
}

pub fn signed_min(bits: u32) -> i128 {
    -(1i128 << (bits - 1))
}

pub fn signed_max(bits: u32) -> i128 {
    (1i128 << (bits - 1)) - 1
}

/// Two's-complement wrap of `v` into a signed `bits`-wide integer.
pub fn wrap(v: i128, bits: u32) -> i128 {
    let m = 1i128 << bits;
    let r = v.rem_euclid(m);
    if r > signed_max(bits) {
        r - m
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }

    /// The comparison that holds exactly when `self` does not.
    pub fn negated(self) -> Option<BinOp> {
        Some(match self {
            BinOp::Lt => BinOp::Ge,
            BinOp::Le => BinOp::Gt,
            BinOp::Gt => BinOp::Le,
            BinOp::Ge => BinOp::Lt,
            BinOp::Eq => BinOp::Ne,
            BinOp::Ne => BinOp::Eq,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Lit(i64),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

/// An expression; `pos` is the operator token for unary and binary nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub pos: Pos,
    pub kind: ExprKind,
}

impl Expr {
    pub fn lit(pos: Pos, v: i64) -> Self {
        Expr { pos, kind: ExprKind::Lit(v) }
    }

    pub fn var(pos: Pos, name: impl Into<String>) -> Self {
        Expr {
            pos,
            kind: ExprKind::Var(name.into()),
        }
    }

    pub fn unary(pos: Pos, op: UnOp, e: Expr) -> Self {
        Expr {
            pos,
            kind: ExprKind::Unary(op, Box::new(e)),
        }
    }

    pub fn binary(pos: Pos, op: BinOp, l: Expr, r: Expr) -> Self {
        Expr {
            pos,
            kind: ExprKind::Binary(op, Box::new(l), Box::new(r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    pub func: String,
    pub args: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Init {
    Expr(Expr),
    Extern(Call),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Decl { ty: IntType, name: String, init: Option<Init> },
    Assign { name: String, value: Expr },
    /// `x = f(...)` with `f` external: `x` receives an unknown value of its type.
    ExternAssign { name: String, call: Call },
    Call(Call),
    If { cond: Expr, then_branch: Vec<Stmt>, else_branch: Vec<Stmt> },
    While { cond: Expr, body: Vec<Stmt> },
    Assert(Expr),
}

/// A statement; `pos` is its first token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub pos: Pos,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub pos: Pos,
    pub name: String,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub functions: Vec<Function>,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Copy with every position zeroed, for structural comparison.
    pub fn without_positions(&self) -> Program {
        let mut p = self.clone();
        for f in &mut p.functions {
            f.pos = Pos::default();
            strip_block(&mut f.body);
        }
        p
    }

    pub fn statement_count(&self) -> usize {
        self.functions.iter().map(|f| count_stmts(&f.body)).sum()
    }
}

pub fn count_stmts(block: &[Stmt]) -> usize {
    block
        .iter()
        .map(|s| {
            1 + match &s.kind {
                StmtKind::If { then_branch, else_branch, .. } => count_stmts(then_branch) + count_stmts(else_branch),
                StmtKind::While { body, .. } => count_stmts(body),
                _ => 0,
            }
        })
        .sum()
}

fn strip_block(block: &mut [Stmt]) {
    for s in block {
        s.pos = Pos::default();
        match &mut s.kind {
            StmtKind::Decl { init, .. } => match init {
                Some(Init::Expr(e)) => strip_expr(e),
                Some(Init::Extern(c)) => c.args.iter_mut().for_each(strip_expr),
                None => {}
            },
            StmtKind::Assign { value, .. } => strip_expr(value),
            StmtKind::ExternAssign { call, .. } | StmtKind::Call(call) => call.args.iter_mut().for_each(strip_expr),
            StmtKind::If { cond, then_branch, else_branch } => {
                strip_expr(cond);
                strip_block(then_branch);
                strip_block(else_branch);
            }
            StmtKind::While { cond, body } => {
                strip_expr(cond);
                strip_block(body);
            }
            StmtKind::Assert(e) => strip_expr(e),
        }
    }
}

fn strip_expr(e: &mut Expr) {
    e.pos = Pos::default();
    match &mut e.kind {
        ExprKind::Unary(_, x) => strip_expr(x),
        ExprKind::Binary(_, l, r) => {
            strip_expr(l);
            strip_expr(r);
        }
        ExprKind::Lit(_) | ExprKind::Var(_) => {}
    }
}

// ---------------------------------------------------------------------------
// unparsing

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Lit(v) => write!(f, "{v}"),
            ExprKind::Var(n) => f.write_str(n),
            ExprKind::Unary(UnOp::Neg, e) => write!(f, "-({e})"),
            ExprKind::Unary(UnOp::Not, e) => write!(f, "!({e})"),
            ExprKind::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

impl fmt::Display for Call {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.func)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

fn write_block(f: &mut fmt::Formatter<'_>, block: &[Stmt], depth: usize) -> fmt::Result {
    for s in block {
        write_stmt(f, s, depth)?;
    }
    Ok(())
}

fn write_stmt(f: &mut fmt::Formatter<'_>, s: &Stmt, depth: usize) -> fmt::Result {
    let pad = "    ".repeat(depth);
    match &s.kind {
        StmtKind::Decl { ty, name, init } => match init {
            None => writeln!(f, "{pad}{} {name};", ty.name()),
            Some(Init::Expr(e)) => writeln!(f, "{pad}{} {name} = {e};", ty.name()),
            Some(Init::Extern(c)) => writeln!(f, "{pad}{} {name} = {c};", ty.name()),
        },
        StmtKind::Assign { name, value } => writeln!(f, "{pad}{name} = {value};"),
        StmtKind::ExternAssign { name, call } => writeln!(f, "{pad}{name} = {call};"),
        StmtKind::Call(c) => writeln!(f, "{pad}{c};"),
        StmtKind::If { cond, then_branch, else_branch } => {
            writeln!(f, "{pad}if ({cond}) {{")?;
            write_block(f, then_branch, depth + 1)?;
            if else_branch.is_empty() {
                writeln!(f, "{pad}}}")
            } else {
                writeln!(f, "{pad}}} else {{")?;
                write_block(f, else_branch, depth + 1)?;
                writeln!(f, "{pad}}}")
            }
        }
        StmtKind::While { cond, body } => {
            writeln!(f, "{pad}while ({cond}) {{")?;
            write_block(f, body, depth + 1)?;
            writeln!(f, "{pad}}}")
        }
        StmtKind::Assert(e) => writeln!(f, "{pad}assert({e});"),
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, func) in self.functions.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "void {}()\n{{", func.name)?;
            write_block(f, &func.body, 1)?;
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}
