//! Name resolution with block scoping, and static operand widths.

use std::collections::HashMap;

use crate::ast::*;

pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub ty: IntType,
    pub decl: Pos,
}

/// A use of a name that is not in scope, or a redeclaration in the same block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeProblem {
    pub pos: Pos,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct Resolution {
    pub vars: Vec<VarInfo>,
    /// Variable reads (keyed by the `Var` node) and assignment targets (keyed by the statement).
    pub uses: HashMap<Pos, Option<VarId>>,
    /// Declarations, keyed by the `Decl` statement.
    pub decls: HashMap<Pos, VarId>,
    /// Variables receiving external values, in order of first appearance.
    pub havoc: Vec<VarId>,
    /// First call site assigning each havoc variable.
    pub havoc_sites: HashMap<VarId, Pos>,
    pub problems: Vec<ScopeProblem>,
}

impl Resolution {
    pub fn build(f: &Function) -> Resolution {
        let mut r = Resolution::default();
        let mut scopes: Vec<Vec<(String, VarId)>> = vec![Vec::new()];
        r.block(&f.body, &mut scopes);
        r
    }

    pub fn use_of(&self, pos: Pos) -> Option<VarId> {
        self.uses.get(&pos).copied().flatten()
    }

    pub fn decl_of(&self, pos: Pos) -> VarId {
        self.decls[&pos]
    }

    /// Variables declared directly in `block`.
    pub fn declared_in(&self, block: &[Stmt]) -> Vec<VarId> {
        block
            .iter()
            .filter(|s| matches!(s.kind, StmtKind::Decl { .. }))
            .map(|s| self.decls[&s.pos])
            .collect()
    }

    fn lookup(scopes: &[Vec<(String, VarId)>], name: &str) -> Option<VarId> {
        scopes
            .iter()
            .rev()
            .find_map(|s| s.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v))
    }

    fn mark_use(&mut self, scopes: &[Vec<(String, VarId)>], pos: Pos, name: &str) -> Option<VarId> {
        let v = Self::lookup(scopes, name);
        if v.is_none() {
            self.problems.push(ScopeProblem {
                pos,
                message: format!("use of undeclared variable `{name}`"),
            });
        }
        self.uses.insert(pos, v);
        v
    }

    fn mark_havoc(&mut self, v: Option<VarId>, site: Pos) {
        if let Some(v) = v {
            if !self.havoc.contains(&v) {
                self.havoc.push(v);
                self.havoc_sites.insert(v, site);
            }
        }
    }

    fn block(&mut self, block: &[Stmt], scopes: &mut Vec<Vec<(String, VarId)>>) {
        for s in block {
            self.stmt(s, scopes);
        }
    }

    fn nested(&mut self, block: &[Stmt], scopes: &mut Vec<Vec<(String, VarId)>>) {
        scopes.push(Vec::new());
        self.block(block, scopes);
        scopes.pop();
    }

    fn stmt(&mut self, s: &Stmt, scopes: &mut Vec<Vec<(String, VarId)>>) {
        match &s.kind {
            StmtKind::Decl { ty, name, init } => {
                match init {
                    Some(Init::Expr(e)) => self.expr(e, scopes),
                    Some(Init::Extern(c)) => c.args.iter().for_each(|a| self.expr(a, scopes)),
                    None => {}
                }
                let scope = scopes.last_mut().expect("scope stack");
                if scope.iter().any(|(n, _)| n == name) {
                    self.problems.push(ScopeProblem {
                        pos: s.pos,
                        message: format!("redeclaration of `{name}` in the same block"),
                    });
                }
                let id = self.vars.len();
                self.vars.push(VarInfo {
                    name: name.clone(),
                    ty: *ty,
                    decl: s.pos,
                });
                scopes.last_mut().expect("scope stack").push((name.clone(), id));
                self.decls.insert(s.pos, id);
                if matches!(init, Some(Init::Extern(_))) {
                    self.mark_havoc(Some(id), s.pos);
                }
            }
            StmtKind::Assign { name, value } => {
                self.expr(value, scopes);
                self.mark_use(scopes, s.pos, name);
            }
            StmtKind::ExternAssign { name, call } => {
                call.args.iter().for_each(|a| self.expr(a, scopes));
                let v = self.mark_use(scopes, s.pos, name);
                self.mark_havoc(v, s.pos);
            }
            StmtKind::Call(c) => c.args.iter().for_each(|a| self.expr(a, scopes)),
            StmtKind::If { cond, then_branch, else_branch } => {
                self.expr(cond, scopes);
                self.nested(then_branch, scopes);
                self.nested(else_branch, scopes);
            }
            StmtKind::While { cond, body } => {
                self.expr(cond, scopes);
                self.nested(body, scopes);
            }
            StmtKind::Assert(e) => self.expr(e, scopes),
        }
    }

    fn expr(&mut self, e: &Expr, scopes: &[Vec<(String, VarId)>]) {
        match &e.kind {
            ExprKind::Lit(_) => {}
            ExprKind::Var(name) => {
                self.mark_use(scopes, e.pos, name);
            }
            ExprKind::Unary(_, x) => self.expr(x, scopes),
            ExprKind::Binary(_, l, r) => {
                self.expr(l, scopes);
                self.expr(r, scopes);
            }
        }
    }

    /// Bit width an expression is evaluated in: operands are promoted to at
    /// least `int_bits`; literals that do not fit `int` are 64-bit.
    pub fn width(&self, e: &Expr, int_bits: u32) -> u32 {
        match &e.kind {
            ExprKind::Lit(v) => {
                if (*v as i128) <= signed_max(int_bits) {
                    int_bits
                } else {
                    64.max(int_bits)
                }
            }
            ExprKind::Var(_) => self
                .use_of(e.pos)
                .map(|v| self.vars[v].ty.bits().max(int_bits))
                .unwrap_or(int_bits),
            ExprKind::Unary(UnOp::Neg, x) => self.width(x, int_bits),
            ExprKind::Unary(UnOp::Not, _) => int_bits,
            ExprKind::Binary(op, _, _) if op.is_comparison() || op.is_logical() => int_bits,
            ExprKind::Binary(BinOp::Shl | BinOp::Shr, l, _) => self.width(l, int_bits),
            ExprKind::Binary(_, l, r) => self.width(l, int_bits).max(self.width(r, int_bits)),
        }
    }
}
