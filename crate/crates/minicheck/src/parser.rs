//! Lexer and recursive-descent parser for MiniC.
//!
//! ```text
//! program  := function*
//! function := "void" IDENT "(" "void"? ")" block
//! block    := "{" stmt* "}"
//! stmt     := TYPE IDENT ("=" (call | expr))? ";"
//!           | IDENT "=" (call | expr) ";"
//!           | call ";"
//!           | "if" "(" expr ")" body ("else" (body | if-stmt))?
//!           | "while" "(" expr ")" body
//!           | ("assert" | "static_assert") "(" expr ")" ";"
//! body     := block | stmt
//! ```

use thiserror::Error;

use crate::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct SyntaxError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl SyntaxError {
    fn at(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Punct(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

const PUNCT: [&str; 23] = [
    "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "(", ")", "{", "}", ";", ",", "=", "+", "-", "*", "/", "%", "<",
    ">", "!",
];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32| {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos::new(line, col);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col);
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col);
            advance(&mut i, &mut line, &mut col);
            loop {
                if i >= chars.len() {
                    return Err(SyntaxError::at(pos, "unterminated comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance(&mut i, &mut line, &mut col);
                    advance(&mut i, &mut line, &mut col);
                    break;
                }
                advance(&mut i, &mut line, &mut col);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                advance(&mut i, &mut line, &mut col);
            }
            toks.push((Tok::Ident(s), pos));
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                s.push(chars[i]);
                advance(&mut i, &mut line, &mut col);
            }
            let v = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
                i64::from_str_radix(hex, 16)
            } else {
                s.parse::<i64>()
            }
            .map_err(|_| SyntaxError::at(pos, format!("invalid integer literal `{s}`")))?;
            toks.push((Tok::Int(v), pos));
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let Some(p) = PUNCT.iter().find(|p| rest.starts_with(**p)) else {
                return Err(SyntaxError::at(pos, format!("unexpected character `{c}`")));
            };
            for _ in 0..p.len() {
                advance(&mut i, &mut line, &mut col);
            }
            toks.push((Tok::Punct(p), pos));
        }
    }
    toks.push((Tok::Eof, Pos::new(line, col)));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

const KEYWORDS: [&str; 9] = ["void", "if", "else", "while", "assert", "static_assert", "int8", "int16", "int32"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.at + n).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn expect(&mut self, p: &str) -> Result<Pos, SyntaxError> {
        if self.is_punct(p) {
            Ok(self.bump().1)
        } else {
            Err(SyntaxError::at(self.pos(), format!("expected `{p}`, found {}", self.peek().describe())))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let pos = self.bump().1;
                Ok((s, pos))
            }
            t => Err(SyntaxError::at(self.pos(), format!("expected identifier, found {}", t.describe()))),
        }
    }

    fn program(&mut self) -> Result<Program, SyntaxError> {
        let mut functions = Vec::new();
        while *self.peek() != Tok::Eof {
            let pos = self.pos();
            if !self.is_keyword("void") {
                return Err(SyntaxError::at(pos, format!("expected `void`, found {}", self.peek().describe())));
            }
            self.bump();
            let (name, _) = self.ident()?;
            self.expect("(")?;
            if self.is_keyword("void") {
                self.bump();
            }
            self.expect(")")?;
            let body = self.block()?;
            if functions.iter().any(|f: &Function| f.name == name) {
                return Err(SyntaxError::at(pos, format!("function `{name}` defined twice")));
            }
            functions.push(Function { pos, name, body });
        }
        Ok(Program { functions })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        self.expect("{")?;
        let mut out = Vec::new();
        while !self.is_punct("}") {
            if *self.peek() == Tok::Eof {
                return Err(SyntaxError::at(self.pos(), "expected `}`, found end of input"));
            }
            out.push(self.stmt()?);
        }
        self.bump();
        Ok(out)
    }

    fn body(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        if self.is_punct("{") {
            self.block()
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn call_args(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.is_punct(")") {
            loop {
                args.push(self.expr()?);
                if self.is_punct(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(")")?;
        Ok(args)
    }

    fn is_call_ahead(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()))
            && matches!(self.peek_at(1), Tok::Punct("("))
    }

    fn call(&mut self) -> Result<Call, SyntaxError> {
        let (func, _) = self.ident()?;
        let args = self.call_args()?;
        Ok(Call { func, args })
    }

    fn stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Ident(k) if IntType::from_name(&k).is_some() => {
                self.bump();
                let ty = IntType::from_name(&k).expect("checked");
                let (name, _) = self.ident()?;
                let init = if self.is_punct("=") {
                    self.bump();
                    Some(if self.is_call_ahead() {
                        Init::Extern(self.call()?)
                    } else {
                        Init::Expr(self.expr()?)
                    })
                } else {
                    None
                };
                self.expect(";")?;
                StmtKind::Decl { ty, name, init }
            }
            Tok::Ident(k) if k == "if" => {
                self.bump();
                self.expect("(")?;
                let cond = self.expr()?;
                self.expect(")")?;
                let then_branch = self.body()?;
                let else_branch = if self.is_keyword("else") {
                    self.bump();
                    self.body()?
                } else {
                    Vec::new()
                };
                StmtKind::If { cond, then_branch, else_branch }
            }
            Tok::Ident(k) if k == "while" => {
                self.bump();
                self.expect("(")?;
                let cond = self.expr()?;
                self.expect(")")?;
                StmtKind::While { cond, body: self.body()? }
            }
            Tok::Ident(k) if k == "assert" || k == "static_assert" => {
                self.bump();
                self.expect("(")?;
                let e = self.expr()?;
                self.expect(")")?;
                self.expect(";")?;
                StmtKind::Assert(e)
            }
            Tok::Ident(_) if self.is_call_ahead() => {
                let c = self.call()?;
                self.expect(";")?;
                StmtKind::Call(c)
            }
            Tok::Ident(_) => {
                let (name, _) = self.ident()?;
                self.expect("=")?;
                let kind = if self.is_call_ahead() {
                    StmtKind::ExternAssign { name, call: self.call()? }
                } else {
                    StmtKind::Assign { name, value: self.expr()? }
                };
                self.expect(";")?;
                kind
            }
            t => return Err(SyntaxError::at(pos, format!("expected a statement, found {}", t.describe()))),
        };
        Ok(Stmt { pos, kind })
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> Result<Expr, SyntaxError> {
        const LEVELS: [&[(&str, BinOp)]; 7] = [
            &[("||", BinOp::Or)],
            &[("&&", BinOp::And)],
            &[("==", BinOp::Eq), ("!=", BinOp::Ne)],
            &[("<", BinOp::Lt), ("<=", BinOp::Le), (">", BinOp::Gt), (">=", BinOp::Ge)],
            &[("<<", BinOp::Shl), (">>", BinOp::Shr)],
            &[("+", BinOp::Add), ("-", BinOp::Sub)],
            &[("*", BinOp::Mul), ("/", BinOp::Div), ("%", BinOp::Rem)],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let Some(&(_, op)) = LEVELS[level].iter().find(|(s, _)| self.is_punct(s)) else {
                return Ok(lhs);
            };
            let pos = self.bump().1;
            let rhs = self.binary(level + 1)?;
            lhs = Expr::binary(pos, op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        let pos = self.pos();
        if self.is_punct("-") {
            self.bump();
            return Ok(Expr::unary(pos, UnOp::Neg, self.unary()?));
        }
        if self.is_punct("!") {
            self.bump();
            return Ok(Expr::unary(pos, UnOp::Not, self.unary()?));
        }
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::lit(pos, v))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Ident(_) if self.is_call_ahead() => Err(SyntaxError::at(
                pos,
                "calls may only appear as a statement or as the whole right-hand side of an assignment",
            )),
            Tok::Ident(_) => {
                let (name, pos) = self.ident()?;
                Ok(Expr::var(pos, name))
            }
            t => Err(SyntaxError::at(pos, format!("expected an expression, found {}", t.describe()))),
        }
    }
}

pub fn parse_program(src: &str) -> Result<Program, SyntaxError> {
    let toks = lex(src)?;
    Parser { toks, at: 0 }.program()
}
