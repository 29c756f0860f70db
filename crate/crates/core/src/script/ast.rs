//! Recursive-descent parser for the analyzed JavaScript subset. Statements
//! that fail to parse are skipped to the next `;`/`}` so surrounding junk
//! (analytics snippets, vendor code) cannot hide the interesting parts.

use super::lexer::{lex, Tok};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Expr {
    Str { value: String, had_hex: bool },
    Num(f64),
    Ident(String),
    Array(Vec<Expr>),
    Member(Box<Expr>, String),
    Index(Box<Expr>, Box<Expr>),
    Call(Box<Expr>, Vec<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Unary(char, Box<Expr>),
    Assign(Box<Expr>, Box<Expr>),
    OpAssign(BinOp, Box<Expr>, Box<Expr>),
    PostIncr(Box<Expr>, i8),
}

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Stmt {
    Var(String, Option<Expr>),
    Expr(Expr),
    Func(String, Vec<String>, Vec<Stmt>),
    Return(Option<Expr>),
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        update: Option<Expr>,
        body: Vec<Stmt>,
    },
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    Block(Vec<Stmt>),
}

pub(super) fn parse_program(src: &str) -> Vec<Stmt> {
    let toks = lex(src);
    let mut p = Parser { toks, pos: 0 };
    p.program()
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

type PResult<T> = Result<T, ()>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Punct(q)) if *q == p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(())
        }
    }

    fn program(&mut self) -> Vec<Stmt> {
        let mut out = Vec::new();
        while self.pos < self.toks.len() {
            let before = self.pos;
            match self.statement() {
                Ok(Some(s)) => out.push(s),
                Ok(None) => {}
                Err(()) => {
                    self.pos = self.pos.max(before + 1);
                    self.recover();
                }
            }
        }
        out
    }

    /// Skip to just past the next `;` or to a closing `}` boundary.
    fn recover(&mut self) {
        let mut depth = 0u32;
        while let Some(t) = self.peek() {
            match t {
                Tok::Punct(";") if depth == 0 => {
                    self.pos += 1;
                    return;
                }
                Tok::Punct("{") | Tok::Punct("(") | Tok::Punct("[") => depth += 1,
                Tok::Punct("}") | Tok::Punct(")") | Tok::Punct("]") => {
                    if depth == 0 {
                        self.pos += 1;
                        return;
                    }
                    depth -= 1;
                }
                _ => {}
            }
            self.pos += 1;
        }
    }

    fn statement(&mut self) -> PResult<Option<Stmt>> {
        if self.eat_punct(";") {
            return Ok(None);
        }
        match self.peek().cloned() {
            Some(Tok::Keyword("var")) | Some(Tok::Keyword("let")) | Some(Tok::Keyword("const")) => {
                self.pos += 1;
                self.var_tail().map(Some)
            }
            Some(Tok::Keyword("function")) => {
                self.pos += 1;
                self.function_tail().map(Some)
            }
            Some(Tok::Keyword("return")) => {
                self.pos += 1;
                if self.eat_punct(";") || matches!(self.peek(), Some(Tok::Punct("}")) | None) {
                    return Ok(Some(Stmt::Return(None)));
                }
                let e = self.expression()?;
                self.eat_punct(";");
                Ok(Some(Stmt::Return(Some(e))))
            }
            Some(Tok::Keyword("for")) => self.for_stmt().map(Some),
            Some(Tok::Keyword("if")) => self.if_stmt().map(Some),
            Some(Tok::Punct("{")) => {
                self.pos += 1;
                let body = self.block_body()?;
                Ok(Some(Stmt::Block(body)))
            }
            Some(_) => {
                let e = self.expression()?;
                self.eat_punct(";");
                Ok(Some(Stmt::Expr(e)))
            }
            None => Ok(None),
        }
    }

    /// One or more `name = init` declarators after var/let/const.
    fn var_tail(&mut self) -> PResult<Stmt> {
        let mut decls = Vec::new();
        loop {
            let Some(Tok::Ident(name)) = self.bump() else {
                return Err(());
            };
            let init = if self.eat_punct("=") {
                Some(self.assignment()?)
            } else {
                None
            };
            decls.push(Stmt::Var(name, init));
            if !self.eat_punct(",") {
                break;
            }
        }
        self.eat_punct(";");
        if decls.len() == 1 {
            Ok(decls.pop().expect("one declarator"))
        } else {
            Ok(Stmt::Block(decls))
        }
    }

    fn function_tail(&mut self) -> PResult<Stmt> {
        let Some(Tok::Ident(name)) = self.bump() else {
            return Err(());
        };
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.eat_punct(")") {
            loop {
                let Some(Tok::Ident(p)) = self.bump() else {
                    return Err(());
                };
                params.push(p);
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        self.expect_punct("{")?;
        let body = self.block_body()?;
        Ok(Stmt::Func(name, params, body))
    }

    fn block_body(&mut self) -> PResult<Vec<Stmt>> {
        let mut body = Vec::new();
        loop {
            if self.eat_punct("}") {
                return Ok(body);
            }
            if self.peek().is_none() {
                return Ok(body); // tolerate EOF inside a block
            }
            let before = self.pos;
            match self.statement() {
                Ok(Some(s)) => body.push(s),
                Ok(None) => {}
                Err(()) => {
                    self.pos = self.pos.max(before + 1);
                    self.recover();
                }
            }
        }
    }

    fn for_stmt(&mut self) -> PResult<Stmt> {
        self.pos += 1; // for
        self.expect_punct("(")?;
        let init = if self.eat_punct(";") {
            None
        } else {
            let s = if matches!(
                self.peek(),
                Some(Tok::Keyword("var")) | Some(Tok::Keyword("let"))
            ) {
                self.pos += 1;
                self.var_tail()?
            } else {
                let e = self.expression()?;
                self.eat_punct(";");
                Stmt::Expr(e)
            };
            Some(Box::new(s))
        };
        let cond = if self.eat_punct(";") {
            None
        } else {
            let e = self.expression()?;
            self.expect_punct(";")?;
            Some(e)
        };
        let update = if self.eat_punct(")") {
            None
        } else {
            let e = self.expression()?;
            self.expect_punct(")")?;
            Some(e)
        };
        let body = self.stmt_or_block()?;
        Ok(Stmt::For {
            init,
            cond,
            update,
            body,
        })
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        self.pos += 1; // if
        self.expect_punct("(")?;
        let cond = self.expression()?;
        self.expect_punct(")")?;
        let then_branch = self.stmt_or_block()?;
        let else_branch = if matches!(self.peek(), Some(Tok::Keyword("else"))) {
            self.pos += 1;
            if matches!(self.peek(), Some(Tok::Keyword("if"))) {
                vec![self.if_stmt()?]
            } else {
                self.stmt_or_block()?
            }
        } else {
            Vec::new()
        };
        Ok(Stmt::If(cond, then_branch, else_branch))
    }

    fn stmt_or_block(&mut self) -> PResult<Vec<Stmt>> {
        if self.eat_punct("{") {
            self.block_body()
        } else {
            Ok(self.statement()?.into_iter().collect())
        }
    }

    fn expression(&mut self) -> PResult<Expr> {
        self.assignment()
    }

    fn assignment(&mut self) -> PResult<Expr> {
        let lhs = self.logical_or()?;
        if self.eat_punct("=") {
            let rhs = self.assignment()?;
            return Ok(Expr::Assign(Box::new(lhs), Box::new(rhs)));
        }
        for (p, op) in [
            ("+=", BinOp::Add),
            ("-=", BinOp::Sub),
            ("*=", BinOp::Mul),
            ("/=", BinOp::Div),
        ] {
            if self.eat_punct(p) {
                let rhs = self.assignment()?;
                return Ok(Expr::OpAssign(op, Box::new(lhs), Box::new(rhs)));
            }
        }
        Ok(lhs)
    }

    fn logical_or(&mut self) -> PResult<Expr> {
        let mut e = self.logical_and()?;
        while self.eat_punct("||") {
            let r = self.logical_and()?;
            e = Expr::Bin(BinOp::Or, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn logical_and(&mut self) -> PResult<Expr> {
        let mut e = self.equality()?;
        while self.eat_punct("&&") {
            let r = self.equality()?;
            e = Expr::Bin(BinOp::And, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn equality(&mut self) -> PResult<Expr> {
        let mut e = self.relational()?;
        loop {
            let op = if self.eat_punct("==") || self.eat_punct("===") {
                BinOp::Eq
            } else if self.eat_punct("!=") || self.eat_punct("!==") {
                BinOp::Ne
            } else {
                return Ok(e);
            };
            let r = self.relational()?;
            e = Expr::Bin(op, Box::new(e), Box::new(r));
        }
    }

    fn relational(&mut self) -> PResult<Expr> {
        let mut e = self.additive()?;
        loop {
            let op = if self.eat_punct("<=") {
                BinOp::Le
            } else if self.eat_punct(">=") {
                BinOp::Ge
            } else if self.eat_punct("<") {
                BinOp::Lt
            } else if self.eat_punct(">") {
                BinOp::Gt
            } else {
                return Ok(e);
            };
            let r = self.additive()?;
            e = Expr::Bin(op, Box::new(e), Box::new(r));
        }
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut e = self.multiplicative()?;
        loop {
            let op = if self.eat_punct("+") {
                BinOp::Add
            } else if self.eat_punct("-") {
                BinOp::Sub
            } else {
                return Ok(e);
            };
            let r = self.multiplicative()?;
            e = Expr::Bin(op, Box::new(e), Box::new(r));
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut e = self.unary()?;
        loop {
            let op = if self.eat_punct("*") {
                BinOp::Mul
            } else if self.eat_punct("/") {
                BinOp::Div
            } else if self.eat_punct("%") {
                BinOp::Mod
            } else {
                return Ok(e);
            };
            let r = self.unary()?;
            e = Expr::Bin(op, Box::new(e), Box::new(r));
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        for (p, c) in [("!", '!'), ("-", '-'), ("+", '+')] {
            if self.eat_punct(p) {
                let e = self.unary()?;
                return Ok(Expr::Unary(c, Box::new(e)));
            }
        }
        if self.eat_punct("++") {
            let e = self.unary()?;
            return Ok(Expr::PostIncr(Box::new(e), 1));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.eat_punct(".") {
                let Some(tok) = self.bump() else { return Err(()) };
                let name = match tok {
                    Tok::Ident(n) => n,
                    Tok::Keyword(k) => k.to_string(),
                    _ => return Err(()),
                };
                e = Expr::Member(Box::new(e), name);
            } else if self.eat_punct("[") {
                let idx = self.expression()?;
                self.expect_punct("]")?;
                e = Expr::Index(Box::new(e), Box::new(idx));
            } else if self.eat_punct("(") {
                let mut args = Vec::new();
                if !self.eat_punct(")") {
                    loop {
                        args.push(self.assignment()?);
                        if self.eat_punct(")") {
                            break;
                        }
                        self.expect_punct(",")?;
                    }
                }
                e = Expr::Call(Box::new(e), args);
            } else if self.eat_punct("++") {
                e = Expr::PostIncr(Box::new(e), 1);
            } else if self.eat_punct("--") {
                e = Expr::PostIncr(Box::new(e), -1);
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.bump() {
            Some(Tok::Str { value, had_hex }) => Ok(Expr::Str { value, had_hex }),
            Some(Tok::Num(n)) => Ok(Expr::Num(n)),
            Some(Tok::Ident(name)) => Ok(Expr::Ident(name)),
            Some(Tok::Punct("(")) => {
                let e = self.expression()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Some(Tok::Punct("[")) => {
                let mut items = Vec::new();
                if !self.eat_punct("]") {
                    loop {
                        items.push(self.assignment()?);
                        if self.eat_punct("]") {
                            break;
                        }
                        self.expect_punct(",")?;
                    }
                }
                Ok(Expr::Array(items))
            }
            _ => Err(()),
        }
    }
}
