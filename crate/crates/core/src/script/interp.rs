//! Bounded, side-effect-free evaluation of the pure-string subset, plus the
//! statement walk that recovers hide/write/redirect actions from a program.

use super::ast::{parse_program, BinOp, Expr, Stmt};
use super::Obfuscation;
use std::collections::BTreeMap;

pub(super) const STEP_BUDGET: u32 = 10_000;
const MAX_CALL_DEPTH: u32 = 8;
const MAX_EVAL_DEPTH: u32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub(super) enum VK {
    Str(String),
    Num(f64),
    Bool(bool),
    Arr(Vec<Value>),
    Undefined,
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Value {
    pub kind: VK,
    pub flags: Obfuscation,
}

impl Value {
    fn new(kind: VK) -> Self {
        Value {
            kind,
            flags: Obfuscation::default(),
        }
    }

    fn str_plain(s: impl Into<String>) -> Self {
        Value::new(VK::Str(s.into()))
    }

    fn num(n: f64) -> Self {
        Value::new(VK::Num(n))
    }

    pub(super) fn as_str(&self) -> Option<&str> {
        match &self.kind {
            VK::Str(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum EvalErr {
    /// Not resolvable in the constant subset; the caller skips the fold.
    Unfoldable,
    /// Step budget exhausted; analysis of the program stops with a note.
    Budget,
}

enum Flow {
    Normal,
    Returned(Value),
}

type Funcs = BTreeMap<String, (Vec<String>, Vec<Stmt>)>;
type Vars = BTreeMap<String, Value>;

struct Machine {
    funcs: Funcs,
    steps: u32,
}

impl Machine {
    fn tick(&mut self) -> Result<(), EvalErr> {
        if self.steps == 0 {
            return Err(EvalErr::Budget);
        }
        self.steps -= 1;
        Ok(())
    }

    fn eval(&mut self, e: &Expr, vars: &mut Vars, depth: u32) -> Result<Value, EvalErr> {
        self.tick()?;
        match e {
            Expr::Str { value, had_hex } => {
                let mut v = Value::str_plain(value.clone());
                v.flags.hex_escape = *had_hex;
                Ok(v)
            }
            Expr::Num(n) => Ok(Value::num(*n)),
            Expr::Ident(name) => vars.get(name).cloned().ok_or(EvalErr::Unfoldable),
            Expr::Array(items) => {
                let vals = items
                    .iter()
                    .map(|i| self.eval(i, vars, depth))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Value::new(VK::Arr(vals)))
            }
            Expr::Member(obj, prop) if prop == "length" => {
                let v = self.eval(obj, vars, depth)?;
                match v.kind {
                    VK::Str(s) => {
                        let mut out = Value::num(s.chars().count() as f64);
                        out.flags = v.flags;
                        Ok(out)
                    }
                    VK::Arr(items) => Ok(Value::num(items.len() as f64)),
                    _ => Err(EvalErr::Unfoldable),
                }
            }
            Expr::Member(..) => Err(EvalErr::Unfoldable),
            Expr::Index(obj, idx) => {
                let o = self.eval(obj, vars, depth)?;
                let i = self.eval(idx, vars, depth)?;
                let VK::Num(n) = i.kind else {
                    return Err(EvalErr::Unfoldable);
                };
                match o.kind {
                    VK::Arr(items) => {
                        let pos = n as i64;
                        if pos < 0 || pos as usize >= items.len() {
                            return Err(EvalErr::Unfoldable);
                        }
                        let mut v = items[pos as usize].clone();
                        v.flags = v.flags.union(o.flags).union(i.flags);
                        v.flags.array_indexing = true;
                        Ok(v)
                    }
                    VK::Str(s) => {
                        let pos = n as i64;
                        let c = s.chars().nth(pos.max(0) as usize);
                        match c {
                            Some(c) if pos >= 0 => {
                                let mut v = Value::str_plain(c.to_string());
                                v.flags = o.flags.union(i.flags);
                                v.flags.array_indexing = true;
                                Ok(v)
                            }
                            _ => Err(EvalErr::Unfoldable),
                        }
                    }
                    _ => Err(EvalErr::Unfoldable),
                }
            }
            Expr::Call(callee, args) => self.call(callee, args, vars, depth),
            Expr::Bin(op, l, r) => {
                if matches!(op, BinOp::And | BinOp::Or) {
                    let lv = self.eval(l, vars, depth)?;
                    let take_right = match op {
                        BinOp::And => truthy(&lv),
                        _ => !truthy(&lv),
                    };
                    return if take_right {
                        self.eval(r, vars, depth)
                    } else {
                        Ok(lv)
                    };
                }
                let lv = self.eval(l, vars, depth)?;
                let rv = self.eval(r, vars, depth)?;
                bin(*op, lv, rv)
            }
            Expr::Unary(op, inner) => {
                let v = self.eval(inner, vars, depth)?;
                match (op, &v.kind) {
                    ('-', VK::Num(n)) => Ok(Value {
                        kind: VK::Num(-n),
                        flags: v.flags,
                    }),
                    ('+', VK::Num(_)) => Ok(v),
                    ('!', _) => Ok(Value::new(VK::Bool(!truthy(&v)))),
                    _ => Err(EvalErr::Unfoldable),
                }
            }
            Expr::Assign(lhs, rhs) => {
                let v = match self.eval(rhs, vars, depth) {
                    Ok(v) => v,
                    Err(e) => {
                        // can no longer trust whatever lhs previously held
                        invalidate_root(lhs, vars);
                        return Err(e);
                    }
                };
                self.store(lhs, v.clone(), vars, depth)?;
                Ok(v)
            }
            Expr::OpAssign(op, lhs, rhs) => {
                let cur = self.eval(lhs, vars, depth).inspect_err(|_e| {
                    invalidate_root(lhs, vars);
                })?;
                let rv = match self.eval(rhs, vars, depth) {
                    Ok(v) => v,
                    Err(e) => {
                        invalidate_root(lhs, vars);
                        return Err(e);
                    }
                };
                let v = match bin(*op, cur, rv) {
                    Ok(v) => v,
                    Err(e) => {
                        invalidate_root(lhs, vars);
                        return Err(e);
                    }
                };
                self.store(lhs, v.clone(), vars, depth)?;
                Ok(v)
            }
            Expr::PostIncr(lhs, delta) => {
                let cur = self.eval(lhs, vars, depth)?;
                let VK::Num(n) = cur.kind else {
                    invalidate_root(lhs, vars);
                    return Err(EvalErr::Unfoldable);
                };
                self.store(lhs, Value::num(n + f64::from(*delta)), vars, depth)?;
                Ok(Value::num(n))
            }
        }
    }

    fn call(
        &mut self,
        callee: &Expr,
        args: &[Expr],
        vars: &mut Vars,
        depth: u32,
    ) -> Result<Value, EvalErr> {
        match callee {
            Expr::Ident(name) => match name.as_str() {
                "parseInt" => {
                    let vals = self.eval_args(args, vars, depth)?;
                    builtin_parse_int(&vals)
                }
                "parseFloat" => {
                    let vals = self.eval_args(args, vars, depth)?;
                    let s = vals.first().and_then(|v| v.as_str()).ok_or(EvalErr::Unfoldable)?;
                    let trimmed = s.trim_start();
                    let end = trimmed
                        .char_indices()
                        .take_while(|(i, c)| {
                            c.is_ascii_digit()
                                || *c == '.'
                                || (*i == 0 && (*c == '-' || *c == '+'))
                        })
                        .map(|(i, c)| i + c.len_utf8())
                        .last()
                        .unwrap_or(0);
                    let n: f64 = trimmed[..end].parse().map_err(|_| EvalErr::Unfoldable)?;
                    let mut out = Value::num(n);
                    out.flags = vals[0].flags;
                    Ok(out)
                }
                "unescape" | "decodeURIComponent" | "decodeURI" => {
                    let vals = self.eval_args(args, vars, depth)?;
                    let s = vals.first().and_then(|v| v.as_str()).ok_or(EvalErr::Unfoldable)?;
                    let mut out = Value::str_plain(percent_decode(s));
                    out.flags = vals[0].flags;
                    out.flags.hex_escape |= s.contains('%');
                    Ok(out)
                }
                "Number" => {
                    let vals = self.eval_args(args, vars, depth)?;
                    match vals.first().map(|v| &v.kind) {
                        Some(VK::Num(n)) => Ok(Value::num(*n)),
                        Some(VK::Str(s)) => {
                            s.trim().parse::<f64>().map(Value::num).map_err(|_| EvalErr::Unfoldable)
                        }
                        _ => Err(EvalErr::Unfoldable),
                    }
                }
                "String" => {
                    let vals = self.eval_args(args, vars, depth)?;
                    let v = vals.first().ok_or(EvalErr::Unfoldable)?;
                    let mut out = Value::str_plain(to_js_string(v)?);
                    out.flags = v.flags;
                    Ok(out)
                }
                _ => {
                    if let Some((params, body)) = self.funcs.get(name).cloned() {
                        if depth >= MAX_CALL_DEPTH {
                            return Err(EvalErr::Unfoldable);
                        }
                        let vals = self.eval_args(args, vars, depth)?;
                        let mut locals: Vars = BTreeMap::new();
                        for (i, p) in params.iter().enumerate() {
                            locals.insert(
                                p.clone(),
                                vals.get(i).cloned().unwrap_or(Value::new(VK::Undefined)),
                            );
                        }
                        match self.exec_stmts(&body, &mut locals, depth + 1)? {
                            Flow::Returned(v) => Ok(v),
                            Flow::Normal => Ok(Value::new(VK::Undefined)),
                        }
                    } else {
                        Err(EvalErr::Unfoldable)
                    }
                }
            },
            Expr::Member(obj, method) => {
                if let Expr::Ident(base) = &**obj {
                    if base == "String" && method == "fromCharCode" {
                        let vals = self.eval_args(args, vars, depth)?;
                        let mut out = String::new();
                        let mut flags = Obfuscation::default();
                        for v in &vals {
                            let VK::Num(n) = v.kind else {
                                return Err(EvalErr::Unfoldable);
                            };
                            let unit = if n.is_finite() {
                                (n as i64).rem_euclid(65536) as u32
                            } else {
                                0
                            };
                            out.push(char::from_u32(unit).unwrap_or('\u{FFFD}'));
                            flags = flags.union(v.flags);
                        }
                        return Ok(Value {
                            kind: VK::Str(out),
                            flags,
                        });
                    }
                    if base == "Math" {
                        let vals = self.eval_args(args, vars, depth)?;
                        let VK::Num(n) = vals.first().ok_or(EvalErr::Unfoldable)?.kind else {
                            return Err(EvalErr::Unfoldable);
                        };
                        let r = match method.as_str() {
                            "floor" => n.floor(),
                            "ceil" => n.ceil(),
                            "round" => n.round(),
                            "abs" => n.abs(),
                            _ => return Err(EvalErr::Unfoldable),
                        };
                        let mut out = Value::num(r);
                        out.flags = vals[0].flags;
                        return Ok(out);
                    }
                }
                let recv = match self.eval(obj, vars, depth) {
                    Ok(v) => v,
                    Err(e) => {
                        invalidate_root(obj, vars);
                        return Err(e);
                    }
                };
                let vals = self.eval_args(args, vars, depth)?;
                match string_method(&recv, method, &vals) {
                    Some(v) => Ok(v),
                    None => {
                        // unknown method could mutate its receiver
                        invalidate_root(obj, vars);
                        Err(EvalErr::Unfoldable)
                    }
                }
            }
            _ => Err(EvalErr::Unfoldable),
        }
    }

    fn eval_args(
        &mut self,
        args: &[Expr],
        vars: &mut Vars,
        depth: u32,
    ) -> Result<Vec<Value>, EvalErr> {
        args.iter().map(|a| self.eval(a, vars, depth)).collect()
    }

    fn store(
        &mut self,
        lhs: &Expr,
        v: Value,
        vars: &mut Vars,
        depth: u32,
    ) -> Result<(), EvalErr> {
        match lhs {
            Expr::Ident(name) => {
                vars.insert(name.clone(), v);
                Ok(())
            }
            Expr::Index(obj, idx) => {
                if let Expr::Ident(name) = &**obj {
                    let i = self.eval(idx, vars, depth)?;
                    if let (Some(Value { kind: VK::Arr(items), .. }), VK::Num(n)) =
                        (vars.get_mut(name), &i.kind)
                    {
                        let pos = *n as i64;
                        if pos >= 0 && (pos as usize) < items.len() {
                            items[pos as usize] = v;
                            return Ok(());
                        }
                    }
                }
                invalidate_root(lhs, vars);
                Ok(())
            }
            _ => {
                invalidate_root(lhs, vars);
                Ok(())
            }
        }
    }

    fn exec_stmts(&mut self, stmts: &[Stmt], vars: &mut Vars, depth: u32) -> Result<Flow, EvalErr> {
        for s in stmts {
            if let Flow::Returned(v) = self.exec_stmt(s, vars, depth)? {
                return Ok(Flow::Returned(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, stmt: &Stmt, vars: &mut Vars, depth: u32) -> Result<Flow, EvalErr> {
        self.tick()?;
        match stmt {
            Stmt::Var(name, init) => {
                match init {
                    None => {
                        vars.insert(name.clone(), Value::new(VK::Undefined));
                    }
                    Some(e) => match self.eval(e, vars, depth) {
                        Ok(v) => {
                            vars.insert(name.clone(), v);
                        }
                        Err(EvalErr::Budget) => return Err(EvalErr::Budget),
                        Err(EvalErr::Unfoldable) => {
                            vars.remove(name);
                        }
                    },
                }
                Ok(Flow::Normal)
            }
            Stmt::Expr(e) => {
                match self.eval(e, vars, depth) {
                    Err(EvalErr::Budget) => Err(EvalErr::Budget),
                    _ => Ok(Flow::Normal),
                }
            }
            Stmt::Func(name, params, body) => {
                self.funcs
                    .insert(name.clone(), (params.clone(), body.clone()));
                Ok(Flow::Normal)
            }
            Stmt::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e, vars, depth)?,
                    None => Value::new(VK::Undefined),
                };
                Ok(Flow::Returned(v))
            }
            Stmt::For {
                init,
                cond,
                update,
                body,
            } => {
                if let Some(init) = init {
                    self.exec_stmt(init, vars, depth)?;
                }
                loop {
                    self.tick()?;
                    if let Some(c) = cond {
                        let v = self.eval(c, vars, depth)?;
                        if !truthy(&v) {
                            break;
                        }
                    }
                    if let Flow::Returned(v) = self.exec_stmts(body, vars, depth)? {
                        return Ok(Flow::Returned(v));
                    }
                    if let Some(u) = update {
                        self.eval(u, vars, depth)?;
                    }
                }
                Ok(Flow::Normal)
            }
            Stmt::If(cond, then_branch, else_branch) => {
                match self.eval(cond, vars, depth) {
                    Ok(v) => {
                        let branch = if truthy(&v) { then_branch } else { else_branch };
                        self.exec_stmts(branch, vars, depth)
                    }
                    Err(EvalErr::Budget) => Err(EvalErr::Budget),
                    // unknowable condition: take neither branch
                    Err(EvalErr::Unfoldable) => Ok(Flow::Normal),
                }
            }
            Stmt::Block(body) => self.exec_stmts(body, vars, depth),
        }
    }
}

fn invalidate_root(e: &Expr, vars: &mut Vars) {
    match e {
        Expr::Ident(name) => {
            vars.remove(name);
        }
        Expr::Member(o, _) | Expr::Index(o, _) | Expr::Call(o, _) => invalidate_root(o, vars),
        _ => {}
    }
}

fn truthy(v: &Value) -> bool {
    match &v.kind {
        VK::Bool(b) => *b,
        VK::Num(n) => *n != 0.0 && !n.is_nan(),
        VK::Str(s) => !s.is_empty(),
        VK::Arr(_) => true,
        VK::Undefined => false,
    }
}

fn bin(op: BinOp, l: Value, r: Value) -> Result<Value, EvalErr> {
    let flags = l.flags.union(r.flags);
    if op == BinOp::Add && (matches!(l.kind, VK::Str(_)) || matches!(r.kind, VK::Str(_))) {
        let mut s = to_js_string(&l)?;
        s.push_str(&to_js_string(&r)?);
        let mut v = Value::str_plain(s);
        v.flags = flags;
        v.flags.concat = true;
        return Ok(v);
    }
    let out = match (&l.kind, &r.kind) {
        (VK::Num(a), VK::Num(b)) => match op {
            BinOp::Add => VK::Num(a + b),
            BinOp::Sub => VK::Num(a - b),
            BinOp::Mul => VK::Num(a * b),
            BinOp::Div => VK::Num(a / b),
            BinOp::Mod => VK::Num(a % b),
            BinOp::Lt => VK::Bool(a < b),
            BinOp::Le => VK::Bool(a <= b),
            BinOp::Gt => VK::Bool(a > b),
            BinOp::Ge => VK::Bool(a >= b),
            BinOp::Eq => VK::Bool(a == b),
            BinOp::Ne => VK::Bool(a != b),
            _ => return Err(EvalErr::Unfoldable),
        },
        (VK::Str(a), VK::Str(b)) => match op {
            BinOp::Lt => VK::Bool(a < b),
            BinOp::Le => VK::Bool(a <= b),
            BinOp::Gt => VK::Bool(a > b),
            BinOp::Ge => VK::Bool(a >= b),
            BinOp::Eq => VK::Bool(a == b),
            BinOp::Ne => VK::Bool(a != b),
            _ => return Err(EvalErr::Unfoldable),
        },
        _ => return Err(EvalErr::Unfoldable),
    };
    Ok(Value { kind: out, flags })
}

pub(super) fn to_js_string(v: &Value) -> Result<String, EvalErr> {
    match &v.kind {
        VK::Str(s) => Ok(s.clone()),
        VK::Num(n) => Ok(js_num(*n)),
        VK::Bool(b) => Ok(b.to_string()),
        VK::Undefined => Ok("undefined".to_string()),
        VK::Arr(items) => {
            let parts: Result<Vec<_>, _> = items.iter().map(to_js_string).collect();
            Ok(parts?.join(","))
        }
    }
}

pub(super) fn js_num(n: f64) -> String {
    if n == n.trunc() && n.abs() < 9.0e15 {
        format!("{}", n as i64)
    } else {
        format!("{n}")
    }
}

fn builtin_parse_int(vals: &[Value]) -> Result<Value, EvalErr> {
    let s = vals.first().and_then(|v| v.as_str()).ok_or(EvalErr::Unfoldable)?;
    let mut radix = match vals.get(1).map(|v| &v.kind) {
        Some(VK::Num(r)) if (2.0..=36.0).contains(r) => *r as u32,
        Some(_) => return Err(EvalErr::Unfoldable),
        None => 0,
    };
    let mut t = s.trim_start();
    let mut sign = 1.0;
    if let Some(rest) = t.strip_prefix('-') {
        sign = -1.0;
        t = rest;
    } else if let Some(rest) = t.strip_prefix('+') {
        t = rest;
    }
    if (radix == 0 || radix == 16)
        && (t.starts_with("0x") || t.starts_with("0X"))
    {
        t = &t[2..];
        radix = 16;
    }
    if radix == 0 {
        radix = 10;
    }
    let digits: String = t.chars().take_while(|c| c.is_digit(radix)).collect();
    if digits.is_empty() {
        return Err(EvalErr::Unfoldable);
    }
    let n = i64::from_str_radix(&digits, radix).map_err(|_| EvalErr::Unfoldable)?;
    let mut out = Value::num(sign * n as f64);
    out.flags = vals.iter().fold(Obfuscation::default(), |f, v| f.union(v.flags));
    Ok(out)
}

fn string_method(recv: &Value, method: &str, args: &[Value]) -> Option<Value> {
    let arg_flags = args
        .iter()
        .fold(recv.flags, |f, v| f.union(v.flags));
    if let VK::Arr(items) = &recv.kind {
        if method == "join" {
            let sep = match args.first().map(|v| &v.kind) {
                Some(VK::Str(s)) => s.clone(),
                None => ",".to_string(),
                Some(_) => return None,
            };
            let parts: Result<Vec<_>, _> = items.iter().map(to_js_string).collect();
            let flags = items
                .iter()
                .fold(arg_flags, |f, v| f.union(v.flags));
            return Some(Value {
                kind: VK::Str(parts.ok()?.join(&sep)),
                flags,
            });
        }
        return None;
    }
    let VK::Str(s) = &recv.kind else { return None };
    let chars: Vec<char> = s.chars().collect();
    let len = chars.len() as i64;
    let arg_num = |i: usize| -> Option<i64> {
        match args.get(i).map(|v| &v.kind) {
            Some(VK::Num(n)) => Some(*n as i64),
            _ => None,
        }
    };
    let kind = match method {
        "substring" => {
            let a = arg_num(0)?.clamp(0, len);
            let b = match args.get(1) {
                Some(_) => arg_num(1)?.clamp(0, len),
                None => len,
            };
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            VK::Str(chars[a as usize..b as usize].iter().collect())
        }
        "substr" => {
            let start = arg_num(0)?.clamp(0, len);
            let count = match args.get(1) {
                Some(_) => arg_num(1)?.max(0),
                None => len - start,
            };
            let end = (start + count).clamp(start, len);
            VK::Str(chars[start as usize..end as usize].iter().collect())
        }
        "slice" => {
            let norm = |i: i64| if i < 0 { (len + i).max(0) } else { i.min(len) };
            let a = norm(arg_num(0)?);
            let b = match args.get(1) {
                Some(_) => norm(arg_num(1)?),
                None => len,
            };
            VK::Str(if a < b {
                chars[a as usize..b as usize].iter().collect()
            } else {
                String::new()
            })
        }
        "charAt" => {
            let i = arg_num(0).unwrap_or(0);
            VK::Str(
                (i >= 0)
                    .then(|| chars.get(i as usize))
                    .flatten()
                    .map(|c| c.to_string())
                    .unwrap_or_default(),
            )
        }
        "charCodeAt" => {
            let i = arg_num(0).unwrap_or(0);
            let c = (i >= 0).then(|| chars.get(i as usize)).flatten()?;
            VK::Num(*c as u32 as f64)
        }
        "toLowerCase" => VK::Str(s.to_lowercase()),
        "toUpperCase" => VK::Str(s.to_uppercase()),
        "indexOf" => {
            let needle = args.first()?.as_str()?;
            match s.find(needle) {
                Some(byte_pos) => VK::Num(s[..byte_pos].chars().count() as f64),
                None => VK::Num(-1.0),
            }
        }
        "concat" => {
            let mut out = s.clone();
            for a in args {
                out.push_str(a.as_str()?);
            }
            VK::Str(out)
        }
        "trim" => VK::Str(s.trim().to_string()),
        _ => return None,
    };
    Some(Value {
        kind,
        flags: arg_flags,
    })
}

fn percent_decode(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '%' && i + 2 < chars.len() {
            if chars[i + 1] == 'u' && i + 5 < chars.len() {
                if let Some(c) = chars[i + 2..i + 6]
                    .iter()
                    .try_fold(0u32, |v, c| c.to_digit(16).map(|d| v * 16 + d))
                    .and_then(char::from_u32)
                {
                    out.push(c);
                    i += 6;
                    continue;
                }
            }
            if let (Some(hi), Some(lo)) = (chars[i + 1].to_digit(16), chars[i + 2].to_digit(16)) {
                out.push((hi * 16 + lo) as u8 as char);
                i += 3;
                continue;
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}

// ---------------------------------------------------------------------------
// Statement-level analysis

/// Everything recovered from one program.
#[derive(Debug, Default)]
pub(super) struct Analysis {
    pub actions: Vec<Action>,
    /// Canonical statements recovered by executing eval() payloads.
    pub decoded: Vec<String>,
    pub notes: Vec<String>,
    /// Variables (and array elements as `name[i]`) that folded to strings.
    pub folded_strings: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Action {
    StyleAssign {
        target: StyleTarget,
        property: StyleProp,
        evidence: String,
        flags: Obfuscation,
    },
    Write {
        content: String,
        content_flags: Obfuscation,
        evidence: String,
    },
    Location {
        target: String,
        evidence: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub(super) enum StyleTarget {
    ById(String),
    ByClass(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum StyleProp {
    Display,
    Visibility,
}

pub(super) fn analyze_source(src: &str) -> Analysis {
    let stmts = parse_program(src);
    let mut machine = Machine {
        funcs: BTreeMap::new(),
        steps: STEP_BUDGET,
    };
    let mut vars: Vars = BTreeMap::new();
    let mut out = Analysis::default();
    let flags = Obfuscation::default();
    if walk(&stmts, &mut machine, &mut vars, &mut out, flags, 0).is_err() {
        out.notes.push("budget-exhausted: partial results".to_string());
    }
    for (name, v) in &vars {
        match &v.kind {
            VK::Str(s) => {
                out.folded_strings.insert(name.clone(), s.clone());
            }
            VK::Arr(items) => {
                for (i, item) in items.iter().enumerate() {
                    if let VK::Str(s) = &item.kind {
                        out.folded_strings.insert(format!("{name}[{i}]"), s.clone());
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Walks top-level statements, matching effect patterns before falling back
/// to plain evaluation for environment updates. Only a budget error stops
/// the walk.
fn walk(
    stmts: &[Stmt],
    machine: &mut Machine,
    vars: &mut Vars,
    out: &mut Analysis,
    ctx: Obfuscation,
    eval_depth: u32,
) -> Result<(), EvalErr> {
    for stmt in stmts {
        match stmt {
            Stmt::Func(name, params, body) => {
                machine
                    .funcs
                    .insert(name.clone(), (params.clone(), body.clone()));
            }
            Stmt::Var(..) | Stmt::Return(..) => {
                if let Err(EvalErr::Budget) = machine.exec_stmt(stmt, vars, 0) {
                    return Err(EvalErr::Budget);
                }
            }
            Stmt::Block(body) => walk(body, machine, vars, out, ctx, eval_depth)?,
            Stmt::If(cond, then_branch, else_branch) => match machine.eval(cond, vars, 0) {
                Ok(v) => {
                    let branch = if truthy(&v) { then_branch } else { else_branch };
                    walk(branch, machine, vars, out, ctx, eval_depth)?;
                }
                Err(EvalErr::Budget) => return Err(EvalErr::Budget),
                Err(EvalErr::Unfoldable) => {}
            },
            Stmt::For { .. } => {
                if let Err(EvalErr::Budget) = machine.exec_stmt(stmt, vars, 0) {
                    return Err(EvalErr::Budget);
                }
            }
            Stmt::Expr(e) => walk_expr(e, machine, vars, out, ctx, eval_depth)?,
        }
    }
    Ok(())
}

fn walk_expr(
    e: &Expr,
    machine: &mut Machine,
    vars: &mut Vars,
    out: &mut Analysis,
    ctx: Obfuscation,
    eval_depth: u32,
) -> Result<(), EvalErr> {
    if let Expr::Assign(lhs, rhs) = e {
        if let Ok(path) = flatten_path(lhs, machine, vars) {
            if let Some((target, prop)) = match_style_path(&path) {
                match machine.eval(rhs, vars, 0) {
                    Ok(v) => {
                        if let Some(s) = v.as_str() {
                            let is_hide = match prop {
                                StyleProp::Display => s == "none",
                                StyleProp::Visibility => s == "hidden",
                            };
                            if is_hide {
                                let evidence =
                                    format!("{} = {}", print_path(&path), quote_str(s));
                                let mut flags = path.flags.union(v.flags).union(ctx);
                                flags.eval_decoder |= eval_depth > 0;
                                record(out, eval_depth, evidence.clone());
                                out.actions.push(Action::StyleAssign {
                                    target,
                                    property: prop,
                                    evidence,
                                    flags,
                                });
                            }
                        }
                        return Ok(());
                    }
                    Err(EvalErr::Budget) => return Err(EvalErr::Budget),
            Err(EvalErr::Unfoldable) => return Ok(()),
                }
            }
            if let Some(canon) = match_location_path(&path) {
                match machine.eval(rhs, vars, 0) {
                    Ok(v) => {
                        if let Some(s) = v.as_str() {
                            let evidence = format!("{} = {}", canon, quote_str(s));
                            record(out, eval_depth, evidence.clone());
                            out.actions.push(Action::Location {
                                target: s.to_string(),
                                evidence,
                            });
                        }
                        return Ok(());
                    }
                    Err(EvalErr::Budget) => return Err(EvalErr::Budget),
                    Err(EvalErr::Unfoldable) => return Ok(()),
                }
            }
        }
    }
    if let Expr::Call(callee, args) = e {
        // eval(constant) → recurse into the decoded program
        if matches!(&**callee, Expr::Ident(n) if n == "eval") {
            let Some(arg) = args.first() else { return Ok(()) };
            match machine.eval(arg, vars, 0) {
                Ok(v) => {
                    if let Some(code) = v.as_str() {
                        if eval_depth >= MAX_EVAL_DEPTH {
                            out.notes.push("eval nesting deeper than 3; stopped".to_string());
                            return Ok(());
                        }
                        let sub = parse_program(code);
                        let mut sub_ctx = ctx.union(v.flags);
                        sub_ctx.eval_decoder = true;
                        return walk(&sub, machine, vars, out, sub_ctx, eval_depth + 1);
                    }
                    out.notes
                        .push("eval argument did not fold to a string; skipped".to_string());
                    return Ok(());
                }
                Err(EvalErr::Budget) => return Err(EvalErr::Budget),
                Err(EvalErr::Unfoldable) => {
                    out.notes
                        .push("eval argument did not fold to a string; skipped".to_string());
                    return Ok(());
                }
            }
        }
        if let Ok(path) = flatten_path(callee, machine, vars) {
            // document.write("...") / document.writeln("...")
            if path.base == "document"
                && path.segs.len() == 1
                && matches!(&path.segs[0], Seg::Prop(p) if p == "write" || p == "writeln")
            {
                if let Some(arg) = args.first() {
                    match machine.eval(arg, vars, 0) {
                        Ok(v) => {
                            if let Some(s) = v.as_str() {
                                let mut full = path.clone();
                                full.segs.push(Seg::Args(vec![v.clone()]));
                                let evidence = print_path(&full);
                                record(out, eval_depth, evidence.clone());
                                let mut content_flags = v.flags.union(ctx);
                                content_flags.doc_write = true;
                                content_flags.eval_decoder |= eval_depth > 0;
                                out.actions.push(Action::Write {
                                    content: s.to_string(),
                                    content_flags,
                                    evidence,
                                });
                            }
                            return Ok(());
                        }
                        Err(EvalErr::Budget) => return Err(EvalErr::Budget),
                        Err(EvalErr::Unfoldable) => return Ok(()),
                    }
                }
                return Ok(());
            }
            // location.replace("...") / location.assign("...")
            if let Some(prefix) = path_location_prefix(&path) {
                if let Some(Seg::Prop(m)) = path.segs.last() {
                    if (m == "replace" || m == "assign") && path.segs.len() == prefix + 1 {
                        if let Some(arg) = args.first() {
                            match machine.eval(arg, vars, 0) {
                                Ok(v) => {
                                    if let Some(s) = v.as_str() {
                                        let evidence = format!(
                                            "{}({})",
                                            print_path(&path),
                                            quote_str(s)
                                        );
                                        record(out, eval_depth, evidence.clone());
                                        out.actions.push(Action::Location {
                                            target: s.to_string(),
                                            evidence,
                                        });
                                    }
                                    return Ok(());
                                }
                                Err(EvalErr::Budget) => return Err(EvalErr::Budget),
                                Err(EvalErr::Unfoldable) => return Ok(()),
                            }
                        }
                    }
                }
            }
        }
    }
    // no pattern matched: evaluate for environment effects only
    match machine.eval(e, vars, 0) {
        Err(EvalErr::Budget) => Err(EvalErr::Budget),
        _ => Ok(()),
    }
}

fn record(out: &mut Analysis, eval_depth: u32, evidence: String) {
    if eval_depth > 0 {
        out.decoded.push(evidence);
    }
}

// ---------------------------------------------------------------------------
// Path flattening and canonical printing

#[derive(Debug, Clone)]
pub(super) struct Path {
    base: String,
    segs: Vec<Seg>,
    flags: Obfuscation,
}

#[derive(Debug, Clone)]
enum Seg {
    Prop(String),
    Args(Vec<Value>),
    IndexNum(i64),
}

/// Rewrites a member/index/call chain into canonical dotted form, folding
/// computed property names and call arguments to constants. Fails if any
/// piece does not fold.
fn flatten_path(e: &Expr, machine: &mut Machine, vars: &mut Vars) -> Result<Path, EvalErr> {
    match e {
        Expr::Ident(name) => Ok(Path {
            base: name.clone(),
            segs: Vec::new(),
            flags: Obfuscation::default(),
        }),
        Expr::Member(obj, prop) => {
            let mut p = flatten_path(obj, machine, vars)?;
            p.segs.push(Seg::Prop(prop.clone()));
            Ok(p)
        }
        Expr::Index(obj, idx) => {
            let mut p = flatten_path(obj, machine, vars)?;
            let v = machine.eval(idx, vars, 0)?;
            match v.kind {
                VK::Str(s) => {
                    p.flags = p.flags.union(v.flags);
                    p.flags.array_indexing = true;
                    p.segs.push(Seg::Prop(s));
                }
                VK::Num(n) => {
                    p.flags = p.flags.union(v.flags);
                    p.segs.push(Seg::IndexNum(n as i64));
                }
                _ => return Err(EvalErr::Unfoldable),
            }
            Ok(p)
        }
        Expr::Call(callee, args) => {
            let mut p = flatten_path(callee, machine, vars)?;
            let vals = machine.eval_args(args, vars, 0)?;
            for v in &vals {
                p.flags = p.flags.union(v.flags);
            }
            p.segs.push(Seg::Args(vals));
            Ok(p)
        }
        _ => Err(EvalErr::Unfoldable),
    }
}

fn match_style_path(path: &Path) -> Option<(StyleTarget, StyleProp)> {
    if path.base != "document" {
        return None;
    }
    let segs = &path.segs;
    let (target, rest) = match segs.first()? {
        Seg::Prop(m) if m == "getElementById" => {
            let Seg::Args(args) = segs.get(1)? else { return None };
            let name = args.first()?.as_str()?;
            (StyleTarget::ById(name.to_string()), &segs[2..])
        }
        Seg::Prop(m) if m == "getElementsByClassName" => {
            let Seg::Args(args) = segs.get(1)? else { return None };
            let name = args.first()?.as_str()?;
            let rest = &segs[2..];
            // optional numeric collection index
            let rest = match rest.first() {
                Some(Seg::IndexNum(_)) => &rest[1..],
                _ => rest,
            };
            (StyleTarget::ByClass(name.to_string()), rest)
        }
        _ => return None,
    };
    match rest {
        [Seg::Prop(style), Seg::Prop(prop)] if style == "style" => match prop.as_str() {
            "display" => Some((target, StyleProp::Display)),
            "visibility" => Some((target, StyleProp::Visibility)),
            _ => None,
        },
        _ => None,
    }
}

/// Length of the location prefix (in segments) when the path starts with a
/// window-location object, else None.
fn path_location_prefix(path: &Path) -> Option<usize> {
    if path.base == "location" {
        return Some(0);
    }
    if matches!(path.base.as_str(), "window" | "document" | "self" | "top" | "parent") {
        if let Some(Seg::Prop(p)) = path.segs.first() {
            if p == "location" {
                return Some(1);
            }
        }
    }
    None
}

/// Canonical location-assignment target, e.g. `location.href` or
/// `window.location`, when the path is exactly a location lvalue.
fn match_location_path(path: &Path) -> Option<String> {
    let prefix = path_location_prefix(path)?;
    let rest = &path.segs[prefix..];
    match rest {
        [] => Some(print_path(path)),
        [Seg::Prop(p)] if p == "href" => Some(print_path(path)),
        _ => None,
    }
}

fn print_path(path: &Path) -> String {
    let mut out = path.base.clone();
    for seg in &path.segs {
        match seg {
            Seg::Prop(p) => {
                out.push('.');
                out.push_str(p);
            }
            Seg::IndexNum(n) => {
                out.push_str(&format!("[{n}]"));
            }
            Seg::Args(vals) => {
                let parts: Vec<String> = vals.iter().map(print_value).collect();
                out.push('(');
                out.push_str(&parts.join(", "));
                out.push(')');
            }
        }
    }
    out
}

fn print_value(v: &Value) -> String {
    match &v.kind {
        VK::Str(s) => quote_str(s),
        VK::Num(n) => js_num(*n),
        VK::Bool(b) => b.to_string(),
        VK::Undefined => "undefined".to_string(),
        VK::Arr(items) => {
            let parts: Vec<String> = items.iter().map(print_value).collect();
            format!("[{}]", parts.join(", "))
        }
    }
}

pub(super) fn quote_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\x{:02x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
