//! Recursive-descent parser for objects, elements and witness terms.

use std::sync::Arc;

use super::{TermError, WitnessTerm};
use crate::finrel::{Element, ObjExpr, Side};

type PResult<T> = Result<T, TermError>;

/// Characters allowed in atom and generator names, outside braces.
pub(crate) fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Characters allowed in element labels.
pub(crate) fn is_label_char(c: char) -> bool {
    !c.is_whitespace() && !"<>,:[](){}".contains(c)
}

/// True when `name` can be written after `gen:` and read back unchanged.
pub fn is_valid_name(name: &str) -> bool {
    let mut p = Parser::new(name);
    p.name().map(|n| n == name && p.at_end()).unwrap_or(false)
}

pub(crate) struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(TermError::Syntax { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> PResult<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            let found = self.src[self.pos..].chars().next().map_or("end of input".to_string(), |c| format!("`{c}`"));
            self.err(format!("expected `{tok}`, found {found}"))
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let rest = &self.src[self.pos..];
        let len = rest.find(|c| !pred(c)).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn ident(&mut self) -> PResult<String> {
        self.skip_ws();
        let s = self.take_while(is_name_char);
        if s.is_empty() {
            return self.err("expected a name");
        }
        Ok(s.to_string())
    }

    /// A generator name: name characters with balanced `{...}` groups.
    pub(crate) fn name(&mut self) -> PResult<String> {
        self.skip_ws();
        let start = self.pos;
        let mut depth = 0usize;
        for (i, c) in self.src[start..].char_indices() {
            let ok = match c {
                '{' => {
                    depth += 1;
                    true
                }
                '}' if depth > 0 => {
                    depth -= 1;
                    true
                }
                c if depth > 0 => c != '}' && !c.is_whitespace(),
                c => is_name_char(c),
            };
            if !ok {
                self.pos = start + i;
                break;
            }
            self.pos = start + i + c.len_utf8();
        }
        if depth > 0 {
            return self.err("unbalanced `{` in name");
        }
        if self.pos == start {
            return self.err("expected a name");
        }
        Ok(self.src[start..self.pos].to_string())
    }

    pub(crate) fn obj(&mut self) -> PResult<ObjExpr> {
        if self.eat("(") {
            let a = self.obj()?;
            let prod = if self.eat("*") {
                true
            } else if self.eat("+") {
                false
            } else {
                return self.err("expected `*` or `+` in object");
            };
            let b = self.obj()?;
            self.expect(")")?;
            Ok(if prod { ObjExpr::prod(a, b) } else { ObjExpr::coprod(a, b) })
        } else {
            Ok(ObjExpr::Atom(self.ident()?))
        }
    }

    pub(crate) fn elem(&mut self) -> PResult<Element> {
        if self.eat("<") {
            let a = self.elem()?;
            self.expect(",")?;
            let b = self.elem()?;
            self.expect(">")?;
            return Ok(Element::pair(a, b));
        }
        self.skip_ws();
        let label = self.take_while(is_label_char);
        if label.is_empty() {
            return self.err("expected an element");
        }
        if (label == "1" || label == "2") && self.peek() == Some(':') {
            self.pos += 1;
            let side = if label == "1" { Side::Left } else { Side::Right };
            return Ok(Element::tag(side, self.elem()?));
        }
        Ok(Element::atom(label))
    }

    fn obj_list(&mut self, n: usize) -> PResult<Vec<ObjExpr>> {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            if i > 0 {
                self.expect(",")?;
            }
            out.push(self.obj()?);
        }
        Ok(out)
    }

    fn bracket_objs(&mut self, n: usize) -> PResult<Vec<ObjExpr>> {
        self.expect("[")?;
        let v = self.obj_list(n)?;
        self.expect("]")?;
        Ok(v)
    }

    fn bracket_iso(&mut self) -> PResult<(ObjExpr, ObjExpr, ObjExpr, bool)> {
        self.expect("[")?;
        let mut v = self.obj_list(3)?;
        let inverse = self.eat(";");
        if inverse {
            self.expect("inv")?;
        }
        self.expect("]")?;
        let c = v.pop().unwrap();
        let b = v.pop().unwrap();
        let a = v.pop().unwrap();
        Ok((a, b, c, inverse))
    }

    /// Reads a keyword only when it is followed by `open`, so that names
    /// such as `identity` are not mistaken for `id[`.
    fn keyword(&mut self, kw: &str, open: char) -> bool {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        if rest.starts_with(kw) && rest[kw.len()..].trim_start().starts_with(open) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn op(&mut self) -> Option<char> {
        ['.', '*', '+'].into_iter().find(|op| self.eat(&op.to_string()))
    }

    /// A chain `t1 op t2 op ...` with a single operator kind. Composition
    /// associates to the right, products and coproducts to the left.
    pub(crate) fn term(&mut self) -> PResult<WitnessTerm> {
        use WitnessTerm as T;
        let first = self.primary()?;
        let Some(op) = self.op() else { return Ok(first) };
        let mut items = vec![first, self.primary()?];
        loop {
            let save = self.pos;
            match self.op() {
                Some(o) if o == op => items.push(self.primary()?),
                Some(_) => {
                    self.pos = save;
                    return self.err("mixed operators need parentheses");
                }
                None => break,
            }
        }
        let mk = |a: WitnessTerm, b: WitnessTerm| {
            let (a, b) = (Arc::new(a), Arc::new(b));
            match op {
                '.' => T::Comp(a, b),
                '*' => T::Prod(a, b),
                _ => T::Coprod(a, b),
            }
        };
        Ok(if op == '.' {
            let mut it = items.into_iter().rev();
            let last = it.next().unwrap();
            it.fold(last, |acc, t| mk(t, acc))
        } else {
            let mut it = items.into_iter();
            let first = it.next().unwrap();
            it.fold(first, mk)
        })
    }

    fn primary(&mut self) -> PResult<WitnessTerm> {
        use WitnessTerm as T;
        if self.eat("(") {
            let t = self.term()?;
            self.expect(")")?;
            return Ok(t);
        }
        if self.eat("gen:") {
            return Ok(T::Gen(self.name()?));
        }
        if self.keyword("dom", '(') {
            self.expect("(")?;
            let t = self.term()?;
            self.expect(")")?;
            return Ok(T::DomOf(Arc::new(t)));
        }
        if self.keyword("const", '[') {
            self.expect("[")?;
            let src = self.obj()?;
            self.expect("->")?;
            let dst = self.obj()?;
            self.expect(":")?;
            let e = self.elem()?;
            self.expect("]")?;
            return Ok(T::Const(src, dst, e));
        }
        if self.keyword("conn", '[') {
            self.expect("[")?;
            let src = self.obj()?;
            self.expect("->")?;
            let dst = self.obj()?;
            self.expect("]")?;
            return Ok(T::Conn(src, dst));
        }
        if self.keyword("assoc", '[') {
            let (a, b, c, inverse) = self.bracket_iso()?;
            return Ok(T::Assoc { a, b, c, inverse });
        }
        if self.keyword("distr", '[') {
            let (a, b, c, inverse) = self.bracket_iso()?;
            return Ok(T::Distrib { a, b, c, inverse });
        }
        let unary: [(&str, fn(ObjExpr) -> WitnessTerm); 3] =
            [("id", T::Id), ("delta", T::Diag), ("nabla", T::Codiag)];
        for (kw, mk) in unary {
            if self.keyword(kw, '[') {
                let mut v = self.bracket_objs(1)?;
                return Ok(mk(v.pop().unwrap()));
            }
        }
        let binary: [(&str, fn(ObjExpr, ObjExpr) -> WitnessTerm); 5] =
            [("pi1", T::Proj1), ("pi2", T::Proj2), ("in1", T::Inj1), ("in2", T::Inj2), ("comm", T::Comm)];
        for (kw, mk) in binary {
            if self.keyword(kw, '[') {
                let mut v = self.bracket_objs(2)?;
                let b = v.pop().unwrap();
                return Ok(mk(v.pop().unwrap(), b));
            }
        }
        self.err("expected a term")
    }
}

pub(crate) fn complete<T>(src: &str, f: impl FnOnce(&mut Parser<'_>) -> PResult<T>) -> PResult<T> {
    let mut p = Parser::new(src);
    let v = f(&mut p)?;
    if !p.at_end() {
        return p.err("trailing input");
    }
    Ok(v)
}
