use thiserror::Error;

use super::ast::*;
use super::ops;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dialect {
    /// Constructors (1)-(6); `fix` is rejected.
    #[default]
    Gdst,
    /// Adds the fixpoint constructor; `min` is still accepted.
    Nmid,
    /// Fixpoint constructor only; `min` is rejected.
    NmidStrict,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{msg} at offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub msg: String,
}

pub(crate) fn err<T>(offset: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        offset,
        msg: msg.into(),
    })
}

#[derive(Debug)]
pub(crate) enum Sexp<'a> {
    Atom(&'a str, usize),
    List(Vec<Sexp<'a>>, usize),
}

impl Sexp<'_> {
    pub(crate) fn offset(&self) -> usize {
        match self {
            Sexp::Atom(_, o) | Sexp::List(_, o) => *o,
        }
    }
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn read(&mut self) -> Result<Sexp<'a>, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.text[start..].chars().next() {
            None => err(start, "unexpected end of input"),
            Some(')') => err(start, "unexpected ')'"),
            Some('(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.text[self.pos..].chars().next() {
                        None => return err(self.pos, "unbalanced '('"),
                        Some(')') => {
                            self.pos += 1;
                            return Ok(Sexp::List(items, start));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(_) => {
                let len = self.text[start..]
                    .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
                    .unwrap_or(self.text.len() - start);
                self.pos += len;
                Ok(Sexp::Atom(&self.text[start..start + len], start))
            }
        }
    }
}

fn read_all(text: &str) -> Result<Vec<Sexp<'_>>, ParseError> {
    let mut r = Reader { text, pos: 0 };
    let mut out = Vec::new();
    loop {
        r.skip_ws();
        if r.pos == text.len() {
            return Ok(out);
        }
        out.push(r.read()?);
    }
}

pub(crate) fn read_one(text: &str) -> Result<Sexp<'_>, ParseError> {
    let mut r = Reader { text, pos: 0 };
    let s = r.read()?;
    r.skip_ws();
    if r.pos != text.len() {
        return err(r.pos, "trailing input");
    }
    Ok(s)
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic())
        && cs.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '\''))
}

struct Conv {
    dialect: Dialect,
    sugar: bool,
}

impl Conv {
    fn name(&self, s: &Sexp, want: Option<Sort>) -> Result<Name, ParseError> {
        match s {
            Sexp::Atom(a, o) if is_ident(a) => {
                let n = Name::new(a);
                match want {
                    Some(sort) if n.sort() != sort => err(*o, format!("'{a}' has the wrong sort for this binder")),
                    _ => Ok(n),
                }
            }
            _ => err(s.offset(), "expected a variable"),
        }
    }

    fn args<'s, 'a>(
        &self,
        items: &'s [Sexp<'a>],
        offset: usize,
        head: &str,
        n: usize,
    ) -> Result<&'s [Sexp<'a>], ParseError> {
        if items.len() != n + 1 {
            return err(offset, format!("'{head}' takes {n} arguments, got {}", items.len() - 1));
        }
        Ok(&items[1..])
    }

    fn expr(&self, s: &Sexp) -> Result<Expr, ParseError> {
        match s {
            Sexp::Atom(..) => Ok(match self.term(s)? {
                Term::Set(t) => Expr::Set(t),
                Term::Ord(t) => Expr::Ord(t),
            }),
            Sexp::List(items, o) => match items.first() {
                Some(Sexp::Atom(h, _)) => match *h {
                    "sep" | "L" | "fix" => Ok(Expr::Set(self.set(s)?)),
                    "min" | "succ" | "nat" => Ok(Expr::Ord(self.ord(s)?)),
                    _ => Ok(Expr::Formula(self.formula(s)?)),
                },
                _ => err(*o, "expected a head symbol"),
            },
        }
    }

    fn term(&self, s: &Sexp) -> Result<Term, ParseError> {
        match s {
            Sexp::Atom(..) => {
                let n = self.name(s, None)?;
                Ok(match n.sort() {
                    Sort::Set => Term::Set(SetTerm::Var(n)),
                    Sort::Ord => Term::Ord(OrdTerm::Var(n)),
                })
            }
            Sexp::List(items, o) => match items.first() {
                Some(Sexp::Atom(h, _)) => match *h {
                    "sep" | "L" | "fix" => Ok(Term::Set(self.set(s)?)),
                    "min" | "succ" | "nat" => Ok(Term::Ord(self.ord(s)?)),
                    other => err(*o, format!("expected a term, found '{other}'")),
                },
                _ => err(*o, "expected a head symbol"),
            },
        }
    }

    fn set(&self, s: &Sexp) -> Result<SetTerm, ParseError> {
        let (items, o) = match s {
            Sexp::Atom(..) => {
                let n = self.name(s, Some(Sort::Set))?;
                return Ok(SetTerm::Var(n));
            }
            Sexp::List(items, o) => (items, *o),
        };
        let head = match items.first() {
            Some(Sexp::Atom(h, _)) => *h,
            _ => return err(o, "expected a head symbol"),
        };
        match head {
            "sep" => {
                let a = self.args(items, o, head, 3)?;
                Ok(SetTerm::Sep {
                    var: self.name(&a[0], Some(Sort::Set))?,
                    bound: Box::new(self.set(&a[1])?),
                    pred: Box::new(self.formula(&a[2])?),
                })
            }
            "L" => {
                let a = self.args(items, o, head, 1)?;
                Ok(SetTerm::Stage(Box::new(self.ord(&a[0])?)))
            }
            "fix" => {
                if self.dialect == Dialect::Gdst {
                    return err(o, "'fix' is not part of the GDST dialect");
                }
                let a = self.args(items, o, head, 3)?;
                Ok(SetTerm::Fix {
                    var: self.name(&a[0], Some(Sort::Set))?,
                    body: Box::new(self.set(&a[1])?),
                    seed: Box::new(self.set(&a[2])?),
                })
            }
            other => err(o, format!("expected a set term, found '{other}'")),
        }
    }

    fn ord(&self, s: &Sexp) -> Result<OrdTerm, ParseError> {
        let (items, o) = match s {
            Sexp::Atom(..) => {
                let n = self.name(s, Some(Sort::Ord))?;
                return Ok(OrdTerm::Var(n));
            }
            Sexp::List(items, o) => (items, *o),
        };
        let head = match items.first() {
            Some(Sexp::Atom(h, _)) => *h,
            _ => return err(o, "expected a head symbol"),
        };
        if self.dialect == Dialect::NmidStrict && matches!(head, "min" | "succ" | "nat") {
            return err(o, format!("'{head}' is not part of the strict NMID dialect"));
        }
        match head {
            "min" => {
                let a = self.args(items, o, head, 2)?;
                Ok(OrdTerm::Min {
                    var: self.name(&a[0], Some(Sort::Ord))?,
                    pred: Box::new(self.formula(&a[1])?),
                })
            }
            "succ" if self.sugar => {
                let a = self.args(items, o, head, 1)?;
                Ok(successor(self.ord(&a[0])?))
            }
            "nat" if self.sugar => {
                let a = self.args(items, o, head, 1)?;
                match &a[0] {
                    Sexp::Atom(k, ko) => match k.parse::<u32>() {
                        Ok(k) if k <= 64 => Ok(numeral(k)),
                        _ => err(*ko, "expected a numeral (at most 64)"),
                    },
                    other => err(other.offset(), "expected a numeral"),
                }
            }
            other => err(o, format!("expected an ordinal term, found '{other}'")),
        }
    }

    fn formula(&self, s: &Sexp) -> Result<Formula, ParseError> {
        let (items, o) = match s {
            Sexp::Atom(_, o) => return err(*o, "expected a formula"),
            Sexp::List(items, o) => (items, *o),
        };
        let head = match items.first() {
            Some(Sexp::Atom(h, _)) => *h,
            _ => return err(o, "expected a head symbol"),
        };
        let bin = |f: fn(Formula, Formula) -> Formula| -> Result<Formula, ParseError> {
            let a = self.args(items, o, head, 2)?;
            Ok(f(self.formula(&a[0])?, self.formula(&a[1])?))
        };
        match head {
            "mem" | "eq" => {
                let a = self.args(items, o, head, 2)?;
                let (l, r) = (self.term(&a[0])?, self.term(&a[1])?);
                Ok(if head == "mem" {
                    Formula::Mem(l, r)
                } else {
                    Formula::Eq(l, r)
                })
            }
            "def" => {
                let a = self.args(items, o, head, 1)?;
                Ok(Formula::Defined(self.term(&a[0])?))
            }
            "and" => bin(Formula::and),
            "or" => bin(Formula::or),
            "not" => {
                let a = self.args(items, o, head, 1)?;
                Ok(Formula::not(self.formula(&a[0])?))
            }
            "forall-set" | "exists-set" => {
                let a = self.args(items, o, head, 3)?;
                let var = self.name(&a[0], Some(Sort::Set))?;
                let bound = self.set(&a[1])?;
                let body = Box::new(self.formula(&a[2])?);
                Ok(if head == "forall-set" {
                    Formula::ForallSet { var, bound, body }
                } else {
                    Formula::ExistsSet { var, bound, body }
                })
            }
            "forall-ord" | "exists-ord" => {
                let a = self.args(items, o, head, 3)?;
                let var = self.name(&a[0], Some(Sort::Ord))?;
                let bound = self.ord(&a[1])?;
                let body = Box::new(self.formula(&a[2])?);
                Ok(if head == "forall-ord" {
                    Formula::ForallOrd { var, bound, body }
                } else {
                    Formula::ExistsOrd { var, bound, body }
                })
            }
            "imp" if self.sugar => bin(Formula::implies),
            "iff" if self.sugar => bin(Formula::iff),
            "down" if self.sugar => {
                let a = self.args(items, o, head, 1)?;
                Ok(Formula::down(self.formula(&a[0])?))
            }
            "lt" if self.sugar => {
                let a = self.args(items, o, head, 2)?;
                Ok(Formula::Mem(self.term(&a[0])?, self.term(&a[1])?))
            }
            other => err(o, format!("unknown formula head '{other}'")),
        }
    }
}

/// Parses core syntax only.
pub fn parse(text: &str, dialect: Dialect) -> Result<Expr, ParseError> {
    let s = read_one(text)?;
    Conv { dialect, sugar: false }.expr(&s)
}

/// Parses text that may use the sugar heads and expands them. The result
/// uses core constructors only.
pub fn desugar(text: &str, dialect: Dialect) -> Result<Expr, ParseError> {
    let s = read_one(text)?;
    let e = Conv { dialect, sugar: true }.expr(&s)?;
    Ok(ops::freshen_expr(&e))
}

/// Parses a newline- or whitespace-separated corpus of expressions.
pub fn desugar_corpus(text: &str, dialect: Dialect) -> Result<Vec<Expr>, ParseError> {
    let conv = Conv { dialect, sugar: true };
    read_all(text)?
        .iter()
        .map(|s| conv.expr(s).map(|e| ops::freshen_expr(&e)))
        .collect()
}

fn wrong(kind: &str) -> ParseError {
    ParseError {
        offset: 0,
        msg: format!("expected {kind}"),
    }
}

/// Sugar-aware formula parse in the permissive NMID dialect.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    match desugar(text, Dialect::Nmid)? {
        Expr::Formula(f) => Ok(f),
        _ => Err(wrong("a formula")),
    }
}

pub fn parse_ord(text: &str) -> Result<OrdTerm, ParseError> {
    match desugar(text, Dialect::Nmid)? {
        Expr::Ord(t) => Ok(t),
        _ => Err(wrong("an ordinal term")),
    }
}

pub fn parse_set(text: &str) -> Result<SetTerm, ParseError> {
    match desugar(text, Dialect::Nmid)? {
        Expr::Set(t) => Ok(t),
        _ => Err(wrong("a set term")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_eq() {
        let e = parse("(min a (eq a a))", Dialect::Gdst).unwrap();
        assert_eq!(
            e,
            Expr::Ord(OrdTerm::min("a", Formula::eq(OrdTerm::var("a"), OrdTerm::var("a"))))
        );
    }

    #[test]
    fn sep_over_stage() {
        let e = parse("(sep x (L (min a (eq a a))) (mem x x))", Dialect::Gdst).unwrap();
        assert!(matches!(e, Expr::Set(SetTerm::Sep { ref bound, .. }) if matches!(**bound, SetTerm::Stage(_))));
    }

    #[test]
    fn unbalanced_offset() {
        let e = parse("(min a (mem a", Dialect::Gdst).unwrap_err();
        assert_eq!(e.offset, 13);
    }

    #[test]
    fn dialects() {
        let fix = "(fix w (sep x w (eq x x)) w)";
        assert!(parse(fix, Dialect::Gdst).is_err());
        assert!(parse(fix, Dialect::Nmid).is_ok());
        assert!(parse("(min a (eq a a))", Dialect::NmidStrict).is_err());
    }

    #[test]
    fn sugar_needs_desugar() {
        assert!(parse("(nat 0)", Dialect::Gdst).is_err());
        assert_eq!(
            desugar("(nat 0)", Dialect::Gdst).unwrap(),
            parse("(min a (eq a a))", Dialect::Gdst).unwrap()
        );
    }

    #[test]
    fn imp_expands() {
        let got = desugar("(imp (eq x x) (mem x y))", Dialect::Gdst).unwrap();
        let want = parse("(or (not (eq x x)) (mem x y))", Dialect::Gdst).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn binder_sort_checked() {
        assert!(parse("(min x (eq x x))", Dialect::Gdst).is_err());
        assert!(parse("(forall-set a x (eq a a))", Dialect::Gdst).is_err());
    }
}
