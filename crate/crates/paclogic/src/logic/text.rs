//! Text syntax for formulas.
//!
//! Grammar (loosest binding first):
//!
//! ```text
//! formula := imp ( "<->" imp )*
//! imp     := or ( "->" imp )?
//! or      := and ( "|" and )*
//! and     := unary ( "&" unary )*
//! unary   := "~" unary | primary
//! primary := "(" formula ")" | "thr" "(" int ";" [ int "*" unary ( "," int "*" unary )* ] ")" | atom
//! atom    := ident ( "(" ident ( "," ident )* ")" )?
//! ```
//!
//! `&`, `|`, `->` and `<->` compile to threshold connectives. Printing
//! recognizes the AND/OR threshold shapes and emits the infix forms, so a
//! parse/print round trip reproduces the same tree.

use std::fmt::Write as _;

use crate::error::ParseError;
use crate::logic::atoms::AtomTable;
use crate::logic::formula::Formula;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Int(i64),
    Not,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
    Comma,
    Semi,
    Star,
}

fn tokenize(input: &str, line: usize) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' => {
                chars.next();
            }
            '~' => {
                chars.next();
                out.push(Token::Not);
            }
            '&' => {
                chars.next();
                out.push(Token::And);
            }
            '|' => {
                chars.next();
                out.push(Token::Or);
            }
            '(' => {
                chars.next();
                out.push(Token::LParen);
            }
            ')' => {
                chars.next();
                out.push(Token::RParen);
            }
            ',' => {
                chars.next();
                out.push(Token::Comma);
            }
            ';' => {
                chars.next();
                out.push(Token::Semi);
            }
            '*' => {
                chars.next();
                out.push(Token::Star);
            }
            '<' => {
                chars.next();
                if chars.next() != Some('-') || chars.next() != Some('>') {
                    return Err(ParseError::new(line, "expected '<->'"));
                }
                out.push(Token::Iff);
            }
            '-' => {
                chars.next();
                if chars.peek() == Some(&'>') {
                    chars.next();
                    out.push(Token::Imp);
                } else {
                    let mut digits = String::from("-");
                    while let Some(&d) = chars.peek() {
                        if d.is_ascii_digit() {
                            digits.push(d);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    if digits == "-" {
                        return Err(ParseError::new(line, "dangling '-'"));
                    }
                    let v = digits
                        .parse()
                        .map_err(|_| ParseError::new(line, format!("bad integer {digits:?}")))?;
                    out.push(Token::Int(v));
                }
            }
            d if d.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let v = digits
                    .parse()
                    .map_err(|_| ParseError::new(line, format!("bad integer {digits:?}")))?;
                out.push(Token::Int(v));
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let mut ident = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        ident.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Token::Ident(ident));
            }
            other => {
                return Err(ParseError::new(line, format!("unexpected character {other:?}")));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    table: &'a mut AtomTable,
    line: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Token) -> Result<(), ParseError> {
        match self.next() {
            Some(got) if got == t => Ok(()),
            got => Err(ParseError::new(
                self.line,
                format!("expected {t:?}, got {got:?}"),
            )),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(self.line, msg))
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.imp()?;
        while self.peek() == Some(&Token::Iff) {
            self.next();
            let g = self.imp()?;
            f = Formula::iff(f, g);
        }
        Ok(f)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let f = self.or()?;
        if self.peek() == Some(&Token::Imp) {
            self.next();
            let g = self.imp()?;
            return Ok(Formula::implies(f, g));
        }
        Ok(f)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let first = self.and()?;
        if self.peek() != Some(&Token::Or) {
            return Ok(first);
        }
        let mut children = vec![first];
        while self.peek() == Some(&Token::Or) {
            self.next();
            children.push(self.and()?);
        }
        Ok(Formula::or(children))
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let first = self.unary()?;
        if self.peek() != Some(&Token::And) {
            return Ok(first);
        }
        let mut children = vec![first];
        while self.peek() == Some(&Token::And) {
            self.next();
            children.push(self.unary()?);
        }
        Ok(Formula::and(children))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Token::Not) => {
                self.next();
                Ok(Formula::not(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.next() {
            Some(Token::LParen) => {
                let f = self.formula()?;
                self.expect(Token::RParen)?;
                Ok(f)
            }
            Some(Token::Ident(name)) if name == "thr" && self.peek() == Some(&Token::LParen) => {
                self.next();
                let bound = match self.next() {
                    Some(Token::Int(b)) => b,
                    got => return self.err(format!("expected threshold bound, got {got:?}")),
                };
                self.expect(Token::Semi)?;
                let mut terms = Vec::new();
                if self.peek() != Some(&Token::RParen) {
                    loop {
                        let weight = match self.next() {
                            Some(Token::Int(c)) => c,
                            got => return self.err(format!("expected weight, got {got:?}")),
                        };
                        self.expect(Token::Star)?;
                        let child = self.unary()?;
                        terms.push((weight, child));
                        match self.peek() {
                            Some(Token::Comma) => {
                                self.next();
                            }
                            _ => break,
                        }
                    }
                }
                self.expect(Token::RParen)?;
                Formula::threshold(terms, bound)
                    .map_err(|e| ParseError::new(self.line, e.to_string()))
            }
            Some(Token::Ident(name)) => {
                // Ground atoms may carry an argument list, kept verbatim in
                // the interned name: hit(sculpture,floor).
                if self.peek() == Some(&Token::LParen) {
                    self.next();
                    let mut full = format!("{name}(");
                    loop {
                        match self.next() {
                            Some(Token::Ident(arg)) => {
                                full.push_str(&arg);
                            }
                            got => return self.err(format!("expected atom argument, got {got:?}")),
                        }
                        match self.next() {
                            Some(Token::Comma) => full.push(','),
                            Some(Token::RParen) => break,
                            got => return self.err(format!("expected ',' or ')', got {got:?}")),
                        }
                    }
                    full.push(')');
                    Ok(Formula::Atom(self.table.intern(&full)))
                } else {
                    Ok(Formula::Atom(self.table.intern(&name)))
                }
            }
            got => self.err(format!("expected formula, got {got:?}")),
        }
    }
}

/// Parses a formula, interning any new atom names into `table`.
pub fn parse_formula(input: &str, table: &mut AtomTable) -> Result<Formula, ParseError> {
    parse_formula_at(input, table, 1)
}

/// As [`parse_formula`] but reporting errors at the given line number.
pub fn parse_formula_at(
    input: &str,
    table: &mut AtomTable,
    line: usize,
) -> Result<Formula, ParseError> {
    let tokens = tokenize(input, line)?;
    let mut p = Parser { tokens, pos: 0, table, line };
    let f = p.formula()?;
    if p.pos != p.tokens.len() {
        return Err(ParseError::new(line, "trailing input after formula"));
    }
    Ok(f)
}

fn is_plain_shape(terms: &[(i64, Formula)]) -> bool {
    !terms.is_empty() && terms.iter().all(|(c, _)| *c == 1)
}

fn print_prec(f: &Formula, table: &AtomTable, parent_needs_atom: bool, out: &mut String) {
    match f {
        Formula::Atom(id) => out.push_str(table.name(*id)),
        Formula::Not(g) => {
            out.push('~');
            print_prec(g, table, true, out);
        }
        Formula::Threshold { terms, bound } => {
            let k = terms.len() as i64;
            if is_plain_shape(terms) && *bound == k && k >= 2 {
                // AND shape
                if parent_needs_atom {
                    out.push('(');
                }
                for (i, (_, g)) in terms.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" & ");
                    }
                    print_prec(g, table, true, out);
                }
                if parent_needs_atom {
                    out.push(')');
                }
            } else if is_plain_shape(terms) && *bound == 1 && k >= 2 {
                // OR shape
                if parent_needs_atom {
                    out.push('(');
                }
                for (i, (_, g)) in terms.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" | ");
                    }
                    print_prec(g, table, true, out);
                }
                if parent_needs_atom {
                    out.push(')');
                }
            } else {
                let _ = write!(out, "thr({bound};");
                for (i, (c, g)) in terms.iter().enumerate() {
                    out.push_str(if i == 0 { " " } else { ", " });
                    let _ = write!(out, "{c}*");
                    print_prec(g, table, true, out);
                }
                out.push(')');
            }
        }
    }
}

/// Prints a formula in the text syntax. `parse_formula(print_formula(f))`
/// rebuilds the identical tree.
pub fn print_formula(f: &Formula, table: &AtomTable) -> String {
    let mut out = String::new();
    print_prec(f, table, false, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::atoms::AtomId;

    fn round_trip(src: &str) -> (Formula, String) {
        let mut t = AtomTable::new();
        let f = parse_formula(src, &mut t).unwrap();
        let printed = print_formula(&f, &t);
        let mut t2 = AtomTable::new();
        let f2 = parse_formula(&printed, &mut t2).unwrap();
        assert_eq!(f, f2, "round trip changed tree for {src:?} -> {printed:?}");
        (f, printed)
    }

    #[test]
    fn parses_infix_connectives() {
        let mut t = AtomTable::new();
        let f = parse_formula("a & b | ~c", &mut t).unwrap();
        // & binds tighter than |
        assert_eq!(
            f,
            Formula::or(vec![
                Formula::and(vec![Formula::Atom(AtomId(0)), Formula::Atom(AtomId(1))]),
                Formula::not(Formula::Atom(AtomId(2))),
            ])
        );
    }

    #[test]
    fn parses_threshold_and_ground_atoms() {
        let mut t = AtomTable::new();
        let f = parse_formula("thr(4; 5*R1, 1*R2, -1*hit(sculpture,floor))", &mut t).unwrap();
        match f {
            Formula::Threshold { terms, bound } => {
                assert_eq!(bound, 4);
                assert_eq!(terms.len(), 3);
                assert_eq!(terms[0].0, 5);
                assert_eq!(terms[2].0, -1);
                assert_eq!(t.name(AtomId(2)), "hit(sculpture,floor)");
            }
            other => panic!("expected threshold, got {other:?}"),
        }
    }

    #[test]
    fn implication_is_right_associative() {
        let mut t = AtomTable::new();
        let f = parse_formula("a -> b -> c", &mut t).unwrap();
        let want = Formula::implies(
            Formula::Atom(AtomId(0)),
            Formula::implies(Formula::Atom(AtomId(1)), Formula::Atom(AtomId(2))),
        );
        assert_eq!(f, want);
    }

    #[test]
    fn round_trips() {
        round_trip("a");
        round_trip("~~a");
        round_trip("a & b & c");
        round_trip("(a | b) & ~c");
        round_trip("a -> b");
        round_trip("a <-> b");
        round_trip("thr(0; -2*a, 3*b)");
        round_trip("thr(0;)");
        round_trip("thr(2; 1*p(x,y), 1*q)");
    }

    #[test]
    fn rejects_garbage() {
        let mut t = AtomTable::new();
        assert!(parse_formula("a &", &mut t).is_err());
        assert!(parse_formula("thr(1; 0*a)", &mut t).is_err());
        assert!(parse_formula("a b", &mut t).is_err());
        assert!(parse_formula("", &mut t).is_err());
    }
}
