//! Line-oriented presentation files.
//!
//! ```text
//! # A(1,2,2,1)
//! vertex 0
//! vertex 1
//! loop e0 0 order 2
//! loop e1 1 order 2
//! arrow a1 1 -> 0
//! relation e0*a1 + a1*e1
//! ```

use num_traits::One;
use thiserror::Error;

use super::{BoundQuiverPresentation, Combination, Path, Quiver, QuiverError, Relation};
use crate::linalg::{parse_rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Int(String),
    Slash,
    Star,
    Caret,
    Plus,
    Minus,
}

fn tokenize(text: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '/' => {
                out.push(Token::Slash);
                i += 1
            }
            '*' => {
                out.push(Token::Star);
                i += 1
            }
            '^' => {
                out.push(Token::Caret);
                i += 1
            }
            '+' => {
                out.push(Token::Plus);
                i += 1
            }
            '-' => {
                out.push(Token::Minus);
                i += 1
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                out.push(Token::Int(chars[start..i].iter().collect()));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(out)
}

struct ExprParser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    quiver: &'a Quiver,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn int(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Token::Int(s)) => Ok(s),
            other => Err(format!("expected integer, found {other:?}")),
        }
    }

    fn expr(&mut self) -> Result<Combination, String> {
        let mut combo = Combination::new();
        let mut sign = match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                -Rat::one()
            }
            Some(Token::Plus) => {
                self.pos += 1;
                Rat::one()
            }
            _ => Rat::one(),
        };
        loop {
            let (k, p) = self.term()?;
            combo.add_term(sign * k, p);
            sign = match self.next() {
                None => break,
                Some(Token::Plus) => Rat::one(),
                Some(Token::Minus) => -Rat::one(),
                Some(t) => return Err(format!("expected `+` or `-`, found {t:?}")),
            };
        }
        Ok(combo)
    }

    fn term(&mut self) -> Result<(Rat, Path), String> {
        let mut coeff = Rat::one();
        if let Some(Token::Int(_)) = self.peek() {
            let n = self.int()?;
            let text = if let Some(Token::Slash) = self.peek() {
                self.pos += 1;
                format!("{n}/{}", self.int()?)
            } else {
                n
            };
            coeff = parse_rat(&text).ok_or_else(|| format!("bad rational `{text}`"))?;
            match self.next() {
                Some(Token::Star) => {}
                other => return Err(format!("expected `*` after coefficient, found {other:?}")),
            }
        }
        let mut arrows = Vec::new();
        loop {
            let name = match self.next() {
                Some(Token::Ident(s)) => s,
                other => return Err(format!("expected arrow name, found {other:?}")),
            };
            let a = self.quiver.arrow_by_name(&name).map_err(|e| e.to_string())?;
            let mut k = 1usize;
            if let Some(Token::Caret) = self.peek() {
                self.pos += 1;
                k = self
                    .int()?
                    .parse()
                    .map_err(|_| "exponent out of range".to_string())?;
                if k == 0 {
                    return Err(format!("zero exponent on `{name}`"));
                }
                if k > 1 && !self.quiver.is_loop(a) {
                    return Err(format!("power of non-loop arrow `{name}`"));
                }
            }
            arrows.extend(std::iter::repeat_n(a, k));
            if let Some(Token::Star) = self.peek() {
                self.pos += 1;
            } else {
                break;
            }
        }
        let p = Path::new(self.quiver, arrows).map_err(|e| e.to_string())?;
        Ok((coeff, p))
    }
}

/// Parses a linear combination of paths written with the relation grammar.
pub fn parse_relation_expr(q: &Quiver, text: &str) -> Result<Combination, String> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err("empty expression".to_string());
    }
    let mut p = ExprParser {
        tokens,
        pos: 0,
        quiver: q,
    };
    p.expr()
}

/// Parses and validates a presentation file.
pub fn parse_presentation(text: &str) -> Result<BoundQuiverPresentation, ParseError> {
    let mut quiver = Quiver::empty();
    let mut loop_orders: Vec<(String, u32, usize)> = Vec::new();
    let mut relation_lines: Vec<(usize, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let words: Vec<&str> = rest.split_whitespace().collect();
        match keyword {
            "vertex" => {
                let [id] = words[..] else {
                    return Err(err(line_no, "expected `vertex <id>`"));
                };
                quiver
                    .add_vertex(id)
                    .map_err(|e| err(line_no, e.to_string()))?;
            }
            "loop" => {
                let [id, v, "order", m] = words[..] else {
                    return Err(err(line_no, "expected `loop <id> <vertex> order <m>`"));
                };
                let m: u32 = m
                    .parse()
                    .map_err(|_| err(line_no, format!("bad order `{m}`")))?;
                let vid = quiver
                    .vertex_by_name(v)
                    .map_err(|e| err(line_no, e.to_string()))?;
                if quiver.loop_at(vid).is_some() {
                    return Err(err(line_no, QuiverError::TwoLoops(v.to_string()).to_string()));
                }
                if m < 2 {
                    return Err(err(
                        line_no,
                        QuiverError::BadLoopOrder {
                            arrow: id.to_string(),
                            order: m,
                        }
                        .to_string(),
                    ));
                }
                check_arrow_name(id, line_no)?;
                quiver
                    .add_arrow(id, v, v)
                    .map_err(|e| err(line_no, e.to_string()))?;
                loop_orders.push((v.to_string(), m, line_no));
            }
            "arrow" => {
                let [id, s, "->", t] = words[..] else {
                    return Err(err(line_no, "expected `arrow <id> <src> -> <dst>`"));
                };
                if s == t {
                    return Err(err(
                        line_no,
                        format!("arrow `{id}` is a loop; declare it with `loop ... order <m>`"),
                    ));
                }
                check_arrow_name(id, line_no)?;
                quiver
                    .add_arrow(id, s, t)
                    .map_err(|e| err(line_no, e.to_string()))?;
            }
            "relation" => relation_lines.push((line_no, rest.to_string())),
            other => return Err(err(line_no, format!("unknown keyword `{other}`"))),
        }
    }

    let mut orders = vec![1u32; quiver.vertex_count()];
    for (v, m, line_no) in &loop_orders {
        let vid = quiver
            .vertex_by_name(v)
            .map_err(|e| err(*line_no, e.to_string()))?;
        orders[vid.0] = *m;
    }

    let mut relations = Vec::new();
    for (line_no, text) in relation_lines {
        let combo = parse_relation_expr(&quiver, &text).map_err(|m| err(line_no, m))?;
        if combo.is_zero() {
            return Err(err(line_no, "relation is zero"));
        }
        let r = Relation::from_combination(&quiver, combo).map_err(|e| err(line_no, e.to_string()))?;
        BoundQuiverPresentation::new(quiver.clone(), orders.clone(), vec![r.clone()])
            .map_err(|e| err(line_no, e.to_string()))?;
        relations.push(r);
    }
    BoundQuiverPresentation::new(quiver, orders, relations).map_err(|e| err(0, e.to_string()))
}

fn check_arrow_name(id: &str, line_no: usize) -> Result<(), ParseError> {
    let ok = id
        .chars()
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_')
        && id
            .chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '\'');
    if ok {
        Ok(())
    } else {
        Err(err(line_no, format!("arrow name `{id}` must start with a letter")))
    }
}
