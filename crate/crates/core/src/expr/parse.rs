//! Recursive-descent parser.
//!
//! ```text
//! expr  := term (("+"|"-") term)*
//! term  := unary (("*"|"/") unary)*
//! unary := "-" unary | power
//! power := atom ("^" unary)?
//! atom  := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
//! ```

use std::sync::Arc;

use super::{Expr, ExprError, Func, Var};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Op(u8),
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Returns the next token and its starting offset.
    fn next(&mut self) -> Result<(Token, usize), ExprError> {
        self.skip_ws();
        let start = self.pos;
        let Some(&c) = self.src.get(start) else {
            return Ok((Token::End, start));
        };
        if c.is_ascii_digit() || (c == b'.' && self.src.get(start + 1).is_some_and(u8::is_ascii_digit)) {
            return self.number(start).map(|n| (Token::Number(n), start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self
                .src
                .get(self.pos)
                .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
            {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
            return Ok((Token::Ident(text.to_string()), start));
        }
        if b"+-*/^()".contains(&c) {
            self.pos += 1;
            return Ok((Token::Op(c), start));
        }
        Err(ExprError::Syntax {
            offset: start,
            expected: "number, identifier, operator or parenthesis".into(),
        })
    }

    fn digits(&mut self) -> usize {
        let from = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        self.pos - from
    }

    fn number(&mut self, start: usize) -> Result<f64, ExprError> {
        self.digits();
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            self.digits();
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                // Not an exponent after all; let `e` lex as an identifier.
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        text.parse::<f64>().map_err(|_| ExprError::Syntax {
            offset: start,
            expected: "decimal number".into(),
        })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    current: Token,
    offset: usize,
    variables: Vec<Arc<str>>,
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(), ExprError> {
        let (tok, off) = self.lexer.next()?;
        self.current = tok;
        self.offset = off;
        Ok(())
    }

    fn error<T>(&self, expected: &str) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            offset: self.offset,
            expected: expected.to_string(),
        })
    }

    fn is_op(&self, op: u8) -> bool {
        self.current == Token::Op(op)
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.is_op(b'+') {
                self.advance()?;
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.is_op(b'-') {
                self.advance()?;
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.is_op(b'*') {
                self.advance()?;
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.is_op(b'/') {
                self.advance()?;
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.is_op(b'-') {
            self.advance()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.is_op(b'^') {
            self.advance()?;
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn expect_close(&mut self) -> Result<(), ExprError> {
        if !self.is_op(b')') {
            return self.error("`)`");
        }
        self.advance()
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.current.clone() {
            Token::Number(v) => {
                self.advance()?;
                Ok(Expr::Const(v))
            }
            Token::Ident(name) => {
                let name_offset = self.offset;
                self.advance()?;
                if self.is_op(b'(') {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(ExprError::Syntax {
                            offset: name_offset,
                            expected: "one of sin, cos, tan, exp, log, sqrt".into(),
                        });
                    };
                    self.advance()?;
                    let arg = self.expr()?;
                    self.expect_close()?;
                    return Ok(Expr::Func(func, Box::new(arg)));
                }
                match self.variables.iter().position(|v| v.as_ref() == name) {
                    Some(index) => Ok(Expr::Var(Var {
                        index,
                        name: self.variables[index].clone(),
                    })),
                    None if Func::from_name(&name).is_some() => Err(ExprError::Syntax {
                        offset: self.offset,
                        expected: format!("`(` after `{name}`"),
                    }),
                    None => Err(ExprError::UnknownVariable(name)),
                }
            }
            Token::Op(b'(') => {
                self.advance()?;
                let inner = self.expr()?;
                self.expect_close()?;
                Ok(inner)
            }
            _ => self.error("number, identifier or `(`"),
        }
    }
}

/// Parses `source` with variables resolved against the ordered `variables` list.
pub fn parse<S: AsRef<str>>(source: &str, variables: &[S]) -> Result<Expr, ExprError> {
    let mut parser = Parser {
        lexer: Lexer {
            src: source.as_bytes(),
            pos: 0,
        },
        current: Token::End,
        offset: 0,
        variables: variables.iter().map(|v| Arc::from(v.as_ref())).collect(),
    };
    parser.advance()?;
    let e = parser.expr()?;
    if parser.current != Token::End {
        return parser.error("operator or end of input");
    }
    Ok(e)
}
