use super::{BinOp, Expr, Func};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn syntax(&self, position: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            position,
            message: message.into(),
        }
    }

    /// Returns the token and its byte position.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let tok = match c {
            b'0'..=b'9' | b'.' => {
                let mut end = start;
                while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                    end += 1;
                }
                if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                    let mut exp_end = end + 1;
                    if exp_end < bytes.len() && (bytes[exp_end] == b'+' || bytes[exp_end] == b'-') {
                        exp_end += 1;
                    }
                    if exp_end < bytes.len() && bytes[exp_end].is_ascii_digit() {
                        while exp_end < bytes.len() && bytes[exp_end].is_ascii_digit() {
                            exp_end += 1;
                        }
                        end = exp_end;
                    }
                }
                let text = &self.src[start..end];
                let value: f64 = text
                    .parse()
                    .map_err(|_| self.syntax(start, format!("malformed number `{text}`")))?;
                self.pos = end;
                Tok::Num(value)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = start;
                while end < bytes.len()
                    && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                self.pos = end;
                Tok::Ident(self.src[start..end].to_string())
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(c as char)
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(self.syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        Ok((tok, start))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
    allowed: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            position: self.at,
            message: message.into(),
        }
    }

    // expr := term (("+" | "-") term)*
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = self.tok {
            self.advance()?;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    // term := unary (("*" | "/") unary)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = self.tok {
            self.advance()?;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    // unary := "-" unary | "+" unary | power
    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.tok {
            Tok::Op('-') => {
                self.advance()?;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.advance()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    // power := primary ("^" unary)?    (right associative)
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.tok == Tok::Op('^') {
            self.advance()?;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    // primary := number | ident | func "(" expr ")" | "(" expr ")"
    fn primary(&mut self) -> Result<Expr, ParseError> {
        match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::Ident(name) => {
                self.advance()?;
                if let Some(func) = Func::from_name(&name) {
                    if self.tok != Tok::LParen {
                        return Err(self.error(format!("expected `(` after `{name}`")));
                    }
                    self.advance()?;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if !self.allowed.contains(&name.as_str()) {
                    return Err(ParseError::UnknownIdentifier(name));
                }
                Ok(Expr::Var(name))
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::End => Err(self.error("unexpected end of input")),
            other => {
                self.tok = other.clone();
                Err(self.error(format!("unexpected token {}", describe(&other))))
            }
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.tok != Tok::RParen {
            return Err(self.error("expected `)`"));
        }
        self.advance()
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parses `text` with the given set of admissible variable and parameter
/// names. Function names (`sin`, `cos`, `exp`, `log`, `sqrt`, `abs`) are
/// reserved.
pub fn parse_expression(text: &str, allowed: &[&str]) -> Result<Expr, ParseError> {
    let mut lexer = Lexer { src: text, pos: 0 };
    let (tok, at) = lexer.next()?;
    if tok == Tok::End {
        return Err(ParseError::Syntax {
            position: 0,
            message: "empty expression".into(),
        });
    }
    let mut parser = Parser {
        lexer,
        tok,
        at,
        allowed,
    };
    let expr = parser.expr()?;
    if parser.tok != Tok::End {
        return Err(parser.error(format!("unexpected token {}", describe(&parser.tok))));
    }
    Ok(expr)
}
