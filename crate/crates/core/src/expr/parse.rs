//! Recursive-descent parser for defining-function expressions.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := atom ("^" integer)? | "-" factor
//! atom   := number | "i" | "z" integer | func "(" expr ")" | "(" expr ")"
//! func   := "conj" | "re" | "im" | "abs2" | "exp"
//! ```

use super::ast::{Ast, Node};
use crate::error::{Error, Result};

pub fn parse(text: &str) -> Result<Ast> {
    let mut p = Parser { src: text, pos: 0 };
    p.skip_ws();
    let root = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(Ast::new(root, 0))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn syntax(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(ch) = self.peek() {
            if !ch.is_whitespace() {
                break;
            }
            self.pos += ch.len_utf8();
        }
    }

    fn eat(&mut self, ch: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += ch.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, ch: char) -> Result<()> {
        if self.eat(ch) {
            Ok(())
        } else {
            self.skip_ws();
            Err(self.syntax(&format!("expected `{ch}`")))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::add(lhs, self.term()?);
            } else if self.eat('-') {
                lhs = Node::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = Node::mul(lhs, self.factor()?);
            } else if self.eat('/') {
                lhs = Node::div(lhs, self.factor()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(match self.factor()? {
                Node::Const(z) => Node::Const(-z),
                other => Node::mul(Node::constant(-1.0, 0.0), other),
            });
        }
        let base = self.atom()?;
        if self.eat('^') {
            self.skip_ws();
            let negative = self.eat('-');
            self.skip_ws();
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                return Err(self.syntax("expected integer exponent"));
            }
            let k: i32 = digits.parse().map_err(|_| Error::Syntax {
                offset: start,
                message: "exponent out of range".into(),
            })?;
            return Ok(Node::Pow(Box::new(base), if negative { -k } else { k }));
        }
        Ok(base)
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        self.digits();
        if self.peek() == Some('.') {
            self.pos += 1;
            self.digits();
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.digits().is_empty() {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .map(|x| Node::constant(x, 0.0))
            .map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })
    }

    fn atom(&mut self) -> Result<Node> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
                    self.pos += 1;
                }
                let word = &self.src[start..self.pos];
                self.word(word, start)
            }
            Some(_) => Err(self.syntax("expected operand")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn word(&mut self, word: &str, start: usize) -> Result<Node> {
        if word == "i" {
            return Ok(Node::constant(0.0, 1.0));
        }
        if let Some(index) = word.strip_prefix('z') {
            if !index.is_empty() && index.bytes().all(|b| b.is_ascii_digit()) {
                let j: usize = index.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: "variable index out of range".into(),
                })?;
                if j == 0 {
                    return Err(Error::ZeroVariableIndex { offset: start });
                }
                return Ok(Node::Var(j - 1));
            }
        }
        let func = match word {
            "conj" | "re" | "im" | "abs2" | "exp" => word,
            _ => {
                return Err(Error::UnknownFunction {
                    name: word.to_string(),
                    offset: start,
                })
            }
        };
        self.expect('(')?;
        let arg = self.expr()?;
        self.expect(')')?;
        Ok(match func {
            "conj" => Node::conj(arg),
            "exp" => Node::Exp(Box::new(arg)),
            // re(u) = (u + conj(u)) / 2
            "re" => Node::div(
                Node::add(arg.clone(), Node::conj(arg)),
                Node::constant(2.0, 0.0),
            ),
            // im(u) = (u - conj(u)) / 2i
            "im" => Node::div(
                Node::sub(arg.clone(), Node::conj(arg)),
                Node::constant(0.0, 2.0),
            ),
            // abs2(u) = u * conj(u)
            "abs2" => Node::mul(arg.clone(), Node::conj(arg)),
            _ => unreachable!(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_and_saddle_dimensions() {
        assert_eq!(parse("abs2(z1)+abs2(z2)-1").unwrap().dim(), 2);
        assert_eq!(parse("re(z2)-abs2(z1)").unwrap().dim(), 2);
        assert_eq!(parse("re(z3)-abs2(z1)-abs2(z2)").unwrap().dim(), 3);
        assert_eq!(parse("z12 * 2").unwrap().dim(), 12);
    }

    #[test]
    fn syntax_error_offset() {
        assert_eq!(
            parse("z1 + *").unwrap_err(),
            Error::Syntax {
                offset: 5,
                message: "expected operand".into()
            }
        );
    }

    #[test]
    fn zero_index_and_unknown_function() {
        assert_eq!(
            parse("1 + z0").unwrap_err(),
            Error::ZeroVariableIndex { offset: 4 }
        );
        assert!(matches!(
            parse("log(z1)").unwrap_err(),
            Error::UnknownFunction { ref name, offset: 0 } if name == "log"
        ));
    }

    #[test]
    fn malformed_inputs() {
        for bad in ["", "(z1", "z1)", "z1^", "z1 z2", "abs2 z1", "1.2.3", "z"] {
            assert!(parse(bad).is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn precedence_and_powers() {
        let ast = parse("-z1^2*3").unwrap();
        // -(z1^2) * 3
        assert_eq!(
            ast.root(),
            &Node::mul(
                Node::mul(
                    Node::constant(-1.0, 0.0),
                    Node::Pow(Box::new(Node::Var(0)), 2)
                ),
                Node::constant(3.0, 0.0)
            )
        );
        assert_eq!(
            parse("z1^-2").unwrap().root(),
            &Node::Pow(Box::new(Node::Var(0)), -2)
        );
        assert_eq!(
            parse("1.5e-3").unwrap().root(),
            &Node::constant(1.5e-3, 0.0)
        );
        assert_eq!(parse("-2").unwrap().root(), &Node::constant(-2.0, 0.0));
    }
}
