//! Parameter-expression front end.
//!
//! Grammar: signed sums of terms `(rational) * q^(rational)`, e.g.
//! `1 - 3q`, `-1 + q^(3/2)`, `1/2*q^2`, `2q^(-1)`. The printer emits the
//! same grammar, so parse(print(series)) round-trips exactly.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{rat, Coeff, Rat};
use crate::series::PuiseuxSeries;

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(Coeff),
    Q,
    Star,
    Caret,
    Plus,
    Minus,
    LParen,
    RParen,
    End,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek_pos(&mut self) -> usize {
        self.skip_ws();
        self.pos
    }

    fn next(&mut self) -> Result<Tok> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(Tok::End);
        }
        let c = self.src[self.pos];
        let tok = match c {
            b'q' => {
                self.pos += 1;
                Tok::Q
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let num: BigInt = std::str::from_utf8(&self.src[start..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|_| Error::Parse {
                        pos: start,
                        msg: "bad integer".into(),
                    })?;
                // optional /den
                let save = self.pos;
                self.skip_ws();
                if self.pos < self.src.len() && self.src[self.pos] == b'/' {
                    self.pos += 1;
                    self.skip_ws();
                    let dstart = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    if dstart == self.pos {
                        return Err(Error::Parse {
                            pos: dstart,
                            msg: "expected denominator after '/'".into(),
                        });
                    }
                    let den: BigInt = std::str::from_utf8(&self.src[dstart..self.pos])
                        .unwrap()
                        .parse()
                        .unwrap();
                    if den.is_zero() {
                        return Err(Error::Parse {
                            pos: dstart,
                            msg: "zero denominator".into(),
                        });
                    }
                    Tok::Number(Coeff::new(num, den))
                } else {
                    self.pos = save;
                    Tok::Number(Coeff::from_integer(num))
                }
            }
            other => {
                return Err(Error::Parse {
                    pos: self.pos,
                    msg: format!("unexpected character '{}'", other as char),
                })
            }
        };
        Ok(tok)
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    look: Tok,
    look_pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        let mut lex = Lexer::new(src);
        let look_pos = lex.peek_pos();
        let look = lex.next()?;
        Ok(Parser { lex, look, look_pos })
    }

    fn bump(&mut self) -> Result<Tok> {
        let pos = self.lex.peek_pos();
        let next = self.lex.next()?;
        self.look_pos = pos;
        Ok(std::mem::replace(&mut self.look, next))
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse {
            pos: self.look_pos,
            msg: msg.into(),
        })
    }

    /// exponent := rational | '(' [-] rational ')'
    fn exponent(&mut self) -> Result<Rat> {
        let mut negate = false;
        let parens = self.look == Tok::LParen;
        if parens {
            self.bump()?;
        }
        if self.look == Tok::Minus {
            if !parens {
                return self.err("negative exponent requires parentheses");
            }
            negate = true;
            self.bump()?;
        }
        let value = match self.bump()? {
            Tok::Number(c) => c,
            _ => return self.err("expected exponent"),
        };
        if parens && self.bump()? != Tok::RParen {
            return self.err("expected ')'");
        }
        let num = value.numer();
        let den = value.denom();
        let to_i64 = |b: &BigInt| -> Result<i64> {
            i64::try_from(b).map_err(|_| Error::Parse {
                pos: self.look_pos,
                msg: "exponent out of range".into(),
            })
        };
        let r = rat(to_i64(num)?, to_i64(den)?);
        Ok(if negate { -r } else { r })
    }

    /// term := number | number ['*'] qpart | qpart ; qpart := 'q' ['^' exponent]
    fn term(&mut self) -> Result<(Coeff, Rat)> {
        let mut coeff = Coeff::one();
        let mut have_number = false;
        if let Tok::Number(_) = self.look {
            if let Tok::Number(c) = self.bump()? {
                coeff = c;
                have_number = true;
            }
        }
        if self.look == Tok::Star {
            self.bump()?;
            if self.look != Tok::Q {
                return self.err("expected q after '*'");
            }
        }
        let mut exp = rat(0, 1);
        if self.look == Tok::Q {
            self.bump()?;
            exp = rat(1, 1);
            if self.look == Tok::Caret {
                self.bump()?;
                exp = self.exponent()?;
            }
        } else if !have_number {
            return self.err("expected a number or q");
        }
        Ok((coeff, exp))
    }

    fn expression(&mut self) -> Result<Vec<(Rat, Coeff)>> {
        let mut out: Vec<(Rat, Coeff)> = Vec::new();
        let mut sign = Coeff::one();
        if self.look == Tok::Minus {
            self.bump()?;
            sign = -Coeff::one();
        } else if self.look == Tok::Plus {
            self.bump()?;
        }
        loop {
            let (c, e) = self.term()?;
            out.push((e, c * &sign));
            match self.bump()? {
                Tok::Plus => sign = Coeff::one(),
                Tok::Minus => sign = -Coeff::one(),
                Tok::End => break,
                _ => return self.err("expected '+', '-' or end of expression"),
            }
        }
        Ok(out)
    }
}

/// Parse a parameter expression into a series truncated at `horizon`.
pub fn parse_series(src: &str, horizon: Rat) -> Result<PuiseuxSeries> {
    let mut p = Parser::new(src)?;
    let terms = p.expression()?;
    for (e, _) in &terms {
        if *e >= horizon {
            return Err(Error::Parse {
                pos: 0,
                msg: format!("term exponent {e} at or beyond horizon {horizon}"),
            });
        }
    }
    Ok(PuiseuxSeries::from_terms(&terms, horizon))
}

/// Canonical printer matching the parser grammar exactly.
pub fn format_series(s: &PuiseuxSeries) -> String {
    if s.is_zero_truncation() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (e, c)) in s.terms().enumerate() {
        let (neg, mag) = if c.is_negative() {
            (true, -c.clone())
        } else {
            (false, c.clone())
        };
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let coeff_str = if mag.denom().is_one() {
            format!("{}", mag.numer())
        } else {
            format!("{}/{}", mag.numer(), mag.denom())
        };
        if e.is_zero() {
            out.push_str(&coeff_str);
        } else {
            if !mag.is_one() {
                out.push_str(&coeff_str);
                out.push('*');
            }
            if e == rat(1, 1) {
                out.push('q');
            } else if e.is_integer() && e > rat(0, 1) {
                out.push_str(&format!("q^{}", e.numer()));
            } else {
                out.push_str(&format!("q^({e})"));
            }
        }
    }
    out
}
