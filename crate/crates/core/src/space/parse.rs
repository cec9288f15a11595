//! Recursive-descent parser for space expressions.
//!
//! ```text
//! expr    := lp | sb | davis
//! lp      := "lp(" REAL ")"
//! sb      := "sb(" expr "," "r=" REAL ")"
//! davis   := "davis(" expr "," "q=" REAL "," "p=" REAL "," "m=" sched ("," trunc)? ")"
//! sched   := "pow2" | "lin" | "[" REAL ("," REAL)* "]"
//! trunc   := "K=" INT | "eps=" REAL
//! ```
//!
//! Whitespace is allowed between tokens. Parameter constraints are checked
//! as the nodes are built and reported as semantic errors at the offending
//! value.

use crate::davis::{DavisParams, Schedule, Truncation};
use crate::error::{ParseError, ParseErrorKind};
use crate::space::expr::{SpaceExpr, SpaceNode};

type PResult<T> = std::result::Result<T, ParseError>;

pub fn parse(text: &str) -> crate::Result<SpaceExpr> {
    let mut parser = Parser { src: text, pos: 0 };
    let root = parser.expr()?;
    parser.skip_ws();
    if parser.pos < text.len() {
        return Err(parser.syntax(&["end of input"]).into());
    }
    Ok(SpaceExpr {
        root,
        source: Some(text.to_string()),
    })
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn found(&self) -> String {
        match self.rest().chars().next() {
            None => "end of input".into(),
            Some(_) => {
                let token: String = self.rest().chars().take(12).collect();
                format!("{token:?}")
            }
        }
    }

    fn syntax(&self, expected: &[&str]) -> ParseError {
        ParseError {
            kind: ParseErrorKind::Syntax,
            position: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.found(),
            message: format!("unexpected {}", self.found()),
        }
    }

    fn semantic(&self, position: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            kind: ParseErrorKind::Semantic,
            position,
            expected: Vec::new(),
            found: String::new(),
            message: message.into(),
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> PResult<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.syntax(&[&format!("\"{token}\"")]))
        }
    }

    /// Keyword followed by "=", e.g. `r=`; whitespace allowed around "=".
    fn key(&mut self, name: &str) -> PResult<()> {
        self.skip_ws();
        let start = self.pos;
        if self.eat(name) && self.eat("=") {
            return Ok(());
        }
        self.pos = start;
        Err(self.syntax(&[&format!("\"{name}=\"")]))
    }

    fn number_span(&mut self) -> (usize, &'a str) {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() {
            let c = bytes[end];
            let sign_ok = (c == b'+' || c == b'-') && (end == start || matches!(bytes[end - 1], b'e' | b'E'));
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || sign_ok {
                end += 1;
            } else {
                break;
            }
        }
        (start, &self.src[start..end])
    }

    fn real(&mut self) -> PResult<(usize, f64)> {
        let (start, span) = self.number_span();
        match span.parse::<f64>() {
            Ok(v) if v.is_finite() && span.bytes().any(|b| b.is_ascii_digit()) => {
                self.pos = start + span.len();
                Ok((start, v))
            }
            _ => {
                self.pos = start;
                Err(self.syntax(&["REAL"]))
            }
        }
    }

    fn int(&mut self) -> PResult<(usize, usize)> {
        self.skip_ws();
        let start = self.pos;
        let digits = self.rest().bytes().take_while(|b| b.is_ascii_digit()).count();
        let span = &self.src[start..start + digits];
        match span.parse::<usize>() {
            Ok(v) => {
                self.pos = start + digits;
                Ok((start, v))
            }
            Err(_) => Err(self.syntax(&["INT"])),
        }
    }

    fn expr(&mut self) -> PResult<SpaceNode> {
        self.skip_ws();
        if self.eat("lp(") {
            self.lp()
        } else if self.eat("sb(") {
            self.sb()
        } else if self.eat("davis(") {
            self.davis()
        } else {
            Err(self.syntax(&["\"lp(\"", "\"sb(\"", "\"davis(\""]))
        }
    }

    fn lp(&mut self) -> PResult<SpaceNode> {
        let (at, p) = self.real()?;
        if !(p >= 1.0) {
            return Err(self.semantic(at, format!("lp requires p ≥ 1, got {p}")));
        }
        self.expect(")")?;
        Ok(SpaceNode::Lp { p })
    }

    fn sb(&mut self) -> PResult<SpaceNode> {
        let child = self.expr()?;
        self.expect(",")?;
        self.key("r")?;
        let (at, r) = self.real()?;
        if !(r >= 1.0) {
            return Err(self.semantic(at, format!("sb requires r ≥ 1, got {r}")));
        }
        self.expect(")")?;
        Ok(SpaceNode::Sb {
            child: Box::new(child),
            r,
        })
    }

    fn davis(&mut self) -> PResult<SpaceNode> {
        let child = self.expr()?;
        self.expect(",")?;
        self.key("q")?;
        let (q_at, q) = self.real()?;
        self.expect(",")?;
        self.key("p")?;
        let (p_at, p) = self.real()?;
        if !(q > 1.0) {
            return Err(self.semantic(q_at, format!("davis requires q > 1, got {q}")));
        }
        if !(q < p) {
            return Err(self.semantic(p_at, format!("davis requires q < p, got q={q}, p={p}")));
        }
        self.expect(",")?;
        self.key("m")?;
        self.skip_ws();
        let sched_at = self.pos;
        let schedule = self.schedule()?;
        if let Err(e) = schedule.validate() {
            return Err(self.semantic(sched_at, e.to_string()));
        }
        let mut truncation = None;
        let mut trunc_at = self.pos;
        if self.eat(",") {
            self.skip_ws();
            trunc_at = self.pos;
            let start = self.pos;
            if self.eat("K") && self.eat("=") {
                truncation = Some(Truncation::Fixed(self.int()?.1));
            } else {
                self.pos = start;
                if self.eat("eps") && self.eat("=") {
                    let (at, eps) = self.real()?;
                    if !(eps > 0.0) {
                        return Err(self.semantic(at, format!("eps must be positive, got {eps}")));
                    }
                    truncation = Some(Truncation::Eps(eps));
                } else {
                    self.pos = start;
                    return Err(self.syntax(&["\"K=\"", "\"eps=\""]));
                }
            }
        }
        let params = DavisParams {
            truncation,
            ..DavisParams::new(q, p, schedule.clone())
        };
        if let Err(e) = params.resolved_truncation() {
            return Err(self.semantic(trunc_at, e.to_string()));
        }
        self.expect(")")?;
        Ok(SpaceNode::Davis {
            child: Box::new(child),
            q,
            p,
            schedule,
            truncation,
        })
    }

    fn schedule(&mut self) -> PResult<Schedule> {
        if self.eat("pow2") {
            return Ok(Schedule::Pow2);
        }
        if self.eat("lin") {
            return Ok(Schedule::Lin);
        }
        if self.eat("[") {
            let mut ms = vec![self.real()?.1];
            while self.eat(",") {
                ms.push(self.real()?.1);
            }
            self.expect("]")?;
            return Ok(Schedule::Explicit(ms));
        }
        Err(self.syntax(&["\"pow2\"", "\"lin\"", "\"[\""]))
    }
}
