//! Behavioural-source expression grammar.

use std::fmt;

/// Expression over constants, node voltages, branch currents, time and
/// time derivatives. `NodeVoltage(a, Some(b))` is the pair form V(a,b);
/// `NodeVoltage(a, None)` reads against ground.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Const(f64),
    NodeVoltage(String, Option<String>),
    BranchCurrent(String),
    Time,
    Ddt(Box<Expression>),
    Neg(Box<Expression>),
    Add(Box<Expression>, Box<Expression>),
    Sub(Box<Expression>, Box<Expression>),
    Mul(Box<Expression>, Box<Expression>),
    Div(Box<Expression>, Box<Expression>),
}

impl Expression {
    pub fn constant(v: f64) -> Expression {
        Expression::Const(v)
    }

    pub fn v(node: &str) -> Expression {
        Expression::NodeVoltage(node.to_string(), None)
    }

    pub fn v2(a: &str, b: &str) -> Expression {
        Expression::NodeVoltage(a.to_string(), Some(b.to_string()))
    }

    pub fn i(elem: &str) -> Expression {
        Expression::BranchCurrent(elem.to_string())
    }

    pub fn ddt(e: Expression) -> Expression {
        Expression::Ddt(Box::new(e))
    }

    pub fn add(a: Expression, b: Expression) -> Expression {
        Expression::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expression, b: Expression) -> Expression {
        Expression::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expression, b: Expression) -> Expression {
        Expression::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expression, b: Expression) -> Expression {
        Expression::Div(Box::new(a), Box::new(b))
    }

    /// Sum of expressions, or 0 for an empty list.
    pub fn sum(mut terms: Vec<Expression>) -> Expression {
        if terms.is_empty() {
            return Expression::Const(0.0);
        }
        let mut acc = terms.remove(0);
        for t in terms {
            acc = Expression::add(acc, t);
        }
        acc
    }

    /// Collect the node names and element names the expression reads.
    pub fn references(&self, nodes: &mut Vec<String>, elems: &mut Vec<String>) {
        match self {
            Expression::Const(_) | Expression::Time => {}
            Expression::NodeVoltage(a, b) => {
                if !nodes.contains(a) {
                    nodes.push(a.clone());
                }
                if let Some(b) = b {
                    if !nodes.contains(b) {
                        nodes.push(b.clone());
                    }
                }
            }
            Expression::BranchCurrent(e) => {
                if !elems.contains(e) {
                    elems.push(e.clone());
                }
            }
            Expression::Ddt(e) | Expression::Neg(e) => e.references(nodes, elems),
            Expression::Add(a, b)
            | Expression::Sub(a, b)
            | Expression::Mul(a, b)
            | Expression::Div(a, b) => {
                a.references(nodes, elems);
                b.references(nodes, elems);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expression::Add(..) | Expression::Sub(..) => 1,
            Expression::Mul(..) | Expression::Div(..) => 2,
            Expression::Neg(..) => 3,
            _ => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8, right: bool) -> fmt::Result {
        let prec = self.precedence();
        // a right operand at equal precedence needs parentheses to keep the
        // tree shape through a left-associative parser
        let need = prec < parent || (right && prec == parent);
        if need {
            write!(f, "(")?;
        }
        match self {
            Expression::Const(v) => write!(f, "{}", crate::serialize::fmt_f64(*v))?,
            Expression::NodeVoltage(a, None) => write!(f, "V({a})")?,
            Expression::NodeVoltage(a, Some(b)) => write!(f, "V({a},{b})")?,
            Expression::BranchCurrent(e) => write!(f, "I({e})")?,
            Expression::Time => write!(f, "time")?,
            Expression::Ddt(e) => write!(f, "DDT({e})")?,
            Expression::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 3, true)?;
            }
            Expression::Add(a, b) => {
                a.fmt_prec(f, 1, false)?;
                write!(f, "+")?;
                b.fmt_prec(f, 1, true)?;
            }
            Expression::Sub(a, b) => {
                a.fmt_prec(f, 1, false)?;
                write!(f, "-")?;
                b.fmt_prec(f, 1, true)?;
            }
            Expression::Mul(a, b) => {
                a.fmt_prec(f, 2, false)?;
                write!(f, "*")?;
                b.fmt_prec(f, 2, true)?;
            }
            Expression::Div(a, b) => {
                a.fmt_prec(f, 2, false)?;
                write!(f, "/")?;
                b.fmt_prec(f, 2, true)?;
            }
        }
        if need {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0, false)
    }
}

/// Recursive-descent expression parser over a byte cursor.
pub(crate) struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> ExprParser<'a> {
    pub fn new(src: &'a str) -> Self {
        ExprParser {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    pub fn parse_full(mut self) -> Result<Expression, String> {
        let e = self.parse_sum()?;
        if self.pos != self.src.len() {
            return Err(format!(
                "trailing characters in expression at byte {}",
                self.pos
            ));
        }
        Ok(e)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_sum(&mut self) -> Result<Expression, String> {
        let mut acc = self.parse_term()?;
        loop {
            if self.eat(b'+') {
                acc = Expression::add(acc, self.parse_term()?);
            } else if self.eat(b'-') {
                acc = Expression::sub(acc, self.parse_term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expression, String> {
        let mut acc = self.parse_factor()?;
        loop {
            if self.eat(b'*') {
                acc = Expression::mul(acc, self.parse_factor()?);
            } else if self.eat(b'/') {
                acc = Expression::div(acc, self.parse_factor()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_factor(&mut self) -> Result<Expression, String> {
        if self.eat(b'-') {
            // fold negation of literals so serialisation round-trips
            return Ok(match self.parse_factor()? {
                Expression::Const(v) => Expression::Const(-v),
                other => Expression::Neg(Box::new(other)),
            });
        }
        if self.eat(b'(') {
            let e = self.parse_sum()?;
            if !self.eat(b')') {
                return Err("expected ')'".into());
            }
            return Ok(e);
        }
        let rest = &self.src[self.pos..];
        if rest.len() >= 2 && (rest[0] == b'V' || rest[0] == b'v') && rest[1] == b'(' {
            self.pos += 2;
            let a = self.parse_name()?;
            if self.eat(b',') {
                let b = self.parse_name()?;
                if !self.eat(b')') {
                    return Err("expected ')' after V(a,b".into());
                }
                return Ok(Expression::NodeVoltage(a, Some(b)));
            }
            if !self.eat(b')') {
                return Err("expected ')' after V(a".into());
            }
            return Ok(Expression::NodeVoltage(a, None));
        }
        if rest.len() >= 2 && (rest[0] == b'I' || rest[0] == b'i') && rest[1] == b'(' {
            self.pos += 2;
            let e = self.parse_name()?;
            if !self.eat(b')') {
                return Err("expected ')' after I(name".into());
            }
            return Ok(Expression::BranchCurrent(e));
        }
        if rest.len() >= 4 && rest[..4].eq_ignore_ascii_case(b"DDT(") {
            self.pos += 4;
            let e = self.parse_sum()?;
            if !self.eat(b')') {
                return Err("expected ')' after DDT(".into());
            }
            return Ok(Expression::ddt(e));
        }
        if rest.len() >= 4 && rest[..4].eq_ignore_ascii_case(b"time") {
            self.pos += 4;
            return Ok(Expression::Time);
        }
        self.parse_number()
    }

    fn parse_name(&mut self) -> Result<String, String> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(format!("expected a name at byte {start}"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn parse_number(&mut self) -> Result<Expression, String> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            let ok = c.is_ascii_digit()
                || c == b'.'
                || (c == b'e' || c == b'E')
                || ((c == b'+' || c == b'-')
                    && self.pos > start
                    && matches!(self.src[self.pos - 1], b'e' | b'E'));
            if ok {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(format!("expected a number at byte {start}"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        s.parse::<f64>()
            .map(Expression::Const)
            .map_err(|e| format!("bad number '{s}': {e}"))
    }
}

/// Parse an expression string (no whitespace expected).
pub fn parse_expression(src: &str) -> Result<Expression, String> {
    let cleaned: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    ExprParser::new(&cleaned).parse_full()
}
