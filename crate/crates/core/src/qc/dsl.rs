//! The function language.
//!
//! ```text
//! expr   := op '(' expr (',' expr)* ')'      op ∈ sum product max min
//!         | 'neg(' expr ')' | 'abs(' expr ')'
//!         | 'prod(' expr ';' expr ')'        tensor product, dimensions add
//!         | 'trunc(' expr ',' (plus|minus) ',' number ')'
//!         | 'restrict(' expr ',' (expr | set) ')'
//!         | 'shift(' expr (',' number)+ ')'
//!         | name [':' params] | number
//! ```
//!
//! Parameters are comma-separated numbers, read greedily; `indicator:`
//! takes a set literal such as `[0,1]x(0,2)|[3,4]x[0,1]`.

use num_traits::{One, Signed, Zero};

use super::expr::{Atom, Expr};
use super::pieces::PiecewiseLinear;
use super::QcError;
use crate::rational::{int, parse_rational, Rational};
use crate::set::Multirectangle;

pub const CATALOG: &[&str] = &[
    "dirichlet",
    "thomae",
    "qn-indicator:n",
    "cos-power:m,n",
    "spike:n",
    "wide-spike:n",
    "trapezoid:n",
    "step:h,ĥ,k,f1,f2",
    "poly:c0,…,cm",
    "power:n",
    "indicator:SET",
    "exp-abs-y",
    "const:c",
    "id",
    "inv-sqrt",
];

fn labelled(pw: PiecewiseLinear, label: String) -> Expr {
    Expr::atom(Atom::Pieces { pw, label })
}

/// `n` on `(1/n, 2/n]`.
pub fn spike(n: u32) -> Expr {
    let n_r = int(n as i64);
    let pw = PiecewiseLinear::constant_pieces(&[n_r.recip(), int(2) / &n_r], &[true, true], &[Rational::zero(), n_r.clone(), Rational::zero()]);
    labelled(pw, format!("spike:{n}"))
}

/// `1/n` on `(n, 2n]`.
pub fn wide_spike(n: u32) -> Expr {
    let n_r = int(n as i64);
    let pw = PiecewiseLinear::constant_pieces(&[n_r.clone(), int(2) * &n_r], &[true, true], &[Rational::zero(), n_r.recip(), Rational::zero()]);
    labelled(pw, format!("wide-spike:{n}"))
}

/// Ramp up on `[n−2, n−1]`, one on `[n−1, n+1]`, ramp down on `[n+1, n+2]`.
pub fn trapezoid(n: u32) -> Expr {
    let c = int(n as i64);
    let one = Rational::one();
    let breaks = [&c - int(2), &c - &one, &c + &one, &c + int(2)];
    let lines = vec![
        (Rational::zero(), Rational::zero()),
        (int(2) - &c, one.clone()),
        (one.clone(), Rational::zero()),
        (&c + int(2), -one),
        (Rational::zero(), Rational::zero()),
    ];
    labelled(PiecewiseLinear::new(&breaks, &[true; 4], lines), format!("trapezoid:{n}"))
}

/// `f1` on `[h, ĥ)`, `f2` on `[ĥ, k]`, zero elsewhere.
pub fn step(h: &Rational, hh: &Rational, k: &Rational, f1: &Rational, f2: &Rational) -> Result<Expr, QcError> {
    if !(h <= hh && hh <= k) {
        return Err(QcError::BadParams("step needs h ≤ ĥ ≤ k".into()));
    }
    let pw = PiecewiseLinear::constant_pieces(
        &[h.clone(), hh.clone(), k.clone()],
        &[false, false, true],
        &[Rational::zero(), f1.clone(), f2.clone(), Rational::zero()],
    );
    let label = format!("step:{}", [h, hh, k, f1, f2].iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","));
    Ok(labelled(pw, label))
}

/// `x` on `[0, 1 − 1/n]`, zero elsewhere (`n = 0` gives the limit
/// `x·1_{[0,1)}`).
pub fn ramp(n: u32) -> Expr {
    let (end, closed) = if n == 0 { (Rational::one(), false) } else { (Rational::one() - int(n as i64).recip(), true) };
    let zero = (Rational::zero(), Rational::zero());
    let pw = PiecewiseLinear::new(&[Rational::zero(), end], &[false, closed], vec![zero.clone(), (Rational::zero(), Rational::one()), zero]);
    let label = if n == 0 { "ramp-limit".to_string() } else { format!("ramp:{n}") };
    labelled(pw, label)
}

pub fn power(n: u32) -> Expr {
    let mut c = vec![Rational::zero(); n as usize + 1];
    c[n as usize] = Rational::one();
    Expr::atom(Atom::Poly(c))
}

struct Parser<'a> {
    s: &'a str,
    pos: usize,
}

fn perr(msg: impl Into<String>) -> QcError {
    QcError::Parse(msg.into())
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += self.rest().chars().next().map_or(1, char::len_utf8);
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), QcError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(perr(format!("expected '{c}' at {:?}", self.rest())))
        }
    }

    fn ident(&mut self) -> &'a str {
        self.skip_ws();
        let len = self.rest().find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == '_')).unwrap_or(self.rest().len());
        let len = if self.rest().starts_with(|c: char| c.is_ascii_digit() || c == '-') { 0 } else { len };
        let id = &self.rest()[..len];
        self.pos += len;
        id
    }

    /// A raw token up to the next `,`, `;` or `)`.
    fn token(&mut self) -> &'a str {
        self.skip_ws();
        let len = self.rest().find([',', ';', ')']).unwrap_or(self.rest().len());
        let tok = self.rest()[..len].trim();
        self.pos += len;
        tok
    }

    fn number(&mut self) -> Result<Rational, QcError> {
        let tok = self.token();
        parse_number(tok)
    }

    /// Numbers after `name:`, taken while they parse.
    fn params(&mut self) -> Result<Vec<Rational>, QcError> {
        let mut out = vec![self.number()?];
        loop {
            let save = self.pos;
            if !self.eat(',') {
                break;
            }
            let tok = self.token();
            match parse_number(tok) {
                Ok(v) => out.push(v),
                Err(_) => {
                    self.pos = save;
                    break;
                }
            }
        }
        Ok(out)
    }

    /// A bracket-balanced set literal.
    fn set_literal(&mut self) -> Result<Multirectangle, QcError> {
        self.skip_ws();
        let mut depth = 0i32;
        let mut end = self.rest().len();
        for (i, c) in self.rest().char_indices() {
            match c {
                '[' | '(' => depth += 1,
                ']' => depth -= 1,
                ')' if depth == 0 => {
                    end = i;
                    break;
                }
                ')' => depth -= 1,
                ',' | ';' if depth == 0 => {
                    end = i;
                    break;
                }
                _ => {}
            }
        }
        let lit = &self.rest()[..end];
        self.pos += end;
        Multirectangle::parse(lit.trim()).map_err(|e| perr(format!("bad set literal {lit:?}: {e}")))
    }

    fn expr(&mut self) -> Result<Expr, QcError> {
        let start = self.pos;
        let name = self.ident();
        if name.is_empty() {
            self.pos = start;
            return Ok(Expr::constant(self.number()?));
        }
        if self.peek() == Some('(') {
            self.pos += 1;
            let e = self.call(name)?;
            self.expect(')')?;
            return Ok(e);
        }
        self.atom(name)
    }

    fn call(&mut self, name: &str) -> Result<Expr, QcError> {
        let fold = |args: Vec<Expr>, op: fn(Box<Expr>, Box<Expr>) -> Expr| -> Result<Expr, QcError> {
            let mut it = args.into_iter();
            let first = it.next().ok_or_else(|| perr("empty argument list"))?;
            Ok(it.fold(first, |a, b| op(Box::new(a), Box::new(b))))
        };
        match name {
            "sum" | "product" | "max" | "min" => {
                let mut args = vec![self.expr()?];
                while self.eat(',') {
                    args.push(self.expr()?);
                }
                if args.len() < 2 {
                    return Err(perr(format!("{name} needs two or more arguments")));
                }
                check_dims(&args)?;
                let op = match name {
                    "sum" => Expr::Sum,
                    "product" => Expr::Product,
                    "max" => Expr::Max,
                    _ => Expr::Min,
                };
                fold(args, op)
            }
            "neg" => Ok(Expr::Neg(Box::new(self.expr()?))),
            "abs" => {
                let f = self.expr()?;
                Ok(Expr::Max(Box::new(f.clone()), Box::new(Expr::Neg(Box::new(f)))))
            }
            "prod" => {
                let f = self.expr()?;
                self.expect(';')?;
                let g = self.expr()?;
                Ok(Expr::Tensor(Box::new(f), Box::new(g)))
            }
            "trunc" => {
                let f = self.expr()?;
                self.expect(',')?;
                let mode = self.token();
                self.expect(',')?;
                let level = self.token();
                let n = match level {
                    "inf" | "+inf" | "-inf" => None,
                    t => Some(parse_number(t)?),
                };
                let mode = match mode {
                    "plus" => super::Truncation::Plus,
                    "minus" => super::Truncation::Minus,
                    m => return Err(perr(format!("truncation mode must be plus or minus, got {m:?}"))),
                };
                Ok(super::truncate_expr(f, mode, n))
            }
            "restrict" => {
                let f = self.expr()?;
                self.expect(',')?;
                let a = if matches!(self.peek(), Some('[') | Some('(')) { Expr::atom(Atom::Indicator(self.set_literal()?)) } else { self.expr()? };
                if !super::is_characteristic(&a) {
                    return Err(QcError::NotCharacteristic);
                }
                check_dims(&[f.clone(), a.clone()])?;
                Ok(Expr::Product(Box::new(f), Box::new(a)))
            }
            "shift" => {
                let f = self.expr()?;
                let mut alpha = Vec::new();
                while self.eat(',') {
                    alpha.push(self.number()?);
                }
                if alpha.len() != f.dim() {
                    return Err(QcError::BadParams(format!("shift needs {} offsets", f.dim())));
                }
                Ok(Expr::Shift(Box::new(f), alpha))
            }
            other => Err(QcError::UnknownName(other.to_string())),
        }
    }

    fn atom(&mut self, name: &str) -> Result<Expr, QcError> {
        let has_params = self.eat(':');
        if name == "indicator" {
            if !has_params {
                return Err(QcError::BadParams("indicator needs a set".into()));
            }
            let set = self.set_literal()?;
            return Ok(Expr::atom(Atom::Indicator(set)));
        }
        let p = if has_params { self.params()? } else { Vec::new() };
        catalog_atom(name, &p)
    }
}

fn check_dims(args: &[Expr]) -> Result<(), QcError> {
    let dims: Vec<usize> = args.iter().map(Expr::raw_dim).filter(|&d| d > 0).collect();
    if dims.windows(2).any(|w| w[0] != w[1]) {
        return Err(QcError::DomainMismatch(format!("operand dimensions {dims:?} differ")));
    }
    Ok(())
}

fn parse_number(tok: &str) -> Result<Rational, QcError> {
    parse_rational(tok.trim()).map_err(|_| perr(format!("not a number: {tok:?}")))
}

fn count(p: &Rational, what: &str) -> Result<u32, QcError> {
    if !p.is_integer() || !p.is_positive() {
        return Err(QcError::BadParams(format!("{what} must be a positive integer")));
    }
    u32::try_from(p.to_integer()).map_err(|_| QcError::BadParams(format!("{what} too large")))
}

fn arity(name: &str, p: &[Rational], n: usize) -> Result<(), QcError> {
    if p.len() != n {
        return Err(QcError::BadParams(format!("{name} takes {n} parameter(s), got {}", p.len())));
    }
    Ok(())
}

fn catalog_atom(name: &str, p: &[Rational]) -> Result<Expr, QcError> {
    Ok(match name {
        "dirichlet" | "thomae" | "exp-abs-y" | "inv-sqrt" | "id" => {
            arity(name, p, 0)?;
            match name {
                "dirichlet" => Expr::atom(Atom::Dirichlet),
                "thomae" => Expr::atom(Atom::Thomae),
                "exp-abs-y" => Expr::atom(Atom::ExpAbsY),
                "inv-sqrt" => Expr::atom(Atom::InvSqrt),
                _ => power(1),
            }
        }
        "qn-indicator" => {
            arity(name, p, 1)?;
            Expr::atom(Atom::Qn(count(&p[0], "n")?))
        }
        "cos-power" => {
            arity(name, p, 2)?;
            let m = count(&p[0], "m")?;
            if m > 20 {
                return Err(QcError::BadParams("m! must fit in 64 bits (m ≤ 20)".into()));
            }
            Expr::atom(Atom::CosPower { m, n: count(&p[1], "n")? })
        }
        "spike" => {
            arity(name, p, 1)?;
            spike(count(&p[0], "n")?)
        }
        "wide-spike" => {
            arity(name, p, 1)?;
            wide_spike(count(&p[0], "n")?)
        }
        "trapezoid" => {
            arity(name, p, 1)?;
            trapezoid(count(&p[0], "n")?)
        }
        "ramp" => {
            arity(name, p, 1)?;
            ramp(count(&p[0], "n")?)
        }
        "step" => {
            arity(name, p, 5)?;
            step(&p[0], &p[1], &p[2], &p[3], &p[4])?
        }
        "poly" => {
            if p.is_empty() {
                return Err(QcError::BadParams("poly needs coefficients".into()));
            }
            Expr::atom(Atom::Poly(p.to_vec()))
        }
        "power" => {
            arity(name, p, 1)?;
            let n = if p[0].is_zero() { 0 } else { count(&p[0], "n")? };
            power(n)
        }
        "const" => {
            arity(name, p, 1)?;
            Expr::constant(p[0].clone())
        }
        other => return Err(QcError::UnknownName(other.to_string())),
    })
}

pub fn parse_expr(text: &str) -> Result<Expr, QcError> {
    let mut p = Parser { s: text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if !p.rest().is_empty() {
        return Err(perr(format!("trailing input {:?}", p.rest())));
    }
    Ok(e)
}

/// Parses a set argument: a set literal, or an expression that must be a
/// characteristic function.
pub fn parse_set(text: &str) -> Result<Expr, QcError> {
    let t = text.trim();
    let e = if t.starts_with('[') || t.starts_with('(') {
        Expr::atom(Atom::Indicator(Multirectangle::parse(t).map_err(|e| perr(e.to_string()))?))
    } else {
        parse_expr(t)?
    };
    if !super::is_characteristic(&e) {
        return Err(QcError::NotCharacteristic);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qc::expr::Coord;
    use crate::rational::rat;

    fn at(e: &Expr, x: Rational) -> Option<Rational> {
        e.eval_exact(&[x])
    }

    #[test]
    fn atoms() {
        assert_eq!(at(&parse_expr("spike:4").unwrap(), rat(3, 8)), Some(int(4)));
        assert_eq!(at(&parse_expr("spike:4").unwrap(), rat(1, 4)), Some(int(0)));
        let s = parse_expr("step:0,1/2,1,2,5").unwrap();
        assert_eq!(at(&s, rat(1, 4)), Some(int(2)));
        assert_eq!(at(&s, rat(1, 2)), Some(int(5)));
        assert_eq!(s.to_string(), "step:0,1/2,1,2,5");
        assert_eq!(at(&parse_expr("trapezoid:5").unwrap(), rat(7, 2)), Some(rat(1, 2)));
        assert_eq!(at(&parse_expr("wide-spike:3").unwrap(), int(5)), Some(rat(1, 3)));
    }

    #[test]
    fn composites() {
        let e = parse_expr("sum(dirichlet,poly:0,1)").unwrap();
        assert_eq!(at(&e, rat(1, 2)), Some(rat(3, 2)));
        assert_eq!(e.eval(&[Coord::Sampled(0.25)]), 0.25);
        let p = parse_expr("product(dirichlet,const:3)").unwrap();
        assert_eq!(at(&p, rat(1, 2)), Some(int(3)));
        let t = parse_expr("prod(poly:0,1;poly:0,1)").unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.eval_exact(&[rat(1, 2), int(3)]), Some(rat(3, 2)));
        let tr = parse_expr("trunc(id,plus,1)").unwrap();
        assert_eq!(at(&tr, int(0)), Some(int(1)));
        let ind = parse_expr("indicator:[0,1]x[0,1]|[2,3]x(0,1)").unwrap();
        assert_eq!(ind.dim(), 2);
        assert_eq!(parse_expr("trunc(dirichlet,minus,0)").unwrap().eval_exact(&[rat(1, 3)]), Some(int(0)));
        assert_eq!(parse_expr("trunc(id,plus,-inf)").unwrap(), power(1));
    }

    #[test]
    fn restrict_and_errors() {
        let r = parse_expr("restrict(id,[0,5/32]|[7/32,3/8])").unwrap();
        assert_eq!(at(&r, rat(1, 5)), Some(int(0)));
        assert_eq!(at(&r, rat(1, 8)), Some(rat(1, 8)));
        assert_eq!(parse_expr("restrict(id,poly:0,1)").unwrap_err(), QcError::NotCharacteristic);
        assert!(matches!(parse_expr("nope"), Err(QcError::UnknownName(_))));
        assert!(matches!(parse_expr("spike:0"), Err(QcError::BadParams(_))));
        assert!(matches!(parse_expr("sum(id,exp-abs-y)"), Err(QcError::DomainMismatch(_))));
    }

    #[test]
    fn display_round_trips() {
        for s in ["sum(dirichlet,poly:0,1)", "max(spike:3,const:1/2)", "prod(poly:0,1;exp-abs-y)", "qn-indicator:7", "cos-power:2,3", "neg(thomae)"] {
            let e = parse_expr(s).unwrap();
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{s}");
        }
    }
}
