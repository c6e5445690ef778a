//! Structured-text weight specifications.
//!
//! ```text
//! spec    := term ( '*' term )*
//! term    := '(' spec ')' | family
//! family  := NAME [ ':' NUMBER ] ( KEY '=' value )*
//! value   := NUMBER | WORD | '(' spec ')'
//! ```
//!
//! Families:
//!
//! | name         | keys                         | one variable                  | two variables                                  |
//! |--------------|------------------------------|-------------------------------|------------------------------------------------|
//! | `const`      | `value` (default 1)          | `value`                       | `value`                                        |
//! | `power`      | `alpha`, `center` (2 pi / 3) | `abs(e^{it} - e^{ic})^alpha`  | `(abs(z1 - e^{ic})^2 + abs(z2 - e^{ic})^2)^{alpha/2}` |
//! | `exp-cos`    | `eps`                        | `exp(eps cos t)`              | `exp(eps cos(t1 + t2))`                        |
//! | `separating` | `a`, `b` (specs)             | not available                 | `a(z1) b(z2)`                                  |
//! | `product`    | `a`, `b` (specs)             | `a b`                         | `a b`                                          |
//! | `file`       | `path`                       | TORUS v1 file                 | TORUS v1 file                                  |
//!
//! `NAME:NUMBER` sets the main parameter, so `power:0.3` is `power alpha=0.3` and
//! `const:2` is `const value=2`. Nested specs are written in parentheses:
//! `separating a=const b=(power alpha=0.5)`.
//!
//! The default power center `2 pi / 3` is never a grid angle on a power-of-two grid,
//! so the weight stays finite and positive at every sample.

use std::f64::consts::TAU;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::{Weight1D, Weight2D};
use crate::error::{Error, Result};
use crate::torus::io::{self, TorusData};
use crate::torus::Grid1D;

pub const DEFAULT_POWER_CENTER: f64 = TAU / 3.0;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Const(f64),
    Power { alpha: f64, center: f64 },
    ExpCos { eps: f64 },
    Separating(Box<WeightSpec>, Box<WeightSpec>),
    Product(Vec<WeightSpec>),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Star,
    Eq,
    Word(String),
}

fn tokenize(s: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut Vec<Token>| {
        if !word.is_empty() {
            out.push(Token::Word(std::mem::take(word)));
        }
    };
    for ch in s.chars() {
        let tok = match ch {
            '(' => Some(Token::Open),
            ')' => Some(Token::Close),
            '*' => Some(Token::Star),
            '=' => Some(Token::Eq),
            c if c.is_whitespace() => None,
            c => {
                word.push(c);
                continue;
            }
        };
        flush(&mut word, &mut out);
        if let Some(t) = tok {
            out.push(t);
        }
    }
    flush(&mut word, &mut out);
    out
}

enum Value {
    Word(String),
    Spec(WeightSpec),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::SpecParse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn spec(&mut self) -> Result<WeightSpec> {
        let mut terms = vec![self.term()?];
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            WeightSpec::Product(terms)
        })
    }

    fn term(&mut self) -> Result<WeightSpec> {
        match self.next() {
            Some(Token::Open) => {
                let s = self.spec()?;
                match self.next() {
                    Some(Token::Close) => Ok(s),
                    _ => Err(self.err("expected `)`")),
                }
            }
            Some(Token::Word(w)) => self.family(&w),
            _ => Err(self.err("expected a weight family")),
        }
    }

    fn value(&mut self) -> Result<Value> {
        match self.next() {
            Some(Token::Open) => {
                let s = self.spec()?;
                match self.next() {
                    Some(Token::Close) => Ok(Value::Spec(s)),
                    _ => Err(self.err("expected `)`")),
                }
            }
            Some(Token::Word(w)) => Ok(Value::Word(w)),
            _ => Err(self.err("expected a value")),
        }
    }

    fn family(&mut self, head: &str) -> Result<WeightSpec> {
        let (name, short) = match head.split_once(':') {
            Some((n, v)) => (n, Some(self.number(v)?)),
            None => (head, None),
        };
        let mut args: Vec<(String, Value)> = Vec::new();
        while let (Some(Token::Word(k)), Some(Token::Eq)) =
            (self.tokens.get(self.pos), self.tokens.get(self.pos + 1))
        {
            let key = k.clone();
            self.pos += 2;
            let v = self.value()?;
            args.push((key, v));
        }
        let mut take = |key: &str| -> Option<Value> {
            args.iter()
                .position(|(k, _)| k == key)
                .map(|i| args.remove(i).1)
        };
        let spec = match name {
            "const" => {
                let v = match take("value") {
                    Some(v) => self.num_value(v)?,
                    None => short.unwrap_or(1.0),
                };
                WeightSpec::Const(v)
            }
            "power" => {
                let alpha = match take("alpha") {
                    Some(v) => self.num_value(v)?,
                    None => short.ok_or_else(|| self.err("power needs alpha"))?,
                };
                let center = match take("center") {
                    Some(v) => self.num_value(v)?,
                    None => DEFAULT_POWER_CENTER,
                };
                WeightSpec::Power { alpha, center }
            }
            "exp-cos" => {
                let eps = match take("eps") {
                    Some(v) => self.num_value(v)?,
                    None => short.ok_or_else(|| self.err("exp-cos needs eps"))?,
                };
                WeightSpec::ExpCos { eps }
            }
            "separating" | "product" => {
                let a = take("a").ok_or_else(|| self.err(format!("{name} needs a=")))?;
                let b = take("b").ok_or_else(|| self.err(format!("{name} needs b=")))?;
                let (a, b) = (self.spec_value(a)?, self.spec_value(b)?);
                if name == "separating" {
                    WeightSpec::Separating(Box::new(a), Box::new(b))
                } else {
                    WeightSpec::Product(vec![a, b])
                }
            }
            "file" => match take("path") {
                Some(Value::Word(p)) => WeightSpec::File(PathBuf::from(p)),
                _ => return Err(self.err("file needs path=")),
            },
            other => return Err(self.err(format!("unknown family `{other}`"))),
        };
        if let Some((k, _)) = args.first() {
            return Err(self.err(format!("unexpected key `{k}` for `{name}`")));
        }
        Ok(spec)
    }

    fn number(&self, s: &str) -> Result<f64> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(format!("`{s}` is not a number")))
    }

    fn num_value(&self, v: Value) -> Result<f64> {
        match v {
            Value::Word(w) => self.number(&w),
            Value::Spec(_) => Err(self.err("expected a number")),
        }
    }

    fn spec_value(&mut self, v: Value) -> Result<WeightSpec> {
        match v {
            Value::Spec(s) => Ok(s),
            Value::Word(w) => self.family(&w),
        }
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser {
            tokens: tokenize(s),
            pos: 0,
        };
        let spec = p.spec()?;
        if p.pos != p.tokens.len() {
            return Err(p.err("trailing input"));
        }
        Ok(spec)
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Const(v) => write!(f, "const value={v}"),
            WeightSpec::Power { alpha, center } => write!(f, "power alpha={alpha} center={center}"),
            WeightSpec::ExpCos { eps } => write!(f, "exp-cos eps={eps}"),
            WeightSpec::Separating(a, b) => write!(f, "separating a=({a}) b=({b})"),
            WeightSpec::Product(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" * ")?;
                    }
                    write!(f, "({p})")?;
                }
                Ok(())
            }
            WeightSpec::File(p) => write!(f, "file path={}", p.display()),
        }
    }
}

fn chord(t: f64, c: f64) -> f64 {
    // |e^{it} - e^{ic}| = 2 |sin((t - c) / 2)|
    2.0 * ((t - c) / 2.0).sin().abs()
}

impl WeightSpec {
    pub fn build_1d(&self, grid: Grid1D) -> Result<Weight1D> {
        match self {
            WeightSpec::Const(v) => Weight1D::constant(grid, *v),
            WeightSpec::Power { alpha, center } => {
                Weight1D::from_fn(grid, |t| chord(t, *center).powf(*alpha))
            }
            WeightSpec::ExpCos { eps } => Weight1D::from_fn(grid, |t| (eps * t.cos()).exp()),
            WeightSpec::Separating(..) => Err(Error::SpecParse {
                pos: 0,
                msg: "separating weights need two variables".into(),
            }),
            WeightSpec::Product(parts) => {
                let mut acc = Weight1D::ones(grid);
                for p in parts {
                    acc = acc.mul(&p.build_1d(grid)?)?;
                }
                Ok(acc)
            }
            WeightSpec::File(path) => match io::load(path)? {
                TorusData::One(f) if f.grid() == grid => Weight1D::from_function(&f),
                other => Err(Error::ShapeMismatch {
                    expected: grid.n().to_string(),
                    got: other.shape().to_string(),
                }),
            },
        }
    }

    pub fn build_2d(&self, g1: Grid1D, g2: Grid1D) -> Result<Weight2D> {
        match self {
            WeightSpec::Const(v) => Weight2D::constant(g1, g2, *v),
            WeightSpec::Power { alpha, center } => Weight2D::from_fn(g1, g2, |t1, t2| {
                let d2 = chord(t1, *center).powi(2) + chord(t2, *center).powi(2);
                d2.powf(alpha / 2.0)
            }),
            WeightSpec::ExpCos { eps } => {
                Weight2D::from_fn(g1, g2, |t1, t2| (eps * (t1 + t2).cos()).exp())
            }
            WeightSpec::Separating(a, b) => Ok(Weight2D::separating(&a.build_1d(g1)?, &b.build_1d(g2)?)),
            WeightSpec::Product(parts) => {
                let mut acc = Weight2D::ones(g1, g2);
                for p in parts {
                    acc = acc.mul(&p.build_2d(g1, g2)?)?;
                }
                Ok(acc)
            }
            WeightSpec::File(path) => match io::load(path)? {
                TorusData::Two(f) if f.grids() == (g1, g2) => Weight2D::from_function(&f),
                other => Err(Error::ShapeMismatch {
                    expected: format!("{}x{}", g1.n(), g2.n()),
                    got: other.shape().to_string(),
                }),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_family() {
        assert_eq!("const".parse::<WeightSpec>().unwrap(), WeightSpec::Const(1.0));
        assert_eq!("const:2".parse::<WeightSpec>().unwrap(), WeightSpec::Const(2.0));
        assert_eq!(
            "power alpha=0.5 center=1".parse::<WeightSpec>().unwrap(),
            WeightSpec::Power { alpha: 0.5, center: 1.0 }
        );
        assert_eq!(
            "power:0.3".parse::<WeightSpec>().unwrap(),
            WeightSpec::Power {
                alpha: 0.3,
                center: DEFAULT_POWER_CENTER
            }
        );
        assert_eq!("exp-cos eps=0.5".parse::<WeightSpec>().unwrap(), WeightSpec::ExpCos { eps: 0.5 });
        let sep: WeightSpec = "separating a=const b=(power alpha=0.5)".parse().unwrap();
        assert!(matches!(sep, WeightSpec::Separating(..)));
        let prod: WeightSpec = "exp-cos:1 * const:3".parse().unwrap();
        assert_eq!(
            prod,
            WeightSpec::Product(vec![WeightSpec::ExpCos { eps: 1.0 }, WeightSpec::Const(3.0)])
        );
        let prod2: WeightSpec = "product a=power:0.2 b=(exp-cos eps=1)".parse().unwrap();
        assert!(matches!(prod2, WeightSpec::Product(ref v) if v.len() == 2));
        assert_eq!(
            "file path=/tmp/w.torus".parse::<WeightSpec>().unwrap(),
            WeightSpec::File("/tmp/w.torus".into())
        );
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "power", "blob", "power alpha=x", "const value=1 extra=2", "(const", "const )", "separating a=const"] {
            assert!(bad.parse::<WeightSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "const:2",
            "power alpha=0.25",
            "separating a=exp-cos:0.5 b=(power alpha=0.5 center=0.1)",
            "const:2 * exp-cos:1",
        ] {
            let spec: WeightSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<WeightSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn builds_positive_weights() {
        let g = Grid1D::new(64).unwrap();
        let w = "power alpha=0.5".parse::<WeightSpec>().unwrap().build_1d(g).unwrap();
        assert!(w.min() > 0.0);
        let w2 = "separating a=const:2 b=exp-cos:1"
            .parse::<WeightSpec>()
            .unwrap()
            .build_2d(g, g)
            .unwrap();
        assert!((w2.at(0, 0) - 2.0 * 1f64.exp()).abs() < 1e-14);
        assert!("separating a=const b=const".parse::<WeightSpec>().unwrap().build_1d(g).is_err());
    }
}
