//! Text form of Laurent polynomials.
//!
//! Terms are joined by `+` or `-`; a term is a `*`-separated product of
//! factors; a factor is an integer or `a/b` rational coefficient, or a
//! variable with an optional `^` power whose exponent may be negative.
//! Multiplication is always explicit, e.g. `5*x^2*y^-1 + 1/3`.
//!
//! The printer in [`LaurentPoly::to_string_with`] emits exactly this syntax,
//! so printing and reparsing round-trips.

use num_bigint::BigInt;

use crate::domain::CoeffDomain;
use crate::poly::{ExponentVector, LaurentPoly};

/// A syntax or symbol-resolution error with a byte offset into the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        ParseError { offset, message: message.into() }
    }
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "at offset {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = src[start..i].parse().expect("digit run parses");
                out.push((Tok::Num(n), start));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric()
                        || bytes[i] == b'_'
                        || bytes[i] == b'\'')
                {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            other => {
                return Err(ParseError::new(i, format!("unexpected character '{other}'")));
            }
        }
    }
    Ok(out)
}

struct Parser<'a, D: CoeffDomain> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    names: &'a [String],
    domain: &'a D,
    end: usize,
}

impl<'a, D: CoeffDomain> Parser<'a, D> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_number(&mut self, what: &str) -> Result<BigInt, ParseError> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Num(n)) => Ok(n),
            _ => Err(ParseError::new(off, format!("expected {what}"))),
        }
    }

    fn var_index(&self, name: &str, off: usize) -> Result<usize, ParseError> {
        self.names.iter().position(|n| n == name).ok_or_else(|| {
            ParseError::new(
                off,
                format!("unknown variable '{name}' (known: {})", self.names.join(", ")),
            )
        })
    }

    /// factor := NUMBER [ '/' NUMBER ] | IDENT [ '^' [-] NUMBER ]
    /// Returns either a coefficient or a (variable, exponent) pair.
    fn factor(&mut self) -> Result<(Option<D::Elem>, Option<(usize, BigInt)>), ParseError> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Num(n)) => {
                if matches!(self.peek(), Some(Tok::Slash)) {
                    self.bump();
                    let d_off = self.offset();
                    let d = self.expect_number("denominator")?;
                    let c = self
                        .domain
                        .from_ratio(&n, &d)
                        .map_err(|e| ParseError::new(d_off, e.to_string()))?;
                    Ok((Some(c), None))
                } else {
                    Ok((Some(self.domain.from_integer(&n)), None))
                }
            }
            Some(Tok::Ident(name)) => {
                let idx = self.var_index(&name, off)?;
                let mut expo = BigInt::from(1);
                if matches!(self.peek(), Some(Tok::Caret)) {
                    self.bump();
                    let neg = if matches!(self.peek(), Some(Tok::Minus)) {
                        self.bump();
                        true
                    } else {
                        false
                    };
                    expo = self.expect_number("exponent")?;
                    if neg {
                        expo = -expo;
                    }
                }
                Ok((None, Some((idx, expo))))
            }
            _ => Err(ParseError::new(off, "expected a coefficient or variable")),
        }
    }

    /// term := factor ( '*' factor )*
    fn term(&mut self, negated: bool) -> Result<(D::Elem, ExponentVector), ParseError> {
        let mut coeff = if negated {
            self.domain.neg(&self.domain.one())
        } else {
            self.domain.one()
        };
        let mut expo = ExponentVector::zero(self.names.len());
        loop {
            let (c, ve) = self.factor()?;
            if let Some(c) = c {
                coeff = self.domain.mul(&coeff, &c);
            }
            if let Some((idx, k)) = ve {
                let mut entries = expo.into_entries();
                entries[idx] += k;
                expo = ExponentVector::new(entries);
            }
            if matches!(self.peek(), Some(Tok::Star)) {
                self.bump();
            } else {
                break;
            }
        }
        Ok((coeff, expo))
    }

    /// poly := [ '-' ] term ( ('+'|'-') term )*
    fn poly(&mut self) -> Result<LaurentPoly<D>, ParseError> {
        if self.toks.is_empty() {
            return Err(ParseError::new(0, "empty polynomial"));
        }
        let mut terms = Vec::new();
        let lead_neg = if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            true
        } else {
            false
        };
        let (c, e) = self.term(lead_neg)?;
        terms.push((e, c));
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let (c, e) = self.term(false)?;
                    terms.push((e, c));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let (c, e) = self.term(true)?;
                    terms.push((e, c));
                }
                Some(_) => {
                    return Err(ParseError::new(self.offset(), "expected '+' or '-'"));
                }
                None => break,
            }
        }
        Ok(LaurentPoly::from_terms(
            self.domain.clone(),
            self.names.len(),
            terms,
        ))
    }
}

/// Parses a Laurent polynomial in the given variable names.
pub fn parse_poly<D: CoeffDomain>(
    src: &str,
    names: &[String],
    domain: &D,
) -> Result<LaurentPoly<D>, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, names, domain, end: src.len() };
    p.poly()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Integers, PrimeField, Rationals};

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_the_reference_example() {
        let ns = names(&["x", "y"]);
        let p = parse_poly("5*x^2*y^-1 + 1/3", &ns, &Rationals).unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.to_string_with(&ns), "5*x^2*y^-1 + 1/3");
    }

    #[test]
    fn print_then_parse_round_trips() {
        let ns = names(&["x", "y"]);
        for src in [
            "x^2 - y^3 - 1",
            "-x - 3",
            "2*x*y - 1/2*x + y^-4",
            "0",
            "x*y - 1",
            "7",
        ] {
            let p = parse_poly(src, &ns, &Rationals).unwrap();
            let printed = p.to_string_with(&ns);
            let q = parse_poly(&printed, &ns, &Rationals).unwrap();
            assert_eq!(p, q, "round trip through {printed:?}");
        }
    }

    #[test]
    fn repeated_variables_accumulate() {
        let ns = names(&["x"]);
        let p = parse_poly("x*x^2*2*3", &ns, &Rationals).unwrap();
        assert_eq!(p.to_string_with(&ns), "6*x^3");
    }

    #[test]
    fn zero_sums_collapse() {
        let ns = names(&["x"]);
        let p = parse_poly("x - x", &ns, &Rationals).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn unknown_variable_is_reported_with_offset() {
        let ns = names(&["x"]);
        let err = parse_poly("x + z", &ns, &Rationals).unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(err.message.contains("unknown variable 'z'"));
    }

    #[test]
    fn syntax_errors_are_positioned() {
        let ns = names(&["x"]);
        assert_eq!(parse_poly("", &ns, &Rationals).unwrap_err().offset, 0);
        let err = parse_poly("x ^", &ns, &Rationals).unwrap_err();
        assert_eq!(err.offset, 3);
        let err = parse_poly("x x", &ns, &Rationals).unwrap_err();
        assert_eq!(err.offset, 2);
        let err = parse_poly("x + ?", &ns, &Rationals).unwrap_err();
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn domain_specific_coefficients() {
        let ns = names(&["t"]);
        let p = parse_poly("1/3*t", &ns, &PrimeField::new(5).unwrap()).unwrap();
        assert_eq!(p.to_string_with(&ns), "2*t");
        assert!(parse_poly("1/3*t", &ns, &Integers::new()).is_err());
        assert!(parse_poly("-2*t^-1", &ns, &Integers::new()).is_ok());
    }
}
