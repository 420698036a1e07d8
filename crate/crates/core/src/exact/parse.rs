//! Recursive-descent reader for the polynomial grammar
//!
//! ```text
//! poly   := term (('+'|'-') term)*
//! term   := coeff ('*' factor)* | factor ('*' factor)*
//! factor := var ('^' uint)?
//! coeff  := int ('/' uint)?
//! ```
//!
//! A leading sign is accepted on the first term. Whitespace is ignored.

use num_bigint::BigInt;

use super::{AlgebraError, Monomial, Polynomial};
use crate::scalar::Field;

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
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

    fn syntax(&self, message: impl Into<String>) -> AlgebraError {
        AlgebraError::Syntax { position: self.pos, message: message.into() }
    }

    fn digits(&mut self) -> Option<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        std::str::from_utf8(&self.src[start..self.pos]).ok()?.parse().ok()
    }

    fn ident(&mut self) -> Option<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        let first = *self.src.get(self.pos)?;
        if !(first.is_ascii_alphabetic() || first == b'_') {
            return None;
        }
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        Some((start, String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()))
    }
}

pub fn parse_polynomial<F: Field>(text: &str, variables: &[String]) -> Result<Polynomial<F>, AlgebraError> {
    let nvars = variables.len();
    let mut cur = Cursor { src: text.as_bytes(), pos: 0 };
    let mut out = Polynomial::zero(nvars);
    if cur.peek().is_none() {
        return Err(cur.syntax("empty polynomial"));
    }
    let mut sign_negative = if cur.eat(b'-') {
        true
    } else {
        cur.eat(b'+');
        false
    };
    loop {
        let (m, c) = parse_term::<F>(&mut cur, variables)?;
        out.add_term(m, if sign_negative { -c } else { c });
        match cur.peek() {
            None => break,
            Some(b'+') => {
                cur.pos += 1;
                sign_negative = false;
            }
            Some(b'-') => {
                cur.pos += 1;
                sign_negative = true;
            }
            Some(ch) => return Err(cur.syntax(format!("unexpected character '{}'", ch as char))),
        }
    }
    Ok(out)
}

fn parse_term<F: Field>(cur: &mut Cursor<'_>, variables: &[String]) -> Result<(Monomial, F), AlgebraError> {
    let nvars = variables.len();
    let mut exps = vec![0u32; nvars];
    let mut coeff = F::one();
    let mut expect_factor = false;
    if let Some(n) = cur.digits() {
        let d = if cur.eat(b'/') {
            let d = cur.digits().ok_or_else(|| cur.syntax("expected denominator"))?;
            if d == BigInt::from(0) {
                return Err(cur.syntax("zero denominator"));
            }
            d
        } else {
            BigInt::from(1)
        };
        coeff = F::from_ratio(n, d);
        if !cur.eat(b'*') {
            return Ok((Monomial::new(exps), coeff));
        }
        expect_factor = true;
    }
    loop {
        match cur.ident() {
            Some((at, name)) => {
                let idx = variables
                    .iter()
                    .position(|v| *v == name)
                    .ok_or(AlgebraError::UnknownVariable { name: name.clone(), position: at })?;
                let mut e = 1u32;
                if cur.eat(b'^') {
                    if cur.peek() == Some(b'-') {
                        return Err(AlgebraError::NegativeExponent { position: cur.pos });
                    }
                    let v = cur.digits().ok_or_else(|| cur.syntax("expected exponent"))?;
                    e = u32::try_from(v).map_err(|_| cur.syntax("exponent too large"))?;
                }
                exps[idx] += e;
            }
            None => {
                if expect_factor || exps.iter().all(|e| *e == 0) {
                    return Err(cur.syntax("expected a variable or coefficient"));
                }
                break;
            }
        }
        if !cur.eat(b'*') {
            break;
        }
        expect_factor = true;
    }
    Ok((Monomial::new(exps), coeff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::TermOrder;
    use crate::Rational;
    use proptest::prelude::*;

    fn xyz() -> Vec<String> {
        ["x", "y", "z"].iter().map(|s| s.to_string()).collect()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn reads_terms() {
        let p: Polynomial<Rational> = parse_polynomial("x*z - y^2", &xyz()).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.coefficient(&Monomial::new(vec![1, 0, 1])), Some(&q(1, 1)));
        assert_eq!(p.coefficient(&Monomial::new(vec![0, 2, 0])), Some(&q(-1, 1)));
    }

    #[test]
    fn zero_and_merge() {
        let p: Polynomial<Rational> = parse_polynomial("0", &xyz()).unwrap();
        assert!(p.is_zero());
        let p: Polynomial<Rational> = parse_polynomial("2/3*x^2 + 1/3*x^2", &xyz()).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.coefficient(&Monomial::new(vec![2, 0, 0])), Some(&q(1, 1)));
    }

    #[test]
    fn errors() {
        let r: Result<Polynomial<Rational>, _> = parse_polynomial("x*w", &xyz());
        assert!(matches!(r, Err(AlgebraError::UnknownVariable { ref name, position: 2 }) if name == "w"));
        let r: Result<Polynomial<Rational>, _> = parse_polynomial("x^-2", &xyz());
        assert!(matches!(r, Err(AlgebraError::NegativeExponent { .. })));
        let r: Result<Polynomial<Rational>, _> = parse_polynomial("x + * y", &xyz());
        assert!(matches!(r, Err(AlgebraError::Syntax { position: 4, .. })));
        let r: Result<Polynomial<Rational>, _> = parse_polynomial("", &xyz());
        assert!(r.is_err());
    }

    #[test]
    fn signed_coefficients_and_float_field() {
        let p: Polynomial<f64> = parse_polynomial("-3/4*x*y + 2 - z", &xyz()).unwrap();
        assert_eq!(p.coefficient(&Monomial::new(vec![1, 1, 0])), Some(&-0.75));
        assert_eq!(p.coefficient(&Monomial::new(vec![0, 0, 0])), Some(&2.0));
    }

    proptest! {
        #[test]
        fn print_parse_fixed_point(ts in prop::collection::vec((prop::collection::vec(0u32..3, 3), -9i64..9, 1i64..5), 0..6),
                                   eta in prop::collection::vec(-2i64..3, 3)) {
            let p = Polynomial::from_terms(3, ts.into_iter().map(|(e, n, d)| (Monomial::new(e), q(n, d))));
            let order = TermOrder::new(crate::exact::WeightVector::new(eta));
            let text = p.to_text(&xyz(), &order);
            let back: Polynomial<Rational> = parse_polynomial(&text, &xyz()).unwrap();
            prop_assert_eq!(&back, &p);
            prop_assert_eq!(back.to_text(&xyz(), &order), text);
        }
    }
}
