//! Polynomials over GF(q) reduced modulo `x^q - x`, value tables, and the
//! small textual grammar used on the command line.

use crate::error::{Error, Result};
use crate::gfield::{Fe, Field};

/// Horner evaluation of `coeffs[0] + coeffs[1] x + ...`.
pub fn eval(field: &Field, coeffs: &[Fe], x: Fe) -> Fe {
    coeffs.iter().rev().fold(Fe::ZERO, |acc, &c| field.mul(acc, x) + c)
}

/// Value table `[p(0), p(1), ..., p(q-1)]`, indexed by element encoding.
pub fn values(field: &Field, coeffs: &[Fe]) -> Vec<Fe> {
    field.elements().map(|x| eval(field, coeffs, x)).collect()
}

/// The unique polynomial of degree <= q-1 with the given value table.
///
/// Coefficients come from the Lagrange basis `1 - (x - a)^(q-1)`; every
/// binomial coefficient of `(x + a)^(q-1)` is odd in characteristic 2, so
/// `c_k = sum_{a != 0} f(a) a^(q-1-k)` for `1 <= k <= q-2`, `c_0 = f(0)` and
/// `c_{q-1} = sum_a f(a)`.
pub fn interpolate(field: &Field, vals: &[Fe]) -> Vec<Fe> {
    let q = field.q();
    assert_eq!(vals.len(), q, "value table must cover the whole field");
    let mut c = vec![Fe::ZERO; q];
    c[0] = vals[0];
    if q == 2 {
        c[1] = vals[0] + vals[1];
        return trim(c);
    }
    for (k, ck) in c.iter_mut().enumerate().take(q - 1).skip(1) {
        let e = (q - 1 - k) as u64;
        let mut acc = Fe::ZERO;
        for a in field.nonzero() {
            acc += field.mul(vals[a.idx()], field.pow(a, e));
        }
        *ck = acc;
    }
    c[q - 1] = vals.iter().fold(Fe::ZERO, |a, &b| a + b);
    trim(c)
}

/// Drops trailing zero coefficients.
pub fn trim(mut c: Vec<Fe>) -> Vec<Fe> {
    while c.last() == Some(&Fe::ZERO) {
        c.pop();
    }
    c
}

/// Degree of a trimmed coefficient vector; `None` for the zero polynomial.
pub fn degree(c: &[Fe]) -> Option<usize> {
    c.iter().rposition(|x| !x.is_zero())
}

/// Reduces an arbitrary-degree polynomial modulo `x^q - x`.
pub fn reduce(field: &Field, coeffs: &[Fe]) -> Vec<Fe> {
    let q = field.q();
    let mut out = vec![Fe::ZERO; q.min(coeffs.len().max(1))];
    for (k, &c) in coeffs.iter().enumerate() {
        let r = if k == 0 { 0 } else { (k - 1) % (q - 1) + 1 };
        if r >= out.len() {
            out.resize(r + 1, Fe::ZERO);
        }
        out[r] += c;
    }
    trim(out)
}

/// Monomial `x^e` as a value table.
pub fn monomial_values(field: &Field, e: u64) -> Vec<Fe> {
    field.elements().map(|x| field.pow(x, e)).collect()
}

/// Parses expressions such as `x^2`, `x^1/2`, `3*x^4 + x`, `x^(1/2)`.
///
/// Coefficients are element encodings (decimal or `0x..`); the exponent
/// `1/2` stands for `q/2`, the square-root automorphism.
pub fn parse_expr(field: &Field, src: &str) -> Result<Vec<Fe>> {
    let q = field.q() as u64;
    let mut coeffs: Vec<Fe> = Vec::new();
    let cleaned: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    for term in cleaned.split('+') {
        if term.is_empty() {
            return Err(Error::Parse(format!("dangling '+' in {src:?}")));
        }
        let (coef, mono) = match term.find('x') {
            None => (parse_int(term)?, None),
            Some(pos) => {
                let head = &term[..pos];
                let coef = if head.is_empty() { 1 } else { parse_int(head.strip_suffix('*').unwrap_or(head))? };
                (coef, Some(&term[pos + 1..]))
            }
        };
        let coef = field.elem(coef as u32)?;
        let exp = match mono {
            None => 0,
            Some("") => 1,
            Some(rest) => {
                let e = rest.strip_prefix('^').ok_or_else(|| Error::Parse(format!("expected '^' in term {term:?}")))?;
                let e = e.trim_start_matches('(').trim_end_matches(')');
                if e == "1/2" {
                    q / 2
                } else {
                    parse_int(e)?
                }
            }
        };
        let e = exp as usize;
        if coeffs.len() <= e {
            coeffs.resize(e + 1, Fe::ZERO);
        }
        coeffs[e] += coef;
    }
    Ok(reduce(field, &coeffs))
}

fn parse_int(s: &str) -> Result<u64> {
    let r = if let Some(hex) = s.strip_prefix("0x") { u64::from_str_radix(hex, 16) } else { s.parse() };
    r.map_err(|_| Error::Parse(format!("not an integer: {s:?}")))
}

/// Renders trimmed coefficients in the same grammar `parse_expr` accepts.
pub fn format_expr(coeffs: &[Fe]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| match (c.0, k) {
            (_, 0) => format!("{}", c.0),
            (1, 1) => "x".to_string(),
            (1, k) => format!("x^{k}"),
            (c, 1) => format!("{c}*x"),
            (c, k) => format!("{c}*x^{k}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn interpolate_monomials() {
        for h in 1..=6 {
            let f = Field::standard(h).unwrap();
            let q = f.q() as u64;
            for e in 1..q {
                let c = interpolate(f, &monomial_values(f, e));
                let mut expect = vec![Fe::ZERO; e as usize + 1];
                expect[e as usize] = Fe::ONE;
                assert_eq!(c, expect, "h={h} e={e}");
            }
        }
    }

    #[test]
    fn reduce_wraps_exponents() {
        let f = Field::standard(3).unwrap();
        // x^8 = x, x^9 = x^2 over GF(8)
        let mut c = vec![Fe::ZERO; 10];
        c[8] = Fe::ONE;
        c[9] = Fe(3);
        assert_eq!(reduce(f, &c), vec![Fe::ZERO, Fe::ONE, Fe(3)]);
    }

    #[test]
    fn parse_grammar() {
        let f = Field::standard(3).unwrap();
        assert_eq!(parse_expr(f, "x^2").unwrap(), vec![Fe(0), Fe(0), Fe(1)]);
        assert_eq!(parse_expr(f, "x^1/2").unwrap(), parse_expr(f, "x^4").unwrap());
        assert_eq!(parse_expr(f, "x^(1/2)").unwrap(), parse_expr(f, "x^4").unwrap());
        assert_eq!(parse_expr(f, "3*x + x + 5").unwrap(), vec![Fe(5), Fe(2)]);
        assert!(parse_expr(f, "x^").is_err());
        assert!(parse_expr(f, "9*x").is_err());
        assert!(parse_expr(f, "").is_err());
        let c = parse_expr(f, "6*x^4 + x^2 + 1").unwrap();
        assert_eq!(parse_expr(f, &format_expr(&c)).unwrap(), c);
    }

    proptest! {
        #[test]
        fn interpolation_reproduces_values(vals in proptest::collection::vec(0u8..16, 16)) {
            let f = Field::standard(4).unwrap();
            let vals: Vec<Fe> = vals.into_iter().map(Fe).collect();
            let c = interpolate(f, &vals);
            prop_assert!(c.len() <= 16);
            prop_assert_eq!(values(f, &c), vals);
        }
    }
}
