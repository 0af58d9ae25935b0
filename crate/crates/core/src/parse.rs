//! Parsing of built-in function names and rational arguments.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::fourier_engine::FunctionSpec;

/// Longest digit string accepted for either part of a rational; keeps every
/// intermediate inside `i64`.
pub const MAX_DIGITS: usize = 18;

/// The functions the command line can name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinFunction {
    Square,
    Linear,
    Exp,
    Log,
    Step(Ratio<i64>),
}

impl BuiltinFunction {
    pub fn to_spec(self) -> Result<FunctionSpec> {
        match self {
            BuiltinFunction::Square => Ok(FunctionSpec::square()),
            BuiltinFunction::Linear => Ok(FunctionSpec::linear()),
            BuiltinFunction::Exp => Ok(FunctionSpec::exp()),
            BuiltinFunction::Log => Ok(FunctionSpec::log()),
            BuiltinFunction::Step(y) => FunctionSpec::step_rational(*y.numer(), *y.denom()),
        }
    }
}

impl fmt::Display for BuiltinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinFunction::Square => f.write_str("t2"),
            BuiltinFunction::Linear => f.write_str("t"),
            BuiltinFunction::Exp => f.write_str("exp"),
            BuiltinFunction::Log => f.write_str("log"),
            BuiltinFunction::Step(y) => write!(f, "step:{}/{}", y.numer(), y.denom()),
        }
    }
}

impl FromStr for BuiltinFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_function(s)
    }
}

/// Parses `t2`, `t`, `exp`, `log` or `step:<y>` with `y` rational in `(0, 1)`.
pub fn parse_function(s: &str) -> Result<BuiltinFunction> {
    match s.trim() {
        "t2" => Ok(BuiltinFunction::Square),
        "t" => Ok(BuiltinFunction::Linear),
        "exp" => Ok(BuiltinFunction::Exp),
        "log" => Ok(BuiltinFunction::Log),
        other => match other.strip_prefix("step:") {
            Some(y) => parse_unit_interval(y).map(BuiltinFunction::Step),
            None => Err(Error::Parse(format!(
                "unknown function {other:?}; expected one of t2, t, exp, log, step:<y>"
            ))),
        },
    }
}

fn digits(s: &str, what: &str) -> Result<i64> {
    if s.is_empty() || s.len() > MAX_DIGITS || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!(
            "{what} {s:?} must be 1 to {MAX_DIGITS} decimal digits"
        )));
    }
    Ok(s.parse().expect("validated digits"))
}

/// Parses `a/b` or a plain decimal such as `0.25` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Ratio<i64>> {
    let s = s.trim();
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let value = if let Some((num, den)) = body.split_once('/') {
        let num = digits(num, "numerator")?;
        let den = digits(den, "denominator")?;
        if den == 0 {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        Ratio::new(num, den)
    } else {
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.len() + frac.len() > MAX_DIGITS {
            return Err(Error::Parse(format!(
                "{s:?} has more than {MAX_DIGITS} digits"
            )));
        }
        let int = if int.is_empty() && !frac.is_empty() {
            0
        } else {
            digits(int, "integer part")?
        };
        let (frac_val, scale) = if frac.is_empty() {
            (0, 1)
        } else {
            (
                digits(frac, "fractional part")?,
                10i64.pow(frac.len() as u32),
            )
        };
        Ratio::new(int * scale + frac_val, scale)
    };
    Ok(if negative { -value } else { value })
}

/// A rational strictly between 0 and 1.
pub fn parse_unit_interval(s: &str) -> Result<Ratio<i64>> {
    let y = parse_rational(s)?;
    if y <= Ratio::from_integer(0) || y >= Ratio::from_integer(1) {
        return Err(Error::Domain(format!("y = {y} is not inside (0, 1)")));
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn function_names() {
        assert_eq!(parse_function("t2").unwrap(), BuiltinFunction::Square);
        assert_eq!(parse_function(" log ").unwrap(), BuiltinFunction::Log);
        assert_eq!(
            parse_function("step:0.25").unwrap(),
            BuiltinFunction::Step(Ratio::new(1, 4))
        );
        assert_eq!(parse_function("step:4/5").unwrap().to_string(), "step:4/5");
        assert!(matches!(parse_function("sin"), Err(Error::Parse(_))));
        assert!(matches!(parse_function("step:1"), Err(Error::Domain(_))));
        assert!(parse_function("step:").is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("2/4").unwrap(), Ratio::new(1, 2));
        assert_eq!(parse_rational(".5").unwrap(), Ratio::new(1, 2));
        assert_eq!(parse_rational("-3").unwrap(), Ratio::from_integer(-3));
        assert_eq!(parse_rational("0.2").unwrap(), Ratio::new(1, 5));
        for bad in [
            "",
            "/",
            "1/0",
            "1e3",
            "0.1.2",
            "--1",
            "1/-2",
            "1234567890123456789/2",
            ".",
        ] {
            assert!(parse_rational(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn spec_names_match_engine() {
        for name in ["t2", "t", "exp", "log", "step:1/4"] {
            assert_eq!(
                parse_function(name).unwrap().to_spec().unwrap().name(),
                name
            );
        }
    }

    proptest! {
        #[test]
        fn fraction_round_trip(n in 1i64..1_000_000, d in 1i64..1_000_000) {
            let r = parse_rational(&format!("{n}/{d}")).unwrap();
            prop_assert_eq!(r, Ratio::new(n, d));
            prop_assert_eq!(parse_rational(&r.to_string()).unwrap(), r);
        }

        #[test]
        fn never_panics(s in "\\PC{0,40}") {
            let _ = parse_function(&s);
            let _ = parse_rational(&s);
        }
    }
}
