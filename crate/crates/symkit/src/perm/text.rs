//! Text and JSON forms of permutations.

use serde::{Deserialize, Serialize};

use super::{builtin_rule, PermError, Permutation, Point};

/// A byte cursor shared by the small recursive-descent parsers in this crate.
pub(crate) struct Cursor<'a> {
    pub src: &'a str,
    pub pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    pub fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += self.rest().chars().next().unwrap().len_utf8();
        }
    }

    pub fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &str) -> Result<(), PermError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{tok}`")))
        }
    }

    pub fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub fn error(&self, msg: impl Into<String>) -> PermError {
        PermError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    pub fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    pub fn number(&mut self) -> Result<Point, PermError> {
        self.skip_ws();
        let at = self.pos;
        let digits = self.take_while(|c| c.is_ascii_digit());
        digits.parse().map_err(|_| PermError::Parse {
            pos: at,
            msg: "expected a natural number".into(),
        })
    }

    pub fn integer(&mut self) -> Result<i64, PermError> {
        self.skip_ws();
        let at = self.pos;
        let neg = self.eat("-");
        let digits = self.take_while(|c| c.is_ascii_digit());
        let v: i64 = digits.parse().map_err(|_| PermError::Parse {
            pos: at,
            msg: "expected an integer".into(),
        })?;
        Ok(if neg { -v } else { v })
    }

    pub fn ident(&mut self) -> &'a str {
        self.skip_ws();
        self.take_while(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    }

    pub fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }
}

/// Parses `cycles:(0 1 2)(5 6)`, `rule:<name>[;key=value...]`,
/// `word:[p1,p2^-1,...]` or `identity`.
pub fn parse_perm(src: &str) -> Result<Permutation, PermError> {
    let mut c = Cursor::new(src);
    let p = parse_in(&mut c)?;
    if !c.at_end() {
        return Err(c.error("unexpected trailing input"));
    }
    Ok(p)
}

pub(crate) fn parse_in(c: &mut Cursor) -> Result<Permutation, PermError> {
    if c.eat("identity") {
        return Ok(Permutation::identity());
    }
    if c.eat("cycles:") {
        let mut cycles: Vec<Vec<Point>> = Vec::new();
        while c.eat("(") {
            let mut cyc = Vec::new();
            while !c.eat(")") {
                if c.rest().is_empty() {
                    return Err(c.error("unterminated cycle"));
                }
                cyc.push(c.number()?);
                c.eat(",");
            }
            cycles.push(cyc);
        }
        let at = c.pos;
        return Permutation::from_cycles(&cycles).map_err(|e| PermError::Parse {
            pos: at,
            msg: e.to_string(),
        });
    }
    if c.eat("rule:") {
        let at = c.pos;
        let name = c.ident().to_string();
        let mut params = Vec::new();
        while c.eat(";") {
            let key = c.ident().to_string();
            c.expect("=")?;
            params.push((key, c.integer()?));
        }
        let rule = builtin_rule(&name, &params).map_err(|msg| PermError::Parse { pos: at, msg })?;
        return Ok(crate::perm::rules::certify(Permutation::from_rule(rule), &name, &params));
    }
    if c.eat("word:") {
        c.expect("[")?;
        let mut factors = Vec::new();
        if !c.eat("]") {
            loop {
                let mut f = parse_in(c)?;
                if c.eat("^-1") {
                    f = f.inverse();
                }
                factors.push(f);
                if c.eat("]") {
                    break;
                }
                c.expect(",")?;
            }
        }
        return Ok(Permutation::word(factors));
    }
    Err(c.error("expected `cycles:`, `rule:`, `word:` or `identity`"))
}

/// JSON mirror of the text form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermJson {
    pub form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles: Option<Vec<Vec<Point>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<PermJson>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inverse: bool,
}

impl PermJson {
    pub fn from_perm(p: &Permutation) -> Result<PermJson, PermError> {
        Self::from_text(&p.to_text())
    }

    fn from_text(text: &str) -> Result<PermJson, PermError> {
        let p = parse_perm(text)?;
        let blank = |form: &str| PermJson {
            form: form.into(),
            cycles: None,
            rule: None,
            factors: None,
            inverse: false,
        };
        if let Some(r) = text.strip_prefix("rule:") {
            return Ok(PermJson {
                rule: Some(r.to_string()),
                ..blank("rule")
            });
        }
        if text.starts_with("word:") {
            let mut c = super::text::Cursor::new(text);
            c.expect("word:")?;
            c.expect("[")?;
            let mut factors = Vec::new();
            if !c.eat("]") {
                loop {
                    let start = c.pos;
                    parse_in(&mut c)?;
                    let piece = c.src[start..c.pos].trim().to_string();
                    let mut j = Self::from_text(&piece)?;
                    if c.eat("^-1") {
                        j.inverse = !j.inverse;
                    }
                    factors.push(j);
                    if c.eat("]") {
                        break;
                    }
                    c.expect(",")?;
                }
            }
            return Ok(PermJson {
                factors: Some(factors),
                ..blank("word")
            });
        }
        Ok(PermJson {
            cycles: Some(p.cycles()?),
            ..blank("cycles")
        })
    }

    pub fn to_perm(&self) -> Result<Permutation, PermError> {
        let bad = |msg: &str| PermError::Parse {
            pos: 0,
            msg: msg.into(),
        };
        let p = match self.form.as_str() {
            "cycles" => Permutation::from_cycles(self.cycles.as_ref().ok_or_else(|| bad("missing cycles"))?)?,
            "rule" => parse_perm(&format!("rule:{}", self.rule.as_ref().ok_or_else(|| bad("missing rule"))?))?,
            "word" => Permutation::word(
                self.factors
                    .as_ref()
                    .ok_or_else(|| bad("missing factors"))?
                    .iter()
                    .map(|f| f.to_perm())
                    .collect::<Result<_, _>>()?,
            ),
            other => return Err(bad(&format!("unknown form `{other}`"))),
        };
        Ok(if self.inverse { p.inverse() } else { p })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        let p = parse_perm("cycles:(0 1 2)(5 6)").unwrap();
        assert_eq!(p.apply(2).unwrap(), 0);
        assert_eq!(p.apply(6).unwrap(), 5);
        let s = parse_perm("rule:shift-z;by=2").unwrap();
        assert_eq!(s.apply(0).unwrap(), 4);
        let w = parse_perm("word:[cycles:(0 1), cycles:(1 2)]").unwrap();
        assert_eq!(w.apply(0).unwrap(), 2);
        let wi = parse_perm("word:[rule:shift-z^-1]").unwrap();
        assert_eq!(wi.apply(0).unwrap(), 1);
        assert_eq!(parse_perm("identity").unwrap().apply(9).unwrap(), 9);
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse_perm("cycles:(0 1").unwrap_err() {
            PermError::Parse { pos, .. } => assert_eq!(pos, 11),
            e => panic!("{e}"),
        }
        match parse_perm("word:[cycles:(0 1);").unwrap_err() {
            PermError::Parse { pos, .. } => assert_eq!(pos, 18),
            e => panic!("{e}"),
        }
        assert!(parse_perm("cycles:(0 1)(1 2)").is_err());
        assert!(parse_perm("rule:bogus").is_err());
    }

    #[test]
    fn text_round_trip() {
        for s in [
            "cycles:(0 1 2)(5 6)",
            "rule:swap-pairs",
            "rule:shift-z;by=3",
            "word:[cycles:(0 1),rule:shift-z]",
            "word:[rule:shift-z^-1]",
        ] {
            let p = parse_perm(s).unwrap();
            assert_eq!(p.to_text(), s);
            let j = PermJson::from_perm(&p).unwrap();
            let back = j.to_perm().unwrap();
            assert!(back.agrees_on(&p, 50).unwrap(), "{s}");
            let json = serde_json::to_string(&j).unwrap();
            let j2: PermJson = serde_json::from_str(&json).unwrap();
            assert_eq!(j, j2);
        }
    }
}
