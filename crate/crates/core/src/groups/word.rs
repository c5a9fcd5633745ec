use std::fmt;

use super::GroupError;

/// One letter `x_i` or `x_i⁻¹` (generator indices are zero-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn inv(self) -> Self {
        Letter { generator: self.generator, inverse: !self.inverse }
    }
}

/// A word in the generators and their inverses.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn generator(i: usize) -> Self {
        Word(vec![Letter::new(i, false)])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// Largest generator index used, if any.
    pub fn max_generator(&self) -> Option<usize> {
        self.0.iter().map(|l| l.generator).max()
    }

    /// Parses `x1 x2^-1 (x1 x2)^3`-style words; generator names are 1-based.
    pub fn parse(s: &str) -> Result<Word, GroupError> {
        let tokens = tokenize(s)?;
        let mut pos = 0;
        let w = parse_seq(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(GroupError::Parse(format!("unexpected {:?} in word {s:?}", tokens[pos])));
        }
        Ok(w)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Gen(usize),
    Open,
    Close,
    Pow(i64),
}

fn tokenize(s: &str) -> Result<Vec<Tok>, GroupError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let number = |i: &mut usize| -> Result<i64, GroupError> {
        let start = *i;
        if *i < chars.len() && (chars[*i] == '-' || chars[*i] == '+') {
            *i += 1;
        }
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
        let text: String = chars[start..*i].iter().collect();
        text.parse().map_err(|_| GroupError::Parse(format!("bad number {text:?} in word {s:?}")))
    };
    while i < chars.len() {
        match chars[i] {
            c if c.is_whitespace() || c == '*' => i += 1,
            '(' => {
                out.push(Tok::Open);
                i += 1;
            }
            ')' => {
                out.push(Tok::Close);
                i += 1;
            }
            '^' => {
                i += 1;
                out.push(Tok::Pow(number(&mut i)?));
            }
            'x' => {
                i += 1;
                let n = number(&mut i)?;
                if n < 1 {
                    return Err(GroupError::Parse(format!("generator index must be ≥ 1 in {s:?}")));
                }
                out.push(Tok::Gen(n as usize - 1));
            }
            c => return Err(GroupError::Parse(format!("unexpected character {c:?} in word {s:?}"))),
        }
    }
    Ok(out)
}

fn parse_seq(tokens: &[Tok], pos: &mut usize) -> Result<Word, GroupError> {
    let mut w = Word::empty();
    while *pos < tokens.len() {
        let atom = match tokens[*pos] {
            Tok::Gen(g) => {
                *pos += 1;
                Word::generator(g)
            }
            Tok::Open => {
                *pos += 1;
                let inner = parse_seq(tokens, pos)?;
                if tokens.get(*pos) != Some(&Tok::Close) {
                    return Err(GroupError::Parse("unbalanced parenthesis".into()));
                }
                *pos += 1;
                inner
            }
            Tok::Close => break,
            Tok::Pow(_) => return Err(GroupError::Parse("exponent without a base".into())),
        };
        let atom = match tokens.get(*pos) {
            Some(&Tok::Pow(e)) => {
                *pos += 1;
                let base = if e < 0 { atom.inverse() } else { atom };
                let mut acc = Word::empty();
                for _ in 0..e.unsigned_abs() {
                    acc = acc.concat(&base);
                }
                acc
            }
            _ => atom,
        };
        w = w.concat(&atom);
    }
    Ok(w)
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "x{}", l.generator + 1)?;
            if l.inverse {
                write!(f, "^-1")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_powers_and_groups() {
        let w = Word::parse("(x1 x2)^2").unwrap();
        assert_eq!(w.to_string(), "x1 x2 x1 x2");
        let w = Word::parse("x1^-2 x3").unwrap();
        assert_eq!(w.to_string(), "x1^-1 x1^-1 x3");
        assert_eq!(w.max_generator(), Some(2));
        let w = Word::parse("(x1 x2^-1)^-1").unwrap();
        assert_eq!(w.to_string(), "x2 x1^-1");
        assert!(Word::parse("x0").is_err());
        assert!(Word::parse("(x1").is_err());
        assert!(Word::parse("y1").is_err());
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(letters in proptest::collection::vec((0usize..4, any::<bool>()), 1..12)) {
            let w = Word::new(letters.into_iter().map(|(g, i)| Letter::new(g, i)).collect());
            prop_assert_eq!(Word::parse(&w.to_string()).unwrap(), w);
        }
    }
}
