//! Parser for the subset of the BIF text format used by the bnlearn
//! repository:
//!
//! ```text
//! network <name> { ... }
//! variable <name> {
//!   type discrete [ <k> ] { <state>, ... };
//!   property <anything> ;          // ignored
//! }
//! probability ( <child> ) { table <p>, ... ; }
//! probability ( <child> | <parent>, ... ) {
//!   ( <parent state>, ... ) <p>, ... ;
//!   ...
//! }
//! ```
//!
//! `//` and `/* */` comments are skipped. Conditional tables must use the
//! row form; every parent configuration needs exactly one row.

use std::collections::HashMap;

use super::BayesNet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Punct(char),
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn is_punct(c: char) -> bool {
    matches!(c, '{' | '}' | '(' | ')' | '[' | ']' | ';' | ',' | '|')
}

impl Lexer {
    fn new(src: &str) -> Result<Self> {
        let mut toks = Vec::new();
        let chars: Vec<char> = src.chars().collect();
        let mut i = 0;
        let mut line = 1;
        while i < chars.len() {
            let c = chars[i];
            if c == '\n' {
                line += 1;
                i += 1;
            } else if c.is_whitespace() {
                i += 1;
            } else if c == '/' && chars.get(i + 1) == Some(&'/') {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            } else if c == '/' && chars.get(i + 1) == Some(&'*') {
                let start = line;
                i += 2;
                loop {
                    match chars.get(i) {
                        None => {
                            return Err(Error::Syntax {
                                line: start,
                                msg: "unterminated comment".into(),
                            })
                        }
                        Some('*') if chars.get(i + 1) == Some(&'/') => {
                            i += 2;
                            break;
                        }
                        Some('\n') => {
                            line += 1;
                            i += 1;
                        }
                        _ => i += 1,
                    }
                }
            } else if is_punct(c) {
                toks.push((Tok::Punct(c), line));
                i += 1;
            } else {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !is_punct(chars[i]) {
                    i += 1;
                }
                toks.push((Tok::Word(chars[start..i].iter().collect()), line));
            }
        }
        Ok(Lexer { toks, pos: 0 })
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or(self.toks.last())
            .map_or(1, |t| t.1)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            line: self.line(),
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn word(&mut self) -> Result<String> {
        match self.next() {
            Some(Tok::Word(w)) => Ok(w),
            other => {
                self.pos -= 1;
                self.err(format!("expected identifier, found {other:?}"))
            }
        }
    }

    fn punct(&mut self, c: char) -> Result<()> {
        match self.next() {
            Some(Tok::Punct(p)) if p == c => Ok(()),
            other => {
                self.pos -= 1;
                self.err(format!("expected `{c}`, found {other:?}"))
            }
        }
    }

    fn at_punct(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Punct(c))
    }

    /// Comma separated words up to (not including) `close`.
    fn word_list(&mut self, close: char) -> Result<Vec<String>> {
        let mut out = Vec::new();
        while !self.at_punct(close) {
            out.push(self.word()?);
            if self.at_punct(',') {
                self.next();
            }
        }
        Ok(out)
    }

    fn skip_block(&mut self) -> Result<()> {
        self.punct('{')?;
        let mut depth = 1;
        while depth > 0 {
            match self.next() {
                Some(Tok::Punct('{')) => depth += 1,
                Some(Tok::Punct('}')) => depth -= 1,
                Some(_) => {}
                None => return self.err("unterminated block"),
            }
        }
        Ok(())
    }

    fn skip_statement(&mut self) -> Result<()> {
        loop {
            match self.next() {
                Some(Tok::Punct(';')) => return Ok(()),
                Some(_) => {}
                None => return self.err("unterminated statement"),
            }
        }
    }
}

fn number(lx: &mut Lexer) -> Result<f64> {
    let w = lx.word()?;
    w.parse::<f64>().or_else(|_| lx.err(format!("`{w}` is not a number")))
}

struct RawCpt {
    child: String,
    parents: Vec<String>,
    table: Option<Vec<f64>>,
    rows: Vec<(Vec<String>, Vec<f64>)>,
    line: usize,
}

pub fn parse_network(src: &str) -> Result<BayesNet> {
    let mut lx = Lexer::new(src)?;
    let mut vars: Vec<(String, Vec<String>)> = Vec::new();
    let mut cpts: Vec<RawCpt> = Vec::new();
    while let Some(tok) = lx.next() {
        match tok {
            Tok::Word(w) if w == "network" => {
                while !lx.at_punct('{') {
                    lx.word()?;
                }
                lx.skip_block()?;
            }
            Tok::Word(w) if w == "variable" => {
                let name = lx.word()?;
                lx.punct('{')?;
                let mut states = None;
                while !lx.at_punct('}') {
                    let kw = lx.word()?;
                    if kw == "type" {
                        let kind = lx.word()?;
                        if kind != "discrete" {
                            return lx.err(format!("variable {name}: only discrete types are supported"));
                        }
                        lx.punct('[')?;
                        let k: usize = lx
                            .word()?
                            .parse()
                            .or_else(|_| lx.err("bad state count"))?;
                        lx.punct(']')?;
                        lx.punct('{')?;
                        let s = lx.word_list('}')?;
                        lx.punct('}')?;
                        lx.punct(';')?;
                        if s.len() != k {
                            return lx.err(format!(
                                "variable {name} declares {k} states but lists {}",
                                s.len()
                            ));
                        }
                        states = Some(s);
                    } else {
                        lx.skip_statement()?;
                    }
                }
                lx.punct('}')?;
                match states {
                    Some(s) => vars.push((name, s)),
                    None => return lx.err(format!("variable {name} has no type")),
                }
            }
            Tok::Word(w) if w == "probability" => {
                let line = lx.line();
                lx.punct('(')?;
                let child = lx.word()?;
                let mut parents = Vec::new();
                if lx.at_punct('|') {
                    lx.next();
                    parents = lx.word_list(')')?;
                }
                lx.punct(')')?;
                lx.punct('{')?;
                let mut cpt = RawCpt {
                    child,
                    parents,
                    table: None,
                    rows: Vec::new(),
                    line,
                };
                while !lx.at_punct('}') {
                    if lx.at_punct('(') {
                        lx.next();
                        let cfg = lx.word_list(')')?;
                        lx.punct(')')?;
                        let mut ps = Vec::new();
                        while !lx.at_punct(';') {
                            ps.push(number(&mut lx)?);
                            if lx.at_punct(',') {
                                lx.next();
                            }
                        }
                        lx.punct(';')?;
                        cpt.rows.push((cfg, ps));
                    } else {
                        let kw = lx.word()?;
                        if kw == "table" {
                            let mut ps = Vec::new();
                            while !lx.at_punct(';') {
                                ps.push(number(&mut lx)?);
                                if lx.at_punct(',') {
                                    lx.next();
                                }
                            }
                            lx.punct(';')?;
                            cpt.table = Some(ps);
                        } else {
                            lx.skip_statement()?;
                        }
                    }
                }
                lx.punct('}')?;
                cpts.push(cpt);
            }
            other => return lx.err(format!("unexpected token {other:?}")),
        }
    }
    assemble(vars, cpts)
}

fn assemble(vars: Vec<(String, Vec<String>)>, raw: Vec<RawCpt>) -> Result<BayesNet> {
    let index: HashMap<&str, usize> = vars
        .iter()
        .enumerate()
        .map(|(i, (n, _))| (n.as_str(), i))
        .collect();
    if index.len() != vars.len() {
        return Err(Error::invalid("duplicate variable declaration"));
    }
    let n = vars.len();
    let mut parents: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut cpts: Vec<Vec<f64>> = vec![Vec::new(); n];
    let syntax = |line: usize, msg: String| Error::Syntax { line, msg };
    for c in raw {
        let ci = *index
            .get(c.child.as_str())
            .ok_or_else(|| syntax(c.line, format!("probability for unknown variable `{}`", c.child)))?;
        if parents[ci].is_some() {
            return Err(syntax(c.line, format!("second probability block for `{}`", c.child)));
        }
        let ps: Vec<usize> = c
            .parents
            .iter()
            .map(|p| {
                index
                    .get(p.as_str())
                    .copied()
                    .ok_or_else(|| syntax(c.line, format!("unknown parent `{p}` of `{}`", c.child)))
            })
            .collect::<Result<_>>()?;
        let r = vars[ci].1.len();
        let q: usize = ps.iter().map(|&p| vars[p].1.len()).product();
        let mut table = vec![f64::NAN; q * r];
        if let Some(t) = c.table {
            if !ps.is_empty() {
                return Err(syntax(
                    c.line,
                    format!("`table` form for `{}` with parents is not supported; use rows", c.child),
                ));
            }
            if t.len() != r {
                return Err(syntax(c.line, format!("table of `{}` has {} entries, expected {r}", c.child, t.len())));
            }
            table = t;
        }
        for (cfg, probs) in c.rows {
            if cfg.len() != ps.len() {
                return Err(syntax(c.line, format!("row of `{}` names {} parent values", c.child, cfg.len())));
            }
            if probs.len() != r {
                return Err(syntax(c.line, format!("row of `{}` has {} probabilities, expected {r}", c.child, probs.len())));
            }
            let mut config = 0usize;
            for (&p, v) in ps.iter().zip(&cfg) {
                let k = vars[p]
                    .1
                    .iter()
                    .position(|s| s == v)
                    .ok_or_else(|| syntax(c.line, format!("`{v}` is not a state of `{}`", vars[p].0)))?;
                config = config * vars[p].1.len() + k;
            }
            table[config * r..(config + 1) * r].copy_from_slice(&probs);
        }
        if table.iter().any(|p| p.is_nan()) {
            return Err(syntax(c.line, format!("probability table of `{}` is incomplete", c.child)));
        }
        parents[ci] = Some(ps);
        cpts[ci] = table;
    }
    let mut parent_lists = Vec::with_capacity(n);
    for (i, p) in parents.into_iter().enumerate() {
        parent_lists.push(p.ok_or_else(|| Error::invalid(format!("no probability block for `{}`", vars[i].0)))?);
    }
    let (names, states) = vars.into_iter().unzip();
    BayesNet::new(names, states, parent_lists, cpts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_binary_node() {
        let net = parse_network(
            "network x { }\nvariable A { type discrete [ 2 ] { t, f }; }\nprobability ( A ) { table 0.3, 0.7; }",
        )
        .unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(net.cpts[0], vec![0.3, 0.7]);
    }

    #[test]
    fn bad_row_sum() {
        let err = parse_network(
            "variable A { type discrete [ 2 ] { t, f }; }\nprobability ( A ) { table 0.3, 0.6; }",
        )
        .unwrap_err();
        assert!(err.to_string().contains("sums to"));
    }

    #[test]
    fn conditional_rows_and_errors() {
        let src = "// comment\n\
            variable A { type discrete [ 2 ] { t, f }; property x = y; }\n\
            variable B { type discrete [ 3 ] { lo, mid, hi }; }\n\
            probability ( A ) { table 0.5, 0.5; }\n\
            /* block\ncomment */\n\
            probability ( B | A ) {\n (f) 0.1, 0.2, 0.7;\n (t) 0.6, 0.3, 0.1;\n}\n";
        let net = parse_network(src).unwrap();
        assert_eq!(net.parents[1], vec![0]);
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        assert!(close(&net.cpts[1][..3], &[0.6, 0.3, 0.1]));
        assert!(close(net.cpt_row(1, &[1, 0]), &[0.1, 0.2, 0.7]));

        let unknown = src.replace("B | A", "B | Q");
        assert!(parse_network(&unknown).unwrap_err().to_string().contains("unknown parent"));

        let missing = src.replace(" (t) 0.6, 0.3, 0.1;\n", "");
        assert!(parse_network(&missing).unwrap_err().to_string().contains("incomplete"));
    }

    #[test]
    fn cycle_rejected() {
        let src = "variable A { type discrete [ 2 ] { t, f }; }\n\
            variable B { type discrete [ 2 ] { t, f }; }\n\
            probability ( A | B ) { (t) 0.5, 0.5; (f) 0.5, 0.5; }\n\
            probability ( B | A ) { (t) 0.5, 0.5; (f) 0.5, 0.5; }\n";
        assert!(parse_network(src).unwrap_err().to_string().contains("cycle"));
    }
}
