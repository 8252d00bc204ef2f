//! A strict reader for the DOT subset the renderer emits. Fails on anything
//! outside it, so passing doubles as a grammar check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Id(String),
    Str(String),
    Sym(&'static str),
}

fn tokenize(text: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '{' | '}' | '[' | ']' | ';' | ',' | '=' => {
                out.push(Tok::Sym(match c {
                    '{' => "{",
                    '}' => "}",
                    '[' => "[",
                    ']' => "]",
                    ';' => ";",
                    ',' => ",",
                    _ => "=",
                }));
                i += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push(Tok::Sym("->"));
                i += 2;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('"') => break,
                        Some('\\') => {
                            match chars.get(i + 1) {
                                Some(&e @ ('"' | '\\' | 'n' | 'l' | 'r')) => {
                                    s.push('\\');
                                    s.push(e);
                                }
                                other => return Err(format!("bad escape {other:?}")),
                            }
                            i += 2;
                            continue;
                        }
                        Some('\n') => return Err("raw newline in string".into()),
                        Some(&ch) => s.push(ch),
                    }
                    i += 1;
                }
                i += 1;
                out.push(Tok::Str(s));
            }
            c if c.is_ascii_alphanumeric() || c == '_' || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                    i += 1;
                }
                out.push(Tok::Id(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character {other:?}")),
        }
    }
    Ok(out)
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Census {
    /// Node id to its attributes.
    pub nodes: BTreeMap<String, BTreeMap<String, String>>,
    pub edges: Vec<(String, String, BTreeMap<String, String>)>,
    /// Cluster label to the node ids declared inside it.
    pub clusters: Vec<(String, BTreeSet<String>)>,
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Tok, String> {
        let t = self.toks.get(self.pos).cloned().ok_or("unexpected end")?;
        self.pos += 1;
        Ok(t)
    }

    fn sym(&mut self, s: &'static str) -> Result<(), String> {
        match self.next()? {
            Tok::Sym(x) if x == s => Ok(()),
            other => Err(format!("expected {s}, got {other:?}")),
        }
    }

    fn eat(&mut self, s: &'static str) -> bool {
        if self.peek() == Some(&Tok::Sym(s)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.next()? {
            Tok::Id(s) | Tok::Str(s) => Ok(s),
            other => Err(format!("expected id, got {other:?}")),
        }
    }

    fn attrs(&mut self) -> Result<BTreeMap<String, String>, String> {
        let mut out = BTreeMap::new();
        self.sym("[")?;
        while !self.eat("]") {
            let k = self.id()?;
            self.sym("=")?;
            let v = self.id()?;
            if out.insert(k.clone(), v).is_some() {
                return Err(format!("attribute {k} repeated"));
            }
            if !self.eat(",") {
                self.eat(";");
            }
        }
        Ok(out)
    }

    fn stmts(&mut self, census: &mut Census, cluster: Option<usize>) -> Result<(), String> {
        while !self.eat("}") {
            match self.peek().cloned() {
                Some(Tok::Id(k)) if k == "graph" || k == "node" || k == "edge" => {
                    self.pos += 1;
                    self.attrs()?;
                }
                Some(Tok::Id(k)) if k == "subgraph" => {
                    self.pos += 1;
                    let name = self.id()?;
                    if !name.starts_with("cluster_") {
                        return Err(format!("subgraph {name} is not a cluster"));
                    }
                    self.sym("{")?;
                    census.clusters.push((String::new(), BTreeSet::new()));
                    let index = census.clusters.len() - 1;
                    self.stmts(census, Some(index))?;
                }
                Some(Tok::Id(_)) | Some(Tok::Str(_)) => {
                    let first = self.id()?;
                    if self.eat("=") {
                        let value = self.id()?;
                        match (first.as_str(), cluster) {
                            ("label", Some(c)) => census.clusters[c].0 = value,
                            _ => return Err(format!("stray assignment {first}={value}")),
                        }
                    } else if self.eat("->") {
                        let second = self.id()?;
                        let attrs = if self.peek() == Some(&Tok::Sym("[")) { self.attrs()? } else { BTreeMap::new() };
                        census.edges.push((first, second, attrs));
                    } else {
                        let attrs = if self.peek() == Some(&Tok::Sym("[")) { self.attrs()? } else { BTreeMap::new() };
                        if census.nodes.insert(first.clone(), attrs).is_some() {
                            return Err(format!("node {first} declared twice"));
                        }
                        if let Some(c) = cluster {
                            census.clusters[c].1.insert(first);
                        }
                    }
                }
                other => return Err(format!("unexpected {other:?}")),
            }
            self.eat(";");
        }
        Ok(())
    }
}

/// Parses `digraph <id> { ... }`; every edge endpoint must be a declared node.
pub fn parse(text: &str) -> Result<Census, String> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    match p.next()? {
        Tok::Id(k) if k == "digraph" => {}
        other => return Err(format!("expected digraph, got {other:?}")),
    }
    p.id()?;
    p.sym("{")?;
    let mut census = Census::default();
    p.stmts(&mut census, None)?;
    if p.pos != p.toks.len() {
        return Err("trailing tokens after the graph".into());
    }
    for (a, b, _) in &census.edges {
        for end in [a, b] {
            if !census.nodes.contains_key(end) {
                return Err(format!("edge endpoint {end} is not a declared node"));
            }
        }
    }
    Ok(census)
}
