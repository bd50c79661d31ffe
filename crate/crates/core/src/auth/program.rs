//! Arithmetic circuits over `Z_p` with labeled inputs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub type Label = Vec<u8>;

pub const MAX_LABEL_LEN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    /// The `i`-th input wire.
    Input(usize),
    Const(u64),
    Add(usize, usize),
    Mul(usize, usize),
}

/// A DAG of fan-in-2 gates listed in topological order; the last gate is the output.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    gates: Vec<Gate>,
    inputs: usize,
}

/// Something that can interpret a circuit.
pub trait Evaluator {
    type Value: Clone;
    fn input(&mut self, index: usize) -> Result<Self::Value>;
    fn constant(&mut self, c: u64) -> Result<Self::Value>;
    fn add(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn mul(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
}

impl Circuit {
    /// Checks that operands precede their gates and that every input is used once as a wire.
    pub fn new(gates: Vec<Gate>, inputs: usize) -> Result<Self> {
        if gates.is_empty() {
            return Err(Error::Circuit("empty circuit".into()));
        }
        let mut seen = vec![false; inputs];
        for (i, g) in gates.iter().enumerate() {
            match *g {
                Gate::Input(k) => {
                    if k >= inputs {
                        return Err(Error::Circuit(format!("input {k} out of range")));
                    }
                    if seen[k] {
                        return Err(Error::Circuit(format!("input {k} has two wires")));
                    }
                    seen[k] = true;
                }
                Gate::Const(_) => {}
                Gate::Add(a, b) | Gate::Mul(a, b) => {
                    if a >= i || b >= i {
                        return Err(Error::Circuit(format!("gate {i} is not topologically ordered")));
                    }
                }
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::Circuit(format!("input {k} has no wire")));
        }
        Ok(Self { gates, inputs })
    }

    /// The single-input identity circuit.
    pub fn identity() -> Self {
        Self {
            gates: vec![Gate::Input(0)],
            inputs: 1,
        }
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs
    }

    pub fn output(&self) -> usize {
        self.gates.len() - 1
    }

    /// Values of every wire.
    pub fn evaluate_all<E: Evaluator>(&self, ev: &mut E) -> Result<Vec<E::Value>> {
        let mut vals: Vec<E::Value> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let v = match *g {
                Gate::Input(k) => ev.input(k)?,
                Gate::Const(c) => ev.constant(c)?,
                Gate::Add(a, b) => ev.add(&vals[a], &vals[b])?,
                Gate::Mul(a, b) => ev.mul(&vals[a], &vals[b])?,
            };
            vals.push(v);
        }
        Ok(vals)
    }

    pub fn evaluate<E: Evaluator>(&self, ev: &mut E) -> Result<E::Value> {
        Ok(self.evaluate_all(ev)?.pop().expect("non-empty circuit"))
    }

    /// Multiplicative depth, not counting products with a constant.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.gates.len()];
        let mut constant = vec![false; self.gates.len()];
        for (i, g) in self.gates.iter().enumerate() {
            match *g {
                Gate::Input(_) => {}
                Gate::Const(_) => constant[i] = true,
                Gate::Add(a, b) => {
                    depth[i] = depth[a].max(depth[b]);
                    constant[i] = constant[a] && constant[b];
                }
                Gate::Mul(a, b) => {
                    constant[i] = constant[a] && constant[b];
                    depth[i] = depth[a].max(depth[b]) + usize::from(!constant[a] && !constant[b]);
                }
            }
        }
        depth[self.output()]
    }

    /// Number of ciphertext-by-ciphertext products.
    pub fn multiplications(&self) -> usize {
        let mut constant = vec![false; self.gates.len()];
        let mut count = 0;
        for (i, g) in self.gates.iter().enumerate() {
            match *g {
                Gate::Input(_) => {}
                Gate::Const(_) => constant[i] = true,
                Gate::Add(a, b) => constant[i] = constant[a] && constant[b],
                Gate::Mul(a, b) => {
                    constant[i] = constant[a] && constant[b];
                    count += usize::from(!constant[a] && !constant[b]);
                }
            }
        }
        count
    }

    /// Evaluates over `Z_p`.
    pub fn eval_mod(&self, inputs: &[u64], p: u64) -> Result<u64> {
        if inputs.len() != self.inputs {
            return Err(Error::LengthMismatch {
                expected: self.inputs,
                got: inputs.len(),
            });
        }
        self.evaluate(&mut ModP { inputs, p })
    }
}

struct ModP<'a> {
    inputs: &'a [u64],
    p: u64,
}

impl Evaluator for ModP<'_> {
    type Value = u64;
    fn input(&mut self, index: usize) -> Result<u64> {
        Ok(self.inputs[index] % self.p)
    }
    fn constant(&mut self, c: u64) -> Result<u64> {
        Ok(c % self.p)
    }
    fn add(&mut self, a: &u64, b: &u64) -> Result<u64> {
        Ok(((*a as u128 + *b as u128) % self.p as u128) as u64)
    }
    fn mul(&mut self, a: &u64, b: &u64) -> Result<u64> {
        Ok(((*a as u128 * *b as u128) % self.p as u128) as u64)
    }
}

/// A circuit together with the distinct labels of its inputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledProgram {
    circuit: Circuit,
    labels: Vec<Label>,
}

impl LabeledProgram {
    pub fn new(circuit: Circuit, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != circuit.num_inputs() {
            return Err(Error::LengthMismatch {
                expected: circuit.num_inputs(),
                got: labels.len(),
            });
        }
        for (i, l) in labels.iter().enumerate() {
            if l.len() > MAX_LABEL_LEN {
                return Err(Error::LabelTooLong);
            }
            if labels[..i].contains(l) {
                return Err(Error::Circuit(format!("duplicate label {:?}", String::from_utf8_lossy(l))));
            }
        }
        Ok(Self { circuit, labels })
    }

    /// `Id_τ`.
    pub fn identity(label: impl Into<Label>) -> Result<Self> {
        Self::new(Circuit::identity(), vec![label.into()])
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn depth(&self) -> usize {
        self.circuit.depth()
    }

    /// Parses an expression over named inputs with `+`, `*`, non-negative
    /// integer constants and parentheses. Labels are the variable names in
    /// order of first appearance; repeated names share one wire.
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = tokenize(src)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            gates: Vec::new(),
            names: Vec::new(),
            wires: BTreeMap::new(),
        };
        parser.sum()?;
        if parser.pos != parser.tokens.len() {
            return Err(Error::Circuit(format!("unexpected {:?}", parser.tokens[parser.pos])));
        }
        let labels = parser.names.iter().map(|n| n.as_bytes().to_vec()).collect();
        Self::new(Circuit::new(parser.gates, parser.names.len())?, labels)
    }

    /// Renders the circuit as an expression.
    pub fn to_expression(&self) -> String {
        let mut text: Vec<String> = Vec::with_capacity(self.circuit.gates.len());
        for g in &self.circuit.gates {
            let s = match *g {
                Gate::Input(k) => String::from_utf8_lossy(&self.labels[k]).into_owned(),
                Gate::Const(c) => c.to_string(),
                Gate::Add(a, b) => format!("({} + {})", text[a], text[b]),
                Gate::Mul(a, b) => format!("({} * {})", text[a], text[b]),
            };
            text.push(s);
        }
        text.pop().unwrap()
    }
}

/// `g(P_1, …, P_t)`: input `k` of `g` is fed by the output of `programs[k]`.
/// Inputs with equal labels across the programs become one wire.
pub fn compose(g: &Circuit, programs: &[LabeledProgram]) -> Result<LabeledProgram> {
    if g.num_inputs() != programs.len() {
        return Err(Error::LengthMismatch {
            expected: g.num_inputs(),
            got: programs.len(),
        });
    }
    let mut labels: Vec<Label> = Vec::new();
    for p in programs {
        for l in &p.labels {
            if !labels.contains(l) {
                labels.push(l.clone());
            }
        }
    }
    let mut gates: Vec<Gate> = labels.iter().enumerate().map(|(k, _)| Gate::Input(k)).collect();
    let mut outputs = Vec::with_capacity(programs.len());
    for p in programs {
        let mut map = Vec::with_capacity(p.circuit.gates.len());
        for gate in &p.circuit.gates {
            let wire = match *gate {
                Gate::Input(k) => labels.iter().position(|l| *l == p.labels[k]).unwrap(),
                Gate::Const(c) => push(&mut gates, Gate::Const(c)),
                Gate::Add(a, b) => push(&mut gates, Gate::Add(map[a], map[b])),
                Gate::Mul(a, b) => push(&mut gates, Gate::Mul(map[a], map[b])),
            };
            map.push(wire);
        }
        outputs.push(*map.last().unwrap());
    }
    let mut map = Vec::with_capacity(g.gates.len());
    for gate in &g.gates {
        let wire = match *gate {
            Gate::Input(k) => outputs[k],
            Gate::Const(c) => push(&mut gates, Gate::Const(c)),
            Gate::Add(a, b) => push(&mut gates, Gate::Add(map[a], map[b])),
            Gate::Mul(a, b) => push(&mut gates, Gate::Mul(map[a], map[b])),
        };
        map.push(wire);
    }
    let out = *map.last().unwrap();
    if out != gates.len() - 1 {
        // the output wire is not last; make it last
        gates = prune_to(gates, out);
    }
    let n = labels.len();
    LabeledProgram::new(Circuit::new(gates, n)?, labels)
}

fn push(gates: &mut Vec<Gate>, g: Gate) -> usize {
    gates.push(g);
    gates.len() - 1
}

/// Keeps wires `0..=out`; the inputs always come first so every input survives.
fn prune_to(mut gates: Vec<Gate>, out: usize) -> Vec<Gate> {
    if matches!(gates[out], Gate::Input(_)) {
        // move the chosen input to the end: swap it with the last input wire
        let inputs = gates.iter().take_while(|g| matches!(g, Gate::Input(_))).count();
        gates.truncate(inputs);
        gates.swap(out, inputs - 1);
        return gates;
    }
    gates.truncate(out + 1);
    gates
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Num(u64),
    Plus,
    Star,
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '+' => {
                chars.next();
                out.push(Token::Plus);
            }
            '*' | '×' => {
                chars.next();
                out.push(Token::Star);
            }
            '(' => {
                chars.next();
                out.push(Token::Open);
            }
            ')' => {
                chars.next();
                out.push(Token::Close);
            }
            c if c.is_ascii_digit() => {
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    end = j + d.len_utf8();
                    chars.next();
                }
                let n = src[i..end]
                    .parse()
                    .map_err(|_| Error::Circuit(format!("constant {:?} too large", &src[i..end])))?;
                out.push(Token::Num(n));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if !(d.is_alphanumeric() || d == '_') {
                        break;
                    }
                    end = j + d.len_utf8();
                    chars.next();
                }
                out.push(Token::Ident(src[i..end].to_string()));
            }
            other => return Err(Error::Circuit(format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    gates: Vec<Gate>,
    names: Vec<String>,
    wires: BTreeMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn sum(&mut self) -> Result<usize> {
        let mut left = self.product()?;
        while self.peek() == Some(&Token::Plus) {
            self.pos += 1;
            let right = self.product()?;
            left = push(&mut self.gates, Gate::Add(left, right));
        }
        Ok(left)
    }

    fn product(&mut self) -> Result<usize> {
        let mut left = self.atom()?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            let right = self.atom()?;
            left = push(&mut self.gates, Gate::Mul(left, right));
        }
        Ok(left)
    }

    fn atom(&mut self) -> Result<usize> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Circuit("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(n) => Ok(push(&mut self.gates, Gate::Const(n))),
            Token::Ident(name) => {
                if let Some(&w) = self.wires.get(&name) {
                    return Ok(w);
                }
                let k = self.names.len();
                self.names.push(name.clone());
                let w = push(&mut self.gates, Gate::Input(k));
                self.wires.insert(name, w);
                Ok(w)
            }
            Token::Open => {
                let w = self.sum()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(Error::Circuit("missing ')'".into()));
                }
                self.pos += 1;
                Ok(w)
            }
            other => Err(Error::Circuit(format!("unexpected {other:?}"))),
        }
    }
}
