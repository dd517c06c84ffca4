//! Piecewise-constant mean functions and their text form:
//!
//! ```text
//! mean_function features=13 nu_min=0.001 nu_max=1000
//! if x[9] <= 13.867 {
//!     return nu[1] = 0.084
//! } else {
//!     return nu[2] = 0.616
//! }
//! ```
//!
//! Cells are written 1-based. Lines starting with `#` are ignored. Numbers are
//! printed in shortest round-trip form, so rendering a parsed function
//! reproduces the text exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::inference::{MeanFn, SimulationOutput};

use super::tree::{Node, PartitionTree};

pub const NU_MIN: f64 = 1e-3;
pub const NU_MAX: f64 = 1e3;

/// Tree features: `θ` followed by the per-coordinate mean of the
/// low-fidelity replicate summaries.
pub fn features(theta: &[f64], y_lo: &[SimulationOutput]) -> Vec<f64> {
    let mut x = theta.to_vec();
    if let Some(first) = y_lo.first() {
        let k = y_lo.len() as f64;
        let mut mean = vec![0.0; first.y.len()];
        for s in y_lo {
            for (m, v) in mean.iter_mut().zip(&s.y) {
                *m += v;
            }
        }
        x.extend(mean.into_iter().map(|m| m / k));
    }
    x
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanFunction {
    pub tree: PartitionTree,
    pub nu: Vec<f64>,
    pub nu_min: f64,
    pub nu_max: f64,
}

impl MeanFunction {
    pub fn new(tree: PartitionTree, nu: Vec<f64>, nu_min: f64, nu_max: f64) -> Result<Self> {
        if nu.len() != tree.cell_count() {
            return Err(Error::DimensionMismatch {
                expected: tree.cell_count(),
                got: nu.len(),
            });
        }
        if !(nu_min > 0.0 && nu_min <= nu_max && nu_max.is_finite()) {
            return Err(Error::invalid(format!("invalid clamp bounds [{nu_min}, {nu_max}]")));
        }
        if nu.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("cell values must be positive and finite"));
        }
        Ok(Self {
            tree,
            nu,
            nu_min,
            nu_max,
        })
    }

    /// `ν ≡ 1` on every cell of `tree`.
    pub fn unit(tree: PartitionTree) -> Self {
        let nu = vec![1.0; tree.cell_count()];
        Self {
            tree,
            nu,
            nu_min: NU_MIN,
            nu_max: NU_MAX,
        }
    }

    pub fn locate(&self, x: &[f64]) -> Result<usize> {
        self.tree.locate(x)
    }

    /// `clamp(ν_k)` for the cell containing `x`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let k = self.tree.locate(x)?;
        Ok(self.nu[k].clamp(self.nu_min, self.nu_max))
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "mean_function features={} nu_min={:?} nu_max={:?}\n",
            self.tree.dim(),
            self.nu_min,
            self.nu_max
        );
        self.render_node(self.tree.root(), 0, &mut out);
        out
    }

    fn render_node(&self, node: &Node, depth: usize, out: &mut String) {
        let pad = "    ".repeat(depth);
        match node {
            Node::Leaf(k) => {
                let _ = writeln!(out, "{pad}return nu[{}] = {:?}", k + 1, self.nu[*k]);
            }
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let _ = writeln!(out, "{pad}if x[{feature}] <= {threshold:?} {{");
                self.render_node(left, depth + 1, out);
                let _ = writeln!(out, "{pad}}} else {{");
                self.render_node(right, depth + 1, out);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::new(text).mean_function()
    }
}

impl MeanFn for MeanFunction {
    fn mean(&self, theta: &[f64], y_lo: &[SimulationOutput]) -> Result<f64> {
        self.eval(&features(theta, y_lo))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Number(String),
    Sym(&'static str),
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn new(text: &str) -> Self {
        let mut toks = Vec::new();
        let mut last = (1, 1);
        for (ln, line) in text.lines().enumerate() {
            let trimmed = line.trim_start();
            if trimmed.starts_with('#') {
                continue;
            }
            let chars: Vec<char> = line.chars().collect();
            let mut i = 0;
            while i < chars.len() {
                let c = chars[i];
                let col = i + 1;
                if c.is_whitespace() {
                    i += 1;
                } else if c.is_ascii_alphabetic() || c == '_' {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    toks.push((Tok::Word(chars[start..i].iter().collect()), ln + 1, col));
                } else if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' {
                    let start = i;
                    i += 1;
                    while i < chars.len() {
                        let d = chars[i];
                        let exp_sign = (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E');
                        if d.is_ascii_alphanumeric() || d == '.' || exp_sign {
                            i += 1;
                        } else {
                            break;
                        }
                    }
                    toks.push((Tok::Number(chars[start..i].iter().collect()), ln + 1, col));
                } else if c == '<' && chars.get(i + 1) == Some(&'=') {
                    toks.push((Tok::Sym("<="), ln + 1, col));
                    i += 2;
                } else {
                    let sym = match c {
                        '{' => "{",
                        '}' => "}",
                        '[' => "[",
                        ']' => "]",
                        '=' => "=",
                        _ => "?",
                    };
                    toks.push((Tok::Sym(sym), ln + 1, col));
                    i += 1;
                }
            }
            last = (ln + 1, chars.len() + 1);
        }
        Self { toks, pos: 0, end: last }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = self
            .toks
            .get(self.pos)
            .map_or(self.end, |(_, l, c)| (*l, *c));
        Err(Error::Parse {
            line,
            column,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn word(&mut self, w: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Word(x)) if x == w => {
                self.pos += 1;
                Ok(())
            }
            _ => self.error(format!("expected `{w}`")),
        }
    }

    fn sym(&mut self, s: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Sym(x)) if *x == s => {
                self.pos += 1;
                Ok(())
            }
            _ => self.error(format!("expected `{s}`")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        match self.peek() {
            Some(Tok::Number(x)) => match x.parse::<f64>() {
                Ok(v) => {
                    self.pos += 1;
                    Ok(v)
                }
                Err(_) => self.error(format!("invalid number `{x}`")),
            },
            _ => self.error("expected a number"),
        }
    }

    fn index(&mut self) -> Result<usize> {
        let at = self.pos;
        let v = self.number()?;
        if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            self.pos = at;
            return self.error("expected a nonnegative integer");
        }
        Ok(v as usize)
    }

    fn key_value(&mut self, key: &str) -> Result<f64> {
        self.word(key)?;
        self.sym("=")?;
        self.number()
    }

    fn mean_function(mut self) -> Result<MeanFunction> {
        self.word("mean_function")?;
        let dim = {
            self.word("features")?;
            self.sym("=")?;
            self.index()?
        };
        let nu_min = self.key_value("nu_min")?;
        let nu_max = self.key_value("nu_max")?;
        let mut nu = Vec::new();
        let root = self.node(dim, &mut nu)?;
        if self.pos < self.toks.len() {
            return self.error("unexpected trailing input");
        }
        let cells = nu.len();
        let mut values = vec![f64::NAN; cells];
        for (k, v) in nu {
            if k == 0 || k > cells || !values[k - 1].is_nan() {
                return Err(Error::invalid(format!(
                    "cell numbers must be 1..{cells}, each used once (found {k})"
                )));
            }
            values[k - 1] = v;
        }
        let tree = PartitionTree::new(root, dim)?;
        MeanFunction::new(tree, values, nu_min, nu_max)
    }

    fn node(&mut self, dim: usize, nu: &mut Vec<(usize, f64)>) -> Result<Node> {
        match self.peek() {
            Some(Tok::Word(w)) if w == "return" => {
                self.pos += 1;
                self.word("nu")?;
                self.sym("[")?;
                let k = self.index()?;
                self.sym("]")?;
                self.sym("=")?;
                let v = self.number()?;
                nu.push((k, v));
                Ok(Node::Leaf(k.saturating_sub(1)))
            }
            Some(Tok::Word(w)) if w == "if" => {
                self.pos += 1;
                self.word("x")?;
                self.sym("[")?;
                let at = self.pos;
                let feature = self.index()?;
                if feature >= dim {
                    self.pos = at;
                    return self.error(format!("feature {feature} out of range for {dim} features"));
                }
                self.sym("]")?;
                self.sym("<=")?;
                let threshold = self.number()?;
                self.sym("{")?;
                let left = self.node(dim, nu)?;
                self.sym("}")?;
                self.word("else")?;
                self.sym("{")?;
                let right = self.node(dim, nu)?;
                self.sym("}")?;
                Ok(Node::Split {
                    feature,
                    threshold,
                    left: Box::new(left),
                    right: Box::new(right),
                })
            }
            _ => self.error("expected `if` or `return`"),
        }
    }
}
