//! Formula syntax: the core AST, its concrete grammar, printing, syntactic
//! measures and a random generator for property tests.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::weight::Weight;

/// Core formulas. Disjunction, implication, equivalence, diamond and box
/// are sugar and are expanded by the smart constructors and the parser.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Bottom,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    /// The least weight into the operand's states is at least the index.
    L(Weight, Box<Formula>),
    /// The greatest weight into the operand's states is at most the index.
    M(Weight, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    /// Right-nested conjunction; `Top` for an empty list.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut parts: Vec<Formula> = parts.into_iter().collect();
        let Some(mut acc) = parts.pop() else {
            return Formula::Top;
        };
        while let Some(f) = parts.pop() {
            acc = Formula::and(f, acc);
        }
        acc
    }

    /// `¬(¬a ∧ ¬b)`
    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    /// `¬(a ∧ ¬b)`
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::and(a, Formula::not(b)))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }

    pub fn lower(r: Weight, f: Formula) -> Self {
        Formula::L(r, Box::new(f))
    }

    pub fn upper(r: Weight, f: Formula) -> Self {
        Formula::M(r, Box::new(f))
    }

    /// `◇φ = L_0 φ`
    pub fn diamond(f: Formula) -> Self {
        Formula::lower(Weight::zero(), f)
    }

    /// `□φ = ¬L_0 ¬φ`
    pub fn boxed(f: Formula) -> Self {
        Formula::not(Formula::diamond(Formula::not(f)))
    }

    pub fn is_modal(&self) -> bool {
        matches!(self, Formula::L(..) | Formula::M(..))
    }

    /// Atoms, `⊤`, `⊥` and their negations.
    pub fn is_literal(&self) -> bool {
        match self {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => true,
            Formula::Not(inner) => {
                matches!(**inner, Formula::Top | Formula::Bottom | Formula::Atom(_))
            }
            _ => false,
        }
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => 0,
            Formula::Not(f) => f.modal_depth(),
            Formula::And(a, b) => a.modal_depth().max(b.modal_depth()),
            Formula::L(_, f) | Formula::M(_, f) => 1 + f.modal_depth(),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => 1,
            Formula::Not(f) | Formula::L(_, f) | Formula::M(_, f) => 1 + f.size(),
            Formula::And(a, b) => 1 + a.size() + b.size(),
        }
    }

    fn collect(&self, indices: &mut BTreeSet<Weight>, atoms: &mut BTreeSet<String>) {
        match self {
            Formula::Top | Formula::Bottom => {}
            Formula::Atom(p) => {
                atoms.insert(p.clone());
            }
            Formula::Not(f) => f.collect(indices, atoms),
            Formula::And(a, b) => {
                a.collect(indices, atoms);
                b.collect(indices, atoms);
            }
            Formula::L(r, f) | Formula::M(r, f) => {
                indices.insert(r.clone());
                f.collect(indices, atoms);
            }
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut atoms = BTreeSet::new();
        self.collect(&mut BTreeSet::new(), &mut atoms);
        atoms
    }
}

/// Indices, atoms, granularity and range of a formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntacticMeasures {
    pub indices: BTreeSet<Weight>,
    pub atoms: BTreeSet<String>,
    /// Least common denominator of the indices (1 when there are none).
    pub granularity: BigInt,
    /// Empty without indices; otherwise the multiples of `1/granularity`
    /// between the least and greatest index, together with 0.
    pub range: BTreeSet<Weight>,
}

pub fn syntactic_measures(f: &Formula) -> SyntacticMeasures {
    let mut indices = BTreeSet::new();
    let mut atoms = BTreeSet::new();
    f.collect(&mut indices, &mut atoms);
    let granularity = indices
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let mut range = BTreeSet::new();
    if let (Some(lo), Some(hi)) = (indices.first(), indices.last()) {
        let gr = BigRational::from_integer(granularity.clone());
        // lo and hi are exact multiples of 1/gr
        let first = (lo.value() * &gr).to_integer();
        let last = (hi.value() * &gr).to_integer();
        let mut j = first;
        while j <= last {
            let point = BigRational::new(j.clone(), granularity.clone());
            range.insert(Weight::new(point).expect("non-negative grid point"));
            j += 1;
        }
        range.insert(Weight::zero());
    }
    SyntacticMeasures {
        indices,
        atoms,
        granularity,
        range,
    }
}

/// Fully parenthesized core syntax, accepted back by [`parse_formula`].
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => f.write_str("true"),
            Formula::Bottom => f.write_str("false"),
            Formula::Atom(p) => f.write_str(p),
            Formula::Not(g) => write!(f, "!{g}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::L(r, g) => write!(f, "L[{r}] {g}"),
            Formula::M(r, g) => write!(f, "M[{r}] {g}"),
        }
    }
}

pub fn print_formula(f: &Formula) -> String {
    f.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("negative modality index at offset {offset}")]
    NegativeIndex { offset: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    Bang,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    Diamond,
    BoxOp,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Slash,
    Dot,
    Minus,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let rest = &text[i..];
        let tok = if c.is_ascii_whitespace() {
            i += 1;
            continue;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Number(text[start..i].to_string()), start));
            continue;
        } else if rest.starts_with("<->") {
            i += 3;
            Tok::DoubleArrow
        } else if rest.starts_with("<>") {
            i += 2;
            Tok::Diamond
        } else if rest.starts_with("[]") {
            i += 2;
            Tok::BoxOp
        } else if rest.starts_with("->") {
            i += 2;
            Tok::Arrow
        } else {
            i += 1;
            match c {
                b'!' => Tok::Bang,
                b'&' => Tok::Amp,
                b'|' => Tok::Pipe,
                b'[' => Tok::LBracket,
                b']' => Tok::RBracket,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'/' => Tok::Slash,
                b'.' => Tok::Dot,
                b'-' => Tok::Minus,
                _ => {
                    let ch = rest.chars().next().unwrap_or('?');
                    return Err(FormulaError::Syntax {
                        offset: start,
                        message: format!("unexpected character `{ch}`"),
                    });
                }
            }
        };
        out.push((tok, start));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + k).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), FormulaError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn iff(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.implication()?;
        if self.eat(&Tok::DoubleArrow) {
            let rhs = self.implication()?;
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.conjunction()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.prefix()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.prefix()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn index(&mut self) -> Result<Weight, FormulaError> {
        self.expect(&Tok::LBracket, "`[`")?;
        if self.peek() == Some(&Tok::Minus) {
            return Err(FormulaError::NegativeIndex {
                offset: self.offset(),
            });
        }
        let start = self.offset();
        let mut text = match self.peek().cloned() {
            Some(Tok::Number(n)) => {
                self.pos += 1;
                n
            }
            _ => return self.error("expected a rational index"),
        };
        for (sep, ch) in [(Tok::Slash, '/'), (Tok::Dot, '.')] {
            if self.eat(&sep) {
                match self.peek().cloned() {
                    Some(Tok::Number(n)) => {
                        self.pos += 1;
                        text.push(ch);
                        text.push_str(&n);
                    }
                    _ => return self.error("expected digits"),
                }
                break;
            }
        }
        self.expect(&Tok::RBracket, "`]`")?;
        text.parse::<Weight>().map_err(|e| FormulaError::Syntax {
            offset: start,
            message: e.to_string(),
        })
    }

    fn prefix(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().cloned() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(Formula::not(self.prefix()?))
            }
            Some(Tok::Diamond) => {
                self.pos += 1;
                Ok(Formula::diamond(self.prefix()?))
            }
            Some(Tok::BoxOp) => {
                self.pos += 1;
                Ok(Formula::boxed(self.prefix()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                let modal = (name == "L" || name == "M") && self.peek_at(1) == Some(&Tok::LBracket);
                self.pos += 1;
                if modal {
                    let r = self.index()?;
                    let body = self.prefix()?;
                    return Ok(if name == "L" {
                        Formula::lower(r, body)
                    } else {
                        Formula::upper(r, body)
                    });
                }
                Ok(match name.as_str() {
                    "true" => Formula::Top,
                    "false" => Formula::Bottom,
                    _ => Formula::Atom(name),
                })
            }
            Some(_) => self.error("expected a formula"),
            None => self.error("unexpected end of input"),
        }
    }
}

/// Parses the concrete syntax (precedence, loosest first: `<->`, `->`,
/// `|`, `&`, prefix operators). `->` associates to the right.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let f = parser.iff()?;
    if parser.pos != parser.tokens.len() {
        return parser.error("trailing input");
    }
    Ok(f)
}

/// Parameters for [`random_formula`].
#[derive(Debug, Clone)]
pub struct RandomFormulaConfig {
    pub atoms: Vec<String>,
    pub max_modal_depth: usize,
    pub index_pool: Vec<Weight>,
    /// Bound on syntactic nesting (excluding sugar expansion).
    pub max_nesting: usize,
}

impl RandomFormulaConfig {
    pub fn new(atoms: &[&str], max_modal_depth: usize, index_pool: &[&str]) -> Self {
        RandomFormulaConfig {
            atoms: atoms.iter().map(|a| a.to_string()).collect(),
            max_modal_depth,
            index_pool: index_pool
                .iter()
                .map(|r| r.parse().expect("index"))
                .collect(),
            max_nesting: 4,
        }
    }
}

pub fn random_formula(seed: u64, config: &RandomFormulaConfig) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_formula_with(&mut rng, config)
}

pub fn random_formula_with<R: Rng>(rng: &mut R, config: &RandomFormulaConfig) -> Formula {
    gen_formula(rng, config, config.max_modal_depth, config.max_nesting)
}

fn gen_formula<R: Rng>(
    rng: &mut R,
    cfg: &RandomFormulaConfig,
    md: usize,
    nesting: usize,
) -> Formula {
    let leaf = |rng: &mut R| {
        if cfg.atoms.is_empty() || rng.random_ratio(1, 12) {
            if rng.random_bool(0.5) {
                Formula::Top
            } else {
                Formula::Bottom
            }
        } else {
            Formula::Atom(cfg.atoms[rng.random_range(0..cfg.atoms.len())].clone())
        }
    };
    if nesting == 0 {
        return leaf(rng);
    }
    let modal_allowed = md > 0 && !cfg.index_pool.is_empty();
    // leaf, not, and, or, L, M
    let weights: [u32; 6] = if modal_allowed {
        [3, 3, 4, 2, 4, 4]
    } else {
        [3, 3, 4, 2, 0, 0]
    };
    let total: u32 = weights.iter().sum();
    let mut pick = rng.random_range(0..total);
    let mut choice = 0;
    while pick >= weights[choice] {
        pick -= weights[choice];
        choice += 1;
    }
    let next = nesting - 1;
    match choice {
        0 => leaf(rng),
        1 => Formula::not(gen_formula(rng, cfg, md, next)),
        2 => Formula::and(
            gen_formula(rng, cfg, md, next),
            gen_formula(rng, cfg, md, next),
        ),
        3 => Formula::or(
            gen_formula(rng, cfg, md, next),
            gen_formula(rng, cfg, md, next),
        ),
        _ => {
            let r = cfg.index_pool[rng.random_range(0..cfg.index_pool.len())].clone();
            let body = gen_formula(rng, cfg, md - 1, next);
            if choice == 4 {
                Formula::lower(r, body)
            } else {
                Formula::upper(r, body)
            }
        }
    }
}
