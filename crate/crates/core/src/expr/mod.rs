//! The single-node genome: an ordered node array wired left to right.
//!
//! The array starts with a pool of constants, continues with one variable
//! node per input dimension, and ends with function nodes whose operands are
//! always nodes further left. A handful of identity links pick the roots of
//! the model's features out of the array.

mod infix;
mod mutate;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::scalar::Scalar;

pub use infix::to_infix;
pub use mutate::{mutate, mutate_traced, MoveKind, MutationOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Square,
    Cube,
    Sine,
    Tanh,
}

impl ElementaryOp {
    pub const ALL: [ElementaryOp; 8] = [
        ElementaryOp::Add,
        ElementaryOp::Sub,
        ElementaryOp::Mul,
        ElementaryOp::Div,
        ElementaryOp::Square,
        ElementaryOp::Cube,
        ElementaryOp::Sine,
        ElementaryOp::Tanh,
    ];

    /// `{+, -, *, /}`
    pub fn arithmetic() -> Vec<ElementaryOp> {
        use ElementaryOp::*;
        vec![Add, Sub, Mul, Div]
    }

    /// `{+, -, *, square, cube, sine, tanh}`
    pub fn extended() -> Vec<ElementaryOp> {
        use ElementaryOp::*;
        vec![Add, Sub, Mul, Square, Cube, Sine, Tanh]
    }

    pub fn arity(self) -> usize {
        match self {
            ElementaryOp::Add | ElementaryOp::Sub | ElementaryOp::Mul | ElementaryOp::Div => 2,
            _ => 1,
        }
    }

    /// Infix operator symbol or prefix function name.
    pub fn symbol(self) -> &'static str {
        match self {
            ElementaryOp::Add => "+",
            ElementaryOp::Sub => "-",
            ElementaryOp::Mul => "*",
            ElementaryOp::Div => "/",
            ElementaryOp::Square => "sq",
            ElementaryOp::Cube => "cb",
            ElementaryOp::Sine => "sin",
            ElementaryOp::Tanh => "tanh",
        }
    }

    /// Applies the operator. Unary operators ignore `b`. Division is unprotected.
    #[inline]
    pub fn apply<T: Scalar>(self, a: T, b: T) -> T {
        match self {
            ElementaryOp::Add => a + b,
            ElementaryOp::Sub => a - b,
            ElementaryOp::Mul => a * b,
            ElementaryOp::Div => a / b,
            ElementaryOp::Square => a * a,
            ElementaryOp::Cube => a * a * a,
            ElementaryOp::Sine => a.sin(),
            ElementaryOp::Tanh => a.tanh(),
        }
    }
}

impl fmt::Display for ElementaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for ElementaryOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "+" | "add" => ElementaryOp::Add,
            "-" | "sub" => ElementaryOp::Sub,
            "*" | "mul" => ElementaryOp::Mul,
            "/" | "div" => ElementaryOp::Div,
            "sq" | "square" => ElementaryOp::Square,
            "cb" | "cube" => ElementaryOp::Cube,
            "sin" | "sine" => ElementaryOp::Sine,
            "tanh" => ElementaryOp::Tanh,
            other => return Err(Error::Config(format!("unknown elementary function `{other}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node<T> {
    Constant(T),
    /// Input dimension index.
    Variable(usize),
    /// Operand indices; only the first `op.arity()` entries are used.
    Function { op: ElementaryOp, args: [usize; 2] },
}

impl<T> Node<T> {
    pub fn links(&self) -> &[usize] {
        match self {
            Node::Function { op, args } => &args[..op.arity()],
            _ => &[],
        }
    }

    pub fn is_function(&self) -> bool {
        matches!(self, Node::Function { .. })
    }
}

/// Shape parameters for a freshly initialized genome.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayConfig {
    pub array_size: usize,
    pub n_constants: usize,
    pub n_inputs: usize,
    pub function_set: Vec<ElementaryOp>,
    pub n_features: usize,
    pub depth_limit: usize,
    /// Probability that a mutation rewires a function-node link rather
    /// than retargeting an identity link.
    pub rewire_prob: f64,
}

impl ArrayConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_inputs == 0 {
            return fail("at least one input dimension is required");
        }
        if self.array_size < self.n_constants + self.n_inputs + 1 {
            return fail("array size must leave room for at least one function node");
        }
        if self.function_set.is_empty() {
            return fail("function set is empty");
        }
        if self.n_features == 0 {
            return fail("number of features must be at least 1");
        }
        if self.depth_limit == 0 {
            return fail("depth limit must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.rewire_prob) {
            return fail("rewire probability must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeArray<T> {
    nodes: Vec<Node<T>>,
    n_inputs: usize,
    n_constants: usize,
    identity: Vec<usize>,
    depth_limit: usize,
    rewire_prob: f64,
}

/// Creates a random genome satisfying every structural invariant.
pub fn init_node_array<T: Scalar>(cfg: &ArrayConfig, rng: &mut RandomStream) -> Result<NodeArray<T>> {
    cfg.validate()?;
    let mut nodes = Vec::with_capacity(cfg.array_size);
    for _ in 0..cfg.n_constants {
        nodes.push(Node::Constant(T::lit(rng.random_range(-1.0..=1.0))));
    }
    for d in 0..cfg.n_inputs {
        nodes.push(Node::Variable(d));
    }
    for i in nodes.len()..cfg.array_size {
        let op = cfg.function_set[rng.random_range(0..cfg.function_set.len())];
        let mut args = [0usize; 2];
        for a in args.iter_mut().take(op.arity()) {
            *a = rng.random_range(0..i);
        }
        nodes.push(Node::Function { op, args });
    }
    let mut array = NodeArray {
        nodes,
        n_inputs: cfg.n_inputs,
        n_constants: cfg.n_constants,
        identity: Vec::with_capacity(cfg.n_features),
        depth_limit: cfg.depth_limit,
        rewire_prob: cfg.rewire_prob,
    };
    let eligible = array.eligible_targets();
    if eligible.is_empty() {
        return Err(Error::Config("no node is eligible as a feature root".into()));
    }
    for _ in 0..cfg.n_features {
        array.identity.push(eligible[rng.random_range(0..eligible.len())]);
    }
    Ok(array)
}

/// Evaluates the subtree rooted at `node_index`. Non-finite values propagate.
pub fn eval_node<T: Scalar>(array: &NodeArray<T>, node_index: usize, x: &[T]) -> T {
    array.eval_node(node_index, x)
}

impl<T: Scalar> NodeArray<T> {
    /// Builds an array from explicit parts, checking every invariant.
    pub fn from_parts(
        nodes: Vec<Node<T>>,
        n_inputs: usize,
        identity: Vec<usize>,
        depth_limit: usize,
        rewire_prob: f64,
    ) -> Result<Self> {
        let n_constants = nodes.iter().take_while(|n| matches!(n, Node::Constant(_))).count();
        let array = NodeArray { nodes, n_inputs, n_constants, identity, depth_limit, rewire_prob };
        array.check_invariants().map_err(Error::Config)?;
        Ok(array)
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_constants(&self) -> usize {
        self.n_constants
    }

    pub fn identity_links(&self) -> &[usize] {
        &self.identity
    }

    pub fn n_features(&self) -> usize {
        self.identity.len()
    }

    pub fn depth_limit(&self) -> usize {
        self.depth_limit
    }

    pub fn rewire_prob(&self) -> f64 {
        self.rewire_prob
    }

    /// Index of the first function node.
    pub fn first_function(&self) -> usize {
        self.n_constants + self.n_inputs
    }

    /// Depth of every node, leaves at 0.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some(d) = node.links().iter().map(|&l| depth[l]).max() {
                depth[i] = d + 1;
            }
        }
        depth
    }

    /// Whether each node's subtree references at least one variable.
    pub fn variable_reach(&self) -> Vec<bool> {
        let mut reach = vec![false; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            reach[i] = match node {
                Node::Variable(_) => true,
                Node::Constant(_) => false,
                Node::Function { .. } => node.links().iter().any(|&l| reach[l]),
            };
        }
        reach
    }

    /// Nodes that may serve as feature roots: variable-dependent and within the depth limit.
    pub fn eligible_targets(&self) -> Vec<usize> {
        let depth = self.depths();
        self.variable_reach()
            .iter()
            .enumerate()
            .filter(|&(i, &r)| r && depth[i] <= self.depth_limit)
            .map(|(i, _)| i)
            .collect()
    }

    /// True when every identity-rooted tree is variable-dependent and within the depth limit.
    pub fn features_valid(&self) -> bool {
        let depth = self.depths();
        let reach = self.variable_reach();
        self.identity.iter().all(|&t| reach[t] && depth[t] <= self.depth_limit)
    }

    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let boundary = self.n_constants + self.n_inputs;
        if self.nodes.len() <= boundary {
            return Err("array has no function nodes".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Constant(_) if i >= self.n_constants => {
                    return Err(format!("constant node at position {i} outside the constant prefix"))
                }
                Node::Variable(d) if i < self.n_constants || i >= boundary || *d != i - self.n_constants => {
                    return Err(format!("variable node at position {i} out of order"))
                }
                Node::Function { .. } if i < boundary => {
                    return Err(format!("function node at position {i} inside the terminal prefix"))
                }
                Node::Function { .. } => {
                    if let Some(&l) = node.links().iter().find(|&&l| l >= i) {
                        return Err(format!("node {i} links forward to {l}"));
                    }
                }
                _ => {}
            }
        }
        if self.identity.is_empty() {
            return Err("no identity links".into());
        }
        let depth = self.depths();
        let reach = self.variable_reach();
        for &t in &self.identity {
            if t >= self.nodes.len() {
                return Err(format!("identity link {t} out of range"));
            }
            if !reach[t] {
                return Err(format!("identity target {t} has constant output"));
            }
            if depth[t] > self.depth_limit {
                return Err(format!("identity target {t} has depth {} > {}", depth[t], self.depth_limit));
            }
        }
        Ok(())
    }

    pub fn eval_node(&self, node_index: usize, x: &[T]) -> T {
        match &self.nodes[node_index] {
            Node::Constant(c) => *c,
            Node::Variable(d) => x[*d],
            Node::Function { op, args } => {
                let a = self.eval_node(args[0], x);
                let b = if op.arity() == 2 { self.eval_node(args[1], x) } else { T::zero() };
                op.apply(a, b)
            }
        }
    }

    /// Compiles the identity-rooted trees into a straight-line program.
    pub fn feature_program(&self) -> FeatureProgram {
        let mut active = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = self.identity.clone();
        while let Some(i) = stack.pop() {
            if !active[i] {
                active[i] = true;
                stack.extend_from_slice(self.nodes[i].links());
            }
        }
        FeatureProgram {
            order: (0..self.nodes.len()).filter(|&i| active[i]).collect(),
            roots: self.identity.clone(),
        }
    }

    pub(crate) fn set_link(&mut self, node: usize, slot: usize, target: usize) {
        if let Node::Function { args, .. } = &mut self.nodes[node] {
            args[slot] = target;
        }
    }

    pub(crate) fn set_identity(&mut self, slot: usize, target: usize) {
        self.identity[slot] = target;
    }
}

/// Active nodes of a genome in evaluation order, for repeated feature evaluation.
#[derive(Clone, Debug)]
pub struct FeatureProgram {
    order: Vec<usize>,
    roots: Vec<usize>,
}

impl FeatureProgram {
    pub fn n_features(&self) -> usize {
        self.roots.len()
    }

    /// Writes the feature values at `x` into `out`. `scratch` is resized as needed.
    pub fn eval<T: Scalar>(&self, array: &NodeArray<T>, x: &[T], scratch: &mut Vec<T>, out: &mut [T]) {
        if scratch.len() < array.len() {
            scratch.resize(array.len(), T::zero());
        }
        for &i in &self.order {
            scratch[i] = match &array.nodes[i] {
                Node::Constant(c) => *c,
                Node::Variable(d) => x[*d],
                Node::Function { op, args } => {
                    let b = if op.arity() == 2 { scratch[args[1]] } else { T::zero() };
                    op.apply(scratch[args[0]], b)
                }
            };
        }
        for (o, &r) in out.iter_mut().zip(&self.roots) {
            *o = scratch[r];
        }
    }
}
