use std::fmt::Write;

use super::{Node, NodeArray};
use crate::scalar::{format_exact, Scalar};

/// Fully parenthesized infix text of the subtree rooted at `node_index`.
///
/// Binary operators print as `(a op b)`, unary ones as `name(a)`, variables
/// as `x0, x1, ...`; constants round-trip bit-exactly. Shared subtrees are
/// expanded, so the text length grows with the tree size, not the array size.
pub fn to_infix<T: Scalar>(array: &NodeArray<T>, node_index: usize) -> String {
    let mut s = String::new();
    write_node(array, node_index, &mut s);
    s
}

fn write_node<T: Scalar>(array: &NodeArray<T>, i: usize, out: &mut String) {
    match &array.nodes()[i] {
        Node::Constant(c) => out.push_str(&format_exact(*c)),
        Node::Variable(d) => {
            let _ = write!(out, "x{d}");
        }
        Node::Function { op, args } => {
            if op.arity() == 2 {
                out.push('(');
                write_node(array, args[0], out);
                let _ = write!(out, " {} ", op.symbol());
                write_node(array, args[1], out);
                out.push(')');
            } else {
                out.push_str(op.symbol());
                out.push('(');
                write_node(array, args[0], out);
                out.push(')');
            }
        }
    }
}
