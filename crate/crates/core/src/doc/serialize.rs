use std::fmt::Write;

use super::DocNode;

/// Canonical form: two-space indentation, one element per line, empty
/// children written as bare words. `parse_document` of the output is
/// structurally equal to the input.
pub fn serialize_document(root: &DocNode) -> String {
    let mut out = String::new();
    for child in &root.children {
        write_node(&mut out, child, 0);
    }
    out
}

fn write_node(out: &mut String, node: &DocNode, depth: usize) {
    let indent = "  ".repeat(depth);
    let suffix = node
        .condition_suffix
        .as_ref()
        .map(|s| format!("/{s}"))
        .unwrap_or_default();

    if !node.children.is_empty() {
        let _ = writeln!(out, "{indent}<{}>", node.tag);
        for child in &node.children {
            write_node(out, child, depth + 1);
        }
        let _ = writeln!(out, "{indent}</{}>{suffix}", node.tag);
    } else if let Some(text) = &node.text {
        let _ = writeln!(out, "{indent}<{tag}>{text}</{tag}>{suffix}", tag = node.tag);
    } else if node.condition_suffix.is_some() {
        let _ = writeln!(out, "{indent}<{tag}></{tag}>{suffix}", tag = node.tag);
    } else {
        let _ = writeln!(out, "{indent}{}", node.tag);
    }
}
