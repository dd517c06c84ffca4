use anyhow::Result;

use mf_infer::schedule::MeanFunction;

/// Parses a serialised mean function and renders it back.
pub fn render_tree(text: &str) -> Result<String> {
    Ok(MeanFunction::parse(text)?.render())
}
