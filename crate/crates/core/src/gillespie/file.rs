//! Mass-action networks from a TOML description:
//!
//! ```toml
//! species = ["S", "E"]
//! initial = [20, 0]
//!
//! [[reaction]]
//! name = "S->E"
//! reactants = [1, 0]
//! products = [0, 1]
//! rate = 1.0
//! ```
//!
//! The stoichiometry rows are per species. When a parameter vector with one
//! entry per reaction is passed to the simulator, it replaces the file rates.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

use super::network::{mass_action, ReactionNetwork};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    species: Vec<String>,
    initial: Vec<i64>,
    #[serde(default)]
    conservation: Vec<Vec<i64>>,
    #[serde(rename = "reaction")]
    reactions: Vec<ReactionRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReactionRow {
    name: Option<String>,
    reactants: Vec<u32>,
    products: Vec<u32>,
    rate: f64,
}

/// A parsed network and the rates listed in its file.
#[derive(Debug, Clone)]
pub struct LoadedNetwork {
    pub network: ReactionNetwork,
    pub rates: Vec<f64>,
}

pub fn parse_network(text: &str) -> Result<LoadedNetwork> {
    let file: NetworkFile = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| line_col(text, s.start))
            .unwrap_or((0, 0));
        Error::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let n = file.species.len();
    let count = file.reactions.len();
    let mut reactions = Vec::with_capacity(count);
    let mut rates = Vec::with_capacity(count);
    for (i, row) in file.reactions.into_iter().enumerate() {
        for v in [&row.reactants, &row.products] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        if !(row.rate >= 0.0) || !row.rate.is_finite() {
            return Err(Error::invalid(format!("reaction {i} has invalid rate {}", row.rate)));
        }
        rates.push(row.rate);
        let name = row.name.unwrap_or_else(|| format!("R{}", i + 1));
        reactions.push(mass_action(name, row.reactants, row.products, i, count, row.rate));
    }
    let mut network = ReactionNetwork::new(file.species, reactions, file.initial)?;
    for w in file.conservation {
        network = network.with_conservation(w)?;
    }
    Ok(LoadedNetwork { network, rates })
}

pub fn load_network(path: &Path) -> Result<LoadedNetwork> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_network(&text)
}

pub(crate) fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}
