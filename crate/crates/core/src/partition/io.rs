//! JSON-lines partition files: a header object, then one array of subset
//! strings per chain.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{ChainPartition, Provenance, Universe};
use crate::error::{Error, Result};
use crate::lattice::{GroundSet, Subset, SubsetFormat};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionHeader {
    pub n: u32,
    pub universe: Universe,
    pub provenance: Provenance,
    pub chains: usize,
    #[serde(default)]
    pub format: SubsetFormat,
}

/// A partition file as read back, before any validation of its chains.
#[derive(Clone, Debug)]
pub struct PartitionFile {
    pub header: PartitionHeader,
    pub ground: GroundSet,
    pub chains: Vec<Vec<Subset>>,
}

pub fn write_partition<W: Write>(p: &ChainPartition, format: SubsetFormat, mut out: W) -> Result<()> {
    let header = PartitionHeader {
        n: p.ground.n(),
        universe: p.universe,
        provenance: p.provenance,
        chains: p.chains.len(),
        format,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for chain in &p.chains {
        let line: Vec<String> = chain.elements().iter().map(|s| s.render(format)).collect();
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Parse a partition file. Syntax errors are reported as input errors;
/// whether the lines form chains is left to the validator.
pub fn read_partition<R: BufRead>(input: R) -> Result<PartitionFile> {
    let mut lines = input.lines().enumerate().filter(|(_, l)| match l {
        Ok(text) => !text.trim().is_empty(),
        Err(_) => true,
    });
    let Some((_, first)) = lines.next() else {
        return Err(Error::input("empty partition file"));
    };
    let header: PartitionHeader = serde_json::from_str(&first?)
        .map_err(|e| Error::input(format!("line 1: bad header: {e}")))?;
    let ground = GroundSet::new(header.n)?;
    let mut chains = Vec::with_capacity(header.chains);
    for (i, line) in lines {
        let line = line?;
        let texts: Vec<String> = serde_json::from_str(&line)
            .map_err(|e| Error::input(format!("line {}: {e}", i + 1)))?;
        let chain = texts
            .iter()
            .map(|t| Subset::parse(ground, t, header.format))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::input(format!("line {}: {e}", i + 1)))?;
        chains.push(chain);
    }
    Ok(PartitionFile { header, ground, chains })
}
