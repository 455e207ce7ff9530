use core::fmt;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::gate::{Arity, GateOp};
use crate::error::{domain, ensure, Result};

/// Ordered list of gate operations on a fixed register.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<GateOp>,
    /// Free-form tags (scheme, seed, moment index, …).
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateCounts {
    pub one_qubit: u64,
    pub two_qubit: u64,
    /// Controlled two-qubit rotations (never emitted by the moment circuits).
    pub three_qubit: u64,
    pub measurements: u64,
}

impl GateCounts {
    /// Multi-qubit operations, as billed by the credit formula.
    pub fn entangling(&self) -> u64 {
        self.two_qubit + self.three_qubit
    }
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, op: GateOp) -> Result<()> {
        op.validate(self.n_qubits)?;
        self.ops.push(op);
        Ok(())
    }

    /// Appends `other`, whose qubit `q` lands on `map[q]` here.
    pub fn append_mapped(&mut self, other: &Circuit, map: &[usize]) -> Result<()> {
        ensure!(map.len() == other.n_qubits, "qubit map has {} entries for {} qubits", map.len(), other.n_qubits);
        for op in &other.ops {
            self.push(op.remap(|q| map[q]))?;
        }
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        ensure!(other.n_qubits <= self.n_qubits, "cannot append a wider circuit");
        for op in &other.ops {
            self.push(*op)?;
        }
        Ok(())
    }

    pub fn gate_counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for op in &self.ops {
            match op.arity() {
                Arity::One => c.one_qubit += 1,
                Arity::Two => c.two_qubit += 1,
                Arity::Three => c.three_qubit += 1,
                Arity::Measurement => c.measurements += 1,
            }
        }
        c
    }

    /// Parses the one-op-per-line text form written by `Display`. Blank
    /// lines and `#` comments are skipped; `# qubits N` sets the width
    /// (defaulting to one more than the largest index seen).
    pub fn parse(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut metadata = BTreeMap::new();
        let mut ops = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(n) = comment.strip_prefix("qubits ") {
                    declared = Some(n.trim().parse::<usize>().map_err(|_| domain!("line {}: bad qubit count", lineno + 1))?);
                } else if let Some(kv) = comment.strip_prefix("meta ") {
                    if let Some((k, v)) = kv.split_once('=') {
                        metadata.insert(String::from(k.trim()), String::from(v.trim()));
                    }
                }
                continue;
            }
            let op: GateOp = line.parse().map_err(|e| domain!("line {}: {e}", lineno + 1))?;
            ops.push(op);
        }
        let widest = ops.iter().flat_map(|o| o.qubits()).max().map_or(1, |q| q + 1);
        let n_qubits = declared.unwrap_or(widest);
        let mut c = Circuit::new(n_qubits);
        c.metadata = metadata;
        for op in ops {
            c.push(op)?;
        }
        Ok(c)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# qubits {}", self.n_qubits)?;
        for (k, v) in &self.metadata {
            writeln!(f, "# meta {k} = {v}")?;
        }
        for op in &self.ops {
            writeln!(f, "{op}")?;
        }
        Ok(())
    }
}
