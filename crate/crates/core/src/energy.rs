//! Per-byte radio energy accounting.
//!
//! Energy is held as an integer count of nanojoules. The per-byte constants
//! (16.25 and 12.25 microjoules) are whole nanojoule amounts, so every debit,
//! every ledger entry and the conservation identity are exact.

use std::fmt;
use std::io::{self, Write};
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::NodeId;

const NJ_PER_J: u64 = 1_000_000_000;
const NJ_PER_UJ: u64 = 1_000;

/// An amount of energy, stored in nanojoules.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Energy(u64);

impl Energy {
    pub const ZERO: Energy = Energy(0);

    pub const fn from_nanojoules(nj: u64) -> Self {
        Energy(nj)
    }

    pub fn from_microjoules(uj: f64) -> Result<Self> {
        if !uj.is_finite() || uj < 0.0 {
            return Err(Error::InvalidEnergy(uj));
        }
        Ok(Energy((uj * NJ_PER_UJ as f64).round() as u64))
    }

    pub fn from_joules(j: f64) -> Result<Self> {
        if !j.is_finite() || j < 0.0 {
            return Err(Error::InvalidEnergy(j));
        }
        Ok(Energy((j * NJ_PER_J as f64).round() as u64))
    }

    pub const fn nanojoules(self) -> u64 {
        self.0
    }

    pub fn microjoules(self) -> f64 {
        self.0 as f64 / NJ_PER_UJ as f64
    }

    pub fn joules(self) -> f64 {
        self.0 as f64 / NJ_PER_J as f64
    }

    pub fn saturating_sub(self, other: Energy) -> Energy {
        Energy(self.0.saturating_sub(other.0))
    }

    /// Exact decimal rendering in joules (nine fractional digits).
    pub fn display_joules(self) -> String {
        format!("{}.{:09}", self.0 / NJ_PER_J, self.0 % NJ_PER_J)
    }

    /// Exact decimal rendering in microjoules (three fractional digits).
    pub fn display_microjoules(self) -> String {
        format!("{}.{:03}", self.0 / NJ_PER_UJ, self.0 % NJ_PER_UJ)
    }
}

impl Add for Energy {
    type Output = Energy;
    fn add(self, rhs: Energy) -> Energy {
        Energy(self.0 + rhs.0)
    }
}

impl AddAssign for Energy {
    fn add_assign(&mut self, rhs: Energy) {
        self.0 += rhs.0;
    }
}

impl Sub for Energy {
    type Output = Energy;
    fn sub(self, rhs: Energy) -> Energy {
        Energy(self.0 - rhs.0)
    }
}

impl std::iter::Sum for Energy {
    fn sum<I: Iterator<Item = Energy>>(iter: I) -> Energy {
        iter.fold(Energy::ZERO, Add::add)
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} J", self.display_joules())
    }
}

/// Radio energy constants of the mica2-class node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyParams {
    pub tx_per_byte_uj: f64,
    pub rx_per_byte_uj: f64,
    pub packet_size: u32,
    pub initial_energy_cap_j: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            tx_per_byte_uj: 16.25,
            rx_per_byte_uj: 12.25,
            packet_size: 29,
            initial_energy_cap_j: 1.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("energy.tx_per_byte_uj", self.tx_per_byte_uj),
            ("energy.rx_per_byte_uj", self.rx_per_byte_uj),
            ("energy.packet_size", f64::from(self.packet_size)),
            ("energy.initial_energy_cap_j", self.initial_energy_cap_j),
        ];
        for (field, value) in checks {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::config(field, format!("must be strictly positive, got {value}")));
            }
        }
        Ok(())
    }

    /// Resolve the constants to whole-nanojoule costs.
    pub fn costs(&self) -> Result<RadioCosts> {
        self.validate()?;
        Ok(RadioCosts {
            tx_per_byte: Energy::from_microjoules(self.tx_per_byte_uj)?,
            rx_per_byte: Energy::from_microjoules(self.rx_per_byte_uj)?,
            packet_size: self.packet_size,
        })
    }
}

/// Per-byte costs converted once from [`EnergyParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadioCosts {
    pub tx_per_byte: Energy,
    pub rx_per_byte: Energy,
    pub packet_size: u32,
}

impl Default for RadioCosts {
    fn default() -> Self {
        EnergyParams::default().costs().expect("default energy params are valid")
    }
}

impl RadioCosts {
    pub fn tx(&self, bytes: u32) -> Energy {
        Energy(self.tx_per_byte.0 * u64::from(bytes))
    }

    pub fn rx(&self, bytes: u32) -> Energy {
        Energy(self.rx_per_byte.0 * u64::from(bytes))
    }

    pub fn tx_packet(&self) -> Energy {
        self.tx(self.packet_size)
    }

    pub fn rx_packet(&self) -> Energy {
        self.rx(self.packet_size)
    }
}

/// Transmit cost in microjoules at the default 16.25 uJ/byte.
pub fn tx_cost(bytes: u32) -> f64 {
    RadioCosts::default().tx(bytes).microjoules()
}

/// Receive cost in microjoules at the default 12.25 uJ/byte.
pub fn rx_cost(bytes: u32) -> f64 {
    RadioCosts::default().rx(bytes).microjoules()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Battery {
    initial: Energy,
    remaining: Energy,
}

/// Result of a single [`Battery::debit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DebitOutcome {
    /// Energy actually drawn; less than requested when the battery ran dry.
    pub drawn: Energy,
    /// Set on the one debit that took the battery from positive to zero.
    pub depleted_now: bool,
}

impl DebitOutcome {
    /// True when the full requested amount was available.
    pub fn completed(&self, requested: Energy) -> bool {
        self.drawn == requested
    }
}

impl Battery {
    pub fn new(initial: Energy) -> Self {
        Battery {
            initial,
            remaining: initial,
        }
    }

    pub fn initial(&self) -> Energy {
        self.initial
    }

    pub fn remaining(&self) -> Energy {
        self.remaining
    }

    pub fn is_depleted(&self) -> bool {
        self.remaining == Energy::ZERO
    }

    /// Draw `amount`, clamping at zero, and record what was drawn.
    pub fn debit(&mut self, amount: Energy, ledger: &mut EnergyLedger, meta: DebitMeta) -> DebitOutcome {
        let drawn = amount.min(self.remaining);
        let was_live = self.remaining > Energy::ZERO;
        self.remaining = self.remaining - drawn;
        ledger.push(LedgerEntry {
            time_s: meta.time_s,
            node: meta.node,
            kind: meta.kind,
            bytes: meta.bytes,
            drawn,
        });
        DebitOutcome {
            drawn,
            depleted_now: was_live && self.remaining == Energy::ZERO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadioOp {
    Tx,
    Rx,
}

impl RadioOp {
    pub fn as_str(self) -> &'static str {
        match self {
            RadioOp::Tx => "tx",
            RadioOp::Rx => "rx",
        }
    }
}

/// What a debit is for; copied into the ledger entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebitMeta {
    pub time_s: f64,
    pub node: NodeId,
    pub kind: RadioOp,
    pub bytes: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerEntry {
    pub time_s: f64,
    pub node: NodeId,
    pub kind: RadioOp,
    pub bytes: u32,
    pub drawn: Energy,
}

/// Append-only record of every radio debit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    entries: Vec<LedgerEntry>,
    total: Energy,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, entry: LedgerEntry) {
        self.total += entry.drawn;
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of every draw recorded so far.
    pub fn total(&self) -> Energy {
        self.total
    }

    /// Sum of draws for which `keep` returns true.
    pub fn total_where(&self, keep: impl Fn(&LedgerEntry) -> bool) -> Energy {
        self.entries.iter().filter(|e| keep(e)).map(|e| e.drawn).sum()
    }

    /// `time_s,node_id,kind,bytes,microjoules`
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "time_s,node_id,kind,bytes,microjoules")?;
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{},{}",
                e.time_s,
                e.node,
                e.kind.as_str(),
                e.bytes,
                e.drawn.display_microjoules()
            )?;
        }
        Ok(())
    }
}
