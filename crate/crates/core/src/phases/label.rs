use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Which stable attractors a cell holds.
///
/// The string code joins the present parts with `+` in the order
/// `SRB`, `N`, `I`, then `SRA_N`/`SRA_I`/`TWO_SRA`; a cell with no stable
/// attractor is `PERSISTENT_OSC` when a limit cycle was seen and `NONE`
/// otherwise. Cells that are superradiant only because of the pump carry the
/// `ETA_SRA`/`ETA_SRB` codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct PhaseLabel {
    pub normal: bool,
    pub inverted: bool,
    pub sra_n: bool,
    pub sra_i: bool,
    pub srb: bool,
    pub oscillation: bool,
    pub eta: Option<EtaRegion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EtaRegion {
    Sra,
    Srb,
}

impl PhaseLabel {
    pub fn has_stable_state(&self) -> bool {
        self.normal || self.inverted || self.sra_n || self.sra_i
    }

    pub fn is_superradiant(&self) -> bool {
        self.sra_n || self.sra_i
    }

    pub fn is_two_sra(&self) -> bool {
        self.eta.is_none() && self.sra_n && self.sra_i
    }

    pub fn is_persistent_oscillation(&self) -> bool {
        self.eta.is_none() && !self.has_stable_state() && self.oscillation
    }

    pub fn code(&self) -> String {
        match self.eta {
            Some(EtaRegion::Sra) => return "ETA_SRA".into(),
            Some(EtaRegion::Srb) => return "ETA_SRB".into(),
            None => {}
        }
        let mut parts: Vec<&str> = Vec::new();
        if self.srb {
            parts.push("SRB");
        }
        if self.normal {
            parts.push("N");
        }
        if self.inverted {
            parts.push("I");
        }
        match (self.sra_n, self.sra_i) {
            (true, true) => parts.push("TWO_SRA"),
            (true, false) => parts.push("SRA_N"),
            (false, true) => parts.push("SRA_I"),
            (false, false) => {}
        }
        if !self.has_stable_state() && self.oscillation {
            parts.push("PERSISTENT_OSC");
        }
        if parts.is_empty() {
            "NONE".into()
        } else {
            parts.join("+")
        }
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseLabelError(pub String);

impl fmt::Display for ParseLabelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown phase label `{}`", self.0)
    }
}

impl std::error::Error for ParseLabelError {}

impl FromStr for PhaseLabel {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut l = PhaseLabel::default();
        match s {
            "ETA_SRA" => {
                l.eta = Some(EtaRegion::Sra);
                return Ok(l);
            }
            "ETA_SRB" => {
                l.eta = Some(EtaRegion::Srb);
                return Ok(l);
            }
            "NONE" => return Ok(l),
            _ => {}
        }
        for part in s.split('+') {
            match part {
                "SRB" => l.srb = true,
                "N" => l.normal = true,
                "I" => l.inverted = true,
                "SRA_N" => l.sra_n = true,
                "SRA_I" => l.sra_i = true,
                "TWO_SRA" => {
                    l.sra_n = true;
                    l.sra_i = true;
                }
                "PERSISTENT_OSC" => l.oscillation = true,
                _ => return Err(ParseLabelError(s.to_string())),
            }
        }
        if l.code() != s {
            return Err(ParseLabelError(s.to_string()));
        }
        Ok(l)
    }
}

impl From<PhaseLabel> for String {
    fn from(l: PhaseLabel) -> Self {
        l.code()
    }
}

impl TryFrom<String> for PhaseLabel {
    type Error = ParseLabelError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_codes_round_trip() {
        for code in [
            "N",
            "I",
            "N+I",
            "SRA_N",
            "SRA_I",
            "TWO_SRA",
            "SRB",
            "SRB+N",
            "SRB+I",
            "SRB+N+I",
            "PERSISTENT_OSC",
            "ETA_SRA",
            "ETA_SRB",
            "NONE",
            "N+SRA_N",
            "SRB+PERSISTENT_OSC",
        ] {
            let l: PhaseLabel = code.parse().unwrap();
            assert_eq!(l.code(), code);
        }
    }

    #[test]
    fn non_canonical_codes_rejected() {
        for bad in ["", "I+N", "SRA_N+SRA_I", "N+PERSISTENT_OSC", "X", "N+N"] {
            assert!(bad.parse::<PhaseLabel>().is_err(), "{bad}");
        }
    }

    #[test]
    fn oscillation_hidden_by_stable_state() {
        let l = PhaseLabel { normal: true, oscillation: true, ..Default::default() };
        assert_eq!(l.code(), "N");
        assert!(!l.is_persistent_oscillation());
    }
}
