//! The bundled ALARM monitoring network and its short-name aliases.

use super::{parse_network, BayesNet};
use crate::error::{Error, Result};

pub const ALARM_BIF: &str = include_str!("../../data/alarm.bif");

/// SHA-256 of [`ALARM_BIF`].
pub const ALARM_SHA256: &str = "701e6c561f71b55669070c29614f0724b761289aa2c4a35bcc97b638ee881fa2";

/// Short names used in benchmark literature, mapped to network names.
pub const ALIASES: &[(&str, &str)] = &[
    ("HIST", "HISTORY"),
    ("HYP", "HYPOVOLEMIA"),
    ("LVV", "LVEDVOLUME"),
    ("LVF", "LVFAILURE"),
    ("STKV", "STROKEVOLUME"),
    ("ERLO", "ERRLOWOUTPUT"),
    ("HREK", "HREKG"),
    ("ERCA", "ERRCAUTER"),
    ("HRSA", "HRSAT"),
    ("ANES", "INSUFFANESTH"),
    ("APL", "ANAPHYLAXIS"),
    ("ECO2", "EXPCO2"),
    ("KINK", "KINKEDTUBE"),
    ("MINV", "MINVOL"),
    ("PVS", "PVSAT"),
    ("PMB", "PULMEMBOLUS"),
    ("SHNT", "SHUNT"),
    ("INT", "INTUBATION"),
    ("PRSS", "PRESS"),
    ("DISC", "DISCONNECT"),
    ("MVS", "MINVOLSET"),
    ("VMCH", "VENTMACH"),
    ("VTUB", "VENTTUBE"),
    ("VLNG", "VENTLUNG"),
    ("VALV", "VENTALV"),
    ("ACO2", "ARTCO2"),
    ("CCHL", "CATECHOL"),
];

/// Map an alias to its network name; other names pass through unchanged.
pub fn resolve_alias(name: &str) -> &str {
    ALIASES
        .iter()
        .find(|(a, _)| a.eq_ignore_ascii_case(name))
        .map_or(name, |(_, full)| full)
}

/// Resolve `name` against `net`, accepting aliases.
pub fn resolve_in(net: &BayesNet, name: &str) -> Result<String> {
    let full = resolve_alias(name);
    net.index_of(full)
        .map(|i| net.names[i].clone())
        .ok_or_else(|| Error::UnknownVariable(name.to_string()))
}

pub fn alarm() -> BayesNet {
    parse_network(ALARM_BIF).expect("bundled network parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape() {
        let net = alarm();
        assert_eq!(net.len(), 37);
        assert_eq!(net.edge_count(), 46);
    }

    #[test]
    fn aliases_resolve() {
        let net = alarm();
        for (a, full) in ALIASES {
            assert_eq!(resolve_in(&net, a).unwrap(), *full);
        }
        assert_eq!(resolve_in(&net, "vtub").unwrap(), "VENTTUBE");
        assert_eq!(resolve_in(&net, "HR").unwrap(), "HR");
        assert!(resolve_in(&net, "NOPE").is_err());
    }
}
