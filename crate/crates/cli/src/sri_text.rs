//! `key=value` rendering of one SRI, and its inverse.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use softrange::sri::{Condition, GaussianComponent, PropagationPosterior, SoftRangeInfo};

use crate::error::{CliError, CliResult};

pub fn condition_name(c: Condition) -> &'static str {
    match c {
        Condition::Los => "los",
        Condition::Nlos => "nlos",
    }
}

/// One key per line; floats use shortest round-trip formatting.
pub fn render(sri: &SoftRangeInfo) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "p_los={}", sri.posterior.p_los());
    let _ = writeln!(s, "p_nlos={}", sri.posterior.p_nlos());
    let _ = writeln!(s, "mu_los={}", sri.los.mu());
    let _ = writeln!(s, "sigma2_los={}", sri.los.sigma2());
    let _ = writeln!(s, "mu_nlos={}", sri.nlos.mu());
    let _ = writeln!(s, "sigma2_nlos={}", sri.nlos.sigma2());
    let _ = writeln!(s, "condition={}", condition_name(sri.mle_condition()));
    let _ = writeln!(s, "distance={}", sri.mmse_distance());
    s
}

/// Parsed output of [`render`]: the mixture, the printed decision and the printed distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSri {
    pub sri: SoftRangeInfo,
    pub condition: Condition,
    pub distance: f64,
}

pub fn parse(text: &str) -> CliResult<ParsedSri> {
    let map: BTreeMap<&str, &str> = text
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim(), v.trim()))
        .collect();
    let num = |k: &str| -> CliResult<f64> {
        map.get(k)
            .ok_or_else(|| CliError::Usage(format!("missing key {k}")))?
            .parse()
            .map_err(|_| CliError::Usage(format!("key {k} is not a number")))
    };
    let posterior = PropagationPosterior::new(num("p_los")?, num("p_nlos")?)?;
    let los = GaussianComponent::new(num("mu_los")?, num("sigma2_los")?)?;
    let nlos = GaussianComponent::new(num("mu_nlos")?, num("sigma2_nlos")?)?;
    let condition = match map.get("condition").copied() {
        Some("los") => Condition::Los,
        Some("nlos") => Condition::Nlos,
        other => return Err(CliError::Usage(format!("bad condition {other:?}"))),
    };
    Ok(ParsedSri {
        sri: SoftRangeInfo::new(posterior, los, nlos),
        condition,
        distance: num("distance")?,
    })
}
