//! Readers and writers for `.chi`, `.pts` and `.ccj` files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chirotope::Chirotope;
use crate::error::{Error, Result};
use crate::om::{OrientedMatroid, Provenance};
use crate::sign::SignVector;
use crate::IntConfig;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Format {
    Chirotope,
    Points,
    Cocircuits,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Format> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("chi") => Ok(Format::Chirotope),
            Some("pts") => Ok(Format::Points),
            Some("ccj") | Some("json") => Ok(Format::Cocircuits),
            _ => Err(Error::Parse(format!("unknown file type: {}", path.display()))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CocircuitFile {
    n: usize,
    rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    cocircuits: Vec<String>,
}

pub fn parse_points(text: &str) -> Result<IntConfig> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty point file".into()))?;
    let nums = parse_ints(header)?;
    let [r, n] = nums[..] else {
        return Err(Error::Parse(format!("header must be \"r n\", found {header:?}")));
    };
    let (r, n) = (usize::try_from(r), usize::try_from(n));
    let (Ok(r), Ok(n)) = (r, n) else {
        return Err(Error::Parse("negative header value".into()));
    };
    let rows: Vec<Vec<i128>> = lines.map(parse_ints).collect::<Result<_>>()?;
    if rows.len() != n {
        return Err(Error::Parse(format!("expected {n} points, found {}", rows.len())));
    }
    if let Some(bad) = rows.iter().position(|row| row.len() != r) {
        return Err(Error::Parse(format!("point {bad} does not have {r} coordinates")));
    }
    IntConfig::new(r, rows)
}

fn parse_ints(line: &str) -> Result<Vec<i128>> {
    line.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad integer {t:?}"))))
        .collect()
}

pub fn parse_cocircuits(text: &str) -> Result<OrientedMatroid> {
    let file: CocircuitFile = serde_json::from_str(text)?;
    let cocircuits = file
        .cocircuits
        .iter()
        .map(|s| {
            let v: SignVector = s.parse()?;
            if v.len() != file.n {
                return Err(Error::Parse(format!("cocircuit {s:?} does not have length {}", file.n)));
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    let om = OrientedMatroid::from_cocircuits(file.n, cocircuits, Provenance::FromFile)?;
    if om.rank() != file.rank {
        return Err(Error::InvalidCocircuits(format!(
            "declared rank {} but the cocircuits have rank {}",
            file.rank,
            om.rank()
        )));
    }
    if let Some(labels) = &file.labels {
        if labels.len() != file.n {
            return Err(Error::Parse(format!("{} labels for {} elements", labels.len(), file.n)));
        }
    }
    Ok(om.with_labels(file.labels))
}

pub fn parse(text: &str, format: Format) -> Result<OrientedMatroid> {
    match format {
        Format::Chirotope => {
            OrientedMatroid::from_chirotope(Chirotope::parse(text)?).map(|om| om.with_provenance(Provenance::FromFile))
        }
        Format::Points => OrientedMatroid::from_points(&parse_points(text)?),
        Format::Cocircuits => parse_cocircuits(text),
    }
}

pub fn read(path: &Path) -> Result<OrientedMatroid> {
    let text = std::fs::read_to_string(path)?;
    parse(&text, Format::from_path(path)?)
}

/// The `.chi` text; fails when no chirotope is known.
pub fn to_chi(om: &OrientedMatroid) -> Result<String> {
    Ok(om.require_chirotope()?.to_string())
}

pub fn to_ccj(om: &OrientedMatroid) -> String {
    let file = CocircuitFile {
        n: om.n(),
        rank: om.rank(),
        labels: om.labels().map(<[String]>::to_vec),
        cocircuits: om.cocircuits().iter().map(|x| x.to_string()).collect(),
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

pub fn to_pts(config: &IntConfig) -> String {
    let mut out = format!("{} {}\n", config.rank(), config.n());
    for row in config.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn write(om: &OrientedMatroid, path: &Path) -> Result<()> {
    let text = match Format::from_path(path)? {
        Format::Chirotope => to_chi(om)?,
        Format::Cocircuits => to_ccj(om),
        Format::Points => return Err(Error::Precondition("oriented matroids are not written as points".into())),
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonical_form;
    use crate::sign::ElementSet;

    const W3: &str = "2 3\n+++\n";

    #[test]
    fn chirotope_text_is_bit_exact() {
        let om = parse(W3, Format::Chirotope).unwrap();
        assert_eq!(to_chi(&om).unwrap(), W3);
        assert_eq!(om.cocircuits().len(), 6);
    }

    #[test]
    fn points_agree_with_chirotope() {
        let pts = "3 5\n1 0 0\n1 1 0\n1 0 1\n1 1 1\n1 2 3\n";
        let a = parse(pts, Format::Points).unwrap();
        let b = parse(&to_chi(&a).unwrap(), Format::Chirotope).unwrap();
        assert_eq!(a, b);
        assert_eq!(to_pts(&parse_points(pts).unwrap()), pts);
    }

    #[test]
    fn cocircuit_round_trip_keeps_labels() {
        let om = parse(W3, Format::Chirotope)
            .unwrap()
            .reorient(ElementSet::singleton(1))
            .with_labels(Some(vec!["a".into(), "b".into(), "c".into()]));
        let back = parse(&to_ccj(&om), Format::Cocircuits).unwrap();
        assert_eq!(back, om);
        assert_eq!(back.labels().unwrap()[2], "c");
        let chi = back.with_recovered_chirotope().unwrap();
        assert_eq!(canonical_form(&chi).unwrap(), canonical_form(&om).unwrap());
    }

    #[test]
    fn malformed_input() {
        assert!(parse("2 3\n++\n", Format::Chirotope).is_err());
        assert!(parse("2 3\n+x+\n", Format::Chirotope).is_err());
        assert!(parse("2 2\n1 0\n", Format::Points).is_err());
        assert!(parse("2 2\n1 0\n2 0\n", Format::Points).is_err());
        // not closed under negation
        let half = r#"{"n": 3, "rank": 2, "cocircuits": ["0+-", "+0-", "++0"]}"#;
        assert!(parse(half, Format::Cocircuits).is_err());
        let wrong_rank = r#"{"n": 3, "rank": 3, "cocircuits": ["0+-", "0-+", "+0-", "-0+", "++0", "--0"]}"#;
        assert!(parse(wrong_rank, Format::Cocircuits).is_err());
        assert!(Format::from_path(Path::new("x.txt")).is_err());
    }
}
