use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ruleset {
    AxeLike,
    HtmlcsLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Notice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Impact {
    Critical,
    Serious,
    Moderate,
    Minor,
}

impl Impact {
    pub fn as_str(self) -> &'static str {
        match self {
            Impact::Critical => "critical",
            Impact::Serious => "serious",
            Impact::Moderate => "moderate",
            Impact::Minor => "minor",
        }
    }
}

macro_rules! rule_codes {
    ($($variant:ident => $code:literal, $ruleset:ident, $impact:ident, $desc:literal;)*) => {
        /// The rule codes of both rulesets. Declaration order is the
        /// tiebreak when findings share a document position.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum RuleCode {
            $($variant,)*
        }

        impl RuleCode {
            pub const ALL: &'static [RuleCode] = &[$(RuleCode::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(RuleCode::$variant => $code,)*
                }
            }

            pub fn ruleset(self) -> Ruleset {
                match self {
                    $(RuleCode::$variant => Ruleset::$ruleset,)*
                }
            }

            pub fn impact(self) -> Impact {
                match self {
                    $(RuleCode::$variant => Impact::$impact,)*
                }
            }

            pub fn description(self) -> &'static str {
                match self {
                    $(RuleCode::$variant => $desc,)*
                }
            }
        }
    };
}

rule_codes! {
    AxeE1 => "AXE-E1", AxeLike, Serious, "Text elements must have sufficient color contrast against the background";
    AxeE2 => "AXE-E2", AxeLike, Critical, "Images must have alternate text";
    AxeE3 => "AXE-E3", AxeLike, Serious, "Links must be distinguished from surrounding text in a way that does not rely on color";
    AxeE4 => "AXE-E4", AxeLike, Serious, "Links must have discernible text";
    AxeE5 => "AXE-E5", AxeLike, Serious, "Page must have means to bypass repeated blocks";
    AxeE6 => "AXE-E6", AxeLike, Critical, "<audio> elements must have a captions <track>";
    AxeE7 => "AXE-E7", AxeLike, Serious, "aria-hidden elements do not contain focusable elements";
    AxeE8 => "AXE-E8", AxeLike, Serious, "ARIA input fields must have an accessible name";
    AxeE9 => "AXE-E9", AxeLike, Critical, "Certain ARIA roles must be contained by particular parent elements";
    AxeE10 => "AXE-E10", AxeLike, Moderate, "All page content must be contained by landmarks";
    HtmlcsE1 => "HTMLCS-E1", HtmlcsLike, Serious, "Text elements must have sufficient color contrast against the background";
    HtmlcsE2 => "HTMLCS-E2", HtmlcsLike, Critical, "Images must have alternate text";
    HtmlcsE3 => "HTMLCS-E3", HtmlcsLike, Minor, "Duplicate ID attribute value found on the web page";
    HtmlcsE4 => "HTMLCS-E4", HtmlcsLike, Critical, "Tables not using header or scope attributes";
    HtmlcsE5 => "HTMLCS-E5", HtmlcsLike, Critical, "Table header required and currently not used";
    HtmlcsE6 => "HTMLCS-E6", HtmlcsLike, Serious, "Anchor element with no ID or link content";
    HtmlcsE7 => "HTMLCS-E7", HtmlcsLike, Serious, "Links must be distinguished from surrounding text in a way that does not rely on color";
    HtmlcsE8 => "HTMLCS-E8", HtmlcsLike, Serious, "Anchor element with a valid link but no link text content";
    HtmlcsE9 => "HTMLCS-E9", HtmlcsLike, Critical, "Element does not have a name available to an accessibility API";
}

impl RuleCode {
    /// The rule reporting the same issue in the other ruleset, for the
    /// three categories both engines check.
    pub fn twin(self) -> Option<RuleCode> {
        use RuleCode::*;
        match self {
            AxeE1 => Some(HtmlcsE1),
            HtmlcsE1 => Some(AxeE1),
            AxeE2 => Some(HtmlcsE2),
            HtmlcsE2 => Some(AxeE2),
            AxeE3 => Some(HtmlcsE7),
            HtmlcsE7 => Some(AxeE3),
            _ => None,
        }
    }
}

impl fmt::Display for RuleCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown rule `{0}`")]
pub struct UnknownRule(pub String);

impl FromStr for RuleCode {
    type Err = UnknownRule;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let want = s.trim().to_ascii_uppercase();
        RuleCode::ALL
            .iter()
            .copied()
            .find(|r| r.as_str() == want)
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

impl Serialize for RuleCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RuleCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The set of enabled rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSelection(BTreeSet<RuleCode>);

impl Default for RuleSelection {
    fn default() -> Self {
        RuleSelection::all()
    }
}

impl RuleSelection {
    pub fn all() -> Self {
        RuleSelection(RuleCode::ALL.iter().copied().collect())
    }

    pub fn contains(&self, r: RuleCode) -> bool {
        self.0.contains(&r)
    }

    pub fn iter(&self) -> impl Iterator<Item = RuleCode> + '_ {
        self.0.iter().copied()
    }

    /// Comma-separated rule codes; `axe` and `htmlcs` select a whole
    /// ruleset.
    pub fn parse(list: &str) -> Result<Self, UnknownRule> {
        let mut set = BTreeSet::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let ruleset = match item.to_ascii_lowercase().as_str() {
                "axe" => Some(Ruleset::AxeLike),
                "htmlcs" => Some(Ruleset::HtmlcsLike),
                _ => None,
            };
            match ruleset {
                Some(rs) => set.extend(RuleCode::ALL.iter().filter(|r| r.ruleset() == rs)),
                None => {
                    set.insert(item.parse()?);
                }
            }
        }
        Ok(RuleSelection(set))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_impacts() {
        use Impact::*;
        let want = [
            ("AXE-E1", Serious),
            ("HTMLCS-E1", Serious),
            ("AXE-E2", Critical),
            ("HTMLCS-E2", Critical),
            ("AXE-E3", Serious),
            ("HTMLCS-E7", Serious),
            ("AXE-E4", Serious),
            ("AXE-E5", Serious),
            ("AXE-E6", Critical),
            ("AXE-E7", Serious),
            ("AXE-E8", Serious),
            ("AXE-E9", Critical),
            ("AXE-E10", Moderate),
            ("HTMLCS-E3", Minor),
            ("HTMLCS-E4", Critical),
            ("HTMLCS-E5", Critical),
            ("HTMLCS-E6", Serious),
            ("HTMLCS-E8", Serious),
            ("HTMLCS-E9", Critical),
        ];
        assert_eq!(want.len(), RuleCode::ALL.len());
        for (code, impact) in want {
            assert_eq!(code.parse::<RuleCode>().unwrap().impact(), impact, "{code}");
        }
    }

    #[test]
    fn sixteen_categories() {
        let categories = RuleCode::ALL
            .iter()
            .filter(|r| r.twin().is_none_or(|t| r.ruleset() == Ruleset::AxeLike || t > **r))
            .count();
        assert_eq!(categories, 16);
    }

    #[test]
    fn selection_parsing() {
        let s = RuleSelection::parse("axe, HTMLCS-E3").unwrap();
        assert_eq!(s.iter().count(), 11);
        assert!(s.contains(RuleCode::HtmlcsE3));
        assert!(!s.contains(RuleCode::HtmlcsE1));
        assert!(RuleSelection::parse("AXE-E99").is_err());
    }
}
