//! Language categories: what the model is asked to write and how its output
//! is checked for well-formedness.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    JsonMaxpat,
    Maxpy,
    MaxpyRich,
    JsonWavir,
    Webaudio,
    WebaudioRich,
    Patchscript,
    PatchscriptRich,
}

pub const ALL_CATEGORIES: [Category; 8] = [
    Category::JsonMaxpat,
    Category::Maxpy,
    Category::MaxpyRich,
    Category::JsonWavir,
    Category::Webaudio,
    Category::WebaudioRich,
    Category::Patchscript,
    Category::PatchscriptRich,
];

/// Prompt template family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// "Based on the examples given, use … to write code that implements …"
    Max,
    /// "Write … that implements …"
    Web,
}

/// How a sample's extracted code becomes a patch graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Maxpat,
    Wavir,
    Script,
    /// An external runner writes a patch in the given dialect.
    External(Dialect),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    Maxpat,
    Wavir,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown category `{0}`")]
pub struct UnknownCategory(pub String);

impl Category {
    pub fn id(self) -> &'static str {
        match self {
            Category::JsonMaxpat => "json-maxpat",
            Category::Maxpy => "maxpy",
            Category::MaxpyRich => "maxpy-rich",
            Category::JsonWavir => "json-wavir",
            Category::Webaudio => "webaudio",
            Category::WebaudioRich => "webaudio-rich",
            Category::Patchscript => "patchscript",
            Category::PatchscriptRich => "patchscript-rich",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Category::JsonWavir | Category::Webaudio | Category::WebaudioRich => Family::Web,
            _ => Family::Max,
        }
    }

    /// The language phrase substituted into the prompt.
    pub fn language(self) -> &'static str {
        match self {
            Category::JsonMaxpat => "JSON for a Max patch",
            Category::Maxpy | Category::MaxpyRich => "MaxPy",
            Category::JsonWavir => "JSON",
            Category::Webaudio | Category::WebaudioRich => "Web Audio code",
            Category::Patchscript | Category::PatchscriptRich => "PatchScript",
        }
    }

    pub fn random_function(self) -> &'static str {
        match self.family() {
            Family::Max => "random()",
            Family::Web => "Math.random()",
        }
    }

    pub fn is_rich(self) -> bool {
        matches!(self, Category::MaxpyRich | Category::WebaudioRich | Category::PatchscriptRich)
    }

    pub fn route(self) -> Route {
        match self {
            Category::JsonMaxpat => Route::Maxpat,
            Category::JsonWavir => Route::Wavir,
            Category::Patchscript | Category::PatchscriptRich => Route::Script,
            Category::Maxpy | Category::MaxpyRich => Route::External(Dialect::Maxpat),
            Category::Webaudio | Category::WebaudioRich => Route::External(Dialect::Wavir),
        }
    }

    /// Categories sharing a knowledge document and examples.
    pub fn base(self) -> Category {
        match self {
            Category::MaxpyRich => Category::Maxpy,
            Category::WebaudioRich => Category::Webaudio,
            Category::PatchscriptRich => Category::Patchscript,
            other => other,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Category {
    type Err = UnknownCategory;

    /// Accepts the canonical ids plus `maxpat-json` and `wavir-json`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = match s {
            "maxpat-json" => "json-maxpat",
            "wavir-json" => "json-wavir",
            other => other,
        };
        ALL_CATEGORIES
            .iter()
            .copied()
            .find(|c| c.id() == s)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}
