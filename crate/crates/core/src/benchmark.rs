//! The ten benchmark sounds. Five name a synthesis technique and are judged
//! by the spectral oracle; five are open-ended and go to human raters. Each
//! open-ended benchmark is paired with the technique usually used for it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Benchmark {
    Additive,
    Am,
    Fm,
    Lfo,
    FilteredNoise,
    ChurchBell,
    DialTone,
    BirdCall,
    OceanWaves,
    BabblingBrook,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkKind {
    Specific,
    Creative,
}

pub const ALL_BENCHMARKS: [Benchmark; 10] = [
    Benchmark::Additive,
    Benchmark::Am,
    Benchmark::Fm,
    Benchmark::Lfo,
    Benchmark::FilteredNoise,
    Benchmark::ChurchBell,
    Benchmark::DialTone,
    Benchmark::BirdCall,
    Benchmark::OceanWaves,
    Benchmark::BabblingBrook,
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown benchmark `{0}`")]
pub struct UnknownBenchmark(pub String);

impl Benchmark {
    pub fn id(self) -> &'static str {
        match self {
            Benchmark::Additive => "additive",
            Benchmark::Am => "am",
            Benchmark::Fm => "fm",
            Benchmark::Lfo => "lfo",
            Benchmark::FilteredNoise => "filtered-noise",
            Benchmark::ChurchBell => "church-bell",
            Benchmark::DialTone => "dial-tone",
            Benchmark::BirdCall => "bird-call",
            Benchmark::OceanWaves => "ocean-waves",
            Benchmark::BabblingBrook => "babbling-brook",
        }
    }

    /// The phrase substituted into prompt templates.
    pub fn prompt_noun(self) -> &'static str {
        match self {
            Benchmark::Additive => "additive synthesis",
            Benchmark::Am => "AM synthesis",
            Benchmark::Fm => "FM synthesis",
            Benchmark::Lfo => "an LFO",
            Benchmark::FilteredNoise => "filtered noise",
            Benchmark::ChurchBell => "a church bell",
            Benchmark::DialTone => "a telephone dial tone",
            Benchmark::BirdCall => "a bird call",
            Benchmark::OceanWaves => "the sound of waves hitting the ocean",
            Benchmark::BabblingBrook => "a babbling brook",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Additive => "Additive synthesis",
            Benchmark::Am => "AM synthesis",
            Benchmark::Fm => "FM synthesis",
            Benchmark::Lfo => "LFO",
            Benchmark::FilteredNoise => "Filtered noise",
            Benchmark::ChurchBell => "Church bell",
            Benchmark::DialTone => "Telephone dial tone",
            Benchmark::BirdCall => "Bird call",
            Benchmark::OceanWaves => "Ocean waves",
            Benchmark::BabblingBrook => "Babbling brook",
        }
    }

    pub fn kind(self) -> BenchmarkKind {
        match self {
            Benchmark::Additive | Benchmark::Am | Benchmark::Fm | Benchmark::Lfo | Benchmark::FilteredNoise => {
                BenchmarkKind::Specific
            }
            _ => BenchmarkKind::Creative,
        }
    }

    pub fn is_specific(self) -> bool {
        self.kind() == BenchmarkKind::Specific
    }

    /// The specific technique a creative benchmark pairs with, and the
    /// reverse.
    pub fn paired_with(self) -> Benchmark {
        match self {
            Benchmark::Additive => Benchmark::ChurchBell,
            Benchmark::Am => Benchmark::DialTone,
            Benchmark::Fm => Benchmark::BirdCall,
            Benchmark::Lfo => Benchmark::OceanWaves,
            Benchmark::FilteredNoise => Benchmark::BabblingBrook,
            Benchmark::ChurchBell => Benchmark::Additive,
            Benchmark::DialTone => Benchmark::Am,
            Benchmark::BirdCall => Benchmark::Fm,
            Benchmark::OceanWaves => Benchmark::Lfo,
            Benchmark::BabblingBrook => Benchmark::FilteredNoise,
        }
    }

    /// One-line description of the reference sound shown to raters.
    pub fn reference_description(self) -> &'static str {
        match self {
            Benchmark::Additive => "Several sine partials summed into one tone.",
            Benchmark::Am => "A carrier whose amplitude is modulated by an audio-rate oscillator.",
            Benchmark::Fm => "A carrier whose frequency is modulated by an audio-rate oscillator.",
            Benchmark::Lfo => "A tone with a slow periodic change in loudness or pitch.",
            Benchmark::FilteredNoise => "White noise shaped by a filter.",
            Benchmark::ChurchBell => "A struck bell with inharmonic partials and a long decay.",
            Benchmark::DialTone => "The steady two-tone hum heard when lifting a telephone receiver.",
            Benchmark::BirdCall => "A short chirping or warbling song.",
            Benchmark::OceanWaves => "Noise that swells and recedes like waves on a shore.",
            Benchmark::BabblingBrook => "Continuous bubbly, trickling water.",
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Benchmark {
    type Err = UnknownBenchmark;

    /// Accepts the id, the id with spaces for hyphens, or the display name,
    /// ignoring case.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        ALL_BENCHMARKS
            .iter()
            .copied()
            .find(|b| b.id() == key || b.id().replace('-', " ") == key || b.name().to_ascii_lowercase() == key)
            .ok_or_else(|| UnknownBenchmark(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_and_five_with_bijective_pairing() {
        let specific: Vec<_> = ALL_BENCHMARKS.iter().filter(|b| b.is_specific()).collect();
        assert_eq!(specific.len(), 5);
        let mut partners: Vec<_> = specific.iter().map(|b| b.paired_with()).collect();
        partners.sort();
        partners.dedup();
        assert_eq!(partners.len(), 5);
        for b in ALL_BENCHMARKS {
            assert_ne!(b.kind(), b.paired_with().kind());
            assert_eq!(b.paired_with().paired_with(), b);
            assert_eq!(b.id().parse::<Benchmark>().unwrap(), b);
        }
        assert!("nonexistent".parse::<Benchmark>().is_err());
        assert_eq!("church bell".parse::<Benchmark>().unwrap(), Benchmark::ChurchBell);
        assert_eq!("Telephone dial tone".parse::<Benchmark>().unwrap(), Benchmark::DialTone);
    }
}
