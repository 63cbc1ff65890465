use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One of the fourteen task languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lang {
    Ar,
    Ca,
    Cs,
    De,
    En,
    Es,
    Eu,
    Fa,
    Fi,
    Fr,
    Hi,
    It,
    Sv,
    Zh,
}

impl Lang {
    pub const ALL: [Lang; 14] = [
        Lang::Ar,
        Lang::Ca,
        Lang::Cs,
        Lang::De,
        Lang::En,
        Lang::Es,
        Lang::Eu,
        Lang::Fa,
        Lang::Fi,
        Lang::Fr,
        Lang::Hi,
        Lang::It,
        Lang::Sv,
        Lang::Zh,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Lang::Ar => "ar",
            Lang::Ca => "ca",
            Lang::Cs => "cs",
            Lang::De => "de",
            Lang::En => "en",
            Lang::Es => "es",
            Lang::Eu => "eu",
            Lang::Fa => "fa",
            Lang::Fi => "fi",
            Lang::Fr => "fr",
            Lang::Hi => "hi",
            Lang::It => "it",
            Lang::Sv => "sv",
            Lang::Zh => "zh",
        }
    }

    /// English display name, used in report tables.
    pub fn name(self) -> &'static str {
        match self {
            Lang::Ar => "Arabic",
            Lang::Ca => "Catalan",
            Lang::Cs => "Czech",
            Lang::De => "German",
            Lang::En => "English",
            Lang::Es => "Spanish",
            Lang::Eu => "Basque",
            Lang::Fa => "Farsi",
            Lang::Fi => "Finnish",
            Lang::Fr => "French",
            Lang::Hi => "Hindi",
            Lang::It => "Italian",
            Lang::Sv => "Swedish",
            Lang::Zh => "Chinese",
        }
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownLang;

impl fmt::Display for UnknownLang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown language code")
    }
}

impl core::error::Error for UnknownLang {}

impl FromStr for Lang {
    type Err = UnknownLang;

    /// Accepts the two-letter code in any case ("EN", "en").
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Lang::ALL
            .into_iter()
            .find(|l| l.code().eq_ignore_ascii_case(s.trim()))
            .ok_or(UnknownLang)
    }
}

impl Serialize for Lang {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for Lang {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        s.parse()
            .map_err(|_| serde::de::Error::custom(alloc::format!("unknown language code {s:?}")))
    }
}
