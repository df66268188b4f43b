use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Channel, Flavor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CardiacSource {
    Ecg,
    Bvp,
    Scg,
}

impl CardiacSource {
    pub fn channel(self) -> Channel {
        match self {
            CardiacSource::Ecg => Channel::Ecg,
            CardiacSource::Bvp => Channel::Bvp,
            CardiacSource::Scg => Channel::Scg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Peripherals {
    All,
    RspOnly,
    AdrOnly,
}

/// A classifier input set: one cardiac source plus a peripheral selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scenario {
    cardiac: CardiacSource,
    peripherals: Peripherals,
}

impl Scenario {
    /// ADR shares its sensor with SCG, so it is never paired with ECG or BVP.
    pub fn new(cardiac: CardiacSource, peripherals: Peripherals) -> Result<Self> {
        if peripherals == Peripherals::AdrOnly && cardiac != CardiacSource::Scg {
            return Err(Error::Config(format!(
                "ADR can only be combined with SCG, not {:?}",
                cardiac
            )));
        }
        Ok(Self {
            cardiac,
            peripherals,
        })
    }

    pub fn cardiac(&self) -> CardiacSource {
        self.cardiac
    }

    pub fn peripherals(&self) -> Peripherals {
        self.peripherals
    }

    /// The seven wearable input sets: three all-modality and four cardio-respiratory.
    pub fn wearable_grid() -> Vec<Scenario> {
        use CardiacSource::*;
        use Peripherals::*;
        [
            (Ecg, All),
            (Bvp, All),
            (Scg, All),
            (Ecg, RspOnly),
            (Bvp, RspOnly),
            (Scg, RspOnly),
            (Scg, AdrOnly),
        ]
        .into_iter()
        .map(|(c, p)| Scenario::new(c, p).expect("grid is valid"))
        .collect()
    }

    /// The lab-dataset replication input set.
    pub fn replication() -> Scenario {
        Scenario::new(CardiacSource::Bvp, Peripherals::All).expect("valid")
    }

    /// Channels whose features make up the vector, in output order.
    pub fn feature_channels(&self, flavor: Flavor) -> Result<Vec<Channel>> {
        let cardiac = self.cardiac.channel();
        match flavor {
            Flavor::DeapLike => {
                if self.cardiac != CardiacSource::Bvp || self.peripherals == Peripherals::AdrOnly {
                    return Err(Error::Config(format!(
                        "scenario {self} is not available for the lab (DEAP-like) flavor"
                    )));
                }
                Ok(match self.peripherals {
                    Peripherals::All => vec![
                        cardiac,
                        Channel::Rsp,
                        Channel::Eda,
                        Channel::Skt,
                        Channel::Emg,
                        Channel::Eog,
                    ],
                    _ => vec![cardiac, Channel::Rsp],
                })
            }
            Flavor::EmoWearLike | Flavor::Synthetic => Ok(match self.peripherals {
                Peripherals::All => {
                    let mut v = vec![cardiac, Channel::Rsp];
                    if self.cardiac == CardiacSource::Scg {
                        v.push(Channel::Adr);
                    }
                    v.extend([Channel::Eda, Channel::Skt]);
                    v
                }
                Peripherals::RspOnly => vec![cardiac, Channel::Rsp],
                Peripherals::AdrOnly => vec![cardiac, Channel::Adr],
            }),
        }
    }

    /// Ingested channels needed to compute the feature channels.
    pub fn required_channels(&self, flavor: Flavor) -> Result<Vec<Channel>> {
        let mut v: Vec<Channel> = self
            .feature_channels(flavor)?
            .into_iter()
            .map(Channel::source)
            .collect();
        v.sort();
        v.dedup();
        Ok(v)
    }

    /// Short identifier, e.g. `SCG+ADR` or `BVP+all`.
    pub fn id(&self) -> String {
        format!("{}+{}", self.cardiac_name(), self.peripherals_name())
    }

    pub fn cardiac_name(&self) -> &'static str {
        self.cardiac.channel().name()
    }

    pub fn peripherals_name(&self) -> &'static str {
        match self.peripherals {
            Peripherals::All => "all",
            Peripherals::RspOnly => "RSP",
            Peripherals::AdrOnly => "ADR",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (c, p) = s
            .trim()
            .split_once('+')
            .ok_or_else(|| Error::Config(format!("scenario `{s}` must look like CARDIAC+PERIPHERALS")))?;
        let cardiac = match c.trim().to_ascii_uppercase().as_str() {
            "ECG" => CardiacSource::Ecg,
            "BVP" => CardiacSource::Bvp,
            "SCG" => CardiacSource::Scg,
            other => return Err(Error::Config(format!("unknown cardiac source `{other}`"))),
        };
        let peripherals = match p.trim().to_ascii_lowercase().as_str() {
            "all" => Peripherals::All,
            "rsp" => Peripherals::RspOnly,
            "adr" => Peripherals::AdrOnly,
            other => return Err(Error::Config(format!("unknown peripherals `{other}`"))),
        };
        Scenario::new(cardiac, peripherals)
    }
}
