// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use crate::error::ConfigError;
use crate::graph::Representation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Order {
    Fifo,
    Lifo,
    Lrf,
    TwoPhaseLrf,
    Topo,
}

impl Order {
    pub const ALL: [Order; 5] = [
        Order::Fifo,
        Order::Lifo,
        Order::Lrf,
        Order::TwoPhaseLrf,
        Order::Topo,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Order::Fifo => "FIFO",
            Order::Lifo => "LIFO",
            Order::Lrf => "LRF",
            Order::TwoPhaseLrf => "2LRF",
            Order::Topo => "TOPO",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Engine {
    Naive,
    Worklist(Order),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CycleDetection {
    #[default]
    None,
    Ocd,
    Hcd,
    Lcd,
    HcdLcd,
}

impl CycleDetection {
    pub const ALL: [CycleDetection; 5] = [
        CycleDetection::None,
        CycleDetection::Ocd,
        CycleDetection::Hcd,
        CycleDetection::Lcd,
        CycleDetection::HcdLcd,
    ];

    pub fn hcd(self) -> bool {
        matches!(self, CycleDetection::Hcd | CycleDetection::HcdLcd)
    }

    pub fn lcd(self) -> bool {
        matches!(self, CycleDetection::Lcd | CycleDetection::HcdLcd)
    }

    pub fn ocd(self) -> bool {
        self == CycleDetection::Ocd
    }
}

/// One point of the configuration space, written like `IP+WL(LRF)+OCD+PIP`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SolverConfig {
    pub representation: Representation,
    pub ovs: bool,
    pub engine: Engine,
    pub pip: bool,
    pub cycle: CycleDetection,
    pub dp: bool,
}

impl SolverConfig {
    pub fn naive(representation: Representation) -> Self {
        SolverConfig {
            representation,
            ovs: false,
            engine: Engine::Naive,
            pip: false,
            cycle: CycleDetection::None,
            dp: false,
        }
    }

    pub fn worklist(representation: Representation, order: Order) -> Self {
        SolverConfig {
            engine: Engine::Worklist(order),
            ..Self::naive(representation)
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.pip && self.representation != Representation::Ip {
            return Err(ConfigError::Invalid("PIP requires the IP representation"));
        }
        if self.engine == Engine::Naive
            && (self.pip || self.dp || self.cycle != CycleDetection::None)
        {
            return Err(ConfigError::Invalid(
                "the naive solver takes no worklist options",
            ));
        }
        Ok(())
    }

    /// Every valid configuration, in a fixed order.
    pub fn enumerate() -> Vec<SolverConfig> {
        let mut out = Vec::new();
        for representation in [Representation::Ep, Representation::Ip] {
            for ovs in [false, true] {
                out.push(SolverConfig {
                    ovs,
                    ..Self::naive(representation)
                });
                for order in Order::ALL {
                    let pips: &[bool] = match representation {
                        Representation::Ep => &[false],
                        Representation::Ip => &[false, true],
                    };
                    for &pip in pips {
                        for cycle in CycleDetection::ALL {
                            for dp in [false, true] {
                                out.push(SolverConfig {
                                    representation,
                                    ovs,
                                    engine: Engine::Worklist(order),
                                    pip,
                                    cycle,
                                    dp,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for SolverConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.representation.keyword())?;
        if self.ovs {
            f.write_str("+OVS")?;
        }
        match self.engine {
            Engine::Naive => f.write_str("+Naive")?,
            Engine::Worklist(o) => write!(f, "+WL({})", o.keyword())?,
        }
        if self.pip {
            f.write_str("+PIP")?;
        }
        match self.cycle {
            CycleDetection::None => {}
            CycleDetection::Ocd => f.write_str("+OCD")?,
            CycleDetection::Hcd => f.write_str("+HCD")?,
            CycleDetection::Lcd => f.write_str("+LCD")?,
            CycleDetection::HcdLcd => f.write_str("+HCD+LCD")?,
        }
        if self.dp {
            f.write_str("+DP")?;
        }
        Ok(())
    }
}

impl FromStr for SolverConfig {
    type Err = ConfigError;

    /// Options after the representation may appear in any order.
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let bad = || ConfigError::Parse(s.to_string());
        let mut parts = s.trim().split('+');
        let representation = match parts.next().ok_or_else(bad)? {
            "EP" => Representation::Ep,
            "IP" => Representation::Ip,
            _ => return Err(bad()),
        };
        let mut engine = None;
        let (mut ovs, mut pip, mut dp, mut ocd, mut hcd, mut lcd) =
            (false, false, false, false, false, false);
        for part in parts {
            let slot = match part {
                "OVS" => &mut ovs,
                "PIP" => &mut pip,
                "DP" => &mut dp,
                "OCD" => &mut ocd,
                "HCD" => &mut hcd,
                "LCD" => &mut lcd,
                "Naive" => {
                    if engine.replace(Engine::Naive).is_some() {
                        return Err(bad());
                    }
                    continue;
                }
                wl => {
                    let inner = wl
                        .strip_prefix("WL(")
                        .and_then(|r| r.strip_suffix(')'))
                        .ok_or_else(bad)?;
                    let order = Order::ALL
                        .into_iter()
                        .find(|o| o.keyword() == inner)
                        .ok_or_else(bad)?;
                    if engine.replace(Engine::Worklist(order)).is_some() {
                        return Err(bad());
                    }
                    continue;
                }
            };
            if std::mem::replace(slot, true) {
                return Err(bad());
            }
        }
        let cycle = match (ocd, hcd, lcd) {
            (false, false, false) => CycleDetection::None,
            (true, false, false) => CycleDetection::Ocd,
            (false, true, false) => CycleDetection::Hcd,
            (false, false, true) => CycleDetection::Lcd,
            (false, true, true) => CycleDetection::HcdLcd,
            _ => {
                return Err(ConfigError::Invalid(
                    "OCD cannot be combined with HCD or LCD",
                ))
            }
        };
        let c = SolverConfig {
            representation,
            ovs,
            engine: engine.ok_or_else(bad)?,
            pip,
            cycle,
            dp,
        };
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_parse_round_trip_for_all() {
        for c in SolverConfig::enumerate() {
            let text = c.to_string();
            assert_eq!(text.parse::<SolverConfig>().unwrap(), c, "{text}");
            c.validate().unwrap();
        }
    }

    #[test]
    fn options_in_any_order() {
        let c: SolverConfig = "IP+PIP+OCD+WL(LRF)".parse().unwrap();
        assert_eq!(c.to_string(), "IP+WL(LRF)+PIP+OCD");
    }

    #[test]
    fn rejects_invalid_combinations() {
        assert!("EP+WL(FIFO)+PIP".parse::<SolverConfig>().is_err());
        assert!("IP+WL(FIFO)+OCD+LCD".parse::<SolverConfig>().is_err());
        assert!("IP+Naive+DP".parse::<SolverConfig>().is_err());
        assert!("IP+WL(FIFO)+WL(LRF)".parse::<SolverConfig>().is_err());
        assert!("IP+WL(BFS)".parse::<SolverConfig>().is_err());
        assert!("IP".parse::<SolverConfig>().is_err());
    }
}
