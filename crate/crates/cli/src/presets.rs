//! Bundled experiment configs.

use crate::config::{ExperimentConfig, Source};
use crate::error::CliResult;

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "free",
        summary: "V = 0 control; reduced densities factorize exactly",
        text: include_str!("../presets/free.toml"),
    },
    Preset {
        name: "convergence",
        summary: "trace distance of γ_N to |φ_t⟩⟨φ_t| against N (M = 6, product data)",
        text: include_str!("../presets/convergence.toml"),
    },
    Preset {
        name: "growth",
        summary: "⟨N + 1⟩ along the fluctuation dynamics from the vacuum, exponential fit",
        text: include_str!("../presets/growth.toml"),
    },
    Preset {
        name: "bogoliubov",
        summary: "symplectic identities of θ(t;0) and the transformation property of U_∞",
        text: include_str!("../presets/bogoliubov.toml"),
    },
    Preset {
        name: "clt",
        summary: "moments of the fluctuation of dΓ(cos) against the limiting variance",
        text: include_str!("../presets/clt.toml"),
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    pub fn source(&self) -> Source {
        let mut s = Source::inline(self.text);
        s.path = Some(format!("<preset {}>", self.name).into());
        s
    }

    pub fn config(&self) -> CliResult<ExperimentConfig> {
        self.source().load()
    }
}

pub fn listing() -> String {
    let width = PRESETS.iter().map(|p| p.name.len()).max().unwrap_or(0);
    PRESETS.iter().map(|p| format!("{:<width$}  {}\n", p.name, p.summary)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_loads() {
        for p in PRESETS {
            let c = p.config().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(c.time.dt, 1e-3, "{}", p.name);
        }
        assert_eq!(PRESETS.len(), 5);
        assert!(find("clt").is_some());
        assert!(find("nope").is_none());
    }
}
