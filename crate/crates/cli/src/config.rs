//! Run configuration: an optional TOML file overlaid by command-line flags.
//!
//! Every table rejects unknown keys, so a typo is an error instead of a
//! silently ignored setting.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use kgbound::model::FINE_STRUCTURE;
use kgbound::solver::{SolveMode, DEFAULT_MAX_SC_ITERS, DEFAULT_SC_TOLERANCE};
use kgbound::PhysicalParams;
use serde::Deserialize;

use crate::Flags;

/// Rest energy of the charged pion in MeV, the default particle for `units = "mev"`.
pub const PION_REST_ENERGY_MEV: f64 = 139.57039;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Wavefunction,
    Solve,
    Compare,
    Lorentz,
    Convergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    /// Energies in units of the rest energy.
    #[default]
    Natural,
    /// Energies in MeV, scaled by `rest_energy_mev`.
    Mev,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Schrodinger,
    #[default]
    KgVector,
    KgScalarVector,
    KgEqual,
}

impl From<Mode> for SolveMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Schrodinger => SolveMode::Schrodinger,
            Mode::KgVector => SolveMode::KGVector,
            Mode::KgScalarVector => SolveMode::KGScalarVector,
            Mode::KgEqual => SolveMode::KGEqual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialName {
    None,
    #[default]
    Coulomb,
    Hulthen,
}

/// Scalar channel for `kg-scalar-vector`: absent, or a copy of the vector part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarName {
    #[default]
    None,
    Same,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub states: StatesSection,
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub convergence: ConvergenceSection,
    #[serde(default)]
    pub lorentz: LorentzSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub z: Option<f64>,
    pub alpha: Option<f64>,
    pub units: Option<Units>,
    pub rest_energy_mev: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatesSection {
    pub n: Option<u32>,
    pub l: Option<u32>,
    pub n_max: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub kind: Option<PotentialName>,
    /// Hulthen screening in units of the inverse Bohr radius.
    pub lambda: Option<f64>,
    pub scalar: Option<ScalarName>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub mode: Option<Mode>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: Option<usize>,
    pub r_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    pub sizes: Option<Vec<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorentzSection {
    pub beta: Option<f64>,
    pub e_total: Option<f64>,
    pub p: Option<[f64; 3]>,
    pub u: Option<f64>,
    pub u_prime: Option<f64>,
}

pub fn load(path: &Path) -> Result<ConfigFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Fully resolved settings after merging defaults, file and flags.
#[derive(Debug, Clone)]
pub struct Settings {
    pub command: Command,
    pub params: PhysicalParams,
    pub units: Units,
    pub rest_energy_mev: f64,
    pub states: Vec<(u32, u32)>,
    pub potential: PotentialName,
    pub lambda: f64,
    pub scalar: ScalarName,
    pub mode: Mode,
    pub tol: f64,
    pub max_iters: usize,
    pub grid_n: Option<usize>,
    pub r_max: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub sizes: Vec<usize>,
    pub lorentz: LorentzInput,
}

#[derive(Debug, Clone, Copy)]
pub struct LorentzInput {
    pub beta: f64,
    pub e_total: f64,
    pub p: [f64; 3],
    pub u: f64,
    pub u_prime: f64,
}

/// Default largest principal quantum number, the range of the reference sweeps.
pub const DEFAULT_N_MAX: u32 = 4;
pub const DEFAULT_LAMBDA: f64 = 0.2;
pub const DEFAULT_SIZES: [usize; 3] = [2000, 4000, 8000];

pub fn resolve(command: Command, file: ConfigFile, flags: &Flags) -> Result<Settings, String> {
    let z = flags.z.or(file.params.z).unwrap_or(1.0);
    let alpha = flags.alpha.or(file.params.alpha).unwrap_or(FINE_STRUCTURE);
    let params = PhysicalParams::new(1.0, z, alpha, 1.0, 1.0).map_err(|e| e.to_string())?;
    let rest_energy_mev = file.params.rest_energy_mev.unwrap_or(PION_REST_ENERGY_MEV);
    if !(rest_energy_mev.is_finite() && rest_energy_mev > 0.0) {
        return Err(format!("rest_energy_mev must be positive, got {rest_energy_mev}"));
    }

    let n = flags.n.or(file.states.n);
    let l = flags.l.or(file.states.l);
    let n_max = flags.n_max.or(file.states.n_max).unwrap_or(DEFAULT_N_MAX);
    let states = select_states(n, l, n_max)?;

    let tol = flags.tol.or(file.solver.tol).unwrap_or(DEFAULT_SC_TOLERANCE);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(format!("tol must be positive, got {tol}"));
    }
    let lambda = flags.lambda.or(file.potential.lambda).unwrap_or(DEFAULT_LAMBDA);
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(format!("lambda must be positive, got {lambda}"));
    }
    let r_max = flags.rmax.or(file.grid.r_max);
    if let Some(r) = r_max {
        if !(r.is_finite() && r > 0.0) {
            return Err(format!("r_max must be positive, got {r}"));
        }
    }
    let sizes = flags
        .sizes
        .clone()
        .or(file.convergence.sizes)
        .unwrap_or_else(|| DEFAULT_SIZES.to_vec());

    let defaults = LorentzInput {
        beta: 0.6,
        e_total: 1.2,
        p: [0.3, 0.0, 0.0],
        u: 0.1,
        u_prime: 0.0,
    };
    let lorentz = LorentzInput {
        beta: flags.beta.or(file.lorentz.beta).unwrap_or(defaults.beta),
        e_total: file.lorentz.e_total.unwrap_or(defaults.e_total),
        p: file.lorentz.p.unwrap_or(defaults.p),
        u: file.lorentz.u.unwrap_or(defaults.u),
        u_prime: file.lorentz.u_prime.unwrap_or(defaults.u_prime),
    };

    Ok(Settings {
        command,
        params,
        units: flags.units.or(file.params.units).unwrap_or_default(),
        rest_energy_mev,
        states,
        potential: flags.potential.or(file.potential.kind).unwrap_or_default(),
        lambda,
        scalar: flags.scalar.or(file.potential.scalar).unwrap_or_default(),
        mode: flags.mode.or(file.solver.mode).unwrap_or_default(),
        tol,
        max_iters: file.solver.max_iters.unwrap_or(DEFAULT_MAX_SC_ITERS),
        grid_n: flags.grid_n.or(file.grid.n),
        r_max,
        out: flags.out.clone().or(file.output.path),
        format: flags.format.or(file.output.format).unwrap_or_default(),
        sizes,
        lorentz,
    })
}

/// `n` and `l` pick one state; `n` alone picks every `l < n`; `l` alone picks
/// every `n <= n_max` that admits it; neither picks all states up to `n_max`.
fn select_states(n: Option<u32>, l: Option<u32>, n_max: u32) -> Result<Vec<(u32, u32)>, String> {
    let states: Vec<(u32, u32)> = match (n, l) {
        (Some(n), Some(l)) => {
            if n == 0 || l >= n {
                return Err(format!("invalid state n={n}, l={l}: need n >= 1 and l < n"));
            }
            vec![(n, l)]
        }
        (Some(n), None) => (0..n).map(|l| (n, l)).collect(),
        (None, Some(l)) => (l + 1..=n_max).map(|n| (n, l)).collect(),
        (None, None) => (1..=n_max).flat_map(|n| (0..n).map(move |l| (n, l))).collect(),
    };
    if states.is_empty() {
        return Err("the state selection is empty".into());
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_selection() {
        assert_eq!(select_states(None, None, 2).unwrap(), vec![(1, 0), (2, 0), (2, 1)]);
        assert_eq!(select_states(Some(3), None, 2).unwrap(), vec![(3, 0), (3, 1), (3, 2)]);
        assert_eq!(select_states(None, Some(1), 3).unwrap(), vec![(2, 1), (3, 1)]);
        assert!(select_states(Some(2), Some(2), 4).is_err());
        assert!(select_states(Some(0), None, 4).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = toml::from_str::<ConfigFile>("[params]\nz = 1.0\nzz = 2.0\n").unwrap_err();
        assert!(err.to_string().contains("zz"));
        assert!(toml::from_str::<ConfigFile>("[nope]\n").is_err());
        let ok: ConfigFile = toml::from_str("[solver]\nmode = \"kg-equal\"\n").unwrap();
        assert_eq!(ok.solver.mode, Some(Mode::KgEqual));
    }

    #[test]
    fn guide_example_parses() {
        let guide = include_str!("../../../book/src/cli.md");
        let start = guide.find("```toml\n").unwrap() + "```toml\n".len();
        let block = &guide[start..start + guide[start..].find("```").unwrap()];
        let file: ConfigFile = toml::from_str(block).unwrap();
        assert_eq!(file.potential.kind, Some(PotentialName::Hulthen));
        assert_eq!(file.lorentz.p, Some([0.3, 0.0, 0.0]));
    }
}
