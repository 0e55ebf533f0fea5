//! One function per command, each producing a [`Table`].

use kgbound::coulomb::{energy_expansion, energy_level, schrodinger_level, sigma_closed};
use kgbound::lorentz::{boost_backward, boost_forward, invariant_mass_sq, BoostSpec, CharacterState};
use kgbound::solver::{convergence_study, default_grid, solve_extrapolated, SolveRequest};
use kgbound::wavefunction::build_radial;
use kgbound::{KgError, PotentialKind, PotentialSpec, RadialGrid};
use rayon::prelude::*;

use crate::config::{Mode, PotentialName, ScalarName, Settings, Units};
use crate::table::{Cell, Meta, Table};

/// Default point count of a wavefunction tabulation.
pub const DEFAULT_TABULATION_POINTS: usize = 2000;
/// Default solver grid; `solve` and `compare` extrapolate from half of it.
pub const DEFAULT_SOLVER_POINTS: usize = 8000;

/// A table plus the first error met by a per-row computation, if any.
pub struct Report {
    pub table: Table,
    pub row_error: Option<KgError>,
}

impl Report {
    fn complete(table: Table) -> Self {
        Self { table, row_error: None }
    }
}

pub fn run(s: &Settings) -> Result<Report, KgError> {
    use crate::config::Command::*;
    let mut report = match s.command {
        Spectrum => Report::complete(spectrum(s)?),
        Wavefunction => Report::complete(wavefunction(s)?),
        Solve => solve(s)?,
        Compare => Report::complete(compare(s)?),
        Lorentz => Report::complete(lorentz(s)?),
        Convergence => Report::complete(convergence(s)?),
    };
    let mut meta = common_meta(s);
    meta.append(&mut report.table.meta);
    report.table.meta = meta;
    Ok(report)
}

fn common_meta(s: &Settings) -> Vec<(String, Meta)> {
    let command = format!("{:?}", s.command).to_lowercase();
    let mut meta = vec![
        ("command".to_string(), Meta::from(command)),
        ("z".to_string(), s.params.z_number.into()),
        ("alpha".to_string(), s.params.alpha.into()),
        ("units".to_string(), Meta::from(format!("{:?}", s.units).to_lowercase())),
    ];
    if s.units == Units::Mev {
        meta.push(("rest_energy_mev".to_string(), s.rest_energy_mev.into()));
    }
    meta
}

/// Energy in the requested units.
fn energy(s: &Settings, e: f64) -> f64 {
    match s.units {
        Units::Natural => e,
        Units::Mev => e * s.rest_energy_mev,
    }
}

fn spectrum(s: &Settings) -> Result<Table, KgError> {
    let p = &s.params;
    let mut t = Table::new(vec![
        "n",
        "l",
        "sigma_l",
        "e_total",
        "e_prime",
        "system_mass",
        "expansion",
        "expansion_gap",
    ]);
    for &(n, l) in &s.states {
        let level = energy_level(p, n, l)?;
        let expansion = energy_expansion(p, n, l)?;
        t.push(vec![
            n.into(),
            l.into(),
            sigma_closed(p, l)?.sigma_l.into(),
            energy(s, level.e_total).into(),
            energy(s, level.e_prime).into(),
            (level.system_mass / p.rest_mass).into(),
            energy(s, expansion).into(),
            energy(s, (level.e_total - expansion).abs()).into(),
        ]);
    }
    Ok(t)
}

fn wavefunction(s: &Settings) -> Result<Table, KgError> {
    let p = &s.params;
    let mut t = Table::new(vec![
        "n",
        "l",
        "normalization",
        "node_count",
        "r",
        "rho",
        "radial",
        "u",
        "density",
    ]);
    let mut states = Vec::new();
    for &(n, l) in &s.states {
        let wf = build_radial(p, n, l)?;
        let r_max = s.r_max.unwrap_or_else(|| wf.r_max());
        let points = s.grid_n.unwrap_or(DEFAULT_TABULATION_POINTS);
        let grid = RadialGrid::log_uniform(1e-3 / wf.rho_scale, r_max, points)?;
        let nodes = wf.node_count();
        for &r in grid.points() {
            let radial = wf.eval(r);
            t.push(vec![
                n.into(),
                l.into(),
                wf.normalization.into(),
                nodes.into(),
                r.into(),
                wf.rho(r).into(),
                radial.into(),
                (r * radial).into(),
                (r * r * radial * radial).into(),
            ]);
        }
        states.push(Meta::Map(vec![
            ("n".into(), n.into()),
            ("l".into(), l.into()),
            ("normalization".into(), wf.normalization.into()),
            ("node_count".into(), nodes.into()),
            ("e_prime".into(), energy(s, wf.e_prime).into()),
            ("system_mass".into(), wf.system_mass.into()),
        ]));
    }
    t.meta("states", Meta::List(states));
    Ok(t)
}

fn potential_spec(s: &Settings) -> PotentialSpec {
    let kind = match s.potential {
        PotentialName::None => PotentialKind::None,
        PotentialName::Coulomb => PotentialKind::Coulomb,
        PotentialName::Hulthen => PotentialKind::hulthen(&s.params, s.params.z_number, s.lambda),
    };
    match (s.mode, s.scalar) {
        (Mode::KgEqual, _) => PotentialSpec::equal(kind),
        (Mode::KgScalarVector, ScalarName::Same) => PotentialSpec::equal(kind),
        _ => PotentialSpec::vector(kind),
    }
}

fn request(s: &Settings, mode: Mode, potential: PotentialSpec, n: u32, l: u32) -> Result<SolveRequest, KgError> {
    let points = s.grid_n.unwrap_or(DEFAULT_SOLVER_POINTS);
    let grid = match s.r_max {
        Some(r_max) => RadialGrid::uniform(r_max, points)?,
        None => default_grid(&potential, &s.params, n, points)?,
    };
    Ok(SolveRequest::new(mode.into(), potential, n, l, &s.params)?
        .with_grid(grid)
        .with_tolerance(s.tol, s.max_iters))
}

fn potential_label(s: &Settings) -> String {
    match s.potential {
        PotentialName::Hulthen => format!("hulthen(lambda={})", s.lambda),
        other => format!("{other:?}").to_lowercase(),
    }
}

fn error_status(e: &KgError) -> &'static str {
    match e {
        KgError::StateNotFound { .. } => "state-not-found",
        KgError::NoConvergence { .. } => "no-convergence",
        KgError::TailNotConverged { .. } => "tail-not-converged",
        KgError::SupercriticalCoupling { .. } => "supercritical",
        KgError::NotBound { .. } => "not-bound",
        _ => "error",
    }
}

fn solve(s: &Settings) -> Result<Report, KgError> {
    let spec = potential_spec(s);
    let mode_label = format!("{:?}", s.mode);
    let mode_label = kebab(&mode_label);
    let results: Vec<_> = s
        .states
        .par_iter()
        .map(|&(n, l)| {
            let req = request(s, s.mode, spec, n, l)?;
            let points = req.grid.len();
            solve_extrapolated(&req, &s.params, points / 2, points)
        })
        .collect();
    let mut t = Table::new(vec![
        "mode",
        "potential",
        "n",
        "l",
        "status",
        "e_prime",
        "system_mass",
        "iterations",
        "residual",
        "node_count",
    ]);
    let mut row_error = None;
    for (&(n, l), result) in s.states.iter().zip(results) {
        let head = vec![mode_label.clone().into(), potential_label(s).into(), n.into(), l.into()];
        let tail: Vec<Cell> = match &result {
            Ok(x) => vec![
                "ok".into(),
                energy(s, x.e_prime).into(),
                (s.params.rest_mass + x.e_prime / (s.params.c * s.params.c)).into(),
                x.fine.iterations.into(),
                x.fine.residual.into(),
                x.fine.node_count.into(),
            ],
            Err(e) => {
                let mut cells = vec![error_status(e).into()];
                cells.extend(std::iter::repeat_n(Cell::Null, 5));
                cells
            }
        };
        if let Err(e) = result {
            // Malformed input is not a per-row outcome.
            if e.class() == kgbound::ErrorClass::Input {
                return Err(e);
            }
            row_error.get_or_insert(e);
        }
        t.push(head.into_iter().chain(tail).collect());
    }
    let points = s.grid_n.unwrap_or(DEFAULT_SOLVER_POINTS);
    t.meta("tolerance", s.tol);
    t.meta("grids", Meta::List(vec![(points / 2).into(), points.into()]));
    t.meta("energies", "Richardson extrapolation over the two grids; iterations, residual and nodes from the finer");
    Ok(Report { table: t, row_error })
}

fn kebab(camel: &str) -> String {
    let mut out = String::new();
    for (i, c) in camel.chars().enumerate() {
        if c.is_ascii_uppercase() && i > 0 {
            out.push('-');
        }
        out.push(c.to_ascii_lowercase());
    }
    out
}

fn compare(s: &Settings) -> Result<Table, KgError> {
    if s.potential != PotentialName::Coulomb {
        return Err(KgError::UnsupportedCombination("compare needs the Coulomb potential".into()));
    }
    let p = &s.params;
    let spec = PotentialSpec::vector(PotentialKind::Coulomb);
    let fine = s.grid_n.unwrap_or(DEFAULT_SOLVER_POINTS);
    let numeric: Vec<_> = s
        .states
        .par_iter()
        .map(|&(n, l)| {
            let req = request(s, Mode::KgVector, spec, n, l)?;
            solve_extrapolated(&req, p, fine / 2, fine)
        })
        .collect();
    let mut t = Table::new(vec![
        "n",
        "l",
        "e_kg_closed",
        "e_kg_numeric",
        "e_schrodinger",
        "delta_closed_numeric",
        "delta_kg_schrodinger",
    ]);
    for (&(n, l), numeric) in s.states.iter().zip(numeric) {
        let closed = energy_level(p, n, l)?.e_prime;
        let numeric = numeric?.e_prime;
        let schrodinger = schrodinger_level(p, n);
        t.push(vec![
            n.into(),
            l.into(),
            energy(s, closed).into(),
            energy(s, numeric).into(),
            energy(s, schrodinger).into(),
            ((numeric - closed) / closed).abs().into(),
            ((closed - schrodinger) / schrodinger).abs().into(),
        ]);
    }
    t.meta("energies", "e_prime (rest energy excluded); deltas are relative");
    t.meta("grids", Meta::List(vec![(fine / 2).into(), fine.into()]));
    Ok(t)
}

fn lorentz(s: &Settings) -> Result<Table, KgError> {
    let c = s.params.c;
    let input = s.lorentz;
    let boost = BoostSpec::from_beta(input.beta, c)?;
    let k = CharacterState::new(input.e_total, input.p, input.u);
    let k_prime = boost_forward(&k, &boost, input.u_prime);
    let back = boost_backward(&k_prime, &boost, input.u);
    let mut t = Table::new(vec!["frame", "e_total", "px", "py", "pz", "u", "invariant"]);
    for (label, state) in [("K", k), ("K'", k_prime), ("K (back)", back)] {
        t.push(vec![
            label.into(),
            state.e_total.into(),
            state.p[0].into(),
            state.p[1].into(),
            state.p[2].into(),
            state.u_potential.into(),
            invariant_mass_sq(&state, c).into(),
        ]);
    }
    t.meta("beta", boost.beta);
    t.meta("gamma", boost.gamma);
    Ok(t)
}

fn convergence(s: &Settings) -> Result<Table, KgError> {
    let spec = potential_spec(s);
    let studies: Vec<_> = s
        .states
        .par_iter()
        .map(|&(n, l)| {
            let req = request(s, s.mode, spec, n, l)?;
            convergence_study(&req, &s.params, &s.sizes)
        })
        .collect();
    let mut t = Table::new(vec!["n", "l", "points", "e_prime", "richardson", "observed_order"]);
    for (&(n, l), rows) in s.states.iter().zip(studies) {
        for row in rows? {
            t.push(vec![
                n.into(),
                l.into(),
                row.points.into(),
                energy(s, row.e_prime).into(),
                row.richardson.map(|e| energy(s, e)).into(),
                row.observed_order.into(),
            ]);
        }
    }
    t.meta("mode", kebab(&format!("{:?}", s.mode)));
    t.meta("potential", potential_label(s));
    Ok(t)
}
