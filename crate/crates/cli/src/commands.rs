use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use eet_core::analysis::{rate_table, scale_scan, simulate};
use eet_core::scenario::parse_scenario;
use eet_core::units::PS_INV_TO_S_INV;
use eet_core::{BathModel, Method, ScanMode, Scenario};
use serde_json::{json, Value};

use crate::output::{emit, num, sidecar_path, Csv};

pub fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(parse_scenario(&text)?)
}

/// Inclusive grid from a `min:max:step` specification.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [min, max, step] = parts.as_slice() else {
        bail!("grid must look like min:max:step, got {spec:?}");
    };
    let parse = |s: &str| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?} in grid {spec:?}"));
    let (min, max, step) = (parse(min)?, parse(max)?, parse(step)?);
    if !(min < max) || !(step > 0.0) || !min.is_finite() || !max.is_finite() {
        bail!("grid needs min < max and step > 0, got {spec:?}");
    }
    let count = ((max - min) / step * (1.0 + 1e-12)).floor() as usize;
    Ok((0..=count).map(|i| min + step * i as f64).collect())
}

pub fn parse_factors(spec: &str) -> Result<Vec<f64>> {
    let factors = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad factor {s:?}")))
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = factors.iter().find(|f| !(**f > 0.0) || !f.is_finite()) {
        bail!("scale factors must be positive, got {bad}");
    }
    Ok(factors)
}

pub struct SimulateArgs {
    pub scenario: PathBuf,
    pub out: Option<PathBuf>,
    pub json: bool,
    pub secular: bool,
    pub no_lamb_shift: bool,
    pub method: Option<Method>,
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let mut scenario = load(&args.scenario)?;
    if args.secular {
        scenario.options.redfield.secular = true;
    }
    if args.no_lamb_shift {
        scenario.options.redfield.lamb_shift = false;
    }
    if let Some(m) = args.method {
        scenario.options.method = m;
    }
    let sim = simulate(&scenario)?;
    let n = sim.model.dim();
    let traj = &sim.trajectory;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();

    let thermal = json!({
        "temperature_k": scenario.bath.temperature,
        "thermal_site_populations": sim.thermal_site_populations,
        "thermal_exciton_populations": sim.thermal.populations(),
        "steady_state_site_populations": sim.steady_site_populations(),
        "steady_state_gap": sim.steady_state_gap(),
    });

    if args.json {
        let coherences: Value = pairs
            .iter()
            .map(|&(a, b)| {
                let series: Vec<[f64; 2]> = traj.states.iter().map(|s| [s.matrix()[(a, b)].re, s.matrix()[(a, b)].im]).collect();
                (format!("{}_{}", a + 1, b + 1), json!(series))
            })
            .collect::<serde_json::Map<_, _>>()
            .into();
        let doc = json!({
            "t_ps": traj.times,
            "site_populations": traj.site_populations,
            "exciton_coherences": coherences,
            "trace": traj.states.iter().map(|s| s.trace().re).collect::<Vec<_>>(),
            "min_eig": traj.min_eigenvalues,
            "dt_ps": sim.dt,
            "stride": sim.stride,
            "baseline": thermal,
        });
        return emit(args.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"));
    }

    let mut header = vec!["t_ps".to_string()];
    header.extend((1..=n).map(|i| format!("pop_site_{i}")));
    for &(a, b) in &pairs {
        header.push(format!("re_rho_{}_{}", a + 1, b + 1));
        header.push(format!("im_rho_{}_{}", a + 1, b + 1));
    }
    header.extend(["trace".to_string(), "min_eig".to_string()]);
    let mut csv = Csv::new(header);
    for (k, state) in traj.states.iter().enumerate() {
        let mut row = vec![num(traj.times[k])];
        row.extend(traj.site_populations[k].iter().map(|&p| num(p)));
        for &(a, b) in &pairs {
            row.push(num(state.matrix()[(a, b)].re));
            row.push(num(state.matrix()[(a, b)].im));
        }
        row.push(num(state.trace().re));
        row.push(num(traj.min_eigenvalues[k]));
        csv.row(row);
    }
    emit(args.out.as_deref(), &csv.into_string())?;
    if let Some(out) = &args.out {
        emit(Some(&sidecar_path(out)), &(serde_json::to_string_pretty(&thermal)? + "\n"))?;
    }
    Ok(())
}

pub fn rates_cmd(scenario: &Path, out: Option<&Path>, as_json: bool) -> Result<()> {
    let model = load(scenario)?.model()?;
    let rows = rate_table(&model);
    if as_json {
        let doc: Vec<Value> = rows
            .iter()
            .map(|r| {
                json!({
                    "from": r.from_state + 1,
                    "to": r.to_state + 1,
                    "log10_zeta": finite_or_null(r.log10_zeta),
                    "log10_C_s": finite_or_null(r.log10_c),
                    "log10_k_s": finite_or_null(r.log10_k),
                    "k_ps_inv": r.k,
                })
            })
            .collect();
        return emit(out, &(serde_json::to_string_pretty(&doc)? + "\n"));
    }
    let mut csv = Csv::new(["from", "to", "log10_zeta", "log10_C_s", "log10_k_s", "k_ps_inv"]);
    for r in &rows {
        csv.row([
            (r.from_state + 1).to_string(),
            (r.to_state + 1).to_string(),
            num(r.log10_zeta),
            num(r.log10_c),
            num(r.log10_k),
            num(r.k),
        ]);
    }
    emit(out, &csv.into_string())
}

/// JSON has no infinities; a vanishing factor is written as null.
fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub struct SpectrumArgs {
    pub scenario: Option<PathBuf>,
    pub bath: String,
    pub temperature: Option<f64>,
    pub grid: String,
    pub out: Option<PathBuf>,
    pub json: bool,
}

pub fn spectrum_cmd(args: &SpectrumArgs) -> Result<()> {
    let grid = parse_grid(&args.grid)?;
    let (mut bath, markers) = match &args.scenario {
        Some(path) => {
            let scenario = load(path)?;
            let model = scenario.model()?;
            let n = model.dim();
            let mut markers = vec![Vec::new(); grid.len()];
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let w = model.basis.transition_frequency(a, b);
                    let nearest = (0..grid.len()).min_by(|&i, &j| (grid[i] - w).abs().total_cmp(&(grid[j] - w).abs()));
                    if let Some(i) = nearest.filter(|&i| (grid[i] - w).abs() <= step_of(&grid)) {
                        markers[i].push(format!("w_{}_{}", a + 1, b + 1));
                    }
                }
            }
            (scenario.bath, Some(markers))
        }
        None => {
            let bath = BathModel::preset(&args.bath).with_context(|| format!("unknown bath preset {:?}", args.bath))?;
            (bath, None)
        }
    };
    if let Some(t) = args.temperature {
        bath.temperature = t;
    }
    bath.validate()?;

    if args.json {
        let doc = json!({
            "bath": bath,
            "omega_rad_ps": grid,
            "J_ps_inv": grid.iter().map(|&w| bath.spectral_density(w)).collect::<Vec<_>>(),
            "C_ps_inv": grid.iter().map(|&w| bath.correlation(w)).collect::<Vec<_>>(),
            "markers": markers.as_ref().map(|m| {
                m.iter().enumerate().filter(|(_, v)| !v.is_empty()).map(|(i, v)| json!({"omega_rad_ps": grid[i], "labels": v})).collect::<Vec<_>>()
            }),
        });
        return emit(args.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"));
    }

    let mut header = vec!["omega_rad_ps", "J_ps_inv", "C_ps_inv", "C_s_inv"];
    if markers.is_some() {
        header.push("marker");
    }
    let mut csv = Csv::new(header);
    for (i, &w) in grid.iter().enumerate() {
        let c = bath.correlation(w);
        let mut row = vec![num(w), num(bath.spectral_density(w)), num(c), num(c * PS_INV_TO_S_INV)];
        if let Some(m) = &markers {
            row.push(m[i].join(";"));
        }
        csv.row(row);
    }
    emit(args.out.as_deref(), &csv.into_string())
}

fn step_of(grid: &[f64]) -> f64 {
    if grid.len() > 1 {
        0.5 * (grid[1] - grid[0])
    } else {
        0.0
    }
}

pub struct ScanArgs {
    pub scenario: PathBuf,
    pub factors: Option<String>,
    pub grid: Option<String>,
    pub mode: ScanMode,
    pub from: Option<usize>,
    pub out: Option<PathBuf>,
    pub json: bool,
}

pub fn scan_cmd(args: &ScanArgs) -> Result<()> {
    let factors = match (&args.factors, &args.grid) {
        (Some(_), Some(_)) => bail!("give either --factors or --grid, not both"),
        (Some(f), None) => parse_factors(f)?,
        (None, Some(g)) => {
            let grid = parse_grid(g)?;
            if grid[0] <= 0.0 {
                bail!("scale factors must be positive, got {}", grid[0]);
            }
            grid
        }
        (None, None) => vec![1.0],
    };
    let scenario = load(&args.scenario)?;
    let model = scenario.model()?;
    let from = match args.from {
        Some(0) => bail!("--from is 1-based"),
        Some(k) if k > model.dim() => bail!("--from {k} exceeds the {} exciton states", model.dim()),
        Some(k) => k - 1,
        None => scenario.initial_exciton_state(&model.basis)?,
    };
    let results = scale_scan(&model, from, &factors, args.mode)?;

    if args.json {
        let doc: Vec<Value> = results
            .iter()
            .map(|r| {
                json!({
                    "factor": r.factor,
                    "dominant_from": r.from_state + 1,
                    "dominant_to_state": r.dominant.map(|d| d.to_state + 1),
                    "target_site": r.dominant.map(|d| d.site + 1),
                    "k_dominant": r.dominant.map(|d| d.rate),
                    "directedness": finite_or_null(r.directedness),
                })
            })
            .collect();
        return emit(args.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"));
    }
    let mut csv = Csv::new(["factor", "dominant_from", "dominant_to_state", "target_site", "k_dominant", "directedness"]);
    for r in &results {
        let (to, site, k) = match r.dominant {
            Some(d) => ((d.to_state + 1).to_string(), (d.site + 1).to_string(), num(d.rate)),
            None => (String::new(), String::new(), num(0.0)),
        };
        csv.row([num(r.factor), (r.from_state + 1).to_string(), to, site, k, num(r.directedness)]);
    }
    emit(args.out.as_deref(), &csv.into_string())
}
