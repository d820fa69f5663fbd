//! The subcommands. Each turns a resolved [`RunConfig`] into a table.

use std::path::Path;

use num_complex::Complex64;
use serde_json::Value;
use whitkern_core::finite::{
    correlation, k_from_l, l_from_k, sample, weight_distribution, CMatrix, Configuration, FiniteKernel,
};
use whitkern_core::lab::{
    commutation_check, ladder, norm_law, verify_factorization, verify_resolvent, QuadratureGrid, ResidualReport,
};
use whitkern_core::limit::{scaled_convergence, LimitParameters};
use whitkern_core::params::make_parameters;
use whitkern_core::spectral::{kpp_eigen_three_ways, transform_identity, Bump, Transform};
use whitkern_core::tail::{tail_convergence, TailKernel};
use whitkern_core::{AccuracyPolicy, BlockTag, KernelMachine, ParameterSet};

use crate::config::{Key, RunConfig};
use crate::error::{CliError, CliResult};
use crate::fft;
use crate::output::{Cell, Table};

pub const COMMON_KEYS: &[Key] = &[
    Key::value("config", None, "key=value file; flags override its values"),
    Key::value("out", None, "output file (default: $WHITKERN_OUT_DIR/<command>.<ext>, else stdout)"),
    Key::value("format", None, "csv or json"),
    Key::switch("no-timestamp", "omit the timestamp from the output header"),
];

pub const PARAM_KEYS: &[Key] = &[
    Key::value("z", Some("0.3+0.4i"), "parameter z, as re+imi or re"),
    Key::value("z-prime", Some("0.3-0.4i"), "parameter z'"),
    Key::value("a", None, "a = (z+z')/2; use with --mu instead of --z/--z-prime"),
    Key::value("mu", None, "mu = (z-z')/2, real or imaginary"),
];

pub const EVAL_KEYS: &[Key] = &[
    Key::value("block", Some("pp"), "pp, pm, mp, mm or all"),
    Key::value("x", Some("1"), "x values: list or lo:hi:n"),
    Key::value("y", Some("1"), "y values: list or lo:hi:n"),
];

pub const FINITE_KEYS: &[Key] = &[
    Key::value("input", None, "JSON file {n1, n2, entries: [[re, im], ...] row-major}"),
    Key::value("kernel", Some("l"), "whether the file holds L or K"),
    Key::switch("enumerate", "list every configuration, not just those of size <= 2"),
    Key::value("samples", Some("0"), "number of exact samples for the empirical column"),
    Key::value("seed", Some("0"), "sampler seed"),
];

pub const VERIFY_KEYS: &[Key] = &[
    Key::value("what", Some("resolvent"), "factorization, resolvent, commute or norms"),
    Key::value("nodes", Some("200"), "approximate core node count at level 0"),
    Key::value("xmin", Some("1e-3"), "left end of the core domain"),
    Key::value("xmax", Some("40"), "right end of the domain"),
    Key::value("levels", Some("3"), "refinement levels"),
    Key::value("tol", None, "pass threshold (default 1e-2, 1e-3 for commute, 0.02 for norms)"),
    Key::value("floor", Some("1e-12"), "residuals at or below this count as converged"),
    Key::value("mu2", Some("0.2i"), "second mu for commute"),
];

pub const SPECTRUM_KEYS: &[Key] = &[
    Key::value("m-list", Some("0.3,0.6,1.2"), "spectral parameters m"),
    Key::value("probes", Some("0.5,1,4"), "x probes for the transform identities"),
    Key::value("nodes", Some("200"), "approximate core node count"),
    Key::value("level", Some("2"), "ladder level of the grid"),
    Key::value("xmin", Some("1e-3"), "left end of the core domain"),
    Key::value("xmax", Some("40"), "right end of the domain"),
    Key::value("window", Some("0.5,5"), "support [lo, hi] of the Rayleigh test bump"),
];

pub const TAIL_KEYS: &[Key] = &[
    Key::value("u-grid", Some("-4:4:9"), "frequencies; snapped to the FFT grid"),
    Key::value("delta-grid", Some("-2:2:5"), "offsets for the profile rows"),
    Key::value("xi-list", Some("10,20,40"), "diagonal points xi = eta for the rescaled kernel"),
    Key::value("samples", Some("65536"), "FFT length"),
    Key::value("window", Some("60"), "half-width of the zeta window in units of 1/B"),
    Key::value("block", Some("all"), "pp, pm, mp, mm or all"),
];

pub const LIMIT_KEYS: &[Key] = &[
    Key::value("z0", Some("0.55"), "base parameter z0"),
    Key::value("z0-prime", Some("0.35"), "base parameter z0'"),
    Key::value("N-list", Some("8,16,32,64"), "even shifts N"),
    Key::value("xi", Some("1"), "first limit coordinate"),
    Key::value("eta", Some("2"), "second limit coordinate"),
    Key::value("block", Some("all"), "pp, pm, mp, mm or all"),
];

pub struct Subcommand {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
    pub takes_params: bool,
    pub default_format: &'static str,
    pub run: fn(&mut RunConfig) -> CliResult<Outcome>,
}

pub const SUBCOMMANDS: &[Subcommand] = &[
    Subcommand {
        name: "eval",
        about: "tabulate a kernel block on a grid",
        keys: EVAL_KEYS,
        takes_params: true,
        default_format: "csv",
        run: eval,
    },
    Subcommand {
        name: "finite",
        about: "weights and correlations of a finite J-Hermitian kernel",
        keys: FINITE_KEYS,
        takes_params: false,
        default_format: "csv",
        run: finite,
    },
    Subcommand {
        name: "verify",
        about: "operator identities under grid refinement",
        keys: VERIFY_KEYS,
        takes_params: true,
        default_format: "json",
        run: verify,
    },
    Subcommand {
        name: "spectrum",
        about: "K++ eigenvalues three ways and transform residuals",
        keys: SPECTRUM_KEYS,
        takes_params: true,
        default_format: "csv",
        run: spectrum,
    },
    Subcommand {
        name: "tail",
        about: "tail kernel profiles, symbols and convergence",
        keys: TAIL_KEYS,
        takes_params: true,
        default_format: "csv",
        run: tail,
    },
    Subcommand {
        name: "limit",
        about: "scaled kernels against the Bessel-type limit",
        keys: LIMIT_KEYS,
        takes_params: false,
        default_format: "csv",
        run: limit,
    },
];

pub struct Outcome {
    pub table: Table,
    /// Set when a verify run misses its tolerance.
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(table: Table) -> Self {
        Outcome { table, failure: None }
    }
}

fn policy() -> AccuracyPolicy {
    AccuracyPolicy::default()
}

/// Parameters from --a/--mu if either was set, else from --z/--z-prime. The
/// unused pair is dropped from the echoed config.
pub fn parameters(cfg: &mut RunConfig) -> CliResult<ParameterSet> {
    let by_a_mu = cfg.is_explicit("a") || cfg.is_explicit("mu");
    if by_a_mu {
        if cfg.is_explicit("z") || cfg.is_explicit("z-prime") {
            return Err(CliError::Usage("give either --z/--z-prime or --a/--mu, not both".into()));
        }
        let a = cfg.f64("a")?;
        let mu = cfg.complex("mu")?;
        cfg.remove("z");
        cfg.remove("z-prime");
        Ok(ParameterSet::from_a_mu(a, mu)?)
    } else {
        Ok(make_parameters(cfg.complex("z")?, cfg.complex("z-prime")?)?)
    }
}

fn blocks(cfg: &RunConfig) -> CliResult<Vec<BlockTag>> {
    let s = cfg.require("block")?;
    if s == "all" {
        return Ok(BlockTag::ALL.to_vec());
    }
    s.split(',')
        .map(|t| BlockTag::parse(t.trim()).ok_or_else(|| CliError::Parse(format!("--block: unknown block {t:?}"))))
        .collect()
}

fn positive(key: &str, xs: &[f64]) -> CliResult<()> {
    if let Some(x) = xs.iter().find(|&&x| !(x > 0.0)) {
        return Err(CliError::Validation(format!("--{key}: {x} is not positive")));
    }
    Ok(())
}

pub fn eval(cfg: &mut RunConfig) -> CliResult<Outcome> {
    let p = parameters(cfg)?;
    let tags = blocks(cfg)?;
    let (xs, ys) = (cfg.f64_list("x")?, cfg.f64_list("y")?);
    positive("x", &xs)?;
    positive("y", &ys)?;
    let machine = KernelMachine::new(p, policy())?;
    let mut t = Table::new(&["block", "x", "y", "value"]);
    for &tag in &tags {
        for &x in &xs {
            for &y in &ys {
                t.push(vec![tag.name().into(), x.into(), y.into(), machine.k_block(tag, x, y)?.into()]);
            }
        }
    }
    Ok(Outcome::ok(t))
}

/// Reads `{n1, n2, entries}` with entries row-major as [re, im] pairs or reals.
pub fn read_kernel(path: &Path) -> CliResult<FiniteKernel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let size = |k: &str| -> CliResult<usize> {
        v.get(k)
            .and_then(Value::as_u64)
            .map(|n| n as usize)
            .ok_or_else(|| CliError::Parse(format!("{}: missing integer field {k:?}", path.display())))
    };
    let (n1, n2) = (size("n1")?, size("n2")?);
    let entries = v
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Parse(format!("{}: missing array field \"entries\"", path.display())))?;
    let n = n1 + n2;
    if entries.len() != n * n {
        return Err(CliError::Validation(format!("expected {} entries for order {n}, found {}", n * n, entries.len())));
    }
    let vals: Vec<Complex64> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let bad = || CliError::Parse(format!("entry {i}: expected a number or [re, im]"));
            match e {
                Value::Number(x) => Ok(Complex64::new(x.as_f64().ok_or_else(bad)?, 0.0)),
                Value::Array(a) if a.len() == 2 => Ok(Complex64::new(
                    a[0].as_f64().ok_or_else(bad)?,
                    a[1].as_f64().ok_or_else(bad)?,
                )),
                _ => Err(bad()),
            }
        })
        .collect::<CliResult<_>>()?;
    Ok(FiniteKernel::new(CMatrix::from_row_slice(n, n, &vals), n1)?)
}

fn members(c: Configuration) -> String {
    c.members().iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn finite(cfg: &mut RunConfig) -> CliResult<Outcome> {
    let path = cfg.require("input")?.to_string();
    let given = read_kernel(Path::new(&path))?;
    let (l, k) = match cfg.require("kernel")? {
        "l" | "L" => {
            let k = k_from_l(&given)?;
            (given, k)
        }
        "k" | "K" => (l_from_k(&given)?, given),
        s => return Err(CliError::Parse(format!("--kernel: expected l or k, got {s:?}"))),
    };
    let table = weight_distribution(&l)?;
    let enumerate = cfg.switch("enumerate")?;
    let count = cfg.usize("samples")?;
    let mut hits = vec![0usize; 1 << l.order()];
    if count > 0 {
        for c in sample(&table, cfg.u64("seed")?, count) {
            hits[c.0 as usize] += 1;
        }
    }
    let mut t = Table::new(&[
        "mask",
        "members",
        "size",
        "probability",
        "correlation_re",
        "correlation_im",
        "inclusion",
        "empirical",
    ]);
    for mask in 0..1u32 << l.order() {
        let c = Configuration(mask);
        if !enumerate && c.len() > 2 {
            continue;
        }
        let rho = if mask == 0 { Complex64::new(1.0, 0.0) } else { correlation(&k, &c.members())? };
        let empirical = if count > 0 {
            let n: usize = hits.iter().enumerate().filter(|(m, _)| *m as u32 & mask == mask).map(|(_, h)| h).sum();
            Cell::Num(n as f64 / count as f64)
        } else {
            Cell::Empty
        };
        t.push(vec![
            (mask as usize).into(),
            members(c).into(),
            c.len().into(),
            table.probability(c).into(),
            rho.re.into(),
            rho.im.into(),
            table.inclusion_probability(c).into(),
            empirical,
        ]);
    }
    cfg.set("normalizer", format!("{:?}", table.normalizer()));
    Ok(Outcome::ok(t))
}

fn residual_rows(t: &mut Table, r: &ResidualReport) {
    for l in &r.levels {
        for (name, v) in &l.residuals {
            t.push(vec![l.level.into(), l.nodes.into(), (*name).into(), (*v).into()]);
        }
    }
}

fn report_failure(r: &ResidualReport, tol: f64, floor: f64) -> Option<String> {
    let last = r.levels.len().checked_sub(1)?;
    let mut why = Vec::new();
    for n in r.names() {
        if !r.decreasing_to_floor(n, floor) {
            why.push(format!("{n} not decreasing: {:?}", r.series(n)));
        }
    }
    let worst = r.worst_at(last);
    if !(worst <= tol) {
        why.push(format!("final residual {worst:e} > {tol:e}"));
    }
    (!why.is_empty()).then(|| why.join("; "))
}

pub fn verify(cfg: &mut RunConfig) -> CliResult<Outcome> {
    let p = parameters(cfg)?;
    let what = cfg.require("what")?.to_string();
    let (nodes, levels) = (cfg.usize("nodes")?, cfg.usize("levels")?);
    let (xmin, xmax, floor) = (cfg.f64("xmin")?, cfg.f64("xmax")?, cfg.f64("floor")?);
    if levels == 0 {
        return Err(CliError::Validation("--levels must be at least 1".into()));
    }
    let default_tol = match what.as_str() {
        "commute" => 1e-3,
        "norms" => 0.02,
        _ => 1e-2,
    };
    let tol = if cfg.get("tol").is_some() { cfg.f64("tol")? } else { default_tol };
    cfg.set("tol", format!("{tol:?}"));
    if what != "commute" {
        cfg.remove("mu2");
    }
    let mut t = Table::new(&["level", "nodes", "block", "residual"]);
    let failure = match what.as_str() {
        "resolvent" | "factorization" => {
            let grids = ladder(xmin, xmax, nodes, levels)?;
            let r = if what == "resolvent" {
                verify_resolvent(&p, &policy(), &grids)?
            } else {
                verify_factorization(&p, &policy(), &grids)?
            };
            residual_rows(&mut t, &r);
            report_failure(&r, tol, floor)
        }
        "commute" => {
            let mu2 = cfg.complex("mu2")?;
            let mut last = None;
            for level in 0..levels {
                let g = QuadratureGrid::ladder_level(xmin, xmax, nodes, level)?;
                let c = commutation_check(p.a(), p.mu(), mu2, &policy(), &g)?;
                t.push(vec![level.into(), g.len().into(), "full".into(), c.full.into()]);
                t.push(vec![level.into(), g.len().into(), "pp".into(), c.pp.into()]);
                last = Some(c.full.max(c.pp));
            }
            last.filter(|w| !(*w <= tol)).map(|w| format!("final commutator {w:e} > {tol:e}"))
        }
        "norms" => {
            // the top of the spectrum needs a long domain in ln x, so the
            // grids reach far below --xmin: 1e-10, 1e-20, ... and 1e-40 last
            cfg.remove("nodes");
            cfg.remove("xmin");
            let mut gaps = Vec::new();
            let mut sigmas = Vec::new();
            for level in 0..levels {
                let lo = if level + 1 >= levels { 1e-40 } else { 10f64.powi(-10 * (level as i32 + 1)) };
                let g = QuadratureGrid::log_panels(lo, xmax, 10)?;
                let (s, bound) = norm_law(&p, &g)?;
                let gap = (bound - s) / bound;
                t.push(vec![level.into(), g.len().into(), "A".into(), gap.into()]);
                gaps.push(gap);
                sigmas.push(s);
            }
            let rising = sigmas.windows(2).all(|w| w[1] > w[0]);
            let below = gaps.iter().all(|&g| g > 0.0);
            let last = *gaps.last().unwrap();
            if rising && below && last <= tol {
                None
            } else {
                Some(format!("norm deficits {gaps:?}: rising={rising} below={below} tol={tol:e}"))
            }
        }
        s => return Err(CliError::Parse(format!("--what: expected factorization, resolvent, commute or norms, got {s:?}"))),
    };
    Ok(Outcome { table: t, failure })
}

pub fn spectrum(cfg: &mut RunConfig) -> CliResult<Outcome> {
    let p = parameters(cfg)?;
    let ms = cfg.f64_list("m-list")?;
    let probes = cfg.f64_list("probes")?;
    positive("probes", &probes)?;
    let w = cfg.f64_list("window")?;
    if w.len() != 2 || !(0.0 < w[0] && w[0] < w[1]) {
        return Err(CliError::Validation("--window needs lo,hi with 0 < lo < hi".into()));
    }
    let g = QuadratureGrid::ladder_level(cfg.f64("xmin")?, cfg.f64("xmax")?, cfg.usize("nodes")?, cfg.usize("level")?)?;
    cfg.set("grid_nodes", g.len().to_string());
    let rows = kpp_eigen_three_ways(&p, &ms, &g, Bump::new(w[0], w[1]), &policy())?;
    let mut t = Table::new(&[
        "m",
        "lambda_closed",
        "lambda_resolvent",
        "lambda_rayleigh",
        "transform_a_rel",
        "transform_b_rel",
    ]);
    for r in rows {
        let ta = transform_identity(Transform::A, &p, r.m, &probes, &g, &policy())?.max_rel();
        let tb = transform_identity(Transform::B, &p, r.m, &probes, &g, &policy())?.max_rel();
        t.push(vec![r.m.into(), r.closed.into(), r.resolvent.into(), r.rayleigh.into(), ta.into(), tb.into()]);
    }
    Ok(Outcome::ok(t))
}

pub fn tail(cfg: &mut RunConfig) -> CliResult<Outcome> {
    let p = parameters(cfg)?;
    let tags = blocks(cfg)?;
    let us = cfg.f64_list("u-grid")?;
    let deltas = cfg.f64_list("delta-grid")?;
    let xis = cfg.f64_list("xi-list")?;
    let samples = cfg.usize("samples")?;
    let window = cfg.f64("window")?;
    if samples < 2 || !samples.is_multiple_of(2) {
        return Err(CliError::Validation("--samples must be even and at least 2".into()));
    }
    if !(window > 0.0) {
        return Err(CliError::Validation("--window must be positive".into()));
    }
    let tk = TailKernel::new(p)?;
    let machine = KernelMachine::new(p, policy())?;
    cfg.set("rate_b", format!("{:?}", tk.constants().rate_b));
    cfg.set("c_density", format!("{:?}", tk.constants().c_density));
    let mut t = Table::new(&["kind", "block", "point", "re", "im", "ref_re", "ref_im", "abs_error"]);
    let e = || Cell::Empty;
    for &tag in &tags {
        for &d in &deltas {
            t.push(vec!["profile".into(), tag.name().into(), d.into(), tk.block(tag, d).into(), 0.0.into(), e(), e(), e()]);
        }
        let bins = fft::tail_symbols(&tk, tag, window, samples);
        for &u in &us {
            let b = fft::nearest_bin(&bins, u);
            let want = fft::symbol_entry(&tk, tag, b.u);
            t.push(vec![
                "symbol".into(),
                tag.name().into(),
                b.u.into(),
                b.value.re.into(),
                b.value.im.into(),
                want.re.into(),
                want.im.into(),
                (b.value - want).norm().into(),
            ]);
        }
        let pts: Vec<(f64, f64)> = xis.iter().map(|&x| (x, x)).collect();
        for r in tail_convergence(&machine, tag, &pts)? {
            t.push(vec![
                "rescaled".into(),
                tag.name().into(),
                r.xi.into(),
                r.rescaled.into(),
                0.0.into(),
                r.tail.into(),
                0.0.into(),
                r.abs_error.into(),
            ]);
        }
    }
    Ok(Outcome::ok(t))
}

pub fn limit(cfg: &mut RunConfig) -> CliResult<Outcome> {
    let base = make_parameters(cfg.complex("z0")?, cfg.complex("z0-prime")?)?;
    let ns = cfg.i64_list("N-list")?;
    for &n in &ns {
        LimitParameters::from_base(base, n)?;
    }
    let (xi, eta) = (cfg.f64("xi")?, cfg.f64("eta")?);
    positive("xi", &[xi])?;
    positive("eta", &[eta])?;
    let mut t = Table::new(&["block", "N", "scaled", "limit", "abs_error", "ratio"]);
    for tag in blocks(cfg)? {
        let rows = scaled_convergence(&base, &ns, tag, xi, eta, policy())?;
        let mut prev: Option<f64> = None;
        for r in rows {
            let ratio = prev.map(|p| Cell::Num(r.abs_error / p)).unwrap_or(Cell::Empty);
            t.push(vec![
                tag.name().into(),
                r.n.into(),
                r.scaled.into(),
                r.limit.into(),
                r.abs_error.into(),
                ratio,
            ]);
            prev = Some(r.abs_error);
        }
    }
    Ok(Outcome::ok(t))
}
