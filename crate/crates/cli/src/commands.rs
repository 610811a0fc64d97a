use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use gapforge_core::avgop::{gap_at_scale_with, GapOptions, WeightNorm};
use gapforge_core::bounds::{self, BoundReport};
use gapforge_core::constants::{self, BoundParams, TableRow};
use gapforge_core::gates::{self, GateSet};
use gapforge_core::weightlat::{enumerate_weights, IrrepMeta};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Cli, Command, Failure, Format, NetVariant};

/// Fully resolved invocation, echoed in every JSON document.
#[derive(Debug, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub d: Option<usize>,
    pub t: Option<u64>,
    pub eps0: Option<f64>,
    pub eps: Option<f64>,
    pub t_override: Option<u64>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub format: Format,
    pub output: Option<PathBuf>,
}

struct Rendered {
    json: Value,
    csv: Option<String>,
    pretty: String,
}

type Outcome = Result<Rendered, Failure>;

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let mut config = RunConfig {
        threads: rayon::current_num_threads(),
        format: cli.global.format,
        output: cli.global.output.clone(),
        ..RunConfig::default()
    };
    let progress = ProgressWriter { quiet: cli.global.quiet, lock: Mutex::new(()) };
    let rendered = match &cli.command {
        Command::Constants { d, eps0, table } => {
            config.command = "constants".into();
            config.d = *d;
            config.eps0 = *eps0;
            constants_cmd(*d, *eps0, *table)?
        }
        Command::Weights { d, t, count_only } => {
            config.command = "weights".into();
            config.d = Some(*d);
            config.t = Some(*t as u64);
            weights_cmd(*d, *t, *count_only)?
        }
        Command::Gap { gates, t, per_irrep, auto_symmetrize, dim_cap, repair } => {
            config.command = "gap".into();
            config.inputs.push(gates.clone());
            config.t = Some(*t as u64);
            let set = load(gates, *repair)?;
            config.d = Some(set.d());
            let mut opts = GapOptions { auto_symmetrize: *auto_symmetrize, ..GapOptions::default() };
            if let Some(cap) = dim_cap {
                opts.dim_cap = *cap;
            }
            gap_cmd(&set, *t, *per_irrep, &opts, &progress)?
        }
        Command::Gtzero { gates, eps0, t_override, repair } => {
            config.command = "gtzero".into();
            config.inputs.push(gates.clone());
            config.eps0 = Some(*eps0);
            config.t_override = *t_override;
            let set = load(gates, *repair)?;
            config.d = Some(set.d());
            gtzero_cmd(&set, *eps0, *t_override, &progress)?
        }
        Command::Bound { gates, eps0, t, t_override, repair } => {
            config.command = "bound".into();
            config.inputs.push(gates.clone());
            config.eps0 = Some(*eps0);
            config.t = Some(*t);
            config.t_override = *t_override;
            let set = load(gates, *repair)?;
            config.d = Some(set.d());
            bound_cmd(&set, *eps0, *t, *t_override, &progress)?
        }
        Command::NetLength { d, eps, gap, variant } => {
            config.command = "net-length".into();
            config.d = Some(*d);
            config.eps = Some(*eps);
            net_length_cmd(*d, *eps, *gap, *variant)?
        }
        Command::NetEmpirical { gates, len, eps, samples, seed, word_cap, repair } => {
            config.command = "net-empirical".into();
            config.inputs.push(gates.clone());
            config.eps = Some(*eps);
            config.seed = Some(*seed);
            let set = load(gates, *repair)?;
            config.d = Some(set.d());
            let est = gates::empirical_net_capped(&set, *len, *eps, *samples, *seed, *word_cap)?;
            let pretty = format!(
                "length {}  eps {}  words {}  samples {}\ncovered fraction {:.6}\nmax nearest-word distance {:.6}\n",
                est.length, est.eps, est.words, est.samples, est.covered_fraction, est.max_observed_distance
            );
            let csv = format!(
                "length,eps,words,samples,covered_fraction,max_observed_distance\n{},{},{},{},{},{}\n",
                est.length, est.eps, est.words, est.samples, est.covered_fraction, est.max_observed_distance
            );
            Rendered { json: to_value(&est), csv: Some(csv), pretty }
        }
        Command::RandomGates { d, k, seed } => {
            config.command = "random-gates".into();
            config.d = Some(*d);
            config.seed = Some(*seed);
            if *d < 2 || *k < 1 {
                return Err(Failure::usage("random-gates needs d >= 2 and k >= 1"));
            }
            let set = gates::haar_random_gateset(*d, *k, *seed);
            let mut doc: Value = serde_json::from_str(&set.to_json()).expect("gate set JSON");
            doc["version"] = json!(gapforge_core::VERSION);
            doc["config"] = to_value(&config);
            let text = serde_json::to_string_pretty(&doc).expect("serialisable");
            return emit(&config, format!("{text}\n"));
        }
    };
    let text = match config.format {
        Format::Json => {
            let doc = json!({ "version": gapforge_core::VERSION, "config": to_value(&config), "result": rendered.json });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("serialisable"))
        }
        Format::Csv => rendered
            .csv
            .ok_or_else(|| Failure::usage(format!("--format csv is not available for {}", config.command)))?,
        Format::Pretty => rendered.pretty,
    };
    emit(&config, text)
}

fn emit(config: &RunConfig, text: String) -> Result<(), Failure> {
    match &config.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::io(e.to_string()))
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serialisable")
}

fn load(path: &Path, repair: bool) -> Result<GateSet, Failure> {
    gates::load_gateset(path, repair).map_err(|e| {
        let f = Failure::from(e);
        Failure { message: format!("{}: {}", path.display(), f.message), ..f }
    })
}

/// Serialised NDJSON progress on standard error.
struct ProgressWriter {
    quiet: bool,
    lock: Mutex<()>,
}

impl ProgressWriter {
    fn record(&self, wn: &WeightNorm) {
        if self.quiet {
            return;
        }
        let line = json!({
            "event": "block",
            "weight": wn.weight,
            "dim": wn.dim,
            "norm": wn.norm,
            "iterations": wn.iterations,
            "method": wn.method,
        });
        let _guard = self.lock.lock().unwrap_or_else(|p| p.into_inner());
        let _ = writeln!(std::io::stderr().lock(), "{line}");
    }
}

fn constants_cmd(d: Option<usize>, eps0: Option<f64>, table: bool) -> Outcome {
    if table {
        if eps0.is_some() {
            return Err(Failure::usage("--table emits fixed grids; drop --eps0"));
        }
        let ds: Vec<usize> = match d {
            Some(d) if (2..=4).contains(&d) => vec![d],
            Some(d) => return Err(Failure::usage(format!("reference tables exist for d = 2, 3, 4, not {d}"))),
            None => vec![2, 3, 4],
        };
        let rows = constants::emit_tables(&ds, None)?;
        let json_rows: Vec<Value> = rows
            .iter()
            .map(|r| json!({ "d": r.d, "eps0": r.eps0, "t0": r.t0, "alpha": r.alpha, "alpha_sci": r.alpha_sci(), "beta": r.beta }))
            .collect();
        return Ok(Rendered { json: json!({ "rows": json_rows }), csv: Some(constants::tables_csv(&rows)), pretty: pretty_table(&rows) });
    }
    let (Some(d), Some(eps0)) = (d, eps0) else {
        return Err(Failure::usage("constants needs --d and --eps0, or --table"));
    };
    let p = BoundParams::new(d, eps0)?;
    let tau = constants::tau(eps0, d)?;
    let json = json!({ "params": p, "tau": tau, "eps0_min": constants::eps0_min(d), "alpha_sci": constants::format_sci3(p.alpha) });
    let row = TableRow { d, eps0, t0: p.t0, alpha: p.alpha, beta: p.beta };
    let pretty = format!(
        "d = {d}, eps0 = {eps0}\nt0    = {}\nalpha = {}\nbeta  = {}\ntau   = {tau:.6}\nc     = {:.6}\n",
        p.t0,
        row.alpha_sci(),
        row.beta_fixed(),
        p.c
    );
    Ok(Rendered { json, csv: Some(constants::tables_csv(&[row])), pretty })
}

fn pretty_table(rows: &[TableRow]) -> String {
    let mut out = String::new();
    let mut last_d = 0;
    for r in rows {
        if r.d != last_d {
            let _ = writeln!(out, "{}d = {}\n{:>8}  {:>8}  {:>9}  {:>5}", if last_d == 0 { "" } else { "\n" }, r.d, "eps0", "t0", "alpha", "beta");
            last_d = r.d;
        }
        let _ = writeln!(out, "{:>8.4}  {:>8}  {:>9}  {:>5}", r.eps0, r.t0, r.alpha_sci(), r.beta_fixed());
    }
    out
}

fn weights_cmd(d: usize, t: usize, count_only: bool) -> Outcome {
    let weights = enumerate_weights(d, t)?;
    if count_only {
        let n = weights.len();
        return Ok(Rendered { json: json!({ "d": d, "t": t, "count": n }), csv: Some(format!("d,t,count\n{d},{t},{n}\n")), pretty: format!("{n}\n") });
    }
    let metas = weights.into_iter().map(IrrepMeta::new).collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("weight,dim,fs_indicator,one_norm\n");
    let mut pretty = String::new();
    for m in &metas {
        let _ = writeln!(csv, "\"{}\",{},{},{}", m.weight, m.dim, m.fs_indicator, m.one_norm);
        let kind = if m.fs_indicator == 1 { "real" } else { "complex" };
        let _ = writeln!(pretty, "{:<24} dim {:<10} {kind}", m.weight.to_string(), m.dim);
    }
    Ok(Rendered { json: json!({ "d": d, "t": t, "count": metas.len(), "weights": metas }), csv: Some(csv), pretty })
}

fn gap_cmd(set: &GateSet, t: usize, per_irrep: bool, opts: &GapOptions, progress: &ProgressWriter) -> Outcome {
    let report = gap_at_scale_with(set, t, opts, Some(&|wn: &WeightNorm| progress.record(wn)))?;
    let mut json = json!({ "t": report.t, "gap": report.gap, "max_norm": report.max_norm(), "worst_weight": report.worst_weight });
    let csv = if per_irrep {
        json["per_weight_norms"] = to_value(&report.per_weight_norms);
        let mut csv = String::from("weight,dim,norm,iterations,method\n");
        for wn in &report.per_weight_norms {
            let _ = writeln!(csv, "\"{}\",{},{},{},{}", wn.weight, wn.dim, wn.norm, wn.iterations, to_value(&wn.method).as_str().unwrap_or(""));
        }
        csv
    } else {
        format!("t,gap,worst_weight\n{},{},\"{}\"\n", report.t, report.gap, report.worst_weight)
    };
    let mut pretty = format!("gap_{} = {:.12}\nworst block {}\n", report.t, report.gap, report.worst_weight);
    if per_irrep {
        for wn in &report.per_weight_norms {
            let _ = writeln!(pretty, "  {:<20} dim {:<8} norm {:.12}", wn.weight.to_string(), wn.dim, wn.norm);
        }
    }
    Ok(Rendered { json, csv: Some(csv), pretty })
}

fn gtzero_cmd(set: &GateSet, eps0: f64, t_override: Option<u64>, progress: &ProgressWriter) -> Outcome {
    let params = BoundParams::new(set.d(), eps0)?;
    let scale = t_override.unwrap_or(params.t0);
    let pairs = bounds::check_pair_universality(set)?;
    let (g, table) =
        bounds::g_t0_at_scale(set, scale, &GapOptions::default(), Some(&|wn: &WeightNorm| progress.record(wn)))?;
    let json = json!({
        "g_t0": g,
        "scale": scale,
        "t0": params.t0,
        "below_theorem_scale": scale < params.t0,
        "subset_gaps": table,
        "pair_universality": pairs,
    });
    let mut csv = String::from("m,min_gap,worst_subset,subsets\n");
    let mut pretty = format!("g = {g:.12} at scale {scale} (t0 = {})\n", params.t0);
    for s in &table.per_m {
        let subset: Vec<String> = s.worst_subset.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(csv, "{},{},\"{}\",{}", s.m, s.min_gap, subset.join(" "), s.subsets);
        let _ = writeln!(pretty, "  m = {}  min gap {:.12}  removed {:?}", s.m, s.min_gap, s.worst_subset);
    }
    if scale < params.t0 {
        pretty.push_str("below theorem scale: not a certified input to the bound\n");
    }
    Ok(Rendered { json, csv: Some(csv), pretty })
}

fn bound_cmd(set: &GateSet, eps0: f64, t: u64, t_override: Option<u64>, progress: &ProgressWriter) -> Outcome {
    let report: BoundReport = bounds::main_lower_bound_with(
        set,
        eps0,
        t,
        t_override,
        &GapOptions::default(),
        Some(&|wn: &WeightNorm| progress.record(wn)),
    )?;
    let p = &report.params;
    let csv = format!(
        "d,eps0,t,t0,scale,g_t0,alpha,beta,c,lower_bound,below_theorem_scale\n{},{},{},{},{},{},{},{},{},{},{}\n",
        p.d, p.eps0, report.t, p.t0, report.subset_gaps.t0, report.g_t0, p.alpha, p.beta, p.c, report.lower_bound, report.below_theorem_scale
    );
    let mut pretty = format!(
        "gap_{}(S) >= {:.6e}\n  alpha {:.6e}  beta {:.6}  c {:.6}  t0 {}\n  g {:.12} at scale {}\n",
        report.t, report.lower_bound, p.alpha, p.beta, p.c, p.t0, report.g_t0, report.subset_gaps.t0
    );
    if report.below_theorem_scale {
        pretty.push_str("  below theorem scale: desk-scale estimate, not a certified bound\n");
    }
    Ok(Rendered { json: to_value(&report), csv: Some(csv), pretty })
}

fn net_length_cmd(d: usize, eps: f64, gap: f64, variant: NetVariant) -> Outcome {
    match variant {
        NetVariant::Thm2 => {
            let c = constants::theorem2_constants(d, gap)?;
            let len = bounds::net_length_thm2(d, gap, eps)?;
            let json = json!({ "variant": variant, "length": len, "slope": c.slope, "B": c.b, "C_V": c.c_v });
            let csv = format!("variant,d,eps,gap,length\nthm2,{d},{eps},{gap},{len}\n");
            Ok(Rendered { json, csv: Some(csv), pretty: format!("l >= {len:.6}\n") })
        }
        NetVariant::Scale => {
            let (len, t_req) = bounds::net_length_scale_bound(d, gap, eps)?;
            let json = json!({ "variant": variant, "length": len, "required_t": t_req });
            let csv = format!("variant,d,eps,gap,length,required_t\nscale,{d},{eps},{gap},{len},{t_req}\n");
            Ok(Rendered { json, csv: Some(csv), pretty: format!("l >= {len:.6}  with gap measured at t >= {t_req}\n") })
        }
    }
}
