use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anytime_ppm::channel::DmcSpec;
use anytime_ppm::montecarlo::{
    fit_exponent, fit_exponent_from, run_anytime_curve, run_block_baseline,
    run_feedback_bandwidth, run_genie_curve, ErrorCurve, ExponentFit,
};
use anytime_ppm::theory::{
    converse_exponent, exact_block_error, exponent_eb, exponent_rate, ChannelSpec,
};
use anytime_ppm::unitcost::{capacity_per_unit_cost, run_cost_curve, threshold_eb_cost};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    AnytimeArgs, BlockArgs, Command, CostArgs, FeedbackArgs, FitArgs, Format, GenieArgs,
    OutputArgs, RunArgs, SnrArgs, TheoryArgs, OUT_DIR_ENV,
};
use crate::config::Entries;
use crate::CliError;

/// Everything needed to reproduce a run, plus what it produced.
#[derive(Serialize)]
struct RunRecord<'a, P: Serialize> {
    command: &'static str,
    argv: &'a [String],
    config: Vec<(String, String)>,
    params: &'a P,
    resolved: Value,
    result: Value,
    fit: Option<ExponentFit>,
    wall_time_seconds: f64,
}

/// Rendered output of one command.
struct Output {
    csv: String,
    resolved: Value,
    result: Value,
    fit: Option<ExponentFit>,
}

pub struct Invocation {
    pub argv: Vec<String>,
    pub config: Entries,
}

pub fn run(command: Command, inv: &Invocation) -> Result<(), CliError> {
    let name = command.name();
    match &command {
        Command::Theory(a) => finish(name, inv, a, &a.out, Instant::now(), theory(a)),
        Command::SimGenie(a) => simulate(name, inv, a, &a.run, || genie(a)),
        Command::SimAnytime(a) => simulate(name, inv, a, &a.run, || anytime(a)),
        Command::SimBlock(a) => simulate(name, inv, a, &a.run, || block(a)),
        Command::SimFeedback(a) => simulate(name, inv, a, &a.run, || feedback(a)),
        Command::SimCost(a) => simulate(name, inv, a, &a.run, || cost(a)),
        Command::Fit(a) => finish(name, inv, a, &a.out, Instant::now(), fit(a)),
    }
}

fn simulate<P: Serialize>(
    name: &'static str,
    inv: &Invocation,
    params: &P,
    run: &RunArgs,
    body: impl FnOnce() -> Result<Output, CliError> + Send,
) -> Result<(), CliError> {
    let start = Instant::now();
    let out = match run.workers {
        Some(0) => return Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?
            .install(body),
        None => body(),
    };
    finish(name, inv, params, &run.out, start, out)
}

fn finish<P: Serialize>(
    name: &'static str,
    inv: &Invocation,
    params: &P,
    out_args: &OutputArgs,
    start: Instant,
    out: Result<Output, CliError>,
) -> Result<(), CliError> {
    let out = out?;
    let text = match out_args.format {
        Format::Csv => out.csv,
        Format::Json => {
            let record = RunRecord {
                command: name,
                argv: &inv.argv,
                config: inv.config.clone(),
                params,
                resolved: out.resolved,
                result: out.result,
                fit: out.fit,
                wall_time_seconds: start.elapsed().as_secs_f64(),
            };
            serde_json::to_string_pretty(&record).expect("record serializes") + "\n"
        }
    };
    let target = out_args.output.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .map(|dir| PathBuf::from(dir).join(format!("{name}.{}", out_args.format.extension())))
    });
    match target {
        Some(path) => fs::write(&path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn channel(snr: &SnrArgs) -> Result<ChannelSpec, CliError> {
    let spec = match (snr.eb, snr.rate_fraction) {
        (Some(eb), None) => ChannelSpec::from_eb(eb)?,
        (None, Some(r)) => ChannelSpec::from_rate_fraction(r)?,
        _ => return Err(CliError::Usage("give exactly one of --eb and --rate-fraction".into())),
    };
    Ok(spec)
}

fn channel_json(spec: &ChannelSpec) -> Value {
    json!({ "eb": spec.eb(), "rate_fraction": spec.rate_fraction() })
}

fn curve_output(curve: ErrorCurve, resolved: Value) -> Result<Output, CliError> {
    Ok(Output {
        csv: curve.to_csv_string()?,
        fit: fit_exponent(&curve).ok(),
        result: serde_json::to_value(&curve).expect("curve serializes"),
        resolved,
    })
}

fn genie(a: &GenieArgs) -> Result<Output, CliError> {
    let spec = channel(&a.snr)?;
    let curve = run_genie_curve(&spec, &a.delays.0, a.run.trials, a.run.seed)?;
    curve_output(curve, channel_json(&spec))
}

fn anytime(a: &AnytimeArgs) -> Result<Output, CliError> {
    let spec = channel(&a.snr)?;
    let curve = run_anytime_curve(&spec, a.bit_index, &a.delays.0, a.run.trials, a.run.seed)?;
    curve_output(curve, channel_json(&spec))
}

fn block(a: &BlockArgs) -> Result<Output, CliError> {
    let spec = channel(&a.snr)?;
    let est = run_block_baseline(a.messages, &spec, a.run.trials, a.run.seed)?;
    let exact = exact_block_error(a.messages, spec.eb())?;
    let csv = format!(
        "messages,eb,trials,errors,p_hat,ci_lo,ci_hi,exact\n{},{},{},{},{},{},{},{}\n",
        est.messages, est.eb, est.trials, est.errors, est.p_hat, est.ci_lo, est.ci_hi, exact
    );
    let mut result = serde_json::to_value(est).expect("estimate serializes");
    result["exact"] = json!(exact);
    Ok(Output {
        csv,
        resolved: channel_json(&spec),
        result,
        fit: None,
    })
}

fn feedback(a: &FeedbackArgs) -> Result<Output, CliError> {
    let spec = channel(&a.snr)?;
    let report = run_feedback_bandwidth(&spec, a.length, a.run.trials, a.run.seed)?;
    Ok(Output {
        csv: report.histogram.to_csv_string()?,
        resolved: channel_json(&spec),
        fit: report.tail_fit,
        result: serde_json::to_value(&report).expect("report serializes"),
    })
}

fn cost(a: &CostArgs) -> Result<Output, CliError> {
    let dmc = DmcSpec::load(&a.dmc)?;
    let eb_cost = match (a.cost.eb_cost, a.cost.threshold_multiple) {
        (Some(e), None) => e,
        (None, Some(k)) => k * threshold_eb_cost(&dmc)?,
        _ => return Err(CliError::Usage("give exactly one of --eb-cost and --threshold-multiple".into())),
    };
    let curve = run_cost_curve(&dmc, eb_cost, a.burst_length, &a.delays.0, a.run.trials, a.run.seed)?;
    let resolved = json!({
        "eb_cost": eb_cost,
        "capacity_per_unit_cost": capacity_per_unit_cost(&dmc).ok(),
        "dmc": dmc,
    });
    curve_output(curve, resolved)
}

fn theory(a: &TheoryArgs) -> Result<Output, CliError> {
    let mut rows: Vec<Value> = Vec::new();
    let csv = if let Some(g) = a.grid.eb_grid {
        let mut csv = String::from("eb,eb_over_ln2,rate_fraction,exponent_eb\n");
        for eb in g.geometric().map_err(CliError::Usage)? {
            let spec = ChannelSpec::from_eb(eb)?;
            let e = exponent_eb(eb)?.nats();
            let ratio = eb / std::f64::consts::LN_2;
            csv += &format!("{eb},{ratio},{},{e}\n", spec.rate_fraction());
            rows.push(json!({ "eb": eb, "eb_over_ln2": ratio, "rate_fraction": spec.rate_fraction(), "exponent_eb": e }));
        }
        csv
    } else {
        let g = a.grid.rate_grid.expect("clap enforces one grid");
        let mut csv = String::from("rate,rate_fraction,exponent_rate,converse_exponent\n");
        for r in g.linear() {
            let e = exponent_rate(r, a.c_inf)?.nats();
            let conv = (r > 0.0 && r < a.c_inf)
                .then(|| converse_exponent(r, a.c_inf).map(|v| v.nats()))
                .transpose()?;
            let conv_text = conv.map_or(String::new(), |v| v.to_string());
            csv += &format!("{r},{},{e},{conv_text}\n", r / a.c_inf);
            rows.push(json!({ "rate": r, "rate_fraction": r / a.c_inf, "exponent_rate": e, "converse_exponent": conv }));
        }
        csv
    };
    Ok(Output {
        csv,
        resolved: json!({ "c_inf": a.c_inf }),
        result: Value::Array(rows),
        fit: None,
    })
}

fn fit(a: &FitArgs) -> Result<Output, CliError> {
    let curve = ErrorCurve::read_csv(fs::File::open(&a.curve)?)?;
    let f = fit_exponent_from(&curve, a.from_d)?;
    Ok(Output {
        csv: format!(
            "slope,intercept,stderr,points_used\n{},{},{},{}\n",
            f.slope, f.intercept, f.stderr, f.points_used
        ),
        resolved: json!({ "points": curve.points.len() }),
        result: serde_json::to_value(f).expect("fit serializes"),
        fit: Some(f),
    })
}
