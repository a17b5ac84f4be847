use std::collections::BTreeSet;
use std::path::Path;

use serde_json::{json, Value};
use walkident::closed_form::{
    chain2d_barrier_prob, chain2d_identity_terms, chain2d_point_prob, chain_identity_terms,
    gosper_terms, simple1d_point_prob, simple1d_total, walk2d_distribution, walk2d_identity_total,
    ChainEvaluator, CoefficientMode, GosperParams,
};
use walkident::oracle::{
    chain_snapshot, gosper_race_snapshot, mc_estimate, walk2d_snapshot, McEstimate, Snapshot,
};
use walkident::{
    check_identity, BarrierSpec, ChainSpec, IdentityId, IdentityParams, IdentityReport,
    LatticePoint, MRange, Model, ModelFile, MoveRule, Probability, Rational, StateLabel, SweepGrid,
    Walk2DSpec,
};

use crate::render::{csv_text, emit, Output};
use crate::{ModeArg, ModelArgs, ModelKind, OutArgs};

type CmdResult = Result<u8, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn mode(args: &ModelArgs) -> CoefficientMode {
    match args.mode {
        ModeArg::Literal => CoefficientMode::Literal,
        ModeArg::Corrected => CoefficientMode::Corrected,
    }
}

fn parse_prob(text: &str) -> Result<Probability, String> {
    text.trim()
        .parse()
        .map_err(|e| format!("probability {text:?}: {e}"))
}

fn prob_list(args: &ModelArgs) -> Result<Vec<Probability>, String> {
    let text = args.p.as_deref().ok_or("missing --p")?;
    text.split(',').map(parse_prob).collect()
}

fn single_prob(args: &ModelArgs) -> Result<Probability, String> {
    let mut list = prob_list(args)?;
    if list.len() != 1 {
        return Err("--p takes a single probability here".into());
    }
    Ok(list.remove(0))
}

/// Comma-separated integers and inclusive ranges `a..b`.
fn int_list(text: &str, flag: &str) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let bad = || format!("--{flag}: expected a non-negative integer or range, got {part:?}");
        match part.split_once("..") {
            Some((lo, hi)) => {
                let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
                let hi: u32 = hi
                    .trim()
                    .trim_start_matches('=')
                    .parse()
                    .map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                out.extend(lo..=hi);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

fn single_int(text: Option<&str>, flag: &str) -> Result<u32, String> {
    let text = text.ok_or_else(|| format!("missing --{flag}"))?;
    match int_list(text, flag)?.as_slice() {
        [x] if !text.contains("..") => Ok(*x),
        _ => Err(format!("--{flag} takes a single value here")),
    }
}

fn n_arg(args: &ModelArgs) -> Result<u32, String> {
    single_int(args.n.as_deref(), "n")
}

fn m_arg(args: &ModelArgs) -> Result<u32, String> {
    single_int(args.m.as_deref(), "m")
}

fn cross_probs(args: &ModelArgs) -> Result<[Probability; 4], String> {
    if args.uniform {
        let q = Probability::ratio(1, 4);
        return Ok([q.clone(), q.clone(), q.clone(), q]);
    }
    let slots = [&args.p1, &args.p2, &args.p3, &args.p4];
    if slots.iter().all(|s| s.is_none()) {
        return Err("give --uniform or all of --p1 --p2 --p3 --p4".into());
    }
    let mut out = Vec::with_capacity(4);
    for (i, slot) in slots.iter().enumerate() {
        let text = slot
            .as_deref()
            .ok_or_else(|| format!("missing --p{}", i + 1))?;
        out.push(parse_prob(text)?);
    }
    Ok(out.try_into().expect("four slots"))
}

fn load_model(args: &ModelArgs) -> Result<Option<Model>, String> {
    match &args.model {
        None => Ok(None),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            ModelFile::from_json(&text).map(Some).map_err(err)
        }
    }
}

/// A chain from `--model` or from `--n`/`--p`; a single probability is
/// repeated over `levels` slots.
fn chain_spec(args: &ModelArgs, levels: Option<u32>) -> Result<ChainSpec, String> {
    let spec = match load_model(args)? {
        Some(Model::Chain(spec)) => spec,
        Some(_) => return Err("model file does not describe a chain".into()),
        None => {
            let n = n_arg(args)?;
            let mut probs = prob_list(args)?;
            if let Some(l) = levels {
                if probs.len() == 1 && l > 1 {
                    probs = vec![probs[0].clone(); l as usize];
                }
            }
            ChainSpec::new(n, probs).map_err(err)?
        }
    };
    match levels {
        Some(l) if l != spec.levels => Err(format!(
            "expected {l} level probabilities, got {}",
            spec.levels
        )),
        _ => Ok(spec),
    }
}

fn walk_spec(args: &ModelArgs) -> Result<Walk2DSpec, String> {
    match load_model(args)? {
        Some(Model::Walk2D(spec)) => Ok(spec),
        Some(_) => Err("model file does not describe a lattice walk".into()),
        None => Walk2DSpec::unit_cross(cross_probs(args)?).map_err(err),
    }
}

fn simple1d_walk(p: &Probability) -> Walk2DSpec {
    Walk2DSpec::new(
        vec![
            MoveRule::new(1, 0, 1, p.clone()),
            MoveRule::new(-1, 0, 1, p.complement()),
        ],
        None,
    )
    .expect("complementary moves form a valid walk")
}

fn quadrant(args: &ModelArgs) -> Result<(BarrierSpec, [Probability; 4]), String> {
    let barrier = BarrierSpec::new(n_arg(args)?).map_err(err)?;
    Ok((barrier, cross_probs(args)?))
}

fn chain_identity(levels: u32) -> IdentityId {
    match levels {
        1 => IdentityId::Eq1Chain,
        2 => IdentityId::Eq2TwoNode,
        3 => IdentityId::ThreeNode,
        l => IdentityId::MultiLevel(l),
    }
}

fn parse_identity(id: &str, args: &ModelArgs) -> Result<IdentityId, String> {
    if id == "multilevel" {
        let levels = args.levels.ok_or("--id multilevel needs --levels")?;
        if levels == 0 {
            return Err("--levels must be at least 1".into());
        }
        return Ok(IdentityId::MultiLevel(levels));
    }
    id.parse().map_err(err)
}

fn finish(output: &Output, out: &OutArgs) -> Result<(), String> {
    emit(&output.render(out.format)?, out.out.as_deref())
}

fn r(x: &Rational) -> String {
    x.to_string()
}

pub fn eval(model: ModelKind, args: &ModelArgs, out: &OutArgs) -> CmdResult {
    let output = match model {
        ModelKind::Chain => eval_chain(args)?,
        ModelKind::Walk2d => eval_walk2d(args)?,
        ModelKind::Simple1d => eval_simple1d(args)?,
        ModelKind::Barrier2d => eval_barrier2d(args)?,
        ModelKind::Gosper => eval_gosper(args)?,
    };
    finish(&output, out)?;
    Ok(0)
}

fn eval_chain(args: &ModelArgs) -> Result<Output, String> {
    let spec = chain_spec(args, args.levels)?;
    let m = m_arg(args)?;
    let eval = ChainEvaluator::new(&spec).map_err(err)?;
    let mut positions = Vec::new();
    let mut towers = Vec::new();
    let mut output = Output::new(Value::Null, vec!["quantity", "value"]);
    for k in 1..spec.n_states {
        let q = eval.position_prob(k, m).map_err(err)?;
        if q.is_zero() {
            continue;
        }
        output.row([format!("position({k})"), r(&q)]);
        positions.push(json!({"k": k, "mass": q}));
        if spec.levels > 1 {
            for level in 1..=spec.levels {
                let t = eval.level_prob(k, level, m).map_err(err)?;
                if !t.is_zero() {
                    output.row([StateLabel::Tower { position: k, level }.to_string(), r(&t)]);
                    towers.push(json!({"k": k, "level": level, "mass": t}));
                }
            }
        }
    }
    let absorbed = eval.absorbed_cdf(m);
    let (a, b) = chain_identity_terms(&spec, m).map_err(err)?;
    let total = &a + &b;
    output.row(["absorbed".to_string(), r(&absorbed)]);
    output.row(["total".to_string(), r(&total)]);
    let mut doc = json!({
        "model": "chain",
        "n": spec.n_states,
        "levels": spec.levels,
        "probs": spec.level_probs,
        "m": m,
        "positions": positions,
        "absorbed": absorbed,
        "first_sum": a,
        "second_sum": b,
        "total": total,
    });
    if spec.levels > 1 {
        doc["towers"] = json!(towers);
    }
    output.json = doc;
    Ok(output)
}

fn eval_walk2d(args: &ModelArgs) -> Result<Output, String> {
    let spec = walk_spec(args)?;
    let m = m_arg(args)?;
    let mode = mode(args);
    let dist = walk2d_distribution(&spec, m, mode).map_err(err)?;
    let total = walk2d_identity_total(&spec, m, mode).map_err(err)?;
    let mut output = Output::new(Value::Null, vec!["quantity", "value"]);
    for (pt, q) in &dist {
        output.row([format!("lattice{pt}"), r(q)]);
    }
    output.row(["total".to_string(), r(&total)]);
    let points: Vec<Value> = dist
        .iter()
        .map(|(pt, q)| json!({"point": pt.to_string(), "mass": q}))
        .collect();
    output.json =
        json!({"model": "walk2d", "m": m, "mode": mode, "points": points, "total": total});
    Ok(output)
}

fn eval_simple1d(args: &ModelArgs) -> Result<Output, String> {
    let p = single_prob(args)?;
    let m = m_arg(args)?;
    let mut output = Output::new(Value::Null, vec!["quantity", "value"]);
    let mut points = Vec::new();
    for k in -(m as i64)..=m as i64 {
        let q = simple1d_point_prob(&p, k, m);
        if !q.is_zero() {
            output.row([format!("position({k})"), r(&q)]);
            points.push(json!({"k": k, "mass": q}));
        }
    }
    let total = simple1d_total(&p, m);
    output.row(["total".to_string(), r(&total)]);
    output.json = json!({"model": "simple1d", "p": p, "m": m, "positions": points, "total": total});
    Ok(output)
}

fn eval_barrier2d(args: &ModelArgs) -> Result<Output, String> {
    let (barrier, probs) = quadrant(args)?;
    let m = m_arg(args)?;
    let mode = mode(args);
    let (interior, absorbed) = chain2d_identity_terms(barrier, &probs, m, mode).map_err(err)?;
    let counted = |pt: LatticePoint| mode == CoefficientMode::Corrected || m as i64 <= pt.h + pt.v;
    let mut output = Output::new(Value::Null, vec!["quantity", "value"]);
    let mut cells = Vec::new();
    let n = barrier.size as i64;
    for h in 0..n {
        for v in 0..n {
            let pt = LatticePoint::new(h, v);
            let q = chain2d_point_prob(&probs, pt, m, mode).map_err(err)?;
            if counted(pt) && !q.is_zero() {
                let label = StateLabel::Lattice {
                    point: pt,
                    pending: None,
                };
                output.row([label.to_string(), r(&q)]);
                cells.push(json!({"label": label, "mass": q}));
            }
        }
    }
    for pt in barrier.cells() {
        let q = chain2d_barrier_prob(&probs, barrier, pt, m, mode).map_err(err)?;
        if counted(pt) && !q.is_zero() {
            let label = StateLabel::Barrier(pt);
            output.row([label.to_string(), r(&q)]);
            cells.push(json!({"label": label, "mass": q}));
        }
    }
    let total = &interior + &absorbed;
    output.row(["interior".to_string(), r(&interior)]);
    output.row(["absorbed".to_string(), r(&absorbed)]);
    output.row(["total".to_string(), r(&total)]);
    output.json = json!({
        "model": "barrier2d",
        "n": barrier.size,
        "probs": probs,
        "m": m,
        "mode": mode,
        "states": cells,
        "interior": interior,
        "absorbed": absorbed,
        "total": total,
    });
    Ok(output)
}

fn eval_gosper(args: &ModelArgs) -> Result<Output, String> {
    let params = GosperParams::new(single_prob(args)?, n_arg(args)?).map_err(err)?;
    let terms = gosper_terms(&params).map_err(err)?;
    let mut output = Output::new(Value::Null, vec!["quantity", "value"]);
    let mut total = Rational::zero();
    let mut rows = Vec::new();
    for (k, (heads, tails)) in terms.iter().enumerate() {
        output.row([format!("heads_win({k})"), r(heads)]);
        output.row([format!("tails_win({k})"), r(tails)]);
        rows.push(json!({"k": k, "heads_win": heads, "tails_win": tails}));
        total += heads;
        total += tails;
    }
    output.row(["total".to_string(), r(&total)]);
    output.json =
        json!({"model": "gosper", "n": params.n, "p": params.p, "terms": rows, "total": total});
    Ok(output)
}

/// Identity parameters for one `m` (ignored by the race).
fn identity_params(id: IdentityId, args: &ModelArgs, m: u32) -> Result<IdentityParams, String> {
    Ok(match id {
        IdentityId::Eq3Walk2D => IdentityParams::Walk2d {
            spec: walk_spec(args)?,
            m,
        },
        IdentityId::Eq4Simple1D => IdentityParams::Simple1d {
            p: single_prob(args)?,
            m,
        },
        IdentityId::Eq5Barrier2D => {
            let (barrier, probs) = quadrant(args)?;
            IdentityParams::Barrier2d { barrier, probs, m }
        }
        IdentityId::Gosper => IdentityParams::Gosper {
            p: single_prob(args)?,
            n: n_arg(args)?,
        },
        chain => IdentityParams::Chain {
            spec: chain_spec(args, chain.levels())?,
            m,
        },
    })
}

fn params_summary(params: &IdentityParams) -> String {
    let join = |ps: &[Probability]| {
        ps.iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    match params {
        IdentityParams::Chain { spec, .. } => {
            format!("N={} p={}", spec.n_states, join(&spec.level_probs))
        }
        IdentityParams::Walk2d { spec, .. } => {
            let ps: Vec<Probability> = spec.moves.iter().map(|mv| mv.prob.clone()).collect();
            format!("moves={} p={}", spec.moves.len(), join(&ps))
        }
        IdentityParams::Simple1d { p, .. } => format!("p={p}"),
        IdentityParams::Barrier2d { barrier, probs, .. } => {
            format!("N={} p={}", barrier.size, join(probs))
        }
        IdentityParams::Gosper { p, n } => format!("N={n} p={p}"),
    }
}

fn params_m(params: &IdentityParams) -> String {
    match params {
        IdentityParams::Chain { m, .. }
        | IdentityParams::Walk2d { m, .. }
        | IdentityParams::Simple1d { m, .. }
        | IdentityParams::Barrier2d { m, .. } => m.to_string(),
        IdentityParams::Gosper { .. } => String::new(),
    }
}

const REPORT_HEADER: [&str; 8] = [
    "identity", "params", "m", "mode", "total", "residual", "holds", "oracle",
];

fn report_row(rep: &IdentityReport) -> Vec<String> {
    let oracle = if rep.matches_oracle() {
        "match".to_string()
    } else {
        format!("mismatch({})", rep.oracle_diffs.len())
    };
    vec![
        rep.identity.to_string(),
        params_summary(&rep.params),
        params_m(&rep.params),
        rep.mode.as_str().to_string(),
        r(&rep.total),
        r(&rep.residual),
        rep.holds.to_string(),
        oracle,
    ]
}

pub fn verify(id: &str, all_m: bool, args: &ModelArgs, out: &OutArgs) -> CmdResult {
    let identity = parse_identity(id, args)?;
    let mode = mode(args);
    let ms: Vec<u32> = if all_m {
        match identity {
            IdentityId::Eq5Barrier2D => (0..=2 * n_arg(args)?).collect(),
            id if id.levels().is_some() => {
                let spec = chain_spec(args, id.levels())?;
                (0..=spec.levels * (spec.n_states - 1)).collect()
            }
            other => return Err(format!("--all-m is not defined for {other}")),
        }
    } else if identity == IdentityId::Gosper {
        vec![0]
    } else {
        vec![m_arg(args)?]
    };

    let mut reports = Vec::with_capacity(ms.len());
    for m in ms {
        let params = identity_params(identity, args, m)?;
        reports.push(check_identity(identity, &params, mode).map_err(err)?);
    }
    let all_hold = reports.iter().all(|rep| rep.holds);
    let mut output = Output::new(Value::Null, REPORT_HEADER.to_vec());
    for rep in &reports {
        output.row(report_row(rep));
    }
    output.json = if all_m {
        json!(reports)
    } else {
        json!(reports[0])
    };
    finish(&output, out)?;
    Ok(if all_hold { 0 } else { 1 })
}

fn sweep_grid(identity: IdentityId, args: &ModelArgs) -> Result<SweepGrid, String> {
    let n = match (identity, args.n.as_deref()) {
        (IdentityId::Eq3Walk2D | IdentityId::Eq4Simple1D, _) => vec![0],
        (_, Some(text)) => int_list(text, "n")?,
        (_, None) => return Err("missing --n".into()),
    };
    let probs = match identity {
        IdentityId::Eq3Walk2D | IdentityId::Eq5Barrier2D => {
            if args.p.is_some() {
                let values = prob_list(args)?;
                SweepGrid::product(&values, 4)
                    .into_iter()
                    .filter(|v| v.iter().map(Probability::value).sum::<Rational>().is_one())
                    .collect()
            } else {
                vec![cross_probs(args)?.to_vec()]
            }
        }
        IdentityId::Eq4Simple1D | IdentityId::Gosper => {
            prob_list(args)?.into_iter().map(|p| vec![p]).collect()
        }
        chain => {
            let values = prob_list(args)?;
            SweepGrid::product(&values, chain.levels().expect("chain identity") as usize)
        }
    };
    let m = match (identity, args.m.as_deref()) {
        (IdentityId::Gosper, _) => MRange::Fixed { lo: 0, hi: 0 },
        (_, Some(text)) => {
            let ms = int_list(text, "m")?;
            let (lo, hi) = (ms[0], *ms.last().expect("nonempty"));
            if ms != (lo..=hi).collect::<Vec<_>>() {
                return Err("--m must be one contiguous range for a sweep".into());
            }
            MRange::Fixed { lo, hi }
        }
        (IdentityId::Eq3Walk2D | IdentityId::Eq4Simple1D, None) => return Err("missing --m".into()),
        (_, None) => MRange::ScaledN { mul: 2, add: 0 },
    };
    Ok(SweepGrid { n, probs, m })
}

pub fn sweep(id: &str, args: &ModelArgs, out: &OutArgs) -> CmdResult {
    let identity = parse_identity(id, args)?;
    let grid = sweep_grid(identity, args)?;
    let result = walkident::sweep(identity, &grid, mode(args)).map_err(err)?;
    let mut output = Output::new(json!(result), REPORT_HEADER.to_vec());
    for rep in &result.reports {
        output.row(report_row(rep));
    }
    output.notes.push(format!(
        "points {}  holds {}  fails {}  oracle mismatches {}",
        result.points, result.holds, result.fails, result.oracle_mismatches
    ));
    if let Some(rep) = result.counterexample() {
        output.notes.push(format!(
            "first failure: {} m={}",
            params_summary(&rep.params),
            params_m(&rep.params)
        ));
    }
    finish(&output, out)?;
    Ok(if result.fails == 0 { 0 } else { 1 })
}

pub const FIGURE1_HEADER: [&str; 7] = [
    "p",
    "m",
    "first_sum",
    "second_sum",
    "total",
    "first_dec",
    "second_dec",
];

pub fn figure1(n: u32, p: &str, out: Option<&Path>) -> CmdResult {
    if n < 2 {
        return Err("--n must be at least 2".into());
    }
    let probs: Vec<Probability> = p.split(',').map(parse_prob).collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut all_one = true;
    for prob in probs {
        let spec = ChainSpec::simple(n, prob.clone()).map_err(err)?;
        for m in 0..n {
            let (a, b) = chain_identity_terms(&spec, m).map_err(err)?;
            let total = &a + &b;
            all_one &= total.is_one();
            rows.push(vec![
                prob.to_string(),
                m.to_string(),
                r(&a),
                r(&b),
                r(&total),
                a.to_sci_string(17),
                b.to_sci_string(17),
            ]);
        }
    }
    emit(&csv_text(&FIGURE1_HEADER, &rows)?, out)?;
    Ok(if all_one { 0 } else { 1 })
}

struct OracleRun {
    snapshot: Snapshot,
    identity: IdentityId,
    params: IdentityParams,
    model: Option<Model>,
}

fn oracle_run(kind: ModelKind, args: &ModelArgs) -> Result<OracleRun, String> {
    Ok(match kind {
        ModelKind::Chain => {
            let spec = chain_spec(args, args.levels)?;
            let m = m_arg(args)?;
            OracleRun {
                snapshot: chain_snapshot(&spec, m).map_err(err)?,
                identity: chain_identity(spec.levels),
                params: IdentityParams::Chain {
                    spec: spec.clone(),
                    m,
                },
                model: Some(Model::Chain(spec)),
            }
        }
        ModelKind::Walk2d => {
            let spec = walk_spec(args)?;
            let m = m_arg(args)?;
            OracleRun {
                snapshot: walk2d_snapshot(&spec, m).map_err(err)?,
                identity: IdentityId::Eq3Walk2D,
                params: IdentityParams::Walk2d {
                    spec: spec.clone(),
                    m,
                },
                model: Some(Model::Walk2D(spec)),
            }
        }
        ModelKind::Simple1d => {
            let p = single_prob(args)?;
            let m = m_arg(args)?;
            let spec = simple1d_walk(&p);
            OracleRun {
                snapshot: walk2d_snapshot(&spec, m).map_err(err)?,
                identity: IdentityId::Eq4Simple1D,
                params: IdentityParams::Simple1d { p, m },
                model: Some(Model::Walk2D(spec)),
            }
        }
        ModelKind::Barrier2d => {
            let (barrier, probs) = quadrant(args)?;
            let m = m_arg(args)?;
            let spec = Walk2DSpec::delayed_quadrant(probs.clone(), barrier).map_err(err)?;
            OracleRun {
                snapshot: walk2d_snapshot(&spec, m).map_err(err)?,
                identity: IdentityId::Eq5Barrier2D,
                params: IdentityParams::Barrier2d { barrier, probs, m },
                model: Some(Model::Walk2D(spec)),
            }
        }
        ModelKind::Gosper => {
            let p = single_prob(args)?;
            let n = n_arg(args)?;
            if n == 0 {
                return Err("--n must be at least 1".into());
            }
            let flips = match args.m.as_deref() {
                Some(text) => single_int(Some(text), "m")?,
                None => 2 * n - 1,
            };
            OracleRun {
                snapshot: gosper_race_snapshot(&p, n, flips).map_err(err)?,
                identity: IdentityId::Gosper,
                params: IdentityParams::Gosper { p, n },
                model: None,
            }
        }
    })
}

pub fn oracle(
    kind: ModelKind,
    compare: bool,
    samples: Option<u64>,
    seed: u64,
    args: &ModelArgs,
    out: &OutArgs,
) -> CmdResult {
    let run = oracle_run(kind, args)?;
    let report = if compare {
        Some(check_identity(run.identity, &run.params, mode(args)).map_err(err)?)
    } else {
        None
    };
    let estimate: Option<McEstimate> = match samples {
        None => None,
        Some(samples) => {
            let model = run
                .model
                .as_ref()
                .ok_or("Monte Carlo is not available for the race")?;
            Some(mc_estimate(model, run.snapshot.time, samples, seed).map_err(err)?)
        }
    };

    let mut labels: BTreeSet<StateLabel> = run.snapshot.mass.keys().copied().collect();
    if let Some(rep) = &report {
        labels.extend(rep.oracle_diffs.iter().map(|d| d.label));
    }
    if let Some(est) = &estimate {
        labels.extend(est.frequencies.keys().copied());
    }

    let mut header = vec!["label", "mass"];
    if report.is_some() {
        header.extend(["closed_form", "status"]);
    }
    if estimate.is_some() {
        header.push("mc_frequency");
    }
    let mut output = Output::new(Value::Null, header);
    for label in &labels {
        let mass = run.snapshot.get(label);
        let mut row = vec![label.to_string(), r(&mass)];
        if let Some(rep) = &report {
            match rep.oracle_diffs.iter().find(|d| d.label == *label) {
                Some(diff) => row.extend([r(&diff.closed_form), "MISMATCH".to_string()]),
                None => row.extend([r(&mass), "ok".to_string()]),
            }
        }
        if let Some(est) = &estimate {
            row.push(est.frequency(label).to_string());
        }
        output.row(row);
    }
    output.notes.push(format!(
        "m {}  absorbed {}  total {}",
        run.snapshot.time,
        run.snapshot.absorbed,
        run.snapshot.total()
    ));

    let mut doc = json!({"snapshot": run.snapshot});
    let mut code = 0;
    if let Some(rep) = &report {
        let matches = rep.matches_oracle();
        output.notes.push(format!(
            "{} ({}): {}",
            rep.identity,
            rep.mode.as_str(),
            if matches {
                "matches oracle"
            } else {
                "MISMATCH against oracle"
            }
        ));
        doc["comparison"] = json!({
            "identity": rep.identity,
            "mode": rep.mode,
            "matches": matches,
            "total": rep.total,
            "diffs": rep.oracle_diffs,
        });
        if !matches {
            code = 1;
        }
    }
    if let Some(est) = &estimate {
        doc["monte_carlo"] = json!(est);
    }
    output.json = doc;
    finish(&output, out)?;
    Ok(code)
}
