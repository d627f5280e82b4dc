//! Command implementations: loading, label resolution, analysis dispatch,
//! and deterministic artifact writing.

use std::io::Write;
use std::path::{Path, PathBuf};

use dynsens::contraction::{
    backward_window_approx, backward_window_exact, windowed_univariate, worst_case_m,
    ContractionError,
};
use dynsens::decision::{boundary_curves, classify_2d, decide, single_param_regions};
use dynsens::io::{load_evidence, load_model, LoadError, LoadedModel};
use dynsens::sensitivity::{compute_bivariate, compute_univariate, SensitivityError};
use dynsens::{
    BivariateSensitivity, BoundaryCurve, ContractionReport, Decision, DecisionRegions,
    EvidenceSequence, HmmModel, ModelError, ParameterRef, PolyError, SensitivityTarget,
    ThresholdModel, UnivariateSensitivity,
};

use crate::out::{obj, sig12, Csv, Json};
use crate::{
    Cpt2dArgs, FilterArgs, Format, RegionsArgs, ReportArgs, SensArgs, ValidateArgs, WindowArgs,
};

/// Points on the (theta, value) curves written next to sens and regions
/// reports.
const CURVE_POINTS: usize = 201;

pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 1,
        }
    }

    fn compute(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 2,
        }
    }

    fn io(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 3,
        }
    }

    pub fn message(&self) -> &str {
        &self.message
    }

    pub fn code(&self) -> u8 {
        self.code
    }
}

impl From<LoadError> for CliError {
    fn from(err: LoadError) -> Self {
        match err {
            LoadError::Model(inner) => inner.into(),
            other => CliError::input(format!("model files: {other}")),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(err: ModelError) -> Self {
        match err {
            ModelError::ImpossibleEvidence { .. } => {
                CliError::compute(format!("filtering: {err}"))
            }
            ModelError::CovariationUndefined { .. } | ModelError::ValueOutOfDomain { .. } => {
                CliError::compute(format!("parameter variation: {err}"))
            }
            other => CliError::input(format!("model: {other}")),
        }
    }
}

impl From<PolyError> for CliError {
    fn from(err: PolyError) -> Self {
        CliError::compute(format!("polynomials: {err}"))
    }
}

impl From<SensitivityError> for CliError {
    fn from(err: SensitivityError) -> Self {
        match err {
            SensitivityError::Model(inner) => inner.into(),
            SensitivityError::Poly(inner) => inner.into(),
            SensitivityError::InvalidParams(_) | SensitivityError::InvalidTarget(_) => {
                CliError::input(format!("sensitivity: {err}"))
            }
            other => CliError::compute(format!("sensitivity: {other}")),
        }
    }
}

impl From<dynsens::DecisionError> for CliError {
    fn from(err: dynsens::DecisionError) -> Self {
        match err {
            dynsens::DecisionError::Poly(inner) => inner.into(),
            dynsens::DecisionError::DegenerateRegion { .. } => {
                CliError::compute(format!("decision: {err}"))
            }
            other => CliError::input(format!("decision: {other}")),
        }
    }
}

impl From<ContractionError> for CliError {
    fn from(err: ContractionError) -> Self {
        match err {
            ContractionError::Model(inner) => inner.into(),
            ContractionError::Sensitivity(inner) => inner.into(),
            ContractionError::DegenerateMixing { .. } => {
                CliError::compute(format!("contraction: {err}"))
            }
            other => CliError::input(format!("contraction: {other}")),
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))
}

fn write_artifact(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| CliError::io(format!("cannot write to stdout: {e}"))),
    }
}

/// Sibling path next to the primary output: `report.json` -> `report.<tag>.csv`.
fn sibling(path: &Path, tag: &str) -> PathBuf {
    path.with_extension(format!("{tag}.csv"))
}

struct Workspace {
    loaded: LoadedModel,
    model: HmmModel,
}

fn load_workspace(path: &Path) -> Result<Workspace, CliError> {
    let text = read_file(path)?;
    let loaded = load_model(&text)?;
    let report = loaded.validate();
    if !report.is_valid() {
        return Err(CliError::input(format!("model validation: {report}")));
    }
    let model = loaded.resolve()?;
    Ok(Workspace { loaded, model })
}

fn load_evidence_arg(
    path: Option<&Path>,
    ws: &Workspace,
    horizon: usize,
) -> Result<EvidenceSequence, CliError> {
    let evidence = match path {
        Some(path) => {
            let text = read_file(path)?;
            load_evidence(&text, &ws.loaded)?
        }
        None => EvidenceSequence::empty(horizon),
    };
    evidence.validate_against(&ws.model)?;
    Ok(evidence)
}

fn parse_state(ws: &Workspace, token: &str) -> Result<usize, CliError> {
    Ok(ws.loaded.state_index(token)?)
}

fn parse_param(ws: &Workspace, spec: &str) -> Result<ParameterRef, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let param = match parts.as_slice() {
        ["initial", state] => ParameterRef::initial(&ws.model, ws.loaded.state_index(state)?)?,
        ["transition", from, to] => ParameterRef::transition(
            &ws.model,
            ws.loaded.state_index(from)?,
            ws.loaded.state_index(to)?,
        )?,
        ["observation", state, value, stream] => {
            let stream = ws.loaded.stream_index(stream)?;
            ParameterRef::observation(
                &ws.model,
                stream,
                ws.loaded.state_index(state)?,
                ws.loaded.value_index(stream, value)?,
            )?
        }
        _ => {
            return Err(CliError::input(format!(
                "cannot parse parameter {spec:?}: expected initial:<state>, \
                 transition:<from>:<to>, or observation:<state>:<value>:<stream>"
            )))
        }
    };
    Ok(param)
}

fn parse_thresholds(spec: &str) -> Result<ThresholdModel, CliError> {
    let values: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::input(format!("cannot parse thresholds {spec:?}")))?;
    if values.len() != 3 {
        return Err(CliError::input(format!(
            "thresholds {spec:?} must list p_minus,p_star,p_plus"
        )));
    }
    Ok(ThresholdModel::new(values[0], values[1], values[2])?)
}

fn param_kind(param: &ParameterRef) -> &'static str {
    match param {
        ParameterRef::Initial { .. } => "initial",
        ParameterRef::Transition { .. } => "transition",
        ParameterRef::Observation { .. } => "observation",
    }
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

pub fn validate(args: ValidateArgs) -> Result<u8, CliError> {
    let text = read_file(&args.model)?;
    let loaded = load_model(&text)?;
    let report = loaded.validate();

    let content = match args.format {
        Format::Json => obj(vec![
            ("command", Json::str("validate")),
            ("valid", Json::Bool(report.is_valid())),
            (
                "violations",
                Json::Arr(
                    report
                        .violations
                        .iter()
                        .map(|v| {
                            obj(vec![
                                ("matrix", Json::str(&v.matrix)),
                                (
                                    "row",
                                    v.row.map_or(Json::Null, |r| Json::Int(r as i64)),
                                ),
                                ("magnitude", Json::num(v.magnitude)),
                                ("message", Json::str(&v.message)),
                            ])
                        })
                        .collect(),
                ),
            ),
        ])
        .render(),
        Format::Csv => {
            let mut csv = Csv::new(&["matrix", "row", "magnitude", "message"]);
            for v in &report.violations {
                csv.row(&[
                    v.matrix.clone(),
                    v.row.map_or(String::new(), |r| r.to_string()),
                    sig12(v.magnitude),
                    v.message.clone(),
                ]);
            }
            csv.finish()
        }
    };
    write_artifact(args.out.as_deref(), &content)?;
    Ok(if report.is_valid() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// filter
// ---------------------------------------------------------------------------

fn filter_doc(
    ws: &Workspace,
    evidence: &EvidenceSequence,
    time: usize,
) -> Result<Json, CliError> {
    let out = ws.model.filter(evidence, time)?;
    let labels = ws.loaded.state_labels();
    let map_state = out
        .posterior
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(obj(vec![
        ("time", Json::Int(time as i64)),
        (
            "states",
            Json::Arr(labels.iter().map(Json::str).collect()),
        ),
        ("posterior", Json::arr_num(out.posterior.iter().copied())),
        ("log_likelihood", Json::num(out.log_likelihood)),
        ("map_state", Json::str(&labels[map_state])),
        (
            "trajectory",
            Json::Arr(
                out.trajectory
                    .iter()
                    .map(|step| Json::arr_num(step.iter().copied()))
                    .collect(),
            ),
        ),
    ]))
}

pub fn filter(args: FilterArgs) -> Result<u8, CliError> {
    let ws = load_workspace(&args.model)?;
    let evidence = load_evidence_arg(args.evidence.as_deref(), &ws, args.time)?;
    let content = match args.format {
        Format::Json => {
            let mut doc = vec![("command".to_string(), Json::str("filter"))];
            if let Json::Obj(fields) = filter_doc(&ws, &evidence, args.time)? {
                doc.extend(fields);
            }
            Json::Obj(doc).render()
        }
        Format::Csv => {
            let out = ws.model.filter(&evidence, args.time)?;
            let mut header = vec!["t".to_string()];
            header.extend(ws.loaded.state_labels().iter().cloned());
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut csv = Csv::new(&header_refs);
            for (t, step) in out.trajectory.iter().enumerate() {
                let mut row = vec![(t + 1).to_string()];
                row.extend(step.iter().map(|&p| sig12(p)));
                csv.row(&row);
            }
            csv.finish()
        }
    };
    write_artifact(args.out.as_deref(), &content)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// sens
// ---------------------------------------------------------------------------

struct SensOutcome {
    sensitivity: UnivariateSensitivity,
    window: Option<ContractionReport>,
    certified: Option<bool>,
    nominal_deviation: Option<f64>,
    spec: String,
}

fn sens_outcome(
    ws: &Workspace,
    evidence: &EvidenceSequence,
    time: usize,
    state: &str,
    param_spec: &str,
    epsilon: Option<f64>,
) -> Result<SensOutcome, CliError> {
    let state = parse_state(ws, state)?;
    let param = parse_param(ws, param_spec)?;
    let target = SensitivityTarget::new(state, time, evidence.clone());
    match epsilon {
        None => Ok(SensOutcome {
            sensitivity: compute_univariate(&ws.model, &target, &param)?,
            window: None,
            certified: None,
            nominal_deviation: None,
            spec: param_spec.to_string(),
        }),
        Some(epsilon) => {
            let windowed = windowed_univariate(&ws.model, &target, &param, epsilon)?;
            Ok(SensOutcome {
                sensitivity: windowed.sensitivity,
                window: Some(windowed.window),
                certified: Some(windowed.certified),
                nominal_deviation: Some(windowed.nominal_deviation),
                spec: param_spec.to_string(),
            })
        }
    }
}

fn window_doc(report: &ContractionReport) -> Json {
    obj(vec![
        ("delta", Json::num(report.delta)),
        ("n_phi", Json::Int(report.n_phi as i64)),
        ("n", Json::Int(report.n as i64)),
        ("epsilon", Json::num(report.epsilon)),
        ("mode", Json::str(report.mode.label())),
        (
            "m_bound",
            report.m_bound.map_or(Json::Null, Json::num),
        ),
        (
            "achieved",
            report.achieved.map_or(Json::Null, Json::num),
        ),
        ("vacuous", Json::Bool(report.vacuous)),
    ])
}

fn sens_doc(ws: &Workspace, outcome: &SensOutcome) -> Json {
    let sens = &outcome.sensitivity;
    let mut fields = vec![
        (
            "param",
            obj(vec![
                ("spec", Json::str(&outcome.spec)),
                ("kind", Json::str(param_kind(&sens.param))),
                ("description", Json::str(sens.param.describe())),
                ("nominal", Json::num(sens.param.nominal())),
            ]),
        ),
        (
            "target",
            obj(vec![
                (
                    "state",
                    Json::str(&ws.loaded.state_labels()[sens.target.state]),
                ),
                ("time", Json::Int(sens.target.time as i64)),
            ]),
        ),
        (
            "degree_bounds",
            obj(vec![
                ("numerator", Json::Int(sens.degree_bounds.numerator as i64)),
                (
                    "denominator",
                    Json::Int(sens.degree_bounds.denominator as i64),
                ),
            ]),
        ),
        (
            "numerator",
            Json::arr_num(sens.function.numerator().coefficients().iter().copied()),
        ),
        (
            "denominator",
            Json::arr_num(sens.function.denominator().coefficients().iter().copied()),
        ),
        ("fit_residual", Json::num(sens.fit_residual)),
        ("nominal_value", Json::num(sens.nominal_value)),
        (
            "valid_interval",
            Json::arr_num([sens.valid_interval.0, sens.valid_interval.1]),
        ),
    ];
    if let Some(window) = &outcome.window {
        fields.push(("window", window_doc(window)));
    }
    if let Some(certified) = outcome.certified {
        fields.push(("certified", Json::Bool(certified)));
    }
    if let Some(deviation) = outcome.nominal_deviation {
        fields.push(("nominal_deviation", Json::num(deviation)));
    }
    obj(fields)
}

fn curve_csv(f: impl Fn(f64) -> f64) -> String {
    let mut csv = Csv::new(&["theta", "value"]);
    for k in 0..CURVE_POINTS {
        let theta = k as f64 / (CURVE_POINTS - 1) as f64;
        csv.row(&[sig12(theta), sig12(f(theta))]);
    }
    csv.finish()
}

pub fn sens(args: SensArgs) -> Result<u8, CliError> {
    let ws = load_workspace(&args.model)?;
    let evidence = load_evidence_arg(args.evidence.as_deref(), &ws, args.time)?;
    let outcome = sens_outcome(
        &ws,
        &evidence,
        args.time,
        &args.state,
        &args.param,
        args.epsilon,
    )?;
    let curve = curve_csv(|theta| outcome.sensitivity.eval(theta));

    match args.format {
        Format::Json => {
            let mut doc = vec![("command".to_string(), Json::str("sens"))];
            if let Json::Obj(fields) = sens_doc(&ws, &outcome) {
                doc.extend(fields);
            }
            write_artifact(args.out.as_deref(), &Json::Obj(doc).render())?;
            if let Some(out) = &args.out {
                write_artifact(Some(&sibling(out, "curve")), &curve)?;
            }
        }
        Format::Csv => write_artifact(args.out.as_deref(), &curve)?,
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// regions
// ---------------------------------------------------------------------------

fn regions_doc(
    regions: &DecisionRegions,
    sens: &UnivariateSensitivity,
    thresholds: &ThresholdModel,
) -> Json {
    let region_objs = (0..regions.labels.len())
        .map(|i| {
            let (lo, hi) = regions.region_bounds(i);
            obj(vec![
                ("lower", Json::num(lo)),
                ("upper", Json::num(hi)),
                ("decision", Json::str(regions.labels[i].label())),
            ])
        })
        .collect();
    obj(vec![
        (
            "thresholds",
            obj(vec![
                ("p_minus", Json::num(thresholds.p_minus())),
                ("p_star", Json::num(thresholds.p_star())),
                ("p_plus", Json::num(thresholds.p_plus())),
            ]),
        ),
        (
            "boundaries",
            Json::arr_num(regions.boundaries.iter().copied()),
        ),
        (
            "derivative_signs",
            Json::Arr(
                regions
                    .derivative_signs
                    .iter()
                    .map(|&s| Json::Int(s as i64))
                    .collect(),
            ),
        ),
        (
            "labels",
            Json::Arr(
                regions
                    .labels
                    .iter()
                    .map(|l| Json::str(l.label()))
                    .collect(),
            ),
        ),
        ("regions", Json::Arr(region_objs)),
        (
            "nominal",
            obj(vec![
                ("theta", Json::num(sens.param.nominal())),
                ("value", Json::num(sens.nominal_value)),
                ("decision", Json::str(regions.nominal_decision().label())),
                (
                    "region_index",
                    Json::Int(regions.nominal_region_index as i64),
                ),
                ("margin", Json::num(regions.margin)),
            ]),
        ),
    ])
}

pub fn regions(args: RegionsArgs) -> Result<u8, CliError> {
    let ws = load_workspace(&args.model)?;
    let evidence = load_evidence_arg(args.evidence.as_deref(), &ws, args.time)?;
    let thresholds = parse_thresholds(&args.thresholds)?;
    let outcome = sens_outcome(&ws, &evidence, args.time, &args.state, &args.param, None)?;
    let regions = single_param_regions(&outcome.sensitivity, &thresholds)?;

    let content = match args.format {
        Format::Json => {
            let mut doc = vec![("command".to_string(), Json::str("regions"))];
            if let Json::Obj(fields) = regions_doc(&regions, &outcome.sensitivity, &thresholds) {
                doc.extend(fields);
            }
            Json::Obj(doc).render()
        }
        Format::Csv => {
            let mut csv = Csv::new(&["theta", "value", "decision"]);
            for k in 0..CURVE_POINTS {
                let theta = k as f64 / (CURVE_POINTS - 1) as f64;
                let value = outcome.sensitivity.eval(theta);
                csv.row(&[
                    sig12(theta),
                    sig12(value),
                    decide(value, &thresholds).label().to_string(),
                ]);
            }
            csv.finish()
        }
    };
    write_artifact(args.out.as_deref(), &content)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// cpt2d
// ---------------------------------------------------------------------------

fn curve_doc(curve: &BoundaryCurve) -> Json {
    obj(vec![
        ("threshold", Json::num(curve.threshold)),
        (
            "branches",
            Json::Arr(
                curve
                    .branches
                    .iter()
                    .map(|branch| {
                        Json::Arr(
                            branch
                                .iter()
                                .map(|&(a, b)| Json::arr_num([a, b]))
                                .collect(),
                        )
                    })
                    .collect(),
            ),
        ),
    ])
}

fn curve_points_csv(curve: &BoundaryCurve) -> String {
    let mut csv = Csv::new(&["branch", "theta_se", "theta_sp"]);
    for (b, branch) in curve.branches.iter().enumerate() {
        for &(se, sp) in branch {
            csv.row(&[b.to_string(), sig12(se), sig12(sp)]);
        }
    }
    csv.finish()
}

fn classification_grid(
    f: &BivariateSensitivity,
    thresholds: &ThresholdModel,
    samples: usize,
) -> Vec<Vec<Decision>> {
    (0..samples)
        .map(|i| {
            let se = i as f64 / (samples - 1) as f64;
            (0..samples)
                .map(|j| {
                    let sp = j as f64 / (samples - 1) as f64;
                    classify_2d(f, thresholds, (se, sp))
                })
                .collect()
        })
        .collect()
}

pub fn cpt2d(args: Cpt2dArgs) -> Result<u8, CliError> {
    let ws = load_workspace(&args.model)?;
    let evidence = load_evidence_arg(args.evidence.as_deref(), &ws, args.time)?;
    let thresholds = parse_thresholds(&args.thresholds)?;
    let state = parse_state(&ws, &args.state)?;
    let first = parse_param(&ws, &args.param)?;
    let second = parse_param(&ws, &args.param2)?;
    let target = SensitivityTarget::new(state, args.time, evidence);
    let biv = compute_bivariate(&ws.model, &target, (&first, &second))?;
    let (lower, upper) = boundary_curves(&biv, &thresholds, args.samples)?;
    let grid = classification_grid(&biv, &thresholds, args.samples);
    let (se_nom, sp_nom) = biv.nominal_pair();

    match args.format {
        Format::Json => {
            let doc = obj(vec![
                ("command", Json::str("cpt2d")),
                (
                    "params",
                    obj(vec![
                        ("se", Json::str(first.describe())),
                        ("sp", Json::str(second.describe())),
                    ]),
                ),
                (
                    "target",
                    obj(vec![
                        ("state", Json::str(&ws.loaded.state_labels()[state])),
                        ("time", Json::Int(args.time as i64)),
                    ]),
                ),
                ("degree", Json::Int(biv.degree as i64)),
                ("fit_residual", Json::num(biv.fit_residual)),
                (
                    "cross_term_magnitude",
                    Json::num(biv.cross_term_magnitude),
                ),
                (
                    "nominal",
                    obj(vec![
                        ("theta_se", Json::num(se_nom)),
                        ("theta_sp", Json::num(sp_nom)),
                        ("value", Json::num(biv.nominal_value)),
                        (
                            "decision",
                            Json::str(
                                classify_2d(&biv, &thresholds, (se_nom, sp_nom)).label(),
                            ),
                        ),
                    ]),
                ),
                (
                    "curves",
                    obj(vec![
                        ("lower", curve_doc(&lower)),
                        ("upper", curve_doc(&upper)),
                    ]),
                ),
                (
                    "grid",
                    obj(vec![
                        ("samples", Json::Int(args.samples as i64)),
                        (
                            "decisions",
                            Json::Arr(
                                grid.iter()
                                    .map(|row| {
                                        Json::Arr(
                                            row.iter()
                                                .map(|d| Json::str(d.label()))
                                                .collect(),
                                        )
                                    })
                                    .collect(),
                            ),
                        ),
                    ]),
                ),
            ]);
            write_artifact(args.out.as_deref(), &doc.render())?;
            if let Some(out) = &args.out {
                write_artifact(Some(&sibling(out, "lower")), &curve_points_csv(&lower))?;
                write_artifact(Some(&sibling(out, "upper")), &curve_points_csv(&upper))?;
                let mut csv = Csv::new(&["theta_se", "theta_sp", "decision"]);
                for (i, row) in grid.iter().enumerate() {
                    for (j, d) in row.iter().enumerate() {
                        csv.row(&[
                            sig12(i as f64 / (args.samples - 1) as f64),
                            sig12(j as f64 / (args.samples - 1) as f64),
                            d.label().to_string(),
                        ]);
                    }
                }
                write_artifact(Some(&sibling(out, "grid")), &csv.finish())?;
            }
        }
        Format::Csv => {
            let mut csv = Csv::new(&["side", "branch", "theta_se", "theta_sp"]);
            for (side, curve) in [("lower", &lower), ("upper", &upper)] {
                for (b, branch) in curve.branches.iter().enumerate() {
                    for &(se, sp) in branch {
                        csv.row(&[side.to_string(), b.to_string(), sig12(se), sig12(sp)]);
                    }
                }
            }
            write_artifact(args.out.as_deref(), &csv.finish())?;
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// window
// ---------------------------------------------------------------------------

fn window_command_doc(
    ws: &Workspace,
    evidence: &EvidenceSequence,
    time: usize,
    epsilon: f64,
) -> Result<Json, CliError> {
    let report = backward_window_exact(&ws.model, evidence, time, epsilon)?;
    let m = worst_case_m(&ws.model)?;
    let approx = if report.delta > 0.0 && report.delta < 1.0 && m > 0.0 {
        Some(backward_window_approx(time, report.delta, epsilon, m)?)
    } else {
        None
    };
    let mut fields = match window_doc(&report) {
        Json::Obj(fields) => fields,
        _ => unreachable!(),
    };
    fields.push(("worst_case_m".to_string(), Json::num(m)));
    fields.push((
        "approx_n_phi".to_string(),
        approx.map_or(Json::Null, |v| Json::Int(v as i64)),
    ));
    Ok(Json::Obj(fields))
}

pub fn window(args: WindowArgs) -> Result<u8, CliError> {
    let ws = load_workspace(&args.model)?;
    let evidence = load_evidence_arg(args.evidence.as_deref(), &ws, args.time)?;
    let content = match args.format {
        Format::Json => {
            let mut doc = vec![("command".to_string(), Json::str("window"))];
            if let Json::Obj(fields) = window_command_doc(&ws, &evidence, args.time, args.epsilon)?
            {
                doc.extend(fields);
            }
            Json::Obj(doc).render()
        }
        Format::Csv => {
            // (delta, n_phi) sweep at fixed n, epsilon, M.
            if args.samples < 1 {
                return Err(CliError::input("sweep needs at least one sample"));
            }
            let m = worst_case_m(&ws.model)?.max(f64::MIN_POSITIVE);
            let mut csv = Csv::new(&["delta", "n_phi"]);
            for k in 1..=args.samples {
                let delta = k as f64 / (args.samples + 1) as f64;
                let n_phi = backward_window_approx(args.time, delta, args.epsilon, m)?;
                csv.row(&[sig12(delta), n_phi.to_string()]);
            }
            csv.finish()
        }
    };
    write_artifact(args.out.as_deref(), &content)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

pub fn report(args: ReportArgs) -> Result<u8, CliError> {
    let ws = load_workspace(&args.model)?;
    let evidence = load_evidence_arg(args.evidence.as_deref(), &ws, args.time)?;
    let thresholds = parse_thresholds(&args.thresholds)?;

    let filter = filter_doc(&ws, &evidence, args.time)?;
    let outcome = sens_outcome(&ws, &evidence, args.time, &args.state, &args.param, None)?;
    let regions = single_param_regions(&outcome.sensitivity, &thresholds)?;
    let window = window_command_doc(&ws, &evidence, args.time, args.epsilon)?;

    let doc = obj(vec![
        ("command", Json::str("report")),
        ("filter", filter),
        ("sensitivity", sens_doc(&ws, &outcome)),
        (
            "regions",
            regions_doc(&regions, &outcome.sensitivity, &thresholds),
        ),
        ("window", window),
    ]);
    write_artifact(args.out.as_deref(), &doc.render())?;
    Ok(0)
}
