//! Parameter sweeps and their CSV form.

use std::fmt::Write as _;
use std::path::PathBuf;

use marsim_core::config::KEYS;
use marsim_core::{monte_carlo, parse_config, ReliabilityReport, ScenarioConfig};

use crate::error::CliError;

pub const CSV_HEADER: &str = "param,mean_lambda,std_lambda,r_service,mean_m";

/// Significant digits written for every float in the CSV.
const SIG_DIGITS: i32 = 10;

/// One swept parameter, optionally crossed with a second one that splits the
/// results into series (one chart line per series value).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<String>,
    /// CSV path relative to the output directory; the plot sits next to it.
    pub output_path: PathBuf,
    pub series: Option<SeriesSpec>,
    pub title: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    pub parameter: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: String,
    pub mean_lambda: f64,
    pub std_lambda: f64,
    pub r_service: f64,
    pub mean_m: f64,
}

impl SweepRow {
    pub fn from_report(param: &str, r: &ReliabilityReport) -> Self {
        SweepRow {
            param: param.to_string(),
            mean_lambda: r.mean_lambda,
            std_lambda: r.std_lambda,
            r_service: r.mean_r_service,
            mean_m: r.mean_final_m,
        }
    }
}

/// Rows for one series value. `label` is empty for a plain sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub rows: Vec<SweepRow>,
}

fn sweepable(key: &str) -> bool {
    // every run of a sweep shares the base seed, so the seed itself is fixed
    KEYS.contains(&key) && key != "seed"
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

impl SweepSpec {
    pub fn new(parameter: &str, values: &[&str]) -> Self {
        SweepSpec {
            parameter: parameter.to_string(),
            values: values.iter().map(|v| v.to_string()).collect(),
            output_path: default_output(parameter),
            series: None,
            title: None,
        }
    }

    pub fn with_series(mut self, parameter: &str, values: &[&str]) -> Self {
        self.series = Some(SeriesSpec {
            parameter: parameter.to_string(),
            values: values.iter().map(|v| v.to_string()).collect(),
        });
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let check = |param: &str, values: &[String]| {
            if !sweepable(param) {
                return Err(CliError::Config(format!("`{param}` is not a sweepable parameter")));
            }
            if values.is_empty() {
                return Err(CliError::Config(format!("no values given for `{param}`")));
            }
            Ok(())
        };
        check(&self.parameter, &self.values)?;
        if let Some(s) = &self.series {
            check(&s.parameter, &s.values)?;
            if s.parameter == self.parameter {
                return Err(CliError::Config("series parameter repeats the swept parameter".into()));
            }
        }
        Ok(())
    }
}

pub(crate) fn default_output(parameter: &str) -> PathBuf {
    PathBuf::from(format!("{}.csv", parameter.replace('.', "_")))
}

/// Splits a config file into scenario text and sweep settings. `sweep.*`
/// lines are blanked in the scenario text so line numbers in its errors stay
/// correct.
pub fn split_config(text: &str) -> Result<(String, Option<SweepSpec>), CliError> {
    let mut scenario = String::with_capacity(text.len());
    let (mut parameter, mut values, mut output, mut title) = (None, None, None, None);
    let (mut series_param, mut series_values) = (None, None);
    for (idx, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        let Some(key) = body.split('=').next().map(str::trim).filter(|k| k.starts_with("sweep.")) else {
            scenario.push_str(raw);
            scenario.push('\n');
            continue;
        };
        scenario.push('\n');
        let line = idx + 1;
        let value = body
            .split_once('=')
            .map(|(_, v)| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .ok_or_else(|| CliError::Config(format!("line {line}: missing value for `{key}`")))?;
        match key {
            "sweep.parameter" => parameter = Some(value),
            "sweep.values" => values = Some(split_list(&value)),
            "sweep.output" => output = Some(PathBuf::from(value)),
            "sweep.title" => title = Some(value),
            "sweep.series" => series_param = Some(value),
            "sweep.series_values" => series_values = Some(split_list(&value)),
            _ => return Err(CliError::Config(format!("line {line}: unknown key `{key}`"))),
        }
    }
    let any = parameter.is_some() || values.is_some() || series_param.is_some() || series_values.is_some();
    if !any {
        return Ok((scenario, None));
    }
    let parameter = parameter.ok_or_else(|| CliError::Config("sweep.parameter is missing".into()))?;
    let spec = SweepSpec {
        output_path: output.unwrap_or_else(|| default_output(&parameter)),
        values: values.unwrap_or_default(),
        series: match (series_param, series_values) {
            (None, None) => None,
            (Some(p), v) => Some(SeriesSpec {
                parameter: p,
                values: v.unwrap_or_default(),
            }),
            (None, Some(_)) => return Err(CliError::Config("sweep.series_values given without sweep.series".into())),
        },
        title,
        parameter,
    };
    spec.validate()?;
    Ok((scenario, Some(spec)))
}

/// Parses a full config file, sweep section included.
pub fn load_config(text: &str) -> Result<(ScenarioConfig, Option<SweepSpec>), CliError> {
    let (scenario, sweep) = split_config(text)?;
    Ok((parse_config(&scenario)?, sweep))
}

fn point_config(base: &ScenarioConfig, settings: &[(&str, &str)]) -> Result<ScenarioConfig, CliError> {
    let mut cfg = base.clone();
    for (key, value) in settings {
        cfg.set(key, value)
            .map_err(|msg| CliError::Config(format!("{key} = {value}: {msg}")))?;
    }
    cfg.validate()
        .map_err(|e| CliError::Config(format!("{}: {e}", describe(settings))))?;
    Ok(cfg)
}

fn describe(settings: &[(&str, &str)]) -> String {
    settings
        .iter()
        .map(|(k, v)| format!("{k} = {v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Runs every sweep point with the base config's seed, so all points share
/// common random numbers. Every point is validated before any simulation
/// starts.
pub fn run_sweep(cfg: &ScenarioConfig, spec: &SweepSpec) -> Result<Vec<Series>, CliError> {
    spec.validate()?;
    let groups: Vec<(String, Option<(&str, &str)>)> = match &spec.series {
        Some(s) => s
            .values
            .iter()
            .map(|v| (v.clone(), Some((s.parameter.as_str(), v.as_str()))))
            .collect(),
        None => vec![(String::new(), None)],
    };
    let mut plan = Vec::with_capacity(groups.len());
    for (label, outer) in &groups {
        let mut points = Vec::with_capacity(spec.values.len());
        for value in &spec.values {
            let mut settings: Vec<(&str, &str)> = outer.iter().copied().collect();
            settings.push((spec.parameter.as_str(), value.as_str()));
            points.push((value.as_str(), point_config(cfg, &settings)?));
        }
        plan.push((label.clone(), points));
    }
    plan.into_iter()
        .map(|(label, points)| {
            let rows = points
                .into_iter()
                .map(|(value, point)| {
                    let report = monte_carlo(&point, point.seed)?;
                    Ok(SweepRow::from_report(value, &report))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(Series { label, rows })
        })
        .collect()
}

/// Renders `x` with at least [`SIG_DIGITS`] significant digits, in plain
/// notation where that stays readable.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", (SIG_DIGITS - 1) as usize, 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..10).contains(&magnitude) {
        let decimals = (SIG_DIGITS - 1 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{:.*e}", (SIG_DIGITS - 1) as usize, x)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV text for `rows`, header first, CRLF-free.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&r.param),
            format_number(r.mean_lambda),
            format_number(r.std_lambda),
            format_number(r.r_service),
            format_number(r.mean_m),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_ten_significant_digits() {
        assert_eq!(format_number(0.5), "0.5000000000");
        assert_eq!(format_number(25.0), "25.00000000");
        assert_eq!(format_number(0.0), "0.000000000");
        assert_eq!(format_number(1.234e-7), "1.234000000e-7");
        assert_eq!(format_number(0.91563), "0.9156300000");
    }

    #[test]
    fn csv_quotes_awkward_params() {
        let row = SweepRow {
            param: "a,b".into(),
            mean_lambda: 1.0,
            std_lambda: 0.0,
            r_service: 1.0,
            mean_m: 3.0,
        };
        let csv = to_csv(&[row]);
        assert!(csv.starts_with("param,mean_lambda,std_lambda,r_service,mean_m\n\"a,b\","));
    }

    #[test]
    fn sweep_section_is_split_out() {
        let text = "lfp = 0.1\nsweep.parameter = max_fr\nsweep.values = 10, 12 ,14\n";
        let (scenario, spec) = split_config(text).unwrap();
        assert_eq!(scenario, "lfp = 0.1\n\n\n");
        let spec = spec.unwrap();
        assert_eq!(spec.values, vec!["10", "12", "14"]);
        assert_eq!(spec.output_path, PathBuf::from("max_fr.csv"));
    }

    #[test]
    fn sweep_section_errors() {
        assert!(split_config("sweep.values = 1").is_err());
        assert!(split_config("sweep.parameter = seed\nsweep.values = 1").is_err());
        assert!(split_config("sweep.parameter = nope\nsweep.values = 1").is_err());
        assert!(split_config("sweep.parameter = lfp").is_err());
        assert!(split_config("sweep.colour = red").is_err());
    }

    #[test]
    fn bad_point_fails_before_running() {
        let mut cfg = ScenarioConfig::default();
        cfg.q_runs = 1;
        let spec = SweepSpec::new("lfp", &["0.1", "1.5"]);
        assert!(matches!(run_sweep(&cfg, &spec), Err(CliError::Config(_))));
    }

    #[test]
    fn single_value_gives_single_row() {
        let mut cfg = ScenarioConfig::default();
        cfg.q_runs = 2;
        cfg.n_nodes = 5;
        cfg.m_agents = 2;
        let series = run_sweep(&cfg, &SweepSpec::new("lfp", &["0.3"])).unwrap();
        assert_eq!(series.len(), 1);
        assert_eq!(series[0].rows.len(), 1);
        assert_eq!(to_csv(&series[0].rows).lines().count(), 2);
    }
}
