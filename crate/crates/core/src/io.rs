//! Line-oriented text format for models and kernels.
//!
//! A model file has three sections introduced by `#theta`, `#x`, `#P`:
//! under `#theta` one `label weight` pair per line, under `#x` one sample
//! label per line, under `#P` one whitespace-separated row per parameter
//! point, in sample-label order. `;` starts a comment. A kernel file uses
//! `#theta` (label and reference weight) followed by `#R` rows.

use crate::error::{Error, Result};
use crate::kernel::TransitionKernel;
use crate::measure::WeightedMeasure;
use crate::model::FiniteModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Theta,
    X,
    Matrix,
}

struct Parsed {
    theta_labels: Vec<String>,
    theta_weights: Vec<f64>,
    x_labels: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn parse_sections(text: &str, matrix_header: &str, want_x: bool) -> Result<Parsed> {
    let mut section = Section::None;
    let mut out = Parsed {
        theta_labels: Vec::new(),
        theta_weights: Vec::new(),
        x_labels: Vec::new(),
        rows: Vec::new(),
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split(';').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('#') {
            section = match header.trim() {
                "theta" => Section::Theta,
                "x" if want_x => Section::X,
                h if h == matrix_header => Section::Matrix,
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown section header #{other}"),
                    })
                }
            };
            continue;
        }
        match section {
            Section::None => {
                return Err(Error::Parse {
                    line,
                    msg: "data before any section header".into(),
                })
            }
            Section::Theta => {
                let mut parts = content.split_whitespace();
                let label = parts.next().expect("non-empty line has a token");
                let weight_tok = parts.next().ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("expected `label weight`, got {content:?}"),
                })?;
                if parts.next().is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: format!("trailing tokens after `label weight` in {content:?}"),
                    });
                }
                let weight: f64 = weight_tok.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("cannot parse weight {weight_tok:?}"),
                })?;
                out.theta_labels.push(label.to_string());
                out.theta_weights.push(weight);
            }
            Section::X => {
                if content.split_whitespace().count() != 1 {
                    return Err(Error::Parse {
                        line,
                        msg: format!("expected a single label, got {content:?}"),
                    });
                }
                out.x_labels.push(content.to_string());
            }
            Section::Matrix => {
                let row = content
                    .split_whitespace()
                    .map(|tok| {
                        tok.parse::<f64>().map_err(|_| Error::Parse {
                            line,
                            msg: format!("cannot parse entry {tok:?}"),
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                out.rows.push(row);
            }
        }
    }
    Ok(out)
}

/// Parses a model file.
pub fn parse_model(text: &str) -> Result<FiniteModel> {
    let parsed = parse_sections(text, "P", true)?;
    if parsed.theta_labels.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "missing or empty #theta section".into(),
        });
    }
    if parsed.x_labels.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "missing or empty #x section".into(),
        });
    }
    let nu = WeightedMeasure::new(parsed.theta_labels, parsed.theta_weights)?;
    FiniteModel::new(nu, parsed.x_labels, parsed.rows)
}

/// Serializes a model in the same format `parse_model` reads. Floats use
/// the shortest representation that round-trips, so write-then-parse is
/// exact.
pub fn write_model(model: &FiniteModel) -> String {
    let mut out = String::new();
    out.push_str("#theta\n");
    for (label, &w) in model.prior().labels().iter().zip(model.prior().weights()) {
        out.push_str(&format!("{label} {w}\n"));
    }
    out.push_str("#x\n");
    for label in model.x_labels() {
        out.push_str(label);
        out.push('\n');
    }
    out.push_str("#P\n");
    for row in model.p() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a kernel file: `#theta` with reference weights, then `#R`.
pub fn parse_kernel(text: &str) -> Result<(WeightedMeasure, TransitionKernel)> {
    let parsed = parse_sections(text, "R", false)?;
    if parsed.theta_labels.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "missing or empty #theta section".into(),
        });
    }
    let phi = WeightedMeasure::new(parsed.theta_labels, parsed.theta_weights)?;
    let kernel = TransitionKernel::new(phi.labels().to_vec(), parsed.rows)?;
    Ok((phi, kernel))
}

/// Serializes a kernel with its reference measure.
pub fn write_kernel(phi: &WeightedMeasure, kernel: &TransitionKernel) -> Result<String> {
    if phi.labels() != kernel.state_labels() {
        return Err(Error::DimensionMismatch(
            "measure and kernel labels differ".into(),
        ));
    }
    let mut out = String::new();
    out.push_str("#theta\n");
    for (label, &w) in phi.labels().iter().zip(phi.weights()) {
        out.push_str(&format!("{label} {w}\n"));
    }
    out.push_str("#R\n");
    for row in kernel.matrix() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    Ok(out)
}
