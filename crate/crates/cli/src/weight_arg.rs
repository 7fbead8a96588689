//! Weight-law flags shared by the subcommands that synthesize.

use clap::Args;
use mixpreserve::solver::solve;
use mixpreserve::{EpBetaParams, SolverRequest, WeightDistribution};

use crate::CliError;

#[derive(Args, Debug, Clone, Default)]
pub struct WeightArgs {
    /// Weight law: JSON such as '{"kind":"uniform"}', or shorthand
    /// `uniform`, `beta:A,B`, `epbeta:A,B,E0,E1`, `gauss_preserving:MU`
    #[arg(long)]
    pub weight: Option<String>,

    /// Lower expansion for a solver-derived EpBeta weight
    #[arg(long = "epsilon0", visible_alias = "eps0")]
    pub eps0: Option<f64>,

    /// Upper expansion for a solver-derived EpBeta weight
    #[arg(long = "epsilon1", visible_alias = "eps1")]
    pub eps1: Option<f64>,

    /// Gap tolerance for a solver-derived EpBeta weight, in [0, 1]
    #[arg(long, value_parser = parse_delta)]
    pub delta: Option<f64>,
}

pub fn parse_delta(s: &str) -> Result<f64, String> {
    let d: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&d) {
        Ok(d)
    } else {
        Err(format!("delta must lie in [0, 1], got {d}"))
    }
}

/// A resolved weight law, with the solver output when it was derived.
pub struct ResolvedWeight {
    pub weight: WeightDistribution,
    pub solved: Option<EpBetaParams>,
}

impl WeightArgs {
    pub fn is_empty(&self) -> bool {
        self.weight.is_none() && self.eps0.is_none() && self.eps1.is_none() && self.delta.is_none()
    }

    pub fn resolve(&self) -> Result<ResolvedWeight, CliError> {
        let solver_flags = self.eps0.is_some() || self.eps1.is_some() || self.delta.is_some();
        match (&self.weight, solver_flags) {
            (Some(_), true) => Err(CliError::Usage(
                "give either --weight or --epsilon0/--epsilon1/--delta, not both".into(),
            )),
            (Some(text), false) => Ok(ResolvedWeight { weight: parse_weight(text)?, solved: None }),
            (None, true) => {
                let (Some(eps0), Some(eps1), Some(delta)) = (self.eps0, self.eps1, self.delta) else {
                    return Err(CliError::Usage("--epsilon0, --epsilon1 and --delta must be given together".into()));
                };
                let params = solve(&SolverRequest::new(eps0, eps1, delta))?;
                Ok(ResolvedWeight { weight: params.weight(), solved: Some(params) })
            }
            (None, false) => Err(CliError::Usage("a weight law is required: --weight or --epsilon0/--epsilon1/--delta".into())),
        }
    }
}

fn numbers(body: &str, expected: usize, kind: &str) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = body
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("bad number in {kind} weight: {e}")))?;
    if values.len() != expected {
        return Err(CliError::Usage(format!("{kind} weight takes {expected} numbers, got {}", values.len())));
    }
    Ok(values)
}

pub fn parse_weight(text: &str) -> Result<WeightDistribution, CliError> {
    let text = text.trim();
    if text.starts_with('{') {
        return serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad weight JSON: {e}")));
    }
    let (kind, body) = text.split_once(':').unwrap_or((text, ""));
    let w = match kind {
        "uniform" if body.is_empty() => Ok(WeightDistribution::Uniform),
        "beta" => {
            let v = numbers(body, 2, kind)?;
            WeightDistribution::beta(v[0], v[1])
        }
        "epbeta" => {
            let v = numbers(body, 4, kind)?;
            WeightDistribution::epbeta(v[0], v[1], v[2], v[3])
        }
        "gauss_preserving" => {
            let v = numbers(body, 1, kind)?;
            WeightDistribution::gauss_preserving(v[0])
        }
        _ => return Err(CliError::Usage(format!("unknown weight law {text:?}"))),
    };
    w.map_err(|e| CliError::Usage(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_and_json_agree() {
        let a = parse_weight("epbeta:4.34,1.33,0.3,0.3").unwrap();
        let b = parse_weight(r#"{"kind":"epbeta","alpha":4.34,"beta":1.33,"eps0":0.3,"eps1":0.3}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_weight("uniform").unwrap(), WeightDistribution::Uniform);
        assert_eq!(parse_weight("beta:0.1,0.1").unwrap(), WeightDistribution::beta(0.1, 0.1).unwrap());
    }

    #[test]
    fn bad_weights_are_usage_errors() {
        for bad in ["beta:1", "beta:-1,2", "nope", "uniform:3", "{\"kind\":\"beta\"}"] {
            assert!(matches!(parse_weight(bad), Err(CliError::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn delta_range() {
        assert!(parse_delta("1.5").is_err());
        assert!(parse_delta("-0.1").is_err());
        assert_eq!(parse_delta("0.05"), Ok(0.05));
    }

    #[test]
    fn exactly_one_source() {
        let both = WeightArgs { weight: Some("uniform".into()), delta: Some(0.1), ..Default::default() };
        assert!(matches!(both.resolve(), Err(CliError::Usage(_))));
        let partial = WeightArgs { eps0: Some(0.3), ..Default::default() };
        assert!(matches!(partial.resolve(), Err(CliError::Usage(_))));
        let solved = WeightArgs { eps0: Some(0.3), eps1: Some(0.3), delta: Some(0.05), ..Default::default() };
        assert!(solved.resolve().unwrap().solved.is_some());
    }
}
