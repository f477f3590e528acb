//! Parsers for the `--prior` and `--state` arguments.

use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use personick_core::{InBetweenState, PriorPdf, PureState};

use crate::CliError;

/// Largest Fock index the binomial closed forms accept.
pub const MAX_PHOTONS: usize = 170;

fn numbers(body: &str, expected: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let values = body
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("{what}: cannot parse '{s}' as a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != expected {
        return Err(CliError::Config(format!(
            "{what}: expected {expected} comma-separated values, got {}",
            values.len()
        )));
    }
    Ok(values)
}

/// Parses `twopoint:q,t0,t1`, `beta:a,b`, `delta:t0` or `file:<path>`.
pub fn parse_prior(spec: &str) -> Result<PriorPdf, CliError> {
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("prior '{spec}' must look like kind:params")))?;
    let prior = match kind {
        "twopoint" => {
            let v = numbers(body, 3, "twopoint")?;
            PriorPdf::two_point(v[0], v[1], v[2])
        }
        "beta" => {
            let v = numbers(body, 2, "beta")?;
            PriorPdf::beta(v[0], v[1])
        }
        "delta" => {
            let v = numbers(body, 1, "delta")?;
            PriorPdf::delta(v[0])
        }
        "file" => return read_prior_file(Path::new(body)),
        other => return Err(CliError::Config(format!("unknown prior kind '{other}'"))),
    };
    prior.map_err(CliError::from)
}

/// Reads `node,weight` lines. Lines starting with `#` are ignored.
pub fn read_prior_file(path: &Path) -> Result<PriorPdf, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if record.len() != 2 {
            return Err(CliError::Config(format!(
                "{}: expected node,weight per line",
                path.display()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| CliError::Config(format!("{}: bad number '{s}'", path.display())))
        };
        nodes.push(parse(&record[0])?);
        weights.push(parse(&record[1])?);
    }
    Ok(PriorPdf::numeric(nodes, weights)?)
}

/// A probe state as given on the command line, before choosing a cutoff.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Fock(usize),
    InBetween(f64),
    Amplitudes(Vec<Complex64>),
}

impl FromStr for StateSpec {
    type Err = CliError;

    fn from_str(spec: &str) -> Result<Self, CliError> {
        let (kind, body) = spec
            .split_once(':')
            .ok_or_else(|| CliError::Config(format!("state '{spec}' must look like kind:params")))?;
        match kind {
            "fock" => {
                let n = body
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Config(format!("fock: '{body}' is not a photon number")))?;
                if n > MAX_PHOTONS {
                    return Err(CliError::Config(format!("fock: n = {n} exceeds {MAX_PHOTONS}")));
                }
                Ok(Self::Fock(n))
            }
            "inbetween" => {
                let nbar = numbers(body, 1, "inbetween")?[0];
                if !(0.0..=MAX_PHOTONS as f64).contains(&nbar) {
                    return Err(CliError::Config(format!(
                        "inbetween: nbar = {nbar} must lie in [0, {MAX_PHOTONS}]"
                    )));
                }
                Ok(Self::InBetween(nbar))
            }
            "amps" => {
                let amps = body
                    .split(',')
                    .map(|s| {
                        Complex64::from_str(s.trim())
                            .map_err(|_| CliError::Config(format!("amps: bad amplitude '{s}'")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Self::Amplitudes(amps))
            }
            other => Err(CliError::Config(format!("unknown state kind '{other}'"))),
        }
    }
}

impl StateSpec {
    /// Smallest cutoff that holds the state.
    pub fn min_cutoff(&self) -> usize {
        match self {
            Self::Fock(n) => *n,
            Self::InBetween(nbar) => nbar.ceil() as usize,
            Self::Amplitudes(a) => a.len().saturating_sub(1),
        }
    }

    /// The state on `cutoff`, or on its minimal cutoff when `None`.
    /// Amplitudes are normalized.
    pub fn build(&self, cutoff: Option<usize>) -> Result<PureState, CliError> {
        let min = self.min_cutoff();
        let cutoff = cutoff.unwrap_or(min);
        if cutoff < min {
            return Err(CliError::Config(format!(
                "cutoff {cutoff} is below the {min} this state needs"
            )));
        }
        let state = match self {
            Self::Fock(n) => PureState::fock(*n, cutoff)?,
            Self::InBetween(nbar) => InBetweenState::new(*nbar)?.pure(cutoff)?,
            Self::Amplitudes(a) => PureState::normalized(a.clone())?.embed(cutoff)?,
        };
        Ok(state)
    }

    /// Photon number when the state is a Fock state.
    pub fn photon_number(&self) -> Option<usize> {
        match self {
            Self::Fock(n) => Some(*n),
            Self::InBetween(nbar) if nbar.fract() == 0.0 => Some(*nbar as usize),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn priors() {
        assert_eq!(
            parse_prior("twopoint:0.79,0.127,0.641").unwrap(),
            PriorPdf::two_point(0.79, 0.127, 0.641).unwrap()
        );
        assert_eq!(parse_prior("beta:2,4").unwrap(), PriorPdf::beta(2.0, 4.0).unwrap());
        assert_eq!(parse_prior("delta:0.3").unwrap(), PriorPdf::delta(0.3).unwrap());
        for bad in ["beta:2", "gauss:1,2", "twopoint:0.5,1.2,0.1", "beta:-1,2", "beta"] {
            assert!(parse_prior(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn prior_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# node,weight\n0.2,0.25\n0.6, 0.75").unwrap();
        let spec = format!("file:{}", f.path().display());
        assert_eq!(
            parse_prior(&spec).unwrap(),
            PriorPdf::numeric(vec![0.2, 0.6], vec![0.25, 0.75]).unwrap()
        );
        assert!(parse_prior("file:/nonexistent/prior.csv").is_err());
    }

    #[test]
    fn states() {
        assert_eq!("fock:3".parse::<StateSpec>().unwrap(), StateSpec::Fock(3));
        assert_eq!("inbetween:1.5".parse::<StateSpec>().unwrap().min_cutoff(), 2);
        let amps: StateSpec = "amps:1,1i".parse().unwrap();
        let s = amps.build(Some(3)).unwrap();
        assert_eq!(s.cutoff(), 3);
        assert!((s.weights()[1] - 0.5).abs() < 1e-15);
        assert!("fock:171".parse::<StateSpec>().is_err());
        assert!("fock:2".parse::<StateSpec>().unwrap().build(Some(1)).is_err());
        assert!("amps:0,0".parse::<StateSpec>().unwrap().build(None).is_err());
    }
}
