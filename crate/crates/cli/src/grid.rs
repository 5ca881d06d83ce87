//! Range flags of the form `start:stop:step` (inclusive) or a single value.

use crate::error::{CliError, CliResult};

/// Relative slack so that `stop` survives accumulated rounding.
const STOP_SLACK: f64 = 1e-9;

pub fn parse_range(flag: &str, text: &str) -> CliResult<Vec<f64>> {
    let bad = |why: &str| CliError::Config(format!("{flag} '{text}': {why}"));
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| bad(&format!("'{s}' is not a number")))
    };
    let grid = match parts.as_slice() {
        [single] => vec![num(single)?],
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(start.is_finite() && stop.is_finite()) {
                return Err(bad("bounds must be finite"));
            }
            if !(step > 0.0 && step.is_finite()) {
                return Err(bad("step must be positive"));
            }
            if stop < start {
                Vec::new()
            } else {
                let count =
                    ((stop - start) / step * (1.0 + STOP_SLACK) + STOP_SLACK).floor() as usize + 1;
                (0..count).map(|i| start + i as f64 * step).collect()
            }
        }
        _ => return Err(bad("expected start:stop:step or a single value")),
    };
    if grid.is_empty() {
        return Err(bad("empty grid"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_ranges() {
        assert_eq!(
            parse_range("--tau-ms", "10:30:10").unwrap(),
            vec![10.0, 20.0, 30.0]
        );
        let g = parse_range("--gamma0-db", "-13:30:0.5").unwrap();
        assert_eq!(g.len(), 87);
        assert!((g[86] - 30.0).abs() < 1e-9);
        assert_eq!(parse_range("--x", "0:0.3:0.1").unwrap().len(), 4);
        assert_eq!(parse_range("--x", "4").unwrap(), vec![4.0]);
    }

    #[test]
    fn malformed_or_empty() {
        for bad in [
            "", "1:2", "a:2:1", "1:2:0", "1:2:-1", "5:1:1", "1:2:3:4", "nan",
        ] {
            let err = parse_range("--x", bad).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}");
        }
    }
}
