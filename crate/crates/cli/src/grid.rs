//! Payload grids from the command line.

use crate::{CliError, Result};

/// Parses `start:stop:step` (both ends inclusive) or `a,b,c`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| CliError::Usage(format!("grid '{text}': {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let grid: Vec<f64> = if let Some((a, rest)) = text.split_once(':') {
        let (b, c) = rest.split_once(':').ok_or_else(|| bad("expected start:stop:step"))?;
        let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
        if !(step > 0.0) || !step.is_finite() || stop < start {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=count).map(|i| start + i as f64 * step).collect()
    } else {
        text.split(',').map(num).collect::<Result<_>>()?
    };
    if grid.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(bad("payloads must be finite and non-negative"));
    }
    Ok(grid)
}
