use std::io::Write;

use serde::{Deserialize, Serialize};

use super::erlang::{stability_big, stability_tiny};
use crate::{Error, Result};

/// One row of `k,epsilon,theta_star,tau_ms,feasible`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSweepRow {
    pub k: usize,
    pub epsilon: f64,
    pub theta_star: Option<f64>,
    pub tau_ms: Option<f64>,
    pub feasible: bool,
}

/// One row of `l,kappa,rho_max_tiny,rho_max_big`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityCurveRow {
    pub l: usize,
    pub kappa: u32,
    pub rho_max_tiny: f64,
    pub rho_max_big: f64,
}

/// Analytical stability limits of tiny- and big-tasks split-merge for every
/// `(l, κ)` pair.
pub fn stability_curve(l_values: &[usize], kappas: &[u32]) -> Result<Vec<StabilityCurveRow>> {
    let mut rows = Vec::with_capacity(l_values.len() * kappas.len());
    for &l in l_values {
        for &kappa in kappas {
            if l == 0 || kappa == 0 {
                return Err(Error::InvalidArgument("l and kappa must be >= 1".into()));
            }
            rows.push(StabilityCurveRow {
                l,
                kappa,
                rho_max_tiny: stability_tiny(l, f64::from(kappa)),
                rho_max_big: stability_big(l, kappa, 1.0)?,
            });
        }
    }
    Ok(rows)
}

fn write<W: Write, T: Serialize>(writer: W, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_bound_sweep_csv<W: Write>(writer: W, rows: &[BoundSweepRow]) -> Result<()> {
    write(
        writer,
        rows,
        &["k", "epsilon", "theta_star", "tau_ms", "feasible"],
    )
}

pub fn write_stability_curve_csv<W: Write>(writer: W, rows: &[StabilityCurveRow]) -> Result<()> {
    write(writer, rows, &["l", "kappa", "rho_max_tiny", "rho_max_big"])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_sweep_csv_layout() {
        let rows = [
            BoundSweepRow {
                k: 50,
                epsilon: 0.01,
                theta_star: Some(0.25),
                tau_ms: Some(1200.5),
                feasible: true,
            },
            BoundSweepRow {
                k: 100,
                epsilon: 0.01,
                theta_star: None,
                tau_ms: None,
                feasible: false,
            },
        ];
        let mut buf = Vec::new();
        write_bound_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "k,epsilon,theta_star,tau_ms,feasible\n50,0.01,0.25,1200.5,true\n100,0.01,,,false\n"
        );
    }

    #[test]
    fn stability_curve_rows() {
        let rows = stability_curve(&[1, 10], &[1, 4]).unwrap();
        assert_eq!(rows.len(), 4);
        assert!((rows[0].rho_max_big - 1.0).abs() < 1e-9);
        assert!((rows[2].rho_max_big - rows[2].rho_max_tiny).abs() < 1e-9);
        assert!(rows[3].rho_max_big < rows[3].rho_max_tiny);
        let mut buf = Vec::new();
        write_stability_curve_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("l,kappa,rho_max_tiny,rho_max_big\n1,1,"));
    }
}
