// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{SamplingPlan, SpectralError, TraceSource};
use crate::algebra::eigen2_continuous;

/// One evaluation of the trace function. Failures are kept per sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSample {
    pub lambda: Complex64,
    pub trace: Option<Complex64>,
    /// `|η η′ − 1|` for the two holonomy eigenvalues, when a holonomy exists.
    pub sigma_defect: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSweep {
    pub circle: Vec<TraceSample>,
    pub annulus: Vec<TraceSample>,
}

impl TraceSweep {
    pub fn failures(&self) -> usize {
        self.circle.iter().chain(&self.annulus).filter(|s| s.trace.is_none()).count()
    }
}

pub(crate) fn sample<S: TraceSource + ?Sized>(source: &S, lambda: Complex64) -> TraceSample {
    match source.holonomy(lambda) {
        Some(Ok(m)) => {
            let [a, b] = eigen2_continuous(&m, None);
            TraceSample { lambda, trace: Some(m.trace()), sigma_defect: Some((a * b - 1.0).norm()), error: None }
        }
        Some(Err(e)) => TraceSample { lambda, trace: None, sigma_defect: None, error: Some(e.to_string()) },
        None => match source.trace(lambda) {
            Ok(t) if t.is_finite() => TraceSample { lambda, trace: Some(t), sigma_defect: None, error: None },
            Ok(_) => TraceSample { lambda, trace: None, sigma_defect: None, error: Some("non-finite trace".into()) },
            Err(e) => TraceSample { lambda, trace: None, sigma_defect: None, error: Some(e.to_string()) },
        },
    }
}

/// Samples `t(λ)` on the unit circle and on the log-polar annulus grid.
pub fn trace_sweep<S: TraceSource + ?Sized>(source: &S, plan: &SamplingPlan) -> Result<TraceSweep, SpectralError> {
    plan.validate()?;
    let eval = |pts: Vec<Complex64>| -> Vec<TraceSample> { pts.into_par_iter().map(|l| sample(source, l)).collect() };
    Ok(TraceSweep { circle: eval(plan.circle_points()), annulus: eval(plan.annulus_points()) })
}

/// CSV with a schema comment line and columns `set,lambda_re,lambda_im,trace_re,trace_im,error`.
pub fn write_sweep_csv(sweep: &TraceSweep, mut w: impl Write) -> Result<(), SpectralError> {
    writeln!(w, "# schema_version={} kind=trace-sweep", crate::SCHEMA_VERSION)?;
    writeln!(w, "set,lambda_re,lambda_im,trace_re,trace_im,error")?;
    for (set, samples) in [("circle", &sweep.circle), ("annulus", &sweep.annulus)] {
        for s in samples {
            let (tr, ti) = s.trace.map(|t| (format!("{:e}", t.re), format!("{:e}", t.im))).unwrap_or_default();
            let err = s.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
            writeln!(w, "{set},{:e},{:e},{tr},{ti},{err}", s.lambda.re, s.lambda.im)?;
        }
    }
    Ok(())
}
