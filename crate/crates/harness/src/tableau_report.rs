//! Human- and machine-readable report on a tableau pair.

use std::fmt::Write;

use serde_json::{json, Value};
use sldg_core::analysis::{first_order_gh, limiting_order_coeffs, positivity_zmax};
use sldg_core::imex::ButcherPair;

use crate::config::SchemeSpec;
use crate::error::HarnessError;

/// Rounds to 12 significant digits so bisection noise does not leak out.
fn tidy(x: f64) -> f64 {
    format!("{x:.11e}").parse().expect("formatted real")
}

fn tidy_all(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| tidy(*x)).collect()
}

pub struct TableauReport {
    pub json: Value,
    pub text: String,
}

pub fn analyze_tableau(name: &str) -> Result<TableauReport, HarnessError> {
    let t = SchemeSpec::parse(name).load()?;
    Ok(report(&t))
}

pub fn report(t: &ButcherPair) -> TableauReport {
    let class = t.classify();
    let kind = if class.is_type_a {
        "A"
    } else if class.is_type_ck {
        "CK"
    } else {
        "other"
    };
    let mut text = String::new();
    let _ = writeln!(text, "tableau {} ({} stages)", t.name, t.stages());
    let _ = writeln!(
        text,
        "  type {kind}, ARS {}, GSA {}",
        class.is_ars, class.is_gsa
    );

    let order = match limiting_order_coeffs(t) {
        Ok(r) => {
            let [c, d, b, g, h, b1, b2, b3] = r.last().map(tidy);
            let _ = writeln!(
                text,
                "  limiting order verdict {} (last stage: C={c} D={d} B={b} G={g} H={h} B*={b1} B**={b2} B***={b3})",
                r.verdict
            );
            let _ = writeln!(
                text,
                "  third-order conditions {}",
                if r.third_order_conditions() { "hold" } else { "violated" }
            );
            json!({
                "verdict": r.verdict,
                "third_order_conditions": r.third_order_conditions(),
                "c": tidy_all(&r.c),
                "d": tidy_all(&r.d),
                "b": tidy_all(&r.b),
                "g": tidy_all(&r.g),
                "h": tidy_all(&r.h),
                "b_star": tidy_all(&r.b_star),
                "b_2star": tidy_all(&r.b_2star),
                "b_3star": tidy_all(&r.b_3star),
                "c_explicit_last": tidy(r.c_explicit_last),
            })
        }
        Err(e) => {
            let _ = writeln!(text, "  limiting order: {e}");
            json!({ "error": e.to_string() })
        }
    };

    let gh = match first_order_gh(t) {
        Ok(r) => {
            let s = r.g.len() - 1;
            let _ = writeln!(
                text,
                "  g_s = {}, h_s = {}: first-order recursion {}",
                tidy(r.g[s]),
                tidy(r.h[s]),
                if r.verdict { "consistent" } else { "inconsistent" }
            );
            json!({ "g": tidy_all(&r.g), "h": tidy_all(&r.h), "verdict": r.verdict })
        }
        Err(e) => {
            let _ = writeln!(text, "  g/h recursion: not applicable ({e})");
            Value::Null
        }
    };

    let (positivity, z_max, conditions, partial) = match positivity_zmax(t) {
        Ok(r) => {
            let label = if r.unconditional() {
                "unconditional"
            } else if r.z_max > 0.0 {
                "conditional"
            } else {
                "never"
            };
            let z = if r.z_max.is_finite() {
                json!(tidy(r.z_max))
            } else {
                Value::Null
            };
            let _ = writeln!(
                text,
                "  positivity {label}, z_max = {}{}",
                if r.z_max.is_finite() { tidy(r.z_max).to_string() } else { "inf".into() },
                if r.partial_coverage { " (first three stages only)" } else { "" }
            );
            for v in &r.violated {
                let _ = writeln!(text, "    violated: {v}");
            }
            (label, z, json!(r.conditions), r.partial_coverage)
        }
        Err(e) => {
            let _ = writeln!(text, "  positivity: not applicable ({e})");
            ("not applicable", Value::Null, Value::Null, false)
        }
    };

    let json = json!({
        "name": t.name,
        "stages": t.stages(),
        "type": kind,
        "ars": class.is_ars,
        "gsa": class.is_gsa,
        "order": order,
        "gh": gh,
        "positivity": positivity,
        "z_max": z_max,
        "positivity_partial": partial,
        "positivity_conditions": conditions,
    });
    TableauReport { json, text }
}
