//! Human-readable views: the task grid and report tables.

use std::fmt::Write;

use codedmv::{AssignmentPlan, BoundReport, SystemParams};

/// Workers as columns, task lists top to bottom.
pub fn grid(plan: &AssignmentPlan) -> String {
    let headers: Vec<String> = (1..=plan.n()).map(|i| format!("W{i}")).collect();
    let cells: Vec<Vec<String>> = plan
        .workers
        .iter()
        .map(|w| w.iter().map(|t| t.label()).collect())
        .collect();
    let width = headers
        .iter()
        .chain(cells.iter().flatten())
        .map(String::len)
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{}", system_line(&plan.params));
    let row = |items: &mut dyn Iterator<Item = &str>| {
        items
            .map(|s| format!("{s:<width$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let _ = writeln!(out, "{}", row(&mut headers.iter().map(String::as_str)));
    let _ = writeln!(
        out,
        "{}",
        row(&mut std::iter::repeat_n("-".repeat(width), plan.n())
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str))
    );
    for k in 0..plan.ell() {
        let _ = writeln!(
            out,
            "{}",
            row(&mut cells.iter().map(|c| c.get(k).map_or("", String::as_str)))
        );
    }
    out
}

pub fn system_line(p: &SystemParams) -> String {
    format!(
        "{} system: n={} delta={} l_u={} l_c={} r_u={} gamma={}",
        p.placement,
        p.n,
        p.delta,
        p.ell_u,
        p.ell_c,
        p.r_u,
        p.gamma()
    )
}

pub fn bounds_text(p: &SystemParams, b: &BoundReport, reference: Option<bool>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", system_line(p));
    let _ = write!(out, "Q >= {}", b.q_lower);
    if let Some(w) = b.witness {
        let _ = write!(out, "  (witness x={}, beta={})", w.x, w.beta);
    }
    out.push('\n');
    match b.q_exact {
        Some(q) => {
            let _ = writeln!(out, "Q = {q} for the cyclic construction");
        }
        None => out.push_str("Q exact: not known\n"),
    }
    let _ = writeln!(out, "straggler resilience: {}", b.resilience);
    if let Some(r) = reference {
        let _ = writeln!(
            out,
            "plan is {}the reference construction",
            if r { "" } else { "not " }
        );
    }
    out
}

pub fn one_based(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}
