//! Human-readable rendering of artifacts.

use std::fmt::Write;

use strat_forge::{LinkTree, Partition, Support, VerificationReport, WeightSystem};

use crate::artifact::Artifact;

pub fn render(a: &Artifact) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "strat-forge {} (schema {})", a.command, a.schema_version);
    let _ = writeln!(out, "system: {}", describe_system(&a.system));
    let _ = writeln!(out, "quotient: {}", a.kind.name());
    if let Some(seed) = a.seed {
        let _ = writeln!(out, "seed: {seed}");
    }
    let partition = a.partition.as_ref().or(a.link_tree.as_ref().map(|t| &t.partition));
    if let Some(p) = partition {
        out.push('\n');
        stratum_table(&mut out, p);
        out.push('\n');
        hasse(&mut out, p);
    }
    if let Some(t) = &a.link_tree {
        out.push('\n');
        let _ = writeln!(out, "link tree (height {}, {} nodes{}):", t.height(), t.node_count(),
            if t.is_truncated() { ", truncated" } else { "" });
        link_tree(&mut out, t, 1);
    }
    if let Some(v) = &a.verification {
        out.push('\n');
        verification(&mut out, v);
    }
    out
}

fn describe_system(ws: &WeightSystem) -> String {
    let mut parts = vec![format!("n = {}", ws.n())];
    if ws.torus_rank() > 0 {
        parts.push(format!("T^{} weights {:?}", ws.torus_rank(), ws.weight_rows()));
    }
    if !ws.moduli().is_empty() {
        let factors: Vec<String> = ws.moduli().iter().map(|m| format!("Z/{m}")).collect();
        parts.push(format!("{} characters {:?}", factors.join(" × "), ws.finite_char_rows()));
    }
    parts.join(", ")
}

fn set(s: Support) -> String {
    let items: Vec<String> = s.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn stratum_table(out: &mut String, p: &Partition) {
    if p.is_empty() {
        let _ = writeln!(out, "the quotient is empty");
        return;
    }
    let _ = writeln!(
        out,
        "{} {}, dimension {}, {} component(s); coordinates fixed by the whole group: {}",
        p.strata.len(),
        if p.strata.len() == 1 { "stratum" } else { "strata" },
        p.dimension().unwrap_or(0),
        p.components.len(),
        set(p.free_coords)
    );
    let rows: Vec<[String; 5]> = p
        .strata
        .iter()
        .map(|s| {
            let mut flags = Vec::new();
            if s.is_open {
                flags.push("open");
            }
            if s.is_principal {
                flags.push("principal");
            }
            let members: Vec<String> = s.supports.iter().map(|&m| set(m)).collect();
            [
                s.label(),
                s.isotropy.label(),
                s.dimension.to_string(),
                flags.join(","),
                members.join(" "),
            ]
        })
        .collect();
    let header = ["stratum", "isotropy", "dim", "flags", "supports"];
    let mut widths = header.map(|h| h.chars().count());
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: [&str; 5]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let _ = writeln!(out, "{}", line(header));
    for r in &rows {
        let _ = writeln!(out, "{}", line([&r[0], &r[1], &r[2], &r[3], &r[4]]));
    }
}

/// Covering relations of the frontier order, drawn from each open stratum
/// down to the strata in its closure.
fn hasse(out: &mut String, p: &Partition) {
    if p.is_empty() {
        return;
    }
    let covers = |upper: usize| -> Vec<usize> {
        let mut below: Vec<usize> = p
            .frontier
            .iter()
            .filter(|&&(a, b)| b == upper && !p.frontier.iter().any(|&(c, d)| d == upper && p.precedes(a, c)))
            .map(|&(a, _)| a)
            .collect();
        below.sort_unstable();
        below
    };
    fn draw(out: &mut String, p: &Partition, sigma: usize, depth: usize, covers: &dyn Fn(usize) -> Vec<usize>) {
        let s = &p.strata[sigma];
        let _ = writeln!(out, "{}{} ({}, dim {})", "  ".repeat(depth + 1), s.label(), s.isotropy.label(), s.dimension);
        for c in covers(sigma) {
            draw(out, p, c, depth + 1, covers);
        }
    }
    let _ = writeln!(out, "frontier (each stratum lists the strata in its closure it covers):");
    for s in p.strata.iter().filter(|s| s.is_open) {
        draw(out, p, s.id, 0, &covers);
    }
}

fn link_tree(out: &mut String, t: &LinkTree, indent: usize) {
    let pad = "  ".repeat(indent);
    for node in &t.nodes {
        let s = &t.partition.strata[node.stratum];
        let model = match node.link_dimension {
            Some(l) => format!("D^{} × cone(L^{l})", node.fixed_dim),
            None => format!("D^{}", node.fixed_dim),
        };
        let ok = node.predicted_dimensions == node.neighborhood_dimensions;
        let _ = writeln!(
            out,
            "{pad}{} ({}, dim {}) at {}: {model}; model dims {:?} vs neighborhood {:?} [{}]",
            s.label(),
            s.isotropy.label(),
            node.dimension,
            set(node.base_support),
            node.predicted_dimensions,
            node.neighborhood_dimensions,
            if ok { "ok" } else { "MISMATCH" }
        );
        if let Some(l) = &node.link {
            let cone = node.link_dimension.map(|d| format!("; dim cone = {}", d + 1)).unwrap_or_default();
            let _ = writeln!(out, "{pad}  link: {}{cone}", describe_system(l));
        }
        if node.truncated {
            let _ = writeln!(out, "{pad}  (recursion truncated)");
        }
        if let Some(c) = &node.children {
            link_tree(out, c, indent + 2);
        }
    }
}

fn verification(out: &mut String, v: &VerificationReport) {
    let _ = writeln!(out, "verification: {}", if v.pass { "PASS" } else { "FAIL" });
    let count = |pass: usize, total: usize| format!("{pass}/{total}");
    let _ = writeln!(
        out,
        "  stratum dimensions (PCA, theta {}, {} samples each): {}",
        v.budget.pca.theta,
        v.budget.samples_per_estimate,
        count(v.strata.iter().filter(|c| c.pass).count(), v.strata.len())
    );
    let _ = writeln!(
        out,
        "  neighborhood dimensions: {}",
        count(v.neighborhoods.iter().filter(|c| c.pass).count(), v.neighborhoods.len())
    );
    for c in &v.connectivity {
        let _ = writeln!(
            out,
            "  link at {:?}: {} component(s), {} samples, eps {:.3e} (scale {} x rank-{} neighbor distance {:.3e})",
            c.path,
            c.result.components,
            c.result.samples,
            c.result.eps,
            v.budget.connectivity.eps_scale,
            c.result.neighbor_rank,
            c.result.scale
        );
    }
    if let Some(d) = &v.density {
        let _ = writeln!(
            out,
            "  principal density: {:.6} over {} samples (threshold {})",
            d.fraction, d.samples, d.threshold
        );
    }
    let _ = writeln!(
        out,
        "  homogeneity residual {:.3e}, equivariance residual {:.3e} (tolerance {:e}); level tolerance {:e}",
        v.homogeneity_residual, v.equivariance_residual, v.homogeneity_tolerance, v.level_tolerance
    );
    if !v.complete {
        let _ = writeln!(out, "  report incomplete (budget exhausted or tree truncated)");
    }
    for f in v.failures() {
        let _ = writeln!(out, "  failed: {f}");
    }
}
