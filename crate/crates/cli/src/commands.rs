use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;

use anyhow::{bail, Context, Result};

use strata_core::families::{build_family, recognize_family, FamilyTag};
use strata_core::ff_oracle::{dimension_estimate, enumerate_and_classify, verify_count_identity};
use strata_core::formulas::{
    check_instance, default_lambdas, sweep_instances, FormulaCheck, FormulaParams,
    FormulaRegistry, SweepConfig, CHECK_PRIMES,
};
use strata_core::linalg::parse_rat;
use strata_core::linsys::{assemble_system, LoopData};
use strata_core::partition::JordanAssignment;
use strata_core::quiver::{parse_presentation, BoundQuiverPresentation};
use strata_core::strata::{
    all_strata, dims_up_to, reducibility_scan, stratum_dim, ScanOptions, ScanOutcome,
};

use crate::output::{join, Table};
use crate::{
    AlgebraArg, Expect, FamilyArgs, Format, FormulaArgs, OracleArgs, ScanArgs, Status,
    StrataArgs, SystemArgs,
};
use rayon::prelude::*;

fn load(a: &AlgebraArg) -> Result<BoundQuiverPresentation> {
    let path = a.algebra.display();
    let text = fs::read_to_string(&a.algebra).with_context(|| format!("reading {path}"))?;
    parse_presentation(&text).with_context(|| format!("{path}"))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| anyhow::anyhow!("bad {what} `{s}`"))
        })
        .collect()
}

fn parse_dims(s: &str, pres: &BoundQuiverPresentation) -> Result<Vec<usize>> {
    let d: Vec<usize> = parse_list(s, "dimension vector")?;
    let n = pres.quiver().vertex_count();
    if d.len() != n {
        bail!("dimension vector `{s}` has {} entries, the quiver has {n} vertices", d.len());
    }
    Ok(d)
}

fn dims_text(d: &[usize]) -> String {
    format!("({})", join(d, ","))
}

fn print(s: &str) {
    print!("{s}");
}

pub fn strata(a: &StrataArgs, format: Format) -> Result<Status> {
    let pres = load(&a.algebra)?;
    let dims = parse_dims(&a.dim, &pres)?;
    let reports = all_strata(&pres, &dims)?;
    let mut t = Table::new(vec!["assignment", "orbit_dims", "ambient", "codim", "dim", "maximal"]);
    for r in &reports {
        t.push(vec![
            r.assignment.to_string(),
            join(&r.orbit_dims, ";"),
            r.ambient.to_string(),
            r.codim.to_string(),
            r.dim.to_string(),
            if r.maximal { "*" } else { "" }.to_string(),
        ]);
    }
    if format == Format::Text {
        println!("d = {}", dims_text(&dims));
    }
    print(&t.render(format));
    Ok(Status::Ok)
}

pub fn reduce_scan(a: &ScanArgs, format: Format) -> Result<Status> {
    let pres = load(&a.algebra)?;
    let range: Vec<Vec<usize>> = match (&a.dim, a.max_total) {
        (Some(d), _) => vec![parse_dims(d, &pres)?],
        (None, Some(max)) => dims_up_to(pres.quiver().vertex_count(), max)
            .into_iter()
            .filter(|d| d.iter().sum::<usize>() >= a.min_total)
            .collect(),
        (None, None) => bail!("either --dim or --max-total is required"),
    };
    let opts = ScanOptions {
        cap: a.cap,
        all: a.all,
    };
    let outcomes = range
        .iter()
        .map(|d| reducibility_scan(&pres, d, opts).map(|o| (d, o)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut found = 0usize;
    let mut text = String::new();
    let mut t = Table::new(vec![
        "d", "status", "max", "witness", "dim_max", "dim_witness", "c_max", "c_witness", "margin",
    ]);
    for (d, outcome) in &outcomes {
        let ds = dims_text(d);
        match outcome {
            ScanOutcome::Certificates(certs) => {
                found += certs.len();
                for c in certs {
                    text.push_str(&c.to_text());
                    t.push(vec![
                        ds.clone(),
                        "certificate".into(),
                        c.max.assignment.to_string(),
                        c.witness.assignment.to_string(),
                        c.max.dim.to_string(),
                        c.witness.dim.to_string(),
                        c.max.codim.to_string(),
                        c.witness.codim.to_string(),
                        c.margin().to_string(),
                    ]);
                }
            }
            ScanOutcome::NoCertificate { scanned } => {
                let _ = writeln!(text, "d = {ds}: no certificate ({scanned} strata scanned)");
                let mut row = vec![ds, "none".into()];
                row.extend(std::iter::repeat_n(String::new(), 7));
                t.push(row);
            }
            ScanOutcome::CapExceeded { assignments, cap } => {
                let _ = writeln!(
                    text,
                    "d = {ds}: not scanned, {assignments} assignments exceed cap {cap}"
                );
                let mut row = vec![ds, "cap".into()];
                row.extend(std::iter::repeat_n(String::new(), 7));
                t.push(row);
            }
        }
    }
    if !outcomes.is_empty() {
        match format {
            Format::Text => print(&text),
            Format::Csv => print(&t.csv(true)),
        }
    }
    let ok = match a.expect {
        None => true,
        Some(Expect::None) => found == 0,
        Some(Expect::Some) => found > 0,
    };
    Ok(if ok { Status::Ok } else { Status::Mismatch })
}

pub fn verify_formulas(a: &FormulaArgs, format: Format) -> Result<Status> {
    let reg = FormulaRegistry::default();
    let lambda = match &a.lambda {
        Some(s) => Some(parse_rat(s).with_context(|| format!("bad lambda `{s}`"))?),
        None => None,
    };
    let items: Vec<usize> = match a.item {
        Some(id) => {
            let item = reg.get(id)?;
            if a.l.is_some() && !item.uses_l() {
                bail!("item {id} does not take l");
            }
            if let Some(k) = &lambda {
                if !item.uses_lambda() {
                    bail!("item {id} does not take lambda");
                }
                if let Err(reason) = item.lambda_allowed(k) {
                    bail!("item {id}: side condition violated: {reason}");
                }
            }
            vec![id]
        }
        None => reg.ids(),
    };
    let max = a.max.max(a.p.unwrap_or(0)).max(a.q.unwrap_or(0));
    let cfg = SweepConfig {
        max,
        hs: a.h.map_or_else(|| vec![1, 2, 3], |h| vec![h]),
        lambdas: lambda.clone().map_or_else(default_lambdas, |k| vec![k]),
        allow_q_above_p: a.q_above_p || matches!((a.p, a.q), (Some(p), Some(q)) if q > p),
        items: items.clone(),
    };
    let instances: Vec<(usize, FormulaParams)> = sweep_instances(&cfg)
        .into_iter()
        .filter(|(_, x)| {
            a.p.is_none_or(|p| x.p == p)
                && a.q.is_none_or(|q| x.q == q)
                && a.l.is_none_or(|l| x.l == Some(l))
        })
        .collect();
    if instances.is_empty() {
        // Explain with the first failing condition when the tuple is fully pinned.
        if let (Some(id), Some(p), Some(q)) = (a.item, a.p, a.q) {
            let item = reg.get(id)?;
            let mut x = FormulaParams::new(p, q).with_h(a.h.unwrap_or(item.min_arrows()));
            x.l = a.l.or(item.uses_l().then_some(1));
            x.lambda = lambda.or(item.uses_lambda().then(|| default_lambdas()[0].clone()));
            reg.check(id, &x)?;
        }
        bail!("no admissible parameter tuples");
    }
    let checks: Vec<FormulaCheck> = instances
        .par_iter()
        .map(|(id, x)| check_instance(*id, x, &CHECK_PRIMES))
        .collect::<Result<_, _>>()?;

    let mut t = Table::new(vec![
        "item", "params", "closed_form", "rank", "rank_f101", "rank_f997", "match",
    ]);
    let mut bad = 0;
    for c in &checks {
        let ok = c.matches() && c.fields_agree();
        if !ok {
            bad += 1;
        }
        let field = |i: usize| c.field_ranks.get(i).map_or(String::new(), |r| r.1.to_string());
        t.push(vec![
            c.item.to_string(),
            c.params.describe(),
            c.closed_form.to_string(),
            c.rational_rank.to_string(),
            field(0),
            field(1),
            if ok { "yes" } else { "NO" }.to_string(),
        ]);
    }
    print(&t.render(format));
    if format == Format::Text {
        println!("{} instances, {} mismatches", checks.len(), bad);
    }
    Ok(if bad == 0 { Status::Ok } else { Status::Mismatch })
}

pub fn oracle_count(a: &OracleArgs, format: Format) -> Result<Status> {
    let pres = load(&a.algebra)?;
    let dims = parse_dims(&a.dim, &pres)?;
    let qs: Vec<u64> = parse_list(&a.q, "field size list")?;
    let mut t = Table::new(vec!["assignment", "count", "q", "predicted", "pass"]);
    let mut failures = 0;
    let mut totals = Vec::new();
    // assignment -> [(q, count)]
    let mut per_stratum: BTreeMap<String, Vec<(u64, u64)>> = BTreeMap::new();
    let mut order = Vec::new();
    for &q in &qs {
        let table = enumerate_and_classify(&pres, &dims, q, a.cap)?;
        totals.push((q, table.total));
        for row in verify_count_identity(&table, &pres)? {
            if !row.pass() {
                failures += 1;
            }
            let key = row.assignment.to_string();
            if !per_stratum.contains_key(&key) {
                order.push(row.assignment.clone());
            }
            per_stratum.entry(key.clone()).or_default().push((q, row.count));
            t.push(vec![
                key,
                row.count.to_string(),
                q.to_string(),
                row.predicted.to_string(),
                if row.pass() { "pass" } else { "fail" }.to_string(),
            ]);
        }
    }
    match format {
        Format::Csv => print(&t.csv(true)),
        Format::Text => {
            println!("d = {}", dims_text(&dims));
            print(&t.render(format));
            for (q, total) in &totals {
                println!("total over F_{q}: {total}");
            }
            if qs.len() > 1 {
                let mut e = Table::new(vec!["assignment", "estimate", "dim", "consistent"]);
                for ja in &order {
                    let est = dimension_estimate(&per_stratum[&ja.to_string()]);
                    e.push(vec![
                        ja.to_string(),
                        est.estimate.map_or("-".into(), |x| x.to_string()),
                        stratum_dim(&pres, ja)?.dim.to_string(),
                        if est.consistent { "yes" } else { "no" }.to_string(),
                    ]);
                }
                print(&e.render(Format::Text));
            }
            println!("{failures} failing strata");
        }
    }
    Ok(if failures == 0 { Status::Ok } else { Status::Mismatch })
}

pub fn family(a: &FamilyArgs) -> Result<Status> {
    let tag: FamilyTag = a.tag.parse()?;
    let pres = build_family(tag)?;
    let text = format!("# {tag}\n{}", pres.to_text());
    match &a.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print(&text),
    }
    Ok(Status::Ok)
}

pub fn recognize(a: &AlgebraArg) -> Result<Status> {
    let pres = load(a)?;
    let tag = recognize_family(&pres)?;
    println!("{tag}");
    println!(
        "in irreducibility list: {}",
        if tag.is_known_irreducible() { "yes" } else { "no" }
    );
    Ok(Status::Ok)
}

pub fn system(a: &SystemArgs) -> Result<Status> {
    let pres = load(&a.algebra)?;
    let ja: JordanAssignment = a.assignment.parse()?;
    let data = LoopData::jordan(&pres, &ja)?;
    let sys = assemble_system(&pres, pres.relations(), &data)?;
    print(&sys.to_text());
    println!("rank {}", sys.rank());
    Ok(Status::Ok)
}
