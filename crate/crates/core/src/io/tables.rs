//! CSV formats. Every file has a mandatory header row; row numbers in errors
//! are file line numbers (the header is line 1).
//!
//! | file      | columns                                   |
//! |-----------|-------------------------------------------|
//! | sales     | `product,branch,size,day,sold`            |
//! | supply    | `product,branch,size,supply`              |
//! | plan      | `branch,multiplicity,<one column per size>` |
//! | scenarios | `scenario,weight,branch,size,day,demand`  |
//!
//! Days are 1-based. Sizes are referenced by label.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::SalesRecord;
use crate::model::{Choice, Instance, Plan, SizeSet};
use crate::recourse::{DemandScenario, ScenarioSet};

#[derive(Debug, Deserialize, Serialize)]
struct SalesRow {
    product: String,
    branch: String,
    size: String,
    day: usize,
    sold: u64,
}

#[derive(Debug, Deserialize, Serialize)]
struct SupplyRow {
    product: String,
    branch: String,
    size: String,
    supply: u64,
}

#[derive(Debug, Deserialize, Serialize)]
struct ScenarioRow {
    scenario: usize,
    weight: f64,
    branch: String,
    size: String,
    day: usize,
    demand: u32,
}

fn csv_err(path: &Path, row: u64, message: impl Into<String>) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        row,
        message: message.into(),
    }
}

/// Parses every data row of `reader`, checking the header names exactly.
fn read_rows<T: DeserializeOwned>(reader: impl Read, path: &Path, header: &[&str]) -> Result<Vec<(u64, T)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let found = rdr.headers().map_err(|e| csv_err(path, 1, e.to_string()))?.clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(csv_err(
            path,
            1,
            format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: T = rec
            .deserialize(Some(&found))
            .map_err(|e| csv_err(path, line, e.to_string()))?;
        out.push((line, row));
    }
    Ok(out)
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn size_index(sizes: &SizeSet, label: &str, path: &Path, line: u64) -> Result<usize> {
    sizes
        .index_of(label)
        .ok_or_else(|| csv_err(path, line, format!("unknown size label {label:?}")))
}

/// Sales joined with supply. Parsed from readers so tests need no files;
/// `sales_name` and `supply_name` only label errors.
pub fn parse_sales(
    sales: impl Read,
    sales_name: &Path,
    supply: impl Read,
    supply_name: &Path,
    sizes: &SizeSet,
) -> Result<Vec<SalesRecord>> {
    type Key = (String, String);
    let mut supplies: BTreeMap<Key, Vec<Option<u64>>> = BTreeMap::new();
    for (line, row) in read_rows::<SupplyRow>(supply, supply_name, &["product", "branch", "size", "supply"])? {
        let s = size_index(sizes, &row.size, supply_name, line)?;
        let slot = &mut supplies
            .entry((row.product, row.branch))
            .or_insert_with(|| vec![None; sizes.len()])[s];
        if slot.is_some() {
            return Err(csv_err(supply_name, line, "duplicate (product, branch, size)"));
        }
        *slot = Some(row.supply);
    }

    // (key, size, day) -> (sold, line)
    let mut cells: BTreeMap<(Key, usize, usize), (u64, u64)> = BTreeMap::new();
    let mut horizon = 1;
    for (line, row) in read_rows::<SalesRow>(sales, sales_name, &["product", "branch", "size", "day", "sold"])? {
        let s = size_index(sizes, &row.size, sales_name, line)?;
        if row.day == 0 {
            return Err(csv_err(sales_name, line, "days are numbered from 1"));
        }
        let key = (row.product, row.branch);
        if !supplies.contains_key(&key) {
            return Err(csv_err(
                sales_name,
                line,
                format!("no supply recorded for product {:?} in branch {:?}", key.0, key.1),
            ));
        }
        horizon = horizon.max(row.day);
        match cells.entry((key, s, row.day)) {
            Entry::Vacant(v) => {
                v.insert((row.sold, line));
            }
            Entry::Occupied(_) => {
                return Err(csv_err(sales_name, line, "duplicate (product, branch, size, day)"));
            }
        }
    }

    let mut records = Vec::with_capacity(supplies.len());
    for (key, supply) in supplies {
        let supply: Vec<u64> = supply.into_iter().map(|s| s.unwrap_or(0)).collect();
        let mut sales = vec![vec![0u64; horizon]; sizes.len()];
        for (s, row) in sales.iter_mut().enumerate() {
            let mut cumulative = 0;
            for (d, cell) in row.iter_mut().enumerate() {
                if let Some(&(sold, line)) = cells.get(&(key.clone(), s, d + 1)) {
                    cumulative += sold;
                    if cumulative > supply[s] {
                        return Err(csv_err(
                            sales_name,
                            line,
                            format!(
                                "validation: cumulative sales {cumulative} exceed supply {} of size {}",
                                supply[s],
                                sizes.labels()[s]
                            ),
                        ));
                    }
                    *cell = sold;
                }
            }
        }
        records.push(SalesRecord::new(key.0, key.1, supply, sales)?);
    }
    Ok(records)
}

pub fn load_sales(sales: &Path, supply: &Path, sizes: &SizeSet) -> Result<Vec<SalesRecord>> {
    parse_sales(open(sales)?, sales, open(supply)?, supply, sizes)
}

fn writer_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

/// Writes every day of every size, zeros included, so the horizon survives
/// a round trip.
pub fn write_sales(
    records: &[SalesRecord],
    sizes: &SizeSet,
    sales: impl Write,
    supply: impl Write,
) -> Result<()> {
    let here = PathBuf::from("<sales>");
    let mut w = csv::Writer::from_writer(sales);
    let mut ws = csv::Writer::from_writer(supply);
    // headers are emitted by serialize; force them for empty inputs
    if records.is_empty() {
        w.write_record(["product", "branch", "size", "day", "sold"]).map_err(|e| writer_err(&here, e))?;
        ws.write_record(["product", "branch", "size", "supply"]).map_err(|e| writer_err(&here, e))?;
    }
    for r in records {
        if r.size_count() != sizes.len() {
            return Err(Error::structural("record size count differs from the size set"));
        }
        for (s, label) in sizes.labels().iter().enumerate() {
            ws.serialize(SupplyRow {
                product: r.product().into(),
                branch: r.branch().into(),
                size: label.clone(),
                supply: r.supply()[s],
            })
            .map_err(|e| writer_err(&here, e))?;
            for (d, &sold) in r.sales()[s].iter().enumerate() {
                w.serialize(SalesRow {
                    product: r.product().into(),
                    branch: r.branch().into(),
                    size: label.clone(),
                    day: d + 1,
                    sold,
                })
                .map_err(|e| writer_err(&here, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(&here, e))?;
    ws.flush().map_err(|e| Error::io(&here, e))?;
    Ok(())
}

pub fn save_sales(records: &[SalesRecord], sizes: &SizeSet, sales: &Path, supply: &Path) -> Result<()> {
    let a = std::fs::File::create(sales).map_err(|e| Error::io(sales, e))?;
    let b = std::fs::File::create(supply).map_err(|e| Error::io(supply, e))?;
    write_sales(records, sizes, a, b)
}

/// One row per branch: its multiplicity and the lot-type's components.
pub fn write_plan(plan: &Plan, instance: &Instance, out: impl Write) -> Result<()> {
    plan.check_structure(instance)?;
    let here = PathBuf::from("<plan>");
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["branch".to_string(), "multiplicity".to_string()];
    header.extend(instance.sizes().labels().iter().cloned());
    w.write_record(&header).map_err(|e| writer_err(&here, e))?;
    for (b, c) in plan.assignment().iter().enumerate() {
        let mut row = vec![
            instance.branches()[b].clone(),
            instance.multiplicities()[c.mult].to_string(),
        ];
        row.extend(instance.lot_universe()[c.lot].components().iter().map(u32::to_string));
        w.write_record(&row).map_err(|e| writer_err(&here, e))?;
    }
    w.flush().map_err(|e| Error::io(&here, e))
}

/// Reads a plan written by [`write_plan`]; lot-types and multiplicities
/// must belong to the instance.
pub fn parse_plan(input: impl Read, name: &Path, instance: &Instance) -> Result<Plan> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(name, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut expected = vec!["branch".to_string(), "multiplicity".to_string()];
    expected.extend(instance.sizes().labels().iter().cloned());
    if header != expected {
        return Err(csv_err(name, 1, format!("expected header `{}`", expected.join(","))));
    }
    let mut assignment: Vec<Option<Choice>> = vec![None; instance.branch_count()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(name, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let b = instance
            .branches()
            .iter()
            .position(|id| id == &rec[0])
            .ok_or_else(|| csv_err(name, line, format!("unknown branch {:?}", &rec[0])))?;
        let k: u32 = rec[1].parse().map_err(|_| csv_err(name, line, "bad multiplicity"))?;
        let mult = instance
            .multiplicities()
            .iter()
            .position(|&m| m == k)
            .ok_or_else(|| csv_err(name, line, format!("multiplicity {k} is not allowed")))?;
        let comps = (2..rec.len())
            .map(|i| rec[i].parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| csv_err(name, line, "bad lot component"))?;
        let lot = instance
            .lot_universe()
            .iter()
            .position(|l| l.components() == comps.as_slice())
            .ok_or_else(|| csv_err(name, line, "lot-type is not in the universe"))?;
        if assignment[b].replace(Choice::new(lot, mult)).is_some() {
            return Err(csv_err(name, line, "branch listed twice"));
        }
    }
    let assignment = assignment
        .into_iter()
        .enumerate()
        .map(|(b, c)| {
            c.ok_or_else(|| csv_err(name, 0, format!("branch {} has no row", instance.branches()[b])))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Plan::new(assignment))
}

pub fn load_plan(path: &Path, instance: &Instance) -> Result<Plan> {
    parse_plan(open(path)?, path, instance)
}

pub fn save_plan(plan: &Plan, instance: &Instance, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_plan(plan, instance, f)
}

/// Scenario demand in long form; cells without a row are zero.
pub fn parse_scenarios(input: impl Read, name: &Path, instance: &Instance) -> Result<ScenarioSet> {
    let rows = read_rows::<ScenarioRow>(
        input,
        name,
        &["scenario", "weight", "branch", "size", "day", "demand"],
    )?;
    if rows.is_empty() {
        return Err(csv_err(name, 1, "no scenario rows"));
    }
    let horizon = rows.iter().map(|(_, r)| r.day).max().unwrap_or(1);
    // scenario id -> (weight, demand, line of each filled cell)
    type Cells = BTreeMap<(usize, usize, usize), u64>;
    let mut scen: BTreeMap<usize, (f64, DemandScenario, Cells)> = BTreeMap::new();
    for (line, row) in rows {
        if row.day == 0 {
            return Err(csv_err(name, line, "days are numbered from 1"));
        }
        let b = instance
            .branches()
            .iter()
            .position(|id| *id == row.branch)
            .ok_or_else(|| csv_err(name, line, format!("unknown branch {:?}", row.branch)))?;
        let s = size_index(instance.sizes(), &row.size, name, line)?;
        let entry = match scen.entry(row.scenario) {
            Entry::Vacant(v) => v.insert((
                row.weight,
                DemandScenario::zeros(instance.branch_count(), instance.sizes().len(), horizon)?,
                BTreeMap::new(),
            )),
            Entry::Occupied(o) => o.into_mut(),
        };
        if entry.0 != row.weight {
            return Err(csv_err(name, line, "weight differs between rows of one scenario"));
        }
        if entry.2.insert((b, s, row.day), line).is_some() {
            return Err(csv_err(name, line, "duplicate (scenario, branch, size, day)"));
        }
        entry.1.set(b, s, row.day - 1, row.demand);
    }
    let (weights, scenarios): (Vec<f64>, Vec<DemandScenario>) = scen.into_values().map(|(w, d, _)| (w, d)).unzip();
    ScenarioSet::new(scenarios, weights)
}

pub fn load_scenarios(path: &Path, instance: &Instance) -> Result<ScenarioSet> {
    parse_scenarios(open(path)?, path, instance)
}

pub fn write_scenarios(set: &ScenarioSet, instance: &Instance, out: impl Write) -> Result<()> {
    set.check_dims(instance)?;
    let here = PathBuf::from("<scenarios>");
    let mut w = csv::Writer::from_writer(out);
    for (i, (sc, &weight)) in set.scenarios().iter().zip(set.weights()).enumerate() {
        for b in 0..sc.branches() {
            for s in 0..sc.sizes() {
                for d in 0..sc.horizon() {
                    w.serialize(ScenarioRow {
                        scenario: i,
                        weight,
                        branch: instance.branches()[b].clone(),
                        size: instance.sizes().labels()[s].clone(),
                        day: d + 1,
                        demand: sc.get(b, s, d),
                    })
                    .map_err(|e| writer_err(&here, e))?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::io(&here, e))
}

pub fn save_scenarios(set: &ScenarioSet, instance: &Instance, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_scenarios(set, instance, f)
}
