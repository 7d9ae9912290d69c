//! JSON and CSV shapes for matrices, coefficient maps and tables.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::binary::{JointTable, SymBinaryModel};
use crate::edge::{EdgeMatrix, EdgeMatrixJson, InducedEdgeSet};
use crate::error::{Error, Result};
use crate::gaussian::{JointResponseParams, RealMatrix};
use crate::graph::{NodeId, RegressionGraph};

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse { line: e.line(), column: e.column(), message: e.to_string() }
}

/// `{"order": [...], "rows": [[...], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrixJson {
    pub order: Vec<NodeId>,
    pub rows: Vec<Vec<f64>>,
}

impl From<&RealMatrix> for RealMatrixJson {
    fn from(m: &RealMatrix) -> Self {
        RealMatrixJson { order: m.order.clone(), rows: rows_of(&m.values) }
    }
}

impl TryFrom<RealMatrixJson> for RealMatrix {
    type Error = Error;

    fn try_from(j: RealMatrixJson) -> Result<Self> {
        let d = j.order.len();
        if j.rows.len() != d || j.rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch(format!("expected a {d}×{d} matrix")));
        }
        RealMatrix::new(j.order, DMatrix::from_fn(d, d, |r, c| j.rows[r][c]))
    }
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
}

pub fn parse_real_matrix(text: &str) -> Result<RealMatrix> {
    serde_json::from_str::<RealMatrixJson>(text).map_err(json_err)?.try_into()
}

pub fn parse_edge_matrix(text: &str) -> Result<EdgeMatrix> {
    serde_json::from_str::<EdgeMatrixJson>(text).map_err(json_err)?.try_into()
}

pub fn real_matrix_json(m: &RealMatrix) -> Value {
    serde_json::to_value(RealMatrixJson::from(m)).expect("plain data")
}

pub fn edge_matrix_json(m: &EdgeMatrix) -> Value {
    serde_json::to_value(EdgeMatrixJson::from(m)).expect("plain data")
}

pub fn induced_json(set: &InducedEdgeSet) -> Value {
    json!({
        "a": set.a,
        "b": set.b,
        "cov_aa_given_b": edge_matrix_json(&set.cov_aa_given_b),
        "arrows_a_given_b": edge_matrix_json(&set.arrows_a_given_b),
        "con_bb": edge_matrix_json(&set.con_bb),
    })
}

pub fn params_json(p: &JointResponseParams) -> Value {
    json!({
        "a": p.a,
        "b": p.b,
        "pi_a_given_b": rows_of(&p.pi_a_given_b),
        "sigma_aa_given_b": rows_of(&p.sigma_aa_given_b),
        "sigma_bb_concentration": rows_of(&p.sigma_bb_concentration),
    })
}

/// `{"1<-2": 0.5, ...}`.
pub fn eta_json(model: &SymBinaryModel) -> Value {
    let map: Map<String, Value> = model.eta.iter().map(|(&(i, j), &x)| (format!("{i}<-{j}"), json!(x))).collect();
    Value::Object(map)
}

pub fn parse_eta(graph: &RegressionGraph, text: &str) -> Result<SymBinaryModel> {
    let raw: BTreeMap<String, f64> = serde_json::from_str(text).map_err(json_err)?;
    let mut eta = BTreeMap::new();
    for (key, x) in raw {
        let bad = || Error::Parse { line: 1, column: 1, message: format!("key `{key}` is not of the form `i<-j`") };
        let (i, j) = key.split_once("<-").ok_or_else(bad)?;
        let i = i.trim().parse::<u32>().map_err(|_| bad())?;
        let j = j.trim().parse::<u32>().map_err(|_| bad())?;
        eta.insert((NodeId(i), NodeId(j)), x);
    }
    SymBinaryModel::new(graph.clone(), eta)
}

/// Header `X1,…,Xd,probability`, one row per cell in index order.
pub fn table_csv(t: &JointTable) -> String {
    let mut out: String = t.nodes.iter().map(|n| format!("X{n},")).collect();
    out.push_str("probability\n");
    for (k, p) in t.probs.iter().enumerate() {
        for l in t.levels(k) {
            out.push_str(&format!("{l},"));
        }
        out.push_str(&format!("{p}\n"));
    }
    out
}

pub fn table_json(t: &JointTable) -> Value {
    let cells: Vec<Value> = t
        .probs
        .iter()
        .enumerate()
        .map(|(k, &p)| json!({ "levels": t.levels(k), "probability": p }))
        .collect();
    json!({ "nodes": t.nodes, "cells": cells })
}

/// Aligned 0/1 grid with row and column labels.
pub fn edge_matrix_text(m: &EdgeMatrix) -> String {
    let width = m.row_labels().iter().chain(m.col_labels()).map(|n| n.to_string().len()).max().unwrap_or(1);
    let mut out = format!("{:>width$}", "");
    for c in m.col_labels() {
        out.push_str(&format!(" {:>width$}", c.to_string()));
    }
    out.push('\n');
    for (r, label) in m.row_labels().iter().enumerate() {
        out.push_str(&format!("{:>width$}", label.to_string()));
        for c in 0..m.ncols() {
            out.push_str(&format!(" {:>width$}", u8::from(m.get(r, c))));
        }
        out.push('\n');
    }
    out
}

pub fn real_matrix_text(m: &RealMatrix) -> String {
    let mut out = String::new();
    for (r, label) in m.order.iter().enumerate() {
        out.push_str(&format!("{:>4}", label.to_string()));
        for c in 0..m.order.len() {
            out.push_str(&format!(" {:>12.6}", m.values[(r, c)]));
        }
        out.push('\n');
    }
    out
}
