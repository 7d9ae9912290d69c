//! Text formats: `.rg` graphs, queries, DOT, JSON and CSV.

mod dot;
mod json;
mod rg;

pub use dot::{emit_dot, emit_dot_induced, emit_dot_undirected};
pub use json::{
    edge_matrix_json, edge_matrix_text, eta_json, induced_json, params_json, parse_edge_matrix, parse_eta,
    parse_real_matrix, real_matrix_json, real_matrix_text, table_csv, table_json, RealMatrixJson,
};
pub use rg::{emit_graph, parse_graph, parse_node_list, parse_query};
