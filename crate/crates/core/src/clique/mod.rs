//! Graphs on `[n]`, clique-shaped monotone functions, and clique-sunflowers
//! over `G(n,p)` with an independent vertex sample `U(n,q)`.

mod graph;
mod shaped;
mod sunflower;

pub use graph::{
    clique_edges, clique_graph, edge_count, edge_index, edge_pair, gnp_sample, has_k_clique, Graph,
    MAX_VERTICES,
};
pub use shaped::{
    clique_acceptance_under_noise, clique_approx_and, clique_approx_or, clique_closure,
    clique_minterm_bound_check, clique_minterms, clique_trim, is_clique_closed,
    CliqueClosureParams, CliqueFunction, CliqueMintermCount,
};
pub use sunflower::{
    clique_coverage, clique_lemma_regime, clique_parameters, clique_spread_check,
    clique_sunflower_threshold, find_clique_sunflower, intersection_profile, is_clique_sunflower,
    is_pq_clique_sunflower, janson_certificate, kclique_probability, pq_coverage_query, s_poly,
    s_poly_bound, s_sequence, verify_no_kclique_bound, CliqueCase, CliqueCertificate, CliqueParams,
    CliqueSunflowerCheck, CliqueSunflowerResult, CliqueTraceStep, JansonCertificate,
};
