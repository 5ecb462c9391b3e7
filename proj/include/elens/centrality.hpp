#ifndef ELENS_CENTRALITY_HPP
#define ELENS_CENTRALITY_HPP

#include <Eigen/Dense>

#include "elens/graph.hpp"

namespace elens {

// The seven per-window measures, each aligned with DiscreteTimeGraph::active.
// All are computed on the simple directed graph induced by the window's
// aggregated edges; self-loops and edge weights are ignored.
struct CentralityScores {
    Eigen::VectorXd betweenness; // Brandes, scaled by 1/((n-1)(n-2))
    Eigen::VectorXd closeness;   // out-distance, Wasserman-Faust scaling
    Eigen::VectorXd degree;      // (distinct in + out neighbors) / (n-1)
    Eigen::VectorXd in_degree;
    Eigen::VectorXd out_degree;
    Eigen::VectorXd pagerank;    // damping 0.85, L1 tolerance 1e-9
    Eigen::VectorXd load;        // even-split flow variant of betweenness
};

CentralityScores compute_centralities(const DiscreteTimeGraph& g);

inline constexpr double kPageRankDamping = 0.85;
inline constexpr double kPageRankTolerance = 1e-9;

} // namespace elens

#endif
