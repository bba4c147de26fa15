#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ccrgnn/matrix.hpp"

namespace ccrgnn {

// Rank-1 pairwise feature-interaction map: values = x x^T, symmetric,
// diagonal entries x_i^2 >= 0.
struct InteractionMap {
    Matrix values;  // d x d
};

// Per-record feature-interaction graph. Node v_i carries the scalar
// attribute x_i. The adjacency is the binary thresholding of the interaction
// map (diagonal included); edges store the off-diagonal pairs only, and
// connectivity is always judged ignoring self-loops.
struct FeatureGraph {
    std::vector<double> node_attrs;         // x, length d
    Matrix adjacency;                       // d x d binary symmetric
    double threshold = 0.0;                 // final r
    std::vector<std::pair<int, int>> edges; // unordered pairs (i, j), i < j
    int iterations = 0;                     // threshold decrements + 1

    int node_count() const { return static_cast<int>(node_attrs.size()); }
    std::vector<std::vector<int>> neighbor_lists() const;
};

InteractionMap interaction_map(const std::vector<double>& x);

// A_ij = 1 iff map_ij >= r (ties produce edges).
Matrix threshold_activate(const InteractionMap& map, double r);

// True iff every node is reachable from node 0 via off-diagonal edges.
// Single-node graphs are connected. Asymmetric or non-binary input is a
// contract violation.
bool is_connected(const Matrix& adjacency);

// Lowers the threshold r from max(x x^T) in decrements of `step` until the
// thresholded graph is connected. Terminates within
// ceil((max - min) / step) + 1 iterations since r <= min gives the complete
// graph.
FeatureGraph build_graph(const std::vector<double>& x, double step);

std::string graph_to_dot(const FeatureGraph& g);
std::string graph_to_json(const FeatureGraph& g);
FeatureGraph graph_from_json(const std::string& text);

}  // namespace ccrgnn
