#pragma once

#include "ccrgnn/c2g.hpp"
#include "ccrgnn/matrix.hpp"
#include "ccrgnn/tape.hpp"

namespace ccrgnn {

enum class PoolKind { Mean, Max };

// Node states: row i is the state of node v_i (d x channels).
using NodeStates = Matrix;

// Single-head graph attention layer parameters.
struct GatLayerParams {
    Matrix theta;  // out_dim x in_dim
    Matrix attn;   // (2 * out_dim) x 1
    double negative_slope = 0.2;

    int in_dim() const { return theta.cols(); }
    int out_dim() const { return theta.rows(); }
};

// Tape handles for one layer's parameters.
struct GatLayerVars {
    Var theta;
    Var attn;
    double negative_slope = 0.2;
};

GatLayerVars insert_layer(Tape& tape, const GatLayerParams& params);

// Attention softmax set per node: off-diagonal neighbours plus the node
// itself, regardless of the adjacency diagonal.
Matrix attention_mask(const FeatureGraph& graph);

// Dense attention coefficients: entry (i, j) is alpha_ij for
// j in N(i) u {i} and exactly 0 elsewhere. Each row sums to 1 over its set.
Var attention_coefficients(Tape& tape, const GatLayerVars& layer, const FeatureGraph& graph,
                           Var node_states);

// One attention layer: h'_i = sum_{j in N(i) u {i}} alpha_ij * Theta h_j.
Var gat_forward(Tape& tape, const GatLayerVars& layer, const FeatureGraph& graph,
                Var node_states);

// Permutation-invariant readout of node states into a 1 x channels vector.
Var graph_pool(Tape& tape, Var node_states, PoolKind kind);

}  // namespace ccrgnn
