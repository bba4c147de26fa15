#include "ccrgnn/gat.hpp"

#include "ccrgnn/errors.hpp"

namespace ccrgnn {

GatLayerVars insert_layer(Tape& tape, const GatLayerParams& params) {
    require(params.attn.cols() == 1 && params.attn.rows() == 2 * params.out_dim(),
            "gat layer: attn must be (2*out_dim) x 1, got " + params.attn.shape_str());
    GatLayerVars vars;
    vars.theta = tape.input_ref(&params.theta);
    vars.attn = tape.input_ref(&params.attn);
    vars.negative_slope = params.negative_slope;
    return vars;
}

Matrix attention_mask(const FeatureGraph& graph) {
    const int d = graph.node_count();
    Matrix mask = Matrix::identity(d);
    for (const auto& [i, j] : graph.edges) {
        mask.at(i, j) = 1.0;
        mask.at(j, i) = 1.0;
    }
    return mask;
}

namespace {

// Transformed states G = H Theta^T (row i = Theta h_i) and the raw pairwise
// scores LeakyReLU(a^T [G_i || G_j]) = LeakyReLU(u_i + w_j) with
// u = G a_left, w = G a_right.
struct AttentionPieces {
    Var transformed;  // d x out_dim
    Var scores;       // d x d
};

AttentionPieces attention_pieces(Tape& tape, const GatLayerVars& layer, Var node_states) {
    const Matrix& H = tape.value(node_states);
    const Matrix& theta = tape.value(layer.theta);
    require(H.cols() == theta.cols(), "gat: node state width " + H.shape_str() +
                                          " does not match theta " + theta.shape_str());
    const int out_dim = theta.rows();
    AttentionPieces p;
    p.transformed = tape.matmul(node_states, tape.transpose(layer.theta));
    Var a_left = tape.slice_rows(layer.attn, 0, out_dim);
    Var a_right = tape.slice_rows(layer.attn, out_dim, 2 * out_dim);
    Var u = tape.matmul(p.transformed, a_left);   // d x 1
    Var w = tape.matmul(p.transformed, a_right);  // d x 1
    p.scores = tape.leaky_relu(tape.outer_sum(u, w), layer.negative_slope);
    return p;
}

}  // namespace

Var attention_coefficients(Tape& tape, const GatLayerVars& layer, const FeatureGraph& graph,
                           Var node_states) {
    const Matrix& H = tape.value(node_states);
    require(H.rows() == graph.node_count(),
            "gat: node state rows " + std::to_string(H.rows()) + " != graph nodes " +
                std::to_string(graph.node_count()));
    AttentionPieces p = attention_pieces(tape, layer, node_states);
    return tape.masked_row_softmax(p.scores, attention_mask(graph));
}

Var gat_forward(Tape& tape, const GatLayerVars& layer, const FeatureGraph& graph,
                Var node_states) {
    const Matrix& H = tape.value(node_states);
    require(H.rows() == graph.node_count(),
            "gat: node state rows " + std::to_string(H.rows()) + " != graph nodes " +
                std::to_string(graph.node_count()));
    AttentionPieces p = attention_pieces(tape, layer, node_states);
    Var alpha = tape.masked_row_softmax(p.scores, attention_mask(graph));
    return tape.matmul(alpha, p.transformed);
}

Var graph_pool(Tape& tape, Var node_states, PoolKind kind) {
    require(tape.value(node_states).rows() >= 1, "graph_pool: empty node states");
    return kind == PoolKind::Mean ? tape.row_mean(node_states) : tape.row_max(node_states);
}

}  // namespace ccrgnn
