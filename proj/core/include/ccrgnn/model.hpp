#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccrgnn/c2g.hpp"
#include "ccrgnn/data.hpp"
#include "ccrgnn/gat.hpp"
#include "ccrgnn/matrix.hpp"
#include "ccrgnn/tape.hpp"

namespace ccrgnn {

// Eq-9-style loss (per-class binary cross-entropy over softmax outputs) is
// the default; plain categorical cross-entropy is available behind the flag.
enum class LossKind { PaperBce, CategoricalCe };

struct CcrGnnConfig {
    std::vector<int> channels{8, 64, 9};
    std::vector<PoolKind> pooling{PoolKind::Mean, PoolKind::Mean, PoolKind::Max};
    std::vector<int> mlp_hidden{128};
    int class_count = 9;
    double lambda = 1e-5;
    double c2g_step = 0.01;
    double negative_slope = 0.2;
    LossKind loss_kind = LossKind::PaperBce;

    int layer_count() const { return static_cast<int>(channels.size()); }
    int channel_sum() const;
    // Readout dimensions for a graph with d nodes.
    int local_dim(int d) const { return d * (1 + channel_sum()); }
    int global_dim() const { return channel_sum(); }
    int mlp_input_dim(int d) const { return local_dim(d) + global_dim(); }

    void validate() const;  // throws ConfigError
};

struct MlpLayer {
    Matrix weight;  // out x in
    Matrix bias;    // out x 1
};

// All trainable parameters. Flat order: per GAT layer theta (row-major)
// then attn; per MLP layer weight then bias.
struct CcrGnnParams {
    std::vector<GatLayerParams> gat_layers;
    std::vector<MlpLayer> mlp;

    long long parameter_count() const;
    std::vector<double> flatten() const;
    void assign_from_flat(const std::vector<double>& flat);

    // Zero-valued parameters with the right shapes for a d-dimensional input.
    static CcrGnnParams shaped(const CcrGnnConfig& config, int input_dim);
};

// Tape handles for every parameter, in flat order.
struct ModelVars {
    std::vector<GatLayerVars> gat;
    std::vector<std::pair<Var, Var>> mlp;  // (weight, bias)
    std::vector<Var> ordered;              // same order as CcrGnnParams::flatten
};

ModelVars insert_params(Tape& tape, const CcrGnnParams& params);

struct ForwardTrace {
    std::vector<Var> node_states;  // x^(0) .. x^(L)
    std::vector<Var> pooled;       // z^(1) .. z^(L)
    Var r_local;
    Var r_global;
    Var log_probs;  // yhat, length m
};

ForwardTrace forward(Tape& tape, const ModelVars& vars, const CcrGnnConfig& config,
                     const FeatureGraph& graph);

// Eq-9 loss on log-probabilities; `one_hot` must be an m x 1 one-hot column.
Var loss(Tape& tape, Var log_probs, const Matrix& one_hot, const ModelVars& vars, double lambda,
         LossKind kind);
Var loss(Tape& tape, Var log_probs, int label_index, const ModelVars& vars, double lambda,
         LossKind kind);

Matrix one_hot(int label_index, int class_count);

// Inference on one record: builds the feature graph (config.c2g_step) and
// returns the argmax label (ties -> lowest index) or the log-probabilities.
int predict(const CcrGnnParams& params, const CcrGnnConfig& config, const ProcessedRecord& record);
Matrix predict_log_probs(const CcrGnnParams& params, const CcrGnnConfig& config,
                         const FeatureGraph& graph);
int argmax_index(const Matrix& column);

// ---------------------------------------------------------------------------
// Checkpoint file: one-line JSON header {config, input_dim, seed, epoch,
// parameter_count}, then the flat little-endian float64 parameter payload.
// ---------------------------------------------------------------------------

struct Checkpoint {
    CcrGnnConfig config;
    CcrGnnParams params;
    int input_dim = 0;
    std::uint64_t seed = 0;
    int epoch = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

std::string config_to_json(const CcrGnnConfig& config);
CcrGnnConfig config_from_json(const std::string& text);

}  // namespace ccrgnn
