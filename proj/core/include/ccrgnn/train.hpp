#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ccrgnn/data.hpp"
#include "ccrgnn/model.hpp"

namespace ccrgnn {

enum class InitKind { XavierUniform, FixedStdUniform };

struct TrainConfig {
    double initial_lr = 1e-3;
    double lr_decay = 1e-4;  // subtracted every decay_interval epochs
    int decay_interval = 3;
    double lr_floor = 1e-5;
    bool multiplicative_decay = false;  // lr *= decay_factor instead of -= lr_decay
    double decay_factor = 0.9;
    double l2_penalty = 1e-5;
    int epochs = 100;
    int batch_size = 32;
    std::uint64_t seed = 0;
    InitKind init = InitKind::XavierUniform;
    double init_scale = 0.1;  // target std for FixedStdUniform
    int threads = 1;          // per-sample gradient workers within a batch

    void validate() const;
};

// Adam with bias correction. Moment buffers mirror the flat parameter layout.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps). Aborts on non-finite
// gradients.
void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grads,
               double lr);

// Xavier-uniform by default: every weight uniform on +-sqrt(6/(in+out)),
// biases zero. FixedStdUniform draws uniform with standard deviation
// init_scale instead.
CcrGnnParams init_params(const CcrGnnConfig& model_config, int input_dim,
                         const TrainConfig& config);

double lr_at(int epoch, const TrainConfig& config);

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
    double train_accuracy = 0.0;
};

struct TrainResult {
    CcrGnnParams params;
    std::vector<EpochStats> history;
};

// Full training loop: seeded shuffle per epoch, per-record feature graphs
// cached after the first build, per-sample gradients accumulated in fixed
// sample order (mean over the batch), one Adam step per batch.
TrainResult fit(const std::vector<ProcessedRecord>& train_set, const TrainConfig& config,
                const CcrGnnConfig& model_config,
                const std::function<void(const EpochStats&)>& on_epoch = {});

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history);

}  // namespace ccrgnn
