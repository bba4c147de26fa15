#include "ccrgnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <thread>

#include "ccrgnn/errors.hpp"

namespace ccrgnn {

void TrainConfig::validate() const {
    if (!(initial_lr > 0.0)) throw ConfigError("train: initial_lr must be positive");
    if (lr_decay < 0.0) throw ConfigError("train: lr_decay must be >= 0");
    if (decay_interval < 1) throw ConfigError("train: decay_interval must be >= 1");
    if (lr_floor < 0.0) throw ConfigError("train: lr_floor must be >= 0");
    if (!(decay_factor > 0.0 && decay_factor <= 1.0))
        throw ConfigError("train: decay_factor must lie in (0,1]");
    if (l2_penalty < 0.0) throw ConfigError("train: l2_penalty must be >= 0");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (threads < 0) throw ConfigError("train: threads must be >= 0");
    if (!(init_scale > 0.0)) throw ConfigError("train: init_scale must be positive");
}

void adam_step(AdamState& state, std::vector<double>& params, const std::vector<double>& grads,
               double lr) {
    require(params.size() == grads.size() && params.size() == state.m.size(),
            "adam_step: size mismatch");
    for (double g : grads)
        if (!std::isfinite(g)) throw TrainError("adam_step: non-finite gradient");
    ++state.t;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

namespace {

double xavier_bound(int out, int in) { return std::sqrt(6.0 / (in + out)); }

void fill_uniform(Matrix& m, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : m.data()) v = dist(rng);
}

}  // namespace

CcrGnnParams init_params(const CcrGnnConfig& model_config, int input_dim,
                         const TrainConfig& config) {
    config.validate();
    CcrGnnParams params = CcrGnnParams::shaped(model_config, input_dim);
    std::mt19937_64 rng(config.seed);
    // uniform(-b, b) has std b/sqrt(3)
    const double fixed_bound = config.init_scale * std::sqrt(3.0);
    auto bound_for = [&](int out, int in) {
        return config.init == InitKind::XavierUniform ? xavier_bound(out, in) : fixed_bound;
    };
    for (auto& l : params.gat_layers) {
        fill_uniform(l.theta, bound_for(l.theta.rows(), l.theta.cols()), rng);
        fill_uniform(l.attn, bound_for(l.attn.rows(), 1), rng);
    }
    for (auto& l : params.mlp) {
        fill_uniform(l.weight, bound_for(l.weight.rows(), l.weight.cols()), rng);
        // biases stay zero
    }
    return params;
}

double lr_at(int epoch, const TrainConfig& config) {
    require(epoch >= 0, "lr_at: epoch must be >= 0");
    const int k = epoch / config.decay_interval;
    double lr;
    if (config.multiplicative_decay) {
        lr = config.initial_lr * std::pow(config.decay_factor, k);
    } else {
        lr = config.initial_lr - config.lr_decay * k;
    }
    return std::max(lr, config.lr_floor);
}

namespace {

struct SampleResult {
    double loss = 0.0;
    int prediction = -1;
    std::vector<double> grad;  // flat, parameter order
};

SampleResult sample_gradient(const CcrGnnParams& params, const CcrGnnConfig& model_config,
                             const FeatureGraph& graph, int label, double lambda) {
    Tape tape(true);
    ModelVars vars = insert_params(tape, params);
    ForwardTrace trace = forward(tape, vars, model_config, graph);
    Var l = loss(tape, trace.log_probs, label, vars, lambda, model_config.loss_kind);
    SampleResult res;
    res.loss = tape.value(l).at(0, 0);
    res.prediction = argmax_index(tape.value(trace.log_probs));
    if (!std::isfinite(res.loss)) return res;  // caller reports the sample index
    tape.backward(l);
    res.grad.reserve(static_cast<size_t>(params.parameter_count()));
    for (Var v : vars.ordered) {
        const Matrix& a = tape.adjoint(v);
        res.grad.insert(res.grad.end(), a.data().begin(), a.data().end());
    }
    return res;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int workers = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (int i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

TrainResult fit(const std::vector<ProcessedRecord>& train_set, const TrainConfig& config,
                const CcrGnnConfig& model_config,
                const std::function<void(const EpochStats&)>& on_epoch) {
    config.validate();
    model_config.validate();
    if (train_set.empty()) throw ConfigError("fit: empty training set");
    const int d = static_cast<int>(train_set.front().x.size());
    for (const auto& rec : train_set) {
        require(static_cast<int>(rec.x.size()) == d, "fit: inconsistent record dimensions");
        require(rec.label_index >= 0 && rec.label_index < model_config.class_count,
                "fit: label " + std::to_string(rec.label_index) + " outside [0, " +
                    std::to_string(model_config.class_count) + ")");
    }
    const int threads =
        config.threads > 0 ? config.threads
                           : std::max(1u, std::thread::hardware_concurrency());

    CcrGnnParams params = init_params(model_config, d, config);
    std::vector<double> flat = params.flatten();
    AdamState adam(flat.size());
    const double lambda = config.l2_penalty;

    // Feature graphs are deterministic per record: build once, reuse.
    std::vector<std::optional<FeatureGraph>> graph_cache(train_set.size());
    auto graph_of = [&](size_t i) -> const FeatureGraph& {
        if (!graph_cache[i])
            graph_cache[i] = build_graph(train_set[i].x, model_config.c2g_step);
        return *graph_cache[i];
    };

    std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    const size_t n = train_set.size();
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = lr_at(epoch, config);
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        long long correct = 0;
        for (size_t start = 0; start < n; start += static_cast<size_t>(config.batch_size)) {
            const size_t stop = std::min(n, start + static_cast<size_t>(config.batch_size));
            const int batch = static_cast<int>(stop - start);
            for (size_t b = start; b < stop; ++b) graph_of(order[b]);  // warm the cache serially

            std::vector<SampleResult> results(static_cast<size_t>(batch));
            parallel_for(batch, threads, [&](int b) {
                const size_t idx = order[start + static_cast<size_t>(b)];
                results[static_cast<size_t>(b)] = sample_gradient(
                    params, model_config, *graph_cache[idx], train_set[idx].label_index, lambda);
            });

            // Fixed-order reduction keeps training bit-reproducible.
            std::vector<double> grad(flat.size(), 0.0);
            for (int b = 0; b < batch; ++b) {
                const auto& res = results[static_cast<size_t>(b)];
                if (!std::isfinite(res.loss))
                    throw TrainError("fit: non-finite loss at epoch " + std::to_string(epoch) +
                                     ", sample " +
                                     std::to_string(order[start + static_cast<size_t>(b)]));
                loss_sum += res.loss;
                if (res.prediction == train_set[order[start + static_cast<size_t>(b)]].label_index)
                    ++correct;
                for (size_t i = 0; i < grad.size(); ++i) grad[i] += res.grad[i];
            }
            const double inv = 1.0 / batch;
            for (double& g : grad) g *= inv;

            adam_step(adam, flat, grad, lr);
            params.assign_from_flat(flat);
        }

        EpochStats stats{epoch, lr, loss_sum / static_cast<double>(n),
                         static_cast<double>(correct) / static_cast<double>(n)};
        result.history.push_back(stats);
        if (on_epoch) on_epoch(stats);
    }
    result.params = std::move(params);
    return result;
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open file for writing: " + path);
    out << "epoch,lr,loss,train_accuracy\n";
    char buf[128];
    for (const auto& e : history) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", e.epoch, e.lr, e.loss,
                      e.train_accuracy);
        out << buf;
    }
}

}  // namespace ccrgnn
