#include "ccrgnn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ccrgnn/errors.hpp"
#include "ccrgnn/tape.hpp"
#include "ccrgnn/train.hpp"

namespace ccrgnn {

long long ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
}

ConfusionMatrix confusion(const std::vector<int>& predictions, const std::vector<int>& truths,
                          int m) {
    require(predictions.size() == truths.size(),
            "confusion: " + std::to_string(predictions.size()) + " predictions vs " +
                std::to_string(truths.size()) + " truths");
    require(m >= 1, "confusion: need m >= 1");
    ConfusionMatrix cm(m);
    for (size_t i = 0; i < predictions.size(); ++i) {
        const int p = predictions[i], t = truths[i];
        require(p >= 0 && p < m && t >= 0 && t < m,
                "confusion: label outside [0, " + std::to_string(m) + ") at pair " +
                    std::to_string(i));
        ++cm.at(t, p);
    }
    return cm;
}

MetricsReport macro_metrics(const ConfusionMatrix& cm) {
    require(cm.m >= 1 && cm.total() > 0, "macro_metrics: empty confusion matrix");
    MetricsReport r;
    const int m = cm.m;
    r.precision.assign(static_cast<size_t>(m), 0.0);
    r.recall.assign(static_cast<size_t>(m), 0.0);
    r.f1.assign(static_cast<size_t>(m), 0.0);
    r.precision_defined.assign(static_cast<size_t>(m), false);
    r.recall_defined.assign(static_cast<size_t>(m), false);
    r.f1_defined.assign(static_cast<size_t>(m), false);

    long long trace = 0;
    double psum = 0.0, rsum = 0.0, fsum = 0.0;
    for (int i = 0; i < m; ++i) {
        const long long tp = cm.at(i, i);
        trace += tp;
        long long fp = 0, fn = 0;
        for (int j = 0; j < m; ++j) {
            if (j == i) continue;
            fp += cm.at(j, i);  // column i
            fn += cm.at(i, j);  // row i
        }
        const size_t ii = static_cast<size_t>(i);
        if (tp + fp > 0) {
            r.precision[ii] = static_cast<double>(tp) / static_cast<double>(tp + fp);
            r.precision_defined[ii] = true;
            psum += r.precision[ii];
            ++r.precision_classes;
        }
        if (tp + fn > 0) {
            r.recall[ii] = static_cast<double>(tp) / static_cast<double>(tp + fn);
            r.recall_defined[ii] = true;
            rsum += r.recall[ii];
            ++r.recall_classes;
        }
        if (r.precision_defined[ii] && r.recall_defined[ii] &&
            r.precision[ii] + r.recall[ii] > 0.0) {
            r.f1[ii] = 2.0 * r.precision[ii] * r.recall[ii] / (r.precision[ii] + r.recall[ii]);
            r.f1_defined[ii] = true;
            fsum += r.f1[ii];
            ++r.f1_classes;
        }
    }
    r.macro_precision = r.precision_classes > 0 ? psum / r.precision_classes : 0.0;
    r.macro_recall = r.recall_classes > 0 ? rsum / r.recall_classes : 0.0;
    r.macro_f1 = r.f1_classes > 0 ? fsum / r.f1_classes : 0.0;
    r.accuracy = static_cast<double>(trace) / static_cast<double>(cm.total());
    return r;
}

MetricsReport evaluate(const CcrGnnParams& params, const CcrGnnConfig& config,
                       const std::vector<ProcessedRecord>& test_set) {
    require(!test_set.empty(), "evaluate: empty test set");
    std::vector<int> predictions, truths;
    predictions.reserve(test_set.size());
    truths.reserve(test_set.size());
    for (const auto& rec : test_set) {
        predictions.push_back(predict(params, config, rec));
        truths.push_back(rec.label_index);
    }
    return macro_metrics(confusion(predictions, truths, config.class_count));
}

// ---------------------------------------------------------------------------
// Flat-vector baselines
// ---------------------------------------------------------------------------

namespace {

std::vector<Var> insert_layers(Tape& tape, const std::vector<MlpLayer>& layers) {
    std::vector<Var> vars;
    for (const auto& l : layers) {
        vars.push_back(tape.input_ref(&l.weight));
        vars.push_back(tape.input_ref(&l.bias));
    }
    return vars;
}

Var baseline_forward(Tape& tape, const std::vector<Var>& vars, Var x, bool mlp_relu) {
    Var h = x;
    for (size_t l = 0; l * 2 < vars.size(); ++l) {
        Var z = tape.add(tape.matmul(vars[l * 2], h), vars[l * 2 + 1]);
        const bool last = (l * 2 + 2 == vars.size());
        h = last ? z : (mlp_relu ? tape.relu(z) : z);
    }
    return tape.log_softmax(h);
}

long long layer_param_count(const std::vector<MlpLayer>& layers) {
    long long n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
}

std::vector<double> flatten_layers(const std::vector<MlpLayer>& layers) {
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(layer_param_count(layers)));
    for (const auto& l : layers) {
        flat.insert(flat.end(), l.weight.data().begin(), l.weight.data().end());
        flat.insert(flat.end(), l.bias.data().begin(), l.bias.data().end());
    }
    return flat;
}

void assign_layers(std::vector<MlpLayer>& layers, const std::vector<double>& flat) {
    size_t off = 0;
    auto take = [&](Matrix& m) {
        std::copy(flat.begin() + static_cast<long>(off),
                  flat.begin() + static_cast<long>(off + static_cast<size_t>(m.size())),
                  m.data().begin());
        off += static_cast<size_t>(m.size());
    };
    for (auto& l : layers) {
        take(l.weight);
        take(l.bias);
    }
}

BaselineResult train_flat_model(const std::vector<ProcessedRecord>& train,
                                const std::vector<ProcessedRecord>& test, int class_count,
                                const BaselineConfig& config, int hidden) {
    require(!train.empty(), "baseline: empty training set");
    require(class_count >= 2, "baseline: class_count must be >= 2");
    const int d = static_cast<int>(train.front().x.size());

    std::vector<MlpLayer> layers;
    std::mt19937_64 rng(config.seed);
    auto make_layer = [&](int out, int in) {
        MlpLayer l{Matrix::zeros(out, in), Matrix::zeros(out, 1)};
        const double b = std::sqrt(6.0 / (in + out));
        std::uniform_real_distribution<double> dist(-b, b);
        for (double& v : l.weight.data()) v = dist(rng);
        return l;
    };
    if (hidden > 0) {
        layers.push_back(make_layer(hidden, d));
        layers.push_back(make_layer(class_count, hidden));
    } else {
        layers.push_back(make_layer(class_count, d));
    }

    std::vector<double> flat = flatten_layers(layers);
    AdamState adam(flat.size());
    std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    double last_accuracy = 0.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        long long correct = 0;
        for (size_t start = 0; start < train.size();
             start += static_cast<size_t>(config.batch_size)) {
            const size_t stop =
                std::min(train.size(), start + static_cast<size_t>(config.batch_size));
            std::vector<double> grad(flat.size(), 0.0);
            for (size_t b = start; b < stop; ++b) {
                const ProcessedRecord& rec = train[order[b]];
                Tape tape(true);
                std::vector<Var> vars = insert_layers(tape, layers);
                Var x = tape.input(Matrix::column(rec.x));
                Var log_probs = baseline_forward(tape, vars, x, hidden > 0);
                Var nll = tape.scale(
                    tape.sum(tape.hadamard(tape.constant(one_hot(rec.label_index, class_count)),
                                           log_probs)),
                    -1.0);
                Var total = nll;
                if (config.l2 > 0.0) {
                    Var l2;
                    bool first = true;
                    for (Var v : vars) {
                        Var sq = tape.sum_squares(v);
                        l2 = first ? sq : tape.add(l2, sq);
                        first = false;
                    }
                    total = tape.add(nll, tape.scale(l2, config.l2));
                }
                if (!std::isfinite(tape.value(total).at(0, 0)))
                    throw TrainError("baseline: non-finite loss at epoch " +
                                     std::to_string(epoch));
                if (argmax_index(tape.value(log_probs)) == rec.label_index) ++correct;
                tape.backward(total);
                size_t off = 0;
                for (Var v : vars) {
                    const Matrix& a = tape.adjoint(v);
                    for (long long i = 0; i < a.size(); ++i) grad[off + static_cast<size_t>(i)] +=
                        a.data()[static_cast<size_t>(i)];
                    off += static_cast<size_t>(a.size());
                }
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (double& g : grad) g *= inv;
            adam_step(adam, flat, grad, config.lr);
            assign_layers(layers, flat);
        }
        last_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
    }

    BaselineResult result;
    result.layers = layers;
    result.train_accuracy = last_accuracy;

    require(!test.empty(), "baseline: empty test set");
    std::vector<int> predictions, truths;
    for (const auto& rec : test) {
        Tape tape(false);
        std::vector<Var> vars = insert_layers(tape, layers);
        Var x = tape.input(Matrix::column(rec.x));
        Var log_probs = baseline_forward(tape, vars, x, hidden > 0);
        predictions.push_back(argmax_index(tape.value(log_probs)));
        truths.push_back(rec.label_index);
    }
    result.metrics = macro_metrics(confusion(predictions, truths, class_count));
    return result;
}

}  // namespace

BaselineResult baseline_logreg(const std::vector<ProcessedRecord>& train,
                               const std::vector<ProcessedRecord>& test, int class_count,
                               BaselineConfig config) {
    return train_flat_model(train, test, class_count, config, 0);
}

BaselineResult baseline_mlp(const std::vector<ProcessedRecord>& train,
                            const std::vector<ProcessedRecord>& test, int class_count,
                            BaselineConfig config) {
    const int hidden = config.hidden > 0 ? config.hidden : 1000;
    return train_flat_model(train, test, class_count, config, hidden);
}

std::string metrics_to_json(const MetricsReport& report) {
    nlohmann::json j;
    j["accuracy"] = report.accuracy;
    j["macro"] = {{"precision", report.macro_precision},
                  {"recall", report.macro_recall},
                  {"f1", report.macro_f1}};
    j["per_class"] = nlohmann::json::array();
    for (size_t i = 0; i < report.precision.size(); ++i) {
        nlohmann::json c;
        c["precision"] =
            report.precision_defined[i] ? nlohmann::json(report.precision[i]) : nlohmann::json();
        c["recall"] =
            report.recall_defined[i] ? nlohmann::json(report.recall[i]) : nlohmann::json();
        c["f1"] = report.f1_defined[i] ? nlohmann::json(report.f1[i]) : nlohmann::json();
        j["per_class"].push_back(c);
    }
    j["contributing_classes"] = {{"precision", report.precision_classes},
                                 {"recall", report.recall_classes},
                                 {"f1", report.f1_classes}};
    return j.dump(2) + "\n";
}

std::string metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
    size_t name_width = 5;  // "Model"
    for (const auto& [name, _] : rows) name_width = std::max(name_width, name.size());
    std::ostringstream out;
    out << std::left;
    out.width(static_cast<std::streamsize>(name_width + 2));
    out << "Model";
    out << "Recall    Accuracy  F1-score\n";
    char buf[64];
    for (const auto& [name, rep] : rows) {
        out.width(static_cast<std::streamsize>(name_width + 2));
        out << name;
        std::snprintf(buf, sizeof(buf), "%.5f   %.5f   %.5f\n", rep.macro_recall, rep.accuracy,
                      rep.macro_f1);
        out << buf;
    }
    return out.str();
}

}  // namespace ccrgnn
