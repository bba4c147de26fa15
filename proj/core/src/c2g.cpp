#include "ccrgnn/c2g.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "ccrgnn/errors.hpp"

namespace ccrgnn {

std::vector<std::vector<int>> FeatureGraph::neighbor_lists() const {
    std::vector<std::vector<int>> nbrs(node_attrs.size());
    for (const auto& [i, j] : edges) {
        nbrs[static_cast<size_t>(i)].push_back(j);
        nbrs[static_cast<size_t>(j)].push_back(i);
    }
    return nbrs;
}

InteractionMap interaction_map(const std::vector<double>& x) {
    require(!x.empty(), "interaction_map: empty vector");
    const int d = static_cast<int>(x.size());
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m.at(i, j) = x[static_cast<size_t>(i)] * x[static_cast<size_t>(j)];
    return InteractionMap{std::move(m)};
}

Matrix threshold_activate(const InteractionMap& map, double r) {
    Matrix a(map.values.rows(), map.values.cols());
    for (long long i = 0; i < a.size(); ++i)
        a.data()[i] = (map.values.data()[i] >= r) ? 1.0 : 0.0;
    return a;
}

bool is_connected(const Matrix& adjacency) {
    const int d = adjacency.rows();
    require(d == adjacency.cols(), "is_connected: adjacency must be square, got " +
                                       adjacency.shape_str());
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double v = adjacency.at(i, j);
            require(v == 0.0 || v == 1.0, "is_connected: non-binary entry");
            require(v == adjacency.at(j, i), "is_connected: asymmetric adjacency at (" +
                                                 std::to_string(i) + "," + std::to_string(j) + ")");
        }
    if (d <= 1) return true;
    std::vector<char> seen(static_cast<size_t>(d), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v = 0; v < d; ++v) {
            if (v == u || adjacency.at(u, v) == 0.0 || seen[static_cast<size_t>(v)]) continue;
            seen[static_cast<size_t>(v)] = 1;
            ++reached;
            stack.push_back(v);
        }
    }
    return reached == d;
}

FeatureGraph build_graph(const std::vector<double>& x, double step) {
    if (!(step > 0.0)) throw ConfigError("build_graph: step must be positive");
    require(!x.empty(), "build_graph: empty feature vector");

    const InteractionMap map = interaction_map(x);
    const double top = max_entry(map.values);
    const double bottom = min_entry(map.values);
    const long long max_iter =
        static_cast<long long>(std::ceil((top - bottom) / step)) + 2;

    FeatureGraph g;
    g.node_attrs = x;
    double r = top;
    for (long long it = 0;; ++it) {
        require(it < max_iter, "build_graph: iteration bound exceeded");
        Matrix a = threshold_activate(map, r);
        if (is_connected(a)) {
            g.adjacency = std::move(a);
            g.threshold = r;
            g.iterations = static_cast<int>(it) + 1;
            break;
        }
        r -= step;
    }
    const int d = g.node_count();
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (g.adjacency.at(i, j) != 0.0) g.edges.emplace_back(i, j);
    return g;
}

std::string graph_to_dot(const FeatureGraph& g) {
    std::ostringstream out;
    out << "graph feature_graph {\n";
    out.precision(17);
    out << "  // threshold r = " << g.threshold << "\n";
    for (int i = 0; i < g.node_count(); ++i)
        out << "  n" << i << " [label=\"x" << i << "=" << g.node_attrs[static_cast<size_t>(i)]
            << "\"];\n";
    for (const auto& [i, j] : g.edges) out << "  n" << i << " -- n" << j << ";\n";
    out << "}\n";
    return out.str();
}

std::string graph_to_json(const FeatureGraph& g) {
    nlohmann::json j;
    j["d"] = g.node_count();
    j["threshold"] = g.threshold;
    j["edges"] = nlohmann::json::array();
    for (const auto& [a, b] : g.edges) j["edges"].push_back({a, b});
    j["attrs"] = g.node_attrs;
    return j.dump(2) + "\n";
}

FeatureGraph graph_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("graph_from_json: ") + e.what());
    }
    FeatureGraph g;
    try {
        g.node_attrs = j.at("attrs").get<std::vector<double>>();
        g.threshold = j.at("threshold").get<double>();
        const int d = j.at("d").get<int>();
        if (d != g.node_count())
            throw ValidationError("graph_from_json: d does not match attrs length");
        g.adjacency = Matrix::zeros(d, d);
        const InteractionMap map = interaction_map(g.node_attrs);
        for (int i = 0; i < d; ++i)
            g.adjacency.at(i, i) = (map.values.at(i, i) >= g.threshold) ? 1.0 : 0.0;
        for (const auto& e : j.at("edges")) {
            const int a = e.at(0).get<int>();
            const int b = e.at(1).get<int>();
            if (a < 0 || b < 0 || a >= d || b >= d || a == b)
                throw ValidationError("graph_from_json: bad edge");
            g.edges.emplace_back(a, b);
            g.adjacency.at(a, b) = 1.0;
            g.adjacency.at(b, a) = 1.0;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("graph_from_json: ") + e.what());
    }
    return g;
}

}  // namespace ccrgnn
