#include "ccrgnn/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ccrgnn/errors.hpp"

namespace ccrgnn {

namespace {

// RFC-4180-ish line splitter: handles quoted fields with embedded commas and
// doubled quotes. Rows never span lines in the files we produce or consume.
std::vector<std::string> split_csv_line(const std::string& line, size_t row_number) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted)
        throw ParseError("row " + std::to_string(row_number) + ": unterminated quote");
    fields.push_back(cur);
    return fields;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

bool parse_double(const std::string& s, double* out) {
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno != 0) return false;
    *out = v;
    return true;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim_cr(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
    return s;
}

std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace

int rating_index(const std::string& grade) {
    for (size_t i = 0; i < kRatingGrades.size(); ++i)
        if (grade == kRatingGrades[i]) return static_cast<int>(i);
    return -1;
}

int FeatureSchema::dimension() const {
    int d = static_cast<int>(numeric.size());
    for (const auto& c : categorical) d += static_cast<int>(c.vocabulary.size());
    return d;
}

// ---------------------------------------------------------------------------
// Raw CSV ingestion
// ---------------------------------------------------------------------------

std::vector<RawRecord> load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": missing header row");
    const std::vector<std::string> header = split_csv_line(trim_cr(line), 1);

    int rating_col = -1, id_col = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "rating") rating_col = static_cast<int>(i);
        if (header[i] == "id") id_col = static_cast<int>(i);
    }
    if (rating_col < 0) throw ParseError(path + ": no \"rating\" column in header");

    // Read all rows first: column types depend on every cell.
    std::vector<std::vector<std::string>> rows;
    size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        line = trim_cr(line);
        if (line.empty()) continue;
        std::vector<std::string> fields = split_csv_line(line, row_number);
        if (fields.size() != header.size())
            throw ParseError("row " + std::to_string(row_number) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        rows.push_back(std::move(fields));
    }

    // A column is numeric iff every non-empty cell parses fully as a number.
    std::vector<bool> numeric_col(header.size(), true);
    for (const auto& fields : rows) {
        for (size_t c = 0; c < fields.size(); ++c) {
            if (static_cast<int>(c) == rating_col || static_cast<int>(c) == id_col) continue;
            double unused;
            if (!fields[c].empty() && !parse_double(fields[c], &unused)) numeric_col[c] = false;
        }
    }

    std::vector<RawRecord> records;
    records.reserve(rows.size());
    for (size_t r = 0; r < rows.size(); ++r) {
        const auto& fields = rows[r];
        RawRecord rec;
        rec.id = (id_col >= 0) ? fields[static_cast<size_t>(id_col)] : std::to_string(r);
        rec.label = fields[static_cast<size_t>(rating_col)];
        if (rating_index(rec.label) < 0)
            throw ValidationError("row " + std::to_string(r + 2) + ": unknown rating \"" +
                                  rec.label + "\"");
        for (size_t c = 0; c < fields.size(); ++c) {
            if (static_cast<int>(c) == rating_col || static_cast<int>(c) == id_col) continue;
            if (numeric_col[c]) {
                std::optional<double> v;
                double parsed;
                if (parse_double(fields[c], &parsed)) v = parsed;
                rec.numeric.emplace_back(header[c], v);
            } else {
                std::optional<std::string> v;
                if (!fields[c].empty()) v = fields[c];
                rec.categorical.emplace_back(header[c], v);
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void write_csv(const std::string& path, const std::vector<RawRecord>& records) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open file for writing: " + path);
    if (records.empty()) {
        out << "id,rating\n";
        return;
    }
    const RawRecord& first = records.front();
    out << "id";
    for (const auto& [name, _] : first.numeric) out << ',' << csv_escape(name);
    for (const auto& [name, _] : first.categorical) out << ',' << csv_escape(name);
    out << ",rating\n";
    for (const auto& rec : records) {
        out << csv_escape(rec.id);
        for (const auto& [_, v] : rec.numeric) out << ',' << (v ? format_double(*v) : "");
        for (const auto& [_, v] : rec.categorical) out << ',' << (v ? csv_escape(*v) : "");
        out << ',' << csv_escape(rec.label) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Schema fitting and preprocessing
// ---------------------------------------------------------------------------

FeatureSchema fit_schema(const std::vector<RawRecord>& records, double missing_drop_fraction) {
    if (records.empty()) throw SchemaError("fit_schema: no records");
    if (!(missing_drop_fraction > 0.0 && missing_drop_fraction <= 1.0))
        throw SchemaError("fit_schema: missing_drop_fraction must lie in (0, 1]");

    const RawRecord& first = records.front();
    for (const auto& rec : records) {
        if (rec.numeric.size() != first.numeric.size() ||
            rec.categorical.size() != first.categorical.size())
            throw SchemaError("fit_schema: records have differing feature sets");
        for (size_t i = 0; i < rec.numeric.size(); ++i)
            if (rec.numeric[i].first != first.numeric[i].first)
                throw SchemaError("fit_schema: numeric feature order differs across records");
        for (size_t i = 0; i < rec.categorical.size(); ++i)
            if (rec.categorical[i].first != first.categorical[i].first)
                throw SchemaError("fit_schema: categorical feature order differs across records");
    }

    const double n = static_cast<double>(records.size());
    FeatureSchema schema;

    for (size_t f = 0; f < first.numeric.size(); ++f) {
        const std::string& name = first.numeric[f].first;
        long long present = 0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        double sum = 0.0;
        for (const auto& rec : records) {
            const auto& v = rec.numeric[f].second;
            if (!v) continue;
            ++present;
            lo = std::min(lo, *v);
            hi = std::max(hi, *v);
            sum += *v;
        }
        const double missing_fraction = (n - static_cast<double>(present)) / n;
        if (missing_fraction > missing_drop_fraction) {
            schema.dropped.push_back(name);
            continue;
        }
        if (present == 0)
            throw SchemaError("fit_schema: kept numeric feature \"" + name +
                              "\" has no observed values");
        schema.numeric.push_back({name, lo, hi, sum / static_cast<double>(present)});
    }

    for (size_t f = 0; f < first.categorical.size(); ++f) {
        const std::string& name = first.categorical[f].first;
        std::map<std::string, long long> freq;
        long long present = 0;
        for (const auto& rec : records) {
            const auto& v = rec.categorical[f].second;
            if (!v) continue;
            ++present;
            ++freq[*v];
        }
        const double missing_fraction = (n - static_cast<double>(present)) / n;
        if (missing_fraction > missing_drop_fraction) {
            schema.dropped.push_back(name);
            continue;
        }
        if (present == 0)
            throw SchemaError("fit_schema: kept categorical feature \"" + name +
                              "\" has no observed values");
        CategoricalStat stat;
        stat.name = name;
        long long best = -1;
        for (const auto& [value, count] : freq) {
            stat.vocabulary.push_back(value);  // std::map iterates sorted
            if (count > best) {
                best = count;
                stat.fill = value;
            }
        }
        schema.categorical.push_back(std::move(stat));
    }
    return schema;
}

ProcessedRecord preprocess(const RawRecord& record, const FeatureSchema& schema) {
    ProcessedRecord out;
    out.x.reserve(static_cast<size_t>(schema.dimension()));

    for (const auto& stat : schema.numeric) {
        const auto it = std::find_if(record.numeric.begin(), record.numeric.end(),
                                     [&](const auto& p) { return p.first == stat.name; });
        if (it == record.numeric.end())
            throw ValidationError("preprocess: record lacks numeric feature \"" + stat.name + "\"");
        const double raw = it->second ? *it->second : stat.mean;
        const double range = stat.max - stat.min;
        out.x.push_back(range > 0.0 ? (raw - stat.min) / range : 0.0);
    }

    for (const auto& stat : schema.categorical) {
        const auto it = std::find_if(record.categorical.begin(), record.categorical.end(),
                                     [&](const auto& p) { return p.first == stat.name; });
        if (it == record.categorical.end())
            throw ValidationError("preprocess: record lacks categorical feature \"" + stat.name +
                                  "\"");
        const std::string& value = it->second ? *it->second : stat.fill;
        const auto pos = std::find(stat.vocabulary.begin(), stat.vocabulary.end(), value);
        if (pos == stat.vocabulary.end())
            throw ValidationError("preprocess: value \"" + value + "\" of feature \"" + stat.name +
                                  "\" not in vocabulary");
        for (size_t i = 0; i < stat.vocabulary.size(); ++i)
            out.x.push_back(i == static_cast<size_t>(pos - stat.vocabulary.begin()) ? 1.0 : 0.0);
    }

    out.label_index = rating_index(record.label);
    if (out.label_index < 0)
        throw ValidationError("preprocess: unknown rating \"" + record.label + "\"");
    return out;
}

std::vector<ProcessedRecord> preprocess_all(const std::vector<RawRecord>& records,
                                            const FeatureSchema& schema) {
    std::vector<ProcessedRecord> out;
    out.reserve(records.size());
    for (const auto& rec : records) out.push_back(preprocess(rec, schema));
    return out;
}

// ---------------------------------------------------------------------------
// SMOTE, split, synthesis
// ---------------------------------------------------------------------------

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double dlt = a[i] - b[i];
        s += dlt * dlt;
    }
    return s;
}

std::map<int, std::vector<size_t>> group_by_class(const std::vector<ProcessedRecord>& dataset) {
    std::map<int, std::vector<size_t>> groups;
    for (size_t i = 0; i < dataset.size(); ++i) {
        require(dataset[i].label_index >= 0, "label_index must be non-negative");
        groups[dataset[i].label_index].push_back(i);
    }
    return groups;
}

}  // namespace

std::vector<ProcessedRecord> smote(const std::vector<ProcessedRecord>& dataset, int k,
                                   std::uint64_t seed) {
    if (k < 1) throw RebalanceError("smote: k must be >= 1");
    if (dataset.empty()) return {};

    const auto groups = group_by_class(dataset);
    size_t majority = 0;
    for (const auto& [cls, idx] : groups) majority = std::max(majority, idx.size());

    std::vector<ProcessedRecord> out = dataset;  // originals unchanged
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (const auto& [cls, idx] : groups) {
        const size_t need = majority - idx.size();
        if (need == 0) continue;
        if (idx.size() < 2)
            throw RebalanceError("smote: class " + std::to_string(cls) +
                                 " has fewer than 2 samples, cannot interpolate");

        // k nearest same-class neighbours per point, ties broken by index.
        const int kk = std::min<int>(k, static_cast<int>(idx.size()) - 1);
        std::vector<std::vector<size_t>> nn(idx.size());
        for (size_t a = 0; a < idx.size(); ++a) {
            std::vector<std::pair<double, size_t>> dists;
            for (size_t b = 0; b < idx.size(); ++b) {
                if (a == b) continue;
                dists.emplace_back(sq_distance(dataset[idx[a]].x, dataset[idx[b]].x), idx[b]);
            }
            std::sort(dists.begin(), dists.end());
            for (int t = 0; t < kk; ++t) nn[a].push_back(dists[static_cast<size_t>(t)].second);
        }

        std::uniform_int_distribution<int> pick(0, kk - 1);
        for (size_t s = 0; s < need; ++s) {
            const size_t base = s % idx.size();  // cycle through class points
            const std::vector<double>& x = dataset[idx[base]].x;
            const std::vector<double>& x_nn = dataset[nn[base][static_cast<size_t>(pick(rng))]].x;
            const double u = unit(rng);
            ProcessedRecord synth;
            synth.label_index = cls;
            synth.x.resize(x.size());
            for (size_t i = 0; i < x.size(); ++i) synth.x[i] = x[i] + u * (x_nn[i] - x[i]);
            out.push_back(std::move(synth));
        }
    }
    return out;
}

std::pair<std::vector<ProcessedRecord>, std::vector<ProcessedRecord>> stratified_split(
    const std::vector<ProcessedRecord>& dataset, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("stratified_split: test_fraction must lie in (0, 1)");

    const auto groups = group_by_class(dataset);
    auto rng = make_rng(seed);
    std::vector<size_t> test_idx;
    for (const auto& [cls, idx] : groups) {
        if (idx.size() < 2) continue;  // lone samples stay in train
        std::vector<size_t> shuffled = idx;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        size_t n_test = static_cast<size_t>(
            std::llround(test_fraction * static_cast<double>(idx.size())));
        n_test = std::min(n_test, idx.size() - 1);  // keep at least one in train
        test_idx.insert(test_idx.end(), shuffled.begin(),
                        shuffled.begin() + static_cast<long>(n_test));
    }
    std::sort(test_idx.begin(), test_idx.end());

    std::vector<ProcessedRecord> train, test;
    size_t t = 0;
    for (size_t i = 0; i < dataset.size(); ++i) {
        if (t < test_idx.size() && test_idx[t] == i) {
            test.push_back(dataset[i]);
            ++t;
        } else {
            train.push_back(dataset[i]);
        }
    }
    return {std::move(train), std::move(test)};
}

std::vector<ProcessedRecord> generate_synthetic(int n, int d, int m, double separation,
                                                const std::vector<double>& imbalance,
                                                std::uint64_t seed, double noise_sigma) {
    if (n < m) throw ConfigError("generate_synthetic: need n >= m");
    if (d < 2) throw ConfigError("generate_synthetic: need d >= 2");
    if (m < 1) throw ConfigError("generate_synthetic: need m >= 1");
    if (static_cast<int>(imbalance.size()) != m)
        throw ConfigError("generate_synthetic: imbalance length must equal m");
    double total = 0.0;
    for (double w : imbalance) {
        if (w < 0.0) throw ConfigError("generate_synthetic: negative imbalance weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw ConfigError("generate_synthetic: imbalance must sum to 1");
    if (noise_sigma < 0.0) throw ConfigError("generate_synthetic: negative noise");

    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Prototypes contract toward the cube centre as separation -> 0.
    std::vector<std::vector<double>> prototypes(static_cast<size_t>(m),
                                                std::vector<double>(static_cast<size_t>(d)));
    for (auto& proto : prototypes)
        for (double& v : proto)
            v = std::clamp(0.5 + separation * (unit(rng) - 0.5), 0.0, 1.0);

    // Largest-remainder apportionment of n by the imbalance weights, at
    // least one sample per class.
    std::vector<int> counts(static_cast<size_t>(m));
    std::vector<std::pair<double, int>> remainders;
    int assigned = 0;
    for (int c = 0; c < m; ++c) {
        const double exact = imbalance[static_cast<size_t>(c)] * n;
        counts[static_cast<size_t>(c)] = static_cast<int>(std::floor(exact));
        assigned += counts[static_cast<size_t>(c)];
        remainders.emplace_back(-(exact - std::floor(exact)), c);
    }
    std::sort(remainders.begin(), remainders.end());
    for (int i = 0; assigned < n; ++i, ++assigned)
        ++counts[static_cast<size_t>(remainders[static_cast<size_t>(i % m)].second)];
    for (int c = 0; c < m; ++c) {
        while (counts[static_cast<size_t>(c)] == 0) {
            // steal one from the largest class
            const auto big = std::max_element(counts.begin(), counts.end());
            --*big;
            ++counts[static_cast<size_t>(c)];
        }
    }

    std::vector<ProcessedRecord> out;
    out.reserve(static_cast<size_t>(n));
    for (int c = 0; c < m; ++c) {
        for (int s = 0; s < counts[static_cast<size_t>(c)]; ++s) {
            ProcessedRecord rec;
            rec.label_index = c;
            rec.x.resize(static_cast<size_t>(d));
            for (int f = 0; f < d; ++f)
                rec.x[static_cast<size_t>(f)] =
                    std::clamp(prototypes[static_cast<size_t>(c)][static_cast<size_t>(f)] +
                                   noise_sigma * gauss(rng),
                               0.0, 1.0);
            out.push_back(std::move(rec));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Processed dataset and schema files
// ---------------------------------------------------------------------------

void write_processed_csv(const std::string& path, const std::vector<ProcessedRecord>& records) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open file for writing: " + path);
    const size_t d = records.empty() ? 0 : records.front().x.size();
    for (size_t i = 0; i < d; ++i) out << 'f' << i << ',';
    out << "label_index\n";
    for (const auto& rec : records) {
        require(rec.x.size() == d, "write_processed_csv: inconsistent dimensions");
        for (double v : rec.x) out << format_double(v) << ',';
        out << rec.label_index << '\n';
    }
}

std::vector<ProcessedRecord> load_processed_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open CSV file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": missing header row");
    const auto header = split_csv_line(trim_cr(line), 1);
    if (header.empty() || header.back() != "label_index")
        throw ParseError(path + ": last column must be label_index");
    const size_t d = header.size() - 1;
    for (size_t i = 0; i < d; ++i)
        if (header[i] != "f" + std::to_string(i))
            throw ParseError(path + ": expected column f" + std::to_string(i));

    std::vector<ProcessedRecord> records;
    size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        line = trim_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv_line(line, row_number);
        if (fields.size() != header.size())
            throw ParseError("row " + std::to_string(row_number) + ": expected " +
                             std::to_string(header.size()) + " fields");
        ProcessedRecord rec;
        rec.x.resize(d);
        for (size_t i = 0; i < d; ++i) {
            if (!parse_double(fields[i], &rec.x[i]))
                throw ParseError("row " + std::to_string(row_number) + ": bad number \"" +
                                 fields[i] + "\"");
        }
        double lbl;
        if (!parse_double(fields[d], &lbl) || lbl != std::floor(lbl) || lbl < 0)
            throw ParseError("row " + std::to_string(row_number) + ": bad label_index");
        rec.label_index = static_cast<int>(lbl);
        records.push_back(std::move(rec));
    }
    return records;
}

std::string schema_to_json(const FeatureSchema& schema) {
    nlohmann::json j;
    j["numeric"] = nlohmann::json::array();
    for (const auto& s : schema.numeric)
        j["numeric"].push_back({{"name", s.name}, {"min", s.min}, {"max", s.max}, {"mean", s.mean}});
    j["categorical"] = nlohmann::json::array();
    for (const auto& s : schema.categorical)
        j["categorical"].push_back(
            {{"name", s.name}, {"vocabulary", s.vocabulary}, {"fill", s.fill}});
    j["dropped"] = schema.dropped;
    j["dimension"] = schema.dimension();
    return j.dump(2) + "\n";
}

FeatureSchema schema_from_json(const std::string& text) {
    FeatureSchema schema;
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        for (const auto& e : j.at("numeric"))
            schema.numeric.push_back({e.at("name").get<std::string>(), e.at("min").get<double>(),
                                      e.at("max").get<double>(), e.at("mean").get<double>()});
        for (const auto& e : j.at("categorical"))
            schema.categorical.push_back({e.at("name").get<std::string>(),
                                          e.at("vocabulary").get<std::vector<std::string>>(),
                                          e.at("fill").get<std::string>()});
        schema.dropped = j.at("dropped").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("schema_from_json: ") + e.what());
    }
    for (const auto& s : schema.numeric)
        if (!(s.min <= s.mean && s.mean <= s.max))
            throw ValidationError("schema_from_json: feature \"" + s.name +
                                  "\" violates min <= mean <= max");
    return schema;
}

void save_schema(const std::string& path, const FeatureSchema& schema) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open file for writing: " + path);
    out << schema_to_json(schema);
}

FeatureSchema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open schema file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return schema_from_json(buf.str());
}

std::vector<int> class_histogram(const std::vector<ProcessedRecord>& dataset) {
    int m = 0;
    for (const auto& rec : dataset) m = std::max(m, rec.label_index + 1);
    std::vector<int> hist(static_cast<size_t>(m), 0);
    for (const auto& rec : dataset) ++hist[static_cast<size_t>(rec.label_index)];
    return hist;
}

}  // namespace ccrgnn
