#include "clustval/namemetrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "clustval/autometrics.hpp"
#include "clustval/error.hpp"

namespace clustval {

using json = nlohmann::json;

void NameSet::validate() const {
    if (n_reviewers == 0) throw Error("name set has N_R = 0");
    for (const auto& [key, list] : names)
        if (list.size() != n_reviewers)
            throw Error("cluster " + key + " has " + std::to_string(list.size()) + " names, expected " +
                        std::to_string(n_reviewers));
}

void to_json(json& j, const NameSet& s) {
    j = json{{"source", s.source}, {"n_reviewers", s.n_reviewers}, {"names", s.names}};
}

void from_json(const json& j, NameSet& s) {
    s.source = j.value("source", std::string{});
    s.names = j.at("names").get<std::map<std::string, std::vector<std::string>>>();
    if (j.contains("n_reviewers")) {
        s.n_reviewers = j["n_reviewers"].get<std::size_t>();
    } else {
        s.n_reviewers = s.names.empty() ? 0 : s.names.begin()->second.size();
    }
}

void save_name_set(const NameSet& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << json(s).dump(2) << '\n';
}

NameSet load_name_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open name set: " + path.string());
    NameSet s;
    try {
        s = json::parse(in).get<NameSet>();
    } catch (const json::exception& e) {
        throw Error("malformed name set " + path.string() + ": " + e.what());
    }
    s.validate();
    return s;
}

std::vector<std::string> normalize_name(std::string_view raw, const TokenizerConfig& config) {
    auto first = raw.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {"none"};
    auto tokens = tokenize(raw, config);
    if (tokens.size() == 1 && tokens[0] == "none") return tokens;
    // "None" survives stopword lists that would otherwise drop it.
    auto plain = tokenize(raw, TokenizerConfig::minimal());
    if (plain.size() == 1 && plain[0] == "none") return {"none"};
    return tokens;
}

ConsistencyMap consistency(const std::vector<std::vector<std::string>>& names, bool once_per_name) {
    if (names.empty()) throw Error("consistency needs at least one name (N_R = 0)");
    std::map<std::string, std::size_t> counts;
    for (const auto& name : names) {
        if (once_per_name) {
            for (const auto& t : std::set<std::string>(name.begin(), name.end())) ++counts[t];
        } else {
            for (const auto& t : name) ++counts[t];
        }
    }
    ConsistencyMap s;
    const auto n_r = static_cast<double>(names.size());
    for (const auto& [t, c] : counts) s[t] = static_cast<double>(c) / n_r;
    return s;
}

double interpretability(const ConsistencyMap& s) {
    if (s.empty()) throw Error("interpretability of an empty consistency table");
    double best = 0.0;
    for (const auto& [t, v] : s) best = std::max(best, v);
    return best;
}

std::vector<std::pair<std::string, double>> top_named_words(const ConsistencyMap& s, std::size_t n) {
    std::vector<std::pair<std::string, double>> out(s.begin(), s.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (out.size() > n) out.resize(n);
    return out;
}

namespace {

std::vector<std::string> stemmed(const std::vector<std::string>& tokens) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(stem(t));
    return out;
}

}  // namespace

std::vector<double> name_distinctiveness(const std::vector<std::vector<std::string>>& corpora) {
    if (corpora.size() < 2) throw Error("distinctiveness needs at least two clusters");
    std::vector<WordDistribution> dists;
    dists.reserve(corpora.size());
    for (std::size_t i = 0; i < corpora.size(); ++i) {
        if (corpora[i].empty()) throw Error("name corpus " + std::to_string(i) + " is empty");
        auto s = stemmed(corpora[i]);
        dists.push_back(word_distribution(s));
    }
    const std::size_t n = dists.size();
    std::vector<double> out(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = jsd(dists[i], dists[j]);
            out[i] = std::min(out[i], v);
            out[j] = std::min(out[j], v);
        }
    return out;
}

namespace {

std::pair<double, double> mean_sd(const std::vector<double>& v) {
    if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    long double sum = 0.0L;
    for (double x : v) sum += x;
    long double mean = sum / static_cast<long double>(v.size());
    long double ss = 0.0L;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {static_cast<double>(mean), static_cast<double>(std::sqrt(ss / static_cast<long double>(v.size())))};
}

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

ModelSummary model_summary(const std::vector<double>& i_values, const std::vector<double>& d_values) {
    ModelSummary m;
    m.n_clusters = i_values.size();
    std::tie(m.mean_i, m.sd_i) = mean_sd(i_values);
    std::vector<double> d;
    for (double v : d_values)
        if (std::isfinite(v)) d.push_back(v);
    std::tie(m.mean_d, m.sd_d) = mean_sd(d);
    return m;
}

NameMetricsReport compute_name_metrics(const NameSet& names, const std::map<std::string, SampleSource>* key_map,
                                       const NameMetricOptions& options) {
    names.validate();
    NameMetricsReport r;
    r.source = names.source;
    r.n_reviewers = names.n_reviewers;

    std::map<std::string, std::vector<std::size_t>> by_model;
    std::vector<std::vector<std::string>> corpora;
    for (const auto& [key, raw_names] : names.names) {
        ClusterNameMetrics m;
        m.cluster_key = key;
        if (key_map) {
            auto it = key_map->find(key);
            if (it == key_map->end()) throw Error("cluster key " + key + " is not in the key map");
            m.model = it->second.model;
            m.cluster = it->second.cluster;
        }
        std::vector<std::vector<std::string>> tokens;
        std::vector<std::string> corpus;
        for (const auto& raw : raw_names) {
            tokens.push_back(normalize_name(raw, options.tokenizer));
            corpus.insert(corpus.end(), tokens.back().begin(), tokens.back().end());
        }
        m.consistency = consistency(tokens, options.once_per_name);
        m.n_tokens = corpus.size();
        m.n_types = m.consistency.size();
        if (!m.consistency.empty()) m.interpretability = interpretability(m.consistency);
        m.top_named_words = top_named_words(m.consistency, options.top_n);
        by_model[m.model].push_back(r.clusters.size());
        r.clusters.push_back(std::move(m));
        corpora.push_back(std::move(corpus));
    }

    for (const auto& [model, idx] : by_model) {
        std::vector<std::size_t> usable;
        for (auto i : idx)
            if (!corpora[i].empty()) usable.push_back(i);
        if (usable.size() >= 2) {
            std::vector<std::vector<std::string>> group;
            for (auto i : usable) group.push_back(corpora[i]);
            auto d = name_distinctiveness(group);
            for (std::size_t g = 0; g < usable.size(); ++g) r.clusters[usable[g]].distinctiveness = d[g];
        }
        std::vector<double> iv, dv;
        for (auto i : idx) {
            iv.push_back(r.clusters[i].interpretability);
            if (r.clusters[i].distinctiveness) dv.push_back(*r.clusters[i].distinctiveness);
        }
        r.models[model] = model_summary(iv, dv);
    }
    return r;
}

json to_json(const NameMetricsReport& r) {
    json clusters = json::array();
    for (const auto& c : r.clusters) {
        json top = json::array();
        for (const auto& [w, s] : c.top_named_words) top.push_back(json::array({w, s}));
        json row{{"cluster_key", c.cluster_key},
                 {"top_named_words", top},
                 {"interpretability", c.interpretability},
                 {"distinctiveness", c.distinctiveness ? json(*c.distinctiveness) : json(nullptr)},
                 {"n_tokens", c.n_tokens},
                 {"n_types", c.n_types}};
        if (!c.model.empty()) {
            row["model"] = c.model;
            row["cluster"] = c.cluster;
        }
        clusters.push_back(std::move(row));
    }
    json models = json::object();
    for (const auto& [name, m] : r.models)
        models[name.empty() ? "all" : name] = {{"mean_I", num_or_null(m.mean_i)},
                                               {"sd_I", num_or_null(m.sd_i)},
                                               {"mean_D", num_or_null(m.mean_d)},
                                               {"sd_D", num_or_null(m.sd_d)},
                                               {"n_clusters", m.n_clusters}};
    return json{{"source", r.source}, {"n_reviewers", r.n_reviewers}, {"clusters", clusters}, {"models", models}};
}

}  // namespace clustval
