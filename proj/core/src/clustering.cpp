#include "clustval/clustering.hpp"

#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "clustval/csv.hpp"
#include "clustval/error.hpp"

namespace clustval {

using json = nlohmann::json;

std::string to_string(ModelTag tag) {
    switch (tag) {
        case ModelTag::gmm: return "gmm";
        case ModelTag::lda: return "lda";
        case ModelTag::random: return "random";
        case ModelTag::external: return "external";
    }
    return "external";
}

ModelTag parse_model_tag(std::string_view name) {
    if (name == "gmm") return ModelTag::gmm;
    if (name == "lda") return ModelTag::lda;
    if (name == "random") return ModelTag::random;
    if (name == "external") return ModelTag::external;
    throw Error("unknown model tag: " + std::string(name));
}

void Clustering::validate() const {
    if (ids.size() != labels.size()) throw Error("clustering ids and labels differ in length");
    if (k < 1) throw Error("clustering K must be at least 1");
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= k)
            throw Error("cluster index " + std::to_string(labels[i]) + " out of range for id " + ids[i]);
        if (!seen.insert(ids[i]).second) throw Error("id assigned twice: " + ids[i]);
    }
}

std::vector<std::size_t> Clustering::cluster_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

std::vector<std::vector<std::size_t>> Clustering::members() const {
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < labels.size(); ++i) out[static_cast<std::size_t>(labels[i])].push_back(i);
    return out;
}

std::vector<int> Clustering::labels_for(const std::vector<std::string>& order) const {
    if (order == ids) return labels;
    if (order.size() != ids.size()) throw Error("clusterings cover different id sets");
    std::unordered_map<std::string, int> by_id;
    for (std::size_t i = 0; i < ids.size(); ++i) by_id.emplace(ids[i], labels[i]);
    std::vector<int> out;
    out.reserve(order.size());
    for (const auto& id : order) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw Error("id " + id + " missing from clustering");
        out.push_back(it->second);
    }
    return out;
}

std::filesystem::path clustering_meta_path(const std::filesystem::path& csv_path) {
    return csv_path.string() + ".meta.json";
}

void save_clustering(const Clustering& c, const std::filesystem::path& csv_path) {
    c.validate();
    {
        std::ofstream out(csv_path);
        if (!out) throw Error("cannot write " + csv_path.string());
        out << "id,cluster\n";
        for (std::size_t i = 0; i < c.ids.size(); ++i) csv::write_row(out, {c.ids[i], std::to_string(c.labels[i])});
    }
    std::ofstream meta(clustering_meta_path(csv_path));
    meta << json{{"model_tag", to_string(c.model_tag)}, {"K", c.k}, {"seed", c.seed}, {"params", c.meta}}.dump(2)
         << '\n';
}

Clustering load_clustering(const std::filesystem::path& csv_path) {
    auto records = csv::read_file(csv_path);
    if (records.empty() || records[0].fields != std::vector<std::string>{"id", "cluster"})
        throw ParseError("clustering CSV must start with header id,cluster", 1);
    Clustering c;
    int max_label = -1;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& f = records[r].fields;
        if (f.size() != 2) throw ParseError("expected 2 fields", records[r].line);
        int label = 0;
        try {
            std::size_t used = 0;
            label = std::stoi(f[1], &used);
            if (used != f[1].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError("cluster index is not an integer: " + f[1], records[r].line);
        }
        c.ids.push_back(f[0]);
        c.labels.push_back(label);
        max_label = std::max(max_label, label);
    }
    c.k = max_label + 1;
    if (auto meta_path = clustering_meta_path(csv_path); std::filesystem::exists(meta_path)) {
        std::ifstream in(meta_path);
        json meta = json::parse(in);
        c.model_tag = parse_model_tag(meta.value("model_tag", "external"));
        c.k = std::max(c.k, meta.value("K", c.k));
        c.seed = meta.value("seed", std::uint64_t{0});
        c.meta = meta.value("params", json::object());
    }
    c.validate();
    return c;
}

}  // namespace clustval
