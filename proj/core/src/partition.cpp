#include "clustval/partition.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include "clustval/error.hpp"
#include "clustval/random.hpp"

namespace clustval {

using json = nlohmann::json;

Clustering random_partition(const std::vector<std::string>& ids, int k, std::uint64_t seed) {
    if (ids.empty()) throw Error("random_partition: empty id list");
    if (k < 1) throw Error("random_partition: K must be at least 1");
    Rng rng(seed);
    Clustering c;
    c.ids = ids;
    c.k = k;
    c.model_tag = ModelTag::random;
    c.seed = seed;
    c.labels.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) c.labels.push_back(static_cast<int>(rng.index(static_cast<std::size_t>(k))));
    return c;
}

namespace {

std::vector<std::size_t> member_rows(const Corpus& corpus, const Clustering& clustering, int cluster) {
    if (cluster < 0 || cluster >= clustering.k) throw Error("cluster " + std::to_string(cluster) + " does not exist");
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < clustering.ids.size(); ++i) {
        if (clustering.labels[i] != cluster) continue;
        auto idx = corpus.index_of(clustering.ids[i]);
        if (!idx) throw Error("clustered id " + clustering.ids[i] + " is not in the corpus");
        rows.push_back(*idx);
    }
    if (rows.empty()) throw Error("cluster " + std::to_string(cluster) + " is empty");
    return rows;
}

}  // namespace

std::vector<std::string> top_frequent_words(const Corpus& corpus, const Clustering& clustering, int cluster,
                                            std::size_t n, const TokenizerConfig& config) {
    std::unordered_map<std::string, std::size_t> counts;
    for (std::size_t row : member_rows(corpus, clustering, cluster))
        for (auto& t : tokenize(corpus[row].raw_text, config)) ++counts[t];
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i) out.push_back(ranked[i].first);
    return out;
}

std::vector<std::string> sample_bios(const Corpus& corpus, const Clustering& clustering, int cluster,
                                     std::size_t n, std::uint64_t seed) {
    auto rows = member_rows(corpus, clustering, cluster);
    if (rows.size() > n) {
        // Partial Fisher-Yates: the first n slots are a uniform sample.
        Rng rng(seed);
        for (std::size_t i = 0; i < n; ++i) std::swap(rows[i], rows[i + rng.index(rows.size() - i)]);
        rows.resize(n);
    }
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(corpus[r].raw_text);
    return out;
}

std::map<std::string, SampleSource> ReviewPacket::key_map() const {
    std::map<std::string, SampleSource> out;
    for (const auto& s : samples) out.emplace(s.cluster_key, s.source);
    return out;
}

const ClusterSample* ReviewPacket::find(const std::string& key) const {
    for (const auto& s : samples)
        if (s.cluster_key == key) return &s;
    return nullptr;
}

namespace {

std::string hex_key(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "c%012llx", static_cast<unsigned long long>(v & 0xffffffffffffULL));
    return buf;
}

}  // namespace

ReviewPacket make_review_packet(const std::vector<PacketModel>& models, std::uint64_t seed,
                                const PacketOptions& options) {
    if (models.empty()) throw Error("make_review_packet: no clusterings given");
    ReviewPacket packet;
    Rng rng(seed);
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "p%016llx", static_cast<unsigned long long>(rng.next()));
        packet.packet_id = buf;
    }
    std::set<std::string> used;
    std::uint64_t stream = 0;
    for (const auto& m : models) {
        if (!m.corpus || !m.clustering) throw Error("packet model " + m.name + " lacks corpus or clustering");
        auto sizes = m.clustering->cluster_sizes();
        for (int c = 0; c < m.clustering->k; ++c) {
            ++stream;
            if (sizes[static_cast<std::size_t>(c)] == 0) {
                packet.skipped.push_back(m.name + "/" + std::to_string(c));
                continue;
            }
            ClusterSample s;
            do {
                s.cluster_key = hex_key(rng.next());
            } while (!used.insert(s.cluster_key).second);
            s.source = {m.name, c};
            s.sample_seed = derive_seed(seed, stream);
            if (m.top_words) {
                const auto& tw = m.top_words->at(static_cast<std::size_t>(c));
                s.top_words.assign(tw.begin(), tw.begin() + static_cast<long>(std::min(options.top_words, tw.size())));
            } else {
                s.top_words = top_frequent_words(*m.corpus, *m.clustering, c, options.top_words, options.tokenizer);
            }
            s.sample_bios = sample_bios(*m.corpus, *m.clustering, c, options.bios_per_cluster, s.sample_seed);
            packet.samples.push_back(std::move(s));
        }
    }
    rng.shuffle(packet.samples);
    return packet;
}

json packet_to_json(const ReviewPacket& packet) {
    json samples = json::array();
    for (const auto& s : packet.samples)
        samples.push_back({{"cluster_key", s.cluster_key}, {"top_words", s.top_words}, {"sample_bios", s.sample_bios}});
    return json{{"packet_id", packet.packet_id}, {"samples", samples}};
}

json key_map_to_json(const ReviewPacket& packet) {
    json out = json::object();
    for (const auto& s : packet.samples)
        out[s.cluster_key] = {{"model", s.source.model}, {"cluster", s.source.cluster}, {"sample_seed", s.sample_seed}};
    return out;
}

ReviewPacket packet_from_json(const json& j, const json* key_map) {
    ReviewPacket p;
    p.packet_id = j.at("packet_id").get<std::string>();
    std::set<std::string> keys;
    for (const auto& s : j.at("samples")) {
        ClusterSample cs;
        cs.cluster_key = s.at("cluster_key").get<std::string>();
        if (!keys.insert(cs.cluster_key).second) throw ParseError("duplicate cluster_key " + cs.cluster_key);
        cs.top_words = s.at("top_words").get<std::vector<std::string>>();
        cs.sample_bios = s.at("sample_bios").get<std::vector<std::string>>();
        if (key_map) {
            if (!key_map->contains(cs.cluster_key)) throw ParseError("key map lacks " + cs.cluster_key);
            const auto& src = (*key_map)[cs.cluster_key];
            cs.source = {src.at("model").get<std::string>(), src.at("cluster").get<int>()};
            cs.sample_seed = src.value("sample_seed", std::uint64_t{0});
        }
        p.samples.push_back(std::move(cs));
    }
    return p;
}

void save_review_packet(const ReviewPacket& packet, const std::filesystem::path& packet_path,
                        const std::filesystem::path& key_map_path) {
    auto write = [](const std::filesystem::path& path, const json& j) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path);
        out << j.dump(2) << '\n';
        if (!out) throw Error("cannot write " + path.string());
    };
    write(packet_path, packet_to_json(packet));
    write(key_map_path, key_map_to_json(packet));
}

ReviewPacket load_review_packet(const std::filesystem::path& packet_path,
                                const std::optional<std::filesystem::path>& key_map_path) {
    std::ifstream in(packet_path);
    if (!in) throw Error("cannot open packet " + packet_path.string());
    json j = json::parse(in);
    if (key_map_path) {
        std::ifstream km(*key_map_path);
        if (!km) throw Error("cannot open key map " + key_map_path->string());
        json k = json::parse(km);
        return packet_from_json(j, &k);
    }
    return packet_from_json(j);
}

std::map<std::string, SampleSource> load_key_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open key map " + path.string());
    json j = json::parse(in);
    std::map<std::string, SampleSource> out;
    for (auto it = j.begin(); it != j.end(); ++it)
        out[it.key()] = {it.value().at("model").get<std::string>(), it.value().at("cluster").get<int>()};
    return out;
}

}  // namespace clustval
