#include <doctest.h>

#include <cmath>
#include <set>

#include "clustval/clustering.hpp"
#include "clustval/error.hpp"
#include "clustval/partition.hpp"
#include "support.hpp"

using namespace clustval;
using testsupport::TempDir;

namespace {

std::vector<std::string> make_ids(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("id" + std::to_string(i));
    return ids;
}

Clustering manual(const Corpus& c, std::vector<int> labels, int k) {
    Clustering cl;
    cl.ids = c.ids();
    cl.labels = std::move(labels);
    cl.k = k;
    return cl;
}

}  // namespace

TEST_CASE("random_partition ranges and determinism") {
    auto ids = make_ids(10);
    auto a = random_partition(ids, 10, 3);
    for (int l : a.labels) CHECK((l >= 0 && l < 10));
    auto b = random_partition(ids, 10, 3);
    CHECK(a.labels == b.labels);
    CHECK(a.model_tag == ModelTag::random);
    CHECK(a.seed == 3);
}

TEST_CASE("random_partition sizes stay within the binomial bound") {
    const std::size_t n = 38639;
    auto c = random_partition(make_ids(n), 10, 2024);
    double sigma = std::sqrt(n * 0.1 * 0.9);
    for (auto s : c.cluster_sizes()) CHECK(std::abs(static_cast<double>(s) - n / 10.0) < 5 * sigma);
}

TEST_CASE("top_frequent_words counts and breaks ties lexicographically") {
    auto c = Corpus::from_texts({{"1", "maga maga usa"}, {"2", "maga"}, {"3", "wife mom"}, {"4", "mom wife"}},
                                TokenizerConfig::analysis());
    auto cl = manual(c, {0, 0, 1, 1}, 2);
    CHECK(top_frequent_words(c, cl, 0) == std::vector<std::string>{"maga", "usa"});
    CHECK(top_frequent_words(c, cl, 1) == std::vector<std::string>{"mom", "wife"});
    CHECK(top_frequent_words(c, cl, 1, 1) == std::vector<std::string>{"mom"});
}

TEST_CASE("top_frequent_words removes stopwords from the counted tokens") {
    auto c = Corpus::from_texts({{"1", "just the best"}}, TokenizerConfig::minimal());
    auto cl = manual(c, {0}, 1);
    CHECK(top_frequent_words(c, cl, 0, 10, TokenizerConfig::analysis()) == std::vector<std::string>{"best"});
    CHECK(top_frequent_words(c, cl, 0, 10, TokenizerConfig::minimal()).size() == 3);
}

TEST_CASE("sample_bios") {
    std::vector<std::pair<std::string, std::string>> recs;
    for (int i = 0; i < 12; ++i) recs.emplace_back(std::to_string(i), "bio number " + std::to_string(i));
    auto c = Corpus::from_texts(recs, TokenizerConfig::analysis());
    std::vector<int> labels(12, 1);
    for (int i = 0; i < 5; ++i) labels[i] = 0;
    auto cl = manual(c, labels, 2);
    CHECK(sample_bios(c, cl, 0, 20, 1).size() == 5);
    auto a = sample_bios(c, cl, 1, 4, 9);
    CHECK(a == sample_bios(c, cl, 1, 4, 9));
    CHECK(a.size() == 4);
    for (const auto& bio : a) {
        int idx = std::stoi(bio.substr(bio.rfind(' ') + 1));
        CHECK(labels[idx] == 1);
    }
}

TEST_CASE("review packet is blinded and complete") {
    auto pc = testsupport::planted_corpus(200, 4, 1);
    std::vector<Clustering> cls;
    std::vector<std::string> names{"gmm", "lda", "random", "external"};
    for (std::size_t m = 0; m < 4; ++m) cls.push_back(random_partition(pc.corpus.ids(), 10, m + 1));
    std::vector<PacketModel> pm;
    for (std::size_t m = 0; m < 4; ++m) pm.push_back({names[m], &pc.corpus, &cls[m], std::nullopt});
    auto p = make_review_packet(pm, 77);
    CHECK(p.samples.size() == 40);

    std::set<std::string> keys;
    for (const auto& s : p.samples) {
        keys.insert(s.cluster_key);
        CHECK(s.top_words.size() <= 10);
        CHECK(s.sample_bios.size() <= 20);
    }
    CHECK(keys.size() == 40);

    auto pub = packet_to_json(p).dump();
    for (const auto& n : names) CHECK(pub.find("\"" + n + "\"") == std::string::npos);
    CHECK(pub.find("model") == std::string::npos);
    CHECK(pub.find("\"cluster\"") == std::string::npos);

    auto km = p.key_map();
    CHECK(km.size() == 40);
    for (const auto& s : p.samples) CHECK(km.at(s.cluster_key) == s.source);

    SUBCASE("save and load") {
        TempDir dir;
        save_review_packet(p, dir / "packet.json", dir / "key_map.json");
        auto back = load_review_packet(dir / "packet.json", dir / "key_map.json");
        REQUIRE(back.samples.size() == 40);
        CHECK(back.packet_id == p.packet_id);
        for (std::size_t i = 0; i < 40; ++i) {
            CHECK(back.samples[i].cluster_key == p.samples[i].cluster_key);
            CHECK(back.samples[i].source == p.samples[i].source);
            CHECK(back.samples[i].sample_bios == p.samples[i].sample_bios);
        }
        CHECK(load_key_map(dir / "key_map.json") == km);
    }
    SUBCASE("same seed, same packet") {
        auto q = make_review_packet(pm, 77);
        CHECK(packet_to_json(q) == packet_to_json(p));
    }
}

TEST_CASE("one model with K=3 gives three samples; empty clusters are skipped") {
    auto c = Corpus::from_texts({{"1", "alpha"}, {"2", "beta"}, {"3", "gamma"}, {"4", "delta"}}, TokenizerConfig::analysis());
    auto cl = manual(c, {0, 1, 2, 2}, 3);
    auto p = make_review_packet({{"m", &c, &cl, std::nullopt}}, 1);
    CHECK(p.samples.size() == 3);
    auto sparse = manual(c, {0, 0, 2, 2}, 3);
    auto q = make_review_packet({{"m", &c, &sparse, std::nullopt}}, 1);
    CHECK(q.samples.size() == 2);
    CHECK(q.skipped == std::vector<std::string>{"m/1"});
}

TEST_CASE("clustering CSV round trip and validation") {
    TempDir dir;
    Clustering c;
    c.ids = {"a", "b", "c"};
    c.labels = {1, 0, 1};
    c.k = 2;
    c.model_tag = ModelTag::gmm;
    c.seed = 5;
    save_clustering(c, dir / "c.csv");
    auto back = load_clustering(dir / "c.csv");
    CHECK(back.ids == c.ids);
    CHECK(back.labels == c.labels);
    CHECK(back.k == 2);
    CHECK(back.model_tag == ModelTag::gmm);
    CHECK(back.seed == 5);
    CHECK(back.labels_for({"c", "a", "b"}) == std::vector<int>{1, 1, 0});

    Clustering bad = c;
    bad.labels = {0, 2, 1};
    CHECK_THROWS_AS(bad.validate(), Error);
    bad.labels = {0, 1};
    CHECK_THROWS_AS(bad.validate(), Error);
}
