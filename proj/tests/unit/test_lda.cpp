#include <doctest.h>

#include <numeric>
#include <set>

#include "clustval/error.hpp"
#include "clustval/lda.hpp"
#include "clustval/random.hpp"
#include "support.hpp"

using namespace clustval;

namespace {

Corpus two_sublanguages(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<std::string, std::string>> recs;
    const char* pets[] = {"cat", "dog"};
    const char* money[] = {"stock", "bond"};
    for (std::size_t i = 0; i < n; ++i) {
        std::string text;
        for (int w = 0; w < 8; ++w) {
            if (w) text += ' ';
            text += (i % 2 ? money : pets)[rng.index(2)];
        }
        recs.emplace_back("d" + std::to_string(i), text);
    }
    return Corpus::from_texts(recs, TokenizerConfig::minimal());
}

LdaConfig quick() {
    LdaConfig c;
    c.sweeps = 200;
    c.burn_in = 100;
    c.sample_lag = 10;
    return c;
}

}  // namespace

TEST_CASE("two disjoint sublanguages are separated") {
    auto c = two_sublanguages(200, 1);
    auto m = fit_lda(c, 2, quick(), 3);
    std::set<std::string> pets{"cat", "dog"}, money{"stock", "bond"};
    for (int t = 0; t < 2; ++t) {
        auto top = lda_top_words(m, t, 2);
        std::set<std::string> s(top.begin(), top.end());
        CHECK((s == pets || s == money));
    }
    auto cl = lda_assign(m);
    CHECK(cl.size() == c.size());
    // Accuracy up to label swap.
    std::size_t agree = 0;
    for (std::size_t i = 0; i < cl.size(); ++i) agree += (cl.labels[i] == cl.labels[0]) == (i % 2 == 0);
    CHECK(static_cast<double>(agree) / cl.size() >= 0.95);
}

TEST_CASE("single-word corpus puts all topic mass on that word") {
    auto c = Corpus::from_texts({{"a", "solo solo"}, {"b", "solo"}}, TokenizerConfig::minimal());
    auto m = fit_lda(c, 2, quick(), 1);
    for (int t = 0; t < 2; ++t) CHECK(m.phi(t, 0) == doctest::Approx(1.0));
}

TEST_CASE("phi rows sum to one and doc_topic rows sum to one") {
    auto pc = testsupport::planted_corpus(120, 3, 5, 0.5);
    auto m = fit_lda(pc.corpus, 3, quick(), 9);
    for (int t = 0; t < 3; ++t) {
        auto row = m.phi.row(t);
        CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (std::size_t d = 0; d < m.doc_topic.rows(); ++d) {
        auto row = m.doc_topic.row(d);
        CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("top words truncate and break ties lexicographically") {
    LdaModel m;
    m.k = 1;
    m.vocab = {"alpha", "mid", "zeta"};
    m.phi = Matrix(1, 3);
    m.phi(0, 0) = 0.4;
    m.phi(0, 1) = 0.2;
    m.phi(0, 2) = 0.4;
    CHECK(lda_top_words(m, 0, 10) == std::vector<std::string>{"alpha", "zeta", "mid"});
    CHECK(lda_top_words(m, 0, 1) == std::vector<std::string>{"alpha"});
}

TEST_CASE("uniform doc_topic rows go to topic 0") {
    LdaModel m;
    m.k = 3;
    m.doc_ids = {"x"};
    m.doc_topic = Matrix(1, 3, 1.0 / 3);
    auto c = lda_assign(m);
    CHECK(c.labels == std::vector<int>{0});
}

TEST_CASE("seed determinism and count bookkeeping") {
    auto pc = testsupport::planted_corpus(150, 4, 2, 0.5);
    auto cfg = quick();
    cfg.verify_counts = true;
    auto a = fit_lda(pc.corpus, 4, cfg, 17);
    auto b = fit_lda(pc.corpus, 4, cfg, 17);
    nlohmann::json ja = a, jb = b;
    CHECK(ja.dump() == jb.dump());
    CHECK(a.alpha == doctest::Approx(50.0 / 4));
}

TEST_CASE("shuffling document order only moves document indices") {
    auto c = two_sublanguages(100, 8);
    std::vector<Document> docs = c.documents();
    std::vector<Document> rev(docs.rbegin(), docs.rend());
    auto a = lda_assign(fit_lda(c, 2, quick(), 4));
    auto b = lda_assign(fit_lda(Corpus::from_documents(rev), 2, quick(), 4));
    // Compare partitions, not labels: the sampler draws in a different
    // document order, so only the recovered structure must agree.
    auto lb = b.labels_for(a.ids);
    std::size_t same_pairs = 0, pairs = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            ++pairs;
            same_pairs += (a.labels[i] == a.labels[j]) == (lb[i] == lb[j]);
        }
    CHECK(static_cast<double>(same_pairs) / pairs > 0.95);
}

TEST_CASE("invalid inputs") {
    auto c = two_sublanguages(10, 1);
    CHECK_THROWS_AS(fit_lda(c, 0, quick(), 1), Error);
    auto bad = quick();
    bad.burn_in = bad.sweeps;
    CHECK_THROWS_AS(fit_lda(c, 2, bad, 1), Error);
}
