#include <benchmark/benchmark.h>

#include "clustval/autometrics.hpp"
#include "clustval/gmm.hpp"
#include "clustval/random.hpp"
#include "clustval/stats.hpp"

using namespace clustval;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(n, d);
    for (auto& v : x.data()) v = rng.normal();
    return x;
}

std::vector<int> random_labels(std::size_t n, int k, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(rng.index(static_cast<std::size_t>(k)));
    return labels;
}

std::vector<std::vector<std::string>> random_docs(std::size_t n, std::size_t vocab, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<std::string>> docs(n);
    for (auto& d : docs)
        for (std::size_t i = 0, len = 5 + rng.index(15); i < len; ++i) d.push_back("w" + std::to_string(rng.index(vocab)));
    return docs;
}

}  // namespace

static void BM_SilhouetteCosine(benchmark::State& state) {
    auto n = static_cast<std::size_t>(state.range(0));
    auto x = random_matrix(n, 384, 1);
    auto labels = random_labels(n, 10, 2);
    for (auto _ : state) benchmark::DoNotOptimize(silhouette(x, labels, 10, DistanceMetric::cosine, 1).mean);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SilhouetteCosine)->Arg(1000)->Arg(10000);

static void BM_SilhouetteEuclidean(benchmark::State& state) {
    auto n = static_cast<std::size_t>(state.range(0));
    auto x = random_matrix(n, 64, 1);
    auto labels = random_labels(n, 10, 2);
    for (auto _ : state) benchmark::DoNotOptimize(silhouette(x, labels, 10, DistanceMetric::euclidean, 1).mean);
}
BENCHMARK(BM_SilhouetteEuclidean)->Arg(500)->Arg(2000);

static void BM_GmmEStep(benchmark::State& state) {
    auto n = static_cast<std::size_t>(state.range(0));
    auto x = random_matrix(n, 384, 3);
    GmmConfig cfg;
    cfg.max_iter = 2;
    cfg.threads = 1;
    auto model = fit_gmm(random_matrix(2000, 384, 4), 10, cfg, 5);
    for (auto _ : state) benchmark::DoNotOptimize(responsibilities(model, x)(0, 0));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_GmmEStep)->Arg(1000)->Arg(10000);

static void BM_Jsd(benchmark::State& state) {
    auto docs = random_docs(static_cast<std::size_t>(state.range(0)), 5000, 6);
    std::vector<std::string> a, b;
    for (std::size_t i = 0; i < docs.size(); ++i)
        for (const auto& t : docs[i]) (i % 2 ? a : b).push_back(t);
    for (auto _ : state) benchmark::DoNotOptimize(jsd(a, b));
}
BENCHMARK(BM_Jsd)->Arg(1000)->Arg(20000);

static void BM_CoherenceCv(benchmark::State& state) {
    auto docs = random_docs(static_cast<std::size_t>(state.range(0)), 300, 7);
    auto td = token_docs(docs);
    std::vector<std::string> top;
    for (int i = 0; i < 10; ++i) top.push_back("w" + std::to_string(i));
    for (auto _ : state) benchmark::DoNotOptimize(coherence_cv(top, td));
}
BENCHMARK(BM_CoherenceCv)->Arg(1000)->Arg(20000);

static void BM_Ami(benchmark::State& state) {
    auto n = static_cast<std::size_t>(state.range(0));
    auto a = random_labels(n, 10, 8), b = random_labels(n, 10, 9);
    for (auto _ : state) benchmark::DoNotOptimize(ami(a, b));
}
BENCHMARK(BM_Ami)->Arg(38639);
BENCHMARK_MAIN();
