#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "clustval/error.hpp"
#include "clustval/gmm.hpp"
#include "clustval/random.hpp"
#include "support.hpp"

using namespace clustval;

namespace {

Matrix two_component(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        double mu = i % 2 ? 5.0 : -5.0;
        for (std::size_t j = 0; j < d; ++j) x(i, j) = mu + rng.normal();
    }
    return x;
}

GmmModel manual_model(std::vector<double> w, std::vector<std::vector<double>> mu, std::vector<std::vector<double>> var) {
    GmmModel m;
    m.k = static_cast<int>(w.size());
    m.weights = w;
    m.means = Matrix(mu.size(), mu[0].size());
    m.variances = Matrix(var.size(), var[0].size());
    for (std::size_t c = 0; c < mu.size(); ++c)
        for (std::size_t j = 0; j < mu[0].size(); ++j) {
            m.means(c, j) = mu[c][j];
            m.variances(c, j) = var[c][j];
        }
    return m;
}

}  // namespace

TEST_CASE("two well separated 1-d components are recovered") {
    auto x = two_component(2000, 1, 42);
    auto m = fit_gmm(x, 2, {}, 7);
    std::vector<double> mus{m.means(0, 0), m.means(1, 0)};
    std::sort(mus.begin(), mus.end());
    CHECK(std::abs(mus[0] + 5.0) < 0.1);
    CHECK(std::abs(mus[1] - 5.0) < 0.1);
    CHECK(std::abs(m.weights[0] - 0.5) < 0.05);
    CHECK(m.converged);
}

TEST_CASE("K=1 is the sample mean and variance") {
    auto x = two_component(301, 3, 5);
    auto m = fit_gmm(x, 1, {}, 1);
    for (std::size_t j = 0; j < 3; ++j) {
        long double s = 0, ss = 0;
        for (std::size_t i = 0; i < x.rows(); ++i) s += x(i, j);
        long double mean = s / x.rows();
        for (std::size_t i = 0; i < x.rows(); ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
        CHECK(m.means(0, j) == doctest::Approx(static_cast<double>(mean)).epsilon(1e-10));
        CHECK(m.variances(0, j) == doctest::Approx(static_cast<double>(ss / x.rows())).epsilon(1e-8));
    }
    CHECK(m.weights[0] == 1.0);
}

TEST_CASE("degenerate data keeps variances floored and does not crash") {
    Matrix x(50, 2, 3.0);
    auto m = fit_gmm(x, 2, {}, 3);
    for (double v : m.variances.data()) CHECK(v >= m.var_floor);
    CHECK(std::accumulate(m.weights.begin(), m.weights.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("EM log-likelihood never decreases") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        Matrix x(300, 4);
        for (auto& v : x.data()) v = rng.normal() + (rng.uniform() < 0.3 ? 4.0 : 0.0);
        GmmConfig cfg;
        cfg.rel_tol = 0;
        cfg.max_iter = 60;
        auto m = fit_gmm(x, 3, cfg, seed);
        for (std::size_t i = 1; i < m.log_likelihood_trace.size(); ++i)
            CHECK(m.log_likelihood_trace[i] >= m.log_likelihood_trace[i - 1] - 1e-9);
    }
}

TEST_CASE("responsibilities") {
    SUBCASE("point at a far-separated mean") {
        auto m = manual_model({0.5, 0.5}, {{0.0}, {100.0}}, {{1.0}, {1.0}});
        Matrix x(1, 1, 0.0);
        auto r = responsibilities(m, x);
        CHECK(r(0, 0) == doctest::Approx(1.0));
        CHECK(assign_labels(m, x)[0] == 0);
    }
    SUBCASE("identical components split evenly and tie to the lowest index") {
        auto m = manual_model({0.5, 0.5}, {{1.0}, {1.0}}, {{2.0}, {2.0}});
        Matrix x(1, 1, 0.3);
        auto r = responsibilities(m, x);
        CHECK(r(0, 0) == doctest::Approx(0.5));
        CHECK(r(0, 1) == doctest::Approx(0.5));
        CHECK(assign_labels(m, x)[0] == 0);
    }
    SUBCASE("random case against a direct density oracle") {
        Rng rng(9);
        auto m = manual_model({0.2, 0.3, 0.5}, {{0, 1}, {1, -1}, {2, 0.5}}, {{1, 0.5}, {2, 1}, {0.7, 1.3}});
        Matrix x(20, 2);
        for (auto& v : x.data()) v = rng.normal() * 2;
        auto r = responsibilities(m, x);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            long double dens[3], total = 0;
            for (int c = 0; c < 3; ++c) {
                long double p = m.weights[c];
                for (int j = 0; j < 2; ++j) {
                    long double v = m.variances(c, j), d = x(i, j) - m.means(c, j);
                    p *= std::exp(-d * d / (2 * v)) / std::sqrt(2 * std::numbers::pi_v<long double> * v);
                }
                dens[c] = p;
                total += p;
            }
            double row_sum = 0;
            int best = 0;
            for (int c = 0; c < 3; ++c) {
                CHECK(r(i, c) == doctest::Approx(static_cast<double>(dens[c] / total)).epsilon(1e-12));
                row_sum += r(i, c);
                if (dens[c] > dens[best]) best = c;
            }
            CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(assign_labels(m, x)[i] == best);
        }
    }
}

TEST_CASE("log_likelihood") {
    auto m = manual_model({1.0}, {{0.0}}, {{1.0}});
    Matrix x(1, 1, 0.0);
    CHECK(log_likelihood(m, x) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-15));

    auto y = two_component(100, 2, 3);
    auto fit = fit_gmm(y, 2, {}, 2);
    Matrix yy(200, 2);
    for (std::size_t i = 0; i < 200; ++i)
        for (std::size_t j = 0; j < 2; ++j) yy(i, j) = y(i % 100, j);
    CHECK(log_likelihood(fit, yy) == doctest::Approx(2 * log_likelihood(fit, y)).epsilon(1e-12));
}

TEST_CASE("cluster_sigma is the mean per-dimension standard deviation") {
    CHECK(cluster_sigma(manual_model({1.0}, {{0, 0}}, {{1, 1}}), 0) == 1.0);
    CHECK(cluster_sigma(manual_model({1.0}, {{0, 0}}, {{1, 4}}), 0) == 1.5);
}

TEST_CASE("same seed gives a bit-identical model, independent of thread count") {
    auto x = two_component(1500, 5, 77);
    GmmConfig one;
    one.threads = 1;
    GmmConfig many;
    many.threads = 4;
    auto a = fit_gmm(x, 3, one, 99);
    auto b = fit_gmm(x, 3, one, 99);
    auto c = fit_gmm(x, 3, many, 99);
    nlohmann::json ja = a, jb = b, jc = c;
    CHECK(ja.dump() == jb.dump());
    CHECK(ja.dump() == jc.dump());
}

TEST_CASE("permuting input rows permutes the assignments") {
    auto x = two_component(400, 3, 8);
    std::vector<std::size_t> perm(x.rows());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(4);
    rng.shuffle(perm);
    Matrix px(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) px(i, j) = x(perm[i], j);
    auto a = fit_gmm(x, 4, {}, 5);
    auto b = fit_gmm(px, 4, {}, 5);
    auto la = assign_labels(a, x), lb = assign_labels(b, px);
    for (std::size_t i = 0; i < x.rows(); ++i) CHECK(lb[i] == la[perm[i]]);
}

TEST_CASE("model JSON round trip and input validation") {
    auto x = two_component(100, 2, 1);
    auto m = fit_gmm(x, 2, {}, 1);
    nlohmann::json j = m;
    auto back = j.get<GmmModel>();
    CHECK(back.means == m.means);
    CHECK(back.variances == m.variances);
    CHECK(back.weights == m.weights);
    CHECK_THROWS_AS(fit_gmm(x, 0, {}, 1), Error);
    CHECK_THROWS_AS(fit_gmm(x, 101, {}, 1), Error);
    Matrix bad(3, 1, 0.0);
    bad(1, 0) = std::nan("");
    CHECK_THROWS_AS(fit_gmm(bad, 1, {}, 1), Error);
}

TEST_CASE("assign produces a clustering over the embedding ids") {
    Matrix v(4, 1);
    v(0, 0) = -5;
    v(1, 0) = 5;
    v(2, 0) = -5.1;
    v(3, 0) = 5.2;
    EmbeddingMatrix e({"a", "b", "c", "d"}, v);
    auto m = fit_gmm(e, 2, {}, 3);
    auto c = assign(m, e);
    CHECK(c.ids == e.ids());
    CHECK(c.model_tag == ModelTag::gmm);
    CHECK(c.labels[0] == c.labels[2]);
    CHECK(c.labels[1] == c.labels[3]);
    CHECK(c.labels[0] != c.labels[1]);
}
