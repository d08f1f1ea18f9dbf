#include <doctest.h>

#include <cmath>

#include "clustval/error.hpp"
#include "clustval/partition.hpp"
#include "clustval/random.hpp"
#include "clustval/stats.hpp"
#include "support.hpp"

using namespace clustval;
using testsupport::fixtures;

namespace {

Matrix grid_from(const nlohmann::json& rows) {
    Matrix g(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = rows[i][j].get<double>();
    return g;
}

std::vector<double> as_doubles(const nlohmann::json& j) { return j.get<std::vector<double>>(); }

}  // namespace

TEST_CASE("Likert encoding") {
    CHECK(encode_likert("Strongly Agree", Question::coh_bios) == 5);
    CHECK(encode_likert("strongly disagree", Question::coh_match) == 1);
    CHECK(encode_likert("Not at all Confident", Question::confidence) == 1);
    CHECK(encode_likert("Very Confident", Question::confidence) == 5);
    CHECK(encode_likert("3", Question::confidence) == 3);
    CHECK_THROWS_AS(encode_likert("Very Confident", Question::coh_bios), Error);
    CHECK_THROWS_AS(encode_likert("6", Question::confidence), Error);
    for (auto q : kQuestions)
        for (int v = 1; v <= 5; ++v) CHECK(encode_likert(likert_label(v, q), q) == v);
    CHECK(parse_question(to_string(Question::coh_match)) == Question::coh_match);
    CHECK(is_none_name("None"));
    CHECK(is_none_name(" none. "));
    CHECK_FALSE(is_none_name("None of them"));
}

TEST_CASE("responses CSV, the None override and the grid") {
    testsupport::TempDir dir;
    testsupport::write_text(dir / "r.csv", std::string(kResponsesHeader) +
                                               "\nr1,k1,None,4,Agree,Disagree,Neutral\n"
                                               "r1,k2,Dog people,Very Confident,5,4,3\n"
                                               "r2,k1,\"Fans, mostly\",2,1,1,1\n"
                                               "r2,k2,Dogs,3,3,3,3\n");
    auto rs = load_responses(dir / "r.csv");
    REQUIRE(rs.rows.size() == 4);
    CHECK(rs.find("r1", "k1")->value(Question::confidence) == 1);
    CHECK(rs.find("r1", "k1")->value(Question::coh_top_words) == 4);
    CHECK(rs.find("r1", "k2")->value(Question::confidence) == 5);
    CHECK(rs.find("r2", "k1")->name == "Fans, mostly");
    CHECK(load_responses(dir / "r.csv", false).find("r1", "k1")->value(Question::confidence) == 4);
    CHECK(rs.reviewers() == std::vector<std::string>{"r1", "r2"});

    auto g = rs.grid(Question::confidence);
    CHECK(g.rows() == 2);
    CHECK(g.cols() == 2);
    CHECK(g(0, 0) == 1);
    CHECK(g(0, 1) == 2);

    save_responses(rs, dir / "out.csv");
    auto back = load_responses(dir / "out.csv");
    CHECK(back.rows.size() == 4);
    CHECK(back.find("r2", "k1")->name == "Fans, mostly");

    auto ns = names_from_ratings(rs);
    CHECK(ns.n_reviewers == 2);
    CHECK(ns.names.at("k1") == std::vector<std::string>{"None", "Fans, mostly"});

    RatingSet dup = rs;
    dup.rows.push_back(dup.rows[0]);
    CHECK_THROWS_AS(dup.validate(), Error);
    RatingSet gap = rs;
    gap.rows.pop_back();
    CHECK_THROWS_AS(gap.grid(Question::confidence), Error);
}

TEST_CASE("average ranks and Spearman") {
    std::vector<double> x{10, 20, 20, 40};
    CHECK(average_ranks(x) == std::vector<double>{1, 2.5, 2.5, 4});

    std::vector<double> a{1, 2, 3, 4, 5}, up{2, 4, 8, 16, 32}, down{5, 4, 3, 2, 1};
    CHECK(*spearman(a, up).rho == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(*spearman(a, down).rho == doctest::Approx(-1.0).epsilon(1e-15));

    for (const char* name : {"spearman_tie", "spearman_likert"}) {
        const auto& f = fixtures()[name];
        auto fx = as_doubles(f["x"]), fy = as_doubles(f["y"]);
        CHECK(std::abs(*spearman(fx, fy).rho - f["rho"].get<double>()) < 1e-12);
    }

    std::vector<double> flat{3, 3, 3};
    auto undefined = spearman(flat, std::vector<double>{1, 2, 3});
    CHECK_FALSE(undefined.rho.has_value());
    CHECK_FALSE(undefined.reason.empty());
    CHECK_THROWS_AS(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);
    CHECK_THROWS_AS(spearman(a, std::vector<double>{1, 2, 3}), Error);
}

TEST_CASE("reviewer-metric correlations cover every combination") {
    Rng rng(12);
    RatingSet rs;
    MetricTable mt;
    const std::size_t n_r = 5, n_c = 12;
    for (std::size_t c = 0; c < n_c; ++c) {
        std::string key = "c" + std::to_string(c);
        for (auto m : kMetricNames) mt[key][std::string(m)] = rng.uniform();
        for (std::size_t r = 0; r < n_r; ++r) {
            Rating row{"r" + std::to_string(r), key, "name", {}};
            for (auto& v : row.values) v = 1 + static_cast<int>(rng.index(5));
            rs.rows.push_back(row);
        }
    }
    mt["c0"]["cv"] = std::nullopt;
    auto one = reviewer_metric_correlations(rs, mt, kMetricNames, 1);
    auto many = reviewer_metric_correlations(rs, mt, kMetricNames, 4);
    CHECK(one.size() == n_r * 4 * 6);
    REQUIRE(many.size() == one.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].reviewer_id == many[i].reviewer_id);
        CHECK(one[i].result.rho == many[i].result.rho);
        CHECK(one[i].n == (one[i].metric == "cv" ? n_c - 1 : n_c));
    }
    // Entry order is reviewer, question, metric.
    CHECK(one[0].reviewer_id == "r0");
    CHECK(one[0].metric == "keywords");
    CHECK(one[6].question == Question::coh_top_words);
    CHECK(to_json(one).size() == one.size());

    std::vector<double> x, y;
    for (std::size_t c = 0; c < n_c; ++c) {
        std::string key = "c" + std::to_string(c);
        x.push_back(rs.find("r2", key)->value(Question::coh_bios));
        y.push_back(*mt[key]["umass"]);
    }
    for (const auto& e : one)
        if (e.reviewer_id == "r2" && e.question == Question::coh_bios && e.metric == "umass")
            CHECK(*e.result.rho == *spearman(x, y).rho);
}

TEST_CASE("AMI matches scikit-learn") {
    for (const auto& c : fixtures()["ami_cases"]) {
        auto a = c["a"].get<std::vector<int>>(), b = c["b"].get<std::vector<int>>();
        CHECK(std::abs(ami(a, b) - c["ami"].get<double>()) < 1e-10);
        CHECK(ami(a, b) == doctest::Approx(ami(b, a)).epsilon(1e-14));
    }
}

TEST_CASE("AMI properties") {
    std::vector<int> a{0, 0, 1, 1, 2, 2}, relabeled{5, 5, 3, 3, 9, 9}, one(6, 0);
    CHECK(ami(a, a) == doctest::Approx(1.0));
    CHECK(ami(a, relabeled) == doctest::Approx(1.0));
    CHECK(ami(one, one) == 1.0);
    CHECK(mutual_information(a, a) == doctest::Approx(entropy(a)));
    CHECK(entropy(one) == 0.0);

    Rng rng(5);
    double sum = 0;
    for (int t = 0; t < 50; ++t) {
        std::vector<int> x(1000), y(1000);
        for (auto& v : x) v = static_cast<int>(rng.index(10));
        for (auto& v : y) v = static_cast<int>(rng.index(10));
        sum += ami(x, y);
    }
    CHECK(std::abs(sum / 50) < 0.02);

    Clustering p, q;
    p.ids = {"a", "b", "c", "d"};
    p.labels = {0, 0, 1, 1};
    p.k = 2;
    q.ids = {"d", "c", "b", "a"};
    q.labels = {1, 1, 0, 0};
    q.k = 2;
    CHECK(ami(p, q) == doctest::Approx(1.0));
    q.ids[0] = "z";
    CHECK_THROWS_AS(ami(p, q), Error);
}

TEST_CASE("pairwise AMI over 50 clusterings") {
    std::vector<std::string> ids;
    for (int i = 0; i < 200; ++i) ids.push_back("i" + std::to_string(i));
    std::vector<Clustering> cs;
    for (int s = 0; s < 50; ++s) cs.push_back(random_partition(ids, 5, s));
    auto one = pairwise_ami(cs, 1);
    auto many = pairwise_ami(cs, 4);
    CHECK(one.pairs.size() == 1225);
    CHECK(one.values == many.values);
    CHECK(one.pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});
    CHECK(one.values[3] == ami(cs[0], cs[4]));
    CHECK(std::abs(one.mean) < 0.05);
}

TEST_CASE("ICC(2,k) against the worked example and a Likert grid") {
    for (const char* name : {"icc_shrout_fleiss", "icc_likert_40x39"}) {
        const auto& f = fixtures()[name];
        auto r = icc2k(grid_from(f["grid"]));
        CHECK(std::abs(r.icc - f["icc2k"].get<double>()) < 1e-6);
        CHECK(r.f_value == doctest::Approx(f["f"].get<double>()).epsilon(1e-10));
        CHECK(r.df1 == f["df1"].get<std::size_t>());
        CHECK(r.df2 == f["df2"].get<std::size_t>());
        CHECK(*r.ci_low == doctest::Approx(f["ci_low"].get<double>()).epsilon(1e-6));
        CHECK(*r.ci_high == doctest::Approx(f["ci_high"].get<double>()).epsilon(1e-6));
        CHECK(r.ssr == doctest::Approx(f["ssr"].get<double>()).epsilon(1e-12));
        CHECK(std::abs(r.sst - (r.ssr + r.ssc + r.sse)) < 1e-9);
    }
    CHECK(std::abs(icc2k(grid_from(fixtures()["icc_shrout_fleiss"]["grid"])).icc - 0.62) < 0.005);
}

TEST_CASE("ICC properties") {
    Matrix agree(5, 3);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 3; ++j) agree(i, j) = static_cast<double>(i + 1);
    CHECK(icc2k(agree).icc == doctest::Approx(1.0));

    Matrix flat(4, 3, 2.0);
    auto d = icc2k(flat);
    CHECK(d.degenerate);
    CHECK(d.icc == 1.0);

    Rng rng(8);
    Matrix g(10, 4), shifted(10, 4);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            g(i, j) = 1 + static_cast<double>(rng.index(5));
            shifted(i, j) = g(i, j) + 2;
        }
    auto a = icc2k(g), b = icc2k(shifted);
    CHECK(a.icc == doctest::Approx(b.icc).epsilon(1e-12));
    CHECK(std::abs(a.sst - (a.ssr + a.ssc + a.sse)) < 1e-9);
    CHECK_THROWS_AS(icc2k(Matrix(1, 3, 1.0)), Error);
    CHECK_THROWS_AS(icc2k(Matrix(3, 1, 1.0)), Error);
}

TEST_CASE("F distribution helpers") {
    CHECK(incomplete_beta(1, 1, 0.3) == doctest::Approx(0.3));
    CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
    // scipy.stats.f.ppf(0.975, 5, 15)
    CHECK(f_quantile(0.975, 5, 15) == doctest::Approx(3.576415349279062).epsilon(1e-10));
    for (double p : {0.05, 0.5, 0.9, 0.975}) CHECK(f_cdf(f_quantile(p, 7, 40), 7, 40) == doctest::Approx(p).epsilon(1e-10));
}

TEST_CASE("clusters without a metric row drop out of the correlation") {
    RatingSet rs;
    MetricTable mt;
    for (int c = 0; c < 5; ++c) {
        std::string key = "c" + std::to_string(c);
        rs.rows.push_back({"r", key, "n", {c + 1, c + 1, c + 1, c + 1}});
        if (c != 2) mt[key]["cv"] = c;
    }
    std::array<std::string_view, 1> names{"cv"};
    auto out = reviewer_metric_correlations(rs, mt, names);
    REQUIRE(out.size() == 4);
    CHECK(out[0].n == 4);
    CHECK(*out[0].result.rho == doctest::Approx(1.0));
}
