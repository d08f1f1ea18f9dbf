#include "clustval/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "clustval/csv.hpp"
#include "clustval/error.hpp"
#include "parallel.hpp"

namespace clustval {

using json = nlohmann::json;

namespace {

constexpr std::array<std::string_view, 5> kConfidenceLabels{"not at all confident", "not confident", "neutral",
                                                             "confident", "very confident"};
constexpr std::array<std::string_view, 5> kAgreementLabels{"strongly disagree", "disagree", "neutral", "agree",
                                                            "strongly agree"};
constexpr std::array<std::string_view, 5> kConfidenceDisplay{"Not at all Confident", "Not Confident", "Neutral",
                                                              "Confident", "Very Confident"};
constexpr std::array<std::string_view, 5> kAgreementDisplay{"Strongly Disagree", "Disagree", "Neutral", "Agree",
                                                             "Strongly Agree"};

std::string fold(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

}  // namespace

std::string to_string(Question q) {
    switch (q) {
        case Question::confidence: return "confidence";
        case Question::coh_top_words: return "coh_top_words";
        case Question::coh_bios: return "coh_bios";
        case Question::coh_match: return "coh_match";
    }
    return "?";
}

Question parse_question(std::string_view name) {
    for (auto q : kQuestions)
        if (to_string(q) == name) return q;
    throw Error("unknown question: " + std::string(name));
}

int encode_likert(std::string_view label, Question q) {
    std::string s = fold(label);
    if (s.size() == 1 && s[0] >= '1' && s[0] <= '5') return s[0] - '0';
    const auto& labels = q == Question::confidence ? kConfidenceLabels : kAgreementLabels;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (s == labels[i]) return static_cast<int>(i) + 1;
    throw Error("unknown Likert label for " + to_string(q) + ": \"" + std::string(label) + "\"");
}

std::string likert_label(int value, Question q) {
    if (value < 1 || value > 5) throw Error("Likert value out of range: " + std::to_string(value));
    const auto& labels = q == Question::confidence ? kConfidenceDisplay : kAgreementDisplay;
    return std::string(labels[static_cast<std::size_t>(value - 1)]);
}

bool is_none_name(std::string_view name) {
    auto tokens = tokenize(name, TokenizerConfig::minimal());
    return tokens.size() == 1 && tokens[0] == "none";
}

std::vector<std::string> RatingSet::reviewers() const {
    std::set<std::string> s;
    for (const auto& r : rows) s.insert(r.reviewer_id);
    return {s.begin(), s.end()};
}

std::vector<std::string> RatingSet::cluster_keys() const {
    std::set<std::string> s;
    for (const auto& r : rows) s.insert(r.cluster_key);
    return {s.begin(), s.end()};
}

const Rating* RatingSet::find(std::string_view reviewer, std::string_view cluster) const {
    for (const auto& r : rows)
        if (r.reviewer_id == reviewer && r.cluster_key == cluster) return &r;
    return nullptr;
}

void RatingSet::validate() const {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : rows) {
        if (!seen.emplace(r.reviewer_id, r.cluster_key).second)
            throw Error("duplicate response for reviewer " + r.reviewer_id + ", cluster " + r.cluster_key);
        for (int v : r.values)
            if (v < 1 || v > 5) throw Error("Likert value out of range for reviewer " + r.reviewer_id);
    }
}

Matrix RatingSet::grid(Question q) const {
    auto revs = reviewers();
    auto keys = cluster_keys();
    std::unordered_map<std::string, std::size_t> ri, ki;
    for (std::size_t i = 0; i < revs.size(); ++i) ri[revs[i]] = i;
    for (std::size_t i = 0; i < keys.size(); ++i) ki[keys[i]] = i;
    Matrix g(keys.size(), revs.size(), std::numeric_limits<double>::quiet_NaN());
    for (const auto& r : rows) g(ki[r.cluster_key], ri[r.reviewer_id]) = r.value(q);
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j)
            if (std::isnan(g(i, j)))
                throw Error("incomplete rating grid: reviewer " + revs[j] + " did not rate cluster " + keys[i]);
    return g;
}

RatingSet load_responses(const std::filesystem::path& path, bool none_override) {
    auto records = csv::read_file(path);
    if (records.empty()) throw Error("responses file is empty: " + path.string());
    const auto& header = records.front().fields;
    auto col = [&](std::string_view name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError("responses header lacks column " + std::string(name), 1);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t c_rev = col("reviewer_id"), c_key = col("cluster_key"), c_name = col("name");
    std::array<std::size_t, 4> c_q{};
    for (auto q : kQuestions) c_q[static_cast<std::size_t>(q)] = col(to_string(q));

    RatingSet set;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
        if (rec.fields.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields", rec.line);
        Rating r;
        r.reviewer_id = rec.fields[c_rev];
        r.cluster_key = rec.fields[c_key];
        r.name = rec.fields[c_name];
        if (r.reviewer_id.empty() || r.cluster_key.empty())
            throw ParseError("reviewer_id and cluster_key are required", rec.line);
        for (auto q : kQuestions) {
            try {
                r.values[static_cast<std::size_t>(q)] = encode_likert(rec.fields[c_q[static_cast<std::size_t>(q)]], q);
            } catch (const Error& e) {
                throw ParseError(e.what(), rec.line);
            }
        }
        if (none_override && is_none_name(r.name)) r.values[0] = 1;
        set.rows.push_back(std::move(r));
    }
    set.validate();
    return set;
}

void save_responses(const RatingSet& ratings, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << kResponsesHeader << '\n';
    for (const auto& r : ratings.rows) {
        std::vector<std::string> row{r.reviewer_id, r.cluster_key, r.name};
        for (int v : r.values) row.push_back(std::to_string(v));
        csv::write_row(out, row);
    }
}

NameSet names_from_ratings(const RatingSet& ratings, std::string source) {
    NameSet s;
    s.source = std::move(source);
    auto revs = ratings.reviewers();
    s.n_reviewers = revs.size();
    std::map<std::pair<std::string, std::string>, const Rating*> by_pair;
    for (const auto& r : ratings.rows) by_pair[{r.cluster_key, r.reviewer_id}] = &r;
    for (const auto& key : ratings.cluster_keys()) {
        auto& list = s.names[key];
        for (const auto& rev : revs) {
            auto it = by_pair.find({key, rev});
            list.push_back(it == by_pair.end() ? std::string{} : it->second->name);
        }
    }
    return s;
}

// ---------------------------------------------------------------------------

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error("spearman inputs differ in length");
    if (x.size() < 3) throw Error("spearman needs at least three pairs");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error("spearman inputs must be finite");
    auto constant = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [&](double e) { return e == v[0]; });
    };
    if (constant(x)) return {std::nullopt, "first input is constant"};
    if (constant(y)) return {std::nullopt, "second input is constant"};
    auto rx = average_ranks(x), ry = average_ranks(y);
    const auto n = static_cast<long double>(rx.size());
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        long double dx = rx[i] - mx, dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    double rho = static_cast<double>(sxy / std::sqrt(sxx * syy));
    return {std::clamp(rho, -1.0, 1.0), {}};
}

std::vector<CorrelationEntry> reviewer_metric_correlations(const RatingSet& ratings, const MetricTable& metrics,
                                                           std::span<const std::string_view> metric_names,
                                                           std::size_t threads) {
    ratings.validate();
    const auto reviewers = ratings.reviewers();
    std::vector<std::vector<CorrelationEntry>> per_reviewer(reviewers.size());
    detail::for_each_block(reviewers.size(), threads, [&](std::size_t i) {
        const auto& rev = reviewers[i];
        std::vector<const Rating*> mine;
        for (const auto& r : ratings.rows)
            if (r.reviewer_id == rev) mine.push_back(&r);
        std::sort(mine.begin(), mine.end(),
                  [](const Rating* a, const Rating* b) { return a->cluster_key < b->cluster_key; });
        auto& out = per_reviewer[i];
        for (auto q : kQuestions) {
            for (auto metric : metric_names) {
                std::vector<double> xs, ys;
                for (const auto* r : mine) {
                    auto row_it = metrics.find(r->cluster_key);
                    if (row_it == metrics.end()) continue;
                    const auto& row = row_it->second;
                    auto it = row.find(std::string(metric));
                    if (it == row.end() || !it->second || !std::isfinite(*it->second)) continue;
                    xs.push_back(r->value(q));
                    ys.push_back(*it->second);
                }
                CorrelationEntry e{rev, q, std::string(metric), xs.size(), {}};
                if (xs.size() < 3)
                    e.result = {std::nullopt, "fewer than three clusters with this metric"};
                else
                    e.result = spearman(xs, ys);
                out.push_back(std::move(e));
            }
        }
    });
    std::vector<CorrelationEntry> out;
    for (auto& v : per_reviewer)
        for (auto& e : v) out.push_back(std::move(e));
    return out;
}

json to_json(const std::vector<CorrelationEntry>& entries) {
    json arr = json::array();
    for (const auto& e : entries) {
        json row{{"reviewer_id", e.reviewer_id},
                 {"question", to_string(e.question)},
                 {"metric", e.metric},
                 {"n", e.n},
                 {"rho", e.result.rho ? json(*e.result.rho) : json(nullptr)}};
        if (!e.result.rho) row["reason"] = e.result.reason;
        arr.push_back(std::move(row));
    }
    return arr;
}

// ---------------------------------------------------------------------------

namespace {

struct Contingency {
    std::vector<std::size_t> a_sizes, b_sizes;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> cells;
    std::size_t n = 0;
};

Contingency contingency(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw Error("partitions differ in length");
    auto dense = [](std::span<const int> v) {
        std::map<int, std::size_t> ids;
        for (int x : v) ids.emplace(x, 0);
        std::size_t next = 0;
        for (auto& [k, i] : ids) i = next++;
        std::vector<std::size_t> out;
        out.reserve(v.size());
        for (int x : v) out.push_back(ids[x]);
        return std::make_pair(out, next);
    };
    auto [da, ka] = dense(a);
    auto [db, kb] = dense(b);
    Contingency c;
    c.n = a.size();
    c.a_sizes.assign(ka, 0);
    c.b_sizes.assign(kb, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++c.a_sizes[da[i]];
        ++c.b_sizes[db[i]];
        ++c.cells[{da[i], db[i]}];
    }
    return c;
}

double entropy_of(const std::vector<std::size_t>& sizes, std::size_t n) {
    long double h = 0.0L;
    for (auto s : sizes) {
        if (!s) continue;
        long double p = static_cast<long double>(s) / static_cast<long double>(n);
        h -= p * std::log(p);
    }
    return static_cast<double>(h);
}

double mi_of(const Contingency& c) {
    long double mi = 0.0L;
    const long double n = static_cast<long double>(c.n);
    for (const auto& [ij, nij] : c.cells) {
        long double v = static_cast<long double>(nij);
        mi += v / n * std::log(v * n / (static_cast<long double>(c.a_sizes[ij.first]) * c.b_sizes[ij.second]));
    }
    return std::max(0.0, static_cast<double>(mi));
}

double emi_of(const Contingency& c) {
    const auto n = static_cast<long long>(c.n);
    const long double nl = static_cast<long double>(n);
    // log(x!) for x = 0..n, summed directly (lgamma is not thread-safe).
    std::vector<long double> lf(static_cast<std::size_t>(n) + 1, 0.0L);
    for (long long x = 1; x <= n; ++x)
        lf[static_cast<std::size_t>(x)] = lf[static_cast<std::size_t>(x - 1)] + std::log(static_cast<long double>(x));
    auto f = [&](long long x) { return lf[static_cast<std::size_t>(x)]; };
    long double emi = 0.0L;
    for (auto ai_s : c.a_sizes) {
        const auto ai = static_cast<long long>(ai_s);
        for (auto bj_s : c.b_sizes) {
            const auto bj = static_cast<long long>(bj_s);
            const long long lo = std::max<long long>(1, ai + bj - n);
            const long long hi = std::min(ai, bj);
            const long double base = f(ai) + f(bj) + f(n - ai) + f(n - bj) - f(n);
            for (long long nij = lo; nij <= hi; ++nij) {
                long double term = static_cast<long double>(nij) / nl *
                                   std::log(nl * nij / (static_cast<long double>(ai) * bj));
                long double gln = base - f(nij) - f(ai - nij) - f(bj - nij) - f(n - ai - bj + nij);
                emi += term * std::exp(gln);
            }
        }
    }
    return static_cast<double>(emi);
}

}  // namespace

double entropy(std::span<const int> labels) {
    if (labels.empty()) return 0.0;
    auto c = contingency(labels, labels);
    return entropy_of(c.a_sizes, c.n);
}

double mutual_information(std::span<const int> a, std::span<const int> b) { return mi_of(contingency(a, b)); }

double expected_mutual_information(std::span<const int> a, std::span<const int> b) {
    return emi_of(contingency(a, b));
}

double ami(std::span<const int> a, std::span<const int> b) {
    auto c = contingency(a, b);
    if (c.n == 0) throw Error("AMI of empty partitions");
    const std::size_t ka = c.a_sizes.size(), kb = c.b_sizes.size();
    if (ka == kb && (ka == 1 || ka == c.n)) return 1.0;
    double mi = mi_of(c);
    double emi = emi_of(c);
    double normalizer = (entropy_of(c.a_sizes, c.n) + entropy_of(c.b_sizes, c.n)) / 2;
    double denom = normalizer - emi;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    denom = denom < 0 ? std::min(denom, -eps) : std::max(denom, eps);
    return (mi - emi) / denom;
}

double ami(const Clustering& a, const Clustering& b) {
    a.validate();
    b.validate();
    auto lb = b.labels_for(a.ids);
    return ami(std::span<const int>(a.labels), std::span<const int>(lb));
}

PairwiseAmi pairwise_ami(const std::vector<Clustering>& clusterings, std::size_t threads) {
    if (clusterings.size() < 2) throw Error("pairwise AMI needs at least two clusterings");
    std::vector<std::vector<int>> aligned;
    aligned.reserve(clusterings.size());
    for (const auto& c : clusterings) {
        c.validate();
        aligned.push_back(c.labels_for(clusterings.front().ids));
    }
    PairwiseAmi r;
    for (std::size_t i = 0; i < aligned.size(); ++i)
        for (std::size_t j = i + 1; j < aligned.size(); ++j) r.pairs.emplace_back(i, j);
    r.values.resize(r.pairs.size());
    detail::for_each_block(r.pairs.size(), threads, [&](std::size_t p) {
        auto [i, j] = r.pairs[p];
        r.values[p] = ami(std::span<const int>(aligned[i]), std::span<const int>(aligned[j]));
    });
    long double sum = 0.0L;
    for (double v : r.values) sum += v;
    long double mean = sum / static_cast<long double>(r.values.size());
    long double ss = 0.0L;
    for (double v : r.values) ss += (v - mean) * (v - mean);
    r.mean = static_cast<double>(mean);
    r.sd = static_cast<double>(std::sqrt(ss / static_cast<long double>(r.values.size())));
    return r;
}

// ---------------------------------------------------------------------------

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_cf(double a, double b, double x) {
    constexpr int max_iter = 10000;
    constexpr double eps = 1e-16, tiny = 1e-300;
    const double qab = a + b, qap = a + 1, qam = a - 1;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw Error("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0) || !(b > 0)) throw Error("incomplete beta needs a, b > 0");
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1) / (a + b + 2)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1 - x) / b;
}

double f_cdf(double x, double d1, double d2) {
    if (x <= 0) return 0.0;
    return incomplete_beta(d1 / 2, d2 / 2, d1 * x / (d1 * x + d2));
}

double f_quantile(double p, double d1, double d2) {
    if (!(p > 0) || !(p < 1)) throw Error("F quantile needs 0 < p < 1");
    // Solve I_z(d1/2, d2/2) = p for z in (0, 1), then map back to x.
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 0; ++i) {
        double mid = lo + (hi - lo) / 2;
        if (mid == lo || mid == hi) break;
        if (incomplete_beta(d1 / 2, d2 / 2, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    double z = lo + (hi - lo) / 2;
    return d2 * z / (d1 * (1 - z));
}

IccResult icc2k(const Matrix& grid) {
    const std::size_t n = grid.rows(), k = grid.cols();
    if (n < 2 || k < 2) throw Error("ICC needs at least two subjects and two raters");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (!std::isfinite(grid(i, j))) throw Error("ICC grid is incomplete");

    const long double nl = static_cast<long double>(n), kl = static_cast<long double>(k);
    std::vector<long double> row_mean(n, 0.0L), col_mean(k, 0.0L);
    long double gm = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            row_mean[i] += grid(i, j);
            col_mean[j] += grid(i, j);
            gm += grid(i, j);
        }
    for (auto& v : row_mean) v /= kl;
    for (auto& v : col_mean) v /= nl;
    gm /= nl * kl;

    long double ssr = 0, ssc = 0, sse = 0, sst = 0;
    for (std::size_t i = 0; i < n; ++i) ssr += (row_mean[i] - gm) * (row_mean[i] - gm);
    ssr *= kl;
    for (std::size_t j = 0; j < k; ++j) ssc += (col_mean[j] - gm) * (col_mean[j] - gm);
    ssc *= nl;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            long double dev = grid(i, j) - gm;
            long double res = grid(i, j) - row_mean[i] - col_mean[j] + gm;
            sst += dev * dev;
            sse += res * res;
        }

    IccResult r;
    r.df1 = n - 1;
    r.df2 = (n - 1) * (k - 1);
    r.ssr = static_cast<double>(ssr);
    r.ssc = static_cast<double>(ssc);
    r.sse = static_cast<double>(sse);
    r.sst = static_cast<double>(sst);
    const long double msr = ssr / (nl - 1), msc = ssc / (kl - 1), mse = sse / ((nl - 1) * (kl - 1));
    r.msr = static_cast<double>(msr);
    r.msc = static_cast<double>(msc);
    r.mse = static_cast<double>(mse);

    // Tolerance relative to the grid scale, since MSE is a sum of squares.
    const long double scale = std::max(1.0L, sst);
    if (sst <= 1e-24L * scale || (mse <= 1e-24L * scale && msc <= 1e-24L * scale)) {
        r.icc = 1.0;
        r.degenerate = true;
        r.f_value = std::numeric_limits<double>::infinity();
        return r;
    }
    r.icc = static_cast<double>((msr - mse) / (msr + (msc - mse) / nl));
    r.f_value = mse > 0 ? static_cast<double>(msr / mse) : std::numeric_limits<double>::infinity();
    if (!(mse > 0)) return r;

    const double nd = static_cast<double>(n), kd = static_cast<double>(k);
    const double MSR = r.msr, MSC = r.msc, MSE = r.mse;
    const double icc1 = (MSR - MSE) / (MSR + (kd - 1) * MSE + kd * (MSC - MSE) / nd);
    const double fj = MSC / MSE;
    const double a = kd * icc1 * fj + nd * (1 + (kd - 1) * icc1) - kd * icc1;
    const double vn = (kd - 1) * (nd - 1) * a * a;
    const double b = nd * (1 + (kd - 1) * icc1) - kd * icc1;
    const double vd = (nd - 1) * kd * kd * icc1 * icc1 * fj * fj + b * b;
    const double v = vn / vd;
    if (!(v > 0) || !std::isfinite(v)) return r;
    const double f_up = f_quantile(0.975, nd - 1, v);
    const double f_lo = f_quantile(0.975, v, nd - 1);
    const double denom = kd * MSC + (kd * nd - kd - nd) * MSE;
    const double l1 = nd * (MSR - f_up * MSE) / (f_up * denom + nd * MSR);
    const double u1 = nd * (f_lo * MSR - MSE) / (denom + nd * f_lo * MSR);
    r.ci_low = l1 * kd / (1 + l1 * (kd - 1));
    r.ci_high = u1 * kd / (1 + u1 * (kd - 1));
    return r;
}

json to_json(const IccResult& r) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j{{"icc", r.icc},     {"f_value", num(r.f_value)}, {"df1", r.df1},     {"df2", r.df2},
           {"ssr", r.ssr},     {"ssc", r.ssc},              {"sse", r.sse},     {"sst", r.sst},
           {"msr", r.msr},     {"msc", r.msc},              {"mse", r.mse},     {"degenerate", r.degenerate},
           {"ci_low", r.ci_low ? json(*r.ci_low) : json(nullptr)},
           {"ci_high", r.ci_high ? json(*r.ci_high) : json(nullptr)}};
    return j;
}

}  // namespace clustval
