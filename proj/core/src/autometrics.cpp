#include "clustval/autometrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "clustval/error.hpp"
#include "parallel.hpp"

namespace clustval {

using json = nlohmann::json;

namespace {

constexpr std::size_t kBlockRows = 64;

void check_labels(const Matrix& x, const std::vector<int>& labels, int k) {
    if (labels.size() != x.rows()) throw Error("labels and embedding rows differ in length");
    for (int l : labels)
        if (l < 0 || l >= k) throw Error("label out of range: " + std::to_string(l));
}

std::vector<std::size_t> sizes_of(const std::vector<int>& labels, int k) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

double finish_point(double a, double b, std::size_t own_size) {
    if (own_size <= 1) return 0.0;
    double m = std::max(a, b);
    if (m <= 0.0) return 0.0;
    return std::clamp((b - a) / m, -1.0, 1.0);
}

// Mean distance from every point to every cluster, cosine case. For unit
// vectors u and v, 1 - cos(u, v) = 1 - u.v, so the mean over a cluster is
// 1 - u.S / |C| with S the sum of the cluster's unit vectors.
void cosine_cluster_means(const Matrix& x, const std::vector<int>& labels, int k,
                          const std::vector<std::size_t>& sizes, std::size_t threads, Matrix& sums_out) {
    const std::size_t n = x.rows(), d = x.cols();
    Matrix unit(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        double nr = norm(x.row(i));
        if (nr == 0.0) throw Error("zero vector at row " + std::to_string(i));
        for (std::size_t j = 0; j < d; ++j) unit(i, j) = x(i, j) / nr;
    }
    std::vector<long double> acc(static_cast<std::size_t>(k) * d, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        auto* s = &acc[static_cast<std::size_t>(labels[i]) * d];
        for (std::size_t j = 0; j < d; ++j) s[j] += unit(i, j);
    }
    Matrix csum(static_cast<std::size_t>(k), d);
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c)
        for (std::size_t j = 0; j < d; ++j) csum(c, j) = static_cast<double>(acc[c * d + j]);

    sums_out = Matrix(n, static_cast<std::size_t>(k));
    std::size_t blocks = (n + kBlockRows - 1) / kBlockRows;
    detail::for_each_block(blocks, threads, [&](std::size_t b) {
        std::size_t lo = b * kBlockRows, hi = std::min(n, lo + kBlockRows);
        for (std::size_t i = lo; i < hi; ++i) {
            auto u = unit.row(i);
            long double self = 0.0L;
            for (std::size_t j = 0; j < d; ++j) self += static_cast<long double>(u[j]) * u[j];
            for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
                std::size_t m = sizes[c];
                bool own = static_cast<int>(c) == labels[i];
                std::size_t count = own ? m - 1 : m;
                if (count == 0) {
                    sums_out(i, c) = 0.0;
                    continue;
                }
                long double sim = 0.0L;
                for (std::size_t j = 0; j < d; ++j) sim += static_cast<long double>(u[j]) * csum(c, j);
                if (own) sim -= self;
                // Sum of (1 - u.v) over the counted members.
                long double total = static_cast<long double>(count) - sim;
                sums_out(i, c) = static_cast<double>(std::max(0.0L, total) / static_cast<long double>(count));
            }
        }
    });
}

void euclidean_cluster_means(const Matrix& x, const std::vector<int>& labels, int k,
                             const std::vector<std::size_t>& sizes, std::size_t threads, Matrix& means_out) {
    const std::size_t n = x.rows();
    means_out = Matrix(n, static_cast<std::size_t>(k));
    std::size_t blocks = (n + kBlockRows - 1) / kBlockRows;
    detail::for_each_block(blocks, threads, [&](std::size_t b) {
        std::size_t lo = b * kBlockRows, hi = std::min(n, lo + kBlockRows);
        std::vector<long double> acc(static_cast<std::size_t>(k));
        for (std::size_t i = lo; i < hi; ++i) {
            std::fill(acc.begin(), acc.end(), 0.0L);
            auto u = x.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                acc[static_cast<std::size_t>(labels[j])] += euclidean_distance(u, x.row(j));
            }
            for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
                std::size_t count = static_cast<int>(c) == labels[i] ? sizes[c] - 1 : sizes[c];
                means_out(i, c) = count ? static_cast<double>(acc[c] / static_cast<long double>(count)) : 0.0;
            }
        }
    });
}

}  // namespace

SilhouetteReport silhouette(const Matrix& x, const std::vector<int>& labels, int k, DistanceMetric metric,
                            std::size_t threads) {
    check_labels(x, labels, k);
    auto sizes = sizes_of(labels, k);
    if (std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }) < 2)
        throw Error("silhouette needs at least two non-empty clusters");

    Matrix means;
    if (metric == DistanceMetric::cosine)
        cosine_cluster_means(x, labels, k, sizes, threads, means);
    else
        euclidean_cluster_means(x, labels, k, sizes, threads, means);

    const std::size_t n = x.rows();
    SilhouetteReport r;
    r.per_point.resize(n);
    r.a_values.resize(n);
    r.b_values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto own = static_cast<std::size_t>(labels[i]);
        double a = sizes[own] > 1 ? means(i, own) : 0.0;
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c)
            if (c != own && sizes[c] > 0) b = std::min(b, means(i, c));
        r.a_values[i] = a;
        r.b_values[i] = b;
        r.per_point[i] = finish_point(a, b, sizes[own]);
    }
    std::vector<long double> csum(static_cast<std::size_t>(k), 0.0L);
    long double total = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        csum[static_cast<std::size_t>(labels[i])] += r.per_point[i];
        total += r.per_point[i];
    }
    r.per_cluster_mean.resize(static_cast<std::size_t>(k));
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c)
        r.per_cluster_mean[c] = sizes[c] ? static_cast<double>(csum[c] / static_cast<long double>(sizes[c]))
                                         : std::numeric_limits<double>::quiet_NaN();
    r.mean = n ? static_cast<double>(total / static_cast<long double>(n)) : 0.0;
    return r;
}

SilhouetteReport silhouette(const EmbeddingMatrix& x, const Clustering& clustering, DistanceMetric metric,
                            std::size_t threads) {
    clustering.validate();
    auto labels = clustering.labels_for(x.ids());
    auto r = silhouette(x.vectors(), labels, clustering.k, metric, threads);
    r.ids = x.ids();
    return r;
}

namespace {

Matrix centroids(const EmbeddingMatrix& x, const std::vector<int>& labels, int k, bool allow_empty) {
    const std::size_t d = x.dim();
    std::vector<long double> acc(static_cast<std::size_t>(k) * d, 0.0L);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto c = static_cast<std::size_t>(labels[i]);
        ++sizes[c];
        auto row = x.row(i);
        for (std::size_t j = 0; j < d; ++j) acc[c * d + j] += row[j];
    }
    Matrix out(static_cast<std::size_t>(k), d);
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
        if (!sizes[c]) {
            if (!allow_empty) throw Error("cluster " + std::to_string(c) + " is empty");
            continue;
        }
        for (std::size_t j = 0; j < d; ++j)
            out(c, j) = static_cast<double>(acc[c * d + j] / static_cast<long double>(sizes[c]));
    }
    return out;
}

}  // namespace

CentroidDistances centroid_distances(const EmbeddingMatrix& x, const Clustering& clustering, DistanceMetric metric) {
    clustering.validate();
    auto labels = clustering.labels_for(x.ids());
    const auto k = static_cast<std::size_t>(clustering.k);
    Matrix cent = centroids(x, labels, clustering.k, false);
    CentroidDistances out{Matrix(k, k), std::vector<double>(k, std::numeric_limits<double>::quiet_NaN())};
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            double dist = distance(metric, cent.row(a), cent.row(b));
            out.distances(a, b) = out.distances(b, a) = dist;
        }
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
            if (a != b && !(out.distances(a, b) >= out.min_distance[a])) out.min_distance[a] = out.distances(a, b);
    return out;
}

double empirical_mean_sd(const EmbeddingMatrix& x, const Clustering& clustering, int cluster) {
    clustering.validate();
    if (cluster < 0 || cluster >= clustering.k) throw Error("cluster out of range: " + std::to_string(cluster));
    auto labels = clustering.labels_for(x.ids());
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == cluster) rows.push_back(i);
    if (rows.size() < 2)
        throw Error("cluster " + std::to_string(cluster) + " has fewer than two members; mean SD undefined");
    const std::size_t d = x.dim();
    const auto m = static_cast<long double>(rows.size());
    long double total = 0.0L;
    for (std::size_t j = 0; j < d; ++j) {
        long double mean = 0.0L;
        for (auto i : rows) mean += x.row(i)[j];
        mean /= m;
        long double var = 0.0L;
        for (auto i : rows) {
            long double diff = x.row(i)[j] - mean;
            var += diff * diff;
        }
        total += std::sqrt(var / m);
    }
    return static_cast<double>(total / static_cast<long double>(d));
}

// ---------------------------------------------------------------------------

namespace {

void check_counts(double k_c, double n_c, double k_r, double n_r) {
    if (k_c < 0 || n_c < 0 || k_r < 0 || n_r < 0) throw Error("keyness counts must be non-negative");
    if (k_c > n_c || k_r > n_r) throw Error("keyness word count exceeds corpus size");
    if (n_c <= 0 || n_r <= 0) throw Error("keyness needs non-empty cluster and reference corpora");
}

long double g2_term(long double observed, long double expected) {
    return observed > 0 ? observed * std::log(observed / expected) : 0.0L;
}

}  // namespace

double log_likelihood_g2(double k_c, double n_c, double k_r, double n_r) {
    check_counts(k_c, n_c, k_r, n_r);
    const long double kc = k_c, nc = n_c, kr = k_r, nr = n_r;
    const long double n = nc + nr;
    const long double rate = (kc + kr) / n;
    long double g2 = g2_term(kc, nc * rate) + g2_term(nc - kc, nc * (1 - rate)) + g2_term(kr, nr * rate) +
                     g2_term(nr - kr, nr * (1 - rate));
    return static_cast<double>(std::max(0.0L, 2 * g2));
}

double log_bayes_factor_keyness(double k_c, double n_c, double k_r, double n_r) {
    double g2 = log_likelihood_g2(k_c, n_c, k_r, n_r);
    return (g2 - std::log(n_c + n_r)) / 2;
}

double bayes_factor_keyness(double k_c, double n_c, double k_r, double n_r) {
    return std::exp(log_bayes_factor_keyness(k_c, n_c, k_r, n_r));
}

KeynessReference parse_keyness_reference(std::string_view name) {
    if (name == "complement") return KeynessReference::complement;
    if (name == "whole") return KeynessReference::whole;
    throw Error("unknown keyness reference: " + std::string(name));
}

namespace {

struct ClusterCounts {
    std::vector<std::map<std::string, std::size_t>> per_cluster;
    std::vector<std::size_t> totals;
};

ClusterCounts count_cluster_tokens(const Corpus& corpus, const Clustering& clustering) {
    clustering.validate();
    auto labels = clustering.labels_for(corpus.ids());
    ClusterCounts cc;
    cc.per_cluster.resize(static_cast<std::size_t>(clustering.k));
    cc.totals.assign(static_cast<std::size_t>(clustering.k), 0);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        auto c = static_cast<std::size_t>(labels[i]);
        for (const auto& t : corpus[i].tokens) ++cc.per_cluster[c][t];
        cc.totals[c] += corpus[i].tokens.size();
    }
    return cc;
}

std::vector<Keyword> keywords_from_counts(const Corpus& corpus, const ClusterCounts& cc, int cluster,
                                          double threshold, KeynessReference reference) {
    auto c = static_cast<std::size_t>(cluster);
    const double n_c = static_cast<double>(cc.totals[c]);
    if (n_c == 0) throw Error("cluster " + std::to_string(cluster) + " has an empty corpus");
    const double n_all = static_cast<double>(corpus.n_tokens());
    const double n_r = reference == KeynessReference::complement ? n_all - n_c : n_all;
    if (n_r <= 0) throw Error("keyness reference corpus is empty");
    const double log_threshold = std::log(threshold);

    std::vector<Keyword> out;
    for (const auto& [word, count] : cc.per_cluster[c]) {
        const double k_c = static_cast<double>(count);
        const double total = static_cast<double>(corpus.vocab().at(word));
        const double k_r = reference == KeynessReference::complement ? total - k_c : total;
        const double f_c = k_c / n_c, f_r = k_r / n_r;
        if (!(f_c > f_r)) continue;
        double log_bf = log_bayes_factor_keyness(k_c, n_c, k_r, n_r);
        if (!(log_bf > log_threshold)) continue;
        out.push_back({word, std::exp(log_bf), log_bf, f_c, f_r});
    }
    std::sort(out.begin(), out.end(), [](const Keyword& a, const Keyword& b) {
        if (a.log_bayes_factor != b.log_bayes_factor) return a.log_bayes_factor > b.log_bayes_factor;
        return a.word < b.word;
    });
    return out;
}

}  // namespace

std::vector<Keyword> cluster_keywords(const Corpus& corpus, const Clustering& clustering, int cluster,
                                      double threshold, KeynessReference reference) {
    if (cluster < 0 || cluster >= clustering.k) throw Error("cluster out of range: " + std::to_string(cluster));
    return keywords_from_counts(corpus, count_cluster_tokens(corpus, clustering), cluster, threshold, reference);
}

KeywordReport keywords(const Corpus& corpus, const Clustering& clustering, double threshold,
                       KeynessReference reference) {
    auto cc = count_cluster_tokens(corpus, clustering);
    KeywordReport r;
    for (int c = 0; c < clustering.k; ++c) {
        r.per_cluster.push_back(keywords_from_counts(corpus, cc, c, threshold, reference));
        r.counts.push_back(r.per_cluster.back().size());
    }
    return r;
}

// ---------------------------------------------------------------------------

TokenDocs token_docs(const Corpus& corpus) {
    TokenDocs out;
    out.reserve(corpus.size());
    for (const auto& d : corpus.documents()) out.emplace_back(d.tokens);
    return out;
}

TokenDocs token_docs(const std::vector<std::vector<std::string>>& docs) {
    return TokenDocs(docs.begin(), docs.end());
}

namespace {

void check_top_words(const std::vector<std::string>& top_words) {
    if (top_words.size() < 2) throw Error("coherence needs at least two top words");
}

std::unordered_map<std::string_view, std::size_t> word_index(const std::vector<std::string>& top_words) {
    std::unordered_map<std::string_view, std::size_t> idx;
    for (std::size_t i = 0; i < top_words.size(); ++i) idx.emplace(top_words[i], i);
    return idx;
}

// Distinct top-word indices present in a token range.
void present_in(std::span<const std::string> tokens, const std::unordered_map<std::string_view, std::size_t>& idx,
                std::vector<char>& mask) {
    std::fill(mask.begin(), mask.end(), 0);
    for (const auto& t : tokens)
        if (auto it = idx.find(t); it != idx.end()) mask[it->second] = 1;
}

}  // namespace

double coherence_umass(const std::vector<std::string>& top_words, const TokenDocs& docs) {
    check_top_words(top_words);
    const std::size_t n = top_words.size();
    auto idx = word_index(top_words);
    std::vector<double> df(n, 0.0);
    Matrix co(n, n);
    std::vector<char> mask(n);
    for (const auto& doc : docs) {
        present_in(doc, idx, mask);
        for (std::size_t a = 0; a < n; ++a) {
            if (!mask[a]) continue;
            df[a] += 1;
            for (std::size_t b = 0; b < n; ++b)
                if (b != a && mask[b]) co(a, b) += 1;
        }
    }
    // Repeated top words share one index; look them up by word.
    auto slot = [&](std::size_t i) { return idx.at(top_words[i]); };
    long double total = 0.0L;
    std::size_t pairs = 0;
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            std::size_t a = slot(i), b = slot(j);
            double joint = a == b ? df[a] : co(a, b);
            total += std::log((joint + 1.0) / std::max(df[b], 1.0));
            ++pairs;
        }
    return static_cast<double>(total / static_cast<long double>(pairs));
}

double coherence_umass(const std::vector<std::string>& top_words, const Corpus& corpus) {
    return coherence_umass(top_words, token_docs(corpus));
}

double coherence_cv(const std::vector<std::string>& top_words, const TokenDocs& docs, std::size_t window) {
    check_top_words(top_words);
    if (window == 0) throw Error("C_V window must be positive");
    constexpr double eps = 1e-12;
    const std::size_t n = top_words.size();
    auto idx = word_index(top_words);
    std::vector<double> occ(n, 0.0);
    Matrix co(n, n);
    double n_windows = 0;
    std::vector<char> mask(n);

    auto count_window = [&](std::span<const std::string> w) {
        n_windows += 1;
        present_in(w, idx, mask);
        for (std::size_t a = 0; a < n; ++a) {
            if (!mask[a]) continue;
            occ[a] += 1;
            for (std::size_t b = a + 1; b < n; ++b)
                if (mask[b]) {
                    co(a, b) += 1;
                    co(b, a) += 1;
                }
        }
    };

    std::vector<std::size_t> hits;
    for (const auto& doc : docs) {
        hits.clear();
        for (std::size_t p = 0; p < doc.size(); ++p)
            if (idx.count(doc[p])) hits.push_back(p);
        // Documents without a top word still contribute their windows.
        if (hits.empty()) {
            n_windows += doc.size() <= window ? 1.0 : static_cast<double>(doc.size() - window + 1);
            continue;
        }
        if (doc.size() <= window) {
            count_window(doc);
            continue;
        }
        // Windows [s, s + window) for s = 0..len - window. Windows without a
        // top word only add to the window count.
        const std::size_t n_win = doc.size() - window + 1;
        std::size_t h = 0;
        for (std::size_t s = 0; s < n_win; ++s) {
            while (h < hits.size() && hits[h] < s) ++h;
            if (h < hits.size() && hits[h] < s + window)
                count_window(doc.subspan(s, window));
            else
                n_windows += 1;
        }
    }
    for (std::size_t a = 0; a < n; ++a) co(a, a) = occ[a];

    Matrix npmi(n, n);
    if (n_windows > 0) {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                // A word never seen in any window carries no association.
                if (occ[a] == 0 || occ[b] == 0) continue;
                double pab = co(a, b) / n_windows;
                double pa = occ[a] / n_windows, pb = occ[b] / n_windows;
                double lr = std::log((pab + eps) / (pa * pb));
                npmi(a, b) = lr / -std::log(pab + eps);
            }
    }
    auto slot = [&](std::size_t i) { return idx.at(top_words[i]); };
    std::vector<long double> topic(n, 0.0L);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) topic[j] += npmi(slot(i), slot(j));
    long double tnorm = 0.0L;
    for (auto v : topic) tnorm += v * v;
    tnorm = std::sqrt(tnorm);

    long double total = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        long double dotp = 0.0L, vnorm = 0.0L;
        for (std::size_t j = 0; j < n; ++j) {
            long double v = npmi(slot(i), slot(j));
            dotp += v * topic[j];
            vnorm += v * v;
        }
        vnorm = std::sqrt(vnorm);
        if (vnorm > 0 && tnorm > 0) total += dotp / (vnorm * tnorm);
    }
    return static_cast<double>(total / static_cast<long double>(n));
}

double coherence_cv(const std::vector<std::string>& top_words, const Corpus& corpus, std::size_t window) {
    return coherence_cv(top_words, token_docs(corpus), window);
}

// ---------------------------------------------------------------------------

WordDistribution word_distribution(std::span<const std::string> tokens) {
    if (tokens.empty()) throw Error("word distribution of an empty corpus");
    std::map<std::string, std::size_t> counts;
    for (const auto& t : tokens) ++counts[t];
    WordDistribution w;
    const auto total = static_cast<double>(tokens.size());
    for (const auto& [word, c] : counts) {
        w.support.push_back(word);
        w.probs.push_back(static_cast<double>(c) / total);
    }
    return w;
}

double jsd(const WordDistribution& p, const WordDistribution& q, double base) {
    if (p.support.empty() || q.support.empty()) throw Error("JSD of an empty corpus");
    if (!(base > 0) || base == 1) throw Error("invalid logarithm base");
    // Merge the two sorted supports.
    long double kl_p = 0.0L, kl_q = 0.0L;
    std::size_t i = 0, j = 0;
    while (i < p.support.size() || j < q.support.size()) {
        long double a = 0, b = 0;
        int cmp = i == p.support.size()   ? 1
                  : j == q.support.size() ? -1
                                          : p.support[i].compare(q.support[j]);
        if (cmp <= 0) a = p.probs[i++];
        if (cmp >= 0) b = q.probs[j++];
        long double m = (a + b) / 2;
        if (a > 0) kl_p += a * std::log(a / m);
        if (b > 0) kl_q += b * std::log(b / m);
    }
    long double v = (kl_p + kl_q) / 2 / std::log(static_cast<long double>(base));
    return static_cast<double>(std::max(0.0L, v));
}

double jsd(std::span<const std::string> a, std::span<const std::string> b, double base) {
    if (a.empty() || b.empty()) throw Error("JSD of an empty corpus");
    return jsd(word_distribution(a), word_distribution(b), base);
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<T>();
}

}  // namespace

json to_json(const ClusterMetrics& m) {
    return json{{"cluster", m.cluster},
                {"size", m.size},
                {"keywords", opt(m.keywords)},
                {"cv", opt(m.cv)},
                {"umass", opt(m.umass)},
                {"min_centroid_distance", opt(m.min_centroid_distance)},
                {"mean_silhouette", opt(m.mean_silhouette)},
                {"mean_sd", opt(m.mean_sd)},
                {"top_words", m.top_words}};
}

std::optional<double> metric_value(const ClusterMetrics& m, std::string_view name) {
    if (name == "keywords") return m.keywords ? std::optional<double>(static_cast<double>(*m.keywords)) : std::nullopt;
    if (name == "cv") return m.cv;
    if (name == "umass") return m.umass;
    if (name == "distance") return m.min_centroid_distance;
    if (name == "silhouette") return m.mean_silhouette;
    if (name == "mean_sd") return m.mean_sd;
    throw Error("unknown metric: " + std::string(name));
}

ClusterMetrics cluster_metrics_from_json(const json& j) {
    ClusterMetrics m;
    m.cluster = j.at("cluster").get<int>();
    m.size = j.value("size", std::size_t{0});
    m.keywords = opt_from<std::size_t>(j, "keywords");
    m.cv = opt_from<double>(j, "cv");
    m.umass = opt_from<double>(j, "umass");
    m.min_centroid_distance = opt_from<double>(j, "min_centroid_distance");
    m.mean_silhouette = opt_from<double>(j, "mean_silhouette");
    m.mean_sd = opt_from<double>(j, "mean_sd");
    if (j.contains("top_words")) m.top_words = j["top_words"].get<std::vector<std::string>>();
    return m;
}

std::vector<ClusterMetrics> compute_cluster_metrics(const Corpus& corpus, const Clustering& clustering,
                                                    const std::vector<std::vector<std::string>>& top_words,
                                                    const EmbeddingMatrix* embeddings,
                                                    const std::optional<std::vector<double>>& gmm_sigma,
                                                    const MetricOptions& options) {
    clustering.validate();
    const auto k = static_cast<std::size_t>(clustering.k);
    if (top_words.size() != k) throw Error("top_words must have one list per cluster");
    if (gmm_sigma && gmm_sigma->size() != k) throw Error("gmm_sigma must have one value per cluster");
    auto sizes = clustering.cluster_sizes();

    std::vector<ClusterMetrics> out(k);
    for (std::size_t c = 0; c < k; ++c) {
        out[c].cluster = static_cast<int>(c);
        out[c].size = sizes[c];
        out[c].top_words = top_words[c];
    }

    auto cc = count_cluster_tokens(corpus, clustering);
    auto docs = token_docs(corpus);
    for (std::size_t c = 0; c < k; ++c) {
        if (cc.totals[c] > 0 && cc.totals[c] < corpus.n_tokens())
            out[c].keywords = keywords_from_counts(corpus, cc, static_cast<int>(c), options.keyword_threshold,
                                                   options.reference)
                                  .size();
        if (top_words[c].size() >= 2) {
            out[c].umass = coherence_umass(top_words[c], docs);
            out[c].cv = coherence_cv(top_words[c], docs, options.cv_window);
        }
        if (gmm_sigma) out[c].mean_sd = (*gmm_sigma)[c];
    }

    if (embeddings) {
        auto aligned = embeddings->aligned_to(clustering.ids);
        std::size_t non_empty = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
        if (non_empty >= 2) {
            auto sil = silhouette(aligned, clustering, options.metric, options.threads);
            auto labels = clustering.labels_for(aligned.ids());
            Matrix cent = centroids(aligned, labels, clustering.k, true);
            for (std::size_t c = 0; c < k; ++c) {
                if (!sizes[c]) continue;
                out[c].mean_silhouette = sil.per_cluster_mean[c];
                std::optional<double> best;
                for (std::size_t o = 0; o < k; ++o) {
                    if (o == c || !sizes[o]) continue;
                    double dist = distance(options.metric, cent.row(c), cent.row(o));
                    if (!best || dist < *best) best = dist;
                }
                out[c].min_centroid_distance = best;
            }
        }
        if (!gmm_sigma)
            for (std::size_t c = 0; c < k; ++c)
                if (sizes[c] >= 2) out[c].mean_sd = empirical_mean_sd(aligned, clustering, static_cast<int>(c));
    }
    return out;
}

}  // namespace clustval
