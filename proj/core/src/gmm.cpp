#include "clustval/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "clustval/error.hpp"
#include "clustval/random.hpp"
#include "parallel.hpp"

namespace clustval {

using json = nlohmann::json;

namespace {

constexpr std::size_t kBlockRows = 512;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_dims(const GmmModel& model, const Matrix& x) {
    if (x.cols() != model.dim())
        throw Error("dimension mismatch: model has " + std::to_string(model.dim()) + ", data has " +
                    std::to_string(x.cols()));
}

/// Per-component quantities reused for every row.
struct Precomputed {
    std::vector<double> log_norm;  // log w_k - 0.5 sum_j log(2 pi var_kj)
    Matrix inv_var;

    explicit Precomputed(const GmmModel& m) : log_norm(m.k), inv_var(m.k, m.dim()) {
        for (int c = 0; c < m.k; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < m.dim(); ++j) {
                s += kLog2Pi + std::log(m.variances(c, j));
                inv_var(c, j) = 1.0 / m.variances(c, j);
            }
            log_norm[c] = (m.weights[c] > 0.0 ? std::log(m.weights[c]) : kNegInf) - 0.5 * s;
        }
    }
};

/// Writes log(w_k N(x; k)) into `out` and returns their log-sum-exp.
double joint_log_probs(const GmmModel& m, const Precomputed& pc, std::span<const double> x, std::span<double> out) {
    double best = kNegInf;
    for (int c = 0; c < m.k; ++c) {
        if (pc.log_norm[c] == kNegInf) {
            out[c] = kNegInf;
            continue;
        }
        auto mu = m.means.row(c);
        auto iv = pc.inv_var.row(c);
        double q = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            double d = x[j] - mu[j];
            q += d * d * iv[j];
        }
        out[c] = pc.log_norm[c] - 0.5 * q;
        best = std::max(best, out[c]);
    }
    if (best == kNegInf) return kNegInf;
    double s = 0.0;
    for (int c = 0; c < m.k; ++c) s += std::exp(out[c] - best);
    return best + std::log(s);
}

/// Rows of `x` visited in `order`; lets EM run in canonical order without
/// copying the data.
struct RowView {
    const Matrix& x;
    const std::vector<std::size_t>& order;
    std::span<const double> operator[](std::size_t i) const { return x.row(order[i]); }
    std::size_t size() const { return order.size(); }
};

std::vector<std::size_t> canonical_order(const Matrix& x) {
    std::vector<std::size_t> order(x.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto ra = x.row(a), rb = x.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    return order;
}

class EmRun {
public:
    EmRun(const RowView& rows, int k, const GmmConfig& config)
        : rows_(rows), k_(k), d_(rows.x.cols()), config_(config), resp_(rows.size(), static_cast<std::size_t>(k)),
          n_blocks_((rows.size() + kBlockRows - 1) / kBlockRows) {}

    GmmModel fit(std::uint64_t seed) {
        GmmModel m = initialize(seed);
        double ll = e_step(m);
        m.log_likelihood_trace.push_back(ll);
        for (int it = 1; it <= config_.max_iter; ++it) {
            m_step(m);
            double next = e_step(m);
            m.log_likelihood_trace.push_back(next);
            m.n_iterations = it;
            double gain = next - ll;
            ll = next;
            if (gain < config_.rel_tol * std::abs(m.log_likelihood_trace[m.log_likelihood_trace.size() - 2])) {
                m.converged = true;
                break;
            }
        }
        m.final_log_likelihood = ll;
        return m;
    }

private:
    const RowView& rows_;
    int k_;
    std::size_t d_;
    const GmmConfig& config_;
    Matrix resp_;
    std::size_t n_blocks_;

    std::pair<std::size_t, std::size_t> block_range(std::size_t b) const {
        std::size_t lo = b * kBlockRows;
        return {lo, std::min(rows_.size(), lo + kBlockRows)};
    }

    GmmModel initialize(std::uint64_t seed) {
        const std::size_t n = rows_.size();
        GmmModel m;
        m.k = k_;
        m.seed = seed;
        m.var_floor = config_.var_floor;
        m.weights.assign(k_, 1.0 / k_);
        m.means = Matrix(k_, d_);
        m.variances = Matrix(k_, d_);

        // k-means++ seeding.
        Rng rng(seed);
        std::vector<double> d2(n, std::numeric_limits<double>::infinity());
        std::size_t pick = rng.index(n);
        for (int c = 0; c < k_; ++c) {
            auto src = rows_[pick];
            std::copy(src.begin(), src.end(), m.means.row(c).begin());
            if (c + 1 == k_) break;
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                auto r = rows_[i];
                double s = 0.0;
                for (std::size_t j = 0; j < d_; ++j) {
                    double diff = r[j] - src[j];
                    s += diff * diff;
                }
                d2[i] = std::min(d2[i], s);
                total += d2[i];
            }
            if (total <= 0.0) {
                pick = rng.index(n);
                continue;
            }
            double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        }

        // Global per-dimension variance.
        std::vector<long double> mean(d_, 0.0L), sq(d_, 0.0L);
        for (std::size_t i = 0; i < n; ++i) {
            auto r = rows_[i];
            for (std::size_t j = 0; j < d_; ++j) mean[j] += r[j];
        }
        for (auto& v : mean) v /= static_cast<long double>(n);
        bool all_identical = true;
        for (std::size_t i = 0; i < n; ++i) {
            auto r = rows_[i];
            for (std::size_t j = 0; j < d_; ++j) {
                long double diff = r[j] - mean[j];
                sq[j] += diff * diff;
                if (r[j] != rows_[0][j]) all_identical = false;
            }
        }
        for (int c = 0; c < k_; ++c)
            for (std::size_t j = 0; j < d_; ++j)
                m.variances(c, j) = std::max(static_cast<double>(sq[j] / static_cast<long double>(n)), config_.var_floor);
        m.degenerate = all_identical && k_ > 1;
        return m;
    }

    double e_step(const GmmModel& m) {
        Precomputed pc(m);
        std::vector<long double> block_ll(n_blocks_, 0.0L);
        detail::for_each_block(n_blocks_, config_.threads, [&](std::size_t b) {
            auto [lo, hi] = block_range(b);
            long double acc = 0.0L;
            for (std::size_t i = lo; i < hi; ++i) {
                auto out = resp_.row(i);
                double lse = joint_log_probs(m, pc, rows_[i], out);
                for (auto& v : out) v = std::exp(v - lse);
                acc += lse;
            }
            block_ll[b] = acc;
        });
        long double total = 0.0L;
        for (auto v : block_ll) total += v;
        return static_cast<double>(total);
    }

    void m_step(GmmModel& m) {
        const std::size_t kk = static_cast<std::size_t>(k_);
        // Pass 1: N_k and sum_i r_ik x_i per block.
        std::vector<std::vector<long double>> nk(n_blocks_, std::vector<long double>(kk, 0.0L));
        std::vector<std::vector<long double>> sx(n_blocks_, std::vector<long double>(kk * d_, 0.0L));
        detail::for_each_block(n_blocks_, config_.threads, [&](std::size_t b) {
            auto [lo, hi] = block_range(b);
            auto& n_b = nk[b];
            auto& s_b = sx[b];
            for (std::size_t i = lo; i < hi; ++i) {
                auto r = rows_[i];
                auto w = resp_.row(i);
                for (std::size_t c = 0; c < kk; ++c) {
                    if (w[c] == 0.0) continue;
                    n_b[c] += w[c];
                    long double* dst = &s_b[c * d_];
                    for (std::size_t j = 0; j < d_; ++j) dst[j] += w[c] * r[j];
                }
            }
        });
        std::vector<long double> n_tot(kk, 0.0L);
        std::vector<long double> s_tot(kk * d_, 0.0L);
        for (std::size_t b = 0; b < n_blocks_; ++b) {
            for (std::size_t c = 0; c < kk; ++c) n_tot[c] += nk[b][c];
            for (std::size_t t = 0; t < kk * d_; ++t) s_tot[t] += sx[b][t];
        }
        long double n_sum = 0.0L;
        for (auto v : n_tot) n_sum += v;

        constexpr long double kEmpty = 1e-300L;
        for (std::size_t c = 0; c < kk; ++c) {
            m.weights[c] = static_cast<double>(n_tot[c] / n_sum);
            if (n_tot[c] <= kEmpty) continue;  // keep the old mean
            for (std::size_t j = 0; j < d_; ++j) m.means(c, j) = static_cast<double>(s_tot[c * d_ + j] / n_tot[c]);
        }

        // Pass 2: sum_i r_ik (x_i - mu_k)^2 per block.
        detail::for_each_block(n_blocks_, config_.threads, [&](std::size_t b) {
            auto [lo, hi] = block_range(b);
            auto& s_b = sx[b];
            std::fill(s_b.begin(), s_b.end(), 0.0L);
            for (std::size_t i = lo; i < hi; ++i) {
                auto r = rows_[i];
                auto w = resp_.row(i);
                for (std::size_t c = 0; c < kk; ++c) {
                    if (w[c] == 0.0) continue;
                    auto mu = m.means.row(c);
                    long double* dst = &s_b[c * d_];
                    for (std::size_t j = 0; j < d_; ++j) {
                        double diff = r[j] - mu[j];
                        dst[j] += w[c] * diff * diff;
                    }
                }
            }
        });
        std::fill(s_tot.begin(), s_tot.end(), 0.0L);
        for (std::size_t b = 0; b < n_blocks_; ++b)
            for (std::size_t t = 0; t < kk * d_; ++t) s_tot[t] += sx[b][t];
        for (std::size_t c = 0; c < kk; ++c) {
            for (std::size_t j = 0; j < d_; ++j) {
                double v = n_tot[c] <= kEmpty ? config_.var_floor : static_cast<double>(s_tot[c * d_ + j] / n_tot[c]);
                m.variances(c, j) = std::max(v, config_.var_floor);
            }
        }
    }
};

}  // namespace

void to_json(json& j, const GmmModel& m) {
    std::vector<std::vector<double>> means, vars;
    for (int c = 0; c < m.k; ++c) {
        auto mu = m.means.row(c);
        auto v = m.variances.row(c);
        means.emplace_back(mu.begin(), mu.end());
        vars.emplace_back(v.begin(), v.end());
    }
    j = json{{"k", m.k},
             {"seed", m.seed},
             {"weights", m.weights},
             {"means", means},
             {"variances", vars},
             {"var_floor", m.var_floor},
             {"final_log_likelihood", m.final_log_likelihood},
             {"n_iterations", m.n_iterations},
             {"converged", m.converged},
             {"degenerate", m.degenerate}};
}

void from_json(const json& j, GmmModel& m) {
    m.k = j.at("k").get<int>();
    m.seed = j.value("seed", std::uint64_t{0});
    m.weights = j.at("weights").get<std::vector<double>>();
    auto means = j.at("means").get<std::vector<std::vector<double>>>();
    auto vars = j.at("variances").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(means.size()) != m.k || static_cast<int>(vars.size()) != m.k ||
        static_cast<int>(m.weights.size()) != m.k)
        throw ParseError("GMM model arrays do not match k");
    m.means = Matrix();
    m.variances = Matrix();
    for (int c = 0; c < m.k; ++c) {
        if (means[c].size() != means[0].size() || vars[c].size() != means[0].size())
            throw ParseError("GMM model rows have inconsistent dimension");
        m.means.push_row(means[c]);
        m.variances.push_row(vars[c]);
    }
    m.var_floor = j.value("var_floor", 1e-6);
    m.final_log_likelihood = j.value("final_log_likelihood", 0.0);
    m.n_iterations = j.value("n_iterations", 0);
    m.converged = j.value("converged", false);
    m.degenerate = j.value("degenerate", false);
}

GmmModel fit_gmm(const Matrix& x, int k, const GmmConfig& config, std::uint64_t seed) {
    if (k < 1) throw Error("K must be at least 1");
    if (x.rows() < static_cast<std::size_t>(k))
        throw Error("K (" + std::to_string(k) + ") exceeds the number of points (" + std::to_string(x.rows()) + ")");
    if (x.cols() == 0) throw Error("data has zero dimensions");
    for (double v : x.data())
        if (!std::isfinite(v)) throw Error("non-finite value in GMM input");
    if (config.n_init < 1) throw Error("n_init must be at least 1");
    if (config.var_floor <= 0.0) throw Error("var_floor must be positive");

    auto order = canonical_order(x);
    RowView rows{x, order};
    EmRun run(rows, k, config);
    GmmModel best;
    for (int r = 0; r < config.n_init; ++r) {
        GmmModel m = run.fit(r == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(r)));
        if (r == 0 || m.final_log_likelihood > best.final_log_likelihood) best = std::move(m);
    }
    best.seed = seed;
    return best;
}

GmmModel fit_gmm(const EmbeddingMatrix& x, int k, const GmmConfig& config, std::uint64_t seed) {
    return fit_gmm(x.vectors(), k, config, seed);
}

Matrix responsibilities(const GmmModel& model, const Matrix& x) {
    check_dims(model, x);
    Precomputed pc(model);
    Matrix out(x.rows(), static_cast<std::size_t>(model.k));
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto row = out.row(i);
        double lse = joint_log_probs(model, pc, x.row(i), row);
        for (auto& v : row) v = std::exp(v - lse);
    }
    return out;
}

std::vector<int> assign_labels(const GmmModel& model, const Matrix& x) {
    check_dims(model, x);
    Precomputed pc(model);
    std::vector<double> buf(static_cast<std::size_t>(model.k));
    std::vector<int> labels(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        joint_log_probs(model, pc, x.row(i), buf);
        // argmax of the joint equals argmax of the responsibility.
        labels[i] = static_cast<int>(std::max_element(buf.begin(), buf.end()) - buf.begin());
    }
    return labels;
}

Clustering assign(const GmmModel& model, const EmbeddingMatrix& x) {
    Clustering c;
    c.ids = x.ids();
    c.labels = assign_labels(model, x.vectors());
    c.k = model.k;
    c.model_tag = ModelTag::gmm;
    c.seed = model.seed;
    c.meta = json{{"final_log_likelihood", model.final_log_likelihood},
                  {"n_iterations", model.n_iterations},
                  {"converged", model.converged},
                  {"degenerate", model.degenerate}};
    return c;
}

double log_likelihood(const GmmModel& model, const Matrix& x) {
    check_dims(model, x);
    Precomputed pc(model);
    std::vector<double> buf(static_cast<std::size_t>(model.k));
    long double total = 0.0L;
    for (std::size_t i = 0; i < x.rows(); ++i) total += joint_log_probs(model, pc, x.row(i), buf);
    return static_cast<double>(total);
}

double cluster_sigma(const GmmModel& model, int k) {
    if (k < 0 || k >= model.k) throw Error("component index " + std::to_string(k) + " out of range");
    double s = 0.0;
    for (std::size_t j = 0; j < model.dim(); ++j) s += std::sqrt(model.variances(k, j));
    return s / static_cast<double>(model.dim());
}

}  // namespace clustval
