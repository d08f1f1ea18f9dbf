#include "clustval/lda.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "clustval/error.hpp"
#include "clustval/random.hpp"

namespace clustval {

using json = nlohmann::json;

namespace {

class GibbsSampler {
public:
    GibbsSampler(const Corpus& corpus, int k, double alpha, double beta, std::uint64_t seed)
        : k_(k), alpha_(alpha), beta_(beta), rng_(seed) {
        for (const auto& [word, count] : corpus.vocab()) {
            word_id_.emplace(word, vocab_.size());
            vocab_.push_back(word);
        }
        v_ = vocab_.size();
        docs_.resize(corpus.size());
        z_.resize(corpus.size());
        n_dk_.assign(corpus.size() * k_, 0);
        n_kw_.assign(static_cast<std::size_t>(k_) * v_, 0);
        n_k_.assign(k_, 0);
        for (std::size_t d = 0; d < corpus.size(); ++d) {
            for (const auto& t : corpus[d].tokens) docs_[d].push_back(word_id_.at(t));
            for (std::size_t w : docs_[d]) {
                int topic = static_cast<int>(rng_.index(static_cast<std::size_t>(k_)));
                z_[d].push_back(topic);
                add(d, w, topic, 1);
            }
        }
        probs_.resize(k_);
    }

    void sweep() {
        const double v_beta = static_cast<double>(v_) * beta_;
        for (std::size_t d = 0; d < docs_.size(); ++d) {
            auto& words = docs_[d];
            auto& topics = z_[d];
            for (std::size_t i = 0; i < words.size(); ++i) {
                std::size_t w = words[i];
                add(d, w, topics[i], -1);
                double total = 0.0;
                for (int t = 0; t < k_; ++t) {
                    total += (n_dk_[d * k_ + t] + alpha_) * (n_kw_[t * v_ + w] + beta_) / (n_k_[t] + v_beta);
                    probs_[t] = total;
                }
                double u = rng_.uniform() * total;
                int topic = k_ - 1;
                for (int t = 0; t < k_; ++t) {
                    if (u < probs_[t]) {
                        topic = t;
                        break;
                    }
                }
                topics[i] = topic;
                add(d, w, topic, 1);
            }
        }
    }

    void verify() const {
        std::vector<long> dk(n_dk_.size(), 0), kw(n_kw_.size(), 0), kk(k_, 0);
        for (std::size_t d = 0; d < docs_.size(); ++d) {
            for (std::size_t i = 0; i < docs_[d].size(); ++i) {
                int t = z_[d][i];
                ++dk[d * k_ + t];
                ++kw[t * v_ + docs_[d][i]];
                ++kk[t];
            }
        }
        if (dk != n_dk_ || kw != n_kw_ || kk != n_k_) throw Error("LDA topic-count tables diverged from assignments");
    }

    void accumulate(Matrix& phi, Matrix& theta) const {
        const double v_beta = static_cast<double>(v_) * beta_;
        for (int t = 0; t < k_; ++t)
            for (std::size_t w = 0; w < v_; ++w) phi(t, w) += (n_kw_[t * v_ + w] + beta_) / (n_k_[t] + v_beta);
        const double k_alpha = k_ * alpha_;
        for (std::size_t d = 0; d < docs_.size(); ++d) {
            double len = static_cast<double>(docs_[d].size());
            for (int t = 0; t < k_; ++t) theta(d, t) += (n_dk_[d * k_ + t] + alpha_) / (len + k_alpha);
        }
    }

    const std::vector<std::string>& vocab() const { return vocab_; }
    std::size_t n_docs() const { return docs_.size(); }
    bool empty_doc(std::size_t d) const { return docs_[d].empty(); }
    Rng& rng() { return rng_; }

private:
    int k_;
    double alpha_, beta_;
    Rng rng_;
    std::vector<std::string> vocab_;
    std::unordered_map<std::string, std::size_t> word_id_;
    std::size_t v_ = 0;
    std::vector<std::vector<std::size_t>> docs_;
    std::vector<std::vector<int>> z_;
    std::vector<long> n_dk_, n_kw_, n_k_;
    std::vector<double> probs_;

    void add(std::size_t d, std::size_t w, int t, int delta) {
        n_dk_[d * k_ + t] += delta;
        n_kw_[t * v_ + w] += delta;
        n_k_[t] += delta;
    }
};

}  // namespace

LdaModel fit_lda(const Corpus& corpus, int k, const LdaConfig& config, std::uint64_t seed) {
    if (k < 2) throw Error("LDA needs K >= 2");
    if (corpus.vocab().empty()) throw Error("LDA corpus has an empty vocabulary");
    if (config.sweeps < 1 || config.sample_lag < 1 || config.burn_in < 0)
        throw Error("LDA sweeps and sample_lag must be positive, burn_in non-negative");
    if (config.burn_in >= config.sweeps) throw Error("LDA burn_in must be smaller than sweeps");
    const double alpha = config.alpha > 0.0 ? config.alpha : 50.0 / k;
    if (config.beta <= 0.0) throw Error("LDA beta must be positive");

    bool verify = config.verify_counts;
#ifndef NDEBUG
    verify = true;
#endif

    GibbsSampler sampler(corpus, k, alpha, config.beta, seed);
    const std::size_t v = sampler.vocab().size();
    Matrix phi(static_cast<std::size_t>(k), v);
    Matrix theta(corpus.size(), static_cast<std::size_t>(k));
    int samples = 0;
    for (int s = 1; s <= config.sweeps; ++s) {
        sampler.sweep();
        if (verify) sampler.verify();
        if (s > config.burn_in && (s - config.burn_in) % config.sample_lag == 0) {
            sampler.accumulate(phi, theta);
            ++samples;
        }
    }
    if (samples == 0) {
        sampler.accumulate(phi, theta);
        samples = 1;
    }

    LdaModel m;
    m.k = k;
    m.alpha = alpha;
    m.beta = config.beta;
    m.seed = seed;
    m.n_sweeps = config.sweeps;
    m.n_samples = samples;
    m.vocab = sampler.vocab();
    m.doc_ids = corpus.ids();
    for (double& x : phi.data()) x /= samples;
    for (double& x : theta.data()) x /= samples;
    // Renormalize away accumulated rounding so rows sum to 1.
    for (std::size_t t = 0; t < phi.rows(); ++t) {
        auto row = phi.row(t);
        double s = std::accumulate(row.begin(), row.end(), 0.0);
        for (auto& x : row) x /= s;
    }
    for (std::size_t d = 0; d < theta.rows(); ++d) {
        auto row = theta.row(d);
        double s = std::accumulate(row.begin(), row.end(), 0.0);
        for (auto& x : row) x /= s;
    }
    m.phi = std::move(phi);
    m.doc_topic = std::move(theta);
    m.empty_doc_topic.assign(corpus.size(), -1);
    for (std::size_t d = 0; d < corpus.size(); ++d)
        if (sampler.empty_doc(d)) m.empty_doc_topic[d] = static_cast<int>(sampler.rng().index(static_cast<std::size_t>(k)));
    return m;
}

std::vector<std::string> lda_top_words(const LdaModel& model, int topic, std::size_t n) {
    if (topic < 0 || topic >= model.k) throw Error("topic index " + std::to_string(topic) + " out of range");
    std::vector<std::size_t> idx(model.vocab.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto row = model.phi.row(static_cast<std::size_t>(topic));
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (row[a] != row[b]) return row[a] > row[b];
        return model.vocab[a] < model.vocab[b];
    });
    idx.resize(std::min(n, idx.size()));
    std::vector<std::string> out;
    for (auto i : idx) out.push_back(model.vocab[i]);
    return out;
}

Clustering lda_assign(const LdaModel& model) {
    Clustering c;
    c.ids = model.doc_ids;
    c.k = model.k;
    c.model_tag = ModelTag::lda;
    c.seed = model.seed;
    json flagged = json::array();
    for (std::size_t d = 0; d < model.doc_ids.size(); ++d) {
        int label;
        if (!model.empty_doc_topic.empty() && model.empty_doc_topic[d] >= 0) {
            label = model.empty_doc_topic[d];
            flagged.push_back(model.doc_ids[d]);
        } else {
            auto row = model.doc_topic.row(d);
            label = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
        }
        c.labels.push_back(label);
    }
    c.meta = json{{"alpha", model.alpha}, {"beta", model.beta}, {"sweeps", model.n_sweeps},
                  {"samples", model.n_samples}, {"empty_documents", flagged}};
    return c;
}

void to_json(json& j, const LdaModel& m) {
    std::vector<std::vector<double>> phi;
    for (std::size_t t = 0; t < m.phi.rows(); ++t) {
        auto r = m.phi.row(t);
        phi.emplace_back(r.begin(), r.end());
    }
    j = json{{"k", m.k},         {"alpha", m.alpha},         {"beta", m.beta},     {"seed", m.seed},
             {"sweeps", m.n_sweeps}, {"samples", m.n_samples}, {"vocab", m.vocab}, {"phi", phi}};
}

void from_json(const json& j, LdaModel& m) {
    m.k = j.at("k").get<int>();
    m.alpha = j.at("alpha").get<double>();
    m.beta = j.at("beta").get<double>();
    m.seed = j.value("seed", std::uint64_t{0});
    m.n_sweeps = j.value("sweeps", 0);
    m.n_samples = j.value("samples", 0);
    m.vocab = j.at("vocab").get<std::vector<std::string>>();
    m.phi = Matrix();
    for (const auto& row : j.at("phi")) {
        auto r = row.get<std::vector<double>>();
        if (r.size() != m.vocab.size()) throw ParseError("LDA phi row length differs from vocabulary size");
        m.phi.push_row(r);
    }
    if (static_cast<int>(m.phi.rows()) != m.k) throw ParseError("LDA phi has wrong number of topics");
}

}  // namespace clustval
