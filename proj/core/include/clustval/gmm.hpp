#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustval/clustering.hpp"
#include "clustval/embed.hpp"
#include "clustval/matrix.hpp"

namespace clustval {

struct GmmConfig {
    int max_iter = 500;
    /// Stop once (LL_t - LL_{t-1}) < rel_tol * |LL_{t-1}|.
    double rel_tol = 1e-6;
    double var_floor = 1e-6;
    int n_init = 1;
    /// E-step worker threads, 0 = hardware concurrency. Results do not depend
    /// on this value: partial sums are reduced in a fixed block order.
    std::size_t threads = 0;
};

/// Mixture of K Gaussians with per-dimension variances.
struct GmmModel {
    int k = 0;
    std::vector<double> weights;  // K, sums to 1
    Matrix means;                 // K x d
    Matrix variances;             // K x d, each >= var_floor
    std::uint64_t seed = 0;
    double var_floor = 1e-6;
    double final_log_likelihood = 0.0;
    int n_iterations = 0;
    bool converged = false;
    /// Every input row was identical; all means coincide.
    bool degenerate = false;
    /// Log-likelihood after initialization and after every M-step.
    std::vector<double> log_likelihood_trace;

    std::size_t dim() const noexcept { return means.cols(); }
};

void to_json(nlohmann::json& j, const GmmModel& m);
void from_json(const nlohmann::json& j, GmmModel& m);

/// Fits by EM from k-means++ seeded means, global per-dimension variances and
/// uniform weights. With n_init > 1 the highest-likelihood run is returned.
///
/// Rows are processed in a canonical (lexicographic) order, so the fitted
/// model does not depend on the input row order and is bit-identical for a
/// given (X, K, config, seed).
GmmModel fit_gmm(const Matrix& x, int k, const GmmConfig& config, std::uint64_t seed);
GmmModel fit_gmm(const EmbeddingMatrix& x, int k, const GmmConfig& config, std::uint64_t seed);

/// n x K posterior membership probabilities, computed in log space.
Matrix responsibilities(const GmmModel& model, const Matrix& x);

/// Argmax responsibility per row; ties go to the lowest component index.
std::vector<int> assign_labels(const GmmModel& model, const Matrix& x);
Clustering assign(const GmmModel& model, const EmbeddingMatrix& x);

/// sum_i log sum_k w_k N(x_i; mu_k, diag var_k).
double log_likelihood(const GmmModel& model, const Matrix& x);

/// Mean over dimensions of sqrt(variance) for component `k`.
double cluster_sigma(const GmmModel& model, int k);

}  // namespace clustval
