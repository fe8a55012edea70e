#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace iothp::analytics {

using Matrix = std::vector<std::vector<double>>;

// Fitted diagonal-covariance Gaussian mixture.
struct GmmModel {
    int k = 0;
    std::vector<double> weights;    // length K, sums to 1
    Matrix means;                   // K x d
    Matrix variances;               // K x d, each >= variance floor
    uint64_t seed = 0;
    bool converged = false;
    double log_likelihood = 0.0;
    std::vector<double> ll_history;  // one entry per E-step evaluation
    int iterations = 0;              // number of M-steps performed
};

struct GmmOptions {
    double tol = 1e-6;            // stop when LL improvement drops below this
    int max_iter = 500;
    double variance_floor = 1e-6;  // keeps duplicate rows from collapsing a component
    int n_init = 1;  // EM restarts; the best final log-likelihood wins
};

// EM with k-means++-style seeded initialization. With n_init > 1 the run is
// repeated from restarts whose seeds derive from `seed`, keeping the fit with
// the best final log-likelihood (first one on ties). Deterministic: the same
// (features, k, seed, options) produce bit-identical parameters. Throws
// ValidationError when n < k and NumericError (naming the iteration) if the
// log-likelihood turns non-finite.
GmmModel fit_gmm(const Matrix& features, int k, uint64_t seed, const GmmOptions& opts = {});

// Posterior component probabilities; every row sums to 1.
Matrix responsibilities(const GmmModel& model, const Matrix& features);

// Hard labels: argmax responsibility, ties broken toward the lowest index.
std::vector<int> hard_assign(const GmmModel& model, const Matrix& features);

double bic(const GmmModel& model, size_t n);

struct SelectKResult {
    int best_k = 0;
    GmmModel best_model;
    std::map<int, double> bic_by_k;
};

// Fits every K in k_range and returns the BIC argmin; ties go to the
// smallest K. Fit errors propagate.
SelectKResult select_k(const Matrix& features, const std::vector<int>& k_range, uint64_t seed,
                       const GmmOptions& opts = {});

}  // namespace iothp::analytics
