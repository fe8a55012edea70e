#include "analytics/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "util/errors.hpp"
#include "util/rng.hpp"

namespace iothp::analytics {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (size_t j = 0; j < a.size(); ++j) {
        double diff = a[j] - b[j];
        d += diff * diff;
    }
    return d;
}

// k-means++ seeding: first center uniform, then each next center drawn with
// probability proportional to squared distance from the nearest chosen one.
std::vector<size_t> kmeanspp_centers(const Matrix& x, int k, util::Rng& rng) {
    size_t n = x.size();
    std::vector<size_t> centers;
    centers.reserve(static_cast<size_t>(k));
    centers.push_back(rng.index(n));
    std::vector<double> dist2(n, 0.0);
    for (size_t i = 0; i < n; ++i) dist2[i] = sq_dist(x[i], x[centers[0]]);
    while (centers.size() < static_cast<size_t>(k)) {
        double total = 0.0;
        for (double d : dist2) total += d;
        size_t pick;
        if (total <= 0.0) {
            // Remaining points coincide with existing centers.
            pick = rng.index(n);
        } else {
            double r = rng.uniform01() * total;
            double acc = 0.0;
            pick = n - 1;
            for (size_t i = 0; i < n; ++i) {
                acc += dist2[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        }
        centers.push_back(pick);
        for (size_t i = 0; i < n; ++i) dist2[i] = std::min(dist2[i], sq_dist(x[i], x[pick]));
    }
    return centers;
}

double log_sum_exp(const std::vector<double>& v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double a : v) mx = std::max(mx, a);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double a : v) s += std::exp(a - mx);
    return mx + std::log(s);
}

// E-step: fills resp (n x K) and returns the total log-likelihood.
double e_step(const GmmModel& m, const Matrix& x, Matrix& resp) {
    size_t n = x.size();
    size_t d = x[0].size();
    size_t k = static_cast<size_t>(m.k);
    std::vector<double> log_w(k);
    for (size_t c = 0; c < k; ++c) {
        log_w[c] = m.weights[c] > 0.0 ? std::log(m.weights[c])
                                      : -std::numeric_limits<double>::infinity();
    }
    // Per-component constant: -0.5 * sum_j log(2 pi var_j)
    std::vector<double> log_norm(k, 0.0);
    for (size_t c = 0; c < k; ++c) {
        double s = 0.0;
        for (size_t j = 0; j < d; ++j) s += std::log(m.variances[c][j]);
        log_norm[c] = -0.5 * (static_cast<double>(d) * kLog2Pi + s);
    }
    double ll = 0.0;
    std::vector<double> comp(k);
    for (size_t i = 0; i < n; ++i) {
        for (size_t c = 0; c < k; ++c) {
            double quad = 0.0;
            for (size_t j = 0; j < d; ++j) {
                double diff = x[i][j] - m.means[c][j];
                quad += diff * diff / m.variances[c][j];
            }
            comp[c] = log_w[c] + log_norm[c] - 0.5 * quad;
        }
        double lse = log_sum_exp(comp);
        ll += lse;
        for (size_t c = 0; c < k; ++c) resp[i][c] = std::exp(comp[c] - lse);
    }
    return ll;
}

void m_step(GmmModel& m, const Matrix& x, const Matrix& resp, double floor) {
    size_t n = x.size();
    size_t d = x[0].size();
    size_t k = static_cast<size_t>(m.k);
    for (size_t c = 0; c < k; ++c) {
        double nk = 0.0;
        for (size_t i = 0; i < n; ++i) nk += resp[i][c];
        m.weights[c] = nk / static_cast<double>(n);
        if (nk < 1e-12) continue;  // starved component keeps its parameters
        for (size_t j = 0; j < d; ++j) {
            double mu = 0.0;
            for (size_t i = 0; i < n; ++i) mu += resp[i][c] * x[i][j];
            mu /= nk;
            double var = 0.0;
            for (size_t i = 0; i < n; ++i) {
                double diff = x[i][j] - mu;
                var += resp[i][c] * diff * diff;
            }
            var /= nk;
            m.means[c][j] = mu;
            m.variances[c][j] = std::max(var, floor);
        }
    }
}

GmmModel fit_gmm_once(const Matrix& features, int k, uint64_t seed, const GmmOptions& opts) {
    if (k < 1) throw ValidationError("gmm: K must be >= 1");
    if (features.size() < static_cast<size_t>(k)) {
        throw ValidationError("gmm: " + std::to_string(features.size()) + " rows < K=" +
                              std::to_string(k));
    }
    size_t n = features.size();
    size_t d = features[0].size();
    for (const auto& row : features) {
        if (row.size() != d) throw ValidationError("gmm: ragged feature matrix");
    }

    util::Rng rng(seed);
    GmmModel m;
    m.k = k;
    m.seed = seed;
    m.weights.assign(static_cast<size_t>(k), 1.0 / k);
    auto centers = kmeanspp_centers(features, k, rng);
    m.means.assign(static_cast<size_t>(k), std::vector<double>(d, 0.0));
    for (int c = 0; c < k; ++c) m.means[static_cast<size_t>(c)] = features[centers[static_cast<size_t>(c)]];
    // Initial variances: per-dimension variance of the whole data set.
    std::vector<double> mean_all(d, 0.0);
    for (const auto& row : features) {
        for (size_t j = 0; j < d; ++j) mean_all[j] += row[j];
    }
    for (size_t j = 0; j < d; ++j) mean_all[j] /= static_cast<double>(n);
    std::vector<double> var_all(d, 0.0);
    for (const auto& row : features) {
        for (size_t j = 0; j < d; ++j) {
            double diff = row[j] - mean_all[j];
            var_all[j] += diff * diff;
        }
    }
    for (size_t j = 0; j < d; ++j) {
        var_all[j] = std::max(var_all[j] / static_cast<double>(n), opts.variance_floor);
    }
    m.variances.assign(static_cast<size_t>(k), var_all);

    Matrix resp(n, std::vector<double>(static_cast<size_t>(k), 0.0));
    double ll = e_step(m, features, resp);
    if (!std::isfinite(ll)) throw NumericError("gmm: non-finite log-likelihood at iteration 0");
    m.ll_history.push_back(ll);

    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        m_step(m, features, resp, opts.variance_floor);
        double next_ll = e_step(m, features, resp);
        if (!std::isfinite(next_ll)) {
            throw NumericError("gmm: non-finite log-likelihood at iteration " + std::to_string(iter));
        }
        m.ll_history.push_back(next_ll);
        m.iterations = iter;
        if (next_ll - ll < opts.tol) {
            ll = next_ll;
            m.converged = true;
            break;
        }
        ll = next_ll;
    }
    m.log_likelihood = ll;
    return m;
}

}  // namespace

GmmModel fit_gmm(const Matrix& features, int k, uint64_t seed, const GmmOptions& opts) {
    if (opts.n_init < 1) throw ValidationError("gmm: n_init must be >= 1");
    if (opts.n_init == 1) return fit_gmm_once(features, k, seed, opts);
    GmmModel best;
    bool have = false;
    for (int i = 0; i < opts.n_init; ++i) {
        GmmModel m = fit_gmm_once(features, k, util::derive_seed(seed, "init-" + std::to_string(i)),
                                  opts);
        if (!have || m.log_likelihood > best.log_likelihood) {
            best = std::move(m);
            have = true;
        }
    }
    best.seed = seed;  // what a caller must pass to reproduce the whole sweep
    return best;
}

Matrix responsibilities(const GmmModel& model, const Matrix& features) {
    if (features.empty()) return {};
    if (features[0].size() != model.means.at(0).size()) {
        throw ValidationError("gmm: feature dimension " + std::to_string(features[0].size()) +
                              " does not match model dimension " +
                              std::to_string(model.means[0].size()));
    }
    Matrix resp(features.size(), std::vector<double>(static_cast<size_t>(model.k), 0.0));
    e_step(model, features, resp);
    return resp;
}

std::vector<int> hard_assign(const GmmModel& model, const Matrix& features) {
    Matrix resp = responsibilities(model, features);
    std::vector<int> labels(resp.size(), 0);
    for (size_t i = 0; i < resp.size(); ++i) {
        int best = 0;
        for (int c = 1; c < model.k; ++c) {
            if (resp[i][static_cast<size_t>(c)] > resp[i][static_cast<size_t>(best)]) best = c;
        }
        labels[i] = best;
    }
    return labels;
}

double bic(const GmmModel& model, size_t n) {
    size_t d = model.means.at(0).size();
    double params = static_cast<double>(model.k - 1) + 2.0 * model.k * static_cast<double>(d);
    return -2.0 * model.log_likelihood + params * std::log(static_cast<double>(n));
}

SelectKResult select_k(const Matrix& features, const std::vector<int>& k_range, uint64_t seed,
                       const GmmOptions& opts) {
    if (k_range.empty()) throw ValidationError("select_k: empty K range");
    SelectKResult result;
    double best_bic = std::numeric_limits<double>::infinity();
    std::vector<int> sorted = k_range;
    std::sort(sorted.begin(), sorted.end());
    for (int k : sorted) {
        GmmModel m = fit_gmm(features, k, seed, opts);
        double b = bic(m, features.size());
        result.bic_by_k[k] = b;
        if (b < best_bic) {
            best_bic = b;
            result.best_k = k;
            result.best_model = std::move(m);
        }
    }
    return result;
}

}  // namespace iothp::analytics
