#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "urbc/cluster.hpp"
#include "urbc/errors.hpp"

namespace urbc {

struct CountMatrix {
    std::vector<int> cluster_ids;           // row labels
    std::vector<std::string> product_codes;  // column labels
    Eigen::MatrixXd counts;                  // shops_cp; integer-valued, non-negative
};

struct PruneLog {
    std::vector<int> clusters;
    std::vector<std::string> products;
};

struct IncidenceMatrix {
    std::vector<int> cluster_ids;
    std::vector<std::string> product_codes;
    Eigen::MatrixXd rca;  // Balassa index
    Eigen::MatrixXd m;    // 1.0 where rca >= 1, else 0.0
};

enum class ComplexityMethod { reflections, eigen };

struct ComplexityScores {
    std::vector<int> cluster_ids;
    std::vector<std::string> product_codes;
    Eigen::VectorXd eci_raw, eci;  // per cluster; raw is standardized, eci is min-max [0,1]
    Eigen::VectorXd pci_raw, pci;  // per product
    Eigen::VectorXi diversity;     // row sums of M
    Eigen::VectorXi ubiquity;      // column sums of M
    ComplexityMethod method = ComplexityMethod::reflections;
    int iterations = 0;
};

namespace detail {

// Drop all-zero rows and columns; record what was dropped.
inline CountMatrix prune_counts(CountMatrix cm, PruneLog* log) {
    std::vector<int> keep_rows, keep_cols;
    for (int r = 0; r < cm.counts.rows(); ++r) {
        if (cm.counts.row(r).sum() > 0) {
            keep_rows.push_back(r);
        } else if (log) {
            log->clusters.push_back(cm.cluster_ids[static_cast<std::size_t>(r)]);
        }
    }
    for (int c = 0; c < cm.counts.cols(); ++c) {
        if (cm.counts.col(c).sum() > 0) {
            keep_cols.push_back(c);
        } else if (log) {
            log->products.push_back(cm.product_codes[static_cast<std::size_t>(c)]);
        }
    }
    if (keep_rows.size() == static_cast<std::size_t>(cm.counts.rows()) &&
        keep_cols.size() == static_cast<std::size_t>(cm.counts.cols())) {
        return cm;
    }
    CountMatrix out;
    out.counts.resize(static_cast<Eigen::Index>(keep_rows.size()),
                      static_cast<Eigen::Index>(keep_cols.size()));
    for (std::size_t i = 0; i < keep_rows.size(); ++i) {
        out.cluster_ids.push_back(cm.cluster_ids[static_cast<std::size_t>(keep_rows[i])]);
        for (std::size_t j = 0; j < keep_cols.size(); ++j) {
            out.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                cm.counts(keep_rows[i], keep_cols[j]);
        }
    }
    for (int c : keep_cols) out.product_codes.push_back(cm.product_codes[static_cast<std::size_t>(c)]);
    return out;
}

// Subtract the mean and divide by the population standard deviation.
inline void standardize(Eigen::VectorXd& v, double tol) {
    const double mean = v.mean();
    v.array() -= mean;
    const double sd = std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
    if (!(sd > tol)) throw computation_error("degenerate incidence");
    v /= sd;
}

// Rank vector with ties broken by index; used for the rank-stability stop.
inline std::vector<int> rank_order(const Eigen::VectorXd& v) {
    std::vector<int> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (v[a] != v[b]) return v[a] < v[b];
        return a < b;
    });
    std::vector<int> rank(idx.size());
    for (std::size_t pos = 0; pos < idx.size(); ++pos) rank[static_cast<std::size_t>(idx[pos])] = static_cast<int>(pos);
    return rank;
}

inline double correlation_sign(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Eigen::VectorXd xc = x.array() - x.mean();
    const Eigen::VectorXd yc = y.array() - y.mean();
    const double denom = std::sqrt(xc.squaredNorm() * yc.squaredNorm());
    if (denom == 0.0) return 0.0;
    return xc.dot(yc) / denom;
}

// Fix the overall sign of the paired (eci, pci) solution: positive
// correlation with diversity; if diversity is constant, make the first
// non-zero eci component positive.
inline void orient(Eigen::VectorXd& eci, Eigen::VectorXd& pci, const Eigen::VectorXd& diversity) {
    double sign = correlation_sign(eci, diversity);
    if (sign == 0.0) {
        for (Eigen::Index i = 0; i < eci.size(); ++i) {
            if (eci[i] != 0.0) {
                sign = eci[i];
                break;
            }
        }
    }
    if (sign < 0.0) {
        eci = -eci;
        pci = -pci;
    }
}

inline Eigen::VectorXd min_max_scale(const Eigen::VectorXd& v) {
    const double lo = v.minCoeff();
    const double hi = v.maxCoeff();
    return (v.array() - lo) / (hi - lo);
}

inline void check_no_zero_lines(const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (m.row(r).sum() <= 0) throw computation_error("degenerate incidence");
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (m.col(c).sum() <= 0) throw computation_error("degenerate incidence");
    }
}

}  // namespace detail

// Cluster-by-product shop counts; empty rows/columns are pruned and logged.
inline CountMatrix build_counts(const std::vector<Shop>& shops,
                                const std::vector<AmenityCluster>& clusters,
                                PruneLog* log = nullptr) {
    std::unordered_map<std::string, std::size_t> shop_by_id;
    for (std::size_t i = 0; i < shops.size(); ++i) shop_by_id.emplace(shops[i].id, i);

    std::vector<std::string> products;
    {
        std::vector<std::string> all;
        all.reserve(shops.size());
        for (const auto& s : shops) all.push_back(s.product_code);
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        products = std::move(all);
    }
    std::unordered_map<std::string, int> product_col;
    for (std::size_t j = 0; j < products.size(); ++j) product_col.emplace(products[j], static_cast<int>(j));

    CountMatrix cm;
    cm.product_codes = products;
    cm.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(clusters.size()),
                                      static_cast<Eigen::Index>(products.size()));
    std::size_t assigned = 0;
    for (std::size_t r = 0; r < clusters.size(); ++r) {
        cm.cluster_ids.push_back(clusters[r].cluster_id);
        for (const auto& id : clusters[r].member_ids) {
            auto it = shop_by_id.find(id);
            if (it == shop_by_id.end()) continue;
            cm.counts(static_cast<Eigen::Index>(r), product_col.at(shops[it->second].product_code)) += 1.0;
            ++assigned;
        }
    }
    if (assigned == 0) throw input_error("no assigned shops");
    return detail::prune_counts(std::move(cm), log);
}

// Balassa revealed comparative advantage and its binarization (rca >= 1).
inline IncidenceMatrix compute_rca(const CountMatrix& cm) {
    const double total = cm.counts.sum();
    if (!(total > 0)) throw input_error("all-zero count matrix");
    const Eigen::VectorXd row_totals = cm.counts.rowwise().sum();
    const Eigen::VectorXd col_totals = cm.counts.colwise().sum();

    IncidenceMatrix inc;
    inc.cluster_ids = cm.cluster_ids;
    inc.product_codes = cm.product_codes;
    inc.rca.resize(cm.counts.rows(), cm.counts.cols());
    inc.m.resize(cm.counts.rows(), cm.counts.cols());
    for (Eigen::Index r = 0; r < cm.counts.rows(); ++r) {
        for (Eigen::Index c = 0; c < cm.counts.cols(); ++c) {
            const double share_in_cluster = cm.counts(r, c) / row_totals[r];
            const double share_in_city = col_totals[c] / total;
            const double rca = share_in_cluster / share_in_city;
            inc.rca(r, c) = rca;
            inc.m(r, c) = rca >= 1.0 ? 1.0 : 0.0;
        }
    }
    return inc;
}

// Method of reflections (Hidalgo-Hausmann recursion) with per-iteration
// standardization. Iteration 0 is diversity/ubiquity; each following
// iteration averages the other side's previous values over the incidence
// rows/columns, then standardizes both vectors. The eci/pci pairing keeps
// the defining relation eci_c = mean of pci over cluster c's products.
// Stops when the eci ranking repeats across consecutive even iterations.
inline ComplexityScores method_of_reflections(const IncidenceMatrix& inc, int max_iter = 200,
                                              double tol = 1e-12) {
    detail::check_no_zero_lines(inc.m);
    const Eigen::VectorXd diversity = inc.m.rowwise().sum();
    const Eigen::VectorXd ubiquity = inc.m.colwise().sum().transpose();

    Eigen::VectorXd kc = diversity;
    Eigen::VectorXd kp = ubiquity;
    Eigen::VectorXd paired_pci = kp;
    std::vector<int> prev_even_ranks = detail::rank_order(kc);
    int iterations = 0;

    for (int n = 1; n <= max_iter; ++n) {
        const Eigen::VectorXd kp_prev = kp;
        Eigen::VectorXd kc_next = (inc.m * kp).cwiseQuotient(diversity);
        Eigen::VectorXd kp_next = (inc.m.transpose() * kc).cwiseQuotient(ubiquity);
        detail::standardize(kc_next, tol);
        detail::standardize(kp_next, tol);
        kc = std::move(kc_next);
        kp = std::move(kp_next);
        iterations = n;
        if (n % 2 == 0) {
            paired_pci = kp_prev;  // the product vector eci was averaged from
            auto ranks = detail::rank_order(kc);
            if (ranks == prev_even_ranks) break;
            prev_even_ranks = std::move(ranks);
        }
    }

    ComplexityScores scores;
    scores.cluster_ids = inc.cluster_ids;
    scores.product_codes = inc.product_codes;
    scores.method = ComplexityMethod::reflections;
    scores.iterations = iterations;
    scores.diversity = diversity.cast<int>();
    scores.ubiquity = ubiquity.cast<int>();
    scores.eci_raw = kc;
    scores.pci_raw = paired_pci;
    detail::orient(scores.eci_raw, scores.pci_raw, diversity);
    scores.eci = detail::min_max_scale(scores.eci_raw);
    scores.pci = detail::min_max_scale(scores.pci_raw);
    return scores;
}

// Spectral route. The reflections fixed point is the second eigenvector of
//   W = D^-1 M U^-1 M^T,
// which is similar to the symmetric PSD matrix S = D^-1/2 M U^-1 M^T D^-1/2.
// The trivial eigenpair (eigenvalue 1, eigenvector D^1/2 * 1) is deflated
// and the dominant remaining eigenvector is mapped back through D^-1/2.
// pci follows from eci by the product-side recursion, as in the paper's
// definition of product complexity.
inline ComplexityScores eigen_complexity(const IncidenceMatrix& inc) {
    detail::check_no_zero_lines(inc.m);
    const Eigen::VectorXd diversity = inc.m.rowwise().sum();
    const Eigen::VectorXd ubiquity = inc.m.colwise().sum().transpose();
    const Eigen::Index n = inc.m.rows();

    const Eigen::VectorXd d_isqrt = diversity.array().rsqrt();
    const Eigen::MatrixXd b = d_isqrt.asDiagonal() * inc.m * ubiquity.cwiseInverse().asDiagonal() *
                              inc.m.transpose() * d_isqrt.asDiagonal();
    Eigen::VectorXd u = diversity.array().sqrt();
    u /= u.norm();
    const double lambda_u = u.dot(b * u);  // = 1 up to rounding
    const Eigen::MatrixXd deflated = b - lambda_u * (u * u.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(deflated);
    if (solver.info() != Eigen::Success) throw computation_error("eigendecomposition failed");
    const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
    if (n < 2) throw computation_error("degenerate incidence");
    const double top = values[n - 1];
    const double second = values[n - 2];
    if (top - second <= 1e-10) throw computation_error("ambiguous eigenvector");

    ComplexityScores scores;
    scores.cluster_ids = inc.cluster_ids;
    scores.product_codes = inc.product_codes;
    scores.method = ComplexityMethod::eigen;
    scores.iterations = 0;
    scores.diversity = diversity.cast<int>();
    scores.ubiquity = ubiquity.cast<int>();

    scores.eci_raw = solver.eigenvectors().col(n - 1).cwiseProduct(d_isqrt);
    detail::standardize(scores.eci_raw, 1e-14);
    {
        Eigen::VectorXd dummy = scores.eci_raw;
        detail::orient(scores.eci_raw, dummy, diversity);
    }
    scores.pci_raw = (inc.m.transpose() * scores.eci_raw).cwiseQuotient(ubiquity);
    detail::standardize(scores.pci_raw, 1e-14);
    scores.eci = detail::min_max_scale(scores.eci_raw);
    scores.pci = detail::min_max_scale(scores.pci_raw);
    return scores;
}

// Inverse ubiquity; rank-equivalent alternative to pci examined in the
// paper's robustness check.
inline Eigen::VectorXd uniqueness(const IncidenceMatrix& inc) {
    const Eigen::VectorXd ubiquity = inc.m.colwise().sum().transpose();
    for (Eigen::Index p = 0; p < ubiquity.size(); ++p) {
        if (ubiquity[p] <= 0) throw computation_error("degenerate incidence");
    }
    return ubiquity.cwiseInverse();
}

}  // namespace urbc
