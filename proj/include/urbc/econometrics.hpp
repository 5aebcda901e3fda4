#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "urbc/complexity.hpp"
#include "urbc/errors.hpp"

namespace urbc {

// ---------------------------------------------------------------------------
// Columnar dataset

class Table {
  public:
    std::size_t n_rows() const { return n_rows_; }

    void add_numeric(const std::string& name, std::vector<double> values) {
        check_length(values.size());
        numeric_[name] = std::move(values);
        order_.push_back(name);
    }

    void add_categorical(const std::string& name, std::vector<std::string> values) {
        check_length(values.size());
        categorical_[name] = std::move(values);
        order_.push_back(name);
    }

    bool has_numeric(const std::string& name) const { return numeric_.count(name) > 0; }
    bool has_categorical(const std::string& name) const { return categorical_.count(name) > 0; }

    const std::vector<double>& numeric(const std::string& name) const {
        auto it = numeric_.find(name);
        if (it == numeric_.end()) throw input_error("missing numeric column: " + name);
        return it->second;
    }

    const std::vector<std::string>& categorical(const std::string& name) const {
        auto it = categorical_.find(name);
        if (it == categorical_.end()) throw input_error("missing categorical column: " + name);
        return it->second;
    }

    const std::vector<std::string>& column_order() const { return order_; }

    // Keep only rows where keep[i] is true.
    Table filtered(const std::vector<bool>& keep) const {
        Table out;
        for (const auto& name : order_) {
            if (auto it = numeric_.find(name); it != numeric_.end()) {
                std::vector<double> v;
                for (std::size_t i = 0; i < keep.size(); ++i)
                    if (keep[i]) v.push_back(it->second[i]);
                out.add_numeric(name, std::move(v));
            } else {
                const auto& col = categorical_.at(name);
                std::vector<std::string> v;
                for (std::size_t i = 0; i < keep.size(); ++i)
                    if (keep[i]) v.push_back(col[i]);
                out.add_categorical(name, std::move(v));
            }
        }
        return out;
    }

  private:
    void check_length(std::size_t len) {
        if (order_.empty()) {
            n_rows_ = len;
        } else if (len != n_rows_) {
            throw input_error("column length mismatch");
        }
    }

    std::size_t n_rows_ = 0;
    std::vector<std::string> order_;
    std::map<std::string, std::vector<double>> numeric_;
    std::map<std::string, std::vector<std::string>> categorical_;
};

// ---------------------------------------------------------------------------
// Regression

struct DesignSpec {
    std::string response;
    std::vector<std::string> numeric_terms;
    std::vector<std::string> fe_terms;  // categoricals, dummy-encoded with one level dropped
    bool intercept = true;
};

struct RegressionResult {
    std::vector<std::string> term_names;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd t_stats;
    Eigen::VectorXd p_values;
    double r2 = 0, adj_r2 = 0, residual_std_error = 0, f_stat = 0, f_p_value = 1;
    long n_obs = 0, df_resid = 0;
    Eigen::VectorXd fitted;
    std::vector<std::string> warnings;
};

namespace detail {

// Regularized incomplete beta function I_x(a, b), by Lentz's continued
// fraction. Accurate to ~1e-14 for the degrees of freedom used here.
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double incbeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of a t statistic with df degrees of freedom.
inline double t_pvalue(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    return incbeta(df / 2.0, 0.5, df / (df + t * t));
}

// P(F > f) for an F statistic with (d1, d2) degrees of freedom.
inline double f_survival(double f, double d1, double d2) {
    if (!(f > 0.0)) return 1.0;
    return incbeta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

inline std::vector<std::string> sorted_levels(const std::vector<std::string>& col) {
    std::vector<std::string> levels(col);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    return levels;
}

}  // namespace detail

// Ordinary least squares via column-pivoted Householder QR, with classical
// standard errors. Fixed-effect categoricals are expanded into dummies with
// one reference level dropped (the lexicographically first by default; a
// different reference can be forced per term through `drop_levels`).
// Single-level categoricals are dropped entirely with a warning.
inline RegressionResult ols_fit(const Table& table, const DesignSpec& spec,
                                const std::map<std::string, std::string>& drop_levels = {}) {
    const std::size_t n = table.n_rows();
    const auto& y_col = table.numeric(spec.response);

    std::vector<std::string> names;
    std::vector<const std::vector<double>*> numeric_cols;
    if (spec.intercept) names.push_back("(Intercept)");
    for (const auto& term : spec.numeric_terms) {
        numeric_cols.push_back(&table.numeric(term));
        names.push_back(term);
    }

    RegressionResult result;
    struct DummySpec {
        const std::vector<std::string>* col;
        std::string level;
    };
    std::vector<DummySpec> dummies;
    for (const auto& term : spec.fe_terms) {
        const auto& col = table.categorical(term);
        auto levels = detail::sorted_levels(col);
        if (levels.size() < 2) {
            result.warnings.push_back("fixed effect '" + term + "' has a single level; dropped");
            continue;
        }
        std::string dropped = levels.front();
        if (auto it = drop_levels.find(term); it != drop_levels.end()) dropped = it->second;
        for (const auto& level : levels) {
            if (level == dropped) continue;
            dummies.push_back({&col, level});
            names.push_back(term + "[" + level + "]");
        }
    }

    const std::size_t p = names.size();
    if (n <= p) throw input_error("not enough observations: n_obs <= n_params");

    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = 0;
        if (spec.intercept) x(i, j++) = 1.0;
        for (const auto* col : numeric_cols) x(i, j++) = (*col)[i];
        for (const auto& dummy : dummies) x(i, j++) = ((*dummy.col)[i] == dummy.level) ? 1.0 : 0.0;
        y[i] = y_col[i];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    const auto rank = static_cast<std::size_t>(qr.rank());
    if (rank < p) {
        const auto& perm = qr.colsPermutation().indices();
        std::vector<std::string> collinear;
        for (std::size_t k = rank; k < p; ++k) collinear.push_back(names[static_cast<std::size_t>(perm[k])]);
        std::sort(collinear.begin(), collinear.end());
        std::string msg = "design matrix is rank deficient; collinear columns:";
        for (const auto& name : collinear) msg += " " + name;
        throw input_error(msg);
    }

    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd fitted = x * beta;
    const Eigen::VectorXd resid = y - fitted;
    const double ssr = resid.squaredNorm();
    const double sst = spec.intercept ? (y.array() - y.mean()).matrix().squaredNorm() : y.squaredNorm();
    const long df_resid = static_cast<long>(n) - static_cast<long>(p);
    const double sigma2 = ssr / static_cast<double>(df_resid);

    // (X'X)^-1 = P R^-1 R^-T P' from the pivoted QR factorization X P = Q R.
    const Eigen::MatrixXd r_full = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv = r_full.inverse();
    Eigen::MatrixXd xtx_inv = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    xtx_inv = perm * xtx_inv * perm.transpose();

    result.term_names = names;
    result.coefficients = beta;
    result.fitted = fitted;
    result.n_obs = static_cast<long>(n);
    result.df_resid = df_resid;
    result.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;
    const double k_terms = static_cast<double>(p) - (spec.intercept ? 1.0 : 0.0);
    result.adj_r2 =
        1.0 - (1.0 - result.r2) * (static_cast<double>(n) - (spec.intercept ? 1.0 : 0.0)) /
                  static_cast<double>(df_resid);
    result.residual_std_error = std::sqrt(sigma2);
    result.std_errors = (sigma2 * xtx_inv.diagonal().array()).sqrt();
    result.t_stats = beta.array() / result.std_errors.array();
    result.p_values.resize(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) {
        result.p_values[static_cast<Eigen::Index>(j)] =
            detail::t_pvalue(result.t_stats[static_cast<Eigen::Index>(j)], static_cast<double>(df_resid));
    }
    if (k_terms > 0 && sst > ssr) {
        result.f_stat = ((sst - ssr) / k_terms) / sigma2;
        result.f_p_value = detail::f_survival(result.f_stat, k_terms, static_cast<double>(df_resid));
    } else if (k_terms > 0) {
        result.f_stat = 0.0;
        result.f_p_value = 1.0;
    }
    return result;
}

// Market-boundary specification: minimum market distance against product
// complexity, pairwise-difference controls and ward/industry fixed effects.
// `include_deltas` switches between the two reported variants (without and
// with the delta-ECI and delta-diversity terms).
inline DesignSpec spec_market_boundary(const Table& table, bool include_deltas,
                                       std::vector<std::string>* warnings = nullptr) {
    DesignSpec spec;
    spec.response = "dist_km";
    (void)table.numeric("dist_km");
    (void)table.numeric("pci");
    spec.numeric_terms.push_back("pci");
    if (include_deltas) {
        (void)table.numeric("d_eci");
        (void)table.numeric("d_diversity");
        spec.numeric_terms.push_back("d_eci");
        spec.numeric_terms.push_back("d_diversity");
    }
    for (const char* control : {"d_labor_k", "d_float_k", "d_resi_k", "d_land_price"}) {
        if (table.has_numeric(control)) {
            spec.numeric_terms.push_back(control);
        } else if (warnings) {
            warnings->push_back(std::string("control '") + control + "' not available; omitted");
        }
    }
    for (const char* fe : {"ward", "industry"}) {
        if (table.has_categorical(fe)) spec.fe_terms.push_back(fe);
    }
    return spec;
}

// Consumer-travel specification: travel distance against product complexity,
// purchase count (variant), gender, and age/ward/industry fixed effects.
inline DesignSpec spec_consumer(const Table& table, bool include_count,
                                std::vector<std::string>* warnings = nullptr) {
    (void)warnings;
    DesignSpec spec;
    spec.response = "dist_km";
    (void)table.numeric("dist_km");
    (void)table.numeric("pci");
    (void)table.numeric("female");
    spec.numeric_terms.push_back("pci");
    if (include_count) {
        (void)table.numeric("count");
        spec.numeric_terms.push_back("count");
    }
    spec.numeric_terms.push_back("female");
    for (const char* fe : {"age_group", "ward", "industry"}) {
        if (table.has_categorical(fe)) spec.fe_terms.push_back(fe);
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Correlations

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw input_error("pearson: length mismatch");
    if (x.size() < 3) throw input_error("pearson: need at least 3 observations");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw input_error("pearson: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

// Point-biserial correlation between a 0/1 class indicator and a continuous
// variable; algebraically identical to pearson on the encoded vector.
inline double point_biserial(const std::vector<double>& binary, const std::vector<double>& y) {
    if (binary.size() != y.size()) throw input_error("point_biserial: length mismatch");
    double n1 = 0, n0 = 0, m1 = 0, m0 = 0;
    for (std::size_t i = 0; i < binary.size(); ++i) {
        if (binary[i] == 1.0) {
            n1 += 1;
            m1 += y[i];
        } else if (binary[i] == 0.0) {
            n0 += 1;
            m0 += y[i];
        } else {
            throw input_error("point_biserial: indicator must be 0 or 1");
        }
    }
    if (n1 == 0 || n0 == 0) throw input_error("point_biserial: single-class input");
    m1 /= n1;
    m0 /= n0;
    const double n = n1 + n0;
    double mean = 0;
    for (double v : y) mean += v;
    mean /= n;
    double ss = 0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / n);  // population standard deviation
    if (sd == 0.0) throw input_error("point_biserial: zero variance");
    return (m1 - m0) / sd * std::sqrt(n1 * n0 / (n * n));
}

// Average ranks (1-based, ties share the mean rank).
inline std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (v[a] != v[b]) return v[a] < v[b];
        return a < b;
    });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(average_ranks(x), average_ranks(y));
}

// ---------------------------------------------------------------------------
// Tiers and rank contingency

// Balanced tier split by score rank (tier 0 holds the highest scores); ties
// broken by cluster id. Tier sizes differ by at most one, with the extras in
// the leading tiers.
inline std::vector<int> eci_tiers(const std::vector<double>& eci, const std::vector<int>& cluster_ids,
                                  int n_tiers = 3) {
    if (eci.size() != cluster_ids.size()) throw input_error("eci_tiers: length mismatch");
    if (n_tiers < 1 || static_cast<std::size_t>(n_tiers) > eci.size()) {
        throw input_error("eci_tiers: tier count exceeds cluster count");
    }
    std::vector<std::size_t> idx(eci.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (eci[a] != eci[b]) return eci[a] > eci[b];
        return cluster_ids[a] < cluster_ids[b];
    });
    const std::size_t n = eci.size();
    const std::size_t base = n / static_cast<std::size_t>(n_tiers);
    const std::size_t extra = n % static_cast<std::size_t>(n_tiers);
    std::vector<int> tiers(n);
    std::size_t pos = 0;
    for (int t = 0; t < n_tiers; ++t) {
        const std::size_t size = base + (static_cast<std::size_t>(t) < extra ? 1 : 0);
        for (std::size_t k = 0; k < size; ++k) tiers[idx[pos++]] = t;
    }
    return tiers;
}

inline std::string tier_label(int tier, int n_tiers) {
    if (n_tiers == 3) {
        switch (tier) {
            case 0: return "High";
            case 1: return "Intermediate";
            case 2: return "Low";
            default: break;
        }
    }
    return "T" + std::to_string(tier);
}

struct ContingencyMatrix {
    int n_bins = 0;
    Eigen::MatrixXd density;  // [cluster bin][product bin], each cell in [0, 1]
    std::string x_axis, y_axis;
};

// Bin clusters by x-score rank and products by y-score rank (bin 0 = lowest
// scores, populations balanced within one) and report the fill density of M
// within each block.
inline ContingencyMatrix rank_contingency(const std::vector<double>& x_scores,
                                          const std::vector<double>& y_scores,
                                          const IncidenceMatrix& inc, int n_bins,
                                          std::string x_axis = "x_rank", std::string y_axis = "y_rank") {
    const std::size_t nc = static_cast<std::size_t>(inc.m.rows());
    const std::size_t np = static_cast<std::size_t>(inc.m.cols());
    if (x_scores.size() != nc || y_scores.size() != np) throw input_error("rank_contingency: length mismatch");
    if (n_bins < 2) throw input_error("rank_contingency: need at least 2 bins");
    if (static_cast<std::size_t>(n_bins) > nc || static_cast<std::size_t>(n_bins) > np) {
        throw input_error("rank_contingency: bin count exceeds cluster or product count");
    }

    auto assign_bins = [n_bins](const std::vector<double>& scores) {
        std::vector<std::size_t> idx(scores.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] < scores[b];
            return a < b;
        });
        const std::size_t n = scores.size();
        const std::size_t base = n / static_cast<std::size_t>(n_bins);
        const std::size_t extra = n % static_cast<std::size_t>(n_bins);
        std::vector<int> bins(n);
        std::size_t pos = 0;
        for (int b = 0; b < n_bins; ++b) {
            const std::size_t size = base + (static_cast<std::size_t>(b) < extra ? 1 : 0);
            for (std::size_t k = 0; k < size; ++k) bins[idx[pos++]] = b;
        }
        return bins;
    };

    const auto cluster_bins = assign_bins(x_scores);
    const auto product_bins = assign_bins(y_scores);

    ContingencyMatrix out;
    out.n_bins = n_bins;
    out.x_axis = std::move(x_axis);
    out.y_axis = std::move(y_axis);
    out.density = Eigen::MatrixXd::Zero(n_bins, n_bins);
    Eigen::MatrixXd cells = Eigen::MatrixXd::Zero(n_bins, n_bins);
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t p = 0; p < np; ++p) {
            out.density(cluster_bins[c], product_bins[p]) +=
                inc.m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(p));
            cells(cluster_bins[c], product_bins[p]) += 1.0;
        }
    }
    out.density.array() /= cells.array();
    return out;
}

// ---------------------------------------------------------------------------
// Report formatting (layout follows the familiar stargazer-style table)

namespace detail {

inline std::string stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

inline std::string fixed3(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    os << v;
    return os.str();
}

}  // namespace detail

// Plain-text regression table: one column per fitted model, coefficients
// with significance stars and standard errors in parentheses, fixed-effect
// check rows, and the usual fit-statistics footer.
inline std::string format_regression_report(
    const std::vector<std::pair<std::string, RegressionResult>>& models, const std::string& title) {
    std::vector<std::string> coef_terms;
    std::set<std::string> fe_groups;
    for (const auto& [name, model] : models) {
        for (const auto& term : model.term_names) {
            const auto bracket = term.find('[');
            if (bracket != std::string::npos) {
                fe_groups.insert(term.substr(0, bracket));
            } else if (std::find(coef_terms.begin(), coef_terms.end(), term) == coef_terms.end()) {
                coef_terms.push_back(term);
            }
        }
    }

    const std::size_t width = 22;
    auto pad = [&](const std::string& s) {
        return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
    };
    std::ostringstream os;
    os << title << "\n";
    os << std::string(32 + width * models.size(), '=') << "\n";
    os << pad("term") << "            ";
    for (std::size_t k = 0; k < models.size(); ++k) os << pad("(" + std::to_string(k + 1) + ") " + models[k].first);
    os << "\n" << std::string(32 + width * models.size(), '-') << "\n";

    auto find_term = [](const RegressionResult& model, const std::string& term) -> int {
        for (std::size_t j = 0; j < model.term_names.size(); ++j) {
            if (model.term_names[j] == term) return static_cast<int>(j);
        }
        return -1;
    };

    for (const auto& term : coef_terms) {
        os << pad(term) << "            ";
        for (const auto& [name, model] : models) {
            const int j = find_term(model, term);
            os << pad(j < 0 ? ""
                            : detail::fixed3(model.coefficients[j]) + detail::stars(model.p_values[j]));
        }
        os << "\n" << pad("") << "            ";
        for (const auto& [name, model] : models) {
            const int j = find_term(model, term);
            os << pad(j < 0 ? "" : "(" + detail::fixed3(model.std_errors[j]) + ")");
        }
        os << "\n";
    }
    for (const auto& group : fe_groups) {
        os << pad("FE: " + group) << "            ";
        for (const auto& [name, model] : models) {
            bool present = false;
            for (const auto& term : model.term_names) {
                if (term.rfind(group + "[", 0) == 0) present = true;
            }
            os << pad(present ? "yes" : "");
        }
        os << "\n";
    }
    os << std::string(32 + width * models.size(), '-') << "\n";
    os << pad("Observations") << "            ";
    for (const auto& [name, model] : models) os << pad(std::to_string(model.n_obs));
    os << "\n" << pad("R2") << "            ";
    for (const auto& [name, model] : models) os << pad(detail::fixed3(model.r2));
    os << "\n" << pad("Adjusted R2") << "            ";
    for (const auto& [name, model] : models) os << pad(detail::fixed3(model.adj_r2));
    os << "\n" << pad("Residual Std. Error") << "            ";
    for (const auto& [name, model] : models) os << pad(detail::fixed3(model.residual_std_error));
    os << "\n" << pad("F Statistic") << "            ";
    for (const auto& [name, model] : models)
        os << pad(detail::fixed3(model.f_stat) + detail::stars(model.f_p_value));
    os << "\n" << std::string(32 + width * models.size(), '=') << "\n";
    os << "Note: *p<0.1; **p<0.05; ***p<0.01\n";
    return os.str();
}

}  // namespace urbc
