#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "urbc/econometrics.hpp"
#include "urbc/rng.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent oracle: solve the normal equations X'X b = X'y by Gaussian
// elimination with partial pivoting, no QR involved.
Eigen::VectorXd normal_equations_oracle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::MatrixXd a = x.transpose() * x;
    const Eigen::VectorXd b = x.transpose() * y;
    const auto n = a.rows();
    Eigen::MatrixXd aug(n, n + 1);
    aug << a, b;
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index pivot = col;
        for (Eigen::Index r = col + 1; r < n; ++r) {
            if (std::fabs(aug(r, col)) > std::fabs(aug(pivot, col))) pivot = r;
        }
        aug.row(col).swap(aug.row(pivot));
        for (Eigen::Index r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = aug(r, col) / aug(col, col);
            aug.row(r) -= f * aug.row(col);
        }
    }
    Eigen::VectorXd solution(n);
    for (Eigen::Index i = 0; i < n; ++i) solution[i] = aug(i, n) / aug(i, i);
    return solution;
}

urbc::Table two_column_table(const std::vector<double>& x, const std::vector<double>& y) {
    urbc::Table t;
    t.add_numeric("y", y);
    t.add_numeric("x", x);
    return t;
}

}  // namespace

TEST_CASE("ols recovers an exact linear relation") {
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) {
        x.push_back(i);
        y.push_back(2.0 * i + 1.0);
    }
    urbc::DesignSpec spec{"y", {"x"}, {}, true};
    const auto fit = urbc::ols_fit(two_column_table(x, y), spec);
    REQUIRE_THAT(fit.coefficients[0], WithinAbs(1.0, 1e-10));  // intercept
    REQUIRE_THAT(fit.coefficients[1], WithinAbs(2.0, 1e-10));
    REQUIRE_THAT(fit.r2, WithinAbs(1.0, 1e-12));
    REQUIRE(fit.n_obs == 10);
    REQUIRE(fit.df_resid == 8);
}

TEST_CASE("ols with noise matches the normal-equations oracle") {
    urbc::Rng rng(61);
    const int n = 1000;
    std::vector<double> x, y;
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd response(n);
    for (int i = 0; i < n; ++i) {
        const double xv = rng.uniform(-2, 2);
        const double yv = xv + 0.1 * rng.normal();
        x.push_back(xv);
        y.push_back(yv);
        design(i, 0) = 1.0;
        design(i, 1) = xv;
        response[i] = yv;
    }
    urbc::DesignSpec spec{"y", {"x"}, {}, true};
    const auto fit = urbc::ols_fit(two_column_table(x, y), spec);
    REQUIRE_THAT(fit.coefficients[1], WithinAbs(1.0, 0.02));

    const auto oracle = normal_equations_oracle(design, response);
    REQUIRE_THAT(fit.coefficients[0], WithinAbs(oracle[0], 1e-8));
    REQUIRE_THAT(fit.coefficients[1], WithinRel(oracle[1], 1e-8));

    // R^2 equals 1 - SSR/SST computed independently.
    double ssr = 0, sst = 0, mean = 0;
    for (double v : y) mean += v;
    mean /= n;
    for (int i = 0; i < n; ++i) {
        const double fitted = oracle[0] + oracle[1] * x[static_cast<std::size_t>(i)];
        ssr += (y[static_cast<std::size_t>(i)] - fitted) * (y[static_cast<std::size_t>(i)] - fitted);
        sst += (y[static_cast<std::size_t>(i)] - mean) * (y[static_cast<std::size_t>(i)] - mean);
    }
    REQUIRE_THAT(fit.r2, WithinAbs(1.0 - ssr / sst, 1e-12));
}

TEST_CASE("planted coefficients with fixed effects are recovered within 3 SE") {
    urbc::Rng rng(62);
    const int n = 4000;
    std::vector<double> pci, y;
    std::vector<std::string> ward, industry;
    std::vector<double> ward_fx(25), industry_fx(9);
    for (auto& v : ward_fx) v = rng.normal();
    for (auto& v : industry_fx) v = rng.normal();
    for (int i = 0; i < n; ++i) {
        const int w = static_cast<int>(rng.uniform_index(25));
        const int s = static_cast<int>(rng.uniform_index(9));
        const double p = rng.uniform();
        pci.push_back(p);
        ward.push_back("W" + std::to_string(w));
        industry.push_back("I" + std::to_string(s));
        y.push_back(0.5 + 2.0 * p + ward_fx[static_cast<std::size_t>(w)] +
                    industry_fx[static_cast<std::size_t>(s)] + 0.3 * rng.normal());
    }
    urbc::Table t;
    t.add_numeric("y", y);
    t.add_numeric("pci", pci);
    t.add_categorical("ward", ward);
    t.add_categorical("industry", industry);
    urbc::DesignSpec spec{"y", {"pci"}, {"ward", "industry"}, true};
    const auto fit = urbc::ols_fit(t, spec);
    REQUIRE(std::fabs(fit.coefficients[1] - 2.0) <= 3.0 * fit.std_errors[1]);
    REQUIRE(fit.p_values[1] < 0.01);
}

TEST_CASE("rank deficiency is reported with the offending columns") {
    std::vector<double> x = {1, 2, 3, 4, 5, 6};
    std::vector<double> y = {2, 4, 6, 8, 10, 12};
    urbc::Table t;
    t.add_numeric("y", y);
    t.add_numeric("x", x);
    t.add_numeric("x_twin", x);
    urbc::DesignSpec spec{"y", {"x", "x_twin"}, {}, true};
    REQUIRE_THROWS_WITH(urbc::ols_fit(t, spec),
                        Catch::Matchers::ContainsSubstring("rank deficient") &&
                            Catch::Matchers::ContainsSubstring("x"));
}

TEST_CASE("too few observations is an error") {
    urbc::Table t;
    t.add_numeric("y", {1.0, 2.0});
    t.add_numeric("x", {1.0, 2.0});
    urbc::DesignSpec spec{"y", {"x"}, {}, true};
    REQUIRE_THROWS_AS(urbc::ols_fit(t, spec), urbc::input_error);
}

TEST_CASE("changing the dropped dummy level changes neither fit nor slope") {
    urbc::Rng rng(63);
    const int n = 300;
    std::vector<double> x, y;
    std::vector<std::string> group;
    const std::vector<double> fx = {0.0, 1.5, -0.7};
    for (int i = 0; i < n; ++i) {
        const int g = static_cast<int>(rng.uniform_index(3));
        const double xv = rng.uniform(-1, 1);
        x.push_back(xv);
        group.push_back("G" + std::to_string(g));
        y.push_back(1.0 + 0.8 * xv + fx[static_cast<std::size_t>(g)] + 0.2 * rng.normal());
    }
    urbc::Table t;
    t.add_numeric("y", y);
    t.add_numeric("x", x);
    t.add_categorical("group", group);
    urbc::DesignSpec spec{"y", {"x"}, {"group"}, true};
    const auto a = urbc::ols_fit(t, spec);
    const auto b = urbc::ols_fit(t, spec, {{"group", "G2"}});
    REQUIRE((a.fitted - b.fitted).cwiseAbs().maxCoeff() < 1e-9);
    REQUIRE_THAT(a.coefficients[1], WithinAbs(b.coefficients[1], 1e-9));  // x slope
}

TEST_CASE("market spec omits missing controls and single-level FE warns in fit") {
    urbc::Table t;
    t.add_numeric("dist_km", {1.0, 2.0, 1.5, 2.5, 1.2, 2.2});
    t.add_numeric("pci", {0.1, 0.9, 0.4, 0.8, 0.2, 0.7});
    t.add_numeric("d_eci", {0.1, 0.2, 0.1, 0.3, 0.2, 0.1});
    t.add_numeric("d_diversity", {1, 2, 2, 3, 1, 2});
    t.add_categorical("ward", {"W1", "W1", "W1", "W1", "W1", "W1"});
    t.add_categorical("industry", {"A", "B", "A", "B", "A", "B"});

    std::vector<std::string> notes;
    const auto spec = urbc::spec_market_boundary(t, true, &notes);
    REQUIRE(spec.numeric_terms == std::vector<std::string>{"pci", "d_eci", "d_diversity"});
    REQUIRE(notes.size() == 4);  // the four absent controls

    const auto fit = urbc::ols_fit(t, spec);
    bool warned = false;
    for (const auto& w : fit.warnings) warned = warned || w.find("ward") != std::string::npos;
    REQUIRE(warned);  // one-ward dataset: FE dropped with a warning
    for (const auto& term : fit.term_names) REQUIRE(term.rfind("ward", 0) != 0);
}

TEST_CASE("missing required column is named") {
    urbc::Table t;
    t.add_numeric("dist_km", {1.0, 2.0, 3.0});
    REQUIRE_THROWS_WITH(urbc::spec_market_boundary(t, false),
                        Catch::Matchers::ContainsSubstring("pci"));
}

TEST_CASE("all-male consumer data makes the gender indicator collinear") {
    urbc::Rng rng(64);
    urbc::Table t;
    std::vector<double> dist, pci, count, female;
    for (int i = 0; i < 40; ++i) {
        dist.push_back(rng.uniform(0, 5));
        pci.push_back(rng.uniform());
        count.push_back(1 + static_cast<double>(rng.uniform_index(4)));
        female.push_back(0.0);
    }
    t.add_numeric("dist_km", dist);
    t.add_numeric("pci", pci);
    t.add_numeric("count", count);
    t.add_numeric("female", female);
    const auto spec = urbc::spec_consumer(t, true);
    REQUIRE_THROWS_WITH(urbc::ols_fit(t, spec), Catch::Matchers::ContainsSubstring("female"));
}

TEST_CASE("pearson on exact and seeded relations") {
    std::vector<double> x, y_pos, y_neg;
    for (int i = 0; i < 20; ++i) {
        x.push_back(i);
        y_pos.push_back(i);
        y_neg.push_back(-static_cast<double>(i));
    }
    REQUIRE_THAT(urbc::pearson(x, y_pos), WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(urbc::pearson(x, y_neg), WithinAbs(-1.0, 1e-12));

    urbc::Rng rng(65);
    std::vector<double> a, b;
    const double rho = 0.5;
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.normal();
        const double v = rho * u + std::sqrt(1 - rho * rho) * rng.normal();
        a.push_back(u);
        b.push_back(v);
    }
    REQUIRE_THAT(urbc::pearson(a, b), WithinAbs(0.5, 0.03));

    std::vector<double> constant(20, 3.0);
    REQUIRE_THROWS_AS(urbc::pearson(x, constant), urbc::input_error);
}

TEST_CASE("pearson is invariant under positive affine transforms") {
    urbc::Rng rng(66);
    std::vector<double> x, y, xs, ys;
    for (int i = 0; i < 200; ++i) {
        x.push_back(rng.normal());
        y.push_back(rng.normal() + 0.4 * x.back());
        xs.push_back(3.5 * x.back() + 11.0);
        ys.push_back(0.25 * y.back() - 7.0);
    }
    REQUIRE_THAT(urbc::pearson(xs, ys), WithinAbs(urbc::pearson(x, y), 1e-12));
}

TEST_CASE("point-biserial equals pearson on the indicator") {
    urbc::Rng rng(67);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> binary, y;
        for (int i = 0; i < 100; ++i) {
            binary.push_back(rng.uniform_index(2) ? 1.0 : 0.0);
            y.push_back(rng.normal() + binary.back());
        }
        if (std::count(binary.begin(), binary.end(), 1.0) == 0 ||
            std::count(binary.begin(), binary.end(), 0.0) == 0) {
            continue;
        }
        REQUIRE_THAT(urbc::point_biserial(binary, y), WithinAbs(urbc::pearson(binary, y), 1e-12));
    }
}

TEST_CASE("point-biserial edge cases") {
    // Identical class means: zero correlation.
    REQUIRE_THAT(urbc::point_biserial({0, 1, 0, 1}, {2, 2, 5, 5}), WithinAbs(0.0, 1e-12));
    // Perfectly separated balanced classes: one.
    REQUIRE_THAT(urbc::point_biserial({0, 0, 1, 1}, {0, 0, 1, 1}), WithinAbs(1.0, 1e-12));
    REQUIRE_THROWS_AS(urbc::point_biserial({1, 1, 1}, {1, 2, 3}), urbc::input_error);
    REQUIRE_THROWS_AS(urbc::point_biserial({0, 0.5, 1}, {1, 2, 3}), urbc::input_error);
}

TEST_CASE("spearman handles ties and monotone transforms") {
    const std::vector<double> x = {1, 2, 3, 4, 5, 6};
    const std::vector<double> y = {1, 4, 9, 16, 25, 36};
    REQUIRE_THAT(urbc::spearman(x, y), WithinAbs(1.0, 1e-12));
    const std::vector<double> tied_x = {0, 1, 1, 2};
    const std::vector<double> tied_y = {0, 1, 1, 2};
    REQUIRE_THAT(urbc::spearman(tied_x, tied_y), WithinAbs(1.0, 1e-12));
}

TEST_CASE("t and F tail probabilities match reference values") {
    REQUIRE_THAT(urbc::detail::t_pvalue(2.0, 10), WithinAbs(0.07338803477074039, 1e-10));
    REQUIRE_THAT(urbc::detail::t_pvalue(2.5, 3), WithinAbs(0.08770664700806555, 1e-10));
    REQUIRE_THAT(urbc::detail::t_pvalue(1.0, 30), WithinAbs(0.32530861542602985, 1e-10));
    REQUIRE_THAT(urbc::detail::t_pvalue(3.2, 200), WithinAbs(0.0015983537414301398, 1e-10));
    REQUIRE_THAT(urbc::detail::t_pvalue(1.96, 5000), WithinAbs(0.05005125229181952, 1e-10));
    REQUIRE_THAT(urbc::detail::f_survival(4.0, 3, 20), WithinAbs(0.022076999662362443, 1e-10));
}

TEST_CASE("tier split is balanced and rank ordered") {
    const std::vector<double> three = {0.2, 0.9, 0.5};
    const std::vector<int> ids3 = {0, 1, 2};
    REQUIRE(urbc::eci_tiers(three, ids3) == std::vector<int>{2, 0, 1});

    std::vector<double> six = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    const std::vector<int> ids6 = {0, 1, 2, 3, 4, 5};
    const auto tiers6 = urbc::eci_tiers(six, ids6);
    REQUIRE(std::count(tiers6.begin(), tiers6.end(), 0) == 2);
    REQUIRE(std::count(tiers6.begin(), tiers6.end(), 1) == 2);
    REQUIRE(std::count(tiers6.begin(), tiers6.end(), 2) == 2);

    std::vector<double> many;
    std::vector<int> ids;
    urbc::Rng rng(68);
    for (int i = 0; i < 523; ++i) {
        many.push_back(rng.uniform());
        ids.push_back(i);
    }
    const auto tiers = urbc::eci_tiers(many, ids);
    REQUIRE(std::count(tiers.begin(), tiers.end(), 0) == 175);
    REQUIRE(std::count(tiers.begin(), tiers.end(), 1) == 174);
    REQUIRE(std::count(tiers.begin(), tiers.end(), 2) == 174);

    // Ties break by cluster id.
    const auto tied = urbc::eci_tiers({0.5, 0.5, 0.5}, {7, 3, 5});
    REQUIRE(tied == std::vector<int>{2, 0, 1});
}

TEST_CASE("rank contingency on uniform and block incidence") {
    urbc::IncidenceMatrix ones;
    ones.m = Eigen::MatrixXd::Ones(4, 4);
    ones.rca = ones.m;
    ones.cluster_ids = {0, 1, 2, 3};
    ones.product_codes = {"a", "b", "c", "d"};
    const auto cm = urbc::rank_contingency({0.1, 0.2, 0.3, 0.4}, {0.1, 0.2, 0.3, 0.4}, ones, 2);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) REQUIRE(cm.density(a, b) == 1.0);
    }

    urbc::IncidenceMatrix blocks;
    blocks.m = Eigen::MatrixXd::Zero(4, 4);
    blocks.m.topLeftCorner(2, 2).setOnes();
    blocks.m.bottomRightCorner(2, 2).setOnes();
    blocks.rca = blocks.m;
    blocks.cluster_ids = {0, 1, 2, 3};
    blocks.product_codes = {"a", "b", "c", "d"};
    // Scores aligned with the blocks: the low-score block maps to bin 0.
    const auto cb = urbc::rank_contingency({0.1, 0.2, 0.8, 0.9}, {0.1, 0.2, 0.8, 0.9}, blocks, 2);
    REQUIRE(cb.density(0, 0) == 1.0);
    REQUIRE(cb.density(1, 1) == 1.0);
    REQUIRE(cb.density(0, 1) == 0.0);
    REQUIRE(cb.density(1, 0) == 0.0);

    REQUIRE_THROWS_AS(urbc::rank_contingency({0.1, 0.2, 0.3, 0.4}, {0.1, 0.2, 0.3, 0.4}, ones, 5),
                      urbc::input_error);
}

TEST_CASE("nested incidence yields row-wise monotone contingency density") {
    const int n = 20;
    urbc::IncidenceMatrix inc;
    inc.m = Eigen::MatrixXd::Zero(n, n);
    for (int c = 0; c < n; ++c) {
        for (int p = 0; p + c < n; ++p) inc.m(c, p) = 1.0;
    }
    inc.rca = inc.m;
    std::vector<double> eci, pci;
    for (int c = 0; c < n; ++c) {
        inc.cluster_ids.push_back(c);
        inc.product_codes.push_back("P" + std::to_string(c));
        eci.push_back(static_cast<double>(n - c));  // diversity order
        pci.push_back(static_cast<double>(c));      // rarity order
    }
    const auto cm = urbc::rank_contingency(eci, pci, inc, 5);
    for (int a = 0; a < 5; ++a) {
        for (int b = 0; b + 1 < 5; ++b) {
            REQUIRE(cm.density(a, b) >= cm.density(a, b + 1) - 1e-12);
        }
    }
}

TEST_CASE("report formatting carries coefficients, stars and footer") {
    std::vector<double> x, y;
    urbc::Rng rng(69);
    for (int i = 0; i < 200; ++i) {
        x.push_back(rng.uniform(-1, 1));
        y.push_back(3.0 * x.back() + 0.1 * rng.normal());
    }
    urbc::Table t;
    t.add_numeric("y", y);
    t.add_numeric("pci", x);
    urbc::DesignSpec spec{"y", {"pci"}, {}, true};
    const auto fit = urbc::ols_fit(t, spec);
    const auto report = urbc::format_regression_report({{"market", fit}}, "Example");
    REQUIRE(report.find("pci") != std::string::npos);
    REQUIRE(report.find("***") != std::string::npos);
    REQUIRE(report.find("Observations") != std::string::npos);
    REQUIRE(report.find("Adjusted R2") != std::string::npos);
    REQUIRE(report.find("Residual Std. Error") != std::string::npos);
    REQUIRE(report.find("F Statistic") != std::string::npos);
}
