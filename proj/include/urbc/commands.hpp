#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "urbc/cluster.hpp"
#include "urbc/complexity.hpp"
#include "urbc/csv.hpp"
#include "urbc/econometrics.hpp"
#include "urbc/errors.hpp"
#include "urbc/geojson.hpp"
#include "urbc/ingest.hpp"
#include "urbc/market.hpp"
#include "urbc/synth.hpp"

namespace urbc {

struct RunConfig {
    std::string out_dir = "out";
    std::string shops_path;       // defaults to <out_dir>/shops.csv
    std::string card_path;        // optional; defaults to <out_dir>/card.csv when present
    std::string population_path;  // optional; defaults to <out_dir>/population.csv when present
    std::string land_price_path;  // optional; defaults to <out_dir>/land_price.csv when present

    ClusterParams cluster;
    double point_slack_m = 100;

    std::string method = "reflections";  // or "eigen"
    int max_iter = 200;

    bool per_product = false;  // collapse market distances to one row per product
    int n_bins = 10;
    int n_tiers = 3;
    std::uint64_t seed = 1;

    // synth
    std::string synth_kind = "christaller";  // or "blobs"
    ChristallerConfig christaller;
    int blobs_n = 3;
    int blobs_shops = 100;
    double blobs_sigma_m = 100;
    double blobs_spacing_km = 2;
    int blobs_products = 1;
    int groups_per_center = 2;
    std::string range_mode = "planted";  // "planted": (level+1)*scale; "constant": scale
    double range_scale_km = 1.0;
};

namespace cmd {

namespace fs = std::filesystem;

inline std::string resolved(const std::string& explicit_path, const std::string& out_dir,
                            const char* filename) {
    return explicit_path.empty() ? (fs::path(out_dir) / filename).string() : explicit_path;
}

inline std::string require_stage_file(const std::string& path, const char* producing_command) {
    if (!fs::exists(path)) {
        throw input_error("missing " + path + "; run the '" + producing_command + "' command first");
    }
    return path;
}

inline std::optional<std::string> optional_input(const std::string& explicit_path,
                                                 const std::string& out_dir, const char* filename) {
    if (!explicit_path.empty()) {
        if (!fs::exists(explicit_path)) throw input_error("cannot open file: " + explicit_path);
        return explicit_path;
    }
    const std::string candidate = (fs::path(out_dir) / filename).string();
    if (fs::exists(candidate)) return candidate;
    return std::nullopt;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const computation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

// --- stage artifact round trips ---------------------------------------------

inline void write_clusters(const std::string& dir, const ClusterResult& result) {
    CsvWriter clusters(dir + "/clusters.csv");
    clusters.row({"cluster_id", "center_lat", "center_lon", "radius_m", "n_shops", "effective_density"});
    for (const auto& c : result.clusters) {
        clusters.row({std::to_string(c.cluster_id), fmt_double(c.center.lat), fmt_double(c.center.lon),
                      fmt_double(c.radius_m), std::to_string(c.member_ids.size()),
                      fmt_double(c.effective_density)});
    }
    CsvWriter members(dir + "/memberships.csv");
    members.row({"shop_id", "cluster_id"});
    for (const auto& c : result.clusters) {
        for (const auto& id : c.member_ids) members.row({id, std::to_string(c.cluster_id)});
    }
    CsvWriter unassigned(dir + "/unassigned.csv");
    unassigned.row({"shop_id"});
    for (const auto& id : result.unassigned_ids) unassigned.row({id});
}

inline std::vector<AmenityCluster> read_clusters(const std::string& dir) {
    const auto csv = read_csv(require_stage_file(dir + "/clusters.csv", "cluster"));
    std::map<int, AmenityCluster> by_id;
    for (const auto& row : csv.rows) {
        AmenityCluster c;
        c.cluster_id = static_cast<int>(parse_int(row[0], "cluster_id"));
        c.center.lat = parse_double(row[1], "center_lat");
        c.center.lon = parse_double(row[2], "center_lon");
        c.radius_m = parse_double(row[3], "radius_m");
        c.effective_density = parse_double(row[5], "effective_density");
        by_id[c.cluster_id] = std::move(c);
    }
    const auto members = read_csv(require_stage_file(dir + "/memberships.csv", "cluster"));
    for (const auto& row : members.rows) {
        by_id.at(static_cast<int>(parse_int(row[1], "cluster_id"))).member_ids.push_back(row[0]);
    }
    std::vector<AmenityCluster> clusters;
    for (auto& [id, c] : by_id) {
        std::sort(c.member_ids.begin(), c.member_ids.end());
        clusters.push_back(std::move(c));
    }
    return clusters;
}

inline void write_scores(const std::string& dir, const ComplexityScores& scores,
                         const IncidenceMatrix& inc) {
    CsvWriter eci(dir + "/eci.csv");
    eci.row({"cluster_id", "eci_raw", "eci", "diversity"});
    for (std::size_t i = 0; i < scores.cluster_ids.size(); ++i) {
        const auto ix = static_cast<Eigen::Index>(i);
        eci.row({std::to_string(scores.cluster_ids[i]), fmt_double(scores.eci_raw[ix]),
                 fmt_double(scores.eci[ix]), std::to_string(scores.diversity[ix])});
    }
    const Eigen::VectorXd uniq = uniqueness(inc);
    CsvWriter pci(dir + "/pci.csv");
    pci.row({"product_code", "pci_raw", "pci", "ubiquity", "uniqueness"});
    for (std::size_t p = 0; p < scores.product_codes.size(); ++p) {
        const auto px = static_cast<Eigen::Index>(p);
        pci.row({scores.product_codes[p], fmt_double(scores.pci_raw[px]), fmt_double(scores.pci[px]),
                 std::to_string(scores.ubiquity[px]), fmt_double(uniq[px])});
    }
    CsvWriter incidence(dir + "/incidence.csv");
    incidence.row({"cluster_id", "product_code", "rca"});
    for (Eigen::Index c = 0; c < inc.m.rows(); ++c) {
        for (Eigen::Index p = 0; p < inc.m.cols(); ++p) {
            if (inc.m(c, p) >= 1.0) {
                incidence.row({std::to_string(inc.cluster_ids[static_cast<std::size_t>(c)]),
                               inc.product_codes[static_cast<std::size_t>(p)], fmt_double(inc.rca(c, p))});
            }
        }
    }
}

struct StoredScores {
    ComplexityScores scores;
    IncidenceMatrix incidence;  // rca holds values only where m = 1
};

inline StoredScores read_scores(const std::string& dir) {
    const auto eci_csv = read_csv(require_stage_file(dir + "/eci.csv", "complexity"));
    const auto pci_csv = read_csv(require_stage_file(dir + "/pci.csv", "complexity"));
    const auto inc_csv = read_csv(require_stage_file(dir + "/incidence.csv", "complexity"));

    StoredScores stored;
    auto& s = stored.scores;
    const auto nc = static_cast<Eigen::Index>(eci_csv.rows.size());
    const auto np = static_cast<Eigen::Index>(pci_csv.rows.size());
    s.eci_raw.resize(nc);
    s.eci.resize(nc);
    s.diversity.resize(nc);
    std::map<int, Eigen::Index> cluster_row;
    for (Eigen::Index i = 0; i < nc; ++i) {
        const auto& row = eci_csv.rows[static_cast<std::size_t>(i)];
        const int id = static_cast<int>(parse_int(row[0], "cluster_id"));
        s.cluster_ids.push_back(id);
        s.eci_raw[i] = parse_double(row[1], "eci_raw");
        s.eci[i] = parse_double(row[2], "eci");
        s.diversity[i] = static_cast<int>(parse_int(row[3], "diversity"));
        cluster_row[id] = i;
    }
    s.pci_raw.resize(np);
    s.pci.resize(np);
    s.ubiquity.resize(np);
    std::map<std::string, Eigen::Index> product_col;
    for (Eigen::Index p = 0; p < np; ++p) {
        const auto& row = pci_csv.rows[static_cast<std::size_t>(p)];
        s.product_codes.push_back(row[0]);
        s.pci_raw[p] = parse_double(row[1], "pci_raw");
        s.pci[p] = parse_double(row[2], "pci");
        s.ubiquity[p] = static_cast<int>(parse_int(row[3], "ubiquity"));
        product_col[row[0]] = p;
    }
    auto& inc = stored.incidence;
    inc.cluster_ids = s.cluster_ids;
    inc.product_codes = s.product_codes;
    inc.rca = Eigen::MatrixXd::Zero(nc, np);
    inc.m = Eigen::MatrixXd::Zero(nc, np);
    for (const auto& row : inc_csv.rows) {
        const auto c = cluster_row.at(static_cast<int>(parse_int(row[0], "cluster_id")));
        const auto p = product_col.at(row[1]);
        inc.rca(c, p) = parse_double(row[2], "rca");
        inc.m(c, p) = 1.0;
    }
    return stored;
}

inline std::vector<Shop> load_shops(const RunConfig& config) {
    const std::string path = resolved(config.shops_path, config.out_dir, "shops.csv");
    if (!fs::exists(path)) throw input_error("missing shops file: " + path);
    auto result = read_shops(path);
    if (result.n_rejected > 0) {
        std::cout << "rejected " << result.n_rejected << " malformed rows; see " << result.rejects_path
                  << "\n";
    }
    return std::move(result.shops);
}

}  // namespace cmd

// ---------------------------------------------------------------------------
// Subcommands. Each returns a process exit code: 0 ok, 1 input error,
// 2 computation error.

inline int cmd_synth(const RunConfig& config) {
    return cmd::guarded([&] {
        std::filesystem::create_directories(config.out_dir);
        SyntheticCity city;
        if (config.synth_kind == "christaller") {
            ChristallerConfig cfg = config.christaller;
            cfg.seed = config.seed;
            city = generate_christaller(cfg);
        } else if (config.synth_kind == "blobs") {
            city = generate_blobs(config.blobs_n, config.blobs_shops, config.blobs_sigma_m,
                                  config.blobs_spacing_km, config.blobs_products, config.seed);
        } else {
            throw input_error("unknown synth kind: " + config.synth_kind);
        }

        write_shops(config.out_dir + "/shops.csv", city.shops);

        const auto range_profile = [&](int level) {
            return config.range_mode == "constant" ? config.range_scale_km
                                                   : (level + 1) * config.range_scale_km;
        };
        if (config.range_mode != "constant" && config.range_mode != "planted") {
            throw input_error("unknown range mode: " + config.range_mode);
        }
        const auto groups = generate_consumers(city, config.groups_per_center, range_profile,
                                               config.seed + 1);
        write_card(config.out_dir + "/card.csv", to_card_records(groups, config.seed + 2));
        write_population(config.out_dir + "/population.csv",
                         generate_population_cells(city, config.seed + 3));

        CsvWriter product_levels(config.out_dir + "/product_levels.csv");
        product_levels.row({"product_code", "level"});
        for (const auto& [code, level] : city.product_level) {
            product_levels.row({code, std::to_string(level)});
        }
        CsvWriter centers(config.out_dir + "/centers.csv");
        centers.row({"center_lat", "center_lon", "level"});
        for (const auto& c : city.centers) {
            centers.row({fmt_double(c.point.lat), fmt_double(c.point.lon), std::to_string(c.level)});
        }

        std::cout << "synth: " << city.shops.size() << " shops, " << city.centers.size()
                  << " centers, " << city.products.size() << " products, " << groups.size()
                  << " consumer groups\n";
    });
}

inline int cmd_cluster(const RunConfig& config) {
    return cmd::guarded([&] {
        std::filesystem::create_directories(config.out_dir);
        const auto shops = cmd::load_shops(config);
        const auto result = detect_clusters(shops, config.cluster);
        cmd::write_clusters(config.out_dir, result);

        double mean_radius = 0;
        for (const auto& c : result.clusters) mean_radius += c.radius_m;
        if (!result.clusters.empty()) mean_radius /= static_cast<double>(result.clusters.size());
        std::cout << "cluster: " << result.clusters.size() << " clusters, mean radius "
                  << fmt_double(mean_radius) << " m, " << result.unassigned_ids.size()
                  << " unassigned shops\n";
    });
}

inline int cmd_complexity(const RunConfig& config) {
    return cmd::guarded([&] {
        const auto shops = cmd::load_shops(config);
        const auto clusters = cmd::read_clusters(config.out_dir);
        PruneLog prune;
        const auto counts = build_counts(shops, clusters, &prune);
        const auto incidence = compute_rca(counts);

        ComplexityScores scores;
        if (config.method == "reflections") {
            scores = method_of_reflections(incidence, config.max_iter);
        } else if (config.method == "eigen") {
            scores = eigen_complexity(incidence);
        } else {
            throw input_error("unknown complexity method: " + config.method);
        }
        cmd::write_scores(config.out_dir, scores, incidence);

        if (!prune.clusters.empty() || !prune.products.empty()) {
            std::cout << "complexity: pruned " << prune.clusters.size() << " empty clusters, "
                      << prune.products.size() << " empty products\n";
        }
        std::string agreement = "n/a";
        try {
            const auto other = config.method == "reflections" ? eigen_complexity(incidence)
                                                              : method_of_reflections(incidence, config.max_iter);
            std::vector<double> a(scores.eci_raw.data(), scores.eci_raw.data() + scores.eci_raw.size());
            std::vector<double> b(other.eci_raw.data(), other.eci_raw.data() + other.eci_raw.size());
            agreement = fmt_double(spearman(a, b));
        } catch (const std::exception&) {
        }
        std::cout << "complexity: " << scores.cluster_ids.size() << " clusters, "
                  << scores.product_codes.size() << " products, method " << config.method
                  << ", iterations " << scores.iterations << ", rank agreement (Spearman) "
                  << agreement << "\n";
    });
}

inline int cmd_market(const RunConfig& config) {
    return cmd::guarded([&] {
        const auto clusters = cmd::read_clusters(config.out_dir);
        const auto stored = cmd::read_scores(config.out_dir);
        const auto sets = market_sets(stored.incidence);
        std::vector<std::string> singles;
        const auto records = config.per_product
                                 ? min_market_distances_per_product(sets, clusters, &singles)
                                 : min_market_distances(sets, clusters, &singles);

        CsvWriter out(config.out_dir + "/market_distances.csv");
        out.row({"product_code", "cluster_a", "cluster_b", "distance_km"});
        for (const auto& rec : records) {
            out.row({rec.product_code, std::to_string(rec.cluster_a), std::to_string(rec.cluster_b),
                     fmt_double(rec.distance_km)});
        }

        const auto card_path = cmd::optional_input(config.card_path, config.out_dir, "card.csv");
        std::size_t n_travel = 0;
        if (card_path) {
            const auto cards = read_card(*card_path);
            CsvWriter travel(config.out_dir + "/travel_distances.csv");
            travel.row({"age_decade", "gender", "home_cell_lat", "home_cell_lon", "purchase_cell_lat",
                        "purchase_cell_lon", "product_code", "purchase_count", "distance_km"});
            for (const auto& rec : cards) {
                const double d = geodesic_distance(cell_centroid(rec.group.home_cell),
                                                   cell_centroid(rec.group.purchase_cell));
                travel.row({std::to_string(rec.group.age_decade),
                            std::string(1, gender_code(rec.group.gender)),
                            fmt_double(rec.group.home_cell.origin.lat),
                            fmt_double(rec.group.home_cell.origin.lon),
                            fmt_double(rec.group.purchase_cell.origin.lat),
                            fmt_double(rec.group.purchase_cell.origin.lon), rec.group.product_code,
                            std::to_string(rec.group.purchase_count), fmt_double(d)});
                ++n_travel;
            }
        }
        std::cout << "market: " << records.size() << " distance records, " << singles.size()
                  << " single-market products skipped, " << n_travel << " travel rows\n";
    });
}

inline int cmd_regress(const RunConfig& config) {
    return cmd::guarded([&] {
        const auto shops = cmd::load_shops(config);
        const auto clusters = cmd::read_clusters(config.out_dir);
        const auto stored = cmd::read_scores(config.out_dir);

        const auto market_csv = read_csv(
            cmd::require_stage_file(config.out_dir + "/market_distances.csv", "market"));
        std::vector<MarketDistanceRecord> records;
        for (const auto& row : market_csv.rows) {
            records.push_back({row[0], static_cast<int>(parse_int(row[1], "cluster_a")),
                               static_cast<int>(parse_int(row[2], "cluster_b")),
                               parse_double(row[3], "distance_km")});
        }

        std::vector<CardRecord> cards;
        if (const auto path = cmd::optional_input(config.card_path, config.out_dir, "card.csv")) {
            cards = read_card(*path);
        }
        PopulationTotals populations;
        if (const auto path = cmd::optional_input(config.population_path, config.out_dir, "population.csv")) {
            populations = aggregate_to_clusters(read_population(*path), clusters, config.point_slack_m);
        }
        std::vector<LandPriceRecord> prices;
        if (const auto path = cmd::optional_input(config.land_price_path, config.out_dir, "land_price.csv")) {
            prices = read_land_price(*path);
        }

        const auto tables = build_regression_tables(shops, clusters, stored.scores, records, cards,
                                                    populations, prices);

        std::vector<std::pair<std::string, RegressionResult>> models;
        std::vector<std::string> notes;
        models.emplace_back("market", ols_fit(tables.market, spec_market_boundary(tables.market, false, &notes)));
        models.emplace_back("market", ols_fit(tables.market, spec_market_boundary(tables.market, true)));
        if (tables.consumer.n_rows() > 0) {
            models.emplace_back("consumer", ols_fit(tables.consumer, spec_consumer(tables.consumer, false)));
            models.emplace_back("consumer", ols_fit(tables.consumer, spec_consumer(tables.consumer, true)));
        }

        const std::string report =
            format_regression_report(models, "Market boundary and the PCI of products");
        write_text_file(config.out_dir + "/regression_report.txt", report);
        CsvWriter coef(config.out_dir + "/regression_coefficients.csv");
        coef.row({"model", "term", "coefficient", "std_error", "t_stat", "p_value"});
        for (std::size_t k = 0; k < models.size(); ++k) {
            const auto& model = models[k].second;
            for (std::size_t j = 0; j < model.term_names.size(); ++j) {
                const auto jx = static_cast<Eigen::Index>(j);
                coef.row({"(" + std::to_string(k + 1) + ") " + models[k].first, model.term_names[j],
                          fmt_double(model.coefficients[jx]), fmt_double(model.std_errors[jx]),
                          fmt_double(model.t_stats[jx]), fmt_double(model.p_values[jx])});
            }
        }
        std::cout << report;
        for (const auto& note : notes) std::cout << "note: " << note << "\n";
        std::cout << "regress: dropped " << tables.market_rows_dropped << " market rows, "
                  << tables.consumer_rows_dropped << " consumer rows\n";
    });
}

inline int cmd_correlate(const RunConfig& config) {
    return cmd::guarded([&] {
        const auto shops = cmd::load_shops(config);
        const auto clusters = cmd::read_clusters(config.out_dir);
        const auto stored = cmd::read_scores(config.out_dir);
        const auto& scores = stored.scores;

        PopulationTotals populations;
        if (const auto path = cmd::optional_input(config.population_path, config.out_dir, "population.csv")) {
            populations = aggregate_to_clusters(read_population(*path), clusters, config.point_slack_m);
        }
        std::map<int, double> prices;
        if (const auto path = cmd::optional_input(config.land_price_path, config.out_dir, "land_price.csv")) {
            for (const auto& rec : read_land_price(*path)) prices[rec.cluster_id] = rec.price_krw_m2;
        }

        std::map<int, std::size_t> shops_per_cluster;
        for (const auto& c : clusters) shops_per_cluster[c.cluster_id] = c.member_ids.size();

        // Cluster-level covariate columns, aligned with scores.cluster_ids.
        std::vector<std::pair<std::string, std::vector<double>>> columns;
        auto add_column = [&](const std::string& name, auto&& getter) {
            std::vector<double> v;
            for (std::size_t i = 0; i < scores.cluster_ids.size(); ++i) v.push_back(getter(i));
            columns.emplace_back(name, std::move(v));
        };
        add_column("eci", [&](std::size_t i) { return scores.eci[static_cast<Eigen::Index>(i)]; });
        add_column("diversity",
                   [&](std::size_t i) { return static_cast<double>(scores.diversity[static_cast<Eigen::Index>(i)]); });
        add_column("shops", [&](std::size_t i) {
            return static_cast<double>(shops_per_cluster.at(scores.cluster_ids[i]));
        });
        if (populations.has_data()) {
            auto pop = [&](std::size_t i, PopulationKind kind) {
                auto it = populations.by_cluster.find(scores.cluster_ids[i]);
                return it == populations.by_cluster.end() ? 0.0
                                                          : it->second[static_cast<std::size_t>(kind)];
            };
            add_column("labor", [&](std::size_t i) { return pop(i, PopulationKind::labor); });
            add_column("floating", [&](std::size_t i) { return pop(i, PopulationKind::floating); });
            add_column("residential", [&](std::size_t i) { return pop(i, PopulationKind::residential); });
        }
        if (!prices.empty()) {
            add_column("land_price", [&](std::size_t i) {
                auto it = prices.find(scores.cluster_ids[i]);
                return it == prices.end() ? 0.0 : it->second;
            });
        }

        CsvWriter corr(config.out_dir + "/correlations.csv");
        {
            std::vector<std::string> header = {"variable"};
            for (const auto& [name, v] : columns) header.push_back(name);
            corr.row(header);
            for (const auto& [name, v] : columns) {
                std::vector<std::string> row = {name};
                for (const auto& [other_name, other] : columns) {
                    row.push_back(fmt_double(pearson(v, other)));
                }
                corr.row(row);
            }
        }

        // Tier split and the industry-share point-biserial table.
        std::vector<double> eci(scores.eci.data(), scores.eci.data() + scores.eci.size());
        const auto tiers = eci_tiers(eci, scores.cluster_ids, config.n_tiers);
        CsvWriter tier_csv(config.out_dir + "/tiers.csv");
        tier_csv.row({"cluster_id", "tier", "label"});
        for (std::size_t i = 0; i < scores.cluster_ids.size(); ++i) {
            tier_csv.row({std::to_string(scores.cluster_ids[i]), std::to_string(tiers[i]),
                          tier_label(tiers[i], config.n_tiers)});
        }

        // Industry share of each cluster's shops.
        std::map<std::string, const Shop*> shop_by_id;
        for (const auto& s : shops) shop_by_id.emplace(s.id, &s);
        std::set<std::string> industries;
        for (const auto& s : shops) industries.insert(s.industry_code);
        std::map<int, std::map<std::string, double>> share;
        for (const auto& c : clusters) {
            auto& mine = share[c.cluster_id];
            for (const auto& id : c.member_ids) {
                auto it = shop_by_id.find(id);
                if (it != shop_by_id.end()) mine[it->second->industry_code] += 1.0;
            }
            for (auto& [industry, count] : mine) count /= static_cast<double>(c.member_ids.size());
        }

        CsvWriter pb(config.out_dir + "/point_biserial.csv");
        {
            std::vector<std::string> header = {"industry"};
            for (int t = 0; t < config.n_tiers; ++t) header.push_back(tier_label(t, config.n_tiers));
            pb.row(header);
            for (const auto& industry : industries) {
                std::vector<double> shares;
                for (std::size_t i = 0; i < scores.cluster_ids.size(); ++i) {
                    const auto& mine = share[scores.cluster_ids[i]];
                    auto it = mine.find(industry);
                    shares.push_back(it == mine.end() ? 0.0 : it->second);
                }
                std::vector<std::string> row = {industry};
                for (int t = 0; t < config.n_tiers; ++t) {
                    std::vector<double> indicator;
                    for (std::size_t i = 0; i < tiers.size(); ++i)
                        indicator.push_back(tiers[i] == t ? 1.0 : 0.0);
                    std::string cell = "nan";
                    try {
                        cell = fmt_double(point_biserial(indicator, shares));
                    } catch (const input_error&) {
                    }
                    row.push_back(cell);
                }
                pb.row(row);
            }
        }

        // Rank contingency matrices (ECI x PCI and Diversity x Uniqueness).
        auto write_contingency = [&](const ContingencyMatrix& cm, const std::string& path) {
            CsvWriter out(path);
            std::vector<std::string> header = {cm.x_axis + "\\" + cm.y_axis};
            for (int b = 0; b < cm.n_bins; ++b) header.push_back("bin" + std::to_string(b));
            out.row(header);
            for (int a = 0; a < cm.n_bins; ++a) {
                std::vector<std::string> row = {"bin" + std::to_string(a)};
                for (int b = 0; b < cm.n_bins; ++b) row.push_back(fmt_double(cm.density(a, b)));
                out.row(row);
            }
        };
        const int bins = std::min({config.n_bins, static_cast<int>(scores.cluster_ids.size()),
                                   static_cast<int>(scores.product_codes.size())});
        std::vector<double> pci(scores.pci.data(), scores.pci.data() + scores.pci.size());
        write_contingency(rank_contingency(eci, pci, stored.incidence, bins, "eci_rank", "pci_rank"),
                          config.out_dir + "/contingency_eci_pci.csv");
        std::vector<double> diversity, uniq;
        for (Eigen::Index i = 0; i < scores.diversity.size(); ++i)
            diversity.push_back(static_cast<double>(scores.diversity[i]));
        for (Eigen::Index p = 0; p < scores.ubiquity.size(); ++p)
            uniq.push_back(1.0 / static_cast<double>(scores.ubiquity[p]));
        write_contingency(
            rank_contingency(diversity, uniq, stored.incidence, bins, "diversity_rank", "uniqueness_rank"),
            config.out_dir + "/contingency_div_uniq.csv");

        std::cout << "correlate: " << columns.size() << " covariates, " << industries.size()
                  << " industries, " << config.n_tiers << " tiers, " << bins << " contingency bins\n";
    });
}

inline int cmd_export_geojson(const RunConfig& config) {
    return cmd::guarded([&] {
        const auto clusters = cmd::read_clusters(config.out_dir);
        const auto stored = cmd::read_scores(config.out_dir);
        const auto geojson = clusters_to_geojson(clusters, stored.scores, config.n_tiers);
        write_text_file(config.out_dir + "/clusters.geojson", geojson.dump(2) + "\n");
        std::cout << "export-geojson: " << geojson["features"].size() << " features\n";
    });
}

}  // namespace urbc
