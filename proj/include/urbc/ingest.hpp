#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "urbc/cluster.hpp"
#include "urbc/complexity.hpp"
#include "urbc/csv.hpp"
#include "urbc/econometrics.hpp"
#include "urbc/errors.hpp"
#include "urbc/market.hpp"

namespace urbc {

enum class PopulationKind : int { residential = 0, labor = 1, floating = 2 };

inline const char* to_string(PopulationKind kind) {
    switch (kind) {
        case PopulationKind::residential: return "residential";
        case PopulationKind::labor: return "labor";
        case PopulationKind::floating: return "floating";
    }
    return "?";
}

inline PopulationKind parse_population_kind(const std::string& s) {
    if (s == "residential") return PopulationKind::residential;
    if (s == "labor") return PopulationKind::labor;
    if (s == "floating") return PopulationKind::floating;
    throw input_error("bad population kind: '" + s + "'");
}

struct PopulationCell {
    GridCell cell;
    PopulationKind kind = PopulationKind::residential;
    double count = 0;
};

struct CardRecord {
    ConsumerGroup group;
    double amount_krw = 0;
    int n_stores = 1;
};

struct LandPriceRecord {
    int cluster_id = 0;
    double price_krw_m2 = 0;
};

inline char gender_code(Gender g) { return g == Gender::female ? 'F' : 'M'; }

inline Gender parse_gender(const std::string& s) {
    if (s == "F") return Gender::female;
    if (s == "M") return Gender::male;
    throw input_error("bad gender: '" + s + "'");
}

// ---------------------------------------------------------------------------
// shops.csv: id,lat,lon,product_code,industry_code[,ward]

struct ShopReadResult {
    std::vector<Shop> shops;
    std::size_t n_rejected = 0;
    std::string rejects_path;  // empty when nothing was rejected
};

// Malformed rows are collected into `<path>.rejects` with their row numbers;
// the read aborts only when at least 1% of rows are bad. Duplicate ids abort
// unconditionally.
inline ShopReadResult read_shops(const std::string& path) {
    const CsvContent csv = read_csv(path);
    const bool has_ward = csv.header.size() == 6 && csv.header[5] == "ward";
    const std::vector<std::string> expected = {"id", "lat", "lon", "product_code", "industry_code"};
    if (csv.header.size() < 5 || !std::equal(expected.begin(), expected.end(), csv.header.begin()) ||
        (csv.header.size() != 5 && !has_ward)) {
        throw input_error("unexpected shops.csv header in " + path);
    }

    ShopReadResult result;
    std::vector<std::string> rejects;
    std::unordered_set<std::string> seen_ids;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const std::size_t row_number = r + 2;  // 1-based, after the header
        auto reject = [&](const std::string& reason) {
            rejects.push_back("row " + std::to_string(row_number) + ": " + reason);
        };
        if (row.size() != csv.header.size()) {
            reject("expected " + std::to_string(csv.header.size()) + " fields, got " +
                   std::to_string(row.size()));
            continue;
        }
        Shop shop;
        shop.id = row[0];
        try {
            shop.location.lat = parse_double(row[1], "lat");
            shop.location.lon = parse_double(row[2], "lon");
        } catch (const input_error& e) {
            reject(e.what());
            continue;
        }
        shop.product_code = row[3];
        shop.industry_code = row[4];
        if (has_ward) shop.ward = row[5];
        if (shop.id.empty() || shop.product_code.empty() || shop.industry_code.empty()) {
            reject("empty id or code");
            continue;
        }
        if (!shop.location.valid()) {
            reject("coordinates out of range: (" + row[1] + ", " + row[2] + ")");
            continue;
        }
        if (!seen_ids.insert(shop.id).second) {
            throw input_error("duplicate shop id '" + shop.id + "' at row " + std::to_string(row_number));
        }
        result.shops.push_back(std::move(shop));
    }

    result.n_rejected = rejects.size();
    if (!rejects.empty()) {
        result.rejects_path = path + ".rejects";
        std::string body;
        for (const auto& line : rejects) body += line + "\n";
        write_text_file(result.rejects_path, body);
        if (100 * rejects.size() >= csv.rows.size()) {
            throw input_error("too many malformed rows in " + path + " (" +
                              std::to_string(rejects.size()) + " of " + std::to_string(csv.rows.size()) +
                              "); see " + result.rejects_path);
        }
    }
    return result;
}

inline void write_shops(const std::string& path, const std::vector<Shop>& shops) {
    bool any_ward = false;
    for (const auto& s : shops) any_ward = any_ward || !s.ward.empty();
    CsvWriter out(path);
    std::vector<std::string> header = {"id", "lat", "lon", "product_code", "industry_code"};
    if (any_ward) header.push_back("ward");
    out.row(header);
    for (const auto& s : shops) {
        std::vector<std::string> row = {s.id, fmt_double(s.location.lat), fmt_double(s.location.lon),
                                        s.product_code, s.industry_code};
        if (any_ward) row.push_back(s.ward);
        out.row(row);
    }
}

// ---------------------------------------------------------------------------
// population.csv: kind,cell_lat,cell_lon,size_m,count

inline std::vector<PopulationCell> read_population(const std::string& path) {
    const CsvContent csv = read_csv(path);
    const std::vector<std::string> expected = {"kind", "cell_lat", "cell_lon", "size_m", "count"};
    if (csv.header != expected) throw input_error("unexpected population.csv header in " + path);
    std::vector<PopulationCell> cells;
    for (const auto& row : csv.rows) {
        if (row.size() != 5) throw input_error("bad population row in " + path);
        PopulationCell cell;
        cell.kind = parse_population_kind(row[0]);
        cell.cell.origin.lat = parse_double(row[1], "cell_lat");
        cell.cell.origin.lon = parse_double(row[2], "cell_lon");
        cell.cell.size_m = parse_double(row[3], "size_m");
        cell.count = parse_double(row[4], "count");
        if (!cell.cell.valid() || cell.count < 0) throw input_error("bad population row in " + path);
        cells.push_back(cell);
    }
    return cells;
}

inline void write_population(const std::string& path, const std::vector<PopulationCell>& cells) {
    CsvWriter out(path);
    out.row({"kind", "cell_lat", "cell_lon", "size_m", "count"});
    for (const auto& c : cells) {
        out.row({to_string(c.kind), fmt_double(c.cell.origin.lat), fmt_double(c.cell.origin.lon),
                 fmt_double(c.cell.size_m), fmt_double(c.count)});
    }
}

// ---------------------------------------------------------------------------
// card.csv: age_decade,gender,home_cell_lat,home_cell_lon,purchase_cell_lat,
//           purchase_cell_lon,product_code,purchase_count,amount_krw,n_stores
// Home and purchase cells are 50 m cells.

inline std::vector<CardRecord> read_card(const std::string& path) {
    const CsvContent csv = read_csv(path);
    const std::vector<std::string> expected = {
        "age_decade",        "gender",        "home_cell_lat",  "home_cell_lon", "purchase_cell_lat",
        "purchase_cell_lon", "product_code",  "purchase_count", "amount_krw",    "n_stores"};
    if (csv.header != expected) throw input_error("unexpected card.csv header in " + path);
    std::vector<CardRecord> records;
    for (const auto& row : csv.rows) {
        if (row.size() != 10) throw input_error("bad card row in " + path);
        CardRecord rec;
        rec.group.age_decade = static_cast<int>(parse_int(row[0], "age_decade"));
        rec.group.gender = parse_gender(row[1]);
        rec.group.home_cell.origin.lat = parse_double(row[2], "home_cell_lat");
        rec.group.home_cell.origin.lon = parse_double(row[3], "home_cell_lon");
        rec.group.home_cell.size_m = 50;
        rec.group.purchase_cell.origin.lat = parse_double(row[4], "purchase_cell_lat");
        rec.group.purchase_cell.origin.lon = parse_double(row[5], "purchase_cell_lon");
        rec.group.purchase_cell.size_m = 50;
        rec.group.product_code = row[6];
        rec.group.purchase_count = static_cast<int>(parse_int(row[7], "purchase_count"));
        rec.amount_krw = parse_double(row[8], "amount_krw");
        rec.n_stores = static_cast<int>(parse_int(row[9], "n_stores"));
        if (rec.group.purchase_count < 1 || rec.amount_krw < 0) throw input_error("bad card row in " + path);
        records.push_back(std::move(rec));
    }
    return records;
}

inline void write_card(const std::string& path, const std::vector<CardRecord>& records) {
    CsvWriter out(path);
    out.row({"age_decade", "gender", "home_cell_lat", "home_cell_lon", "purchase_cell_lat",
             "purchase_cell_lon", "product_code", "purchase_count", "amount_krw", "n_stores"});
    for (const auto& r : records) {
        out.row({std::to_string(r.group.age_decade), std::string(1, gender_code(r.group.gender)),
                 fmt_double(r.group.home_cell.origin.lat), fmt_double(r.group.home_cell.origin.lon),
                 fmt_double(r.group.purchase_cell.origin.lat), fmt_double(r.group.purchase_cell.origin.lon),
                 r.group.product_code, std::to_string(r.group.purchase_count), fmt_double(r.amount_krw),
                 std::to_string(r.n_stores)});
    }
}

// ---------------------------------------------------------------------------
// land_price.csv: cluster_id,price_krw_m2

inline std::vector<LandPriceRecord> read_land_price(const std::string& path) {
    const CsvContent csv = read_csv(path);
    const std::vector<std::string> expected = {"cluster_id", "price_krw_m2"};
    if (csv.header != expected) throw input_error("unexpected land_price.csv header in " + path);
    std::vector<LandPriceRecord> records;
    for (const auto& row : csv.rows) {
        if (row.size() != 2) throw input_error("bad land price row in " + path);
        LandPriceRecord rec;
        rec.cluster_id = static_cast<int>(parse_int(row[0], "cluster_id"));
        rec.price_krw_m2 = parse_double(row[1], "price_krw_m2");
        if (!(rec.price_krw_m2 > 0)) throw input_error("bad land price row in " + path);
        records.push_back(rec);
    }
    return records;
}

inline void write_land_price(const std::string& path, const std::vector<LandPriceRecord>& records) {
    CsvWriter out(path);
    out.row({"cluster_id", "price_krw_m2"});
    for (const auto& r : records) out.row({std::to_string(r.cluster_id), fmt_double(r.price_krw_m2)});
}

// ---------------------------------------------------------------------------
// Aggregation onto clusters

struct PopulationTotals {
    // cluster_id -> counts indexed by PopulationKind
    std::map<int, std::array<double, 3>> by_cluster;
    std::array<double, 3> outside = {0, 0, 0};

    bool has_data() const { return !by_cluster.empty() || outside != std::array<double, 3>{0, 0, 0}; }
};

// Each cell's count goes to the cluster containing its centroid; cells
// matching no cluster accumulate in the outside bucket. Total mass is
// conserved exactly for integer counts.
inline PopulationTotals aggregate_to_clusters(const std::vector<PopulationCell>& cells,
                                              const std::vector<AmenityCluster>& clusters,
                                              double slack_m = 100.0) {
    PopulationTotals totals;
    for (const auto& cell : cells) {
        const auto id = cluster_of_point(clusters, cell_centroid(cell.cell), slack_m);
        if (id) {
            totals.by_cluster[*id][static_cast<std::size_t>(cell.kind)] += cell.count;
        } else {
            totals.outside[static_cast<std::size_t>(cell.kind)] += cell.count;
        }
    }
    return totals;
}

// ---------------------------------------------------------------------------
// Ward labels

// Coarse spatial binning used when the shops file carries no ward column:
// a 5x5 grid over the bounding box of the cluster centers.
class WardBinner {
  public:
    explicit WardBinner(const std::vector<GeoPoint>& points) {
        for (const auto& p : points) {
            lat_lo_ = std::min(lat_lo_, p.lat);
            lat_hi_ = std::max(lat_hi_, p.lat);
            lon_lo_ = std::min(lon_lo_, p.lon);
            lon_hi_ = std::max(lon_hi_, p.lon);
        }
    }

    std::string label(const GeoPoint& p) const {
        const int row = bin(p.lat, lat_lo_, lat_hi_);
        const int col = bin(p.lon, lon_lo_, lon_hi_);
        const int idx = row * kGridSide + col;
        return idx < 10 ? "W0" + std::to_string(idx) : "W" + std::to_string(idx);
    }

  private:
    static constexpr int kGridSide = 5;

    static int bin(double v, double lo, double hi) {
        if (!(hi > lo)) return 0;
        const int b = static_cast<int>((v - lo) / (hi - lo) * kGridSide);
        return std::clamp(b, 0, kGridSide - 1);
    }

    double lat_lo_ = std::numeric_limits<double>::infinity();
    double lat_hi_ = -std::numeric_limits<double>::infinity();
    double lon_lo_ = std::numeric_limits<double>::infinity();
    double lon_hi_ = -std::numeric_limits<double>::infinity();
};

// Ward per cluster: majority vote of member shop wards when the data has
// them, otherwise the spatial bin of the cluster center. Ties go to the
// lexicographically smallest ward.
inline std::map<int, std::string> cluster_wards(const std::vector<Shop>& shops,
                                                const std::vector<AmenityCluster>& clusters,
                                                const WardBinner& binner) {
    std::unordered_map<std::string, const Shop*> by_id;
    for (const auto& s : shops) by_id.emplace(s.id, &s);
    std::map<int, std::string> wards;
    for (const auto& cluster : clusters) {
        std::map<std::string, int> votes;
        for (const auto& id : cluster.member_ids) {
            auto it = by_id.find(id);
            if (it != by_id.end() && !it->second->ward.empty()) votes[it->second->ward] += 1;
        }
        if (votes.empty()) {
            wards[cluster.cluster_id] = binner.label(cluster.center);
        } else {
            auto best = votes.begin();
            for (auto it = votes.begin(); it != votes.end(); ++it) {
                if (it->second > best->second) best = it;
            }
            wards[cluster.cluster_id] = best->first;
        }
    }
    return wards;
}

// Majority industry code per product; ties go to the smallest code.
inline std::map<std::string, std::string> product_industries(const std::vector<Shop>& shops) {
    std::map<std::string, std::map<std::string, int>> votes;
    for (const auto& s : shops) votes[s.product_code][s.industry_code] += 1;
    std::map<std::string, std::string> industries;
    for (const auto& [product, counts] : votes) {
        auto best = counts.begin();
        for (auto it = counts.begin(); it != counts.end(); ++it) {
            if (it->second > best->second) best = it;
        }
        industries[product] = best->first;
    }
    return industries;
}

// ---------------------------------------------------------------------------
// Regression table assembly

struct RegressionTables {
    Table market;    // one row per (product, market cluster, nearest market)
    Table consumer;  // one row per consumer group
    long market_rows_dropped = 0;
    long consumer_rows_dropped = 0;
};

// Join everything onto the two regression tables. Rows whose join keys
// resolve but miss a covariate (e.g. no land price for a cluster) are
// dropped and counted; unresolvable join keys above 5% abort.
inline RegressionTables build_regression_tables(
    const std::vector<Shop>& shops, const std::vector<AmenityCluster>& clusters,
    const ComplexityScores& scores, const std::vector<MarketDistanceRecord>& market_records,
    const std::vector<CardRecord>& card_records, const PopulationTotals& populations,
    const std::vector<LandPriceRecord>& land_prices) {
    std::map<int, double> eci;
    std::map<int, double> diversity;
    for (std::size_t i = 0; i < scores.cluster_ids.size(); ++i) {
        eci[scores.cluster_ids[i]] = scores.eci[static_cast<Eigen::Index>(i)];
        diversity[scores.cluster_ids[i]] = scores.diversity[static_cast<Eigen::Index>(i)];
    }
    std::map<std::string, double> pci;
    for (std::size_t p = 0; p < scores.product_codes.size(); ++p) {
        pci[scores.product_codes[p]] = scores.pci[static_cast<Eigen::Index>(p)];
    }
    std::map<int, double> price;
    for (const auto& rec : land_prices) price[rec.cluster_id] = rec.price_krw_m2;

    std::vector<GeoPoint> centers;
    for (const auto& c : clusters) centers.push_back(c.center);
    const WardBinner binner(centers);
    const auto wards = cluster_wards(shops, clusters, binner);
    const auto industries = product_industries(shops);
    const bool use_population = populations.has_data();
    const bool use_price = !land_prices.empty();

    auto pop_of = [&](int cluster_id, PopulationKind kind) {
        auto it = populations.by_cluster.find(cluster_id);
        if (it == populations.by_cluster.end()) return 0.0;
        return it->second[static_cast<std::size_t>(kind)];
    };

    RegressionTables tables;

    // Market-boundary table.
    {
        std::vector<double> dist, pci_col, d_eci, d_div, d_labor, d_float, d_resi, d_price;
        std::vector<std::string> ward_col, industry_col;
        long mismatches = 0;
        for (const auto& rec : market_records) {
            const auto pci_it = pci.find(rec.product_code);
            const auto eci_a = eci.find(rec.cluster_a);
            const auto eci_b = eci.find(rec.cluster_b);
            const auto ward_it = wards.find(rec.cluster_a);
            const auto ind_it = industries.find(rec.product_code);
            if (pci_it == pci.end() || eci_a == eci.end() || eci_b == eci.end() ||
                ward_it == wards.end() || ind_it == industries.end()) {
                ++mismatches;
                continue;
            }
            if (use_price && (price.count(rec.cluster_a) == 0 || price.count(rec.cluster_b) == 0)) {
                ++tables.market_rows_dropped;
                continue;
            }
            dist.push_back(rec.distance_km);
            pci_col.push_back(pci_it->second);
            d_eci.push_back(std::fabs(eci_a->second - eci_b->second));
            d_div.push_back(std::fabs(diversity.at(rec.cluster_a) - diversity.at(rec.cluster_b)));
            if (use_population) {
                d_labor.push_back(std::fabs(pop_of(rec.cluster_a, PopulationKind::labor) -
                                            pop_of(rec.cluster_b, PopulationKind::labor)) / 1000.0);
                d_float.push_back(std::fabs(pop_of(rec.cluster_a, PopulationKind::floating) -
                                            pop_of(rec.cluster_b, PopulationKind::floating)) / 1000.0);
                d_resi.push_back(std::fabs(pop_of(rec.cluster_a, PopulationKind::residential) -
                                           pop_of(rec.cluster_b, PopulationKind::residential)) / 1000.0);
            }
            if (use_price) d_price.push_back(std::fabs(price.at(rec.cluster_a) - price.at(rec.cluster_b)));
            ward_col.push_back(ward_it->second);
            industry_col.push_back(ind_it->second);
        }
        if (!market_records.empty() && 20 * mismatches > static_cast<long>(market_records.size())) {
            throw input_error("join key mismatch above 5% while building the market table");
        }
        tables.market_rows_dropped += mismatches;
        tables.market.add_numeric("dist_km", std::move(dist));
        tables.market.add_numeric("pci", std::move(pci_col));
        tables.market.add_numeric("d_eci", std::move(d_eci));
        tables.market.add_numeric("d_diversity", std::move(d_div));
        if (use_population) {
            tables.market.add_numeric("d_labor_k", std::move(d_labor));
            tables.market.add_numeric("d_float_k", std::move(d_float));
            tables.market.add_numeric("d_resi_k", std::move(d_resi));
        }
        if (use_price) tables.market.add_numeric("d_land_price", std::move(d_price));
        tables.market.add_categorical("ward", std::move(ward_col));
        tables.market.add_categorical("industry", std::move(industry_col));
    }

    // Consumer-travel table.
    {
        std::vector<double> dist, pci_col, count, female;
        std::vector<std::string> age_col, ward_col, industry_col;
        long mismatches = 0;
        for (const auto& rec : card_records) {
            const auto pci_it = pci.find(rec.group.product_code);
            const auto ind_it = industries.find(rec.group.product_code);
            if (pci_it == pci.end() || ind_it == industries.end()) {
                ++mismatches;
                continue;
            }
            const GeoPoint home = cell_centroid(rec.group.home_cell);
            dist.push_back(geodesic_distance(home, cell_centroid(rec.group.purchase_cell)));
            pci_col.push_back(pci_it->second);
            count.push_back(static_cast<double>(rec.group.purchase_count));
            female.push_back(rec.group.gender == Gender::female ? 1.0 : 0.0);
            age_col.push_back("A" + std::to_string(rec.group.age_decade));
            // residential ward: the bin of the home cell in the same grid
            ward_col.push_back(binner.label(home));
            industry_col.push_back(ind_it->second);
        }
        if (!card_records.empty() && 20 * mismatches > static_cast<long>(card_records.size())) {
            throw input_error("join key mismatch above 5% while building the consumer table");
        }
        tables.consumer_rows_dropped += mismatches;
        tables.consumer.add_numeric("dist_km", std::move(dist));
        tables.consumer.add_numeric("pci", std::move(pci_col));
        tables.consumer.add_numeric("count", std::move(count));
        tables.consumer.add_numeric("female", std::move(female));
        tables.consumer.add_categorical("age_group", std::move(age_col));
        tables.consumer.add_categorical("ward", std::move(ward_col));
        tables.consumer.add_categorical("industry", std::move(industry_col));
    }

    return tables;
}

}  // namespace urbc
