#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "urbc/cluster.hpp"
#include "urbc/complexity.hpp"
#include "urbc/errors.hpp"
#include "urbc/geo.hpp"

namespace urbc {

struct MarketSet {
    std::string product_code;
    std::vector<int> market_cluster_ids;  // clusters with m = 1, sorted
};

struct MarketDistanceRecord {
    std::string product_code;
    int cluster_a = 0;  // the market this record belongs to
    int cluster_b = 0;  // its nearest other market for the same product
    double distance_km = 0;
};

enum class Gender { female, male };

struct ConsumerGroup {
    int age_decade = 20;  // 20, 30, ...
    Gender gender = Gender::female;
    GridCell home_cell;      // 50 m residential cell
    GridCell purchase_cell;  // 50 m purchase-location cell
    std::string product_code;
    int purchase_count = 1;
};

// One set per product that holds a comparative advantage somewhere.
inline std::vector<MarketSet> market_sets(const IncidenceMatrix& inc) {
    std::vector<MarketSet> sets;
    for (Eigen::Index p = 0; p < inc.m.cols(); ++p) {
        MarketSet set;
        set.product_code = inc.product_codes[static_cast<std::size_t>(p)];
        for (Eigen::Index c = 0; c < inc.m.rows(); ++c) {
            if (inc.m(c, p) >= 1.0) set.market_cluster_ids.push_back(inc.cluster_ids[static_cast<std::size_t>(c)]);
        }
        if (!set.market_cluster_ids.empty()) sets.push_back(std::move(set));
    }
    return sets;
}

namespace detail {

inline std::unordered_map<int, GeoPoint> centers_by_id(const std::vector<AmenityCluster>& clusters) {
    std::unordered_map<int, GeoPoint> centers;
    for (const auto& c : clusters) centers.emplace(c.cluster_id, c.center);
    return centers;
}

}  // namespace detail

// One record per (product, market cluster): the distance from that market to
// its nearest other market of the same product, center to center. Products
// with a single market are skipped; their codes land in `single_markets` if
// given.
inline std::vector<MarketDistanceRecord> min_market_distances(
    const std::vector<MarketSet>& sets, const std::vector<AmenityCluster>& clusters,
    std::vector<std::string>* single_markets = nullptr) {
    const auto centers = detail::centers_by_id(clusters);
    std::vector<MarketDistanceRecord> records;
    for (const auto& set : sets) {
        if (set.market_cluster_ids.size() < 2) {
            if (single_markets) single_markets->push_back(set.product_code);
            continue;
        }
        for (int a : set.market_cluster_ids) {
            const GeoPoint& pa = centers.at(a);
            double best = std::numeric_limits<double>::infinity();
            int best_id = -1;
            for (int b : set.market_cluster_ids) {
                if (b == a) continue;
                const double d = geodesic_distance(pa, centers.at(b));
                if (d < best) {  // ids scanned ascending; ties keep the smaller id
                    best = d;
                    best_id = b;
                }
            }
            records.push_back({set.product_code, a, best_id, best});
        }
    }
    return records;
}

// Collapsed variant: a single record per product, the global minimum pair.
inline std::vector<MarketDistanceRecord> min_market_distances_per_product(
    const std::vector<MarketSet>& sets, const std::vector<AmenityCluster>& clusters,
    std::vector<std::string>* single_markets = nullptr) {
    const auto centers = detail::centers_by_id(clusters);
    std::vector<MarketDistanceRecord> records;
    for (const auto& set : sets) {
        if (set.market_cluster_ids.size() < 2) {
            if (single_markets) single_markets->push_back(set.product_code);
            continue;
        }
        MarketDistanceRecord best{set.product_code, -1, -1, std::numeric_limits<double>::infinity()};
        for (std::size_t i = 0; i < set.market_cluster_ids.size(); ++i) {
            for (std::size_t j = i + 1; j < set.market_cluster_ids.size(); ++j) {
                const int a = set.market_cluster_ids[i];
                const int b = set.market_cluster_ids[j];
                const double d = geodesic_distance(centers.at(a), centers.at(b));
                if (d < best.distance_km) best = {set.product_code, a, b, d};
            }
        }
        records.push_back(best);
    }
    return records;
}

// Mean of a product's minimum market distances; single-market products are
// excluded by construction.
inline std::map<std::string, double> mean_market_spacing(const std::vector<MarketSet>& sets,
                                                         const std::vector<AmenityCluster>& clusters) {
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& rec : min_market_distances(sets, clusters)) {
        auto& slot = acc[rec.product_code];
        slot.first += rec.distance_km;
        slot.second += 1;
    }
    std::map<std::string, double> out;
    for (const auto& [code, slot] : acc) out[code] = slot.first / slot.second;
    return out;
}

// Home-to-purchase travel distance per consumer group, in kilometers.
inline std::vector<double> travel_distances(const std::vector<ConsumerGroup>& groups) {
    std::vector<double> out;
    out.reserve(groups.size());
    for (const auto& g : groups) {
        out.push_back(geodesic_distance(cell_centroid(g.home_cell), cell_centroid(g.purchase_cell)));
    }
    return out;
}

}  // namespace urbc
