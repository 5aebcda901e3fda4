#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "urbc/errors.hpp"
#include "urbc/geo.hpp"
#include "urbc/grid_index.hpp"
#include "urbc/parallel.hpp"

namespace urbc {

struct Shop {
    std::string id;
    GeoPoint location;
    std::string product_code;   // fine-grained category
    std::string industry_code;  // top-level sector (9 classes)
    std::string ward;           // optional administrative ward; empty if unknown
};

struct DecayParams {
    double gamma = 7.58;          // distance-decay rate, per kilometer
    double peak_radius_m = 300;   // local-maximum window
    double min_peak_density = 0;  // peaks below this effective count are dropped; 0 disables
};

struct ClusterParams {
    DecayParams decay;
    double assignment_cutoff_m = 1000;  // shops farther than this from every peak stay unassigned
    int min_cluster_size = 5;           // smaller clusters dissolve into the unassigned pool
    bool exact_distances = false;       // full O(N^2) sums instead of the bucket grid
    int threads = 1;
};

struct AmenityCluster {
    int cluster_id = 0;
    GeoPoint center;                      // location of the peak shop
    std::vector<std::string> member_ids;  // sorted set of member shop ids
    double radius_m = 0;                  // max member distance from center
    double effective_density = 0;         // A at the peak
};

struct ClusterResult {
    std::vector<AmenityCluster> clusters;
    std::vector<std::string> unassigned_ids;  // sorted
};

namespace detail {

inline std::vector<GeoPoint> locations_of(const std::vector<Shop>& shops) {
    std::vector<GeoPoint> pts(shops.size());
    for (std::size_t i = 0; i < shops.size(); ++i) pts[i] = shops[i].location;
    return pts;
}

}  // namespace detail

// Effective shop count A_i = sum_j exp(-gamma * d_ij), self term included.
//
// Exact mode evaluates every pair. Grid mode buckets shops into cells of
// side 3/gamma km and sums over cells within Chebyshev radius 4; every
// skipped pair is at least 12/gamma km away, so each A_i is underestimated
// by less than N * exp(-12) < N * 1.2e-4. Terms are accumulated in shop
// index order either way, so the result is independent of thread count.
inline std::vector<double> effective_counts(const std::vector<Shop>& shops,
                                            const DecayParams& params,
                                            bool exact_distances = false, int threads = 1) {
    if (shops.empty()) throw input_error("no shops");
    if (!(params.gamma > 0.0)) throw input_error("gamma must be positive");

    const std::size_t n = shops.size();
    std::vector<double> counts(n, 0.0);

    if (exact_distances) {
        parallel_for(n, threads, [&](std::size_t i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                sum += std::exp(-params.gamma * geodesic_distance(shops[i].location, shops[j].location));
            }
            counts[i] = sum;
        });
        return counts;
    }

    const auto points = detail::locations_of(shops);
    const GridIndex index(points, 3.0 / params.gamma);
    parallel_for(n, threads, [&](std::size_t i) {
        std::vector<int> cand;
        index.for_each_candidate(points[i], 4, [&](int j) { cand.push_back(j); });
        std::sort(cand.begin(), cand.end());
        double sum = 0.0;
        for (int j : cand) {
            sum += std::exp(-params.gamma * geodesic_distance(points[i], points[static_cast<std::size_t>(j)]));
        }
        counts[i] = sum;
    });
    return counts;
}

// A shop is a peak if no shop within peak_radius_m has a strictly higher A,
// and every tie within the window is held by a lexicographically larger id.
inline std::vector<int> detect_peaks(const std::vector<Shop>& shops,
                                     const std::vector<double>& effective, const DecayParams& params) {
    if (shops.size() != effective.size()) throw input_error("effective counts not aligned with shops");
    const auto points = detail::locations_of(shops);
    const double radius_km = params.peak_radius_m / 1000.0;
    const GridIndex index(points, std::max(radius_km, 1e-6));

    std::vector<int> peaks;
    for (std::size_t i = 0; i < shops.size(); ++i) {
        if (params.min_peak_density > 0.0 && effective[i] < params.min_peak_density) continue;
        bool is_peak = true;
        for (int j : index.candidates_within(points[i], radius_km)) {
            const auto ju = static_cast<std::size_t>(j);
            if (ju == i) continue;
            if (geodesic_distance(points[i], points[ju]) > radius_km) continue;
            if (effective[ju] > effective[i] ||
                (effective[ju] == effective[i] && shops[ju].id < shops[i].id)) {
                is_peak = false;
                break;
            }
        }
        if (is_peak) peaks.push_back(static_cast<int>(i));
    }
    return peaks;
}

// Assign every shop to the nearest peak within the cutoff; ties go to the
// peak with the higher effective count, then to the smaller shop id.
// Cluster ids are dense and ordered by descending peak density.
inline ClusterResult grow_clusters(const std::vector<Shop>& shops, const std::vector<double>& effective,
                                   const std::vector<int>& peaks, const ClusterParams& params) {
    if (peaks.empty()) throw input_error("no peaks to grow clusters from");
    const auto points = detail::locations_of(shops);

    // Order peaks by (density desc, id asc); this fixes cluster ids.
    std::vector<int> order(peaks);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto au = static_cast<std::size_t>(a), bu = static_cast<std::size_t>(b);
        if (effective[au] != effective[bu]) return effective[au] > effective[bu];
        return shops[au].id < shops[bu].id;
    });

    std::vector<GeoPoint> peak_points(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) peak_points[k] = points[static_cast<std::size_t>(order[k])];
    const double cutoff_km = params.assignment_cutoff_m / 1000.0;
    const GridIndex peak_index(peak_points, std::max(cutoff_km, 1e-6));

    std::vector<int> assignment(shops.size(), -1);
    parallel_for(shops.size(), params.threads, [&](std::size_t i) {
        double best_d = std::numeric_limits<double>::infinity();
        int best_k = -1;
        for (int k : peak_index.candidates_within(points[i], cutoff_km)) {
            const double d = geodesic_distance(points[i], peak_points[static_cast<std::size_t>(k)]);
            if (d > cutoff_km) continue;
            // candidates are scanned in ascending k = (density desc, id asc),
            // so a strict comparison implements the tie rule
            if (d < best_d) {
                best_d = d;
                best_k = k;
            }
        }
        assignment[i] = best_k;
    });

    std::vector<std::vector<std::size_t>> members(order.size());
    std::vector<std::string> unassigned;
    for (std::size_t i = 0; i < shops.size(); ++i) {
        if (assignment[i] < 0) {
            unassigned.push_back(shops[i].id);
        } else {
            members[static_cast<std::size_t>(assignment[i])].push_back(i);
        }
    }

    ClusterResult result;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (members[k].size() < static_cast<std::size_t>(std::max(1, params.min_cluster_size))) {
            for (std::size_t i : members[k]) unassigned.push_back(shops[i].id);
            continue;
        }
        AmenityCluster cluster;
        cluster.cluster_id = static_cast<int>(result.clusters.size());
        const auto peak_shop = static_cast<std::size_t>(order[k]);
        cluster.center = shops[peak_shop].location;
        cluster.effective_density = effective[peak_shop];
        double radius_km = 0.0;
        for (std::size_t i : members[k]) {
            cluster.member_ids.push_back(shops[i].id);
            radius_km = std::max(radius_km, geodesic_distance(cluster.center, points[i]));
        }
        std::sort(cluster.member_ids.begin(), cluster.member_ids.end());
        cluster.radius_m = radius_km * 1000.0;
        result.clusters.push_back(std::move(cluster));
    }
    std::sort(unassigned.begin(), unassigned.end());
    result.unassigned_ids = std::move(unassigned);
    return result;
}

// Full detection pipeline.
inline ClusterResult detect_clusters(const std::vector<Shop>& shops, const ClusterParams& params) {
    const auto effective = effective_counts(shops, params.decay, params.exact_distances, params.threads);
    const auto peaks = detect_peaks(shops, effective, params.decay);
    return grow_clusters(shops, effective, peaks, params);
}

// Nearest cluster containing p within its radius plus slack, if any.
inline std::optional<int> cluster_of_point(const std::vector<AmenityCluster>& clusters,
                                           const GeoPoint& p, double slack_m = 100.0) {
    if (clusters.empty()) throw input_error("no clusters");
    double best_d = std::numeric_limits<double>::infinity();
    const AmenityCluster* best = nullptr;
    for (const auto& c : clusters) {
        const double d = geodesic_distance(c.center, p);
        if (d < best_d) {
            best_d = d;
            best = &c;
        }
    }
    if (best && best_d * 1000.0 <= best->radius_m + slack_m) return best->cluster_id;
    return std::nullopt;
}

}  // namespace urbc
