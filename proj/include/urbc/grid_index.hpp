#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "urbc/geo.hpp"

namespace urbc {

// Uniform bucket grid over a local equirectangular projection of the input
// points. Buckets only prune candidates; callers decide which distances to
// evaluate exactly. Candidate enumeration is in a fixed order (bucket row
// scan, insertion order within a bucket), so results never depend on hash
// iteration order.
class GridIndex {
  public:
    GridIndex(const std::vector<GeoPoint>& points, double cell_km) : cell_km_(cell_km) {
        double lat_sum = 0.0;
        for (const auto& p : points) lat_sum += p.lat;
        ref_lat_ = points.empty() ? 0.0 : lat_sum / static_cast<double>(points.size());
        cos_ref_ = std::cos(deg2rad(ref_lat_));
        xy_.resize(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            xy_[i] = project(points[i]);
            buckets_[key(bucket_of(xy_[i]))].push_back(static_cast<int>(i));
        }
    }

    // Visit candidate point indices whose bucket lies within `radius_cells`
    // Chebyshev distance of `p`'s bucket.
    template <typename Fn>
    void for_each_candidate(const GeoPoint& p, int radius_cells, Fn&& fn) const {
        const auto [bx, by] = bucket_of(project(p));
        for (int dy = -radius_cells; dy <= radius_cells; ++dy) {
            for (int dx = -radius_cells; dx <= radius_cells; ++dx) {
                auto it = buckets_.find(key({bx + dx, by + dy}));
                if (it == buckets_.end()) continue;
                for (int idx : it->second) fn(idx);
            }
        }
    }

    // Candidate indices within `radius_km` of `p` (superset; caller filters
    // with exact geodesic distance). Sorted, so iteration is deterministic.
    std::vector<int> candidates_within(const GeoPoint& p, double radius_km) const {
        const int rc = static_cast<int>(std::ceil(radius_km / cell_km_)) + 1;
        std::vector<int> out;
        for_each_candidate(p, rc, [&](int idx) { out.push_back(idx); });
        std::sort(out.begin(), out.end());
        return out;
    }

    double cell_km() const { return cell_km_; }

  private:
    struct XY {
        double x, y;
    };

    XY project(const GeoPoint& p) const {
        return {deg2rad(p.lon) * kEarthRadiusKm * cos_ref_, deg2rad(p.lat) * kEarthRadiusKm};
    }

    std::pair<int, int> bucket_of(const XY& q) const {
        return {static_cast<int>(std::floor(q.x / cell_km_)),
                static_cast<int>(std::floor(q.y / cell_km_))};
    }

    static std::uint64_t key(std::pair<int, int> b) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(b.first)) << 32) |
               static_cast<std::uint64_t>(static_cast<std::uint32_t>(b.second));
    }

    double cell_km_;
    double ref_lat_;
    double cos_ref_;
    std::vector<XY> xy_;
    std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
};

}  // namespace urbc
