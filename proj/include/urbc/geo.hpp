#pragma once

#include <cmath>
#include <numbers>

namespace urbc {

// IUGG mean Earth radius.
inline constexpr double kEarthRadiusKm = 6371.0088;

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct GeoPoint {
    double lat = 0.0;  // degrees in [-90, 90]
    double lon = 0.0;  // degrees in [-180, 180]

    bool valid() const {
        return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
               lon >= -180.0 && lon <= 180.0;
    }
};

// Great-circle distance in kilometers, haversine on the mean-radius sphere.
// Symmetric bit-for-bit: both deltas enter through sin^2 of their absolute
// value and the cos factors commute.
inline double geodesic_distance(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = deg2rad(a.lat);
    const double phi2 = deg2rad(b.lat);
    const double dphi = std::fabs(deg2rad(b.lat - a.lat));
    const double dlam = std::fabs(deg2rad(b.lon - a.lon));

    const double sp = std::sin(dphi / 2.0);
    const double sl = std::sin(dlam / 2.0);
    const double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    const double c = 2.0 * std::asin(std::min(1.0, std::sqrt(h)));
    return kEarthRadiusKm * c;
}

// Move a point by metric offsets (east, north). Longitude scale is taken at
// the starting latitude; adequate below a few kilometers of offset.
inline GeoPoint offset_m(const GeoPoint& p, double east_m, double north_m) {
    const double r_m = kEarthRadiusKm * 1000.0;
    GeoPoint out;
    out.lat = p.lat + rad2deg(north_m / r_m);
    out.lon = p.lon + rad2deg(east_m / (r_m * std::cos(deg2rad(p.lat))));
    return out;
}

struct GridCell {
    GeoPoint origin;      // southwest corner
    double size_m = 100;  // edge length; 100 m for census cells, 50 m for card cells

    bool valid() const { return origin.valid() && size_m > 0.0; }
};

inline GeoPoint cell_centroid(const GridCell& cell) {
    return offset_m(cell.origin, cell.size_m / 2.0, cell.size_m / 2.0);
}

// Snap a point to the grid cell that contains it. Cells are anchored at
// ref_lat's parallel through (0, 0) in a local equirectangular frame; all
// producers and consumers of a dataset must use the same ref_lat.
inline GridCell snap_cell(const GeoPoint& p, double size_m, double ref_lat) {
    const double r_m = kEarthRadiusKm * 1000.0;
    const double x = deg2rad(p.lon) * r_m * std::cos(deg2rad(ref_lat));
    const double y = deg2rad(p.lat) * r_m;
    const double ox = std::floor(x / size_m) * size_m;
    const double oy = std::floor(y / size_m) * size_m;
    GridCell cell;
    cell.size_m = size_m;
    cell.origin.lat = rad2deg(oy / r_m);
    cell.origin.lon = rad2deg(ox / (r_m * std::cos(deg2rad(ref_lat))));
    return cell;
}

}  // namespace urbc
