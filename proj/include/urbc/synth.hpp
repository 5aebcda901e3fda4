#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "urbc/cluster.hpp"
#include "urbc/errors.hpp"
#include "urbc/geo.hpp"
#include "urbc/ingest.hpp"
#include "urbc/market.hpp"
#include "urbc/rng.hpp"

namespace urbc {

struct ChristallerConfig {
    int levels = 4;                       // hierarchy depth, 1..6
    double base_spacing_km = 1.0;         // market spacing of the lowest level
    int k_factor = 3;                     // Christaller K in {3, 4, 7}; spacing grows by sqrt(K) per level
    int shops_per_center_per_product = 8; // base shop count per product; a graded
                                          // assortment may scale it up when the count
                                          // ratios it needs are finer than 1/base
    double jitter_m = 50.0;               // shop positions drawn uniformly in a disc of this radius
    std::uint64_t seed = 1;
    int products_per_level = 1;
    double extent_km = 0.0;               // disc radius; 0 = 2.5x the top-level spacing
    GeoPoint origin{37.55, 127.0};
    // With a graded assortment, per-product shop counts grow with product
    // level so that the RCA bands of neighbouring levels overlap and the
    // specialization graph stays connected; with uniform counts the Balassa
    // binarization provably splits the lowest level off into its own
    // component. The multipliers are derived from the lattice populations.
    bool graded_assortment = true;
};

struct CityCenter {
    GeoPoint point;
    int level = 0;
};

struct SyntheticCity {
    std::vector<Shop> shops;
    std::vector<CityCenter> centers;
    std::vector<int> shop_center;             // ground-truth center index per shop
    std::vector<std::string> products;        // all product codes
    std::map<std::string, int> product_level; // ground-truth hierarchy level per product
    std::vector<std::vector<int>> center_products;  // indices into `products` stocked per center
    GeoPoint origin;
    double extent_km = 0;
    double base_spacing_km = 1.0;
    int k_factor = 3;
};

namespace detail {

// Integer test and descent for the nested sublattice of index K on
// triangular lattice coordinates (m, n). Returns true and replaces (m, n)
// with coordinates in the sublattice basis when the point belongs to it.
inline bool descend_sublattice(int k, long long& m, long long& n) {
    auto divisible = [](long long v, long long q) { return ((v % q) + q) % q == 0; };
    if (k == 3) {
        if (!divisible(2 * m + n, 3) || !divisible(n - m, 3)) return false;
        const long long mm = (2 * m + n) / 3, nn = (n - m) / 3;
        m = mm;
        n = nn;
        return true;
    }
    if (k == 4) {
        if (!divisible(m, 2) || !divisible(n, 2)) return false;
        m /= 2;
        n /= 2;
        return true;
    }
    if (k == 7) {
        if (!divisible(3 * m + n, 7) || !divisible(2 * n - m, 7)) return false;
        const long long mm = (3 * m + n) / 7, nn = (2 * n - m) / 7;
        m = mm;
        n = nn;
        return true;
    }
    throw input_error("k_factor must be 3, 4 or 7");
}

inline int lattice_level(int k, int max_level, long long m, long long n) {
    int level = 0;
    while (level < max_level && descend_sublattice(k, m, n)) ++level;
    return level;
}

// Per-level shop counts for one product. With uniform counts the Balassa
// binarization gives every cluster a comparative advantage only in its own
// level's products, so the specialization graph falls apart into one
// component per level. Graded counts keep it connected: product level l must
// stay a market inside level-(l+1) clusters, i.e.
//   margin(l) = T / (N_l * W_{l+1}) >= 1,
// where N_l counts centers of level >= l, W_l is the cumulative per-center
// count through level l, and T = sum_l c_l N_l. Equalizing all margins pins
// W_{l+1} = W_l * N_{l-1} / N_l; the remaining freedom W_1 is solved from a
// 1.1 target margin. Realized integer counts are audited and repaired.
// Two-level hierarchies cannot satisfy margin(0) >= 1 at all (T < W_1 N_0
// always) and keep uniform counts.
inline std::vector<long long> assortment_counts(const std::vector<long long>& n_at_least,
                                                long long base, bool graded) {
    const std::size_t levels = n_at_least.size();
    std::vector<long long> counts(levels, std::max<long long>(1, base));
    if (!graded || levels < 3) return counts;

    const double n0 = static_cast<double>(n_at_least[0]);
    const double n1 = static_cast<double>(n_at_least[1]);
    double beta = n1 / n0;
    for (std::size_t l = 2; l < levels; ++l) {
        beta += static_cast<double>(n_at_least[l]) *
                (1.0 / static_cast<double>(n_at_least[l - 1]) -
                 1.0 / static_cast<double>(n_at_least[l - 2]));
    }
    // The achievable margin is capped at (n0-n1)/n0 + beta (the w1 -> 0
    // limit); aim below that ceiling, and give up on grading when even the
    // ceiling cannot clear the RCA threshold.
    const double max_margin = (n0 - n1) / n0 + beta;
    if (max_margin <= 1.03) return counts;
    const double target = std::min(1.1, 0.5 * (max_margin + 1.02));
    double w1 = 1.0;
    if (target > beta) {
        w1 = std::min((n0 - n1) / (n0 * (target - beta)) - 1.0, 1.0);
    }
    w1 = std::max(w1, 1e-3);
    // Integer counts must represent the ratio c1/c0 <= w1; when w1 is below
    // the resolution of `base`, the whole profile scales up instead.
    long long anchor = std::max<long long>(1, base);
    if (w1 * static_cast<double>(anchor) < 1.0) {
        anchor = static_cast<long long>(std::ceil(1.0 / w1));
    }
    counts[0] = anchor;
    counts[1] = std::max<long long>(1, std::llround(static_cast<double>(anchor) * w1));

    std::vector<double> cumulative(levels);
    cumulative[0] = 1.0;
    cumulative[1] = 1.0 + static_cast<double>(counts[1]) / static_cast<double>(anchor);
    for (std::size_t l = 2; l < levels; ++l) {
        cumulative[l] = cumulative[l - 1] * static_cast<double>(n_at_least[l - 2]) /
                        static_cast<double>(n_at_least[l - 1]);
        counts[l] = std::max<long long>(
            1, std::llround(static_cast<double>(anchor) * (cumulative[l] - cumulative[l - 1])));
    }

    // Audit the realized margins and nudge counts until every adjacent level
    // pair overlaps with a little headroom.
    auto worst_margin = [&](std::size_t& at) {
        double total = 0;
        for (std::size_t l = 0; l < levels; ++l) {
            total += static_cast<double>(counts[l] * n_at_least[l]);
        }
        double worst = std::numeric_limits<double>::infinity();
        long long cum = 0;
        for (std::size_t l = 0; l + 1 < levels; ++l) {
            cum += counts[l];
            const double margin =
                total / (static_cast<double>(n_at_least[l]) * static_cast<double>(cum + counts[l + 1]));
            if (margin < worst) {
                worst = margin;
                at = l;
            }
        }
        return worst;
    };
    for (int iter = 0; iter < 256; ++iter) {
        std::size_t at = 0;
        if (worst_margin(at) >= 1.02) break;
        if (at + 2 < levels && counts[at + 2] < 10000) {
            counts[at + 2] += std::max<long long>(1, counts[at + 2] / 10);
        } else if (counts[at + 1] > 1) {
            counts[at + 1] -= 1;
        } else {
            break;
        }
    }
    return counts;
}

}  // namespace detail

// Christaller-style city: nested triangular lattices of centers, one lattice
// per hierarchy level with spacing base * sqrt(K)^level, truncated to a disc.
// A center of level L stocks every product of level <= L. Deterministic for
// a given config.
inline SyntheticCity generate_christaller(const ChristallerConfig& cfg) {
    if (cfg.levels < 1 || cfg.levels > 6) throw input_error("levels must be in 1..6");
    if (!(cfg.base_spacing_km > 0)) throw input_error("base_spacing_km must be positive");
    if (cfg.k_factor != 3 && cfg.k_factor != 4 && cfg.k_factor != 7) {
        throw input_error("k_factor must be 3, 4 or 7");
    }
    if (cfg.products_per_level < 1) throw input_error("products_per_level must be positive");
    if (cfg.shops_per_center_per_product < 1) throw input_error("shops_per_center_per_product must be positive");

    const double s = cfg.base_spacing_km;
    const double top_spacing = s * std::pow(std::sqrt(static_cast<double>(cfg.k_factor)), cfg.levels - 1);
    const double extent = cfg.extent_km > 0 ? cfg.extent_km : 2.5 * top_spacing;

    SyntheticCity city;
    city.origin = cfg.origin;
    city.extent_km = extent;
    city.base_spacing_km = s;
    city.k_factor = cfg.k_factor;

    // Enumerate lattice points inside the disc. Basis: a1 = (s, 0),
    // a2 = (s/2, s*sqrt(3)/2); position = m*a1 + n*a2.
    const double root3_2 = std::sqrt(3.0) / 2.0;
    const long long n_max = static_cast<long long>(std::ceil(extent / (s * root3_2))) + 1;
    std::vector<std::pair<double, double>> center_xy;
    for (long long n = -n_max; n <= n_max; ++n) {
        const double y = static_cast<double>(n) * s * root3_2;
        const long long m_lo = static_cast<long long>(std::floor(-extent / s - static_cast<double>(n) / 2.0)) - 1;
        const long long m_hi = static_cast<long long>(std::ceil(extent / s - static_cast<double>(n) / 2.0)) + 1;
        for (long long m = m_lo; m <= m_hi; ++m) {
            const double x = (static_cast<double>(m) + static_cast<double>(n) / 2.0) * s;
            if (x * x + y * y > extent * extent) continue;
            city.centers.push_back(
                {offset_m(cfg.origin, x * 1000.0, y * 1000.0),
                 detail::lattice_level(cfg.k_factor, cfg.levels - 1, m, n)});
            center_xy.emplace_back(x, y);
        }
    }

    std::vector<long long> n_at_least(static_cast<std::size_t>(cfg.levels), 0);
    for (const auto& center : city.centers) {
        for (int l = 0; l <= center.level; ++l) n_at_least[static_cast<std::size_t>(l)] += 1;
    }
    if (n_at_least.back() == 0) {
        throw input_error("extent too small: no center reaches the top level");
    }

    for (int l = 0; l < cfg.levels; ++l) {
        for (int j = 0; j < cfg.products_per_level; ++j) {
            const std::string code = "L" + std::to_string(l) + "P" + std::to_string(j);
            city.product_level[code] = l;
            city.products.push_back(code);
        }
    }

    const auto count_per_level = detail::assortment_counts(
        n_at_least, cfg.shops_per_center_per_product, cfg.graded_assortment);

    long long total_shops = 0;
    for (const auto& center : city.centers) {
        for (int l = 0; l <= center.level; ++l) {
            total_shops += count_per_level[static_cast<std::size_t>(l)] * cfg.products_per_level;
        }
    }
    if (total_shops > 1'000'000) {
        throw input_error("lattice larger than 1e6 shops; shrink extent_km or counts");
    }

    // Industries group products across hierarchy levels (stride = industry
    // count in level-major order), so an industry fixed effect never absorbs
    // the product-level signal.
    const int total_products = cfg.levels * cfg.products_per_level;
    const int n_industries = std::min(9, std::max(1, total_products / 2));

    Rng rng(cfg.seed);
    city.center_products.resize(city.centers.size());
    for (std::size_t ci = 0; ci < city.centers.size(); ++ci) {
        const auto& center = city.centers[ci];
        for (int l = 0; l <= center.level; ++l) {
            for (int j = 0; j < cfg.products_per_level; ++j) {
                const int product_idx = l * cfg.products_per_level + j;
                city.center_products[ci].push_back(product_idx);
                const std::string& code = city.products[static_cast<std::size_t>(product_idx)];
                const std::string industry = "I" + std::to_string(product_idx % n_industries);
                for (long long i = 0; i < count_per_level[static_cast<std::size_t>(l)]; ++i) {
                    double dx = 0, dy = 0;
                    if (cfg.jitter_m > 0) rng.disc(cfg.jitter_m, dx, dy);
                    Shop shop;
                    shop.id = "C" + std::to_string(ci) + "_" + code + "_" + std::to_string(i);
                    shop.location = offset_m(center.point, dx, dy);
                    shop.product_code = code;
                    shop.industry_code = industry;
                    city.shops.push_back(std::move(shop));
                    city.shop_center.push_back(static_cast<int>(ci));
                }
            }
        }
    }
    return city;
}

// Gaussian blob city: the clustering oracle. Blob b gets its own exclusive
// products, so the count matrix is block-diagonal by construction.
inline SyntheticCity generate_blobs(int n_blobs, int shops_per_blob, double sigma_m, double spacing_km,
                                    int products_per_blob, std::uint64_t seed) {
    if (n_blobs < 1 || shops_per_blob < 1 || products_per_blob < 1) {
        throw input_error("blob counts must be positive");
    }
    if (!(spacing_km > 0) || sigma_m < 0) throw input_error("bad blob geometry");

    SyntheticCity city;
    city.origin = {37.55, 127.0};
    city.base_spacing_km = spacing_km;

    // Blob centers: nearest points of a triangular lattice with the given
    // spacing, so pairwise distances never fall below spacing_km.
    const double root3_2 = std::sqrt(3.0) / 2.0;
    std::vector<std::tuple<double, long long, long long>> lattice;
    const long long reach = static_cast<long long>(std::ceil(std::sqrt(static_cast<double>(n_blobs)))) + 2;
    for (long long n = -reach; n <= reach; ++n) {
        for (long long m = -reach; m <= reach; ++m) {
            const double x = (static_cast<double>(m) + static_cast<double>(n) / 2.0) * spacing_km;
            const double y = static_cast<double>(n) * spacing_km * root3_2;
            lattice.emplace_back(x * x + y * y, m, n);
        }
    }
    std::sort(lattice.begin(), lattice.end());

    Rng rng(seed);
    for (int b = 0; b < n_blobs; ++b) {
        const auto [d2, m, n] = lattice[static_cast<std::size_t>(b)];
        const double x = (static_cast<double>(m) + static_cast<double>(n) / 2.0) * spacing_km;
        const double y = static_cast<double>(n) * spacing_km * root3_2;
        city.centers.push_back({offset_m(city.origin, x * 1000.0, y * 1000.0), 0});
        city.extent_km = std::max(city.extent_km, std::sqrt(d2) + 3.0 * sigma_m / 1000.0);

        std::vector<int> stocked;
        for (int j = 0; j < products_per_blob; ++j) {
            const std::string code = "B" + std::to_string(b) + "P" + std::to_string(j);
            city.product_level[code] = b;  // group id: products are blob-exclusive
            stocked.push_back(static_cast<int>(city.products.size()));
            city.products.push_back(code);
        }
        city.center_products.push_back(std::move(stocked));

        for (int i = 0; i < shops_per_blob; ++i) {
            const int j = i % products_per_blob;
            Shop shop;
            shop.id = "B" + std::to_string(b) + "_" + std::to_string(i);
            shop.location = offset_m(city.centers.back().point, sigma_m * rng.normal(), sigma_m * rng.normal());
            shop.product_code = city.products[static_cast<std::size_t>(city.center_products.back()[static_cast<std::size_t>(j)])];
            shop.industry_code = "I" + std::to_string(b % 9);
            city.shops.push_back(std::move(shop));
            city.shop_center.push_back(b);
        }
    }
    return city;
}

// Consumer groups for every (center, stocked product): purchase cell at the
// center, home cell at a distance drawn uniformly in [0, range_profile(l)]
// where l is the product's hierarchy level. range_profile models the
// maximum distance consumers travel for goods of that level.
inline std::vector<ConsumerGroup> generate_consumers(const SyntheticCity& city, int groups_per_center,
                                                     const std::function<double(int)>& range_profile,
                                                     std::uint64_t seed) {
    if (groups_per_center < 1) throw input_error("groups_per_center must be positive");
    Rng rng(seed);
    std::vector<ConsumerGroup> groups;
    for (std::size_t ci = 0; ci < city.centers.size(); ++ci) {
        for (int product_idx : city.center_products[ci]) {
            const std::string& code = city.products[static_cast<std::size_t>(product_idx)];
            const int level = city.product_level.at(code);
            const double range_km = range_profile(level);
            if (!(range_km >= 0)) throw input_error("range_profile must be non-negative");
            for (int g = 0; g < groups_per_center; ++g) {
                ConsumerGroup group;
                group.age_decade = 20 + 10 * static_cast<int>(rng.uniform_index(5));
                group.gender = rng.uniform_index(2) == 0 ? Gender::female : Gender::male;
                group.product_code = code;
                group.purchase_count = 1 + static_cast<int>(rng.uniform_index(5));
                group.purchase_cell = snap_cell(city.centers[ci].point, 50.0, city.origin.lat);
                const double dist_km = rng.uniform() * range_km;
                const double theta = 2.0 * std::numbers::pi * rng.uniform();
                const GeoPoint home = offset_m(city.centers[ci].point, dist_km * 1000.0 * std::cos(theta),
                                               dist_km * 1000.0 * std::sin(theta));
                group.home_cell = snap_cell(home, 50.0, city.origin.lat);
                groups.push_back(std::move(group));
            }
        }
    }
    return groups;
}

// Synthetic census cells around each center, for exercising the population
// controls end to end: labor mass grows with center level, residential mass
// shrinks with it, floating sits in between. Cell sizes follow the real
// schemas (100 m census cells, 50 m floating cells).
inline std::vector<PopulationCell> generate_population_cells(const SyntheticCity& city,
                                                             std::uint64_t seed) {
    Rng rng(seed);
    std::vector<PopulationCell> cells;
    int max_level = 0;
    for (const auto& c : city.centers) max_level = std::max(max_level, c.level);
    for (const auto& center : city.centers) {
        const double level_up = static_cast<double>(center.level + 1);
        const double level_down = static_cast<double>(max_level - center.level + 1);
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                const GeoPoint p = offset_m(center.point, 100.0 * dx, 100.0 * dy);
                PopulationCell labor{snap_cell(p, 100.0, city.origin.lat), PopulationKind::labor,
                                     std::floor(200.0 * level_up * (0.5 + rng.uniform()))};
                PopulationCell resident{snap_cell(p, 100.0, city.origin.lat), PopulationKind::residential,
                                        std::floor(150.0 * level_down * (0.5 + rng.uniform()))};
                PopulationCell floating{snap_cell(p, 50.0, city.origin.lat), PopulationKind::floating,
                                        std::floor(100.0 * (level_up + level_down) * (0.5 + rng.uniform()))};
                cells.push_back(labor);
                cells.push_back(resident);
                cells.push_back(floating);
            }
        }
    }
    return cells;
}

// Card records carrying consumer groups, with synthesized purchase amounts.
inline std::vector<CardRecord> to_card_records(const std::vector<ConsumerGroup>& groups,
                                               std::uint64_t seed) {
    Rng rng(seed);
    std::vector<CardRecord> records;
    records.reserve(groups.size());
    for (const auto& g : groups) {
        CardRecord rec;
        rec.group = g;
        rec.amount_krw = std::floor(g.purchase_count * 1000.0 * (5.0 + 10.0 * rng.uniform()));
        rec.n_stores = 1 + static_cast<int>(rng.uniform_index(3));
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace urbc
