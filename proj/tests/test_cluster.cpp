#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <set>

#include "urbc/cluster.hpp"
#include "urbc/rng.hpp"
#include "urbc/synth.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

urbc::Shop make_shop(std::string id, double lat, double lon, std::string product = "P") {
    urbc::Shop s;
    s.id = std::move(id);
    s.location = {lat, lon};
    s.product_code = std::move(product);
    s.industry_code = "I0";
    return s;
}

std::vector<urbc::Shop> random_shops(std::size_t n, urbc::Rng& rng) {
    std::vector<urbc::Shop> shops;
    for (std::size_t i = 0; i < n; ++i) {
        shops.push_back(make_shop("s" + std::to_string(i), rng.uniform(37.45, 37.65),
                                  rng.uniform(126.9, 127.1)));
    }
    return shops;
}

// Independent oracle: plain double loop with its own haversine (atan2 form,
// written separately from the library's asin form).
double oracle_distance_km(const urbc::GeoPoint& a, const urbc::GeoPoint& b) {
    const double p1 = a.lat * std::numbers::pi / 180.0;
    const double p2 = b.lat * std::numbers::pi / 180.0;
    const double dp = (b.lat - a.lat) * std::numbers::pi / 180.0;
    const double dl = (b.lon - a.lon) * std::numbers::pi / 180.0;
    const double h = std::sin(dp / 2) * std::sin(dp / 2) +
                     std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
    return 6371.0088 * 2.0 * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
}

std::vector<double> oracle_effective_counts(const std::vector<urbc::Shop>& shops, double gamma) {
    std::vector<double> counts(shops.size(), 0.0);
    for (std::size_t i = 0; i < shops.size(); ++i) {
        for (std::size_t j = 0; j < shops.size(); ++j) {
            counts[i] += std::exp(-gamma * oracle_distance_km(shops[i].location, shops[j].location));
        }
    }
    return counts;
}

}  // namespace

TEST_CASE("effective count of a single shop is its self term") {
    const std::vector<urbc::Shop> shops = {make_shop("a", 37.5, 127.0)};
    const auto counts = urbc::effective_counts(shops, {});
    REQUIRE(counts.size() == 1);
    REQUIRE_THAT(counts[0], WithinAbs(1.0, 1e-12));
}

TEST_CASE("two co-located shops each count the other fully") {
    const std::vector<urbc::Shop> shops = {make_shop("a", 37.5, 127.0), make_shop("b", 37.5, 127.0)};
    for (bool exact : {false, true}) {
        const auto counts = urbc::effective_counts(shops, {}, exact);
        REQUIRE_THAT(counts[0], WithinAbs(2.0, 1e-12));
        REQUIRE_THAT(counts[1], WithinAbs(2.0, 1e-12));
    }
}

TEST_CASE("two shops a kilometer apart decay by exp(-gamma)") {
    const urbc::GeoPoint base{37.5, 127.0};
    const auto other = urbc::offset_m(base, 0.0, 1000.0);
    const std::vector<urbc::Shop> shops = {make_shop("a", base.lat, base.lon),
                                           make_shop("b", other.lat, other.lon)};
    const auto counts = urbc::effective_counts(shops, {}, true);
    REQUIRE_THAT(counts[0], WithinAbs(1.0 + std::exp(-7.58), 1e-6));
    REQUIRE_THAT(counts[1], WithinAbs(counts[0], 1e-12));
}

TEST_CASE("effective counts: empty input is rejected") {
    REQUIRE_THROWS_AS(urbc::effective_counts({}, {}), urbc::input_error);
}

TEST_CASE("exact effective counts match the brute-force oracle") {
    urbc::Rng rng(21);
    const auto shops = random_shops(400, rng);
    const urbc::DecayParams params;
    const auto exact = urbc::effective_counts(shops, params, true);
    const auto oracle = oracle_effective_counts(shops, params.gamma);
    for (std::size_t i = 0; i < shops.size(); ++i) {
        REQUIRE_THAT(exact[i], WithinRel(oracle[i], 1e-9));
    }
}

TEST_CASE("grid-accelerated counts stay within the documented truncation bound") {
    urbc::Rng rng(22);
    const auto shops = random_shops(500, rng);
    const urbc::DecayParams params;
    const auto grid = urbc::effective_counts(shops, params, false);
    const auto exact = urbc::effective_counts(shops, params, true);
    const double bound = 1.2e-4 * static_cast<double>(shops.size());
    for (std::size_t i = 0; i < shops.size(); ++i) {
        REQUIRE(exact[i] >= grid[i] - 1e-12);  // truncation only drops terms
        REQUIRE(exact[i] - grid[i] <= bound);
    }
}

TEST_CASE("effective counts are identical across thread counts") {
    urbc::Rng rng(23);
    const auto shops = random_shops(300, rng);
    const auto one = urbc::effective_counts(shops, {}, false, 1);
    const auto eight = urbc::effective_counts(shops, {}, false, 8);
    REQUIRE(one == eight);
}

TEST_CASE("increasing gamma never increases any effective count") {
    urbc::Rng rng(24);
    const auto shops = random_shops(120, rng);
    urbc::DecayParams lo_params, hi_params;
    lo_params.gamma = 3.0;
    hi_params.gamma = 9.0;
    const auto lo = urbc::effective_counts(shops, lo_params, true);
    const auto hi = urbc::effective_counts(shops, hi_params, true);
    for (std::size_t i = 0; i < shops.size(); ++i) REQUIRE(hi[i] <= lo[i] + 1e-12);
}

TEST_CASE("single shop is the sole peak") {
    const std::vector<urbc::Shop> shops = {make_shop("a", 37.5, 127.0)};
    const auto counts = urbc::effective_counts(shops, {});
    REQUIRE(urbc::detect_peaks(shops, counts, {}) == std::vector<int>{0});
}

TEST_CASE("equal-density tie goes to the smaller shop id") {
    const urbc::GeoPoint base{37.5, 127.0};
    const auto near = urbc::offset_m(base, 10.0, 0.0);
    const std::vector<urbc::Shop> shops = {make_shop("b", base.lat, base.lon),
                                           make_shop("a", near.lat, near.lon)};
    const auto counts = urbc::effective_counts(shops, {}, true);
    REQUIRE_THAT(counts[0], WithinAbs(counts[1], 1e-12));
    const auto peaks = urbc::detect_peaks(shops, counts, {});
    REQUIRE(peaks.size() == 1);
    REQUIRE(shops[static_cast<std::size_t>(peaks[0])].id == "a");
}

TEST_CASE("three separated blobs yield exactly three peaks and clusters") {
    const auto city = urbc::generate_blobs(3, 100, 100.0, 2.0, 1, 31);
    urbc::ClusterParams params;
    const auto counts = urbc::effective_counts(city.shops, params.decay);
    const auto peaks = urbc::detect_peaks(city.shops, counts, params.decay);
    REQUIRE(peaks.size() == 3);

    const auto result = urbc::grow_clusters(city.shops, counts, peaks, params);
    REQUIRE(result.clusters.size() == 3);

    // Every cluster contains at least 95 of its blob's 100 shops.
    for (const auto& cluster : result.clusters) {
        std::map<int, int> blob_votes;
        for (const auto& id : cluster.member_ids) {
            blob_votes[id[1] - '0'] += 1;  // ids look like B<blob>_<i>
        }
        int best = 0;
        for (const auto& [blob, votes] : blob_votes) best = std::max(best, votes);
        REQUIRE(best >= 95);
    }
}

TEST_CASE("all shops within the cutoff of one peak form a single cluster") {
    urbc::Rng rng(32);
    std::vector<urbc::Shop> shops;
    const urbc::GeoPoint base{37.5, 127.0};
    for (int i = 0; i < 20; ++i) {
        const auto p = urbc::offset_m(base, rng.uniform(-200, 200), rng.uniform(-200, 200));
        shops.push_back(make_shop("s" + std::to_string(i), p.lat, p.lon));
    }
    const auto result = urbc::detect_clusters(shops, {});
    REQUIRE(result.clusters.size() == 1);
    REQUIRE(result.clusters[0].member_ids.size() == shops.size());
    REQUIRE(result.unassigned_ids.empty());
}

TEST_CASE("clusters partition the shops") {
    const auto city = urbc::generate_blobs(4, 80, 120.0, 2.0, 1, 33);
    const auto result = urbc::detect_clusters(city.shops, {});
    std::set<std::string> seen;
    std::size_t assigned = 0;
    for (const auto& cluster : result.clusters) {
        for (const auto& id : cluster.member_ids) {
            REQUIRE(seen.insert(id).second);  // disjoint members
            ++assigned;
        }
    }
    REQUIRE(assigned + result.unassigned_ids.size() == city.shops.size());
}

TEST_CASE("shuffling the input changes no cluster membership") {
    const auto city = urbc::generate_blobs(3, 60, 100.0, 2.0, 1, 34);
    auto shuffled = city.shops;
    urbc::Rng rng(35);
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        std::swap(shuffled[i - 1], shuffled[rng.uniform_index(i)]);
    }
    const auto a = urbc::detect_clusters(city.shops, {});
    const auto b = urbc::detect_clusters(shuffled, {});
    REQUIRE(a.clusters.size() == b.clusters.size());
    for (std::size_t k = 0; k < a.clusters.size(); ++k) {
        REQUIRE(a.clusters[k].member_ids == b.clusters[k].member_ids);
        REQUIRE(a.clusters[k].cluster_id == b.clusters[k].cluster_id);
    }
    REQUIRE(a.unassigned_ids == b.unassigned_ids);
}

TEST_CASE("shops beyond the assignment cutoff stay unassigned") {
    std::vector<urbc::Shop> shops;
    const urbc::GeoPoint base{37.5, 127.0};
    for (int i = 0; i < 6; ++i) {
        const auto p = urbc::offset_m(base, 10.0 * i, 0.0);
        shops.push_back(make_shop("s" + std::to_string(i), p.lat, p.lon));
    }
    const auto far = urbc::offset_m(base, 5000.0, 0.0);
    shops.push_back(make_shop("far", far.lat, far.lon));
    urbc::ClusterParams params;
    params.min_cluster_size = 2;
    const auto result = urbc::detect_clusters(shops, params);
    REQUIRE(result.clusters.size() == 1);
    REQUIRE(result.unassigned_ids == std::vector<std::string>{"far"});
}

TEST_CASE("small clusters dissolve into the unassigned pool") {
    std::vector<urbc::Shop> shops;
    const urbc::GeoPoint base{37.5, 127.0};
    for (int i = 0; i < 8; ++i) {
        const auto p = urbc::offset_m(base, 15.0 * i, 0.0);
        shops.push_back(make_shop("a" + std::to_string(i), p.lat, p.lon));
    }
    const auto lone = urbc::offset_m(base, 3000.0, 0.0);
    shops.push_back(make_shop("b0", lone.lat, lone.lon));
    shops.push_back(make_shop("b1", lone.lat, lone.lon));
    urbc::ClusterParams params;  // min_cluster_size = 5
    const auto result = urbc::detect_clusters(shops, params);
    REQUIRE(result.clusters.size() == 1);
    REQUIRE(result.unassigned_ids.size() == 2);
}

TEST_CASE("cluster_of_point resolves centers and rejects far points") {
    const auto city = urbc::generate_blobs(3, 100, 100.0, 2.0, 1, 36);
    const auto result = urbc::detect_clusters(city.shops, {});
    for (const auto& cluster : result.clusters) {
        REQUIRE(urbc::cluster_of_point(result.clusters, cluster.center) == cluster.cluster_id);
    }
    const auto far = urbc::offset_m(city.origin, 50'000.0, 0.0);
    REQUIRE_FALSE(urbc::cluster_of_point(result.clusters, far).has_value());

    // A synthetic blob point maps to its own blob's cluster.
    for (std::size_t i = 0; i < city.shops.size(); i += 37) {
        const auto id = urbc::cluster_of_point(result.clusters, city.shops[i].location);
        if (!id) continue;
        const auto& cluster = result.clusters[static_cast<std::size_t>(*id)];
        const int blob = city.shop_center[i];
        const double d = urbc::geodesic_distance(cluster.center,
                                                 city.centers[static_cast<std::size_t>(blob)].point);
        REQUIRE(d < 0.5);  // the matched cluster is the blob's own center
    }
}
