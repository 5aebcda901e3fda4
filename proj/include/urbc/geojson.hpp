#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "urbc/cluster.hpp"
#include "urbc/complexity.hpp"
#include "urbc/econometrics.hpp"

namespace urbc {

// RFC 7946 FeatureCollection: one Point feature per scored cluster,
// coordinates in [longitude, latitude] order.
inline nlohmann::json clusters_to_geojson(const std::vector<AmenityCluster>& clusters,
                                          const ComplexityScores& scores, int n_tiers = 3) {
    std::vector<double> eci(scores.eci.data(), scores.eci.data() + scores.eci.size());
    const auto tiers = eci_tiers(eci, scores.cluster_ids, n_tiers);
    std::map<int, std::pair<double, int>> score_by_id;  // eci, tier
    std::map<int, int> diversity_by_id;
    for (std::size_t i = 0; i < scores.cluster_ids.size(); ++i) {
        score_by_id[scores.cluster_ids[i]] = {scores.eci[static_cast<Eigen::Index>(i)], tiers[i]};
        diversity_by_id[scores.cluster_ids[i]] = scores.diversity[static_cast<Eigen::Index>(i)];
    }

    nlohmann::json features = nlohmann::json::array();
    for (const auto& cluster : clusters) {
        const auto it = score_by_id.find(cluster.cluster_id);
        if (it == score_by_id.end()) continue;  // pruned out of the incidence matrix
        nlohmann::json feature;
        feature["type"] = "Feature";
        feature["geometry"] = {{"type", "Point"},
                               {"coordinates", {cluster.center.lon, cluster.center.lat}}};
        feature["properties"] = {{"cluster_id", cluster.cluster_id},
                                 {"eci", it->second.first},
                                 {"diversity", diversity_by_id.at(cluster.cluster_id)},
                                 {"tier", tier_label(it->second.second, n_tiers)},
                                 {"n_shops", cluster.member_ids.size()},
                                 {"radius_m", cluster.radius_m}};
        features.push_back(std::move(feature));
    }
    return nlohmann::json{{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

}  // namespace urbc
