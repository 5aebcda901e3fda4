// urbc: urban centrality from geo-located business data.
//
// Pipeline stages communicate through CSV files in the output directory:
//   synth -> cluster -> complexity -> market -> regress / correlate /
//   export-geojson
// Each stage can also run on externally supplied files.

#include <CLI11.hpp>

#include "urbc/commands.hpp"

int main(int argc, char** argv) {
    urbc::RunConfig config;

    CLI::App app{"urban centrality metrics from shop locations"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; command-line flags win");
    app.add_option("--out-dir", config.out_dir, "directory for stage inputs/outputs")
        ->capture_default_str();
    app.add_option("--seed", config.seed, "master seed for synthetic generation")->capture_default_str();
    app.add_option("--threads", config.cluster.threads, "worker threads for the clustering stage")
        ->capture_default_str();
    app.add_flag("--exact-distances", config.cluster.exact_distances,
                 "evaluate all shop pairs instead of the bucket grid");

    auto* synth = app.add_subcommand("synth", "generate a synthetic city (shops, consumers, population)");
    synth->add_option("--kind", config.synth_kind, "christaller or blobs")->capture_default_str();
    synth->add_option("--levels", config.christaller.levels, "hierarchy levels (1..6)")
        ->capture_default_str();
    synth->add_option("--base-spacing-km", config.christaller.base_spacing_km,
                      "market spacing of the lowest level")
        ->capture_default_str();
    synth->add_option("--k-factor", config.christaller.k_factor, "Christaller K (3, 4 or 7)")
        ->capture_default_str();
    synth->add_option("--shops-per-center", config.christaller.shops_per_center_per_product,
                      "base shop count per center and product")
        ->capture_default_str();
    synth->add_option("--jitter-m", config.christaller.jitter_m, "positional noise radius in meters")
        ->capture_default_str();
    synth->add_option("--products-per-level", config.christaller.products_per_level,
                      "distinct products per hierarchy level")
        ->capture_default_str();
    synth->add_option("--extent-km", config.christaller.extent_km,
                      "disc radius; 0 picks 2.5x the top-level spacing")
        ->capture_default_str();
    synth->add_flag("!--uniform-counts", config.christaller.graded_assortment,
                    "equal shop counts for all product levels (disables the graded assortment)");
    synth->add_option("--blobs", config.blobs_n, "number of blobs")->capture_default_str();
    synth->add_option("--blob-shops", config.blobs_shops, "shops per blob")->capture_default_str();
    synth->add_option("--blob-sigma-m", config.blobs_sigma_m, "blob standard deviation in meters")
        ->capture_default_str();
    synth->add_option("--blob-spacing-km", config.blobs_spacing_km, "blob center spacing")
        ->capture_default_str();
    synth->add_option("--blob-products", config.blobs_products, "products per blob")
        ->capture_default_str();
    synth->add_option("--groups-per-center", config.groups_per_center,
                      "consumer groups per center and product")
        ->capture_default_str();
    synth->add_option("--range-mode", config.range_mode,
                      "consumer range profile: planted ((level+1)*scale) or constant (scale)")
        ->capture_default_str();
    synth->add_option("--range-scale-km", config.range_scale_km, "consumer range scale")
        ->capture_default_str();

    auto* cluster = app.add_subcommand("cluster", "detect amenity clusters from shop locations");
    cluster->add_option("--shops", config.shops_path, "shops CSV (default <out-dir>/shops.csv)");
    cluster->add_option("--gamma", config.cluster.decay.gamma, "distance-decay rate per km")
        ->capture_default_str();
    cluster->add_option("--peak-radius-m", config.cluster.decay.peak_radius_m,
                        "local-maximum window in meters")
        ->capture_default_str();
    cluster->add_option("--min-peak-density", config.cluster.decay.min_peak_density,
                        "drop peaks below this effective count (0 disables)")
        ->capture_default_str();
    cluster->add_option("--assignment-cutoff-m", config.cluster.assignment_cutoff_m,
                        "max shop-to-peak distance")
        ->capture_default_str();
    cluster->add_option("--min-cluster-size", config.cluster.min_cluster_size,
                        "dissolve clusters smaller than this")
        ->capture_default_str();

    auto* complexity = app.add_subcommand("complexity", "RCA incidence and ECI/PCI scores");
    complexity->add_option("--shops", config.shops_path, "shops CSV (default <out-dir>/shops.csv)");
    complexity->add_option("--method", config.method, "reflections or eigen")->capture_default_str();
    complexity->add_option("--max-iter", config.max_iter, "reflections iteration cap")
        ->capture_default_str();

    auto* market = app.add_subcommand("market", "market-boundary distances and consumer travel");
    market->add_option("--card", config.card_path, "card CSV (default <out-dir>/card.csv)");
    market->add_flag("--per-product", config.per_product,
                     "one row per product (global minimum) instead of one per market");

    auto* regress = app.add_subcommand("regress", "market-boundary and consumer-travel regressions");
    regress->add_option("--shops", config.shops_path, "shops CSV (default <out-dir>/shops.csv)");
    regress->add_option("--card", config.card_path, "card CSV (default <out-dir>/card.csv)");
    regress->add_option("--population", config.population_path,
                        "population CSV (default <out-dir>/population.csv)");
    regress->add_option("--land-price", config.land_price_path,
                        "land price CSV (default <out-dir>/land_price.csv)");

    auto* correlate = app.add_subcommand("correlate", "correlation, tier and contingency tables");
    correlate->add_option("--shops", config.shops_path, "shops CSV (default <out-dir>/shops.csv)");
    correlate->add_option("--population", config.population_path,
                          "population CSV (default <out-dir>/population.csv)");
    correlate->add_option("--land-price", config.land_price_path,
                          "land price CSV (default <out-dir>/land_price.csv)");
    correlate->add_option("--bins", config.n_bins, "rank-contingency bins")->capture_default_str();
    correlate->add_option("--tiers", config.n_tiers, "ECI tier count")->capture_default_str();

    auto* geojson = app.add_subcommand("export-geojson", "cluster point features with scores");
    geojson->add_option("--tiers", config.n_tiers, "ECI tier count")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (synth->parsed()) return urbc::cmd_synth(config);
    if (cluster->parsed()) return urbc::cmd_cluster(config);
    if (complexity->parsed()) return urbc::cmd_complexity(config);
    if (market->parsed()) return urbc::cmd_market(config);
    if (regress->parsed()) return urbc::cmd_regress(config);
    if (correlate->parsed()) return urbc::cmd_correlate(config);
    if (geojson->parsed()) return urbc::cmd_export_geojson(config);
    return 1;
}
