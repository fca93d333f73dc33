#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wbrt/aperture.hpp"
#include "wbrt/geometry.hpp"
#include "wbrt/projection.hpp"
#include "wbrt/util.hpp"

namespace wbrt {

struct DistanceReport {
    double hausdorff = 0;
    double mean_surface = 0;
    double max_ab = 0;   // directed a -> b
    double max_ba = 0;
    double mean_ab = 0;
    double mean_ba = 0;
    double spacing = 0.5;
};

DistanceReport surface_distances(const Polygon2D& a, const Polygon2D& b, double spacing = 0.5);

struct LensProxy {
    std::string label;
    bool applicable = false;
    bool clear = false;
    double margin = 0;  // mm, negative when the lens reaches into the aperture
};

struct ProxyReport {
    double brain_coverage = 0;
    std::vector<LensProxy> lenses;
};

ProxyReport proxies(const AperturePolygon& aperture, const SilhouetteSet& s);

// Signed distance from a lens silhouette to the aperture boundary.
double lens_margin(const AperturePolygon& aperture, const BevSilhouette& lens);

struct QaReport {
    DistanceReport distances;
    bool pass = false;
    double threshold = 14;
    std::optional<ProxyReport> proxies_1;
    std::optional<ProxyReport> proxies_2;
    std::string provenance_1 = "approach1";
    std::string provenance_2;
    std::vector<std::pair<std::string, std::string>> inputs;  // file name, sha256
    std::vector<std::string> warnings;
};

QaReport qa_compare(const AperturePolygon& a1, const AperturePolygon& a2, double threshold = 14);

json to_json(const DistanceReport& d);
json to_json(const ProxyReport& p);
json to_json(const QaReport& q);

}  // namespace wbrt
