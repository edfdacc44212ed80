#pragma once

// OSM XML road-map ingestion and the key-value map metadata sidecar.

#include <charconv>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pgeval/detail/xml.hpp"
#include "pgeval/error.hpp"
#include "pgeval/geo.hpp"
#include "pgeval/roadnet.hpp"

namespace pgeval {

inline constexpr double kDefaultResampleM = 1.0;

namespace detail {

[[nodiscard]] inline std::optional<double> parse_double(std::string_view s) noexcept {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

} // namespace detail

/// Parses the highway ways of an OSM XML document into projected (sinusoidal
/// about the mean longitude of the road nodes) and resampled polylines.
/// Ways with fewer than two node references are dropped.
[[nodiscard]] inline RoadStructure parse_osm(std::string_view document, double resample_m = kDefaultResampleM) {
    struct Way {
        std::string id;
        std::vector<std::string> refs;
        bool highway = false;
        bool area = false;
    };

    std::unordered_map<std::string, LatLon> nodes;
    std::vector<Way> ways;
    std::optional<Way> current;

    detail::XmlScanner scanner(document);
    scanner.run(
        [&](const detail::XmlStartTag& tag) {
            if (tag.name == "node") {
                const auto* id = tag.find("id");
                const auto* lat = tag.find("lat");
                const auto* lon = tag.find("lon");
                if (!id) throw ParseError("node without id", tag.offset);
                if (!lat || !lon) return; // deleted/placeholder nodes carry no position
                const auto la = detail::parse_double(*lat);
                const auto lo = detail::parse_double(*lon);
                if (!la || !lo) throw ParseError("node " + *id + " has a non-numeric lat/lon", tag.offset);
                nodes[*id] = LatLon{*la, *lo};
            } else if (tag.name == "way") {
                const auto* id = tag.find("id");
                if (!id) throw ParseError("way without id", tag.offset);
                current = Way{*id, {}, false, false};
            } else if (current && tag.name == "nd") {
                const auto* ref = tag.find("ref");
                if (!ref) throw ParseError("nd without ref in way " + current->id, tag.offset);
                current->refs.push_back(*ref);
            } else if (current && tag.name == "tag") {
                const auto* k = tag.find("k");
                const auto* v = tag.find("v");
                if (k && *k == "highway") current->highway = true;
                if (k && v && *k == "area" && *v == "yes") current->area = true;
            }
        },
        [&](std::string_view name) {
            if (name == "way" && current) {
                ways.push_back(std::move(*current));
                current.reset();
            }
        });

    std::vector<std::vector<LatLon>> gps_roads;
    std::vector<LatLon> all;
    for (const auto& w : ways) {
        if (!w.highway || w.area) continue;
        std::vector<LatLon> knots;
        for (const auto& ref : w.refs) {
            const auto it = nodes.find(ref);
            if (it == nodes.end()) throw ValidationError("way " + w.id + " references missing node " + ref);
            knots.push_back(it->second);
        }
        if (knots.size() < 2) continue;
        all.insert(all.end(), knots.begin(), knots.end());
        gps_roads.push_back(std::move(knots));
    }
    if (gps_roads.empty()) throw EmptyMapError("OSM document contains no highway ways");

    RoadStructure map;
    map.central_meridian = mean_longitude(all);
    for (const auto& knots : gps_roads) {
        const auto projected = project_sinusoidal(knots, *map.central_meridian);
        map.roads.push_back(resample_polyline(projected, resample_m));
    }
    return map;
}

/// Writes a map given in local meters as OSM XML, anchoring the local origin
/// at `anchor`. Used for synthetic fixtures.
[[nodiscard]] inline std::string write_osm(const RoadStructure& map, LatLon anchor) {
    constexpr double deg = std::numbers::pi / 180.0;
    const double y0 = kEarthRadiusM * anchor.lat * deg;
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\" generator=\"pgeval\">\n";
    char buf[128];
    long long next_id = 1;
    std::vector<std::vector<long long>> way_refs;
    for (const auto& road : map.roads) {
        std::vector<long long> refs;
        for (const auto& p : road) {
            const LatLon ll = unproject_sinusoidal({p.x, p.y + y0}, anchor.lon);
            std::snprintf(buf, sizeof buf, "  <node id=\"%lld\" lat=\"%.10f\" lon=\"%.10f\"/>\n", next_id, ll.lat,
                          ll.lon);
            out << buf;
            refs.push_back(next_id++);
        }
        way_refs.push_back(std::move(refs));
    }
    for (const auto& refs : way_refs) {
        out << "  <way id=\"" << next_id++ << "\">\n";
        for (long long r : refs) out << "    <nd ref=\"" << r << "\"/>\n";
        out << "    <tag k=\"highway\" v=\"service\"/>\n  </way>\n";
    }
    out << "</osm>\n";
    return out.str();
}

struct MapMetadata {
    std::optional<std::string> name;
    std::optional<double> area_acres;
};

/// Reads `key = value` lines; `#` starts a comment. Known keys: name,
/// area_acres.
[[nodiscard]] inline MapMetadata parse_map_metadata(std::string_view text) {
    MapMetadata meta;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("map metadata line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "name") {
            meta.name = value;
        } else if (key == "area_acres") {
            const auto v = detail::parse_double(value);
            if (!v || !(*v > 0.0))
                throw ValidationError("map metadata line " + std::to_string(lineno) + ": area_acres must be positive");
            meta.area_acres = *v;
        } else {
            throw ParseError("map metadata line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    return meta;
}

} // namespace pgeval
