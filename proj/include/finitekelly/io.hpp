#pragma once

// JSON file formats:
//   Dist:   {"alphabet": k, "probs": [...]}
//   tensor: {"sizes": [kx, ky, kz], "probs": [... row-major ...]}

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "finitekelly/dist.hpp"
#include "finitekelly/sideinfo.hpp"

namespace finitekelly::io {

using json = nlohmann::ordered_json;

/// Shortest round-trippable decimal form of a double.
inline std::string fmt(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v)
            break;
    }
    return buf;
}

/// JSON number, with non-finite values carried as the strings "inf", "-inf", "nan".
inline json num(double v)
{
    if (!std::isfinite(v))
        return fmt(v);
    return v;
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open input file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument("malformed JSON in '" + path + "': " + e.what());
    }
}

inline std::vector<double> probs_of(const json& j, const std::string& where)
{
    if (!j.is_object() || !j.contains("probs") || !j["probs"].is_array())
        throw std::invalid_argument(where + ": missing \"probs\" array");
    std::vector<double> out;
    for (const auto& v : j["probs"]) {
        if (!v.is_number())
            throw std::invalid_argument(where + ": non-numeric probability");
        out.push_back(v.get<double>());
    }
    return out;
}

inline Dist dist_from_json(const json& j, const std::string& where = "distribution")
{
    auto probs = probs_of(j, where);
    if (j.contains("alphabet")) {
        if (!j["alphabet"].is_number_unsigned() || j["alphabet"].get<std::size_t>() != probs.size())
            throw std::invalid_argument(where + ": \"alphabet\" does not match the number of probabilities");
    }
    try {
        return Dist(std::move(probs));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where + ": " + e.what());
    }
}

inline TripartiteDist tensor_from_json(const json& j, const std::string& where = "tensor")
{
    if (!j.is_object() || !j.contains("sizes") || !j["sizes"].is_array() || j["sizes"].size() != 3)
        throw std::invalid_argument(where + ": \"sizes\" must be an array of three positive integers");
    std::array<std::size_t, 3> sizes{};
    for (std::size_t a = 0; a < 3; ++a) {
        if (!j["sizes"][a].is_number_unsigned() || j["sizes"][a].get<std::size_t>() == 0)
            throw std::invalid_argument(where + ": \"sizes\" must be an array of three positive integers");
        sizes[a] = j["sizes"][a].get<std::size_t>();
    }
    auto probs = probs_of(j, where);
    if (probs.size() != sizes[0] * sizes[1] * sizes[2])
        throw std::invalid_argument(where + ": number of probabilities does not match \"sizes\"");
    try {
        return TripartiteDist(sizes, std::move(probs));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where + ": " + e.what());
    }
}

inline Dist load_dist(const std::string& path) { return dist_from_json(read_json_file(path), path); }
inline TripartiteDist load_tensor(const std::string& path) { return tensor_from_json(read_json_file(path), path); }

inline json to_json(const Dist& p)
{
    json j;
    j["alphabet"] = p.size();
    j["probs"] = p.vec();
    return j;
}

inline json to_json(const TripartiteDist& p)
{
    const auto s = p.sizes();
    json j;
    j["sizes"] = {s[0], s[1], s[2]};
    j["probs"] = p.joint().flat().vec();
    return j;
}

inline json to_json(const CondStrategy& q)
{
    json rows = json::array();
    for (const Dist& r : q.rows())
        rows.push_back(r.vec());
    return rows;
}

inline void save_json(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out)
        throw std::invalid_argument("cannot open output file '" + path + "'");
    out << j.dump(2) << '\n';
}

} // namespace finitekelly::io
