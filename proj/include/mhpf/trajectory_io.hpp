#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "geometry.hpp"

namespace mhpf {

// Newline-delimited trajectory records: {"id": string, "points": [[x, y, ...], ...]}

inline nlohmann::json to_json(const Trajectory& t)
{
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : t.points) {
        points.push_back(std::vector<double>(p.coords().begin(), p.coords().end()));
    }
    return {{"id", t.id}, {"points", std::move(points)}};
}

inline Trajectory trajectory_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("id") || !j.contains("points")) {
        throw invalid_input("trajectory record needs \"id\" and \"points\"");
    }
    if (!j.at("id").is_string()) {
        throw invalid_input("trajectory id must be a string");
    }
    Trajectory t;
    t.id = j.at("id").get<std::string>();
    const auto& pts = j.at("points");
    if (!pts.is_array()) {
        throw invalid_input("trajectory '" + t.id + "': points must be an array");
    }
    for (const auto& p : pts) {
        if (!p.is_array() || p.empty()) {
            throw invalid_input("trajectory '" + t.id + "': each point must be a non-empty array of numbers");
        }
        std::vector<double> coords;
        for (const auto& c : p) {
            if (!c.is_number()) {
                throw invalid_input("trajectory '" + t.id + "': non-numeric coordinate");
            }
            coords.push_back(c.get<double>());
        }
        t.points.emplace_back(std::move(coords));
    }
    validate(t);
    return t;
}

inline void write_trajectories(std::ostream& out, const std::vector<Trajectory>& ts)
{
    for (const auto& t : ts) {
        out << to_json(t).dump() << '\n';
    }
}

/// Reads all records; rejects ragged dimensions within and across trajectories.
inline std::vector<Trajectory> read_trajectories(std::istream& in)
{
    std::vector<Trajectory> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw invalid_input("line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(trajectory_from_json(j));
        if (out.back().dim() != out.front().dim()) {
            throw invalid_input("line " + std::to_string(line_no) + ": trajectory dimension differs from the first record");
        }
    }
    return out;
}

} // namespace mhpf
