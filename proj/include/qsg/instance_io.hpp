#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "qsg/instance.hpp"

namespace qsg {

inline constexpr int kInstanceFormatVersion = 1;

// Instance file schema (JSON, format_version 1):
//   { "format_version": 1, "n_centers": int, "lambda": num, "m": num,
//     "cap_C": int, "min_NP": int,
//     "reward_def": [num], "loss_def": [num], "reward_att": [num], "loss_att": [num],
//     "partitions": [[int]], "beta": [num] }
// Unknown keys are ignored; missing keys are parse errors.

inline nlohmann::json instance_to_json(const GameInstance& g) {
    nlohmann::json j;
    j["format_version"] = kInstanceFormatVersion;
    j["n_centers"] = g.n_centers;
    j["lambda"] = g.lambda;
    j["m"] = g.m;
    j["cap_C"] = g.cap_C;
    j["min_NP"] = g.min_NP;
    j["reward_def"] = g.reward_def;
    j["loss_def"] = g.loss_def;
    j["reward_att"] = g.reward_att;
    j["loss_att"] = g.loss_att;
    j["partitions"] = g.partitions;
    j["beta"] = g.beta;
    return j;
}

inline GameInstance instance_from_json(const nlohmann::json& j) {
    GameInstance g;
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kInstanceFormatVersion)
            throw ParseError("unsupported instance format_version " + std::to_string(version));
        g.n_centers = j.at("n_centers").get<int>();
        g.lambda = j.at("lambda").get<double>();
        g.m = j.at("m").get<double>();
        g.cap_C = j.at("cap_C").get<int>();
        g.min_NP = j.at("min_NP").get<int>();
        g.reward_def = j.at("reward_def").get<std::vector<double>>();
        g.loss_def = j.at("loss_def").get<std::vector<double>>();
        g.reward_att = j.at("reward_att").get<std::vector<double>>();
        g.loss_att = j.at("loss_att").get<std::vector<double>>();
        g.partitions = j.at("partitions").get<std::vector<std::vector<int>>>();
        g.beta = j.at("beta").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("instance file: ") + e.what());
    }
    g.finalize();
    validate_instance(g);
    return g;
}

inline GameInstance read_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open instance file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        // e.what() carries byte offset and the offending token
        throw ParseError("instance file " + path + ": " + e.what());
    }
    return instance_from_json(j);
}

inline void write_instance(const GameInstance& g, const std::string& path) {
    validate_instance(g);
    std::ofstream out(path);
    if (!out) throw Error("cannot write instance file: " + path);
    out << instance_to_json(g).dump(2) << '\n';
}

}  // namespace qsg
