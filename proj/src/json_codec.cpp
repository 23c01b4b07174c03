#include "json_codec.hpp"

#include <algorithm>

#include "editreg/error.hpp"

namespace editreg::jsonc {

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse(std::string_view body, const std::string& where) {
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::InvariantViolation, where + ": malformed JSON (" + e.what() + ")");
    }
}

const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) {
        fail(ErrorCode::InvariantViolation, where + ": missing field '" + key + "'");
    }
    return j.at(key);
}

double number(const json& j, const char* key, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_number()) fail(ErrorCode::InvariantViolation, where + ": field '" + key + "' is not a number");
    return v.get<double>();
}

int integer(const json& j, const char* key, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_number_integer()) fail(ErrorCode::InvariantViolation, where + ": field '" + key + "' is not an integer");
    return v.get<int>();
}

std::string text(const json& j, const char* key, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_string()) fail(ErrorCode::InvariantViolation, where + ": field '" + key + "' is not a string");
    return v.get<std::string>();
}

std::vector<double> numbers(const json& j, const char* key, std::size_t n, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_array() || v.size() != n) {
        fail(ErrorCode::InvariantViolation,
             where + ": field '" + key + "' must be an array of " + std::to_string(n) + " numbers");
    }
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) fail(ErrorCode::InvariantViolation, where + ": field '" + key + "' holds a non-number");
        out.push_back(e.get<double>());
    }
    return out;
}

void check_format(const json& j, const char* format, int version, const std::string& where) {
    if (text(j, "format", where) != format) {
        fail(ErrorCode::InvariantViolation, where + ": format is not '" + std::string(format) + "'");
    }
    const int found = integer(j, "format_version", where);
    if (found != version) {
        fail(ErrorCode::FormatVersionMismatch,
             where + ": format_version " + std::to_string(found) + ", expected " + std::to_string(version));
    }
}

json encode(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json encode(const RigidTransform& t) {
    return {{"rotation", t.rotation().m}, {"translation", encode(t.translation())}};
}

json encode(const SimilarityTransform& t) {
    return {{"scale", t.scale()}, {"rotation", t.rotation().m}, {"translation", encode(t.translation())}};
}

json encode(const FilterStageStats& s) {
    return {{"input", s.input},
            {"layers", s.layers},
            {"layers_too_small", s.layers_too_small},
            {"layers_rejected", s.layers_rejected},
            {"after_intra", s.after_intra},
            {"after_inter", s.after_inter}};
}

json encode(const RegistrationResult& r) {
    return {{"passive", encode(r.passive)},
            {"active_raw", encode(r.active_raw)},
            {"active_unified", encode(r.active_unified)},
            {"rel_obs", encode(r.rel_obs)},
            {"T_a_world", encode(r.world)},
            {"residuals", {{"passive", r.residuals.passive}, {"active", r.residuals.active}}},
            {"scale_gap", r.scale_gap},
            {"scale_warning", r.scale_warning},
            {"scale_unified", r.scale_unified}};
}

json encode_points(const std::vector<Vec3>& pts) {
    json a = json::array();
    for (const auto& p : pts) a.push_back(encode(p));
    return a;
}

Vec3 decode_vec(const json& j, const char* key, const std::string& where) {
    const auto v = numbers(j, key, 3, where);
    return {v[0], v[1], v[2]};
}

RigidTransform decode_rigid(const json& j, const std::string& where) {
    const auto r = numbers(j, "rotation", 9, where);
    Mat3 m;
    std::copy(r.begin(), r.end(), m.m.begin());
    const Vec3 t = decode_vec(j, "translation", where);
    try {
        return RigidTransform(m, t);
    } catch (const Error& e) {
        fail(ErrorCode::InvariantViolation, where + ": " + e.detail());
    }
}

std::vector<Vec3> decode_points(const json& j, const char* key, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_array() || v.empty()) {
        fail(ErrorCode::InvariantViolation, where + ": field '" + key + "' must be a non-empty array");
    }
    std::vector<Vec3> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const json& p = v[i];
        if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() || !p[2].is_number()) {
            fail(ErrorCode::InvariantViolation,
                 where + ": field '" + key + "[" + std::to_string(i) + "]' must be 3 numbers");
        }
        out.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
    return out;
}

}  // namespace editreg::jsonc
