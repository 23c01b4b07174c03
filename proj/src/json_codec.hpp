#pragma once

// Internal JSON helpers shared by the archive code, the pipeline report and
// the command-line tool. Decoders fail with InvariantViolation naming the
// field and its location.

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "editreg/filter.hpp"
#include "editreg/geometry.hpp"
#include "editreg/register.hpp"

namespace editreg::jsonc {

using nlohmann::json;

// Two-space indent, keys sorted, trailing newline.
std::string dump(const json& j);
json parse(std::string_view text, const std::string& where);

const json& field(const json& j, const char* key, const std::string& where);
double number(const json& j, const char* key, const std::string& where);
int integer(const json& j, const char* key, const std::string& where);
std::string text(const json& j, const char* key, const std::string& where);
std::vector<double> numbers(const json& j, const char* key, std::size_t n, const std::string& where);

// Checks "format" and "format_version"; a version mismatch throws
// FormatVersionMismatch.
void check_format(const json& j, const char* format, int version, const std::string& where);

json encode(const Vec3& v);
json encode(const RigidTransform& t);
json encode(const SimilarityTransform& t);
json encode(const FilterStageStats& s);
json encode(const RegistrationResult& r);
json encode_points(const std::vector<Vec3>& pts);

Vec3 decode_vec(const json& j, const char* key, const std::string& where);
RigidTransform decode_rigid(const json& j, const std::string& where);
std::vector<Vec3> decode_points(const json& j, const char* key, const std::string& where);

}  // namespace editreg::jsonc
