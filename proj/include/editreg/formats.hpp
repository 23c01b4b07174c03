#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "editreg/cloud.hpp"
#include "editreg/raster.hpp"

// Binary blobs: little-endian; 16-byte magic, u32 version, u32 dimensions,
// then the declared arrays back to back. Layouts are documented in
// docs/FORMATS.md.
namespace editreg::formats {

inline constexpr std::uint32_t kBlobVersion = 1;
inline constexpr std::string_view kDepthMagic{"EDITREG DEPTH\0\0\0", 16};
inline constexpr std::string_view kFeatureMagic{"EDITREG FEATURE\0", 16};
inline constexpr std::string_view kCloudMagic{"EDITREG CLOUD\0\0\0", 16};

std::vector<std::uint8_t> encode_depth(const DepthMap& depth);
DepthMap decode_depth(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_features(const FeatureRaster& features);
FeatureRaster decode_features(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_cloud(const FeatureCloud& cloud);
FeatureCloud decode_cloud(std::span<const std::uint8_t> bytes);

// 8-bit binary PGM (P5); nonzero = set.
std::vector<std::uint8_t> encode_pgm(const Mask& mask);
Mask decode_pgm(std::span<const std::uint8_t> bytes);
// Raw 8-bit gray PGM, used for label and artifact rasters.
std::vector<std::uint8_t> encode_pgm_gray(int width, int height, std::span<const std::uint8_t> values);
std::vector<std::uint8_t> decode_pgm_gray(std::span<const std::uint8_t> bytes, int& width, int& height);

// 8-bit binary PPM (P6).
std::vector<std::uint8_t> encode_ppm(const ImageFrame& image);
ImageFrame decode_ppm(std::span<const std::uint8_t> bytes);

// Throws MissingFile.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

DepthMap read_depth(const std::filesystem::path& path);
void write_depth(const std::filesystem::path& path, const DepthMap& depth);
FeatureRaster read_features(const std::filesystem::path& path);
void write_features(const std::filesystem::path& path, const FeatureRaster& features);
FeatureCloud read_cloud(const std::filesystem::path& path);
void write_cloud(const std::filesystem::path& path, const FeatureCloud& cloud);
Mask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const Mask& mask);
ImageFrame read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const ImageFrame& image);

}  // namespace editreg::formats
