#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pcup/curvature.hpp"
#include "pcup/metrics.hpp"
#include "pcup/point_cloud.hpp"

namespace pcup {

enum class CloudFormat { Xyz, Ply };

/// From the file extension (.xyz / .ply, case-insensitive). Throws
/// UnsupportedFormat.
CloudFormat format_for_path(const std::filesystem::path &path);

/// Throws Io, Malformed (with line number) or UnsupportedFormat.
PointCloud read_cloud(const std::filesystem::path &path);
PointCloud parse_xyz(std::string_view text);
PointCloud parse_ply(std::string_view text);

/// 9 significant digits per coordinate, row order preserved.
void write_cloud(const PointCloud &cloud, const std::filesystem::path &path);
void write_cloud(const PointCloud &cloud, const std::filesystem::path &path, CloudFormat format);
std::string format_xyz(const PointCloud &cloud);
std::string format_ply(const PointCloud &cloud);

/// ASCII OFF; polygons are fan-triangulated.
TriangleMesh read_off(const std::filesystem::path &path);
TriangleMesh parse_off(std::string_view text);

/// `index,c` rows with 9 significant digits.
std::string format_curvature_csv(const CurvatureField &field);

std::string read_text_file(const std::filesystem::path &path);
/// Creates parent directories. Throws Io.
void write_text_file(const std::filesystem::path &path, std::string_view text);

} // namespace pcup
