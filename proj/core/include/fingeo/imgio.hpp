#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fingeo/grid.hpp"

namespace fingeo::imgio {

/// Binary PGM ("P5", maxval 255) with intensities mapped linearly to [0,1].
GrayImage read_pgm(const std::string& path);
void write_pgm(const GrayImage& image, const std::string& path);

/// Masks are stored as PGM with 0/255 values.
Mask read_mask_pgm(const std::string& path);
void write_mask_pgm(const Mask& mask, const std::string& path);

/// FGRD: little-endian float-grid container.
/// Header: magic "FGRD", u16 version=1, u16 channels in {1,2},
/// u32 width, u32 height, f32 pitch_mm; then width*height*channels f32.
struct GridFile {
    uint16_t channels = 1;
    uint32_t width = 0;
    uint32_t height = 0;
    float pitch_mm = kDefaultPitchMm;
    std::vector<float> data; // row-major, channel-interleaved
};

GridFile read_grid(const std::string& path);
void write_grid(const GridFile& grid, const std::string& path);

DepthMap read_depth(const std::string& path, float* pitch_mm = nullptr);
PeriodMap read_period(const std::string& path, float* pitch_mm = nullptr);
GradientMap read_gradient(const std::string& path, float* pitch_mm = nullptr);

void write_depth(const DepthMap& depth, const std::string& path,
                 float pitch_mm = kDefaultPitchMm);
void write_period(const PeriodMap& period, const std::string& path,
                  float pitch_mm = kDefaultPitchMm);
void write_gradient(const GradientMap& grad, const std::string& path,
                    float pitch_mm = kDefaultPitchMm);

/// JSON sidecar manifest recording pipeline provenance. All keys optional.
struct Manifest {
    std::optional<std::string> stage;
    std::optional<double> scale_factor;
    std::optional<double> yaw_deg;
    std::optional<std::pair<double, double>> zero_point;
    std::optional<std::pair<double, double>> canvas_offset;
};

Manifest read_manifest(const std::string& path);
void write_manifest(const Manifest& manifest, const std::string& path);

/// Sidecar path convention: same basename with extension replaced by ".json".
std::string manifest_path_for(const std::string& path);

} // namespace fingeo::imgio
