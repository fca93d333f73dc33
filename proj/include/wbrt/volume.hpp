#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wbrt/geometry.hpp"

namespace wbrt {

inline const std::array<std::string, 8> kStructureLabels = {
    "brain", "eye_left", "eye_right", "lens_left", "lens_right", "vertebra_c1", "vertebra_c2", "skin"};

bool is_structure_label(const std::string& label);

using Dims = std::array<int, 3>;

inline std::size_t voxel_count(const Dims& d)
{
    return static_cast<std::size_t>(d[0]) * d[1] * d[2];
}

// Row-major, z slowest: index = (k*ny + j)*nx + i.
inline std::size_t voxel_index(const Dims& d, int i, int j, int k)
{
    return (static_cast<std::size_t>(k) * d[1] + j) * d[0] + i;
}

inline Vec3 voxel_center(const PatientFrame& f, int i, int j, int k)
{
    return {f.origin.x + i * f.spacing.x, f.origin.y + j * f.spacing.y, f.origin.z + k * f.spacing.z};
}

struct CtVolume {
    PatientFrame frame;
    Dims dims{0, 0, 0};
    std::vector<std::int16_t> hu;
};

struct StructureMask {
    PatientFrame frame;
    Dims dims{0, 0, 0};
    std::vector<std::uint8_t> bits;
    std::string label;
};

struct Cohort {
    CtVolume ct;
    std::vector<StructureMask> masks;
    double hu_min = -1024.0;
    double hu_max = 4000.0;

    const StructureMask* find(const std::string& label) const;
};

// Checks dims/frame consistency of every grid; throws on violation.
void check_cohort(const Cohort& c);

Cohort read_cohort(const std::filesystem::path& dir);
void write_cohort(const Cohort& c, const std::filesystem::path& dir);

}  // namespace wbrt
