#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wbrt {

struct Vec2 {
    double u = 0.0;
    double v = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.u + b.u, a.v + b.v}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.u - b.u, a.v - b.v}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.u, s * a.v}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.u == b.u && a.v == b.v; }
inline double dot(Vec2 a, Vec2 b) { return a.u * b.u + a.v * b.v; }
inline double cross(Vec2 a, Vec2 b) { return a.u * b.v - a.v * b.u; }
double norm(Vec2 a);

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// x: patient-left, y: patient-posterior, z: patient-superior (mm).
struct PatientFrame {
    Vec3 origin;                 // center of voxel (0,0,0)
    Vec3 spacing{1.0, 1.0, 1.0};
};

void check_frame(const PatientFrame& f);
bool same_frame(const PatientFrame& a, const PatientFrame& b);

// Beam's-eye view of the right-lateral beam: u = -y (anterior +), v = +z.
// Row r grows with v; pixel (c, r) has its center at (u0 + c*s, v0 + r*s).
struct BevFrame {
    double u0 = 0.0;
    double v0 = 0.0;
    double spacing = 1.0;
    int cols = 0;
    int rows = 0;

    double u(int c) const { return u0 + c * spacing; }
    double v(int r) const { return v0 + r * spacing; }
    double u_lo() const { return u0 - 0.5 * spacing; }
    double u_hi() const { return u0 + (cols - 0.5) * spacing; }
    double v_lo() const { return v0 - 0.5 * spacing; }
    double v_hi() const { return v0 + (rows - 0.5) * spacing; }
    std::size_t size() const { return static_cast<std::size_t>(cols) * rows; }
    std::size_t index(int c, int r) const { return static_cast<std::size_t>(r) * cols + c; }
};

void check_frame(const BevFrame& f);
bool same_frame(const BevFrame& a, const BevFrame& b, double tol = 1e-9);

struct BevSilhouette {
    BevFrame frame;
    std::vector<std::uint8_t> bits;
    std::string label;

    static BevSilhouette empty(const BevFrame& f, const std::string& label);
    bool at(int c, int r) const { return bits[frame.index(c, r)] != 0; }
    void set(int c, int r) { bits[frame.index(c, r)] = 1; }
    std::size_t count() const;
    bool any() const;
};

struct Extrema {
    double min_u;
    double max_u;
    double min_v;
    double max_v;
};

// Extrema over set pixel centers.
std::optional<Extrema> extrema(const BevSilhouette& s);

BevSilhouette unite(const BevSilhouette& a, const BevSilhouette& b, const std::string& label);

struct Polyline2D {
    std::vector<Vec2> pts;
    bool closed = false;
};

struct Polygon2D {
    std::vector<Vec2> pts;  // implicitly closed
};

double signed_area(const std::vector<Vec2>& ring);
double ring_length(const std::vector<Vec2>& ring);
double polyline_length(const std::vector<Vec2>& pts);

// Even-odd rule with half-open crossings (edge counted if exactly one end lies above p.v).
bool point_in_polygon(Vec2 p, const std::vector<Vec2>& ring);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);
double segment_segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d);
double point_ring_distance(Vec2 p, const std::vector<Vec2>& ring);

// Problems that violate the Polygon2D invariants; empty when the ring is valid.
std::vector<std::string> polygon_problems(const std::vector<Vec2>& ring);
Polygon2D make_polygon(std::vector<Vec2> ring);

// Drops consecutive duplicates, then vertices whose neighbours are collinear with them
// (|cross| <= tol, same direction). Returns the indices of the kept vertices.
std::vector<std::size_t> simplify_ring(const std::vector<Vec2>& ring, double tol = 1e-6);

// Inserts points so that no segment is longer than max_step.
std::vector<Vec2> densify(const std::vector<Vec2>& pts, double max_step, bool closed);

}  // namespace wbrt
