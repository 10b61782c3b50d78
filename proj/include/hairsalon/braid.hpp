#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hairsalon/grid.hpp"
#include "hairsalon/sketch.hpp"

namespace hs::braid {

enum class Kind { fishtail, rope, three_strand, four_strand, five_strand };

Kind kind_from_string(const std::string& name);
std::string to_string(Kind kind);
int strand_count(Kind kind);

struct BoundaryPair {
    Polyline b0;
    Polyline b1;
};

// Braid template deformed to follow two boundary strokes. All per-sample arrays share
// the parameter t_i = t_max * i / (N - 1).
struct BraidSpec {
    static constexpr int kSamples = 256;

    Kind kind = Kind::three_strand;
    double w = 1.0;
    double depth_amplitude = 0.0;    // b
    std::vector<double> half_width;  // a(t)
    std::vector<double> center_x;    // dx(t)
    std::vector<double> center_y;    // dy(t)
    std::vector<Point> normal;       // unit braid-plane offset direction per sample
    double t_max = 0.0;              // |dY|
    // Converts t into knot phase: theta = w * phase_rate * t + phase_k. Chosen so the
    // total phase sweep is w * length / mean(a), independent of canvas placement.
    double phase_rate = 1.0;
    int n_strands = 3;
    std::vector<double> phases;
};

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct BraidGeometry {
    std::vector<std::vector<Point3>> centerlines;
    double tube_radius = 0.0;
};

BraidSpec fit_braid_params(const BoundaryPair& boundaries, Kind kind, double w);

// Strand k at parameter t (t in [0, t_max]).
Point3 strand_point(const BraidSpec& spec, int strand, double t);
// Point at parameter t for an explicit knot phase theta (used for the phase-shift identity).
Point3 point_at_phase(const BraidSpec& spec, double t, double theta);

BraidGeometry eval_centerlines(const BraidSpec& spec, int samples_per_strand);
BraidGeometry expand_tubes(BraidGeometry geom);

// Minimum 3D distance between samples of distinct strands.
double min_interstrand_distance(const BraidGeometry& geom);

// Projected strand-over-strand crossings: sign changes of the pairwise lateral offset.
int count_projected_crossings(const BraidGeometry& geom);

struct Disc {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    int strand = 0;
};

struct BraidRender {
    RgbImage edges;                   // palette-colored edge pixels, black elsewhere
    Grid<std::int32_t> edge_strand;   // strand owning each edge pixel, -1 elsewhere
    Grid<float> depth;                // z of the visible disc, -inf where empty
    Grid<std::int32_t> strand_id;     // visible strand, -1 where empty
};

// Discs splatted by render_braid_sketch, in splat order (center spacing <= 0.5 px).
std::vector<Disc> splat_discs(const BraidGeometry& geom);
// Pixels beyond the flat cuts at both braid ends receive no splats and no silhouettes.
BinaryMask end_zone(const BraidGeometry& geom, Canvas canvas);

BraidRender render_braid_sketch(const BraidGeometry& geom, const std::vector<Rgb>& palette, Canvas canvas);

std::vector<Stroke> braid_edges_to_strokes(const BraidRender& render);

// boundaries -> BraidSpec -> center-lines -> tubes -> render -> strokes, all flagged generated.
Sketch complete_braid(const BoundaryPair& boundaries, Kind kind, double w, const std::vector<Rgb>& palette,
                      Canvas canvas);

}  // namespace hs::braid
