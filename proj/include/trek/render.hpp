#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "trek/epipolar.hpp"
#include "trek/frame_ingest.hpp"
#include "trek/image.hpp"
#include "trek/odometry.hpp"

namespace trek {

inline constexpr int kCanvasSize = 800;
inline constexpr double kCanvasMarginFraction = 0.10;
inline constexpr int kLineThickness = 3;
inline constexpr int kPointDiameter = 5;
inline constexpr double kViewAzimuthDeg = 45.0;
inline constexpr double kViewElevationDeg = 30.0;
inline const Rgb kWhite{255, 255, 255};
inline const Rgb kBlack{0, 0, 0};

/// Hue sweep 0..300 degrees at full saturation and value, rounded to bytes.
/// Inputs outside [0, 1] are clamped.
Rgb colormap(double s);
double colormap_hue(double s);

/// Colour of point `index` out of `count` trajectory points: colormap(index / count).
Rgb point_color(std::size_t index, std::size_t count);

// Raster primitives; everything is clipped to the image and never blended.
void fill_circle(RgbImage& img, int cx, int cy, int radius, Rgb color);
void draw_line(RgbImage& img, int x0, int y0, int x1, int y1, Rgb color, int thickness = 1);

/// Built-in 5x7 digit font; rows top to bottom, bit 4 is the leftmost column.
const std::array<std::uint8_t, 7>& digit_glyph(char digit);

/// Draws decimal digits centred on (cx, cy), `glyph_height` pixels tall, with
/// a one-pixel outline. Only pixels inside `clip` (x0, y0, x1, y1 inclusive) change.
void draw_label(RgbImage& img, std::string_view digits, int cx, int cy, int glyph_height, Rgb fill, Rgb outline,
                std::array<int, 4> clip);

enum class RenderKind { Bev, Plot3d };

struct PixelPoint {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

struct RenderedImage {
  RenderKind kind = RenderKind::Bev;
  RgbImage image;
  std::vector<PixelPoint> points;  // canvas position of every trajectory point
  std::vector<Rgb> colors;         // colour assigned to every trajectory point
};

/// (x, y) for the bird's-eye view; fixed orthographic azimuth/elevation view for 3D.
Eigen::Vector2d project_view(const Vec3& p, RenderKind kind);

/// Fit projected points into the canvas: 10% margin, shared scale for both
/// axes, screen y pointing up. Coincident points all land on the centre.
std::vector<PixelPoint> fit_to_canvas(std::span<const Eigen::Vector2d> projected);

RenderedImage render_positions(std::span<const Vec3> positions, RenderKind kind);
RenderedImage render_bev(const Trajectory& traj);
RenderedImage render_3d(const Trajectory& traj);

struct MarkerGeometry {
  int margin = 0;
  int center_x = 0;
  int center_y = 0;
  int radius = 0;

  std::array<int, 4> bbox() const {
    return {center_x - radius, center_y - radius, center_x + radius, center_y + radius};
  }
};

/// margin = max(12, round(0.06 w)); centre (w - margin, margin); radius = round(0.75 margin).
MarkerGeometry marker_geometry(int width);

struct EncodedKeyframe {
  FrameRecord frame;  // marked copy of the source frame
  std::int64_t source_timestep = 0;
  int rank = 0;
  Rgb color{};
  MarkerGeometry marker;
};

/// Paints a disc of colormap(rank / k) at the top-right corner and writes the
/// rank inside it. Pixels outside the disc's bounding box are untouched.
/// Throws FrameTooSmall (width < 64 or the disc does not fit) or InvalidInput.
EncodedKeyframe overlay_marker(const FrameRecord& frame, int rank, int k, bool draw_rank = true);

}  // namespace trek
