#include "trek/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "trek/error.hpp"

namespace trek {

namespace {

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(round_half_up(255.0 * v), 0, 255)); }

void stamp(RgbImage& img, int x, int y, int half, Rgb color) {
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      if (img.contains(x + dx, y + dy)) img.set(x + dx, y + dy, color);
    }
  }
}

constexpr std::array<std::array<std::uint8_t, 7>, 10> kDigits = {{
    {0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110},
    {0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110},
    {0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111},
    {0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110},
    {0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010},
    {0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110},
    {0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110},
    {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000},
    {0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110},
    {0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100},
}};

}  // namespace

double colormap_hue(double s) { return 300.0 * std::clamp(s, 0.0, 1.0); }

Rgb colormap(double s) {
  const double h = colormap_hue(s) / 60.0;
  const int sector = std::min(5, static_cast<int>(std::floor(h)));
  const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
  double r = 0, g = 0, b = 0;
  switch (sector) {
    case 0: r = 1; g = x; break;
    case 1: r = x; g = 1; break;
    case 2: g = 1; b = x; break;
    case 3: g = x; b = 1; break;
    case 4: r = x; b = 1; break;
    default: r = 1; b = x; break;
  }
  return {to_byte(r), to_byte(g), to_byte(b)};
}

Rgb point_color(std::size_t index, std::size_t count) {
  return colormap(count == 0 ? 0.0 : static_cast<double>(index) / static_cast<double>(count));
}

void fill_circle(RgbImage& img, int cx, int cy, int radius, Rgb color) {
  const int limit = radius * radius + radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= limit && img.contains(cx + dx, cy + dy)) img.set(cx + dx, cy + dy, color);
    }
  }
}

void draw_line(RgbImage& img, int x0, int y0, int x1, int y1, Rgb color, int thickness) {
  const int half = std::max(0, thickness / 2);
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    stamp(img, x0, y0, half, color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

const std::array<std::uint8_t, 7>& digit_glyph(char digit) {
  if (digit < '0' || digit > '9') throw Error(ErrorKind::InvalidInput, "font has digits only");
  return kDigits[static_cast<std::size_t>(digit - '0')];
}

void draw_label(RgbImage& img, std::string_view digits, int cx, int cy, int glyph_height, Rgb fill, Rgb outline,
                std::array<int, 4> clip) {
  if (digits.empty() || glyph_height < 1) return;
  const int n = static_cast<int>(digits.size());
  int height = glyph_height;
  auto layout = [&](int h, int& gw, int& gap) {
    gw = std::max(1, round_half_up(5.0 * h / 7.0));
    gap = std::max(1, round_half_up(h / 7.0));
    return n * gw + (n - 1) * gap;
  };
  int glyph_w = 0, gap = 0;
  const int clip_w = clip[2] - clip[0] + 1;
  // Long labels shrink until they fit the clip box (outline included).
  while (height > 1 && layout(height, glyph_w, gap) + 2 > clip_w) --height;
  const int total_w = layout(height, glyph_w, gap);
  const int x0 = cx - total_w / 2;
  const int y0 = cy - height / 2;

  const int box_w = total_w + 2, box_h = height + 2;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(box_w) * static_cast<std::size_t>(box_h), 0);
  auto cell = [&](int bx, int by) -> std::uint8_t& {
    return mask[static_cast<std::size_t>(by) * static_cast<std::size_t>(box_w) + static_cast<std::size_t>(bx)];
  };
  for (int i = 0; i < n; ++i) {
    const auto& glyph = digit_glyph(digits[static_cast<std::size_t>(i)]);
    const int gx = i * (glyph_w + gap);
    for (int py = 0; py < height; ++py) {
      const int row = py * 7 / height;
      for (int px = 0; px < glyph_w; ++px) {
        const int col = px * 5 / glyph_w;
        if ((glyph[static_cast<std::size_t>(row)] >> (4 - col)) & 1u) cell(gx + px + 1, py + 1) = 1;
      }
    }
  }
  for (int by = 0; by < box_h; ++by) {
    for (int bx = 0; bx < box_w; ++bx) {
      const int x = x0 - 1 + bx, y = y0 - 1 + by;
      if (x < clip[0] || x > clip[2] || y < clip[1] || y > clip[3] || !img.contains(x, y)) continue;
      if (cell(bx, by)) {
        img.set(x, y, fill);
        continue;
      }
      bool near_glyph = false;
      for (int dy = -1; dy <= 1 && !near_glyph; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = bx + dx, ny = by + dy;
          if (nx >= 0 && ny >= 0 && nx < box_w && ny < box_h && cell(nx, ny)) {
            near_glyph = true;
            break;
          }
        }
      }
      if (near_glyph) img.set(x, y, outline);
    }
  }
}

Eigen::Vector2d project_view(const Vec3& p, RenderKind kind) {
  if (kind == RenderKind::Bev) return {p.x(), p.y()};
  const double az = kViewAzimuthDeg * std::numbers::pi / 180.0;
  const double el = kViewElevationDeg * std::numbers::pi / 180.0;
  const double u = p.x() * std::cos(az) - p.y() * std::sin(az);
  const double v = (p.x() * std::sin(az) + p.y() * std::cos(az)) * std::sin(el) - p.z() * std::cos(el);
  return {u, v};
}

std::vector<PixelPoint> fit_to_canvas(std::span<const Eigen::Vector2d> projected) {
  std::vector<PixelPoint> out;
  if (projected.empty()) return out;
  Eigen::Vector2d lo = projected.front(), hi = projected.front();
  for (const auto& p : projected) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Eigen::Vector2d extent = hi - lo;
  const Eigen::Vector2d mid = 0.5 * (lo + hi);
  const double usable = kCanvasSize * (1.0 - 2.0 * kCanvasMarginFraction);
  double scale = std::numeric_limits<double>::infinity();
  if (extent.x() > 0.0) scale = std::min(scale, usable / extent.x());
  if (extent.y() > 0.0) scale = std::min(scale, usable / extent.y());
  if (!std::isfinite(scale)) scale = 0.0;
  const double c = kCanvasSize / 2.0;
  for (const auto& p : projected) {
    out.push_back({round_half_up(c + (p.x() - mid.x()) * scale), round_half_up(c - (p.y() - mid.y()) * scale)});
  }
  return out;
}

RenderedImage render_positions(std::span<const Vec3> positions, RenderKind kind) {
  RenderedImage r;
  r.kind = kind;
  r.image = RgbImage(kCanvasSize, kCanvasSize, kWhite);
  std::vector<Eigen::Vector2d> projected;
  projected.reserve(positions.size());
  for (const auto& p : positions) projected.push_back(project_view(p, kind));
  r.points = fit_to_canvas(projected);
  for (std::size_t j = 0; j < positions.size(); ++j) r.colors.push_back(point_color(j, positions.size()));
  if (r.points.empty()) return r;

  const int radius = kPointDiameter / 2;
  const bool coincident = std::all_of(r.points.begin(), r.points.end(), [&](const PixelPoint& p) {
    return p == r.points.front();
  }) && std::all_of(projected.begin(), projected.end(), [&](const Eigen::Vector2d& p) { return p == projected.front(); });
  if (coincident) {
    fill_circle(r.image, r.points.front().x, r.points.front().y, radius, r.colors.front());
    return r;
  }
  for (std::size_t j = 1; j < r.points.size(); ++j) {
    draw_line(r.image, r.points[j - 1].x, r.points[j - 1].y, r.points[j].x, r.points[j].y, r.colors[j],
              kLineThickness);
  }
  for (std::size_t j = 0; j < r.points.size(); ++j) fill_circle(r.image, r.points[j].x, r.points[j].y, radius, r.colors[j]);
  return r;
}

namespace {

std::vector<Vec3> positions_of(const Trajectory& traj) {
  std::vector<Vec3> out;
  out.reserve(traj.size());
  for (const auto& s : traj.steps) out.push_back(s.pose.position);
  return out;
}

}  // namespace

RenderedImage render_bev(const Trajectory& traj) { return render_positions(positions_of(traj), RenderKind::Bev); }
RenderedImage render_3d(const Trajectory& traj) { return render_positions(positions_of(traj), RenderKind::Plot3d); }

MarkerGeometry marker_geometry(int width) {
  MarkerGeometry g;
  g.margin = std::max(12, round_half_up(0.06 * width));
  g.radius = round_half_up(0.75 * g.margin);
  g.center_x = width - g.margin;
  g.center_y = g.margin;
  return g;
}

EncodedKeyframe overlay_marker(const FrameRecord& frame, int rank, int k, bool draw_rank) {
  if (k < 1 || rank < 0 || rank >= k) throw Error(ErrorKind::InvalidInput, "rank must lie in [0, k)");
  if (frame.width() < 64) throw Error(ErrorKind::FrameTooSmall, "marker needs a frame at least 64 pixels wide");
  const auto geom = marker_geometry(frame.width());
  if (geom.center_y + geom.radius >= frame.height()) {
    throw Error(ErrorKind::FrameTooSmall, "frame too short for the marker");
  }
  EncodedKeyframe out{frame, frame.timestep, rank, colormap(static_cast<double>(rank) / k), geom};
  fill_circle(out.frame.image, geom.center_x, geom.center_y, geom.radius, out.color);
  if (draw_rank) {
    draw_label(out.frame.image, std::to_string(rank), geom.center_x, geom.center_y, geom.radius, kWhite, kBlack,
               geom.bbox());
  }
  return out;
}

}  // namespace trek
