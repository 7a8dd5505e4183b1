#include "sentinel/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "sentinel/errors.hpp"

namespace sentinel {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool strictly_inside_triangle(const Point2& p, const Point2& a, const Point2& b,
                              const Point2& c) {
  const double d1 = cross(a, b, p);
  const double d2 = cross(b, c, p);
  const double d3 = cross(c, a, p);
  return (d1 > 0 && d2 > 0 && d3 > 0) || (d1 < 0 && d2 < 0 && d3 < 0);
}

// Similarity transform taking the points to centroid 0 and RMS radius sqrt(2).
Eigen::Matrix3d conditioning_transform(const Quad& q) {
  double cx = 0.0;
  double cy = 0.0;
  for (const auto& p : q.corners) {
    cx += p.x;
    cy += p.y;
  }
  cx /= 4.0;
  cy /= 4.0;
  double sq = 0.0;
  for (const auto& p : q.corners) {
    sq += (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
  }
  const double rms = std::sqrt(sq / 4.0);
  const double s = std::sqrt(2.0) / rms;
  Eigen::Matrix3d t;
  t << s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0;
  return t;
}

Point2 apply_affine(const Eigen::Matrix3d& t, const Point2& p) {
  return {t(0, 0) * p.x + t(0, 2), t(1, 1) * p.y + t(1, 2)};
}

}  // namespace

bool BBox::valid() const {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
         std::isfinite(y2) && x1 < x2 && y1 < y2;
}

double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Point2 anchor_of(const BBox& b) { return {0.5 * (b.x1 + b.x2), b.y2}; }

double Quad::diagonal() const {
  return std::max(std::hypot(c().x - a().x, c().y - a().y),
                  std::hypot(d().x - b().x, d().y - b().y));
}

Quad make_rectangle(double width, double length) {
  return Quad{{Point2{0.0, 0.0}, Point2{width, 0.0}, Point2{width, length},
               Point2{0.0, length}}};
}

void validate_quad(const Quad& q) {
  double scale = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& p = q.corners[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw DegenerateQuad("quad corner is not finite");
    }
    for (std::size_t j = i + 1; j < 4; ++j) {
      scale = std::max(scale, std::hypot(p.x - q.corners[j].x, p.y - q.corners[j].y));
    }
  }
  if (scale <= 0.0) throw DegenerateQuad("quad has zero extent");

  const double tol = 1e-9 * scale * scale;
  for (std::size_t skip = 0; skip < 4; ++skip) {
    std::array<Point2, 3> tri{};
    std::size_t n = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      if (i != skip) tri[n++] = q.corners[i];
    }
    if (std::abs(cross(tri[0], tri[1], tri[2])) <= tol) {
      throw DegenerateQuad("three quad corners are collinear");
    }
    if (strictly_inside_triangle(q.corners[skip], tri[0], tri[1], tri[2])) {
      throw DegenerateQuad("quad corners are not in convex position");
    }
  }
  // Convex position alone admits a bow tie; the corner order must turn one way.
  int positive = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    positive += cross(q.corners[i], q.corners[(i + 1) % 4], q.corners[(i + 2) % 4]) > 0.0;
  }
  if (positive != 0 && positive != 4) throw DegenerateQuad("quad corner order crosses itself");
}

Homography::Homography(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) throw DegenerateQuad("homography has non-finite entries");
  if (std::abs(m(2, 2)) < 1e-12 * m.norm()) {
    throw DegenerateQuad("homography maps the origin to infinity");
  }
  h_ = m / m(2, 2);
  if (std::abs(h_.determinant()) <= 1e-12) {
    throw DegenerateQuad("homography is not invertible");
  }
}

Homography Homography::inverse() const { return Homography(h_.inverse()); }

Eigen::Vector3d Homography::project(const Point2& p) const {
  return h_ * Eigen::Vector3d(p.x, p.y, 1.0);
}

Homography estimate_homography(const Quad& source, const Quad& target) {
  validate_quad(source);
  validate_quad(target);

  const Eigen::Matrix3d ts = conditioning_transform(source);
  const Eigen::Matrix3d tt = conditioning_transform(target);

  Eigen::Matrix<double, 8, 9> a;
  for (int i = 0; i < 4; ++i) {
    const Point2 s = apply_affine(ts, source.corners[i]);
    const Point2 t = apply_affine(tt, target.corners[i]);
    a.row(2 * i) << -s.x, -s.y, -1.0, 0.0, 0.0, 0.0, t.x * s.x, t.x * s.y, t.x;
    a.row(2 * i + 1) << 0.0, 0.0, 0.0, -s.x, -s.y, -1.0, t.y * s.x, t.y * s.y, t.y;
  }

  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(7) / sv(0) < 1e-12) {
    throw DegenerateQuad("correspondence system is singular");
  }
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  return Homography(tt.inverse() * hn * ts);
}

Point2 transform_point(const Homography& h, const Point2& p) {
  const Eigen::Vector3d v = h.project(p);
  if (std::abs(v.z()) < 1e-12) throw PointAtInfinity("point maps to infinity");
  return {v.x() / v.z(), v.y() / v.z()};
}

}  // namespace sentinel
