#pragma once

#include <array>

#include <Eigen/Core>

namespace sentinel {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

// Axis-aligned box in continuous image coordinates, corner form.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  Point2 center() const { return {0.5 * (x1 + x2), 0.5 * (y1 + y2)}; }

  // x1 < x2, y1 < y2, all finite.
  bool valid() const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

double intersection_area(const BBox& a, const BBox& b);
double iou(const BBox& a, const BBox& b);

// Road-contact point of a vehicle box: bottom edge, horizontal center.
Point2 anchor_of(const BBox& b);

// Four corners in reading order: a = top-left, b = top-right,
// c = bottom-right, d = bottom-left. Travel runs from the a-b edge
// toward the d-c edge.
struct Quad {
  std::array<Point2, 4> corners{};

  const Point2& a() const { return corners[0]; }
  const Point2& b() const { return corners[1]; }
  const Point2& c() const { return corners[2]; }
  const Point2& d() const { return corners[3]; }

  double diagonal() const;

  friend bool operator==(const Quad&, const Quad&) = default;
};

Quad make_rectangle(double width, double length);

// Throws DegenerateQuad unless the corners are finite, in convex position
// and non-crossing order, no three collinear, and enclose non-zero area.
void validate_quad(const Quad& q);

// Projective map of the plane, stored with h(2,2) == 1.
class Homography {
 public:
  Homography() : h_(Eigen::Matrix3d::Identity()) {}

  // Normalizes by m(2,2); throws DegenerateQuad when that entry vanishes or
  // the matrix is not invertible.
  explicit Homography(const Eigen::Matrix3d& m);

  const Eigen::Matrix3d& matrix() const { return h_; }
  double operator()(int row, int col) const { return h_(row, col); }

  Homography inverse() const;

  // Homogeneous image (x', y', w') of (x, y, 1).
  Eigen::Vector3d project(const Point2& p) const;

 private:
  Eigen::Matrix3d h_;
};

// Four-point normalized DLT. The result maps source corner i onto target
// corner i.
Homography estimate_homography(const Quad& source, const Quad& target);

// Throws PointAtInfinity when the projected w' is below 1e-12 in magnitude.
Point2 transform_point(const Homography& h, const Point2& p);

}  // namespace sentinel
