#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "risbound/common.hpp"

namespace risbound {

using Vec3 = Eigen::Vector3d;
using RotationMatrix = Eigen::Matrix3d;

/// Range plus bearing between two points.
///
/// The unit vector follows the spherical convention
///   unit = [cos(az) sin(el), sin(az) sin(el), cos(el)]^T
/// with the elevation measured from the +z axis.
struct Direction {
  double distance = 0.0;  // meters
  Vec3 unit = Vec3::Zero();
  double azimuth = 0.0;    // rad, from +x in the x-y plane
  double elevation = 0.0;  // rad, from +z
};

/// Intrinsic Z-Y-X rotation angles (yaw about z, then pitch about the new y,
/// then roll about the new x). Angles are wrapped to (-pi, pi].
struct EulerAngles {
  double yaw_z = 0.0;
  double pitch_y = 0.0;
  double roll_x = 0.0;

  EulerAngles() = default;
  EulerAngles(double yaw, double pitch, double roll)
      : yaw_z(wrap_angle(yaw)), pitch_y(wrap_angle(pitch)), roll_x(wrap_angle(roll)) {}

  double axis(int index) const {
    switch (index) {
      case 0: return yaw_z;
      case 1: return pitch_y;
      case 2: return roll_x;
    }
    throw std::invalid_argument("EulerAngles: axis index out of range");
  }

  EulerAngles with_axis(int index, double value) const {
    EulerAngles out = *this;
    switch (index) {
      case 0: out.yaw_z = value; break;
      case 1: out.pitch_y = value; break;
      case 2: out.roll_x = value; break;
      default: throw std::invalid_argument("EulerAngles: axis index out of range");
    }
    return out;
  }
};

/// Position plus orientation of an entity in the global frame.
struct Pose {
  Vec3 position = Vec3::Zero();
  EulerAngles orientation;
};

/// Planar element grid described by local offsets about the centroid.
struct ArrayLayout {
  std::vector<Vec3> offsets;  // local frame, centered (mean = 0)
  double side_m = 0.0;        // nominal side length for square grids
  double spacing_m = 0.0;

  std::size_t count() const { return offsets.size(); }
};

/// Q = Rz(yaw) * Ry(pitch) * Rx(roll).
inline RotationMatrix rotation_from_euler(const EulerAngles& angles) {
  const double ca = std::cos(angles.yaw_z), sa = std::sin(angles.yaw_z);
  const double cb = std::cos(angles.pitch_y), sb = std::sin(angles.pitch_y);
  const double cg = std::cos(angles.roll_x), sg = std::sin(angles.roll_x);
  RotationMatrix q;
  q << ca * cb, ca * sb * sg - sa * cg, ca * sb * cg + sa * sg,
       sa * cb, sa * sb * sg + ca * cg, sa * sb * cg - ca * sg,
       -sb,     cb * sg,                cb * cg;
  return q;
}

/// Analytic dQ/d(angle) for one of the three Euler angles
/// (0 = yaw about z, 1 = pitch about y, 2 = roll about x).
inline RotationMatrix rotation_derivative(const EulerAngles& angles, int axis_index) {
  if (axis_index < 0 || axis_index > 2) {
    throw std::invalid_argument("rotation_derivative: axis index out of range");
  }
  const double ca = std::cos(angles.yaw_z), sa = std::sin(angles.yaw_z);
  const double cb = std::cos(angles.pitch_y), sb = std::sin(angles.pitch_y);
  const double cg = std::cos(angles.roll_x), sg = std::sin(angles.roll_x);

  RotationMatrix d;
  if (axis_index == 0) {
    d << -sa * cb, -sa * sb * sg - ca * cg, -sa * sb * cg + ca * sg,
         ca * cb,  ca * sb * sg - sa * cg,  ca * sb * cg + sa * sg,
         0.0,      0.0,                     0.0;
  } else if (axis_index == 1) {
    d << -ca * sb, ca * cb * sg, ca * cb * cg,
         -sa * sb, sa * cb * sg, sa * cb * cg,
         -cb,      -sb * sg,     -sb * cg;
  } else {
    d << 0.0, ca * sb * cg + sa * sg, -ca * sb * sg + sa * cg,
         0.0, sa * sb * cg - ca * sg, -sa * sb * sg - ca * cg,
         0.0, cb * cg,                -cb * sg;
  }
  return d;
}

inline Direction direction_between(const Vec3& p, const Vec3& q) {
  const Vec3 delta = q - p;
  const double d = delta.norm();
  if (d == 0.0) {
    throw std::invalid_argument("direction_between: degenerate direction (coincident points)");
  }
  Direction out;
  out.distance = d;
  out.unit = delta / d;
  out.azimuth = std::atan2(out.unit.y(), out.unit.x());
  out.elevation = std::acos(std::clamp(out.unit.z(), -1.0, 1.0));
  return out;
}

/// Near/far boundary 2 D^2 / lambda for an aperture of diameter D.
inline double fraunhofer_distance(double aperture_diameter_m, double wavelength_m) {
  if (aperture_diameter_m <= 0.0 || wavelength_m <= 0.0) {
    throw std::invalid_argument("fraunhofer_distance: inputs must be positive");
  }
  return 2.0 * aperture_diameter_m * aperture_diameter_m / wavelength_m;
}

/// Diameter of a square aperture of side L (its diagonal).
inline double square_aperture_diameter(double side_m) { return side_m * std::sqrt(2.0); }

/// Global element positions p + Q * s for every local offset s.
inline std::vector<Vec3> element_positions(const ArrayLayout& layout, const Pose& pose) {
  const RotationMatrix q = rotation_from_euler(pose.orientation);
  std::vector<Vec3> out;
  out.reserve(layout.offsets.size());
  for (const Vec3& s : layout.offsets) {
    out.push_back(pose.position + q * s);
  }
  return out;
}

/// Centered square grid in the local x-y plane. The per-side count is
/// round(side / spacing), so the physical extent is (count-1) * spacing.
inline ArrayLayout square_layout(double side_m, double spacing_m) {
  if (side_m <= 0.0 || spacing_m <= 0.0) {
    throw std::invalid_argument("square_layout: side and spacing must be positive");
  }
  const int per_side = std::max(1, static_cast<int>(std::lround(side_m / spacing_m)));
  ArrayLayout layout;
  layout.side_m = side_m;
  layout.spacing_m = spacing_m;
  layout.offsets.reserve(static_cast<std::size_t>(per_side) * per_side);
  const double mid = 0.5 * (per_side - 1);
  for (int i = 0; i < per_side; ++i) {
    for (int j = 0; j < per_side; ++j) {
      layout.offsets.emplace_back((i - mid) * spacing_m, (j - mid) * spacing_m, 0.0);
    }
  }
  return layout;
}

/// Receive-antenna grid in the local x-z plane, built from symmetric pairs
/// (+o, -o) about the centroid, plus a center element when the count is odd.
/// Growing the count keeps every previous antenna position, so information
/// matrices are monotone in the antenna count, and the centroid stays exact.
inline ArrayLayout paired_grid_layout(std::size_t count, double spacing_m) {
  if (count == 0 || spacing_m <= 0.0) {
    throw std::invalid_argument("paired_grid_layout: count and spacing must be positive");
  }
  // Half-plane lattice points ordered by radius; each contributes a +/- pair.
  struct Cell { int i, j; double r2; };
  std::vector<Cell> cells;
  const int extent = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)))) + 2;
  for (int i = -extent; i <= extent; ++i) {
    for (int j = -extent; j <= extent; ++j) {
      if (i > 0 || (i == 0 && j > 0)) {
        cells.push_back({i, j, static_cast<double>(i) * i + static_cast<double>(j) * j});
      }
    }
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.r2 != b.r2) return a.r2 < b.r2;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  ArrayLayout layout;
  layout.spacing_m = spacing_m;
  layout.offsets.reserve(count);
  if (count % 2 == 1) {
    layout.offsets.emplace_back(0.0, 0.0, 0.0);
  }
  std::size_t pair_index = 0;
  while (layout.offsets.size() < count) {
    const Cell& c = cells.at(pair_index++);
    layout.offsets.emplace_back(c.i * spacing_m, 0.0, c.j * spacing_m);
    layout.offsets.emplace_back(-c.i * spacing_m, 0.0, -c.j * spacing_m);
  }
  layout.offsets.resize(count);

  double max_r = 0.0;
  for (const Vec3& s : layout.offsets) max_r = std::max(max_r, s.norm());
  layout.side_m = 2.0 * max_r;
  return layout;
}

}  // namespace risbound
