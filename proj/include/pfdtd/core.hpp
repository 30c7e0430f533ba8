#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace pfdtd {

/// CODATA 2018 vacuum constants (SI).
inline constexpr double kEps0 = 8.8541878128e-12;
inline constexpr double kMu0 = 1.25663706212e-6;
inline constexpr double kPi = 3.14159265358979323846;
inline const double kC0 = 1.0 / std::sqrt(kEps0 * kMu0);

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SizeMismatch : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Axis : int { X = 0, Y = 1, Z = 2 };

inline constexpr std::array<Axis, 3> kAxes{Axis::X, Axis::Y, Axis::Z};

constexpr int idx(Axis a) { return static_cast<int>(a); }
constexpr Axis axis_from(int a) { return static_cast<Axis>(((a % 3) + 3) % 3); }
constexpr char axis_name(Axis a) { return "xyz"[idx(a)]; }

/// Boundary faces of the box, ordered x-, x+, y-, y+, z-, z+.
enum class Face : int { XMinus = 0, XPlus, YMinus, YPlus, ZMinus, ZPlus };

inline constexpr std::array<Face, 6> kFaces{Face::XMinus, Face::XPlus, Face::YMinus,
                                            Face::YPlus,  Face::ZMinus, Face::ZPlus};

constexpr Axis face_normal(Face f) { return axis_from(static_cast<int>(f) / 2); }
constexpr bool face_is_plus(Face f) { return static_cast<int>(f) % 2 == 1; }
constexpr int face_outward_sign(Face f) { return face_is_plus(f) ? 1 : -1; }
constexpr Face make_face(Axis normal, bool plus) {
  return static_cast<Face>(2 * idx(normal) + (plus ? 1 : 0));
}

inline std::string face_name(Face f) {
  return std::string(1, axis_name(face_normal(f))) + (face_is_plus(f) ? "+" : "-");
}

using Index3 = std::array<int, 3>;
using Vec3 = std::array<double, 3>;

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) {
    add(v);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw SizeMismatch(std::string(what) + ": expected " + std::to_string(want) +
                       " entries, got " + std::to_string(got));
  }
}

inline void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + ": non-finite value");
  }
}

}  // namespace pfdtd
