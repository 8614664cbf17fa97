#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hollow {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct NumericError : Error {
  using Error::Error;
};

// Dense row-major array of doubles, rank 0 (scalar), 1 (vector) or 2 (matrix).
struct Shape {
  std::uint8_t rank = 0;
  std::uint32_t d0 = 1;  // rows (rank>=1)
  std::uint32_t d1 = 1;  // cols (rank==2)

  static Shape scalar() { return {0, 1, 1}; }
  static Shape vec(std::uint32_t n) { return {1, n, 1}; }
  static Shape mat(std::uint32_t r, std::uint32_t c) { return {2, r, c}; }

  std::size_t numel() const { return std::size_t(d0) * d1; }
  bool operator==(const Shape& o) const {
    return rank == o.rank && d0 == o.d0 && d1 == o.d1;
  }
  bool operator!=(const Shape& o) const { return !(*this == o); }

  std::string str() const {
    if (rank == 0) return "()";
    if (rank == 1) return "(" + std::to_string(d0) + ")";
    return "(" + std::to_string(d0) + "," + std::to_string(d1) + ")";
  }
};

struct Tensor {
  Shape shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0) : shape(s), v(s.numel(), fill) {}
  Tensor(Shape s, std::vector<double> data) : shape(s), v(std::move(data)) {
    if (v.size() != shape.numel())
      throw ShapeError("tensor data length " + std::to_string(v.size()) +
                       " does not match shape " + shape.str());
  }

  static Tensor scalar(double x) { return Tensor(Shape::scalar(), {x}); }
  static Tensor vec(std::vector<double> data) {
    auto n = static_cast<std::uint32_t>(data.size());
    return Tensor(Shape::vec(n), std::move(data));
  }
  static Tensor zeros(Shape s) { return Tensor(s, 0.0); }
  static Tensor ones(Shape s) { return Tensor(s, 1.0); }
  static Tensor mat(std::uint32_t r, std::uint32_t c, std::vector<double> data) {
    return Tensor(Shape::mat(r, c), std::move(data));
  }

  std::size_t numel() const { return shape.numel(); }
  double& at(std::size_t i) { return v[i]; }
  double at(std::size_t i) const { return v[i]; }
  double& at(std::size_t i, std::size_t j) { return v[i * shape.d1 + j]; }
  double at(std::size_t i, std::size_t j) const { return v[i * shape.d1 + j]; }

  bool all_finite() const;
};

inline bool Tensor::all_finite() const {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace hollow
