#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnmn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when operand shapes are incompatible. Carries the offending node and
/// shapes so callers can report them without parsing the message.
class ShapeError : public Error {
 public:
  ShapeError(std::string op, std::size_t node, std::string detail)
      : Error("shape mismatch in " + op + " (node " + std::to_string(node) + "): " + detail),
        op_(std::move(op)),
        node_(node) {}

  const std::string& op() const { return op_; }
  std::size_t node() const { return node_; }

 private:
  std::string op_;
  std::size_t node_;
};

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major array of doubles.
class Array {
 public:
  Array() = default;
  explicit Array(Shape shape, double fill = 0.0);
  Array(Shape shape, std::vector<double> data);

  /// Same as the (shape, data) constructor but rejects NaN and Inf.
  static Array checked(Shape shape, std::vector<double> data);
  static Array matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  static Array row(std::vector<double> values);
  static Array from_rows(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? (shape_.empty() ? 0 : 1) : shape_[1]; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool all_finite() const;
  void fill(double v);
  /// Returns a copy with a different shape of equal element count.
  Array reshaped(Shape shape) const;

  friend bool operator==(const Array& a, const Array& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Rounds every element to the nearest float and back.
Array round_to_float(const Array& a);
double max_abs_diff(const Array& a, const Array& b);

}  // namespace pnmn
