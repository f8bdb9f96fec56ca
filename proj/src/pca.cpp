#include "pnmn/pca.hpp"

#include <cmath>

namespace pnmn {

namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> multiply(const Array& m, const std::vector<double>& v) {
  const std::size_t d = v.size();
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

}  // namespace

PcaResult pca_top(const Array& data, std::size_t count, double tol, std::size_t max_iter) {
  if (data.rank() != 2 || data.rows() < 2) throw Error("pca: need a matrix with at least two rows");
  const std::size_t n = data.rows(), d = data.cols();
  if (count == 0 || count > d) throw Error("pca: component count must be in [1, dim]");

  PcaResult r;
  r.mean = Array::matrix(1, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) r.mean[j] += data(i, j);
  for (auto& v : r.mean.values()) v /= static_cast<double>(n);

  Array cov = Array::matrix(d, d);
  std::vector<double> centered(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) centered[j] = data(i, j) - r.mean[j];
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a; b < d; ++b) cov(a, b) += centered[a] * centered[b];
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      cov(a, b) /= static_cast<double>(n - 1);
      cov(b, a) = cov(a, b);
    }
  }
  for (std::size_t a = 0; a < d; ++a) r.total_variance += cov(a, a);

  r.components = Array::matrix(count, d);
  r.eigenvalues = Array::matrix(1, count);
  for (std::size_t c = 0; c < count; ++c) {
    // Deterministic start that is unlikely to be orthogonal to the leading vector.
    std::vector<double> v(d);
    for (std::size_t j = 0; j < d; ++j) v[j] = 1.0 + 0.01 * static_cast<double>(j % 7);
    for (std::size_t p = 0; p < c; ++p) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += v[j] * r.components(p, j);
      for (std::size_t j = 0; j < d; ++j) v[j] -= dot * r.components(p, j);
    }
    double vn = norm(v);
    for (auto& x : v) x /= vn;
    double lambda = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
      std::vector<double> w = multiply(cov, v);
      const double wn = norm(w);
      if (wn <= 1e-300) {
        lambda = 0.0;
        break;
      }
      for (auto& x : w) x /= wn;
      // Compared up to sign: a negative residual eigenvalue flips the iterate every step.
      double diff_pos = 0.0, diff_neg = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        diff_pos = std::max(diff_pos, std::abs(w[j] - v[j]));
        diff_neg = std::max(diff_neg, std::abs(w[j] + v[j]));
      }
      v = std::move(w);
      lambda = wn;
      if (std::min(diff_pos, diff_neg) < tol) break;
    }
    // Rayleigh quotient for the final eigenvalue estimate.
    const std::vector<double> cv = multiply(cov, v);
    double rq = 0.0;
    for (std::size_t j = 0; j < d; ++j) rq += v[j] * cv[j];
    lambda = std::max(rq, 0.0);

    std::size_t big = 0;
    for (std::size_t j = 1; j < d; ++j)
      if (std::abs(v[j]) > std::abs(v[big])) big = j;
    if (v[big] < 0.0)
      for (auto& x : v) x = -x;

    for (std::size_t j = 0; j < d; ++j) r.components(c, j) = v[j];
    r.eigenvalues[c] = lambda;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) cov(a, b) -= lambda * v[a] * v[b];
  }

  r.explained = Array::matrix(1, count);
  for (std::size_t c = 0; c < count; ++c) {
    r.explained[c] = r.total_variance > 0.0 ? r.eigenvalues[c] / r.total_variance : 0.0;
  }
  r.coordinates = Array::matrix(n, count);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < count; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += (data(i, j) - r.mean[j]) * r.components(c, j);
      r.coordinates(i, c) = s;
    }
  }
  return r;
}

}  // namespace pnmn
