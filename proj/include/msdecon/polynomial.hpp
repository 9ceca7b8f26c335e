#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace msdecon {

//! Dense polynomial in the monomial basis. Coefficients are doubles, but all
//! kernel constructions feed integer-valued coefficients (factorial ratios),
//! so arithmetic is exact up to 2^53.
class Polynomial {
public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs)
    : c_(std::move(coeffs))
  {
    trim();
  }

  static Polynomial constant(double v) { return Polynomial({ v }); }

  const std::vector<double>& coeffs() const { return c_; }
  int degree() const { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }
  bool zero() const { return c_.empty(); }

  double operator()(double x) const
  {
    double acc = 0.0;
    for (std::size_t i = c_.size(); i-- > 0;)
      acc = acc * x + c_[i];
    return acc;
  }

  Polynomial derivative() const
  {
    if (c_.size() <= 1)
      return Polynomial();
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i)
      d[i - 1] = c_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
  }

  Polynomial derivative(int order) const
  {
    Polynomial p = *this;
    for (int j = 0; j < order; ++j)
      p = p.derivative();
    return p;
  }

  Polynomial antiderivative() const
  {
    std::vector<double> a(c_.size() + 1, 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i)
      a[i + 1] = c_[i] / static_cast<double>(i + 1);
    return Polynomial(std::move(a));
  }

  double integral(double a, double b) const
  {
    Polynomial F = antiderivative();
    return F(b) - F(a);
  }

  Polynomial operator+(const Polynomial& o) const
  {
    std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i)
      r[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i)
      r[i] += o.c_[i];
    return Polynomial(std::move(r));
  }

  Polynomial operator-(const Polynomial& o) const { return *this + (o * -1.0); }

  Polynomial operator*(double s) const
  {
    std::vector<double> r = c_;
    for (auto& v : r)
      v *= s;
    return Polynomial(std::move(r));
  }

  Polynomial operator*(const Polynomial& o) const
  {
    if (c_.empty() || o.c_.empty())
      return Polynomial();
    std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i)
      for (std::size_t j = 0; j < o.c_.size(); ++j)
        r[i + j] += c_[i] * o.c_[j];
    return Polynomial(std::move(r));
  }

  //! p(alpha*x + beta) expanded in x.
  Polynomial compose_affine(double alpha, double beta) const
  {
    Polynomial result;
    // Horner in the affine argument: ((c_n (ax+b) + c_{n-1})(ax+b) + ...)
    for (std::size_t i = c_.size(); i-- > 0;) {
      result = result * Polynomial({ beta, alpha });
      result = result + Polynomial::constant(c_[i]);
    }
    return result;
  }

  //! L2 inner product over [a, b].
  double inner(const Polynomial& o, double a, double b) const
  {
    return ((*this) * o).integral(a, b);
  }

  double l2_norm(double a, double b) const { return std::sqrt(inner(*this, a, b)); }

private:
  void trim()
  {
    while (!c_.empty() && c_.back() == 0.0)
      c_.pop_back();
  }

  std::vector<double> c_;
};

} // namespace msdecon
