#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "msdecon/errors.hpp"
#include "msdecon/teststat.hpp"

namespace msdecon {

//! Confidence rectangle [t, t+h] x [b_minus, b_plus]: with simultaneous
//! confidence 1-alpha the graph of op(p)f intersects every rectangle.
struct ConfidenceRectangle {
  double t = 0.0;
  double h = 0.0;
  double b_minus = 0.0;
  double b_plus = 0.0;
  double d = 0.0; //!< the half-width statistic used
};

//! d_{t,h} = sqrt(ghat(t)) V sqrt(2 log nu/h) (1 + q_alpha loglog(nu/h)/log(nu/h)).
//! The row's V already reflects the mode: ||v_{t,h}||_2 for the general path,
//! h^{1/2-m-r} |A a_P(t)| ||D^{r+m} phi||_2 for the principal path.
inline double halfwidth(const StatisticRow& row, double q_alpha, double nu)
{
  double L = std::log(nu / row.h);
  double corr = 1.0 + q_alpha * std::log(L) / L;
  // An extremely negative quantile can push the correction below zero; the
  // rectangle then degenerates to a point rather than inverting (coverage is
  // monotone in d, so clamping keeps the simultaneous guarantee).
  return std::sqrt(row.ghat) * row.V * std::sqrt(2.0 * L) * std::max(corr, 0.0);
}

//! b_+- = (T -+ d) / (h sqrt(n)) for every row of the table.
inline std::vector<ConfidenceRectangle> rectangles(const StatisticTable& table, double q_alpha,
                                                   std::size_t n, double nu)
{
  if (n == 0)
    throw config_error("rectangles: n must be positive");
  std::vector<ConfidenceRectangle> out;
  out.reserve(table.rows.size());
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  for (const auto& row : table.rows) {
    ConfidenceRectangle r;
    r.t = row.t;
    r.h = row.h;
    r.d = halfwidth(row, q_alpha, nu);
    r.b_minus = (row.T - r.d) / (row.h * sqrt_n);
    r.b_plus = (row.T + r.d) / (row.h * sqrt_n);
    out.push_back(r);
  }
  return out;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

//! Qualitative summary derived from the rectangles: certified increase and
//! decrease intervals, their minimal (containment-pruned) subsets, root
//! intervals from pairing opposite signs, and the implied lower confidence
//! bound on the number of sign changes of op(p)f.
struct QualitativeReport {
  double alpha = 0.1;
  std::vector<Interval> increases;
  std::vector<Interval> decreases;
  std::vector<Interval> minimal_increases;
  std::vector<Interval> minimal_decreases;
  std::vector<Interval> root_intervals;
  int mode_count_lower_bound = 0;
  std::string metadata;
};

namespace detail {

//! Drop every interval that strictly contains another interval of the list.
inline std::vector<Interval> prune_containing(std::vector<Interval> v)
{
  std::vector<Interval> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    bool contains_other = false;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (i == j)
        continue;
      bool strictly_contains = v[i].lo <= v[j].lo && v[j].hi <= v[i].hi &&
                               (v[i].lo < v[j].lo || v[j].hi < v[i].hi);
      if (strictly_contains) {
        contains_other = true;
        break;
      }
    }
    if (!contains_other)
      out.push_back(v[i]);
  }
  return out;
}

} // namespace detail

inline QualitativeReport extract_report(const std::vector<ConfidenceRectangle>& rects, double alpha)
{
  QualitativeReport rep;
  rep.alpha = alpha;
  for (const auto& r : rects) {
    if (r.b_minus > 0.0)
      rep.increases.push_back({ r.t, r.t + r.h });
    if (r.b_plus < 0.0)
      rep.decreases.push_back({ r.t, r.t + r.h });
  }
  rep.minimal_increases = detail::prune_containing(rep.increases);
  rep.minimal_decreases = detail::prune_containing(rep.decreases);

  // Merge the minimal lists sorted by left endpoint and pair adjacent
  // opposite-sign intervals, each interval used at most once. Each pair
  // certifies a zero of op(p)f inside [min(lo), max(hi)].
  struct Tagged {
    Interval iv;
    int sign;
  };
  std::vector<Tagged> merged;
  for (const auto& iv : rep.minimal_increases)
    merged.push_back({ iv, +1 });
  for (const auto& iv : rep.minimal_decreases)
    merged.push_back({ iv, -1 });
  std::sort(merged.begin(), merged.end(), [](const Tagged& a, const Tagged& b) {
    return a.iv.lo < b.iv.lo || (a.iv.lo == b.iv.lo && a.iv.hi < b.iv.hi);
  });
  for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
    if (merged[i].sign != merged[i + 1].sign) {
      rep.root_intervals.push_back({ std::min(merged[i].iv.lo, merged[i + 1].iv.lo),
                                     std::max(merged[i].iv.hi, merged[i + 1].iv.hi) });
      ++i; // both intervals consumed
    }
  }

  // Maximal disjoint subfamily, greedy by right endpoint; closed intervals,
  // so touching endpoints count as overlapping.
  std::vector<Interval> roots = rep.root_intervals;
  std::sort(roots.begin(), roots.end(),
            [](const Interval& a, const Interval& b) { return a.hi < b.hi; });
  double last_hi = -std::numeric_limits<double>::infinity();
  int count = 0;
  for (const auto& iv : roots) {
    if (iv.lo > last_hi) {
      ++count;
      last_hi = iv.hi;
    }
  }
  rep.mode_count_lower_bound = count;
  return rep;
}

//! Detection boundary: the scale floor h_min(n) and the signal size at
//! which sign calls become reliable for a given problem order.
struct DetectionBoundary {
  double C_alpha = 0.0;
  double order = 0.0; //!< m + r
  double beta = 0.0;

  double h_min(double n) const
  {
    return C_alpha * std::pow(std::log(n) / n, 1.0 / (2.0 * beta + 2.0 * order + 1.0));
  }

  double signal_threshold(double n) const
  {
    return std::pow(std::log(n) / n, beta / (2.0 * beta + 2.0 * order + 1.0));
  }
};

//! C_alpha = ( sqrt(8 ||f_eps||_inf) h^{m+r-1/2} ||v_{t,h}||_2 (1+q_alpha) )^{2/(2m+2r+1)},
//! with the norm evaluated at a reference scale (the product is scale-free to
//! first order).
inline DetectionBoundary detection_boundary(const ProblemSpec& spec, const Kernel& phi,
                                            double f_eps_sup, double q_alpha, double beta,
                                            double reference_h = 1.0 / 64.0)
{
  if (1.0 + q_alpha <= 0.0)
    throw config_error("detection_boundary: need 1 + q_alpha > 0");
  double order = spec.total_order();
  double v_norm;
  if (auto v = closed_form_v(spec, phi, 0.0, reference_h)) {
    v_norm = v->l2_norm();
  } else {
    GridFunction vg = v_fourier(spec, phi, 0.0, reference_h, reference_h / 64.0);
    v_norm = std::sqrt(vg.l2_norm_sq());
  }
  double base = std::sqrt(8.0 * f_eps_sup) * std::pow(reference_h, order - 0.5) * v_norm * (1.0 + q_alpha);
  DetectionBoundary db;
  db.order = order;
  db.beta = beta;
  db.C_alpha = std::pow(base, 2.0 / (2.0 * order + 1.0));
  return db;
}

//! Per-rectangle coverage against a known truth: the rectangle is covered
//! iff the graph of op(p)f meets it, tested on a uniform grid over [t, t+h].
inline std::vector<char> coverage_check(const std::function<double(double)>& true_opf,
                                        const std::vector<ConfidenceRectangle>& rects,
                                        int grid_points = 1000)
{
  std::vector<char> covered;
  covered.reserve(rects.size());
  for (const auto& r : rects) {
    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn;
    for (int i = 0; i <= grid_points; ++i) {
      double x = r.t + r.h * static_cast<double>(i) / grid_points;
      double y = true_opf(x);
      mn = std::min(mn, y);
      mx = std::max(mx, y);
    }
    covered.push_back(mn <= r.b_plus && mx >= r.b_minus);
  }
  return covered;
}

} // namespace msdecon
