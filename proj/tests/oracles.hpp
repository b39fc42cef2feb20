#pragma once

// Brute-force reference implementations. Deliberately naive: plain loops over
// std::vector, no shared code with the library beyond its data types.

#include "claimcheck/analysis.hpp"
#include "claimcheck/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;

inline Grid luma_grid(const claimcheck::RgbImage& img) {
  Grid g(img.rows(), std::vector<double>(img.cols()));
  for (int y = 0; y < img.rows(); ++y)
    for (int x = 0; x < img.cols(); ++x) {
      const double r = img.channels[0](y, x), gr = img.channels[1](y, x), b = img.channels[2](y, x);
      g[y][x] = (0.299 * r + 0.587 * gr + 0.114 * b) / 255.0;
    }
  return g;
}

inline double mean(const Grid& g) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& row : g)
    for (double v : row) {
      s += v;
      ++n;
    }
  return s / static_cast<double>(n);
}

inline double brightness(const claimcheck::RgbImage& img) { return mean(luma_grid(img)); }

inline double exposure(const claimcheck::RgbImage& img) {
  const Grid g = luma_grid(img);
  std::size_t good = 0, n = 0;
  for (const auto& row : g)
    for (double v : row) {
      if (v >= 0.10 && v <= 0.90) ++good;
      ++n;
    }
  return static_cast<double>(good) / static_cast<double>(n);
}

inline double contrast(const claimcheck::RgbImage& img) {
  const Grid g = luma_grid(img);
  const double m = mean(g);
  double ss = 0.0;
  std::size_t n = 0;
  for (const auto& row : g)
    for (double v : row) {
      ss += (v - m) * (v - m);
      ++n;
    }
  return std::min(1.0, std::sqrt(ss / static_cast<double>(n)) / 0.5);
}

/// Direct 2-D convolution with a normalized isotropic gaussian.
inline Grid blur2d(const Grid& g, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int rows = static_cast<int>(g.size()), cols = static_cast<int>(g[0].size());
  double norm = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) norm += std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
  Grid out(rows, std::vector<double>(cols, 0.0));
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) {
      double acc = 0.0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          const int yy = std::clamp(y + dy, 0, rows - 1);
          const int xx = std::clamp(x + dx, 0, cols - 1);
          acc += std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) * g[yy][xx];
        }
      out[y][x] = acc / norm;
    }
  return out;
}

inline double sharpness(const claimcheck::RgbImage& img) {
  const Grid g = luma_grid(img);
  const Grid b = blur2d(g, 2.0);
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t y = 0; y < g.size(); ++y)
    for (std::size_t x = 0; x < g[y].size(); ++x) {
      s += std::abs(g[y][x] - b[y][x]);
      ++n;
    }
  return std::min(1.0, s / static_cast<double>(n) / 0.05);
}

/// Barycentric membership, edges included.
inline bool inside(double px, double py, const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const double det = (b.y() - c.y()) * (a.x() - c.x()) + (c.x() - b.x()) * (a.y() - c.y());
  const double l1 = ((b.y() - c.y()) * (px - c.x()) + (c.x() - b.x()) * (py - c.y())) / det;
  const double l2 = ((c.y() - a.y()) * (px - c.x()) + (a.x() - c.x()) * (py - c.y())) / det;
  const double l3 = 1.0 - l1 - l2;
  const double eps = 1e-12;
  return l1 >= -eps && l2 >= -eps && l3 >= -eps;
}

inline double face_luminance(const claimcheck::RgbImage& img, const claimcheck::FivePointLandmarks& lm) {
  const Grid g = luma_grid(img);
  const Eigen::Vector2d tris[4][3] = {{lm.left_eye, lm.right_eye, lm.nose_tip},
                                      {lm.left_eye, lm.nose_tip, lm.left_mouth},
                                      {lm.right_eye, lm.nose_tip, lm.right_mouth},
                                      {lm.left_mouth, lm.right_mouth, lm.nose_tip}};
  double total = 0.0;
  for (const auto& t : tris) {
    double s = 0.0;
    int n = 0;
    for (int y = 0; y < static_cast<int>(g.size()); ++y)
      for (int x = 0; x < static_cast<int>(g[y].size()); ++x)
        if (inside(x, y, t[0], t[1], t[2])) {
          s += g[y][x];
          ++n;
        }
    total += s / n;
  }
  return total / 4.0;
}

/// Bin by scanning edges instead of flooring.
inline int bin_of(double v, int bins, double lo, double hi) {
  const double w = (hi - lo) / bins;
  if (v < lo) return 0;
  for (int k = 0; k < bins - 1; ++k)
    if (v < lo + (k + 1) * w) return k;
  return bins - 1;
}

inline double overlap(const std::vector<double>& a, const std::vector<double>& b, int bins = 50, double lo = -1.0,
                      double hi = 1.0) {
  std::vector<int> ca(bins, 0), cb(bins, 0);
  for (double v : a) ++ca[bin_of(v, bins, lo, hi)];
  for (double v : b) ++cb[bin_of(v, bins, lo, hi)];
  double s = 0.0;
  for (int k = 0; k < bins; ++k)
    s += std::min(static_cast<double>(ca[k]) / a.size(), static_cast<double>(cb[k]) / b.size());
  return std::min(1.0, s);
}

inline double d_prime(const std::vector<double>& a, const std::vector<double>& b) {
  auto moments = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m);
    return std::pair{m, var / v.size()};
  };
  const auto [m1, v1] = moments(a);
  const auto [m2, v2] = moments(b);
  return std::abs(m1 - m2) / std::sqrt((v1 + v2) / 2.0);
}

/// rank = 1 + #smaller + (#equal others) / 2
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double smaller = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) smaller += 1.0;
      else if (j != i && v[j] == v[i]) equal += 1.0;
    }
    r[i] = 1.0 + smaller + equal / 2.0;
  }
  return r;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i] / n;
    mb += rb[i] / n;
  }
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double confound(const Eigen::MatrixXd& m, const std::vector<double>& quality) {
  std::vector<double> mean_sim;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (j != i) s += m(i, j);
    mean_sim.push_back(s / static_cast<double>(m.rows() - 1));
  }
  return spearman(quality, mean_sim);
}

struct Pairs {
  std::multiset<double> genuine, impostor;
};

inline Pairs enumerate_pairs(const Eigen::MatrixXd& m, const std::vector<std::string>& labels) {
  Pairs p;
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (j <= i) continue;
      (labels[i] == labels[j] ? p.genuine : p.impostor).insert(m(i, j));
    }
  return p;
}

inline std::multiset<double> offdiagonal(const Eigen::MatrixXd& m) {
  std::multiset<double> s;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j) s.insert(m(i, j));
  return s;
}

/// Row order for ascending quality, ties by id, by repeated minimum selection.
inline std::vector<std::size_t> quality_order(const std::vector<double>& q, const std::vector<std::string>& ids) {
  std::vector<std::size_t> order;
  std::vector<bool> used(q.size(), false);
  for (std::size_t step = 0; step < q.size(); ++step) {
    std::size_t best = q.size();
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (used[i]) continue;
      if (best == q.size() || q[i] < q[best] || (q[i] == q[best] && ids[i] < ids[best])) best = i;
    }
    used[best] = true;
    order.push_back(best);
  }
  return order;
}

}  // namespace oracle
