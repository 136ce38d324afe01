#include "devroll/leaf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace devroll {

namespace {

double torus_distance2(const Vec& a, const Vec& b, const std::vector<double>& periods) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double d = std::remainder(a[i] - b[i], periods[static_cast<std::size_t>(i)]);
    s += d * d;
  }
  return s;
}

Vec probe(std::size_t idx, const std::vector<double>& periods, int grid) {
  const int k = static_cast<int>(periods.size());
  Vec q(k);
  for (int a = k - 1; a >= 0; --a) {
    const auto i = static_cast<int>(idx % static_cast<std::size_t>(grid));
    idx /= static_cast<std::size_t>(grid);
    q[a] = (i + 0.5) * periods[static_cast<std::size_t>(a)] / grid;
  }
  return q;
}

void check_coverage_args(const std::vector<Vec>& points, const std::vector<double>& periods, double eps, int grid) {
  if (periods.empty()) throw InvalidArgument("coverage needs at least one periodic axis");
  for (double p : periods)
    if (!(p > 0.0)) throw InvalidArgument("coverage periods must be positive");
  if (!(eps > 0.0)) throw InvalidArgument("coverage radius must be positive");
  if (grid < 1) throw InvalidArgument("coverage grid must be positive");
  for (const auto& p : points)
    if (p.size() != static_cast<int>(periods.size())) throw InvalidArgument("coverage point has the wrong dimension");
}

}  // namespace

double coverage_fraction_reference(const std::vector<Vec>& points, const std::vector<double>& periods, double eps,
                                   int grid) {
  check_coverage_args(points, periods, eps, grid);
  std::size_t total = 1;
  for (std::size_t a = 0; a < periods.size(); ++a) total *= static_cast<std::size_t>(grid);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < total; ++i) {
    const Vec q = probe(i, periods, grid);
    for (const auto& p : points)
      if (torus_distance2(p, q, periods) <= eps * eps) {
        ++covered;
        break;
      }
  }
  return static_cast<double>(covered) / static_cast<double>(total);
}

double coverage_fraction(const std::vector<Vec>& points, const std::vector<double>& periods, double eps, int grid,
                         Exec exec) {
  check_coverage_args(points, periods, eps, grid);
  const int k = static_cast<int>(periods.size());
  // Buckets of side >= eps, so a covering point lies in the probe's bucket or a neighbour.
  std::vector<int> nb(static_cast<std::size_t>(k));
  std::size_t nbuckets = 1;
  for (int a = 0; a < k; ++a) {
    nb[static_cast<std::size_t>(a)] = std::max(1, static_cast<int>(std::floor(periods[static_cast<std::size_t>(a)] / eps)));
    nbuckets *= static_cast<std::size_t>(nb[static_cast<std::size_t>(a)]);
  }
  const auto cell_of = [&](const Vec& x, int a) {
    const double per = periods[static_cast<std::size_t>(a)];
    double r = std::fmod(x[a], per);
    if (r < 0.0) r += per;
    const int n = nb[static_cast<std::size_t>(a)];
    return std::min(n - 1, static_cast<int>(r / per * n));
  };
  const auto flat = [&](const std::vector<int>& c) {
    std::size_t idx = 0;
    for (int a = 0; a < k; ++a) {
      const int n = nb[static_cast<std::size_t>(a)];
      idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(((c[static_cast<std::size_t>(a)] % n) + n) % n);
    }
    return idx;
  };
  std::vector<std::vector<std::size_t>> buckets(nbuckets);
  std::vector<int> c(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (int a = 0; a < k; ++a) c[static_cast<std::size_t>(a)] = cell_of(points[i], a);
    buckets[flat(c)].push_back(i);
  }

  std::size_t total = 1;
  for (int a = 0; a < k; ++a) total *= static_cast<std::size_t>(grid);
  std::size_t offsets = 1;
  for (int a = 0; a < k; ++a) offsets *= 3;
  std::vector<unsigned char> hit(total, 0);
  for_each_index(total, exec, [&](std::size_t i) {
    const Vec q = probe(i, periods, grid);
    std::vector<int> base(static_cast<std::size_t>(k)), cell(static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a) base[static_cast<std::size_t>(a)] = cell_of(q, a);
    for (std::size_t o = 0; o < offsets; ++o) {
      std::size_t rest = o;
      for (int a = 0; a < k; ++a) {
        cell[static_cast<std::size_t>(a)] = base[static_cast<std::size_t>(a)] + static_cast<int>(rest % 3) - 1;
        rest /= 3;
      }
      for (std::size_t pi : buckets[flat(cell)])
        if (torus_distance2(points[pi], q, periods) <= eps * eps) {
          hit[i] = 1;
          return;
        }
    }
  });
  const auto covered = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  return static_cast<double>(covered) / static_cast<double>(total);
}

LeafReport leaf_trace(const ChartManifold& m, const Distribution& d, const TangentCurve& steering,
                      const LeafOptions& opts) {
  const int n = m.dim();
  if (d.dim() != n || steering.dim() != n) throw InvalidArgument("dimension mismatch in leaf_trace");
  if (membership_residual(m, d, steering) > kProjectorTolerance) throw InvalidArgument("steering leaves D(p)");
  const ChartPoint& p = steering.base();

  LeafReport rep;
  rep.trajectory = develop(m, steering, opts.integrator);
  const Mat eye = Mat::Identity(n, n);
  for (const auto& s : rep.trajectory.samples) {
    const double speed = m.norm(s.x, s.velocity);
    if (speed == 0.0) continue;
    rep.tangency = std::max(rep.tangency, m.norm(s.x, (eye - d.projector(s.x)) * s.velocity) / speed);
  }

  std::vector<int> axes;
  std::vector<double> periods;
  for (std::size_t a = 0; a < m.periods().size(); ++a)
    if (m.periods()[a] > 0.0) {
      axes.push_back(static_cast<int>(a));
      periods.push_back(m.periods()[a]);
    }
  if (axes.empty()) return rep;
  rep.periodic = true;

  // Closest return on the sample grid, then golden-section refinement between neighbours.
  const auto& samples = rep.trajectory.samples;
  std::size_t best = samples.size();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (samples[k].t < opts.t_min) continue;
    const double dk = m.chart_distance(samples[k].x, p, true);
    if (dk < best_d) {
      best_d = dk;
      best = k;
    }
  }
  if (best < samples.size()) {
    rep.min_return_distance = best_d;
    rep.return_time = samples[best].t;
    double lo = best > 0 ? std::max(samples[best - 1].t, opts.t_min) : samples[best].t;
    double hi = best + 1 < samples.size() ? samples[best + 1].t : samples[best].t;
    const auto dist = [&](double t) {
      return m.chart_distance(state_at(m, rep.trajectory, steering, t, opts.integrator).x, p, true);
    };
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    double fa = dist(a), fb = dist(b);
    for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
      if (fa < fb) {
        hi = b;
        b = a;
        fb = fa;
        a = hi - phi * (hi - lo);
        fa = dist(a);
      } else {
        lo = a;
        a = b;
        fa = fb;
        b = lo + phi * (hi - lo);
        fb = dist(b);
      }
    }
    const double tm = fa < fb ? a : b;
    const double fm = std::min(fa, fb);
    if (fm < rep.min_return_distance) {
      rep.min_return_distance = fm;
      rep.return_time = tm;
    }
  } else {
    rep.min_return_distance = std::numeric_limits<double>::infinity();
  }

  std::vector<Vec> projected;
  projected.reserve(samples.size());
  for (const auto& s : samples) {
    Vec q(static_cast<int>(axes.size()));
    for (std::size_t a = 0; a < axes.size(); ++a) q[static_cast<int>(a)] = s.x[axes[a]];
    projected.push_back(std::move(q));
  }
  rep.coverage_fraction = coverage_fraction(projected, periods, opts.epsilon, opts.coverage_grid, opts.exec);
  return rep;
}

}  // namespace devroll
