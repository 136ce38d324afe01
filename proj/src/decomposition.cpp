#include "devroll/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace devroll {

namespace {

void require_interior(const ChartManifold& m, const ChartPoint& p) {
  if (p.size() != m.dim()) throw InvalidArgument("point dimension does not match the manifold");
  if (m.inside(p) != Location::interior) throw InvalidArgument("base point must be interior");
}

void require_complementary(const ChartManifold& m, const Distribution& d1, const Distribution& d2,
                           const ChartPoint& p) {
  const int n = m.dim();
  if (d1.dim() != n || d2.dim() != n) throw InvalidArgument("distribution dimension does not match the manifold");
  if ((d1.projector(p) + d2.projector(p) - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > kProjectorTolerance)
    throw InvalidArgument("distributions are not complementary at the base point");
}

// Single-sample result standing in for a leg that could not start.
DevelopmentResult stub_leg(const DevelopmentSample& at, StopReason status) {
  DevelopmentResult r;
  DevelopmentSample s = at;
  s.frame = Mat::Identity(at.x.size(), at.x.size());
  r.samples.push_back(std::move(s));
  r.status = status;
  r.t_stop = 0.0;
  return r;
}

// Development of tail carried to the end of first.
DevelopmentResult second_leg(const ChartManifold& m, const DevelopmentResult& first, const TangentCurve& tail,
                             const IntegratorOpts& opts) {
  if (!first.completed()) return stub_leg(first.back(), first.status);
  return develop(m, tail.mapped(first.back().frame.transpose(), first.back().x), opts);
}

}  // namespace

double holonomy_deviation(const Mat& g, const Mat& transport) {
  const int n = static_cast<int>(g.rows());
  const Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw NumericalError("metric is not positive definite");
  const Mat c = llt.matrixL();
  const Mat ct = c.transpose();
  // C^T H C^-T
  const Mat h_on = ct * transport * ct.triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
  Eigen::JacobiSVD<Mat> svd(h_on - Mat::Identity(n, n));
  return svd.singularValues()(0);
}

SplitReport parallelogram_check(const ChartManifold& m, const Distribution& d1, const Distribution& d2,
                                const ChartPoint& p, const TangentCurve& v1, const TangentCurve& v2, double t,
                                const IntegratorOpts& opts) {
  require_interior(m, p);
  require_complementary(m, d1, d2, p);
  if (v1.base() != p || v2.base() != p) throw InvalidArgument("steering curves must be based at p");
  if (!(t > 0.0 && t <= v1.horizon() && t <= v2.horizon()))
    throw InvalidArgument("t must lie in (0, horizon] of both curves");
  if (membership_residual(m, d1, v1) > kProjectorTolerance) throw InvalidArgument("v1 leaves D1(p)");
  if (membership_residual(m, d2, v2) > kProjectorTolerance) throw InvalidArgument("v2 leaves D2(p)");

  const TangentCurve a1 = v1.head(t);
  const TangentCurve a2 = v2.head(t);
  SplitReport out;
  out.legs.reserve(5);
  out.legs.push_back(develop(m, a1 + a2, opts));
  out.legs.push_back(develop(m, a1, opts));
  out.legs.push_back(second_leg(m, out.legs[1], a2, opts));
  out.legs.push_back(develop(m, a2, opts));
  out.legs.push_back(second_leg(m, out.legs[3], a1, opts));

  static const char* names[] = {"dev(p,v)", "dev(p,v1)", "dev(q1,v2)", "dev(p,v2)", "dev(q2,v1)"};
  for (std::size_t k = 0; k < out.legs.size(); ++k)
    if (!out.legs[k].completed()) {
      out.status = out.legs[k].status;
      out.failed_leg = names[k];
      break;
    }

  const ChartPoint& e0 = out.legs[0].back().x;
  const ChartPoint& e12 = out.legs[2].back().x;
  const ChartPoint& e21 = out.legs[4].back().x;
  out.endpoint_mismatch = std::max({m.chart_distance(e0, e12), m.chart_distance(e0, e21), m.chart_distance(e12, e21)});

  // Loop transports: back along dev(p,v) after the two-leg route.
  const Mat tv = out.legs[0].back().frame.transpose();
  const Mat t12 = out.legs[2].back().frame.transpose() * out.legs[1].back().frame.transpose();
  const Mat t21 = out.legs[4].back().frame.transpose() * out.legs[3].back().frame.transpose();
  const auto lu = tv.partialPivLu();
  const Mat g = m.metric_at(p);
  out.holonomy_deviation = std::max(holonomy_deviation(g, lu.solve(t12)), holonomy_deviation(g, lu.solve(t21)));
  return out;
}

std::vector<Quadruple> random_quadruples(int n, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Quadruple> out(count);
  for (auto& q : out)
    for (auto& v : q) {
      v.resize(n);
      for (int i = 0; i < n; ++i) v[i] = normal(rng);
    }
  return out;
}

double curvature_split_check(const ChartManifold& m, const Distribution& d1, const Distribution& d2,
                             const ChartPoint& p, const std::vector<Quadruple>& quadruples) {
  require_interior(m, p);
  require_complementary(m, d1, d2, p);
  const CurvatureTensor r = m.curvature_at(p);
  const Mat p1 = d1.projector(p);
  const Mat p2 = d2.projector(p);
  double worst = 0.0;
  for (const auto& q : quadruples) {
    for (const auto& v : q)
      if (v.size() != m.dim()) throw InvalidArgument("quadruple vector has the wrong dimension");
    const double whole = r.apply(q[0], q[1], q[2], q[3]);
    const double first = r.apply(p1 * q[0], p1 * q[1], p1 * q[2], p1 * q[3]);
    const double second = r.apply(p2 * q[0], p2 * q[1], p2 * q[2], p2 * q[3]);
    worst = std::max(worst, std::abs(whole - first - second));
  }
  return worst;
}

InvarianceReport curvature_transport_invariance_check(const ChartManifold& m, const Distribution& d1,
                                                      const Distribution& d2, const ChartPath& path,
                                                      const std::vector<Quadruple>& quadruples,
                                                      const IntegratorOpts& opts, int checkpoints) {
  if (checkpoints < 1) throw InvalidArgument("checkpoints must be positive");
  const ChartPoint start = path.position(path.t_begin());
  require_interior(m, start);
  require_complementary(m, d1, d2, start);
  const int n = m.dim();
  const DevelopmentResult tr = transport_along(m, path, opts);

  InvarianceReport out;
  out.status = tr.status;
  for (const auto& s : tr.samples) {
    const Vec off = (Mat::Identity(n, n) - d2.projector(s.x)) * s.velocity;
    out.tangency = std::max(out.tangency, m.norm(s.x, off) / (1.0 + m.norm(s.x, s.velocity)));
  }
  if (out.tangency > kTangencyTolerance) throw InvalidArgument("path is not tangential to D2");

  const Mat p1 = d1.projector(start);
  std::vector<Quadruple> projected;
  for (const auto& q : quadruples) {
    Quadruple pq;
    for (std::size_t k = 0; k < 4; ++k) {
      if (q[k].size() != n) throw InvalidArgument("quadruple vector has the wrong dimension");
      pq[k] = p1 * q[k];
    }
    projected.push_back(std::move(pq));
  }
  const CurvatureTensor r0 = m.curvature_at(start);
  std::vector<double> reference;
  for (const auto& q : projected) reference.push_back(r0.apply(q[0], q[1], q[2], q[3]));

  const std::size_t last = tr.samples.size() - 1;
  for (int j = 1; j <= checkpoints; ++j) {
    const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(last) * j / checkpoints));
    const auto& s = tr.samples[k];
    const CurvatureTensor rt = m.curvature_at(s.x);
    const Mat pt = s.frame.transpose();
    for (std::size_t q = 0; q < projected.size(); ++q) {
      const auto& v = projected[q];
      const double moved = rt.apply(pt * v[0], pt * v[1], pt * v[2], pt * v[3]);
      out.residual = std::max(out.residual, std::abs(moved - reference[q]));
    }
  }
  return out;
}

DerhamReport derham_local_isometry(const ChartManifold& m, const Distribution& d1, const Distribution& d2,
                                   const ChartPoint& p, const DerhamOptions& opts) {
  require_interior(m, p);
  require_complementary(m, d1, d2, p);
  if (opts.points < 3) throw InvalidArgument("lattice needs at least 3 points per axis");
  if (!(opts.radius > 0.0)) throw InvalidArgument("lattice radius must be positive");
  validate(opts.integrator);

  const int n = m.dim();
  DerhamReport rep;
  rep.basis1 = d1.basis(m, p);
  rep.basis2 = d2.basis(m, p);
  const int n1 = d1.rank();
  const int n2 = d2.rank();
  if (n1 + n2 != n) throw InvalidArgument("ranks of the distributions must add up to the dimension");
  const int mp = opts.points;
  rep.spacing = 2.0 * opts.radius / (mp - 1);
  rep.shape.assign(static_cast<std::size_t>(n), mp);
  const auto coord = [&](int i) { return -opts.radius + i * rep.spacing; };

  // Multi-index helpers; axis 0 varies slowest.
  const auto pow_int = [](int b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(b);
    return r;
  };
  const std::size_t count1 = pow_int(mp, n1);
  const std::size_t count2 = pow_int(mp, n2);
  const std::size_t total = count1 * count2;
  const auto digits = [&](std::size_t idx, int len) {
    std::vector<int> d(static_cast<std::size_t>(len));
    for (int a = len - 1; a >= 0; --a) {
      d[static_cast<std::size_t>(a)] = static_cast<int>(idx % static_cast<std::size_t>(mp));
      idx /= static_cast<std::size_t>(mp);
    }
    return d;
  };
  const auto vec_of = [&](const std::vector<int>& d) {
    Vec w(static_cast<int>(d.size()));
    for (std::size_t a = 0; a < d.size(); ++a) w[static_cast<int>(a)] = coord(d[a]);
    return w;
  };

  // Leaf developments h_i(w_i) = dev(p, w_i)(1), shared by every node with the same w_i.
  const auto leaf_runs = [&](const Mat& basis, std::size_t count, int len) {
    std::vector<DevelopmentResult> runs(count);
    for_each_index(count, opts.exec, [&](std::size_t i) {
      const Vec w = vec_of(digits(i, len));
      if (w.norm() > opts.radius * (1.0 + 1e-12)) return;
      runs[i] = geodesic(m, p, basis * w, 1.0, opts.integrator);
    });
    return runs;
  };
  const std::vector<DevelopmentResult> leaf1 = leaf_runs(rep.basis1, count1, n1);
  const std::vector<DevelopmentResult> leaf2 = leaf_runs(rep.basis2, count2, n2);

  rep.nodes.resize(total);
  for_each_index(total, opts.exec, [&](std::size_t idx) {
    const std::size_t i1 = idx / count2;
    const std::size_t i2 = idx % count2;
    DerhamNode& node = rep.nodes[idx];
    const Vec s = vec_of(digits(i1, n1));
    const Vec sigma = vec_of(digits(i2, n2));
    node.w.resize(n);
    node.w << s, sigma;
    node.active = node.w.norm() <= opts.radius * (1.0 + 1e-12);
    if (!node.active) return;
    const DevelopmentResult& a = leaf1[i1];
    const DevelopmentResult& b = leaf2[i2];
    node.h1 = a.back().x;
    node.h2 = b.back().x;
    if (!a.completed() || !b.completed()) return;
    const Vec w1 = rep.basis1 * s;
    const Vec w2 = rep.basis2 * sigma;
    const DevelopmentResult f = geodesic(m, a.back().x, a.back().frame.transpose() * w2, 1.0, opts.integrator);
    const DevelopmentResult g = geodesic(m, b.back().x, b.back().frame.transpose() * w1, 1.0, opts.integrator);
    node.f = f.back().x;
    node.f_swapped = g.back().x;
    node.valid = f.completed() && g.completed();
  });

  // Pullback residual by central differences on the lattice.
  std::vector<std::size_t> stride(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) stride[static_cast<std::size_t>(a)] = pow_int(mp, n - 1 - a);
  std::vector<double> cell_residual(total, -1.0);
  for_each_index(total, opts.exec, [&](std::size_t idx) {
    const DerhamNode& node = rep.nodes[idx];
    if (!node.valid) return;
    const std::vector<int> d = digits(idx, n);
    Mat jf(n, n), j1(n, n1), j2(n, n2);
    for (int a = 0; a < n; ++a) {
      const int da = d[static_cast<std::size_t>(a)];
      if (da == 0 || da == mp - 1) return;
      const DerhamNode& up = rep.nodes[idx + stride[static_cast<std::size_t>(a)]];
      const DerhamNode& dn = rep.nodes[idx - stride[static_cast<std::size_t>(a)]];
      if (!up.valid || !dn.valid) return;
      jf.col(a) = (up.f - dn.f) / (2.0 * rep.spacing);
      if (a < n1)
        j1.col(a) = (up.h1 - dn.h1) / (2.0 * rep.spacing);
      else
        j2.col(a - n1) = (up.h2 - dn.h2) / (2.0 * rep.spacing);
    }
    const Mat gf = jf.transpose() * m.metric_at(node.f) * jf;
    Mat block = Mat::Zero(n, n);
    block.topLeftCorner(n1, n1) = j1.transpose() * m.metric_at(node.h1) * j1;
    block.bottomRightCorner(n2, n2) = j2.transpose() * m.metric_at(node.h2) * j2;
    cell_residual[idx] = (gf - block).cwiseAbs().maxCoeff();
  });

  for (std::size_t idx = 0; idx < total; ++idx) {
    const DerhamNode& node = rep.nodes[idx];
    if (!node.active) continue;
    if (!node.valid) {
      ++rep.invalid;
      continue;
    }
    rep.order_mismatch = std::max(rep.order_mismatch, m.chart_distance(node.f, node.f_swapped));
    if (cell_residual[idx] >= 0.0) {
      ++rep.cells;
      rep.pullback_residual = std::max(rep.pullback_residual, cell_residual[idx]);
    }
  }
  return rep;
}

}  // namespace devroll
