#include "calib6/hl_cone.hpp"

#include <algorithm>
#include <thread>

#include "calib6/kernels/link_batch.hpp"

namespace calib6 {

namespace hl {

Eigen::Vector3cd link_point(double alpha, double beta) {
  const double s3 = std::sqrt(3.0);
  return Eigen::Vector3cd(std::polar(1.0 / s3, alpha), std::polar(1.0 / s3, beta),
                          std::polar(1.0 / s3, -(alpha + beta)));
}

Eigen::Vector4d link_residual(const Eigen::Vector3cd& v) {
  complexd prod = v(0) * v(1) * v(2);
  return Eigen::Vector4d(std::norm(v(0)) - 1.0 / 3.0, std::norm(v(1)) - 1.0 / 3.0,
                         prod.real() - 1.0 / (3.0 * std::sqrt(3.0)), prod.imag());
}

OrientedPlane3 cone_tangent_plane(double alpha, double beta) {
  const complexd i(0, 1);
  Eigen::Vector3cd z = link_point(alpha, beta);
  Eigen::Vector3cd da(i * z(0), 0.0, -i * z(2));
  Eigen::Vector3cd db(0.0, i * z(1), -i * z(2));
  Eigen::Matrix<double, 3, 6> rows;
  rows.row(0) = realify_row(z.transpose()).transpose();
  rows.row(1) = realify_row(da.transpose()).transpose();
  rows.row(2) = realify_row(db.transpose()).transpose();
  OrientedPlane3 p(rows);
  // orientation-normalize so the frame is calibrated
  if (calibration_value(p) < 0) {
    rows.row(1).swap(rows.row(2));
    p = OrientedPlane3(rows);
  }
  return p;
}

std::pair<double, double> link_angles(const Eigen::Vector3cd& v) {
  return {std::arg(v(0)), std::arg(v(1))};
}

}  // namespace hl

namespace {

std::vector<Eigen::Vector3d> fibonacci_sphere(int n) {
  std::vector<Eigen::Vector3d> pts(n);
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / n;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden * i;
    pts[i] = Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z);
  }
  return pts;
}

kern::PlaneRows plane_rows_of(const OrientedPlane3& p) {
  auto q = p.orthonormal_rows();
  kern::PlaneRows rows;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      rows.re[r][c] = q(r, c);
      rows.im[r][c] = q(r, 3 + c);
    }
  return rows;
}

Matrix3cd complex_rows_of(const OrientedPlane3& p) {
  auto q = p.orthonormal_rows();
  Matrix3cd m;
  for (int r = 0; r < 3; ++r) m.row(r) = complexify_row(q.row(r).transpose());
  return m;
}

}  // namespace

RayCountReport count_rays(const OrientedPlane3& p, const RayCountOptions& opts) {
  RayCountReport rep;
  rep.seeds = opts.seeds;
  rep.special_lagrangian_input = is_special_lagrangian(p, 1e-8);
  rep.kernel = kern::active_name();

  auto seeds = fibonacci_sphere(opts.seeds);
  std::vector<double> a(opts.seeds), b(opts.seeds), c(opts.seeds);
  for (int i = 0; i < opts.seeds; ++i) {
    a[i] = seeds[i](0);
    b[i] = seeds[i](1);
    c[i] = seeds[i](2);
  }

  kern::PlaneRows rows = plane_rows_of(p);
  kern::LinkBatchParams prm;
  prm.accept_tol = opts.accept_tol;
  std::vector<kern::SeedResult> results(opts.seeds);
  kern::LinkBatchFn fn;
  switch (opts.kernel) {
    case KernelChoice::scalar:
      fn = kern::scalar_impl();
      rep.kernel = "scalar";
      break;
    case KernelChoice::avx2:
      fn = kern::avx2_impl();
      if (!fn) throw std::runtime_error("count_rays: AVX2 kernel unavailable");
      rep.kernel = "avx2";
      break;
    default:
      fn = kern::active_impl();
      break;
  }

  int nthreads = std::max(1, opts.threads);
  if (nthreads == 1 || opts.seeds < 4096) {
    fn(rows, a.data(), b.data(), c.data(), opts.seeds, prm, results.data());
  } else {
    std::vector<std::thread> pool;
    int chunk = (opts.seeds + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      int lo = t * chunk, hi = std::min(opts.seeds, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] {
        fn(rows, a.data() + lo, b.data() + lo, c.data() + lo, hi - lo, prm,
           results.data() + lo);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (const auto& r : results) {
    if (r.converged) ++rep.converged;
    if (r.accepted) ++rep.accepted_raw;
  }
  if (rep.converged * 2 < opts.seeds)
    throw std::runtime_error("count_rays: most seeds failed to converge "
                             "(degenerate plane?)");

  // deterministic dedupe: gather accepted points in seed order, greedy
  // cluster by angular radius, keep the best-residual representative
  struct Hit {
    Eigen::Vector3d x;
    double resid;
  };
  std::vector<Hit> hits;
  for (const auto& r : results)
    if (r.accepted) hits.push_back({Eigen::Vector3d(r.a, r.b, r.c), r.resid});

  double cos_tol = std::cos(opts.dedupe_angle);
  std::vector<Hit> reps;
  for (const auto& h : hits) {
    bool merged = false;
    for (auto& rep_hit : reps) {
      if (h.x.dot(rep_hit.x) >= cos_tol) {
        if (h.resid < rep_hit.resid) rep_hit = h;
        merged = true;
        break;
      }
    }
    if (!merged) reps.push_back(h);
  }
  // canonical order: by sphere point, lexicographic
  std::sort(reps.begin(), reps.end(), [](const Hit& l, const Hit& r) {
    if (l.x(0) != r.x(0)) return l.x(0) < r.x(0);
    if (l.x(1) != r.x(1)) return l.x(1) < r.x(1);
    return l.x(2) < r.x(2);
  });

  Matrix3cd m = complex_rows_of(p);
  for (const auto& h : reps) {
    Eigen::Vector3cd v = m.transpose() * h.x.cast<complexd>();
    Vector6d ray = realify_row(v.transpose());
    ray.normalize();
    rep.rays.push_back(ray);
    rep.sphere_points.push_back(h.x);
    rep.residuals.push_back(hl::link_residual(v).cwiseAbs().maxCoeff());
  }
  rep.count = (int)rep.rays.size();
  for (int i = 0; i < rep.count; ++i)
    for (int j = i + 1; j < rep.count; ++j)
      rep.pairwise_angle_cos.push_back(rep.rays[i].dot(rep.rays[j]));
  return rep;
}

double det_A(const OrientedPlane3& p, double t) {
  Matrix3cd m1 = p.origin ? *p.origin : complex_rows_of(p);
  Matrix3cd m2 = m1 * r_diag(t, t);
  Matrix6d a;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) {
      a(2 * j, i) = m1(i, j).real();
      a(2 * j + 1, i) = m1(i, j).imag();
      a(2 * j, 3 + i) = -m2(i, j).real();
      a(2 * j + 1, 3 + i) = -m2(i, j).imag();
    }
  return a.determinant();
}

double det_A_stacked(const OrientedPlane3& p, double t) {
  Matrix3cd m1 = p.origin ? *p.origin : complex_rows_of(p);
  Matrix3cd m2 = m1 * r_diag(t, t);
  Matrix6d s;
  for (int i = 0; i < 3; ++i) {
    s.row(i) = realify_row(m1.row(i)).transpose();
    s.row(3 + i) = -realify_row(m2.row(i)).transpose();
  }
  // st is the transpose of det_A's matrix up to the column permutation
  // (x1,y1,x2,y2,x3,y3) <- (x1,x2,x3,y1,y2,y3), an odd permutation
  return -s.determinant();
}

double min_nonzero_root(const OrientedPlane3& p, const RootScanOptions& opts) {
  // identically-zero guard
  double scale = 0;
  for (int i = 0; i < 32; ++i)
    scale = std::max(scale, std::abs(det_A(p, -M_PI + 2 * M_PI * i / 32.0)));
  if (scale < 1e-12)
    throw std::runtime_error("min_nonzero_root: determinant identically zero");

  auto f = [&](double t) { return det_A(p, t); };
  std::vector<double> roots;
  double prev_t = -M_PI, prev_f = f(prev_t);
  for (double t = -M_PI + opts.scan_step; t < M_PI + opts.scan_step / 2;
       t += opts.scan_step) {
    double ft = f(t);
    if ((prev_f < 0 && ft > 0) || (prev_f > 0 && ft < 0) || prev_f == 0) {
      double lo = prev_t, hi = t, flo = prev_f;
      while (hi - lo > opts.bisect_tol) {
        double mid = 0.5 * (lo + hi), fm = f(mid);
        if ((flo <= 0 && fm <= 0) || (flo >= 0 && fm >= 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_t = t;
    prev_f = ft;
  }
  double m0 = std::numeric_limits<double>::infinity();
  for (double r : roots)
    if (std::abs(r) > opts.exclusion) m0 = std::min(m0, std::abs(r));
  if (!std::isfinite(m0))
    throw std::runtime_error("min_nonzero_root: no nonzero root found");
  return m0;
}

RealizingCollection realizing_collection(int n, const RayCountOptions& ray_opts) {
  if (n < 1) throw std::invalid_argument("realizing_collection: n >= 1");
  RealizingCollection col;
  col.degree = n;
  col.base = plane_p(0, M_PI / 4);
  col.m0 = min_nonzero_root(col.base);
  col.rotation_step = col.m0 / (2.0 * n);

  Matrix3cd base = col.base.origin.value();
  for (int j = 1; j <= n; ++j) {
    double ang = (j - 1) * col.rotation_step;
    col.planes.push_back(plane_from_complex(base * r_diag(ang, ang)));
  }
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      int d = intersection_dimension(col.planes[j], col.planes[k]);
      col.pair_checks.push_back({j, k, d});
      if (d != 0)
        throw std::runtime_error("realizing_collection: planes " +
                                 std::to_string(j + 1) + "," + std::to_string(k + 1) +
                                 " intersect in dimension " + std::to_string(d));
    }
  for (int j = 0; j < n; ++j) {
    auto rep = count_rays(col.planes[j], ray_opts);
    col.ray_counts.push_back(rep.count);
    if (rep.count != 1)
      throw std::runtime_error("realizing_collection: plane " + std::to_string(j + 1) +
                               " meets the cone in " + std::to_string(rep.count) +
                               " rays");
  }
  return col;
}

}  // namespace calib6
