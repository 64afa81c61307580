#include "gridforge/placement/ipm.hpp"

#include <algorithm>
#include <cmath>

#include "gridforge/common/error.hpp"

namespace gridforge::placement {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-cone views over a stacked slack/dual vector.
struct ConeLayout {
  int lp_dim;
  std::vector<int> soc_offset;
  std::vector<int> soc_dim;
  explicit ConeLayout(const ConeSpec& spec) : lp_dim(spec.lp_dim) {
    int off = spec.lp_dim;
    for (int d : spec.soc_dims) {
      soc_offset.push_back(off);
      soc_dim.push_back(d);
      off += d;
    }
  }
};

// Nesterov-Todd scaling state: diagonal for the LP block, small dense blocks
// for each second-order cone. With H = 2 w_bar w_bar' - J the quadratic
// representation of the scaling point, W^2 = eta^2 H, and W itself is
// eta (2 q q' - J) with q the Jordan square root of w_bar.
struct Scaling {
  Vec lp_w;          // sqrt(s_i / z_i)
  Vec lambda;        // scaled point, full cone dimension
  std::vector<double> soc_eta;
  std::vector<Vec> soc_q;   // half points
  std::vector<Mat> soc_w2;  // dense W^2 per cone
};

double soc_residual(const double* v, int d) {
  double tail = 0.0;
  for (int i = 1; i < d; ++i) tail += v[i] * v[i];
  return v[0] - std::sqrt(tail);
}

// Largest alpha in [0, cap] with u + alpha du staying in the cone.
double step_to_boundary(const ConeLayout& layout, const Vec& u, const Vec& du, double cap) {
  double alpha = cap;
  for (int i = 0; i < layout.lp_dim; ++i)
    if (du[i] < 0.0) alpha = std::min(alpha, -u[i] / du[i]);
  for (size_t k = 0; k < layout.soc_offset.size(); ++k) {
    const int off = layout.soc_offset[k];
    const int d = layout.soc_dim[k];
    double a = du[off] * du[off], b = u[off] * du[off], c = u[off] * u[off];
    for (int i = 1; i < d; ++i) {
      a -= du[off + i] * du[off + i];
      b -= u[off + i] * du[off + i];
      c -= u[off + i] * u[off + i];
    }
    // Roots of a t^2 + 2 b t + c = 0 bound the cone exit; c >= 0 inside.
    if (c < 0.0) c = 0.0;
    double best = cap;
    if (std::abs(a) < 1e-300) {
      if (b < 0.0) best = -c / (2.0 * b);
    } else {
      const double disc = b * b - a * c;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        for (double root : {(-b - sq) / a, (-b + sq) / a}) {
          if (root > 1e-14 && root < best) {
            // The exit point must also keep the head nonnegative.
            if (u[off] + root * du[off] >= -1e-12) best = root;
          }
        }
      }
    }
    alpha = std::min(alpha, best);
  }
  return alpha;
}

// Shifts a vector strictly inside the cone (used for initialization).
void shift_into_cone(const ConeLayout& layout, Vec& v) {
  if (layout.lp_dim > 0) {
    const double mn = v.head(layout.lp_dim).minCoeff();
    if (mn <= 0.0) v.head(layout.lp_dim).array() += 1.0 - mn;
  }
  for (size_t k = 0; k < layout.soc_offset.size(); ++k) {
    const int off = layout.soc_offset[k];
    const int d = layout.soc_dim[k];
    const double margin = soc_residual(v.data() + off, d);
    if (margin <= 0.0) v[off] += 1.0 - margin;
  }
}

Scaling compute_scaling(const ConeLayout& layout, const Vec& s, const Vec& z) {
  Scaling w;
  w.lambda = Vec::Zero(s.size());
  w.lp_w = Vec::Zero(layout.lp_dim);
  for (int i = 0; i < layout.lp_dim; ++i) {
    w.lp_w[i] = std::sqrt(s[i] / z[i]);
    w.lambda[i] = std::sqrt(s[i] * z[i]);
  }
  for (size_t k = 0; k < layout.soc_offset.size(); ++k) {
    const int off = layout.soc_offset[k];
    const int d = layout.soc_dim[k];
    auto sk = s.segment(off, d);
    auto zk = z.segment(off, d);
    double s_det = sk[0] * sk[0] - sk.tail(d - 1).squaredNorm();
    double z_det = zk[0] * zk[0] - zk.tail(d - 1).squaredNorm();
    if (s_det <= 0.0 || z_det <= 0.0)
      throw NumericError("ipm: iterate left the cone interior");
    const double s_norm = std::sqrt(s_det);
    const double z_norm = std::sqrt(z_det);
    Vec s_bar = sk / s_norm;
    Vec z_bar = zk / z_norm;
    const double gamma = std::sqrt((1.0 + s_bar.dot(z_bar)) / 2.0);
    Vec j_z = z_bar;
    j_z.tail(d - 1) *= -1.0;
    Vec w_bar = (s_bar + j_z) / (2.0 * gamma);
    const double eta = std::sqrt(s_norm / z_norm);

    // Jordan square root q of w_bar: q0 = sqrt((w0 + 1)/2), q1 = w1 / (2 q0).
    Vec q(d);
    q[0] = std::sqrt((w_bar[0] + 1.0) / 2.0);
    q.tail(d - 1) = w_bar.tail(d - 1) / (2.0 * q[0]);

    w.soc_eta.push_back(eta);
    w.soc_q.push_back(q);

    // Dense W^2 = eta^2 (2 w_bar w_bar' - J).
    Mat H = 2.0 * w_bar * w_bar.transpose();
    H(0, 0) -= 1.0;
    for (int i = 1; i < d; ++i) H(i, i) += 1.0;
    w.soc_w2.push_back(eta * eta * H);

    // lambda = W z = eta (2 q (q'z) - J z).
    Vec Wz = 2.0 * q * q.dot(zk);
    Wz[0] -= zk[0];
    Wz.tail(d - 1) += zk.tail(d - 1);
    w.lambda.segment(off, d) = eta * Wz;
  }
  return w;
}

// W applied to a vector: per SOC, W v = eta (2 q (q'v) - J v).
Vec apply_w(const ConeLayout& layout, const Scaling& w, const Vec& v) {
  Vec out = v;
  for (int i = 0; i < layout.lp_dim; ++i) out[i] = w.lp_w[i] * v[i];
  for (size_t k = 0; k < layout.soc_offset.size(); ++k) {
    const int off = layout.soc_offset[k];
    const int d = layout.soc_dim[k];
    const Vec& q = w.soc_q[k];
    auto vk = v.segment(off, d);
    Vec Wv = 2.0 * q * q.dot(vk);
    Wv[0] -= vk[0];
    Wv.tail(d - 1) += vk.tail(d - 1);
    out.segment(off, d) = w.soc_eta[k] * Wv;
  }
  return out;
}

// W^{-1} v = (1/eta) (2 (Jq) (q'Jv) - Jv), using (2qq'-J)^{-1} = J(2qq'-J)J.
Vec apply_w_inv(const ConeLayout& layout, const Scaling& w, const Vec& v) {
  Vec out = v;
  for (int i = 0; i < layout.lp_dim; ++i) out[i] = v[i] / w.lp_w[i];
  for (size_t k = 0; k < layout.soc_offset.size(); ++k) {
    const int off = layout.soc_offset[k];
    const int d = layout.soc_dim[k];
    const Vec& q = w.soc_q[k];
    auto vk = v.segment(off, d);
    Vec jv = vk;
    jv.tail(d - 1) *= -1.0;
    Vec jq = q;
    jq.tail(d - 1) *= -1.0;
    Vec res = 2.0 * jq * q.dot(jv) - jv;
    out.segment(off, d) = res / w.soc_eta[k];
  }
  return out;
}

// Jordan product u o v.
Vec jordan_product(const ConeLayout& layout, const Vec& u, const Vec& v) {
  Vec out = Vec::Zero(u.size());
  for (int i = 0; i < layout.lp_dim; ++i) out[i] = u[i] * v[i];
  for (size_t k = 0; k < layout.soc_offset.size(); ++k) {
    const int off = layout.soc_offset[k];
    const int d = layout.soc_dim[k];
    auto uk = u.segment(off, d);
    auto vk = v.segment(off, d);
    out[off] = uk.dot(vk);
    out.segment(off + 1, d - 1) = uk[0] * vk.tail(d - 1) + vk[0] * uk.tail(d - 1);
  }
  return out;
}

// Jordan division lambda \ v.
Vec jordan_div(const ConeLayout& layout, const Vec& lambda, const Vec& v) {
  Vec out = Vec::Zero(v.size());
  for (int i = 0; i < layout.lp_dim; ++i) out[i] = v[i] / lambda[i];
  for (size_t k = 0; k < layout.soc_offset.size(); ++k) {
    const int off = layout.soc_offset[k];
    const int d = layout.soc_dim[k];
    auto lk = lambda.segment(off, d);
    auto vk = v.segment(off, d);
    const double det = lk[0] * lk[0] - lk.tail(d - 1).squaredNorm();
    if (std::abs(det) < 1e-300) throw NumericError("ipm: singular scaled point");
    const double u0 = (lk[0] * vk[0] - lk.tail(d - 1).dot(vk.tail(d - 1))) / det;
    out[off] = u0;
    out.segment(off + 1, d - 1) = (vk.tail(d - 1) - u0 * lk.tail(d - 1)) / lk[0];
  }
  return out;
}

// Identity element of the cone algebra.
Vec cone_identity(const ConeLayout& layout, int total) {
  Vec e = Vec::Zero(total);
  for (int i = 0; i < layout.lp_dim; ++i) e[i] = 1.0;
  for (size_t k = 0; k < layout.soc_offset.size(); ++k) e[layout.soc_offset[k]] = 1.0;
  return e;
}

struct KktSolver {
  const ConicProgram& prog;
  const ConeLayout& layout;
  double reg;
  int n, p, m;
  SpMat kkt;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  bool analyzed = false;

  KktSolver(const ConicProgram& program, const ConeLayout& lay, double regularization)
      : prog(program), layout(lay), reg(regularization), n(program.n_vars()),
        p(program.n_eq()), m(program.n_cone()) {}

  void factor(const Scaling* w) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(prog.a.nonZeros() * 2 + prog.g.nonZeros() * 2 + n + p + m + 16 * m);
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, reg);
    for (int i = 0; i < p; ++i) trips.emplace_back(n + i, n + i, -reg);
    for (int k = 0; k < prog.a.outerSize(); ++k)
      for (SpMat::InnerIterator it(prog.a, k); it; ++it) {
        trips.emplace_back(n + it.row(), it.col(), it.value());
        trips.emplace_back(it.col(), n + it.row(), it.value());
      }
    for (int k = 0; k < prog.g.outerSize(); ++k)
      for (SpMat::InnerIterator it(prog.g, k); it; ++it) {
        trips.emplace_back(n + p + it.row(), it.col(), it.value());
        trips.emplace_back(it.col(), n + p + it.row(), it.value());
      }
    // -(W^2 + reg I) block; identity scaling when w is null.
    if (w) {
      for (int i = 0; i < layout.lp_dim; ++i)
        trips.emplace_back(n + p + i, n + p + i, -(w->lp_w[i] * w->lp_w[i] + reg));
      for (size_t k = 0; k < layout.soc_offset.size(); ++k) {
        const int off = layout.soc_offset[k];
        const int d = layout.soc_dim[k];
        const Mat& w2 = w->soc_w2[k];
        for (int r = 0; r < d; ++r)
          for (int c = 0; c < d; ++c) {
            double val = -w2(r, c);
            if (r == c) val -= reg;
            trips.emplace_back(n + p + off + r, n + p + off + c, val);
          }
      }
    } else {
      // Identity scaling, but with the same block pattern the NT-scaled
      // matrix will use, so the symbolic factorization stays valid.
      for (int i = 0; i < layout.lp_dim; ++i)
        trips.emplace_back(n + p + i, n + p + i, -(1.0 + reg));
      for (size_t k = 0; k < layout.soc_offset.size(); ++k) {
        const int off = layout.soc_offset[k];
        const int d = layout.soc_dim[k];
        for (int r = 0; r < d; ++r)
          for (int c = 0; c < d; ++c)
            trips.emplace_back(n + p + off + r, n + p + off + c,
                               r == c ? -(1.0 + reg) : 0.0);
      }
    }
    kkt.resize(n + p + m, n + p + m);
    kkt.setFromTriplets(trips.begin(), trips.end());
    if (!analyzed) {
      ldlt.analyzePattern(kkt);
      analyzed = true;
    }
    ldlt.factorize(kkt);
    if (ldlt.info() != Eigen::Success) throw NumericError("ipm: KKT factorization failed");
  }

  // Solve with one round of iterative refinement against the factored matrix.
  Vec solve(const Vec& rhs) const {
    Vec sol = ldlt.solve(rhs);
    Vec resid = rhs - kkt * sol;
    sol += ldlt.solve(resid);
    return sol;
  }
};

}  // namespace

IpmResult solve_conic(const ConicProgram& prog, const IpmOptions& opts) {
  const ConeLayout layout(prog.cones);
  const int n = prog.n_vars();
  const int p = prog.n_eq();
  const int m = prog.n_cone();
  if (prog.cones.total() != m)
    throw ConfigError("solve_conic: cone dimensions do not match G");
  const double nu = prog.cones.degree();
  const Vec e = cone_identity(layout, m);

  KktSolver kkt(prog, layout, opts.static_reg);

  // Initialization: least-squares style solves with identity scaling.
  IpmResult it;
  {
    kkt.factor(nullptr);
    Vec rhs = Vec::Zero(n + p + m);
    rhs.segment(n, p) = prog.b;
    rhs.segment(n + p, m) = prog.h;
    Vec sol = kkt.solve(rhs);
    it.x = sol.head(n);
    it.s = -sol.segment(n + p, m);  // s = h - Gx at the KKT solution
    shift_into_cone(layout, it.s);

    Vec rhs_d = Vec::Zero(n + p + m);
    rhs_d.head(n) = -prog.c;
    Vec sol_d = kkt.solve(rhs_d);
    it.y = sol_d.segment(n, p);
    it.z = sol_d.segment(n + p, m);
    shift_into_cone(layout, it.z);
  }

  const double b_scale = std::max(1.0, prog.b.size() ? prog.b.norm() : 0.0);
  const double h_scale = std::max(1.0, prog.h.norm());
  const double c_scale = std::max(1.0, prog.c.norm());

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    it.iterations = iter;
    Vec res_x = prog.a.transpose() * it.y + prog.g.transpose() * it.z + prog.c;
    Vec res_y = prog.a * it.x - prog.b;
    Vec res_z = prog.g * it.x + it.s - prog.h;
    const double gap = it.s.dot(it.z);
    const double mu = gap / nu;
    const double pobj = prog.c.dot(it.x);
    const double dobj = -(prog.b.size() ? prog.b.dot(it.y) : 0.0) - prog.h.dot(it.z);

    it.gap = gap;
    it.objective = pobj;
    it.primal_residual = std::max(res_y.size() ? res_y.norm() / b_scale : 0.0,
                                  res_z.norm() / h_scale);
    it.dual_residual = res_x.norm() / c_scale;
    it.rel_gap = std::abs(gap) / std::max({1e-8, std::abs(pobj), std::abs(dobj)});

    if (it.primal_residual <= opts.feas_tol && it.dual_residual <= opts.feas_tol &&
        (it.rel_gap <= opts.rel_gap_tol || std::abs(gap) <= opts.abs_gap_tol)) {
      it.status = IpmStatus::Optimal;
      return it;
    }

    // Farkas certificate: z in K*, A'y + G'z = 0, b'y + h'z < 0 proves primal
    // infeasibility. Along an infeasible ray the gain grows while the
    // certificate residual stays bounded.
    const double farkas_gain = -(prog.b.size() ? prog.b.dot(it.y) : 0.0) - prog.h.dot(it.z);
    const double cert_residual = (res_x - prog.c).norm();
    if (farkas_gain > 1e-4 && cert_residual <= 1e-8 * farkas_gain) {
      it.status = IpmStatus::PrimalInfeasible;
      return it;
    }

    Scaling w = compute_scaling(layout, it.s, it.z);
    kkt.factor(&w);

    // Affine predictor: note W lambda = s makes the third rhs block -res_z + s.
    Vec rhs = Vec::Zero(n + p + m);
    rhs.head(n) = -res_x;
    rhs.segment(n, p) = -res_y;
    rhs.segment(n + p, m) = -res_z + it.s;
    Vec aff = kkt.solve(rhs);
    Vec dx_a = aff.head(n);
    Vec dz_a = aff.segment(n + p, m);
    Vec ds_a = -res_z - prog.g * dx_a;

    const double alpha_aff =
        std::min(step_to_boundary(layout, it.s, ds_a, 1.0),
                 step_to_boundary(layout, it.z, dz_a, 1.0));
    const double gap_aff = (it.s + alpha_aff * ds_a).dot(it.z + alpha_aff * dz_a);
    double sigma = std::pow(std::max(0.0, gap_aff / gap), 3.0);
    sigma = std::min(1.0, std::max(0.0, sigma));

    // Combined corrector step.
    Vec ws_a = apply_w_inv(layout, w, ds_a);
    Vec wz_a = apply_w(layout, w, dz_a);
    Vec d_c = -jordan_product(layout, w.lambda, w.lambda) -
              jordan_product(layout, ws_a, wz_a) + sigma * mu * e;
    Vec correction = apply_w(layout, w, jordan_div(layout, w.lambda, d_c));
    rhs.segment(n + p, m) = -res_z - correction;
    Vec comb = kkt.solve(rhs);
    Vec dx = comb.head(n);
    Vec dy = comb.segment(n, p);
    Vec dz = comb.segment(n + p, m);
    Vec ds = -res_z - prog.g * dx;

    const double alpha =
        0.99 * std::min(step_to_boundary(layout, it.s, ds, 1.0 / 0.99),
                        step_to_boundary(layout, it.z, dz, 1.0 / 0.99));
    it.x += alpha * dx;
    it.y += alpha * dy;
    it.z += alpha * dz;
    it.s += alpha * ds;
  }
  it.status = IpmStatus::MaxIterations;
  return it;
}

}  // namespace gridforge::placement
