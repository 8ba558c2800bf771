#include "rismec/conic.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace rismec {

// ---------------------------------------------------------------------------
// Affine / builder

Affine& Affine::operator+=(const Affine& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  constant += o.constant;
  return *this;
}

Affine& Affine::operator-=(const Affine& o) {
  for (const auto& [i, v] : o.terms) terms.emplace_back(i, -v);
  constant -= o.constant;
  return *this;
}

Affine& Affine::operator*=(double s) {
  for (auto& t : terms) t.second *= s;
  constant *= s;
  return *this;
}

double Affine::eval(const rvec& x) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * x[i];
  return v;
}

Affine operator+(Affine a, const Affine& b) { return a += b; }
Affine operator-(Affine a, const Affine& b) { return a -= b; }
Affine operator*(double s, Affine a) { return a *= s; }
Affine operator*(Affine a, double s) { return a *= s; }
Affine operator-(Affine a) { return a *= -1.0; }

int ConicBuilder::add_var() { return n_vars_++; }

int ConicBuilder::add_vars(int n) {
  const int first = n_vars_;
  n_vars_ += n;
  return first;
}

void ConicBuilder::add_equality(const Affine& expr) { eqs_.push_back(expr); }
void ConicBuilder::add_nonneg(const Affine& expr) { nonneg_.push_back(expr); }

void ConicBuilder::add_soc(const std::vector<Affine>& rows) {
  if (rows.empty()) throw std::invalid_argument("add_soc: empty cone");
  socs_.push_back(rows);
}

ConicProgram ConicBuilder::build() const {
  ConicProgram p;
  const int n = n_vars_;
  p.c = rvec::Zero(n);
  for (const auto& [i, v] : objective_.terms) p.c[i] += v;

  p.A = rmat::Zero(static_cast<int>(eqs_.size()), n);
  p.b = rvec::Zero(static_cast<int>(eqs_.size()));
  for (int r = 0; r < static_cast<int>(eqs_.size()); ++r) {
    for (const auto& [i, v] : eqs_[r].terms) p.A(r, i) += v;
    p.b[r] = -eqs_[r].constant;
  }

  int m = static_cast<int>(nonneg_.size());
  for (const auto& c : socs_) m += static_cast<int>(c.size());
  p.G = rmat::Zero(m, n);
  p.h = rvec::Zero(m);
  // s = h - G x = expr(x), so h = constant and G = -coefficients.
  int row = 0;
  auto emit = [&](const Affine& e) {
    for (const auto& [i, v] : e.terms) p.G(row, i) -= v;
    p.h[row] = e.constant;
    ++row;
  };
  for (const auto& e : nonneg_) emit(e);
  p.n_orthant = static_cast<int>(nonneg_.size());
  for (const auto& c : socs_) {
    for (const auto& e : c) emit(e);
    p.soc_dims.push_back(static_cast<int>(c.size()));
  }
  return p;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::max_iters: return "max_iters";
  }
  return "unknown";
}

void ConicProgram::validate() const {
  const int n = n_vars();
  if (A.cols() != n && A.rows() > 0) throw std::invalid_argument("ConicProgram: A has wrong width");
  if (A.rows() != b.size()) throw std::invalid_argument("ConicProgram: A/b row mismatch");
  if (G.cols() != n && G.rows() > 0) throw std::invalid_argument("ConicProgram: G has wrong width");
  if (G.rows() != h.size()) throw std::invalid_argument("ConicProgram: G/h row mismatch");
  int m = n_orthant;
  for (int d : soc_dims) {
    if (d < 1) throw std::invalid_argument("ConicProgram: SOC of size < 1");
    m += d;
  }
  if (n_orthant < 0 || m != G.rows())
    throw std::invalid_argument("ConicProgram: cone sizes do not cover G");
  if (!c.allFinite() || !A.allFinite() || !b.allFinite() || !G.allFinite() || !h.allFinite())
    throw std::invalid_argument("ConicProgram: non-finite data");
}

double max_violation(const ConicProgram& prog, const rvec& x) {
  double worst = 0.0;
  if (prog.A.rows() > 0) {
    const rvec r = prog.A * x - prog.b;
    for (int i = 0; i < r.size(); ++i)
      worst = std::max(worst, std::abs(r[i]) / std::max(1.0, std::abs(prog.b[i])));
  }
  if (prog.G.rows() == 0) return worst;
  const rvec s = prog.h - prog.G * x;
  for (int i = 0; i < prog.n_orthant; ++i)
    worst = std::max(worst, std::max(0.0, -s[i]) / std::max(1.0, std::abs(prog.h[i])));
  int off = prog.n_orthant;
  for (int d : prog.soc_dims) {
    const double head = s[off];
    const double tail = d > 1 ? s.segment(off + 1, d - 1).norm() : 0.0;
    const double scale = std::max(1.0, prog.h.segment(off, d).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::max(0.0, tail - head) / scale);
    off += d;
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Interior point

namespace {

struct Layout {
  int n_orth = 0;
  std::vector<int> soc;
  std::vector<int> off;  // SOC block offsets
  int m = 0;

  int degree() const { return n_orth + static_cast<int>(soc.size()); }
};

Layout make_layout(const ConicProgram& p) {
  Layout l;
  l.n_orth = p.n_orthant;
  l.soc = p.soc_dims;
  int off = p.n_orthant;
  for (int d : p.soc_dims) {
    l.off.push_back(off);
    off += d;
  }
  l.m = off;
  return l;
}

rvec unit(const Layout& l) {
  rvec e = rvec::Zero(l.m);
  e.head(l.n_orth).setOnes();
  for (int off : l.off) e[off] = 1.0;
  return e;
}

/// Smallest "eigenvalue" of x in the product cone.
double min_eig(const Layout& l, const rvec& x) {
  double m = std::numeric_limits<double>::infinity();
  if (l.n_orth > 0) m = x.head(l.n_orth).minCoeff();
  for (std::size_t b = 0; b < l.soc.size(); ++b) {
    const int off = l.off[b], d = l.soc[b];
    const double tail = d > 1 ? x.segment(off + 1, d - 1).norm() : 0.0;
    m = std::min(m, x[off] - tail);
  }
  return m;
}

double soc_det(const rvec& x, int off, int d) {
  const double t2 = d > 1 ? x.segment(off + 1, d - 1).squaredNorm() : 0.0;
  return x[off] * x[off] - t2;
}

/// NT scaling. Each SOC block is W = beta (2 v v' - J) with J = diag(1, -1, ..),
/// whose inverse is (2 Jv (Jv)' - J) / beta; both are applied in O(d).
struct Scaling {
  rvec w;                  // orthant: sqrt(s/z)
  std::vector<rvec> v;     // SOC blocks
  std::vector<double> beta;
  rvec lambda;
};

Scaling identity_scaling(const Layout& l) {
  Scaling sc;
  sc.w = rvec::Ones(l.n_orth);
  for (int d : l.soc) {
    rvec v = rvec::Zero(d);
    v[0] = 1.0;  // 2 e0 e0' - J = I
    sc.v.push_back(v);
    sc.beta.push_back(1.0);
  }
  return sc;
}

// x <- J x on a block
template <class T>
void reflect(T&& x) {
  x.bottomRows(x.rows() - 1) *= -1.0;
}

rvec apply_W(const Layout& l, const Scaling& sc, const rvec& x) {
  rvec out(l.m);
  out.head(l.n_orth) = sc.w.cwiseProduct(x.head(l.n_orth));
  for (std::size_t b = 0; b < l.soc.size(); ++b) {
    const int off = l.off[b], d = l.soc[b];
    const auto xb = x.segment(off, d);
    auto ob = out.segment(off, d);
    ob = xb;
    reflect(ob);
    ob = sc.beta[b] * (2.0 * sc.v[b].dot(xb) * sc.v[b] - ob);
  }
  return out;
}

rvec apply_Wi(const Layout& l, const Scaling& sc, const rvec& x) {
  rvec out(l.m);
  out.head(l.n_orth) = x.head(l.n_orth).cwiseQuotient(sc.w);
  for (std::size_t b = 0; b < l.soc.size(); ++b) {
    const int off = l.off[b], d = l.soc[b];
    rvec jv = sc.v[b];
    reflect(jv);
    const auto xb = x.segment(off, d);
    auto ob = out.segment(off, d);
    ob = xb;
    reflect(ob);
    ob = (2.0 * jv.dot(xb) * jv - ob) / sc.beta[b];
  }
  return out;
}

/// W^{-1} applied to every column of G.
rmat apply_Wi_cols(const Layout& l, const Scaling& sc, const rmat& G) {
  rmat out(G.rows(), G.cols());
  out.topRows(l.n_orth) = sc.w.cwiseInverse().asDiagonal() * G.topRows(l.n_orth);
  for (std::size_t b = 0; b < l.soc.size(); ++b) {
    const int off = l.off[b], d = l.soc[b];
    rvec jv = sc.v[b];
    reflect(jv);
    auto ob = out.middleRows(off, d);
    ob = G.middleRows(off, d);
    reflect(ob);
    ob = (2.0 * jv * (jv.transpose() * G.middleRows(off, d)) - ob) / sc.beta[b];
  }
  return out;
}

Scaling nt_scaling(const Layout& l, const rvec& s, const rvec& z) {
  Scaling sc;
  sc.w = (s.head(l.n_orth).cwiseQuotient(z.head(l.n_orth))).cwiseSqrt();
  for (std::size_t b = 0; b < l.soc.size(); ++b) {
    const int off = l.off[b], d = l.soc[b];
    const double sn = std::sqrt(std::max(soc_det(s, off, d), 1e-300));
    const double zn = std::sqrt(std::max(soc_det(z, off, d), 1e-300));
    const rvec sbar = s.segment(off, d) / sn;
    const rvec zbar = z.segment(off, d) / zn;
    const double gamma = std::sqrt(std::max((1.0 + sbar.dot(zbar)) / 2.0, 1e-300));
    rvec wbar = sbar;
    wbar[0] += zbar[0];
    if (d > 1) wbar.tail(d - 1) -= zbar.tail(d - 1);
    wbar /= 2.0 * gamma;
    rvec v = wbar;
    v[0] += 1.0;
    v /= std::sqrt(2.0 * (wbar[0] + 1.0));
    sc.v.push_back(v);
    sc.beta.push_back(std::sqrt(sn / zn));
  }
  sc.lambda = apply_W(l, sc, z);
  return sc;
}

rvec jprod(const Layout& l, const rvec& u, const rvec& v) {
  rvec out(l.m);
  out.head(l.n_orth) = u.head(l.n_orth).cwiseProduct(v.head(l.n_orth));
  for (std::size_t b = 0; b < l.soc.size(); ++b) {
    const int off = l.off[b], d = l.soc[b];
    out[off] = u.segment(off, d).dot(v.segment(off, d));
    if (d > 1)
      out.segment(off + 1, d - 1) =
          u[off] * v.segment(off + 1, d - 1) + v[off] * u.segment(off + 1, d - 1);
  }
  return out;
}

/// Solves lambda o x = rhs.
rvec jdiv(const Layout& l, const rvec& lam, const rvec& rhs) {
  rvec out(l.m);
  out.head(l.n_orth) = rhs.head(l.n_orth).cwiseQuotient(lam.head(l.n_orth));
  for (std::size_t b = 0; b < l.soc.size(); ++b) {
    const int off = l.off[b], d = l.soc[b];
    const double l0 = lam[off];
    if (d == 1) {
      out[off] = rhs[off] / l0;
      continue;
    }
    const auto l1 = lam.segment(off + 1, d - 1);
    const auto b1 = rhs.segment(off + 1, d - 1);
    const double x0 = (l0 * rhs[off] - l1.dot(b1)) / (l0 * l0 - l1.squaredNorm());
    out[off] = x0;
    out.segment(off + 1, d - 1) = (b1 - x0 * l1) / l0;
  }
  return out;
}

double max_step(const Layout& l, const rvec& x, const rvec& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (int i = 0; i < l.n_orth; ++i)
    if (dx[i] < 0) a = std::min(a, -x[i] / dx[i]);
  for (std::size_t b = 0; b < l.soc.size(); ++b) {
    const int off = l.off[b], d = l.soc[b];
    if (d == 1) {
      if (dx[off] < 0) a = std::min(a, -x[off] / dx[off]);
      continue;
    }
    const auto x1 = x.segment(off + 1, d - 1);
    const auto d1 = dx.segment(off + 1, d - 1);
    const double qa = dx[off] * dx[off] - d1.squaredNorm();
    const double qb = 2.0 * (x[off] * dx[off] - x1.dot(d1));
    const double qc = x[off] * x[off] - x1.squaredNorm();
    double root = std::numeric_limits<double>::infinity();
    if (std::abs(qa) < 1e-300) {
      if (qb < 0) root = -qc / qb;
    } else {
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0) {
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (qb + (qb >= 0 ? sq : -sq));
        const double r1 = q / qa;
        const double r2 = q != 0.0 ? qc / q : std::numeric_limits<double>::infinity();
        for (double r : {r1, r2})
          if (r > 0) root = std::min(root, r);
      }
    }
    if (dx[off] < 0) root = std::min(root, -x[off] / dx[off]);
    a = std::min(a, root);
  }
  return a;
}

/// K = [0 A' G'; A 0 0; G 0 -W^2], solved through the reduced normal system.
class Kkt {
 public:
  Kkt(const rmat& A, const rmat& G, const Layout& l) : A_(A), G_(G), l_(l) {}

  void factor(const Scaling& sc) {
    sc_ = &sc;
    const int n = static_cast<int>(G_.cols());
    const int p = static_cast<int>(A_.rows());
    WiG_ = apply_Wi_cols(l_, sc, G_);
    H_.noalias() = WiG_.transpose() * WiG_;
    const double hmax = n > 0 ? std::max(1.0, H_.diagonal().cwiseAbs().maxCoeff()) : 1.0;
    delta_ = 1e-11 * hmax;
    if (p == 0) {
      rmat M = H_;
      M.diagonal().array() += delta_;
      llt_.compute(M);
      use_llt_ = llt_.info() == Eigen::Success;
      if (use_llt_) return;
      lu_.compute(M);
      return;
    }
    use_llt_ = false;
    rmat M = rmat::Zero(n + p, n + p);
    M.topLeftCorner(n, n) = H_;
    M.topLeftCorner(n, n).diagonal().array() += delta_;
    if (p > 0) {
      M.topRightCorner(n, p) = A_.transpose();
      M.bottomLeftCorner(p, n) = A_;
      M.bottomRightCorner(p, p).diagonal().array() -= delta_;
    }
    lu_.compute(M);
  }

  void solve(const rvec& rx, const rvec& ry, const rvec& rz, rvec& dx, rvec& dy, rvec& dz) const {
    const int n = static_cast<int>(G_.cols());
    const int p = static_cast<int>(A_.rows());
    const rvec wrz = apply_Wi(l_, *sc_, rz);
    rvec rhs(n + p);
    rhs.head(n) = rx + WiG_.transpose() * wrz;
    if (p > 0) rhs.tail(p) = ry;
    auto back = [&](const rvec& r) { return use_llt_ ? rvec(llt_.solve(r)) : rvec(lu_.solve(r)); };
    rvec sol = back(rhs);
    for (int it = 0; it < 3; ++it) {
      rvec res(n + p);
      res.head(n) = rhs.head(n) - H_ * sol.head(n);
      if (p > 0) {
        res.head(n) -= A_.transpose() * sol.tail(p);
        res.tail(p) = rhs.tail(p) - A_ * sol.head(n);
      }
      if (res.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
      sol += back(res);
    }
    dx = sol.head(n);
    dy = p > 0 ? rvec(sol.tail(p)) : rvec();
    dz = apply_Wi(l_, *sc_, WiG_ * dx - wrz);
  }

 private:
  const rmat& A_;
  const rmat& G_;
  const Layout& l_;
  const Scaling* sc_ = nullptr;
  rmat WiG_;
  rmat H_;
  double delta_ = 0.0;
  Eigen::PartialPivLU<rmat> lu_;
  Eigen::LLT<rmat> llt_;
  bool use_llt_ = false;
};

/// Ruiz equilibration of [A; G]. SOC blocks share one row factor.
void equilibrate(const ConicProgram& p, const Layout& l, rvec& D, rvec& EA, rvec& EG) {
  const int n = p.n_vars();
  const int pa = static_cast<int>(p.A.rows());
  D = rvec::Ones(n);
  EA = rvec::Ones(pa);
  EG = rvec::Ones(l.m);
  rmat A = p.A, G = p.G;
  for (int round = 0; round < 12; ++round) {
    rvec cn = rvec::Zero(n);
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      if (pa > 0) v = A.col(j).cwiseAbs().maxCoeff();
      if (l.m > 0) v = std::max(v, G.col(j).cwiseAbs().maxCoeff());
      cn[j] = v > 0 ? 1.0 / std::sqrt(v) : 1.0;
    }
    rvec ra(pa), rg(l.m);
    for (int i = 0; i < pa; ++i) {
      const double v = A.row(i).cwiseAbs().maxCoeff();
      ra[i] = v > 0 ? 1.0 / std::sqrt(v) : 1.0;
    }
    for (int i = 0; i < l.n_orth; ++i) {
      const double v = G.row(i).cwiseAbs().maxCoeff();
      rg[i] = v > 0 ? 1.0 / std::sqrt(v) : 1.0;
    }
    for (std::size_t b = 0; b < l.soc.size(); ++b) {
      const double v = G.middleRows(l.off[b], l.soc[b]).cwiseAbs().maxCoeff();
      rg.segment(l.off[b], l.soc[b]).setConstant(v > 0 ? 1.0 / std::sqrt(v) : 1.0);
    }
    if (pa > 0) A = ra.asDiagonal() * A * cn.asDiagonal();
    if (l.m > 0) G = rg.asDiagonal() * G * cn.asDiagonal();
    D = D.cwiseProduct(cn);
    EA = EA.cwiseProduct(ra);
    EG = EG.cwiseProduct(rg);
    double spread = 0.0;
    for (int j = 0; j < n; ++j) spread = std::max(spread, std::abs(1.0 - cn[j]));
    if (spread < 1e-3) break;
  }
}

}  // namespace

SolveReport solve_conic(const ConicProgram& prog, const SolverOptions& opts) {
  prog.validate();
  const Layout l = make_layout(prog);
  const int n = prog.n_vars();
  const int p = static_cast<int>(prog.A.rows());
  const int m = l.m;

  rvec D = rvec::Ones(n), EA = rvec::Ones(p), EG = rvec::Ones(m);
  if (opts.equilibrate) equilibrate(prog, l, D, EA, EG);
  const rmat A = p > 0 ? rmat(EA.asDiagonal() * prog.A * D.asDiagonal()) : rmat::Zero(0, n);
  const rmat G = m > 0 ? rmat(EG.asDiagonal() * prog.G * D.asDiagonal()) : rmat::Zero(0, n);
  const rvec c = D.cwiseProduct(prog.c);
  const rvec b = EA.cwiseProduct(prog.b);
  const rvec h = EG.cwiseProduct(prog.h);
  const rvec e = unit(l);
  const double deg = l.degree();

  Kkt kkt(A, G, l);

  // Initial point from two least-squares style solves with W = I.
  rvec x, y, z, s;
  {
    const Scaling id = identity_scaling(l);
    kkt.factor(id);
    rvec x0, y0, z0;
    kkt.solve(rvec::Zero(n), b, h, x0, y0, z0);
    x = x0;
    s = -z0;
    kkt.solve(-c, rvec::Zero(p), rvec::Zero(m), x0, y0, z0);
    y = y0;
    z = z0;
    if (m > 0) {
      const double as = -min_eig(l, s);
      if (as >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + as) * e;
      const double az = -min_eig(l, z);
      if (az >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + az) * e;
    }
  }
  double tau = 1.0, kappa = 1.0;

  const double nb = std::max(1.0, prog.b.norm());
  const double nh = std::max(1.0, prog.h.norm());
  const double nc = std::max(1.0, prog.c.norm());

  SolveReport rep;
  rvec best_x = x;
  double best_merit = std::numeric_limits<double>::infinity();
  int stalls = 0;

  auto unscale_x = [&](const rvec& xs) { return rvec(D.cwiseProduct(xs)); };

  for (int it = 0; it <= opts.max_iters; ++it) {
    rep.iterations = it;
    // Residuals of the scaled embedding.
    const rvec rx = (p > 0 ? rvec(A.transpose() * y) : rvec::Zero(n)) +
                    (m > 0 ? rvec(G.transpose() * z) : rvec::Zero(n)) + c * tau;
    const rvec ry = p > 0 ? rvec(-(A * x) + b * tau) : rvec();
    const rvec rz = m > 0 ? rvec(h * tau - G * x - s) : rvec();
    const double rtau = kappa + c.dot(x) + (p > 0 ? b.dot(y) : 0.0) + (m > 0 ? h.dot(z) : 0.0);
    const double mu = (s.dot(z) + kappa * tau) / (deg + 1.0);

    // Convergence tests on the original data.
    const rvec xu = unscale_x(x) / tau;
    const rvec yu = EA.cwiseProduct(y);
    const rvec zu = EG.cwiseProduct(z);
    const rvec su = s.cwiseQuotient(EG);
    const double pres_eq = p > 0 ? (prog.A * xu - prog.b).norm() / nb : 0.0;
    const double pres_cone = m > 0 ? (prog.G * xu + su / tau - prog.h).norm() / nh : 0.0;
    const rvec dual_lin = (p > 0 ? rvec(prog.A.transpose() * yu) : rvec::Zero(n)) +
                          (m > 0 ? rvec(prog.G.transpose() * zu) : rvec::Zero(n));
    const double dres = (dual_lin / tau + prog.c).norm() / nc;
    const double pcost = prog.c.dot(xu);
    const double hz_by = (p > 0 ? prog.b.dot(yu) : 0.0) + (m > 0 ? prog.h.dot(zu) : 0.0);
    const double dcost = -hz_by / tau;
    const double gap = s.dot(z) / (tau * tau);
    double relgap = std::numeric_limits<double>::infinity();
    if (pcost < 0 || dcost > 0)
      relgap = gap / std::max(1e-300, std::min(std::abs(pcost), std::abs(dcost)));
    else if (pcost > 0 && dcost < 0)
      relgap = gap / std::max(1e-300, std::min(std::abs(pcost), std::abs(dcost)));
    const double pres = std::max(pres_eq, pres_cone);
    const bool gap_ok = gap <= opts.tol_gap || relgap <= opts.tol_gap;

    if (!xu.allFinite() || !std::isfinite(mu)) break;

    const double merit = std::max({pres, dres, std::min(gap, relgap)});
    if (merit < best_merit) {
      best_merit = merit;
      best_x = xu;
      rep.y = yu / tau;
      rep.z = zu / tau;
      rep.rel_gap = std::min(relgap, gap);
    }

    if (pres <= opts.tol_feas && dres <= opts.tol_feas && gap_ok &&
        max_violation(prog, xu) <= opts.tol_feas) {
      rep.status = SolveStatus::optimal;
      rep.x = xu;
      rep.y = yu / tau;
      rep.z = zu / tau;
      rep.rel_gap = std::min(relgap, gap);
      rep.objective = pcost;
      rep.max_violation = max_violation(prog, xu);
      return rep;
    }
    if (tau < kappa && hz_by < 0.0 && dual_lin.norm() <= opts.tol_feas * (-hz_by)) {
      rep.status = SolveStatus::infeasible;
      rep.x = xu;
      rep.y = yu / -hz_by;
      rep.z = zu / -hz_by;
      rep.objective = std::numeric_limits<double>::infinity();
      rep.max_violation = max_violation(prog, xu);
      return rep;
    }
    {
      const rvec xr = unscale_x(x);
      const double cx = prog.c.dot(xr);
      const double pr = std::max(p > 0 ? (prog.A * xr).norm() : 0.0,
                                 m > 0 ? (prog.G * xr + su).norm() : 0.0);
      if (tau < kappa && cx < 0.0 && pr <= opts.tol_feas * (-cx)) {
        rep.status = SolveStatus::unbounded;
        rep.x = xr / -cx;
        rep.objective = -std::numeric_limits<double>::infinity();
        rep.max_violation = max_violation(prog, rep.x);
        return rep;
      }
    }
    if (it == opts.max_iters) break;

    const Scaling sc = nt_scaling(l, s, z);
    kkt.factor(sc);
    rvec u1x, u1y, u1z;
    kkt.solve(-c, b, h, u1x, u1y, u1z);
    const double den_base = kappa / tau - c.dot(u1x) - (p > 0 ? b.dot(u1y) : 0.0) -
                            (m > 0 ? h.dot(u1z) : 0.0);

    struct Dir {
      rvec dx, dy, dz, ds;
      double dtau = 0, dkappa = 0;
    };
    auto direction = [&](double eta, const rvec& bs, double bkappa) {
      Dir d;
      const rvec wlb = apply_W(l, sc, jdiv(l, sc.lambda, bs));
      rvec u2x, u2y, u2z;
      kkt.solve(-eta * rx, eta * ry, eta * rz - wlb, u2x, u2y, u2z);
      const double num = eta * rtau + bkappa / tau + c.dot(u2x) + (p > 0 ? b.dot(u2y) : 0.0) +
                         (m > 0 ? h.dot(u2z) : 0.0);
      d.dtau = num / den_base;
      d.dx = u2x + d.dtau * u1x;
      d.dy = p > 0 ? rvec(u2y + d.dtau * u1y) : rvec();
      d.dz = u2z + d.dtau * u1z;
      d.ds = wlb - apply_W(l, sc, apply_W(l, sc, d.dz));
      d.dkappa = (bkappa - kappa * d.dtau) / tau;
      return d;
    };
    auto step_len = [&](const Dir& d) {
      double a = std::min(max_step(l, s, d.ds), max_step(l, z, d.dz));
      if (d.dtau < 0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    const rvec ll = jprod(l, sc.lambda, sc.lambda);
    const Dir aff = direction(1.0, -ll, -kappa * tau);
    const double alpha_aff = std::min(1.0, step_len(aff));
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);
    const rvec corr = jprod(l, apply_Wi(l, sc, aff.ds), apply_W(l, sc, aff.dz));
    const rvec bs = -ll - corr + sigma * mu * e;
    const double bk = -kappa * tau - aff.dkappa * aff.dtau + sigma * mu;
    const Dir d = direction(1.0 - sigma, bs, bk);
    const double alpha = std::min(1.0, 0.99 * step_len(d));
    if (!(alpha > 1e-12) || !d.dx.allFinite()) {
      if (++stalls >= 3) break;
      continue;
    }
    x += alpha * d.dx;
    if (p > 0) y += alpha * d.dy;
    z += alpha * d.dz;
    s += alpha * d.ds;
    tau += alpha * d.dtau;
    kappa += alpha * d.dkappa;
    // Keep the homogeneous scale bounded.
    const double scale = std::max(tau, kappa);
    if (scale > 1e8 || scale < 1e-8) {
      x /= scale;
      if (p > 0) y /= scale;
      z /= scale;
      s /= scale;
      tau /= scale;
      kappa /= scale;
    }
  }

  rep.status = SolveStatus::max_iters;
  rep.x = best_x;
  rep.objective = prog.c.dot(best_x);
  rep.max_violation = max_violation(prog, best_x);
  return rep;
}

}  // namespace rismec
