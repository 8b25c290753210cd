#include "raggio/entanglement.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace raggio {

namespace {

void require_full_factors(const FdAlgebra& owner, const char* op) {
  const FdAlgebra& a = owner.factor(Factor::A);
  const FdAlgebra& b = owner.factor(Factor::B);
  if (a.num_blocks() != 1 || b.num_blocks() != 1) {
    throw Error(ErrorKind::UnsupportedShape, std::string(op) + " needs tensor(M_n, M_m), got " +
                                                 owner.shorthand());
  }
}

/// Block-local state embedded into block k of `a`.
State embed(const FdAlgebra& a, int k, const Matrix& local) {
  std::vector<Matrix> blocks;
  for (int q = 0; q < a.num_blocks(); ++q) {
    const int d = a.block_dim(q);
    blocks.push_back(q == k ? local : Matrix::Zero(d, d));
  }
  return State(a, std::move(blocks));
}

Matrix projector(const Vector& v) { return v * v.adjoint(); }

Matrix coefficient_matrix(const Vector& psi, int n, int m) {
  Matrix c(n, m);
  for (int r = 0; r < n; ++r) {
    for (int s = 0; s < m; ++s) c(r, s) = psi(r * m + s);
  }
  return c;
}

}  // namespace

void validate(const Decomposition& d) {
  if (d.weights.empty() || d.weights.size() != d.a_parts.size() ||
      d.weights.size() != d.b_parts.size()) {
    throw Error(ErrorKind::InvalidArgument, "decomposition needs matching, non-empty weights and parts");
  }
  double total = 0.0;
  for (double w : d.weights) {
    if (!(w > 0.0)) throw Error(ErrorKind::InvalidArgument, "decomposition weights must be > 0");
    total += w;
  }
  if (std::abs(total - 1.0) > tol::kProbabilitySum) {
    throw Error(ErrorKind::InvalidArgument,
                "decomposition weights must sum to 1, got " + std::to_string(total));
  }
  for (std::size_t i = 1; i < d.weights.size(); ++i) {
    if (!(d.a_parts[i].owner() == d.a_parts[0].owner()) ||
        !(d.b_parts[i].owner() == d.b_parts[0].owner())) {
      throw Error(ErrorKind::AlgebraMismatch, "decomposition parts live on different algebras");
    }
  }
}

State reconstruct(const Decomposition& d) {
  validate(d);
  const FdAlgebra owner = tensor(d.a_parts[0].owner(), d.b_parts[0].owner());
  std::vector<Matrix> blocks;
  for (int dim : owner.block_dims()) blocks.push_back(Matrix::Zero(dim, dim));
  for (std::size_t t = 0; t < d.weights.size(); ++t) {
    std::size_t k = 0;
    for (const auto& ab : d.a_parts[t].blocks()) {
      for (const auto& bb : d.b_parts[t].blocks()) {
        if (ab.size() && bb.size()) blocks[k] += d.weights[t] * kron(ab, bb);
        ++k;
      }
    }
  }
  return State(owner, std::move(blocks));
}

// ---------------------------------------------------------------------------

std::vector<double> schmidt(const PureVector& v) {
  require_full_factors(v.owner(), "schmidt");
  const int n = v.owner().factor(Factor::A).total_dim();
  const int m = v.owner().factor(Factor::B).total_dim();
  Eigen::JacobiSVD<Matrix> svd(coefficient_matrix(v.psi(), n, m));
  const Eigen::VectorXd& sv = svd.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

PureEntanglement is_entangled_pure(const PureVector& v) {
  const auto coeffs = schmidt(v);
  const auto significant =
      std::count_if(coeffs.begin(), coeffs.end(), [](double c) { return c > tol::kSchmidt; });
  double reduced = 0.0;
  for (double c : coeffs) reduced += c * c * c * c;
  return {significant > 1, reduced};
}

// ---------------------------------------------------------------------------

Decomposition classical_decompose(const State& s) {
  const FdAlgebra& a = s.owner().factor(Factor::A);
  const FdAlgebra& b = s.owner().factor(Factor::B);
  Decomposition d;
  if (b.is_commutative()) {
    // Points of B are its 1x1 blocks; block (i, j) is then the n_i x n_i
    // matrix omega(. (x) delta_j) restricted to block i of A.
    for (int j = 0; j < b.num_blocks(); ++j) {
      double p = 0.0;
      for (int i = 0; i < a.num_blocks(); ++i) p += s.block(tensor_block_index(b, i, j)).trace().real();
      if (p <= tol::kWeightPrune) continue;
      std::vector<Matrix> cond;
      for (int i = 0; i < a.num_blocks(); ++i) cond.push_back(s.block(tensor_block_index(b, i, j)) / p);
      d.weights.push_back(p);
      d.a_parts.emplace_back(a, std::move(cond));
      d.b_parts.push_back(embed(b, j, Matrix::Ones(1, 1)));
    }
  } else if (a.is_commutative()) {
    for (int i = 0; i < a.num_blocks(); ++i) {
      double p = 0.0;
      for (int j = 0; j < b.num_blocks(); ++j) p += s.block(tensor_block_index(b, i, j)).trace().real();
      if (p <= tol::kWeightPrune) continue;
      std::vector<Matrix> cond;
      for (int j = 0; j < b.num_blocks(); ++j) cond.push_back(s.block(tensor_block_index(b, i, j)) / p);
      d.weights.push_back(p);
      d.a_parts.push_back(embed(a, i, Matrix::Ones(1, 1)));
      d.b_parts.emplace_back(b, std::move(cond));
    }
  } else {
    throw Error(ErrorKind::PreconditionViolated,
                "classical_decompose needs a commutative factor, got " + s.owner().shorthand());
  }
  // Pruning can leave the weights a hair away from 1.
  const double total = std::accumulate(d.weights.begin(), d.weights.end(), 0.0);
  for (double& w : d.weights) w /= total;
  return d;
}

// ---------------------------------------------------------------------------

Matrix partial_transpose(const Matrix& rho, int n, int m) {
  Matrix out(n * m, n * m);
  for (int r = 0; r < n; ++r) {
    for (int rp = 0; rp < n; ++rp) {
      out.block(r * m, rp * m, m, m) = rho.block(r * m, rp * m, m, m).transpose();
    }
  }
  return out;
}

namespace {

double min_partial_transpose_eigenvalue(const Matrix& rho, int n, int m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian_part(partial_transpose(rho, n, m)),
                                            Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace

double ppt_check(const State& s) {
  require_full_factors(s.owner(), "ppt_check");
  const int n = s.owner().factor(Factor::A).total_dim();
  const int m = s.owner().factor(Factor::B).total_dim();
  return min_partial_transpose_eigenvalue(s.block(0), n, m);
}

std::string_view to_string(VerdictTag tag) {
  switch (tag) {
    case VerdictTag::Separable: return "Separable";
    case VerdictTag::EntangledPure: return "EntangledPure";
    case VerdictTag::EntangledPPT: return "EntangledPPT";
    case VerdictTag::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

// ---------------------------------------------------------------------------
// Exact two-qubit decomposition.
//
// Write rho = V V^* with V = [sqrt(l_i) e_i]. A vector z = V m is a product
// vector iff z^T S z = 0 for S = sigma_y (x) sigma_y. With the Takagi form
// V^T S V = U diag(s) U^T and m = conj(U) diag(e^{i t/2}) F^T, every column
// has z^T S z = (1/4) sum_j e^{i t_j} s_j, which vanishes once the phases
// close the polygon with sides s_j. That is possible iff s_1 <= s_2 + s_3 + s_4,
// i.e. zero concurrence.

namespace {

struct Takagi {
  Eigen::VectorXd values;
  Matrix vectors;
};

/// tau = U diag(values) U^T for complex symmetric tau, via the real symmetric
/// embedding [[Re, Im], [Im, -Re]] whose +s eigenvectors [x; y] give columns x + i y.
Takagi takagi(const Matrix& tau) {
  const Eigen::Index n = tau.rows();
  Eigen::MatrixXd big(2 * n, 2 * n);
  big << tau.real(), tau.imag(), tau.imag(), -tau.real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (big + big.transpose()));

  // The eigenvalues pair up as +-s and J [x; y] = [-y; x] maps one to the
  // other, so keep n vectors spanning a J-free subspace.
  std::vector<Eigen::VectorXd> kept;
  std::vector<Eigen::VectorXd> forbidden;
  for (Eigen::Index c = 2 * n - 1; c >= 0 && static_cast<Eigen::Index>(kept.size()) < n; --c) {
    Eigen::VectorXd w = eig.eigenvectors().col(c);
    for (const auto& f : forbidden) w -= f.dot(w) * f;
    const double norm = w.norm();
    if (norm < 0.5) continue;
    w /= norm;
    Eigen::VectorXd jw(2 * n);
    jw << -w.tail(n), w.head(n);
    kept.push_back(w);
    forbidden.push_back(w);
    forbidden.push_back(jw);
  }
  Takagi out;
  out.vectors.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto& w = kept[static_cast<std::size_t>(c)];
    for (Eigen::Index r = 0; r < n; ++r) out.vectors(r, c) = Complex(w(r), w(n + r));
  }
  const Matrix diag = out.vectors.adjoint() * tau * out.vectors.conjugate();
  out.values = diag.diagonal().real().cwiseMax(0.0);
  return out;
}

/// Unit complex numbers u, v with p u + q v = t, as close as the lengths allow.
std::pair<Complex, Complex> close_triangle(double p, double q, Complex t) {
  const double r = std::abs(t);
  if (r < 1e-300) return {1.0, -1.0};
  const Complex dir = t / r;
  if (p <= 0.0) return {1.0, dir};
  if (q <= 0.0) return {dir, 1.0};
  const double cosg = std::clamp((p * p + r * r - q * q) / (2.0 * p * r), -1.0, 1.0);
  const Complex u = dir * std::polar(1.0, std::acos(cosg));
  const Complex rest = t - p * u;
  const double rest_norm = std::abs(rest);
  const Complex v = rest_norm > 0.0 ? rest / rest_norm : dir;
  return {u, v};
}

Vector top_singular_product(const Vector& z, Vector* a, Vector* b, int n, int m) {
  Eigen::JacobiSVD<Matrix> svd(coefficient_matrix(z, n, m), Eigen::ComputeFullU | Eigen::ComputeFullV);
  *a = svd.matrixU().col(0);
  *b = svd.matrixV().col(0).conjugate();
  return kron(*a, *b).col(0);
}

}  // namespace

ProductTerms two_qubit_product_terms(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian_part(rho));
  const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
  Matrix v = eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();

  Matrix s = Matrix::Zero(4, 4);
  s(0, 3) = -1.0;
  s(1, 2) = 1.0;
  s(2, 1) = 1.0;
  s(3, 0) = -1.0;
  const Matrix tau = v.transpose() * s * v;
  Takagi tk = takagi(0.5 * (tau + tau.transpose()));

  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](int x, int y) { return tk.values(x) > tk.values(y); });
  std::array<double, 4> side{};
  Matrix u(4, 4);
  for (int k = 0; k < 4; ++k) {
    side[static_cast<std::size_t>(k)] = tk.values(order[static_cast<std::size_t>(k)]);
    u.col(k) = tk.vectors.col(order[static_cast<std::size_t>(k)]);
  }
  if (side[0] > side[1] + side[2] + side[3] + 1e-9) return {};

  // Close the polygon: s1 + s2 e2 + L eL = 0, then L eL = s3 e3 + s4 e4.
  const double lo = std::max(std::abs(side[2] - side[3]), side[0] - side[1]);
  const double len = std::min(lo, std::min(side[2] + side[3], side[0] + side[1]));
  std::array<Complex, 4> phase{};
  phase[0] = 1.0;
  const auto [e2, eL] = close_triangle(side[1], len, Complex(-side[0], 0.0));
  phase[1] = e2;
  const auto [e3, e4] = close_triangle(side[2], side[3], len * eL);
  phase[2] = e3;
  phase[3] = e4;

  Eigen::Matrix4d f;
  f << 1, 1, 1, 1, 1, 1, -1, -1, 1, -1, 1, -1, 1, -1, -1, 1;
  f *= 0.5;
  Matrix w(4, 4);
  for (int l = 0; l < 4; ++l) {
    const Complex half = std::sqrt(phase[static_cast<std::size_t>(l)]);
    for (int k = 0; k < 4; ++k) w(l, k) = half * f(k, l);
  }
  const Matrix z = v * u.conjugate() * w;

  ProductTerms out;
  for (int k = 0; k < 4; ++k) {
    const double weight = z.col(k).squaredNorm();
    if (weight <= tol::kWeightPrune) continue;
    Vector a, b;
    top_singular_product(z.col(k) / std::sqrt(weight), &a, &b, 2, 2);
    out.weights.push_back(weight);
    out.a.push_back(a);
    out.b.push_back(b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Product-state search: fully corrective Frank-Wolfe over pure product states.
// Each step solves a simplex-constrained least-squares fit of the target by the
// current atoms, then adds product vectors minimizing <ab| X - rho |ab>.

namespace {

/// Real coordinates of a Hermitian matrix that preserve the Frobenius inner product.
Eigen::VectorXd hermitian_coords(const Matrix& h) {
  const Eigen::Index d = h.rows();
  Eigen::VectorXd out(d * d);
  Eigen::Index k = 0;
  const double r2 = std::sqrt(2.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    out(k++) = h(i, i).real();
    for (Eigen::Index j = i + 1; j < d; ++j) {
      out(k++) = r2 * h(i, j).real();
      out(k++) = r2 * h(i, j).imag();
    }
  }
  return out;
}

/// Lawson-Hanson non-negative least squares: min |E w - y|, w >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& e, const Eigen::VectorXd& y) {
  const Eigen::Index k = e.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
  std::vector<bool> passive(static_cast<std::size_t>(k), false);
  const double tol = 1e-14 * std::max(1.0, e.cwiseAbs().maxCoeff() * y.cwiseAbs().maxCoeff());

  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    Eigen::MatrixXd sub(e.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = e.col(idx[c]);
    const Eigen::VectorXd zs = sub.colPivHouseholderQr().solve(y);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(k);
    for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c]) = zs(static_cast<Eigen::Index>(c));
    return z;
  };

  for (int outer = 0; outer < 3 * k + 10; ++outer) {
    const Eigen::VectorXd grad = e.transpose() * (y - e * w);
    Eigen::Index best = -1;
    double best_val = tol;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && grad(j) > best_val) {
        best_val = grad(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    for (int inner = 0; inner < 3 * k + 10; ++inner) {
      Eigen::VectorXd z = solve_passive();
      bool feasible = true;
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          feasible = false;
          const double denom = w(j) - z(j);
          if (denom > 0.0) alpha = std::min(alpha, w(j) / denom);
        }
      }
      if (feasible) {
        w = z;
        break;
      }
      w += alpha * (z - w);
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)] && w(j) <= 1e-15) {
          passive[static_cast<std::size_t>(j)] = false;
          w(j) = 0.0;
        }
      }
    }
  }
  return w.cwiseMax(0.0);
}

struct Atom {
  Vector a;
  Vector b;
  Eigen::VectorXd coords;
};

Atom make_atom(const Vector& a, const Vector& b) {
  const Vector x = kron(a, b).col(0);
  return {a, b, hermitian_coords(projector(x))};
}

Eigen::VectorXd min_eigvec_real_guard(const Matrix& h, Vector* vec) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian_part(h));
  *vec = eig.eigenvectors().col(0);
  return eig.eigenvalues();
}

/// Local minimum of <a (x) b| r |a (x) b> by alternating eigenvector updates.
double product_minimum(const Matrix& r, int n, int m, Vector* a, Vector* b) {
  double value = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    Matrix rb = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int ip = 0; ip < n; ++ip) rb(i, ip) = (b->adjoint() * r.block(i * m, ip * m, m, m) * *b)(0, 0);
    }
    min_eigvec_real_guard(rb, a);
    Matrix ra = Matrix::Zero(m, m);
    for (int i = 0; i < n; ++i) {
      for (int ip = 0; ip < n; ++ip) ra += std::conj((*a)(i)) * (*a)(ip) * r.block(i * m, ip * m, m, m);
    }
    const Eigen::VectorXd vals = min_eigvec_real_guard(ra, b);
    const double next = vals(0);
    const bool done = value - next < 1e-15;
    value = next;
    if (done) break;
  }
  return value;
}

/// Levenberg-Marquardt on rho = sum_k x_k x_k^*, x_k = a_k (x) b_k, with the
/// weights absorbed into the norms of a_k. Every term of a decomposition lies
/// in the range of rho, so the fit is done on the range block U^* X U and the
/// kernel components K^* x_k are separate residual rows, linear in x_k. The
/// problem is underdetermined, so steps solve (J J^T + damping) y = r and
/// take delta = -J^T y.
struct Refined {
  std::vector<Vector> a;
  std::vector<Vector> b;
};

Matrix sum_of_products(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  const Eigen::Index d = a.front().size() * b.front().size();
  Matrix x = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Vector v = kron(a[k], b[k]).col(0);
    x += v * v.adjoint();
  }
  return x;
}

Refined refine_products(const Matrix& rho, const Matrix& range, const Matrix& kernel,
                        const Matrix& pt_kernel, std::vector<Vector> a, std::vector<Vector> b,
                        int max_steps) {
  const int n = static_cast<int>(a.front().size());
  const int m = static_cast<int>(b.front().size());
  const Eigen::Index r = range.cols();
  const Eigen::Index kdim = kernel.cols();
  const Eigen::Index tdim = pt_kernel.cols();
  const Eigen::Index per_term = 2 * (kdim + tdim);
  const Eigen::VectorXd target = hermitian_coords(range.adjoint() * rho * range);
  const std::size_t terms = a.size();
  const Eigen::Index params = static_cast<Eigen::Index>(terms) * 2 * (n + m);
  const Eigen::Index rows = r * r + static_cast<Eigen::Index>(terms) * per_term;

  auto residual = [&](const std::vector<Vector>& aa, const std::vector<Vector>& bb) {
    Eigen::VectorXd out(rows);
    out.head(r * r) = hermitian_coords(range.adjoint() * sum_of_products(aa, bb) * range) - target;
    for (std::size_t k = 0; k < terms; ++k) {
      const Eigen::Index off = r * r + static_cast<Eigen::Index>(k) * per_term;
      const Vector y = kernel.adjoint() * kron(aa[k], bb[k]).col(0);
      out.segment(off, kdim) = y.real();
      out.segment(off + kdim, kdim) = y.imag();
      // Partial transpose of x x^* is (a (x) conj b)(a (x) conj b)^*.
      const Vector z = pt_kernel.adjoint() * kron(aa[k], bb[k].conjugate()).col(0);
      out.segment(off + 2 * kdim, tdim) = z.real();
      out.segment(off + 2 * kdim + tdim, tdim) = z.imag();
    }
    return out;
  };
  Eigen::VectorXd res = residual(a, b);
  double f = res.squaredNorm();
  double mu = 1e-3;
  Eigen::MatrixXd jac(rows, params);
  for (int step = 0; step < max_steps && f > 1e-24; ++step) {
    jac.setZero();
    Eigen::Index col = 0;
    for (std::size_t k = 0; k < terms; ++k) {
      const Vector x = kron(a[k], b[k]).col(0);
      const Eigen::Index off = r * r + static_cast<Eigen::Index>(k) * per_term;
      // dx is the change of a (x) b, dxt the change of a (x) conj b.
      auto column = [&](const Vector& dx, const Vector& dxt) {
        jac.col(col).head(r * r) = hermitian_coords(range.adjoint() * (dx * x.adjoint() + x * dx.adjoint()) * range);
        const Vector y = kernel.adjoint() * dx;
        jac.col(col).segment(off, kdim) = y.real();
        jac.col(col).segment(off + kdim, kdim) = y.imag();
        const Vector z = pt_kernel.adjoint() * dxt;
        jac.col(col).segment(off + 2 * kdim, tdim) = z.real();
        jac.col(col).segment(off + 2 * kdim + tdim, tdim) = z.imag();
        ++col;
      };
      const Vector bc = b[k].conjugate();
      for (int i = 0; i < n; ++i) {
        Vector e = Vector::Zero(n);
        e(i) = 1.0;
        column(kron(e, b[k]).col(0), kron(e, bc).col(0));
        e(i) = Complex(0.0, 1.0);
        column(kron(e, b[k]).col(0), kron(e, bc).col(0));
      }
      for (int j = 0; j < m; ++j) {
        Vector e = Vector::Zero(m);
        e(j) = 1.0;
        column(kron(a[k], e).col(0), kron(a[k], e).col(0));
        e(j) = Complex(0.0, 1.0);
        column(kron(a[k], e).col(0), kron(a[k], Vector(e.conjugate())).col(0));
      }
    }
    const Eigen::MatrixXd jjt = jac * jac.transpose();
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      Eigen::MatrixXd sys = jjt;
      sys.diagonal().array() += mu;
      const Eigen::VectorXd delta = -jac.transpose() * sys.ldlt().solve(res);
      std::vector<Vector> ta = a;
      std::vector<Vector> tb = b;
      Eigen::Index p = 0;
      for (std::size_t k = 0; k < terms; ++k) {
        for (int i = 0; i < n; ++i, p += 2) ta[k](i) += Complex(delta(p), delta(p + 1));
        for (int j = 0; j < m; ++j, p += 2) tb[k](j) += Complex(delta(p), delta(p + 1));
      }
      const Eigen::VectorXd tr = residual(ta, tb);
      const double tf = tr.squaredNorm();
      if (tf < f) {
        a = std::move(ta);
        b = std::move(tb);
        res = tr;
        f = tf;
        mu = std::max(mu / 3.0, 1e-18);
        accepted = true;
      } else {
        mu *= 4.0;
      }
    }
    if (!accepted) break;
  }
  return {std::move(a), std::move(b)};
}

}  // namespace

ProductSearchResult product_state_search(const Matrix& rho_in, int n, int m, int max_iterations,
                                         double tolerance, Rng& rng) {
  const Matrix rho = hermitian_part(rho_in);
  const int d = n * m;
  const Eigen::VectorXd target_coords = hermitian_coords(rho);
  const std::size_t cap = static_cast<std::size_t>(3 * d * d + 8);

  std::vector<Atom> atoms;
  {
    // Eigenbases of the marginals give a first hull around rho_A (x) rho_B.
    Matrix ra = Matrix::Zero(n, n);
    Matrix rbm = Matrix::Zero(m, m);
    for (int i = 0; i < n; ++i) {
      for (int ip = 0; ip < n; ++ip) {
        ra(i, ip) = rho.block(i * m, ip * m, m, m).trace();
        if (i == ip) rbm += rho.block(i * m, i * m, m, m);
      }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> ea(hermitian_part(ra));
    Eigen::SelfAdjointEigenSolver<Matrix> eb(hermitian_part(rbm));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) atoms.push_back(make_atom(ea.eigenvectors().col(i), eb.eigenvectors().col(j)));
    }
  }

  // Range and kernel of rho; eigenvalues below 1e-10 count as kernel.
  Eigen::SelfAdjointEigenSolver<Matrix> spectrum(rho);
  int rank = 0;
  for (Eigen::Index i = 0; i < d; ++i) rank += spectrum.eigenvalues()(i) > 1e-10 ? 1 : 0;
  const Matrix kernel_basis = spectrum.eigenvectors().leftCols(d - rank);
  const Matrix range_basis = spectrum.eigenvectors().rightCols(rank);
  Eigen::SelfAdjointEigenSolver<Matrix> pt_spectrum(hermitian_part(partial_transpose(rho, n, m)));
  int pt_null = 0;
  for (Eigen::Index i = 0; i < d; ++i) pt_null += pt_spectrum.eigenvalues()(i) <= 1e-10 ? 1 : 0;
  const Matrix pt_kernel_basis = pt_spectrum.eigenvectors().leftCols(pt_null);

  ProductSearchResult result;
  Eigen::VectorXd weights;
  const int starts = 4;
  int next_polish = 4;
  for (int iter = 0; iter <= max_iterations; ++iter) {
    Eigen::MatrixXd design(target_coords.size() + 1, static_cast<Eigen::Index>(atoms.size()));
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      design.col(static_cast<Eigen::Index>(k)) << atoms[k].coords, 1.0;
    }
    Eigen::VectorXd rhs(target_coords.size() + 1);
    rhs << target_coords, 1.0;
    weights = nnls(design, rhs);
    const double sum = weights.sum();
    if (sum > 0.0) weights /= sum;

    // Drop unused atoms once the active set grows past the Caratheodory scale.
    if (atoms.size() > cap) {
      std::vector<Atom> kept;
      std::vector<double> kept_w;
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        if (weights(static_cast<Eigen::Index>(k)) > 0.0) {
          kept.push_back(atoms[k]);
          kept_w.push_back(weights(static_cast<Eigen::Index>(k)));
        }
      }
      atoms = std::move(kept);
      weights = Eigen::Map<Eigen::VectorXd>(kept_w.data(), static_cast<Eigen::Index>(kept_w.size()));
    }

    Matrix approx = Matrix::Zero(d, d);
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const double wk = weights(static_cast<Eigen::Index>(k));
      if (wk > 0.0) approx += wk * projector(kron(atoms[k].a, atoms[k].b).col(0));
    }
    result.error = trace_distance(approx, rho);
    result.iterations = iter;
    if (result.error <= tolerance || iter == max_iterations) break;

    if (iter == next_polish) {
      next_polish = next_polish * 5 / 2 + 1;
      std::vector<std::pair<double, std::size_t>> ranked;
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        const double wk = weights(static_cast<Eigen::Index>(k));
        if (wk > 0.0) ranked.emplace_back(wk, k);
      }
      std::sort(ranked.begin(), ranked.end(), std::greater<>());
      const std::size_t keep = static_cast<std::size_t>(rank * rank);
      if (ranked.size() > keep) ranked.resize(keep);
      std::vector<Vector> pa;
      std::vector<Vector> pb;
      for (const auto& [wk, k] : ranked) {
        pa.push_back(std::sqrt(wk) * atoms[k].a);
        pb.push_back(atoms[k].b);
      }
      // Spare low-weight terms give the refinement room to move.
      for (int extra = 0; extra < rank; ++extra) {
        pa.push_back(1e-2 * complex_gaussian_vector(n, rng).normalized());
        pb.push_back(complex_gaussian_vector(m, rng).normalized());
      }
      Refined refined =
          refine_products(rho, range_basis, kernel_basis, pt_kernel_basis, std::move(pa), std::move(pb), 200);
      const Matrix polished = sum_of_products(refined.a, refined.b);
      const double scale_back = polished.trace().real();
      const double polished_error = trace_distance(polished / scale_back, rho);
      if (polished_error <= tolerance) {
        result.error = polished_error;
        for (std::size_t k = 0; k < refined.a.size(); ++k) {
          const double wk = refined.a[k].squaredNorm() * refined.b[k].squaredNorm() / scale_back;
          if (!(wk > 0.0)) continue;
          result.terms.weights.push_back(wk);
          result.terms.a.push_back(refined.a[k].normalized());
          result.terms.b.push_back(refined.b[k].normalized());
        }
        return result;
      }
    }

    const Matrix residual = approx - rho;
    const double baseline = (residual * approx).trace().real();
    for (int s = 0; s < starts; ++s) {
      Vector a = complex_gaussian_vector(n, rng).normalized();
      Vector b = complex_gaussian_vector(m, rng).normalized();
      const double v = product_minimum(residual, n, m, &a, &b);
      if (v < baseline) atoms.push_back(make_atom(a, b));
    }
  }

  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const double wk = weights(static_cast<Eigen::Index>(k));
    if (wk <= 0.0) continue;
    result.terms.weights.push_back(wk);
    result.terms.a.push_back(atoms[k].a);
    result.terms.b.push_back(atoms[k].b);
  }
  return result;
}

// ---------------------------------------------------------------------------

SeparabilityVerdict separability_test(const State& s, const SeparabilityOptions& options) {
  if (options.budget <= 0) {
    throw Error(ErrorKind::InvalidArgument, "separability budget must be >= 1");
  }
  const FdAlgebra& a = s.owner().factor(Factor::A);
  const FdAlgebra& b = s.owner().factor(Factor::B);

  struct Term {
    double weight;
    State a;
    State b;
  };
  std::vector<Term> terms;
  std::vector<std::pair<int, int>> live;
  for (int i = 0; i < a.num_blocks(); ++i) {
    for (int j = 0; j < b.num_blocks(); ++j) {
      if (s.block(tensor_block_index(b, i, j)).trace().real() > tol::kWeightPrune) live.emplace_back(i, j);
    }
  }

  bool undetermined = false;
  double most_negative = 0.0;
  Rng rng(options.seed);
  for (const auto& [i, j] : live) {
    const int n = a.block_dim(i);
    const int m = b.block_dim(j);
    const Matrix& raw = s.block(tensor_block_index(b, i, j));
    const double p = raw.trace().real();
    const Matrix rho = hermitian_part(raw / p);

    auto add_product = [&](double w, const Matrix& ra, const Matrix& rb) {
      terms.push_back({p * w, embed(a, i, ra), embed(b, j, rb)});
    };

    if (n == 1 || m == 1) {
      if (n == 1) add_product(1.0, Matrix::Ones(1, 1), rho);
      else add_product(1.0, rho, Matrix::Ones(1, 1));
      continue;
    }

    Eigen::SelfAdjointEigenSolver<Matrix> eig(rho);
    const double top = eig.eigenvalues()(eig.eigenvalues().size() - 1);
    if (live.size() == 1 && top >= 1.0 - tol::kSchmidt) {
      const Vector psi = eig.eigenvectors().col(eig.eigenvalues().size() - 1);
      Eigen::JacobiSVD<Matrix> svd(coefficient_matrix(psi, n, m));
      const Eigen::VectorXd& sv = svd.singularValues();
      if (sv.size() > 1 && sv(1) > tol::kSchmidt) {
        return {VerdictTag::EntangledPure, ReducedPurity{sv.array().pow(4).sum()}};
      }
      Vector va, vb;
      top_singular_product(psi, &va, &vb, n, m);
      add_product(1.0, projector(va), projector(vb));
      continue;
    }

    const double pt = min_partial_transpose_eigenvalue(rho, n, m);
    if (pt < -tol::kEigenFloor) {
      most_negative = std::min(most_negative, pt);
      continue;
    }
    if (most_negative < 0.0) continue;

    ProductTerms found;
    double error = 1.0;
    if (n == 2 && m == 2) {
      found = two_qubit_product_terms(rho);
      if (!found.weights.empty()) {
        Matrix approx = Matrix::Zero(4, 4);
        for (std::size_t k = 0; k < found.weights.size(); ++k) {
          approx += found.weights[k] * projector(kron(found.a[k], found.b[k]).col(0));
        }
        error = trace_distance(approx, rho);
      }
    }
    if (error > options.reconstruction_tolerance) {
      // PPT is sufficient in 2x3, so the search gets a larger allowance there.
      const bool ppt_complete = n * m <= 6;
      const int iterations = ppt_complete ? 5 * options.budget : options.budget;
      auto search = product_state_search(rho, n, m, iterations, options.reconstruction_tolerance, rng);
      found = std::move(search.terms);
      error = search.error;
    }
    if (error > options.reconstruction_tolerance) {
      undetermined = true;
      continue;
    }
    const double total = std::accumulate(found.weights.begin(), found.weights.end(), 0.0);
    for (std::size_t k = 0; k < found.weights.size(); ++k) {
      add_product(found.weights[k] / total, projector(found.a[k]), projector(found.b[k]));
    }
  }

  if (most_negative < 0.0) return {VerdictTag::EntangledPPT, PartialTransposeEigenvalue{most_negative}};
  if (undetermined) return {VerdictTag::Undetermined, IterationBudget{options.budget}};

  Decomposition d;
  double total = 0.0;
  for (const auto& t : terms) {
    if (t.weight > 0.0) total += t.weight;
  }
  for (auto& t : terms) {
    if (!(t.weight > 0.0)) continue;
    d.weights.push_back(t.weight / total);
    d.a_parts.push_back(std::move(t.a));
    d.b_parts.push_back(std::move(t.b));
  }
  return {VerdictTag::Separable, std::move(d)};
}

}  // namespace raggio
