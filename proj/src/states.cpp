#include "raggio/states.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace raggio {

namespace {

Matrix clip_negative(const Matrix& h, bool* changed) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  const Eigen::VectorXd& vals = eig.eigenvalues();
  if (vals.size() == 0 || vals.minCoeff() >= 0.0) {
    *changed = false;
    return h;
  }
  *changed = true;
  const Eigen::VectorXd clipped = vals.cwiseMax(0.0);
  return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace

State::State(FdAlgebra owner, std::vector<Matrix> blocks)
    : owner_(std::move(owner)), blocks_(std::move(blocks)) {
  // Reuse the element shape check.
  (void)Element(owner_, blocks_);

  double trace = 0.0;
  double imag_trace = 0.0;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const double defect = hermiticity_defect(blocks_[k]);
    if (defect > tol::kHermitian) {
      throw Error(ErrorKind::InvalidState, "density matrix is not Hermitian (deviation " +
                                               std::to_string(defect) + " in block " +
                                               std::to_string(k) + ")");
    }
    blocks_[k] = hermitian_part(blocks_[k]);
    trace += blocks_[k].trace().real();
    imag_trace += blocks_[k].trace().imag();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(blocks_[k], Eigen::EigenvaluesOnly);
    const double lowest = eig.eigenvalues().minCoeff();
    if (lowest < -tol::kEigenFloor) {
      throw Error(ErrorKind::InvalidState, "density matrix is not positive (eigenvalue " +
                                               std::to_string(lowest) + " in block " +
                                               std::to_string(k) + ")");
    }
  }
  if (std::abs(trace - 1.0) > tol::kTrace || std::abs(imag_trace) > tol::kTrace) {
    throw Error(ErrorKind::InvalidState,
                "density matrix trace must be 1, got " + std::to_string(trace));
  }

  bool any_clipped = false;
  for (auto& b : blocks_) {
    bool changed = false;
    b = clip_negative(b, &changed);
    any_clipped = any_clipped || changed;
  }
  if (any_clipped) {
    double t = 0.0;
    for (const auto& b : blocks_) t += b.trace().real();
    for (auto& b : blocks_) b /= t;
  }
}

State State::from_dense(const FdAlgebra& owner, const Matrix& rho) {
  // Off-block entries of a state are held to the Hermiticity tolerance.
  Element e = Element::from_dense(owner, rho, tol::kHermitian);
  return State(owner, e.blocks());
}

State State::maximally_mixed(const FdAlgebra& owner) {
  std::vector<Matrix> blocks;
  for (int d : owner.block_dims()) {
    blocks.push_back(Matrix::Identity(d, d) / static_cast<double>(owner.total_dim()));
  }
  return State(owner, std::move(blocks));
}

std::vector<double> State::block_weights() const {
  std::vector<double> w;
  w.reserve(blocks_.size());
  for (const auto& b : blocks_) w.push_back(b.trace().real());
  return w;
}

Matrix State::dense() const { return Element(owner_, blocks_).dense(); }

// ---------------------------------------------------------------------------

PureVector::PureVector(FdAlgebra owner, Vector psi) : owner_(std::move(owner)), psi_(std::move(psi)) {
  if (owner_.num_blocks() != 1) {
    throw Error(ErrorKind::UnsupportedShape,
                "vector states need a single-block algebra, got " + owner_.shorthand());
  }
  if (psi_.size() != owner_.total_dim()) {
    throw Error(ErrorKind::UnsupportedShape, "vector has length " + std::to_string(psi_.size()) +
                                                 ", algebra needs " +
                                                 std::to_string(owner_.total_dim()));
  }
  const double norm = psi_.norm();
  if (std::abs(norm - 1.0) > tol::kUnitNorm) {
    throw Error(ErrorKind::InvalidState, "vector must have unit norm, got " + std::to_string(norm));
  }
}

PureVector PureVector::normalized(FdAlgebra owner, Vector psi) {
  const double norm = psi.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorKind::InvalidState, "cannot normalize a zero or non-finite vector");
  }
  return PureVector(std::move(owner), psi / norm);
}

State PureVector::to_state() const {
  return State(owner_, {psi_ * psi_.adjoint()});
}

// ---------------------------------------------------------------------------

Complex expectation(const State& s, const Element& x) {
  if (!(s.owner() == x.owner())) {
    throw Error(ErrorKind::AlgebraMismatch, "state on " + s.owner().shorthand() +
                                                " cannot evaluate element of " +
                                                x.owner().shorthand());
  }
  Complex total = 0.0;
  for (std::size_t k = 0; k < s.blocks().size(); ++k) {
    // Tr(rho x) without forming the product.
    total += (s.blocks()[k].transpose().cwiseProduct(x.blocks()[k])).sum();
  }
  return total;
}

std::vector<double> restrict_to_diagonal(const PureVector& v) {
  std::vector<double> p(static_cast<std::size_t>(v.psi().size()));
  for (Eigen::Index i = 0; i < v.psi().size(); ++i) p[static_cast<std::size_t>(i)] = std::norm(v.psi()(i));
  return p;
}

std::vector<double> restrict_to_diagonal(const State& s) {
  std::vector<double> p;
  p.reserve(static_cast<std::size_t>(s.owner().total_dim()));
  for (const auto& b : s.blocks()) {
    for (Eigen::Index i = 0; i < b.rows(); ++i) p.push_back(b(i, i).real());
  }
  return p;
}

Element partial_expectation(const State& s, const Element& y, Factor keep) {
  const FdAlgebra& owner = s.owner();
  const FdAlgebra& a = owner.factor(Factor::A);
  const FdAlgebra& b = owner.factor(Factor::B);
  const FdAlgebra& discarded = keep == Factor::A ? b : a;
  const FdAlgebra& kept = keep == Factor::A ? a : b;
  if (!(y.owner() == discarded)) {
    throw Error(ErrorKind::AlgebraMismatch, "partial expectation needs an element of " +
                                                discarded.shorthand() + ", got " +
                                                y.owner().shorthand());
  }
  std::vector<Matrix> out;
  for (int d : kept.block_dims()) out.push_back(Matrix::Zero(d, d));

  for (int i = 0; i < a.num_blocks(); ++i) {
    const int n = a.block_dim(i);
    for (int j = 0; j < b.num_blocks(); ++j) {
      const int m = b.block_dim(j);
      const Matrix& w = s.block(tensor_block_index(b, i, j));
      if (keep == Factor::A) {
        // h[r, r'] = sum_{s, s'} w[(r, s), (r', s')] y[s', s]
        const Matrix& yj = y.block(j);
        Matrix& h = out[static_cast<std::size_t>(i)];
        for (int r = 0; r < n; ++r) {
          for (int rp = 0; rp < n; ++rp) {
            h(r, rp) += w.block(r * m, rp * m, m, m).cwiseProduct(yj.transpose()).sum();
          }
        }
      } else {
        // h[s, s'] = sum_{r, r'} w[(r, s), (r', s')] y[r', r]
        const Matrix& yi = y.block(i);
        Matrix& h = out[static_cast<std::size_t>(j)];
        for (int r = 0; r < n; ++r) {
          for (int rp = 0; rp < n; ++rp) {
            const Complex c = yi(rp, r);
            if (c != Complex(0.0)) h += c * w.block(r * m, rp * m, m, m);
          }
        }
      }
    }
  }
  return Element(kept, std::move(out));
}

State restrict_to_factor(const State& s, Factor keep) {
  const FdAlgebra& discarded = s.owner().factor(keep == Factor::A ? Factor::B : Factor::A);
  const Element reduced = partial_expectation(s, Element::identity(discarded), keep);
  return State(reduced.owner(), reduced.blocks());
}

State product_state(const State& r, const State& s) {
  const FdAlgebra owner = tensor(r.owner(), s.owner());
  std::vector<Matrix> blocks;
  for (const auto& rb : r.blocks()) {
    for (const auto& sb : s.blocks()) blocks.push_back(kron(rb, sb));
  }
  return State(owner, std::move(blocks));
}

PureVector product_vector(const PureVector& u, const PureVector& v) {
  const Matrix k = kron(u.psi(), v.psi());
  return PureVector::normalized(tensor(u.owner(), v.owner()), k.col(0));
}

State mixture(std::span<const double> weights, std::span<const State> parts) {
  if (weights.size() != parts.size() || parts.empty()) {
    throw Error(ErrorKind::InvalidArgument, "mixture needs one weight per part and at least one part");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorKind::InvalidArgument, "mixture weights must be >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > tol::kProbabilitySum) {
    throw Error(ErrorKind::InvalidArgument,
                "mixture weights must sum to 1, got " + std::to_string(total));
  }
  const FdAlgebra& owner = parts.front().owner();
  std::vector<Matrix> blocks;
  for (int d : owner.block_dims()) blocks.push_back(Matrix::Zero(d, d));
  for (std::size_t p = 0; p < parts.size(); ++p) {
    if (!(parts[p].owner() == owner)) {
      throw Error(ErrorKind::AlgebraMismatch, "mixture parts live on different algebras");
    }
    for (std::size_t k = 0; k < blocks.size(); ++k) blocks[k] += weights[p] * parts[p].blocks()[k];
  }
  return State(owner, std::move(blocks));
}

double purity(const State& s) {
  double p = 0.0;
  for (const auto& b : s.blocks()) p += b.cwiseAbs2().sum();
  return p;
}

double trace_distance(const Matrix& x, const Matrix& y) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian_part(x - y), Eigen::EigenvaluesOnly);
  return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const State& s, const State& t) {
  if (!(s.owner() == t.owner())) {
    throw Error(ErrorKind::AlgebraMismatch, "trace distance between states on different algebras");
  }
  double d = 0.0;
  for (std::size_t k = 0; k < s.blocks().size(); ++k) d += trace_distance(s.blocks()[k], t.blocks()[k]);
  return d;
}

// ---------------------------------------------------------------------------

PureVector random_pure(const FdAlgebra& a, Rng& rng) {
  if (a.num_blocks() != 1) {
    throw Error(ErrorKind::UnsupportedShape,
                "random vector states need a single-block algebra, got " + a.shorthand());
  }
  return PureVector::normalized(a, complex_gaussian_vector(a.total_dim(), rng));
}

PureVector random_pure(const FdAlgebra& a, std::uint64_t seed) {
  Rng rng(seed);
  return random_pure(a, rng);
}

State random_pure_state(const FdAlgebra& a, Rng& rng) {
  std::discrete_distribution<int> pick(a.block_dims().begin(), a.block_dims().end());
  const int chosen = a.num_blocks() == 1 ? 0 : pick(rng);
  std::vector<Matrix> blocks;
  for (int k = 0; k < a.num_blocks(); ++k) {
    const int d = a.block_dim(k);
    if (k == chosen) {
      Vector v = complex_gaussian_vector(d, rng);
      v /= v.norm();
      blocks.push_back(v * v.adjoint());
    } else {
      blocks.push_back(Matrix::Zero(d, d));
    }
  }
  return State(a, std::move(blocks));
}

State random_mixed(const FdAlgebra& a, Rng& rng) {
  std::vector<Matrix> blocks;
  double total = 0.0;
  for (int d : a.block_dims()) {
    const Matrix g = complex_gaussian_matrix(d, d, rng);
    blocks.push_back(hermitian_part(g * g.adjoint()));
    total += blocks.back().trace().real();
  }
  for (auto& b : blocks) b /= total;
  return State(a, std::move(blocks));
}

State random_mixed(const FdAlgebra& a, std::uint64_t seed) {
  Rng rng(seed);
  return random_mixed(a, rng);
}

Element random_contraction(const FdAlgebra& a, Rng& rng) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_real_distribution<double> shrink(0.0, 1.0);
  const bool as_sign = kind(rng) == 0;
  std::vector<Matrix> blocks;
  for (int d : a.block_dims()) {
    const Matrix g = complex_gaussian_matrix(d, d, rng);
    blocks.push_back(hermitian_part(g));
  }
  if (as_sign) {
    for (auto& b : blocks) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(b);
      Eigen::VectorXd signs = eig.eigenvalues().unaryExpr([](double x) { return x >= 0.0 ? 1.0 : -1.0; });
      b = eig.eigenvectors() * signs.asDiagonal() * eig.eigenvectors().adjoint();
      b = hermitian_part(b);
    }
    return Element(a, std::move(blocks));
  }
  Element h(a, std::move(blocks));
  const double norm = operator_norm(h);
  const double target = shrink(rng);
  return norm > 0.0 ? scale(h, target / norm) : h;
}

// ---------------------------------------------------------------------------

Matrix pauli(int k) {
  Matrix p(2, 2);
  switch (k) {
    case 0: p << 1, 0, 0, 1; break;
    case 1: p << 0, 1, 1, 0; break;
    case 2: p << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 3: p << 1, 0, 0, -1; break;
    default: throw Error(ErrorKind::InvalidArgument, "Pauli index must be 0..3");
  }
  return p;
}

PureVector singlet() {
  Vector psi = Vector::Zero(4);
  psi(1) = 1.0 / std::sqrt(2.0);
  psi(2) = -1.0 / std::sqrt(2.0);
  return PureVector::normalized(tensor(make_full(2), make_full(2)), psi);
}

State werner(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "Werner parameter must be in [0, 1]");
  const Vector psi = singlet().psi();
  const Matrix rho = p * psi * psi.adjoint() + (1.0 - p) * Matrix::Identity(4, 4) / 4.0;
  return State(tensor(make_full(2), make_full(2)), {rho});
}

}  // namespace raggio
