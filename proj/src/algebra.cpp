#include "raggio/algebra.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace raggio {

FdAlgebra::FdAlgebra(std::vector<int> block_dims) : dims_(std::move(block_dims)) {
  if (dims_.empty()) throw Error(ErrorKind::InvalidDimension, "algebra needs at least one block");
  offsets_.reserve(dims_.size());
  for (int d : dims_) {
    if (d < 1) {
      throw Error(ErrorKind::InvalidDimension,
                  "block dimension must be >= 1, got " + std::to_string(d));
    }
    offsets_.push_back(total_);
    total_ += d;
  }
}

bool FdAlgebra::is_commutative() const noexcept {
  return std::all_of(dims_.begin(), dims_.end(), [](int d) { return d == 1; });
}

const FdAlgebra& FdAlgebra::factor(Factor which) const {
  if (!factors_) {
    throw Error(ErrorKind::MissingFactorization,
                "algebra " + shorthand() + " was not built as a tensor product");
  }
  return which == Factor::A ? factors_->a : factors_->b;
}

namespace {

std::string plain_shorthand(const std::vector<int>& dims) {
  if (dims.size() == 1) return "M" + std::to_string(dims.front());
  if (std::all_of(dims.begin(), dims.end(), [](int d) { return d == 1; })) {
    return "D" + std::to_string(dims.size());
  }
  std::string out;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k) out += '+';
    out += "M" + std::to_string(dims[k]);
  }
  return out;
}

}  // namespace

std::string FdAlgebra::shorthand() const {
  if (!factors_) return plain_shorthand(dims_);
  std::string left = factors_->a.shorthand();
  std::string right = factors_->b.shorthand();
  if (left.find('+') != std::string::npos) left = "(" + left + ")";
  if (right.find('+') != std::string::npos || right.find('x') != std::string::npos) {
    right = "(" + right + ")";
  }
  return left + "x" + right;
}

bool operator==(const FdAlgebra& lhs, const FdAlgebra& rhs) {
  if (lhs.dims_ != rhs.dims_) return false;
  if (static_cast<bool>(lhs.factors_) != static_cast<bool>(rhs.factors_)) return false;
  if (!lhs.factors_ || lhs.factors_ == rhs.factors_) return true;
  return lhs.factors_->a == rhs.factors_->a && lhs.factors_->b == rhs.factors_->b;
}

FdAlgebra make_full(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidDimension, "M_n needs n >= 1, got " + std::to_string(n));
  return FdAlgebra({n});
}

FdAlgebra make_commutative(int m) {
  if (m < 1) throw Error(ErrorKind::InvalidDimension, "D_m needs m >= 1, got " + std::to_string(m));
  return FdAlgebra(std::vector<int>(static_cast<std::size_t>(m), 1));
}

FdAlgebra direct_sum(const FdAlgebra& a, const FdAlgebra& b) {
  std::vector<int> dims = a.block_dims();
  dims.insert(dims.end(), b.block_dims().begin(), b.block_dims().end());
  return FdAlgebra(std::move(dims));
}

FdAlgebra tensor(const FdAlgebra& a, const FdAlgebra& b) {
  std::vector<int> dims;
  dims.reserve(a.block_dims().size() * b.block_dims().size());
  for (int n : a.block_dims()) {
    for (int m : b.block_dims()) dims.push_back(n * m);
  }
  FdAlgebra out(std::move(dims));
  out.factors_ = std::make_shared<const FdAlgebra::Factors>(FdAlgebra::Factors{a, b});
  return out;
}

namespace {

class ShorthandParser {
 public:
  explicit ShorthandParser(std::string_view text) : text_(text) {}

  FdAlgebra parse() {
    FdAlgebra result = sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return result;
  }

 private:
  FdAlgebra sum() {
    FdAlgebra acc = product();
    while (consume('+')) acc = direct_sum(acc, product());
    return acc;
  }

  FdAlgebra product() {
    FdAlgebra acc = atom();
    while (consume('x')) acc = tensor(acc, atom());
    return acc;
  }

  FdAlgebra atom() {
    skip_space();
    if (consume('(')) {
      FdAlgebra inner = sum();
      if (!consume(')')) fail("missing ')'");
      return inner;
    }
    if (pos_ >= text_.size()) fail("expected M<n>, D<n> or '('");
    const char kind = text_[pos_];
    if (kind != 'M' && kind != 'D') fail("expected M<n>, D<n> or '('");
    ++pos_;
    const int n = number();
    return kind == 'M' ? make_full(n) : make_commutative(n);
  }

  int number() {
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + (text_[pos_] - '0');
      if (value > 1'000'000) fail("dimension too large");
      ++pos_;
    }
    if (pos_ == start) fail("expected a dimension");
    return static_cast<int>(value);
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorKind::Parse, "algebra shorthand '" + std::string(text_) + "' at offset " +
                                      std::to_string(pos_) + ": " + why);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

FdAlgebra parse_algebra(std::string_view text) { return ShorthandParser(text).parse(); }

// ---------------------------------------------------------------------------

Element::Element(FdAlgebra owner, std::vector<Matrix> blocks)
    : owner_(std::move(owner)), blocks_(std::move(blocks)) {
  if (static_cast<int>(blocks_.size()) != owner_.num_blocks()) {
    throw Error(ErrorKind::UnsupportedShape, "element has " + std::to_string(blocks_.size()) +
                                                 " blocks, algebra " + owner_.shorthand() +
                                                 " has " + std::to_string(owner_.num_blocks()));
  }
  for (int k = 0; k < owner_.num_blocks(); ++k) {
    const auto& b = blocks_[static_cast<std::size_t>(k)];
    if (b.rows() != owner_.block_dim(k) || b.cols() != owner_.block_dim(k)) {
      throw Error(ErrorKind::UnsupportedShape,
                  "block " + std::to_string(k) + " must be " + std::to_string(owner_.block_dim(k)) +
                      "x" + std::to_string(owner_.block_dim(k)));
    }
  }
}

Element Element::identity(const FdAlgebra& owner) {
  std::vector<Matrix> blocks;
  for (int d : owner.block_dims()) blocks.push_back(Matrix::Identity(d, d));
  return Element(owner, std::move(blocks));
}

Element Element::zero(const FdAlgebra& owner) {
  std::vector<Matrix> blocks;
  for (int d : owner.block_dims()) blocks.push_back(Matrix::Zero(d, d));
  return Element(owner, std::move(blocks));
}

Element Element::from_dense(const FdAlgebra& owner, const Matrix& dense, double tol) {
  const int n = owner.total_dim();
  if (dense.rows() != n || dense.cols() != n) {
    throw Error(ErrorKind::UnsupportedShape, "dense matrix must be " + std::to_string(n) + "x" +
                                                 std::to_string(n) + " for " + owner.shorthand());
  }
  Matrix residual = dense;
  std::vector<Matrix> blocks;
  for (int k = 0; k < owner.num_blocks(); ++k) {
    const int off = owner.block_offset(k);
    const int d = owner.block_dim(k);
    blocks.push_back(dense.block(off, off, d, d));
    residual.block(off, off, d, d).setZero();
  }
  if (n > 0 && residual.cwiseAbs().maxCoeff() > tol) {
    throw Error(ErrorKind::UnsupportedShape,
                "matrix is not block-diagonal for algebra " + owner.shorthand());
  }
  return Element(owner, std::move(blocks));
}

Matrix Element::dense() const {
  const int n = owner_.total_dim();
  Matrix out = Matrix::Zero(n, n);
  for (int k = 0; k < owner_.num_blocks(); ++k) {
    const int off = owner_.block_offset(k);
    const int d = owner_.block_dim(k);
    out.block(off, off, d, d) = blocks_[static_cast<std::size_t>(k)];
  }
  return out;
}

bool Element::is_self_adjoint(double tol) const {
  return std::all_of(blocks_.begin(), blocks_.end(),
                     [tol](const Matrix& b) { return hermiticity_defect(b) <= tol; });
}

namespace {

void require_same_owner(const Element& x, const Element& y, const char* op) {
  if (!(x.owner() == y.owner())) {
    throw Error(ErrorKind::AlgebraMismatch, std::string(op) + ": elements of " +
                                                x.owner().shorthand() + " and " +
                                                y.owner().shorthand());
  }
}

template <typename F>
Element blockwise(const Element& x, F&& f) {
  std::vector<Matrix> blocks;
  blocks.reserve(x.blocks().size());
  for (std::size_t k = 0; k < x.blocks().size(); ++k) blocks.push_back(f(k));
  return Element(x.owner(), std::move(blocks));
}

}  // namespace

Element adjoint(const Element& x) {
  return blockwise(x, [&](std::size_t k) -> Matrix { return x.blocks()[k].adjoint(); });
}

Element multiply(const Element& x, const Element& y) {
  require_same_owner(x, y, "multiply");
  return blockwise(x, [&](std::size_t k) -> Matrix { return x.blocks()[k] * y.blocks()[k]; });
}

Element add(const Element& x, const Element& y) {
  require_same_owner(x, y, "add");
  return blockwise(x, [&](std::size_t k) -> Matrix { return x.blocks()[k] + y.blocks()[k]; });
}

Element subtract(const Element& x, const Element& y) {
  require_same_owner(x, y, "subtract");
  return blockwise(x, [&](std::size_t k) -> Matrix { return x.blocks()[k] - y.blocks()[k]; });
}

Element scale(const Element& x, Complex c) {
  return blockwise(x, [&](std::size_t k) -> Matrix { return c * x.blocks()[k]; });
}

double operator_norm(const Element& x) {
  // sigma_max(X)^2 is the top eigenvalue of the Hermitian matrix X^* X.
  double best = 0.0;
  for (const Matrix& b : x.blocks()) {
    const Matrix gram = hermitian_part(b.adjoint() * b);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    best = std::max(best, eig.eigenvalues().maxCoeff());
  }
  return std::sqrt(std::max(best, 0.0));
}

Element tensor(const Element& x, const Element& y) {
  const FdAlgebra owner = tensor(x.owner(), y.owner());
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<std::size_t>(owner.num_blocks()));
  for (const Matrix& xb : x.blocks()) {
    for (const Matrix& yb : y.blocks()) blocks.push_back(kron(xb, yb));
  }
  return Element(owner, std::move(blocks));
}

std::vector<Element> matrix_units(const FdAlgebra& a) {
  std::vector<Element> units;
  for (int k = 0; k < a.num_blocks(); ++k) {
    const int d = a.block_dim(k);
    for (int r = 0; r < d; ++r) {
      for (int s = 0; s < d; ++s) {
        Element e = Element::zero(a);
        std::vector<Matrix> blocks = e.blocks();
        blocks[static_cast<std::size_t>(k)](r, s) = 1.0;
        units.emplace_back(a, std::move(blocks));
      }
    }
  }
  return units;
}

bool commutes_on_generators(const FdAlgebra& a, double tol) {
  const auto units = matrix_units(a);
  for (std::size_t i = 0; i < units.size(); ++i) {
    for (std::size_t j = i + 1; j < units.size(); ++j) {
      const Element c = subtract(multiply(units[i], units[j]), multiply(units[j], units[i]));
      if (operator_norm(c) > tol) return false;
    }
  }
  return true;
}

}  // namespace raggio
