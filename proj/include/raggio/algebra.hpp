#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "raggio/common.hpp"

namespace raggio {

/// A finite-dimensional C*-algebra in Artin-Wedderburn normal form,
/// M_{n_1} (+) ... (+) M_{n_k}, acting block-diagonally on C^{n_1 + ... + n_k}.
///
/// Algebras built by tensor() remember their two factors so that states on
/// them can be restricted. Values are immutable and cheap to copy.
class FdAlgebra {
 public:
  /// Direct sum of full matrix blocks. Throws InvalidDimension on an empty
  /// list or a zero block.
  explicit FdAlgebra(std::vector<int> block_dims);

  const std::vector<int>& block_dims() const noexcept { return dims_; }
  int num_blocks() const noexcept { return static_cast<int>(dims_.size()); }
  int block_dim(int k) const { return dims_.at(static_cast<std::size_t>(k)); }
  int block_offset(int k) const { return offsets_.at(static_cast<std::size_t>(k)); }
  int total_dim() const noexcept { return total_; }

  bool is_commutative() const noexcept;

  bool is_tensor_product() const noexcept { return factors_ != nullptr; }
  /// Throws MissingFactorization unless built by tensor().
  const FdAlgebra& factor(Factor which) const;

  /// Compact name in the `M<n>` / `D<n>` / `+` / `x` grammar.
  std::string shorthand() const;

  friend bool operator==(const FdAlgebra& lhs, const FdAlgebra& rhs);

 private:
  struct Factors;
  friend FdAlgebra tensor(const FdAlgebra& a, const FdAlgebra& b);

  std::vector<int> dims_;
  std::vector<int> offsets_;
  int total_ = 0;
  std::shared_ptr<const Factors> factors_;
};

struct FdAlgebra::Factors {
  FdAlgebra a;
  FdAlgebra b;
};

FdAlgebra make_full(int n);
FdAlgebra make_commutative(int m);
FdAlgebra direct_sum(const FdAlgebra& a, const FdAlgebra& b);

/// Blocks n_i * m_j in lexicographic (i, j) order. The result records (a, b).
FdAlgebra tensor(const FdAlgebra& a, const FdAlgebra& b);

/// Index of block (i, j) of tensor(a, b); only b's block count matters.
inline int tensor_block_index(const FdAlgebra& b, int i, int j) {
  return i * b.num_blocks() + j;
}

/// Parses `M2`, `D3`, `M2+M1`, `M2xD2`, `(M2+M1)xM2`. `x` binds tighter than `+`.
FdAlgebra parse_algebra(std::string_view text);

/// A block-diagonal matrix belonging to a specific algebra.
class Element {
 public:
  /// Throws UnsupportedShape when block shapes do not match the owner.
  Element(FdAlgebra owner, std::vector<Matrix> blocks);

  static Element identity(const FdAlgebra& owner);
  static Element zero(const FdAlgebra& owner);
  /// Reads the diagonal blocks of a dense matrix; off-block entries must vanish.
  static Element from_dense(const FdAlgebra& owner, const Matrix& dense, double tol = 1e-12);

  const FdAlgebra& owner() const noexcept { return owner_; }
  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }
  const Matrix& block(int k) const { return blocks_.at(static_cast<std::size_t>(k)); }

  Matrix dense() const;
  bool is_self_adjoint(double tol = tol::kHermitian) const;

 private:
  FdAlgebra owner_;
  std::vector<Matrix> blocks_;
};

Element adjoint(const Element& x);
Element multiply(const Element& x, const Element& y);
Element add(const Element& x, const Element& y);
Element subtract(const Element& x, const Element& y);
Element scale(const Element& x, Complex c);
/// Largest singular value over all blocks.
double operator_norm(const Element& x);

/// x (x) y as an element of tensor(x.owner(), y.owner()).
Element tensor(const Element& x, const Element& y);

/// The matrix units E_{rs} of every block; they span the algebra.
std::vector<Element> matrix_units(const FdAlgebra& a);

/// Exhaustive commutator check over matrix units.
bool commutes_on_generators(const FdAlgebra& a, double tol = tol::kCommutator);

}  // namespace raggio
