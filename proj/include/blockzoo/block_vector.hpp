#ifndef BLOCKZOO_BLOCK_VECTOR_HPP
#define BLOCKZOO_BLOCK_VECTOR_HPP

#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace blockzoo {

/// Concatenation of per-agent decision blocks; block i has a fixed dimension
/// for the lifetime of the vector. Agents are 1-based.
class BlockVector {
 public:
  BlockVector() = default;

  explicit BlockVector(const std::vector<int>& dims) {
    blocks_.reserve(dims.size());
    for (int d : dims) {
      if (d < 1) throw std::invalid_argument("BlockVector: block dim must be >= 1");
      blocks_.emplace_back(Eigen::VectorXd::Zero(d));
    }
  }

  explicit BlockVector(std::vector<Eigen::VectorXd> blocks)
      : blocks_(std::move(blocks)) {}

  int n_blocks() const { return int(blocks_.size()); }

  int block_dim(int i) const { return int(at(i).size()); }

  int total_dim() const {
    int q = 0;
    for (const auto& b : blocks_) q += int(b.size());
    return q;
  }

  const Eigen::VectorXd& block(int i) const { return at(i); }

  void set_block(int i, const Eigen::VectorXd& v) {
    if (v.size() != at(i).size())
      throw std::invalid_argument("BlockVector: block dimension mismatch");
    blocks_[i - 1] = v;
  }

  std::vector<int> dims() const {
    std::vector<int> d(blocks_.size());
    for (size_t i = 0; i < blocks_.size(); ++i) d[i] = int(blocks_[i].size());
    return d;
  }

  Eigen::VectorXd flatten() const {
    Eigen::VectorXd v(total_dim());
    int off = 0;
    for (const auto& b : blocks_) {
      v.segment(off, b.size()) = b;
      off += int(b.size());
    }
    return v;
  }

  static BlockVector from_flat(const Eigen::VectorXd& v, const std::vector<int>& dims) {
    BlockVector bv(dims);
    int off = 0;
    for (size_t i = 0; i < dims.size(); ++i) {
      if (off + dims[i] > v.size())
        throw std::invalid_argument("BlockVector::from_flat: dimension mismatch");
      bv.blocks_[i] = v.segment(off, dims[i]);
      off += dims[i];
    }
    if (off != v.size())
      throw std::invalid_argument("BlockVector::from_flat: dimension mismatch");
    return bv;
  }

  double norm() const { return flatten().norm(); }

  bool operator==(const BlockVector& o) const {
    if (blocks_.size() != o.blocks_.size()) return false;
    for (size_t i = 0; i < blocks_.size(); ++i)
      if (blocks_[i] != o.blocks_[i]) return false;
    return true;
  }

 private:
  const Eigen::VectorXd& at(int i) const {
    if (i < 1 || i > n_blocks())
      throw std::invalid_argument("BlockVector: block index out of range");
    return blocks_[i - 1];
  }

  std::vector<Eigen::VectorXd> blocks_;
};

}  // namespace blockzoo

#endif  // BLOCKZOO_BLOCK_VECTOR_HPP
